//! Empirical concentration functions over threshold set families.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::gaussian_cdf;
use crate::error::{invalid, Error, Result};
use crate::linalg::{hermitian_eigen, ComplexMatrix, C64};

/// Base sets retained for nearest-sample distance queries.
pub const MAX_RETAINED: usize = 5000;

/// Sets of the form `{x : statistic(x) <= threshold}` in a metric space.
pub trait SetFamily<P>: Sync {
    fn statistic(&self, x: &P) -> f64;
    fn threshold(&self) -> f64;
    fn distance(&self, a: &P, b: &P) -> f64;

    /// A constructive upper bound on the distance from `x` to the set, if the
    /// family has one. The estimator uses the smaller of this and the nearest
    /// retained base sample.
    fn distance_to_set_upper(&self, _x: &P) -> Option<f64> {
        None
    }

    fn contains(&self, x: &P) -> bool {
        self.statistic(x) <= self.threshold()
    }
}

/// Half-space `{z : z_0 <= a}` of Euclidean space.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussianHalfSpace {
    pub a: f64,
}

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

impl SetFamily<Vec<f64>> for GaussianHalfSpace {
    fn statistic(&self, x: &Vec<f64>) -> f64 {
        x[0]
    }
    fn threshold(&self) -> f64 {
        self.a
    }
    fn distance(&self, a: &Vec<f64>, b: &Vec<f64>) -> f64 {
        euclid(a, b)
    }
    fn distance_to_set_upper(&self, x: &Vec<f64>) -> Option<f64> {
        Some((x[0] - self.a).max(0.0))
    }
}

/// Sublevel sets of `Re tr(W^dagger U)` on the unitary group with the
/// Frobenius metric.
#[derive(Clone, Debug)]
pub struct UnitaryTraceFamily {
    pub w: ComplexMatrix,
    pub a: f64,
}

impl UnitaryTraceFamily {
    /// Phases of the unitary `X`. `X` is normal, so its eigenvectors are
    /// those of the Hermitian combination `H + sqrt2 K` with `H`, `K` the
    /// Hermitian and anti-Hermitian parts.
    fn phases(x: &ComplexMatrix) -> Vec<f64> {
        let n = x.rows();
        let xa = x.adjoint();
        let c = C64::new(0.0, -std::f64::consts::SQRT_2 / 2.0);
        let combo = ComplexMatrix::from_fn(n, n, |i, j| {
            let h = (x[(i, j)] + xa[(i, j)]) * 0.5;
            let k = (x[(i, j)] - xa[(i, j)]) * c;
            h + k
        });
        let eig = hermitian_eigen(&combo.hermitian_part()).expect("combination is Hermitian");
        (0..n)
            .map(|k| {
                let v = eig.vector(k);
                crate::linalg::inner(&v, &x.apply(&v).expect("square")).arg()
            })
            .collect()
    }
}

/// Frobenius distance after moving each phase by `step[k]` toward `pi`.
fn phase_move(phases: &[f64], steps: &[f64]) -> (f64, f64) {
    let mut stat = 0.0;
    let mut dist2 = 0.0;
    for (&p, &s) in phases.iter().zip(steps) {
        let q = if p >= 0.0 { p + s } else { p - s };
        stat += q.cos();
        dist2 += 4.0 * (0.5 * s).sin().powi(2);
    }
    (stat, dist2.sqrt())
}

impl SetFamily<ComplexMatrix> for UnitaryTraceFamily {
    fn statistic(&self, u: &ComplexMatrix) -> f64 {
        (&self.w.adjoint() * u).trace().re
    }
    fn threshold(&self) -> f64 {
        self.a
    }
    fn distance(&self, a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
        (a - b).frobenius_norm()
    }

    /// Rotates the eigenphases of `W^dagger U` toward `pi` until the trace
    /// reaches the threshold, under two step profiles (equal steps, and steps
    /// proportional to the remaining angle), and returns the cheaper one.
    fn distance_to_set_upper(&self, u: &ComplexMatrix) -> Option<f64> {
        let x = &self.w.adjoint() * u;
        let phases = Self::phases(&x);
        let remaining: Vec<f64> = phases.iter().map(|p| std::f64::consts::PI - p.abs()).collect();
        let profiles: [Box<dyn Fn(f64) -> Vec<f64>>; 2] = [
            Box::new(|beta: f64| remaining.iter().map(|r| r.min(beta * std::f64::consts::PI)).collect()),
            Box::new(|beta: f64| remaining.iter().map(|r| r * beta).collect()),
        ];
        let mut best: Option<f64> = None;
        for profile in &profiles {
            let (stat_full, _) = phase_move(&phases, &profile(1.0));
            if stat_full > self.a {
                continue;
            }
            let (mut lo, mut hi) = (0.0, 1.0);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if phase_move(&phases, &profile(mid)).0 <= self.a {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            let d = phase_move(&phases, &profile(hi)).1;
            best = Some(best.map_or(d, |b: f64| b.min(d)));
        }
        best
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlphaRow {
    pub epsilon: f64,
    pub alpha: f64,
    pub std_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlphaTable {
    pub base_measure: f64,
    pub samples: usize,
    pub retained: usize,
    pub rows: Vec<AlphaRow>,
}

/// Empirical concentration function of a threshold set.
///
/// `alpha(eps) = 1 - (fraction of points within eps of the base set)`, where
/// the distance from a point to the set is the smaller of its distance to the
/// nearest of the first [`MAX_RETAINED`] base points and the family's
/// constructive bound. Distances are computed once and reused across the grid.
pub fn empirical_alpha<P: Sync, F: SetFamily<P>>(points: &[P], family: &F, eps_grid: &[f64]) -> Result<AlphaTable> {
    if points.is_empty() {
        return Err(invalid("no sample points"));
    }
    let total = points.len() as f64;
    let inside: Vec<bool> = points.par_iter().map(|p| family.contains(p)).collect();
    let base_count = inside.iter().filter(|&&b| b).count();
    let base_measure = base_count as f64 / total;
    let mc_error = (0.25 / total).sqrt();
    if base_measure < 0.5 - 3.0 * mc_error {
        return Err(Error::Configuration(format!(
            "base set has empirical measure {base_measure}, below one half"
        )));
    }
    let retained: Vec<&P> = points.iter().zip(&inside).filter(|(_, &b)| b).map(|(p, _)| p).take(MAX_RETAINED).collect();
    let distances: Vec<f64> = points
        .par_iter()
        .zip(inside.par_iter())
        .map(|(p, &is_in)| {
            if is_in {
                return 0.0;
            }
            let mut d = family.distance_to_set_upper(p).unwrap_or(f64::INFINITY);
            for b in &retained {
                d = d.min(family.distance(p, b));
            }
            d
        })
        .collect();
    let rows = eps_grid
        .iter()
        .map(|&eps| {
            let covered = distances.iter().filter(|&&d| d <= eps).count() as f64 / total;
            let alpha = 1.0 - covered;
            AlphaRow { epsilon: eps, alpha, std_error: (alpha * (1.0 - alpha) / total).sqrt() }
        })
        .collect();
    Ok(AlphaTable { base_measure, samples: points.len(), retained: retained.len(), rows })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IsoperimetryRow {
    pub epsilon: f64,
    /// Monte Carlo measure of the expansion `{z : z_0 <= a + eps}`.
    pub measure: f64,
    pub std_error: f64,
    /// `Phi(a + eps)`.
    pub exact: f64,
    pub within_3sigma: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IsoperimetryAudit {
    pub m: usize,
    pub a: f64,
    pub samples: usize,
    pub rows: Vec<IsoperimetryRow>,
    /// `(delta, 1 - Phi(3 delta), 1 - Phi(delta), holds)` for the two-interval example.
    pub two_interval: Vec<(f64, f64, f64, bool)>,
}

impl IsoperimetryAudit {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.within_3sigma) && self.two_interval.iter().all(|t| t.3)
    }
}

/// Compares the half-space expansion measure against `Phi(a + eps)`, with the
/// standard error taken from the exact value. `points` are Gaussian samples in `R^m`.
pub fn isoperimetry_audit(
    points: &[Vec<f64>],
    a: f64,
    eps_grid: &[f64],
    delta_grid: &[f64],
) -> Result<IsoperimetryAudit> {
    let m = points.first().map(Vec::len).ok_or_else(|| invalid("no sample points"))?;
    let fam = GaussianHalfSpace { a };
    let total = points.len() as f64;
    let distances: Vec<f64> = points.iter().map(|p| fam.distance_to_set_upper(p).expect("exact")).collect();
    let rows = eps_grid
        .iter()
        .map(|&eps| {
            let measure = distances.iter().filter(|&&d| d <= eps).count() as f64 / total;
            let exact = gaussian_cdf(a + eps);
            let std_error = (exact * (1.0 - exact) / total).sqrt();
            IsoperimetryRow { epsilon: eps, measure, std_error, exact, within_3sigma: (measure - exact).abs() <= 3.0 * std_error }
        })
        .collect();
    let two_interval = delta_grid
        .iter()
        .map(|&d| {
            let (l, r) = (1.0 - gaussian_cdf(3.0 * d), 1.0 - gaussian_cdf(d));
            (d, l, r, l <= r)
        })
        .collect();
    Ok(IsoperimetryAudit { m, a, samples: points.len(), rows, two_interval })
}
