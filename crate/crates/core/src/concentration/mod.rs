//! Random sampling, empirical concentration of measure and synthetic generators.

mod alpha;
mod generator;
mod sampling;

pub use alpha::{
    empirical_alpha, isoperimetry_audit, AlphaRow, AlphaTable, GaussianHalfSpace, IsoperimetryAudit,
    IsoperimetryRow, SetFamily, UnitaryTraceFamily, MAX_RETAINED,
};
pub use generator::{make_generator, EncodedGenerator, Generator};
pub use sampling::{
    complex_normal, ginibre, sample_gaussian, sample_haar_pure, sample_haar_unitary, sample_mixed_state,
    sample_mixed_state_rank,
};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::linalg::ComplexMatrix;
use crate::rng::Seed;

/// One row of a concentration table as written to CSV.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationRow {
    pub epsilon_or_tau: f64,
    pub value: f64,
    pub std_error: f64,
    pub bound_value: f64,
    pub bound_holds: bool,
}

pub const CONCENTRATION_HEADER: [&str; 5] = ["epsilon_or_tau", "value", "std_error", "bound_value", "bound_holds"];

/// `count` Haar unitaries, sample `i` drawn from stream `i` of `seed`.
pub fn sample_haar_unitaries(n: usize, count: usize, seed: Seed) -> Result<Vec<ComplexMatrix>> {
    (0..count).into_par_iter().map(|i| sample_haar_unitary(n, &mut seed.stream(i as u64))).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModulusRow {
    pub tau: f64,
    /// Monotone envelope of the sampled maxima.
    pub omega_hat: f64,
    /// `min(n, L tau)`.
    pub certified: f64,
}

/// Lower estimate of the pixel modulus: for each `tau`, the largest
/// `||g1(z) - g1(z')||_1` over random pairs at latent distance `tau`, then
/// a running maximum over the grid (sorted ascending).
pub fn estimate_modulus(gen: &Generator, tau_grid: &[f64], pairs_per_tau: usize, seed: u64) -> Result<Vec<ModulusRow>> {
    if tau_grid.iter().any(|t| !(*t >= 0.0)) {
        return Err(invalid("tau grid must be nonnegative"));
    }
    let mut taus = tau_grid.to_vec();
    taus.sort_by(f64::total_cmp);
    let root = Seed(seed);
    let maxima = taus
        .par_iter()
        .enumerate()
        .map(|(i, &tau)| {
            let mut rng = root.stream(i as u64);
            let mut best: f64 = 0.0;
            for _ in 0..pairs_per_tau {
                let z = &sample_gaussian(gen.m, 1, &mut rng)[0];
                let mut dir = sample_gaussian(gen.m, 1, &mut rng).remove(0);
                let norm = dir.iter().map(|x| x * x).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
                dir.iter_mut().for_each(|x| *x *= tau / norm);
                let z2: Vec<f64> = z.iter().zip(&dir).map(|(a, b)| a + b).collect();
                best = best.max(gen.pixels(z)?.l1_distance(&gen.pixels(&z2)?));
            }
            Ok(best)
        })
        .collect::<Result<Vec<f64>>>()?;
    let mut env: f64 = 0.0;
    Ok(taus
        .iter()
        .zip(maxima)
        .map(|(&tau, m)| {
            env = env.max(m);
            ModulusRow { tau, omega_hat: env, certified: (gen.certified_lipschitz * tau).min(gen.n as f64) }
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeviationTable {
    pub dim: usize,
    /// Haar mean `tr(O) / N`.
    pub mean: f64,
    pub median_abs_deviation: f64,
    /// `(t, Pr[|<psi|O|psi> - mean| > t], std_error)`.
    pub rows: Vec<(f64, f64, f64)>,
}

/// Empirical deviation of `<psi|O|psi>` from its Haar mean over random pure states.
pub fn deviation_probability(
    n: usize,
    observable: &ComplexMatrix,
    t_grid: &[f64],
    samples: usize,
    seed: u64,
) -> Result<DeviationTable> {
    if observable.rows() != n || observable.cols() != n {
        return Err(invalid("observable dimension does not match"));
    }
    if observable.hermiticity_defect() > 1e-10 {
        return Err(invalid("observable must be Hermitian"));
    }
    if samples == 0 {
        return Err(invalid("need at least one sample"));
    }
    let mean = observable.trace().re / n as f64;
    let root = Seed(seed);
    let devs = (0..samples)
        .into_par_iter()
        .map(|i| {
            let psi = sample_haar_pure(n, &mut root.stream(i as u64))?;
            let v = observable.apply(psi.amplitudes())?;
            Ok((crate::linalg::inner(psi.amplitudes(), &v).re - mean).abs())
        })
        .collect::<Result<Vec<f64>>>()?;
    let mut sorted = devs.clone();
    sorted.sort_by(f64::total_cmp);
    let median_abs_deviation = if samples % 2 == 1 {
        sorted[samples / 2]
    } else {
        0.5 * (sorted[samples / 2 - 1] + sorted[samples / 2])
    };
    let total = samples as f64;
    let rows = t_grid
        .iter()
        .map(|&t| {
            let p = devs.iter().filter(|&&d| d > t).count() as f64 / total;
            (t, p, (p * (1.0 - p) / total).sqrt())
        })
        .collect();
    Ok(DeviationTable { dim: n, mean, median_abs_deviation, rows })
}

/// A uniformly random unit vector in `R^m`.
pub fn random_direction<R: Rng + ?Sized>(m: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let v = sample_gaussian(m, 1, rng).remove(0);
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_observable_never_deviates() {
        let t = deviation_probability(4, &ComplexMatrix::identity(4), &[1e-12, 0.1], 200, 3).unwrap();
        assert!(t.rows.iter().all(|r| r.1 == 0.0));
        assert!(t.median_abs_deviation < 1e-12);
    }

    #[test]
    fn deviation_is_deterministic() {
        let o = ComplexMatrix::from_real_diagonal(&[1.0, 0.0]);
        let a = deviation_probability(2, &o, &[0.1], 300, 9).unwrap();
        let b = deviation_probability(2, &o, &[0.1], 300, 9).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn modulus_at_zero_and_under_certificate() {
        let g = make_generator(3, 5, 1, 2.0).unwrap();
        let rows = estimate_modulus(&g, &[0.0, 0.5, 1.0], 200, 4).unwrap();
        assert_eq!(rows[0].omega_hat, 0.0);
        for r in &rows {
            assert!(r.omega_hat <= r.certified + 1e-9);
        }
        assert!(rows.windows(2).all(|w| w[0].omega_hat <= w[1].omega_hat));
    }

    #[test]
    fn constant_generator() {
        let g = make_generator(2, 3, 5, 0.0).unwrap();
        let a = g.pixels(&[0.0, 0.0]).unwrap();
        let b = g.pixels(&[3.0, -7.0]).unwrap();
        assert_eq!(a, b);
        assert_eq!(g.certified_lipschitz, 0.0);
    }

    #[test]
    fn unitaries_are_deterministic_per_stream() {
        let a = sample_haar_unitaries(3, 4, Seed(8)).unwrap();
        let b = sample_haar_unitaries(3, 4, Seed(8)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a[0], a[1]);
    }
}
