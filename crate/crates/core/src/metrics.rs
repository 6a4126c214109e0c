//! Distances and fidelity between density matrices, and the audit of the
//! confidence-change inequalities for a channel followed by a POVM.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::classifier::{KrausChannel, POVMSet};
use crate::error::{invalid, Error, Result};
use crate::linalg::{hermitian_eigen, hermitian_trace_norm, psd_sqrt_matrix, ComplexMatrix};
use crate::state::DensityMatrix;

/// Slack used by the inequality audits.
pub const AUDIT_SLACK: f64 = 1e-9;
/// Relative eigenvalue threshold of [`numeric_rank`].
pub const RANK_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistanceKind {
    Trace,
    HilbertSchmidt,
    Bures,
    Hellinger,
}

impl DistanceKind {
    pub const ALL: [DistanceKind; 4] =
        [DistanceKind::Trace, DistanceKind::HilbertSchmidt, DistanceKind::Bures, DistanceKind::Hellinger];

    pub fn as_str(self) -> &'static str {
        match self {
            DistanceKind::Trace => "trace",
            DistanceKind::HilbertSchmidt => "hilbert_schmidt",
            DistanceKind::Bures => "bures",
            DistanceKind::Hellinger => "hellinger",
        }
    }
}

impl fmt::Display for DistanceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DistanceKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        DistanceKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| invalid(format!("unknown distance kind '{s}'")))
    }
}

fn same_dim(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<()> {
    if rho.dim() != sigma.dim() {
        return Err(invalid(format!("dimension mismatch: {} vs {}", rho.dim(), sigma.dim())));
    }
    Ok(())
}

/// Distance of the given kind. `Trace` is the full norm `||rho - sigma||_1` in `[0, 2]`.
pub fn distance(kind: DistanceKind, rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    same_dim(rho, sigma)?;
    match kind {
        DistanceKind::Trace => trace_norm_distance(rho, sigma),
        DistanceKind::HilbertSchmidt => Ok(hilbert_schmidt_distance(rho, sigma)),
        DistanceKind::Bures => bures_distance(rho, sigma),
        DistanceKind::Hellinger => hellinger_distance(rho, sigma),
    }
}

/// `||rho - sigma||_1`, in `[0, 2]`.
pub fn trace_norm_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    same_dim(rho, sigma)?;
    let d = hermitian_trace_norm(&(rho.matrix() - sigma.matrix()))?;
    Ok(d.clamp(0.0, 2.0))
}

/// Conventional trace distance `||rho - sigma||_1 / 2`, in `[0, 1]`.
pub fn trace_distance_halved(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    Ok(trace_norm_distance(rho, sigma)? / 2.0)
}

/// Frobenius norm of `rho - sigma`.
pub fn hilbert_schmidt_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> f64 {
    (rho.matrix() - sigma.matrix()).frobenius_norm()
}

/// Bures distance `sqrt(2 (1 - sqrt F))`.
pub fn bures_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    let f = fidelity(rho, sigma)?;
    Ok((2.0 * (1.0 - f.sqrt())).max(0.0).sqrt())
}

/// Hellinger distance `sqrt(2 - 2 tr(sqrt(rho) sqrt(sigma)))`.
pub fn hellinger_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    same_dim(rho, sigma)?;
    let a = psd_sqrt_matrix(rho.matrix())?;
    let b = psd_sqrt_matrix(sigma.matrix())?;
    let overlap = (&a * &b).trace().re.clamp(0.0, 1.0);
    Ok((2.0 - 2.0 * overlap).max(0.0).sqrt())
}

/// Returns the unit eigenvector when `rho` has numeric rank one.
fn pure_vector(rho: &DensityMatrix) -> Result<Option<Vec<crate::linalg::C64>>> {
    let eig = hermitian_eigen(rho.matrix())?;
    let n = eig.values.len();
    let max = eig.values[n - 1];
    let rank = eig.values.iter().filter(|&&x| x > RANK_TOL * max).count();
    Ok((rank == 1).then(|| eig.vector(n - 1)))
}

/// Uhlmann fidelity `(tr sqrt(sqrt(rho) sigma sqrt(rho)))^2`, in `[0, 1]`.
///
/// When either argument is pure this reduces to `<v|other|v>`, which avoids
/// square roots of nearly singular matrices.
pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    same_dim(rho, sigma)?;
    for (a, b) in [(rho, sigma), (sigma, rho)] {
        if let Some(v) = pure_vector(a)? {
            let w = b.matrix().apply(&v)?;
            return Ok(crate::linalg::inner(&v, &w).re.clamp(0.0, 1.0));
        }
    }
    let a = psd_sqrt_matrix(rho.matrix())?;
    let b = psd_sqrt_matrix(sigma.matrix())?;
    let root_f = (&a * &b).nuclear_norm();
    Ok((root_f * root_f).clamp(0.0, 1.0))
}

/// Number of eigenvalues above `1e-10` times the largest one.
pub fn numeric_rank(rho: &DensityMatrix) -> usize {
    // A validated density matrix is Hermitian, so the decomposition cannot fail.
    let eig = hermitian_eigen(rho.matrix()).expect("density matrices are Hermitian");
    let max = eig.values.last().copied().unwrap_or(0.0);
    eig.values.iter().filter(|&&x| x > RANK_TOL * max).count().max(1)
}

/// Trace norm of an arbitrary Hermitian operator.
pub fn trace_norm(m: &ComplexMatrix) -> Result<f64> {
    hermitian_trace_norm(m)
}

/// Every quantity in the confidence-change inequality chain for one
/// `(channel, POVM, rho, sigma)` tuple, with one flag per inequality.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConfidenceAudit {
    /// `|tr(E(rho - sigma) Pi_s)|` per POVM element.
    pub confidence_deltas: Vec<f64>,
    pub confidence_sum: f64,
    /// `||E(rho) - E(sigma)||_1`.
    pub output_trace_norm: f64,
    /// `||rho - sigma||_1`.
    pub trace_norm: f64,
    /// `tr(E*(Pi_s)) ||rho - sigma||_1` per element.
    pub dual_bounds: Vec<f64>,
    pub hilbert_schmidt: f64,
    /// `R = r_rho r_sigma / (r_rho + r_sigma)`.
    pub rank_factor: f64,
    /// `2 sqrt(R) ||rho - sigma||_2`.
    pub hs_bound: f64,
    pub bures: f64,
    /// `2 ||rho - sigma||_B`.
    pub bures_bound: f64,
    pub hellinger: f64,
    /// `2 ||rho - sigma||_H`.
    pub hellinger_bound: f64,
    /// `2 sqrt(B^2 - B^4 / 4)`.
    pub bures_refined: f64,
    pub trace_bound_holds: bool,
    pub contractive_holds: bool,
    pub dual_holds: bool,
    pub hs_holds: bool,
    pub bures_holds: bool,
    pub hellinger_holds: bool,
    pub ordering_holds: bool,
}

impl ConfidenceAudit {
    /// Names of the inequalities that failed.
    pub fn violations(&self) -> Vec<&'static str> {
        [
            ("trace", self.trace_bound_holds),
            ("contractivity", self.contractive_holds),
            ("dual", self.dual_holds),
            ("hilbert_schmidt", self.hs_holds),
            ("bures", self.bures_holds),
            ("hellinger", self.hellinger_holds),
            ("ordering", self.ordering_holds),
        ]
        .into_iter()
        .filter(|(_, ok)| !ok)
        .map(|(name, _)| name)
        .collect()
    }

    pub fn all_hold(&self) -> bool {
        self.violations().is_empty()
    }
}

pub fn confidence_change_audit(
    channel: &KrausChannel,
    povm: &POVMSet,
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
) -> Result<ConfidenceAudit> {
    same_dim(rho, sigma)?;
    if channel.input_dim() != rho.dim() {
        return Err(invalid("channel input dimension does not match the states"));
    }
    if channel.output_dim() != povm.dim() {
        return Err(invalid("POVM dimension does not match the channel output"));
    }
    let out_rho = channel.apply(rho)?;
    let out_sigma = channel.apply(sigma)?;
    let out_diff = out_rho.matrix() - out_sigma.matrix();
    let diff = rho.matrix() - sigma.matrix();

    let confidence_deltas: Vec<f64> = povm
        .elements()
        .iter()
        .map(|p| (&out_diff * p).trace().re.abs())
        .collect();
    let confidence_sum: f64 = confidence_deltas.iter().sum();
    let output_trace_norm = hermitian_trace_norm(&out_diff)?;
    let trace_norm = hermitian_trace_norm(&diff)?;

    let mut dual_bounds = Vec::with_capacity(povm.len());
    for p in povm.elements() {
        dual_bounds.push(channel.dual_apply(p)?.trace().re * trace_norm);
    }

    let hilbert_schmidt = diff.frobenius_norm();
    let (ra, rb) = (numeric_rank(rho) as f64, numeric_rank(sigma) as f64);
    let rank_factor = ra * rb / (ra + rb);
    let hs_bound = 2.0 * rank_factor.sqrt() * hilbert_schmidt;
    let bures = bures_distance(rho, sigma)?;
    let hellinger = hellinger_distance(rho, sigma)?;
    let bures_bound = 2.0 * bures;
    let hellinger_bound = 2.0 * hellinger;
    let b2 = bures * bures;
    let bures_refined = 2.0 * (b2 - b2 * b2 / 4.0).max(0.0).sqrt();

    let s = AUDIT_SLACK;
    let dual_holds = confidence_deltas.iter().zip(&dual_bounds).all(|(d, b)| *d <= b + s);
    Ok(ConfidenceAudit {
        trace_bound_holds: confidence_sum <= output_trace_norm + s && confidence_sum <= trace_norm + s,
        contractive_holds: output_trace_norm <= trace_norm + s,
        dual_holds,
        hs_holds: confidence_sum <= hs_bound + s,
        bures_holds: confidence_sum <= bures_bound + s,
        hellinger_holds: confidence_sum <= hellinger_bound + s,
        ordering_holds: trace_norm <= bures_refined + s
            && bures_refined <= bures_bound + s
            && bures_bound <= hellinger_bound + s,
        confidence_deltas,
        confidence_sum,
        output_trace_norm,
        trace_norm,
        dual_bounds,
        hilbert_schmidt,
        rank_factor,
        hs_bound,
        bures,
        bures_bound,
        hellinger,
        hellinger_bound,
        bures_refined,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::PureState;

    fn ket(d: usize, k: usize) -> DensityMatrix {
        PureState::basis(d, k).unwrap().density()
    }

    #[test]
    fn identical_states_have_zero_distance() {
        let rho = DensityMatrix::maximally_mixed(3).unwrap().mix(&ket(3, 1), 0.3).unwrap();
        for k in DistanceKind::ALL {
            assert!(distance(k, &rho, &rho).unwrap() < 1e-7, "{k}");
        }
    }

    #[test]
    fn orthogonal_pure_states() {
        let (a, b) = (ket(2, 0), ket(2, 1));
        assert!((distance(DistanceKind::Trace, &a, &b).unwrap() - 2.0).abs() < 1e-12);
        assert!((distance(DistanceKind::HilbertSchmidt, &a, &b).unwrap() - 2f64.sqrt()).abs() < 1e-12);
        assert!(fidelity(&a, &b).unwrap().abs() < 1e-15);
    }

    #[test]
    fn fidelity_with_maximally_mixed() {
        let f = fidelity(&ket(2, 0), &DensityMatrix::maximally_mixed(2).unwrap()).unwrap();
        assert!((f - 0.5).abs() < 1e-14);
    }

    #[test]
    fn rank_examples() {
        assert_eq!(numeric_rank(&ket(4, 2)), 1);
        assert_eq!(numeric_rank(&DensityMatrix::maximally_mixed(5).unwrap()), 5);
        let r = ket(2, 0).mix(&ket(2, 1), 0.001).unwrap();
        assert_eq!(numeric_rank(&r), 2);
    }

    #[test]
    fn dimension_mismatch_is_an_argument_error() {
        let e = distance(DistanceKind::Trace, &ket(2, 0), &ket(3, 0)).unwrap_err();
        assert!(matches!(e, Error::InvalidArgument(_)));
        assert!(fidelity(&ket(2, 0), &ket(3, 0)).is_err());
    }

    #[test]
    fn distance_kind_parses() {
        for k in DistanceKind::ALL {
            assert_eq!(k.as_str().parse::<DistanceKind>().unwrap(), k);
        }
        assert!("l2".parse::<DistanceKind>().is_err());
    }

    #[test]
    fn tight_case_of_the_trace_bound() {
        let ch = KrausChannel::identity(2);
        let povm = POVMSet::computational(2).unwrap();
        let a = confidence_change_audit(&ch, &povm, &ket(2, 0), &ket(2, 1)).unwrap();
        assert!((a.confidence_sum - 2.0).abs() < 1e-12);
        assert!((a.trace_norm - 2.0).abs() < 1e-12);
        assert!(a.all_hold(), "{:?}", a.violations());
    }

    #[test]
    fn equal_states_audit_is_zero() {
        let rho = ket(2, 0).mix(&ket(2, 1), 0.25).unwrap();
        let a = confidence_change_audit(&KrausChannel::identity(2), &POVMSet::computational(2).unwrap(), &rho, &rho)
            .unwrap();
        assert!(a.confidence_deltas.iter().all(|&d| d < 1e-15));
        assert!(a.all_hold());
    }
}
