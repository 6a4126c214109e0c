//! Haar-random unitaries and states, Gaussian latent points and random mixed states.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Result};
use crate::linalg::{ComplexMatrix, C64};
use crate::state::{check_capacity, DensityMatrix, PureState};

/// Standard complex normal: real and imaginary parts each `N(0, 1/2)`.
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// `rows x cols` matrix of iid standard complex normals.
pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| complex_normal(rng))
}

/// Haar-distributed element of U(N): QR of a Ginibre matrix with the phases
/// of `diag(R)` moved into `Q`.
pub fn sample_haar_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<ComplexMatrix> {
    if n == 0 {
        return Err(invalid("unitary dimension must be positive"));
    }
    check_capacity(n)?;
    let g = ginibre(n, n, rng);
    let (mut q, r) = g.qr();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    Ok(q)
}

/// Haar-random pure state, drawn as a normalized complex Gaussian vector.
pub fn sample_haar_pure<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<PureState> {
    if n == 0 {
        return Err(invalid("state dimension must be positive"));
    }
    check_capacity(n)?;
    let v: Vec<C64> = (0..n).map(|_| complex_normal(rng)).collect();
    PureState::normalized(v)
}

/// `count` points of the standard Gaussian in `R^m`.
pub fn sample_gaussian<R: Rng + ?Sized>(m: usize, count: usize, rng: &mut R) -> Vec<Vec<f64>> {
    (0..count).map(|_| (0..m).map(|_| rng.sample(StandardNormal)).collect()).collect()
}

/// Random full-rank mixed state `G G^dagger / tr(G G^dagger)` with `G` Ginibre.
pub fn sample_mixed_state<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<DensityMatrix> {
    sample_mixed_state_rank(n, n, rng)
}

/// Random mixed state of rank at most `rank`.
pub fn sample_mixed_state_rank<R: Rng + ?Sized>(n: usize, rank: usize, rng: &mut R) -> Result<DensityMatrix> {
    if n == 0 || rank == 0 {
        return Err(invalid("dimension and rank must be positive"));
    }
    check_capacity(n)?;
    let g = ginibre(n, rank, rng);
    let w = &g * &g.adjoint();
    let tr = w.trace().re;
    Ok(DensityMatrix::from_matrix_trusted(w.scale_real(1.0 / tr), None))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Seed;

    #[test]
    fn unitary_and_deterministic() {
        let a = sample_haar_unitary(6, &mut Seed(1).stream(0)).unwrap();
        let b = sample_haar_unitary(6, &mut Seed(1).stream(0)).unwrap();
        assert!(a.unitarity_defect() < 1e-12);
        assert_eq!(a, b);
    }

    #[test]
    fn pure_state_normalized() {
        let psi = sample_haar_pure(32, &mut Seed(3).stream(1)).unwrap();
        let n: f64 = psi.amplitudes().iter().map(|z| z.norm_sqr()).sum();
        assert!((n - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mixed_state_is_valid() {
        let rho = sample_mixed_state(8, &mut Seed(5).stream(2)).unwrap();
        assert!(crate::state::validate_density(rho.matrix().clone()).is_ok());
        let low = sample_mixed_state_rank(8, 2, &mut Seed(5).stream(3)).unwrap();
        assert_eq!(crate::metrics::numeric_rank(&low), 2);
    }
}
