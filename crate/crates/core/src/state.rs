//! Validated quantum states: pure vectors and density matrices, with tensor
//! products and partial traces over a site structure.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, DensityError, Error, Result};
use crate::linalg::{hermitian_eigen, psd_sqrt_matrix, vec_norm, ComplexMatrix, C64, ONE, ZERO};

/// Default capacity guard on Hilbert-space dimension.
pub const DEFAULT_MAX_DIM: usize = 4096;
/// Hermiticity, trace and eigenvalue tolerance of [`DensityMatrix`].
pub const DENSITY_TOL: f64 = 1e-10;
/// Norm tolerance of [`PureState`].
pub const PURE_NORM_TOL: f64 = 1e-12;

/// Capacity limit, taken from `QARB_MAX_DIM` when that parses as a positive integer.
pub fn max_dim() -> usize {
    std::env::var("QARB_MAX_DIM")
        .ok()
        .and_then(|s| s.trim().parse::<usize>().ok())
        .filter(|&v| v > 0)
        .unwrap_or(DEFAULT_MAX_DIM)
}

/// Fails with [`Error::Capacity`] when `dim` exceeds [`max_dim`].
pub fn check_capacity(dim: usize) -> Result<()> {
    let limit = max_dim();
    if dim > limit {
        return Err(Error::Capacity { requested: dim, limit });
    }
    Ok(())
}

/// `base^exp` with overflow and capacity checks.
pub fn checked_power_dim(base: usize, exp: usize) -> Result<usize> {
    let mut acc: usize = 1;
    for _ in 0..exp {
        acc = acc.checked_mul(base).ok_or(Error::Capacity { requested: usize::MAX, limit: max_dim() })?;
        check_capacity(acc)?;
    }
    Ok(acc)
}

fn check_factor_dims(dims: &[usize], dim: usize) -> std::result::Result<(), DensityError> {
    let product = dims.iter().try_fold(1usize, |a, &b| a.checked_mul(b)).unwrap_or(usize::MAX);
    if dims.is_empty() || dims.contains(&0) || product != dim {
        return Err(DensityError::FactorDims { product, dim });
    }
    Ok(())
}

fn concat_dims(a: Option<&[usize]>, da: usize, b: Option<&[usize]>, db: usize) -> Vec<usize> {
    let mut dims = a.map(<[usize]>::to_vec).unwrap_or_else(|| vec![da]);
    dims.extend(b.map(<[usize]>::to_vec).unwrap_or_else(|| vec![db]));
    dims
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PureState {
    amplitudes: Vec<C64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    factor_dims: Option<Vec<usize>>,
}

impl PureState {
    /// Wraps amplitudes whose norm is already 1 within 1e-12.
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(invalid("a pure state needs at least one amplitude"));
        }
        if amplitudes.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(invalid("amplitudes must be finite"));
        }
        check_capacity(amplitudes.len())?;
        let norm = vec_norm(&amplitudes);
        if (norm - 1.0).abs() > PURE_NORM_TOL {
            return Err(invalid(format!("state norm is {norm}, expected 1")));
        }
        Ok(Self { amplitudes, factor_dims: None })
    }

    /// Normalizes the given vector first.
    pub fn normalized(mut amplitudes: Vec<C64>) -> Result<Self> {
        let norm = vec_norm(&amplitudes);
        if !(norm.is_finite() && norm > 0.0) {
            return Err(invalid("cannot normalize a zero or non-finite vector"));
        }
        for z in &mut amplitudes {
            *z /= norm;
        }
        Self::new(amplitudes)
    }

    /// Computational basis vector `|k>`.
    pub fn basis(dim: usize, k: usize) -> Result<Self> {
        if k >= dim {
            return Err(invalid(format!("basis index {k} out of range for dimension {dim}")));
        }
        check_capacity(dim)?;
        let mut amps = vec![ZERO; dim];
        amps[k] = ONE;
        Ok(Self { amplitudes: amps, factor_dims: None })
    }

    pub fn with_factor_dims(mut self, dims: Vec<usize>) -> Result<Self> {
        check_factor_dims(&dims, self.dim())?;
        self.factor_dims = Some(dims);
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn factor_dims(&self) -> Option<&[usize]> {
        self.factor_dims.as_deref()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &Self) -> Result<C64> {
        if self.dim() != other.dim() {
            return Err(invalid("inner product of states with different dimensions"));
        }
        Ok(crate::linalg::inner(&self.amplitudes, &other.amplitudes))
    }

    pub fn density(&self) -> DensityMatrix {
        DensityMatrix {
            matrix: ComplexMatrix::outer(&self.amplitudes),
            factor_dims: self.factor_dims.clone(),
        }
    }

    pub fn tensor(&self, other: &Self) -> Result<Self> {
        let dim = self.dim().saturating_mul(other.dim());
        check_capacity(dim)?;
        let mut amps = Vec::with_capacity(dim);
        for a in &self.amplitudes {
            for b in &other.amplitudes {
                amps.push(a * b);
            }
        }
        let dims = concat_dims(self.factor_dims(), self.dim(), other.factor_dims(), other.dim());
        Ok(Self { amplitudes: amps, factor_dims: Some(dims) })
    }
}

/// A Hermitian, unit-trace, positive semidefinite matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDensity", into = "RawDensity")]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
    factor_dims: Option<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
struct RawDensity {
    dim: usize,
    matrix: ComplexMatrix,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    factor_dims: Option<Vec<usize>>,
}

impl TryFrom<RawDensity> for DensityMatrix {
    type Error = Error;
    fn try_from(raw: RawDensity) -> Result<Self> {
        if raw.matrix.rows() != raw.dim {
            return Err(invalid("density dim does not match its matrix"));
        }
        let rho = validate_density(raw.matrix)?;
        match raw.factor_dims {
            Some(d) => rho.with_factor_dims(d),
            None => Ok(rho),
        }
    }
}

impl From<DensityMatrix> for RawDensity {
    fn from(r: DensityMatrix) -> Self {
        RawDensity { dim: r.dim(), matrix: r.matrix, factor_dims: r.factor_dims }
    }
}

/// Checks every [`DensityMatrix`] invariant, reporting the first that fails.
pub fn validate_density(m: ComplexMatrix) -> std::result::Result<DensityMatrix, DensityError> {
    if !m.is_square() {
        return Err(DensityError::NotSquare { rows: m.rows(), cols: m.cols() });
    }
    if m.entries().iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(DensityError::NonFinite);
    }
    let defect = m.hermiticity_defect();
    if defect > DENSITY_TOL {
        return Err(DensityError::NotHermitian { defect });
    }
    let tr = m.trace();
    if (tr.re - 1.0).abs() > DENSITY_TOL || tr.im.abs() > DENSITY_TOL {
        return Err(DensityError::Trace { re: tr.re, im: tr.im });
    }
    let eig = hermitian_eigen(&m).map_err(|_| DensityError::NotHermitian { defect })?;
    let min = eig.values[0];
    if min < -DENSITY_TOL {
        return Err(DensityError::NotPsd { min_eigenvalue: min });
    }
    Ok(DensityMatrix { matrix: m, factor_dims: None })
}

impl DensityMatrix {
    /// Validates `m` and also enforces the capacity guard.
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        check_capacity(m.rows())?;
        Ok(validate_density(m)?)
    }

    /// For matrices that are states by construction (convex combinations,
    /// channel outputs, partial traces). Tiny anti-Hermitian round-off is removed.
    pub(crate) fn from_matrix_trusted(m: ComplexMatrix, factor_dims: Option<Vec<usize>>) -> Self {
        debug_assert!(m.is_square());
        DensityMatrix { matrix: m.hermitian_part(), factor_dims }
    }

    pub fn maximally_mixed(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("dimension must be positive"));
        }
        check_capacity(dim)?;
        Ok(Self { matrix: ComplexMatrix::identity(dim).scale_real(1.0 / dim as f64), factor_dims: None })
    }

    pub fn from_pure(psi: &PureState) -> Self {
        psi.density()
    }

    pub fn with_factor_dims(mut self, dims: Vec<usize>) -> Result<Self> {
        check_factor_dims(&dims, self.dim())?;
        self.factor_dims = Some(dims);
        Ok(self)
    }

    pub fn without_factor_dims(mut self) -> Self {
        self.factor_dims = None;
        self
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn factor_dims(&self) -> Option<&[usize]> {
        self.factor_dims.as_deref()
    }

    /// `Re tr(rho O)`.
    pub fn expectation(&self, op: &ComplexMatrix) -> Result<f64> {
        if op.rows() != self.dim() || op.cols() != self.dim() {
            return Err(invalid("observable dimension does not match the state"));
        }
        let n = self.dim();
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                acc += (self.matrix[(i, j)] * op[(j, i)]).re;
            }
        }
        Ok(acc)
    }

    /// `(1 - t) self + t other` for `t` in `[0, 1]`. Keeps this state's site structure.
    pub fn mix(&self, other: &Self, t: f64) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(invalid("cannot mix states of different dimensions"));
        }
        if !(0.0..=1.0).contains(&t) {
            return Err(invalid(format!("mixing weight {t} outside [0, 1]")));
        }
        let m = &self.matrix.scale_real(1.0 - t) + &other.matrix.scale_real(t);
        Ok(Self::from_matrix_trusted(m, self.factor_dims.clone()))
    }

    pub fn tensor(&self, other: &Self) -> Result<Self> {
        let dim = self.dim().saturating_mul(other.dim());
        check_capacity(dim)?;
        let dims = concat_dims(self.factor_dims(), self.dim(), other.factor_dims(), other.dim());
        Ok(Self { matrix: self.matrix.kron(&other.matrix), factor_dims: Some(dims) })
    }

    /// Reduced state on the sites in `keep` (0-based, any order, duplicates ignored).
    pub fn partial_trace(&self, keep: &[usize]) -> Result<Self> {
        let dims = self
            .factor_dims()
            .ok_or_else(|| Error::Structure("partial trace needs factor dimensions".into()))?;
        if keep.is_empty() {
            return Err(invalid("partial trace needs at least one kept site"));
        }
        let mut kept: Vec<usize> = keep.to_vec();
        kept.sort_unstable();
        kept.dedup();
        if let Some(&bad) = kept.iter().find(|&&k| k >= dims.len()) {
            return Err(invalid(format!("site {bad} out of range for {} sites", dims.len())));
        }
        let traced: Vec<usize> = (0..dims.len()).filter(|s| !kept.contains(s)).collect();

        // Row-major strides of each site in the full index.
        let mut strides = vec![1usize; dims.len()];
        for s in (0..dims.len().saturating_sub(1)).rev() {
            strides[s] = strides[s + 1] * dims[s + 1];
        }
        let offsets = |sites: &[usize]| -> Vec<usize> {
            let total: usize = sites.iter().map(|&s| dims[s]).product();
            (0..total)
                .map(|mut idx| {
                    let mut off = 0;
                    for &s in sites.iter().rev() {
                        off += (idx % dims[s]) * strides[s];
                        idx /= dims[s];
                    }
                    off
                })
                .collect()
        };
        let keep_off = offsets(&kept);
        let trace_off = offsets(&traced);
        let dk = keep_off.len();
        let mut out = ComplexMatrix::zeros(dk, dk);
        for (a, &oa) in keep_off.iter().enumerate() {
            for (b, &ob) in keep_off.iter().enumerate() {
                out[(a, b)] = trace_off.iter().map(|&t| self.matrix[(oa + t, ob + t)]).sum();
            }
        }
        let new_dims = kept.iter().map(|&s| dims[s]).collect();
        Ok(Self::from_matrix_trusted(out, Some(new_dims)))
    }
}

/// Types with a tensor product.
pub trait Tensor: Sized {
    fn tensor_with(&self, other: &Self) -> Result<Self>;
}

impl Tensor for PureState {
    fn tensor_with(&self, other: &Self) -> Result<Self> {
        self.tensor(other)
    }
}

impl Tensor for DensityMatrix {
    fn tensor_with(&self, other: &Self) -> Result<Self> {
        self.tensor(other)
    }
}

pub fn tensor_product<T: Tensor>(a: &T, b: &T) -> Result<T> {
    a.tensor_with(b)
}

pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    rho.partial_trace(keep)
}

/// Principal square root of a density matrix.
pub fn psd_sqrt(rho: &DensityMatrix) -> Result<ComplexMatrix> {
    psd_sqrt_matrix(rho.matrix())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn basis_tensor() {
        let z = PureState::basis(2, 0).unwrap();
        let zz = tensor_product(&z, &z).unwrap();
        assert_eq!(zz.amplitudes(), &[ONE, ZERO, ZERO, ZERO]);
        assert_eq!(zz.factor_dims(), Some(&[2, 2][..]));
    }

    #[test]
    fn maximally_mixed_tensor() {
        let h = DensityMatrix::maximally_mixed(2).unwrap();
        let q = tensor_product(&h, &h).unwrap();
        assert!(q.matrix().max_abs_diff(&ComplexMatrix::identity(4).scale_real(0.25)) < 1e-15);
    }

    #[test]
    fn bell_marginal_is_mixed() {
        let s = 0.5f64.sqrt();
        let bell = PureState::new(vec![c(s), ZERO, ZERO, c(s)]).unwrap().with_factor_dims(vec![2, 2]).unwrap();
        let m = bell.density().partial_trace(&[1]).unwrap();
        assert!(m.matrix().max_abs_diff(&ComplexMatrix::identity(2).scale_real(0.5)) < 1e-15);
    }

    #[test]
    fn partial_trace_errors() {
        let h = DensityMatrix::maximally_mixed(4).unwrap();
        assert!(matches!(h.partial_trace(&[0]), Err(Error::Structure(_))));
        let h = h.with_factor_dims(vec![2, 2]).unwrap();
        assert!(matches!(h.partial_trace(&[]), Err(Error::InvalidArgument(_))));
        assert!(matches!(h.partial_trace(&[2]), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn validation_reports_each_invariant() {
        assert!(validate_density(ComplexMatrix::identity(2).scale_real(0.5)).is_ok());
        let trace = validate_density(ComplexMatrix::from_real_diagonal(&[2.0, 1.0]));
        assert!(matches!(trace, Err(DensityError::Trace { .. })));
        let upper = ComplexMatrix::new(2, 2, vec![c(0.5), c(0.3), ZERO, c(0.5)]).unwrap();
        assert!(matches!(validate_density(upper), Err(DensityError::NotHermitian { .. })));
        let rect = ComplexMatrix::zeros(1, 2);
        assert!(matches!(validate_density(rect), Err(DensityError::NotSquare { .. })));
        assert!(matches!(
            DensityMatrix::maximally_mixed(4).unwrap().with_factor_dims(vec![2, 3]),
            Err(Error::InvalidDensity(DensityError::FactorDims { .. }))
        ));
    }

    #[test]
    fn diag_two_minus_one_fails_on_psd_or_trace() {
        // tr diag(2,-1) = 1, so the trace check passes and positivity fails.
        let e = validate_density(ComplexMatrix::from_real_diagonal(&[2.0, -1.0])).unwrap_err();
        assert!(matches!(e, DensityError::NotPsd { min_eigenvalue } if (min_eigenvalue + 1.0).abs() < 1e-12));
    }

    #[test]
    fn pure_state_norm_contract() {
        assert!(PureState::new(vec![c(1.0), c(1e-5)]).is_err());
        assert!(PureState::normalized(vec![c(3.0), c(4.0)]).is_ok());
        assert!(PureState::normalized(vec![ZERO, ZERO]).is_err());
    }

    #[test]
    fn sqrt_of_pure_projector_is_itself() {
        let p = PureState::basis(2, 0).unwrap().density();
        let s = psd_sqrt(&p).unwrap();
        assert!(s.max_abs_diff(p.matrix()) < 1e-15);
    }

    #[test]
    fn density_json_round_trip() {
        let rho = DensityMatrix::maximally_mixed(2).unwrap().tensor(&PureState::basis(2, 1).unwrap().density()).unwrap();
        let s = serde_json::to_string(&rho).unwrap();
        let back: DensityMatrix = serde_json::from_str(&s).unwrap();
        assert_eq!(back, rho);
    }
}
