use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::concentration::sample_haar_unitary;
use crate::error::{invalid, Result};
use crate::linalg::ComplexMatrix;
use crate::state::DensityMatrix;

/// Completeness tolerance for Kraus operators and POVMs.
pub const COMPLETENESS_TOL: f64 = 1e-9;

/// A quantum channel `rho -> sum_i M_i rho M_i^dagger`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KrausChannel {
    kraus_ops: Vec<ComplexMatrix>,
    input_dim: usize,
    output_dim: usize,
}

impl KrausChannel {
    /// Checks shapes and trace preservation `sum M^dagger M = I`.
    pub fn new(kraus_ops: Vec<ComplexMatrix>) -> Result<Self> {
        let first = kraus_ops.first().ok_or_else(|| invalid("a channel needs at least one Kraus operator"))?;
        let (output_dim, input_dim) = (first.rows(), first.cols());
        if kraus_ops.iter().any(|m| m.rows() != output_dim || m.cols() != input_dim) {
            return Err(invalid("Kraus operators have inconsistent shapes"));
        }
        let mut sum = ComplexMatrix::zeros(input_dim, input_dim);
        for m in &kraus_ops {
            sum = &sum + &(&m.adjoint() * m);
        }
        let defect = sum.max_abs_diff(&ComplexMatrix::identity(input_dim));
        if defect > COMPLETENESS_TOL {
            return Err(invalid(format!("channel is not trace preserving (defect {defect:e})")));
        }
        Ok(Self { kraus_ops, input_dim, output_dim })
    }

    pub fn identity(dim: usize) -> Self {
        Self { kraus_ops: vec![ComplexMatrix::identity(dim)], input_dim: dim, output_dim: dim }
    }

    pub fn unitary(u: ComplexMatrix) -> Result<Self> {
        if !u.is_square() {
            return Err(invalid("a unitary must be square"));
        }
        Self::new(vec![u])
    }

    /// Random channel with `k` Kraus operators from a Stinespring isometry:
    /// the first `dim` columns of a Haar unitary on `dim * k`, cut into `k` blocks.
    pub fn random<R: Rng + ?Sized>(dim: usize, k: usize, rng: &mut R) -> Result<Self> {
        if k == 0 {
            return Err(invalid("need at least one Kraus operator"));
        }
        let u = sample_haar_unitary(dim * k, rng)?;
        let ops = (0..k)
            .map(|b| ComplexMatrix::from_fn(dim, dim, |i, j| u[(b * dim + i, j)]))
            .collect();
        Self::new(ops)
    }

    pub fn kraus_ops(&self) -> &[ComplexMatrix] {
        &self.kraus_ops
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn output_dim(&self) -> usize {
        self.output_dim
    }

    /// The unitary when the channel has a single unitary Kraus operator.
    pub fn as_unitary(&self) -> Option<&ComplexMatrix> {
        match self.kraus_ops.as_slice() {
            [u] if u.is_square() && u.unitarity_defect() <= COMPLETENESS_TOL => Some(u),
            _ => None,
        }
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if rho.dim() != self.input_dim {
            return Err(invalid(format!(
                "channel expects dimension {}, state has {}",
                self.input_dim,
                rho.dim()
            )));
        }
        let mut out = ComplexMatrix::zeros(self.output_dim, self.output_dim);
        for m in &self.kraus_ops {
            out = &out + &(&(m * rho.matrix()) * &m.adjoint());
        }
        let dims = (self.input_dim == self.output_dim).then(|| rho.factor_dims().map(<[usize]>::to_vec)).flatten();
        Ok(DensityMatrix::from_matrix_trusted(out, dims))
    }

    /// Dual map `sum_i M_i^dagger X M_i`.
    pub fn dual_apply(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        if x.rows() != self.output_dim || x.cols() != self.output_dim {
            return Err(invalid("operator dimension does not match the channel output"));
        }
        let mut out = ComplexMatrix::zeros(self.input_dim, self.input_dim);
        for m in &self.kraus_ops {
            out = &out + &(&(&m.adjoint() * x) * m);
        }
        Ok(out)
    }
}
