use rand::Rng;
use serde::{Deserialize, Serialize};

use super::channel::{KrausChannel, COMPLETENESS_TOL};
use super::Label;
use crate::error::{invalid, Result};
use crate::linalg::{hermitian_eigen, ComplexMatrix, C64};

/// A labelled POVM: PSD elements summing to the identity, one per label.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct POVMSet {
    elements: Vec<ComplexMatrix>,
    labels: Vec<Label>,
}

impl POVMSet {
    pub fn new(elements: Vec<ComplexMatrix>, labels: Vec<Label>) -> Result<Self> {
        if elements.is_empty() {
            return Err(invalid("a POVM needs at least one element"));
        }
        if elements.len() != labels.len() {
            return Err(invalid("number of POVM elements and labels differ"));
        }
        let mut sorted = labels.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != labels.len() {
            return Err(invalid("POVM labels must be distinct"));
        }
        let dim = elements[0].rows();
        let mut sum = ComplexMatrix::zeros(dim, dim);
        for (e, l) in elements.iter().zip(&labels) {
            if e.rows() != dim || e.cols() != dim {
                return Err(invalid("POVM elements must be square and of equal dimension"));
            }
            if e.hermiticity_defect() > COMPLETENESS_TOL {
                return Err(invalid(format!("POVM element for label {l} is not Hermitian")));
            }
            let min = hermitian_eigen(e)?.values[0];
            if min < -COMPLETENESS_TOL {
                return Err(invalid(format!("POVM element for label {l} is not PSD (min eigenvalue {min:e})")));
            }
            sum = &sum + e;
        }
        let defect = sum.max_abs_diff(&ComplexMatrix::identity(dim));
        if defect > COMPLETENESS_TOL {
            return Err(invalid(format!("POVM elements do not sum to the identity (defect {defect:e})")));
        }
        Ok(Self { elements, labels })
    }

    /// Projective measurement in the computational basis with labels `0..dim`.
    pub fn computational(dim: usize) -> Result<Self> {
        let elements = (0..dim)
            .map(|k| {
                let mut p = ComplexMatrix::zeros(dim, dim);
                p[(k, k)] = C64::new(1.0, 0.0);
                p
            })
            .collect();
        Self::new(elements, (0..dim as Label).collect())
    }

    /// Random `k`-outcome POVM `Pi_s = M_s^dagger M_s` from a random channel's Kraus operators.
    pub fn random<R: Rng + ?Sized>(dim: usize, k: usize, rng: &mut R) -> Result<Self> {
        let ch = KrausChannel::random(dim, k, rng)?;
        let elements = ch.kraus_ops().iter().map(|m| (&m.adjoint() * m).hermitian_part()).collect();
        Self::new(elements, (0..k as Label).collect())
    }

    pub fn dim(&self) -> usize {
        self.elements[0].rows()
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[ComplexMatrix] {
        &self.elements
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn element_for(&self, label: Label) -> Option<&ComplexMatrix> {
        self.labels.iter().position(|&l| l == label).map(|i| &self.elements[i])
    }
}
