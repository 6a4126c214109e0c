//! Layered unitary circuits over a chain of qudits.
//!
//! Each gate acts on one site or on two adjacent sites and is
//! `exp(-i sum_k theta_k G_k)` over the generalized Gell-Mann basis of the
//! gate's space, so all-zero parameters give the identity.

use serde::{Deserialize, Serialize};

use super::{KrausChannel, Label, POVMSet, QuantumClassifier};
use crate::error::{invalid, Error, Result};
use crate::linalg::{unitary_from_hamiltonian, ComplexMatrix, C64, I, ONE};
use crate::state::checked_power_dim;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayeredCircuitSpec {
    pub n_sites: usize,
    pub d: usize,
    /// Each layer is a list of gate placements; a placement lists one site or
    /// two adjacent sites (0-based). For a pair, the first site is the gate's
    /// first tensor factor.
    pub layers: Vec<Vec<Vec<usize>>>,
    /// Gate parameters in radians, layer by layer and gate by gate.
    pub parameters: Vec<f64>,
    pub povm_site: usize,
    /// `labels[s]` is the label of measurement outcome `s` on `povm_site`.
    pub labels: Vec<Label>,
}

impl LayeredCircuitSpec {
    /// Brick-wall circuit: each layer has single-site gates everywhere and
    /// two-site gates on alternating pairs. Parameters start at zero.
    pub fn brick_wall(n_sites: usize, d: usize, layers: usize, povm_site: usize, labels: Vec<Label>) -> Self {
        let mut ls = Vec::with_capacity(layers);
        for l in 0..layers {
            let mut gates: Vec<Vec<usize>> = (0..n_sites).map(|s| vec![s]).collect();
            let mut a = l % 2;
            while a + 1 < n_sites {
                gates.push(vec![a, a + 1]);
                a += 2;
            }
            ls.push(gates);
        }
        let mut spec = Self { n_sites, d, layers: ls, parameters: Vec::new(), povm_site, labels };
        spec.parameters = vec![0.0; spec.parameter_count()];
        spec
    }

    fn gate_params(&self, placement: &[usize]) -> usize {
        let dd = self.d.pow(placement.len() as u32);
        dd * dd - 1
    }

    /// Number of parameters implied by the layer structure.
    pub fn parameter_count(&self) -> usize {
        self.layers.iter().flatten().map(|g| self.gate_params(g)).sum()
    }

    pub fn dim(&self) -> usize {
        self.d.pow(self.n_sites as u32)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_sites == 0 || self.d < 2 {
            return Err(Error::Structure("need at least one site and d >= 2".into()));
        }
        checked_power_dim(self.d, self.n_sites)?;
        for (li, layer) in self.layers.iter().enumerate() {
            for g in layer {
                let ok = match g.as_slice() {
                    [a] => *a < self.n_sites,
                    [a, b] => *a < self.n_sites && *b < self.n_sites && a.abs_diff(*b) == 1,
                    _ => false,
                };
                if !ok {
                    return Err(Error::Structure(format!("invalid gate placement {g:?} in layer {li}")));
                }
            }
        }
        if self.parameters.len() != self.parameter_count() {
            return Err(Error::Structure(format!(
                "structure needs {} parameters, got {}",
                self.parameter_count(),
                self.parameters.len()
            )));
        }
        if self.parameters.iter().any(|p| !p.is_finite()) {
            return Err(invalid("circuit parameters must be finite"));
        }
        if self.povm_site >= self.n_sites {
            return Err(Error::Structure(format!("measured site {} out of range", self.povm_site)));
        }
        if self.labels.len() != self.d {
            return Err(Error::Structure(format!("need {} outcome labels, got {}", self.d, self.labels.len())));
        }
        Ok(())
    }

    /// The circuit unitary `G_last ... G_first` on the full space.
    pub fn unitary(&self) -> Result<ComplexMatrix> {
        self.validate()?;
        let dim = self.dim();
        let mut u = ComplexMatrix::identity(dim);
        let mut offset = 0;
        for g in self.layers.iter().flatten() {
            let k = self.gate_params(g);
            let theta = &self.parameters[offset..offset + k];
            offset += k;
            if theta.iter().all(|&t| t == 0.0) {
                continue;
            }
            let gate = gate_unitary(self.d.pow(g.len() as u32), theta)?;
            let full = embed(&gate, g, self.d, self.n_sites);
            u = &full * &u;
        }
        Ok(u)
    }

    /// Projective measurement on `povm_site`, one element per distinct label
    /// (ascending), each the sum of the outcome projectors carrying that label.
    pub fn povm(&self) -> Result<POVMSet> {
        self.validate()?;
        let dim = self.dim();
        let stride = self.d.pow((self.n_sites - 1 - self.povm_site) as u32);
        let mut distinct = self.labels.clone();
        distinct.sort_unstable();
        distinct.dedup();
        let elements = distinct
            .iter()
            .map(|&l| {
                let mut p = ComplexMatrix::zeros(dim, dim);
                for k in 0..dim {
                    if self.labels[(k / stride) % self.d] == l {
                        p[(k, k)] = ONE;
                    }
                }
                p
            })
            .collect();
        POVMSet::new(elements, distinct)
    }

    /// Per-basis-state label of the measured outcome, for fast pure-state evaluation.
    pub(crate) fn outcome_labels(&self) -> Vec<Label> {
        let stride = self.d.pow((self.n_sites - 1 - self.povm_site) as u32);
        (0..self.dim()).map(|k| self.labels[(k / stride) % self.d]).collect()
    }
}

/// Generalized Gell-Mann matrices of dimension `dim`: the `dim^2 - 1`
/// traceless Hermitian generators (symmetric, antisymmetric, then diagonal).
pub fn gell_mann_basis(dim: usize) -> Vec<ComplexMatrix> {
    let mut out = Vec::with_capacity(dim * dim - 1);
    for j in 0..dim {
        for k in j + 1..dim {
            let mut s = ComplexMatrix::zeros(dim, dim);
            s[(j, k)] = ONE;
            s[(k, j)] = ONE;
            out.push(s);
            let mut a = ComplexMatrix::zeros(dim, dim);
            a[(j, k)] = -I;
            a[(k, j)] = I;
            out.push(a);
        }
    }
    for l in 1..dim {
        let c = (2.0 / (l * (l + 1)) as f64).sqrt();
        let mut m = ComplexMatrix::zeros(dim, dim);
        for j in 0..l {
            m[(j, j)] = C64::new(c, 0.0);
        }
        m[(l, l)] = C64::new(-(l as f64) * c, 0.0);
        out.push(m);
    }
    out
}

/// `exp(-i sum_k theta_k G_k)` on a space of dimension `dim`.
pub fn gate_unitary(dim: usize, theta: &[f64]) -> Result<ComplexMatrix> {
    let basis = gell_mann_basis(dim);
    if theta.len() != basis.len() {
        return Err(invalid(format!("a gate on dimension {dim} takes {} parameters", basis.len())));
    }
    if theta.iter().all(|&t| t == 0.0) {
        return Ok(ComplexMatrix::identity(dim));
    }
    let mut h = ComplexMatrix::zeros(dim, dim);
    for (t, g) in theta.iter().zip(&basis) {
        if *t != 0.0 {
            h = &h + &g.scale_real(*t);
        }
    }
    unitary_from_hamiltonian(&h)
}

fn swap(d: usize) -> ComplexMatrix {
    let mut s = ComplexMatrix::zeros(d * d, d * d);
    for a in 0..d {
        for b in 0..d {
            s[(a * d + b, b * d + a)] = ONE;
        }
    }
    s
}

fn embed(gate: &ComplexMatrix, placement: &[usize], d: usize, n: usize) -> ComplexMatrix {
    let (lo, local) = match placement {
        [a] => (*a, gate.clone()),
        [a, b] if b > a => (*a, gate.clone()),
        [a, _] => {
            let s = swap(d);
            (*a - 1, &(&s * gate) * &s)
        }
        _ => unreachable!("placements are validated"),
    };
    let left = ComplexMatrix::identity(d.pow(lo as u32));
    let right = ComplexMatrix::identity(d.pow((n - lo - placement.len()) as u32));
    left.kron(&local).kron(&right)
}

/// Classifier with the circuit unitary as its channel and the measurement on `povm_site`.
pub fn build_layered(spec: &LayeredCircuitSpec) -> Result<QuantumClassifier> {
    QuantumClassifier::new(KrausChannel::unitary(spec.unitary()?)?, spec.povm()?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifier::Predictor;
    use crate::state::PureState;

    #[test]
    fn gell_mann_count_and_trace() {
        for dim in [2, 3, 4] {
            let b = gell_mann_basis(dim);
            assert_eq!(b.len(), dim * dim - 1);
            for g in &b {
                assert!(g.trace().norm() < 1e-14);
                assert!(g.hermiticity_defect() < 1e-15);
                assert!(((g * g).trace().re - 2.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn zero_parameters_give_identity() {
        let spec = LayeredCircuitSpec::brick_wall(3, 2, 2, 0, vec![0, 1]);
        assert_eq!(spec.unitary().unwrap(), ComplexMatrix::identity(8));
    }

    #[test]
    fn single_gate_is_unitary() {
        let mut spec = LayeredCircuitSpec {
            n_sites: 2,
            d: 2,
            layers: vec![vec![vec![0, 1]]],
            parameters: vec![],
            povm_site: 1,
            labels: vec![0, 1],
        };
        spec.parameters = (0..15).map(|k| 0.1 * k as f64 - 0.4).collect();
        assert!(spec.unitary().unwrap().unitarity_defect() < 1e-10);
    }

    #[test]
    fn reversed_pair_matches_swap_conjugation() {
        let theta: Vec<f64> = (0..15).map(|k| (k as f64 * 0.37).sin()).collect();
        let mk = |pair: Vec<usize>| LayeredCircuitSpec {
            n_sites: 2,
            d: 2,
            layers: vec![vec![pair]],
            parameters: theta.clone(),
            povm_site: 0,
            labels: vec![0, 1],
        };
        let fwd = mk(vec![0, 1]).unitary().unwrap();
        let rev = mk(vec![1, 0]).unitary().unwrap();
        let s = swap(2);
        assert!(rev.max_abs_diff(&(&(&s * &fwd) * &s)) < 1e-14);
    }

    #[test]
    fn invalid_placements() {
        let mut spec = LayeredCircuitSpec::brick_wall(3, 2, 1, 0, vec![0, 1]);
        spec.layers[0].push(vec![0, 2]);
        spec.parameters.extend(vec![0.0; 15]);
        assert!(matches!(build_layered(&spec), Err(Error::Structure(_))));
        let mut spec = LayeredCircuitSpec::brick_wall(2, 2, 1, 0, vec![0, 1]);
        spec.parameters.pop();
        assert!(matches!(build_layered(&spec), Err(Error::Structure(_))));
        let spec = LayeredCircuitSpec::brick_wall(2, 2, 1, 5, vec![0, 1]);
        assert!(matches!(build_layered(&spec), Err(Error::Structure(_))));
    }

    #[test]
    fn measurement_on_designated_site() {
        let spec = LayeredCircuitSpec::brick_wall(2, 2, 1, 1, vec![0, 1]);
        let clf = build_layered(&spec).unwrap();
        // |01>: site 1 is in state 1.
        let rho = PureState::basis(4, 1).unwrap().density();
        assert_eq!(clf.predict(&rho).unwrap(), 1);
        let rho = PureState::basis(4, 2).unwrap().density();
        assert_eq!(clf.predict(&rho).unwrap(), 0);
    }

    #[test]
    fn merged_labels_give_one_element_each() {
        let spec = LayeredCircuitSpec::brick_wall(1, 3, 1, 0, vec![0, 1, 1]);
        let povm = spec.povm().unwrap();
        assert_eq!(povm.labels(), &[0, 1]);
        assert_eq!(povm.elements()[1].trace().re, 2.0);
    }

    #[test]
    fn json_field_names() {
        let spec = LayeredCircuitSpec::brick_wall(2, 2, 1, 0, vec![0, 1]);
        let v: serde_json::Value = serde_json::to_value(&spec).unwrap();
        let keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
        for k in ["n_sites", "d", "layers", "parameters", "povm_site", "labels"] {
            assert!(keys.contains(&k));
        }
        let back: LayeredCircuitSpec = serde_json::from_value(v).unwrap();
        assert_eq!(back, spec);
    }
}
