//! POVM classifiers: a channel followed by a labelled measurement, predicting
//! the label with the largest expectation value.

mod channel;
mod circuit;
mod povm;
mod train;

pub use channel::{KrausChannel, COMPLETENESS_TOL};
pub use circuit::{build_layered, gate_unitary, gell_mann_basis, LayeredCircuitSpec};
pub use povm::POVMSet;
pub use train::{train_toy, train_toy_report, training_accuracy, LabeledPixels, TrainReport};

use crate::error::{invalid, Error, Result};
use crate::linalg::{hermitian_eigen, ComplexMatrix, C64};
use crate::state::{DensityMatrix, PureState};

pub type Label = u32;

/// Confidences closer than this are treated as tied.
pub const TIE_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Decision {
    pub label: Label,
    /// Confidence of the predicted label.
    pub confidence: f64,
    /// True when another label ties with the winner.
    pub on_boundary: bool,
}

/// Argmax over `(label, confidence)` pairs with the lowest-label tie rule.
pub fn decide(labels: &[Label], confidences: &[f64]) -> Decision {
    let max = confidences.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut winners = labels
        .iter()
        .zip(confidences)
        .filter(|(_, &c)| c >= max - TIE_TOLERANCE)
        .map(|(&l, &c)| (l, c));
    let first = winners.next().expect("at least one label");
    let (mut label, mut confidence, mut count) = (first.0, first.1, 1);
    for (l, c) in winners {
        count += 1;
        if l < label {
            label = l;
            confidence = c;
        }
    }
    Decision { label, confidence, on_boundary: count > 1 }
}

/// Anything that assigns a label to a state.
pub trait Predictor: Sync {
    fn decide(&self, rho: &DensityMatrix) -> Result<Decision>;

    fn predict(&self, rho: &DensityMatrix) -> Result<Label> {
        Ok(self.decide(rho)?.label)
    }

    fn labels(&self) -> &[Label];

    fn input_dim(&self) -> usize;

    /// A state that this predictor assigns to `label` with certainty, if one
    /// can be built by running the classifier backwards.
    fn reverse_target(&self, _label: Label) -> Option<DensityMatrix> {
        None
    }
}

#[derive(Clone, Debug)]
pub struct QuantumClassifier {
    channel: KrausChannel,
    povm: POVMSet,
    /// `E*(Pi_s)` per POVM element, so that confidences are `tr(rho E*(Pi_s))`.
    effects: Vec<ComplexMatrix>,
}

impl QuantumClassifier {
    pub fn new(channel: KrausChannel, povm: POVMSet) -> Result<Self> {
        if channel.output_dim() != povm.dim() {
            return Err(invalid(format!(
                "channel output dimension {} differs from POVM dimension {}",
                channel.output_dim(),
                povm.dim()
            )));
        }
        let effects = povm
            .elements()
            .iter()
            .map(|p| channel.dual_apply(p).map(|e| e.hermitian_part()))
            .collect::<Result<_>>()?;
        Ok(Self { channel, povm, effects })
    }

    pub fn channel(&self) -> &KrausChannel {
        &self.channel
    }

    pub fn povm(&self) -> &POVMSet {
        &self.povm
    }

    /// `tr(E(rho) Pi_s)` in POVM order.
    pub fn confidences(&self, rho: &DensityMatrix) -> Result<Vec<f64>> {
        if rho.dim() != self.channel.input_dim() {
            return Err(invalid(format!(
                "classifier expects dimension {}, state has {}",
                self.channel.input_dim(),
                rho.dim()
            )));
        }
        self.effects.iter().map(|e| rho.expectation(e)).collect()
    }

    pub fn confidence_of(&self, rho: &DensityMatrix, label: Label) -> Result<f64> {
        let i = self
            .povm
            .labels()
            .iter()
            .position(|&l| l == label)
            .ok_or_else(|| invalid(format!("unknown label {label}")))?;
        rho.expectation(&self.effects[i])
    }

    /// Confidences of a pure input, `<psi|E*(Pi_s)|psi>`.
    pub fn pure_confidences(&self, psi: &PureState) -> Result<Vec<f64>> {
        if psi.dim() != self.channel.input_dim() {
            return Err(invalid("state dimension does not match the classifier"));
        }
        self.effects
            .iter()
            .map(|e| Ok(crate::linalg::inner(psi.amplitudes(), &e.apply(psi.amplitudes())?).re))
            .collect()
    }
}

impl Predictor for QuantumClassifier {
    fn decide(&self, rho: &DensityMatrix) -> Result<Decision> {
        Ok(decide(self.povm.labels(), &self.confidences(rho)?))
    }

    fn labels(&self) -> &[Label] {
        self.povm.labels()
    }

    fn input_dim(&self) -> usize {
        self.channel.input_dim()
    }

    fn reverse_target(&self, label: Label) -> Option<DensityMatrix> {
        reverse_prepare(self, label).ok()
    }
}

pub fn confidences(clf: &QuantumClassifier, rho: &DensityMatrix) -> Result<Vec<f64>> {
    clf.confidences(rho)
}

pub fn predict(clf: &QuantumClassifier, rho: &DensityMatrix) -> Result<Label> {
    Predictor::predict(clf, rho)
}

pub fn dual_apply(channel: &KrausChannel, povm_element: &ComplexMatrix) -> Result<ComplexMatrix> {
    channel.dual_apply(povm_element)
}

/// State `U^dagger |v><v| U` with `|v>` a unit vector in the support of
/// `Pi_target`, so that the classifier outputs `target` with confidence 1
/// when the element is a projector.
///
/// For a projector, `|v>` is `Pi e_k` normalized for the lowest basis index
/// `k` with a non-negligible image. Otherwise the top eigenvector is used.
pub fn reverse_prepare(clf: &QuantumClassifier, target: Label) -> Result<DensityMatrix> {
    let u = clf
        .channel
        .as_unitary()
        .ok_or_else(|| Error::Unsupported("reverse preparation needs a unitary channel".into()))?;
    let pi = clf.povm.element_for(target).ok_or_else(|| invalid(format!("unknown label {target}")))?;
    let dim = pi.rows();
    let projective = (pi * pi).max_abs_diff(pi) <= COMPLETENESS_TOL;
    let v: Vec<C64> = if projective {
        let k = (0..dim)
            .find(|&k| pi[(k, k)].re > 1e-3)
            .ok_or_else(|| invalid(format!("POVM element for label {target} has rank 0")))?;
        pi.column(k)
    } else {
        let eig = hermitian_eigen(pi)?;
        if eig.values[dim - 1] <= 1e-12 {
            return Err(invalid(format!("POVM element for label {target} has rank 0")));
        }
        eig.vector(dim - 1)
    };
    let w = u.adjoint().apply(&v)?;
    Ok(PureState::normalized(w)?.density())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::concentration::sample_mixed_state;
    use crate::rng::Seed;

    fn ket(d: usize, k: usize) -> DensityMatrix {
        PureState::basis(d, k).unwrap().density()
    }

    fn z_classifier() -> QuantumClassifier {
        QuantumClassifier::new(KrausChannel::identity(2), POVMSet::computational(2).unwrap()).unwrap()
    }

    #[test]
    fn eigenstate_has_full_confidence() {
        let c = z_classifier().confidences(&ket(2, 1)).unwrap();
        assert_eq!(c, vec![0.0, 1.0]);
        assert_eq!(predict(&z_classifier(), &ket(2, 1)).unwrap(), 1);
    }

    #[test]
    fn maximally_mixed_is_uniform_and_tied() {
        let clf = QuantumClassifier::new(KrausChannel::identity(4), POVMSet::computational(4).unwrap()).unwrap();
        let c = clf.confidences(&DensityMatrix::maximally_mixed(4).unwrap()).unwrap();
        assert!(c.iter().all(|x| (x - 0.25).abs() < 1e-15));
        let d = clf.decide(&DensityMatrix::maximally_mixed(4).unwrap()).unwrap();
        assert_eq!(d.label, 0);
        assert!(d.on_boundary);
    }

    #[test]
    fn tie_rule() {
        assert_eq!(decide(&[0, 1], &[0.9, 0.1]).label, 0);
        assert_eq!(decide(&[0, 1], &[0.5, 0.5]).label, 0);
        assert_eq!(decide(&[3, 1], &[0.5, 0.5]).label, 1);
        assert!(!decide(&[0, 1], &[0.6, 0.4]).on_boundary);
    }

    #[test]
    fn dual_of_identity_and_unitary() {
        let p = POVMSet::computational(2).unwrap().elements()[0].clone();
        assert_eq!(KrausChannel::identity(2).dual_apply(&p).unwrap(), p);
        let u = crate::concentration::sample_haar_unitary(2, &mut Seed(2).stream(0)).unwrap();
        let d = KrausChannel::unitary(u.clone()).unwrap().dual_apply(&p).unwrap();
        assert!(d.max_abs_diff(&(&(&u.adjoint() * &p) * &u)) < 1e-14);
    }

    #[test]
    fn random_channel_duality() {
        let mut rng = Seed(9).stream(0);
        let ch = KrausChannel::random(4, 3, &mut rng).unwrap();
        let povm = POVMSet::random(4, 3, &mut rng).unwrap();
        for _ in 0..50 {
            let rho = sample_mixed_state(4, &mut rng).unwrap();
            let out = ch.apply(&rho).unwrap();
            for p in povm.elements() {
                let lhs = out.expectation(p).unwrap();
                let rhs = rho.expectation(&ch.dual_apply(p).unwrap()).unwrap();
                assert!((lhs - rhs).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn reverse_prepare_identity() {
        let s = reverse_prepare(&z_classifier(), 1).unwrap();
        assert!(s.matrix().max_abs_diff(ket(2, 1).matrix()) < 1e-15);
        assert!(reverse_prepare(&z_classifier(), 7).is_err());
    }

    #[test]
    fn reverse_prepare_needs_unitary() {
        let ch = KrausChannel::random(2, 2, &mut Seed(4).stream(0)).unwrap();
        let clf = QuantumClassifier::new(ch, POVMSet::computational(2).unwrap()).unwrap();
        assert!(matches!(reverse_prepare(&clf, 0), Err(Error::Unsupported(_))));
    }

    #[test]
    fn rank_zero_element_is_rejected() {
        let zero = ComplexMatrix::zeros(2, 2);
        let povm = POVMSet::new(vec![ComplexMatrix::identity(2), zero], vec![0, 1]).unwrap();
        let clf = QuantumClassifier::new(KrausChannel::identity(2), povm).unwrap();
        assert!(matches!(reverse_prepare(&clf, 1), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn invalid_povm_and_channel() {
        let half = ComplexMatrix::identity(2).scale_real(0.5);
        assert!(POVMSet::new(vec![half.clone()], vec![0]).is_err());
        assert!(POVMSet::new(vec![half.clone(), half.clone()], vec![0, 0]).is_err());
        assert!(KrausChannel::new(vec![half]).is_err());
        let clf = QuantumClassifier::new(KrausChannel::identity(3), POVMSet::computational(2).unwrap());
        assert!(clf.is_err());
        assert!(z_classifier().confidences(&ket(3, 0)).is_err());
    }
}
