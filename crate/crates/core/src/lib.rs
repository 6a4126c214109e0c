//! Simulation and numerical auditing of adversarial robustness for quantum classifiers.
//!
//! States are dense density matrices ([`DensityMatrix`]) over small Hilbert
//! spaces. Classifiers are a quantum channel followed by a labelled POVM
//! ([`QuantumClassifier`]). The [`bounds`] module evaluates closed-form
//! robustness bounds, [`attacks`] searches for adversarial perturbations,
//! [`concentration`] estimates concentration of measure by Monte Carlo, and
//! [`defense`] implements the marginal-projection defense.
//!
//! All randomness flows from a [`Seed`]; independent work items draw from
//! separate ChaCha streams, so results do not depend on thread scheduling.

// `!(x > 0.0)` style guards are used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod attacks;
pub mod bounds;
pub mod classifier;
pub mod concentration;
pub mod defense;
pub mod encoding;
pub mod error;
pub mod linalg;
pub mod metrics;
pub mod report;
pub mod rng;
pub mod state;

pub use attacks::{AttackKind, AttackOutcome, RiskEstimate, RiskKind};
pub use bounds::{BoundReport, ModulusSpec};
pub use classifier::{Decision, KrausChannel, Label, LayeredCircuitSpec, POVMSet, Predictor, QuantumClassifier};
pub use defense::DefendedClassifier;
pub use encoding::{EncodingSpec, PixelVector};
pub use error::{DensityError, Error, Result};
pub use linalg::{ComplexMatrix, C64};
pub use metrics::DistanceKind;
pub use rng::Seed;
pub use state::{DensityMatrix, PureState};
