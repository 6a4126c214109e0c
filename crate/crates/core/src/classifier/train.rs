//! Derivative-free coordinate search over circuit angles.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{decide, Label, LayeredCircuitSpec};
use crate::encoding::{encode, EncodingSpec, PixelVector};
use crate::error::{invalid, Result};
use crate::linalg::C64;
use crate::rng::Seed;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabeledPixels {
    pub pixels: PixelVector,
    pub label: Label,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub initial_accuracy: f64,
    pub final_accuracy: f64,
    pub evaluations: usize,
}

/// Lexicographic training objective: (correct count, mean confidence of the true label).
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
struct Score(usize, f64);

struct Evaluator<'a> {
    states: Vec<Vec<C64>>,
    targets: Vec<Label>,
    spec: &'a LayeredCircuitSpec,
    outcome_labels: Vec<Label>,
    distinct: Vec<Label>,
}

impl<'a> Evaluator<'a> {
    fn new(spec: &'a LayeredCircuitSpec, dataset: &[LabeledPixels]) -> Result<Self> {
        spec.validate()?;
        if dataset.is_empty() {
            return Err(invalid("training needs a non-empty dataset"));
        }
        let mut distinct = spec.labels.clone();
        distinct.sort_unstable();
        distinct.dedup();
        if let Some(s) = dataset.iter().find(|s| !distinct.contains(&s.label)) {
            return Err(invalid(format!("dataset label {} is not a classifier label", s.label)));
        }
        let enc = EncodingSpec::new(spec.d, spec.n_sites)?;
        let states = dataset
            .iter()
            .map(|s| encode(&s.pixels, &enc).map(|p| p.amplitudes().to_vec()))
            .collect::<Result<_>>()?;
        Ok(Self {
            states,
            targets: dataset.iter().map(|s| s.label).collect(),
            spec,
            outcome_labels: spec.outcome_labels(),
            distinct,
        })
    }

    fn score(&self, parameters: &[f64]) -> Result<Score> {
        let spec = LayeredCircuitSpec { parameters: parameters.to_vec(), ..self.spec.clone() };
        let u = spec.unitary()?;
        let mut correct = 0;
        let mut conf_sum = 0.0;
        let mut conf = vec![0.0; self.distinct.len()];
        for (psi, &target) in self.states.iter().zip(&self.targets) {
            let phi = u.apply(psi)?;
            conf.iter_mut().for_each(|c| *c = 0.0);
            for (amp, l) in phi.iter().zip(&self.outcome_labels) {
                let i = self.distinct.binary_search(l).expect("outcome label is listed");
                conf[i] += amp.norm_sqr();
            }
            if decide(&self.distinct, &conf).label == target {
                correct += 1;
            }
            conf_sum += conf[self.distinct.binary_search(&target).expect("validated")];
        }
        Ok(Score(correct, conf_sum / self.states.len() as f64))
    }
}

/// Fraction of the dataset classified correctly by `spec`.
pub fn training_accuracy(spec: &LayeredCircuitSpec, dataset: &[LabeledPixels]) -> Result<f64> {
    let ev = Evaluator::new(spec, dataset)?;
    Ok(ev.score(&spec.parameters)?.0 as f64 / dataset.len() as f64)
}

/// Coordinate search over the circuit angles.
///
/// Each sweep visits the coordinates in a seeded random order and tries
/// `theta +- step`, keeping a move only if it improves (accuracy, mean true-label
/// confidence) lexicographically. A sweep without progress halves the step.
/// `budget` caps the number of objective evaluations; zero returns `spec` unchanged.
pub fn train_toy(spec: &LayeredCircuitSpec, dataset: &[LabeledPixels], budget: usize, seed: u64) -> Result<LayeredCircuitSpec> {
    train_toy_report(spec, dataset, budget, seed).map(|(s, _)| s)
}

/// [`train_toy`], also returning accuracies and the evaluation count.
pub fn train_toy_report(
    spec: &LayeredCircuitSpec,
    dataset: &[LabeledPixels],
    budget: usize,
    seed: u64,
) -> Result<(LayeredCircuitSpec, TrainReport)> {
    let ev = Evaluator::new(spec, dataset)?;
    let mut params = spec.parameters.clone();
    let mut best = ev.score(&params)?;
    let initial = best.0 as f64 / dataset.len() as f64;
    let mut rng = Seed(seed).stream(0);
    let mut step = std::f64::consts::FRAC_PI_4;
    let mut evaluations = 0;
    let mut order: Vec<usize> = (0..params.len()).collect();
    'outer: while evaluations < budget && step > 1e-4 && !order.is_empty() {
        order.shuffle(&mut rng);
        let mut improved = false;
        for &k in &order {
            for sign in [1.0, -1.0] {
                if evaluations >= budget {
                    break 'outer;
                }
                let mut trial = params.clone();
                trial[k] += sign * step;
                evaluations += 1;
                let s = ev.score(&trial)?;
                if s.0 > best.0 || (s.0 == best.0 && s.1 > best.1 + 1e-15) {
                    best = s;
                    params = trial;
                    improved = true;
                    break;
                }
            }
        }
        if !improved {
            step /= 2.0;
        }
    }
    let out = LayeredCircuitSpec { parameters: params, ..spec.clone() };
    let report = TrainReport {
        initial_accuracy: initial,
        final_accuracy: best.0 as f64 / dataset.len() as f64,
        evaluations,
    };
    Ok((out, report))
}
