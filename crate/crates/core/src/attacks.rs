//! Adversarial attacks and empirical adversarial risk.
//!
//! Every attack searches a restricted candidate set, so a reported
//! perturbation size is an upper bound on the minimal one, and risk
//! estimates built on them are lower bounds on the true risk.

use std::f64::consts::{PI, TAU};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifier::{decide, reverse_prepare, Label, Predictor, QuantumClassifier};
use crate::concentration::{complex_normal, random_direction, sample_haar_pure, EncodedGenerator};
use crate::encoding::closed_trace_distance;
use crate::error::{invalid, Error, Result};
use crate::linalg::C64;
use crate::metrics::{numeric_rank, trace_norm_distance};
use crate::rng::Seed;
use crate::state::{DensityMatrix, PureState};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttackKind {
    Substitution,
    InDistribution,
    Unconstrained,
}

impl AttackKind {
    pub fn as_str(self) -> &'static str {
        match self {
            AttackKind::Substitution => "substitution",
            AttackKind::InDistribution => "in_distribution",
            AttackKind::Unconstrained => "unconstrained",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttackOutcome {
    pub kind: AttackKind,
    pub success: bool,
    /// Trace-norm size of the perturbation, or the mixing fraction for substitution.
    pub perturbation_size: f64,
    /// `||rho - adversarial||_1`, reported for every kind.
    pub induced_trace_norm: Option<f64>,
    pub original_label: Label,
    pub adversarial_label: Option<Label>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adversarial_state: Option<DensityMatrix>,
    pub search_evaluations: usize,
    /// Numeric rank of the adversarial state.
    pub numeric_rank: Option<usize>,
    /// The input was already tied between labels.
    pub on_boundary: bool,
}

impl AttackOutcome {
    fn failure(kind: AttackKind, original: Label, evaluations: usize) -> Self {
        Self {
            kind,
            success: false,
            perturbation_size: f64::INFINITY,
            induced_trace_norm: None,
            original_label: original,
            adversarial_label: None,
            adversarial_state: None,
            search_evaluations: evaluations,
            numeric_rank: None,
            on_boundary: false,
        }
    }
}

/// Substitution attack record, with the audit of its size guarantee.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubstitutionOutcome {
    pub outcome: AttackOutcome,
    /// `conf_original - 1/2` of the clean state.
    pub margin: f64,
    pub threshold: f64,
    /// Confidence of the original label after mixing.
    pub mixed_confidence: f64,
    /// `||rho - mix||_1 >= eps (1 + 2 delta) - 1e-9`, checked when `eps` exceeds the threshold.
    pub size_bound_holds: Option<bool>,
}

/// `1 - 1/(1 + 2 delta)`, the smallest mixing fraction that can flip a
/// binary decision with margin `delta`.
pub fn substitution_threshold(delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta <= 0.5) {
        return Err(invalid(format!("margin {delta} outside (0, 1/2]")));
    }
    Ok(1.0 - 1.0 / (1.0 + 2.0 * delta))
}

/// Replaces a fraction `eps` of the input by the reverse-prepared state for `target`.
pub fn substitution_attack(
    clf: &QuantumClassifier,
    rho: &DensityMatrix,
    target: Label,
    eps: f64,
) -> Result<SubstitutionOutcome> {
    if clf.channel().as_unitary().is_none() {
        return Err(Error::Unsupported("substitution needs a unitary classifier".into()));
    }
    if !(0.0..=1.0).contains(&eps) {
        return Err(invalid(format!("mixing fraction {eps} outside [0, 1]")));
    }
    let original = clf.predict(rho)?;
    if original == target {
        return Err(invalid("target label equals the current prediction"));
    }
    let margin = clf.confidence_of(rho, original)? - 0.5;
    if !(margin > 0.0) {
        return Err(invalid(format!("confidence margin {margin} is not positive")));
    }
    let threshold = substitution_threshold(margin.min(0.5))?;
    let sigma = reverse_prepare(clf, target)?;
    let mix = rho.mix(&sigma, eps)?;
    let decision = clf.decide(&mix)?;
    let mixed_confidence = clf.confidence_of(&mix, original)?;
    let induced = trace_norm_distance(rho, &mix)?;
    let success = mixed_confidence < 0.5 && decision.label != original;
    let size_bound_holds = (eps > threshold).then_some(induced >= eps * (1.0 + 2.0 * margin) - 1e-9);
    let outcome = AttackOutcome {
        kind: AttackKind::Substitution,
        success,
        perturbation_size: eps,
        induced_trace_norm: Some(induced),
        original_label: original,
        adversarial_label: success.then_some(decision.label),
        numeric_rank: Some(numeric_rank(&mix)),
        adversarial_state: Some(mix),
        search_evaluations: 2,
        on_boundary: false,
    };
    Ok(SubstitutionOutcome { outcome, margin, threshold, mixed_confidence, size_bound_holds })
}

/// Random-direction search in the latent space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatentSearch {
    /// Number of random directions; direction `k` always comes from stream `k`,
    /// so a larger budget searches a superset.
    pub directions: usize,
    pub max_radius: f64,
    /// Coarse radial scan points per direction before bisection.
    pub radial_steps: usize,
    pub radius_tolerance: f64,
    pub seed: u64,
}

impl Default for LatentSearch {
    fn default() -> Self {
        Self { directions: 32, max_radius: 6.0, radial_steps: 24, radius_tolerance: 1e-4, seed: 0 }
    }
}

/// Searches `g(z + r u)` over random unit directions `u`: a radial scan finds
/// the first label change along each ray and bisection narrows the radius.
/// The size is the closed-form trace distance between the encoded pixels.
pub fn in_distribution_attack(
    pred: &dyn Predictor,
    gen: &EncodedGenerator,
    z: &[f64],
    search: &LatentSearch,
) -> Result<AttackOutcome> {
    if search.directions == 0 || search.radial_steps == 0 {
        return Err(invalid("the latent search needs a positive budget"));
    }
    if !(search.max_radius > 0.0 && search.radius_tolerance > 0.0) {
        return Err(invalid("radius and tolerance must be positive"));
    }
    let base_px = gen.pixels(z)?;
    let base = pred.decide(&gen.state(z)?)?;
    let orig = base.label;
    let mut evals = 1;
    let root = Seed(search.seed);
    let mut best: Option<(f64, Vec<f64>, Label)> = None;
    let point = |dir: &[f64], r: f64| -> Vec<f64> { z.iter().zip(dir).map(|(a, b)| a + r * b).collect() };

    for k in 0..search.directions {
        let dir = random_direction(gen.generator.m, &mut root.stream(k as u64));
        let mut prev = 0.0;
        for step in 1..=search.radial_steps {
            let r = search.max_radius * step as f64 / search.radial_steps as f64;
            evals += 1;
            let label = pred.predict(&gen.state(&point(&dir, r))?)?;
            if label == orig {
                prev = r;
                continue;
            }
            let (mut lo, mut hi, mut hi_label) = (prev, r, label);
            while hi - lo > search.radius_tolerance {
                let mid = 0.5 * (lo + hi);
                evals += 1;
                let l = pred.predict(&gen.state(&point(&dir, mid))?)?;
                if l == orig {
                    lo = mid;
                } else {
                    hi = mid;
                    hi_label = l;
                }
            }
            let zp = point(&dir, hi);
            let size = closed_trace_distance(&base_px, &gen.pixels(&zp)?, &gen.spec)?;
            if best.as_ref().is_none_or(|b| size < b.0) {
                best = Some((size, zp, hi_label));
            }
            break;
        }
    }

    let mut out = match best {
        Some((size, zp, label)) => {
            let state = gen.state(&zp)?;
            AttackOutcome {
                kind: AttackKind::InDistribution,
                success: true,
                perturbation_size: size,
                induced_trace_norm: Some(size),
                original_label: orig,
                adversarial_label: Some(label),
                numeric_rank: Some(1),
                adversarial_state: Some(state),
                search_evaluations: evals,
                on_boundary: false,
            }
        }
        None => AttackOutcome::failure(AttackKind::InDistribution, orig, evals),
    };
    if base.on_boundary {
        out.success = true;
        out.perturbation_size = 0.0;
        out.on_boundary = true;
    }
    Ok(out)
}

/// Mixture search toward candidate target states.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixtureSearch {
    /// Bisection tolerance on the mixing weight `t`.
    pub t_tolerance: f64,
    /// Coarse scan points on `t in (0, 1]` before bisection.
    pub scan_steps: usize,
    /// Objective evaluations spent refining pure targets; zero disables the refinement.
    pub refine_budget: usize,
    /// Haar-random pure targets added as refinement starting points.
    pub random_starts: usize,
    pub seed: u64,
}

impl Default for MixtureSearch {
    fn default() -> Self {
        Self { t_tolerance: 1e-3, scan_steps: 8, refine_budget: 300, random_starts: 2, seed: 0 }
    }
}

struct Crossing {
    size: f64,
    state: DensityMatrix,
    label: Label,
}

/// Smallest flipping mixture `(1 - t) rho + t tau` found by scan then bisection.
fn mixture_crossing(
    pred: &dyn Predictor,
    rho: &DensityMatrix,
    tau: &DensityMatrix,
    orig: Label,
    search: &MixtureSearch,
    evals: &mut usize,
) -> Result<Option<Crossing>> {
    let steps = search.scan_steps.max(1);
    let mut prev = 0.0;
    for j in 1..=steps {
        let t = j as f64 / steps as f64;
        *evals += 1;
        let label = pred.predict(&rho.mix(tau, t)?)?;
        if label == orig {
            prev = t;
            continue;
        }
        let (mut lo, mut hi, mut hi_label) = (prev, t, label);
        while hi - lo > search.t_tolerance {
            let mid = 0.5 * (lo + hi);
            *evals += 1;
            let l = pred.predict(&rho.mix(tau, mid)?)?;
            if l == orig {
                lo = mid;
            } else {
                hi = mid;
                hi_label = l;
            }
        }
        let size = hi * trace_norm_distance(rho, tau)?;
        return Ok(Some(Crossing { size, state: rho.mix(tau, hi)?, label: hi_label }));
    }
    Ok(None)
}

fn keep_best(best: &mut Option<Crossing>, c: Option<Crossing>) {
    if let Some(c) = c {
        if best.as_ref().is_none_or(|b| c.size < b.size) {
            *best = Some(c);
        }
    }
}

/// Searches for the nearest differently-labelled state among:
/// mixtures toward the reverse-prepared state of every other label; any
/// caller-supplied candidate states; and mixtures toward pure targets refined
/// by a (1+1) evolution strategy started from the reverse-prepared states and
/// a few random pure states.
pub fn unconstrained_attack(
    pred: &dyn Predictor,
    rho: &DensityMatrix,
    candidates: &[DensityMatrix],
    search: &MixtureSearch,
) -> Result<AttackOutcome> {
    if rho.dim() != pred.input_dim() {
        return Err(invalid("state dimension does not match the classifier"));
    }
    if let Some(c) = candidates.iter().find(|c| c.dim() != rho.dim()) {
        return Err(invalid(format!("candidate of dimension {} for a state of dimension {}", c.dim(), rho.dim())));
    }
    let base = pred.decide(rho)?;
    let orig = base.label;
    let mut evals = 1;
    let mut best: Option<Crossing> = None;

    let mut starts: Vec<Vec<C64>> = Vec::new();
    for &l in pred.labels().iter().filter(|&&l| l != orig) {
        if let Some(tau) = pred.reverse_target(l) {
            keep_best(&mut best, mixture_crossing(pred, rho, &tau, orig, search, &mut evals)?);
            let eig = crate::linalg::hermitian_eigen(tau.matrix())?;
            starts.push(eig.vector(tau.dim() - 1));
        }
    }

    for sigma in candidates {
        evals += 1;
        let label = pred.predict(sigma)?;
        if label != orig {
            let size = trace_norm_distance(rho, sigma)?;
            keep_best(&mut best, Some(Crossing { size, state: sigma.clone(), label }));
        }
    }

    if search.refine_budget > 0 {
        let root = Seed(search.seed);
        for s in 0..search.random_starts {
            starts.push(sample_haar_pure(rho.dim(), &mut root.stream(s as u64))?.amplitudes().to_vec());
        }
        let per_start = search.refine_budget / starts.len().max(1);
        let mut rng = root.stream(u64::MAX);
        for v0 in starts {
            let c = refine_pure_target(pred, rho, orig, v0, per_start, search, &mut rng, &mut evals)?;
            keep_best(&mut best, c);
        }
    }

    let mut out = match best {
        Some(c) => AttackOutcome {
            kind: AttackKind::Unconstrained,
            success: true,
            perturbation_size: c.size,
            induced_trace_norm: Some(c.size),
            original_label: orig,
            adversarial_label: Some(c.label),
            numeric_rank: Some(numeric_rank(&c.state)),
            adversarial_state: Some(c.state),
            search_evaluations: evals,
            on_boundary: false,
        },
        None => AttackOutcome::failure(AttackKind::Unconstrained, orig, evals),
    };
    if base.on_boundary {
        out.success = true;
        out.perturbation_size = 0.0;
        out.on_boundary = true;
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn refine_pure_target<R: Rng>(
    pred: &dyn Predictor,
    rho: &DensityMatrix,
    orig: Label,
    v0: Vec<C64>,
    budget: usize,
    search: &MixtureSearch,
    rng: &mut R,
    evals: &mut usize,
) -> Result<Option<Crossing>> {
    let target = |v: &[C64]| -> Result<DensityMatrix> {
        let psi = PureState::normalized(v.to_vec())?;
        Ok(match rho.factor_dims() {
            Some(d) => psi.density().with_factor_dims(d.to_vec())?,
            None => psi.density(),
        })
    };
    let mut v = v0;
    let mut best = mixture_crossing(pred, rho, &target(&v)?, orig, search, evals)?;
    let mut step = 0.3;
    for _ in 0..budget {
        if step < 1e-4 {
            break;
        }
        let trial: Vec<C64> = v.iter().map(|a| a + complex_normal(rng) * step).collect();
        let c = mixture_crossing(pred, rho, &target(&trial)?, orig, search, evals)?;
        let better = match (&c, &best) {
            (Some(c), Some(b)) => c.size < b.size,
            (Some(_), None) => true,
            _ => false,
        };
        if better {
            let n = crate::linalg::vec_norm(&trial);
            v = trial.into_iter().map(|a| a / n).collect();
            best = c;
            step *= 1.5;
        } else {
            step *= 0.9;
        }
    }
    Ok(best)
}

/// Result of the brute-force Bloch-ball oracle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    /// Smallest trace distance to a grid state with a different prediction;
    /// infinite when no grid state changes the prediction.
    pub min_distance: f64,
    /// Diameter of one grid cell at the finest level searched.
    pub grid_error: f64,
    pub evaluations: usize,
}

struct BlochModel {
    labels: Vec<Label>,
    /// Confidence of label `s` at Bloch vector `r` is `a[s] + b[s] . r`.
    a: Vec<f64>,
    b: Vec<[f64; 3]>,
}

impl BlochModel {
    fn new(clf: &QuantumClassifier) -> Result<Self> {
        let mut a = Vec::new();
        let mut b = Vec::new();
        for p in clf.povm().elements() {
            let e = clf.channel().dual_apply(p)?;
            a.push(0.5 * (e[(0, 0)].re + e[(1, 1)].re));
            b.push([e[(0, 1)].re, -e[(0, 1)].im, 0.5 * (e[(0, 0)].re - e[(1, 1)].re)]);
        }
        Ok(Self { labels: clf.povm().labels().to_vec(), a, b })
    }

    fn label(&self, r: [f64; 3], buf: &mut Vec<f64>) -> Label {
        buf.clear();
        for (a, b) in self.a.iter().zip(&self.b) {
            buf.push(a + b[0] * r[0] + b[1] * r[1] + b[2] * r[2]);
        }
        decide(&self.labels, buf).label
    }
}

fn bloch(rho: &DensityMatrix) -> [f64; 3] {
    let m = rho.matrix();
    [2.0 * m[(0, 1)].re, -2.0 * m[(0, 1)].im, (m[(0, 0)] - m[(1, 1)]).re]
}

fn grid_point(res: usize, i: usize, j: usize, k: usize) -> [f64; 3] {
    let r = i as f64 / res as f64;
    let th = PI * j as f64 / res as f64;
    let ph = TAU * k as f64 / (2 * res) as f64;
    [r * th.sin() * ph.cos(), r * th.sin() * ph.sin(), r * th.cos()]
}

fn dist(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

fn cell_diameter(res: usize) -> f64 {
    let h = 1.0 / res as f64;
    (h * h + 2.0 * (PI * h).powi(2)).sqrt()
}

/// Exhaustive search of the Bloch ball on a `(radius, polar, azimuth)` grid
/// with `resolution` radial and polar steps and `2 * resolution` azimuthal
/// steps. For qubits the trace norm equals the Euclidean Bloch distance.
pub fn oracle_min_perturbation(clf: &QuantumClassifier, rho: &DensityMatrix, resolution: usize) -> Result<OracleResult> {
    oracle_min_perturbation_refined(clf, rho, resolution, 0)
}

/// [`oracle_min_perturbation`] followed by `levels` local refinements, each
/// with a 4x finer grid around the best point. Every coarse grid point is on
/// the finer grids, so refinement never increases the minimum.
pub fn oracle_min_perturbation_refined(
    clf: &QuantumClassifier,
    rho: &DensityMatrix,
    resolution: usize,
    levels: usize,
) -> Result<OracleResult> {
    if rho.dim() != 2 || clf.channel().input_dim() != 2 {
        return Err(Error::Unsupported("the Bloch oracle needs a single qubit".into()));
    }
    if resolution < 2 {
        return Err(invalid("oracle resolution must be at least 2"));
    }
    let model = BlochModel::new(clf)?;
    let r0 = bloch(rho);
    let mut buf = Vec::new();
    let orig = model.label(r0, &mut buf);

    let scan = |res: usize, ir: (usize, usize), jr: (usize, usize), kr: (isize, isize)| {
        let mut buf = Vec::new();
        let mut best = (f64::INFINITY, (0usize, 0usize, 0isize));
        let mut count = 0;
        for i in ir.0..=ir.1 {
            for j in jr.0..=jr.1 {
                for k in kr.0..=kr.1 {
                    let kk = k.rem_euclid(2 * res as isize) as usize;
                    let p = grid_point(res, i, j, kk);
                    count += 1;
                    if model.label(p, &mut buf) != orig {
                        let d = dist(p, r0);
                        if d < best.0 {
                            best = (d, (i, j, k));
                        }
                    }
                }
            }
        }
        (best, count)
    };

    let mut res = resolution;
    let (mut best, mut evaluations) = scan(res, (0, res), (0, res), (0, 2 * res as isize - 1));
    for _ in 0..levels {
        if !best.0.is_finite() {
            break;
        }
        let (i, j, k) = best.1;
        let fine = res * 4;
        let w = 8;
        let ir = ((4 * i).saturating_sub(w), (4 * i + w).min(fine));
        let jr = ((4 * j).saturating_sub(w), (4 * j + w).min(fine));
        let kr = (4 * k - w as isize, 4 * k + w as isize);
        let (b, c) = scan(fine, ir, jr, kr);
        evaluations += c;
        res = fine;
        // The old best point is on the finer grid inside the window, so b.0 <= best.0.
        best = b;
    }
    Ok(OracleResult { min_distance: best.0, grid_error: cell_diameter(res), evaluations })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RiskKind {
    ErrorRegion,
    PredictionChange,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RiskEstimate {
    pub risk_kind: RiskKind,
    pub epsilon: f64,
    pub estimate: f64,
    pub sample_count: usize,
    pub std_error: f64,
    /// Always true: attacks give upper bounds on minimal perturbations, so the
    /// estimate can only undercount.
    pub is_lower_bound: bool,
}

/// One sampled attack, as written to batch CSV files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BatchRecord {
    pub sample_id: usize,
    pub kind: AttackKind,
    pub epsilon: f64,
    pub size: f64,
    pub success: bool,
    /// `"original->adversarial"`, with an empty right side on failure.
    pub labels: String,
}

pub const BATCH_HEADER: [&str; 6] = ["sample_id", "kind", "epsilon", "size", "success", "labels"];

impl BatchRecord {
    pub fn from_outcome(sample_id: usize, epsilon: f64, o: &AttackOutcome) -> Self {
        let adv = o.adversarial_label.map(|l| l.to_string()).unwrap_or_default();
        Self {
            sample_id,
            kind: o.kind,
            epsilon,
            size: o.perturbation_size,
            success: o.success,
            labels: format!("{}->{}", o.original_label, adv),
        }
    }
}

pub type StateSampler<'a> = dyn Fn(usize) -> Result<DensityMatrix> + Sync + 'a;
pub type Labeling<'a> = dyn Fn(&DensityMatrix) -> Result<Label> + Sync + 'a;
pub type AttackFn<'a> = dyn Fn(usize, &DensityMatrix) -> Result<AttackOutcome> + Sync + 'a;

/// Fraction of sampled states whose attack finds a qualifying perturbation of
/// size at most `epsilon`. Error-region risk also counts samples that are
/// already misclassified, and only counts adversarial states on which the
/// ground truth and the predictor disagree.
#[allow(clippy::too_many_arguments)]
pub fn estimate_risk(
    kind: RiskKind,
    pred: &dyn Predictor,
    sampler: &StateSampler<'_>,
    ground_truth: Option<&Labeling<'_>>,
    epsilon: f64,
    samples: usize,
    attack: &AttackFn<'_>,
) -> Result<RiskEstimate> {
    if samples == 0 {
        return Err(invalid("need at least one sample"));
    }
    if kind == RiskKind::ErrorRegion && ground_truth.is_none() {
        return Err(invalid("error-region risk needs a ground-truth labeling"));
    }
    let hits = (0..samples)
        .into_par_iter()
        .map(|i| -> Result<bool> {
            let rho = sampler(i)?;
            if let (RiskKind::ErrorRegion, Some(c)) = (kind, ground_truth) {
                if c(&rho)? != pred.predict(&rho)? {
                    return Ok(true);
                }
            }
            let o = attack(i, &rho)?;
            if !(o.success && o.perturbation_size <= epsilon) {
                return Ok(false);
            }
            match (kind, ground_truth) {
                (RiskKind::PredictionChange, _) => Ok(true),
                (RiskKind::ErrorRegion, Some(c)) => match &o.adversarial_state {
                    Some(s) => Ok(c(s)? != pred.predict(s)?),
                    None => Ok(false),
                },
                (RiskKind::ErrorRegion, None) => unreachable!("checked above"),
            }
        })
        .collect::<Result<Vec<bool>>>()?;
    let n = samples as f64;
    let estimate = hits.iter().filter(|&&h| h).count() as f64 / n;
    Ok(RiskEstimate {
        risk_kind: kind,
        epsilon,
        estimate,
        sample_count: samples,
        std_error: (estimate * (1.0 - estimate) / n).sqrt(),
        is_lower_bound: true,
    })
}
