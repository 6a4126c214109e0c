//! One function per command. Each appends checks and artifacts to the report.

use std::path::Path;

use rand::Rng;

use qarb_core::attacks::{
    in_distribution_attack, substitution_attack, unconstrained_attack, AttackOutcome, BatchRecord, LatentSearch,
    MixtureSearch, RiskKind, BATCH_HEADER,
};
use qarb_core::bounds::{
    error_region_bound, gaussian_cdf, indist_bound_alternate, indist_bound_thm2, lambda1, lambda2, lemma1_audit,
    levy_alpha_bound, multiclass_risk_lower_clamped, pc_bound_haar, table1, BoundReport, HaarBoundParams, LevyParams, ModulusSpec, Table1Config,
    Table1Row,
};
use qarb_core::classifier::{build_layered, train_toy, LabeledPixels};
use qarb_core::concentration::{
    empirical_alpha, estimate_modulus, isoperimetry_audit, make_generator, sample_gaussian, sample_haar_pure,
    sample_haar_unitaries, sample_mixed_state, EncodedGenerator, UnitaryTraceFamily, CONCENTRATION_HEADER,
};
use qarb_core::defense::{fit_pixels, project_marginals, sandwich_audit_batch, DefendedClassifier, SANDWICH_HEADER};
use qarb_core::encoding::{closed_fidelity, closed_trace_distance, encode, read_pixel_csv, write_pixel_csv};
use qarb_core::linalg::inner;
use qarb_core::metrics::confidence_change_audit;
use qarb_core::report::{fmt_f64, fmt_opt, Table};
use qarb_core::{
    ComplexMatrix, DensityMatrix, EncodingSpec, KrausChannel, LayeredCircuitSpec, POVMSet, PixelVector, Predictor,
    QuantumClassifier, Seed,
};

use crate::config::{AttackChoice, ExperimentConfig};
use crate::report::RunReport;
use crate::CliError;

type Res = Result<(), CliError>;

fn random_pixels<R: Rng>(n: usize, rng: &mut R) -> PixelVector {
    PixelVector::new((0..n).map(|_| rng.random::<f64>()).collect()).expect("values lie in [0, 1]")
}

/// Label 1 when the mean pixel exceeds one half.
fn threshold_label(px: &PixelVector) -> u32 {
    (px.as_slice().iter().sum::<f64>() > 0.5 * px.len() as f64) as u32
}

fn outcome_labels(d: usize) -> Vec<u32> {
    (0..d).map(|s| (s > 0) as u32).collect()
}

/// Loads the classifier named in the config, or trains a toy one on `data`.
fn classifier_spec(cfg: &ExperimentConfig, n: usize, d: usize, data: &[LabeledPixels]) -> Result<LayeredCircuitSpec, CliError> {
    if let Some(path) = &cfg.classifier {
        let text = std::fs::read_to_string(path)?;
        let spec: LayeredCircuitSpec = serde_json::from_str(&text)?;
        spec.validate()?;
        if spec.n_sites != n || spec.d != d {
            return Err(CliError::Usage(format!(
                "classifier has n = {}, d = {} but the config asks for n = {n}, d = {d}",
                spec.n_sites, spec.d
            )));
        }
        return Ok(spec);
    }
    let init = LayeredCircuitSpec::brick_wall(n, d, 2, 0, outcome_labels(d));
    Ok(train_toy(&init, data, cfg.train_budget.unwrap_or(400), Seed(cfg.seed).child(1).0)?)
}

fn pixel_dataset(n: usize, count: usize, seed: Seed) -> Vec<LabeledPixels> {
    let mut rng = seed.stream(0);
    (0..count)
        .map(|_| {
            let px = random_pixels(n, &mut rng);
            LabeledPixels { label: threshold_label(&px), pixels: px }
        })
        .collect()
}

pub fn encode_cmd(cfg: &ExperimentConfig, dir: &Path, rep: &mut RunReport) -> Res {
    let d = cfg.d_or(2);
    let vectors = match &cfg.pixels {
        Some(p) => read_pixel_csv(p)?,
        None => {
            let mut rng = Seed(cfg.seed).stream(0);
            let n = cfg.n_or(4);
            (0..cfg.samples_or(8)).map(|_| random_pixels(n, &mut rng)).collect()
        }
    };
    let n = vectors.first().map(PixelVector::len).ok_or_else(|| CliError::Usage("no pixel vectors".into()))?;
    let spec = EncodingSpec::new(d, n)?;
    write_pixel_csv(&dir.join("pixels.csv"), &vectors)?;
    rep.artifacts.push("pixels.csv".into());

    let states = vectors.iter().map(|v| encode(v, &spec)).collect::<Result<Vec<_>, _>>()?;
    let mut amps = Table::new(&["sample_id", "basis_index", "amplitude"]);
    for (i, s) in states.iter().enumerate() {
        for (k, a) in s.amplitudes().iter().enumerate() {
            amps.push(vec![i.to_string(), k.to_string(), fmt_f64(a.re)]);
        }
    }
    rep.write_table(dir, "encoded.csv", &amps)?;

    let mut pairs = Table::new(&["i", "j", "closed_fidelity", "brute_fidelity", "closed_trace_distance"]);
    let mut worst: f64 = 0.0;
    for i in 1..vectors.len() {
        let closed = closed_fidelity(&vectors[i - 1], &vectors[i], &spec)?;
        let brute = inner(states[i - 1].amplitudes(), states[i].amplitudes()).norm_sqr();
        worst = worst.max((closed - brute).abs() / closed.max(f64::MIN_POSITIVE));
        let td = closed_trace_distance(&vectors[i - 1], &vectors[i], &spec)?;
        pairs.push(vec![(i - 1).to_string(), i.to_string(), fmt_f64(closed), fmt_f64(brute), fmt_f64(td)]);
    }
    rep.write_table(dir, "pairs.csv", &pairs)?;
    rep.check("closed_fidelity", worst <= 1e-10, format!("max relative error {worst:.3e}"));
    Ok(())
}

pub fn bounds_cmd(cfg: &ExperimentConfig, dir: &Path, rep: &mut RunReport) -> Res {
    let (n, d) = (cfg.n_or(8), cfg.d_or(2));
    let big_n = (d as f64).powi(n as i32);
    let eta = cfg.eta.unwrap_or(0.5);
    let mu_m = cfg.mu_m.unwrap_or(0.5);
    let gammas = cfg
        .gamma_grid
        .clone()
        .or_else(|| cfg.gamma.map(|g| vec![g]))
        .unwrap_or_else(|| (1..=10).map(|i| 0.1 * i as f64).collect());
    let modulus = ModulusSpec::linear(cfg.omega1.unwrap_or(cfg.generator.scale), n as f64)?;
    let pv = cfg.prop1_variant;
    let (classes, mv) = (cfg.classes.unwrap_or(10), cfg.multiclass_variant);

    let mut table = Table::new(&[
        "gamma",
        "error_region_bound",
        "lambda1",
        "epsilon_unitary",
        "trace_bound",
        "lambda2",
        "thm2_bound",
        "alternate_bound",
        "multiclass_lower",
    ]);
    let mut reports = Vec::new();
    let mut series: Vec<(f64, Option<f64>, Option<f64>)> = Vec::new();
    for &gamma in &gammas {
        let p = HaarBoundParams { big_n, eta, gamma, mu_m };
        let er = error_region_bound(&p).ok();
        let pc = pc_bound_haar(&p).ok();
        let l2 = lambda2(gamma).ok();
        let thm2 = indist_bound_thm2(&modulus, gamma, n, d, pv).ok();
        let alt = indist_bound_alternate(&modulus, gamma, eta, n, d, pv).ok();
        // The multiclass column reads gamma as the in-distribution budget.
        let multi = modulus
            .omega1_inverse(gamma)
            .and_then(|w| multiclass_risk_lower_clamped(gamma, w, classes, mv).ok());
        table.push(vec![
            fmt_f64(gamma),
            fmt_opt(er),
            fmt_opt(pc.map(|b| b.lambda1)),
            fmt_opt(pc.map(|b| b.epsilon_unitary)),
            fmt_opt(pc.map(|b| b.trace_bound)),
            fmt_opt(l2),
            fmt_opt(thm2),
            fmt_opt(alt),
            fmt_opt(multi),
        ]);
        let params = [("big_n", big_n), ("eta", eta), ("gamma", gamma), ("mu_m", mu_m), ("n", n as f64), ("d", d as f64)];
        if let Some(v) = er {
            reports.push(BoundReport::new("error_region", &params, v, &[]));
        }
        if let Some(b) = pc {
            reports.push(BoundReport::new("trace_bound", &params, b.trace_bound, &[]));
        }
        if let Some(v) = thm2 {
            reports.push(BoundReport::new("thm2", &params, v, &[pv.flag()]));
        }
        if let Some(v) = alt {
            reports.push(BoundReport::new("alternate", &params, v, &[pv.flag()]));
        }
        if let Some(v) = multi {
            let mparams = [("eps_in", gamma), ("classes", classes as f64)];
            reports.push(BoundReport::new("multiclass_lower", &mparams, v, &[mv.flag()]));
        }
        series.push((gamma, thm2, alt));
    }
    rep.write_table(dir, "bounds.csv", &table)?;
    std::fs::write(dir.join("bounds.json"), serde_json::to_string_pretty(&reports)? + "\n")?;
    rep.artifacts.push("bounds.json".into());

    let mut sorted: Vec<(f64, f64)> = series.iter().filter_map(|(g, t, _)| t.map(|t| (*g, t))).collect();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let monotone = sorted.windows(2).all(|w| w[1].1 <= w[0].1 + 1e-15);
    rep.check("thm2_nonincreasing_in_gamma", monotone, format!("{} defined points", sorted.len()));
    let looser = series.iter().filter_map(|(_, t, a)| Some((*t)? <= (*a)? + 1e-15)).all(|b| b);
    rep.check("alternate_not_tighter", looser, "alternate bound >= theorem bound where both are defined");
    Ok(())
}

pub fn table1_cmd(cfg: &ExperimentConfig, dir: &Path, rep: &mut RunReport) -> Res {
    let tc = Table1Config {
        n_values: cfg.n_values.clone().unwrap_or_else(|| (1..=10).collect()),
        d_values: cfg.d_values.clone().unwrap_or_else(|| vec![2, 3]),
        eta: cfg.eta.unwrap_or(0.5),
        gamma: cfg.gamma.unwrap_or(0.5),
        omega1_value: cfg.omega1.unwrap_or(1.0),
        variant: cfg.prop1_variant,
    };
    let entries = table1(&tc)?;
    let mut t = Table::new(&["row", "n", "d", "bound_value", "log_slope"]);
    let mut dev: f64 = 0.0;
    for e in &entries {
        t.push(vec![e.row.as_str().into(), e.n.to_string(), e.d.to_string(), fmt_opt(e.bound_value), fmt_opt(e.log_slope)]);
        if let (Table1Row::HaarTrace, Some(s)) = (e.row, e.log_slope) {
            dev = dev.max((s + (e.d as f64).log2()).abs());
        }
    }
    rep.write_table(dir, "table1.csv", &t)?;
    rep.check("haar_trace_slope", dev <= 1e-9, format!("max deviation from -log2(d): {dev:.2e}"));
    Ok(())
}

fn encoded_states(n: usize, d: usize, count: usize, seed: Seed) -> Result<Vec<DensityMatrix>, CliError> {
    let spec = EncodingSpec::new(d, n)?;
    let mut rng = seed.stream(0);
    (0..count).map(|_| Ok(encode(&random_pixels(n, &mut rng), &spec)?.density())).collect()
}

fn verify_outcome(pred: &dyn Predictor, o: &AttackOutcome) -> Result<bool, CliError> {
    if !o.success || o.on_boundary {
        return Ok(true);
    }
    Ok(match &o.adversarial_state {
        Some(s) => pred.predict(s)? != o.original_label,
        None => false,
    })
}

pub fn attack_cmd(cfg: &ExperimentConfig, dir: &Path, rep: &mut RunReport) -> Res {
    let (n, d) = (cfg.n_or(2), cfg.d_or(2));
    let samples = cfg.samples_or(10);
    let data = pixel_dataset(n, 60, Seed(cfg.seed).child(2));
    let spec = classifier_spec(cfg, n, d, &data)?;
    let clf = build_layered(&spec)?;
    let mut table = Table::new(&BATCH_HEADER);
    let mut verified = true;
    let mut successes = 0;
    match cfg.attack {
        AttackChoice::Substitution => {
            let grid = cfg.eps_grid.clone().unwrap_or_else(|| (0..=100).map(|i| 0.01 * i as f64).collect());
            let mut bound_ok = true;
            let mut threshold_ok = true;
            for (i, rho) in encoded_states(n, d, samples, Seed(cfg.seed).child(3))?.iter().enumerate() {
                let dec = clf.decide(rho)?;
                let Some(&target) = clf.labels().iter().find(|&&l| l != dec.label) else { continue };
                if dec.on_boundary {
                    continue;
                }
                for &eps in &grid {
                    let s = substitution_attack(&clf, rho, target, eps)?;
                    bound_ok &= s.size_bound_holds != Some(false);
                    threshold_ok &= !(s.outcome.success && eps <= s.threshold);
                    successes += s.outcome.success as usize;
                    verified &= verify_outcome(&clf, &s.outcome)?;
                    table.push(batch_row(&BatchRecord::from_outcome(i, eps, &s.outcome), true));
                }
            }
            rep.check("substitution_size_bound", bound_ok, "induced trace norm >= eps (1 + 2 delta) - 1e-9");
            rep.check("substitution_no_flip_below_threshold", threshold_ok, "no success at eps <= threshold");
        }
        AttackChoice::InDistribution => {
            let m = cfg.m.unwrap_or(n);
            let g = make_generator(m, n, Seed(cfg.seed).child(4).0, cfg.generator.scale)?;
            let egen = EncodedGenerator::new(g, EncodingSpec::new(d, n)?)?;
            let zs = sample_gaussian(m, samples, &mut Seed(cfg.seed).child(5).stream(0));
            for (i, z) in zs.iter().enumerate() {
                let ls = LatentSearch { seed: Seed(cfg.seed).child(6).0.wrapping_add(i as u64), ..Default::default() };
                let o = in_distribution_attack(&clf, &egen, z, &ls)?;
                successes += o.success as usize;
                verified &= verify_outcome(&clf, &o)?;
                table.push(batch_row(&BatchRecord::from_outcome(i, f64::NAN, &o), false));
            }
        }
        AttackChoice::Unconstrained => {
            for (i, rho) in encoded_states(n, d, samples, Seed(cfg.seed).child(3))?.iter().enumerate() {
                let ms = MixtureSearch { seed: Seed(cfg.seed).child(7).0.wrapping_add(i as u64), ..Default::default() };
                let o = unconstrained_attack(&clf, rho, &[], &ms)?;
                successes += o.success as usize;
                verified &= verify_outcome(&clf, &o)?;
                table.push(batch_row(&BatchRecord::from_outcome(i, f64::NAN, &o), false));
            }
        }
    }
    rep.write_table(dir, "batch.csv", &table)?;
    std::fs::write(dir.join("classifier.json"), serde_json::to_string_pretty(&spec)? + "\n")?;
    rep.artifacts.push("classifier.json".into());
    rep.check("adversarial_labels_verified", verified, format!("{successes} successful attacks re-checked"));
    Ok(())
}

fn batch_row(r: &BatchRecord, with_eps: bool) -> Vec<String> {
    vec![
        r.sample_id.to_string(),
        r.kind.as_str().into(),
        if with_eps { fmt_f64(r.epsilon) } else { String::new() },
        fmt_f64(r.size),
        r.success.to_string(),
        r.labels.clone(),
    ]
}

/// Toy classifier trained on generator images, labelled by the mean-pixel rule.
fn generator_setup(cfg: &ExperimentConfig, n: usize) -> Result<(EncodedGenerator, QuantumClassifier), CliError> {
    let m = cfg.m.unwrap_or(n);
    let g = make_generator(m, n, Seed(cfg.seed).child(4).0, cfg.generator.scale)?;
    let egen = EncodedGenerator::new(g, EncodingSpec::new(2, n)?)?;
    let zs = sample_gaussian(m, 60, &mut Seed(cfg.seed).child(8).stream(0));
    let data = zs
        .iter()
        .map(|z| {
            let px = egen.pixels(z)?;
            Ok(LabeledPixels { label: threshold_label(&px), pixels: px })
        })
        .collect::<Result<Vec<_>, qarb_core::Error>>()?;
    let clf = build_layered(&classifier_spec(cfg, n, 2, &data)?)?;
    Ok((egen, clf))
}

pub fn defend_cmd(cfg: &ExperimentConfig, dir: &Path, rep: &mut RunReport) -> Res {
    if cfg.d_or(2) != 2 {
        return Err(CliError::Core(qarb_core::Error::Unsupported("the defense audit is only stated for qubits".into())));
    }
    let n = cfg.n_or(2);
    let (egen, clf) = generator_setup(cfg, n)?;
    let dclf = DefendedClassifier::new(clf, egen.spec)?;
    let zs = sample_gaussian(egen.generator.m, cfg.samples_or(20), &mut Seed(cfg.seed).child(9).stream(0));
    let ls = LatentSearch { seed: Seed(cfg.seed).child(10).0, ..Default::default() };
    let ms = MixtureSearch { seed: Seed(cfg.seed).child(11).0, ..Default::default() };
    let records = sandwich_audit_batch(&dclf, &egen, &zs, &ls, &ms)?;
    let mut t = Table::new(&SANDWICH_HEADER);
    let mut ok = true;
    let mut conclusive = 0;
    for r in &records {
        t.push(vec![
            r.sample_id.to_string(),
            fmt_f64(r.eps_in_hat),
            fmt_f64(r.eps_unc_hat),
            fmt_f64(r.thm3_lower),
            r.bool1.to_string(),
            r.bool2.to_string(),
            r.conclusive.to_string(),
        ]);
        if r.conclusive {
            conclusive += 1;
            ok &= r.bool1 && r.bool2;
        }
    }
    rep.write_table(dir, "sandwich.csv", &t)?;
    rep.check(
        "sandwich_consistent",
        ok,
        format!("{conclusive} of {} samples conclusive; estimates are upper bounds, so this is a consistency check", records.len()),
    );
    Ok(())
}

pub fn risk_cmd(cfg: &ExperimentConfig, dir: &Path, rep: &mut RunReport) -> Res {
    let (n, d) = (cfg.n_or(1), cfg.d_or(2));
    let samples = cfg.samples_or(100);
    let grid = cfg.eps_grid.clone().unwrap_or_else(|| (1..=8).map(|i| 0.25 * i as f64).collect());
    let data = pixel_dataset(n, 60, Seed(cfg.seed).child(2));
    let clf = build_layered(&classifier_spec(cfg, n, d, &data)?)?;
    let spec = EncodingSpec::new(d, n)?;
    let root = Seed(cfg.seed).child(12);
    let sampler = |i: usize| -> qarb_core::Result<DensityMatrix> {
        let mut rng = root.stream(i as u64);
        let pure = sample_haar_pure(spec.checked_dim()?, &mut rng)?;
        pure.density().with_factor_dims(spec.factor_dims())
    };
    // Ground truth: the mean-pixel rule applied to the closest encoded product state.
    let truth = |rho: &DensityMatrix| -> qarb_core::Result<u32> {
        let r = if rho.factor_dims().is_some() { rho.clone() } else { rho.clone().with_factor_dims(spec.factor_dims())? };
        Ok(threshold_label(&fit_pixels(&project_marginals(&r)?)?))
    };
    let outcomes = (0..samples)
        .map(|i| {
            let ms = MixtureSearch { seed: Seed(cfg.seed).child(13).0.wrapping_add(i as u64), ..Default::default() };
            unconstrained_attack(&clf, &sampler(i)?, &[], &ms)
        })
        .collect::<qarb_core::Result<Vec<_>>>()?;
    let attack = |i: usize, _: &DensityMatrix| Ok(outcomes[i].clone());
    let mut t = Table::new(&["risk_kind", "epsilon", "estimate", "std_error", "sample_count", "is_lower_bound"]);
    let mut monotone = true;
    for kind in [RiskKind::PredictionChange, RiskKind::ErrorRegion] {
        let mut prev: f64 = 0.0;
        let mut sorted = grid.clone();
        sorted.sort_by(f64::total_cmp);
        for &eps in &sorted {
            let gt = (kind == RiskKind::ErrorRegion).then_some(&truth as &qarb_core::attacks::Labeling<'_>);
            let est = qarb_core::attacks::estimate_risk(kind, &clf, &sampler, gt, eps, samples, &attack)?;
            monotone &= est.estimate >= prev;
            prev = est.estimate;
            let name = match kind {
                RiskKind::PredictionChange => "prediction_change",
                RiskKind::ErrorRegion => "error_region",
            };
            t.push(vec![
                name.into(),
                fmt_f64(eps),
                fmt_f64(est.estimate),
                fmt_f64(est.std_error),
                est.sample_count.to_string(),
                est.is_lower_bound.to_string(),
            ]);
        }
    }
    rep.write_table(dir, "risk.csv", &t)?;
    rep.check("risk_nondecreasing_in_eps", monotone, "estimates are lower bounds on the true risk");
    Ok(())
}

fn concentration_row(eps: f64, value: f64, se: f64, bound: f64, holds: bool) -> Vec<String> {
    vec![fmt_f64(eps), fmt_f64(value), fmt_f64(se), fmt_f64(bound), holds.to_string()]
}

pub fn concentration_cmd(cfg: &ExperimentConfig, dir: &Path, rep: &mut RunReport) -> Res {
    let samples = cfg.samples_or(2000);
    let grid = cfg.eps_grid.clone().unwrap_or_else(|| (1..=10).map(|i| 0.2 * i as f64).collect());
    let dims = cfg.n_values.clone().unwrap_or_else(|| vec![2, 4, 8]);

    let mut levy_ok = true;
    for &dim in &dims {
        let us = sample_haar_unitaries(dim, samples, Seed(cfg.seed).child(20 + dim as u64))?;
        let fam = UnitaryTraceFamily { w: ComplexMatrix::identity(dim), a: 0.0 };
        let table = empirical_alpha(&us, &fam, &grid)?;
        let mut t = Table::new(&CONCENTRATION_HEADER);
        for r in &table.rows {
            let bound = levy_alpha_bound(&LevyParams::SPECIAL_UNITARY, dim as f64, r.epsilon)?;
            let holds = r.alpha <= bound + 3.0 * r.std_error;
            levy_ok &= holds;
            t.push(concentration_row(r.epsilon, r.alpha, r.std_error, bound, holds));
        }
        rep.write_table(dir, &format!("levy_n{dim}.csv"), &t)?;
    }
    rep.check("levy_bound", levy_ok, "alpha_hat <= k1 exp(-k2^2 eps^2 N) + 3 sigma; alpha_hat overestimates alpha");

    let mut iso_ok = true;
    for m in [1usize, cfg.m.unwrap_or(10)] {
        let pts = sample_gaussian(m, samples, &mut Seed(cfg.seed).child(30 + m as u64).stream(0));
        let audit = isoperimetry_audit(&pts, 0.0, &grid, &[0.1, 0.5, 1.0])?;
        let mut t = Table::new(&CONCENTRATION_HEADER);
        for r in &audit.rows {
            t.push(concentration_row(r.epsilon, r.measure, r.std_error, r.exact, r.within_3sigma));
        }
        iso_ok &= audit.all_pass();
        rep.write_table(dir, &format!("isoperimetry_m{m}.csv"), &t)?;
    }
    rep.check("gaussian_isoperimetry", iso_ok, format!("half-space expansion within 3 sigma of Phi(eps); Phi(1) = {}", fmt_f64(gaussian_cdf(1.0))));

    let n = cfg.n_or(4);
    let m = cfg.m.unwrap_or(n);
    let g = make_generator(m, n, Seed(cfg.seed).child(4).0, cfg.generator.scale)?;
    let rows = estimate_modulus(&g, &grid, 200, Seed(cfg.seed).child(40).0)?;
    let mut t = Table::new(&CONCENTRATION_HEADER);
    let mut mod_ok = true;
    for r in &rows {
        let holds = r.omega_hat <= r.certified + 1e-9;
        mod_ok &= holds;
        t.push(concentration_row(r.tau, r.omega_hat, f64::NAN, r.certified, holds));
    }
    rep.write_table(dir, "modulus.csv", &t)?;
    rep.check("modulus_certificate", mod_ok, "empirical lower envelope below the certified modulus");
    Ok(())
}

/// Reduced-size versions of the main audits.
pub fn audit_all_cmd(cfg: &ExperimentConfig, _dir: &Path, rep: &mut RunReport) -> Res {
    let seed = Seed(cfg.seed);

    let mut rng = seed.child(50).stream(0);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let (d, n) = (rng.random_range(2..=4), rng.random_range(1..=4));
        let spec = EncodingSpec::new(d, n)?;
        let (s, t) = (random_pixels(n, &mut rng), random_pixels(n, &mut rng));
        let brute = inner(encode(&s, &spec)?.amplitudes(), encode(&t, &spec)?.amplitudes()).norm_sqr();
        let closed = closed_fidelity(&s, &t, &spec)?;
        worst = worst.max((brute - closed).abs() / closed.max(f64::MIN_POSITIVE));
    }
    rep.check("closed_fidelity", worst <= 1e-10, format!("max relative error {worst:.3e}"));

    let mut violations = 0;
    for i in 0..100u64 {
        let mut r = seed.child(51).stream(i);
        let dim = [2, 4, 8][(i % 3) as usize];
        let ch = KrausChannel::random(dim, 2, &mut r)?;
        let povm = POVMSet::random(dim, 3, &mut r)?;
        let (x, y) = (sample_mixed_state(dim, &mut r)?, sample_mixed_state(dim, &mut r)?);
        violations += !confidence_change_audit(&ch, &povm, &x, &y)?.all_hold() as usize;
    }
    rep.check("confidence_chain", violations == 0, format!("{violations} violations in 100 tuples"));

    let p: Vec<f64> = (0..50).map(|i| 0.5 + 0.01 * i as f64).collect();
    let eta: Vec<f64> = (1..=50).map(|i| 0.1 * i as f64).collect();
    let audit = lemma1_audit(&p, &eta, &(5..=50).collect::<Vec<_>>())?;
    rep.check("gaussian_tail_lemma", audit.violations.is_empty(), format!("{} checks", audit.checked));

    let tc = Table1Config {
        n_values: (8..=32).collect(),
        d_values: vec![2],
        eta: 0.5,
        gamma: 0.5,
        omega1_value: 1.0,
        variant: cfg.prop1_variant,
    };
    let dev = table1(&tc)?
        .iter()
        .filter(|e| e.row == Table1Row::HaarTrace)
        .filter_map(|e| e.log_slope)
        .map(|s| (s + 1.0).abs())
        .fold(0.0, f64::max);
    rep.check("haar_trace_slope", dev <= 1e-9, format!("max deviation {dev:.2e}"));

    let spec = ModulusSpec::linear(1.0, f64::INFINITY)?;
    let mut exceptions = 0;
    for i in 1..=100 {
        let g = i as f64 / 100.0;
        let a = indist_bound_alternate(&spec, g, 0.5, 16, 2, cfg.prop1_variant)?;
        let b = indist_bound_thm2(&spec, g, 16, 2, cfg.prop1_variant)?;
        exceptions += usize::from(a.partial_cmp(&b) != Some(std::cmp::Ordering::Greater));
    }
    rep.check("alternate_looser", exceptions == 0, format!("{exceptions} exceptions"));

    let pts = sample_gaussian(1, 4000, &mut seed.child(52).stream(0));
    let iso = isoperimetry_audit(&pts, 0.0, &[0.5, 1.0, 1.5], &[0.5])?;
    rep.check("gaussian_isoperimetry", iso.all_pass(), "m = 1, 4000 samples");

    let lam = lambda1(0.5, 0.5)?;
    rep.check("lambda1_reference", (lam - 2.0 * (2.5 * std::f64::consts::LN_2).sqrt()).abs() < 1e-14, fmt_f64(lam));
    Ok(())
}
