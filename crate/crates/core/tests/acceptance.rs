//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each,
//! and exits non-zero if any fails.

use std::time::{Duration, Instant};

use rand::Rng;

use qarb_core::attacks::{
    oracle_min_perturbation_refined, substitution_attack, substitution_threshold, unconstrained_attack, MixtureSearch,
    LatentSearch,
};
use qarb_core::bounds::{
    gaussian_cdf, indist_bound_alternate, indist_bound_thm2, lemma1_audit, levy_alpha_bound, table1, LevyParams,
    ModulusSpec, Prop1Variant, Table1Config, Table1Row,
};
use qarb_core::classifier::{build_layered, train_toy, LabeledPixels};
use qarb_core::concentration::{
    empirical_alpha, isoperimetry_audit, make_generator, sample_gaussian, sample_haar_pure, sample_haar_unitaries,
    sample_haar_unitary, sample_mixed_state, sample_mixed_state_rank, EncodedGenerator, GaussianHalfSpace,
    UnitaryTraceFamily,
};
use qarb_core::defense::{sandwich_audit_batch, DefendedClassifier};
use qarb_core::encoding::{closed_fidelity, encode};
use qarb_core::linalg::inner;
use qarb_core::metrics::{confidence_change_audit, fidelity, trace_norm_distance};
use qarb_core::{
    ComplexMatrix, EncodingSpec, KrausChannel, LayeredCircuitSpec, POVMSet, PixelVector, Predictor,
    QuantumClassifier, Seed,
};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn random_pixels<R: Rng>(n: usize, rng: &mut R) -> PixelVector {
    PixelVector::new((0..n).map(|_| rng.random::<f64>()).collect()).unwrap()
}

fn c1_closed_fidelity() -> Outcome {
    let mut rng = Seed(101).stream(0);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let d = [2, 3, 4][rng.random_range(0..3)];
        let n = rng.random_range(1..=6);
        let spec = EncodingSpec::new(d, n).unwrap();
        let (s, t) = (random_pixels(n, &mut rng), random_pixels(n, &mut rng));
        let a = encode(&s, &spec).unwrap();
        let b = encode(&t, &spec).unwrap();
        let brute = inner(a.amplitudes(), b.amplitudes()).norm_sqr();
        let closed = closed_fidelity(&s, &t, &spec).unwrap();
        worst = worst.max((brute - closed).abs() / closed.max(f64::MIN_POSITIVE));
    }
    outcome(worst <= 1e-10, format!("max relative error {worst:.2e}"))
}

fn c2_pure_trace_identity() -> Outcome {
    let mut rng = Seed(102).stream(0);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let d = [2, 3][rng.random_range(0..2)];
        let n = rng.random_range(1..=4);
        let spec = EncodingSpec::new(d, n).unwrap();
        let rho = encode(&random_pixels(n, &mut rng), &spec).unwrap().density();
        let sigma = encode(&random_pixels(n, &mut rng), &spec).unwrap().density();
        let tn = trace_norm_distance(&rho, &sigma).unwrap();
        let f = fidelity(&rho, &sigma).unwrap();
        worst = worst.max((tn - 2.0 * (1.0 - f).max(0.0).sqrt()).abs());
    }
    outcome(worst <= 1e-8, format!("max deviation {worst:.2e}"))
}

fn c3_confidence_audit() -> Outcome {
    let mut violations = 0;
    let mut runs = 0;
    for i in 0..500u64 {
        let mut rng = Seed(103).stream(i);
        let dim = [2, 4, 8][(i % 3) as usize];
        let channel = KrausChannel::random(dim, rng.random_range(1..=3), &mut rng).unwrap();
        let povm = POVMSet::random(dim, rng.random_range(2..=4), &mut rng).unwrap();
        let rank_r = rng.random_range(1..=dim);
        let rank_s = rng.random_range(1..=dim);
        let rho = sample_mixed_state_rank(dim, rank_r, &mut rng).unwrap();
        let sigma = sample_mixed_state_rank(dim, rank_s, &mut rng).unwrap();
        let audit = confidence_change_audit(&channel, &povm, &rho, &sigma).unwrap();
        runs += 1;
        if !audit.all_hold() {
            violations += 1;
            eprintln!("  violation at tuple {i}: {:?}", audit.violations());
        }
    }
    outcome(violations == 0, format!("{violations} violations in {runs} tuples"))
}

fn c4_table1_row1() -> Outcome {
    let cfg = Table1Config {
        n_values: (8..=64).collect(),
        d_values: vec![2, 3],
        eta: 0.5,
        gamma: 0.5,
        omega1_value: 1.0,
        variant: Prop1Variant::Statement,
    };
    let rows = table1(&cfg).unwrap();
    let mut trace_dev: f64 = 0.0;
    let mut l1_rel: f64 = 0.0;
    for e in &rows {
        let Some(slope) = e.log_slope else { continue };
        match e.row {
            Table1Row::HaarTrace => {
                let expected = -(e.d as f64).log2();
                trace_dev = trace_dev.max((slope - expected).abs());
            }
            Table1Row::HaarL1 => {
                let n = e.n as f64;
                let expected = -0.5 * (e.d as f64).log2() + 0.5 * (n / (n - 1.0)).log2();
                l1_rel = l1_rel.max(((slope - expected) / expected).abs());
            }
            Table1Row::GeneratedTrace => {}
        }
    }
    outcome(
        trace_dev <= 1e-9 && l1_rel <= 0.02,
        format!("trace slope deviation {trace_dev:.1e}; l1 slope max relative error {l1_rel:.2e}"),
    )
}

fn c5_table1_row2() -> Outcome {
    let start = Instant::now();
    let spec = ModulusSpec::linear(1.0, f64::INFINITY).unwrap();
    let ns: Vec<usize> = (6..=12).map(|k| 1usize << k).collect();
    let pts: Vec<(f64, f64)> = ns
        .iter()
        .map(|&n| {
            let v = indist_bound_thm2(&spec, 0.5, n, 2, Prop1Variant::Statement).unwrap();
            ((n as f64).ln(), v.ln())
        })
        .collect();
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    let elapsed = start.elapsed();
    let rel = ((slope + 0.5) / 0.5).abs();
    outcome(
        rel <= 0.02 && elapsed < Duration::from_secs(1),
        format!("log-log slope {slope:.5} (relative error {rel:.2e}) in {elapsed:.1?}"),
    )
}

fn c6_levy() -> Outcome {
    let start = Instant::now();
    let eps: Vec<f64> = (1..=10).map(|i| 0.2 * i as f64).collect();
    let mut worst = f64::NEG_INFINITY;
    let mut detail = Vec::new();
    for &n in &[2usize, 4, 8] {
        let us = sample_haar_unitaries(n, 10_000, Seed(106).child(n as u64)).unwrap();
        let fam = UnitaryTraceFamily { w: ComplexMatrix::identity(n), a: 0.0 };
        let table = empirical_alpha(&us, &fam, &eps).unwrap();
        for r in &table.rows {
            let bound = levy_alpha_bound(&LevyParams::SPECIAL_UNITARY, n as f64, r.epsilon).unwrap();
            worst = worst.max(r.alpha - bound - 3.0 * r.std_error);
        }
        detail.push(format!("N={n} alpha(0.2)={:.3}", table.rows[0].alpha));
    }
    let elapsed = start.elapsed();
    outcome(
        worst <= 0.0 && elapsed < Duration::from_secs(120),
        format!("{}; max excess {worst:.3} in {elapsed:.1?}", detail.join(", ")),
    )
}

fn c7_isoperimetry() -> Outcome {
    let eps: Vec<f64> = (1..=10).map(|i| 0.2 * i as f64).collect();
    let mut ok = true;
    for &m in &[1usize, 10] {
        let pts = sample_gaussian(m, 10_000, &mut Seed(107).stream(m as u64));
        ok &= isoperimetry_audit(&pts, 0.0, &eps, &[0.1, 0.5, 1.0]).unwrap().all_pass();
    }
    let pts = sample_gaussian(1, 10_000, &mut Seed(107).stream(99));
    let table = empirical_alpha(&pts, &GaussianHalfSpace { a: 0.0 }, &[1.0]).unwrap();
    let exact = 1.0 - gaussian_cdf(1.0);
    let sigma = (exact * (1.0 - exact) / 10_000.0).sqrt();
    let alpha = table.rows[0].alpha;
    let within = (alpha - exact).abs() <= 3.0 * sigma;
    outcome(ok && within, format!("half-space rows within 3 sigma: {ok}; alpha(1) = {alpha:.4} vs {exact:.6}"))
}

fn c8_lemma1() -> Outcome {
    let p: Vec<f64> = (0..=49).map(|i| 0.5 + 0.01 * i as f64).collect();
    let eta: Vec<f64> = (1..=100).map(|i| 0.05 * i as f64).collect();
    let k: Vec<usize> = (5..=50).collect();
    let audit = lemma1_audit(&p, &eta, &k).unwrap();
    outcome(
        audit.violations.is_empty(),
        format!("{} violations in {} checks", audit.violations.len(), audit.checked),
    )
}

/// Two-class toy classifier on `n` qubits trained on `data`.
fn train(n: usize, data: &[LabeledPixels], seed: u64) -> LayeredCircuitSpec {
    let spec = LayeredCircuitSpec::brick_wall(n, 2, 2, 0, vec![0, 1]);
    train_toy(&spec, data, 600, seed).unwrap()
}

fn threshold_data(n: usize, count: usize, seed: u64) -> Vec<LabeledPixels> {
    let mut rng = Seed(seed).stream(0);
    (0..count)
        .map(|_| {
            let px = random_pixels(n, &mut rng);
            let label = (px.as_slice().iter().sum::<f64>() > 0.5 * n as f64) as u32;
            LabeledPixels { pixels: px, label }
        })
        .collect()
}

fn c9_substitution() -> Outcome {
    let data = threshold_data(2, 40, 109);
    let clf = build_layered(&train(2, &data, 9)).unwrap();
    let enc = EncodingSpec::new(2, 2).unwrap();
    let mut rng = Seed(109).stream(1);
    let mut runs = 0;
    let mut bad = Vec::new();
    while runs < 10 {
        let rho = encode(&random_pixels(2, &mut rng), &enc).unwrap().density();
        let d = clf.decide(&rho).unwrap();
        if d.on_boundary {
            continue;
        }
        let target = 1 - d.label;
        let margin = clf.confidence_of(&rho, d.label).unwrap() - 0.5;
        let threshold = substitution_threshold(margin.min(0.5)).unwrap();
        let mut first_flip = None;
        for i in 0..=100 {
            let eps = 0.01 * i as f64;
            let s = substitution_attack(&clf, &rho, target, eps).unwrap();
            if s.outcome.success && first_flip.is_none() {
                first_flip = Some(eps);
            }
            if s.size_bound_holds == Some(false) {
                bad.push(format!("size bound fails at eps={eps:.2}"));
            }
            if s.outcome.success && eps <= threshold {
                bad.push(format!("flip at {eps:.2} below threshold {threshold:.4}"));
            }
        }
        let expected = (0..=100).map(|i| 0.01 * i as f64).find(|&e| e > threshold);
        if first_flip != expected {
            bad.push(format!("first flip {first_flip:?}, expected {expected:?} (delta {margin:.4})"));
        }
        runs += 1;
    }
    outcome(bad.is_empty(), if bad.is_empty() { format!("{runs} states, flips exactly above threshold") } else { bad.join("; ") })
}

fn c10_sandwich() -> Outcome {
    let start = Instant::now();
    let mut conclusive = 0;
    let mut failures = Vec::new();
    for n in [2usize, 3, 4] {
        let generator = make_generator(n, n, 110 + n as u64, 2.0).unwrap();
        let egen = EncodedGenerator::new(generator, EncodingSpec::new(2, n).unwrap()).unwrap();
        let mut rng = Seed(110).stream(n as u64);
        let train_z = sample_gaussian(n, 60, &mut rng);
        let data: Vec<LabeledPixels> = train_z
            .iter()
            .map(|z| {
                let px = egen.pixels(z).unwrap();
                let label = (px.as_slice().iter().sum::<f64>() > 0.5 * n as f64) as u32;
                LabeledPixels { pixels: px, label }
            })
            .collect();
        let clf = build_layered(&train(n, &data, 10)).unwrap();
        let dclf = DefendedClassifier::new(clf, egen.spec).unwrap();
        let zs = sample_gaussian(n, 50, &mut rng);
        let records = sandwich_audit_batch(&dclf, &egen, &zs, &LatentSearch::default(), &MixtureSearch::default()).unwrap();
        for r in records.iter().filter(|r| r.conclusive) {
            conclusive += 1;
            if !(r.bool1 && r.bool2) {
                failures.push(format!("n={n} sample {}: {r:?}", r.sample_id));
            }
        }
    }
    let elapsed = start.elapsed();
    outcome(
        failures.is_empty() && conclusive > 0 && elapsed < Duration::from_secs(300),
        format!("{conclusive} conclusive of 150, {} failures in {elapsed:.1?}{}", failures.len(), if failures.is_empty() { String::new() } else { format!(": {}", failures.join("; ")) }),
    )
}

fn c11_oracle() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut compared = 0;
    for i in 0..20u64 {
        let mut rng = Seed(111).stream(i);
        let u = sample_haar_unitary(2, &mut rng).unwrap();
        let clf = QuantumClassifier::new(KrausChannel::unitary(u).unwrap(), POVMSet::computational(2).unwrap()).unwrap();
        let rho = if i % 2 == 0 {
            sample_haar_pure(2, &mut rng).unwrap().density()
        } else {
            sample_mixed_state(2, &mut rng).unwrap()
        };
        let attack = unconstrained_attack(&clf, &rho, &[], &MixtureSearch { seed: i, ..Default::default() }).unwrap();
        let oracle = oracle_min_perturbation_refined(&clf, &rho, 60, 3).unwrap();
        let rel = (attack.perturbation_size - oracle.min_distance).abs() / oracle.min_distance;
        compared += 1;
        worst = worst.max(rel);
    }
    outcome(worst <= 0.05, format!("{compared} instances, max relative gap {worst:.2e}"))
}

fn c12_alternate_looser() -> Outcome {
    let spec = ModulusSpec::linear(1.0, f64::INFINITY).unwrap();
    let mut exceptions = 0;
    for i in 1..=1000 {
        let g = i as f64 / 1000.0;
        let thm2 = indist_bound_thm2(&spec, g, 16, 2, Prop1Variant::Statement).unwrap();
        let alt = indist_bound_alternate(&spec, g, 0.5, 16, 2, Prop1Variant::Statement).unwrap();
        if alt.partial_cmp(&thm2) != Some(std::cmp::Ordering::Greater) {
            exceptions += 1;
        }
    }
    outcome(exceptions == 0, format!("{exceptions} exceptions over 1000 gamma values"))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 12] = [
        ("closed-form fidelity matches brute force", c1_closed_fidelity),
        ("pure-state trace norm equals 2 sqrt(1 - F)", c2_pure_trace_identity),
        ("confidence-change inequality chain", c3_confidence_audit),
        ("Haar trace and l1 scaling", c4_table1_row1),
        ("generated-model scaling slope", c5_table1_row2),
        ("unitary-group concentration", c6_levy),
        ("Gaussian isoperimetry", c7_isoperimetry),
        ("Gaussian tail lemma", c8_lemma1),
        ("substitution attack threshold", c9_substitution),
        ("defense sandwich", c10_sandwich),
        ("mixture attack vs Bloch oracle", c11_oracle),
        ("alternate bound is looser", c12_alternate_looser),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = check();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        if !o.pass {
            failed += 1;
        }
        println!("criterion {:>2} {tag}: {name}: {} [{:.1?}]", i + 1, o.detail, start.elapsed());
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
