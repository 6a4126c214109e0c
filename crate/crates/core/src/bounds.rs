//! Closed-form robustness bounds and the Gaussian helpers they use.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::encoding::l1_bound_translation;
use crate::error::{domain, invalid, Result};

/// Standard normal CDF via `erfc`, exact at zero.
pub fn gaussian_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / SQRT_2)
}

/// Upper tail `1 - Phi(x)`, accurate far in the tail.
pub fn gaussian_tail(x: f64) -> f64 {
    0.5 * libm::erfc(x / SQRT_2)
}

/// Inverse standard normal CDF for `p` in `(0, 1)`.
pub fn gaussian_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(domain(format!("quantile argument {p} outside (0, 1)")));
    }
    Ok(Normal::standard().inverse_cdf(p))
}

/// Parameters of the Haar-measure bounds. `big_n` is the Hilbert dimension
/// `N = d^n`, kept as a float so large tables do not overflow.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HaarBoundParams {
    pub big_n: f64,
    pub eta: f64,
    pub gamma: f64,
    pub mu_m: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevyParams {
    pub k1: f64,
    pub k2: f64,
}

impl LevyParams {
    /// Constants of the special unitary groups.
    pub const SPECIAL_UNITARY: LevyParams = LevyParams { k1: SQRT_2, k2: 0.25 };
}

/// `sqrt(ln(c / x))` with explicit domain checks.
fn sqrt_ln_ratio(c: f64, x: f64, name: &str) -> Result<f64> {
    if x <= 0.0 || !x.is_finite() {
        return Err(domain(format!("{name} = {x} makes the logarithm diverge")));
    }
    let l = (c / x).ln();
    if l < -1e-15 {
        return Err(domain(format!("{name} = {x} gives a negative logarithm")));
    }
    Ok(l.max(0.0).sqrt())
}

fn check_big_n(big_n: f64) -> Result<()> {
    if !(big_n >= 1.0) || !big_n.is_finite() {
        return Err(invalid(format!("Hilbert dimension {big_n} must be a finite number >= 1")));
    }
    Ok(())
}

/// `sqrt(4/N) [sqrt(ln(sqrt2 / mu)) + sqrt(ln(sqrt2 / gamma))]`.
///
/// `mu` and `gamma` may range over `(0, sqrt 2]`; zero is a domain error.
pub fn error_region_bound(p: &HaarBoundParams) -> Result<f64> {
    check_big_n(p.big_n)?;
    for (name, v) in [("mu_m", p.mu_m), ("gamma", p.gamma)] {
        if v > SQRT_2 + 1e-15 {
            return Err(invalid(format!("{name} = {v} exceeds sqrt 2")));
        }
    }
    let a = sqrt_ln_ratio(SQRT_2, p.mu_m, "mu_m")?;
    let b = sqrt_ln_ratio(SQRT_2, p.gamma, "gamma")?;
    Ok((4.0 / p.big_n).sqrt() * (a + b))
}

/// `lambda1 = sqrt(ln(2 sqrt2 / eta)) + sqrt(ln(2 sqrt2 / gamma))`.
pub fn lambda1(eta: f64, gamma: f64) -> Result<f64> {
    if eta == 0.0 {
        return Err(domain("eta = 0 makes the bound diverge"));
    }
    if !(eta > 0.0 && eta <= 0.5) {
        return Err(invalid(format!("eta = {eta} outside (0, 1/2]")));
    }
    if gamma == 0.0 {
        return Err(domain("gamma = 0 makes the bound diverge"));
    }
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(invalid(format!("gamma = {gamma} outside (0, 1]")));
    }
    let c = 2.0 * SQRT_2;
    Ok(sqrt_ln_ratio(c, eta, "eta")? + sqrt_ln_ratio(c, gamma, "gamma")?)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PcBound {
    pub epsilon_unitary: f64,
    pub lambda1: f64,
    /// `4 lambda1 / N`, the trace-norm bound.
    pub trace_bound: f64,
}

pub fn pc_bound_haar(p: &HaarBoundParams) -> Result<PcBound> {
    check_big_n(p.big_n)?;
    let l = lambda1(p.eta, p.gamma)?;
    Ok(PcBound { epsilon_unitary: (4.0 / p.big_n).sqrt() * l, lambda1: l, trace_bound: 4.0 * l / p.big_n })
}

/// Modulus of continuity of a generator in the pixel `l1` norm.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModulusKind {
    CertifiedLinear { lipschitz: f64 },
    /// Points `(tau, omega1(tau))`, interpolated linearly and held constant past the last point.
    Tabulated { points: Vec<(f64, f64)> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModulusSpec {
    #[serde(flatten)]
    pub kind: ModulusKind,
    /// Upper clamp, the `l1` diameter `n` of the pixel cube.
    pub clamp: f64,
}

impl ModulusSpec {
    pub fn linear(lipschitz: f64, clamp: f64) -> Result<Self> {
        let s = Self { kind: ModulusKind::CertifiedLinear { lipschitz }, clamp };
        s.validate()?;
        Ok(s)
    }

    /// Table must be nondecreasing in both coordinates; `(0, 0)` is prepended if missing.
    pub fn tabulated(mut points: Vec<(f64, f64)>, clamp: f64) -> Result<Self> {
        if points.first().is_none_or(|p| p.0 > 0.0) {
            points.insert(0, (0.0, 0.0));
        }
        let s = Self { kind: ModulusKind::Tabulated { points }, clamp };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.clamp >= 0.0) {
            return Err(invalid("modulus clamp must be nonnegative"));
        }
        match &self.kind {
            ModulusKind::CertifiedLinear { lipschitz } => {
                if !(*lipschitz >= 0.0) || !lipschitz.is_finite() {
                    return Err(invalid("Lipschitz constant must be finite and nonnegative"));
                }
            }
            ModulusKind::Tabulated { points } => {
                if points.is_empty() || points[0] != (0.0, 0.0) {
                    return Err(invalid("tabulated modulus must start at (0, 0)"));
                }
                if points.windows(2).any(|w| w[1].0 <= w[0].0 || w[1].1 < w[0].1) {
                    return Err(invalid("tabulated modulus must be increasing in tau and nondecreasing in value"));
                }
            }
        }
        Ok(())
    }

    /// `omega1(tau)`, clamped to `[0, clamp]`.
    pub fn omega1(&self, tau: f64) -> f64 {
        let tau = tau.max(0.0);
        let raw = match &self.kind {
            ModulusKind::CertifiedLinear { lipschitz } => lipschitz * tau,
            ModulusKind::Tabulated { points } => {
                let last = points[points.len() - 1];
                if tau >= last.0 {
                    last.1
                } else {
                    let i = points.partition_point(|p| p.0 <= tau);
                    let (a, b) = (points[i - 1], points[i]);
                    a.1 + (b.1 - a.1) * (tau - a.0) / (b.0 - a.0)
                }
            }
        };
        raw.min(self.clamp)
    }

    /// Smallest `tau` with `omega1(tau) >= value`, by bisection to 1e-10.
    /// Returns `None` when `value` is never reached.
    pub fn omega1_inverse(&self, value: f64) -> Option<f64> {
        if value <= 0.0 {
            return Some(0.0);
        }
        let mut hi = 1.0;
        while self.omega1(hi) < value {
            hi *= 2.0;
            if hi > 1e12 {
                return None;
            }
        }
        let mut lo = 0.0;
        while hi - lo > 1e-10 {
            let mid = 0.5 * (lo + hi);
            if self.omega1(mid) >= value {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Some(hi)
    }
}

/// Which form of the trace-norm modulus propagation to use.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Prop1Variant {
    /// `sqrt(1 - cos^(2n(d-1))(pi omega1 / (2n)))`.
    #[default]
    Statement,
    /// The same expression with a leading factor 2, tight for the full trace norm.
    FactorTwo,
}

impl Prop1Variant {
    pub fn flag(self) -> &'static str {
        match self {
            Prop1Variant::Statement => "prop1_statement",
            Prop1Variant::FactorTwo => "prop1_factor_two",
        }
    }
}

/// `1 - cos^k(x)` computed without cancellation for small `x`.
fn one_minus_cos_pow(x: f64, k: f64) -> f64 {
    let s = (0.5 * x).sin();
    let ln_cos = (-2.0 * s * s).ln_1p();
    -(k * ln_cos).exp_m1()
}

/// Trace-norm modulus at latent distance `tau` from an `l1` pixel modulus.
pub fn omega_lower(spec: &ModulusSpec, tau: f64, n: usize, d: usize, variant: Prop1Variant) -> Result<f64> {
    if n == 0 || d < 2 {
        return Err(invalid("need n >= 1 and d >= 2"));
    }
    let x = (PI * spec.omega1(tau) / (2.0 * n as f64)).clamp(0.0, FRAC_PI_2);
    let k = 2.0 * n as f64 * (d - 1) as f64;
    let v = one_minus_cos_pow(x, k).clamp(0.0, 1.0).sqrt();
    Ok(match variant {
        Prop1Variant::Statement => v,
        Prop1Variant::FactorTwo => 2.0 * v,
    })
}

/// The stated form of the trace-norm modulus propagation.
pub fn omega_lower_prop1(spec: &ModulusSpec, tau: f64, n: usize, d: usize) -> Result<f64> {
    omega_lower(spec, tau, n, d, Prop1Variant::Statement)
}

/// The factor-2 form of the trace-norm modulus propagation.
pub fn omega_lower_prop1_factor_two(spec: &ModulusSpec, tau: f64, n: usize, d: usize) -> Result<f64> {
    omega_lower(spec, tau, n, d, Prop1Variant::FactorTwo)
}

/// `lambda2 = sqrt(ln(pi / (2 gamma^2)))` for `gamma` in `(0, sqrt(pi/2)]`.
pub fn lambda2(gamma: f64) -> Result<f64> {
    if !(gamma > 0.0) {
        return Err(domain(format!("gamma = {gamma} makes the logarithm diverge")));
    }
    if gamma > (PI / 2.0).sqrt() + 1e-15 {
        return Err(domain(format!("gamma = {gamma} exceeds sqrt(pi/2); the logarithm is negative")));
    }
    let l = (PI / (2.0 * gamma * gamma)).ln();
    // At gamma = sqrt(pi/2) the logarithm is rounding noise; the square root would amplify it.
    Ok(if l < 4.0 * f64::EPSILON { 0.0 } else { l.sqrt() })
}

/// In-distribution bound `omega(lambda2)`.
pub fn indist_bound_thm2(spec: &ModulusSpec, gamma: f64, n: usize, d: usize, variant: Prop1Variant) -> Result<f64> {
    omega_lower(spec, lambda2(gamma)?, n, d, variant)
}

/// Alternate bound `omega(sqrt(ln(4/gamma^2)) + sqrt(ln(4/eta^2)))`, with
/// `gamma, eta` in `(0, 2]`. `n` and `d` fix the modulus propagation.
pub fn indist_bound_alternate(
    spec: &ModulusSpec,
    gamma: f64,
    eta: f64,
    n: usize,
    d: usize,
    variant: Prop1Variant,
) -> Result<f64> {
    for (name, v) in [("gamma", gamma), ("eta", eta)] {
        if !(v > 0.0 && v <= 2.0) {
            return Err(invalid(format!("{name} = {v} outside (0, 2]")));
        }
    }
    let arg = (4.0 / (gamma * gamma)).ln().max(0.0).sqrt() + (4.0 / (eta * eta)).ln().max(0.0).sqrt();
    omega_lower(spec, arg, n, d, variant)
}

/// Which quantity multiplies the square-root term in the second exponent.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MulticlassVariant {
    /// `eps_in` itself.
    #[default]
    AsPrinted,
    /// `omega^-1(eps_in)`.
    OmegaInverse,
}

impl MulticlassVariant {
    pub fn flag(self) -> &'static str {
        match self {
            MulticlassVariant::AsPrinted => "multiclass_as_printed",
            MulticlassVariant::OmegaInverse => "multiclass_omega_inverse",
        }
    }
}

/// `1 - sqrt(pi/2) exp(-w^2/2) exp(-x sqrt(ln(K^2 / (4 pi ln K))))` with
/// `w = omega^-1(eps)` and `x` chosen by `variant`. May be negative.
pub fn multiclass_risk_lower(eps_in: f64, omega_inv_eps: f64, k: usize, variant: MulticlassVariant) -> Result<f64> {
    if k < 5 {
        return Err(invalid(format!("the multiclass bound needs K >= 5, got {k}")));
    }
    let kf = k as f64;
    let root = (kf * kf / (4.0 * PI * kf.ln())).ln().sqrt();
    let x = match variant {
        MulticlassVariant::AsPrinted => eps_in,
        MulticlassVariant::OmegaInverse => omega_inv_eps,
    };
    Ok(1.0 - (PI / 2.0).sqrt() * (-omega_inv_eps * omega_inv_eps / 2.0).exp() * (-x * root).exp())
}

/// [`multiclass_risk_lower`] clamped at zero.
pub fn multiclass_risk_lower_clamped(eps_in: f64, omega_inv_eps: f64, k: usize, variant: MulticlassVariant) -> Result<f64> {
    Ok(multiclass_risk_lower(eps_in, omega_inv_eps, k, variant)?.max(0.0))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lemma1Violation {
    pub form: String,
    pub p: f64,
    pub eta: f64,
    pub k: Option<usize>,
    /// `1 - lhs` and `1 - rhs`, compared as upper tails.
    pub lhs_tail: f64,
    pub rhs_tail: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lemma1Audit {
    pub checked: usize,
    pub violations: Vec<Lemma1Violation>,
}

/// Checks both Gaussian-tail inequalities pointwise.
///
/// First form over `p_grid x eta_grid` (`p` in `[1/2, 1)`, `eta > 0`):
/// `Phi(Phi^-1(p) + eta) >= 1 - (1-p) sqrt(pi/2) exp(-eta^2/2)`.
/// Second form over `k_grid x {eta in eta_grid : eta >= 1}` with `p = 1 - 1/K`:
/// `... >= 1 - (1/K) sqrt(pi/2) exp(-eta^2/2) exp(-eta sqrt(ln(K^2/(4 pi ln K))))`.
///
/// Both sides are compared through their upper tails to avoid cancellation
/// near 1; the slack is 1e-12.
pub fn lemma1_audit(p_grid: &[f64], eta_grid: &[f64], k_grid: &[usize]) -> Result<Lemma1Audit> {
    if let Some(p) = p_grid.iter().find(|p| !(**p >= 0.5 && **p < 1.0)) {
        return Err(invalid(format!("p = {p} outside [1/2, 1)")));
    }
    if let Some(e) = eta_grid.iter().find(|e| !(**e > 0.0) || !e.is_finite()) {
        return Err(invalid(format!("eta = {e} must be positive")));
    }
    if let Some(k) = k_grid.iter().find(|k| **k < 5) {
        return Err(invalid(format!("K = {k} must be at least 5")));
    }
    let c = (PI / 2.0).sqrt();
    let mut audit = Lemma1Audit { checked: 0, violations: Vec::new() };
    for &p in p_grid {
        let q = gaussian_quantile(p)?;
        for &eta in eta_grid {
            let lhs_tail = gaussian_tail(q + eta);
            let rhs_tail = (1.0 - p) * c * (-eta * eta / 2.0).exp();
            audit.checked += 1;
            if lhs_tail > rhs_tail + 1e-12 {
                audit.violations.push(Lemma1Violation { form: "p".into(), p, eta, k: None, lhs_tail, rhs_tail });
            }
        }
    }
    for &k in k_grid {
        let kf = k as f64;
        let p = 1.0 - 1.0 / kf;
        let q = gaussian_quantile(p)?;
        let root = (kf * kf / (4.0 * PI * kf.ln())).ln().sqrt();
        for &eta in eta_grid.iter().filter(|e| **e >= 1.0) {
            let lhs_tail = gaussian_tail(q + eta);
            let rhs_tail = c / kf * (-eta * eta / 2.0).exp() * (-eta * root).exp();
            audit.checked += 1;
            if lhs_tail > rhs_tail + 1e-12 {
                audit.violations.push(Lemma1Violation { form: "k".into(), p, eta, k: Some(k), lhs_tail, rhs_tail });
            }
        }
    }
    Ok(audit)
}

/// `k1 exp(-k2^2 eps^2 N)`.
pub fn levy_alpha_bound(p: &LevyParams, big_n: f64, eps: f64) -> Result<f64> {
    if !(p.k1 > 0.0 && p.k2 > 0.0 && big_n > 0.0 && eps >= 0.0) {
        return Err(invalid("Levy bound arguments must be positive"));
    }
    Ok(p.k1 * (-p.k2 * p.k2 * eps * eps * big_n).exp())
}

/// A named bound evaluation, as written to JSON reports.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub bound_name: String,
    pub params: BTreeMap<String, f64>,
    pub value: f64,
    pub variant_flags: Vec<String>,
}

impl BoundReport {
    pub fn new(name: &str, params: &[(&str, f64)], value: f64, flags: &[&str]) -> Self {
        Self {
            bound_name: name.to_string(),
            params: params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            value,
            variant_flags: flags.iter().map(|s| s.to_string()).collect(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Table1Row {
    /// `4 lambda1 d^-n`.
    HaarTrace,
    /// Its translation to the pixel `l1` norm.
    HaarL1,
    /// The trace-norm modulus at a constant pixel modulus.
    GeneratedTrace,
}

impl Table1Row {
    pub fn as_str(self) -> &'static str {
        match self {
            Table1Row::HaarTrace => "haar_trace",
            Table1Row::HaarL1 => "haar_l1",
            Table1Row::GeneratedTrace => "generated_trace",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Table1Entry {
    pub row: Table1Row,
    pub n: usize,
    pub d: usize,
    /// `None` when the formula is undefined at this point.
    pub bound_value: Option<f64>,
    /// Slope against the previous `n` of the same series: `log2` differences
    /// for the Haar rows, `d ln(value) / d ln(n)` for the generated row.
    pub log_slope: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Table1Config {
    pub n_values: Vec<usize>,
    pub d_values: Vec<usize>,
    pub eta: f64,
    pub gamma: f64,
    /// Constant pixel modulus `omega1(lambda2)` for the generated row.
    pub omega1_value: f64,
    pub variant: Prop1Variant,
}

/// Evaluates both rows of the scaling table over the `(n, d)` grid.
pub fn table1(cfg: &Table1Config) -> Result<Vec<Table1Entry>> {
    let l1 = lambda1(cfg.eta, cfg.gamma)?;
    let mut out = Vec::new();
    for &d in &cfg.d_values {
        if d < 2 {
            return Err(invalid("d must be at least 2"));
        }
        for row in [Table1Row::HaarTrace, Table1Row::HaarL1, Table1Row::GeneratedTrace] {
            let mut prev: Option<(usize, f64)> = None;
            for &n in &cfg.n_values {
                if n == 0 {
                    return Err(invalid("n must be at least 1"));
                }
                let big_n = (d as f64).powi(n as i32);
                let value = match row {
                    Table1Row::HaarTrace => Some(4.0 * l1 / big_n),
                    Table1Row::HaarL1 => l1_bound_translation(n, d, l1).ok(),
                    Table1Row::GeneratedTrace => {
                        let spec = ModulusSpec::linear(cfg.omega1_value, f64::INFINITY)?;
                        Some(omega_lower(&spec, 1.0, n, d, cfg.variant)?)
                    }
                };
                let slope = match (prev, value) {
                    (Some((pn, pv)), Some(v)) if pv > 0.0 && v > 0.0 => Some(match row {
                        Table1Row::GeneratedTrace => (v.ln() - pv.ln()) / ((n as f64).ln() - (pn as f64).ln()),
                        _ => (v.log2() - pv.log2()) / (n as f64 - pn as f64),
                    }),
                    _ => None,
                };
                prev = value.map(|v| (n, v));
                out.push(Table1Entry { row, n, d, bound_value: value, log_slope: slope });
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cdf_basics() {
        assert_eq!(gaussian_cdf(0.0), 0.5);
        for x in [-3.0, -0.7, 0.2, 1.5, 6.0] {
            assert!((gaussian_cdf(x) + gaussian_cdf(-x) - 1.0).abs() < 1e-14);
        }
        assert!(gaussian_quantile(0.0).is_err());
        assert!(gaussian_quantile(0.5).unwrap().abs() < 1e-12);
    }

    #[test]
    fn error_region_edge_cases() {
        let p = HaarBoundParams { big_n: 16.0, eta: 0.5, gamma: SQRT_2, mu_m: SQRT_2 };
        assert_eq!(error_region_bound(&p).unwrap(), 0.0);
        let z = HaarBoundParams { mu_m: 0.0, ..p };
        assert!(matches!(error_region_bound(&z), Err(crate::Error::Domain(_))));
        let big = HaarBoundParams { gamma: 1.5, ..p };
        assert!(error_region_bound(&big).is_err());
    }

    #[test]
    fn lambda1_ranges() {
        assert!(matches!(lambda1(0.0, 0.5), Err(crate::Error::Domain(_))));
        assert!(matches!(lambda1(2.0 * SQRT_2, 2.0 * SQRT_2), Err(crate::Error::InvalidArgument(_))));
        assert!(lambda1(0.5, 0.0).is_err());
    }

    #[test]
    fn modulus_specs() {
        let lin = ModulusSpec::linear(2.0, 3.0).unwrap();
        assert_eq!(lin.omega1(1.0), 2.0);
        assert_eq!(lin.omega1(5.0), 3.0);
        assert!((lin.omega1_inverse(1.0).unwrap() - 0.5).abs() < 1e-9);
        assert_eq!(lin.omega1_inverse(4.0), None);
        let tab = ModulusSpec::tabulated(vec![(1.0, 1.0), (2.0, 1.5)], 10.0).unwrap();
        assert_eq!(tab.omega1(0.5), 0.5);
        assert_eq!(tab.omega1(1.5), 1.25);
        assert_eq!(tab.omega1(9.0), 1.5);
        assert!(ModulusSpec::tabulated(vec![(1.0, 1.0), (0.5, 2.0)], 1.0).is_err());
        assert!(ModulusSpec::tabulated(vec![(0.0, 0.3)], 1.0).is_err());
    }

    #[test]
    fn prop1_simple_values() {
        let zero = ModulusSpec::linear(0.0, 1.0).unwrap();
        assert_eq!(omega_lower_prop1(&zero, 1.0, 4, 2).unwrap(), 0.0);
        let one = ModulusSpec::linear(1.0, 1.0).unwrap();
        assert!((omega_lower_prop1(&one, 1.0, 1, 2).unwrap() - 1.0).abs() < 1e-15);
        assert!((omega_lower_prop1_factor_two(&one, 1.0, 1, 2).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn thm2_zero_at_the_edge() {
        let spec = ModulusSpec::linear(1.0, 16.0).unwrap();
        let g = (PI / 2.0).sqrt();
        assert_eq!(indist_bound_thm2(&spec, g, 16, 2, Prop1Variant::Statement).unwrap(), 0.0);
        assert!(matches!(indist_bound_thm2(&spec, 1.3, 16, 2, Prop1Variant::Statement), Err(crate::Error::Domain(_))));
    }

    #[test]
    fn alternate_edge_and_domain() {
        let spec = ModulusSpec::linear(1.0, 16.0).unwrap();
        assert_eq!(indist_bound_alternate(&spec, 2.0, 2.0, 16, 2, Prop1Variant::Statement).unwrap(), 0.0);
        assert!(indist_bound_alternate(&spec, 0.0, 0.5, 16, 2, Prop1Variant::Statement).is_err());
        assert!(indist_bound_alternate(&spec, 0.5, 2.5, 16, 2, Prop1Variant::Statement).is_err());
    }

    #[test]
    fn multiclass_basics() {
        let v = multiclass_risk_lower(0.0, 0.0, 5, MulticlassVariant::AsPrinted).unwrap();
        assert!((v - (1.0 - (PI / 2.0).sqrt())).abs() < 1e-15);
        assert_eq!(multiclass_risk_lower_clamped(0.0, 0.0, 5, MulticlassVariant::AsPrinted).unwrap(), 0.0);
        assert!(multiclass_risk_lower(0.1, 0.1, 4, MulticlassVariant::AsPrinted).is_err());
    }

    #[test]
    fn lemma1_endpoint() {
        let a = lemma1_audit(&[0.5], &[1e-6], &[5]).unwrap();
        assert!(a.violations.is_empty());
        assert_eq!(a.checked, 1);
        let k = lemma1_audit(&[0.5], &[1.0], &[5]).unwrap();
        assert_eq!(k.checked, 2);
        assert!(k.violations.is_empty());
        assert!(lemma1_audit(&[1.0], &[1.0], &[]).is_err());
        assert!(lemma1_audit(&[0.6], &[0.0], &[]).is_err());
        assert!(lemma1_audit(&[0.6], &[1.0], &[4]).is_err());
    }

    #[test]
    fn levy_constants() {
        let v = levy_alpha_bound(&LevyParams::SPECIAL_UNITARY, 8.0, 0.0).unwrap();
        assert_eq!(v, SQRT_2);
    }

    #[test]
    fn bound_report_json() {
        let r = BoundReport::new("lambda1", &[("eta", 0.5)], 2.6, &["prop1_statement"]);
        let v: serde_json::Value = serde_json::to_value(&r).unwrap();
        for k in ["bound_name", "params", "value", "variant_flags"] {
            assert!(v.get(k).is_some());
        }
    }
}
