//! Pixel vectors and their qudit product-state encoding.
//!
//! A pixel `u` in `[0, 1]` becomes the single-site state with components
//! `sqrt(C(d-1, k)) cos^(d-1-k)(pi u / 2) sin^k(pi u / 2)` for `k = 0..d`,
//! and a pixel vector becomes the tensor product of its sites.

use std::f64::consts::FRAC_PI_2;
use std::path::Path;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{domain, invalid, Result};
use crate::linalg::C64;
use crate::state::{checked_power_dim, PureState};

/// Pixels within this distance outside `[0, 1]` are clamped instead of rejected.
pub const PIXEL_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct PixelVector(Vec<f64>);

impl PixelVector {
    pub fn new(pixels: Vec<f64>) -> Result<Self> {
        if pixels.is_empty() {
            return Err(invalid("a pixel vector needs at least one pixel"));
        }
        let mut pixels = pixels;
        for (i, p) in pixels.iter_mut().enumerate() {
            if !p.is_finite() || *p < -PIXEL_TOL || *p > 1.0 + PIXEL_TOL {
                return Err(invalid(format!("pixel {i} = {p} is outside [0, 1]")));
            }
            *p = p.clamp(0.0, 1.0);
        }
        Ok(Self(pixels))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// `sum_i |s_i - t_i|`.
    pub fn l1_distance(&self, other: &Self) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| (a - b).abs()).sum()
    }
}

impl TryFrom<Vec<f64>> for PixelVector {
    type Error = crate::Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<PixelVector> for Vec<f64> {
    fn from(p: PixelVector) -> Self {
        p.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncodingSpec {
    pub d: usize,
    pub n: usize,
}

impl EncodingSpec {
    /// Checks `d >= 2` and `n >= 1`. Closed-form routines accept any size;
    /// building states additionally needs `d^n` within the capacity guard.
    pub fn new(d: usize, n: usize) -> Result<Self> {
        let spec = Self { d, n };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.d < 2 {
            return Err(invalid(format!("site dimension must be at least 2, got {}", self.d)));
        }
        if self.n == 0 {
            return Err(invalid("at least one site is required"));
        }
        Ok(())
    }

    /// `d^n`, or a capacity error when it exceeds the guard.
    pub fn checked_dim(&self) -> Result<usize> {
        self.validate()?;
        checked_power_dim(self.d, self.n)
    }

    /// Hilbert-space dimension `d^n`. Panics on overflow; see [`Self::checked_dim`].
    pub fn dim(&self) -> usize {
        self.d.pow(self.n as u32)
    }

    pub fn factor_dims(&self) -> Vec<usize> {
        vec![self.d; self.n]
    }
}

/// `C(n, k)` as a float: exact integer arithmetic while it fits, log-gamma beyond.
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        match acc.checked_mul((n - i) as u128) {
            Some(v) => acc = v / (i as u128 + 1),
            None => {
                let (n, k) = (n as f64, k as f64);
                return (ln_gamma(n + 1.0) - ln_gamma(k + 1.0) - ln_gamma(n - k + 1.0)).exp();
            }
        }
    }
    acc as f64
}

/// Single-site amplitudes for pixel `u`.
pub fn site_amplitudes(u: f64, d: usize) -> Vec<f64> {
    let (s, c) = (FRAC_PI_2 * u).sin_cos();
    (0..d)
        .map(|k| binomial(d - 1, k).sqrt() * c.powi((d - 1 - k) as i32) * s.powi(k as i32))
        .collect()
}

fn check_len(u: &PixelVector, spec: &EncodingSpec) -> Result<()> {
    if u.len() != spec.n {
        return Err(invalid(format!("pixel vector has {} entries, encoding expects {}", u.len(), spec.n)));
    }
    Ok(())
}

/// Product state over all sites, tagged with factor dimensions `[d; n]`.
pub fn encode(u: &PixelVector, spec: &EncodingSpec) -> Result<PureState> {
    spec.checked_dim()?;
    check_len(u, spec)?;
    let mut amps = vec![1.0f64];
    for &p in u.as_slice() {
        let site = site_amplitudes(p, spec.d);
        let mut next = Vec::with_capacity(amps.len() * spec.d);
        for a in &amps {
            for b in &site {
                next.push(a * b);
            }
        }
        amps = next;
    }
    let amps: Vec<C64> = amps.into_iter().map(|x| C64::new(x, 0.0)).collect();
    PureState::normalized(amps)?.with_factor_dims(spec.factor_dims())
}

/// `prod_i cos^(2(d-1))(pi |s_i - t_i| / 2)`.
pub fn closed_fidelity(s: &PixelVector, t: &PixelVector, spec: &EncodingSpec) -> Result<f64> {
    check_len(s, spec)?;
    check_len(t, spec)?;
    let e = 2 * (spec.d as i32 - 1);
    Ok(s.as_slice()
        .iter()
        .zip(t.as_slice())
        .map(|(a, b)| (FRAC_PI_2 * (a - b).abs()).cos().powi(e))
        .product())
}

/// `||rho - sigma||_1 = 2 sqrt(1 - F)` for the encoded pair.
pub fn closed_trace_distance(s: &PixelVector, t: &PixelVector, spec: &EncodingSpec) -> Result<f64> {
    let f = closed_fidelity(s, t, spec)?;
    Ok(2.0 * (1.0 - f).max(0.0).sqrt())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CosineProductAudit {
    /// `cos^n(sum x / n)`.
    pub lhs: f64,
    /// `prod cos x_i`.
    pub rhs: f64,
    pub holds: bool,
}

pub fn cosine_product_check(x: &[f64]) -> Result<CosineProductAudit> {
    if x.is_empty() {
        return Err(invalid("empty angle sequence"));
    }
    if let Some(bad) = x.iter().find(|v| !(0.0..=FRAC_PI_2).contains(*v)) {
        return Err(invalid(format!("angle {bad} outside [0, pi/2]")));
    }
    let n = x.len() as f64;
    let lhs = (x.iter().sum::<f64>() / n).cos().powi(x.len() as i32);
    let rhs = x.iter().map(|v| v.cos()).product();
    Ok(CosineProductAudit { lhs, rhs, holds: lhs >= rhs - 1e-12 })
}

/// `(2n / pi) acos[(1 - 2 lambda1 / N)^(1 / ((d-1) n))]` with `N = d^n`.
///
/// Returns a domain error when `1 - 2 lambda1 / N` is negative, where the
/// real root is undefined and the trace-norm bound is already vacuous.
pub fn l1_bound_translation(n: usize, d: usize, lambda1: f64) -> Result<f64> {
    if n == 0 || d < 2 {
        return Err(invalid("need n >= 1 and d >= 2"));
    }
    if !(lambda1 >= 0.0) || !lambda1.is_finite() {
        return Err(invalid(format!("lambda1 must be a finite nonnegative number, got {lambda1}")));
    }
    let big_n = (d as f64).powi(n as i32);
    let ratio = 2.0 * lambda1 / big_n;
    if ratio > 1.0 {
        return Err(domain(format!("2 lambda1 / N = {ratio} exceeds 1; the translated bound is undefined")));
    }
    // For large N the root is within rounding of 1, so work with 1 - c directly.
    let one_minus_c = -((-ratio).ln_1p() / ((d - 1) * n) as f64).exp_m1();
    let angle = 2.0 * (0.5 * one_minus_c).clamp(0.0, 1.0).sqrt().asin();
    Ok(2.0 * n as f64 / std::f64::consts::PI * angle)
}

/// Writes one CSV row per vector with no header.
pub fn write_pixel_csv(path: &Path, vectors: &[PixelVector]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).flexible(true).from_path(path)?;
    for v in vectors {
        w.write_record(v.as_slice().iter().map(|x| crate::report::fmt_f64(*x)))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_pixel_csv(path: &Path) -> Result<Vec<PixelVector>> {
    let mut r = csv::ReaderBuilder::new().has_headers(false).flexible(true).from_path(path)?;
    let mut out = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        let vals = rec
            .iter()
            .map(|f| f.trim().parse::<f64>().map_err(|e| invalid(format!("row {}: {e}", line + 1))))
            .collect::<Result<Vec<_>>>()?;
        out.push(PixelVector::new(vals)?);
    }
    Ok(out)
}
