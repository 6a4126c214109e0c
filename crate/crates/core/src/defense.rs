//! Tomographic projection defense: classify the encoded product state that
//! best matches the single-site marginals of the input.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::attacks::{in_distribution_attack, unconstrained_attack, LatentSearch, MixtureSearch};
use crate::classifier::{Decision, Label, Predictor, QuantumClassifier};
use crate::concentration::EncodedGenerator;
use crate::encoding::{encode, site_amplitudes, EncodingSpec, PixelVector};
use crate::error::{invalid, Error, Result};
use crate::state::{tensor_product, DensityMatrix};

#[derive(Clone, Debug)]
pub struct DefendedClassifier {
    pub inner: QuantumClassifier,
    pub spec: EncodingSpec,
}

impl DefendedClassifier {
    pub fn new(inner: QuantumClassifier, spec: EncodingSpec) -> Result<Self> {
        let dim = spec.checked_dim()?;
        if inner.channel().input_dim() != dim {
            return Err(invalid(format!(
                "classifier acts on dimension {}, encoding has dimension {}",
                inner.channel().input_dim(),
                dim
            )));
        }
        Ok(Self { inner, spec })
    }

    /// The encoded state the inner classifier actually sees.
    pub fn projected_input(&self, sigma: &DensityMatrix) -> Result<DensityMatrix> {
        let sigma = if sigma.factor_dims().is_none() && sigma.dim() == self.spec.dim() {
            sigma.clone().with_factor_dims(self.spec.factor_dims())?
        } else {
            sigma.clone()
        };
        if sigma.factor_dims() != Some(&self.spec.factor_dims()[..]) {
            return Err(Error::Structure("input factors do not match the encoding".into()));
        }
        let px = fit_pixels(&project_marginals(&sigma)?)?;
        Ok(encode(&px, &self.spec)?.density())
    }
}

/// Single-site marginals of `sigma`, in site order.
pub fn marginals(sigma: &DensityMatrix) -> Result<Vec<DensityMatrix>> {
    let dims = sigma
        .factor_dims()
        .ok_or_else(|| Error::Structure("marginals need factor dimensions".into()))?;
    (0..dims.len()).map(|i| sigma.partial_trace(&[i])).collect()
}

/// Tensor product of the single-site marginals of `sigma`.
pub fn project_marginals(sigma: &DensityMatrix) -> Result<DensityMatrix> {
    let dims = sigma
        .factor_dims()
        .ok_or_else(|| Error::Structure("projection needs factor dimensions".into()))?
        .to_vec();
    let mut it = marginals(sigma)?.into_iter().map(|m| m.without_factor_dims());
    let first = it.next().expect("factor dims are non-empty");
    let prod = it.try_fold(first, |acc, m| tensor_product(&acc, &m))?;
    prod.with_factor_dims(dims)
}

/// Per-qubit pixel maximizing the fidelity between the encoded site state and
/// the marginal. The encoded site has Bloch vector `(sin pi u, 0, cos pi u)`.
fn fit_qubit(m: &DensityMatrix) -> f64 {
    let a = m.matrix();
    let x = 2.0 * a[(0, 1)].re;
    let z = (a[(0, 0)] - a[(1, 1)]).re;
    if x.abs() <= 1e-15 && z.abs() <= 1e-15 {
        return 0.0;
    }
    let theta = x.atan2(z);
    if theta < 0.0 {
        // Outside the reachable half-circle: the better endpoint wins.
        return if z >= 0.0 { 0.0 } else { 1.0 };
    }
    (theta / PI).clamp(0.0, 1.0)
}

fn site_fidelity(m: &DensityMatrix, u: f64, d: usize) -> f64 {
    let a = site_amplitudes(u, d);
    let mm = m.matrix();
    let mut f = 0.0;
    for i in 0..d {
        for j in 0..d {
            f += a[i] * a[j] * mm[(i, j)].re;
        }
    }
    f
}

/// Grid scan then golden-section refinement of the single-site fidelity.
fn fit_qudit(m: &DensityMatrix, d: usize) -> f64 {
    const GRID: usize = 400;
    let mut best = (0.0, site_fidelity(m, 0.0, d));
    for k in 1..=GRID {
        let u = k as f64 / GRID as f64;
        let f = site_fidelity(m, u, d);
        if f > best.1 + 1e-14 {
            best = (u, f);
        }
    }
    let h = 1.0 / GRID as f64;
    let (mut lo, mut hi) = ((best.0 - h).max(0.0), (best.0 + h).min(1.0));
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..60 {
        let a = hi - g * (hi - lo);
        let b = lo + g * (hi - lo);
        if site_fidelity(m, a, d) >= site_fidelity(m, b, d) {
            hi = b;
        } else {
            lo = a;
        }
    }
    let u = 0.5 * (lo + hi);
    if site_fidelity(m, u, d) > best.1 { u } else { best.0 }
}

/// Pixel vector whose encoding is closest, site by site in fidelity, to the
/// marginals of `prod`. Qubits use the closed form; larger sites a 1-D search.
pub fn fit_pixels(prod: &DensityMatrix) -> Result<PixelVector> {
    let ms = marginals(prod)?;
    let px = ms
        .iter()
        .map(|m| match m.dim() {
            2 => Ok(fit_qubit(m)),
            d if d > 2 => Ok(fit_qudit(m, d)),
            d => Err(Error::Unsupported(format!("cannot fit a site of dimension {d}"))),
        })
        .collect::<Result<Vec<f64>>>()?;
    PixelVector::new(px)
}

/// Qubit-only variant of [`fit_pixels`].
pub fn fit_qubit_pixels(prod: &DensityMatrix) -> Result<PixelVector> {
    if prod.factor_dims().is_some_and(|d| d.iter().any(|&x| x != 2)) {
        return Err(Error::Unsupported("closed-form fit needs qubit factors".into()));
    }
    fit_pixels(prod)
}

pub fn defended_predict(dclf: &DefendedClassifier, sigma: &DensityMatrix) -> Result<Label> {
    dclf.predict(sigma)
}

impl Predictor for DefendedClassifier {
    /// Factor dimensions `[d; n]` are attached to inputs that carry none.
    fn decide(&self, rho: &DensityMatrix) -> Result<Decision> {
        self.inner.decide(&self.projected_input(rho)?)
    }

    fn labels(&self) -> &[Label] {
        self.inner.labels()
    }

    fn input_dim(&self) -> usize {
        self.spec.dim()
    }

    fn reverse_target(&self, label: Label) -> Option<DensityMatrix> {
        self.inner.reverse_target(label)
    }
}

/// `2 - 2 (1 - eps^2 / 16)^(1 / n_e)` with `n_e` the smallest even number `>= n`.
pub fn thm3_lower(eps_in: f64, n: usize) -> Result<f64> {
    if !(0.0..=2.0).contains(&eps_in) {
        return Err(invalid(format!("eps_in = {eps_in} outside [0, 2]")));
    }
    if n == 0 {
        return Err(invalid("need at least one qubit"));
    }
    let n_e = if n.is_multiple_of(2) { n } else { n + 1 };
    // 2 (1 - b^(1/n_e)) without cancellation for tiny eps.
    Ok(-2.0 * ((-eps_in * eps_in / 16.0).ln_1p() / n_e as f64).exp_m1())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SandwichRecord {
    pub sample_id: usize,
    pub eps_in_hat: f64,
    pub eps_unc_hat: f64,
    pub thm3_lower: f64,
    /// `thm3_lower(eps_in_hat) <= eps_unc_hat + 1e-9`. Both estimates are upper
    /// bounds, so this is a consistency check rather than a proof.
    pub bool1: bool,
    /// `eps_unc_hat <= eps_in_hat + 1e-9`.
    pub bool2: bool,
    /// False when the latent attack found no label change.
    pub conclusive: bool,
}

pub const SANDWICH_HEADER: [&str; 7] =
    ["sample_id", "eps_in_hat", "eps_unc_hat", "thm3_lower", "bool1", "bool2", "conclusive"];

/// Attacks the defended classifier at `gen(z)` both within the encoded
/// manifold and without restriction; the unconstrained search also receives
/// the in-distribution adversarial state as a candidate.
pub fn sandwich_audit(
    dclf: &DefendedClassifier,
    gen: &EncodedGenerator,
    z: &[f64],
    sample_id: usize,
    latent: &LatentSearch,
    mixture: &MixtureSearch,
) -> Result<SandwichRecord> {
    if dclf.spec.d != 2 {
        return Err(Error::Unsupported("the sandwich audit is only stated for qubits".into()));
    }
    if gen.spec != dclf.spec {
        return Err(invalid("generator and classifier use different encodings"));
    }
    let rho = gen.state(z)?;
    let inside = in_distribution_attack(dclf, gen, z, latent)?;
    if !inside.success {
        return Ok(SandwichRecord {
            sample_id,
            eps_in_hat: f64::INFINITY,
            eps_unc_hat: f64::INFINITY,
            thm3_lower: f64::NAN,
            bool1: false,
            bool2: false,
            conclusive: false,
        });
    }
    let candidates: Vec<DensityMatrix> = inside.adversarial_state.iter().cloned().collect();
    let outside = unconstrained_attack(dclf, &rho, &candidates, mixture)?;
    let eps_in = inside.perturbation_size.clamp(0.0, 2.0);
    let eps_unc = outside.perturbation_size;
    let lower = thm3_lower(eps_in, dclf.spec.n)?;
    Ok(SandwichRecord {
        sample_id,
        eps_in_hat: inside.perturbation_size,
        eps_unc_hat: eps_unc,
        thm3_lower: lower,
        bool1: lower <= eps_unc + 1e-9,
        bool2: eps_unc <= inside.perturbation_size + 1e-9,
        conclusive: true,
    })
}

/// [`sandwich_audit`] over many latent points in parallel; record `i` uses
/// latent point `i` and search seeds offset by `i`.
pub fn sandwich_audit_batch(
    dclf: &DefendedClassifier,
    gen: &EncodedGenerator,
    latents: &[Vec<f64>],
    latent: &LatentSearch,
    mixture: &MixtureSearch,
) -> Result<Vec<SandwichRecord>> {
    latents
        .par_iter()
        .enumerate()
        .map(|(i, z)| {
            let ls = LatentSearch { seed: latent.seed.wrapping_add(i as u64), ..latent.clone() };
            let ms = MixtureSearch { seed: mixture.seed.wrapping_add(i as u64), ..mixture.clone() };
            sandwich_audit(dclf, gen, z, i, &ls, &ms)
        })
        .collect()
}
