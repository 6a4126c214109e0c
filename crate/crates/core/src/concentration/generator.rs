use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::encoding::{encode, EncodingSpec, PixelVector};
use crate::error::{invalid, Result};
use crate::rng::Seed;
use crate::state::DensityMatrix;

/// Smooth map from a Gaussian latent space to pixel vectors:
/// `z -> logistic(A z + b)` elementwise.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Generator {
    pub m: usize,
    pub n: usize,
    /// Row-major `n x m`.
    pub matrix: Vec<f64>,
    pub offset: Vec<f64>,
    /// Certified Lipschitz constant from latent `l2` to pixel `l1`.
    pub certified_lipschitz: f64,
}

fn logistic(x: f64) -> f64 {
    let v = if x >= 0.0 { 1.0 / (1.0 + (-x).exp()) } else { let e = x.exp(); e / (1.0 + e) };
    v.clamp(f64::EPSILON, 1.0 - f64::EPSILON)
}

impl Generator {
    /// Builds a generator and certifies `L = (1/4) sum_i ||row_i||_2`.
    pub fn new(m: usize, n: usize, matrix: Vec<f64>, offset: Vec<f64>) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(invalid("generator dimensions must be positive"));
        }
        if matrix.len() != n * m || offset.len() != n {
            return Err(invalid("generator matrix or offset has the wrong size"));
        }
        if matrix.iter().chain(&offset).any(|x| !x.is_finite()) {
            return Err(invalid("generator coefficients must be finite"));
        }
        let lip = 0.25 * matrix.chunks(m).map(|r| r.iter().map(|x| x * x).sum::<f64>().sqrt()).sum::<f64>();
        Ok(Self { m, n, matrix, offset, certified_lipschitz: lip })
    }

    /// Pixel vector `g1(z)`.
    pub fn pixels(&self, z: &[f64]) -> Result<PixelVector> {
        if z.len() != self.m {
            return Err(invalid(format!("latent point has {} coordinates, expected {}", z.len(), self.m)));
        }
        let px = self
            .matrix
            .chunks(self.m)
            .zip(&self.offset)
            .map(|(row, b)| logistic(row.iter().zip(z).map(|(a, x)| a * x).sum::<f64>() + b))
            .collect();
        PixelVector::new(px)
    }
}

/// Random affine generator whose rows are rescaled so the certified constant equals `scale`.
pub fn make_generator(m: usize, n: usize, seed: u64, scale: f64) -> Result<Generator> {
    if !(scale >= 0.0) || !scale.is_finite() {
        return Err(invalid("generator scale must be finite and nonnegative"));
    }
    let mut rng = Seed(seed).stream(0);
    let mut matrix: Vec<f64> = (0..n * m).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    let offset: Vec<f64> = (0..n).map(|_| 0.5 * rng.sample::<f64, _>(StandardNormal)).collect();
    let raw = Generator::new(m, n, matrix.clone(), offset.clone())?.certified_lipschitz;
    let factor = if raw > 0.0 { scale / raw } else { 0.0 };
    matrix.iter_mut().for_each(|a| *a *= factor);
    let mut g = Generator::new(m, n, matrix, offset)?;
    // Rounding could leave the recomputed constant a hair away from `scale`.
    g.certified_lipschitz = g.certified_lipschitz.max(scale);
    Ok(g)
}

/// A generator composed with the pixel encoding: latent point to encoded state.
#[derive(Clone, Debug)]
pub struct EncodedGenerator {
    pub generator: Generator,
    pub spec: EncodingSpec,
}

impl EncodedGenerator {
    pub fn new(generator: Generator, spec: EncodingSpec) -> Result<Self> {
        if generator.n != spec.n {
            return Err(invalid("generator output length differs from the number of encoded sites"));
        }
        spec.validate()?;
        Ok(Self { generator, spec })
    }

    pub fn pixels(&self, z: &[f64]) -> Result<PixelVector> {
        self.generator.pixels(z)
    }

    pub fn state(&self, z: &[f64]) -> Result<DensityMatrix> {
        Ok(encode(&self.pixels(z)?, &self.spec)?.density())
    }
}
