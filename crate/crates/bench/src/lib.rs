//! Seeded fixtures shared by the benchmarks.

use qarb_core::classifier::build_layered;
use qarb_core::concentration::sample_mixed_state;
use qarb_core::{DensityMatrix, EncodingSpec, LayeredCircuitSpec, PixelVector, QuantumClassifier, Seed};

/// A pair of random full-rank states of dimension `dim`.
pub fn state_pair(dim: usize, seed: u64) -> (DensityMatrix, DensityMatrix) {
    let mut rng = Seed(seed).stream(0);
    (sample_mixed_state(dim, &mut rng).unwrap(), sample_mixed_state(dim, &mut rng).unwrap())
}

/// Evenly spaced pixels in `[0, 1]`.
pub fn ramp(n: usize) -> PixelVector {
    PixelVector::new((0..n).map(|i| i as f64 / n.max(2).saturating_sub(1) as f64).collect()).unwrap()
}

/// A brick-wall qubit classifier on `n` sites with fixed parameters, and its encoding.
pub fn qubit_classifier(n: usize) -> (QuantumClassifier, EncodingSpec) {
    let mut spec = LayeredCircuitSpec::brick_wall(n, 2, 2, 0, vec![0, 1]);
    for (i, p) in spec.parameters.iter_mut().enumerate() {
        *p = 0.1 * ((i * 7) % 11) as f64 - 0.5;
    }
    (build_layered(&spec).unwrap(), EncodingSpec::new(2, n).unwrap())
}
