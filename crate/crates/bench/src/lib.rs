//! Shared fixtures for the benchmarks.

use rand_chacha::ChaCha8Rng;
use rand_chacha::rand_core::SeedableRng;
use specres::{generate_measure, AtomicMeasure};

/// A reproducible measure from the experiment generator.
pub fn fixture_measure(seed: u64) -> AtomicMeasure {
    generate_measure(0.15, &mut ChaCha8Rng::seed_from_u64(seed))
}
