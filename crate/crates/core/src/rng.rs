//! Random draws used by the optimizer and the noisy objective.
//!
//! Every run owns exactly one [`RunRng`] stream. The velocity updates and the
//! quartic-noise objective only need uniform numbers in `[0, 1)`, so they take
//! a [`UnitSource`] instead of a full generator; tests substitute a stub.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// The generator behind every seeded stream. Recorded in output headers.
pub const GENERATOR_NAME: &str = "ChaCha8";

pub type RunRng = ChaCha8Rng;

/// Stream used for the swarm (initialization, updates, noise).
pub fn run_stream(seed: u64) -> RunRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Stream used to generate a run's communication graph. Distinct from the
/// swarm stream of the same seed.
pub fn graph_stream(seed: u64) -> RunRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    rng
}

pub trait UnitSource {
    /// Next uniform draw in `[0, 1)`.
    fn next_unit(&mut self) -> f64;
}

impl UnitSource for ChaCha8Rng {
    #[inline]
    fn next_unit(&mut self) -> f64 {
        self.random::<f64>()
    }
}

/// Stub source returning the same value forever.
#[derive(Debug, Clone, Copy)]
pub struct Constant(pub f64);

impl UnitSource for Constant {
    fn next_unit(&mut self) -> f64 {
        self.0
    }
}

/// Stub source replaying a fixed script, cycling when exhausted.
#[derive(Debug, Clone)]
pub struct Scripted {
    values: Vec<f64>,
    pos: usize,
}

impl Scripted {
    pub fn new(values: Vec<f64>) -> Self {
        assert!(!values.is_empty(), "scripted source needs at least one value");
        Self { values, pos: 0 }
    }

    /// Number of draws taken so far.
    pub fn draws(&self) -> usize {
        self.pos
    }
}

impl UnitSource for Scripted {
    fn next_unit(&mut self) -> f64 {
        let v = self.values[self.pos % self.values.len()];
        self.pos += 1;
        v
    }
}
