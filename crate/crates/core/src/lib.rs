//! Heterogeneous-strategy particle swarm optimization.
//!
//! A swarm of `N` particles is split into `⌊λN⌋` fully informed (FI) particles,
//! which are attracted by every graph neighbor's personal best, and singly
//! informed (SI) particles, which follow their own best and the single best
//! neighbor. With `λ = 0` the swarm is a canonical lbest PSO; with `λ = 1` it is
//! a fully informed PSO.
//!
//! Modules:
//! - [`graph`]: ring, scale-free and small-world communication topologies.
//! - [`objective`]: the benchmark objectives and the uniform [`ObjectiveSpec`] interface.
//! - [`swarm`]: the optimizer itself.
//! - [`metrics`]: solution quality, discovery fraction and run aggregation.
//! - [`filter`]: 2-D recursive filter amplitude response, cost and stability.
//! - [`experiment`]: batch scheduling and CSV/JSON output used by the CLI.

pub mod error;
pub mod experiment;
pub mod filter;
pub mod graph;
pub mod metrics;
pub mod objective;
pub mod rng;
pub mod summation;
pub mod swarm;

pub use error::{Error, Result};
pub use graph::Graph;
pub use metrics::{AggregateStats, RunResult};
pub use objective::{Benchmark, ObjectiveSpec};
pub use swarm::{HspsoConfig, Particle, Strategy, Swarm, TopologySpec};
