//! The heterogeneous-strategy swarm.
//!
//! Every particle moves by `x := x + v`. Singly informed particles use
//!
//! ```text
//! v := χ [v + (φ/2) r₁ (p_i − x) + (φ/2) r₂ (p_nb − x)]
//! ```
//!
//! where `p_nb` is the best personal best among graph neighbors, and fully
//! informed particles use
//!
//! ```text
//! v := χ [v + (φ/k_i) Σ_m r_m (p_{i_m} − x)]
//! ```
//!
//! over all `k_i` neighbors. Updates are synchronous: velocities computed in
//! iteration `t` only see personal bests committed at the end of `t − 1`.
//!
//! Random draw order for one run (single stream):
//! 1. initial positions, particle-major then dimension;
//! 2. FI selection (partial Fisher–Yates over particle indices);
//! 3. initial evaluations in particle order (noise draws only);
//! 4. per iteration, per particle in index order: velocity draws
//!    (per dimension; per neighbor ascending for FI, `r₁` before `r₂` for SI),
//!    then that particle's evaluation.

use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{self, Graph};
use crate::metrics::{RunDigest, RunResult};
use crate::objective::ObjectiveSpec;
use crate::rng::{graph_stream, run_stream, RunRng, UnitSource};

pub const DEFAULT_CHI: f64 = 0.729;
pub const DEFAULT_PHI: f64 = 4.1;
pub const DEFAULT_SWARM_SIZE: usize = 50;
pub const DEFAULT_MAX_ITER: usize = 5000;
pub const DEFAULT_BETA: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Strategy {
    /// Singly informed.
    SI,
    /// Fully informed.
    FI,
}

/// What happens to a particle that leaves the search box.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundaryPolicy {
    /// Leave it outside; it is not evaluated and cannot update its best.
    #[default]
    Skip,
    /// Clamp each offending coordinate and zero that velocity component.
    Clamp,
}

/// Granularity of the random gains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DrawMode {
    /// Fresh gains for every dimension.
    #[default]
    PerDimension,
    /// One set of gains per particle per iteration, shared by all dimensions.
    PerParticle,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TopologySpec {
    Ring { k: usize },
    ScaleFree { m: usize },
    SmallWorld { k: usize, beta: f64 },
}

impl TopologySpec {
    pub fn kind(&self) -> &'static str {
        match self {
            TopologySpec::Ring { .. } => "ring",
            TopologySpec::ScaleFree { .. } => "scale-free",
            TopologySpec::SmallWorld { .. } => "small-world",
        }
    }

    /// Nominal average degree.
    pub fn mean_degree(&self) -> usize {
        match *self {
            TopologySpec::Ring { k } | TopologySpec::SmallWorld { k, .. } => k,
            TopologySpec::ScaleFree { m } => 2 * m,
        }
    }

    pub fn build<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Graph> {
        match *self {
            TopologySpec::Ring { k } => graph::ring(n, k),
            TopologySpec::ScaleFree { m } => graph::scale_free_with(n, m, rng),
            TopologySpec::SmallWorld { k, beta } => graph::small_world_with(n, k, beta, rng),
        }
    }

    /// Graph for a run with the given seed, drawn from that seed's graph stream.
    pub fn build_seeded(&self, n: usize, seed: u64) -> Result<Graph> {
        self.build(n, &mut graph_stream(seed))
    }
}

impl std::fmt::Display for TopologySpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TopologySpec::Ring { k } => write!(f, "ring(k={k})"),
            TopologySpec::ScaleFree { m } => write!(f, "scale-free(m={m})"),
            TopologySpec::SmallWorld { k, beta } => write!(f, "small-world(k={k},beta={beta})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HspsoConfig {
    pub swarm_size: usize,
    pub lambda: f64,
    pub chi: f64,
    pub phi: f64,
    pub max_iter: usize,
    pub topology: TopologySpec,
    pub seed: u64,
    pub boundary: BoundaryPolicy,
    pub draw_mode: DrawMode,
}

impl Default for HspsoConfig {
    fn default() -> Self {
        Self {
            swarm_size: DEFAULT_SWARM_SIZE,
            lambda: 0.0,
            chi: DEFAULT_CHI,
            phi: DEFAULT_PHI,
            max_iter: DEFAULT_MAX_ITER,
            topology: TopologySpec::Ring { k: 4 },
            seed: 0,
            boundary: BoundaryPolicy::default(),
            draw_mode: DrawMode::default(),
        }
    }
}

impl HspsoConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.lambda) {
            return Err(Error::InvalidConfig(format!(
                "lambda must lie in [0, 1], got {}",
                self.lambda
            )));
        }
        if self.swarm_size < 2 {
            return Err(Error::InvalidConfig(format!(
                "swarm size must be at least 2, got {}",
                self.swarm_size
            )));
        }
        if self.max_iter < 1 {
            return Err(Error::InvalidConfig("max_iter must be at least 1".into()));
        }
        if !self.chi.is_finite() || !self.phi.is_finite() {
            return Err(Error::InvalidConfig("chi and phi must be finite".into()));
        }
        Ok(())
    }

    /// `⌊λN⌋`.
    pub fn fi_count(&self) -> usize {
        // the epsilon absorbs representation error such as 0.3 * 50 = 14.999…
        ((self.lambda * self.swarm_size as f64) + 1e-9).floor() as usize
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Particle {
    pub index: usize,
    pub strategy: Strategy,
    pub position: Vec<f64>,
    pub velocity: Vec<f64>,
    pub best_position: Vec<f64>,
    pub best_fitness: f64,
}

/// Constriction coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coefficients {
    pub chi: f64,
    pub phi: f64,
}

impl Default for Coefficients {
    fn default() -> Self {
        Self {
            chi: DEFAULT_CHI,
            phi: DEFAULT_PHI,
        }
    }
}

fn si_velocity_into<R: UnitSource + ?Sized>(
    coeffs: Coefficients,
    particle: &Particle,
    neighbor_best: &[f64],
    mode: DrawMode,
    rng: &mut R,
    out: &mut [f64],
) {
    let half = coeffs.phi / 2.0;
    let mut shared = None;
    if mode == DrawMode::PerParticle {
        let r1 = rng.next_unit();
        let r2 = rng.next_unit();
        shared = Some((r1, r2));
    }
    for d in 0..particle.position.len() {
        let (r1, r2) = match shared {
            Some(r) => r,
            None => {
                let r1 = rng.next_unit();
                (r1, rng.next_unit())
            }
        };
        let x = particle.position[d];
        out[d] = coeffs.chi
            * (particle.velocity[d]
                + half * r1 * (particle.best_position[d] - x)
                + half * r2 * (neighbor_best[d] - x));
    }
}

/// Singly informed velocity: own best plus best neighbor.
pub fn si_velocity<R: UnitSource + ?Sized>(
    coeffs: Coefficients,
    particle: &Particle,
    neighbor_best: &[f64],
    mode: DrawMode,
    rng: &mut R,
) -> Vec<f64> {
    let mut out = vec![0.0; particle.position.len()];
    si_velocity_into(coeffs, particle, neighbor_best, mode, rng, &mut out);
    out
}

fn fi_velocity_into<R: UnitSource + ?Sized>(
    coeffs: Coefficients,
    particle: &Particle,
    neighbor_bests: &[&[f64]],
    mode: DrawMode,
    rng: &mut R,
    gains: &mut Vec<f64>,
    out: &mut [f64],
) {
    let k = neighbor_bests.len();
    let weight = coeffs.phi / k as f64;
    gains.clear();
    if mode == DrawMode::PerParticle {
        gains.extend((0..k).map(|_| rng.next_unit()));
    }
    for d in 0..particle.position.len() {
        let x = particle.position[d];
        let mut pull = 0.0;
        for (m, nb) in neighbor_bests.iter().enumerate() {
            let r = match mode {
                DrawMode::PerDimension => rng.next_unit(),
                DrawMode::PerParticle => gains[m],
            };
            pull += r * (nb[d] - x);
        }
        out[d] = coeffs.chi * (particle.velocity[d] + weight * pull);
    }
}

/// Fully informed velocity. `neighbor_bests` must be in ascending neighbor
/// index order and non-empty.
pub fn fi_velocity<R: UnitSource + ?Sized>(
    coeffs: Coefficients,
    particle: &Particle,
    neighbor_bests: &[&[f64]],
    mode: DrawMode,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if neighbor_bests.is_empty() {
        return Err(Error::InvalidConfig(format!(
            "particle {} has no neighbors",
            particle.index
        )));
    }
    let mut out = vec![0.0; particle.position.len()];
    fi_velocity_into(coeffs, particle, neighbor_bests, mode, rng, &mut Vec::new(), &mut out);
    Ok(out)
}

/// Per-run instrumentation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counters {
    pub si_updates: u64,
    pub fi_updates: u64,
    /// Strict personal-best improvements by FI particles after initialization.
    pub fi_improvements: u64,
    /// Strict personal-best improvements by all particles after initialization.
    pub total_improvements: u64,
    pub evaluations: u64,
    /// Moves that left the box under [`BoundaryPolicy::Skip`].
    pub skipped: u64,
}

#[derive(Debug, Clone)]
pub struct Swarm {
    particles: Vec<Particle>,
    graph: Arc<Graph>,
    coeffs: Coefficients,
    boundary: BoundaryPolicy,
    draw_mode: DrawMode,
    max_iter: usize,
    best_index: usize,
    rng: RunRng,
    iteration: usize,
    counters: Counters,
}

impl Swarm {
    pub fn initialize(
        config: &HspsoConfig,
        objective: &ObjectiveSpec,
        graph: Arc<Graph>,
    ) -> Result<Self> {
        config.validate()?;
        let n = config.swarm_size;
        if graph.node_count() != n {
            return Err(Error::InvalidConfig(format!(
                "graph has {} nodes but swarm size is {n}",
                graph.node_count()
            )));
        }
        if let Some(i) = (0..n).find(|&i| graph.degree(i) == 0) {
            return Err(Error::InvalidConfig(format!("node {i} is isolated")));
        }

        let mut rng = run_stream(config.seed);
        let dim = objective.dim();
        let (lower, upper) = (objective.lower(), objective.upper());
        let positions: Vec<Vec<f64>> = (0..n)
            .map(|_| {
                (0..dim)
                    .map(|d| lower[d] + (upper[d] - lower[d]) * rng.next_unit())
                    .collect()
            })
            .collect();

        let mut order: Vec<usize> = (0..n).collect();
        let fi = config.fi_count();
        for i in 0..fi {
            let j = rng.random_range(i..n);
            order.swap(i, j);
        }
        let mut strategies = vec![Strategy::SI; n];
        for &i in &order[..fi] {
            strategies[i] = Strategy::FI;
        }

        let mut particles = Vec::with_capacity(n);
        for (index, position) in positions.into_iter().enumerate() {
            let fitness = objective.evaluate(&position, &mut rng)?;
            particles.push(Particle {
                index,
                strategy: strategies[index],
                velocity: vec![0.0; dim],
                best_position: position.clone(),
                position,
                best_fitness: fitness,
            });
        }

        let mut swarm = Self {
            particles,
            graph,
            coeffs: Coefficients {
                chi: config.chi,
                phi: config.phi,
            },
            boundary: config.boundary,
            draw_mode: config.draw_mode,
            max_iter: config.max_iter,
            best_index: 0,
            rng,
            iteration: 0,
            counters: Counters {
                evaluations: n as u64,
                ..Counters::default()
            },
        };
        swarm.refresh_best();
        Ok(swarm)
    }

    fn refresh_best(&mut self) {
        let mut best = 0;
        for (i, p) in self.particles.iter().enumerate() {
            if p.best_fitness < self.particles[best].best_fitness {
                best = i;
            }
        }
        self.best_index = best;
    }

    /// Index of the neighbor with the lowest personal-best fitness (lowest
    /// index on ties).
    fn best_neighbor(&self, i: usize) -> usize {
        let nb = self.graph.neighbors(i).expect("particle index is a graph node");
        let mut best = nb[0];
        for &j in &nb[1..] {
            if self.particles[j].best_fitness < self.particles[best].best_fitness {
                best = j;
            }
        }
        best
    }

    /// Advances one synchronous iteration.
    pub fn step(&mut self, objective: &ObjectiveSpec) -> Result<()> {
        if self.iteration >= self.max_iter {
            return Err(Error::BudgetExhausted(self.max_iter));
        }
        let n = self.particles.len();
        let dim = objective.dim();
        let best_nb: Vec<usize> = (0..n).map(|i| self.best_neighbor(i)).collect();
        let mut pending: Vec<Option<f64>> = vec![None; n];
        let mut velocity = vec![0.0; dim];
        let mut gains = Vec::new();

        for i in 0..n {
            let p = &self.particles[i];
            match p.strategy {
                Strategy::SI => {
                    let nb = &self.particles[best_nb[i]].best_position;
                    si_velocity_into(self.coeffs, p, nb, self.draw_mode, &mut self.rng, &mut velocity);
                    self.counters.si_updates += 1;
                }
                Strategy::FI => {
                    let nb_bests: Vec<&[f64]> = self
                        .graph
                        .neighbors(i)?
                        .iter()
                        .map(|&j| self.particles[j].best_position.as_slice())
                        .collect();
                    fi_velocity_into(
                        self.coeffs,
                        p,
                        &nb_bests,
                        self.draw_mode,
                        &mut self.rng,
                        &mut gains,
                        &mut velocity,
                    );
                    self.counters.fi_updates += 1;
                }
            }

            let p = &mut self.particles[i];
            p.velocity.copy_from_slice(&velocity);
            for (x, v) in p.position.iter_mut().zip(&p.velocity) {
                *x += v;
            }
            let evaluable = match self.boundary {
                BoundaryPolicy::Skip => objective.contains(&p.position),
                BoundaryPolicy::Clamp => {
                    let (lo, hi) = (objective.lower(), objective.upper());
                    for d in 0..dim {
                        if p.position[d] < lo[d] {
                            p.position[d] = lo[d];
                            p.velocity[d] = 0.0;
                        } else if p.position[d] > hi[d] {
                            p.position[d] = hi[d];
                            p.velocity[d] = 0.0;
                        }
                    }
                    true
                }
            };
            if !evaluable {
                self.counters.skipped += 1;
                continue;
            }
            let fitness = objective.evaluate(&p.position, &mut self.rng)?;
            self.counters.evaluations += 1;
            if fitness < p.best_fitness {
                pending[i] = Some(fitness);
            }
        }

        for (p, update) in self.particles.iter_mut().zip(pending) {
            if let Some(fitness) = update {
                p.best_position.copy_from_slice(&p.position);
                p.best_fitness = fitness;
                self.counters.total_improvements += 1;
                if p.strategy == Strategy::FI {
                    self.counters.fi_improvements += 1;
                }
            }
        }
        self.refresh_best();
        self.iteration += 1;
        Ok(())
    }

    pub fn particles(&self) -> &[Particle] {
        &self.particles
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    pub fn counters(&self) -> Counters {
        self.counters
    }

    pub fn fi_count(&self) -> usize {
        self.particles.iter().filter(|p| p.strategy == Strategy::FI).count()
    }

    pub fn global_best_fitness(&self) -> f64 {
        self.particles[self.best_index].best_fitness
    }

    pub fn global_best_position(&self) -> &[f64] {
        &self.particles[self.best_index].best_position
    }

    pub fn rng(&self) -> &RunRng {
        &self.rng
    }
}

/// Runs `config.max_iter` iterations on a graph generated from the run seed.
pub fn run(config: &HspsoConfig, objective: &ObjectiveSpec) -> Result<RunResult> {
    config.validate()?;
    let graph = config.topology.build_seeded(config.swarm_size, config.seed)?;
    run_on_graph(config, objective, Arc::new(graph))
}

/// Runs on a caller-supplied graph (used to pin one topology across runs).
pub fn run_on_graph(
    config: &HspsoConfig,
    objective: &ObjectiveSpec,
    graph: Arc<Graph>,
) -> Result<RunResult> {
    let mut swarm = Swarm::initialize(config, objective, graph)?;
    let mut trajectory = Vec::with_capacity(config.max_iter + 1);
    trajectory.push(swarm.global_best_fitness());
    for _ in 0..config.max_iter {
        swarm.step(objective)?;
        trajectory.push(swarm.global_best_fitness());
    }
    let counters = swarm.counters();
    Ok(RunResult {
        final_fitness: swarm.global_best_fitness(),
        best_position: swarm.global_best_position().to_vec(),
        trajectory,
        num_fi: counters.fi_improvements,
        num_total: counters.total_improvements,
        counters,
        iterations: swarm.iteration(),
        digest: RunDigest {
            objective: objective.name().to_owned(),
            topology: config.topology,
            lambda: config.lambda,
            seed: config.seed,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::Benchmark;
    use crate::rng::{Constant, Scripted};

    fn particle(x: f64, v: f64, best: f64, dim: usize) -> Particle {
        Particle {
            index: 0,
            strategy: Strategy::SI,
            position: vec![x; dim],
            velocity: vec![v; dim],
            best_position: vec![best; dim],
            best_fitness: 0.0,
        }
    }

    #[test]
    fn si_hand_computed() {
        let p = particle(1.0, 0.0, 2.0, 3);
        let v = si_velocity(Coefficients::default(), &p, &[3.0; 3], DrawMode::PerDimension, &mut Constant(1.0));
        for vd in v {
            assert!((vd - 4.48335).abs() < 1e-12);
        }
    }

    #[test]
    fn si_pure_damping() {
        let p = particle(1.5, -2.0, 1.5, 4);
        let v = si_velocity(Coefficients::default(), &p, &[1.5; 4], DrawMode::PerDimension, &mut Constant(0.7));
        assert!(v.iter().all(|&vd| (vd - 0.729 * -2.0).abs() < 1e-15));
        let p = particle(1.0, 3.0, 2.0, 2);
        let v = si_velocity(Coefficients::default(), &p, &[3.0; 2], DrawMode::PerDimension, &mut Constant(0.0));
        assert!(v.iter().all(|&vd| (vd - 0.729 * 3.0).abs() < 1e-15));
    }

    #[test]
    fn si_draw_order_is_r1_then_r2_per_dimension() {
        let p = Particle {
            position: vec![0.0, 0.0],
            velocity: vec![0.0, 0.0],
            best_position: vec![1.0, 1.0],
            ..particle(0.0, 0.0, 0.0, 2)
        };
        let mut s = Scripted::new(vec![1.0, 0.0, 0.0, 1.0]);
        // dim 0 pulls only toward own best, dim 1 only toward the neighbor
        let v = si_velocity(Coefficients::default(), &p, &[-1.0, -1.0], DrawMode::PerDimension, &mut s);
        assert_eq!(s.draws(), 4);
        assert!((v[0] - 0.729 * 2.05).abs() < 1e-15);
        assert!((v[1] + 0.729 * 2.05).abs() < 1e-15);
    }

    #[test]
    fn per_particle_draws_once() {
        let p = particle(1.0, 0.0, 2.0, 5);
        let mut s = Scripted::new(vec![0.25, 0.5, 0.75]);
        si_velocity(Coefficients::default(), &p, &[3.0; 5], DrawMode::PerParticle, &mut s);
        assert_eq!(s.draws(), 2);
        let mut s = Scripted::new(vec![0.25]);
        let nbs: [&[f64]; 3] = [&[2.0; 5], &[3.0; 5], &[4.0; 5]];
        fi_velocity(Coefficients::default(), &p, &nbs, DrawMode::PerParticle, &mut s).unwrap();
        assert_eq!(s.draws(), 3);
    }

    #[test]
    fn fi_hand_computed() {
        let p = particle(1.0, 0.0, 1.0, 3);
        let nbs: [&[f64]; 2] = [&[2.0; 3], &[3.0; 3]];
        let v = fi_velocity(Coefficients::default(), &p, &nbs, DrawMode::PerDimension, &mut Constant(1.0)).unwrap();
        for vd in v {
            assert!((vd - 4.48335).abs() < 1e-12);
        }
    }

    #[test]
    fn fi_single_neighbor_and_damping() {
        let p = particle(1.0, 0.5, 1.0, 2);
        let nbs: [&[f64]; 1] = [&[3.0; 2]];
        let v = fi_velocity(Coefficients::default(), &p, &nbs, DrawMode::PerDimension, &mut Constant(0.4)).unwrap();
        let expect = 0.729 * (0.5 + 4.1 * 0.4 * 2.0);
        assert!(v.iter().all(|&vd| (vd - expect).abs() < 1e-14));

        let nbs: [&[f64]; 3] = [&[1.0; 2], &[1.0; 2], &[1.0; 2]];
        let v = fi_velocity(Coefficients::default(), &p, &nbs, DrawMode::PerDimension, &mut Constant(0.9)).unwrap();
        assert!(v.iter().all(|&vd| (vd - 0.729 * 0.5).abs() < 1e-15));
    }

    #[test]
    fn fi_rejects_isolated() {
        let p = particle(1.0, 0.0, 1.0, 2);
        assert!(fi_velocity(Coefficients::default(), &p, &[], DrawMode::PerDimension, &mut Constant(1.0)).is_err());
    }

    fn config(lambda: f64, iters: usize, seed: u64) -> HspsoConfig {
        HspsoConfig {
            lambda,
            max_iter: iters,
            seed,
            ..HspsoConfig::default()
        }
    }

    #[test]
    fn fi_partition_sizes() {
        let f = Benchmark::Sphere.objective(5).unwrap();
        let g = Arc::new(graph::ring(50, 4).unwrap());
        for (lambda, expect) in [(0.0, 0), (1.0, 50), (0.3, 15), (0.7, 35), (0.1, 5)] {
            let s = Swarm::initialize(&config(lambda, 5, 1), &f, g.clone()).unwrap();
            assert_eq!(s.fi_count(), expect, "lambda {lambda}");
        }
    }

    #[test]
    fn initialize_rejects_bad_configs() {
        let f = Benchmark::Sphere.objective(5).unwrap();
        let g = Arc::new(graph::ring(50, 4).unwrap());
        assert!(Swarm::initialize(&config(1.2, 5, 1), &f, g.clone()).is_err());
        assert!(Swarm::initialize(&config(-0.1, 5, 1), &f, g.clone()).is_err());
        let small = Arc::new(graph::ring(10, 4).unwrap());
        assert!(Swarm::initialize(&config(0.5, 5, 1), &f, small).is_err());
        let isolated = Arc::new(Graph::from_edges(50, (0..48).map(|i| (i, i + 1))).unwrap());
        assert!(Swarm::initialize(&config(0.5, 5, 1), &f, isolated).is_err());
        assert!(Swarm::initialize(&config(0.5, 0, 1), &f, g).is_err());
    }

    #[test]
    fn initial_state() {
        let f = Benchmark::Rastrigin.objective(4).unwrap();
        let s = Swarm::initialize(&config(0.5, 5, 3), &f, Arc::new(graph::ring(50, 4).unwrap())).unwrap();
        assert_eq!(s.iteration(), 0);
        for p in s.particles() {
            assert!(f.contains(&p.position));
            assert!(p.velocity.iter().all(|&v| v == 0.0));
            assert_eq!(p.position, p.best_position);
            assert_eq!(p.best_fitness, f.evaluate(&p.position, &mut Constant(0.0)).unwrap());
        }
        let min = s.particles().iter().map(|p| p.best_fitness).fold(f64::INFINITY, f64::min);
        assert_eq!(s.global_best_fitness(), min);
    }

    #[test]
    fn fixed_point_when_at_best_without_motion() {
        // every particle already at its best, zero velocity: nothing moves
        let f = Benchmark::Sphere.objective(3).unwrap();
        let mut s = Swarm::initialize(&config(0.5, 3, 4), &f, Arc::new(graph::ring(50, 4).unwrap())).unwrap();
        let shared = s.particles[0].position.clone();
        for p in &mut s.particles {
            p.position = shared.clone();
            p.best_position = shared.clone();
            p.best_fitness = sphere_of(&shared);
        }
        s.step(&f).unwrap();
        for p in s.particles() {
            assert_eq!(p.position, shared);
        }
    }

    fn sphere_of(x: &[f64]) -> f64 {
        x.iter().map(|v| v * v).sum()
    }

    #[test]
    fn step_past_budget_fails() {
        let f = Benchmark::Sphere.objective(3).unwrap();
        let mut s = Swarm::initialize(&config(0.5, 1, 4), &f, Arc::new(graph::ring(50, 4).unwrap())).unwrap();
        s.step(&f).unwrap();
        assert!(matches!(s.step(&f), Err(Error::BudgetExhausted(1))));
    }

    /// Replays one step from a cloned stream using only pre-step state, so any
    /// read of a best committed mid-step would show up as a mismatch.
    #[test]
    fn step_is_synchronous_and_follows_draw_order() {
        let f = Benchmark::Sphere.objective(6).unwrap();
        let g = Arc::new(graph::ring(50, 4).unwrap());
        let mut s = Swarm::initialize(&config(0.4, 20, 8), &f, g.clone()).unwrap();
        for _ in 0..5 {
            s.step(&f).unwrap();
        }
        let before = s.clone();
        s.step(&f).unwrap();

        let mut rng = before.rng.clone();
        let coeffs = Coefficients::default();
        let mut improved = 0;
        for (i, p) in before.particles.iter().enumerate() {
            let nb = g.neighbors(i).unwrap();
            let v = match p.strategy {
                Strategy::SI => {
                    let best = nb
                        .iter()
                        .copied()
                        .min_by(|&a, &b| {
                            before.particles[a]
                                .best_fitness
                                .partial_cmp(&before.particles[b].best_fitness)
                                .unwrap()
                                .then(a.cmp(&b))
                        })
                        .unwrap();
                    si_velocity(coeffs, p, &before.particles[best].best_position, DrawMode::PerDimension, &mut rng)
                }
                Strategy::FI => {
                    let bests: Vec<&[f64]> =
                        nb.iter().map(|&j| before.particles[j].best_position.as_slice()).collect();
                    fi_velocity(coeffs, p, &bests, DrawMode::PerDimension, &mut rng).unwrap()
                }
            };
            let x: Vec<f64> = p.position.iter().zip(&v).map(|(a, b)| a + b).collect();
            let after = &s.particles[i];
            assert_eq!(after.velocity, v, "velocity of particle {i}");
            assert_eq!(after.position, x, "position of particle {i}");
            if f.contains(&x) && sphere_of(&x) < p.best_fitness {
                improved += 1;
                assert_eq!(after.best_position, x);
            } else {
                assert_eq!(after.best_position, p.best_position);
            }
        }
        assert_eq!(
            s.counters.total_improvements - before.counters.total_improvements,
            improved
        );
        assert_eq!(s.rng, rng, "stream position after the step");
    }

    #[test]
    fn endpoint_paths() {
        let f = Benchmark::Sphere.objective(5).unwrap();
        let c0 = run(&config(0.0, 30, 2), &f).unwrap().counters;
        assert_eq!(c0.fi_updates, 0);
        assert_eq!(c0.si_updates, 50 * 30);
        let c1 = run(&config(1.0, 30, 2), &f).unwrap().counters;
        assert_eq!(c1.si_updates, 0);
        assert_eq!(c1.fi_updates, 50 * 30);
    }

    #[test]
    fn constriction_of_velocity_magnitude() {
        let v = [3.0, -1.5, 0.25];
        let p = Particle {
            position: vec![0.2, 0.4, 0.6],
            velocity: v.to_vec(),
            best_position: vec![0.2, 0.4, 0.6],
            ..particle(0.0, 0.0, 0.0, 3)
        };
        let same = p.position.clone();
        let mut s = Scripted::new(vec![0.13, 0.91, 0.57, 0.02]);
        let out = si_velocity(Coefficients::default(), &p, &same, DrawMode::PerDimension, &mut s);
        let bests: [&[f64]; 2] = [&same, &same];
        let out_fi = fi_velocity(Coefficients::default(), &p, &bests, DrawMode::PerDimension, &mut s).unwrap();
        for d in 0..3 {
            assert!((out[d].abs() - 0.729 * v[d].abs()).abs() < 1e-15);
            assert!((out_fi[d].abs() - 0.729 * v[d].abs()).abs() < 1e-15);
        }
    }

    #[test]
    fn clamp_policy_stays_in_box() {
        let f = Benchmark::Rastrigin.objective(10).unwrap();
        let cfg = HspsoConfig {
            boundary: BoundaryPolicy::Clamp,
            ..config(0.5, 50, 6)
        };
        let mut s = Swarm::initialize(&cfg, &f, Arc::new(graph::ring(50, 4).unwrap())).unwrap();
        for _ in 0..50 {
            s.step(&f).unwrap();
            assert!(s.particles().iter().all(|p| f.contains(&p.position)));
        }
        assert_eq!(s.counters().skipped, 0);
    }

    #[test]
    fn skip_policy_never_records_outside_best() {
        let f = Benchmark::Rastrigin.objective(10).unwrap();
        let r = run(&config(0.5, 100, 6), &f).unwrap();
        assert!(f.contains(&r.best_position));
        assert!(r.counters.skipped > 0);
    }
}
