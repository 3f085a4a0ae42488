//! Batches of seeded runs and their CSV/JSON outputs.
//!
//! Run `r` of a batch uses seed `base_seed + r`. Every cell of a sweep reuses
//! the same seeds. Output rows are ordered by `(λ, k̄, run_id)` regardless of
//! the order in which runs finish.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filter::{self, FilterParams, FrequencyGrid};
use crate::graph::Graph;
use crate::metrics::{self, discovery_fraction, AggregateStats, RunResult};
use crate::objective::{Benchmark, NoiseMode, ObjectiveSpec};
use crate::rng::GENERATOR_NAME;
use crate::swarm::{self, BoundaryPolicy, DrawMode, HspsoConfig, TopologySpec};

pub const CSV_VERSION_LINE: &str = "# hspso-csv v1";
pub const THREADS_ENV: &str = "HSPSO_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Bench,
    Sweep,
    Filter,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TopologyKind {
    #[default]
    Ring,
    ScaleFree,
    SmallWorld,
}

impl std::str::FromStr for TopologyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ring" => Ok(TopologyKind::Ring),
            "scale-free" => Ok(TopologyKind::ScaleFree),
            "small-world" => Ok(TopologyKind::SmallWorld),
            other => Err(Error::InvalidConfig(format!("unknown topology `{other}`"))),
        }
    }
}

/// Everything a command may be given, all optional. Loaded from a JSON file
/// and/or flags; see [`ExperimentOptions::overridden_by`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentOptions {
    pub objective: Option<String>,
    pub lambda: Option<f64>,
    /// `start:end:step`.
    pub lambda_grid: Option<String>,
    pub topology: Option<TopologyKind>,
    pub k: Option<usize>,
    pub k_grid: Option<Vec<usize>>,
    pub beta: Option<f64>,
    pub m: Option<usize>,
    pub n: Option<usize>,
    pub dim: Option<usize>,
    pub iters: Option<usize>,
    pub runs: Option<usize>,
    pub seed: Option<u64>,
    pub boundary: Option<BoundaryPolicy>,
    pub draw_mode: Option<DrawMode>,
    pub noise: Option<NoiseMode>,
    /// Log every `thin`-th iteration in trajectory files (the last one is
    /// always logged).
    pub thin: Option<usize>,
    /// Generate one graph from the base seed and reuse it for every run.
    pub pin_graph: Option<bool>,
    /// Load the communication graph from an edge-list file.
    pub graph: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub eval_only: Option<bool>,
    pub coeffs: Option<PathBuf>,
}

macro_rules! take_over {
    ($base:ident, $top:ident, $($field:ident),*) => {
        $( if $top.$field.is_some() { $base.$field = $top.$field; } )*
    };
}

impl ExperimentOptions {
    pub fn from_json_file(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
    }

    /// Fields set in `top` replace those in `self`.
    pub fn overridden_by(mut self, top: ExperimentOptions) -> Self {
        take_over!(
            self, top, objective, lambda, lambda_grid, topology, k, k_grid, beta, m, n, dim,
            iters, runs, seed, boundary, draw_mode, noise, thin, pin_graph, graph, out, eval_only,
            coeffs
        );
        self
    }

    pub fn resolve(&self, mode: Mode) -> Result<ExperimentConfig> {
        let filter_mode = mode == Mode::Filter;
        let lambdas = match (&self.lambda_grid, mode) {
            (Some(g), _) => parse_lambda_grid(g)?,
            (None, Mode::Sweep) => parse_lambda_grid("0:1:0.1")?,
            (None, _) => vec![self.lambda.unwrap_or(0.3)],
        };
        if mode == Mode::Bench && self.lambda_grid.is_some() {
            return Err(Error::InvalidConfig("bench takes a single --lambda".into()));
        }
        if mode == Mode::Sweep && lambdas.len() < 2 {
            return Err(Error::InvalidConfig("sweep needs at least two lambda values".into()));
        }
        for &l in &lambdas {
            if !(0.0..=1.0).contains(&l) {
                return Err(Error::InvalidConfig(format!("lambda must lie in [0, 1], got {l}")));
            }
        }
        let default_k = if filter_mode { 2 } else { 4 };
        let k_values = match &self.k_grid {
            Some(g) if !g.is_empty() => g.clone(),
            Some(_) => return Err(Error::InvalidConfig("empty k grid".into())),
            None => vec![self.k.unwrap_or(default_k)],
        };
        let runs = self.runs.unwrap_or(if filter_mode { 1 } else { 100 });
        if runs < 1 {
            return Err(Error::InvalidConfig("runs must be at least 1".into()));
        }
        let thin = self.thin.unwrap_or(1);
        if thin < 1 {
            return Err(Error::InvalidConfig("thin must be at least 1".into()));
        }
        let beta = self.beta.unwrap_or(swarm::DEFAULT_BETA);
        let kind = self.topology.unwrap_or_default();
        let topologies = k_values
            .iter()
            .map(|&k| topology_for(kind, k, self.m, beta))
            .collect::<Result<Vec<_>>>()?;
        let objective = if filter_mode {
            "filter".to_owned()
        } else {
            self.objective.clone().unwrap_or_else(|| "f1".to_owned())
        };
        let config = ExperimentConfig {
            mode,
            objective,
            lambdas,
            topologies,
            swarm_size: self.n.unwrap_or(swarm::DEFAULT_SWARM_SIZE),
            dim: if filter_mode { filter::DIM } else { self.dim.unwrap_or(30) },
            iters: self
                .iters
                .unwrap_or(if filter_mode { 2000 } else { swarm::DEFAULT_MAX_ITER }),
            runs,
            base_seed: self.seed.unwrap_or(0),
            boundary: self.boundary.unwrap_or_default(),
            draw_mode: self.draw_mode.unwrap_or_default(),
            noise: self.noise.unwrap_or_default(),
            thin,
            pin_graph: self.pin_graph.unwrap_or(false),
            graph: self.graph.clone(),
            out: self.out.clone().unwrap_or_else(|| PathBuf::from("out")),
            eval_only: self.eval_only.unwrap_or(false),
            coeffs: self.coeffs.clone(),
        };
        config.objective_spec()?;
        for t in &config.topologies {
            HspsoConfig {
                swarm_size: config.swarm_size,
                topology: *t,
                max_iter: config.iters,
                ..HspsoConfig::default()
            }
            .validate()?;
            t.build_seeded(config.swarm_size, config.base_seed)?;
        }
        Ok(config)
    }
}

fn topology_for(kind: TopologyKind, k: usize, m: Option<usize>, beta: f64) -> Result<TopologySpec> {
    Ok(match kind {
        TopologyKind::Ring => TopologySpec::Ring { k },
        TopologyKind::SmallWorld => TopologySpec::SmallWorld { k, beta },
        TopologyKind::ScaleFree => {
            let m = match m {
                Some(m) => m,
                None if k % 2 == 0 => k / 2,
                None => {
                    return Err(Error::InvalidConfig(format!(
                        "scale-free mean degree must be even, got {k}"
                    )))
                }
            };
            TopologySpec::ScaleFree { m }
        }
    })
}

/// Parses `start:end:step` into an inclusive grid, rounded to 12 decimals.
pub fn parse_lambda_grid(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let bad = || Error::InvalidConfig(format!("lambda grid must be `start:end:step`, got `{spec}`"));
    let [a, b, s] = parts.as_slice() else {
        return Err(bad());
    };
    let (a, b, s): (f64, f64, f64) = (
        a.trim().parse().map_err(|_| bad())?,
        b.trim().parse().map_err(|_| bad())?,
        s.trim().parse().map_err(|_| bad())?,
    );
    if !(s > 0.0) || !(b >= a) {
        return Err(bad());
    }
    let count = ((b - a) / s + 1e-9).floor() as usize + 1;
    Ok((0..count)
        .map(|i| ((a + i as f64 * s) * 1e12).round() / 1e12)
        .collect())
}

/// Fully resolved command configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub objective: String,
    pub lambdas: Vec<f64>,
    pub topologies: Vec<TopologySpec>,
    pub swarm_size: usize,
    pub dim: usize,
    pub iters: usize,
    pub runs: usize,
    pub base_seed: u64,
    pub boundary: BoundaryPolicy,
    pub draw_mode: DrawMode,
    pub noise: NoiseMode,
    pub thin: usize,
    pub pin_graph: bool,
    pub graph: Option<PathBuf>,
    pub out: PathBuf,
    pub eval_only: bool,
    pub coeffs: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn objective_spec(&self) -> Result<ObjectiveSpec> {
        if self.objective == "filter" {
            return Ok(filter::filter_objective());
        }
        let bench: Benchmark = self.objective.parse()?;
        bench.objective_with(self.dim, self.noise)
    }

    pub fn run_seed(&self, run_id: usize) -> u64 {
        self.base_seed.wrapping_add(run_id as u64)
    }

    fn hspso(&self, lambda: f64, topology: TopologySpec, run_id: usize) -> HspsoConfig {
        HspsoConfig {
            swarm_size: self.swarm_size,
            lambda,
            max_iter: self.iters,
            topology,
            seed: self.run_seed(run_id),
            boundary: self.boundary,
            draw_mode: self.draw_mode,
            ..HspsoConfig::default()
        }
    }
}

/// Concurrency for a batch, from `HSPSO_THREADS`: unset means the rayon
/// default, `0` means sequential.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parallelism {
    Sequential,
    Threads(usize),
    Default,
}

impl Parallelism {
    pub fn from_env() -> Result<Self> {
        match std::env::var(THREADS_ENV) {
            Err(_) => Ok(Parallelism::Default),
            Ok(v) => match v.trim().parse::<usize>() {
                Ok(0) => Ok(Parallelism::Sequential),
                Ok(n) => Ok(Parallelism::Threads(n)),
                Err(_) => Err(Error::InvalidConfig(format!("{THREADS_ENV} must be an integer, got `{v}`"))),
            },
        }
    }
}

/// One unit of work in a batch.
#[derive(Debug, Clone)]
pub struct Job {
    pub run_id: usize,
    pub config: HspsoConfig,
    pub graph: Option<Arc<Graph>>,
}

/// Runs every job; results come back in job order.
pub fn execute(jobs: &[Job], objective: &ObjectiveSpec, parallelism: Parallelism) -> Result<Vec<RunResult>> {
    let one = |job: &Job| match &job.graph {
        Some(g) => swarm::run_on_graph(&job.config, objective, g.clone()),
        None => swarm::run(&job.config, objective),
    };
    match parallelism {
        Parallelism::Sequential => jobs.iter().map(one).collect(),
        Parallelism::Default => jobs.par_iter().map(one).collect(),
        Parallelism::Threads(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?
            .install(|| jobs.par_iter().map(one).collect()),
    }
}

/// One `(topology, λ)` cell of a batch with its runs ordered by `run_id`.
#[derive(Debug, Clone)]
pub struct Cell {
    pub topology: TopologySpec,
    pub lambda: f64,
    pub results: Vec<RunResult>,
}

impl Cell {
    pub fn stats(&self) -> Result<AggregateStats> {
        metrics::aggregate(&self.results)
    }
}

fn shared_graph(config: &ExperimentConfig, topology: &TopologySpec) -> Result<Option<Arc<Graph>>> {
    if let Some(path) = &config.graph {
        let g = Graph::from_edge_list(&fs::read_to_string(path)?)?;
        return Ok(Some(Arc::new(g)));
    }
    if config.pin_graph {
        let g = topology.build_seeded(config.swarm_size, config.base_seed)?;
        return Ok(Some(Arc::new(g)));
    }
    Ok(None)
}

/// Runs every `(k̄, λ, run)` combination, cells sorted by `(λ, k̄)`.
pub fn run_cells(
    config: &ExperimentConfig,
    objective: &ObjectiveSpec,
    parallelism: Parallelism,
) -> Result<Vec<Cell>> {
    let mut graphs = Vec::with_capacity(config.topologies.len());
    for t in &config.topologies {
        graphs.push(shared_graph(config, t)?);
    }
    let mut keys = Vec::new();
    for &lambda in &config.lambdas {
        for (ti, &topology) in config.topologies.iter().enumerate() {
            keys.push((lambda, ti, topology));
        }
    }
    keys.sort_by(|a, b| {
        a.0.total_cmp(&b.0)
            .then(a.2.mean_degree().cmp(&b.2.mean_degree()))
            .then(a.1.cmp(&b.1))
    });
    let mut jobs = Vec::with_capacity(keys.len() * config.runs);
    for &(lambda, ti, topology) in &keys {
        for run_id in 0..config.runs {
            jobs.push(Job {
                run_id,
                config: config.hspso(lambda, topology, run_id),
                graph: graphs[ti].clone(),
            });
        }
    }
    let mut results = execute(&jobs, objective, parallelism)?.into_iter();
    Ok(keys
        .into_iter()
        .map(|(lambda, _, topology)| Cell {
            topology,
            lambda,
            results: results.by_ref().take(config.runs).collect(),
        })
        .collect())
}

fn header(config: &ExperimentConfig, what: &str) -> String {
    let mut h = String::new();
    let _ = writeln!(h, "{CSV_VERSION_LINE}");
    let _ = writeln!(h, "# {what}");
    let _ = writeln!(
        h,
        "# rng={GENERATOR_NAME} seed=base_seed+run_id base_seed={}",
        config.base_seed
    );
    let _ = writeln!(
        h,
        "# objective={} n={} dim={} iters={} runs={} boundary={:?} draws={:?}",
        config.objective, config.swarm_size, config.dim, config.iters, config.runs, config.boundary, config.draw_mode
    );
    h
}

fn fmt_f(v: f64) -> String {
    format!("{v:e}")
}

/// Iterations written under thinning: every `thin`-th plus the last.
fn logged_iterations(len: usize, thin: usize) -> impl Iterator<Item = usize> {
    (0..len).filter(move |&t| t % thin == 0 || t + 1 == len)
}

/// `run_id,iter,best_fitness`.
pub fn per_run_csv(config: &ExperimentConfig, results: &[RunResult]) -> String {
    let mut out = header(config, "per-run global-best trajectories");
    out.push_str("run_id,iter,best_fitness\n");
    for (run_id, r) in results.iter().enumerate() {
        for t in logged_iterations(r.trajectory.len(), config.thin) {
            let _ = writeln!(out, "{run_id},{t},{}", fmt_f(r.trajectory[t]));
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunStatRow {
    pub topology: String,
    pub k: usize,
    pub lambda: f64,
    pub run_id: usize,
    pub seed: u64,
    pub r: f64,
    pub num_fi: u64,
    pub num_total: u64,
}

pub fn run_stat_rows(config: &ExperimentConfig, cells: &[Cell]) -> Vec<RunStatRow> {
    cells
        .iter()
        .flat_map(|c| {
            c.results.iter().enumerate().map(move |(run_id, r)| RunStatRow {
                topology: c.topology.kind().to_owned(),
                k: c.topology.mean_degree(),
                lambda: c.lambda,
                run_id,
                seed: config.run_seed(run_id),
                r: r.final_fitness,
                num_fi: r.num_fi,
                num_total: r.num_total,
            })
        })
        .collect()
}

pub fn run_stats_csv(config: &ExperimentConfig, rows: &[RunStatRow]) -> String {
    let mut out = header(config, "per-run final values and improvement counters");
    out.push_str("topology,k,lambda,run_id,seed,R,num_fi,num_total,p\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.topology,
            r.k,
            r.lambda,
            r.run_id,
            r.seed,
            fmt_f(r.r),
            r.num_fi,
            r.num_total,
            fmt_f(discovery_fraction(r.num_fi, r.num_total))
        );
    }
    out
}

fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.starts_with('#') && !l.trim().is_empty())
        .skip(1)
}

fn parse_field<T: std::str::FromStr>(field: Option<&str>, line: usize) -> Result<T> {
    field
        .and_then(|f| f.trim().parse().ok())
        .ok_or_else(|| Error::InvalidConfig(format!("malformed CSV at line {}", line + 1)))
}

pub fn parse_run_stats_csv(text: &str) -> Result<Vec<RunStatRow>> {
    data_lines(text)
        .map(|(i, line)| {
            let mut f = line.split(',');
            Ok(RunStatRow {
                topology: parse_field(f.next(), i)?,
                k: parse_field(f.next(), i)?,
                lambda: parse_field(f.next(), i)?,
                run_id: parse_field(f.next(), i)?,
                seed: parse_field(f.next(), i)?,
                r: parse_field(f.next(), i)?,
                num_fi: parse_field(f.next(), i)?,
                num_total: parse_field(f.next(), i)?,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub objective: String,
    pub topology: String,
    pub k: usize,
    pub lambda: f64,
    pub mean_r: f64,
    pub median_r: f64,
    pub std_r: f64,
    pub mean_p: f64,
    pub runs: usize,
    pub is_best: bool,
}

/// Aggregates per-run rows into one summary row per `(topology, k, λ)`,
/// flagging the lowest mean R for each `(topology, k)`.
pub fn summarize_rows(objective: &str, rows: &[RunStatRow]) -> Result<Vec<SummaryRow>> {
    let mut keys: Vec<(String, usize, f64)> = rows
        .iter()
        .map(|r| (r.topology.clone(), r.k, r.lambda))
        .collect();
    keys.sort_by(|a, b| a.2.total_cmp(&b.2).then(a.1.cmp(&b.1)).then(a.0.cmp(&b.0)));
    keys.dedup();
    let mut summary = Vec::with_capacity(keys.len());
    for (topology, k, lambda) in keys {
        let cell: Vec<&RunStatRow> = rows
            .iter()
            .filter(|r| r.topology == topology && r.k == k && r.lambda == lambda)
            .collect();
        let rs: Vec<f64> = cell.iter().map(|r| r.r).collect();
        let ps: Vec<f64> = cell.iter().map(|r| discovery_fraction(r.num_fi, r.num_total)).collect();
        let (mean_r, median_r, std_r, mean_p) = metrics::summarize(&rs, &ps)?;
        summary.push(SummaryRow {
            objective: objective.to_owned(),
            topology,
            k,
            lambda,
            mean_r,
            median_r,
            std_r,
            mean_p,
            runs: cell.len(),
            is_best: false,
        });
    }
    flag_best(&mut summary);
    Ok(summary)
}

fn flag_best(rows: &mut [SummaryRow]) {
    let mut groups: Vec<(String, usize)> = rows.iter().map(|r| (r.topology.clone(), r.k)).collect();
    groups.sort();
    groups.dedup();
    for (topology, k) in groups {
        let idx: Vec<usize> = (0..rows.len())
            .filter(|&i| rows[i].topology == topology && rows[i].k == k)
            .collect();
        for &i in &idx {
            rows[i].is_best = false;
        }
        let means: Vec<f64> = idx.iter().map(|&i| rows[i].mean_r).collect();
        if let Some(b) = metrics::argmin_mean(&means) {
            rows[idx[b]].is_best = true;
        }
    }
}

/// `objective,topology,k,lambda,mean_R,median_R,std_R,mean_p,runs`, plus a
/// trailing `best` column when `with_best`.
pub fn summary_csv(config: &ExperimentConfig, rows: &[SummaryRow], with_best: bool) -> String {
    let mut out = header(config, "summary per (topology, k, lambda)");
    out.push_str("objective,topology,k,lambda,mean_R,median_R,std_R,mean_p,runs");
    out.push_str(if with_best { ",best\n" } else { "\n" });
    for r in rows {
        let _ = write!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.objective,
            r.topology,
            r.k,
            r.lambda,
            fmt_f(r.mean_r),
            fmt_f(r.median_r),
            fmt_f(r.std_r),
            fmt_f(r.mean_p),
            r.runs
        );
        if with_best {
            let _ = write!(out, ",{}", u8::from(r.is_best));
        }
        out.push('\n');
    }
    out
}

pub fn parse_summary_csv(text: &str) -> Result<Vec<SummaryRow>> {
    data_lines(text)
        .map(|(i, line)| {
            let mut f = line.split(',');
            Ok(SummaryRow {
                objective: parse_field(f.next(), i)?,
                topology: parse_field(f.next(), i)?,
                k: parse_field(f.next(), i)?,
                lambda: parse_field(f.next(), i)?,
                mean_r: parse_field(f.next(), i)?,
                median_r: parse_field(f.next(), i)?,
                std_r: parse_field(f.next(), i)?,
                mean_p: parse_field(f.next(), i)?,
                runs: parse_field(f.next(), i)?,
                is_best: f.next().is_some_and(|v| v.trim() == "1"),
            })
        })
        .collect()
}

/// Recomputes the lowest-mean-R flags of reloaded summary rows.
pub fn reflag(rows: &[SummaryRow]) -> Vec<SummaryRow> {
    let mut rows = rows.to_vec();
    flag_best(&mut rows);
    rows
}

/// `topology,k,lambda,iter,mean_best_fitness`.
pub fn mean_trajectories_csv(config: &ExperimentConfig, cells: &[Cell]) -> Result<String> {
    let mut out = header(config, "pointwise mean global-best trajectory per cell");
    out.push_str("topology,k,lambda,iter,mean_best_fitness\n");
    for c in cells {
        let s = c.stats()?;
        for t in logged_iterations(s.mean_trajectory.len(), config.thin) {
            let _ = writeln!(
                out,
                "{},{},{},{t},{}",
                c.topology.kind(),
                c.topology.mean_degree(),
                c.lambda,
                fmt_f(s.mean_trajectory[t])
            );
        }
    }
    Ok(out)
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    let path = dir.join(name);
    fs::write(&path, contents)?;
    Ok(path)
}

#[derive(Debug, Clone)]
pub struct BenchOutput {
    pub files: Vec<PathBuf>,
    pub stats: AggregateStats,
    pub summary: SummaryRow,
}

/// Single-λ batch: `runs.csv`, `run_stats.csv`, `summary.csv`.
pub fn cmd_bench(config: &ExperimentConfig, parallelism: Parallelism) -> Result<BenchOutput> {
    if config.lambdas.len() != 1 || config.topologies.len() != 1 {
        return Err(Error::InvalidConfig("bench takes a single lambda and k".into()));
    }
    let objective = config.objective_spec()?;
    let cells = run_cells(config, &objective, parallelism)?;
    let cell = &cells[0];
    let stats = cell.stats()?;
    let stat_rows = run_stat_rows(config, &cells);
    let summary = summarize_rows(&config.objective, &stat_rows)?;

    fs::create_dir_all(&config.out)?;
    let files = vec![
        write_file(&config.out, "runs.csv", &per_run_csv(config, &cell.results))?,
        write_file(&config.out, "run_stats.csv", &run_stats_csv(config, &stat_rows))?,
        write_file(&config.out, "summary.csv", &summary_csv(config, &summary, false))?,
    ];
    Ok(BenchOutput {
        files,
        stats,
        summary: summary.into_iter().next().expect("one cell"),
    })
}

#[derive(Debug, Clone)]
pub struct SweepOutput {
    pub files: Vec<PathBuf>,
    pub rows: Vec<SummaryRow>,
}

/// λ (and optionally k̄) grid: `run_stats.csv`, `sweep.csv`, `trajectories.csv`.
pub fn cmd_sweep(config: &ExperimentConfig, parallelism: Parallelism) -> Result<SweepOutput> {
    if config.lambdas.len() < 2 {
        return Err(Error::InvalidConfig("sweep needs at least two lambda values".into()));
    }
    let objective = config.objective_spec()?;
    let cells = run_cells(config, &objective, parallelism)?;
    let stat_rows = run_stat_rows(config, &cells);
    let rows = summarize_rows(&config.objective, &stat_rows)?;

    fs::create_dir_all(&config.out)?;
    let files = vec![
        write_file(&config.out, "run_stats.csv", &run_stats_csv(config, &stat_rows))?,
        write_file(&config.out, "sweep.csv", &summary_csv(config, &rows, true))?,
        write_file(&config.out, "trajectories.csv", &mean_trajectories_csv(config, &cells)?)?,
    ];
    Ok(SweepOutput { files, rows })
}

/// Designed coefficients with their cost, written as JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientRecord {
    #[serde(flatten)]
    pub params: FilterParams,
    #[serde(rename = "J2")]
    pub j2: f64,
    pub feasible: bool,
    pub lambda: f64,
    pub topology: String,
    pub iterations: usize,
    pub seed: u64,
    pub generator: String,
}

#[derive(Debug, Clone)]
pub enum FilterOutput {
    Evaluated { params: FilterParams, j2: f64, feasible: bool },
    Designed { files: Vec<PathBuf>, record: CoefficientRecord, run_costs: Vec<f64> },
}

/// Reads a coefficient file (any JSON object carrying the 15 fields).
pub fn load_coefficients(path: &Path) -> Result<FilterParams> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

pub fn coefficients_json(params: &FilterParams) -> Result<String> {
    let mut s = serde_json::to_string_pretty(params)?;
    s.push('\n');
    Ok(s)
}

/// Designs a filter (best of `runs`), or with `eval_only` just scores the
/// coefficients in `coeffs`.
pub fn cmd_filter(config: &ExperimentConfig, parallelism: Parallelism) -> Result<FilterOutput> {
    let grid = FrequencyGrid::default();
    if config.eval_only {
        let path = config
            .coeffs
            .as_ref()
            .ok_or_else(|| Error::InvalidConfig("--eval-only needs --coeffs <file>".into()))?;
        let params = load_coefficients(path)?;
        let j2 = filter::cost(&params, &grid, 2.0)?;
        return Ok(FilterOutput::Evaluated {
            params,
            j2,
            feasible: filter::stability_feasible(&params),
        });
    }
    if config.lambdas.len() != 1 || config.topologies.len() != 1 {
        return Err(Error::InvalidConfig("filter takes a single lambda and k".into()));
    }
    let objective = filter::filter_objective_on(grid.clone());
    let cells = run_cells(config, &objective, parallelism)?;
    let cell = &cells[0];
    let run_costs: Vec<f64> = cell.results.iter().map(|r| r.final_fitness).collect();
    let best_run = metrics::argmin_mean(&run_costs).expect("at least one run");
    let best = &cell.results[best_run];
    let params = FilterParams::from_slice(&best.best_position)?;
    let record = CoefficientRecord {
        params,
        j2: best.final_fitness,
        feasible: filter::stability_feasible(&params),
        lambda: cell.lambda,
        topology: cell.topology.to_string(),
        iterations: best.iterations,
        seed: config.run_seed(best_run),
        generator: GENERATOR_NAME.to_owned(),
    };

    fs::create_dir_all(&config.out)?;
    let mut runs_csv = header(config, "final design cost per run");
    runs_csv.push_str("run_id,seed,J2,feasible\n");
    for (run_id, r) in cell.results.iter().enumerate() {
        let p = FilterParams::from_slice(&r.best_position)?;
        let _ = writeln!(
            runs_csv,
            "{run_id},{},{},{}",
            config.run_seed(run_id),
            fmt_f(r.final_fitness),
            u8::from(filter::stability_feasible(&p))
        );
    }
    let mut json = serde_json::to_string_pretty(&record)?;
    json.push('\n');
    let files = vec![
        write_file(&config.out, "coefficients.json", &json)?,
        write_file(&config.out, "amplitude.csv", &filter::response_csv(&params, &grid)?)?,
        write_file(&config.out, "filter_runs.csv", &runs_csv)?,
    ];
    Ok(FilterOutput::Designed { files, record, run_costs })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lambda_grid_parsing() {
        let g = parse_lambda_grid("0:1:0.1").unwrap();
        assert_eq!(g.len(), 11);
        assert_eq!(g[3], 0.3);
        assert_eq!(g[10], 1.0);
        assert_eq!(parse_lambda_grid("0:1:0.5").unwrap(), vec![0.0, 0.5, 1.0]);
        assert!(parse_lambda_grid("0:1").is_err());
        assert!(parse_lambda_grid("1:0:0.1").is_err());
        assert!(parse_lambda_grid("0:1:0").is_err());
    }

    #[test]
    fn resolve_defaults_per_mode() {
        let o = ExperimentOptions::default();
        let b = o.resolve(Mode::Bench).unwrap();
        assert_eq!((b.iters, b.runs, b.swarm_size, b.dim), (5000, 100, 50, 30));
        assert_eq!(b.topologies, vec![TopologySpec::Ring { k: 4 }]);
        let f = o.resolve(Mode::Filter).unwrap();
        assert_eq!((f.iters, f.lambdas.clone(), f.objective.as_str()), (2000, vec![0.3], "filter"));
        assert_eq!(f.topologies, vec![TopologySpec::Ring { k: 2 }]);
        assert_eq!(o.resolve(Mode::Sweep).unwrap().lambdas.len(), 11);
    }

    #[test]
    fn resolve_rejects_invalid() {
        let bad = ExperimentOptions { lambda: Some(1.2), ..Default::default() };
        assert!(bad.resolve(Mode::Bench).is_err());
        let bad = ExperimentOptions { objective: Some("f9".into()), ..Default::default() };
        assert!(bad.resolve(Mode::Bench).is_err());
        let bad = ExperimentOptions { k: Some(3), ..Default::default() };
        assert!(bad.resolve(Mode::Bench).is_err());
        let bad = ExperimentOptions { runs: Some(0), ..Default::default() };
        assert!(bad.resolve(Mode::Bench).is_err());
        let bad = ExperimentOptions { lambda_grid: Some("0:0:0.1".into()), ..Default::default() };
        assert!(bad.resolve(Mode::Sweep).is_err());
    }

    #[test]
    fn flags_override_file() {
        let file: ExperimentOptions =
            serde_json::from_str(r#"{"objective":"f5","lambda":0.2,"runs":7,"topology":"small-world"}"#).unwrap();
        let flags = ExperimentOptions { lambda: Some(0.6), ..Default::default() };
        let merged = file.overridden_by(flags);
        assert_eq!(merged.objective.as_deref(), Some("f5"));
        assert_eq!(merged.lambda, Some(0.6));
        assert_eq!(merged.runs, Some(7));
        assert_eq!(merged.topology, Some(TopologyKind::SmallWorld));
        assert!(serde_json::from_str::<ExperimentOptions>(r#"{"lamda":0.2}"#).is_err());
    }

    #[test]
    fn scale_free_degree_maps_to_attachment() {
        let o = ExperimentOptions {
            topology: Some(TopologyKind::ScaleFree),
            k_grid: Some(vec![2, 4, 10]),
            ..Default::default()
        };
        let c = o.resolve(Mode::Sweep).unwrap();
        assert_eq!(
            c.topologies,
            vec![
                TopologySpec::ScaleFree { m: 1 },
                TopologySpec::ScaleFree { m: 2 },
                TopologySpec::ScaleFree { m: 5 }
            ]
        );
    }

    #[test]
    fn summary_flags_best_per_group() {
        let row = |k, lambda, r| RunStatRow {
            topology: "ring".into(),
            k,
            lambda,
            run_id: 0,
            seed: 0,
            r,
            num_fi: 1,
            num_total: 2,
        };
        let rows = vec![row(2, 0.0, 3.0), row(2, 0.5, 1.0), row(4, 0.0, 0.5), row(4, 0.5, 2.0)];
        let s = summarize_rows("f1", &rows).unwrap();
        let best: Vec<(usize, f64)> = s.iter().filter(|r| r.is_best).map(|r| (r.k, r.lambda)).collect();
        assert_eq!(best, vec![(4, 0.0), (2, 0.5)]);
        assert_eq!(s.iter().map(|r| r.lambda).collect::<Vec<_>>(), vec![0.0, 0.0, 0.5, 0.5]);
        assert_eq!(reflag(&s), s);
    }

    #[test]
    fn thinning_keeps_last_iteration() {
        let v: Vec<usize> = logged_iterations(26, 10).collect();
        assert_eq!(v, vec![0, 10, 20, 25]);
    }
}
