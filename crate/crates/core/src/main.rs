use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use hspso::experiment::{
    self, ExperimentOptions, FilterOutput, Mode, Parallelism, TopologyKind,
};
use hspso::objective::NoiseMode;
use hspso::swarm::{BoundaryPolicy, DrawMode};

#[derive(Parser)]
#[command(name = "hspso", version, about = "Heterogeneous-strategy particle swarm experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Repeated seeded runs at one lambda.
    Bench(Flags),
    /// Lambda (and optional k) grid of batches.
    Sweep(Flags),
    /// Design the 2-D recursive filter, or score given coefficients.
    Filter(Flags),
}

#[derive(Args)]
struct Flags {
    /// JSON file with any of the options below; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// f1..f6.
    #[arg(long)]
    objective: Option<String>,
    #[arg(long)]
    lambda: Option<f64>,
    /// start:end:step, inclusive.
    #[arg(long)]
    lambda_grid: Option<String>,
    #[arg(long, value_parser = parse_topology)]
    topology: Option<TopologyKind>,
    /// Mean degree.
    #[arg(long)]
    k: Option<usize>,
    /// Comma-separated mean degrees for a sweep.
    #[arg(long, value_delimiter = ',')]
    k_grid: Option<Vec<usize>>,
    /// Small-world rewiring probability.
    #[arg(long)]
    beta: Option<f64>,
    /// Scale-free attachments per node (default k/2).
    #[arg(long)]
    m: Option<usize>,
    /// Swarm size.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    iters: Option<usize>,
    #[arg(long)]
    runs: Option<usize>,
    /// Base seed; run r uses seed + r.
    #[arg(long)]
    seed: Option<u64>,
    /// skip | clamp.
    #[arg(long, value_parser = parse_boundary)]
    boundary: Option<BoundaryPolicy>,
    /// per-dimension | per-particle random gains.
    #[arg(long, value_parser = parse_draws)]
    draws: Option<DrawMode>,
    /// f3 noise: per-term | per-evaluation.
    #[arg(long, value_parser = parse_noise)]
    noise: Option<NoiseMode>,
    /// Log every n-th iteration in trajectory files.
    #[arg(long)]
    thin: Option<usize>,
    /// Reuse one graph (from the base seed) for every run.
    #[arg(long)]
    pin_graph: bool,
    /// Edge-list file to use as the communication graph.
    #[arg(long)]
    graph: Option<PathBuf>,
    /// Write the graph of the base seed as an edge list and continue.
    #[arg(long)]
    export_graph: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Score --coeffs without optimizing (filter only).
    #[arg(long)]
    eval_only: bool,
    /// JSON coefficient file.
    #[arg(long)]
    coeffs: Option<PathBuf>,
}

fn parse_topology(s: &str) -> Result<TopologyKind, String> {
    s.parse().map_err(|e: hspso::Error| e.to_string())
}

fn parse_boundary(s: &str) -> Result<BoundaryPolicy, String> {
    match s {
        "skip" => Ok(BoundaryPolicy::Skip),
        "clamp" => Ok(BoundaryPolicy::Clamp),
        _ => Err(format!("expected skip or clamp, got `{s}`")),
    }
}

fn parse_draws(s: &str) -> Result<DrawMode, String> {
    match s {
        "per-dimension" => Ok(DrawMode::PerDimension),
        "per-particle" => Ok(DrawMode::PerParticle),
        _ => Err(format!("expected per-dimension or per-particle, got `{s}`")),
    }
}

fn parse_noise(s: &str) -> Result<NoiseMode, String> {
    match s {
        "per-term" => Ok(NoiseMode::PerTerm),
        "per-evaluation" => Ok(NoiseMode::PerEvaluation),
        _ => Err(format!("expected per-term or per-evaluation, got `{s}`")),
    }
}

impl Flags {
    fn options(&self) -> Result<ExperimentOptions> {
        let base = match &self.config {
            Some(path) => ExperimentOptions::from_json_file(path)
                .with_context(|| format!("reading config {}", path.display()))?,
            None => ExperimentOptions::default(),
        };
        let flags = ExperimentOptions {
            objective: self.objective.clone(),
            lambda: self.lambda,
            lambda_grid: self.lambda_grid.clone(),
            topology: self.topology,
            k: self.k,
            k_grid: self.k_grid.clone(),
            beta: self.beta,
            m: self.m,
            n: self.n,
            dim: self.dim,
            iters: self.iters,
            runs: self.runs,
            seed: self.seed,
            boundary: self.boundary,
            draw_mode: self.draws,
            noise: self.noise,
            thin: self.thin,
            pin_graph: self.pin_graph.then_some(true),
            graph: self.graph.clone(),
            out: self.out.clone(),
            eval_only: self.eval_only.then_some(true),
            coeffs: self.coeffs.clone(),
        };
        Ok(base.overridden_by(flags))
    }
}

fn run(cli: Cli) -> Result<()> {
    let (mode, flags) = match &cli.command {
        Command::Bench(f) => (Mode::Bench, f),
        Command::Sweep(f) => (Mode::Sweep, f),
        Command::Filter(f) => (Mode::Filter, f),
    };
    let config = flags.options()?.resolve(mode)?;
    let parallelism = Parallelism::from_env()?;

    if let Some(path) = &flags.export_graph {
        let g = config.topologies[0].build_seeded(config.swarm_size, config.base_seed)?;
        std::fs::write(path, g.to_edge_list())
            .with_context(|| format!("writing graph {}", path.display()))?;
    }

    match mode {
        Mode::Bench => {
            let out = experiment::cmd_bench(&config, parallelism)?;
            println!(
                "{} lambda={} runs={} mean_R={:e} median_R={:e} std_R={:e} mean_p={:.4}",
                config.objective,
                config.lambdas[0],
                out.stats.runs,
                out.stats.mean_r,
                out.stats.median_r,
                out.stats.std_r,
                out.stats.mean_p
            );
            for f in out.files {
                println!("wrote {}", f.display());
            }
        }
        Mode::Sweep => {
            let out = experiment::cmd_sweep(&config, parallelism)?;
            for r in out.rows.iter().filter(|r| r.is_best) {
                println!(
                    "{} {} k={} best lambda={} mean_R={:e} mean_p={:.4}",
                    r.objective, r.topology, r.k, r.lambda, r.mean_r, r.mean_p
                );
            }
            for f in out.files {
                println!("wrote {}", f.display());
            }
        }
        Mode::Filter => match experiment::cmd_filter(&config, parallelism)? {
            FilterOutput::Evaluated { j2, feasible, .. } => {
                println!("J2={j2:e} feasible={feasible}");
            }
            FilterOutput::Designed { files, record, .. } => {
                println!("J2={:e} feasible={} seed={}", record.j2, record.feasible, record.seed);
                for f in files {
                    println!("wrote {}", f.display());
                }
            }
        },
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
