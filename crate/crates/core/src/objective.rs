//! Benchmark objectives and the evaluation interface shared by every problem
//! the swarm can optimize (all minimization).

use std::f64::consts::{E, PI};
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::rng::UnitSource;

type EvalFn = dyn Fn(&[f64], &mut dyn UnitSource) -> f64 + Send + Sync;

/// A named box-bounded objective.
///
/// Deterministic objectives ignore the noise source passed to
/// [`evaluate`](Self::evaluate); stochastic ones draw from it in a fixed order.
#[derive(Clone)]
pub struct ObjectiveSpec {
    name: String,
    lower: Vec<f64>,
    upper: Vec<f64>,
    stochastic: bool,
    eval: Arc<EvalFn>,
}

impl fmt::Debug for ObjectiveSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ObjectiveSpec")
            .field("name", &self.name)
            .field("dim", &self.dim())
            .field("stochastic", &self.stochastic)
            .finish_non_exhaustive()
    }
}

impl ObjectiveSpec {
    pub fn new<F>(
        name: impl Into<String>,
        lower: Vec<f64>,
        upper: Vec<f64>,
        stochastic: bool,
        eval: F,
    ) -> Result<Self>
    where
        F: Fn(&[f64], &mut dyn UnitSource) -> f64 + Send + Sync + 'static,
    {
        let name = name.into();
        if lower.is_empty() || lower.len() != upper.len() {
            return Err(Error::InvalidObjective(format!(
                "`{name}`: bounds must be non-empty and of equal length"
            )));
        }
        if let Some(d) = (0..lower.len()).find(|&d| !(lower[d] < upper[d])) {
            return Err(Error::InvalidObjective(format!(
                "`{name}`: lower[{d}] = {} is not below upper[{d}] = {}",
                lower[d], upper[d]
            )));
        }
        Ok(Self {
            name,
            lower,
            upper,
            stochastic,
            eval: Arc::new(eval),
        })
    }

    /// Same bounds `[lo, hi]` in every dimension.
    pub fn uniform_box<F>(
        name: impl Into<String>,
        dim: usize,
        lo: f64,
        hi: f64,
        stochastic: bool,
        eval: F,
    ) -> Result<Self>
    where
        F: Fn(&[f64], &mut dyn UnitSource) -> f64 + Send + Sync + 'static,
    {
        Self::new(name, vec![lo; dim], vec![hi; dim], stochastic, eval)
    }

    /// Resolves `"f1"`..`"f6"` to the benchmark of that dimension and
    /// `"filter"` to the 15-dimensional filter-design objective.
    pub fn by_name(name: &str, dim: usize) -> Result<Self> {
        if name == "filter" {
            return Ok(crate::filter::filter_objective());
        }
        let bench: Benchmark = name.parse()?;
        bench.objective(dim)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn is_stochastic(&self) -> bool {
        self.stochastic
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(v, (lo, hi))| lo <= v && v <= hi)
    }

    pub fn evaluate(&self, x: &[f64], noise: &mut dyn UnitSource) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                objective: self.name.clone(),
                expected: self.dim(),
                actual: x.len(),
            });
        }
        Ok((self.eval)(x, noise))
    }
}

/// How the quartic objective adds its uniform noise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseMode {
    /// One draw per summand, in index order.
    #[default]
    PerTerm,
    /// One draw per evaluation.
    PerEvaluation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Benchmark {
    Sphere,
    Rosenbrock,
    QuarticNoise,
    Ackley,
    Rastrigin,
    Griewank,
}

impl Benchmark {
    pub const ALL: [Benchmark; 6] = [
        Benchmark::Sphere,
        Benchmark::Rosenbrock,
        Benchmark::QuarticNoise,
        Benchmark::Ackley,
        Benchmark::Rastrigin,
        Benchmark::Griewank,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Benchmark::Sphere => "f1",
            Benchmark::Rosenbrock => "f2",
            Benchmark::QuarticNoise => "f3",
            Benchmark::Ackley => "f4",
            Benchmark::Rastrigin => "f5",
            Benchmark::Griewank => "f6",
        }
    }

    /// Per-dimension search range.
    pub fn range(self) -> (f64, f64) {
        match self {
            Benchmark::Sphere => (-100.0, 100.0),
            Benchmark::Rosenbrock => (-30.0, 30.0),
            Benchmark::QuarticNoise => (-1.28, 1.28),
            Benchmark::Ackley => (-32.0, 32.0),
            Benchmark::Rastrigin => (-5.12, 5.12),
            Benchmark::Griewank => (-600.0, 600.0),
        }
    }

    /// Analytic global minimizer in `dim` dimensions (noise-free for f3).
    pub fn minimizer(self, dim: usize) -> Vec<f64> {
        match self {
            Benchmark::Rosenbrock => vec![1.0; dim],
            _ => vec![0.0; dim],
        }
    }

    pub fn objective(self, dim: usize) -> Result<ObjectiveSpec> {
        self.objective_with(dim, NoiseMode::default())
    }

    pub fn objective_with(self, dim: usize, noise: NoiseMode) -> Result<ObjectiveSpec> {
        if dim == 0 {
            return Err(Error::InvalidObjective("dimension must be positive".into()));
        }
        if self == Benchmark::Rosenbrock && dim < 2 {
            return Err(Error::InvalidObjective("f2 needs at least two dimensions".into()));
        }
        let (lo, hi) = self.range();
        let id = self.id();
        match self {
            Benchmark::Sphere => ObjectiveSpec::uniform_box(id, dim, lo, hi, false, |x, _| sphere(x)),
            Benchmark::Rosenbrock => {
                ObjectiveSpec::uniform_box(id, dim, lo, hi, false, |x, _| rosenbrock(x))
            }
            Benchmark::QuarticNoise => ObjectiveSpec::uniform_box(id, dim, lo, hi, true, move |x, rng| {
                match noise {
                    NoiseMode::PerTerm => quartic_noise(x, rng),
                    NoiseMode::PerEvaluation => quartic_noise_single(x, rng),
                }
            }),
            Benchmark::Ackley => ObjectiveSpec::uniform_box(id, dim, lo, hi, false, |x, _| ackley(x)),
            Benchmark::Rastrigin => {
                ObjectiveSpec::uniform_box(id, dim, lo, hi, false, |x, _| rastrigin(x))
            }
            Benchmark::Griewank => ObjectiveSpec::uniform_box(id, dim, lo, hi, false, |x, _| griewank(x)),
        }
    }
}

impl fmt::Display for Benchmark {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl std::str::FromStr for Benchmark {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Benchmark::ALL
            .into_iter()
            .find(|b| b.id() == s)
            .ok_or_else(|| Error::UnknownObjective(s.to_owned()))
    }
}

pub fn sphere(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

pub fn rosenbrock(x: &[f64]) -> f64 {
    x.windows(2)
        .map(|w| {
            let a = w[1] - w[0] * w[0];
            let b = w[0] - 1.0;
            100.0 * a * a + b * b
        })
        .sum()
}

/// `Σ i·x_i⁴ + u_i` with one `u_i ~ U[0, 1)` per term, drawn in index order.
pub fn quartic_noise<R: UnitSource + ?Sized>(x: &[f64], rng: &mut R) -> f64 {
    x.iter()
        .enumerate()
        .map(|(i, v)| (i + 1) as f64 * v.powi(4) + rng.next_unit())
        .sum()
}

/// `Σ i·x_i⁴ + u` with a single draw per evaluation.
pub fn quartic_noise_single<R: UnitSource + ?Sized>(x: &[f64], rng: &mut R) -> f64 {
    let base: f64 = x.iter().enumerate().map(|(i, v)| (i + 1) as f64 * v.powi(4)).sum();
    base + rng.next_unit()
}

pub fn ackley(x: &[f64]) -> f64 {
    let d = x.len() as f64;
    let sq: f64 = x.iter().map(|v| v * v).sum();
    let cs: f64 = x.iter().map(|v| (2.0 * PI * v).cos()).sum();
    // grouped so that both pairs cancel exactly at the origin
    (20.0 - 20.0 * (-0.2 * (sq / d).sqrt()).exp()) + (E - (cs / d).exp())
}

pub fn rastrigin(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v - 10.0 * (2.0 * PI * v).cos() + 10.0).sum()
}

pub fn griewank(x: &[f64]) -> f64 {
    let sq: f64 = x.iter().map(|v| v * v).sum();
    let prod: f64 = x
        .iter()
        .enumerate()
        .map(|(i, v)| (v / ((i + 1) as f64).sqrt()).cos())
        .product();
    sq / 4000.0 - prod + 1.0
}
