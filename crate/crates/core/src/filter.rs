//! Second-order 2-D recursive (IIR) lowpass design.
//!
//! The transfer function is
//!
//! ```text
//! H(z1, z2) = H0 · Σ_{i,j=0..2} a_ij z1^i z2^j / Π_{l=1,2} (1 + b_l z1 + c_l z2 + d_l z1 z2)
//! ```
//!
//! with `a00 = 1` and `z = e^{−jω}`. The design cost compares `|H|` against a
//! circularly symmetric three-level target on an inclusive `(N1+1)×(N2+1)`
//! grid over `[0, π]²`.

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::objective::ObjectiveSpec;
use crate::summation::CompensatedSum;

/// Denominator magnitude below which an evaluation point counts as a pole.
pub const DENOMINATOR_FLOOR: f64 = 1e-12;
/// Base cost of any design that violates the stability conditions.
pub const PENALTY_BASE: f64 = 1e6;
pub const COEFF_BOUND: f64 = 3.0;
pub const DIM: usize = 15;

/// Field names in vector order.
pub const FIELD_NAMES: [&str; DIM] = [
    "a01", "a02", "a10", "a11", "a12", "a20", "a21", "a22", "b1", "b2", "c1", "c2", "d1", "d2",
    "H0",
];

/// Free coefficients of the filter. `a00` is fixed at 1 and not stored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterParams {
    pub a01: f64,
    pub a02: f64,
    pub a10: f64,
    pub a11: f64,
    pub a12: f64,
    pub a20: f64,
    pub a21: f64,
    pub a22: f64,
    pub b1: f64,
    pub b2: f64,
    pub c1: f64,
    pub c2: f64,
    pub d1: f64,
    pub d2: f64,
    #[serde(rename = "H0")]
    pub h0: f64,
}

impl FilterParams {
    /// Unity all-pass: `H ≡ 1`.
    pub fn identity() -> Self {
        Self::from_vector(&[0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0])
    }

    /// Layout `[a01, a02, a10, a11, a12, a20, a21, a22, b1, b2, c1, c2, d1, d2, H0]`.
    pub fn from_vector(x: &[f64; DIM]) -> Self {
        Self {
            a01: x[0],
            a02: x[1],
            a10: x[2],
            a11: x[3],
            a12: x[4],
            a20: x[5],
            a21: x[6],
            a22: x[7],
            b1: x[8],
            b2: x[9],
            c1: x[10],
            c2: x[11],
            d1: x[12],
            d2: x[13],
            h0: x[14],
        }
    }

    pub fn from_slice(x: &[f64]) -> Result<Self> {
        let arr: &[f64; DIM] = x.try_into().map_err(|_| Error::DimensionMismatch {
            objective: "filter".into(),
            expected: DIM,
            actual: x.len(),
        })?;
        Ok(Self::from_vector(arr))
    }

    pub fn to_vector(&self) -> [f64; DIM] {
        [
            self.a01, self.a02, self.a10, self.a11, self.a12, self.a20, self.a21, self.a22,
            self.b1, self.b2, self.c1, self.c2, self.d1, self.d2, self.h0,
        ]
    }

    /// Numerator coefficients `a[i][j]` including `a00 = 1`.
    pub fn numerator(&self) -> [[f64; 3]; 3] {
        [
            [1.0, self.a01, self.a02],
            [self.a10, self.a11, self.a12],
            [self.a20, self.a21, self.a22],
        ]
    }

    /// `(b_l, c_l, d_l)` for the two denominator sections.
    pub fn sections(&self) -> [(f64, f64, f64); 2] {
        [(self.b1, self.c1, self.d1), (self.b2, self.c2, self.d2)]
    }
}

/// Published coefficient sets used as evaluation references, as
/// `(label, params)` with labels NN, GA, SIPSO, FIPSO, HSPSO.
pub fn reference_designs() -> [(&'static str, FilterParams); 5] {
    [
        (
            "NN",
            FilterParams::from_vector(&[
                1.8922, -1.2154, 0.0387, -2.5298, 0.3879, 0.6115, -1.4619, 2.5206, -0.8707,
                -0.8729, -0.8705, -0.8732, 0.7756, 0.7799, 0.0010,
            ]),
        ),
        (
            "GA",
            FilterParams::from_vector(&[
                1.8162, -1.1060, 0.0712, -2.5132, 0.4279, 0.5926, -1.3690, 2.4326, -0.8662,
                -0.8907, -0.8531, -0.8388, 0.7346, 0.8025, 0.0009,
            ]),
        ),
        (
            "SIPSO",
            FilterParams::from_vector(&[
                0.3801, 0.2545, -0.1083, 0.4721, -0.8995, 0.5398, -1.2448, 2.3634, -0.7536,
                -0.3749, -0.7789, -0.4028, 0.5816, -0.1003, 0.0028,
            ]),
        ),
        (
            "FIPSO",
            FilterParams::from_vector(&[
                -0.0380, 0.5724, 0.6357, -0.4270, 0.3376, 0.7397, -0.0664, 1.2504, -0.4355,
                -0.4537, -0.5386, -0.3609, 0.0791, -0.0694, 0.0039,
            ]),
        ),
        (
            "HSPSO",
            FilterParams::from_vector(&[
                -2.104, -1.5145, -2.2828, 2.7886, 1.5839, -1.2061, 1.1080, -2.7257, -0.9260,
                -0.4123, -0.9376, -0.2998, 0.8846, -0.1859, 0.0007,
            ]),
        ),
    ]
}

pub fn reference_design(label: &str) -> Option<FilterParams> {
    reference_designs()
        .into_iter()
        .find(|(l, _)| l.eq_ignore_ascii_case(label))
        .map(|(_, p)| p)
}

/// `z1^i z2^j` for `i, j ∈ {0, 1, 2}`, row-major in `i`.
type Powers = [Complex64; 9];

fn powers(w1: f64, w2: f64) -> Powers {
    let z1 = Complex64::from_polar(1.0, -w1);
    let z2 = Complex64::from_polar(1.0, -w2);
    let p1 = [Complex64::new(1.0, 0.0), z1, z1 * z1];
    let p2 = [Complex64::new(1.0, 0.0), z2, z2 * z2];
    let mut out = [Complex64::new(0.0, 0.0); 9];
    for i in 0..3 {
        for j in 0..3 {
            out[3 * i + j] = p1[i] * p2[j];
        }
    }
    out
}

/// `|H|` from precomputed powers, or the smallest section magnitude when it
/// falls below the floor.
fn amplitude_from_powers(params: &FilterParams, pw: &Powers) -> std::result::Result<f64, f64> {
    let a = params.numerator();
    let mut num = Complex64::new(0.0, 0.0);
    for i in 0..3 {
        for j in 0..3 {
            num += a[i][j] * pw[3 * i + j];
        }
    }
    let (z1, z2, z12) = (pw[3], pw[1], pw[4]);
    let mut den_sq = 1.0;
    for (b, c, d) in params.sections() {
        let section = 1.0 + b * z1 + c * z2 + d * z12;
        let sq = section.norm_sqr();
        if sq < DENOMINATOR_FLOOR * DENOMINATOR_FLOOR {
            return Err(sq.sqrt());
        }
        den_sq *= sq;
    }
    if den_sq < DENOMINATOR_FLOOR * DENOMINATOR_FLOOR {
        return Err(den_sq.sqrt());
    }
    Ok(params.h0.abs() * (num.norm_sqr() / den_sq).sqrt())
}

pub fn amplitude(params: &FilterParams, w1: f64, w2: f64) -> Result<f64> {
    amplitude_from_powers(params, &powers(w1, w2))
        .map_err(|magnitude| Error::UnstablePoint { w1, w2, magnitude })
}

/// Target response: 1 inside radius `0.08π`, 0.5 up to `0.12π`, 0 beyond.
pub fn desired(w1: f64, w2: f64) -> f64 {
    let r = (w1 * w1 + w2 * w2).sqrt();
    if r <= 0.08 * PI {
        1.0
    } else if r <= 0.12 * PI {
        0.5
    } else {
        0.0
    }
}

/// Inclusive frequency grid `ω = (π l1 / N1, π l2 / N2)`.
#[derive(Debug, Clone)]
pub struct FrequencyGrid {
    n1: usize,
    n2: usize,
    powers: Vec<Powers>,
    target: Vec<f64>,
}

impl Default for FrequencyGrid {
    fn default() -> Self {
        Self::new(50, 50).expect("default grid is valid")
    }
}

impl FrequencyGrid {
    pub fn new(n1: usize, n2: usize) -> Result<Self> {
        if n1 == 0 || n2 == 0 {
            return Err(Error::InvalidConfig("grid resolutions must be positive".into()));
        }
        let mut powers_ = Vec::with_capacity((n1 + 1) * (n2 + 1));
        let mut target = Vec::with_capacity((n1 + 1) * (n2 + 1));
        for l1 in 0..=n1 {
            for l2 in 0..=n2 {
                let (w1, w2) = Self::omega(n1, n2, l1, l2);
                powers_.push(powers(w1, w2));
                target.push(lattice_target(n1, n2, l1, l2));
            }
        }
        Ok(Self {
            n1,
            n2,
            powers: powers_,
            target,
        })
    }

    fn omega(n1: usize, n2: usize, l1: usize, l2: usize) -> (f64, f64) {
        (PI * l1 as f64 / n1 as f64, PI * l2 as f64 / n2 as f64)
    }

    pub fn resolution(&self) -> (usize, usize) {
        (self.n1, self.n2)
    }

    pub fn len(&self) -> usize {
        self.target.len()
    }

    pub fn is_empty(&self) -> bool {
        self.target.is_empty()
    }

    /// Grid points `(l1, l2, ω1, ω2)` in row-major order.
    pub fn points(&self) -> impl Iterator<Item = (usize, usize, f64, f64)> + '_ {
        let (n1, n2) = (self.n1, self.n2);
        (0..=n1).flat_map(move |l1| {
            (0..=n2).map(move |l2| {
                let (w1, w2) = Self::omega(n1, n2, l1, l2);
                (l1, l2, w1, w2)
            })
        })
    }

    /// Target value at every point, row-major.
    pub fn targets(&self) -> &[f64] {
        &self.target
    }

    /// `|H|` at every point, row-major.
    pub fn response(&self, params: &FilterParams) -> Result<Vec<f64>> {
        self.powers
            .iter()
            .zip(self.points())
            .map(|(pw, (_, _, w1, w2))| {
                amplitude_from_powers(params, pw)
                    .map_err(|magnitude| Error::UnstablePoint { w1, w2, magnitude })
            })
            .collect()
    }

    /// Terms `|M − Md|^p` in row-major order.
    fn terms<'a>(
        &'a self,
        params: &'a FilterParams,
        p: f64,
    ) -> impl Iterator<Item = Result<f64>> + 'a {
        self.powers
            .iter()
            .zip(&self.target)
            .zip(self.points())
            .map(move |((pw, md), (_, _, w1, w2))| {
                let m = amplitude_from_powers(params, pw)
                    .map_err(|magnitude| Error::UnstablePoint { w1, w2, magnitude })?;
                let e = (m - md).abs();
                Ok(if p == 2.0 { e * e } else { e.powf(p) })
            })
    }
}

/// Target value at a grid point, decided in exact integer arithmetic:
/// `r ≤ 0.08π ⇔ 625 (l1² N2² + l2² N1²) ≤ 4 N1² N2²`, and `0.12π` uses 9.
fn lattice_target(n1: usize, n2: usize, l1: usize, l2: usize) -> f64 {
    let (n1, n2, l1, l2) = (n1 as u128, n2 as u128, l1 as u128, l2 as u128);
    let lhs = 625 * (l1 * l1 * n2 * n2 + l2 * l2 * n1 * n1);
    let scale = n1 * n1 * n2 * n2;
    if lhs <= 4 * scale {
        1.0
    } else if lhs <= 9 * scale {
        0.5
    } else {
        0.0
    }
}

/// `J_p = Σ |M − Md|^p` over the grid, accumulated with compensated summation.
pub fn cost(params: &FilterParams, grid: &FrequencyGrid, p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::InvalidConfig(format!("cost exponent must be >= 1, got {p}")));
    }
    let mut acc = CompensatedSum::new();
    for term in grid.terms(params, p) {
        acc.add(term?);
    }
    Ok(acc.value())
}

/// Same sum traversed from the last grid point to the first.
pub fn cost_reversed(params: &FilterParams, grid: &FrequencyGrid, p: f64) -> Result<f64> {
    let terms: Vec<f64> = grid.terms(params, p).collect::<Result<_>>()?;
    let mut acc = CompensatedSum::new();
    for t in terms.into_iter().rev() {
        acc.add(t);
    }
    Ok(acc.value())
}

/// The four stability margins `d_l − (|b_l + c_l| − 1)` and
/// `(1 − |b_l − c_l|) − d_l` for `l = 1, 2`. Feasible iff all are positive.
pub fn stability_margins(params: &FilterParams) -> [f64; 4] {
    let [(b1, c1, d1), (b2, c2, d2)] = params.sections();
    [
        d1 - ((b1 + c1).abs() - 1.0),
        (1.0 - (b1 - c1).abs()) - d1,
        d2 - ((b2 + c2).abs() - 1.0),
        (1.0 - (b2 - c2).abs()) - d2,
    ]
}

pub fn stability_feasible(params: &FilterParams) -> bool {
    stability_margins(params).iter().all(|&m| m > 0.0)
}

/// Total magnitude by which the stability inequalities are violated.
pub fn stability_violation(params: &FilterParams) -> f64 {
    stability_margins(params).iter().map(|&m| (-m).max(0.0)).sum()
}

/// Penalized design cost on the default grid with `p = 2`.
pub fn penalized_cost(params: &FilterParams, grid: &FrequencyGrid) -> f64 {
    if !stability_feasible(params) {
        return PENALTY_BASE + stability_violation(params);
    }
    cost(params, grid, 2.0).unwrap_or(PENALTY_BASE)
}

/// The filter design problem over `[−3, 3]^15`.
pub fn filter_objective() -> ObjectiveSpec {
    filter_objective_on(FrequencyGrid::default())
}

pub fn filter_objective_on(grid: FrequencyGrid) -> ObjectiveSpec {
    ObjectiveSpec::uniform_box("filter", DIM, -COEFF_BOUND, COEFF_BOUND, false, move |x, _| {
        let params = FilterParams::from_slice(x).expect("dimension checked by evaluate");
        penalized_cost(&params, &grid)
    })
    .expect("filter bounds are valid")
}

/// Row-major CSV of `|H|` on the grid: one row per `l1`, one column per `l2`.
pub fn response_csv(params: &FilterParams, grid: &FrequencyGrid) -> Result<String> {
    let values = grid.response(params)?;
    let (_, n2) = grid.resolution();
    let mut out = String::from("# hspso-csv v1\n# amplitude response |H|, rows l1 = 0..N1, cols l2 = 0..N2, w = pi*l/N\n");
    for row in values.chunks(n2 + 1) {
        let line: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
        let _ = writeln!(out, "{}", line.join(","));
    }
    Ok(out)
}
