//! Discrete distribution `f_1..f_N`, initial data and moment functionals.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ModelParams;

/// Cell values on the uniform grid. Cell `i` (1-based) is stored at `values[i - 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    values: Vec<f64>,
    h: f64,
}

impl State {
    pub fn zeros(n_cells: usize, h: f64) -> Self {
        State {
            values: vec![0.0; n_cells],
            h,
        }
    }

    pub fn from_values(values: Vec<f64>, h: f64) -> Self {
        State { values, h }
    }

    /// Zero state with `value` at each listed cell (1-based).
    pub fn point_masses(n_cells: usize, h: f64, masses: &[(usize, f64)]) -> Self {
        let mut s = State::zeros(n_cells, h);
        for &(i, v) in masses {
            s.values[i - 1] = v;
        }
        s
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Value at cell `i` (1-based).
    #[inline]
    pub fn get(&self, i: usize) -> f64 {
        self.values[i - 1]
    }

    #[inline]
    pub fn set(&mut self, i: usize, v: f64) {
        self.values[i - 1] = v;
    }

    pub fn grid_point(&self, i: usize) -> f64 {
        i as f64 * self.h
    }

    pub fn scaled(&self, factor: f64) -> State {
        State {
            values: self.values.iter().map(|v| v * factor).collect(),
            h: self.h,
        }
    }

    /// `m_k = sum_i f_i (ih)^k`, ascending index order.
    pub fn moment(&self, k: f64) -> f64 {
        if k == 0.0 {
            return self.values.iter().sum();
        }
        self.values
            .iter()
            .enumerate()
            .map(|(idx, &v)| v * self.grid_point(idx + 1).powf(k))
            .sum()
    }

    /// Same sum as [`State::moment`] with Neumaier compensation.
    pub fn moment_compensated(&self, k: f64) -> f64 {
        compensated_sum(
            self.values
                .iter()
                .enumerate()
                .map(|(idx, &v)| v * self.grid_point(idx + 1).powf(k)),
        )
    }

    pub fn l1_norm(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).sum()
    }

    pub fn l1_distance(&self, other: &State) -> Result<f64> {
        if self.len() != other.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                found: other.len(),
            });
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .sum())
    }

    /// Largest cell index with a nonzero value, 0 for the zero state.
    pub fn max_support_index(&self) -> usize {
        self.values
            .iter()
            .rposition(|&v| v != 0.0)
            .map_or(0, |p| p + 1)
    }

    /// Cells with `f_i > threshold`.
    pub fn support(&self, threshold: f64) -> Vec<usize> {
        self.values
            .iter()
            .enumerate()
            .filter(|(_, &v)| v > threshold)
            .map(|(idx, _)| idx + 1)
            .collect()
    }

    /// gcd of the cells with `f_i > threshold`; 0 for an empty support.
    pub fn support_gcd(&self, threshold: f64) -> usize {
        self.support(threshold)
            .into_iter()
            .fold(0usize, |g, i| g.gcd(&i))
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Neumaier's compensated summation.
pub fn compensated_sum(iter: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for x in iter {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// How a continuous profile is turned into cell values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sampling {
    /// `f_i = psi(ih)`.
    #[default]
    Pointwise,
    /// `f_i = (1/h) * integral of psi over [(i-1)h, ih]`.
    CellAverage,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialDataSpec {
    /// `psi(x) = (1 + cos(pi x / L)) / 2` on `0 < x < L`, zero elsewhere.
    CosineBump {
        half_period: f64,
        #[serde(default)]
        sampling: Sampling,
    },
    /// Indicator of the closed interval `[a, b]`.
    Indicator {
        a: f64,
        b: f64,
        #[serde(default)]
        sampling: Sampling,
    },
    /// Verbatim `(cell, value)` pairs, 1-based.
    PointMasses { masses: Vec<(usize, f64)> },
    /// Text file of `index value` lines.
    File { path: PathBuf },
}

pub fn init_from_spec(p: &ModelParams, spec: &InitialDataSpec) -> Result<State> {
    let n = p.n_cells;
    let h = p.h;
    let mut s = State::zeros(n, h);
    match spec {
        InitialDataSpec::CosineBump {
            half_period,
            sampling,
        } => {
            let l = *half_period;
            if !(l > 0.0) {
                return Err(Error::Domain(format!("half_period = {l} must be > 0")));
            }
            match sampling {
                Sampling::Pointwise => {
                    for i in 1..=n {
                        let x = p.grid_point(i);
                        if x > 0.0 && x < l {
                            s.set(i, 0.5 * (1.0 + (PI * x / l).cos()));
                        }
                    }
                }
                Sampling::CellAverage => {
                    // Antiderivative of psi restricted to [0, L].
                    let primitive =
                        |x: f64| -> f64 { 0.5 * (x + l / PI * (PI * x / l).sin()) };
                    for i in 1..=n {
                        let lo = ((i - 1) as f64 * h).min(l);
                        let hi = p.grid_point(i).min(l);
                        if hi > lo {
                            s.set(i, (primitive(hi) - primitive(lo)) / h);
                        }
                    }
                }
            }
        }
        InitialDataSpec::Indicator { a, b, sampling } => {
            let (a, b) = (*a, *b);
            if !(a <= b) {
                return Err(Error::Domain(format!("indicator interval [{a}, {b}] is empty")));
            }
            match sampling {
                Sampling::Pointwise => {
                    // Grid points within rounding of an endpoint count as inside.
                    let slack = 1e-9 * h;
                    for i in 1..=n {
                        let x = p.grid_point(i);
                        if x >= a - slack && x <= b + slack {
                            s.set(i, 1.0);
                        }
                    }
                }
                Sampling::CellAverage => {
                    for i in 1..=n {
                        let lo = ((i - 1) as f64 * h).max(a);
                        let hi = p.grid_point(i).min(b);
                        if hi > lo {
                            s.set(i, (hi - lo) / h);
                        }
                    }
                }
            }
        }
        InitialDataSpec::PointMasses { masses } => {
            for &(i, v) in masses {
                check_entry(i, v, n, 0)?;
                s.set(i, v);
            }
        }
        InitialDataSpec::File { path } => {
            s = read_state_file(path, p)?;
        }
    }
    Ok(s)
}

fn check_entry(i: usize, v: f64, n: usize, line: usize) -> Result<()> {
    if i == 0 || i > n {
        return Err(Error::FileParse {
            line,
            message: format!("cell index {i} outside 1..={n}"),
        });
    }
    if !v.is_finite() {
        return Err(Error::FileParse {
            line,
            message: format!("non-finite value at cell {i}"),
        });
    }
    if v < 0.0 {
        return Err(Error::NegativeValue { index: i, value: v });
    }
    Ok(())
}

/// Parses `index value` lines (1-based indices). Blank lines and `#` comments
/// are ignored; cells not listed are zero.
pub fn parse_state_text(text: &str, p: &ModelParams) -> Result<State> {
    let mut s = State::zeros(p.n_cells, p.h);
    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut fields = content.split_whitespace();
        let (Some(idx), Some(val), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(Error::FileParse {
                line,
                message: format!("expected `index value`, found `{content}`"),
            });
        };
        let i: usize = idx.parse().map_err(|_| Error::FileParse {
            line,
            message: format!("bad index `{idx}`"),
        })?;
        let v: f64 = val.parse().map_err(|_| Error::FileParse {
            line,
            message: format!("bad value `{val}`"),
        })?;
        check_entry(i, v, p.n_cells, line)?;
        s.set(i, v);
    }
    Ok(s)
}

pub fn read_state_file(path: &Path, p: &ModelParams) -> Result<State> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_state_text(&text, p)
}

/// Inverse of [`parse_state_text`] for nonzero cells.
pub fn format_state_text(s: &State) -> String {
    let mut out = String::new();
    for (idx, &v) in s.values().iter().enumerate() {
        if v != 0.0 {
            out.push_str(&format!("{} {:e}\n", idx + 1, v));
        }
    }
    out
}
