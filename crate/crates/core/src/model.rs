//! Scheme parameters, power-law kernels and the dissipation rate.
//!
//! The collision kernels are
//!
//! ```text
//! K_n(x, y) = x^{alpha_n} y^{alpha_n} (x + y)^{beta_n},   n = 1, 2, 3
//! gamma(x)  = x^delta
//! ```
//!
//! evaluated at grid points `x = i h`. [`PowerTables`] caches every power the
//! operator loops need so that the quadratic sums are multiply-only.

use serde::{Deserialize, Serialize};

use crate::error::{ParamViolation, Result};

/// How the infinite sums are cut at the last cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TruncationMode {
    /// Every sum stops at `j <= N`; gain landing beyond `N` is lost.
    #[default]
    Leaky,
    /// Additionally drops coagulation loss whose partner gain lands beyond `N`,
    /// so the first moment of `S` vanishes on every state.
    Conservative,
}

/// Kernel selector, `K_1` (coagulation) or `K_2`, `K_3` (fragmentation).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kernel {
    K1,
    K2,
    K3,
}

impl Kernel {
    pub const ALL: [Kernel; 3] = [Kernel::K1, Kernel::K2, Kernel::K3];

    pub fn index(self) -> usize {
        match self {
            Kernel::K1 => 0,
            Kernel::K2 => 1,
            Kernel::K3 => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    /// Mesh size.
    pub h: f64,
    /// Kernel exponents `alpha_1..alpha_3`.
    pub alpha: [f64; 3],
    /// Kernel exponents `beta_1..beta_3`.
    pub beta: [f64; 3],
    /// Dissipation exponent.
    pub delta: f64,
    /// Number of cells `N`.
    pub n_cells: usize,
    #[serde(default)]
    pub truncation: TruncationMode,
}

impl ModelParams {
    /// Parameters of the reference numerical tests: `alpha_n = beta_n = 0.1`,
    /// `delta = 0.4`, `h = 0.1` on `[0, 50]`.
    pub fn reference() -> Self {
        ModelParams {
            h: 0.1,
            alpha: [0.1; 3],
            beta: [0.1; 3],
            delta: 0.4,
            n_cells: 500,
            truncation: TruncationMode::Leaky,
        }
    }

    pub fn validate(&self) -> Result<(), ParamViolation> {
        validate_params(self)
    }

    /// Grid point `i h` of cell `i` (1-based).
    #[inline]
    pub fn grid_point(&self, i: usize) -> f64 {
        i as f64 * self.h
    }

    /// `2 alpha_1 + beta_1`, the growth exponent of the coagulation kernel.
    pub fn coagulation_order(&self) -> f64 {
        2.0 * self.alpha[0] + self.beta[0]
    }
}

/// Checks `h > 0`, `N >= 2`, nonnegative exponents and both strict inequalities
/// `delta > max_n(alpha_n + beta_n)` and `delta > 2 alpha_1 + beta_1 - 1`.
pub fn validate_params(p: &ModelParams) -> Result<(), ParamViolation> {
    if !p.h.is_finite() {
        return Err(ParamViolation::NonFinite("model.h"));
    }
    if p.h <= 0.0 {
        return Err(ParamViolation::NonPositiveMesh(p.h));
    }
    if p.n_cells < 2 {
        return Err(ParamViolation::TooFewCells(p.n_cells));
    }
    for (name, values) in [("alpha", &p.alpha), ("beta", &p.beta)] {
        for (index, &value) in values.iter().enumerate() {
            if !value.is_finite() {
                return Err(ParamViolation::NonFinite(if name == "alpha" {
                    "model.alpha"
                } else {
                    "model.beta"
                }));
            }
            if value < 0.0 {
                return Err(ParamViolation::NegativeExponent {
                    name,
                    index: index + 1,
                    value,
                });
            }
        }
    }
    if !p.delta.is_finite() {
        return Err(ParamViolation::NonFinite("model.delta"));
    }
    let kernel_bound = (0..3)
        .map(|n| p.alpha[n] + p.beta[n])
        .fold(f64::NEG_INFINITY, f64::max);
    if p.delta <= kernel_bound {
        return Err(ParamViolation::DissipationBelowKernel {
            delta: p.delta,
            bound: kernel_bound,
        });
    }
    let coag_bound = p.coagulation_order() - 1.0;
    if p.delta <= coag_bound {
        return Err(ParamViolation::DissipationBelowCoagulation {
            delta: p.delta,
            bound: coag_bound,
        });
    }
    Ok(())
}

/// `x^e` for `x > 0`, computed as `exp(e ln x)`. Tables and direct
/// evaluation share this routine so they agree bit for bit.
#[inline]
pub fn pow_pos(x: f64, e: f64) -> f64 {
    (e * x.ln()).exp()
}

/// `K_n(ih, jh)` evaluated directly from the parameters.
pub fn kernel_value(p: &ModelParams, kernel: Kernel, i: usize, j: usize) -> f64 {
    debug_assert!(i >= 1 && j >= 1);
    let n = kernel.index();
    let xi = pow_pos(p.grid_point(i), p.alpha[n]);
    let xj = pow_pos(p.grid_point(j), p.alpha[n]);
    let sum = pow_pos(p.grid_point(i + j), p.beta[n]);
    (xi * xj) * sum
}

/// Dissipation rate `gamma(ih) = (ih)^delta`.
pub fn gamma_value(p: &ModelParams, i: usize) -> f64 {
    debug_assert!(i >= 1);
    pow_pos(p.grid_point(i), p.delta)
}

/// Precomputed powers on cells `1..=2N`. Index 0 is unused and holds 0.
#[derive(Debug, Clone)]
pub struct PowerTables {
    /// `x_alpha[n][i] = (ih)^{alpha_n}`.
    pub x_alpha: [Vec<f64>; 3],
    /// `x_beta[n][s] = (sh)^{beta_n}`, indexed by the sum `s = i + j`.
    pub x_beta: [Vec<f64>; 3],
    /// `x_gamma[i] = (ih)^delta`.
    pub x_gamma: Vec<f64>,
}

impl PowerTables {
    pub fn len(&self) -> usize {
        self.x_gamma.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `K_n(ih, jh)` from the tables; requires `i + j <= 2N`.
    #[inline]
    pub fn kernel(&self, kernel: Kernel, i: usize, j: usize) -> f64 {
        let n = kernel.index();
        let a = &self.x_alpha[n];
        (a[i] * a[j]) * self.x_beta[n][i + j]
    }

    #[inline]
    pub fn gamma(&self, i: usize) -> f64 {
        self.x_gamma[i]
    }
}

/// Fills the power tables for cells `1..=2N`.
pub fn build_tables(p: &ModelParams) -> PowerTables {
    let len = 2 * p.n_cells;
    let table = |e: f64| -> Vec<f64> {
        let mut v = Vec::with_capacity(len + 1);
        v.push(0.0);
        v.extend((1..=len).map(|i| pow_pos(p.grid_point(i), e)));
        v
    };
    PowerTables {
        x_alpha: [table(p.alpha[0]), table(p.alpha[1]), table(p.alpha[2])],
        x_beta: [table(p.beta[0]), table(p.beta[1]), table(p.beta[2])],
        x_gamma: table(p.delta),
    }
}

/// Validated parameters bundled with their power tables.
#[derive(Debug, Clone)]
pub struct Model {
    params: ModelParams,
    tables: PowerTables,
}

impl Model {
    pub fn new(params: ModelParams) -> Result<Self> {
        validate_params(&params)?;
        let tables = build_tables(&params);
        Ok(Model { params, tables })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn tables(&self) -> &PowerTables {
        &self.tables
    }

    pub fn n_cells(&self) -> usize {
        self.params.n_cells
    }

    pub fn h(&self) -> f64 {
        self.params.h
    }
}
