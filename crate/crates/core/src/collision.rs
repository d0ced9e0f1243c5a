//! Discrete collision operators `S^(1)`, `S^(2)`, `S^(3)`, dissipation `V`,
//! their combination `O = S - V` and its gain/loss split.
//!
//! With `A_n[i] = (ih)^{alpha_n}` and `B_n[s] = (sh)^{beta_n}` every kernel
//! factors as `K_n(i, j) = A_n[i] A_n[j] B_n[i + j]`. The row sums below pull
//! the `i`-only factors out of the inner loops and precompute, per state,
//! `u_n[j] = A_n[j] f_j` and `w_n[j] = B_n[j] f_j`:
//!
//! ```text
//! S1 gain   B_1[i]  sum_{j<i}   u_1[j] u_1[i-j]
//! S1 loss   2 f_i A_1[i] sum_{j<=J} u_1[j] B_1[i+j]
//! Sn loss   f_i B_n[i]  sum_{j<i}   A_n[i-j] u_n[j]
//! Sn gain   f_i A_n[i]  sum_{j>i}   A_n[j-i] w_n[j]        (pairs j -> i, j-i)
//! Sn split  A_n[i]      sum_{j>i}   w_n[j] u_n[j-i]
//! ```
//!
//! `J = N` in leaky truncation and `J = N - i` in conservative truncation.
//! The fragmentation gain uses the difference argument `K_n(j - i, i)`, which
//! is the form consistent with [`weak_form_rhs`].

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{kernel_value, Kernel, Model, TruncationMode};
use crate::state::State;

/// Per-cell rate `d f_i / dt` contribution of an operator.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorOutput {
    pub values: Vec<f64>,
}

impl OperatorOutput {
    fn zeros(n: usize) -> Self {
        OperatorOutput {
            values: vec![0.0; n],
        }
    }

    /// `sum_i values_i (ih)^k`.
    pub fn moment(&self, h: f64, k: f64) -> f64 {
        self.values
            .iter()
            .enumerate()
            .map(|(idx, v)| v * ((idx + 1) as f64 * h).powf(k))
            .sum()
    }

    /// `sum_i values_i phi(i)`.
    pub fn pair(&self, phi: impl Fn(usize) -> f64) -> f64 {
        self.values
            .iter()
            .enumerate()
            .map(|(idx, v)| v * phi(idx + 1))
            .sum()
    }
}

/// Row-level execution policy for the fused operator pass.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    #[default]
    Serial,
    /// Rows computed on the rayon pool; results are bitwise identical to
    /// [`Execution::Serial`] because each row is evaluated the same way.
    Parallel,
}

/// Reusable buffers for operator evaluation. All arrays are 1-based.
#[derive(Debug, Clone, Default)]
pub struct Workspace {
    f: Vec<f64>,
    u: [Vec<f64>; 3],
    w: [Vec<f64>; 3],
}

impl Workspace {
    pub fn new(n: usize) -> Self {
        let z = || vec![0.0; n + 1];
        Workspace {
            f: z(),
            u: [z(), z(), z()],
            w: [z(), z(), z()],
        }
    }

    fn load(&mut self, model: &Model, values: &[f64]) {
        let n = values.len();
        if self.f.len() != n + 1 {
            *self = Workspace::new(n);
        }
        let t = model.tables();
        self.f[1..].copy_from_slice(values);
        for k in 0..3 {
            let a = &t.x_alpha[k];
            let b = &t.x_beta[k];
            for j in 1..=n {
                self.u[k][j] = a[j] * self.f[j];
                self.w[k][j] = b[j] * self.f[j];
            }
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct RowTerms {
    s1_gain: f64,
    /// Rate `L` with `S1 loss = L f_i` (includes the factor 2).
    s1_loss_rate: f64,
    frag_loss_rate: [f64; 2],
    frag_gain: [f64; 2],
    frag_split: [f64; 2],
}

#[inline]
fn coag_limit(mode: TruncationMode, n: usize, i: usize) -> usize {
    match mode {
        TruncationMode::Leaky => n,
        TruncationMode::Conservative => n.saturating_sub(i),
    }
}

#[inline]
fn s1_gain(model: &Model, ws: &Workspace, i: usize) -> f64 {
    let u = &ws.u[0];
    let mut acc = 0.0;
    for j in 1..i {
        acc += u[j] * u[i - j];
    }
    model.tables().x_beta[0][i] * acc
}

#[inline]
fn s1_loss_rate(model: &Model, ws: &Workspace, i: usize, n: usize) -> f64 {
    let t = model.tables();
    let u = &ws.u[0];
    let b = &t.x_beta[0];
    let limit = coag_limit(model.params().truncation, n, i);
    let mut acc = 0.0;
    for j in 1..=limit {
        acc += u[j] * b[i + j];
    }
    2.0 * t.x_alpha[0][i] * acc
}

/// `(loss rate, gain / f_i, split gain)` of fragmentation kernel `k` at row `i`.
#[inline]
fn frag_row(model: &Model, ws: &Workspace, k: usize, i: usize, n: usize) -> (f64, f64, f64) {
    let t = model.tables();
    let a = &t.x_alpha[k];
    let u = &ws.u[k];
    let w = &ws.w[k];

    let mut loss = 0.0;
    for j in 1..i {
        loss += a[i - j] * u[j];
    }
    let mut gain = 0.0;
    let mut split = 0.0;
    for j in i + 1..=n {
        gain += a[j - i] * w[j];
        split += w[j] * u[j - i];
    }
    (t.x_beta[k][i] * loss, a[i] * gain, a[i] * split)
}

fn row_terms(model: &Model, ws: &Workspace, i: usize, n: usize) -> RowTerms {
    let mut r = RowTerms {
        s1_gain: s1_gain(model, ws, i),
        s1_loss_rate: s1_loss_rate(model, ws, i, n),
        ..RowTerms::default()
    };
    for (slot, k) in [(0, 1), (1, 2)] {
        let (loss, gain, split) = frag_row(model, ws, k, i, n);
        r.frag_loss_rate[slot] = loss;
        r.frag_gain[slot] = gain;
        r.frag_split[slot] = split;
    }
    r
}

/// Gain `O+` and loss rate `L` (so that `O- = L f_i`) of row `i`.
#[inline]
fn gain_and_rate(model: &Model, ws: &Workspace, i: usize, n: usize) -> (f64, f64) {
    let r = row_terms(model, ws, i, n);
    let fi = ws.f[i];
    let gain = r.s1_gain
        + fi * r.frag_gain[0]
        + r.frag_split[0]
        + fi * r.frag_gain[1]
        + r.frag_split[1];
    let rate = r.s1_loss_rate
        + r.frag_loss_rate[0]
        + r.frag_loss_rate[1]
        + model.tables().gamma(i);
    (gain, rate)
}

fn fill_rows(
    out: &mut [f64],
    exec: Execution,
    row: impl Fn(usize) -> f64 + Sync + Send,
) {
    match exec {
        Execution::Serial => {
            for (idx, slot) in out.iter_mut().enumerate() {
                *slot = row(idx + 1);
            }
        }
        Execution::Parallel => {
            out.par_iter_mut()
                .enumerate()
                .for_each(|(idx, slot)| *slot = row(idx + 1));
        }
    }
}

fn check_dims(model: &Model, s: &State) {
    assert_eq!(
        s.len(),
        model.n_cells(),
        "state has {} cells, model expects {}",
        s.len(),
        model.n_cells()
    );
}

fn loaded(model: &Model, s: &State) -> Workspace {
    check_dims(model, s);
    let mut ws = Workspace::new(s.len());
    ws.load(model, s.values());
    ws
}

/// `O[f]` written into `out`, reusing `ws`. This is the integrator's hot path.
pub fn apply_o_into(
    model: &Model,
    values: &[f64],
    ws: &mut Workspace,
    out: &mut [f64],
    exec: Execution,
) {
    let n = values.len();
    assert_eq!(n, model.n_cells());
    assert_eq!(out.len(), n);
    ws.load(model, values);
    let ws = &*ws;
    fill_rows(out, exec, |i| {
        let (gain, rate) = gain_and_rate(model, ws, i, n);
        gain - rate * ws.f[i]
    });
}

pub fn apply_o(model: &Model, s: &State) -> OperatorOutput {
    apply_o_with(model, s, Execution::Serial)
}

pub fn apply_o_with(model: &Model, s: &State, exec: Execution) -> OperatorOutput {
    check_dims(model, s);
    let mut ws = Workspace::new(s.len());
    let mut out = OperatorOutput::zeros(s.len());
    apply_o_into(model, s.values(), &mut ws, &mut out.values, exec);
    out
}

pub fn apply_s1(model: &Model, s: &State) -> OperatorOutput {
    let ws = loaded(model, s);
    let n = s.len();
    let mut out = OperatorOutput::zeros(n);
    fill_rows(&mut out.values, Execution::Serial, |i| {
        s1_gain(model, &ws, i) - s1_loss_rate(model, &ws, i, n) * ws.f[i]
    });
    out
}

fn apply_fragmentation(model: &Model, s: &State, k: usize) -> OperatorOutput {
    let ws = loaded(model, s);
    let n = s.len();
    let mut out = OperatorOutput::zeros(n);
    fill_rows(&mut out.values, Execution::Serial, |i| {
        let (loss, gain, split) = frag_row(model, &ws, k, i, n);
        let fi = ws.f[i];
        -loss * fi + fi * gain + split
    });
    out
}

pub fn apply_s2(model: &Model, s: &State) -> OperatorOutput {
    apply_fragmentation(model, s, Kernel::K2.index())
}

pub fn apply_s3(model: &Model, s: &State) -> OperatorOutput {
    apply_fragmentation(model, s, Kernel::K3.index())
}

/// `S = S^(1) + S^(2) + S^(3)`.
pub fn apply_s(model: &Model, s: &State) -> OperatorOutput {
    let ws = loaded(model, s);
    let n = s.len();
    let mut out = OperatorOutput::zeros(n);
    fill_rows(&mut out.values, Execution::Serial, |i| {
        let r = row_terms(model, &ws, i, n);
        let fi = ws.f[i];
        let s1 = r.s1_gain - r.s1_loss_rate * fi;
        let s2 = -r.frag_loss_rate[0] * fi + fi * r.frag_gain[0] + r.frag_split[0];
        let s3 = -r.frag_loss_rate[1] * fi + fi * r.frag_gain[1] + r.frag_split[1];
        s1 + s2 + s3
    });
    out
}

/// `V_i = (ih)^delta f_i`.
pub fn apply_v(model: &Model, s: &State) -> OperatorOutput {
    check_dims(model, s);
    let t = model.tables();
    OperatorOutput {
        values: s
            .values()
            .iter()
            .enumerate()
            .map(|(idx, &f)| t.gamma(idx + 1) * f)
            .collect(),
    }
}

/// `(O+, O-)`, with `O-_i = L_i f_i` for the rates of [`loss_rate_bound`].
pub fn gain_loss(model: &Model, s: &State) -> (OperatorOutput, OperatorOutput) {
    let ws = loaded(model, s);
    let n = s.len();
    let mut gain = OperatorOutput::zeros(n);
    let mut loss = OperatorOutput::zeros(n);
    for i in 1..=n {
        let (g, rate) = gain_and_rate(model, &ws, i, n);
        gain.values[i - 1] = g;
        loss.values[i - 1] = rate * ws.f[i];
    }
    (gain, loss)
}

pub fn apply_gain(model: &Model, s: &State) -> OperatorOutput {
    gain_loss(model, s).0
}

pub fn apply_loss(model: &Model, s: &State) -> OperatorOutput {
    gain_loss(model, s).1
}

/// `L_i = 2 sum_j K_1(i,j) f_j + sum_{j<i} (K_2+K_3)(i-j, j) f_j + gamma(i)`.
pub fn loss_rate_bound(model: &Model, s: &State) -> Vec<f64> {
    let ws = loaded(model, s);
    let n = s.len();
    (1..=n).map(|i| gain_and_rate(model, &ws, i, n).1).collect()
}

/// Brute-force weak form
///
/// ```text
/// sum_{i,j} [K_1(i,j) f_i f_j - (K_2+K_3)(i,j) f_i f_{i+j}] (phi(i+j) - phi(i) - phi(j))
/// ```
///
/// from direct kernel evaluation. `phi` is queried on `1..=2N`. The support
/// must lie in `1..=N/2` so that no term touches the truncation.
pub fn weak_form_rhs(model: &Model, s: &State, phi: impl Fn(usize) -> f64) -> Result<f64> {
    check_dims(model, s);
    let n = s.len();
    let limit = n / 2;
    let max_index = s.max_support_index();
    if max_index > limit {
        return Err(Error::SupportTooLarge { max_index, limit });
    }
    let p = model.params();
    let f = |i: usize| if i <= n { s.get(i) } else { 0.0 };
    let mut total = 0.0;
    for i in 1..=n {
        let fi = f(i);
        if fi == 0.0 {
            continue;
        }
        for j in 1..=n {
            let fj = f(j);
            let fij = f(i + j);
            if fj == 0.0 && fij == 0.0 {
                continue;
            }
            let coag = kernel_value(p, Kernel::K1, i, j) * fi * fj;
            let frag = (kernel_value(p, Kernel::K2, i, j) + kernel_value(p, Kernel::K3, i, j))
                * fi
                * fij;
            total += (coag - frag) * (phi(i + j) - phi(i) - phi(j));
        }
    }
    Ok(total)
}
