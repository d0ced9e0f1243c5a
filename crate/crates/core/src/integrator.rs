//! Explicit time stepping with per-step diagnostics.

use serde::{Deserialize, Serialize};

use crate::bounds::ml_moment;
use crate::collision::{apply_o_into, loss_rate_bound, Execution, Workspace};
use crate::error::{Error, Result};
use crate::model::Model;
use crate::state::State;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    #[default]
    Euler,
    Rk4,
}

fn default_record_every() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub dt: f64,
    pub t_final: f64,
    #[serde(default = "default_record_every")]
    pub record_every: usize,
    #[serde(default)]
    pub snapshot_times: Vec<f64>,
    #[serde(default)]
    pub method: Method,
    #[serde(default)]
    pub clamp_negatives: bool,
    #[serde(default)]
    pub parallel: bool,
}

impl SimConfig {
    pub fn euler(dt: f64, t_final: f64) -> Self {
        SimConfig {
            dt,
            t_final,
            record_every: 1,
            snapshot_times: Vec::new(),
            method: Method::Euler,
            clamp_negatives: false,
            parallel: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::SimConfig(format!("sim.dt = {} must be > 0", self.dt)));
        }
        if !(self.t_final >= 0.0) || !self.t_final.is_finite() {
            return Err(Error::SimConfig(format!(
                "sim.t_final = {} must be >= 0",
                self.t_final
            )));
        }
        if self.record_every == 0 {
            return Err(Error::SimConfig("sim.record_every must be >= 1".into()));
        }
        if let Some(t) = self
            .snapshot_times
            .iter()
            .find(|&&t| !(0.0..=self.t_final).contains(&t))
        {
            return Err(Error::SimConfig(format!(
                "sim.snapshot_times: time {t} outside [0, {}]",
                self.t_final
            )));
        }
        Ok(())
    }

    /// Number of steps reaching `t_final`; a trailing fraction of a step
    /// beyond floating-point noise costs one extra step.
    pub fn n_steps(&self) -> usize {
        let ratio = self.t_final / self.dt;
        let rounded = ratio.round();
        if (ratio - rounded).abs() <= 1e-9 * ratio.max(1.0) {
            rounded as usize
        } else {
            ratio.ceil() as usize
        }
    }

    fn execution(&self) -> Execution {
        if self.parallel {
            Execution::Parallel
        } else {
            Execution::Serial
        }
    }
}

/// A Mittag-Leffler moment recorded along the trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MlPair {
    pub a: f64,
    pub lambda: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsRow {
    pub t: f64,
    /// `m_1..m_4`.
    pub moments: [f64; 4],
    pub ml: Vec<f64>,
    pub l1_norm: f64,
    pub min_f: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub requested: f64,
    pub t: f64,
    pub state: State,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub rows: Vec<DiagnosticsRow>,
    pub snapshots: Vec<Snapshot>,
    pub ml_pairs: Vec<MlPair>,
    pub final_state: State,
    pub steps: usize,
    /// Total mass removed by clamping (zero unless `clamp_negatives`).
    pub clamped_mass: f64,
    /// Steps whose minimum dropped below `-1e-12 max f`.
    pub negative_steps: usize,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.t).collect()
    }

    /// `m_k` series for `k` in `1..=4`.
    pub fn moment_series(&self, k: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r.moments[k - 1]).collect()
    }
}

/// Stepper owning its scratch buffers.
pub struct Integrator<'m> {
    model: &'m Model,
    method: Method,
    exec: Execution,
    ws: Workspace,
    k: [Vec<f64>; 4],
    tmp: Vec<f64>,
}

impl<'m> Integrator<'m> {
    pub fn new(model: &'m Model, method: Method, exec: Execution) -> Self {
        let n = model.n_cells();
        let z = || vec![0.0; n];
        Integrator {
            model,
            method,
            exec,
            ws: Workspace::new(n),
            k: [z(), z(), z(), z()],
            tmp: z(),
        }
    }

    pub fn model(&self) -> &Model {
        self.model
    }

    /// Advances `s` by `dt` in place. Returns the mass removed by clamping.
    pub fn step(&mut self, s: &mut State, dt: f64, clamp: bool, step_index: usize) -> Result<f64> {
        let f = s.values_mut();
        match self.method {
            Method::Euler => {
                apply_o_into(self.model, f, &mut self.ws, &mut self.k[0], self.exec);
                for (fi, ki) in f.iter_mut().zip(&self.k[0]) {
                    *fi += dt * ki;
                }
            }
            Method::Rk4 => {
                let [k1, k2, k3, k4] = &mut self.k;
                apply_o_into(self.model, f, &mut self.ws, k1, self.exec);
                for ((t, fi), ki) in self.tmp.iter_mut().zip(f.iter()).zip(k1.iter()) {
                    *t = fi + 0.5 * dt * ki;
                }
                apply_o_into(self.model, &self.tmp, &mut self.ws, k2, self.exec);
                for ((t, fi), ki) in self.tmp.iter_mut().zip(f.iter()).zip(k2.iter()) {
                    *t = fi + 0.5 * dt * ki;
                }
                apply_o_into(self.model, &self.tmp, &mut self.ws, k3, self.exec);
                for ((t, fi), ki) in self.tmp.iter_mut().zip(f.iter()).zip(k3.iter()) {
                    *t = fi + dt * ki;
                }
                apply_o_into(self.model, &self.tmp, &mut self.ws, k4, self.exec);
                for (idx, fi) in f.iter_mut().enumerate() {
                    *fi += dt / 6.0 * (k1[idx] + 2.0 * k2[idx] + 2.0 * k3[idx] + k4[idx]);
                }
            }
        }
        if let Some(index) = f.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                step: step_index,
                index: index + 1,
            });
        }
        let mut clamped = 0.0;
        if clamp {
            for v in f.iter_mut() {
                if *v < 0.0 {
                    clamped -= *v;
                    *v = 0.0;
                }
            }
        }
        Ok(clamped)
    }
}

/// One forward Euler step `f + dt O[f]`.
pub fn euler_step(model: &Model, s: &State, dt: f64) -> Result<State> {
    let mut next = s.clone();
    Integrator::new(model, Method::Euler, Execution::Serial).step(&mut next, dt, false, 1)?;
    Ok(next)
}

/// `safety / max_i L_i`: below this step an Euler update of the current state
/// cannot change the sign of any cell.
pub fn dt_stability_estimate(model: &Model, s: &State, safety: f64) -> f64 {
    let max_rate = loss_rate_bound(model, s)
        .into_iter()
        .fold(0.0f64, f64::max);
    safety / max_rate
}

fn diagnostics(s: &State, t: f64, ml_pairs: &[MlPair]) -> Result<DiagnosticsRow> {
    let ml = ml_pairs
        .iter()
        .map(|pair| ml_moment(s, pair.a, pair.lambda))
        .collect::<Result<Vec<_>>>()?;
    Ok(DiagnosticsRow {
        t,
        moments: [s.moment(1.0), s.moment(2.0), s.moment(3.0), s.moment(4.0)],
        ml,
        l1_norm: s.l1_norm(),
        min_f: s.min_value(),
    })
}

/// Integrates from `s0` to `cfg.t_final`, recording a diagnostics row every
/// `record_every` steps (and at `t = 0`). Snapshots are taken at the first step
/// time not earlier than each requested time.
pub fn integrate(model: &Model, s0: &State, cfg: &SimConfig, ml_pairs: &[MlPair]) -> Result<Trajectory> {
    integrate_observed(model, s0, cfg, ml_pairs, |_, _| Ok(()))
}

/// [`integrate`] with a callback invoked after every step with `(t, state)`.
pub fn integrate_observed(
    model: &Model,
    s0: &State,
    cfg: &SimConfig,
    ml_pairs: &[MlPair],
    mut observer: impl FnMut(f64, &State) -> Result<()>,
) -> Result<Trajectory> {
    cfg.validate()?;
    if s0.len() != model.n_cells() {
        return Err(Error::DimensionMismatch {
            expected: model.n_cells(),
            found: s0.len(),
        });
    }
    let steps = cfg.n_steps();
    let mut requested: Vec<f64> = cfg.snapshot_times.clone();
    requested.sort_by(f64::total_cmp);
    let mut pending = requested.into_iter().peekable();
    let time_slack = 1e-9 * cfg.dt;

    let mut state = s0.clone();
    let mut rows = vec![diagnostics(&state, 0.0, ml_pairs)?];
    let mut snapshots = Vec::new();
    while let Some(&t_req) = pending.peek() {
        if t_req <= time_slack {
            snapshots.push(Snapshot {
                requested: t_req,
                t: 0.0,
                state: state.clone(),
            });
            pending.next();
        } else {
            break;
        }
    }

    let mut stepper = Integrator::new(model, cfg.method, cfg.execution());
    let mut clamped_mass = 0.0;
    let mut negative_steps = 0;
    for n in 1..=steps {
        clamped_mass += stepper.step(&mut state, cfg.dt, cfg.clamp_negatives, n)?;
        let t = n as f64 * cfg.dt;
        let min_f = state.min_value();
        if min_f < -1e-12 * state.max_value().max(0.0) {
            if negative_steps == 0 {
                log::warn!("negative cell value {min_f:e} at t = {t}");
            }
            negative_steps += 1;
        }
        observer(t, &state)?;
        if n % cfg.record_every == 0 {
            rows.push(diagnostics(&state, t, ml_pairs)?);
        }
        while let Some(&t_req) = pending.peek() {
            if t + time_slack >= t_req {
                snapshots.push(Snapshot {
                    requested: t_req,
                    t,
                    state: state.clone(),
                });
                pending.next();
            } else {
                break;
            }
        }
    }
    Ok(Trajectory {
        rows,
        snapshots,
        ml_pairs: ml_pairs.to_vec(),
        final_state: state,
        steps,
        clamped_mass,
        negative_steps,
    })
}
