//! Checks that monitor a bound along a simulated trajectory.
//!
//! The theorems hold for the exact flow; all monitors grant the explicit
//! time-discretization slack `1 + c_tol dt`.

use super::report::{CheckEntry, Worst};
use super::VerifySettings;
use crate::bounds::{
    b_k, creation_bound, decay_envelope, lambda_branches, lambda_max_ml, ml_function, ml_moment,
};
use crate::collision::loss_rate_bound;
use crate::error::{Error, Result};
use crate::integrator::{integrate_observed, Integrator, Method, SimConfig};
use crate::model::{Model, ModelParams};
use crate::state::State;
use crate::collision::Execution;

/// Largest `dt max_i L_i` the ML rescaling accepts; beyond it an Euler step
/// may push cells negative.
const EULER_SIGN_SAFETY: f64 = 0.5;

/// Allowed relative spread of `r_eps(T)` across halvings of `eps`.
pub const LINEAR_RESPONSE_TOL: f64 = 0.1;

/// Accepted range of the self-convergence ratio for a first-order method.
pub const ORDER_RATIO_RANGE: (f64, f64) = (1.7, 2.3);

/// Moments recorded after every step, starting at `t = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentTrace {
    pub orders: Vec<f64>,
    pub times: Vec<f64>,
    pub m1: Vec<f64>,
    /// `values[o][n]` is `m_{orders[o]}` at `times[n]`.
    pub values: Vec<Vec<f64>>,
    pub dt: f64,
}

impl MomentTrace {
    fn order_index(&self, k: f64) -> Option<usize> {
        self.orders.iter().position(|&o| o == k)
    }

    /// Index of the first recorded time not earlier than `t`.
    fn time_index(&self, t: f64) -> Option<usize> {
        let slack = 1e-9 * self.dt;
        self.times.iter().position(|&s| s + slack >= t)
    }
}

/// Per-step simulation settings for a monitor run on `[0, horizon]`.
pub fn monitor_config(dt: f64, horizon: f64, method: Method) -> SimConfig {
    SimConfig {
        method,
        ..SimConfig::euler(dt, horizon)
    }
}

pub fn moment_trace(model: &Model, s0: &State, sim: &SimConfig, orders: &[f64]) -> Result<MomentTrace> {
    let mut times = vec![0.0];
    let mut m1 = vec![s0.moment(1.0)];
    let mut values: Vec<Vec<f64>> = orders.iter().map(|&k| vec![s0.moment(k)]).collect();
    integrate_observed(model, s0, sim, &[], |t, s| {
        times.push(t);
        m1.push(s.moment(1.0));
        for (series, &k) in values.iter_mut().zip(orders) {
            series.push(s.moment(k));
        }
        Ok(())
    })?;
    Ok(MomentTrace {
        orders: orders.to_vec(),
        times,
        m1,
        values,
        dt: sim.dt,
    })
}

fn dt_slack(settings: &VerifySettings, dt: f64) -> f64 {
    settings.c_tol * dt
}

/// `m_1(t) <= e^{-h^delta t} m_1(0) (1 + c_tol dt)` and strict decrease of `m_1`
/// while the state is nonzero.
pub fn check_energy_decay(p: &ModelParams, trace: &MomentTrace, settings: &VerifySettings) -> CheckEntry {
    let name = "energy_decay";
    let eps = dt_slack(settings, trace.dt);
    let m1_0 = trace.m1[0];
    let mut worst = Worst::new();
    for (&t, &m1) in trace.times.iter().zip(&trace.m1) {
        worst.observe(m1, decay_envelope(p, m1_0, t) * (1.0 + eps), || format!("t={t}"));
    }
    let stall = trace
        .m1
        .windows(2)
        .zip(&trace.times[1..])
        .find(|(w, _)| w[0] > 0.0 && !(w[1] < w[0]));
    let mut entry = worst.into_entry(name, eps, "m1(t) <= exp(-h^delta t) m1(0) (1 + c_tol dt)");
    let final_ratio = trace.m1.last().copied().unwrap_or(0.0) / m1_0;
    entry.detail = format!("{}; m1(T)/m1(0) = {final_ratio:.6}", entry.detail);
    if let Some((w, t)) = stall {
        entry.status = super::Status::Fail;
        entry.detail = format!("m1 not strictly decreasing at t={t}: {:e} -> {:e}; {}", w[0], w[1], entry.detail);
    }
    entry
}

/// Hypothesis of the propagation bound: `k > max{delta, 1, 2 - alpha_1 - beta_1}`.
pub fn propagation_threshold(p: &ModelParams) -> f64 {
    p.delta.max(1.0).max(2.0 - p.alpha[0] - p.beta[0])
}

/// `m_k(t) <= max{m_k(0), 2 B_k(m_1(0))} (1 + c_tol dt)` along the trace.
pub fn check_moment_propagation(
    p: &ModelParams,
    trace: &MomentTrace,
    k: f64,
    settings: &VerifySettings,
) -> CheckEntry {
    let name = format!("moment_propagation_k{k}");
    let threshold = propagation_threshold(p);
    if !(k > threshold) {
        return CheckEntry::skip(&name, format!("k = {k} <= max(delta, 1, 2 - alpha_1 - beta_1) = {threshold}"));
    }
    let Some(o) = trace.order_index(k) else {
        return CheckEntry::errored(&name, format!("order {k} not traced"));
    };
    let series = &trace.values[o];
    let barrier = match b_k(p, k, trace.m1[0]) {
        Ok(b) => 2.0 * b,
        Err(e) => return CheckEntry::errored(&name, e),
    };
    let bound = series[0].max(barrier);
    let eps = dt_slack(settings, trace.dt);
    let mut worst = Worst::new();
    for (&t, &mk) in trace.times.iter().zip(series) {
        worst.observe(mk, bound * (1.0 + eps), || format!("t={t}"));
    }
    let context = format!(
        "bound max(m_k(0) = {:e}, 2 B_k(m1(0)) = {barrier:e})",
        series[0]
    );
    worst.into_entry(&name, eps, &context)
}

/// `m_k(t) <= creation_bound(k, m_1(0), t) (1 + c_tol dt)` at each probe time.
pub fn check_moment_creation(
    p: &ModelParams,
    trace: &MomentTrace,
    k: f64,
    probes: &[f64],
    settings: &VerifySettings,
) -> CheckEntry {
    let name = format!("moment_creation_k{k}");
    if !(k > 1.0) {
        return CheckEntry::skip(&name, format!("k = {k} <= 1"));
    }
    let Some(o) = trace.order_index(k) else {
        return CheckEntry::errored(&name, format!("order {k} not traced"));
    };
    let eps = dt_slack(settings, trace.dt);
    let mut worst = Worst::new();
    for &probe in probes {
        if !(probe > 0.0) {
            return CheckEntry::errored(&name, format!("probe time {probe} must be > 0"));
        }
        let Some(n) = trace.time_index(probe) else {
            return CheckEntry::errored(&name, format!("probe time {probe} beyond the traced horizon"));
        };
        let t = trace.times[n];
        match creation_bound(p, k, trace.m1[0], t) {
            Ok(bound) => worst.observe(trace.values[o][n], bound * (1.0 + eps), || format!("t={t}")),
            Err(e) => return CheckEntry::errored(&name, e),
        }
    }
    worst.into_entry(&name, eps, &format!("probes {probes:?}"))
}

/// Outcome of the exact-cascade reachability oracle: `true` for cells a
/// positive gain term can reach within the given number of steps.
pub fn reachable_cells(n_cells: usize, support: &[usize], steps: usize) -> Vec<bool> {
    let mut reach = vec![false; n_cells + 1];
    for &i in support {
        reach[i] = true;
    }
    for _ in 0..steps {
        let current: Vec<usize> = (1..=n_cells).filter(|&i| reach[i]).collect();
        let mut next = reach.clone();
        for (a, &i) in current.iter().enumerate() {
            for &j in &current[a..] {
                // Coagulation fills i + j; splitting j against the partner i fills j - i.
                if i + j <= n_cells {
                    next[i + j] = true;
                }
                if j > i {
                    next[j - i] = true;
                }
            }
        }
        if next == reach {
            break;
        }
        reach = next;
    }
    reach
}

/// Point masses on `support`, `steps` Euler steps of size `dt`: cells off
/// `gcd(support) N` stay bitwise zero at every step, reachable lattice cells
/// end strictly above `tau_pos_rel max f`.
pub fn check_positivity_lattice(
    model: &Model,
    support: &[usize],
    dt: f64,
    steps: usize,
    settings: &VerifySettings,
) -> CheckEntry {
    let label = support.iter().map(|i| i.to_string()).collect::<Vec<_>>().join("_");
    let name = format!("positivity_lattice_{label}");
    let n = model.n_cells();
    if support.is_empty() || support.iter().any(|&i| i == 0 || i > n) {
        return CheckEntry::skip(&name, format!("support {support:?} not inside 1..={n}"));
    }
    let g = support.iter().fold(0, |acc, &i| num_integer::gcd(acc, i));
    let masses: Vec<(usize, f64)> = support.iter().map(|&i| (i, 1.0)).collect();
    let mut s = State::point_masses(n, model.h(), &masses);
    let mut stepper = Integrator::new(model, Method::Euler, Execution::Serial);
    for step in 1..=steps {
        if let Err(e) = stepper.step(&mut s, dt, false, step) {
            return CheckEntry::errored(&name, e);
        }
        if let Some(i) = (1..=n).find(|&i| i % g != 0 && s.get(i).to_bits() != 0) {
            return CheckEntry::from_margin(
                &name,
                -1.0,
                0.0,
                format!("off-lattice cell {i} = {:e} after step {step} (g = {g})", s.get(i)),
            );
        }
    }
    let reach = reachable_cells(n, support, steps);
    let tau = settings.tau_pos_rel * s.max_value();
    let expected: Vec<usize> = (1..=n).filter(|&i| reach[i]).collect();
    let missing: Vec<usize> = expected.iter().copied().filter(|&i| !(s.get(i) > tau)).collect();
    let min_on = expected.iter().map(|&i| s.get(i)).fold(f64::INFINITY, f64::min);
    let detail = format!(
        "g={g}, {} reachable lattice cells, min value {min_on:e}, tau={tau:e}{}",
        expected.len(),
        match missing.first() {
            Some(i) => format!("; {} not positive, first cell {i} = {:e}", missing.len(), s.get(*i)),
            None => String::new(),
        }
    );
    let margin = if missing.is_empty() { 1.0 } else { -(missing.len() as f64) };
    CheckEntry::from_margin(&name, margin, settings.tau_pos_rel, detail)
}

/// How the Mittag-Leffler rescaling was limited.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScaleLimit {
    /// Scaled to ML mass exactly 1.
    UnitMass,
    /// Capped where the `m_1` branch of the threshold starts to bind; larger
    /// scales lower the admissible `lambda` faster than they add mass.
    BranchCrossover,
    /// Capped so that `dt max_i L_i <= 0.5` for the scaled data.
    EulerStability,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MlRescaling {
    pub scale: f64,
    pub lambda: f64,
    pub mass: f64,
    pub limit: ScaleLimit,
}

/// Chooses the factor `s` applied to `s0_raw` for the ML propagation check.
///
/// With `lambda(s) = safety lambda_max(a, s m_1)` the ML mass is linear in `s`
/// below the branch crossover, where `lambda` does not depend on `m_1`, so the
/// unit-mass scale is solved for directly there.
pub fn ml_rescaling(model: &Model, s0_raw: &State, a: f64, dt: f64, safety: f64) -> Result<MlRescaling> {
    let p = model.params();
    let m1_raw = s0_raw.moment(1.0);
    if !(m1_raw > 0.0) {
        return Err(Error::Domain("ML rescaling needs nonzero data".into()));
    }
    let (first, _) = lambda_branches(p, a, m1_raw)?;
    let s_cross = first.powf(-a) / (4.0 * m1_raw * ml_function(a, 1.0));
    let mass_raw = ml_moment(s0_raw, a, safety * first)?;
    let s_unit = 1.0 / mass_raw;

    let rates = loss_rate_bound(model, s0_raw);
    let tables = model.tables();
    let mut s_stab = f64::INFINITY;
    for (idx, &rate) in rates.iter().enumerate() {
        let gamma = tables.gamma(idx + 1);
        let quadratic = rate - gamma;
        if quadratic > 0.0 {
            s_stab = s_stab.min((EULER_SIGN_SAFETY / dt - gamma) / quadratic);
        }
    }
    if !(s_stab > 0.0) {
        return Err(Error::Domain(format!(
            "dt = {dt} violates the Euler sign condition for the dissipation alone"
        )));
    }

    let (scale, limit) = [
        (s_unit, ScaleLimit::UnitMass),
        (s_cross, ScaleLimit::BranchCrossover),
        (s_stab, ScaleLimit::EulerStability),
    ]
    .into_iter()
    .fold((f64::INFINITY, ScaleLimit::UnitMass), |acc, c| if c.0 < acc.0 { c } else { acc });
    let scaled = s0_raw.scaled(scale);
    let lambda = safety * lambda_max_ml(p, a, scaled.moment(1.0))?;
    let mass = ml_moment(&scaled, a, lambda)?;
    Ok(MlRescaling {
        scale,
        lambda,
        mass,
        limit,
    })
}

/// `E_a(lambda)<f(t)> <= 1 + c_tol dt` for data rescaled to (at most) unit
/// ML mass and `lambda = safety lambda_max`.
pub fn check_ml_propagation(model: &Model, s0_raw: &State, sim: &SimConfig, settings: &VerifySettings) -> CheckEntry {
    let name = "ml_propagation";
    let p = model.params();
    let a = settings.ml_order;
    if !(p.delta > p.coagulation_order()) {
        return CheckEntry::skip(
            name,
            format!("delta = {} <= 2 alpha_1 + beta_1 = {}", p.delta, p.coagulation_order()),
        );
    }
    if s0_raw.max_support_index() == 0 {
        return CheckEntry::skip(name, "zero initial data");
    }
    let plan = match ml_rescaling(model, s0_raw, a, sim.dt, settings.ml_safety) {
        Ok(plan) => plan,
        Err(e) => return CheckEntry::errored(name, e),
    };
    let s0 = s0_raw.scaled(plan.scale);
    let eps = dt_slack(settings, sim.dt);
    let mut worst = Worst::new();
    let mut peak = plan.mass;
    worst.observe(plan.mass, 1.0 + eps, || "t=0".into());
    let run = integrate_observed(model, &s0, sim, &[], |t, s| {
        let e = ml_moment(s, a, plan.lambda)?;
        peak = peak.max(e);
        worst.observe(e, 1.0 + eps, || format!("t={t}"));
        Ok(())
    });
    if let Err(e) = run {
        return CheckEntry::errored(name, e);
    }
    let context = format!(
        "a={a}, lambda={:e}, scale={:e} ({:?}), E(0)={:e}, max E(t)/E(0)={:.6}",
        plan.lambda,
        plan.scale,
        plan.limit,
        plan.mass,
        peak / plan.mass
    );
    worst.into_entry(name, eps, &context)
}

/// Largest `lambda` on the grid with
/// `sum_i f_i(t) x_i exp(lambda t^{1/floor(delta)} x_i) <= (1 + c_tol dt) / (2 lambda)`
/// at every step time in `(0, horizon]`; passes iff one exists.
pub fn check_exp_creation(
    name: &str,
    model: &Model,
    s0: &State,
    sim: &SimConfig,
    lambda_grid: &[f64],
    settings: &VerifySettings,
) -> CheckEntry {
    let p = model.params();
    if p.delta < 1.0 {
        return CheckEntry::skip(name, format!("delta<1 (delta = {})", p.delta));
    }
    if !(p.delta > p.coagulation_order()) {
        return CheckEntry::skip(
            name,
            format!("delta = {} <= 2 alpha_1 + beta_1 = {}", p.delta, p.coagulation_order()),
        );
    }
    let eps = dt_slack(settings, sim.dt);
    let power = 1.0 / p.delta.floor();
    // worst[g] = max_t 2 lambda_g LHS(t, lambda_g)
    let mut worst = vec![0.0f64; lambda_grid.len()];
    let run = integrate_observed(model, s0, sim, &[], |t, s| {
        let tau = t.powf(power);
        for (w, &lambda) in worst.iter_mut().zip(lambda_grid) {
            let lhs: f64 = s
                .values()
                .iter()
                .enumerate()
                .filter(|(_, f)| **f != 0.0)
                .map(|(idx, f)| {
                    let x = s.grid_point(idx + 1);
                    f * x * (lambda * tau * x).exp()
                })
                .sum();
            *w = w.max(2.0 * lambda * lhs);
        }
        Ok(())
    });
    if let Err(e) = run {
        return CheckEntry::errored(name, e);
    }
    let best = lambda_grid
        .iter()
        .zip(&worst)
        .filter(|(_, &w)| w <= 1.0 + eps)
        .max_by(|a, b| a.0.total_cmp(b.0));
    match best {
        Some((&lambda, &w)) => CheckEntry::from_margin(
            name,
            1.0 - w / (1.0 + eps),
            eps,
            format!("lambda* = {lambda:e} on a grid of {} values", lambda_grid.len()),
        ),
        None => CheckEntry::from_margin(
            name,
            -1.0,
            eps,
            format!(
                "no grid lambda satisfies the bound; smallest lambda = {:e} reaches 2 lambda LHS = {:e}",
                lambda_grid.iter().cloned().fold(f64::INFINITY, f64::min),
                worst.first().copied().unwrap_or(f64::NAN)
            ),
        ),
    }
}

/// `r_eps(t)` series for perturbations `s0 + eps perturbation`, step by step.
pub fn lipschitz_ratios(
    model: &Model,
    s0: &State,
    perturbation: &State,
    sim: &SimConfig,
    eps_list: &[f64],
) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let mut base = Vec::with_capacity(sim.n_steps());
    let mut times = Vec::with_capacity(sim.n_steps());
    integrate_observed(model, s0, sim, &[], |t, s| {
        times.push(t);
        base.push(s.clone());
        Ok(())
    })?;
    let mut series = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        let mut g0 = s0.clone();
        for (g, d) in g0.values_mut().iter_mut().zip(perturbation.values()) {
            *g += eps * d;
        }
        let d0 = s0.l1_distance(&g0)?;
        let mut r = Vec::with_capacity(base.len());
        let mut step = 0;
        integrate_observed(model, &g0, sim, &[], |_, g| {
            r.push(base[step].l1_distance(g)? / d0);
            step += 1;
            Ok(())
        })?;
        series.push(r);
    }
    Ok((times, series))
}

/// Qualitative Lipschitz contract: `ln r_eps(t) <= C t + ln(1 + c_tol dt)` with
/// `C` fitted on the largest `eps`, and `r_eps(T)` stable under halving `eps`.
pub fn lipschitz_experiment(
    name: &str,
    model: &Model,
    s0: &State,
    perturbation: &State,
    sim: &SimConfig,
    eps_list: &[f64],
    settings: &VerifySettings,
) -> CheckEntry {
    if eps_list.is_empty() || eps_list.contains(&0.0) || perturbation.l1_norm() == 0.0 {
        return CheckEntry::skip(name, "degenerate perturbation: r undefined");
    }
    if sim.n_steps() == 0 {
        return CheckEntry::skip(name, "zero horizon");
    }
    if let Some(i) = (1..=s0.len()).find(|&i| {
        eps_list
            .iter()
            .any(|&e| s0.get(i) + e * perturbation.get(i) < 0.0)
    }) {
        return CheckEntry::skip(name, format!("perturbed data negative at cell {i}"));
    }
    let (times, series) = match lipschitz_ratios(model, s0, perturbation, sim, eps_list) {
        Ok(v) => v,
        Err(e) => return CheckEntry::errored(name, e),
    };
    let largest = eps_list
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let c_hat = times
        .iter()
        .zip(&series[largest])
        .map(|(&t, &r)| r.ln() / t)
        .fold(0.0f64, f64::max);
    let slack = (settings.c_tol * sim.dt).ln_1p();
    let mut growth = Worst::new();
    for (e, r) in eps_list.iter().zip(&series) {
        for (&t, &rt) in times.iter().zip(r) {
            growth.observe(rt.ln() - c_hat * t, slack, || format!("eps={e}, t={t}"));
        }
    }
    let growth_margin = growth.margin();
    let finals: Vec<f64> = series.iter().map(|r| *r.last().expect("nonzero horizon")).collect();
    let spread = finals
        .windows(2)
        .map(|w| (w[1] / w[0] - 1.0).abs())
        .fold(0.0f64, f64::max);
    let spread_margin = 1.0 - spread / LINEAR_RESPONSE_TOL;
    let margin = growth_margin.min(spread_margin);
    CheckEntry::from_margin(
        name,
        margin,
        slack.exp_m1().max(LINEAR_RESPONSE_TOL),
        format!(
            "C_fit = {c_hat:.6}, r(T) = {finals:.6?}, max spread {spread:.3e} (< {LINEAR_RESPONSE_TOL}), growth margin {growth_margin:.3e}"
        ),
    )
}

/// Self-convergence `||f_dt(T) - f_{dt/2}(T)||_1` across successive step
/// sizes; each ratio must lie in [`ORDER_RATIO_RANGE`].
pub fn check_integrator_order(model: &Model, s0: &State, dts: &[f64], horizon: f64, method: Method) -> CheckEntry {
    let name = "integrator_order";
    if dts.len() < 3 {
        return CheckEntry::skip(name, "needs at least three step sizes");
    }
    let mut finals = Vec::with_capacity(dts.len());
    for &dt in dts {
        let sim = monitor_config(dt, horizon, method);
        match integrate_observed(model, s0, &SimConfig { record_every: usize::MAX, ..sim }, &[], |_, _| Ok(())) {
            Ok(traj) => finals.push(traj.final_state),
            Err(e) => return CheckEntry::errored(name, e),
        }
    }
    let diffs: Vec<f64> = finals
        .windows(2)
        .map(|w| w[0].l1_distance(&w[1]).expect("same grid"))
        .collect();
    let ratios: Vec<f64> = diffs.windows(2).map(|w| w[0] / w[1]).collect();
    let (lo, hi) = ORDER_RATIO_RANGE;
    let half = 0.5 * (hi - lo);
    let centre = 0.5 * (hi + lo);
    let margin = ratios
        .iter()
        .map(|r| 1.0 - (r - centre).abs() / half)
        .fold(f64::INFINITY, f64::min);
    CheckEntry::from_margin(
        name,
        if margin.is_nan() { f64::NEG_INFINITY } else { margin },
        half,
        format!("dts {dts:?}, differences {diffs:?}, ratios {ratios:.4?}"),
    )
}
