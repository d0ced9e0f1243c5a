//! Executable checks of the moment theory against the solver.
//!
//! Each check returns a [`CheckEntry`]; [`run_all`] assembles the full suite
//! into a [`VerificationReport`]. Randomized checks derive their generators
//! from one seed, so a report is reproducible from its metadata.

pub mod dynamics;
pub mod ensemble;
pub mod report;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use report::{timed, CheckEntry, ReportMetadata, Status, VerificationReport};

use crate::error::Result;
use crate::integrator::SimConfig;
use crate::model::{Model, ModelParams};
use crate::state::{init_from_spec, InitialDataSpec, Sampling, State};
use dynamics::{monitor_config, moment_trace};
use ensemble::Ensemble;

/// Independent generator for sub-check `tag` of a seeded run.
pub fn rng_for(seed: u64, tag: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(tag);
    rng
}

/// Tunables of the suite. Every field has a default, so a config may set any subset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifySettings {
    /// Time-discretization slack factor: bounds are relaxed by `1 + c_tol dt`.
    pub c_tol: f64,
    /// Random states in the operator ensemble.
    pub trials: usize,
    pub interpolation_trials: usize,
    pub ensemble_cells: usize,
    pub max_support: usize,
    /// Length of the monitored time window.
    pub horizon: f64,
    pub moment_orders: Vec<f64>,
    pub estimate_orders: Vec<f64>,
    pub creation_probes: Vec<f64>,
    pub lattice_supports: Vec<Vec<usize>>,
    pub lattice_steps: usize,
    /// Positivity threshold relative to `max f`.
    pub tau_pos_rel: f64,
    pub ml_order: f64,
    /// Fraction of the admissible threshold used for `lambda`.
    pub ml_safety: f64,
    pub exp_lambda_grid: Vec<f64>,
    /// `delta` of the companion parameter set for exponential-moment creation.
    pub exp_delta: f64,
    pub lipschitz_eps: Vec<f64>,
    pub lipschitz_bump: [f64; 2],
    pub order_dts: Vec<f64>,
    pub gamma_k_max: u32,
    pub gamma_orders: Vec<f64>,
}

impl Default for VerifySettings {
    fn default() -> Self {
        VerifySettings {
            c_tol: 10.0,
            trials: 200,
            interpolation_trials: 500,
            ensemble_cells: 100,
            max_support: 20,
            horizon: 1.0,
            moment_orders: vec![2.0, 3.0, 4.0],
            estimate_orders: vec![1.5, 2.0, 3.0, 4.0],
            creation_probes: vec![0.25, 0.5, 1.0],
            lattice_supports: vec![vec![20, 40], vec![2, 3]],
            lattice_steps: 100,
            tau_pos_rel: 0.0,
            ml_order: 1.0,
            ml_safety: 0.9,
            exp_lambda_grid: (0..=25).map(|i| 10f64.powf(-4.0 + 0.2 * i as f64)).collect(),
            exp_delta: 1.2,
            lipschitz_eps: vec![1e-2, 5e-3, 2.5e-3],
            lipschitz_bump: [1.0, 2.0],
            order_dts: vec![4e-3, 2e-3, 1e-3],
            gamma_k_max: 60,
            gamma_orders: vec![1.0, 1.5, 2.0, 3.0],
        }
    }
}

/// Indicator of `[a, b]` sampled at the cell centres, used as a bump direction.
pub fn indicator(p: &ModelParams, a: f64, b: f64) -> Result<State> {
    init_from_spec(
        p,
        &InitialDataSpec::Indicator {
            a,
            b,
            sampling: Sampling::Pointwise,
        },
    )
}

type Job<'a> = Box<dyn Fn() -> Vec<CheckEntry> + Send + Sync + 'a>;

fn one<'a>(f: impl Fn() -> CheckEntry + Send + Sync + 'a) -> Job<'a> {
    Box::new(move || vec![timed(&f)])
}

/// Runs every check for parameters `params`, initial data `s0` and step `sim.dt`.
///
/// Randomized suites use their own admissible parameter ensembles; the
/// trajectory checks use `params` and `s0` over `[0, settings.horizon]`, and
/// exponential-moment creation additionally runs on a companion set with
/// `delta = settings.exp_delta` and indicator data on `[3, 5]`.
pub fn run_all(
    params: &ModelParams,
    sim: &SimConfig,
    s0: &State,
    settings: &VerifySettings,
    seed: u64,
) -> Result<VerificationReport> {
    let model = Model::new(params.clone())?;
    sim.validate()?;
    let dt = sim.dt;
    let monitor = &monitor_config(dt, settings.horizon, sim.method);
    let ens = Ensemble::random(settings.trials, seed, settings.ensemble_cells, settings.max_support);

    let exp_params = ModelParams {
        delta: settings.exp_delta,
        ..params.clone()
    };
    let exp_model = Model::new(exp_params).ok();
    let exp_data = indicator(params, 3.0, 5.0)?;
    let bump = indicator(params, settings.lipschitz_bump[0], settings.lipschitz_bump[1])?;

    let (model, ens, exp_data, bump) = (&model, &ens, &exp_data, &bump);
    let orders = &settings.moment_orders;
    let trials = settings.interpolation_trials;
    let cells = settings.ensemble_cells;

    let mut jobs: Vec<Job> = vec![
        one(move || ensemble::check_weak_form(ens, seed)),
        one(move || ensemble::check_conservation(ens)),
        one(move || ensemble::check_gain_loss(ens)),
        one(move || ensemble::check_lattice_closure(settings.trials, seed, cells)),
        one(move || ensemble::check_moment_estimate(ens, &settings.estimate_orders)),
        one(move || ensemble::check_gamma_estimate(settings.gamma_k_max, &settings.gamma_orders)),
        one(move || ensemble::check_moment_interpolation(trials, seed, cells)),
        one(move || ensemble::check_ml_interpolation(trials, seed, cells)),
        one(move || ensemble::check_high_low(trials, seed, cells)),
        Box::new(move || {
            let start = std::time::Instant::now();
            let trace = match moment_trace(model, s0, monitor, orders) {
                Ok(t) => t,
                Err(e) => return vec![CheckEntry::errored("energy_decay", e)],
            };
            let shared = start.elapsed().as_secs_f64();
            let p = model.params();
            let mut out = vec![timed(|| dynamics::check_energy_decay(p, &trace, settings))];
            for &k in orders {
                out.push(timed(|| dynamics::check_moment_propagation(p, &trace, k, settings)));
            }
            for &k in orders {
                out.push(timed(|| {
                    dynamics::check_moment_creation(p, &trace, k, &settings.creation_probes, settings)
                }));
            }
            // The shared trajectory is charged to the first entry.
            out[0].seconds += shared;
            out
        }),
    ];
    for support in &settings.lattice_supports {
        jobs.push(one(move || {
            dynamics::check_positivity_lattice(model, support, dt, settings.lattice_steps, settings)
        }));
    }
    jobs.extend([
        one(move || dynamics::check_ml_propagation(model, s0, monitor, settings)),
        one(move || {
            dynamics::check_exp_creation("exp_creation", model, s0, monitor, &settings.exp_lambda_grid, settings)
        }),
        one(move || match &exp_model {
            Some(m) => dynamics::check_exp_creation(
                "exp_creation_companion",
                m,
                exp_data,
                monitor,
                &settings.exp_lambda_grid,
                settings,
            ),
            None => CheckEntry::skip(
                "exp_creation_companion",
                format!("delta = {} is not admissible with the configured exponents", settings.exp_delta),
            ),
        }),
        one(move || {
            dynamics::lipschitz_experiment("lipschitz_bump", model, s0, bump, monitor, &settings.lipschitz_eps, settings)
        }),
        one(move || {
            dynamics::lipschitz_experiment("lipschitz_scaling", model, s0, s0, monitor, &settings.lipschitz_eps, settings)
        }),
        one(move || dynamics::check_integrator_order(model, s0, &settings.order_dts, settings.horizon, sim.method)),
    ]);

    let entries: Vec<CheckEntry> = jobs.par_iter().flat_map_iter(|job| job()).collect();
    Ok(VerificationReport {
        metadata: ReportMetadata {
            params: params.clone(),
            seed,
            dt,
            c_tol: settings.c_tol,
        },
        entries,
    })
}
