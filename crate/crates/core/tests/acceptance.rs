//! Acceptance criteria at full scale. Each criterion prints one
//! `PASS`/`FAIL` line; the test fails if any criterion fails.

use std::time::Instant;

use threewave_core::config::preset;
use threewave_core::integrator::Method;
use threewave_core::model::Model;
use threewave_core::state::{init_from_spec, State};
use threewave_core::verify::dynamics::{self, monitor_config, moment_trace, MomentTrace, ScaleLimit};
use threewave_core::verify::ensemble::{self, Ensemble};
use threewave_core::verify::{indicator, CheckEntry, Status, VerifySettings};

const SEED: u64 = 20_240_601;

struct Outcome {
    name: &'static str,
    pass: bool,
    detail: String,
}

fn from_entries(name: &'static str, entries: &[CheckEntry], extra: Option<(bool, String)>) -> Outcome {
    let mut pass = entries.iter().all(|e| e.status == Status::Pass);
    let mut detail = entries
        .iter()
        .map(|e| format!("[{} {} margin {:.3e}] {}", e.name, e.status, e.margin, e.detail))
        .collect::<Vec<_>>()
        .join(" | ");
    if let Some((ok, note)) = extra {
        pass &= ok;
        detail = format!("{note}; {detail}");
    }
    Outcome { name, pass, detail }
}

fn runtime_note(limit: f64, seconds: f64) -> (bool, String) {
    (seconds < limit, format!("runtime {seconds:.3}s (limit {limit}s)"))
}

fn test_case(name: &str) -> (Model, State) {
    let cfg = preset(name).unwrap();
    let s0 = init_from_spec(&cfg.model, &cfg.init).unwrap();
    (Model::new(cfg.model).unwrap(), s0)
}

fn trace(model: &Model, s0: &State) -> MomentTrace {
    moment_trace(model, s0, &monitor_config(1e-3, 1.0, Method::Euler), &[2.0, 3.0, 4.0]).unwrap()
}

#[test]
fn acceptance() {
    let settings = VerifySettings::default();
    let mut out = Vec::new();
    let (m1, s1) = test_case("test1");
    let (m2, s2) = test_case("test2");

    let start = Instant::now();
    let ens = Ensemble::random(200, SEED, 100, 20);
    let weak = ensemble::check_weak_form(&ens, SEED);
    out.push(from_entries(
        "weak_form_oracle",
        &[weak],
        Some(runtime_note(10.0, start.elapsed().as_secs_f64())),
    ));
    out.push(from_entries("first_moment_conservation", &[ensemble::check_conservation(&ens)], None));

    let start = Instant::now();
    let t1 = trace(&m1, &s1);
    let decay = dynamics::check_energy_decay(m1.params(), &t1, &settings);
    let ratio = t1.m1.last().unwrap() / t1.m1[0];
    let limit = (-(0.1f64.powf(0.4))).exp() * (1.0 + 10.0 * 1e-3);
    let (fast, note) = runtime_note(60.0, start.elapsed().as_secs_f64());
    out.push(from_entries(
        "energy_decay",
        &[decay],
        Some((
            fast && ratio <= limit,
            format!("m1(1)/m1(0) = {ratio:.6} <= {limit:.6}; {note}"),
        )),
    ));

    let lattice: Vec<CheckEntry> = [vec![20, 40], vec![2, 3]]
        .iter()
        .map(|support| dynamics::check_positivity_lattice(&m1, support, 1e-3, 100, &settings))
        .collect();
    out.push(from_entries("positivity_lattice", &lattice, None));

    let t2 = trace(&m2, &s2);
    let mut propagation = Vec::new();
    let mut creation = Vec::new();
    for (label, t) in [("test1", &t1), ("test2", &t2)] {
        for k in [2.0, 3.0, 4.0] {
            let mut e = dynamics::check_moment_propagation(m1.params(), t, k, &settings);
            e.name = format!("{label}_{}", e.name);
            propagation.push(e);
            let mut e = dynamics::check_moment_creation(m1.params(), t, k, &[0.25, 0.5, 1.0], &settings);
            e.name = format!("{label}_{}", e.name);
            creation.push(e);
        }
    }
    out.push(from_entries("moment_propagation", &propagation, None));
    out.push(from_entries("moment_creation", &creation, None));

    let ml = dynamics::check_ml_propagation(&m1, &s1, &monitor_config(1e-3, 1.0, Method::Euler), &settings);
    // Unit ML mass is not reachable for this data at dt = 1e-3: the reported
    // line states the attained mass and which cap stopped the rescaling.
    let plan = dynamics::ml_rescaling(&m1, &s1, settings.ml_order, 1e-3, settings.ml_safety).unwrap();
    let note = if plan.limit == ScaleLimit::UnitMass {
        "rescaled to unit ML mass".to_string()
    } else {
        format!(
            "unit ML mass unattainable: E(0) = {:.3e} at scale {:.3e}, capped by {:?}",
            plan.mass, plan.scale, plan.limit
        )
    };
    out.push(from_entries("ml_propagation", &[ml], Some((true, note))));

    let start = Instant::now();
    let gamma = ensemble::check_gamma_estimate(60, &[1.0, 1.5, 2.0, 3.0]);
    out.push(from_entries(
        "gamma_estimate",
        &[gamma],
        Some(runtime_note(1.0, start.elapsed().as_secs_f64())),
    ));

    out.push(from_entries(
        "interpolation_suites",
        &[
            ensemble::check_moment_interpolation(500, SEED, 100),
            ensemble::check_ml_interpolation(500, SEED, 100),
            ensemble::check_high_low(500, SEED, 100),
        ],
        None,
    ));

    out.push(from_entries(
        "gain_loss_and_lattice_closure",
        &[ensemble::check_gain_loss(&ens), ensemble::check_lattice_closure(200, SEED, 100)],
        None,
    ));

    let bump = indicator(m1.params(), 1.0, 2.0).unwrap();
    let lip = dynamics::lipschitz_experiment(
        "lipschitz_bump",
        &m1,
        &s1,
        &bump,
        &monitor_config(1e-3, 1.0, Method::Euler),
        &[1e-2, 5e-3, 2.5e-3],
        &settings,
    );
    out.push(from_entries("lipschitz", &[lip], None));

    let order = dynamics::check_integrator_order(&m1, &s1, &[4e-3, 2e-3, 1e-3], 1.0, Method::Euler);
    out.push(from_entries("integrator_order", &[order], None));

    for o in &out {
        println!("{} {}: {}", if o.pass { "PASS" } else { "FAIL" }, o.name, o.detail);
    }
    let failed: Vec<&str> = out.iter().filter(|o| !o.pass).map(|o| o.name).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
