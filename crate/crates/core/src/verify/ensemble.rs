//! Checks over randomized parameter sets and states: the operator identities,
//! moment inequalities and the combinatorial estimates.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::report::{CheckEntry, Worst};
use super::rng_for;
use crate::bounds::{combinatorial_gamma_ratio, truncated_ml_moment};
use crate::collision::{apply_o, apply_s, apply_v, gain_loss, loss_rate_bound, weak_form_rhs, OperatorOutput};
use crate::model::{Model, ModelParams, TruncationMode};
use crate::state::{compensated_sum, State};

/// Relative slack for identities that hold up to rounding.
pub const IDENTITY_TOL: f64 = 1e-12;
/// Relative slack of the weak-form oracle.
pub const WEAK_FORM_TOL: f64 = 1e-10;

/// Random admissible parameters: exponents in `[0, 0.5]`, `h` in `[0.05, 1]`,
/// `delta` strictly above both admissibility thresholds.
pub fn random_params(rng: &mut ChaCha8Rng, n_cells: usize, truncation: TruncationMode) -> ModelParams {
    let mut alpha = [0.0; 3];
    let mut beta = [0.0; 3];
    for n in 0..3 {
        alpha[n] = rng.gen_range(0.0..0.5);
        beta[n] = rng.gen_range(0.0..0.5);
    }
    let kernel_bound = (0..3).map(|n| alpha[n] + beta[n]).fold(0.0f64, f64::max);
    let coag_bound = 2.0 * alpha[0] + beta[0] - 1.0;
    ModelParams {
        h: rng.gen_range(0.05..1.0),
        alpha,
        beta,
        delta: kernel_bound.max(coag_bound) + rng.gen_range(0.05..1.0),
        n_cells,
        truncation,
    }
}

/// Nonnegative state on `1..=max_support` with each cell occupied with
/// probability 0.7; the last cell is always occupied so the state is nonzero.
pub fn random_state(rng: &mut ChaCha8Rng, n_cells: usize, h: f64, max_support: usize) -> State {
    let top = rng.gen_range(1..=max_support.min(n_cells));
    let mut s = State::zeros(n_cells, h);
    for i in 1..=top {
        if i == top || rng.gen_bool(0.7) {
            s.set(i, rng.gen_range(0.0..1.0) + 1e-3);
        }
    }
    s
}

/// Sparse state with values spread over several decades, anywhere on the grid.
pub fn random_wide_state(rng: &mut ChaCha8Rng, n_cells: usize, h: f64) -> State {
    let density = rng.gen_range(0.05..0.5);
    let mut s = State::zeros(n_cells, h);
    for i in 1..=n_cells {
        if rng.gen_bool(density) {
            s.set(i, rng.gen_range(-5.0f64..2.0).exp());
        }
    }
    if s.max_support_index() == 0 {
        s.set(rng.gen_range(1..=n_cells), 1.0);
    }
    s
}

/// Random models and small-support states shared by the operator checks.
pub struct Ensemble {
    pub cases: Vec<(Model, State)>,
}

impl Ensemble {
    /// `trials` cases with `N = n_cells` and support at most `max_support`.
    pub fn random(trials: usize, seed: u64, n_cells: usize, max_support: usize) -> Self {
        let mut rng = rng_for(seed, 1);
        let cases = (0..trials)
            .map(|_| {
                let p = random_params(&mut rng, n_cells, TruncationMode::Leaky);
                let s = random_state(&mut rng, n_cells, p.h, max_support);
                (Model::new(p).expect("generated parameters are admissible"), s)
            })
            .collect();
        Ensemble { cases }
    }
}

fn case_label(idx: usize, m: &Model) -> String {
    let p = m.params();
    format!(
        "case {idx} (h={:.4}, alpha={:.3?}, beta={:.3?}, delta={:.4})",
        p.h, p.alpha, p.beta, p.delta
    )
}

type TestFn<'a> = Box<dyn Fn(usize) -> f64 + 'a>;

/// `sum_i S_i phi(i)` against the brute-force weak form for
/// `phi = ih`, `(ih)^2` and a random bounded `phi`.
pub fn check_weak_form(ens: &Ensemble, seed: u64) -> CheckEntry {
    let mut rng = rng_for(seed, 2);
    let mut worst = Worst::new();
    for (idx, (m, s)) in ens.cases.iter().enumerate() {
        let n = m.n_cells();
        let h = m.h();
        let random_phi: Vec<f64> = (0..=2 * n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let out = apply_s(m, s);
        let tests: [(&str, TestFn); 3] = [
            ("ih", Box::new(move |i| i as f64 * h)),
            ("(ih)^2", Box::new(move |i| (i as f64 * h).powi(2))),
            ("random", Box::new(|i| random_phi[i])),
        ];
        for (label, phi) in tests.iter() {
            let lhs = compensated_sum(out.values.iter().enumerate().map(|(k, v)| v * phi(k + 1)));
            match weak_form_rhs(m, s, phi) {
                Ok(rhs) => worst.observe((lhs - rhs).abs(), WEAK_FORM_TOL * (1.0 + rhs.abs()), || {
                    format!("{}, phi={label}", case_label(idx, m))
                }),
                Err(e) => return CheckEntry::errored("weak_form_oracle", e),
            }
        }
    }
    worst.into_entry(
        "weak_form_oracle",
        WEAK_FORM_TOL,
        "|sum S_i phi(i) - weak form| <= tol (1 + |weak form|)",
    )
}

/// First-moment conservation `|m_1<op(f)>| <= 1e-12 m_2<f>` for a given
/// operator; `op` is injectable so the check itself can be mutation tested.
pub fn check_conservation_with(
    name: &str,
    cases: &[(Model, State)],
    op: impl Fn(&Model, &State) -> OperatorOutput,
) -> CheckEntry {
    let mut worst = Worst::new();
    for (idx, (m, s)) in cases.iter().enumerate() {
        if m.params().truncation == TruncationMode::Leaky && s.max_support_index() > m.n_cells() / 2 {
            return CheckEntry::skip(
                name,
                format!(
                    "{}: support reaches cell {} > N/2 in leaky truncation",
                    case_label(idx, m),
                    s.max_support_index()
                ),
            );
        }
        let out = op(m, s);
        let h = m.h();
        let m1 = compensated_sum(out.values.iter().enumerate().map(|(k, v)| v * (k + 1) as f64 * h));
        worst.observe(m1.abs(), IDENTITY_TOL * s.moment(2.0), || {
            format!("{}, state {:?}", case_label(idx, m), s.values())
        });
    }
    worst.into_entry(name, IDENTITY_TOL, "|m1<S[f]>| <= tol m2<f>")
}

pub fn check_conservation(ens: &Ensemble) -> CheckEntry {
    check_conservation_with("conservation", &ens.cases, apply_s)
}

/// `O = O+ - O-`, `O = S - V` and `O-_i = L_i f_i`, entrywise.
pub fn check_gain_loss(ens: &Ensemble) -> CheckEntry {
    let mut worst = Worst::new();
    for (idx, (m, s)) in ens.cases.iter().enumerate() {
        let o = apply_o(m, s);
        let (gain, loss) = gain_loss(m, s);
        let sv = apply_s(m, s);
        let v = apply_v(m, s);
        let rates = loss_rate_bound(m, s);
        #[allow(clippy::needless_range_loop)]
        for i in 0..m.n_cells() {
            let scale = gain.values[i] + loss.values[i];
            let allowed = IDENTITY_TOL * scale;
            let cell = || format!("{}, cell {}", case_label(idx, m), i + 1);
            worst.observe((o.values[i] - (gain.values[i] - loss.values[i])).abs(), allowed, cell);
            worst.observe((o.values[i] - (sv.values[i] - v.values[i])).abs(), allowed, cell);
            worst.observe((loss.values[i] - rates[i] * s.values()[i]).abs(), allowed, cell);
        }
    }
    worst.into_entry("gain_loss_identity", IDENTITY_TOL, "entrywise O vs O+ - O-, S - V, L f")
}

/// States supported on `g N` for random `g` produce operator output that is
/// bitwise zero off the lattice.
pub fn check_lattice_closure(trials: usize, seed: u64, n_cells: usize) -> CheckEntry {
    let mut rng = rng_for(seed, 3);
    let mut bad = Vec::new();
    let mut checked = 0usize;
    for trial in 0..trials {
        let p = random_params(&mut rng, n_cells, TruncationMode::Leaky);
        let g = rng.gen_range(1..=6usize);
        let mut s = State::zeros(n_cells, p.h);
        let top = rng.gen_range(1..=n_cells / g);
        for q in 1..=top {
            if q == top || rng.gen_bool(0.5) {
                s.set(q * g, rng.gen_range(0.01..1.0));
            }
        }
        let gs = s.support_gcd(0.0);
        let m = Model::new(p).expect("generated parameters are admissible");
        let out = apply_o(&m, &s);
        for (k, v) in out.values.iter().enumerate() {
            let i = k + 1;
            if i % gs != 0 {
                checked += 1;
                if v.to_bits() != 0 {
                    bad.push(format!("trial {trial}: g={gs}, O[{i}] = {v:e}"));
                }
            }
        }
    }
    let detail = match bad.first() {
        Some(w) => format!("{} off-lattice nonzeros; first: {w}", bad.len()),
        None => format!("{checked} off-lattice cells, all bitwise zero"),
    };
    CheckEntry::from_margin(
        "lattice_closure",
        if bad.is_empty() { 1.0 } else { -(bad.len() as f64) },
        0.0,
        detail,
    )
}

/// `m_k<S[f]> <= 2^{beta_1+1}(2^k-2) m_{alpha_1+beta_1+k-1} m_{alpha_1+1}`.
pub fn check_moment_estimate(ens: &Ensemble, orders: &[f64]) -> CheckEntry {
    let mut worst = Worst::new();
    for (idx, (m, s)) in ens.cases.iter().enumerate() {
        let p = m.params();
        let out = apply_s(m, s);
        let h = m.h();
        for &k in orders {
            let lhs = compensated_sum(
                out.values
                    .iter()
                    .enumerate()
                    .map(|(j, v)| v * ((j + 1) as f64 * h).powf(k)),
            );
            let rhs = (p.beta[0] + 1.0).exp2()
                * (k.exp2() - 2.0)
                * s.moment(p.alpha[0] + p.beta[0] + k - 1.0)
                * s.moment(p.alpha[0] + 1.0);
            // Rounding in `lhs` scales with the gross terms, not with the net value.
            let gross: f64 = out
                .values
                .iter()
                .enumerate()
                .map(|(j, v)| v.abs() * ((j + 1) as f64 * h).powf(k))
                .sum();
            let slack = IDENTITY_TOL * gross;
            worst.observe(lhs - slack, rhs, || format!("{}, k={k}", case_label(idx, m)));
        }
    }
    worst.into_entry(
        "moment_estimate_s",
        IDENTITY_TOL,
        &format!("m_k<S> <= 2^(beta1+1)(2^k-2) m_(alpha1+beta1+k-1) m_(alpha1+1), k in {orders:?}"),
    )
}

/// `binom(k,l) Gamma(al+1) Gamma(a(k-l)+1) / Gamma(ak+1) <= 2 sqrt(a)`.
pub fn check_gamma_estimate(k_max: u32, orders: &[f64]) -> CheckEntry {
    let mut worst = Worst::new();
    for &a in orders {
        for k in 2..=k_max {
            for l in 1..k {
                let ratio = combinatorial_gamma_ratio(k, l, a);
                worst.observe(ratio, 2.0 * a.sqrt(), || format!("a={a}, k={k}, l={l}"));
            }
        }
    }
    worst.into_entry(
        "gamma_estimate",
        0.0,
        &format!("2 <= k <= {k_max}, 1 <= l < k, a in {orders:?}"),
    )
}

fn relax(rhs: f64) -> f64 {
    rhs * (1.0 + IDENTITY_TOL)
}

/// `m_k <= m_a^{(b-k)/(b-a)} m_b^{(k-a)/(b-a)}` for random `0 <= a < k < b <= 6`.
pub fn check_moment_interpolation(trials: usize, seed: u64, n_cells: usize) -> CheckEntry {
    let mut rng = rng_for(seed, 4);
    let mut worst = Worst::new();
    for trial in 0..trials {
        let h = rng.gen_range(0.05..1.0);
        let s = random_wide_state(&mut rng, n_cells, h);
        let mut e = [rng.gen_range(0.0..6.0), rng.gen_range(0.0..6.0), rng.gen_range(0.0..6.0)];
        e.sort_by(f64::total_cmp);
        let [a, k, b] = e;
        if !(a < k && k < b) {
            continue;
        }
        let rhs = s.moment(a).powf((b - k) / (b - a)) * s.moment(b).powf((k - a) / (b - a));
        worst.observe(s.moment(k), relax(rhs), || format!("trial {trial}: h={h}, a={a}, k={k}, b={b}"));
    }
    worst.into_entry("interpolation_moment", IDENTITY_TOL, "random states, 0 <= a < k < b <= 6")
}

/// Truncated Mittag-Leffler interpolation
/// `E^n_{a,rho1} <= (E^n_a)^{(rho2-rho1)/rho2} (E^n_{a,rho2})^{rho1/rho2}`.
pub fn check_ml_interpolation(trials: usize, seed: u64, n_cells: usize) -> CheckEntry {
    let mut rng = rng_for(seed, 5);
    let mut worst = Worst::new();
    for trial in 0..trials {
        let h = rng.gen_range(0.05..1.0);
        let s = random_wide_state(&mut rng, n_cells, h);
        let a = rng.gen_range(1.0..3.0);
        let lambda = rng.gen_range(0.05..1.5);
        let n = rng.gen_range(1..=30usize);
        let mut r = [rng.gen_range(0.0..2.0), rng.gen_range(0.0..2.0)];
        r.sort_by(f64::total_cmp);
        let [rho1, rho2] = r;
        if !(rho1 > 0.0 && rho1 < rho2) {
            continue;
        }
        let lhs = truncated_ml_moment(&s, a, lambda, rho1, n);
        let base = truncated_ml_moment(&s, a, lambda, 0.0, n);
        let top = truncated_ml_moment(&s, a, lambda, rho2, n);
        let rhs = base.powf((rho2 - rho1) / rho2) * top.powf(rho1 / rho2);
        worst.observe(lhs, relax(rhs), || {
            format!("trial {trial}: h={h}, a={a}, lambda={lambda}, n={n}, rho=({rho1}, {rho2})")
        });
    }
    worst.into_entry("interpolation_ml", IDENTITY_TOL, "random states, n <= 30, 0 < rho1 < rho2 <= 2")
}

/// `m_{k1} <= h^{k1-k2} m_{k2}` for `0 <= k1 < k2 <= 6`.
pub fn check_high_low(trials: usize, seed: u64, n_cells: usize) -> CheckEntry {
    let mut rng = rng_for(seed, 6);
    let mut worst = Worst::new();
    for trial in 0..trials {
        let h = rng.gen_range(0.05..1.0);
        let s = random_wide_state(&mut rng, n_cells, h);
        let mut k = [rng.gen_range(0.0..6.0), rng.gen_range(0.0..6.0)];
        k.sort_by(f64::total_cmp);
        let [k1, k2] = k;
        if !(k1 < k2) {
            continue;
        }
        let rhs = h.powf(k1 - k2) * s.moment(k2);
        worst.observe(s.moment(k1), relax(rhs), || format!("trial {trial}: h={h}, k1={k1}, k2={k2}"));
    }
    worst.into_entry("interpolation_high_low", IDENTITY_TOL, "random states, 0 <= k1 < k2 <= 6")
}
