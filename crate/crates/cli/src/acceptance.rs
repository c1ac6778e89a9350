//! The acceptance suite. Each criterion runs at its stated tolerance and
//! reports a single pass or fail line.

use std::f64::consts::PI;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use dormantwalk::asymptotics::{baseline_asymptotic, responsive_asymptotic, DormancyModel, DEFAULT_D1_READING, D1Reading};
use dormantwalk::exact::{self, build_operator, long_time_limit, Boundary};
use dormantwalk::green;
use dormantwalk::model::ModelParams;
use dormantwalk::renewal::{harmonic_identity_check, z1_laplace_expansion, GeometricClock, Harmonic};
use dormantwalk::simulate::{estimate_survival, sample_z1_many};
use dormantwalk::stats::{z_score, Moments};
use dormantwalk::{transition_rates, Estimator, PairState, Params};

use crate::oracle::{avoiding_green_paths, plain_killed_survival};

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl std::fmt::Display for Outcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "[{tag}] {:>2} {}: {}", self.id, self.name, self.detail)
    }
}

type Runner = fn() -> anyhow::Result<(bool, String)>;

pub const CRITERIA: [(u8, &str, Runner); 10] = [
    (1, "oracle agreement d=1", oracle_agreement),
    (2, "estimator unbiasedness", estimator_unbiasedness),
    (3, "d=1 Tauberian check", tauberian_d1),
    (4, "d=3 limit", limit_d3),
    (5, "s0-independence", s0_independence),
    (6, "clock and harmonic identities", clock_identities),
    (7, "planar Green asymptotics", green_asymptotics),
    (8, "Z1 expansion", z1_expansion),
    (9, "reductions", reductions),
    (10, "property suites", property_suites),
];

/// Runs criterion `id`; errors count as failures.
pub fn run(id: u8) -> Option<Outcome> {
    let &(id, name, f) = CRITERIA.iter().find(|c| c.0 == id)?;
    let start = Instant::now();
    let (passed, detail) = match f() {
        Ok(r) => r,
        Err(e) => (false, format!("error: {e:#}")),
    };
    let detail = format!("{detail} ({:.1}s)", start.elapsed().as_secs_f64());
    Some(Outcome { id, name, passed, detail })
}

/// Runs the listed criteria (all when empty), reporting each as it finishes.
pub fn run_all(ids: &[u8], mut report: impl FnMut(&Outcome)) -> Vec<Outcome> {
    let ids: Vec<u8> = if ids.is_empty() { CRITERIA.iter().map(|c| c.0).collect() } else { ids.to_vec() };
    ids.into_iter()
        .filter_map(run)
        .inspect(|o| report(o))
        .collect()
}

const D1_TIMES: [f64; 3] = [10.0, 20.0, 50.0];

fn oracle_agreement() -> anyhow::Result<(bool, String)> {
    let params = Params::unit(1);
    let start = Instant::now();
    let curve = exact::survival(&params, 300, &D1_TIMES)?;
    let mc = estimate_survival(&params, &D1_TIMES, 1_000_000, 20_240_601, Estimator::Exposure)?;
    let elapsed = start.elapsed().as_secs_f64();
    let gap = curve.max_gap();
    let mut ok = gap < 1e-6 && elapsed < 120.0;
    let mut parts = Vec::new();
    for (i, e) in mc.iter().enumerate() {
        let exact = curve.midpoint()[i];
        let diff = (e.mean - exact).abs();
        ok &= diff <= 3.0 * e.stderr + gap;
        parts.push(format!("t={}: |{:.6}-{:.6}|={:.1e} (3se {:.1e})", e.time, e.mean, exact, diff, 3.0 * e.stderr));
    }
    Ok((ok, format!("{}; gap {gap:.1e}; runtime {elapsed:.0}s", parts.join(", "))))
}

fn estimator_unbiasedness() -> anyhow::Result<(bool, String)> {
    let params = Params::unit(1);
    let a = estimate_survival(&params, &D1_TIMES, 100_000, 11, Estimator::Exposure)?;
    let b = estimate_survival(&params, &D1_TIMES, 100_000, 12, Estimator::HardKill)?;
    let z: Vec<f64> = a.iter().zip(&b).map(|(x, y)| z_score(x.mean, x.stderr, y.mean, y.stderr)).collect();
    let ok = z.iter().all(|z| z.abs() < 3.0);
    Ok((ok, format!("combined z-scores {:?} at t = {:?}", z.iter().map(|z| format!("{z:.2}")).collect::<Vec<_>>(), D1_TIMES)))
}

fn tauberian_d1() -> anyhow::Result<(bool, String)> {
    let params = Params::unit(1);
    let times = [1e2, 1e3, 1e4];
    let curve = exact::survival(&params, 1500, &times)?;
    let value = curve.midpoint();
    let report = responsive_asymptotic(&params, None)?;
    let renewal = dormantwalk::asymptotics::renewal_asymptotic(&params, None)?.leading_value;
    let ratios = |leading: f64| -> Vec<f64> { times.iter().zip(&value).map(|(&t, &u)| (PI * t).sqrt() * u / leading).collect() };
    let selected = match DEFAULT_D1_READING {
        D1Reading::Theorem => "theorem",
        D1Reading::Lemma => "lemma",
    };
    let mut detail = Vec::new();
    let mut ok = curve.max_gap() < 1e-8;
    for name in ["theorem", "lemma"] {
        let r = ratios(report.reading(name).expect("d = 1 readings"));
        let monotone = r.windows(2).all(|w| (w[1] - 1.0).abs() < (w[0] - 1.0).abs());
        let within = (r[2] - 1.0).abs() < 0.15;
        if name == selected {
            ok &= monotone && within;
        }
        detail.push(format!("{name} {:.4}/{:.4}/{:.4}{}", r[0], r[1], r[2], if name == selected { " (selected)" } else { "" }));
    }
    let r = ratios(renewal);
    detail.push(format!("renewal {:.4}/{:.4}/{:.4}", r[0], r[1], r[2]));
    Ok((ok, format!("ratios at t=1e2/1e3/1e4: {}", detail.join("; "))))
}

fn limit_d3() -> anyhow::Result<(bool, String)> {
    let params = Params::unit(3);
    let v = long_time_limit(&params, 25, 200.0, 1e-3)?;
    let report = responsive_asymptotic(&params, None)?;
    let renewal = dormantwalk::asymptotics::renewal_asymptotic(&params, None)?.leading_value;
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, selected) in [("proof-occupation", true), ("proof-discrete", false)] {
        let p = report.reading(name).expect("transient readings");
        let rel = (p - v.value).abs() / v.value;
        if selected {
            ok &= rel < 0.01;
        }
        parts.push(format!("{name} {p:.6} (rel {rel:.3}){}", if selected { " selected" } else { "" }));
    }
    Ok((
        ok,
        format!(
            "exact v(200)={:.7}, |v(200)-v(100)|={:.1e}; {}; renewal {renewal:.6} (rel {:.1e})",
            v.value,
            v.stabilization,
            parts.join(", "),
            (renewal - v.value).abs() / v.value
        ),
    ))
}

fn s0_independence() -> anyhow::Result<(bool, String)> {
    let times = [5.0, 200.0];
    let mut values = Vec::new();
    for s0 in [0.5, 5.0] {
        let params = Params::unit(3).with_s0(s0);
        let op = build_operator(&params, 25, Boundary::Escaping)?;
        values.push(op.survival_from(&PairState::origin_active(3), &times)?);
    }
    let short = (values[0][0] - values[1][0]).abs();
    let long = (values[0][1] - values[1][1]).abs();
    let ok = long < 5e-3 && short > 1e-2;
    Ok((
        ok,
        format!(
            "t=200: {:.6} vs {:.6}, diff {long:.2e} (< 5e-3); t=5: {:.6} vs {:.6}, diff {short:.2e} (> 1e-2)",
            values[0][1], values[1][1], values[0][0], values[1][0]
        ),
    ))
}

fn clock_identities() -> anyhow::Result<(bool, String)> {
    const TRIALS: u64 = 1_000_000;
    let cases = [
        (ModelParams::<f64>::unit(1).with_s1(2.0), Harmonic::AbsD1, 101),
        (ModelParams::<f64>::unit(2), Harmonic::PotentialD2, 102),
        (ModelParams::<f64>::unit(3), Harmonic::GreenD3, 103),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for (params, h, seed) in cases {
        let clock = GeometricClock::dormancy(&params)?;
        let r = harmonic_identity_check(&clock, h, TRIALS, seed)?;
        if params.d <= 2 {
            let z = (r.escape_fraction - r.escape_probability) / r.escape_stderr;
            ok &= z.abs() < 3.0;
            parts.push(format!("d={} P={:.6} MC {:.6} z={z:.2}", params.d, r.escape_probability, r.escape_fraction));
        }
        ok &= r.z_score.abs() < 3.0;
        parts.push(format!(
            "{h:?}: E[h(Y)]={:.5}, h(e1)/P={:.5}, z={:.2} (with h(0) term z={:.2})",
            r.mean, r.predicted, r.z_score, r.stopped_z_score
        ));
    }
    Ok((ok, parts.join("; ")))
}

fn green_asymptotics() -> anyhow::Result<(bool, String)> {
    let mut c = Vec::new();
    let mut worst_err = 0.0f64;
    for lambda in [1e-6, 1e-8] {
        let g = green::green_resolvent::<f64>(2, &[0, 0], lambda)?;
        worst_err = worst_err.max(g.est_error);
        c.push(PI * g.value - (1.0 / lambda).ln());
    }
    let diff = (c[0] - c[1]).abs();
    let ok = diff < 0.05 && worst_err < 1e-10;
    Ok((ok, format!("pi G - log(1/lambda) = {:.6} / {:.6}, diff {diff:.2e}; quadrature self-convergence {worst_err:.1e}", c[0], c[1])))
}

fn z1_expansion() -> anyhow::Result<(bool, String)> {
    let params = Params::unit(1);
    let samples = sample_z1_many(&params, 1e6, 1_000_000, 4_242);
    let censored = samples.iter().filter(|s| s.censored).count();
    let mut ok = true;
    let mut parts = Vec::new();
    for lambda in [1e-4, 1e-5] {
        let m: Moments = samples.iter().map(|s| (-lambda * s.value).exp()).collect();
        let e = z1_laplace_expansion(&params, lambda)?;
        let diff = (m.mean() - e.value).abs();
        let allowance = 3.0 * m.stderr() + 5.0 * lambda;
        ok &= diff <= allowance;
        parts.push(format!("lambda={lambda:.0e}: MC {:.6} vs {:.6}, diff {diff:.1e} (allow {allowance:.1e})", m.mean(), e.value));
    }
    Ok((ok, format!("{}; {censored} censored", parts.join(", "))))
}

fn reductions() -> anyhow::Result<(bool, String)> {
    let mut worst = 0.0f64;
    let cases: [(usize, usize, &[f64]); 2] = [(1, 30, &[0.5, 2.0, 10.0]), (2, 6, &[0.5, 2.0, 5.0])];
    for (d, radius, times) in cases {
        let params = Params::new(d, 0.7, 1.3, 0.9, 1.0, 0.0)?;
        let start = PairState::origin_active(d);
        for (boundary, reflecting) in [(Boundary::Absorbing, false), (Boundary::Reflecting, true)] {
            let solver = build_operator(&params, radius, boundary)?.survival_from(&start, times)?;
            let oracle = plain_killed_survival(d, params.kappa + params.rho, params.gamma, radius, reflecting, times);
            for (a, b) in solver.iter().zip(&oracle) {
                worst = worst.max((a - b).abs());
            }
        }
    }
    let mut checked = 0;
    let mut identical = true;
    for d in 1..=4 {
        for kappa in [0.0, 0.5, 2.0] {
            for rho in [0.5, 1.0, 3.0] {
                for gamma in [0.1, 1.0, 5.0] {
                    let params = Params::new(d, kappa, rho, gamma, 1.0, 0.0)?;
                    let a = responsive_asymptotic(&params, None)?.leading_value;
                    let b = baseline_asymptotic(&params, DormancyModel::None, None)?.leading_value;
                    identical &= a.to_bits() == b.to_bits();
                    checked += 1;
                }
            }
        }
    }
    let ok = worst < 1e-10 && identical;
    Ok((ok, format!("s1=0 solver vs plain killed walk: max diff {worst:.1e}; s1=0 asymptotics bitwise equal to baseline on {checked} points: {identical}")))
}

fn random_params(rng: &mut ChaCha8Rng, d: usize) -> Params {
    let mut u = |lo: f64, hi: f64| lo + (hi - lo) * rng.random::<f64>();
    Params::new(d, u(0.0, 2.0), u(0.2, 2.0), u(0.0, 3.0), u(0.1, 3.0), u(0.0, 3.0)).expect("valid ranges")
}

fn property_suites() -> anyhow::Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(2_718);
    let mut failures: Vec<String> = Vec::new();

    // rate conservation
    for _ in 0..200 {
        let d = rng.random_range(1..=5);
        let params = random_params(&mut rng, d);
        let z: Vec<i64> = (0..d).map(|_| rng.random_range(-2..=2)).collect();
        let state = PairState::new(z, rng.random::<bool>());
        let total: f64 = transition_rates(&params, &state)?.iter().map(|t| t.rate).sum();
        if (total - params.exit_rate(&state)).abs() > 1e-12 * total.max(1.0) {
            failures.push(format!("rate conservation at {state:?}"));
        }
    }
    for _ in 0..5 {
        let params = random_params(&mut rng, 2);
        let op = build_operator(&params, 4, Boundary::Reflecting)?;
        for i in 0..op.state_count() {
            let kill = if op.state_index.state(i).is_regeneration() { params.gamma } else { 0.0 };
            if (op.row_sum(i) + kill).abs() > 1e-12 {
                failures.push(format!("reflecting row {i} loses mass"));
            }
        }
    }

    // survival in [0, 1], monotone in t and gamma, bracketing
    let times = [0.0, 0.5, 1.0, 2.0, 4.0, 8.0];
    let mut curves = 0;
    for _ in 0..12 {
        let d = rng.random_range(1..=2);
        let params = random_params(&mut rng, d);
        let radius = if d == 1 { 12 } else { 5 };
        let c = exact::survival(&params, radius, &times)?;
        let stronger = exact::survival(&params.with_gamma(params.gamma + 0.5), radius, &times)?;
        curves += 2;
        for (name, v) in [("lower", &c.lower), ("upper", &c.upper), ("reflecting", &c.reflecting)] {
            if v.iter().any(|&x| !(-1e-15..=1.0 + 1e-15).contains(&x)) {
                failures.push(format!("{name} outside [0, 1]"));
            }
            if v.windows(2).any(|w| w[1] > w[0] + 1e-14) {
                failures.push(format!("{name} increases in t"));
            }
        }
        for i in 0..times.len() {
            if c.lower[i] > c.reflecting[i] + 1e-14 || c.lower[i] > c.upper[i] + 1e-14 {
                failures.push(format!("bracketing violated at t={}", times[i]));
            }
            if stronger.reflecting[i] > c.reflecting[i] + 1e-14 {
                failures.push(format!("survival increases with gamma at t={}", times[i]));
            }
        }
    }

    // convention bridge
    let mut bridge = 0.0f64;
    for _ in 0..12 {
        let d = rng.random_range(1..=3);
        let x: Vec<i64> = (0..d).map(|_| rng.random_range(-3..=3)).collect();
        let s = rng.random_range(0.3..0.95);
        let g = green::generating::<f64>(d, &x, s)?.value;
        let r = green::green_resolvent::<f64>(d, &x, (1.0 - s) / s)?.value;
        bridge = bridge.max((g - r / s).abs());
    }
    if bridge > 1e-10 {
        failures.push(format!("convention bridge off by {bridge:.1e}"));
    }

    // first-visit decomposition against path counting
    let s = 0.2;
    let g = |x: &[i64]| green::generating::<f64>(2, x, s).map(|v| v.value);
    let g0 = g(&[0, 0])?;
    let mut decomposition = 0.0f64;
    for _ in 0..10 {
        let mut x = [0i64; 2];
        while x == [0, 0] {
            x = [rng.random_range(-3..=3), rng.random_range(-3..=3)];
        }
        let y = [rng.random_range(-3..=3), rng.random_range(-3..=3)];
        let diff = [y[0] - x[0], y[1] - x[1]];
        let neg_x = [-x[0], -x[1]];
        let via_green = g(&diff)? - g(&neg_x)? * g(&y)? / g0;
        let paths = avoiding_green_paths(&x, &y, s, 16);
        decomposition = decomposition.max((via_green - paths).abs());
    }
    if decomposition > 1e-10 {
        failures.push(format!("first-visit decomposition off by {decomposition:.1e}"));
    }

    let ok = failures.is_empty();
    let detail = if ok {
        format!("rates, {curves} curves, bridge {bridge:.1e}, first-visit decomposition {decomposition:.1e}")
    } else {
        failures.join("; ")
    };
    Ok((ok, detail))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_are_one_to_ten() {
        let ids: Vec<u8> = CRITERIA.iter().map(|c| c.0).collect();
        assert_eq!(ids, (1..=10).collect::<Vec<_>>());
        assert!(run(11).is_none());
    }

    #[test]
    fn outcome_line() {
        let o = Outcome { id: 7, name: "x", passed: false, detail: "d".into() };
        assert_eq!(o.to_string(), "[FAIL]  7 x: d");
    }
}
