//! One function per subcommand, each turning a config into a record.

use dormantwalk::asymptotics::{
    baseline_asymptotic, crossover, renewal_asymptotic, responsive_asymptotic, tauberian_ratio, AsymptoticReport, DormancyModel,
};
use dormantwalk::exact::{self, build_operator, default_radius, Boundary, MAX_STATES};
use dormantwalk::green::{self, Convention};
use dormantwalk::renewal::{discounted_transform, escape_probability_d3, z1_laplace_expansion, ClockRate, GeometricClock, Z1Law};
use dormantwalk::simulate::estimate_survival;
use dormantwalk::{Estimator, Params};

use crate::config::ExperimentConfig;
use crate::record::{Cell, ResultRecord};
use crate::InvalidInput;

fn estimator_name(e: Estimator) -> &'static str {
    match e {
        Estimator::Exposure => "exposure",
        Estimator::HardKill => "hard_kill",
    }
}

/// Monte Carlo survival over the time grid.
pub fn cmd_simulate(config: &ExperimentConfig) -> anyhow::Result<ResultRecord> {
    config.validate()?;
    let params = config.params()?;
    let mut rec = ResultRecord::new("simulate", config);
    rec.columns.push("t".into());
    let mut series = Vec::new();
    for e in config.estimator.estimators() {
        let name = estimator_name(e);
        rec.columns.push(format!("{name}_mean"));
        rec.columns.push(format!("{name}_stderr"));
        series.push(estimate_survival(&params, &config.t_grid, config.paths, config.seed, e)?);
    }
    for (i, &t) in config.t_grid.iter().enumerate() {
        let mut row = vec![Cell::num(t)];
        for s in &series {
            row.push(Cell::num(s[i].mean));
            row.push(Cell::num(s[i].stderr));
        }
        rec.rows.push(row);
    }
    if let [a, b] = series.as_slice() {
        let worst = a
            .iter()
            .zip(b)
            .filter(|(x, y)| x.stderr > 0.0 || y.stderr > 0.0)
            .map(|(x, y)| dormantwalk::stats::z_score(x.mean, x.stderr, y.mean, y.stderr).abs())
            .fold(0.0, f64::max);
        rec.push_result("max_abs_z", worst, None);
    }
    rec.push_result("paths", config.paths as f64, None);
    Ok(rec)
}

/// Bracketing curves of the truncated master equation.
pub fn cmd_exact(config: &ExperimentConfig) -> anyhow::Result<ResultRecord> {
    config.validate()?;
    let params = config.params()?;
    let radius = config.radius.unwrap_or_else(|| default_radius(params.d));
    let curve = exact::survival(&params, radius, &config.t_grid)?;
    let mut rec = ResultRecord::new("exact", config);
    rec.columns = ["t", "lower", "upper", "reflecting", "gap"].map(String::from).to_vec();
    let gap = curve.gap();
    for i in 0..curve.times.len() {
        rec.rows.push(vec![
            Cell::num(curve.times[i]),
            Cell::num(curve.lower[i]),
            Cell::num(curve.upper[i]),
            Cell::num(curve.reflecting[i]),
            Cell::num(gap[i]),
        ]);
    }
    rec.push_result("radius", radius as f64, None);
    rec.push_result("states", dormantwalk::exact::StateIndex::new(params.d, radius).len() as f64, None);
    rec.push_result("max_gap", curve.max_gap(), None);
    Ok(rec)
}

fn point_label(x: &[i64]) -> String {
    x.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(";")
}

/// Green kernels at `x`: both conventions for every `lambda`, or the
/// `s = 1` value (`d >= 3`) and the potential kernel (`d = 2`) without one.
pub fn cmd_green(config: &ExperimentConfig) -> anyhow::Result<ResultRecord> {
    config.validate()?;
    let (d, x) = (config.d, config.point());
    let mut rec = ResultRecord::new("green", config);
    rec.columns = ["dim", "convention", "x", "parameter", "value", "est_error"].map(String::from).to_vec();
    let label = point_label(&x);
    let mut push = |convention: &str, parameter: f64, value: f64, err: f64| {
        rec.rows.push(vec![
            Cell::num(d as f64),
            Cell::text(convention),
            Cell::text(label.clone()),
            Cell::num(parameter),
            Cell::num(value),
            Cell::num(err),
        ]);
    };
    if config.lambda.is_empty() {
        match d {
            1 => return Err(InvalidInput("d = 1 needs --lambda".into()).into()),
            2 => {
                let (a, err) = green::potential_kernel::<f64>(&x)?;
                push("potential", 0.0, a, err);
            }
            _ => {
                let g = green::green_d3::<f64>(&x)?;
                push(&Convention::Generating.to_string(), 1.0, g.discrete, g.est_error);
                push("occupation", 1.0, g.occupation, g.est_error / (2 * d) as f64);
            }
        }
    }
    // the generating row needs s bounded away from 1; small lambda is
    // left to the resolvent when there is one
    let mut skipped = 0;
    for &lambda in &config.lambda {
        if d <= 3 {
            let r = green::green_resolvent::<f64>(d, &x, lambda)?;
            push(&r.convention.to_string(), lambda, r.value, r.est_error);
        }
        let s = 1.0 / (1.0 + lambda);
        match green::generating::<f64>(d, &x, s) {
            Ok(g) => push(&g.convention.to_string(), s, g.value, g.est_error),
            Err(dormantwalk::Error::OutOfDomain(_)) if d <= 3 => skipped += 1,
            Err(e) => return Err(e.into()),
        }
    }
    let rows = rec.rows.len();
    rec.push_result("rows", rows as f64, None);
    rec.push_result("generating_skipped", skipped as f64, None);
    Ok(rec)
}

/// Clock probabilities, `Z_1` law and the renewal transform.
pub fn cmd_renewal(config: &ExperimentConfig) -> anyhow::Result<ResultRecord> {
    config.validate()?;
    let params = config.params()?;
    let mut rec = ResultRecord::new("renewal", config);
    rec.push_result("mu", params.mu(), None);
    for (name, which, rate) in [("dormancy", ClockRate::Dormancy, params.s1), ("reactivation", ClockRate::Reactivation, params.s0)] {
        if rate > 0.0 {
            let clock = GeometricClock::from_params(&params, which)?;
            rec.push_result(format!("{name}.q"), clock.q, None);
            rec.push_result(format!("{name}.escape"), clock.escape_probability()?, None);
        }
    }
    if params.d <= 2 {
        let law = Z1Law::new(&params)?;
        for (name, v) in [("leading", law.leading), ("leading_generating", law.leading_generating), ("leading_renewal", law.leading_renewal), ("c1", law.c1)] {
            if let Some(v) = v {
                rec.push_result(format!("z1.{name}"), v, None);
            }
        }
        rec.columns = ["lambda", "expansion", "generating", "renewal", "within_validity", "survival_transform"].map(String::from).to_vec();
        for &lambda in &config.lambda {
            let e = z1_laplace_expansion(&params, lambda)?;
            let transform = discounted_transform(params.mu(), |_| e.renewal, lambda).map(|t| t.value).unwrap_or(f64::NAN);
            rec.rows.push(vec![
                Cell::num(lambda),
                Cell::num(e.value),
                Cell::num(e.generating.unwrap_or(f64::NAN)),
                Cell::num(e.renewal),
                Cell::flag(e.within_validity),
                Cell::num(transform),
            ]);
        }
    } else {
        let esc = escape_probability_d3(&params)?;
        for r in &esc.readings {
            let n = r.normalization;
            rec.push_result(format!("{n}.g0"), r.g0, None);
            rec.push_result(format!("{n}.g_e1"), r.g_e1, None);
            rec.push_result(format!("{n}.k_d"), r.k_d, None);
            rec.push_result(format!("{n}.escape"), r.escape, None);
            rec.push_result(format!("{n}.limit"), r.limit, None);
            rec.push_result(format!("{n}.is_probability"), f64::from(u8::from(r.is_probability())), None);
        }
        rec.push_result("wake_escape", esc.wake_escape, None);
        rec.push_result("renewal_escape", esc.renewal_escape, None);
        rec.push_result("renewal_green", esc.renewal_green, None);
        rec.push_result("renewal_limit", esc.renewal_limit, None);
    }
    Ok(rec)
}

fn push_report(rec: &mut ResultRecord, prefix: &str, r: &AsymptoticReport<f64>) {
    rec.push_result(format!("{prefix}.leading"), r.leading_value, None);
    for reading in &r.readings {
        rec.push_result(format!("{prefix}.{}", reading.name), reading.value, None);
    }
    let c = &r.constants;
    let named = [("c1", c.c1), ("c1_lemma", c.c1_lemma), ("c2_resolvent", c.c2_resolvent), ("c2_generating", c.c2_generating), ("k_d", c.k_d), ("g_d0", c.g_d0)];
    for (name, v) in named {
        if let Some(v) = v {
            rec.push_result(format!("{prefix}.{name}"), v, None);
        }
    }
}

type ModelFn<'a> = Box<dyn Fn(Option<f64>) -> dormantwalk::Result<AsymptoticReport<f64>> + 'a>;

/// Leading values of every dormancy model, and their curves over the time grid.
pub fn cmd_asympt(config: &ExperimentConfig) -> anyhow::Result<ResultRecord> {
    config.validate()?;
    let params = config.params()?;
    let mut rec = ResultRecord::new("asympt", config);
    let mut models: Vec<(&str, ModelFn)> = vec![
        ("responsive", Box::new(|t| responsive_asymptotic(&params, t))),
        ("none", Box::new(|t| baseline_asymptotic(&params, DormancyModel::None, t))),
    ];
    if params.s1 > 0.0 {
        models.push(("stochastic", Box::new(|t| baseline_asymptotic(&params, DormancyModel::Stochastic, t))));
    }
    models.push(("renewal", Box::new(|t| renewal_asymptotic(&params, t))));
    rec.columns.push("t".into());
    for (name, f) in &models {
        rec.columns.push((*name).into());
        push_report(&mut rec, name, &f(None)?);
    }
    for &t in &config.t_grid {
        let mut row = vec![Cell::num(t)];
        for (_, f) in &models {
            row.push(Cell::num(f(Some(t))?.value_at_t.unwrap_or(f64::NAN)));
        }
        rec.rows.push(row);
    }
    let cross = crossover(&params)?;
    for (i, c) in cross.comparisons.iter().enumerate() {
        rec.push_result(format!("crossover.{i}.lhs"), c.lhs, None);
        rec.push_result(format!("crossover.{i}.rhs"), c.rhs, None);
        rec.push_result(format!("crossover.{i}.holds"), f64::from(u8::from(c.holds)), None);
    }
    if let Some(l) = cross.large_s1_limit {
        rec.push_result("large_s1_limit", l, None);
    }
    Ok(rec)
}

/// Radius large enough that the bracketing gap is negligible up to `t_max`
/// in `d <= 2`, capped by the memory budget.
fn compare_radius(params: &Params, t_max: f64) -> usize {
    let base = default_radius(params.d);
    if params.d >= 3 {
        return base;
    }
    let spread = (2.0 * params.d as f64 * (params.kappa + params.rho) * t_max).sqrt();
    let wanted = base.max((8.0 * spread).ceil() as usize + 10);
    let cap = ((MAX_STATES as f64 / 2.0).powf(1.0 / params.d as f64) as usize - 1) / 2;
    wanted.min(cap)
}

/// `|r - 1|` strictly decreasing with every ratio on the same side of one.
pub fn approaches_one_from_one_side(ratios: &[f64]) -> bool {
    let same_side = ratios.iter().all(|&r| r < 1.0) || ratios.iter().all(|&r| r > 1.0);
    same_side && ratios.windows(2).all(|w| (w[1] - 1.0).abs() < (w[0] - 1.0).abs())
}

/// Exact survival against every prediction, with ratio columns.
pub fn cmd_compare(config: &ExperimentConfig) -> anyhow::Result<ResultRecord> {
    config.validate()?;
    let params = config.params()?;
    let d = params.d;
    if d <= 2 && config.t_grid.iter().any(|&t| t <= 1.0) {
        return Err(InvalidInput("compare needs t > 1 in d <= 2".into()).into());
    }
    let t_max = config.t_grid.last().copied().unwrap_or(0.0);
    let radius = config.radius.unwrap_or_else(|| compare_radius(&params, t_max));
    let curve = exact::survival(&params, radius, &config.t_grid)?;
    let value = curve.midpoint();
    let responsive = responsive_asymptotic(&params, None)?;
    let mut predictions: Vec<(String, f64)> = vec![("responsive".into(), responsive.leading_value)];
    for r in &responsive.readings {
        predictions.push((format!("responsive_{}", r.name.replace('-', "_")), r.value));
    }
    predictions.push(("none".into(), baseline_asymptotic(&params, DormancyModel::None, None)?.leading_value));
    if params.s1 > 0.0 {
        predictions.push(("stochastic".into(), baseline_asymptotic(&params, DormancyModel::Stochastic, None)?.leading_value));
    }
    predictions.push(("renewal".into(), renewal_asymptotic(&params, None)?.leading_value));

    let mut rec = ResultRecord::new("compare", config);
    rec.columns = ["t", "exact_lower", "exact_upper", "gap"].map(String::from).to_vec();
    for (name, _) in &predictions {
        rec.columns.push(format!("prediction_{name}"));
        rec.columns.push(format!("ratio_{name}"));
    }
    let mut ratios = vec![Vec::new(); predictions.len()];
    for (i, &t) in config.t_grid.iter().enumerate() {
        let mut row = vec![Cell::num(t), Cell::num(curve.lower[i]), Cell::num(curve.upper[i]), Cell::num(curve.upper[i] - curve.lower[i])];
        for (k, (_, leading)) in predictions.iter().enumerate() {
            let predicted = match d {
                1 => leading / (std::f64::consts::PI * t).sqrt(),
                2 => leading / t.ln(),
                _ => *leading,
            };
            let ratio = tauberian_ratio(d, t, value[i], *leading);
            ratios[k].push(ratio);
            row.push(Cell::num(predicted));
            row.push(Cell::num(ratio));
        }
        rec.rows.push(row);
    }
    rec.push_result("radius", radius as f64, None);
    rec.push_result("max_gap", curve.max_gap(), None);
    for ((name, _), r) in predictions.iter().zip(&ratios) {
        if let Some(&last) = r.last() {
            rec.push_result(format!("final_ratio.{name}"), last, None);
        }
        if r.len() >= 2 {
            rec.push_result(format!("trend.{name}"), f64::from(u8::from(approaches_one_from_one_side(r))), None);
        }
    }
    Ok(rec)
}

/// Number of states the exact solver would allocate, for error messages.
pub fn exact_state_count(config: &ExperimentConfig) -> anyhow::Result<usize> {
    let params = config.params()?;
    let radius = config.radius.unwrap_or_else(|| default_radius(params.d));
    Ok(build_operator(&params, radius, Boundary::Reflecting)?.state_count())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> ExperimentConfig {
        ExperimentConfig { paths: 2_000, t_grid: vec![1.0, 2.0, 5.0], ..Default::default() }
    }

    fn csv_bytes(rec: &ResultRecord) -> Vec<u8> {
        let mut buf = Vec::new();
        rec.write_csv(&mut buf).unwrap();
        buf
    }

    #[test]
    fn no_killing_survives_surely() {
        let c = ExperimentConfig { gamma: 0.0, estimator: crate::config::EstimatorChoice::Both, ..small() };
        let rec = cmd_simulate(&c).unwrap();
        for col in ["exposure_mean", "hard_kill_mean"] {
            assert!(rec.column(col).unwrap().iter().all(|&v| v == 1.0));
        }
    }

    #[test]
    fn same_seed_same_bytes() {
        let c = small();
        assert_eq!(csv_bytes(&cmd_simulate(&c).unwrap()), csv_bytes(&cmd_simulate(&c).unwrap()));
        let other = ExperimentConfig { seed: 2, ..small() };
        assert_ne!(csv_bytes(&cmd_simulate(&c).unwrap()), csv_bytes(&cmd_simulate(&other).unwrap()));
    }

    #[test]
    fn simulate_matches_exact() {
        let c = ExperimentConfig { paths: 40_000, estimator: crate::config::EstimatorChoice::Both, ..small() };
        let mc = cmd_simulate(&c).unwrap();
        let ex = cmd_exact(&ExperimentConfig { radius: Some(60), ..c.clone() }).unwrap();
        let upper = ex.column("upper").unwrap();
        for name in ["exposure", "hard_kill"] {
            let m = mc.column(&format!("{name}_mean")).unwrap();
            let s = mc.column(&format!("{name}_stderr")).unwrap();
            for i in 0..m.len() {
                assert!((m[i] - upper[i]).abs() < 4.0 * s[i], "{name} t={}: {} vs {}", c.t_grid[i], m[i], upper[i]);
            }
        }
        assert!(mc.result("max_abs_z").unwrap() < 4.0);
    }

    #[test]
    fn exact_starts_at_one_and_decreases() {
        let c = ExperimentConfig { t_grid: vec![0.0, 1.0, 3.0, 8.0], radius: Some(20), ..small() };
        let rec = cmd_exact(&c).unwrap();
        assert_eq!(rec.rows[0][1], Cell::Num(1.0));
        assert_eq!(rec.rows[0][2], Cell::Num(1.0));
        for col in ["lower", "upper", "reflecting"] {
            let v = rec.column(col).unwrap();
            assert!(v.windows(2).all(|w| w[1] <= w[0]), "{col}");
        }
    }

    #[test]
    fn gap_shrinks_with_radius() {
        let c = ExperimentConfig { t_grid: vec![20.0], ..small() };
        let g = |r| cmd_exact(&ExperimentConfig { radius: Some(r), ..c.clone() }).unwrap().result("max_gap").unwrap();
        let (a, b) = (g(8), g(16));
        assert!(b < a && a > 0.0, "{a} {b}");
    }

    #[test]
    fn memory_budget_reports_states() {
        let c = ExperimentConfig { d: 3, radius: Some(400), ..small() };
        let err = cmd_exact(&c).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("states"), "{msg}");
        assert!(matches!(err.downcast_ref::<dormantwalk::Error>(), Some(dormantwalk::Error::MemoryBudget { .. })));
        assert!(exact_state_count(&ExperimentConfig { d: 1, radius: Some(5), ..small() }).unwrap() == 22);
    }

    #[test]
    fn planar_green_with_error_column() {
        let c = ExperimentConfig { d: 2, lambda: vec![1e-6], ..small() };
        let rec = cmd_green(&c).unwrap();
        assert_eq!(rec.columns[5], "est_error");
        let resolvent = &rec.rows[0];
        assert_eq!(resolvent[1], Cell::text("resolvent"));
        let v = resolvent[4].as_f64().unwrap();
        // pi G(0, lambda) = log(1 / lambda) + log 8 + o(1)
        assert!((std::f64::consts::PI * v - (1e6f64).ln() - 8f64.ln()).abs() < 1e-3, "{v}");
        assert!(resolvent[5].as_f64().unwrap() < 1e-8);
    }

    #[test]
    fn transient_green_without_lambda() {
        let rec = cmd_green(&ExperimentConfig { d: 3, ..small() }).unwrap();
        assert!((rec.rows[0][4].as_f64().unwrap() - 1.516_386_059).abs() < 1e-8);
        assert!(cmd_green(&ExperimentConfig { d: 1, ..small() }).is_err());
    }

    #[test]
    fn asympt_reduction_without_dormancy() {
        for d in 1..=3 {
            let c = ExperimentConfig { d, s1: 0.0, t_grid: vec![10.0, 100.0], ..small() };
            let rec = cmd_asympt(&c).unwrap();
            assert_eq!(rec.column("responsive").unwrap(), rec.column("none").unwrap());
            assert!(rec.column("stochastic").is_none());
        }
    }

    #[test]
    fn renewal_reports_both_normalizations() {
        let rec = cmd_renewal(&ExperimentConfig { d: 3, ..small() }).unwrap();
        assert!((rec.result("renewal_limit").unwrap() - 0.897_194).abs() < 1e-6);
        assert_eq!(rec.result("discrete.is_probability"), Some(0.0));
        let rec = cmd_renewal(&ExperimentConfig { lambda: vec![1e-4, 0.5], ..small() }).unwrap();
        assert_eq!(rec.column("within_validity").unwrap(), vec![1.0, 0.0]);
        // (sqrt(s^2 + 4 rho s) - s) / (2 rho) at unit rates
        assert!((rec.result("dormancy.escape").unwrap() - (5f64.sqrt() - 1.0) / 2.0).abs() < 1e-14);
    }

    #[test]
    fn compare_ratio_trend_in_one_dimension() {
        let c = ExperimentConfig { t_grid: vec![100.0, 400.0, 1600.0], ..small() };
        let rec = cmd_compare(&c).unwrap();
        assert_eq!(rec.result("trend.responsive"), Some(1.0));
        let r = rec.column("ratio_responsive").unwrap();
        assert!(r.iter().all(|&x| x < 1.0) && (r[2] - 1.0).abs() < 0.01, "{r:?}");
    }

    #[test]
    fn one_sided_trend() {
        assert!(approaches_one_from_one_side(&[0.8, 0.9, 0.95]));
        assert!(!approaches_one_from_one_side(&[0.8, 1.1, 1.05]));
        assert!(!approaches_one_from_one_side(&[0.9, 0.8]));
    }
}
