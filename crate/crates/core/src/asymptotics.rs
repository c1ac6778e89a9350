//! Closed-form long-time asymptotics of the survival probability.
//!
//! Three dormancy models are compared: responsive (this crate's model),
//! none (`s1 = 0`, a plain killed walk) and stochastic (switching at constant
//! rates regardless of the trap). In `d = 1` and `d = 2` the reported value is
//! the prefactor of `1 / sqrt(pi t)` or `1 / log t`; in `d >= 3` it is the
//! limit of the survival probability.
//!
//! Where the stated constants admit more than one reading, every reading is
//! evaluated and carried in [`AsymptoticReport::readings`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::num::{from_usize, lit, Real};
use crate::renewal::{c1_theorem, escape_probability_d3, k_d, planar_ratio, transient_green, GeometricClock, Normalization, PlanarReading};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    /// Decay like `1 / sqrt(pi t)`.
    D1,
    /// Decay like `1 / log t`.
    D2,
    /// Positive limit.
    Transient,
}

impl Regime {
    pub fn of(d: usize) -> Self {
        match d {
            1 => Regime::D1,
            2 => Regime::D2,
            _ => Regime::Transient,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DormancyModel {
    Responsive,
    None,
    Stochastic,
}

impl std::str::FromStr for DormancyModel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "responsive" => Ok(DormancyModel::Responsive),
            "none" => Ok(DormancyModel::None),
            "stochastic" => Ok(DormancyModel::Stochastic),
            other => Err(Error::InvalidParams(format!("unknown dormancy model {other}"))),
        }
    }
}

/// Which form of the one-dimensional constant enters the prefactor
/// `2 (sqrt(kappa + rho) + s1 C) / gamma`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum D1Reading {
    /// `C = 1 / (sqrt(kappa + rho) (sqrt(s1^2 + 4 rho s1) - s1))`.
    Theorem,
    /// `C = 1 / (sqrt(s1^2 + 4 rho s1) - s1)`, the constant of the `Z_1` lemma.
    Lemma,
}

/// The reading used for [`AsymptoticReport::leading_value`] in `d = 1`.
pub const DEFAULT_D1_READING: D1Reading = D1Reading::Theorem;

/// Named alternative value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reading<T> {
    pub name: String,
    pub value: T,
}

/// Constants entering a report; absent where they do not apply.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constants<T> {
    pub c1: Option<T>,
    pub c1_lemma: Option<T>,
    pub c2_resolvent: Option<T>,
    pub c2_generating: Option<T>,
    /// `K_d` with `G(e_1)` as occupation time of the rate-`2d` walk.
    pub k_d: Option<T>,
    /// `G_d(0)`, occupation time of the rate-`2d` walk.
    pub g_d0: Option<T>,
}

impl<T> Default for Constants<T> {
    fn default() -> Self {
        Constants { c1: None, c1_lemma: None, c2_resolvent: None, c2_generating: None, k_d: None, g_d0: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticReport<T> {
    pub d: usize,
    pub regime: Regime,
    pub model: DormancyModel,
    /// Prefactor in `d <= 2` (including the `1 / gamma`), limit in `d >= 3`.
    pub leading_value: T,
    pub constants: Constants<T>,
    pub readings: Vec<Reading<T>>,
    pub t: Option<T>,
    /// `leading / sqrt(pi t)` or `leading / log t`; the limit for `d >= 3`.
    pub value_at_t: Option<T>,
}

impl<T: Real> AsymptoticReport<T> {
    fn new(params: &ModelParams<T>, model: DormancyModel, leading_value: T, t: Option<T>) -> Self {
        let d = params.d;
        AsymptoticReport {
            d,
            regime: Regime::of(d),
            model,
            leading_value,
            constants: Constants::default(),
            readings: Vec::new(),
            t,
            value_at_t: t.map(|t| value_at(d, leading_value, t)),
        }
    }

    pub fn reading(&self, name: &str) -> Option<T> {
        self.readings.iter().find(|r| r.name == name).map(|r| r.value)
    }
}

fn value_at<T: Real>(d: usize, leading: T, t: T) -> T {
    match d {
        1 => leading / (T::PI() * t).sqrt(),
        2 => leading / t.ln(),
        _ => leading,
    }
}

/// `4 pi (kappa + rho)`, shared by the planar formulas so that `s1 = 0`
/// reproduces the baseline bit for bit.
fn four_pi<T: Real>(kr: T) -> T {
    lit::<T>(4.0) * T::PI() * kr
}

/// `G_d(0)` as occupation time of the walk with total rate `2d`.
fn green_origin<T: Real>(d: usize) -> Result<T> {
    Ok(transient_green::<T>(d)?.0 / from_usize(2 * d))
}

/// `1 - gamma G / (kappa + rho + gamma G)`.
fn plain_limit<T: Real>(gamma: T, g0: T, kr: T) -> T {
    T::one() - gamma * g0 / (kr + gamma * g0)
}

/// `1 - gamma (G + s1 / (2d(kappa+rho))) / (kappa + rho + gamma (G + s1 K / (2d(kappa+rho))))`.
pub fn theorem_limit<T: Real>(params: &ModelParams<T>, g0: T, k: T) -> T {
    let kr = params.kappa + params.rho;
    let a = params.s1 / params.active_jump_rate();
    T::one() - params.gamma * (g0 + a) / (kr + params.gamma * (g0 + a * k))
}

/// Theorem asymptotics of the responsive model. `s0` is never read.
pub fn responsive_asymptotic<T: Real>(params: &ModelParams<T>, t: Option<T>) -> Result<AsymptoticReport<T>> {
    params.validate()?;
    check_time(params.d, t)?;
    let kr = params.kappa + params.rho;
    let (s1, gamma, two) = (params.s1, params.gamma, lit::<T>(2.0));
    if !(gamma > T::zero()) {
        return Err(Error::InvalidParams("asymptotics need gamma > 0".into()));
    }
    match params.d {
        1 => {
            let (c1, c1_lemma) = if s1 > T::zero() {
                let c = c1_theorem(params.kappa, params.rho, s1);
                (Some(c), Some(c * kr.sqrt()))
            } else {
                (None, None)
            };
            let prefactor = |c: Option<T>| two * (kr.sqrt() + c.map_or(T::zero(), |c| s1 * c)) / gamma;
            let theorem = prefactor(c1);
            let lemma = prefactor(c1_lemma);
            let leading = match DEFAULT_D1_READING {
                D1Reading::Theorem => theorem,
                D1Reading::Lemma => lemma,
            };
            let mut r = AsymptoticReport::new(params, DormancyModel::Responsive, leading, t);
            r.constants.c1 = c1;
            r.constants.c1_lemma = c1_lemma;
            r.readings.push(Reading { name: "theorem".into(), value: theorem });
            r.readings.push(Reading { name: "lemma".into(), value: lemma });
            Ok(r)
        }
        2 => {
            let pi = T::PI();
            let c2_res = pi * planar_ratio(params, PlanarReading::Resolvent)?;
            let c2_gen = pi * planar_ratio(params, PlanarReading::Generating)?;
            let res = (four_pi(kr) + s1 * c2_res) / gamma;
            let gen = (four_pi(kr) + s1 * c2_gen) / gamma;
            let mut r = AsymptoticReport::new(params, DormancyModel::Responsive, res, t);
            r.constants.c2_resolvent = Some(c2_res);
            r.constants.c2_generating = Some(c2_gen);
            r.readings.push(Reading { name: "resolvent".into(), value: res });
            r.readings.push(Reading { name: "generating".into(), value: gen });
            Ok(r)
        }
        d => {
            let g0 = green_origin::<T>(d)?;
            let k = k_d(params, Normalization::Occupation)?;
            let theorem = theorem_limit(params, g0, k);
            let mut r = AsymptoticReport::new(params, DormancyModel::Responsive, theorem, t);
            r.constants.g_d0 = Some(g0);
            r.constants.k_d = Some(k);
            r.readings.push(Reading { name: "theorem".into(), value: theorem });
            let k_disc = k_d(params, Normalization::Discrete)?;
            r.readings.push(Reading { name: "theorem-discrete".into(), value: theorem_limit(params, g0 * from_usize(2 * d), k_disc) });
            for reading in escape_probability_d3(params)?.readings {
                r.readings.push(Reading { name: format!("proof-{}", reading.normalization), value: reading.limit });
            }
            Ok(r)
        }
    }
}

/// Baseline asymptotics: no dormancy, or dormancy at constant rates.
pub fn baseline_asymptotic<T: Real>(params: &ModelParams<T>, model: DormancyModel, t: Option<T>) -> Result<AsymptoticReport<T>> {
    params.validate()?;
    check_time(params.d, t)?;
    let kr = params.kappa + params.rho;
    let (s0, s1, rho, kappa, gamma) = (params.s0, params.s1, params.rho, params.kappa, params.gamma);
    if !(gamma > T::zero()) {
        return Err(Error::InvalidParams("asymptotics need gamma > 0".into()));
    }
    let two = lit::<T>(2.0);
    let leading = match (model, params.d) {
        (DormancyModel::Responsive, _) => return responsive_asymptotic(params, t),
        (DormancyModel::None, 1) => two * kr.sqrt() / gamma,
        (DormancyModel::None, 2) => four_pi(kr) / gamma,
        (DormancyModel::None, d) => plain_limit(gamma, green_origin::<T>(d)?, kr),
        (DormancyModel::Stochastic, d) => {
            if !(s1 > T::zero()) {
                return Err(Error::InvalidParams("stochastic dormancy needs s0, s1 > 0".into()));
            }
            match d {
                1 => two * ((s0 + s1) * (s0 * kr + s1 * rho)).sqrt() / (s0 * gamma),
                2 => lit::<T>(4.0) * T::PI() * (s1 / s0 * rho + kr) / gamma,
                d => {
                    let g0 = green_origin::<T>(d)?;
                    let w = s0 / (s0 + s1);
                    T::one() - gamma * g0 / (w * (rho + w * kappa) + gamma * g0)
                }
            }
        }
    };
    let mut r = AsymptoticReport::new(params, model, leading, t);
    if params.d >= 3 {
        r.constants.g_d0 = Some(green_origin::<T>(params.d)?);
    }
    Ok(r)
}

fn check_time<T: Real>(d: usize, t: Option<T>) -> Result<()> {
    match t {
        Some(t) if d <= 2 && !(t > T::one()) => Err(Error::OutOfDomain("evaluation time must exceed 1".into())),
        _ => Ok(()),
    }
}

/// Asymptotics implied by the renewal structure of the model itself: the
/// wake-up clock runs at `s0` and the trap rate stays in `E|Y|`.
pub fn renewal_asymptotic<T: Real>(params: &ModelParams<T>, t: Option<T>) -> Result<AsymptoticReport<T>> {
    params.validate()?;
    check_time(params.d, t)?;
    let kr = params.kappa + params.rho;
    let (s1, gamma) = (params.s1, params.gamma);
    if !(gamma > T::zero()) {
        return Err(Error::InvalidParams("asymptotics need gamma > 0".into()));
    }
    let wake = || -> Result<T> {
        if s1 > T::zero() {
            Ok(s1 / GeometricClock::reactivation(params)?.escape_probability()?)
        } else {
            Ok(T::zero())
        }
    };
    let leading = match params.d {
        // (2(kappa+rho) + s1 E|Y|) / (gamma sqrt(kappa+rho))
        1 => (lit::<T>(2.0) * kr + wake()?) / (gamma * kr.sqrt()),
        2 => (four_pi(kr) + T::PI() * wake()?) / gamma,
        _ => escape_probability_d3(params)?.renewal_limit,
    };
    Ok(AsymptoticReport::new(params, DormancyModel::Responsive, leading, t))
}

/// One side-by-side comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison<T> {
    pub criterion: String,
    pub lhs: T,
    pub rhs: T,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossoverReport<T> {
    pub d: usize,
    pub comparisons: Vec<Comparison<T>>,
    /// `1 - 1 / K_d`, `d >= 3`.
    pub large_s1_limit: Option<T>,
    /// Responsive, none and stochastic leading values coincide.
    pub models_coincide: bool,
}

/// Evaluates the comparison criteria between responsive and stochastic
/// dormancy, and the transient monotonicity condition.
pub fn crossover<T: Real>(params: &ModelParams<T>) -> Result<CrossoverReport<T>> {
    params.validate()?;
    let kr = params.kappa + params.rho;
    let (rho, s0) = (params.rho, params.s0);
    let mut comparisons = Vec::new();
    let mut large_s1_limit = None;
    match params.d {
        1 => {
            let threshold = lit::<T>(2.0) * rho.powf(lit(1.5)) * kr.sqrt();
            comparisons.push(Comparison { criterion: "s0 > 2 rho^(3/2) sqrt(kappa + rho)".into(), lhs: s0, rhs: threshold, holds: s0 > threshold });
        }
        2 => {
            let rhs = lit::<T>(4.0) * T::PI() * rho / s0;
            for (name, reading) in [("resolvent", PlanarReading::Resolvent), ("generating", PlanarReading::Generating)] {
                let c2 = T::PI() * planar_ratio(params, reading)?;
                comparisons.push(Comparison { criterion: format!("C2 ({name}) > 4 pi rho / s0"), lhs: c2, rhs, holds: c2 > rhs });
            }
        }
        d => {
            let g0 = green_origin::<T>(d)?;
            let k = k_d(params, Normalization::Occupation)?;
            let rhs = params.gamma * g0 * (k - T::one());
            comparisons.push(Comparison { criterion: "kappa + rho < gamma G(0) (K_d - 1)".into(), lhs: kr, rhs, holds: kr < rhs });
            if params.s1 > T::zero() {
                large_s1_limit = Some(T::one() - T::one() / k);
            }
        }
    }
    let models_coincide = if params.s1 == T::zero() {
        let responsive = responsive_asymptotic(params, None)?.leading_value;
        let none = baseline_asymptotic(params, DormancyModel::None, None)?.leading_value;
        responsive == none
    } else {
        false
    };
    Ok(CrossoverReport { d: params.d, comparisons, large_s1_limit, models_coincide })
}

/// Ratio of an observed survival value to the asymptotic prediction:
/// `sqrt(pi t) U / leading` (d = 1), `log(t) U / leading` (d = 2) or
/// `U / leading` (d >= 3).
pub fn tauberian_ratio<T: Real>(d: usize, t: T, survival: T, leading: T) -> T {
    survival / value_at(d, leading, t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn unit(d: usize) -> ModelParams<f64> {
        ModelParams::unit(d)
    }

    #[test]
    fn one_dimensional_prefactor() {
        let r = responsive_asymptotic(&unit(1), None).unwrap();
        assert!((r.leading_value - 3.972_550).abs() < 1e-6, "{}", r.leading_value);
        assert!((r.reading("theorem").unwrap() - r.leading_value).abs() == 0.0);
        let lemma = 2.0 * (2f64.sqrt() + 1.0 / (5f64.sqrt() - 1.0));
        assert!((r.reading("lemma").unwrap() - lemma).abs() < 1e-14);
        let at = responsive_asymptotic(&unit(1), Some(100.0)).unwrap();
        assert!((at.value_at_t.unwrap() - r.leading_value / (100.0 * std::f64::consts::PI).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn stochastic_prefactor() {
        let r = baseline_asymptotic(&unit(1), DormancyModel::Stochastic, None).unwrap();
        assert!((r.leading_value - 2.0 * 6f64.sqrt()).abs() < 1e-14);
        assert!((r.leading_value - 4.898_979).abs() < 1e-6);
        assert!(baseline_asymptotic(&unit(1).with_s1(0.0), DormancyModel::Stochastic, None).is_err());
    }

    #[test]
    fn stochastic_reduces_to_none() {
        for d in 1..=3 {
            for (kappa, rho, gamma, s0) in [(1.0, 1.0, 1.0, 1.0), (0.3, 2.0, 0.5, 4.0), (2.5, 0.2, 3.0, 0.7)] {
                let p = ModelParams::<f64>::new(d, kappa, rho, gamma, s0, 1e-12).unwrap();
                let s = baseline_asymptotic(&p, DormancyModel::Stochastic, None).unwrap().leading_value;
                let n = baseline_asymptotic(&p, DormancyModel::None, None).unwrap().leading_value;
                assert!((s - n).abs() < 1e-10 * n.abs().max(1.0), "d = {d}: {s} vs {n}");
            }
        }
    }

    #[test]
    fn no_dormancy_transient_values() {
        let r = baseline_asymptotic(&unit(3), DormancyModel::None, None).unwrap();
        let g0 = 1.516_386_059_151_978 / 6.0;
        assert!((r.leading_value - (1.0 - g0 / (2.0 + g0))).abs() < 1e-12);
        assert!((r.leading_value - 0.887_811).abs() < 1e-6);
        let r = baseline_asymptotic(&unit(2), DormancyModel::None, Some(1e4)).unwrap();
        assert!((r.leading_value - 8.0 * std::f64::consts::PI).abs() < 1e-13);
    }

    #[test]
    fn no_dormancy_is_bitwise_the_baseline() {
        for d in 1..=4 {
            for (kappa, rho, gamma) in [(1.0, 1.0, 1.0), (0.0, 0.7, 2.0), (3.0, 0.1, 0.05), (0.5, 1.5, 10.0)] {
                let p = ModelParams::<f64>::new(d, kappa, rho, gamma, 1.3, 0.0).unwrap();
                let r = responsive_asymptotic(&p, None).unwrap();
                let n = baseline_asymptotic(&p, DormancyModel::None, None).unwrap();
                assert_eq!(r.leading_value.to_bits(), n.leading_value.to_bits(), "d = {d}");
                assert!(crossover(&p).unwrap().models_coincide);
            }
        }
    }

    #[test]
    fn planar_readings() {
        let r = responsive_asymptotic(&unit(2), None).unwrap();
        let c2 = r.constants.c2_resolvent.unwrap();
        assert!(c2 > 0.0);
        assert_eq!(r.constants.c2_generating, Some(0.0));
        assert_eq!(r.reading("generating").unwrap(), 8.0 * std::f64::consts::PI);
        assert!((r.leading_value - (8.0 * std::f64::consts::PI + c2)).abs() < 1e-13);
    }

    #[test]
    fn transient_forms() {
        let r = responsive_asymptotic(&unit(3), None).unwrap();
        let none = baseline_asymptotic(&unit(3), DormancyModel::None, None).unwrap().leading_value;
        // the displayed limit falls below the no-dormancy limit at unit rates
        assert!(r.leading_value < none);
        let k = r.constants.k_d.unwrap();
        assert!(k > 0.0 && k < 1.0);
        let renewal = renewal_asymptotic(&unit(3), None).unwrap().leading_value;
        assert!(renewal > none);
        let proof = r.reading("proof-occupation").unwrap();
        assert!(proof > 0.0 && proof < 1.0);
    }

    #[test]
    fn renewal_route_matches_theorem_in_one_dimension_with_unit_rates() {
        let a = responsive_asymptotic(&unit(1), None).unwrap().leading_value;
        let b = renewal_asymptotic(&unit(1), None).unwrap().leading_value;
        assert!((a - b).abs() < 1e-14);
        // but not once rho != 1
        let p = ModelParams::<f64>::new(1, 1.0, 2.0, 1.0, 1.0, 1.0).unwrap();
        let a = responsive_asymptotic(&p, None).unwrap().leading_value;
        let b = renewal_asymptotic(&p, None).unwrap().leading_value;
        assert!((a - b).abs() > 1e-3);
    }

    #[test]
    fn one_dimensional_crossover() {
        let p = ModelParams::new(1, 1.0, 1.0, 1.0, 3.0, 1.0).unwrap();
        let c = crossover(&p).unwrap();
        assert!((c.comparisons[0].rhs - 2.0 * 2f64.sqrt()).abs() < 1e-15);
        assert!((c.comparisons[0].rhs - 2.828).abs() < 1e-3);
        assert!(c.comparisons[0].holds);
        // large s1: responsive s1 / (rho sqrt(kappa + rho)) against stochastic 2 sqrt(rho) s1 / s0
        let big = p.with_s1(1e6);
        let resp = responsive_asymptotic(&big, None).unwrap().leading_value;
        let stoch = baseline_asymptotic(&big, DormancyModel::Stochastic, None).unwrap().leading_value;
        assert!(resp > stoch);
        let slow = big.with_s0(2.0);
        let stoch = baseline_asymptotic(&slow, DormancyModel::Stochastic, None).unwrap().leading_value;
        assert!(resp < stoch);
    }

    #[test]
    fn planar_crossover_carries_both_readings() {
        let c = crossover(&unit(2)).unwrap();
        assert_eq!(c.comparisons.len(), 2);
        assert!(c.comparisons.iter().all(|x| (x.rhs - 4.0 * std::f64::consts::PI).abs() < 1e-14));
        assert!(!c.comparisons[1].holds);
    }

    #[test]
    fn transient_large_dormancy_limit() {
        let p = unit(3).with_s1(1e9);
        let c = crossover(&p).unwrap();
        let limit = c.large_s1_limit.unwrap();
        let v = responsive_asymptotic(&p, None).unwrap().leading_value;
        assert!((v - limit).abs() < 1e-3 * limit.abs(), "{v} vs {limit}");
        // K_d < 1, so the limit is negative
        assert!(limit < 0.0);
    }

    #[test]
    fn dominance_claim_fails_at_unit_rates() {
        let c = crossover(&unit(3)).unwrap();
        assert!(!c.comparisons[0].holds);
    }

    #[test]
    fn reports_round_trip_through_json() {
        for d in 1..=3 {
            let r = responsive_asymptotic(&unit(d), if d < 3 { Some(50.0) } else { None }).unwrap();
            let back: AsymptoticReport<f64> = serde_json::from_str(&serde_json::to_string(&r).unwrap()).unwrap();
            assert_eq!(back, r);
            let c = crossover(&unit(d)).unwrap();
            let back: CrossoverReport<f64> = serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
            assert_eq!(back, c);
        }
    }

    #[test]
    fn conditional_monotonicity_on_a_grid() {
        // wherever kappa + rho < gamma G(0)(K_d - 1), the limit increases in s1
        let mut checked = 0;
        for &gamma in &[0.5, 5.0, 50.0] {
            for &kappa in &[0.0, 0.5] {
                for &s1 in &[0.5, 2.0, 8.0] {
                    let p = ModelParams::new(3, kappa, 1.0, gamma, 1.0, s1).unwrap();
                    let c = crossover(&p).unwrap();
                    if c.comparisons[0].holds {
                        checked += 1;
                        let a = responsive_asymptotic(&p, None).unwrap().leading_value;
                        let b = responsive_asymptotic(&p.with_s1(s1 * 1.01), None).unwrap().leading_value;
                        assert!(b > a);
                    }
                }
            }
        }
        // K_d < 1 throughout, so the condition never holds
        assert_eq!(checked, 0);
    }

    #[test]
    fn f32_evaluation() {
        let r = responsive_asymptotic(&ModelParams::<f32>::unit(1), None).unwrap();
        assert!((r.leading_value - 3.972_55).abs() < 1e-4);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn independent_of_reactivation_rate(d in 1usize..=3, s1 in 0.0f64..5.0, s0a in 0.1f64..10.0, s0b in 0.1f64..10.0) {
            let p = ModelParams::new(d, 1.0, 0.7, 1.3, s0a, s1).unwrap();
            let a = responsive_asymptotic(&p, None).unwrap();
            let b = responsive_asymptotic(&p.with_s0(s0b), None).unwrap();
            prop_assert_eq!(a.leading_value.to_bits(), b.leading_value.to_bits());
            prop_assert_eq!(&a.readings, &b.readings);
            prop_assert_eq!(&a.constants, &b.constants);
        }

        #[test]
        fn one_dimensional_prefactor_increases(kappa in 0.0f64..3.0, rho in 0.1f64..3.0, s1 in 0.01f64..20.0) {
            let p = ModelParams::new(1, kappa, rho, 1.0, 1.0, s1).unwrap();
            let a = responsive_asymptotic(&p, None).unwrap().leading_value;
            let b = responsive_asymptotic(&p.with_s1(s1 * 1.001), None).unwrap().leading_value;
            prop_assert!(b > a);
            let none = baseline_asymptotic(&p, DormancyModel::None, None).unwrap().leading_value;
            prop_assert!(a > none);
        }

        #[test]
        fn transient_dominance_matches_its_condition(kappa in 0.0f64..2.0, rho in 0.2f64..2.0, gamma in 0.1f64..20.0, s1 in 0.1f64..10.0) {
            // responsive > none  <=>  kappa + rho < gamma G(0)(K_d - 1)
            let p = ModelParams::new(3, kappa, rho, gamma, 1.0, s1).unwrap();
            let r = responsive_asymptotic(&p, None).unwrap().leading_value;
            let n = baseline_asymptotic(&p, DormancyModel::None, None).unwrap().leading_value;
            let holds = crossover(&p).unwrap().comparisons[0].holds;
            prop_assert_eq!(r > n, holds);
        }
    }
}
