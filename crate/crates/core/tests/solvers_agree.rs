use dormantwalk::exact::survival;
use dormantwalk::simulate::estimate_survival;
use dormantwalk::{Estimator, Params};

#[test]
fn planar_sampler_matches_master_equation() {
    let params = Params::new(2, 0.5, 1.5, 2.0, 0.7, 1.3).unwrap();
    let times = [1.0, 3.0, 8.0];
    let curve = survival(&params, 30, &times).unwrap();
    let gap = curve.max_gap();
    assert!(gap < 1e-6, "{gap}");
    let mc = estimate_survival(&params, &times, 100_000, 77, Estimator::Exposure).unwrap();
    for (e, exact) in mc.iter().zip(curve.midpoint()) {
        assert!((e.mean - exact).abs() < 3.5 * e.stderr + gap, "t={}: {} vs {exact}", e.time, e.mean);
    }
}

#[test]
fn killing_only_on_the_trap_without_dormancy() {
    // s1 = 0 in d = 1: survival of a walk killed at the origin, independent of s0
    let a = Params::new(1, 1.0, 1.0, 1.0, 0.3, 0.0).unwrap();
    let b = a.with_s0(4.0);
    let times = [2.0, 10.0];
    let ca = survival(&a, 80, &times).unwrap();
    let cb = survival(&b, 80, &times).unwrap();
    for (x, y) in ca.upper.iter().zip(&cb.upper) {
        assert!((x - y).abs() < 1e-13, "{x} vs {y}");
    }
}
