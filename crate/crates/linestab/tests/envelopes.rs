use proptest::prelude::*;

use linestab::envelope::{lower_envelope, sandwich, upper_envelope, ArcLabel, MonotoneArc};

/// Quadratics `a (t - c)^2 + b` on `[0, 1]`; two of them cross at most twice.
fn arcs() -> impl Strategy<Value = Vec<(f64, f64, f64)>> {
    prop::collection::vec((-3.0..3.0f64, -2.0..2.0f64, -0.5..1.5f64), 1..6)
}

fn build(id0: usize, params: &[(f64, f64, f64)]) -> Vec<MonotoneArc> {
    params
        .iter()
        .enumerate()
        .map(|(i, &(a, b, c))| MonotoneArc::new(id0 + i, ArcLabel::Index(id0 + i), 0.0, 1.0, 2, move |t| a * (t - c) * (t - c) + b))
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 128, ..ProptestConfig::default() })]

    #[test]
    fn envelopes_are_pointwise_extrema(p in arcs()) {
        let a = build(0, &p);
        let up = upper_envelope(&a).unwrap();
        let lo = lower_envelope(&a).unwrap();
        for i in 0..=200 {
            let t = i as f64 / 200.0;
            let vals = a.iter().map(|x| x.at(t));
            let (mn, mx) = vals.fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| (l.min(v), h.max(v)));
            prop_assert!((up.eval(t).unwrap() - mx).abs() <= 1e-7);
            prop_assert!((lo.eval(t).unwrap() - mn).abs() <= 1e-7);
        }
    }

    #[test]
    fn sandwich_membership_matches_pointwise_bounds(p in arcs(), q in arcs()) {
        let (l, u) = (build(0, &p), build(10, &q));
        let r = sandwich(&l, &u, 0.0, 1.0).unwrap();
        for i in 0..=100 {
            let t = i as f64 / 100.0;
            let floor = l.iter().map(|x| x.at(t)).fold(f64::NEG_INFINITY, f64::max);
            let ceil = u.iter().map(|x| x.at(t)).fold(f64::INFINITY, f64::min);
            if ceil - floor > 1e-6 {
                prop_assert!(r.contains(t, 0.5 * (floor + ceil)));
            } else if floor - ceil > 1e-6 {
                prop_assert!(!r.contains(t, 0.5 * (floor + ceil)));
            }
        }
        for v in &r.vertices {
            let floor = l.iter().map(|x| x.at(v.theta)).fold(f64::NEG_INFINITY, f64::max);
            let ceil = u.iter().map(|x| x.at(v.theta)).fold(f64::INFINITY, f64::min);
            prop_assert!(v.value >= floor - 1e-6 && v.value <= ceil + 1e-6);
        }
    }
}
