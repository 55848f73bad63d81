use proptest::prelude::*;

use linestab::engine::{compare_sets, extremal_lines_through_line, region_through_line, Mode};
use linestab::geometry::{side_operator, transversals_to_four_lines, PluckerLine, Vec3};
use linestab::linespace::{line_from_coords, LineCoords};
use linestab::permutations::{permutation_of, sample_transversals};
use linestab::scenes::{gen_random_scene, Scene, SceneFlags};

fn vec3(r: f64) -> impl Strategy<Value = Vec3> {
    (-r..r, -r..r, -r..r).prop_map(|(x, y, z)| Vec3::new(x, y, z))
}

fn line() -> impl Strategy<Value = PluckerLine> {
    (vec3(5.0), vec3(1.0))
        .prop_filter("direction", |(_, d)| d.norm() > 0.1)
        .prop_map(|(p, d)| PluckerLine::through(&p, &d).normalized())
}

fn scene(flags: SceneFlags) -> impl Strategy<Value = Scene> {
    (2usize..4, 4usize..9, 0u64..10_000).prop_map(move |(k, n, seed)| {
        gen_random_scene(k, n, (Vec3::repeat(-4.0), Vec3::repeat(4.0)), seed, flags).unwrap()
    })
}

fn disjoint() -> SceneFlags {
    SceneFlags { pairwise_disjoint: true, ..Default::default() }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn side_operator_is_antisymmetric_under_reversal(a in line(), b in line()) {
        let s = side_operator(&a, &b);
        prop_assert!((side_operator(&a, &b.reversed()) + s).abs() <= 1e-9 * (1.0 + s.abs()));
        prop_assert!((side_operator(&b, &a) - s).abs() <= 1e-9 * (1.0 + s.abs()));
    }

    #[test]
    fn four_line_transversals_meet_all_four(a in line(), b in line(), c in line(), d in line()) {
        if let Ok(sols) = transversals_to_four_lines([&a, &b, &c, &d]) {
            prop_assert!(sols.len() <= 2);
            for s in sols {
                let s = s.normalized();
                for l in [&a, &b, &c, &d] {
                    prop_assert!(side_operator(&s, l).abs() <= 1e-8 * (1.0 + l.point().norm()));
                }
            }
        }
    }

    #[test]
    fn scene_round_trips_through_json(s in scene(SceneFlags::default())) {
        let text = s.to_json();
        let back = Scene::from_json(&text).unwrap();
        prop_assert_eq!(back.to_json(), text);
        prop_assert_eq!(back.n(), s.n());
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, ..ProptestConfig::default() })]

    #[test]
    fn extremal_lines_are_certified(s in scene(SceneFlags::default())) {
        let pivot = s.pivot_frame();
        let solids = s.solids();
        let tol = 1e-6 * s.scale();
        for v in extremal_lines_through_line(&s, Mode::Structured).unwrap() {
            prop_assert!(v.features.len() >= 2);
            let l = line_from_coords(&v.coords, &pivot);
            prop_assert!(l.distance(&v.line) <= tol);
            let missed = solids.iter().filter(|p| p.clip(&l.point(), &l.unit_direction(), tol).is_none()).count();
            prop_assert_eq!(missed, v.depth);
        }
    }

    #[test]
    fn modes_agree(s in scene(SceneFlags::default())) {
        let a = extremal_lines_through_line(&s, Mode::Structured).unwrap();
        let b = extremal_lines_through_line(&s, Mode::RandomizedDc).unwrap();
        let (x, y) = compare_sets(&a, &b, s.scale());
        prop_assert!(x.is_empty() && y.is_empty());
    }

    #[test]
    fn region_interior_lines_stab_every_body(s in scene(disjoint()), seed in 0u64..1000) {
        let region = region_through_line(&s).unwrap();
        let pivot = s.pivot_frame();
        let solids = s.solids();
        for c in sample_transversals(&s, 64, seed) {
            prop_assert!(region.contains(&c));
            let Some((lo, hi)) = region.z_range(c.theta, c.phi) else { continue };
            let mid = LineCoords { z: 0.5 * (lo + hi), ..c };
            let l = line_from_coords(&mid, &pivot);
            prop_assert!(solids.iter().all(|p| p.clip(&l.point(), &l.unit_direction(), 1e-7 * s.scale()).is_some()));
        }
    }

    #[test]
    fn reversed_line_has_reversed_permutation(s in scene(disjoint()), seed in 0u64..1000) {
        let pivot = s.pivot_frame();
        for c in sample_transversals(&s, 16, seed) {
            let l = line_from_coords(&c, &pivot);
            let a = permutation_of(&l, &s).unwrap();
            let b = permutation_of(&l.reversed(), &s).unwrap();
            prop_assert_eq!(b, a.reversed());
        }
    }
}
