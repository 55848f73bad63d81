//! One line per acceptance criterion; exits nonzero when any fails.

use std::f64::consts::PI;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use linestab::engine::{
    compare_sets, extremal_lines_global, extremal_lines_through_line, pairwise_region, region_disjoint_case,
    region_through_line, region_unbounded_case, upper_envelope_eu, Mode,
};
use linestab::geometry::{
    separating_plane_bodies, side_operator, transversals_to_four_lines, PluckerLine, Polyhedron, Vec3, SNAP,
};
use linestab::linespace::{edge_frame, gamma_interval, line_from_coords, sigma_eval, Order, Side};
use linestab::oracle::{brute_force_extremal_lines, grid_region_check};
use linestab::permutations::{check_labels, enumerate_permutations, label_bound, permutation_of, sample_transversals};
use linestab::scenes::{gen_lower_bound_scene, gen_random_scene, Scene, SceneFlags};
use linestab::sphere::{hemisphere_order, HemisphereOrder};

/// Extremal vertex count of the lower-bound scene with 3 plate pairs and a
/// 12-facet drum, from the brute-force oracle.
const LOWER_BOUND_REFERENCE: usize = 164;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn bbox() -> (Vec3, Vec3) {
    (Vec3::repeat(-4.0), Vec3::repeat(4.0))
}

/// A random scene with `k` bodies and total facet count at most `max_n`.
fn scene_with_budget(k: usize, max_n: usize, seed: u64, flags: SceneFlags) -> Scene {
    let mut per = (max_n / k + 2).max(4);
    loop {
        let s = gen_random_scene(k, per, bbox(), seed, flags).expect("scene generation");
        if s.n() <= max_n || per == 4 {
            return s;
        }
        per -= 1;
    }
}

/// A random scene with `k` bodies and total facet count at least `min_n`.
fn scene_with_size(k: usize, min_n: usize, seed: u64, flags: SceneFlags) -> Scene {
    let mut per = 4;
    loop {
        let s = gen_random_scene(k, per, bbox(), seed, flags).expect("scene generation");
        if s.n() >= min_n {
            return s;
        }
        per += 1;
    }
}

fn disjoint() -> SceneFlags {
    SceneFlags { pairwise_disjoint: true, ..Default::default() }
}

fn pivot_disjoint() -> SceneFlags {
    SceneFlags { pairwise_disjoint: true, pivot_disjoint: true, ..Default::default() }
}

fn prisms() -> SceneFlags {
    SceneFlags { pairwise_disjoint: true, unbounded_parallel: true, ..Default::default() }
}

fn c1_oracle_equivalence() -> Outcome {
    let mut failures = Vec::new();
    let mut vertices = 0;
    let mut slowest: f64 = 0.0;
    for i in 0..50u64 {
        let k = 2 + (i % 4) as usize;
        let flags = match i % 5 {
            0 => SceneFlags::default(),
            1 | 3 => disjoint(),
            2 => pivot_disjoint(),
            _ => prisms(),
        };
        let s = scene_with_budget(k, 60, 1000 + i, flags);
        let t = Instant::now();
        let oracle = brute_force_extremal_lines(&s).expect("oracle");
        for mode in [Mode::Structured, Mode::RandomizedDc] {
            let ours = extremal_lines_through_line(&s, mode).expect("engine");
            let (extra, missing) = compare_sets(&ours, &oracle, s.scale());
            if !extra.is_empty() || !missing.is_empty() {
                failures.push(format!("scene {i} {mode:?}: +{} -{}", extra.len(), missing.len()));
            }
        }
        slowest = slowest.max(t.elapsed().as_secs_f64());
        vertices += oracle.len();
    }
    let pass = failures.is_empty() && slowest < 60.0;
    outcome(pass, format!("50 scenes, {vertices} oracle vertices, slowest {slowest:.2}s, mismatches {failures:?}"))
}

fn c2_four_lines() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let t = Instant::now();
    let mut max_count = 0;
    let mut worst: f64 = 0.0;
    let mut solved = 0;
    for _ in 0..100_000 {
        let ls: Vec<PluckerLine> = (0..4)
            .map(|_| {
                let p = Vec3::from_fn(|_, _| rng.gen_range(-5.0..5.0));
                let d = Vec3::from_fn(|_, _| rng.gen_range(-1.0..1.0));
                PluckerLine::through(&p, &d).normalized()
            })
            .collect();
        let Ok(sols) = transversals_to_four_lines([&ls[0], &ls[1], &ls[2], &ls[3]]) else { continue };
        solved += 1;
        max_count = max_count.max(sols.len());
        let scale = 1.0 + ls.iter().map(|l| l.point().norm()).fold(0.0, f64::max);
        for s in &sols {
            let s = s.normalized();
            for l in &ls {
                worst = worst.max(side_operator(&s, l).abs() / scale);
            }
        }
    }
    let secs = t.elapsed().as_secs_f64();
    outcome(
        max_count <= 2 && worst <= 1e-9 && secs < 10.0,
        format!("{solved} quadruples, max solutions {max_count}, worst scaled residual {worst:.2e}, {secs:.2}s"),
    )
}

fn c3_gamma_iff() -> Outcome {
    let mut violations = 0;
    let mut checked = 0;
    let mut banded = 0;
    for seed in 0..5u64 {
        let s = scene_with_budget(3, 40, 300 + seed, disjoint());
        let solids = s.solids();
        let pivot = s.pivot_frame();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let edges: Vec<(usize, usize)> =
            (0..solids.len()).flat_map(|p| (0..solids[p].edges.len()).map(move |e| (p, e))).collect();
        let mut n = 0;
        while n < 10_000 {
            let (p0, e0) = edges[rng.gen_range(0..edges.len())];
            let Ok(f) = edge_frame(&solids[p0], p0, e0, &pivot) else { continue };
            let th = rng.gen_range(0.0..f.theta0);
            let Ok((lo, hi, _)) = f.domain(th) else { continue };
            if hi <= lo {
                continue;
            }
            let ph = rng.gen_range(lo..hi);
            let Ok((cs, ct)) = f.center(th) else { continue };
            let c = f.to_world(&Vec3::new(cs * th.cos(), cs * th.sin(), ct));
            let d = f.dir_to_world(&Vec3::new(ph.sin() * th.cos(), ph.sin() * th.sin(), ph.cos()));
            n += 1;
            for q in (0..solids.len()).filter(|&q| q != p0) {
                let clip = solids[q].clip(&c, &d, 0.0);
                for order in [Order::Ahead, Order::Behind] {
                    let Ok(g) = gamma_interval(&f, &solids[q], q, th, order) else { continue };
                    if (ph - g.lower).abs() <= 1e-7 || (ph - g.upper).abs() <= 1e-7 {
                        banded += 1;
                        continue;
                    }
                    let truth = match (clip, order) {
                        (None, _) => false,
                        (Some((_, t1)), Order::Ahead) => t1 > 0.0,
                        (Some((t0, _)), _) => t0 < 0.0,
                    };
                    checked += 1;
                    if truth != (g.lower <= ph && ph <= g.upper) {
                        violations += 1;
                    }
                }
            }
        }
    }
    outcome(violations == 0, format!("5 scenes x 10^4 samples, {checked} order checks, {banded} in band, {violations} violations"))
}

fn c4_grid_membership() -> Outcome {
    let mut outside = 0;
    let mut total_dis = 0;
    let mut transversals = 0;
    for i in 0..20u64 {
        let flags = if i % 2 == 0 { SceneFlags::default() } else { disjoint() };
        let s = scene_with_budget(2 + (i % 3) as usize, 48, 400 + i, flags);
        let region = region_through_line(&s).expect("region");
        let rep = grid_region_check(&s, [50, 50, 50], Some(&region)).expect("grid");
        let band = SNAP * s.scale();
        outside += rep.disagreements.iter().filter(|d| d.band > band).count();
        total_dis += rep.disagreements.len();
        transversals += rep.transversals;
    }
    outcome(outside == 0, format!("20 scenes at 50^3, {transversals} transversal points, {total_dis} disagreements, {outside} outside band"))
}

fn c5_lower_bound() -> Outcome {
    let mut points = Vec::new();
    let mut reference_ok = false;
    let mut detail = String::new();
    for pairs in [2, 3, 4] {
        for drum in [8, 12, 16] {
            let s = gen_lower_bound_scene(pairs, drum, 0).expect("lower-bound scene");
            let count = extremal_lines_through_line(&s, Mode::Structured).expect("engine").len();
            if (pairs, drum) == (3, 12) {
                let oracle = brute_force_extremal_lines(&s).expect("oracle").len();
                reference_ok = count == oracle && count == LOWER_BOUND_REFERENCE;
                detail = format!("(3, 12): engine {count}, oracle {oracle}, reference {LOWER_BOUND_REFERENCE}");
            }
            points.push(((pairs * drum) as f64, count as f64));
        }
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let slope = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / points.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    let counts: Vec<usize> = points.iter().map(|p| p.1 as usize).collect();
    outcome(reference_ok && slope > 0.5, format!("{detail}; counts {counts:?}; slope {slope:.3}"))
}

/// A thick segment from `a` to `b` with an irregular quadrilateral section.
fn stick(a: Vec3, b: Vec3, r: f64) -> Polyhedron {
    let d = (b - a).normalize();
    let u = d.cross(&Vec3::new(0.3, 0.4, 1.0)).normalize();
    let v = d.cross(&u);
    let section = [(1.0, 0.2), (-0.3, 1.0), (-1.0, -0.1), (0.2, -1.0)];
    let pts: Vec<Vec3> = [a, b].iter().flat_map(|e| section.map(|(s, t)| e + r * (s * u + t * v))).collect();
    Polyhedron::convex_hull(&pts).expect("stick")
}

/// Two crossbars on either side of the pivot and long bars off to the side.
/// Tilting a line one way or the other puts a bar before or after the
/// crossbars, so the scene has two geometric permutations.
fn bar_scene(k: usize) -> Scene {
    let mut bodies = vec![
        stick(Vec3::new(1.5, -0.6, 0.0), Vec3::new(1.55, 0.6, 0.1), 0.3),
        stick(Vec3::new(-1.5, -0.6, 0.05), Vec3::new(-1.45, 0.6, -0.05), 0.3),
        stick(Vec3::new(-3.5, 0.9, 0.0), Vec3::new(3.5, 0.95, 0.1), 0.25),
        stick(Vec3::new(-3.4, -0.92, 0.05), Vec3::new(3.6, -0.9, -0.05), 0.25),
    ];
    bodies.truncate(k);
    let pivot = PluckerLine::through(&Vec3::new(0.02, -0.01, 0.0), &Vec3::new(0.03, 0.02, 1.0));
    Scene::new(bodies, pivot, 0, pivot_disjoint()).expect("bar scene")
}

fn c6_permutation_labels() -> Outcome {
    let mut conflicts = 0;
    let mut over_bound = 0;
    let mut perms = Vec::new();
    let scenes = (0..20u64)
        .map(|i| scene_with_budget(2 + (i % 4) as usize, 48, 600 + i, pivot_disjoint()))
        .chain([bar_scene(3), bar_scene(4)]);
    for (i, s) in scenes.enumerate() {
        let check = check_labels(&s, 10_000, i as u64).expect("label check");
        conflicts += check.conflicts;
        let p = enumerate_permutations(&s).expect("permutations").len();
        if p > label_bound(s.k()) {
            over_bound += 1;
        }
        perms.push(p);
    }
    let rich = perms[20..].iter().all(|&p| p >= 2);
    outcome(
        conflicts == 0 && over_bound == 0 && rich,
        format!("20 random and 2 bar scenes, permutation counts {perms:?}, {conflicts} conflicts, {over_bound} over bound"),
    )
}

fn c7_hemisphere() -> Outcome {
    let mut checked = 0;
    let mut violations = 0;
    let mut seed = 700;
    while checked < 10_000 {
        let s = scene_with_budget(2, 24, seed, disjoint());
        seed += 1;
        let solids = s.solids();
        let h = separating_plane_bodies(&solids[0], &solids[1]).expect("separating plane");
        let pivot = s.pivot_frame();
        for c in sample_transversals(&s, 2000, seed) {
            let l = line_from_coords(&c, &pivot);
            let Ok(order) = hemisphere_order(&h, &l.unit_direction()) else { continue };
            let perm = permutation_of(&l, &s).expect("permutation");
            let first = if order == HemisphereOrder::PFirst { 0 } else { 1 };
            checked += 1;
            if perm.order[0] != first {
                violations += 1;
            }
        }
        if seed > 800 {
            break;
        }
    }
    outcome(checked >= 10_000 && violations == 0, format!("{checked} transversals over {} pairs, {violations} violations", seed - 700))
}

fn c8_unbounded() -> Outcome {
    let mut outside = 0;
    let mut env_err: f64 = 0.0;
    let mut lower_err: f64 = 0.0;
    let mut samples = 0;
    for i in 0..10u64 {
        let s = scene_with_budget(2 + (i % 3) as usize, 40, 800 + i, prisms());
        let region = region_unbounded_case(&s).expect("unbounded region");
        let rep = grid_region_check(&s, [100, 100, 20], Some(&region)).expect("grid");
        outside += rep.disagreements.iter().filter(|d| d.band > SNAP * s.scale()).count();
        let env = upper_envelope_eu(&s).expect("envelope");
        let solids = s.solids();
        let pivot = s.pivot_frame();
        for a in 0..40 {
            for b in 0..20 {
                let (th, ph) = (PI * (a as f64 + 0.5) / 40.0, PI * (b as f64 + 0.5) / 20.0);
                let direct = solids.iter().map(|p| sigma_eval(p, &pivot, th, ph, Side::Lower)).collect::<Option<Vec<f64>>>();
                let Some(direct) = direct else { continue };
                let max = direct.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let (e, _) = env.eval(th, ph).expect("envelope defined");
                env_err = env_err.max((e - max).abs() / s.scale());
                if let Some((lo, _)) = region.z_range(th, ph) {
                    lower_err = lower_err.max((lo - e).abs() / s.scale());
                }
                samples += 1;
            }
        }
    }
    let pass = outside == 0 && env_err <= 1e-9 && lower_err <= 1e-9;
    outcome(pass, format!("10 prism scenes at 100x100x20, {outside} disagreements outside band; envelope vs max lower surface over {samples} samples: {env_err:.1e}, region floor vs envelope {lower_err:.1e}"))
}

fn c9_disjoint_case() -> Outcome {
    let mut mismatches = Vec::new();
    let mut total = 0;
    for i in 0..10u64 {
        let s = scene_with_budget(2 + (i % 4) as usize, 48, 900 + i, pivot_disjoint());
        let ours = region_disjoint_case(&s).expect("disjoint case").vertices;
        let structured = extremal_lines_through_line(&s, Mode::Structured).expect("engine");
        let (a, b) = compare_sets(&ours, &structured, s.scale());
        if !a.is_empty() || !b.is_empty() {
            mismatches.push(i);
        }
        total += structured.len();
    }
    outcome(mismatches.is_empty(), format!("10 scenes, {total} vertices, mismatching scenes {mismatches:?}"))
}

/// A right prism over a regular `m`-gon of radius `r`, rotated by `rot`
/// and moved to `at`.
fn prism(m: usize, r: f64, h: f64, rot: &nalgebra::Rotation3<f64>, at: Vec3) -> Polyhedron {
    let pts: Vec<Vec3> = (0..m)
        .flat_map(|i| {
            let a = 2.0 * PI * i as f64 / m as f64;
            [Vec3::new(r * a.cos(), r * a.sin(), -h), Vec3::new(r * a.cos(), r * a.sin(), h)]
        })
        .collect();
    Polyhedron::convex_hull(&pts).expect("prism").transformed(rot, &at)
}

fn c10_pairwise_linearity() -> Outcome {
    let pivot = PluckerLine::through(&Vec3::new(0.05, -0.03, 0.0), &Vec3::new(0.12, 0.07, 1.0));
    let r1 = nalgebra::Rotation3::from_euler_angles(1.2, 0.3, 0.1);
    let r2 = nalgebra::Rotation3::from_euler_angles(0.2, 1.1, 0.7);
    let mut counts = Vec::new();
    for total in [16, 32, 64, 128] {
        let m = total / 2 - 2;
        let p = prism(m, 1.0, 0.6, &r1, Vec3::new(2.5, 0.3, 0.2));
        let q = prism(m, 1.0, 0.6, &r2, Vec3::new(-2.4, -0.6, -0.3));
        let n = p.n() + q.n();
        let v = pairwise_region(&p, &q, &pivot).expect("pairwise").vertices.len();
        counts.push((n, v));
    }
    let c = counts[0].1 as f64 / counts[0].0 as f64;
    let pass = c > 0.0 && counts.iter().all(|&(n, v)| v as f64 <= 1.5 * c * n as f64);
    outcome(pass, format!("(n_P + n_Q, vertices) {counts:?}, fitted C {c:.3}"))
}

fn c11_runtime() -> Outcome {
    let s = scene_with_size(5, 100, 1100, SceneFlags::default());
    let t = Instant::now();
    let v = extremal_lines_through_line(&s, Mode::Structured).expect("engine").len();
    let through = t.elapsed().as_secs_f64();
    let g = scene_with_size(3, 36, 1101, SceneFlags::default());
    let t = Instant::now();
    let gv = extremal_lines_global(&g).expect("global").len();
    let global = t.elapsed().as_secs_f64();
    outcome(
        through < 10.0 && global < 120.0,
        format!("through-line k=5 n={} ({v} vertices) {through:.2}s; global k=3 n={} ({gv} vertices) {global:.2}s", s.n(), g.n()),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("oracle equivalence", c1_oracle_equivalence),
        ("four-lines solver", c2_four_lines),
        ("gamma interval iff", c3_gamma_iff),
        ("grid membership", c4_grid_membership),
        ("lower-bound reproduction", c5_lower_bound),
        ("permutation labels", c6_permutation_labels),
        ("hemisphere ordering", c7_hemisphere),
        ("unbounded case", c8_unbounded),
        ("disjoint case", c9_disjoint_case),
        ("pairwise linearity", c10_pairwise_linearity),
        ("end-to-end runtime", c11_runtime),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        if !filter.is_empty() && !filter.iter().any(|x| name.contains(x.as_str())) {
            continue;
        }
        let t = Instant::now();
        let o = f();
        println!("criterion {:>2} {name}: {} ({:.1}s) {}", i + 1, if o.pass { "PASS" } else { "FAIL" }, t.elapsed().as_secs_f64(), o.detail);
        failed += !o.pass as usize;
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
