//! Scenes: polyhedra plus the pivot line `ℓ₀`, their JSON form, flag
//! validation, the general-position audit and perturbation, and generators.

use std::f64::consts::PI;
use std::path::Path;

use minilp::{ComparisonOp, OptimizationDirection, Problem};
use nalgebra::{Rotation3, Unit};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Diagnostic, Error, Result};
use crate::geometry::{
    any_orthogonal, separating_plane_bodies, side_operator, stabs, transversals_to_four_lines,
    PluckerLine, Polyhedron, Vec3, EPS,
};
use crate::linespace::Pivot;

/// Format version written by [`Scene::to_json`].
pub const SCENE_VERSION: u32 = 1;

/// Unbounded bodies are replaced by their core swept this many scene
/// diameters along the unbounded direction.
pub const EXTENSION_FACTOR: f64 = 100.0;

/// Relative tolerance of the general-position audit.
pub const AUDIT_TOL: f64 = 1e-8;

/// At most this many edge triples are handed to the four-lines solver by the
/// audit; larger scenes are sampled.
pub const AUDIT_TRIPLE_CAP: usize = 200_000;

/// Lean of the lower-bound plates, in radians; larger than the perturbation
/// so that no edge comes back to vertical.
const LEAN: f64 = 3e-3;

const PERTURB_RETRIES: usize = 20;

/// Declared properties, checked whenever a scene is built or loaded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SceneFlags {
    #[serde(default)]
    pub pairwise_disjoint: bool,
    #[serde(default)]
    pub pivot_disjoint: bool,
    #[serde(default)]
    pub unbounded_parallel: bool,
}

#[derive(Debug, Clone)]
pub struct Scene {
    pub polyhedra: Vec<Polyhedron>,
    pub pivot: PluckerLine,
    pub seed: u64,
    pub flags: SceneFlags,
}

#[derive(Serialize, Deserialize)]
struct PivotFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    point: Option<[f64; 3]>,
    direction: [f64; 3],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    moment: Option<[f64; 3]>,
}

#[derive(Serialize, Deserialize)]
struct PolyFile {
    vertices: Vec<[f64; 3]>,
    facets: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    unbounded_dir: Option<[f64; 3]>,
}

#[derive(Serialize, Deserialize)]
struct SceneFile {
    version: u32,
    #[serde(default)]
    seed: u64,
    pivot: PivotFile,
    #[serde(default)]
    flags: SceneFlags,
    polyhedra: Vec<PolyFile>,
}

fn arr(v: &Vec3) -> [f64; 3] {
    [v.x, v.y, v.z]
}

fn vec3(a: &[f64; 3]) -> Vec3 {
    Vec3::new(a[0], a[1], a[2])
}

fn lex(a: &Vec3, b: &Vec3) -> std::cmp::Ordering {
    a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)).then(a.z.total_cmp(&b.z))
}

/// Vertices sorted lexicographically, each facet rotated to start at its
/// smallest index, facets sorted.
fn canonical(p: &Polyhedron) -> Result<Polyhedron> {
    let mut order: Vec<usize> = (0..p.vertices.len()).collect();
    order.sort_by(|&a, &b| lex(&p.vertices[a], &p.vertices[b]));
    let mut remap = vec![0; order.len()];
    for (new, &old) in order.iter().enumerate() {
        remap[old] = new;
    }
    let vertices = order.iter().map(|&i| p.vertices[i]).collect();
    let mut facets: Vec<Vec<usize>> = p
        .facets
        .iter()
        .map(|f| {
            let mut g: Vec<usize> = f.iter().map(|&v| remap[v]).collect();
            let m = (0..g.len()).min_by_key(|&i| g[i]).unwrap_or(0);
            g.rotate_left(m);
            g
        })
        .collect();
    facets.sort();
    Polyhedron::new(vertices, facets, p.unbounded_dir)
}

impl Scene {
    /// Canonicalizes the polyhedra and the pivot and checks the flags.
    pub fn new(polyhedra: Vec<Polyhedron>, pivot: PluckerLine, seed: u64, flags: SceneFlags) -> Result<Scene> {
        if pivot.is_at_infinity() {
            return Err(Error::InvalidInput("pivot needs a nonzero direction".into()));
        }
        let polyhedra = polyhedra
            .iter()
            .enumerate()
            .map(|(i, p)| canonical(p).map_err(|e| relabel(e, i)))
            .collect::<Result<Vec<_>>>()?;
        let scene = Scene { polyhedra, pivot: pivot.normalized(), seed, flags };
        scene.verify_flags()?;
        Ok(scene)
    }

    pub fn k(&self) -> usize {
        self.polyhedra.len()
    }

    /// Total number of facets.
    pub fn n(&self) -> usize {
        self.polyhedra.iter().map(|p| p.n()).sum()
    }

    pub fn pivot_frame(&self) -> Pivot {
        Pivot::new(&self.pivot)
    }

    /// Largest distance between two vertices of the scene's cores.
    pub fn diameter(&self) -> f64 {
        let (lo, hi) = self.core_bounds();
        (hi - lo).norm()
    }

    fn core_bounds(&self) -> (Vec3, Vec3) {
        let mut lo = Vec3::repeat(f64::INFINITY);
        let mut hi = Vec3::repeat(f64::NEG_INFINITY);
        for p in &self.polyhedra {
            let (a, b) = p.bounds();
            lo = lo.inf(&a);
            hi = hi.sup(&b);
        }
        (lo, hi)
    }

    /// `1 + max |coordinate|` over the solids and the pivot's closest point.
    pub fn scale(&self) -> f64 {
        self.solids()
            .iter()
            .map(|p| p.scale())
            .fold(1.0 + self.pivot.point().amax(), f64::max)
    }

    /// Bounded stand-ins: unbounded bodies extended by
    /// [`EXTENSION_FACTOR`] scene diameters.
    pub fn solids(&self) -> Vec<Polyhedron> {
        let len = EXTENSION_FACTOR * self.diameter().max(1.0);
        self.polyhedra.iter().map(|p| p.extended(len)).collect()
    }

    pub fn has_unbounded(&self) -> bool {
        self.polyhedra.iter().any(|p| p.unbounded_dir.is_some())
    }

    fn verify_flags(&self) -> Result<()> {
        let solids = self.solids();
        if self.flags.pairwise_disjoint {
            for i in 0..solids.len() {
                for j in i + 1..solids.len() {
                    if separating_plane_bodies(&solids[i], &solids[j]).is_err() {
                        return Err(Error::FlagMismatch("pairwise_disjoint".into()));
                    }
                }
            }
        }
        if self.flags.pivot_disjoint && solids.iter().any(|p| stabs(&self.pivot, p)) {
            return Err(Error::FlagMismatch("pivot_disjoint".into()));
        }
        if self.flags.unbounded_parallel {
            let u = self.pivot.unit_direction();
            let ok = self
                .polyhedra
                .iter()
                .all(|p| p.unbounded_dir.is_some_and(|d| (d - u).norm() <= 1e-9));
            if !ok {
                return Err(Error::FlagMismatch("unbounded_parallel".into()));
            }
        }
        Ok(())
    }

    /// Canonical JSON: the polyhedra as stored (already canonical) and the
    /// pivot in Plücker form, so that parsing and printing again reproduces
    /// the same bytes.
    pub fn to_json(&self) -> String {
        let file = SceneFile {
            version: SCENE_VERSION,
            seed: self.seed,
            pivot: PivotFile {
                point: None,
                direction: arr(&self.pivot.direction),
                moment: Some(arr(&self.pivot.moment)),
            },
            flags: self.flags,
            polyhedra: self
                .polyhedra
                .iter()
                .map(|p| PolyFile {
                    vertices: p.vertices.iter().map(arr).collect(),
                    facets: p.facets.clone(),
                    unbounded_dir: p.unbounded_dir.as_ref().map(arr),
                })
                .collect(),
        };
        let mut s = serde_json::to_string_pretty(&file).expect("scene serializes");
        s.push('\n');
        s
    }

    /// Parses a scene. The pivot may be given by `point` and `direction` or
    /// by `direction` and `moment`.
    pub fn from_json(text: &str) -> Result<Scene> {
        let file: SceneFile = serde_json::from_str(text).map_err(|e| Error::ParseError(e.to_string()))?;
        if file.version != SCENE_VERSION {
            return Err(Error::ParseError(format!("unsupported scene version {}", file.version)));
        }
        let d = vec3(&file.pivot.direction);
        let pivot = match (&file.pivot.point, &file.pivot.moment) {
            (Some(p), None) => PluckerLine::through(&vec3(p), &d),
            (None, Some(m)) => PluckerLine::new(d, vec3(m)),
            _ => return Err(Error::ParseError("pivot needs exactly one of `point` or `moment`".into())),
        };
        if d.norm() == 0.0 || pivot.plucker_relation().abs() > 1e-9 * (1.0 + pivot.moment.norm()) {
            return Err(Error::ParseError("pivot is not a real line".into()));
        }
        let mut polys = Vec::with_capacity(file.polyhedra.len());
        for (i, pf) in file.polyhedra.iter().enumerate() {
            let verts = pf.vertices.iter().map(vec3).collect();
            let p = Polyhedron::new(verts, pf.facets.clone(), pf.unbounded_dir.as_ref().map(vec3))
                .map_err(|e| relabel(e, i))?;
            polys.push(p);
        }
        Scene::new(polys, pivot, file.seed, file.flags)
    }
}

fn relabel(e: Error, i: usize) -> Error {
    match e {
        Error::ConvexityViolation(_) => Error::ConvexityViolation(i),
        other => other,
    }
}

pub fn load_scene(path: impl AsRef<Path>) -> Result<Scene> {
    Scene::from_json(&std::fs::read_to_string(path)?)
}

pub fn save_scene(scene: &Scene, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, scene.to_json())?;
    Ok(())
}

/// Outcome of [`general_position_audit`]: `issues` are violations, `notes`
/// record what was skipped or sampled.
#[derive(Debug, Clone, Default)]
pub struct AuditReport {
    pub issues: Vec<Diagnostic>,
    pub notes: Vec<Diagnostic>,
}

impl AuditReport {
    pub fn passed(&self) -> bool {
        self.issues.is_empty()
    }
}

/// Checks that no edge is coplanar with `ℓ₀` or with a facet of another
/// body, and that no triple of edges forms a degenerate quadruple with `ℓ₀`.
/// Triples of one body whose edges pairwise share a vertex, or which lie on
/// one facet, span a plane or a pencil and are skipped. So are three
/// parallel edges, whose common transversals all meet them at infinity.
///
/// Edges of an unbounded body that run along its unbounded direction meet
/// `ℓ₀` at infinity by construction; they are skipped with a note.
pub fn general_position_audit(scene: &Scene) -> AuditReport {
    let mut report = AuditReport::default();
    let solids = scene.solids();
    let scale = scene.scale();
    let tol = AUDIT_TOL * scale;
    let u0 = scene.pivot.unit_direction();
    let mut lines: Vec<(usize, usize, PluckerLine)> = Vec::new();
    let mut skipped_axial = 0;
    for (i, p) in solids.iter().enumerate() {
        for e in 0..p.edges.len() {
            let (a, b) = p.edge_points(e);
            let w = (b - a).normalize();
            if p.unbounded_dir.is_some() && w.cross(&u0).norm() <= 1e-9 {
                skipped_axial += 1;
                continue;
            }
            let l = PluckerLine::through(&a, &w);
            if side_operator(&l, &scene.pivot).abs() <= tol {
                report
                    .issues
                    .push(Diagnostic::new("coplanar_edge", format!("polyhedron {i} edge {e} is coplanar with the pivot")));
            }
            for (j, q) in solids.iter().enumerate() {
                if j == i {
                    continue;
                }
                for (f, h) in q.planes.iter().enumerate() {
                    if h.signed_distance(&a).abs() <= tol && h.signed_distance(&b).abs() <= tol {
                        report.issues.push(Diagnostic::new(
                            "edge_facet_coplanar",
                            format!("polyhedron {i} edge {e} lies in the plane of facet {f} of polyhedron {j}"),
                        ));
                    }
                }
            }
            lines.push((i, e, l));
        }
    }
    if skipped_axial > 0 {
        report.notes.push(Diagnostic::new(
            "audit_axial_edges_skipped",
            format!("{skipped_axial} edges parallel to an unbounded direction"),
        ));
    }
    let m = lines.len();
    let total = if m >= 3 { m * (m - 1) * (m - 2) / 6 } else { 0 };
    let triples: Vec<[usize; 3]> = if total <= AUDIT_TRIPLE_CAP {
        let mut t = Vec::with_capacity(total);
        for a in 0..m {
            for b in a + 1..m {
                for c in b + 1..m {
                    t.push([a, b, c]);
                }
            }
        }
        t
    } else {
        report.notes.push(Diagnostic::new(
            "audit_quadruples_sampled",
            format!("{AUDIT_TRIPLE_CAP} of {total} edge triples checked"),
        ));
        let mut rng = ChaCha8Rng::seed_from_u64(scene.seed ^ 0xa0d1);
        (0..AUDIT_TRIPLE_CAP)
            .map(|_| {
                let mut s = rand::seq::index::sample(&mut rng, m, 3).into_vec();
                s.sort_unstable();
                [s[0], s[1], s[2]]
            })
            .collect()
    };
    let parallel = |x: usize, y: usize| {
        let (a, b) = (&lines[x].2, &lines[y].2);
        a.direction.cross(&b.direction).norm() <= 1e-12
    };
    let inherent = |x: usize, y: usize, z: usize| {
        if parallel(x, y) && parallel(x, z) {
            return true;
        }
        let (px, ex, _) = lines[x];
        let (py, ey, _) = lines[y];
        let (pz, ez, _) = lines[z];
        if px != py || py != pz {
            return false;
        }
        let p = &solids[px];
        let vs = |e: usize| [p.edges[e].a, p.edges[e].b];
        let fs = |e: usize| [p.edges[e].f1, p.edges[e].f2];
        let meet = |a: usize, b: usize| vs(a).iter().any(|v| vs(b).contains(v));
        (meet(ex, ey) && meet(ey, ez) && meet(ex, ez))
            || fs(ex).iter().any(|f| fs(ey).contains(f) && fs(ez).contains(f))
    };
    let bad: Vec<String> = triples
        .par_iter()
        .filter(|t| !inherent(t[0], t[1], t[2]))
        .filter_map(|t| {
            let ls = [&scene.pivot, &lines[t[0]].2, &lines[t[1]].2, &lines[t[2]].2];
            match transversals_to_four_lines(ls) {
                Err(Error::DegenerateQuadruple) => Some(format!(
                    "edges {:?} {:?} {:?}",
                    (lines[t[0]].0, lines[t[0]].1),
                    (lines[t[1]].0, lines[t[1]].1),
                    (lines[t[2]].0, lines[t[2]].1)
                )),
                _ => None,
            }
        })
        .collect();
    for b in bad {
        report.issues.push(Diagnostic::new("degenerate_quadruple", b));
    }
    report
}

/// Moves every body by an independent random rigid motion (rotation by at
/// most `delta` radians about its centroid, translation by at most
/// `delta` times its diameter) until the audit passes. A scene that already
/// passes is returned unchanged. Rotations of unbounded bodies keep their
/// direction.
pub fn perturb_general_position(scene: &Scene, delta: f64) -> Result<Scene> {
    if !(delta > 0.0) {
        return Err(Error::InvalidInput("delta must be positive".into()));
    }
    if general_position_audit(scene).passed() {
        return Ok(scene.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(scene.seed.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ 0x7e57);
    for _ in 0..PERTURB_RETRIES {
        let polys: Vec<Polyhedron> =
            scene.polyhedra.iter().map(|p| random_motion(p, delta, &mut rng)).collect();
        let Ok(s) = Scene::new(polys, scene.pivot, scene.seed, scene.flags) else {
            continue;
        };
        if general_position_audit(&s).passed() {
            return Ok(s);
        }
    }
    Err(Error::AuditFailedAfterRetries(PERTURB_RETRIES))
}

fn random_unit(rng: &mut ChaCha8Rng) -> Vec3 {
    loop {
        let v = Vec3::from_fn(|_, _| rng.gen_range(-1.0..1.0));
        let n = v.norm();
        if n > 0.1 && n <= 1.0 {
            return v / n;
        }
    }
}

fn random_motion(p: &Polyhedron, delta: f64, rng: &mut ChaCha8Rng) -> Polyhedron {
    let axis = match p.unbounded_dir {
        Some(d) => d,
        None => random_unit(rng),
    };
    let r = Rotation3::from_axis_angle(&Unit::new_normalize(axis), rng.gen_range(-delta..delta));
    let c = p.centroid();
    let t = random_unit(rng) * (delta * p.diameter() * rng.gen_range(0.0..1.0));
    p.transformed(&r, &(c - r * c + t))
}

fn prism_box(center: Vec3, axes: [Vec3; 3], half: [f64; 3]) -> Polyhedron {
    let pts: Vec<Vec3> = (0..8)
        .map(|i| {
            let s = |b: usize| if i & (1 << b) == 0 { -1.0 } else { 1.0 };
            center + axes[0] * (s(0) * half[0]) + axes[1] * (s(1) * half[1]) + axes[2] * (s(2) * half[2])
        })
        .collect();
    Polyhedron::convex_hull(&pts).expect("box corners span space")
}

/// The lower-bound construction: `pairs` pairs of thin tall plates around
/// the pivot (the z-axis) and a horizontal drum prism with `drum_facets`
/// long facets, which is body 0. The drum straddles the pivot.
///
/// Pair `j` is a pair of plates mirrored through the pivot. Seen from above
/// each plate is a long segment at distance `d_j` from the pivot, so a line
/// through the pivot with azimuth `θ` stabs the pair unless `θ` falls in a
/// narrow gap around the plates' direction. The gaps are disjoint, so the
/// transversals split into `pairs` families with distinct orders. The
/// distances grow fast enough that no two plates cross. Each plate leans
/// along its long side by a few milliradians so that no edge is parallel to
/// the pivot, and the result is perturbed into general position.
pub fn gen_lower_bound_scene(pairs: usize, drum_facets: usize, seed: u64) -> Result<Scene> {
    if pairs == 0 || drum_facets < 3 {
        return Err(Error::InvalidInput("need pairs >= 1 and drum_facets >= 3".into()));
    }
    let margin = 0.35;
    let spacing = (PI - 2.0 * margin) / pairs as f64;
    let gap = 0.8 * spacing;
    let rho = 1.0 / (0.5 * gap).tan();
    let reach = (1.0 + rho * rho).sqrt();
    let ds: Vec<f64> = (0..pairs).map(|j| (1.15 * reach).powi(j as i32)).collect();
    let far = ds[pairs - 1] * reach;
    let height = 1.5 * far;
    let mut polys = Vec::with_capacity(2 * pairs + 1);

    let radius = 0.25;
    let half_len = 0.8;
    let offset = 0.37 * PI / drum_facets as f64;
    let mut drum_pts = Vec::with_capacity(2 * drum_facets);
    for x in [-half_len, half_len] {
        for i in 0..drum_facets {
            let a = offset + 2.0 * PI * i as f64 / drum_facets as f64;
            drum_pts.push(Vec3::new(x, radius * a.cos(), radius * a.sin()));
        }
    }
    polys.push(Polyhedron::convex_hull(&drum_pts)?);

    for (j, &d) in ds.iter().enumerate() {
        let beta = margin + (j as f64 + 0.5) * spacing;
        let t = Vec3::new(beta.cos(), beta.sin(), 0.0);
        let n = Vec3::new(-beta.sin(), beta.cos(), 0.0);
        let thick = 0.02 * d;
        for s in [1.0, -1.0] {
            let center = n * (s * (d + 0.5 * thick));
            let plate = prism_box(center, [t, n, Vec3::z()], [rho * d, 0.5 * thick, height]);
            let r = Rotation3::from_axis_angle(&Unit::new_normalize(n), s * LEAN * (1.0 + 0.1 * j as f64));
            polys.push(plate.transformed(&r, &(center - r * center)));
        }
    }
    let pivot = PluckerLine::through(&Vec3::zeros(), &Vec3::z());
    let raw = Scene::new(polys, pivot, seed, SceneFlags::default())?;
    perturb_general_position(&raw, 1e-3)
}

/// Thin slabs around the lines `x = i, z = i y` and, raised by `eps`,
/// `y = j, z = j x` for `i, j = 1..k/2`. Slabs `0..k/2` follow the first
/// family. The pivot is the vertical line through `(1/2, 1/2, 0)`.
pub fn gen_paraboloid_scene(k: usize, eps: f64, seed: u64) -> Result<Scene> {
    if k < 2 || k % 2 != 0 || !(eps > 0.0) {
        return Err(Error::InvalidInput("need an even k >= 2 and eps > 0".into()));
    }
    let h = k / 2;
    let reach = h as f64 + 1.5;
    let width = eps / (2.0 * 2f64.sqrt() * (1.0 + 2.0 * (h * h) as f64).sqrt());
    let slab = |a: Vec3, b: Vec3| {
        let w = (b - a).normalize();
        let e1 = any_orthogonal(&w);
        let e2 = w.cross(&e1);
        prism_box((a + b) * 0.5, [w, e1, e2], [0.5 * (b - a).norm(), 0.5 * width, 0.5 * width])
    };
    let mut polys = Vec::with_capacity(k);
    for i in 1..=h {
        let i = i as f64;
        polys.push(slab(Vec3::new(i, -reach, -i * reach), Vec3::new(i, reach, i * reach)));
    }
    for j in 1..=h {
        let j = j as f64;
        polys.push(slab(Vec3::new(-reach, j, -j * reach + eps), Vec3::new(reach, j, j * reach + eps)));
    }
    let pivot = PluckerLine::through(&Vec3::new(0.5, 0.5, 0.0), &Vec3::z());
    let flags = SceneFlags { pairwise_disjoint: true, pivot_disjoint: true, unbounded_parallel: false };
    Scene::new(polys, pivot, seed, flags)
}

/// Largest margin `t` of a plane with `neg` at signed distance `<= -t` and
/// `pos` at `>= t`, the normal bounded by the unit box. Negative when no
/// separating plane exists.
fn separation_margin(neg: &[Vec3], pos: &[Vec3]) -> f64 {
    let c = neg.iter().chain(pos).sum::<Vec3>() / (neg.len() + pos.len()) as f64;
    let mut lp = Problem::new(OptimizationDirection::Maximize);
    let n: Vec<_> = (0..3).map(|_| lp.add_var(0.0, (-1.0, 1.0))).collect();
    let b = lp.add_var(0.0, (f64::NEG_INFINITY, f64::INFINITY));
    let t = lp.add_var(1.0, (f64::NEG_INFINITY, 1.0));
    for (pts, sign) in [(neg, -1.0), (pos, 1.0)] {
        for v in pts {
            let x = v - c;
            let row = [(n[0], x.x), (n[1], x.y), (n[2], x.z), (b, -1.0), (t, -sign)];
            let op = if sign < 0.0 { ComparisonOp::Le } else { ComparisonOp::Ge };
            lp.add_constraint(row, op, 0.0);
        }
    }
    match lp.solve() {
        Ok(sol) => sol[t],
        Err(_) => f64::NEG_INFINITY,
    }
}

/// Checks on a paraboloid scene that every plane separating a slab of the
/// first family from one of the second meets every other slab. Reports the
/// first triple for which some separating plane avoids the third slab.
pub fn paraboloid_richness(scene: &Scene) -> std::result::Result<(), Diagnostic> {
    let k = scene.k();
    let h = k / 2;
    let tol = EPS * scene.scale();
    for a in 0..h {
        for b in h..k {
            let (pa, pb) = (&scene.polyhedra[a].vertices, &scene.polyhedra[b].vertices);
            for d in (0..k).filter(|&d| d != a && d != b) {
                let pd = &scene.polyhedra[d].vertices;
                let with_a: Vec<Vec3> = pa.iter().chain(pd).copied().collect();
                let with_b: Vec<Vec3> = pb.iter().chain(pd).copied().collect();
                if separation_margin(&with_a, pb) > tol || separation_margin(pa, &with_b) > tol {
                    return Err(Diagnostic::new(
                        "separation_richness_failed",
                        format!("a plane separating slabs {a} and {b} avoids slab {d}"),
                    ));
                }
            }
        }
    }
    Ok(())
}

/// Random convex bodies strung along a random transversal that meets the
/// pivot, so lines through the pivot stabbing every body exist. Each body is
/// the hull of `n_per_body / 2 + 2` points on a random ellipsoid, which has
/// at most `n_per_body` facets.
///
/// `flags.pairwise_disjoint` and `flags.pivot_disjoint` are enforced by
/// spacing and rejection; `flags.unbounded_parallel` makes every body a
/// prism unbounded along the pivot direction.
pub fn gen_random_scene(
    k: usize,
    n_per_body: usize,
    bbox: (Vec3, Vec3),
    seed: u64,
    flags: SceneFlags,
) -> Result<Scene> {
    const ATTEMPTS: usize = 200;
    if k == 0 || n_per_body < 4 {
        return Err(Error::InvalidInput("need k >= 1 and n_per_body >= 4".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = bbox;
    let extent = (hi - lo).min();
    if !(extent > 0.0) {
        return Err(Error::InvalidInput("empty bounding box".into()));
    }
    let center = (lo + hi) * 0.5;
    let m = n_per_body / 2 + 2;
    for _ in 0..ATTEMPTS {
        let u = random_unit(&mut rng);
        let c0 = center + Vec3::from_fn(|_, _| rng.gen_range(-0.1..0.1)) * extent;
        let pivot = PluckerLine::through(&c0, &u);
        let w = loop {
            let w = random_unit(&mut rng);
            if w.cross(&u).norm() > 0.5 {
                break w;
            }
        };
        let sin = w.cross(&u).norm();
        let meet = c0 + u * (rng.gen_range(-0.1..0.1) * extent);
        let r = extent / (3.0 * k as f64 + 1.0);
        let mut step = if flags.pairwise_disjoint { 2.3 * r } else { 1.6 * r };
        if flags.unbounded_parallel && flags.pairwise_disjoint {
            step /= sin;
        }
        let first = if flags.pivot_disjoint {
            let away = 1.6 * r / sin;
            if rng.gen_bool(0.5) {
                away
            } else {
                -away - step * (k - 1) as f64
            }
        } else {
            -0.5 * step * (k - 1) as f64 + rng.gen_range(-0.3..0.3) * r
        };
        let e1 = any_orthogonal(&w);
        let e2 = w.cross(&e1);
        let mut polys = Vec::with_capacity(k);
        let mut ok = true;
        for i in 0..k {
            let c = meet
                + w * (first + step * i as f64)
                + (e1 * rng.gen_range(-0.2..0.2) + e2 * rng.gen_range(-0.2..0.2)) * r;
            let radii = Vec3::from_fn(|_, _| r * rng.gen_range(0.6..1.0));
            let rot = Rotation3::from_axis_angle(&Unit::new_normalize(random_unit(&mut rng)), rng.gen_range(0.0..PI));
            let mut pts: Vec<Vec3> =
                (0..m).map(|_| c + rot * random_unit(&mut rng).component_mul(&radii)).collect();
            pts.shuffle(&mut rng);
            let Ok(p) = Polyhedron::convex_hull(&pts) else {
                ok = false;
                break;
            };
            let transversal = PluckerLine::through(&meet, &w);
            if !stabs(&transversal, &p) || p.n() > n_per_body {
                ok = false;
                break;
            }
            let p = if flags.unbounded_parallel { p.with_unbounded_dir(Some(u)) } else { p };
            polys.push(p);
        }
        if !ok {
            continue;
        }
        if let Ok(s) = Scene::new(polys, pivot, seed, flags) {
            return Ok(s);
        }
    }
    Err(Error::PackingFailed(ATTEMPTS))
}
