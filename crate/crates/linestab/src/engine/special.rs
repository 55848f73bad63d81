use std::f64::consts::PI;

use rayon::prelude::*;

use super::pairwise::vertices_by_reguli;
use super::{canonical_coords, dedup, extremal_lines_through_line, region_through_line, Certifier, ExtremalStabbingLine, Mode, StabbingRegion};
use crate::envelope::{ArcLabel, CrossingFinder, MonotoneArc, Sweep};
use crate::error::{Diagnostic, Error, Result};
use crate::geometry::{
    contact, plucker_from_points, separating_plane_bodies, separating_planes_line_body, tangent_at_edge,
    transversals_to_four_lines, Contact, Feature, FeatureKind, Plane, PluckerLine, Polyhedron, Vec3,
};
use crate::linespace::{line_from_coords, sigma_range, LineCoords, PieceKind, Pivot};
use crate::scenes::{Scene, SceneFlags};

/// Lines through the pivot parallel to a plane `h`, written with one
/// parameter `t ∈ (0, π)` for the direction and the intercept `z`.
#[derive(Debug, Clone, Copy)]
enum PlaneFamily {
    /// `h` not parallel to the pivot: `t = θ`, `φ` follows from `θ`.
    Tilted { n: Vec3 },
    /// `h` parallel to the pivot: `θ` fixed, `t = φ`.
    Upright { n: Vec3, theta: f64 },
}

impl PlaneFamily {
    fn new(pivot: &Pivot, h: &Plane) -> Result<PlaneFamily> {
        let n = h.normal.normalize();
        if n.dot(&pivot.u).abs() > 1e-9 {
            return Ok(PlaneFamily::Tilted { n });
        }
        let w = pivot.u.cross(&n);
        let theta = crate::geometry::wrap_pi(w.dot(&pivot.ey).atan2(w.dot(&pivot.ex)));
        Ok(PlaneFamily::Upright { n, theta })
    }

    fn normal(&self) -> Vec3 {
        match *self {
            PlaneFamily::Tilted { n } | PlaneFamily::Upright { n, .. } => n,
        }
    }

    fn angles(&self, pivot: &Pivot, t: f64) -> (f64, f64) {
        match *self {
            PlaneFamily::Tilted { n } => {
                let a = n.dot(&(pivot.ex * t.cos() + pivot.ey * t.sin()));
                let b = n.dot(&pivot.u);
                let (s, c) = if b < 0.0 { (-b, a) } else { (b, -a) };
                (t, s.atan2(c))
            }
            PlaneFamily::Upright { theta, .. } => (theta, t),
        }
    }

    fn direction(&self, pivot: &Pivot, t: f64) -> Vec3 {
        let (th, ph) = self.angles(pivot, t);
        pivot.direction(th, ph)
    }

    fn line(&self, pivot: &Pivot, t: f64, z: f64) -> PluckerLine {
        let (theta, phi) = self.angles(pivot, t);
        line_from_coords(&LineCoords { theta, phi, z }, pivot)
    }

    /// Parameter of a direction in the family, either orientation.
    fn param_of(&self, pivot: &Pivot, d: &Vec3) -> Option<f64> {
        if d.norm() <= 1e-12 {
            return None;
        }
        let (mut th, mut ph) = pivot.angles(d);
        if th >= PI {
            th -= PI;
            ph = PI - ph;
        }
        Some(match self {
            PlaneFamily::Tilted { .. } => th,
            PlaneFamily::Upright { .. } => ph,
        })
    }

    /// Parameters where a tangency piece of `p` may change or end.
    fn breaks(&self, pivot: &Pivot, p: &Polyhedron) -> Vec<f64> {
        let mut dirs = Vec::new();
        match *self {
            PlaneFamily::Tilted { n } => {
                for v in &p.vertices {
                    if let Some(x) = pivot.line.meet_plane(&Plane::through(v, n)) {
                        dirs.push(v - x);
                    }
                    dirs.push(n.cross(&pivot.u.cross(&(v - pivot.origin))));
                }
                dirs.extend(p.planes.iter().map(|f| n.cross(&f.normal)));
            }
            PlaneFamily::Upright { n, .. } => dirs.extend(p.planes.iter().map(|f| f.normal.cross(&n))),
        }
        dirs.iter().filter_map(|d| self.param_of(pivot, d)).collect()
    }

    fn contains_direction(&self, d: &Vec3) -> bool {
        self.normal().dot(&d.normalize()).abs() <= 1e-9
    }
}

fn edge_line(p: &Polyhedron, e: usize) -> PluckerLine {
    let (a, b) = p.edge_points(e);
    PluckerLine::through(&a, &(b - a))
}

struct PlaneFinder<'a> {
    fam: PlaneFamily,
    pivot: &'a Pivot,
    solids: &'a [Polyhedron],
}

impl PlaneFinder<'_> {
    /// Lines of the family meeting both edges' supporting lines.
    fn lines(&self, a: (usize, usize), b: (usize, usize)) -> Vec<PluckerLine> {
        let (la, lb) = (edge_line(&self.solids[a.0], a.1), edge_line(&self.solids[b.0], b.1));
        match self.fam {
            PlaneFamily::Tilted { n } => {
                transversals_to_four_lines([&self.pivot.line, &la, &lb, &PluckerLine::at_infinity(&n)]).unwrap_or_default()
            }
            PlaneFamily::Upright { n, .. } => {
                let h = Plane::through(&self.pivot.origin, n);
                match (la.meet_plane(&h), lb.meet_plane(&h)) {
                    (Some(x), Some(y)) => plucker_from_points(&x, &y).ok().into_iter().collect(),
                    _ => Vec::new(),
                }
            }
        }
    }
}

impl CrossingFinder for PlaneFinder<'_> {
    fn crossings(&self, a: &MonotoneArc, b: &MonotoneArc, lo: f64, hi: f64) -> Vec<f64> {
        let edge = |l: &ArcLabel| match *l {
            ArcLabel::Piece(PieceKind::Tangent { poly, edge }) => Some((poly, edge)),
            _ => None,
        };
        let (Some(x), Some(y)) = (edge(&a.label), edge(&b.label)) else {
            return Vec::new();
        };
        self.lines(x, y)
            .iter()
            .filter_map(|l| self.fam.param_of(self.pivot, &l.unit_direction()))
            .filter(|&t| t >= lo && t <= hi)
            .collect()
    }
}

/// Certifies lines of the family: two edges or a vertex, all bodies met.
fn certify_in_plane(cert: &Certifier, fam: &PlaneFamily, l: &PluckerLine) -> Option<ExtremalStabbingLine> {
    canonical_coords(l, &cert.pivot)?;
    let (feats, d) = cert.analyze(l);
    if d > 0 || feats.iter().map(|f| f.kind.weight()).sum::<usize>() < 2 {
        return None;
    }
    let line = resolve_in_plane(cert, fam, &feats, l)?;
    let coords = canonical_coords(&line, &cert.pivot)?;
    let (feats2, d2) = cert.analyze(&line);
    if feats2 != feats || d2 != 0 || !fam.contains_direction(&line.unit_direction()) {
        return None;
    }
    let ok = feats.iter().all(|f| match f.kind {
        FeatureKind::Edge(e) => tangent_at_edge(&line, &cert.solids[f.poly], e),
        FeatureKind::Vertex(_) => true,
    });
    ok.then(|| ExtremalStabbingLine { line: line_from_coords(&coords, &cert.pivot), coords, features: feats, depth: 0 })
}

fn resolve_in_plane(cert: &Certifier, fam: &PlaneFamily, feats: &[Feature], hint: &PluckerLine) -> Option<PluckerLine> {
    let finder = PlaneFinder { fam: *fam, pivot: &cert.pivot, solids: &cert.solids };
    if let Some(f) = feats.iter().find(|f| matches!(f.kind, FeatureKind::Vertex(_))) {
        let FeatureKind::Vertex(v) = f.kind else { unreachable!() };
        let v = cert.solids[f.poly].vertices[v];
        return match fam {
            PlaneFamily::Tilted { n } => {
                let x = cert.pivot.line.meet_plane(&Plane::through(&v, *n))?;
                plucker_from_points(&v, &x).ok()
            }
            PlaneFamily::Upright { .. } => None,
        };
    }
    let edges: Vec<(usize, usize)> = feats
        .iter()
        .filter_map(|f| match f.kind {
            FeatureKind::Edge(e) => Some((f.poly, e)),
            FeatureKind::Vertex(_) => None,
        })
        .collect();
    if edges.len() < 2 {
        return None;
    }
    let target = canonical_coords(hint, &cert.pivot)?;
    finder
        .lines(edges[0], edges[1])
        .into_iter()
        .filter_map(|s| canonical_coords(&s, &cert.pivot).map(|c| (super::coord_gap(&c, &target, cert.scale), s)))
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(_, s)| s)
}

/// Extremal stabbing lines among the lines through the pivot parallel to
/// `h`: vertices of the one-parameter sandwich of the tangency functions
/// restricted to that family.
pub fn extremal_lines_in_plane(scene: &Scene, h: &Plane) -> Result<Vec<ExtremalStabbingLine>> {
    let cert = Certifier::new(scene);
    let pivot = cert.pivot;
    let fam = PlaneFamily::new(&pivot, h)?;
    let bound = match fam {
        PlaneFamily::Tilted { .. } => 2,
        PlaneFamily::Upright { .. } => 1,
    };
    let mut cuts = vec![0.0, PI];
    for p in &cert.solids {
        cuts.extend(fam.breaks(&pivot, p).into_iter().filter(|&t| t > 0.0 && t < PI));
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let pad = 1e-9;
    let finder = PlaneFinder { fam, pivot: &pivot, solids: &cert.solids };
    let mut cands = Vec::new();
    let mut id = 0;
    for w in cuts.windows(2) {
        let (lo, hi) = (w[0] + pad, w[1] - pad);
        if hi <= lo {
            continue;
        }
        let mid = 0.5 * (lo + hi);
        let d = fam.direction(&pivot, mid);
        let Some(ranges) = cert.solids.iter().map(|p| sigma_range(p, &pivot, &d)).collect::<Option<Vec<_>>>() else {
            continue;
        };
        let mut lower = Vec::new();
        let mut upper = Vec::new();
        for (i, p) in cert.solids.iter().enumerate() {
            for (side, z) in [(0, ranges[i].0), (1, ranges[i].1)] {
                let label = match contact(&fam.line(&pivot, mid, z), p, cert.scale) {
                    Contact::Touch(fs) if fs.len() == 1 && matches!(fs[0], FeatureKind::Edge(_)) => {
                        let FeatureKind::Edge(edge) = fs[0] else { unreachable!() };
                        ArcLabel::Piece(PieceKind::Tangent { poly: i, edge })
                    }
                    _ => ArcLabel::Surface { poly: i },
                };
                let p = p.clone();
                id += 1;
                let arc = MonotoneArc::new(id, label, lo, hi, bound, move |t| {
                    sigma_range(&p, &pivot, &fam.direction(&pivot, t)).map_or(f64::NAN, |r| if side == 0 { r.0 } else { r.1 })
                });
                if side == 0 {
                    lower.push(arc);
                } else {
                    upper.push(arc);
                }
            }
        }
        let region = Sweep::new(&finder).sandwich(&lower, &upper, lo, hi)?;
        cands.extend(region.vertices.iter().map(|v| fam.line(&pivot, v.theta, v.value)));
    }
    let found = cands.par_iter().filter_map(|l| certify_in_plane(&cert, &fam, l)).collect();
    Ok(dedup(found, cert.scale))
}

/// Brute force for [`extremal_lines_in_plane`]: every edge pair and every
/// vertex.
pub(crate) fn in_plane_candidates_brute(scene: &Scene, h: &Plane) -> Result<Vec<ExtremalStabbingLine>> {
    let cert = Certifier::new(scene);
    let fam = PlaneFamily::new(&cert.pivot, h)?;
    let finder = PlaneFinder { fam, pivot: &cert.pivot, solids: &cert.solids };
    let edges: Vec<(usize, usize)> =
        cert.solids.iter().enumerate().flat_map(|(i, p)| (0..p.edges.len()).map(move |e| (i, e))).collect();
    let mut cands: Vec<PluckerLine> = (0..edges.len())
        .into_par_iter()
        .flat_map_iter(|i| edges[i + 1..].iter().flat_map(|&b| finder.lines(edges[i], b)).collect::<Vec<_>>())
        .collect();
    if let PlaneFamily::Tilted { n } = fam {
        for p in &cert.solids {
            for v in &p.vertices {
                if let Some(x) = cert.pivot.line.meet_plane(&Plane::through(v, n)) {
                    cands.extend(plucker_from_points(v, &x).ok());
                }
            }
        }
    }
    let found = cands.par_iter().filter_map(|l| certify_in_plane(&cert, &fam, l)).collect();
    Ok(dedup(found, cert.scale))
}

fn check_disjoint(solids: &[Polyhedron]) -> Result<()> {
    for i in 0..solids.len() {
        for j in i + 1..solids.len() {
            separating_plane_bodies(&solids[i], &solids[j]).map_err(|_| Error::NotDisjoint)?;
        }
    }
    Ok(())
}

/// A plane through the pivot with body `p` strictly on its negative side.
pub fn plane_through_pivot_avoiding(pivot: &Pivot, p: &Polyhedron) -> Result<Plane> {
    let planes = separating_planes_line_body(&pivot.line, p)?;
    match planes.as_slice() {
        [h] if h.normal.dot(&pivot.u).abs() <= 1e-9 => Ok(Plane::through(&pivot.origin, h.normal)),
        _ => Err(Error::InvalidInput("the pivot meets a body".into())),
    }
}

/// `P ≺ Q` at `θ`: `Q` overshadows `P`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Overshadow {
    pub theta: f64,
    pub under: usize,
    pub over: usize,
}

/// `E_U`: the upper envelope of the lower tangency surfaces.
#[derive(Debug, Clone)]
pub struct UpperEnvelope {
    pub pivot: Pivot,
    /// Envelope vertices over the directions where every surface is
    /// defined, with at least three contacts.
    pub vertices: Vec<ExtremalStabbingLine>,
    pub diagnostics: Vec<Diagnostic>,
    solids: Vec<Polyhedron>,
}

/// Section of `p` by the plane through the pivot at azimuth `theta`, as
/// points `(s, z)` with `s` along the azimuth and `z` along the pivot.
fn section(pivot: &Pivot, p: &Polyhedron, theta: f64) -> Vec<(f64, f64)> {
    let w = pivot.ex * theta.cos() + pivot.ey * theta.sin();
    let n = pivot.u.cross(&w);
    let d: Vec<f64> = p.vertices.iter().map(|v| n.dot(&(v - pivot.origin))).collect();
    let mut out = Vec::new();
    for e in &p.edges {
        let (da, db) = (d[e.a], d[e.b]);
        if (da <= 0.0 && db >= 0.0) || (da >= 0.0 && db <= 0.0) {
            let x = if da == db { p.vertices[e.a] } else { p.vertices[e.a] + (p.vertices[e.b] - p.vertices[e.a]) * (da / (da - db)) };
            out.push((w.dot(&(x - pivot.origin)), pivot.intercept(&x)));
        }
    }
    out
}

/// `z` range of a convex point set above abscissa `s`.
fn vertical_extent(pts: &[(f64, f64)], s: f64) -> Option<(f64, f64)> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (i, a) in pts.iter().enumerate() {
        if a.0 == s {
            lo = lo.min(a.1);
            hi = hi.max(a.1);
        }
        for b in &pts[i + 1..] {
            if (a.0 - s) * (b.0 - s) < 0.0 {
                let z = a.1 + (b.1 - a.1) * (s - a.0) / (b.0 - a.0);
                lo = lo.min(z);
                hi = hi.max(z);
            }
        }
    }
    (lo <= hi).then_some((lo, hi))
}

impl UpperEnvelope {
    /// `(E_U, body)` at direction `(θ, φ)`: the largest `σ⁻` over the bodies
    /// where it is defined.
    pub fn eval(&self, theta: f64, phi: f64) -> Option<(f64, usize)> {
        let d = self.pivot.direction(theta, phi);
        self.solids
            .iter()
            .enumerate()
            .filter_map(|(i, p)| sigma_range(p, &self.pivot, &d).map(|r| (r.0, i)))
            .max_by(|a, b| a.0.total_cmp(&b.0))
    }

    /// True when `Q` overshadows `P` in the plane through the pivot at
    /// azimuth `θ`: the projection of `Q`'s section on the axis orthogonal
    /// to the pivot contains that of `P`'s, and `Q`'s section lies above.
    pub fn overshadows(&self, p: usize, q: usize, theta: f64) -> bool {
        let (sp, sq) = (section(&self.pivot, &self.solids[p], theta), section(&self.pivot, &self.solids[q], theta));
        if sp.is_empty() || sq.is_empty() {
            return false;
        }
        let span = |s: &[(f64, f64)]| s.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x.0), b.max(x.0)));
        let ((a, b), (c, d)) = (span(&sp), span(&sq));
        if !(c < a && b < d) {
            return false;
        }
        let m = 0.5 * (a + b);
        match (vertical_extent(&sp, m), vertical_extent(&sq, m)) {
            (Some(x), Some(y)) => y.0 > x.1,
            _ => false,
        }
    }

    /// Overshadowing pairs at `θ`.
    pub fn overshadowing(&self, theta: f64) -> Vec<Overshadow> {
        let k = self.solids.len();
        (0..k)
            .flat_map(|p| (0..k).map(move |q| (p, q)))
            .filter(|&(p, q)| p != q && self.overshadows(p, q, theta))
            .map(|(under, over)| Overshadow { theta, under, over })
            .collect()
    }

    /// For a vertex on three surfaces: one of them is overshadowed by
    /// neither of the other two at the vertex's azimuth.
    pub fn has_good_surface(&self, v: &ExtremalStabbingLine) -> bool {
        let polys = v.polys();
        polys.len() < 3
            || polys
                .iter()
                .any(|&p| polys.iter().all(|&q| q == p || !self.overshadows(p, q, v.coords.theta)))
    }
}

/// Drops vertices touching the far caps of extended bodies.
fn without_caps(scene: &Scene, lines: Vec<ExtremalStabbingLine>) -> Vec<ExtremalStabbingLine> {
    let pivot = scene.pivot_frame();
    let solids = scene.solids();
    let reach = scene.diameter().max(1.0);
    let cores: Vec<(f64, f64)> = scene
        .polyhedra
        .iter()
        .map(|p| p.vertices.iter().map(|v| pivot.intercept(v)).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), z| (a.min(z), b.max(z))))
        .collect();
    let far = |poly: usize, x: &Vec3| {
        let z = pivot.intercept(x);
        z > cores[poly].1 + reach || z < cores[poly].0 - reach
    };
    lines
        .into_iter()
        .filter(|l| {
            l.features.iter().all(|f| {
                let p = &solids[f.poly];
                match f.kind {
                    FeatureKind::Vertex(v) => !far(f.poly, &p.vertices[v]),
                    FeatureKind::Edge(e) => {
                        let (a, b) = p.edge_points(e);
                        !(far(f.poly, &a) && far(f.poly, &b))
                    }
                }
            })
        })
        .collect()
}

/// `E_U` of pairwise disjoint bodies. Vertices come from the region of the
/// bodies swept upward along the pivot, whose lower tangency surfaces are
/// those of the bodies.
pub fn upper_envelope_eu(scene: &Scene) -> Result<UpperEnvelope> {
    let solids = scene.solids();
    check_disjoint(&solids)?;
    let u = scene.pivot_frame().u;
    let swept: Vec<Polyhedron> = scene.polyhedra.iter().map(|p| p.clone().with_unbounded_dir(Some(u))).collect();
    let up = Scene::new(swept, scene.pivot, scene.seed, SceneFlags::default())?;
    let vertices = without_caps(&up, extremal_lines_through_line(&up, Mode::Structured)?);
    Ok(UpperEnvelope { pivot: scene.pivot_frame(), vertices, diagnostics: Vec::new(), solids })
}

/// `T_ℓ₀` for pairwise disjoint bodies all unbounded in the same direction
/// along the pivot: the region above `E_U` (or below `E_L`).
pub fn region_unbounded_case(scene: &Scene) -> Result<StabbingRegion> {
    let u = scene.pivot_frame().u;
    let mut sense = None;
    for p in &scene.polyhedra {
        let Some(d) = p.unbounded_dir else {
            return Err(Error::MixedBoundedness);
        };
        let c = d.normalize().dot(&u);
        if c.abs() < 1.0 - 1e-9 || sense.is_some_and(|s: f64| s * c < 0.0) {
            return Err(Error::MixedBoundedness);
        }
        sense = Some(c);
    }
    check_disjoint(&scene.solids())?;
    let mut region = region_through_line(scene)?;
    region.vertices = without_caps(scene, region.vertices);
    Ok(region)
}

/// `T_ℓ₀` for pairwise disjoint bodies all missing the pivot, from the
/// reguli of every edge pair and the tangents inside the planes through
/// the pivot that avoid each body. The region carries no sandwich pieces.
pub fn region_disjoint_case(scene: &Scene) -> Result<StabbingRegion> {
    let solids = scene.solids();
    check_disjoint(&solids)?;
    let pivot = scene.pivot_frame();
    let hs = solids.iter().map(|p| plane_through_pivot_avoiding(&pivot, p)).collect::<Result<Vec<_>>>()?;
    let mut diagnostics = Vec::new();
    for (i, h) in hs.iter().enumerate() {
        let t = extremal_lines_in_plane(scene, h)?;
        diagnostics.push(Diagnostic::new("in_plane_tangents", format!("plane {i}: {}", t.len())));
    }
    let (vertices, reguli) = vertices_by_reguli(scene)?;
    diagnostics.push(Diagnostic::new("reguli", format!("{} tangent families", reguli.len())));
    Ok(StabbingRegion { pivot, pieces: Vec::new(), vertices, diagnostics, solids })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::compare_sets;
    use crate::geometry::stabs;
    use crate::scenes::gen_random_scene;

    fn scene(seed: u64, flags: SceneFlags) -> Scene {
        gen_random_scene(3, 8, (Vec3::repeat(-4.0), Vec3::repeat(4.0)), seed, flags).unwrap()
    }

    #[test]
    fn in_plane_matches_brute_force() {
        for seed in 0..4 {
            let s = scene(seed, SceneFlags::default());
            let pivot = s.pivot_frame();
            let tilted = Plane::through(&Vec3::zeros(), pivot.u + pivot.ex * 0.7 - pivot.ey * 0.4);
            let upright = Plane::through(&(pivot.origin + pivot.ex * 0.3), pivot.ex * 0.6 + pivot.ey * 0.8);
            for h in [tilted, upright] {
                let a = extremal_lines_in_plane(&s, &h).unwrap();
                let b = in_plane_candidates_brute(&s, &h).unwrap();
                let (x, m) = compare_sets(&a, &b, s.scale());
                assert!(x.is_empty() && m.is_empty(), "seed {seed}: extra {x:?} missing {m:?}");
                for l in &a {
                    assert!(h.normal.normalize().dot(&l.line.unit_direction()).abs() < 1e-9);
                    assert!(l.weight() >= 2 && l.polys().len() <= 2);
                }
            }
        }
    }

    #[test]
    fn envelope_is_pointwise_max() {
        let s = scene(5, SceneFlags { pairwise_disjoint: true, ..Default::default() });
        let env = upper_envelope_eu(&s).unwrap();
        let solids = s.solids();
        for i in 0..20 {
            for j in 0..20 {
                let (t, p) = (PI * (i as f64 + 0.5) / 10.0, PI * (j as f64 + 0.5) / 20.0);
                let d = env.pivot.direction(t, p);
                let want = solids.iter().filter_map(|b| sigma_range(b, &env.pivot, &d)).map(|r| r.0).fold(f64::NEG_INFINITY, f64::max);
                match env.eval(t, p) {
                    Some((z, _)) => assert_eq!(z, want),
                    None => assert_eq!(want, f64::NEG_INFINITY),
                }
            }
        }
        assert!(env.vertices.iter().all(|v| env.has_good_surface(v)));
    }

    #[test]
    fn single_body_envelope_is_its_lower_surface() {
        let c = Polyhedron::axis_box(Vec3::repeat(-1.0), Vec3::repeat(1.0));
        let pivot = PluckerLine::through(&Vec3::new(2.5, 0.3, 0.1), &Vec3::new(0.13, 0.21, 1.0));
        let s = Scene::new(vec![c], pivot, 0, SceneFlags::default()).unwrap();
        let env = upper_envelope_eu(&s).unwrap();
        let (z, who) = env.eval(0.4, 1.1).unwrap();
        assert_eq!(who, 0);
        assert_eq!(z, sigma_range(&s.solids()[0], &env.pivot, &env.pivot.direction(0.4, 1.1)).unwrap().0);
    }

    #[test]
    fn stacked_prisms_overshadow() {
        let pivot = PluckerLine::through(&Vec3::zeros(), &Vec3::z());
        let low = Polyhedron::axis_box(Vec3::new(2.0, -0.5, 0.0), Vec3::new(3.0, 0.5, 1.0));
        let high = Polyhedron::axis_box(Vec3::new(1.5, -1.0, 2.0), Vec3::new(4.0, 1.0, 3.0));
        let s = Scene::new(vec![low, high], pivot, 0, SceneFlags::default()).unwrap();
        let env = upper_envelope_eu(&s).unwrap();
        let p = s.pivot_frame();
        let (ex, ey) = (p.ex, p.ey);
        let theta = crate::geometry::wrap_2pi(Vec3::x().dot(&ey).atan2(Vec3::x().dot(&ex)));
        assert!(env.overshadows(0, 1, theta));
        assert!(!env.overshadows(1, 0, theta));
    }

    #[test]
    fn unbounded_rejects_mixed_scenes() {
        let s = scene(1, SceneFlags::default());
        assert_eq!(region_unbounded_case(&s).unwrap_err(), Error::MixedBoundedness);
    }

    #[test]
    fn unbounded_prism_region_is_above_envelope() {
        let s = scene(2, SceneFlags { pairwise_disjoint: true, unbounded_parallel: true, ..Default::default() });
        let r = region_unbounded_case(&s).unwrap();
        let solids = s.solids();
        for v in &r.vertices {
            assert!(solids.iter().all(|p| stabs(&v.line, p)));
        }
        let env = upper_envelope_eu(&Scene::new(s.polyhedra.clone(), s.pivot, 0, SceneFlags::default()).unwrap()).unwrap();
        for i in 0..12 {
            for j in 1..12 {
                let (t, p) = (PI * i as f64 / 6.0, PI * j as f64 / 12.0);
                if let (Some((lo, _)), Some((e, _))) = (r.z_range(t, p), env.eval(t, p)) {
                    assert!((lo - e).abs() <= 1e-9 * s.scale());
                }
            }
        }
    }

    #[test]
    fn disjoint_case_matches_structured() {
        for seed in 0..3 {
            let flags = SceneFlags { pairwise_disjoint: true, pivot_disjoint: true, ..Default::default() };
            let s = scene(seed, flags);
            let r = region_disjoint_case(&s).unwrap();
            let e = extremal_lines_through_line(&s, Mode::Structured).unwrap();
            let (x, m) = compare_sets(&r.vertices, &e, s.scale());
            assert!(x.is_empty() && m.is_empty(), "seed {seed}: extra {x:?} missing {m:?}");
            let k = s.k();
            for d in r.diagnostics.iter().filter(|d| d.code == "in_plane_tangents") {
                let n: usize = d.message.rsplit(' ').next().unwrap().parse().unwrap();
                assert!(n <= 4 * k * (k - 1) / 2);
            }
        }
    }
}
