//! Vertices of the full region of line transversals, not tied to a pivot.
//!
//! A vertex touches the bodies with weight at least 4. When some edge
//! feature is the only feature of its body, the remaining features pin a
//! line through that edge's supporting line, which the through-line engine
//! finds with the body removed. Every other vertex is defined by at most
//! two bodies and is enumerated directly.

use std::f64::consts::PI;

use rayon::prelude::*;

use super::{extremal_lines_through_line, ExtremalStabbingLine, Mode, COORD_TOL};
use crate::error::Result;
use crate::geometry::{
    contact, plucker_from_points, stabs, tangent_at_edge, transversals_to_four_lines, Contact, Feature, FeatureKind,
    Plane, PluckerLine, Polyhedron, Vec3,
};
use crate::linespace::{LineCoords, Pivot};
use crate::scenes::{Scene, SceneFlags};

/// Coordinates of an arbitrary line: the angles of its direction with
/// `θ ∈ [0, π)`, and the intercept of the pivot point nearest to it.
pub fn global_coords(l: &PluckerLine, pivot: &Pivot) -> LineCoords {
    let l = l.normalized();
    let (mut theta, mut phi) = pivot.angles(&l.direction);
    if theta >= PI {
        theta -= PI;
        phi = PI - phi;
    }
    let z = match pivot.line.closest_params(&l) {
        Some((s, _)) => pivot.intercept(&pivot.line.at(s)),
        None => pivot.intercept(&l.point()),
    };
    LineCoords { theta, phi, z }
}

/// True when `a` and `b` are the same unoriented line up to `tol` (angle
/// and distance relative to `scale`).
pub fn same_line(a: &PluckerLine, b: &PluckerLine, scale: f64, tol: f64) -> bool {
    let (a, b) = (a.normalized(), b.normalized());
    let angle = a.direction.cross(&b.direction).norm();
    angle <= tol && a.distance_to_point(&b.point()) <= tol * scale
}

/// Accepts candidates tangent to the bodies with weight at least 4 and
/// rebuilds each from its features.
pub(crate) struct GlobalCertifier {
    pub solids: Vec<Polyhedron>,
    pub pivot: Pivot,
    pub scale: f64,
}

impl GlobalCertifier {
    pub fn new(scene: &Scene) -> GlobalCertifier {
        GlobalCertifier { solids: scene.solids(), pivot: scene.pivot_frame(), scale: scene.scale() }
    }

    fn analyze(&self, l: &PluckerLine) -> (Vec<Feature>, usize) {
        let mut feats = Vec::new();
        let mut missed = 0;
        for (i, p) in self.solids.iter().enumerate() {
            match contact(l, p, self.scale) {
                Contact::Miss => missed += 1,
                Contact::Pierce(..) => {}
                Contact::Touch(fs) => feats.extend(fs.into_iter().map(|kind| Feature { poly: i, kind })),
            }
        }
        feats.sort();
        (feats, missed)
    }

    pub fn certify(&self, l: &PluckerLine) -> Option<ExtremalStabbingLine> {
        if l.direction.norm() <= 1e-12 {
            return None;
        }
        let (feats, d) = self.analyze(l);
        if d > 0 || feats.iter().map(|f| f.kind.weight()).sum::<usize>() < 4 {
            return None;
        }
        let line = self.resolve(&feats, l)?;
        if self.analyze(&line) != (feats.clone(), 0) {
            return None;
        }
        let ok = feats.iter().all(|f| match f.kind {
            FeatureKind::Edge(e) => tangent_at_edge(&line, &self.solids[f.poly], e),
            FeatureKind::Vertex(_) => true,
        });
        let ok = ok && self.solids.iter().all(|p| stabs(&line, p));
        ok.then(|| ExtremalStabbingLine {
            coords: global_coords(&line, &self.pivot),
            line: line.normalized(),
            features: feats,
            depth: 0,
        })
    }

    /// The line pinned by `feats`. Two edges of one body touched by the
    /// same line lie on a common facet, and the line lies in its plane.
    fn resolve(&self, feats: &[Feature], hint: &PluckerLine) -> Option<PluckerLine> {
        let mut points: Vec<Vec3> = Vec::new();
        let mut planes: Vec<Plane> = Vec::new();
        let mut lines: Vec<PluckerLine> = Vec::new();
        let mut edges: Vec<(usize, usize)> = Vec::new();
        for f in feats {
            match f.kind {
                FeatureKind::Vertex(v) => points.push(self.solids[f.poly].vertices[v]),
                FeatureKind::Edge(e) => edges.push((f.poly, e)),
            }
        }
        let mut used = vec![false; edges.len()];
        for i in 0..edges.len() {
            for j in i + 1..edges.len() {
                let ((p, a), (q, b)) = (edges[i], edges[j]);
                if p != q || used[i] || used[j] {
                    continue;
                }
                let (ea, eb) = (&self.solids[p].edges[a], &self.solids[p].edges[b]);
                let common = [ea.f1, ea.f2].into_iter().find(|f| *f == eb.f1 || *f == eb.f2);
                if let Some(f) = common {
                    planes.push(self.solids[p].planes[f]);
                    used[i] = true;
                    used[j] = true;
                }
            }
        }
        for (i, &(p, e)) in edges.iter().enumerate() {
            if !used[i] {
                let (a, b) = self.solids[p].edge_points(e);
                lines.push(PluckerLine::through(&a, &(b - a)));
            }
        }
        if points.len() >= 2 {
            return plucker_from_points(&points[0], &points[1]).ok();
        }
        if planes.len() >= 2 {
            return plane_meet(&planes[0], &planes[1]);
        }
        if let Some(h) = planes.first() {
            let mut pts = points.clone();
            pts.extend(lines.iter().filter_map(|l| l.meet_plane(h)));
            return plucker_from_points(pts.first()?, pts.get(1)?).ok();
        }
        if let Some(v) = points.first() {
            let (a, b) = (lines.first()?, lines.get(1)?);
            let h = Plane::through(v, (a.point() - v).cross(&a.direction));
            if h.normal.norm() <= 1e-12 {
                return None;
            }
            return plucker_from_points(v, &b.meet_plane(&h)?).ok();
        }
        if lines.len() < 4 {
            return None;
        }
        let sols = transversals_to_four_lines([&lines[0], &lines[1], &lines[2], &lines[3]]).ok()?;
        let hint = hint.normalized();
        sols.into_iter()
            .map(|s| s.normalized())
            .min_by(|a, b| gap(a, &hint).total_cmp(&gap(b, &hint)))
    }

    pub fn certify_all(&self, cands: &[PluckerLine]) -> Vec<ExtremalStabbingLine> {
        let found: Vec<ExtremalStabbingLine> = cands.par_iter().filter_map(|l| self.certify(l)).collect();
        dedup_global(found, self.scale)
    }
}

fn gap(a: &PluckerLine, b: &PluckerLine) -> f64 {
    a.direction.cross(&b.direction).norm() + a.distance_to_point(&b.point())
}

/// The line where two planes meet.
fn plane_meet(a: &Plane, b: &Plane) -> Option<PluckerLine> {
    let d = a.normal.cross(&b.normal);
    let dd = d.norm_squared();
    if dd <= 1e-18 {
        return None;
    }
    // Point on both planes: n·x = offset for each, closest to the origin.
    let x = (b.normal * a.offset - a.normal * b.offset).cross(&d) / dd;
    Some(PluckerLine::through(&x, &d))
}

/// Merges lines with equal features lying within [`COORD_TOL`] of each
/// other; sorted by features, then coordinates.
pub fn dedup_global(lines: Vec<ExtremalStabbingLine>, scale: f64) -> Vec<ExtremalStabbingLine> {
    let mut out: Vec<ExtremalStabbingLine> = Vec::new();
    for l in lines {
        if !out.iter().any(|m| m.features == l.features && same_line(&m.line, &l.line, scale, COORD_TOL)) {
            out.push(l);
        }
    }
    out.sort_by(|a, b| {
        a.features
            .cmp(&b.features)
            .then(a.coords.theta.total_cmp(&b.coords.theta))
            .then(a.coords.phi.total_cmp(&b.coords.phi))
    });
    out
}

/// Lines of `a` missing from `b` and of `b` missing from `a`, matched by
/// features and position.
pub fn compare_global<'a>(
    a: &'a [ExtremalStabbingLine],
    b: &'a [ExtremalStabbingLine],
    scale: f64,
) -> (Vec<&'a ExtremalStabbingLine>, Vec<&'a ExtremalStabbingLine>) {
    let missing = |x: &'a [ExtremalStabbingLine], y: &'a [ExtremalStabbingLine]| {
        x.iter()
            .filter(|l| !y.iter().any(|m| m.features == l.features && same_line(&m.line, &l.line, scale, COORD_TOL)))
            .collect::<Vec<_>>()
    };
    (missing(a, b), missing(b, a))
}

/// Vertices of the region of all line transversals of the scene.
pub fn extremal_lines_global(scene: &Scene) -> Result<Vec<ExtremalStabbingLine>> {
    let cert = GlobalCertifier::new(scene);
    let k = cert.solids.len();
    if k == 0 {
        return Ok(Vec::new());
    }
    let edges: Vec<(usize, usize)> =
        (0..k).flat_map(|p| (0..cert.solids[p].edges.len()).map(move |e| (p, e))).collect();
    let flags = SceneFlags { unbounded_parallel: scene.flags.unbounded_parallel, ..SceneFlags::default() };
    let per: Vec<Vec<PluckerLine>> = if k == 1 {
        Vec::new()
    } else {
        edges
            .par_iter()
            .map(|&(p, e)| {
                let (a, b) = cert.solids[p].edge_points(e);
                let rest: Vec<Polyhedron> =
                    scene.polyhedra.iter().enumerate().filter(|&(i, _)| i != p).map(|(_, q)| q.clone()).collect();
                let sub = Scene::new(rest, PluckerLine::through(&a, &(b - a)), scene.seed, flags)?;
                Ok(extremal_lines_through_line(&sub, Mode::Structured)?.into_iter().map(|l| l.line).collect())
            })
            .collect::<Result<_>>()?
    };
    let mut cands = two_body_candidates(&cert.solids);
    cands.extend(per.into_iter().flatten());
    Ok(cert.certify_all(&cands))
}

/// Lines pinned by features of at most two bodies: two vertices, a vertex
/// and a point where an edge crosses a facet plane through it, or two
/// facet planes.
fn two_body_candidates(solids: &[Polyhedron]) -> Vec<PluckerLine> {
    let verts: Vec<Vec3> = solids.iter().flat_map(|p| p.vertices.iter().copied()).collect();
    let mut out: Vec<PluckerLine> = (0..verts.len())
        .into_par_iter()
        .flat_map_iter(|i| verts[i + 1..].iter().filter_map(|y| plucker_from_points(&verts[i], y).ok()).collect::<Vec<_>>())
        .collect();
    for (i, p) in solids.iter().enumerate() {
        for (j, q) in solids.iter().enumerate() {
            if i == j {
                continue;
            }
            for (f, h) in p.planes.iter().enumerate() {
                let crossings: Vec<Vec3> = (0..q.edges.len())
                    .filter_map(|e| {
                        let (a, b) = q.edge_points(e);
                        let (da, db) = (h.signed_distance(&a), h.signed_distance(&b));
                        (da * db < 0.0).then(|| a + (b - a) * (da / (da - db)))
                    })
                    .collect();
                for &v in &p.facets[f] {
                    out.extend(crossings.iter().filter_map(|x| plucker_from_points(&p.vertices[v], x).ok()));
                }
                if i < j {
                    out.extend(q.planes.iter().filter_map(|g| plane_meet(h, g)));
                }
            }
        }
    }
    out
}
