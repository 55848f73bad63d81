//! Extremal stabbing lines through the pivot and the stabbing region they
//! bound, plus the special cases: lines in a fixed plane, the unbounded
//! and pivot-disjoint scenes, and the vertices of the unrestricted region.

mod construct;
mod global;
mod pairwise;
mod special;
mod through_line;

pub use construct::{facet_edge_line, vertex_edge_line};
pub use global::{compare_global, dedup_global, extremal_lines_global, global_coords, same_line};
pub(crate) use global::GlobalCertifier;
pub(crate) use special::in_plane_candidates_brute;
pub use pairwise::{pairwise_region, reguli_for_edge, Regulus};
pub use special::{
    extremal_lines_in_plane, plane_through_pivot_avoiding, region_disjoint_case, region_unbounded_case, upper_envelope_eu,
    Overshadow, UpperEnvelope,
};
pub use through_line::{extremal_lines_through_line, region_through_line, Mode, RegionPiece, StabbingRegion};

use std::collections::BTreeMap;
use std::f64::consts::PI;

use crate::geometry::{
    contact, plucker_from_points, stabs, tangent_at_edge, transversals_to_four_lines, Contact, Feature, FeatureKind,
    Plane, PluckerLine, Polyhedron, Vec3,
};
use crate::linespace::{coords_of_line, line_from_coords, LineCoords, Pivot};
use crate::scenes::Scene;

/// Lines closer than this in `(θ, φ, z/scale)` are the same line.
pub const COORD_TOL: f64 = 1e-6;

/// A line through the pivot that cannot move within the lines through the
/// pivot while keeping its contacts.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtremalStabbingLine {
    pub line: PluckerLine,
    /// Coordinates with `θ ∈ [0, π)`.
    pub coords: LineCoords,
    /// Sorted contact features.
    pub features: Vec<Feature>,
    /// Number of bodies the line misses.
    pub depth: usize,
}

impl ExtremalStabbingLine {
    /// Polyhedra among the features, sorted and deduplicated.
    pub fn polys(&self) -> Vec<usize> {
        let mut out: Vec<usize> = self.features.iter().map(|f| f.poly).collect();
        out.dedup();
        out
    }

    pub fn weight(&self) -> usize {
        self.features.iter().map(|f| f.kind.weight()).sum()
    }

    /// True when the line is tangent at every edge feature, passes through
    /// every vertex feature and, at depth 0, meets every body.
    pub fn verify(&self, scene: &Scene) -> bool {
        let solids = scene.solids();
        let snap = crate::geometry::SNAP * scene.scale();
        let tangent = self.features.iter().all(|f| match f.kind {
            FeatureKind::Edge(e) => tangent_at_edge(&self.line, &solids[f.poly], e),
            FeatureKind::Vertex(v) => self.line.distance_to_point(&solids[f.poly].vertices[v]) <= snap,
        });
        tangent && (self.depth > 0 || solids.iter().all(|p| stabs(&self.line, p)))
    }
}

/// Number of bodies of `scene` that `l` misses.
pub fn depth(l: &PluckerLine, scene: &Scene) -> usize {
    scene.solids().iter().filter(|p| !stabs(l, p)).count()
}

/// Canonical coordinates: the orientation with `θ ∈ [0, π)`.
pub fn canonical_coords(l: &PluckerLine, pivot: &Pivot) -> Option<LineCoords> {
    let c = coords_of_line(l, pivot).ok()?;
    Some(if c.theta >= PI { c.reversed() } else { c })
}

fn angle_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(2.0 * PI);
    d.min(2.0 * PI - d)
}

/// Distance between two lines through the pivot in `(θ, φ, z/scale)`,
/// ignoring orientation.
pub fn coord_gap(a: &LineCoords, b: &LineCoords, scale: f64) -> f64 {
    let one = |b: &LineCoords| angle_gap(a.theta, b.theta).max(angle_gap(a.phi, b.phi)).max((a.z - b.z).abs() / scale);
    one(b).min(one(&b.reversed()))
}

/// Checks candidate lines and turns them into extremal lines.
///
/// A candidate is accepted when its contacts carry weight at least 3
/// (vertex 2, edge 1). The line is then rebuilt from its features alone
/// and the contacts are recomputed, so that the result does not depend on
/// how the candidate was found.
pub struct Certifier {
    pub solids: Vec<Polyhedron>,
    pub pivot: Pivot,
    pub scale: f64,
}

impl Certifier {
    pub fn new(scene: &Scene) -> Certifier {
        Certifier { solids: scene.solids(), pivot: scene.pivot_frame(), scale: scene.scale() }
    }

    /// `(features, depth)` of `l`.
    pub fn analyze(&self, l: &PluckerLine) -> (Vec<Feature>, usize) {
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

    pub fn certify(&self, l: &PluckerLine, max_depth: usize) -> Option<ExtremalStabbingLine> {
        canonical_coords(l, &self.pivot)?;
        let (feats, d) = self.analyze(l);
        if d > max_depth || weight(&feats) < 3 {
            return None;
        }
        let line = self.resolve(&feats, l)?;
        let coords = canonical_coords(&line, &self.pivot)?;
        let (feats2, d2) = self.analyze(&line);
        if feats2 != feats || d2 != d {
            return None;
        }
        let ok = feats.iter().all(|f| match f.kind {
            FeatureKind::Edge(e) => tangent_at_edge(&line, &self.solids[f.poly], e),
            FeatureKind::Vertex(_) => true,
        });
        ok.then(|| ExtremalStabbingLine { line: line_from_coords(&coords, &self.pivot), coords, features: feats, depth: d })
    }

    /// The line through the pivot determined by `feats`, closest to `hint`.
    fn resolve(&self, feats: &[Feature], hint: &PluckerLine) -> Option<PluckerLine> {
        let mut verts: Vec<Vec3> = Vec::new();
        let mut edges: Vec<PluckerLine> = Vec::new();
        let mut axial: Option<Plane> = None;
        for f in feats {
            let p = &self.solids[f.poly];
            match f.kind {
                FeatureKind::Vertex(v) => verts.push(p.vertices[v]),
                FeatureKind::Edge(e) if is_axial(p, e, &self.pivot) => {
                    axial = axial.or_else(|| axial_plane(&self.pivot, &p.edge_points(e).0));
                }
                FeatureKind::Edge(e) => {
                    let (a, b) = p.edge_points(e);
                    edges.push(PluckerLine::through(&a, &(b - a)));
                }
            }
        }
        if verts.len() >= 2 {
            return plucker_from_points(&verts[0], &verts[1]).ok();
        }
        if verts.len() == 1 {
            return vertex_edge_line(&self.pivot.line, &verts[0], edges.first()?);
        }
        if let Some(h) = axial {
            let (x, y) = (edges.first()?.meet_plane(&h)?, edges.get(1)?.meet_plane(&h)?);
            return plucker_from_points(&x, &y).ok();
        }
        if edges.len() < 3 {
            return None;
        }
        let sols = transversals_to_four_lines([&self.pivot.line, &edges[0], &edges[1], &edges[2]]).ok()?;
        let target = canonical_coords(hint, &self.pivot)?;
        sols.into_iter()
            .filter_map(|s| canonical_coords(&s, &self.pivot).map(|c| (coord_gap(&c, &target, self.scale), s)))
            .min_by(|a, b| a.0.total_cmp(&b.0))
            .map(|(_, s)| s)
    }

    /// Certifies all candidates in parallel and deduplicates.
    pub fn certify_all(&self, cands: &[PluckerLine], max_depth: usize) -> Vec<ExtremalStabbingLine> {
        use rayon::prelude::*;
        let found: Vec<ExtremalStabbingLine> = cands.par_iter().filter_map(|l| self.certify(l, max_depth)).collect();
        dedup(found, self.scale)
    }
}

/// True when edge `e` of `p` runs along the pivot, as the side edges of
/// bodies swept along it do.
pub(crate) fn is_axial(p: &Polyhedron, e: usize, pivot: &Pivot) -> bool {
    let (a, b) = p.edge_points(e);
    (b - a).normalize().cross(&pivot.u).norm() <= 1e-9
}

/// The plane through the pivot and the point `x`.
fn axial_plane(pivot: &Pivot, x: &Vec3) -> Option<Plane> {
    let n = pivot.u.cross(&(x - pivot.origin));
    (n.norm() > 1e-12).then(|| Plane::through(x, n))
}

fn weight(feats: &[Feature]) -> usize {
    feats.iter().map(|f| f.kind.weight()).sum()
}

/// Merges lines with equal features and coordinates within [`COORD_TOL`];
/// the output is sorted by features, then coordinates.
pub fn dedup(lines: Vec<ExtremalStabbingLine>, scale: f64) -> Vec<ExtremalStabbingLine> {
    let mut groups: BTreeMap<Vec<Feature>, Vec<ExtremalStabbingLine>> = BTreeMap::new();
    for l in lines {
        let g = groups.entry(l.features.clone()).or_default();
        if !g.iter().any(|m| coord_gap(&m.coords, &l.coords, scale) <= COORD_TOL) {
            g.push(l);
        }
    }
    groups
        .into_values()
        .flat_map(|mut g| {
            g.sort_by(|a, b| {
                a.coords.theta.total_cmp(&b.coords.theta).then(a.coords.phi.total_cmp(&b.coords.phi))
            });
            g
        })
        .collect()
}

/// Pairs up two sets of extremal lines by features and coordinates.
/// Returns the lines of `a` missing from `b` and those of `b` missing from
/// `a`.
pub fn compare_sets<'a>(
    a: &'a [ExtremalStabbingLine],
    b: &'a [ExtremalStabbingLine],
    scale: f64,
) -> (Vec<&'a ExtremalStabbingLine>, Vec<&'a ExtremalStabbingLine>) {
    let missing = |x: &'a [ExtremalStabbingLine], y: &'a [ExtremalStabbingLine]| {
        x.iter()
            .filter(|l| !y.iter().any(|m| m.features == l.features && coord_gap(&m.coords, &l.coords, scale) <= COORD_TOL))
            .collect::<Vec<_>>()
    };
    (missing(a, b), missing(b, a))
}

/// Lines through the pivot defined by at most two bodies: through a vertex
/// and an edge, through two vertices, and lying in a facet's plane while
/// crossing a foreign edge.
pub fn degenerate_candidates(solids: &[Polyhedron], pivot: &Pivot) -> Vec<PluckerLine> {
    use rayon::prelude::*;
    let edges: Vec<(usize, usize, PluckerLine)> = solids
        .iter()
        .enumerate()
        .flat_map(|(i, p)| {
            (0..p.edges.len()).map(move |e| {
                let (a, b) = p.edge_points(e);
                (i, e, PluckerLine::through(&a, &(b - a)))
            })
        })
        .collect();
    let verts: Vec<(usize, usize, Vec3)> = solids
        .iter()
        .enumerate()
        .flat_map(|(i, p)| p.vertices.iter().enumerate().map(move |(v, x)| (i, v, *x)))
        .collect();
    let mut out: Vec<PluckerLine> = verts
        .par_iter()
        .flat_map_iter(|&(i, v, x)| {
            let p = &solids[i];
            let own: Vec<usize> = p.edges_at(v).collect();
            edges
                .iter()
                .filter(move |(j, e, _)| *j != i || !own.contains(e))
                .filter_map(move |(_, _, el)| vertex_edge_line(&pivot.line, &x, el))
                .collect::<Vec<_>>()
        })
        .collect();
    for (a, &(i, _, x)) in verts.iter().enumerate() {
        for &(j, _, y) in &verts[a + 1..] {
            if i == j {
                continue;
            }
            if let Ok(l) = plucker_from_points(&x, &y) {
                if pivot.line.distance(&l) <= crate::geometry::SNAP * (1.0 + x.norm() + y.norm()) {
                    out.push(l);
                }
            }
        }
    }
    for (i, p) in solids.iter().enumerate() {
        for e in (0..p.edges.len()).filter(|&e| is_axial(p, e, pivot)) {
            let Some(h) = axial_plane(pivot, &p.edge_points(e).0) else {
                continue;
            };
            let pts: Vec<Vec3> = edges
                .iter()
                .filter(|&&(j, f, _)| (j, f) != (i, e) && !is_axial(&solids[j], f, pivot))
                .filter_map(|&(j, f, _)| {
                    let (a, b) = solids[j].edge_points(f);
                    let (da, db) = (h.signed_distance(&a), h.signed_distance(&b));
                    (da * db < 0.0).then(|| a + (b - a) * (da / (da - db)))
                })
                .collect();
            for (a, x) in pts.iter().enumerate() {
                out.extend(pts[a + 1..].iter().filter_map(|y| plucker_from_points(x, y).ok()));
            }
        }
    }
    let facets: Vec<(usize, Plane)> =
        solids.iter().enumerate().flat_map(|(i, p)| p.planes.iter().map(move |h| (i, *h))).collect();
    out.par_extend(facets.par_iter().flat_map_iter(|&(i, h)| {
        edges
            .iter()
            .filter(move |(j, _, _)| *j != i)
            .filter_map(move |(_, _, el)| facet_edge_line(&pivot.line, &h, el))
            .collect::<Vec<_>>()
    }));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenes::SceneFlags;

    fn cube_scene(pivot: PluckerLine) -> Scene {
        let c = Polyhedron::axis_box(Vec3::repeat(-1.0), Vec3::repeat(1.0));
        Scene::new(vec![c], pivot, 1, SceneFlags::default()).unwrap()
    }

    #[test]
    fn depth_counts_missed_bodies() {
        let a = Polyhedron::axis_box(Vec3::new(-1.0, -1.0, -1.0), Vec3::new(1.0, 1.0, 1.0));
        let b = Polyhedron::axis_box(Vec3::new(3.0, -1.0, -1.0), Vec3::new(5.0, 1.0, 1.0));
        let pivot = PluckerLine::through(&Vec3::new(0.0, 0.0, 0.0), &Vec3::new(0.1, 0.2, 1.0));
        let s = Scene::new(vec![a, b], pivot, 1, SceneFlags::default()).unwrap();
        assert_eq!(depth(&PluckerLine::through(&Vec3::zeros(), &Vec3::x()), &s), 0);
        assert_eq!(depth(&PluckerLine::through(&Vec3::new(0.0, 9.0, 0.0), &Vec3::x()), &s), 2);
        assert_eq!(depth(&PluckerLine::through(&Vec3::new(0.0, 0.0, 0.0), &Vec3::y()), &s), 1);
    }

    #[test]
    fn certify_rebuilds_vertex_edge_line() {
        let s = cube_scene(PluckerLine::through(&Vec3::new(3.0, 0.3, 0.0), &Vec3::new(0.1, 0.2, 1.0)));
        let cert = Certifier::new(&s);
        let p = &cert.solids[0];
        let v = p.vertices.iter().position(|x| *x == Vec3::new(1.0, 1.0, 1.0)).unwrap();
        let lines = degenerate_candidates(&cert.solids, &cert.pivot);
        let found = cert.certify_all(&lines, 0);
        assert!(!found.is_empty());
        assert!(found.iter().all(|l| l.weight() >= 3 && l.verify(&s)));
        assert!(found.iter().any(|l| l.features.iter().any(|f| f.kind == FeatureKind::Vertex(v))));
        let noisy = PluckerLine::new(found[0].line.direction, found[0].line.moment + Vec3::repeat(1e-10));
        let again = cert.certify(&noisy, 0).unwrap();
        assert_eq!(again.features, found[0].features);
        assert!(coord_gap(&again.coords, &found[0].coords, s.scale()) < 1e-12);
    }

    #[test]
    fn generic_line_is_not_extremal() {
        let s = cube_scene(PluckerLine::through(&Vec3::new(3.0, 0.3, 0.0), &Vec3::new(0.1, 0.2, 1.0)));
        let cert = Certifier::new(&s);
        assert!(cert.certify(&PluckerLine::through(&Vec3::new(3.0, 0.3, 0.0), &Vec3::new(-1.0, 0.05, 0.02)), 0).is_none());
    }

    #[test]
    fn dedup_merges_reversed_duplicates() {
        let s = cube_scene(PluckerLine::through(&Vec3::new(3.0, 0.3, 0.0), &Vec3::new(0.1, 0.2, 1.0)));
        let cert = Certifier::new(&s);
        let found = cert.certify_all(&degenerate_candidates(&cert.solids, &cert.pivot), 0);
        let mut doubled = found.clone();
        doubled.extend(found.iter().map(|l| {
            let mut r = l.clone();
            r.coords = l.coords.reversed();
            r
        }));
        assert_eq!(dedup(doubled, s.scale()).len(), found.len());
    }
}
