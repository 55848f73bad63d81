//! Brute-force ground truth: every feature combination that can pin a line
//! through the pivot, and direct stabbing tests on a grid of lines.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::engine::{degenerate_candidates, Certifier, ExtremalStabbingLine, GlobalCertifier, StabbingRegion};
use crate::error::{Error, Result};
use crate::geometry::{plucker_from_points, stabs, tangent_at_edge, transversals_to_four_lines, Plane, PluckerLine, Vec3};
use crate::linespace::{line_from_coords, LineCoords};
use crate::scenes::Scene;

/// Largest number of feature combinations the oracle will try.
pub const MAX_COMBINATIONS: u128 = 10_000_000;

/// Number of feature combinations the oracle tries on `scene`.
pub fn combination_count(scene: &Scene) -> u128 {
    let e: u128 = scene.polyhedra.iter().map(|p| p.edges.len() as u128).sum();
    let v: u128 = scene.polyhedra.iter().map(|p| p.vertices.len() as u128).sum();
    let f: u128 = scene.n() as u128;
    let triples = if e >= 3 { e * (e - 1) * (e - 2) / 6 } else { 0 };
    triples + v * e + v * v.saturating_sub(1) / 2 + f * e
}

/// Extremal lines through the pivot that stab every body.
pub fn brute_force_extremal_lines(scene: &Scene) -> Result<Vec<ExtremalStabbingLine>> {
    brute_force_with_depth(scene, 0)
}

/// Extremal lines through the pivot missing at most `max_depth` bodies.
pub fn brute_force_with_depth(scene: &Scene, max_depth: usize) -> Result<Vec<ExtremalStabbingLine>> {
    let count = combination_count(scene);
    if count > MAX_COMBINATIONS {
        return Err(Error::TooLarge(count));
    }
    let cert = Certifier::new(scene);
    let edges: Vec<(usize, usize, PluckerLine)> = cert
        .solids
        .iter()
        .enumerate()
        .flat_map(|(i, p)| {
            (0..p.edges.len()).map(move |e| {
                let (a, b) = p.edge_points(e);
                (i, e, PluckerLine::through(&a, &(b - a)))
            })
        })
        .collect();
    let n = edges.len();
    let mut cands: Vec<PluckerLine> = (0..n)
        .into_par_iter()
        .flat_map_iter(|i| {
            let mut out = Vec::new();
            for j in i + 1..n {
                for l in j + 1..n {
                    let [a, b, c] = [&edges[i], &edges[j], &edges[l]];
                    let Ok(sols) = transversals_to_four_lines([&cert.pivot.line, &a.2, &b.2, &c.2]) else {
                        continue;
                    };
                    out.extend(sols.into_iter().filter(|s| {
                        [a, b, c].iter().all(|(p, e, _)| tangent_at_edge(s, &cert.solids[*p], *e))
                    }));
                }
            }
            out
        })
        .collect();
    cands.extend(degenerate_candidates(&cert.solids, &cert.pivot));
    Ok(cert.certify_all(&cands, max_depth))
}

/// One grid line on which the direct test and a region disagree.
#[derive(Debug, Clone, PartialEq)]
pub struct Disagreement {
    pub coords: LineCoords,
    /// Direct stabbing verdict.
    pub oracle: bool,
    /// Verdict of the region.
    pub region: bool,
    /// Distance in `z` from the region's boundary at this direction
    /// (infinite when the direction has no stabbing lines).
    pub band: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridReport {
    pub resolution: [usize; 3],
    pub points: usize,
    pub transversals: usize,
    pub disagreements: Vec<Disagreement>,
    /// Intercept range sampled.
    pub z_range: (f64, f64),
}

/// Samples lines through the pivot on a cell-centred `(θ, φ, z)` grid with
/// `θ ∈ [0, π)`, `φ ∈ (0, π)` and `z` spanning the scene's shadow on the
/// pivot, and tests each against every body directly.
pub fn grid_region_check(scene: &Scene, resolution: [usize; 3], region: Option<&StabbingRegion>) -> Result<GridReport> {
    if resolution.iter().any(|&r| r < 2) {
        return Err(Error::InvalidInput("grid resolution must be at least 2 per axis".into()));
    }
    let pivot = scene.pivot_frame();
    let solids = scene.solids();
    let (zlo, zhi) = scene_shadow(scene);
    let [nt, np, nz] = resolution;
    let cells: Vec<(usize, usize)> = (0..nt).flat_map(|i| (0..np).map(move |j| (i, j))).collect();
    let per: Vec<(usize, usize, Vec<Disagreement>)> = cells
        .par_iter()
        .map(|&(i, j)| {
            let theta = PI * (i as f64 + 0.5) / nt as f64;
            let phi = PI * (j as f64 + 0.5) / np as f64;
            let range = region.and_then(|r| r.z_range(theta, phi));
            let mut count = 0;
            let mut dis = Vec::new();
            for m in 0..nz {
                let z = zlo + (zhi - zlo) * (m as f64 + 0.5) / nz as f64;
                let c = LineCoords { theta, phi, z };
                let l = line_from_coords(&c, &pivot);
                let direct = solids.iter().all(|p| stabs(&l, p));
                count += direct as usize;
                if region.is_some() {
                    let inside = matches!(range, Some((a, b)) if a <= z && z <= b);
                    if inside != direct {
                        let band = range.map_or(f64::INFINITY, |(a, b)| (z - a).abs().min((z - b).abs()));
                        dis.push(Disagreement { coords: c, oracle: direct, region: inside, band });
                    }
                }
            }
            (nz, count, dis)
        })
        .collect();
    let mut report = GridReport { resolution, points: 0, transversals: 0, disagreements: Vec::new(), z_range: (zlo, zhi) };
    for (p, c, d) in per {
        report.points += p;
        report.transversals += c;
        report.disagreements.extend(d);
    }
    Ok(report)
}

/// Intercept range of the bodies' projections on the pivot, padded by a
/// tenth of its length.
pub fn scene_shadow(scene: &Scene) -> (f64, f64) {
    let pivot = scene.pivot_frame();
    let zs: Vec<f64> = scene.polyhedra.iter().flat_map(|p| p.vertices.iter().map(|v| pivot.intercept(v))).collect();
    let lo = zs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = zs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !lo.is_finite() {
        return (-1.0, 1.0);
    }
    let pad = 0.1 * (hi - lo).max(1e-3);
    (lo - pad, hi + pad)
}

/// Extremal lines through the pivot parallel to `h`, from every pair of
/// edges and every vertex.
pub fn brute_force_in_plane(scene: &Scene, h: &Plane) -> Result<Vec<ExtremalStabbingLine>> {
    crate::engine::in_plane_candidates_brute(scene, h)
}

/// Number of feature combinations [`brute_force_global`] tries on `scene`.
pub fn global_combination_count(scene: &Scene) -> u128 {
    let e: u128 = scene.solids().iter().map(|p| p.edges.len() as u128).sum();
    let v: u128 = scene.solids().iter().map(|p| p.vertices.len() as u128).sum();
    let f: u128 = scene.solids().iter().map(|p| p.planes.len() as u128).sum();
    let quads = if e >= 4 { e * (e - 1) * (e - 2) * (e - 3) / 24 } else { 0 };
    quads + v * e * e / 2 + v * v / 2 + f * f / 2 + f * e * (e + v)
}

/// Vertices of the region of all line transversals, from every feature
/// combination: four edges, a vertex and two edges, two vertices, and
/// combinations with a facet plane (two planes, a plane with two points
/// where vertices or edges meet it).
pub fn brute_force_global(scene: &Scene) -> Result<Vec<ExtremalStabbingLine>> {
    let count = global_combination_count(scene);
    if count > MAX_COMBINATIONS {
        return Err(Error::TooLarge(count));
    }
    let cert = GlobalCertifier::new(scene);
    let edges: Vec<(usize, usize, PluckerLine)> = cert
        .solids
        .iter()
        .enumerate()
        .flat_map(|(i, p)| {
            (0..p.edges.len()).map(move |e| {
                let (a, b) = p.edge_points(e);
                (i, e, PluckerLine::through(&a, &(b - a)))
            })
        })
        .collect();
    let verts: Vec<Vec3> = cert.solids.iter().flat_map(|p| p.vertices.iter().copied()).collect();
    let planes: Vec<Plane> = cert.solids.iter().flat_map(|p| p.planes.iter().copied()).collect();
    let n = edges.len();
    let tangent = |s: &PluckerLine, es: &[&(usize, usize, PluckerLine)]| {
        es.iter().all(|(p, e, _)| tangent_at_edge(s, &cert.solids[*p], *e))
    };
    let mut cands: Vec<PluckerLine> = (0..n)
        .into_par_iter()
        .flat_map_iter(|i| {
            let mut out = Vec::new();
            for j in i + 1..n {
                for l in j + 1..n {
                    for m in l + 1..n {
                        let q = [&edges[i], &edges[j], &edges[l], &edges[m]];
                        if let Ok(sols) = transversals_to_four_lines([&q[0].2, &q[1].2, &q[2].2, &q[3].2]) {
                            out.extend(sols.into_iter().filter(|s| tangent(s, &q)));
                        }
                    }
                }
            }
            out
        })
        .collect();
    cands.par_extend(verts.par_iter().flat_map_iter(|v| {
        let mut out = Vec::new();
        for (i, a) in edges.iter().enumerate() {
            let normal = (a.2.point() - v).cross(&a.2.direction);
            if normal.norm() <= 1e-12 {
                continue;
            }
            let h = Plane::through(v, normal);
            for b in &edges[i + 1..] {
                if let Some(x) = b.2.meet_plane(&h) {
                    out.extend(plucker_from_points(v, &x).ok().filter(|s| tangent(s, &[a, b])));
                }
            }
        }
        out
    }));
    for (i, x) in verts.iter().enumerate() {
        cands.extend(verts[i + 1..].iter().filter_map(|y| plucker_from_points(x, y).ok()));
    }
    cands.par_extend(planes.par_iter().enumerate().flat_map_iter(|(i, h)| {
        let mut out = Vec::new();
        for g in &planes[i + 1..] {
            let d = h.normal.cross(&g.normal);
            if d.norm() > 1e-9 {
                let x = (g.normal * h.offset - h.normal * g.offset).cross(&d) / d.norm_squared();
                out.push(PluckerLine::through(&x, &d));
            }
        }
        let snap = crate::geometry::SNAP * cert.scale;
        let mut pts: Vec<Vec3> = verts.iter().filter(|v| h.signed_distance(v).abs() <= snap).copied().collect();
        pts.extend(edges.iter().filter_map(|(p, e, l)| {
            let (a, b) = cert.solids[*p].edge_points(*e);
            (h.signed_distance(&a) * h.signed_distance(&b) < 0.0).then(|| l.meet_plane(h)).flatten()
        }));
        for (a, x) in pts.iter().enumerate() {
            out.extend(pts[a + 1..].iter().filter_map(|y| plucker_from_points(x, y).ok()));
        }
        out
    }));
    Ok(cert.certify_all(&cands))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Polyhedron, Vec3};
    use crate::scenes::SceneFlags;

    fn tetra() -> Polyhedron {
        Polyhedron::convex_hull(&[
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(1.0, 0.1, 0.0),
            Vec3::new(0.2, 1.0, 0.1),
            Vec3::new(0.3, 0.2, 1.0),
        ])
        .unwrap()
    }

    fn pivot() -> PluckerLine {
        PluckerLine::through(&Vec3::new(-1.5, 0.35, 0.2), &Vec3::new(0.17, 0.23, 1.0))
    }

    #[test]
    fn empty_scene_is_empty() {
        let s = Scene::new(vec![], pivot(), 0, SceneFlags::default()).unwrap();
        assert!(brute_force_extremal_lines(&s).unwrap().is_empty());
    }

    #[test]
    fn tetrahedron_lines_are_certified_and_stable() {
        let s = Scene::new(vec![tetra()], pivot(), 0, SceneFlags::default()).unwrap();
        let a = brute_force_extremal_lines(&s).unwrap();
        assert!(!a.is_empty());
        assert!(a.iter().all(|l| l.verify(&s) && l.weight() >= 3 && l.depth == 0));
        let moved = tetra().translated(&Vec3::new(1e-8, -1e-8, 1e-8));
        let s2 = Scene::new(vec![moved], pivot(), 0, SceneFlags::default()).unwrap();
        let b = brute_force_extremal_lines(&s2).unwrap();
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.features, y.features);
        }
    }

    #[test]
    fn guard_rejects_large_scenes() {
        let boxes: Vec<Polyhedron> = (0..40)
            .map(|i| Polyhedron::axis_box(Vec3::new(3.0 * i as f64, 0.0, 0.0), Vec3::new(3.0 * i as f64 + 1.0, 1.0, 1.0)))
            .collect();
        let s = Scene::new(boxes, pivot(), 0, SceneFlags::default()).unwrap();
        assert!(matches!(brute_force_extremal_lines(&s), Err(Error::TooLarge(_))));
    }

    #[test]
    fn grid_on_pierced_cube() {
        let c = Polyhedron::axis_box(Vec3::repeat(-1.0), Vec3::repeat(1.0));
        let through = PluckerLine::through(&Vec3::zeros(), &Vec3::new(0.1, 0.2, 1.0));
        let s = Scene::new(vec![c.clone()], through, 0, SceneFlags::default()).unwrap();
        let r = grid_region_check(&s, [6, 6, 6], None).unwrap();
        assert!(r.transversals > 0 && r.transversals < r.points);
        assert!(grid_region_check(&s, [1, 4, 4], None).is_err());
    }
}
