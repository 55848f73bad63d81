use std::sync::Arc;

use rayon::prelude::*;

use super::{degenerate_candidates, is_axial, vertex_edge_line, Certifier, ExtremalStabbingLine, StabbingRegion};
use crate::envelope::{ArcLabel, MonotoneArc};
use crate::error::{Diagnostic, Result};
use crate::geometry::{tangent_at_edge, transversals_to_four_lines, wrap_pi, PluckerLine, Polyhedron};
use crate::linespace::{edge_frame, EdgeFrame, PieceKind, Pivot};
use crate::scenes::{Scene, SceneFlags};

/// A maximal connected family of lines through the pivot tangent at edge
/// `edge0` and at edge `edge` of another body, presented over a `θ` range
/// of `edge0`'s frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Regulus {
    /// `(poly, edge)` of the base edge `e₀`.
    pub edge0: (usize, usize),
    /// `(poly, edge)` of the second edge.
    pub edge: (usize, usize),
    /// Open `θ` range in the frame of `edge0`.
    pub theta: (f64, f64),
}

impl Regulus {
    pub fn owners(&self) -> [usize; 2] {
        [self.edge0.0, self.edge.0]
    }

    /// `φ` of the family's line at `θ` in `frame` (the frame of `edge0`).
    pub fn phi(&self, frame: &EdgeFrame, solids: &[Polyhedron], theta: f64) -> Option<f64> {
        let c = frame.center(theta).ok()?;
        let x = frame.edge_point(&solids[self.edge.0], self.edge.1, theta)?;
        Some(EdgeFrame::phi_between(c, x))
    }

    pub fn line_at(&self, frame: &EdgeFrame, solids: &[Polyhedron], theta: f64) -> Option<PluckerLine> {
        frame.line_at(theta, self.phi(frame, solids, theta)?).ok()
    }

    /// The family as an arc `θ ↦ φ`, labelled like the tangent pieces of
    /// the `γ` profiles.
    pub fn arc(&self, id: usize, frame: &Arc<EdgeFrame>, solids: &Arc<Vec<Polyhedron>>) -> MonotoneArc {
        let (f, s, r) = (frame.clone(), solids.clone(), self.clone());
        let kind = PieceKind::Tangent { poly: self.edge.0, edge: self.edge.1 };
        MonotoneArc::new(id, ArcLabel::Piece(kind), self.theta.0, self.theta.1, 2, move |t| {
            r.phi(&f, &s, t).unwrap_or(f64::NAN)
        })
    }
}

fn edge_line(p: &Polyhedron, e: usize) -> PluckerLine {
    let (a, b) = p.edge_points(e);
    PluckerLine::through(&a, &(b - a))
}

/// Orientations in `frame` at which the family of `(e₀, e)` can start or
/// stop: through an endpoint of either edge, parallel to a facet at `e`,
/// or where the slices degenerate.
fn events(frame: &EdgeFrame, solids: &[Polyhedron], pivot: &Pivot, poly: usize, e: usize) -> Vec<f64> {
    let p = &solids[poly];
    let p0 = &solids[frame.poly];
    let (l0, le) = (edge_line(p0, frame.edge), edge_line(p, e));
    let mut lines = Vec::new();
    let (a, b) = p.edge_points(e);
    lines.extend([a, b].iter().filter_map(|v| vertex_edge_line(&pivot.line, v, &l0)));
    let (a0, b0) = p0.edge_points(frame.edge);
    lines.extend([a0, b0].iter().filter_map(|v| vertex_edge_line(&pivot.line, v, &le)));
    let ed = p.edges[e];
    for f in [ed.f1, ed.f2] {
        let inf = PluckerLine::at_infinity(&p.planes[f].normal);
        lines.extend(transversals_to_four_lines([&pivot.line, &l0, &le, &inf]).unwrap_or_default());
    }
    let mut out: Vec<f64> = lines.iter().filter_map(|l| frame.angles_of(l)).map(|(t, _)| t).collect();
    let d = frame.rot * (b - a);
    out.push(wrap_pi(d.y.atan2(d.x)));
    out.push(frame.theta_star);
    out
}

fn on_family(frame: &EdgeFrame, solids: &[Polyhedron], r: &Regulus, theta: f64) -> bool {
    let Some(phi) = r.phi(frame, solids, theta) else {
        return false;
    };
    let Ok((lo, hi, _)) = frame.domain(theta) else {
        return false;
    };
    if !(phi > lo && phi < hi) {
        return false;
    }
    let Ok(l) = frame.line_at(theta, phi) else {
        return false;
    };
    tangent_at_edge(&l, &solids[frame.poly], frame.edge) && tangent_at_edge(&l, &solids[r.edge.0], r.edge.1)
}

fn reguli_in_frame(frame: &EdgeFrame, solids: &[Polyhedron], pivot: &Pivot, others: &[usize]) -> Vec<Regulus> {
    let mut out = Vec::new();
    let pad = 1e-9 * (1.0 + frame.theta0);
    for &q in others {
        for e in (0..solids[q].edges.len()).filter(|&e| !is_axial(&solids[q], e, pivot)) {
            let mut cuts: Vec<f64> = events(frame, solids, pivot, q, e)
                .into_iter()
                .filter(|&t| t > 0.0 && t < frame.theta0)
                .collect();
            cuts.extend([0.0, frame.theta0]);
            cuts.sort_by(f64::total_cmp);
            cuts.dedup_by(|a, b| (*a - *b).abs() <= pad);
            let mut r = Regulus { edge0: (frame.poly, frame.edge), edge: (q, e), theta: (0.0, 0.0) };
            let mut run: Option<(f64, f64)> = None;
            for w in cuts.windows(2) {
                let (lo, hi) = (w[0] + pad, w[1] - pad);
                let seam = (w[0] - frame.theta_star).abs() <= pad;
                let ok = hi > lo && on_family(frame, solids, &r, 0.5 * (lo + hi));
                match (ok, run) {
                    (true, Some((a, _))) if !seam => run = Some((a, hi)),
                    (true, _) => {
                        if let Some(t) = run.take() {
                            out.push(Regulus { theta: t, ..r.clone() });
                        }
                        run = Some((lo, hi));
                    }
                    (false, _) => {
                        if let Some(t) = run.take() {
                            out.push(Regulus { theta: t, ..r.clone() });
                        }
                    }
                }
            }
            if let Some(t) = run {
                r.theta = t;
                out.push(r);
            }
        }
    }
    out
}

/// The tangent families at `e0 = (poly, edge)` and any edge of another body
/// of `scene`.
pub fn reguli_for_edge(e0: (usize, usize), scene: &Scene) -> Result<Vec<Regulus>> {
    let solids = scene.solids();
    let pivot = scene.pivot_frame();
    let frame = edge_frame(&solids[e0.0], e0.0, e0.1, &pivot)?;
    let others: Vec<usize> = (0..solids.len()).filter(|&q| q != e0.0).collect();
    Ok(reguli_in_frame(&frame, &solids, &pivot, &others))
}

/// Lines through the pivot tangent at three edges of at least two bodies:
/// crossings of two reguli sharing a base edge.
fn crossing_candidates(frame: &EdgeFrame, solids: &[Polyhedron], pivot: &Pivot, reguli: &[Regulus]) -> Vec<PluckerLine> {
    let l0 = edge_line(&solids[frame.poly], frame.edge);
    let mut out = Vec::new();
    for (i, a) in reguli.iter().enumerate() {
        for b in &reguli[i + 1..] {
            if a.theta.1 < b.theta.0 || b.theta.1 < a.theta.0 || a.edge == b.edge {
                continue;
            }
            let (la, lb) = (edge_line(&solids[a.edge.0], a.edge.1), edge_line(&solids[b.edge.0], b.edge.1));
            out.extend(transversals_to_four_lines([&pivot.line, &l0, &la, &lb]).unwrap_or_default());
        }
    }
    out
}

/// Certified vertices of `T_ℓ₀` found from the reguli of every edge, plus
/// the reguli themselves.
pub(crate) fn vertices_by_reguli(scene: &Scene) -> Result<(Vec<ExtremalStabbingLine>, Vec<Regulus>)> {
    let cert = Certifier::new(scene);
    let k = cert.solids.len();
    let edges: Vec<(usize, usize)> =
        (0..k).flat_map(|p| (0..cert.solids[p].edges.len()).map(move |e| (p, e))).collect();
    let edges: Vec<(usize, usize)> =
        edges.into_iter().filter(|&(p, e)| !is_axial(&cert.solids[p], e, &cert.pivot)).collect();
    let per: Vec<(Vec<PluckerLine>, Vec<Regulus>)> = edges
        .par_iter()
        .map(|&(p, e)| {
            let frame = edge_frame(&cert.solids[p], p, e, &cert.pivot)?;
            let others: Vec<usize> = (0..k).filter(|&q| q != p).collect();
            let reguli = reguli_in_frame(&frame, &cert.solids, &cert.pivot, &others);
            Ok((crossing_candidates(&frame, &cert.solids, &cert.pivot, &reguli), reguli))
        })
        .collect::<Result<_>>()?;
    let mut cands = degenerate_candidates(&cert.solids, &cert.pivot);
    let mut reguli = Vec::new();
    for (c, r) in per {
        cands.extend(c);
        reguli.extend(r);
    }
    Ok((cert.certify_all(&cands, 0), reguli))
}

/// `T_ℓ₀({P, Q})` by enumerating the reguli of all edge pairs of `P` and
/// `Q`. Vertex features refer to `P` as body 0 and `Q` as body 1. The
/// region carries no sandwich pieces; membership goes through
/// [`StabbingRegion::contains`].
pub fn pairwise_region(p: &Polyhedron, q: &Polyhedron, pivot: &PluckerLine) -> Result<StabbingRegion> {
    let scene = Scene::new(vec![p.clone(), q.clone()], *pivot, 0, SceneFlags::default())?;
    let (vertices, reguli) = vertices_by_reguli(&scene)?;
    let with_vertices = reguli.iter().filter(|r| r.theta.1 > r.theta.0).count();
    Ok(StabbingRegion {
        pivot: scene.pivot_frame(),
        pieces: Vec::new(),
        vertices,
        diagnostics: vec![Diagnostic::new("reguli", format!("{with_vertices} tangent families"))],
        solids: scene.solids(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{compare_sets, extremal_lines_through_line, Mode};
    use crate::geometry::{contact, Contact, Vec3};
    use crate::oracle::brute_force_extremal_lines;
    use nalgebra::{Rotation3, Unit};

    fn pivot() -> PluckerLine {
        PluckerLine::through(&Vec3::new(0.3, -0.2, 0.1), &Vec3::new(0.11, 0.17, 1.0))
    }

    fn tilted_cube(c: Vec3, r: f64, axis: Vec3, angle: f64) -> Polyhedron {
        let rot = Rotation3::from_axis_angle(&Unit::new_normalize(axis), angle);
        Polyhedron::axis_box(Vec3::repeat(-r), Vec3::repeat(r)).transformed(&rot, &c)
    }

    #[test]
    fn separated_bodies_have_empty_region() {
        let p = Polyhedron::axis_box(Vec3::new(4.8, -0.2, -0.2), Vec3::new(5.2, 0.2, 0.2));
        let q = Polyhedron::axis_box(Vec3::new(-0.2, 4.8, 3.8), Vec3::new(0.2, 5.2, 4.2));
        let l0 = PluckerLine::through(&Vec3::new(0.01, 0.02, 0.0), &Vec3::new(0.01, 0.0, 1.0));
        let r = pairwise_region(&p, &q, &l0).unwrap();
        assert!(r.vertices.is_empty());
    }

    #[test]
    fn nested_body_dominates() {
        let inner = tilted_cube(Vec3::new(0.2, 0.1, 0.0), 0.5, Vec3::new(1.0, 2.0, 0.3), 0.4);
        let outer = tilted_cube(Vec3::new(0.1, 0.0, 0.1), 2.0, Vec3::new(-0.3, 1.0, 0.7), 0.3);
        let r = pairwise_region(&outer, &inner, &pivot()).unwrap();
        let alone = Scene::new(vec![inner], pivot(), 0, SceneFlags::default()).unwrap();
        let direct = extremal_lines_through_line(&alone, Mode::Structured).unwrap();
        assert!(!direct.is_empty());
        assert_eq!(r.vertices.len(), direct.len());
        for (a, b) in r.vertices.iter().zip(&direct) {
            assert!(a.features.iter().all(|f| f.poly == 1));
            assert_eq!(a.features.iter().map(|f| f.kind).collect::<Vec<_>>(), b.features.iter().map(|f| f.kind).collect::<Vec<_>>());
        }
    }

    #[test]
    fn two_cubes_match_oracle() {
        let p = tilted_cube(Vec3::new(-1.5, 0.3, 0.0), 1.0, Vec3::new(1.0, 0.2, 0.4), 0.5);
        let q = tilted_cube(Vec3::new(1.6, -0.2, 0.4), 0.8, Vec3::new(0.3, 1.0, -0.2), 0.7);
        let r = pairwise_region(&p, &q, &pivot()).unwrap();
        let s = Scene::new(vec![p, q], pivot(), 0, SceneFlags::default()).unwrap();
        let oracle = brute_force_extremal_lines(&s).unwrap();
        assert!(!oracle.is_empty());
        let (extra, missing) = compare_sets(&r.vertices, &oracle, s.scale());
        assert!(extra.is_empty() && missing.is_empty(), "extra {extra:?} missing {missing:?}");
    }

    #[test]
    fn regulus_lines_are_tangent_at_both_edges() {
        let p = tilted_cube(Vec3::new(-1.5, 0.3, 0.0), 1.0, Vec3::new(1.0, 0.2, 0.4), 0.5);
        let q = tilted_cube(Vec3::new(1.6, -0.2, 0.4), 0.8, Vec3::new(0.3, 1.0, -0.2), 0.7);
        let s = Scene::new(vec![p, q], pivot(), 0, SceneFlags::default()).unwrap();
        let solids = s.solids();
        let mut total = 0;
        for e in 0..solids[0].edges.len() {
            let frame = edge_frame(&solids[0], 0, e, &s.pivot_frame()).unwrap();
            for r in reguli_for_edge((0, e), &s).unwrap() {
                total += 1;
                for i in 1..10 {
                    let t = r.theta.0 + (r.theta.1 - r.theta.0) * i as f64 / 10.0;
                    let l = r.line_at(&frame, &solids, t).unwrap();
                    assert!(tangent_at_edge(&l, &solids[0], e));
                    assert!(tangent_at_edge(&l, &solids[1], r.edge.1));
                    assert!(!matches!(contact(&l, &solids[1], s.scale()), Contact::Pierce(..)));
                }
            }
        }
        assert!(total > 0);
    }
}
