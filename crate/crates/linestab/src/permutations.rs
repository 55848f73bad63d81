//! Orders in which transversals through the pivot meet the bodies, and the
//! wedge/interval labels that determine them.
//!
//! For each body `C` a plane `h_C` through the pivot avoids `C`; the
//! half-planes of these planes cut space around the pivot into wedges. For
//! each pair `C, C'` a separating plane `h_{C,C'}` meets the pivot at
//! `z_{C,C'}`; these points cut the pivot into intervals. A transversal
//! through the pivot is labelled by the wedge of its forward direction and
//! the interval of its intercept, and equal labels give equal orders.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::engine::{extremal_lines_through_line, plane_through_pivot_avoiding, Mode};
use crate::error::{Diagnostic, Error, Result};
use crate::geometry::{separating_plane_bodies, wrap_2pi, Plane, PluckerLine, Polyhedron, SNAP};
use crate::linespace::{coords_of_line, line_from_coords, sigma_eval, LineCoords, Pivot, Side};
use crate::scenes::Scene;

/// Bodies in the order an oriented line meets them. `pivot_position` is
/// the number of bodies met before the line crosses the pivot, `None` when
/// it does not cross it.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct GeometricPermutation {
    pub order: Vec<usize>,
    pub pivot_position: Option<usize>,
}

impl GeometricPermutation {
    /// The permutation of the oppositely oriented line.
    pub fn reversed(&self) -> GeometricPermutation {
        let n = self.order.len();
        GeometricPermutation {
            order: self.order.iter().rev().copied().collect(),
            pivot_position: self.pivot_position.map(|p| n - p),
        }
    }

    /// The smaller of `self` and its reversal, so that both orientations
    /// of one line give the same value.
    pub fn canonical(&self) -> GeometricPermutation {
        let r = self.reversed();
        if r < *self {
            r
        } else {
            self.clone()
        }
    }
}

/// The order in which `l` meets the bodies of `scene`.
pub fn permutation_of(l: &PluckerLine, scene: &Scene) -> Result<GeometricPermutation> {
    let solids = scene.solids();
    let tol = SNAP * scene.scale();
    let (p, u) = (l.point(), l.unit_direction());
    let mut spans: Vec<(f64, f64, usize)> = Vec::with_capacity(solids.len());
    for (i, body) in solids.iter().enumerate() {
        let (a, b) = body.clip(&p, &u, tol).ok_or(Error::NotTransversal)?;
        spans.push((a, b, i));
    }
    spans.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.2.cmp(&y.2)));
    // Overlap beyond twice the grown margin means the bodies intersect.
    if spans.windows(2).any(|w| w[1].0 < w[0].1 - 4.0 * tol) {
        return Err(Error::NotDisjoint);
    }
    let pivot = scene.pivot_frame();
    let pivot_position = match pivot.line.closest_params(l) {
        Some((s, t)) if (pivot.line.at(s) - l.at(t)).norm() <= tol => {
            let t = l.param_of(&pivot.line.at(s));
            Some(spans.iter().filter(|x| 0.5 * (x.0 + x.1) < t).count())
        }
        _ => None,
    };
    Ok(GeometricPermutation { order: spans.into_iter().map(|x| x.2).collect(), pivot_position })
}

/// Wedge of the forward direction and interval of the intercept.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct WedgeIntervalLabel {
    pub wedge: usize,
    pub interval: usize,
}

/// The planes `h_C`, `h_{C,C'}` of a scene and the cuts they induce.
#[derive(Debug, Clone)]
pub struct Labeler {
    pivot: Pivot,
    /// `h_C` per body, containing the pivot.
    pub body_planes: Vec<Plane>,
    /// `h_{C,C'}` per pair `C < C'`, not parallel to the pivot.
    pub pair_planes: Vec<((usize, usize), Plane)>,
    /// Sorted azimuths of the wedge boundaries in `[0, 2π)`.
    pub wedge_angles: Vec<f64>,
    /// Sorted intercepts `z_{C,C'}`.
    pub intercepts: Vec<f64>,
    pub diagnostics: Vec<Diagnostic>,
    z_tol: f64,
}

/// Slope towards the pivot direction tried when a separating plane is
/// parallel to the pivot or collides with another.
const TILTS: [f64; 6] = [1e-2, -1e-2, 3e-2, -3e-2, 1e-1, -1e-1];

/// A plane still separating `p` (negative side) from `q` after tilting
/// the normal of `h` by `t` towards `u` about its point nearest to `c`.
fn tilted(h: &Plane, u: &crate::geometry::Vec3, t: f64, c: &crate::geometry::Vec3, p: &Polyhedron, q: &Polyhedron) -> Option<Plane> {
    let x = c - h.normal * h.signed_distance(c);
    let g = Plane::through(&x, h.normal + u * t);
    let ok = p.vertices.iter().all(|v| g.signed_distance(v) < 0.0) && q.vertices.iter().all(|v| g.signed_distance(v) > 0.0);
    ok.then_some(g)
}

impl Labeler {
    pub fn new(scene: &Scene) -> Result<Labeler> {
        let pivot = scene.pivot_frame();
        let solids = scene.solids();
        let angle_tol = 1e-9;
        let z_tol = 1e-9 * scene.scale();
        let mut diagnostics = Vec::new();
        let body_planes: Vec<Plane> =
            solids.iter().map(|p| plane_through_pivot_avoiding(&pivot, p)).collect::<Result<_>>()?;
        let mut wedge_angles: Vec<f64> = Vec::new();
        for h in &body_planes {
            let w = pivot.u.cross(&h.normal);
            let a = wrap_2pi(w.dot(&pivot.ey).atan2(w.dot(&pivot.ex)));
            wedge_angles.extend([a, wrap_2pi(a + PI)]);
        }
        wedge_angles.sort_by(f64::total_cmp);
        wedge_angles.dedup_by(|a, b| (*a - *b).abs() <= angle_tol);
        let mut pair_planes = Vec::new();
        let mut intercepts: Vec<f64> = Vec::new();
        for i in 0..solids.len() {
            for j in i + 1..solids.len() {
                let (p, q) = (&solids[i], &solids[j]);
                let h = separating_plane_bodies(p, q).map_err(|_| Error::NotDisjoint)?;
                let c = (p.centroid() + q.centroid()) * 0.5;
                let usable = |g: &Plane| {
                    g.normal.dot(&pivot.u).abs() > 1e-9
                        && pivot.line.meet_plane(g).is_some_and(|x| {
                            let z = pivot.intercept(&x);
                            intercepts.iter().all(|y| (z - y).abs() > z_tol)
                        })
                };
                let chosen = if usable(&h) {
                    Some(h)
                } else {
                    diagnostics.push(Diagnostic::new(
                        "separating_plane_tilted",
                        format!("pair ({i}, {j}): plane parallel to the pivot or intercept collision"),
                    ));
                    TILTS.iter().filter_map(|&t| tilted(&h, &pivot.u, t, &c, p, q)).find(|g| usable(g))
                };
                match chosen.and_then(|g| pivot.line.meet_plane(&g).map(|x| (g, pivot.intercept(&x)))) {
                    Some((g, z)) => {
                        pair_planes.push(((i, j), g));
                        intercepts.push(z);
                    }
                    None => diagnostics.push(Diagnostic::new(
                        "separating_plane_unresolved",
                        format!("pair ({i}, {j}): no usable plane; pair left without intercept"),
                    )),
                }
            }
        }
        intercepts.sort_by(f64::total_cmp);
        Ok(Labeler { pivot, body_planes, pair_planes, wedge_angles, intercepts, diagnostics, z_tol })
    }

    pub fn wedge_count(&self) -> usize {
        self.wedge_angles.len().max(1)
    }

    pub fn interval_count(&self) -> usize {
        self.intercepts.len() + 1
    }

    pub fn label_count(&self) -> usize {
        self.wedge_count() * self.interval_count()
    }

    /// Label of an oriented line through the pivot.
    pub fn label_of(&self, l: &PluckerLine) -> Result<WedgeIntervalLabel> {
        let c = coords_of_line(l, &self.pivot)?;
        self.label_of_coords(&c)
    }

    pub fn label_of_coords(&self, c: &LineCoords) -> Result<WedgeIntervalLabel> {
        let near_angle = self.wedge_angles.iter().any(|a| {
            let d = (c.theta - a).rem_euclid(2.0 * PI);
            d.min(2.0 * PI - d) <= 1e-9
        });
        if near_angle || self.intercepts.iter().any(|z| (c.z - z).abs() <= self.z_tol) {
            return Err(Error::OnLabelBoundary);
        }
        let n = self.wedge_angles.len();
        let wedge = if n == 0 { 0 } else { self.wedge_angles.iter().filter(|&&a| a < c.theta).count() % n };
        let interval = self.intercepts.iter().filter(|&&z| z < c.z).count();
        Ok(WedgeIntervalLabel { wedge, interval })
    }
}

/// Label of `l` under the planes of `scene`.
pub fn label_of(l: &PluckerLine, scene: &Scene) -> Result<WedgeIntervalLabel> {
    Labeler::new(scene)?.label_of(l)
}

/// The label bound `2m·(C(m, 2) + 1)` for `m` bodies besides the pivot.
pub fn label_bound(m: usize) -> usize {
    (2 * m).max(1) * (m * m.saturating_sub(1) / 2 + 1)
}

fn z_range(solids: &[Polyhedron], pivot: &Pivot, theta: f64, phi: f64) -> Option<(f64, f64)> {
    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    for p in solids {
        lo = lo.max(sigma_eval(p, pivot, theta, phi, Side::Lower)?);
        hi = hi.min(sigma_eval(p, pivot, theta, phi, Side::Upper)?);
    }
    (lo < hi).then_some((lo, hi))
}

/// Random transversals through the pivot: uniform directions, intercept
/// uniform in the stabbing interval. Returns fewer than `count` when
/// transversals are rare.
pub fn sample_transversals(scene: &Scene, count: usize, seed: u64) -> Vec<LineCoords> {
    let pivot = scene.pivot_frame();
    let solids = scene.solids();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count.saturating_mul(50) {
        if out.len() == count {
            break;
        }
        let theta = rng.gen_range(0.0..2.0 * PI);
        let phi = rng.gen_range(-1.0f64..1.0).acos();
        if let Some((lo, hi)) = z_range(&solids, &pivot, theta, phi) {
            out.push(LineCoords { theta, phi, z: rng.gen_range(lo..hi) });
        }
    }
    out
}

/// Outcome of comparing labels with permutations on sampled transversals.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LabelCheck {
    pub samples: usize,
    /// Samples on a label boundary, skipped.
    pub on_boundary: usize,
    pub labels_realized: usize,
    pub label_count: usize,
    pub permutations: usize,
    /// Labels carried by transversals with different permutations.
    pub conflicts: usize,
}

/// Samples `count` transversals and checks that equal labels give equal
/// permutations.
pub fn check_labels(scene: &Scene, count: usize, seed: u64) -> Result<LabelCheck> {
    let labeler = Labeler::new(scene)?;
    let pivot = scene.pivot_frame();
    let samples = sample_transversals(scene, count, seed);
    let mut by_label: BTreeMap<WedgeIntervalLabel, BTreeSet<GeometricPermutation>> = BTreeMap::new();
    let mut perms = BTreeSet::new();
    let mut on_boundary = 0;
    for c in &samples {
        let l = line_from_coords(c, &pivot);
        let perm = permutation_of(&l, scene)?;
        perms.insert(perm.canonical());
        match labeler.label_of_coords(c) {
            Ok(label) => {
                by_label.entry(label).or_default().insert(perm);
            }
            Err(Error::OnLabelBoundary) => on_boundary += 1,
            Err(e) => return Err(e),
        }
    }
    Ok(LabelCheck {
        samples: samples.len(),
        on_boundary,
        labels_realized: by_label.len(),
        label_count: labeler.label_count(),
        permutations: perms.len(),
        conflicts: by_label.values().filter(|s| s.len() > 1).count(),
    })
}

/// Distinct permutations (up to orientation) of the transversals through
/// the pivot: one representative per realized label found on a direction
/// grid, plus every extremal line of the region.
pub fn enumerate_permutations(scene: &Scene) -> Result<Vec<GeometricPermutation>> {
    const GRID: usize = 96;
    let labeler = Labeler::new(scene)?;
    let pivot = scene.pivot_frame();
    let solids = scene.solids();
    let mut reps: BTreeMap<WedgeIntervalLabel, GeometricPermutation> = BTreeMap::new();
    let mut out = BTreeSet::new();
    for i in 0..2 * GRID {
        for j in 0..GRID {
            let theta = PI * (i as f64 + 0.5) / GRID as f64;
            let phi = PI * (j as f64 + 0.5) / GRID as f64;
            let Some((lo, hi)) = z_range(&solids, &pivot, theta, phi) else {
                continue;
            };
            let mut cuts = vec![lo, hi];
            cuts.extend(labeler.intercepts.iter().copied().filter(|z| lo < *z && *z < hi));
            cuts.sort_by(f64::total_cmp);
            for w in cuts.windows(2) {
                let c = LineCoords { theta, phi, z: 0.5 * (w[0] + w[1]) };
                let Ok(label) = labeler.label_of_coords(&c) else {
                    continue;
                };
                if !reps.contains_key(&label) {
                    reps.insert(label, permutation_of(&line_from_coords(&c, &pivot), scene)?);
                }
            }
        }
    }
    out.extend(reps.values().map(|p| p.canonical()));
    for v in extremal_lines_through_line(scene, Mode::Structured)? {
        out.insert(permutation_of(&v.line, scene)?.canonical());
    }
    Ok(out.into_iter().collect())
}
