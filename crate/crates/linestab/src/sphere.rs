//! Great-circle arrangements on the sphere of directions, the order of two
//! separated bodies along a line, and the atomic intervals of the pivot.

use std::collections::HashMap;

use crate::error::{Diagnostic, Error, Result};
use crate::geometry::{any_orthogonal, separating_planes_line_body, Plane, Polyhedron, Vec3, EPS};
use crate::linespace::{Order, Pivot};

/// The directions parallel to a plane. `sources` lists the input planes
/// merged into this circle, each with the sign relating its normal to
/// `normal`.
#[derive(Debug, Clone, PartialEq)]
pub struct GreatCircle {
    pub normal: Vec3,
    pub sources: Vec<(usize, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    /// Sign of `d·normal` per circle for directions `d` in the cell.
    pub signs: Vec<i8>,
    /// A direction strictly inside the cell.
    pub sample: Vec3,
    /// Circles carrying an edge of the cell.
    pub boundary: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct SphericalCellComplex {
    pub circles: Vec<GreatCircle>,
    pub cells: Vec<Cell>,
    /// Pairs of cells sharing an edge.
    pub adjacency: Vec<(usize, usize)>,
    /// Distinct arrangement vertices with the circles through each.
    pub vertices: Vec<(Vec3, Vec<usize>)>,
    pub diagnostics: Vec<Diagnostic>,
    /// Input plane index to `(circle, sign)`.
    pub plane_circle: Vec<(usize, f64)>,
    index: HashMap<Vec<i8>, usize>,
}

const MERGE: f64 = 1e-9;

fn sign_vector(circles: &[GreatCircle], d: &Vec3, band: f64) -> Option<Vec<i8>> {
    circles
        .iter()
        .map(|c| {
            let s = c.normal.dot(d);
            if s > band {
                Some(1)
            } else if s < -band {
                Some(-1)
            } else {
                None
            }
        })
        .collect()
}

/// Builds the arrangement of the great circles parallel to the planes `hs`.
pub fn build_arrangement(hs: &[Plane]) -> SphericalCellComplex {
    let mut circles: Vec<GreatCircle> = Vec::new();
    let mut plane_circle = Vec::new();
    let mut diagnostics = Vec::new();
    for (i, h) in hs.iter().enumerate() {
        let n = h.normal.normalize();
        match circles.iter().position(|c| c.normal.cross(&n).norm() <= MERGE) {
            Some(k) => {
                let s = c_sign(&circles[k].normal, &n);
                circles[k].sources.push((i, s));
                plane_circle.push((k, s));
                diagnostics.push(Diagnostic::new(
                    "coincident_circles",
                    format!("plane {i} is parallel to plane {}", circles[k].sources[0].0),
                ));
            }
            None => {
                plane_circle.push((circles.len(), 1.0));
                circles.push(GreatCircle { normal: n, sources: vec![(i, 1.0)] });
            }
        }
    }
    let m = circles.len();
    let mut vertices: Vec<(Vec3, Vec<usize>)> = Vec::new();
    for i in 0..m {
        for j in i + 1..m {
            let v = circles[i].normal.cross(&circles[j].normal).normalize();
            for v in [v, -v] {
                match vertices.iter_mut().find(|(w, _)| (w - v).norm() <= 1e-9) {
                    Some((_, cs)) => {
                        for k in [i, j] {
                            if !cs.contains(&k) {
                                cs.push(k);
                            }
                        }
                    }
                    None => vertices.push((v, vec![i, j])),
                }
            }
        }
    }
    let mut samples: Vec<Vec3> = Vec::new();
    if m == 0 {
        samples.push(Vec3::z());
    } else if vertices.is_empty() {
        samples.push(circles[0].normal);
        samples.push(-circles[0].normal);
    }
    for (v, cs) in &vertices {
        let e1 = any_orthogonal(v);
        let e2 = v.cross(&e1);
        let mut angs: Vec<f64> = Vec::new();
        for &k in cs {
            let t = circles[k].normal.cross(v);
            let a = t.dot(&e2).atan2(t.dot(&e1));
            angs.push(a);
            angs.push(if a > 0.0 { a - std::f64::consts::PI } else { a + std::f64::consts::PI });
        }
        angs.sort_by(f64::total_cmp);
        let eta = 1e-4;
        for (k, &a) in angs.iter().enumerate() {
            let b = if k + 1 < angs.len() { angs[k + 1] } else { angs[0] + std::f64::consts::TAU };
            let mid = 0.5 * (a + b);
            samples.push((v + (e1 * mid.cos() + e2 * mid.sin()) * eta).normalize());
        }
    }
    let mut index: HashMap<Vec<i8>, usize> = HashMap::new();
    let mut cells: Vec<Cell> = Vec::new();
    for s in samples {
        let Some(sv) = sign_vector(&circles, &s, 1e-12) else { continue };
        if let std::collections::hash_map::Entry::Vacant(e) = index.entry(sv.clone()) {
            e.insert(cells.len());
            cells.push(Cell { signs: sv, sample: s, boundary: Vec::new() });
        }
    }
    let mut adjacency = Vec::new();
    for a in 0..cells.len() {
        for k in 0..m {
            let mut flipped = cells[a].signs.clone();
            flipped[k] = -flipped[k];
            if let Some(&b) = index.get(&flipped) {
                cells[a].boundary.push(k);
                if a < b {
                    adjacency.push((a, b));
                }
            }
        }
    }
    SphericalCellComplex { circles, cells, adjacency, vertices, diagnostics, plane_circle, index }
}

fn c_sign(a: &Vec3, b: &Vec3) -> f64 {
    if a.dot(b) >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

impl SphericalCellComplex {
    /// The cell containing direction `d`.
    pub fn locate(&self, d: &Vec3) -> Result<usize> {
        let d = d.normalize();
        let sv = sign_vector(&self.circles, &d, EPS).ok_or(Error::OnBoundary)?;
        self.index.get(&sv).copied().ok_or(Error::OnBoundary)
    }

    /// `(V, E, F)` of the induced graph; a circle without vertices counts
    /// one vertex and one edge, and the empty arrangement one vertex.
    pub fn euler_counts(&self) -> (usize, usize, usize) {
        let mut v = self.vertices.len();
        let mut e = 0;
        for k in 0..self.circles.len() {
            let on = self.vertices.iter().filter(|(_, cs)| cs.contains(&k)).count();
            if on == 0 {
                v += 1;
            }
            e += on.max(1);
        }
        if self.circles.is_empty() {
            v = 1;
        }
        (v, e, self.cells.len())
    }

    /// Sign of `d·n` for input plane `plane`, read off the cell.
    pub fn plane_sign(&self, cell: usize, plane: usize) -> f64 {
        let (c, s) = self.plane_circle[plane];
        self.cells[cell].signs[c] as f64 * s
    }
}

/// Which of two bodies separated by `h` (`P` on the negative side) a line
/// with direction `d` meets first.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HemisphereOrder {
    PFirst,
    QFirst,
}

pub fn hemisphere_order(h: &Plane, d: &Vec3) -> Result<HemisphereOrder> {
    let s = h.normal.dot(&d.normalize());
    if s > EPS {
        Ok(HemisphereOrder::PFirst)
    } else if s < -EPS {
        Ok(HemisphereOrder::QFirst)
    } else {
        Err(Error::ParallelDirection)
    }
}

/// The pivot cut at every entry and exit point of the bodies.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomicIntervals {
    /// Sorted intercepts; interval `i` is `(breaks[i-1], breaks[i])` with
    /// infinite ends.
    pub breaks: Vec<f64>,
    /// `masks[i][p]` is true when body `p` contains interval `i`.
    pub masks: Vec<Vec<bool>>,
}

impl AtomicIntervals {
    pub fn len(&self) -> usize {
        self.masks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masks.is_empty()
    }

    /// Index of the interval containing intercept `z`.
    pub fn interval_of(&self, z: f64) -> usize {
        self.breaks.partition_point(|&b| b < z)
    }

    /// `(lo, hi)` of interval `i`.
    pub fn bounds(&self, i: usize) -> (f64, f64) {
        let lo = if i == 0 { f64::NEG_INFINITY } else { self.breaks[i - 1] };
        let hi = self.breaks.get(i).copied().unwrap_or(f64::INFINITY);
        (lo, hi)
    }

    /// A point of interval `i`.
    pub fn midpoint(&self, i: usize) -> f64 {
        match self.bounds(i) {
            (lo, hi) if lo.is_finite() && hi.is_finite() => 0.5 * (lo + hi),
            (lo, _) if lo.is_finite() => lo + 1.0,
            (_, hi) if hi.is_finite() => hi - 1.0,
            _ => 0.0,
        }
    }
}

pub fn atomic_intervals(pivot: &Pivot, bodies: &[Polyhedron]) -> AtomicIntervals {
    let mut breaks = Vec::new();
    for p in bodies {
        if let Some((a, b)) = p.clip(&pivot.origin, &pivot.u, 0.0) {
            breaks.push(a);
            breaks.push(b);
        }
    }
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let mut out = AtomicIntervals { breaks, masks: Vec::new() };
    for i in 0..=out.breaks.len() {
        let x = pivot.at(out.midpoint(i));
        out.masks.push(bodies.iter().map(|p| p.contains_point(&x, 0.0)).collect());
    }
    out
}

/// Separating planes, atomic intervals and the arrangement they induce,
/// for one pivot and scene.
#[derive(Debug, Clone)]
pub struct PartitionContext {
    pub pivot: Pivot,
    /// Separating planes of each body (one or two).
    pub planes: Vec<Vec<Plane>>,
    /// Index of each body's first plane in the flattened plane list.
    pub plane_offset: Vec<usize>,
    pub intervals: AtomicIntervals,
    pub complex: SphericalCellComplex,
    /// Intercepts where the pivot enters and leaves each body.
    pub clips: Vec<Option<(f64, f64)>>,
}

impl PartitionContext {
    pub fn new(pivot: &Pivot, bodies: &[Polyhedron]) -> Result<PartitionContext> {
        let mut planes = Vec::new();
        let mut plane_offset = Vec::new();
        let mut flat = Vec::new();
        let mut clips = Vec::new();
        for (i, p) in bodies.iter().enumerate() {
            let hs = separating_planes_line_body(&pivot.line, p).map_err(|e| match e {
                Error::NotSeparable(_) => Error::NotSeparable(i),
                e => e,
            })?;
            plane_offset.push(flat.len());
            flat.extend(hs.iter().copied());
            planes.push(hs);
            clips.push(p.clip(&pivot.origin, &pivot.u, 0.0));
        }
        Ok(PartitionContext {
            pivot: *pivot,
            planes,
            plane_offset,
            intervals: atomic_intervals(pivot, bodies),
            complex: build_arrangement(&flat),
            clips,
        })
    }

    /// The plane separating body `p` from the component of the pivot
    /// holding interval `interval`, as a flat plane index.
    pub fn relevant_plane(&self, p: usize, interval: usize) -> Option<usize> {
        let off = self.plane_offset[p];
        match self.clips[p] {
            None => Some(off),
            Some((a, b)) => {
                let z = self.intervals.midpoint(interval);
                if z < a {
                    Some(off)
                } else if z > b {
                    Some(off + 1)
                } else {
                    None
                }
            }
        }
    }

    fn plane(&self, flat: usize) -> &Plane {
        let p = self.plane_offset.partition_point(|&o| o <= flat) - 1;
        &self.planes[p][flat - self.plane_offset[p]]
    }

    /// Order of every body along lines with direction in `cell` crossing
    /// the pivot in `interval`.
    pub fn classify_partition(&self, cell: usize, interval: usize) -> Vec<Order> {
        (0..self.planes.len())
            .map(|p| match self.relevant_plane(p, interval) {
                None => Order::Contains,
                Some(h) => {
                    if self.complex.plane_sign(cell, h) > 0.0 {
                        Order::Behind
                    } else {
                        Order::Ahead
                    }
                }
            })
            .collect()
    }

    /// Same as [`classify_partition`](Self::classify_partition) for a
    /// direction given directly; fails on the circles.
    pub fn classify_direction(&self, d: &Vec3, interval: usize) -> Result<Vec<Order>> {
        (0..self.planes.len())
            .map(|p| match self.relevant_plane(p, interval) {
                None => Ok(Order::Contains),
                Some(h) => {
                    let s = self.plane(h).normal.dot(&d.normalize());
                    if s > EPS {
                        Ok(Order::Behind)
                    } else if s < -EPS {
                        Ok(Order::Ahead)
                    } else {
                        Err(Error::OnLabelBoundary)
                    }
                }
            })
            .collect()
    }

    /// The bodies labelled `(P₀, P⁻, P⁺)`: containing the crossing point,
    /// met after it, met before it.
    pub fn partition_sets(orders: &[Order]) -> (Vec<usize>, Vec<usize>, Vec<usize>) {
        let pick = |o| (0..orders.len()).filter(|&i| orders[i] == o).collect::<Vec<_>>();
        (pick(Order::Contains), pick(Order::Ahead), pick(Order::Behind))
    }
}
