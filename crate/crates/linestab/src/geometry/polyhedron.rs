use std::collections::{BTreeMap, HashMap};

use super::{Plane, Vec3, EPS};
use crate::error::{Error, Result};

/// An edge `a -> b`. In facet `f1` the edge appears as `a -> b` in
/// counter-clockwise order (seen from outside); in `f2` it appears reversed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub f1: usize,
    pub f2: usize,
}

/// A bounded convex polyhedron with outward-oriented facets.
///
/// `unbounded_dir` marks a body that conceptually extends to infinity in that
/// direction; the stored mesh is then only its core.
#[derive(Debug, Clone)]
pub struct Polyhedron {
    pub vertices: Vec<Vec3>,
    pub facets: Vec<Vec<usize>>,
    pub planes: Vec<Plane>,
    pub edges: Vec<Edge>,
    pub unbounded_dir: Option<Vec3>,
    edge_of_facets: HashMap<(usize, usize), usize>,
}

fn newell_normal(pts: &[Vec3]) -> Vec3 {
    let mut n = Vec3::zeros();
    for i in 0..pts.len() {
        let p = pts[i];
        let q = pts[(i + 1) % pts.len()];
        n.x += (p.y - q.y) * (p.z + q.z);
        n.y += (p.z - q.z) * (p.x + q.x);
        n.z += (p.x - q.x) * (p.y + q.y);
    }
    n
}

impl Polyhedron {
    /// Builds and validates a polyhedron from vertices and counter-clockwise
    /// facet index lists. Fails with `ConvexityViolation(0)` on a reflex or
    /// non-planar configuration and `InvalidInput` on a broken mesh.
    pub fn new(
        vertices: Vec<Vec3>,
        facets: Vec<Vec<usize>>,
        unbounded_dir: Option<Vec3>,
    ) -> Result<Polyhedron> {
        if vertices.len() < 4 || facets.len() < 4 {
            return Err(Error::InvalidInput("a polyhedron needs 4 vertices and 4 facets".into()));
        }
        let scale = 1.0 + vertices.iter().map(|v| v.amax()).fold(0.0, f64::max);
        let tol = EPS * scale * 10.0;
        let mut planes = Vec::with_capacity(facets.len());
        for f in &facets {
            if f.len() < 3 || f.iter().any(|&i| i >= vertices.len()) {
                return Err(Error::InvalidInput("bad facet index list".into()));
            }
            let pts: Vec<Vec3> = f.iter().map(|&i| vertices[i]).collect();
            let n = newell_normal(&pts);
            if n.norm() <= tol * tol {
                return Err(Error::InvalidInput("degenerate facet".into()));
            }
            let c = pts.iter().sum::<Vec3>() / pts.len() as f64;
            let h = Plane::through(&c, n);
            if pts.iter().any(|p| h.signed_distance(p).abs() > tol) {
                return Err(Error::ConvexityViolation(0));
            }
            planes.push(h);
        }
        for h in &planes {
            if vertices.iter().any(|v| h.signed_distance(v) > tol) {
                return Err(Error::ConvexityViolation(0));
            }
        }
        let mut directed: HashMap<(usize, usize), usize> = HashMap::new();
        for (fi, f) in facets.iter().enumerate() {
            for k in 0..f.len() {
                let key = (f[k], f[(k + 1) % f.len()]);
                if directed.insert(key, fi).is_some() {
                    return Err(Error::InvalidInput("edge used twice in the same direction".into()));
                }
            }
        }
        let mut edges = Vec::new();
        let mut edge_of_facets = HashMap::new();
        let mut keys: Vec<_> = directed.keys().copied().collect();
        keys.sort_unstable();
        for (a, b) in keys {
            if a > b {
                continue;
            }
            let f_ab = directed[&(a, b)];
            let f_ba = *directed
                .get(&(b, a))
                .ok_or_else(|| Error::InvalidInput("edge with a single incident facet".into()))?;
            let idx = edges.len();
            edges.push(Edge { a, b, f1: f_ab, f2: f_ba });
            edge_of_facets.insert((f_ab.min(f_ba), f_ab.max(f_ba)), idx);
        }
        if directed.keys().any(|&(a, b)| !directed.contains_key(&(b, a))) {
            return Err(Error::InvalidInput("edge with a single incident facet".into()));
        }
        let unbounded_dir = unbounded_dir.map(|d| super::unit(&d));
        Ok(Polyhedron { vertices, facets, planes, edges, unbounded_dir, edge_of_facets })
    }

    /// Convex hull of a point set, with coplanar facets merged and points
    /// interior to facets or edges dropped.
    pub fn convex_hull(points: &[Vec3]) -> Result<Polyhedron> {
        let scale = 1.0 + points.iter().map(|v| v.amax()).fold(0.0, f64::max);
        let tol = EPS * scale;
        let mut pts: Vec<Vec3> = Vec::new();
        for p in points {
            if pts.iter().all(|q| (q - p).norm() > tol * 10.0) {
                pts.push(*p);
            }
        }
        let n = pts.len();
        let mut found: Vec<(Vec3, Vec<usize>)> = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                for k in j + 1..n {
                    if found.iter().any(|(_, s)| s.contains(&i) && s.contains(&j) && s.contains(&k)) {
                        continue;
                    }
                    let nrm = (pts[j] - pts[i]).cross(&(pts[k] - pts[i]));
                    if nrm.norm() <= tol * scale {
                        continue;
                    }
                    let nrm = nrm.normalize();
                    let ds: Vec<f64> = pts.iter().map(|p| nrm.dot(&(p - pts[i]))).collect();
                    let outward = if ds.iter().all(|&d| d <= tol) {
                        nrm
                    } else if ds.iter().all(|&d| d >= -tol) {
                        -nrm
                    } else {
                        continue;
                    };
                    let on: Vec<usize> = (0..n).filter(|&m| ds[m].abs() <= tol).collect();
                    found.push((outward, on));
                }
            }
        }
        if found.len() < 4 {
            return Err(Error::InvalidInput("point set is degenerate (flat)".into()));
        }
        let mut used: BTreeMap<usize, usize> = BTreeMap::new();
        let mut raw_facets = Vec::new();
        for (nrm, on) in &found {
            let ring = facet_ring(&pts, on, nrm, tol);
            if ring.len() < 3 {
                continue;
            }
            raw_facets.push(ring);
        }
        for f in &raw_facets {
            for &v in f {
                let next = used.len();
                used.entry(v).or_insert(next);
            }
        }
        let mut order: Vec<(usize, usize)> = used.iter().map(|(&old, &new)| (new, old)).collect();
        order.sort_unstable();
        let vertices: Vec<Vec3> = order.iter().map(|&(_, old)| pts[old]).collect();
        let facets: Vec<Vec<usize>> =
            raw_facets.iter().map(|f| f.iter().map(|v| used[v]).collect()).collect();
        Polyhedron::new(vertices, facets, None)
    }

    /// Axis-aligned box.
    pub fn axis_box(min: Vec3, max: Vec3) -> Polyhedron {
        let mut v = Vec::with_capacity(8);
        for i in 0..8 {
            v.push(Vec3::new(
                if i & 1 == 0 { min.x } else { max.x },
                if i & 2 == 0 { min.y } else { max.y },
                if i & 4 == 0 { min.z } else { max.z },
            ));
        }
        let facets = vec![
            vec![0, 4, 6, 2],
            vec![1, 3, 7, 5],
            vec![0, 1, 5, 4],
            vec![2, 6, 7, 3],
            vec![0, 2, 3, 1],
            vec![4, 5, 7, 6],
        ];
        Polyhedron::new(v, facets, None).expect("box is valid")
    }

    pub fn with_unbounded_dir(mut self, d: Option<Vec3>) -> Polyhedron {
        self.unbounded_dir = d.map(|d| super::unit(&d));
        self
    }

    /// Number of facets.
    pub fn n(&self) -> usize {
        self.facets.len()
    }

    /// Magnitude used to scale tolerances.
    pub fn scale(&self) -> f64 {
        1.0 + self.vertices.iter().map(|v| v.amax()).fold(0.0, f64::max)
    }

    pub fn diameter(&self) -> f64 {
        let (lo, hi) = self.bounds();
        (hi - lo).norm()
    }

    pub fn bounds(&self) -> (Vec3, Vec3) {
        let mut lo = Vec3::repeat(f64::INFINITY);
        let mut hi = Vec3::repeat(f64::NEG_INFINITY);
        for v in &self.vertices {
            lo = lo.inf(v);
            hi = hi.sup(v);
        }
        (lo, hi)
    }

    pub fn centroid(&self) -> Vec3 {
        self.vertices.iter().sum::<Vec3>() / self.vertices.len() as f64
    }

    /// Edge shared by two facets, if any.
    pub fn edge_between(&self, f: usize, g: usize) -> Option<usize> {
        self.edge_of_facets.get(&(f.min(g), f.max(g))).copied()
    }

    pub fn edge_points(&self, e: usize) -> (Vec3, Vec3) {
        let ed = &self.edges[e];
        (self.vertices[ed.a], self.vertices[ed.b])
    }

    /// Edges incident to vertex `v`.
    pub fn edges_at(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.edges.iter().enumerate().filter(move |(_, e)| e.a == v || e.b == v).map(|(i, _)| i)
    }

    /// Parameter interval of `p + t u` inside the polyhedron grown by `tol`
    /// (negative `tol` shrinks it). `None` when empty.
    pub fn clip(&self, p: &Vec3, u: &Vec3, tol: f64) -> Option<(f64, f64)> {
        let mut lo = f64::NEG_INFINITY;
        let mut hi = f64::INFINITY;
        for h in &self.planes {
            let a = h.normal.dot(u);
            let b = h.signed_distance(p) - tol;
            if a.abs() < 1e-15 {
                if b > 0.0 {
                    return None;
                }
                continue;
            }
            let t = -b / a;
            if a > 0.0 {
                hi = hi.min(t);
            } else {
                lo = lo.max(t);
            }
            if lo > hi {
                return None;
            }
        }
        Some((lo, hi))
    }

    pub fn contains_point(&self, x: &Vec3, tol: f64) -> bool {
        self.planes.iter().all(|h| h.signed_distance(x) <= tol)
    }

    pub fn translated(&self, t: &Vec3) -> Polyhedron {
        let mut p = self.clone();
        for v in &mut p.vertices {
            *v += t;
        }
        for h in &mut p.planes {
            h.offset += h.normal.dot(t);
        }
        p
    }

    /// Applies `x -> r x + t` with `r` a rotation.
    pub fn transformed(&self, r: &nalgebra::Rotation3<f64>, t: &Vec3) -> Polyhedron {
        let mut p = self.clone();
        for v in &mut p.vertices {
            *v = r * *v + t;
        }
        for (h, f) in p.planes.iter_mut().zip(&self.facets) {
            let n = r * h.normal;
            *h = Plane::through(&p.vertices[f[0]], n);
        }
        p.unbounded_dir = self.unbounded_dir.map(|d| r * d);
        p
    }

    /// The hull of the core and its translate by `length` along the
    /// unbounded direction: a finite stand-in for the unbounded body.
    pub fn extended(&self, length: f64) -> Polyhedron {
        match self.unbounded_dir {
            None => self.clone(),
            Some(u) => {
                let mut pts = self.vertices.clone();
                pts.extend(self.vertices.iter().map(|v| v + u * length));
                let mut p = Polyhedron::convex_hull(&pts).expect("prism of a valid core");
                p.unbounded_dir = Some(u);
                p
            }
        }
    }
}

/// Counter-clockwise (seen from `normal`) strict convex ring of the points
/// `on`, which lie on a common plane.
fn facet_ring(pts: &[Vec3], on: &[usize], normal: &Vec3, tol: f64) -> Vec<usize> {
    let e1 = super::any_orthogonal(normal);
    let e2 = normal.cross(&e1);
    let o = pts[on[0]];
    let mut p2: Vec<(f64, f64, usize)> =
        on.iter().map(|&i| ((pts[i] - o).dot(&e1), (pts[i] - o).dot(&e2), i)).collect();
    p2.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let cross = |o: &(f64, f64, usize), a: &(f64, f64, usize), b: &(f64, f64, usize)| {
        (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
    };
    let mut hull: Vec<(f64, f64, usize)> = Vec::new();
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &(f64, f64, usize)>> =
            if pass == 0 { Box::new(p2.iter()) } else { Box::new(p2.iter().rev()) };
        for p in iter {
            while hull.len() >= start + 2 {
                let a = hull[hull.len() - 2];
                let b = hull[hull.len() - 1];
                let len = ((b.0 - a.0).hypot(b.1 - a.1)).max((p.0 - a.0).hypot(p.1 - a.1));
                if cross(&a, &b, p) <= tol * len.max(1.0) {
                    hull.pop();
                } else {
                    break;
                }
            }
            hull.push(*p);
        }
        hull.pop();
    }
    hull.into_iter().map(|p| p.2).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cube() -> Polyhedron {
        Polyhedron::axis_box(Vec3::repeat(-1.0), Vec3::repeat(1.0))
    }

    #[test]
    fn box_topology() {
        let c = cube();
        assert_eq!(c.n(), 6);
        assert_eq!(c.edges.len(), 12);
        for h in &c.planes {
            assert!(c.vertices.iter().all(|v| h.signed_distance(v) <= 1e-12));
        }
        for e in &c.edges {
            let f1 = &c.facets[e.f1];
            let k = f1.iter().position(|&v| v == e.a).unwrap();
            assert_eq!(f1[(k + 1) % f1.len()], e.b);
        }
    }

    #[test]
    fn hull_of_cube_points_merges_coplanar() {
        let mut pts = cube().vertices.clone();
        pts.push(Vec3::zeros());
        pts.push(Vec3::new(1.0, 0.0, 0.0));
        pts.push(Vec3::new(1.0, 1.0, 0.0));
        let h = Polyhedron::convex_hull(&pts).unwrap();
        assert_eq!(h.vertices.len(), 8);
        assert_eq!(h.n(), 6);
        assert_eq!(h.edges.len(), 12);
    }

    #[test]
    fn hull_of_tetrahedron() {
        let pts = [Vec3::zeros(), Vec3::x(), Vec3::y(), Vec3::z()];
        let h = Polyhedron::convex_hull(&pts).unwrap();
        assert_eq!((h.vertices.len(), h.n(), h.edges.len()), (4, 4, 6));
        assert!(h.contains_point(&Vec3::repeat(0.1), 0.0));
        assert!(!h.contains_point(&Vec3::repeat(0.5), 0.0));
    }

    #[test]
    fn reflex_vertex_rejected() {
        let mut c = cube();
        c.vertices[7] = Vec3::repeat(0.5);
        let r = Polyhedron::new(c.vertices.clone(), c.facets.clone(), None);
        assert!(matches!(r, Err(Error::ConvexityViolation(_))));
    }

    #[test]
    fn clip_through_center() {
        let c = cube();
        let (a, b) = c.clip(&Vec3::zeros(), &Vec3::z(), 0.0).unwrap();
        assert_eq!((a, b), (-1.0, 1.0));
        assert!(c.clip(&Vec3::new(5.0, 0.0, 0.0), &Vec3::z(), 0.0).is_none());
    }

    #[test]
    fn extension_is_long_prism() {
        let c = cube().with_unbounded_dir(Some(Vec3::z()));
        let e = c.extended(100.0);
        assert_eq!(e.n(), 6);
        assert!(e.contains_point(&Vec3::new(0.0, 0.0, 90.0), 0.0));
    }

    #[test]
    fn edge_between_facets() {
        let c = cube();
        for (i, e) in c.edges.iter().enumerate() {
            assert_eq!(c.edge_between(e.f1, e.f2), Some(i));
        }
        assert_eq!(c.edge_between(0, 1), None);
    }
}
