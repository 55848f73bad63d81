use minilp::{ComparisonOp, OptimizationDirection, Problem};

use super::{any_orthogonal, Plane, PluckerLine, Polyhedron, Vec3, EPS};
use crate::error::{Error, Result};

/// One plane per connected component of `l0 \ P`, each with `P` on its
/// closed negative side and the component on the open positive side.
///
/// When `l0` misses `P` the single plane is parallel to `l0` and halfway
/// between them; when `l0` crosses `P` the planes are the facet planes
/// through the entry and exit points.
pub fn separating_planes_line_body(l0: &PluckerLine, p: &Polyhedron) -> Result<Vec<Plane>> {
    let o = l0.point();
    let u = l0.unit_direction();
    let scale = p.scale().max(1.0 + o.amax());
    let tol = EPS * scale;
    if p.clip(&o, &u, tol).is_none() {
        let e1 = any_orthogonal(&u);
        let e2 = u.cross(&e1);
        let pts: Vec<(f64, f64)> =
            p.vertices.iter().map(|v| ((v - o).dot(&e1), (v - o).dot(&e2))).collect();
        let c = closest_on_hull(&pts);
        let dist = c.0.hypot(c.1);
        if dist <= tol {
            return Err(Error::NotSeparable(0));
        }
        let c3 = e1 * c.0 + e2 * c.1;
        let n = -c3 / dist;
        return Ok(vec![Plane::through(&(o + c3 * 0.5), n)]);
    }
    if p.clip(&o, &u, -tol).is_none() {
        return Err(Error::NotSeparable(0));
    }
    let mut entry = (f64::NEG_INFINITY, usize::MAX);
    let mut exit = (f64::INFINITY, usize::MAX);
    for (i, h) in p.planes.iter().enumerate() {
        let a = h.normal.dot(&u);
        if a.abs() < 1e-15 {
            continue;
        }
        let t = -h.signed_distance(&o) / a;
        if a < 0.0 && t > entry.0 {
            entry = (t, i);
        } else if a > 0.0 && t < exit.0 {
            exit = (t, i);
        }
    }
    Ok(vec![p.planes[entry.1], p.planes[exit.1]])
}

/// Closest point to the origin of the convex hull of 2D points (the origin
/// is assumed outside).
fn closest_on_hull(pts: &[(f64, f64)]) -> (f64, f64) {
    let mut best = pts[0];
    let mut bd = f64::INFINITY;
    for (i, a) in pts.iter().enumerate() {
        let d = a.0.hypot(a.1);
        if d < bd {
            bd = d;
            best = *a;
        }
        for b in &pts[i + 1..] {
            let (dx, dy) = (b.0 - a.0, b.1 - a.1);
            let l2 = dx * dx + dy * dy;
            if l2 == 0.0 {
                continue;
            }
            let t = (-(a.0 * dx + a.1 * dy) / l2).clamp(0.0, 1.0);
            let c = (a.0 + t * dx, a.1 + t * dy);
            let d = c.0.hypot(c.1);
            if d < bd {
                // Only segments whose supporting line leaves every point on
                // one side are hull edges.
                let side = |p: &(f64, f64)| dx * (p.1 - a.1) - dy * (p.0 - a.0);
                let s: Vec<f64> = pts.iter().map(side).collect();
                let eps = 1e-12 * l2.sqrt() * (1.0 + bd);
                if s.iter().all(|&v| v <= eps) || s.iter().all(|&v| v >= -eps) {
                    bd = d;
                    best = c;
                }
            }
        }
    }
    best
}

/// A plane with every vertex of `p` strictly on its negative side and every
/// vertex of `q` strictly on its positive side, chosen by maximizing the
/// margin under a box-normalized normal.
pub fn separating_plane_bodies(p: &Polyhedron, q: &Polyhedron) -> Result<Plane> {
    let c = (p.centroid() + q.centroid()) * 0.5;
    let s = p
        .vertices
        .iter()
        .chain(&q.vertices)
        .map(|v| (v - c).norm())
        .fold(1e-300, f64::max);
    let mut lp = Problem::new(OptimizationDirection::Maximize);
    let n: Vec<_> = (0..3).map(|_| lp.add_var(0.0, (-1.0, 1.0))).collect();
    let b = lp.add_var(0.0, (f64::NEG_INFINITY, f64::INFINITY));
    let t = lp.add_var(1.0, (f64::NEG_INFINITY, 1.0));
    for (verts, sign) in [(&p.vertices, 1.0), (&q.vertices, -1.0)] {
        for v in verts.iter() {
            let x = (v - c) / s;
            let expr = [
                (n[0], sign * x.x),
                (n[1], sign * x.y),
                (n[2], sign * x.z),
                (b, -sign),
                (t, 1.0),
            ];
            lp.add_constraint(&expr[..], ComparisonOp::Le, 0.0);
        }
    }
    let sol = lp.solve().map_err(|_| Error::Overlapping)?;
    if sol.objective() <= 1e-9 {
        return Err(Error::Overlapping);
    }
    let nv = Vec3::new(sol[n[0]], sol[n[1]], sol[n[2]]);
    let h = Plane::new(nv, sol[b] * s + nv.dot(&c));
    let ok = p.vertices.iter().all(|v| h.signed_distance(v) < 0.0)
        && q.vertices.iter().all(|v| h.signed_distance(v) > 0.0);
    if !ok {
        return Err(Error::Overlapping);
    }
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn boxed(lo: [f64; 3], hi: [f64; 3]) -> Polyhedron {
        Polyhedron::axis_box(Vec3::from(lo), Vec3::from(hi))
    }

    #[test]
    fn disjoint_line_gets_parallel_plane() {
        let z = PluckerLine::through(&Vec3::zeros(), &Vec3::z());
        let p = boxed([1.0, -1.0, -1.0], [3.0, 1.0, 1.0]);
        let hs = separating_planes_line_body(&z, &p).unwrap();
        assert_eq!(hs.len(), 1);
        let h = hs[0];
        assert_abs_diff_eq!(h.normal, -Vec3::x(), epsilon = 1e-12);
        assert_abs_diff_eq!(h.offset, -0.5, epsilon = 1e-12);
        assert!(p.vertices.iter().all(|v| h.signed_distance(v) < 0.0));
        assert!(h.signed_distance(&Vec3::new(0.0, 0.0, 7.0)) > 0.0);
    }

    #[test]
    fn crossing_line_gets_two_facet_planes() {
        let z = PluckerLine::through(&Vec3::zeros(), &Vec3::z());
        let p = boxed([-1.0; 3], [1.0; 3]);
        let hs = separating_planes_line_body(&z, &p).unwrap();
        assert_eq!(hs.len(), 2);
        assert_abs_diff_eq!(hs[0].normal, -Vec3::z(), epsilon = 1e-12);
        assert_abs_diff_eq!(hs[1].normal, Vec3::z(), epsilon = 1e-12);
    }

    #[test]
    fn touching_line_not_separable() {
        let l = PluckerLine::through(&Vec3::new(1.0, 1.0, 0.0), &Vec3::z());
        let p = boxed([-1.0; 3], [1.0; 3]);
        assert_eq!(separating_planes_line_body(&l, &p), Err(Error::NotSeparable(0)));
    }

    #[test]
    fn symmetric_cubes() {
        let p = boxed([-4.0, -1.0, -1.0], [-2.0, 1.0, 1.0]);
        let q = boxed([2.0, -1.0, -1.0], [4.0, 1.0, 1.0]);
        let h = separating_plane_bodies(&p, &q).unwrap();
        assert_abs_diff_eq!(h.normal, Vec3::x(), epsilon = 1e-9);
        assert_abs_diff_eq!(h.offset, 0.0, epsilon = 1e-9);
    }

    #[test]
    fn overlapping_cubes() {
        let p = boxed([-1.0; 3], [1.0; 3]);
        let q = boxed([0.5; 3], [2.0; 3]);
        assert_eq!(separating_plane_bodies(&p, &q), Err(Error::Overlapping));
    }
}
