//! Primitives: planes, Plücker lines, convex polyhedra, the predicates that
//! relate them, and the solver for common transversals of four lines.

mod contact;
mod four_lines;
mod line;
mod polyhedron;
mod separate;

pub use contact::{contact, stabs, stabs_tol, tangent_at_edge, Contact, Feature, FeatureKind};
pub use four_lines::transversals_to_four_lines;
pub use line::{plucker_from_points, side_operator, PluckerLine};
pub use polyhedron::{Edge, Polyhedron};
pub use separate::{separating_plane_bodies, separating_planes_line_body};

use nalgebra::Vector3;

pub type Vec3 = Vector3<f64>;

/// Global relative tolerance. Predicates multiply it by a scene scale.
pub const EPS: f64 = 1e-9;

/// Distance below which contact points snap to a vertex or edge, relative to
/// the scene scale. Several orders above `EPS` so that solver round-off never
/// decides a classification.
pub const SNAP: f64 = 1e-7;

/// An oriented plane `normal · x = offset` with unit normal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Plane {
    pub normal: Vec3,
    pub offset: f64,
}

impl Plane {
    /// Normalizes `normal`; panics on a zero vector.
    pub fn new(normal: Vec3, offset: f64) -> Plane {
        let len = normal.norm();
        assert!(len > 0.0, "plane normal must be nonzero");
        Plane { normal: normal / len, offset: offset / len }
    }

    pub fn through(point: &Vec3, normal: Vec3) -> Plane {
        let n = normal.normalize();
        Plane { normal: n, offset: n.dot(point) }
    }

    pub fn signed_distance(&self, x: &Vec3) -> f64 {
        self.normal.dot(x) - self.offset
    }

    pub fn flipped(&self) -> Plane {
        Plane { normal: -self.normal, offset: -self.offset }
    }

    /// Parameter `t` at which `p + t d` meets the plane, if not parallel.
    pub fn intersect_param(&self, p: &Vec3, d: &Vec3) -> Option<f64> {
        let a = self.normal.dot(d);
        if a.abs() < 1e-14 * d.norm() {
            return None;
        }
        Some(-self.signed_distance(p) / a)
    }
}

/// Some unit vector orthogonal to `v` (which need not be unit).
pub fn any_orthogonal(v: &Vec3) -> Vec3 {
    let a = v.abs();
    let axis = if a.x <= a.y && a.x <= a.z {
        Vec3::x()
    } else if a.y <= a.z {
        Vec3::y()
    } else {
        Vec3::z()
    };
    (axis - v * (v.dot(&axis) / v.norm_squared())).normalize()
}

/// `v / |v|`, returning `v` untouched when it is already unit to within
/// rounding so that repeated normalization is stable bit for bit.
pub fn unit(v: &Vec3) -> Vec3 {
    let n = v.norm();
    if (n - 1.0).abs() <= 4.0 * f64::EPSILON {
        *v
    } else {
        v / n
    }
}

pub(crate) fn wrap_2pi(a: f64) -> f64 {
    let t = std::f64::consts::TAU;
    let r = a.rem_euclid(t);
    if r >= t {
        0.0
    } else {
        r
    }
}

pub(crate) fn wrap_pi(a: f64) -> f64 {
    let p = std::f64::consts::PI;
    let r = a.rem_euclid(p);
    if r >= p {
        0.0
    } else {
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plane_distance_sign() {
        let h = Plane::new(Vec3::new(2.0, 0.0, 0.0), 2.0);
        assert_eq!(h.offset, 1.0);
        assert!(h.signed_distance(&Vec3::new(3.0, 0.0, 0.0)) > 0.0);
        assert!(h.flipped().signed_distance(&Vec3::new(3.0, 0.0, 0.0)) < 0.0);
    }

    #[test]
    fn orthogonal_is_orthogonal() {
        for v in [Vec3::x(), Vec3::new(1.0, 2.0, 3.0), Vec3::new(0.0, 0.0, -5.0)] {
            let o = any_orthogonal(&v);
            assert!(o.dot(&v).abs() < 1e-12);
            assert!((o.norm() - 1.0).abs() < 1e-12);
        }
    }
}
