use std::f64::consts::PI;

use nalgebra::Matrix3;

use super::Pivot;
use crate::error::{Error, Result};
use crate::geometry::{side_operator, wrap_pi, PluckerLine, Polyhedron, Vec3, EPS};

/// Local frame of an edge `e₀` of `P₀`: the edge runs along the local
/// z-axis from `0` to `len`, and the local xz-plane contains the incident
/// facet `f1`, with `P₀` on the side `y ≥ 0`.
///
/// `Π_θ` denotes the plane through the local z-axis spanned by
/// `u(θ) = (cos θ, sin θ, 0)` and `ẑ`; points in it have coordinates
/// `(s, t)` meaning `s·u(θ) + t·ẑ`. The lines through `ℓ₀` tangent at `e₀`
/// are exactly the lines of `Π_θ`, `θ ∈ [0, θ₀]`, through
/// `c(θ) = ℓ₀ ∩ Π_θ` that cross the edge; such a line is written `(θ, φ)`
/// with local direction `sin φ·u(θ) + cos φ·ẑ`.
#[derive(Debug, Clone)]
pub struct EdgeFrame {
    pub poly: usize,
    pub edge: usize,
    /// Vertex ids of `P₀` at local `t = 0` and `t = len`.
    pub endpoints: [usize; 2],
    pub origin: Vec3,
    /// Rows are the local axes in world coordinates.
    pub rot: Matrix3<f64>,
    pub len: f64,
    pub theta0: f64,
    /// Orientation in `[0, π)` at which `Π_θ` is parallel to `ℓ₀`.
    pub theta_star: f64,
    pub pivot_point: Vec3,
    pub pivot_dir: Vec3,
}

/// A vertex of the section of a polyhedron by `Π_θ`, tagged with the edge
/// that produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlicePoint {
    pub s: f64,
    pub t: f64,
    pub edge: usize,
}

/// Builds the frame of edge `e0` of `p0` (index `poly` in the scene).
pub fn edge_frame(p0: &Polyhedron, poly: usize, e0: usize, pivot: &Pivot) -> Result<EdgeFrame> {
    let ed = p0.edges[e0];
    let (a, b) = p0.edge_points(e0);
    let len = (b - a).norm();
    let z = (b - a) / len;
    let edge_line = PluckerLine::through(&a, &z);
    let scale = p0.scale().max(1.0 + pivot.origin.norm());
    if side_operator(&edge_line, &pivot.line).abs() <= EPS * scale {
        return Err(Error::CoplanarEdge { poly, edge: e0 });
    }
    let n1 = p0.planes[ed.f1].normal;
    let n2 = p0.planes[ed.f2].normal;
    let x = z.cross(&n1);
    let y = -n1;
    let rot = Matrix3::from_rows(&[x.transpose(), y.transpose(), z.transpose()]);
    let dihedral = (-n1.dot(&n2)).clamp(-1.0, 1.0).acos();
    let pivot_point = rot * (pivot.origin - a);
    let pivot_dir = rot * pivot.u;
    Ok(EdgeFrame {
        poly,
        edge: e0,
        endpoints: [ed.a, ed.b],
        origin: a,
        rot,
        len,
        theta0: PI - dihedral,
        theta_star: wrap_pi(pivot_dir.y.atan2(pivot_dir.x)),
        pivot_point,
        pivot_dir,
    })
}

/// Open interval `(φ⁻, φ⁺)` of lines through `c(θ)` crossing the edge.
pub fn legal_domain(frame: &EdgeFrame, theta: f64) -> Result<(f64, f64)> {
    frame.domain(theta).map(|(lo, hi, _)| (lo, hi))
}

impl EdgeFrame {
    pub fn to_local(&self, x: &Vec3) -> Vec3 {
        self.rot * (x - self.origin)
    }

    pub fn to_world(&self, x: &Vec3) -> Vec3 {
        self.rot.transpose() * x + self.origin
    }

    pub fn dir_to_world(&self, d: &Vec3) -> Vec3 {
        self.rot.transpose() * d
    }

    fn normal(theta: f64) -> Vec3 {
        Vec3::new(-theta.sin(), theta.cos(), 0.0)
    }

    /// Plane coordinates of a local point lying in `Π_θ`.
    pub fn plane_coords(theta: f64, x: &Vec3) -> (f64, f64) {
        (x.x * theta.cos() + x.y * theta.sin(), x.z)
    }

    /// `c(θ) = ℓ₀ ∩ Π_θ` in plane coordinates.
    pub fn center(&self, theta: f64) -> Result<(f64, f64)> {
        let n = Self::normal(theta);
        let den = n.dot(&self.pivot_dir);
        if den.abs() < 1e-12 {
            return Err(Error::ParallelSlice);
        }
        let c = self.pivot_point - self.pivot_dir * (n.dot(&self.pivot_point) / den);
        Ok(Self::plane_coords(theta, &c))
    }

    /// Intercept of `c(θ)` on `ℓ₀`.
    pub fn center_intercept(&self, theta: f64, pivot: &Pivot) -> Result<f64> {
        let (s, t) = self.center(theta)?;
        let x = Vec3::new(s * theta.cos(), s * theta.sin(), t);
        Ok(pivot.intercept(&self.to_world(&x)))
    }

    /// Polar angle of the line through `c` and `x` (plane coordinates).
    pub fn phi_between(c: (f64, f64), x: (f64, f64)) -> f64 {
        let (mut ds, mut dt) = (x.0 - c.0, x.1 - c.1);
        if ds < 0.0 {
            ds = -ds;
            dt = -dt;
        }
        ds.atan2(dt)
    }

    /// `(φ⁻, φ⁺, which)` where `which[0]` (resp. `which[1]`) is the index
    /// into `endpoints` realizing `φ⁻` (resp. `φ⁺`).
    pub fn domain(&self, theta: f64) -> Result<(f64, f64, [usize; 2])> {
        let c = self.center(theta)?;
        let pa = Self::phi_between(c, (0.0, 0.0));
        let pb = Self::phi_between(c, (0.0, self.len));
        Ok(if pa <= pb { (pa, pb, [0, 1]) } else { (pb, pa, [1, 0]) })
    }

    /// Local position of vertex `v` of `P₀`'s edge endpoints (0 or 1).
    pub fn endpoint_local(&self, which: usize) -> Vec3 {
        Vec3::new(0.0, 0.0, if which == 0 { 0.0 } else { self.len })
    }

    /// Intersection of the supporting line of edge `e` of `p` with `Π_θ`.
    pub fn edge_point(&self, p: &Polyhedron, e: usize, theta: f64) -> Option<(f64, f64)> {
        let (a, b) = p.edge_points(e);
        let (a, b) = (self.to_local(&a), self.to_local(&b));
        let n = Self::normal(theta);
        let (da, db) = (n.dot(&a), n.dot(&b));
        if (da - db).abs() <= 1e-14 * (a - b).norm() {
            return None;
        }
        let x = a + (b - a) * (da / (da - db));
        Some(Self::plane_coords(theta, &x))
    }

    /// Section of `p` by the full plane `Π_θ`.
    pub fn slice(&self, p: &Polyhedron, theta: f64) -> Vec<SlicePoint> {
        let n = Self::normal(theta);
        let loc: Vec<Vec3> = p.vertices.iter().map(|v| self.to_local(v)).collect();
        let d: Vec<f64> = loc.iter().map(|x| n.dot(x)).collect();
        let mut out = Vec::new();
        for (i, e) in p.edges.iter().enumerate() {
            let (da, db) = (d[e.a], d[e.b]);
            if (da < 0.0 && db > 0.0) || (da > 0.0 && db < 0.0) {
                let x = loc[e.a] + (loc[e.b] - loc[e.a]) * (da / (da - db));
                let (s, t) = Self::plane_coords(theta, &x);
                out.push(SlicePoint { s, t, edge: i });
            } else if da == 0.0 || db == 0.0 {
                let x = if da == 0.0 { loc[e.a] } else { loc[e.b] };
                let (s, t) = Self::plane_coords(theta, &x);
                out.push(SlicePoint { s, t, edge: i });
            }
        }
        out
    }

    /// The world line `(θ, φ)`.
    pub fn line_at(&self, theta: f64, phi: f64) -> Result<PluckerLine> {
        let (s, t) = self.center(theta)?;
        let c = Vec3::new(s * theta.cos(), s * theta.sin(), t);
        let d = Vec3::new(phi.sin() * theta.cos(), phi.sin() * theta.sin(), phi.cos());
        Ok(PluckerLine::through(&self.to_world(&c), &self.dir_to_world(&d)))
    }

    /// `(θ, φ)` with `θ ∈ [0, π)` of a line meeting the edge's supporting
    /// line. The orientation of `l` is ignored.
    pub fn angles_of(&self, l: &PluckerLine) -> Option<(f64, f64)> {
        let d = self.rot * l.unit_direction();
        let h = d.x.hypot(d.y);
        if h <= 1e-12 {
            return None;
        }
        let mut th = d.y.atan2(d.x);
        let mut dz = d.z;
        if th < 0.0 {
            th += PI;
            dz = -dz;
        }
        if th >= PI {
            th -= PI;
            dz = -dz;
        }
        Some((th, dz.clamp(-1.0, 1.0).acos()))
    }

    /// Orientation of the plane through the local z-axis containing the
    /// local point `x`, in `[0, π)`.
    pub fn theta_of_point(&self, x_world: &Vec3) -> f64 {
        let x = self.to_local(x_world);
        wrap_pi(x.y.atan2(x.x))
    }
}
