//! Lines through the pivot: `(θ, φ, z)` coordinates, the tangency surfaces
//! σ⁻/σ⁺, per-edge frames with their legal domains and γ profiles, and the
//! patch domains of edge tangency.

mod frame;
mod gamma;
mod patch;

pub use frame::{edge_frame, legal_domain, EdgeFrame, SlicePoint};
pub use gamma::{gamma_interval, gamma_profile, GammaAt, GammaPiece, GammaProfile, Order, PieceKind};
pub use patch::{patch_domains, PatchBound, PatchDomain};

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::{any_orthogonal, PluckerLine, Polyhedron, Vec3, EPS, SNAP};

/// The pivot line `ℓ₀` with a fixed orthonormal frame: `origin` is its
/// point closest to the world origin, `u` its unit direction, and
/// `(ex, ey, u)` is right-handed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pivot {
    pub line: PluckerLine,
    pub origin: Vec3,
    pub u: Vec3,
    pub ex: Vec3,
    pub ey: Vec3,
}

impl Pivot {
    pub fn new(line: &PluckerLine) -> Pivot {
        let line = line.normalized();
        let u = line.direction;
        let ex = any_orthogonal(&u);
        let ey = u.cross(&ex);
        Pivot { line, origin: line.point(), u, ex, ey }
    }

    /// Point of `ℓ₀` at intercept `z`.
    pub fn at(&self, z: f64) -> Vec3 {
        self.origin + self.u * z
    }

    /// Intercept of the orthogonal projection of `x` on `ℓ₀`.
    pub fn intercept(&self, x: &Vec3) -> f64 {
        self.u.dot(&(x - self.origin))
    }

    /// Unit direction with azimuth `theta` and polar angle `phi`.
    pub fn direction(&self, theta: f64, phi: f64) -> Vec3 {
        (self.ex * theta.cos() + self.ey * theta.sin()) * phi.sin() + self.u * phi.cos()
    }

    /// `(θ, φ)` of a direction, `θ ∈ [0, 2π)`.
    pub fn angles(&self, d: &Vec3) -> (f64, f64) {
        let d = d.normalize();
        let theta = crate::geometry::wrap_2pi(d.dot(&self.ey).atan2(d.dot(&self.ex)));
        (theta, d.dot(&self.u).clamp(-1.0, 1.0).acos())
    }
}

/// A line through `ℓ₀`: azimuth `theta ∈ [0, 2π)`, polar angle
/// `phi ∈ (0, π)` measured from `ℓ₀`'s direction, and intercept `z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineCoords {
    pub theta: f64,
    pub phi: f64,
    pub z: f64,
}

impl LineCoords {
    /// The same unoriented line with the opposite orientation.
    pub fn reversed(&self) -> LineCoords {
        LineCoords {
            theta: crate::geometry::wrap_2pi(self.theta + PI),
            phi: PI - self.phi,
            z: self.z,
        }
    }
}

/// Coordinates of `l` relative to the pivot.
pub fn coords_of_line(l: &PluckerLine, pivot: &Pivot) -> Result<LineCoords> {
    let scale = 1.0 + pivot.origin.norm() + l.point().norm();
    let tol = SNAP * scale;
    let u = l.unit_direction();
    match pivot.line.closest_params(l) {
        None => {
            if pivot.line.distance(l) <= tol {
                Err(Error::IsPivot)
            } else {
                Err(Error::DoesNotMeetPivot)
            }
        }
        Some((s, t)) => {
            if (pivot.line.at(s) - l.at(t)).norm() > tol {
                return Err(Error::DoesNotMeetPivot);
            }
            if u.cross(&pivot.u).norm() <= EPS {
                return Err(Error::IsPivot);
            }
            let z = pivot.intercept(&pivot.line.at(s));
            let (theta, phi) = pivot.angles(&u);
            Ok(LineCoords { theta, phi, z })
        }
    }
}

pub fn line_from_coords(c: &LineCoords, pivot: &Pivot) -> PluckerLine {
    PluckerLine::through(&pivot.at(c.z), &pivot.direction(c.theta, c.phi))
}

/// Which tangency surface to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Lower,
    Upper,
}

/// Both tangent intercepts `(σ⁻, σ⁺)` for direction `d`, or `None` when
/// no line with that direction through `ℓ₀` meets `p`.
pub fn sigma_range(p: &Polyhedron, pivot: &Pivot, d: &Vec3) -> Option<(f64, f64)> {
    let d = d.normalize();
    let up = pivot.u - d * d.dot(&pivot.u);
    let sin = up.norm();
    if sin <= 1e-12 {
        return None;
    }
    let a = up / sin;
    let b = d.cross(&a);
    let pts: Vec<(f64, f64)> = p
        .vertices
        .iter()
        .map(|v| {
            let w = v - pivot.origin;
            (a.dot(&w), b.dot(&w))
        })
        .collect();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (i, &(ai, bi)) in pts.iter().enumerate() {
        if bi == 0.0 {
            lo = lo.min(ai);
            hi = hi.max(ai);
        }
        for &(aj, bj) in &pts[i + 1..] {
            if (bi < 0.0 && bj > 0.0) || (bi > 0.0 && bj < 0.0) {
                let x = ai + (aj - ai) * bi / (bi - bj);
                lo = lo.min(x);
                hi = hi.max(x);
            }
        }
    }
    (lo <= hi).then_some((lo / sin, hi / sin))
}

/// The intercept of the line with direction `(θ, φ)` through `ℓ₀` that is
/// tangent to `p` from below (`Lower`) or above (`Upper`).
pub fn sigma_eval(p: &Polyhedron, pivot: &Pivot, theta: f64, phi: f64, side: Side) -> Option<f64> {
    let r = sigma_range(p, pivot, &pivot.direction(theta, phi))?;
    Some(match side {
        Side::Lower => r.0,
        Side::Upper => r.1,
    })
}
