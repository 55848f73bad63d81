use std::f64::consts::PI;

use super::{Pivot, Side};
use crate::geometry::{wrap_2pi, wrap_pi, Polyhedron, Vec3};

/// A bound of a patch domain in `φ`: the orientations parallel to a facet,
/// or the end of the `φ` range for silhouette copies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PatchBound {
    Facet(usize),
    NegInf,
    PosInf,
}

/// Directions `(θ, φ)` of lines through `ℓ₀` tangent to `p` at edge
/// `edge`: `θ` between the azimuths of the edge endpoints and `φ` between
/// the orientations parallel to the two incident facets.
///
/// `theta_hi` may exceed `2π` when the span wraps. Silhouette edges come
/// as two copies (`copy` is `Some`) whose outer bound is `NegInf` (`φ = 0`)
/// or `PosInf` (`φ = π`). The antipodal record holds the same lines with
/// the reverse orientation, `(θ + π, π − φ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PatchDomain {
    pub edge: usize,
    pub theta_lo: f64,
    pub theta_hi: f64,
    pub lower: PatchBound,
    pub upper: PatchBound,
    pub copy: Option<Side>,
    pub antipodal: bool,
}

fn tau(p: &Polyhedron, pivot: &Pivot, f: usize, theta: f64) -> f64 {
    let n = p.planes[f].normal;
    let a = pivot.ex * theta.cos() + pivot.ey * theta.sin();
    wrap_pi((-pivot.u.dot(&n)).atan2(a.dot(&n)))
}

impl PatchDomain {
    fn bound(&self, p: &Polyhedron, pivot: &Pivot, b: PatchBound, theta: f64) -> f64 {
        match b {
            PatchBound::NegInf => 0.0,
            PatchBound::PosInf => PI,
            PatchBound::Facet(f) => tau(p, pivot, f, theta),
        }
    }

    /// The `φ` interval at `θ`, or `None` outside the `θ` range.
    pub fn phi_range(&self, p: &Polyhedron, pivot: &Pivot, theta: f64) -> Option<(f64, f64)> {
        let mut t = wrap_2pi(theta);
        if t < self.theta_lo {
            t += 2.0 * PI;
        }
        if t > self.theta_hi {
            return None;
        }
        if self.antipodal {
            let base = t - PI;
            let lo = self.bound(p, pivot, self.lower, base);
            let hi = self.bound(p, pivot, self.upper, base);
            Some((PI - hi, PI - lo))
        } else {
            Some((self.bound(p, pivot, self.lower, t), self.bound(p, pivot, self.upper, t)))
        }
    }

    pub fn contains(&self, p: &Polyhedron, pivot: &Pivot, theta: f64, phi: f64) -> bool {
        self.phi_range(p, pivot, theta).is_some_and(|(lo, hi)| lo <= phi && phi <= hi)
    }
}

fn azimuth(pivot: &Pivot, x: &Vec3) -> f64 {
    let w = x - pivot.origin;
    wrap_2pi(w.dot(&pivot.ey).atan2(w.dot(&pivot.ex)))
}

/// Patch domains of every edge of `p` relative to the pivot, base records
/// first, then their antipodal images.
pub fn patch_domains(p: &Polyhedron, pivot: &Pivot) -> Vec<PatchDomain> {
    let mut base = Vec::new();
    for (i, e) in p.edges.iter().enumerate() {
        let (a, b) = p.edge_points(i);
        let (ta, tb) = (azimuth(pivot, &a), azimuth(pivot, &b));
        let span = wrap_2pi(tb - ta);
        let (lo, hi) = if span <= PI { (ta, ta + span) } else { (tb, tb + 2.0 * PI - span) };
        let mid = 0.5 * (lo + hi);
        let (t1, t2) = (tau(p, pivot, e.f1, mid), tau(p, pivot, e.f2, mid));
        let (flo, fhi) = if t1 <= t2 { (e.f1, e.f2) } else { (e.f2, e.f1) };
        let (s1, s2) = (pivot.u.dot(&p.planes[e.f1].normal), pivot.u.dot(&p.planes[e.f2].normal));
        let rec = |lower, upper, copy| PatchDomain {
            edge: i,
            theta_lo: lo,
            theta_hi: hi,
            lower,
            upper,
            copy,
            antipodal: false,
        };
        if s1 * s2 < 0.0 {
            base.push(rec(PatchBound::NegInf, PatchBound::Facet(flo), Some(Side::Lower)));
            base.push(rec(PatchBound::Facet(fhi), PatchBound::PosInf, Some(Side::Upper)));
        } else {
            base.push(rec(PatchBound::Facet(flo), PatchBound::Facet(fhi), None));
        }
    }
    let anti: Vec<PatchDomain> = base
        .iter()
        .map(|d| PatchDomain {
            theta_lo: d.theta_lo + PI,
            theta_hi: d.theta_hi + PI,
            antipodal: true,
            ..*d
        })
        .map(|mut d| {
            if d.theta_lo >= 2.0 * PI {
                d.theta_lo -= 2.0 * PI;
                d.theta_hi -= 2.0 * PI;
            }
            d
        })
        .collect();
    base.extend(anti);
    base
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{tangent_at_edge, PluckerLine};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cube() -> Polyhedron {
        Polyhedron::axis_box(Vec3::repeat(-1.0), Vec3::repeat(1.0))
    }

    fn tilted_pivot() -> Pivot {
        Pivot::new(&PluckerLine::through(&Vec3::new(3.0, 2.5, 0.0), &Vec3::new(0.11, -0.07, 1.0)))
    }

    /// The line through `ℓ₀` with direction `(θ, φ)` meeting the supporting
    /// line of edge `e`.
    fn tangent_line(p: &Polyhedron, pivot: &Pivot, e: usize, th: f64, ph: f64) -> Option<PluckerLine> {
        let d = pivot.direction(th, ph);
        let (a, b) = p.edge_points(e);
        let n = (b - a).cross(&d);
        let den = n.dot(&pivot.u);
        if den.abs() < 1e-12 {
            return None;
        }
        let z = n.dot(&(a - pivot.origin)) / den;
        Some(PluckerLine::through(&pivot.at(z), &d))
    }

    #[test]
    fn cube_record_counts() {
        let doms = patch_domains(&cube(), &tilted_pivot());
        let base = doms.iter().filter(|d| !d.antipodal).count();
        assert_eq!(base, 18);
        assert_eq!(doms.len(), 36);
        assert_eq!(doms.iter().filter(|d| !d.antipodal && d.copy.is_some()).count(), 12);
    }

    #[test]
    fn antipodal_images_disjoint_from_base() {
        let c = cube();
        let pivot = tilted_pivot();
        let doms = patch_domains(&c, &pivot);
        let n = doms.len() / 2;
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for i in 0..n {
            let (b, a) = (&doms[i], &doms[i + n]);
            for _ in 0..200 {
                let th = rng.gen_range(0.0..2.0 * PI);
                let ph = rng.gen_range(0.0..PI);
                assert!(!(b.contains(&c, &pivot, th, ph) && a.contains(&c, &pivot, th, ph)));
                assert_eq!(b.contains(&c, &pivot, th, ph), a.contains(&c, &pivot, th + PI, PI - ph));
            }
        }
    }

    #[test]
    fn sampled_lines_are_tangent() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let pts: Vec<Vec3> = (0..14).map(|_| Vec3::from_fn(|_, _| rng.gen_range(-1.0..1.0))).collect();
        let p = Polyhedron::convex_hull(&pts).unwrap();
        let pivot = Pivot::new(&PluckerLine::through(&Vec3::new(2.7, -0.4, 0.3), &Vec3::new(0.2, 0.1, 1.0)));
        let mut hits = 0;
        for d in patch_domains(&p, &pivot) {
            for _ in 0..40 {
                let th = d.theta_lo + (d.theta_hi - d.theta_lo) * rng.gen_range(0.02..0.98);
                let (lo, hi) = d.phi_range(&p, &pivot, th).unwrap();
                let ph = lo + (hi - lo) * rng.gen_range(0.02..0.98);
                let Some(l) = tangent_line(&p, &pivot, d.edge, th, ph) else { continue };
                assert!(tangent_at_edge(&l, &p, d.edge), "edge {} θ {th} φ {ph}", d.edge);
                hits += 1;
            }
        }
        assert!(hits > 100);
    }
}
