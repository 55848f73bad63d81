use std::f64::consts::PI;

use super::frame::EdgeFrame;
use crate::error::Result;
use crate::geometry::{wrap_pi, Polyhedron};

/// Where a polyhedron sits along the lines of a subproblem, relative to
/// the point `c(θ)` where they cross `ℓ₀`: containing it, met in the
/// direction of increasing `s` (`Ahead`), or in the opposite direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
pub enum Order {
    Contains,
    Ahead,
    Behind,
}

/// What defines one piece of `γ⁻` or `γ⁺`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PieceKind {
    /// Lines through `c(θ)` and the supporting line of edge `edge` of
    /// polyhedron `poly` (a regulus trace).
    Tangent { poly: usize, edge: usize },
    /// Lines through `c(θ)` and an endpoint of `e₀` (0 or 1, see
    /// [`EdgeFrame::endpoints`]), i.e. `φ⁻` or `φ⁺`.
    Endpoint(usize),
    /// A constant, `0` or `π` (stored as `false`/`true`).
    Clamp(bool),
}

impl PieceKind {
    /// Value at `θ`. `p` must be the polyhedron named by a `Tangent` kind.
    pub fn eval(&self, frame: &EdgeFrame, p: &Polyhedron, theta: f64) -> Option<f64> {
        match *self {
            PieceKind::Clamp(hi) => Some(if hi { PI } else { 0.0 }),
            PieceKind::Endpoint(w) => {
                let c = frame.center(theta).ok()?;
                let x = frame.endpoint_local(w);
                Some(EdgeFrame::phi_between(c, (0.0, x.z)))
            }
            PieceKind::Tangent { edge, .. } => {
                let c = frame.center(theta).ok()?;
                let x = frame.edge_point(p, edge, theta)?;
                Some(EdgeFrame::phi_between(c, x))
            }
        }
    }
}

/// `(γ⁻(θ), γ⁺(θ))` together with the kinds realizing them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaAt {
    pub lower: f64,
    pub upper: f64,
    pub lower_kind: PieceKind,
    pub upper_kind: PieceKind,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaPiece {
    pub lo: f64,
    pub hi: f64,
    pub kind: PieceKind,
}

/// `γ⁻` and `γ⁺` of one polyhedron over a `θ` range, as pieces.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaProfile {
    pub poly: usize,
    pub order: Order,
    pub lo: f64,
    pub hi: f64,
    pub lower: Vec<GammaPiece>,
    pub upper: Vec<GammaPiece>,
}

impl GammaProfile {
    pub fn eval(&self, frame: &EdgeFrame, p: &Polyhedron, theta: f64) -> Option<(f64, f64)> {
        let find = |ps: &[GammaPiece]| {
            ps.iter().find(|q| q.lo <= theta && theta <= q.hi).and_then(|q| q.kind.eval(frame, p, theta))
        };
        Some((find(&self.lower)?, find(&self.upper)?))
    }

    /// Interior `θ` values where either function changes kind.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self.lower.iter().chain(&self.upper).map(|q| q.lo).filter(|&t| t > self.lo).collect();
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }
}

/// `(γ⁻(θ), γ⁺(θ))` for polyhedron `p` (index `poly`) with the given order.
///
/// With `Contains` every line of the legal domain stabs `p` and the result
/// is `(φ⁻, φ⁺)`; when no line through `c(θ)` meets `p` on the requested
/// side the result is the inverted `(φ⁺, φ⁻)`.
pub fn gamma_interval(frame: &EdgeFrame, p: &Polyhedron, poly: usize, theta: f64, order: Order) -> Result<GammaAt> {
    let (plo, phi, which) = frame.domain(theta)?;
    let full = GammaAt {
        lower: plo,
        upper: phi,
        lower_kind: PieceKind::Endpoint(which[0]),
        upper_kind: PieceKind::Endpoint(which[1]),
    };
    let empty = GammaAt {
        lower: phi,
        upper: plo,
        lower_kind: PieceKind::Endpoint(which[1]),
        upper_kind: PieceKind::Endpoint(which[0]),
    };
    if order == Order::Contains {
        return Ok(full);
    }
    let c = frame.center(theta)?;
    let pts = frame.slice(p, theta);
    let Some((a, b, ea, eb)) = angular_span(c, &pts) else {
        return Ok(empty);
    };
    let tan = |edge| PieceKind::Tangent { poly, edge };
    let (lo, lk, hi, hk) = match order {
        Order::Ahead => {
            let (lo, lk) = if a >= 0.0 { (a, tan(ea)) } else { (0.0, PieceKind::Clamp(false)) };
            let (hi, hk) = if b <= PI { (b, tan(eb)) } else { (PI, PieceKind::Clamp(true)) };
            (lo, lk, hi, hk)
        }
        _ => {
            if a < 0.0 {
                let (hi, hk) = if b < 0.0 { (b + PI, tan(eb)) } else { (PI, PieceKind::Clamp(true)) };
                (a + PI, tan(ea), hi, hk)
            } else {
                (0.0, PieceKind::Clamp(false), b - PI, tan(eb))
            }
        }
    };
    if lo > hi {
        return Ok(empty);
    }
    Ok(GammaAt { lower: lo, upper: hi, lower_kind: lk, upper_kind: hk })
}

/// Directions from `c` to the section points, as the arc `[a, b]` with
/// `a ∈ [−π, π)`, together with the edges realizing both ends. A section
/// surrounding `c` yields the arc `[−π, π]`.
fn angular_span(c: (f64, f64), pts: &[super::SlicePoint]) -> Option<(f64, f64, usize, usize)> {
    let mut angs: Vec<(f64, usize)> = pts.iter().map(|q| ((q.s - c.0).atan2(q.t - c.1), q.edge)).collect();
    if angs.is_empty() {
        return None;
    }
    angs.sort_by(|x, y| x.0.total_cmp(&y.0));
    let n = angs.len();
    let mut gap = (angs[0].0 + 2.0 * PI - angs[n - 1].0, n - 1);
    for i in 0..n - 1 {
        let g = angs[i + 1].0 - angs[i].0;
        if g > gap.0 {
            gap = (g, i);
        }
    }
    if gap.0 < PI {
        return Some((-PI, PI, angs[0].1, angs[n - 1].1));
    }
    let start = angs[(gap.1 + 1) % n];
    let end = angs[gap.1];
    let mut a = start.0;
    if a >= PI {
        a -= 2.0 * PI;
    }
    let width = 2.0 * PI - gap.0;
    Some((a, a + width, start.1, end.1))
}

/// Orientations in `(lo, hi)` where the kinds of `γ±` may change.
pub(crate) fn gamma_events(frame: &EdgeFrame, p: &Polyhedron, lo: f64, hi: f64) -> Vec<f64> {
    let mut ev = vec![frame.theta_star];
    for v in &p.vertices {
        ev.push(frame.theta_of_point(v));
    }
    let (p0, u0) = (frame.pivot_point, frame.pivot_dir);
    for h in &p.planes {
        let n = frame.rot * h.normal;
        let den = n.dot(&u0);
        if den.abs() < 1e-14 {
            continue;
        }
        let x = frame.to_local(&(h.normal * h.offset));
        let a = p0 + u0 * ((x - p0).dot(&n) / den);
        ev.push(wrap_pi(a.y.atan2(a.x)));
    }
    for e in 0..p.edges.len() {
        let (a, b) = p.edge_points(e);
        let (a, b) = (frame.to_local(&a), frame.to_local(&b));
        let d = b - a;
        let det = u0.x * (-d.y) - u0.y * (-d.x);
        if det.abs() < 1e-14 {
            continue;
        }
        let r = (a.x - p0.x, a.y - p0.y);
        let lam = (r.0 * (-d.y) - r.1 * (-d.x)) / det;
        let q = p0 + u0 * lam;
        ev.push(wrap_pi(q.y.atan2(q.x)));
    }
    ev.retain(|&t| t > lo && t < hi);
    ev.sort_by(f64::total_cmp);
    ev.dedup();
    ev
}

/// Piecewise description of `γ±` for `p` over `(lo, hi)`, which must avoid
/// the orientations where `c(θ)` changes atomic interval.
pub fn gamma_profile(frame: &EdgeFrame, p: &Polyhedron, poly: usize, order: Order, lo: f64, hi: f64) -> Result<GammaProfile> {
    let mut cuts = vec![lo];
    cuts.extend(gamma_events(frame, p, lo, hi));
    cuts.push(hi);
    let mut lower = Vec::new();
    let mut upper = Vec::new();
    for w in cuts.windows(2) {
        fill(frame, p, poly, order, w[0], w[1], 0, &mut lower, &mut upper)?;
    }
    Ok(GammaProfile { poly, order, lo, hi, lower: coalesce(lower), upper: coalesce(upper) })
}

#[allow(clippy::too_many_arguments)]
fn fill(
    frame: &EdgeFrame,
    p: &Polyhedron,
    poly: usize,
    order: Order,
    lo: f64,
    hi: f64,
    depth: usize,
    lower: &mut Vec<GammaPiece>,
    upper: &mut Vec<GammaPiece>,
) -> Result<()> {
    let w = hi - lo;
    let probe = |t: f64| gamma_interval(frame, p, poly, t, order).map(|g| (g.lower_kind, g.upper_kind));
    let mid = probe(lo + 0.5 * w);
    let same = match (&mid, probe(lo + 1e-6 * w), probe(hi - 1e-6 * w)) {
        (Ok(m), Ok(a), Ok(b)) => *m == a && *m == b,
        _ => false,
    };
    if same || depth >= 40 || w < 1e-13 {
        if let Ok((lk, uk)) = mid {
            lower.push(GammaPiece { lo, hi, kind: lk });
            upper.push(GammaPiece { lo, hi, kind: uk });
        }
        return Ok(());
    }
    let m = lo + 0.5 * w;
    fill(frame, p, poly, order, lo, m, depth + 1, lower, upper)?;
    fill(frame, p, poly, order, m, hi, depth + 1, lower, upper)
}

fn coalesce(ps: Vec<GammaPiece>) -> Vec<GammaPiece> {
    let mut out: Vec<GammaPiece> = Vec::new();
    for q in ps {
        match out.last_mut() {
            Some(last) if last.kind == q.kind && last.hi == q.lo => last.hi = q.hi,
            _ => out.push(q),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{PluckerLine, Vec3};
    use crate::linespace::{edge_frame, Pivot};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn setup(seed: u64) -> (Polyhedron, Polyhedron, Pivot) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cube = Polyhedron::axis_box(Vec3::repeat(-1.0), Vec3::repeat(1.0));
        let c = Vec3::new(rng.gen_range(2.5..4.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let pts: Vec<Vec3> = (0..10).map(|_| c + Vec3::from_fn(|_, _| rng.gen_range(-0.8..0.8))).collect();
        let p = Polyhedron::convex_hull(&pts).unwrap();
        let o = Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), 0.0);
        let d = Vec3::new(rng.gen_range(-0.4..0.4), rng.gen_range(-0.4..0.4), 1.0);
        (cube, p, Pivot::new(&PluckerLine::through(&o, &d)))
    }

    /// Whether the line `(θ, φ)` meets `p` on the given side of `c(θ)`.
    fn stabs_ordered(frame: &EdgeFrame, p: &Polyhedron, th: f64, ph: f64, order: Order) -> Option<bool> {
        let (s, t) = frame.center(th).ok()?;
        let c = frame.to_world(&Vec3::new(s * th.cos(), s * th.sin(), t));
        let d = frame.dir_to_world(&Vec3::new(ph.sin() * th.cos(), ph.sin() * th.sin(), ph.cos()));
        let (t0, t1) = match p.clip(&c, &d, 0.0) {
            Some(r) => r,
            None => return Some(false),
        };
        Some(match order {
            Order::Contains => true,
            Order::Ahead => t1 > 0.0,
            Order::Behind => t0 < 0.0,
        })
    }

    #[test]
    fn contains_gives_legal_domain() {
        let (cube, p, pivot) = setup(1);
        let f = edge_frame(&cube, 0, 0, &pivot).unwrap();
        let th = 0.37 * f.theta0;
        let g = gamma_interval(&f, &p, 1, th, Order::Contains).unwrap();
        let (lo, hi) = super::super::legal_domain(&f, th).unwrap();
        assert_eq!((g.lower, g.upper), (lo, hi));
    }

    #[test]
    fn empty_section_is_inverted() {
        let cube = Polyhedron::axis_box(Vec3::repeat(-1.0), Vec3::repeat(1.0));
        let far = Polyhedron::axis_box(Vec3::new(-0.5, -0.5, 10.0), Vec3::new(0.5, 0.5, 11.0));
        let pivot = Pivot::new(&PluckerLine::through(&Vec3::new(3.0, 3.0, 0.0), &Vec3::new(0.1, -1.0, 0.05)));
        for e in 0..cube.edges.len() {
            let Ok(f) = edge_frame(&cube, 0, e, &pivot) else { continue };
            for k in 1..20 {
                let th = f.theta0 * k as f64 / 20.0;
                if !f.slice(&far, th).is_empty() {
                    continue;
                }
                let Ok((lo, hi)) = super::super::legal_domain(&f, th) else { continue };
                let g = gamma_interval(&f, &far, 1, th, Order::Ahead).unwrap();
                assert_eq!((g.lower, g.upper), (hi, lo));
            }
        }
    }

    #[test]
    fn interval_matches_phi_sweep() {
        let mut checked = 0;
        for seed in 0..30 {
            let (cube, p, pivot) = setup(seed);
            for e in 0..cube.edges.len() {
                let Ok(f) = edge_frame(&cube, 0, e, &pivot) else { continue };
                for k in 1..12 {
                    let th = f.theta0 * k as f64 / 12.0;
                    let Ok((lo, hi)) = super::super::legal_domain(&f, th) else { continue };
                    for order in [Order::Ahead, Order::Behind] {
                        let g = gamma_interval(&f, &p, 1, th, order).unwrap();
                        for j in 1..40 {
                            let ph = lo + (hi - lo) * j as f64 / 40.0;
                            if (ph - g.lower).abs() < 1e-7 || (ph - g.upper).abs() < 1e-7 {
                                continue;
                            }
                            let Some(truth) = stabs_ordered(&f, &p, th, ph, order) else { continue };
                            assert_eq!(truth, g.lower <= ph && ph <= g.upper, "seed {seed} e {e} θ {th} φ {ph} {order:?}");
                            checked += 1;
                        }
                    }
                }
            }
        }
        assert!(checked > 10000);
    }

    #[test]
    fn profile_agrees_with_pointwise() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for seed in 0..10 {
            let (cube, p, pivot) = setup(seed);
            for e in 0..cube.edges.len() {
                let Ok(f) = edge_frame(&cube, 0, e, &pivot) else { continue };
                let (lo, hi) = if f.theta_star > 0.0 && f.theta_star < f.theta0 {
                    (f.theta_star, f.theta0)
                } else {
                    (0.0, f.theta0)
                };
                for order in [Order::Ahead, Order::Behind] {
                    let prof = gamma_profile(&f, &p, 1, order, lo, hi).unwrap();
                    for _ in 0..50 {
                        let th = rng.gen_range(lo..hi);
                        let g = gamma_interval(&f, &p, 1, th, order).unwrap();
                        let (a, b) = prof.eval(&f, &p, th).unwrap();
                        assert!((a - g.lower).abs() < 1e-9 && (b - g.upper).abs() < 1e-9, "seed {seed} e {e} θ {th}");
                    }
                }
            }
        }
    }
}
