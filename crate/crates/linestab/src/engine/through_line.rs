use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{degenerate_candidates, is_axial, vertex_edge_line, Certifier, ExtremalStabbingLine};
use crate::envelope::{ArcLabel, CrossingFinder, MonotoneArc, Region2D, Sweep};
use crate::error::{Diagnostic, Result};
use crate::geometry::{transversals_to_four_lines, PluckerLine, Polyhedron, Vec3};
use crate::linespace::{edge_frame, gamma_profile, sigma_eval, EdgeFrame, LineCoords, Order, PieceKind, Pivot, Side};
use crate::scenes::Scene;
use crate::sphere::PartitionContext;

/// Lines meeting the pivot farther than this many scene scales from the
/// origin are not traced.
pub const FAR_INTERCEPT: f64 = 1e3;

/// How the per-strip sandwich regions are assembled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// One sandwich of all bounding arcs.
    #[default]
    Structured,
    /// Bodies are split in a seeded random order and the regions of the
    /// halves are intersected recursively.
    RandomizedDc,
}

/// The lines tangent at edge `edge` of `poly` that stab everything, over
/// one `θ` window and one strip between split curves, in the edge's frame.
#[derive(Debug, Clone)]
pub struct RegionPiece {
    pub poly: usize,
    pub edge: usize,
    /// Order of every body along the lines of the piece (`Contains` for
    /// `poly` and for bodies holding the pivot point).
    pub orders: Vec<Order>,
    pub region: Region2D,
}

/// `T_ℓ₀` of a scene: the boundary pieces, one per edge frame, strip and
/// window, and the certified vertices.
#[derive(Debug, Clone)]
pub struct StabbingRegion {
    pub pivot: Pivot,
    pub pieces: Vec<RegionPiece>,
    pub vertices: Vec<ExtremalStabbingLine>,
    pub diagnostics: Vec<Diagnostic>,
    pub(crate) solids: Vec<Polyhedron>,
}

impl StabbingRegion {
    /// Number of nonempty `θ` components over all pieces.
    pub fn component_count(&self) -> usize {
        self.pieces.iter().map(|p| p.region.components.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.iter().all(|p| p.region.is_empty())
    }

    /// `(max σ⁻, min σ⁺)` over the bodies for direction `(θ, φ)`, or `None`
    /// when some body is out of reach in that direction.
    pub fn z_range(&self, theta: f64, phi: f64) -> Option<(f64, f64)> {
        let mut lo = f64::NEG_INFINITY;
        let mut hi = f64::INFINITY;
        for p in &self.solids {
            lo = lo.max(sigma_eval(p, &self.pivot, theta, phi, Side::Lower)?);
            hi = hi.min(sigma_eval(p, &self.pivot, theta, phi, Side::Upper)?);
        }
        Some((lo, hi))
    }

    pub fn contains(&self, c: &LineCoords) -> bool {
        matches!(self.z_range(c.theta, c.phi), Some((lo, hi)) if lo <= c.z && c.z <= hi)
    }
}

/// Vertices of `T_ℓ₀(P)` together with the extremal lines defined by at
/// most two bodies, deduplicated by features.
pub fn extremal_lines_through_line(scene: &Scene, mode: Mode) -> Result<Vec<ExtremalStabbingLine>> {
    Ok(Engine::new(scene, mode)?.run(false)?.vertices)
}

/// The full region, assembled with the seeded divide and conquer.
pub fn region_through_line(scene: &Scene) -> Result<StabbingRegion> {
    Engine::new(scene, Mode::RandomizedDc)?.run(true)
}

struct Engine {
    solids: Arc<Vec<Polyhedron>>,
    pivot: Pivot,
    ctx: PartitionContext,
    cert: Certifier,
    mode: Mode,
    seed: u64,
}

#[derive(Default)]
struct EdgeOutput {
    cands: Vec<PluckerLine>,
    pieces: Vec<RegionPiece>,
    diags: Vec<Diagnostic>,
}

/// Arcs of one body inside a window.
struct BodyArcs {
    lower: Vec<MonotoneArc>,
    upper: Vec<MonotoneArc>,
}

impl Engine {
    fn new(scene: &Scene, mode: Mode) -> Result<Engine> {
        let cert = Certifier::new(scene);
        let pivot = scene.pivot_frame();
        let ctx = PartitionContext::new(&pivot, &cert.solids)?;
        Ok(Engine { solids: Arc::new(cert.solids.clone()), pivot, ctx, cert, mode, seed: scene.seed })
    }

    fn run(&self, keep_pieces: bool) -> Result<StabbingRegion> {
        let edges: Vec<(usize, usize)> =
            self.solids.iter().enumerate().flat_map(|(i, p)| (0..p.edges.len()).map(move |e| (i, e))).collect();
        let edges: Vec<(usize, usize)> =
            edges.into_iter().filter(|&(p, e)| !is_axial(&self.solids[p], e, &self.pivot)).collect();
        let outs: Vec<EdgeOutput> = edges.par_iter().map(|&(p, e)| self.edge(p, e)).collect::<Result<_>>()?;
        let mut cands = degenerate_candidates(&self.solids, &self.pivot);
        let mut pieces = Vec::new();
        let mut diagnostics = Vec::new();
        for o in outs {
            cands.extend(o.cands);
            if keep_pieces {
                pieces.extend(o.pieces);
            }
            diagnostics.extend(o.diags);
        }
        Ok(StabbingRegion {
            pivot: self.pivot,
            pieces,
            vertices: self.cert.certify_all(&cands, 0),
            diagnostics,
            solids: self.solids.to_vec(),
        })
    }

    fn edge(&self, p0: usize, e0: usize) -> Result<EdgeOutput> {
        let frame = Arc::new(edge_frame(&self.solids[p0], p0, e0, &self.pivot)?);
        let inside = |t: f64| t > 0.0 && t < frame.theta0;
        let mut cuts = vec![0.0, frame.theta0];
        if inside(frame.theta_star) {
            cuts.push(frame.theta_star);
        }
        for &b in &self.ctx.intervals.breaks {
            let t = frame.theta_of_point(&self.pivot.at(b));
            if inside(t) {
                cuts.push(t);
            }
        }
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let mut out = EdgeOutput::default();
        let pad = 1e-9 * (1.0 + frame.theta0);
        for (wi, w) in cuts.windows(2).enumerate() {
            let Some((lo, hi)) = self.near_part(&frame, w[0] + pad, w[1] - pad) else {
                continue;
            };
            if hi - lo > pad {
                self.window(&frame, lo, hi, wi, &mut out)?;
            }
        }
        Ok(out)
    }

    /// Shrinks `[lo, hi]` to the orientations whose pivot point lies within
    /// [`FAR_INTERCEPT`] scene scales of the origin. Windows are cut at `θ*`,
    /// so the far part is at one end.
    fn near_part(&self, frame: &EdgeFrame, lo: f64, hi: f64) -> Option<(f64, f64)> {
        let limit = FAR_INTERCEPT * self.cert.scale;
        let far = |t: f64| frame.center_intercept(t, &self.pivot).map_or(true, |z| z.abs() > limit);
        let (flo, fhi) = (far(lo), far(hi));
        if !flo && !fhi {
            return Some((lo, hi));
        }
        if flo && fhi {
            return (!far(0.5 * (lo + hi))).then_some((lo, hi));
        }
        let (mut a, mut b) = (lo, hi);
        for _ in 0..100 {
            let m = 0.5 * (a + b);
            if far(m) == flo {
                a = m;
            } else {
                b = m;
            }
        }
        Some(if flo { (b, hi) } else { (lo, a) })
    }

    fn window(&self, frame: &Arc<EdgeFrame>, lo: f64, hi: f64, wi: usize, out: &mut EdgeOutput) -> Result<()> {
        let iv = self.ctx.intervals.interval_of(frame.center_intercept(0.5 * (lo + hi), &self.pivot)?);
        let k = self.solids.len();
        let mut normals: HashMap<usize, Vec3> = HashMap::new();
        for p in (0..k).filter(|&p| p != frame.poly) {
            if let Some(flat) = self.ctx.relevant_plane(p, iv) {
                normals.insert(p, self.ctx.planes[p][flat - self.ctx.plane_offset[p]].normal);
            }
        }
        let mut bodies: Vec<usize> = normals.keys().copied().collect();
        bodies.sort();
        let mut next_id = 0;
        let mut id = || {
            next_id += 1;
            next_id
        };
        let curves: Vec<MonotoneArc> =
            bodies.iter().map(|&p| split_arc(id(), p, frame.rot * normals[&p], lo, hi)).collect();
        let finder = FrameFinder::new(frame, &self.solids, &self.pivot, &normals);
        let mut sweep = Sweep::new(&finder);
        let mut cuts = vec![lo, hi];
        for i in 0..curves.len() {
            for j in i + 1..curves.len() {
                cuts.extend(sweep.intersection_points(&curves[i], &curves[j], lo, hi)?.into_iter().filter(|&t| t > lo && t < hi));
            }
        }
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        for (si, w) in cuts.windows(2).enumerate() {
            let (t0, t1) = (w[0], w[1]);
            if t1 - t0 <= 1e-12 {
                continue;
            }
            let tm = 0.5 * (t0 + t1);
            let mut sorted: Vec<usize> = (0..curves.len()).collect();
            sorted.sort_by(|&a, &b| curves[a].at(tm).total_cmp(&curves[b].at(tm)));
            let (_, _, which) = frame.domain(tm)?;
            let dom_lo = piece_arc(id(), frame, &self.solids, PieceKind::Endpoint(which[0]), t0, t1);
            let dom_hi = piece_arc(id(), frame, &self.solids, PieceKind::Endpoint(which[1]), t0, t1);
            let mut profiles: HashMap<(usize, Order), BodyArcs> = HashMap::new();
            for strip in 0..=sorted.len() {
                let below = (strip > 0).then(|| curves[sorted[strip - 1]].clone());
                let above = sorted.get(strip).map(|&c| curves[c].clone());
                let vlo = below.as_ref().map_or(0.0, |a| a.at(tm));
                let vhi = above.as_ref().map_or(PI, |a| a.at(tm));
                let phi = 0.5 * (vlo + vhi);
                let d = frame.dir_to_world(&Vec3::new(phi.sin() * tm.cos(), phi.sin() * tm.sin(), phi.cos()));
                let mut orders = vec![Order::Contains; k];
                for &p in &bodies {
                    orders[p] = if normals[&p].dot(&d) < 0.0 { Order::Ahead } else { Order::Behind };
                }
                for &p in &bodies {
                    if let std::collections::hash_map::Entry::Vacant(slot) = profiles.entry((p, orders[p])) {
                        let g = gamma_profile(frame, &self.solids[p], p, orders[p], t0, t1)?;
                        let arcs = |ps: &[crate::linespace::GammaPiece], id: &mut dyn FnMut() -> usize| {
                            ps.iter().map(|q| piece_arc(id(), frame, &self.solids, q.kind, q.lo, q.hi)).collect::<Vec<_>>()
                        };
                        let lower = arcs(&g.lower, &mut id);
                        let upper = arcs(&g.upper, &mut id);
                        slot.insert(BodyArcs { lower, upper });
                    }
                }
                let mut base_lower = vec![dom_lo.clone()];
                base_lower.extend(below);
                let mut base_upper = vec![dom_hi.clone()];
                base_upper.extend(above);
                let groups: Vec<&BodyArcs> = bodies.iter().map(|&p| &profiles[&(p, orders[p])]).collect();
                let region = match self.mode {
                    Mode::Structured => {
                        let (l, u) = collect(&base_lower, &base_upper, &groups);
                        sweep.sandwich(&l, &u, t0, t1)?
                    }
                    Mode::RandomizedDc => {
                        let mut ids: Vec<usize> = (0..groups.len()).collect();
                        let mix = (frame.poly as u64) << 48 ^ (frame.edge as u64) << 32 ^ (wi as u64) << 20 ^ (si as u64) << 10 ^ strip as u64;
                        ids.shuffle(&mut ChaCha8Rng::seed_from_u64(self.seed ^ mix));
                        let groups: Vec<&BodyArcs> = ids.iter().map(|&i| groups[i]).collect();
                        dc(&mut sweep, &base_lower, &base_upper, &groups, t0, t1)?
                    }
                };
                for v in &region.vertices {
                    if let Ok(l) = frame.line_at(v.theta, v.value) {
                        out.cands.push(l);
                    }
                    if v.labels.len() == 2 {
                        out.cands.extend(finder.lines(&v.labels[0], &v.labels[1]));
                    }
                }
                if !region.is_empty() {
                    out.pieces.push(RegionPiece { poly: frame.poly, edge: frame.edge, orders, region });
                }
            }
        }
        out.diags.append(&mut sweep.diagnostics);
        Ok(())
    }
}

fn collect(base_lower: &[MonotoneArc], base_upper: &[MonotoneArc], groups: &[&BodyArcs]) -> (Vec<MonotoneArc>, Vec<MonotoneArc>) {
    let mut l = base_lower.to_vec();
    let mut u = base_upper.to_vec();
    for g in groups {
        l.extend(g.lower.iter().cloned());
        u.extend(g.upper.iter().cloned());
    }
    (l, u)
}

fn dc(
    sweep: &mut Sweep,
    base_lower: &[MonotoneArc],
    base_upper: &[MonotoneArc],
    groups: &[&BodyArcs],
    lo: f64,
    hi: f64,
) -> Result<Region2D> {
    if groups.len() <= 2 {
        let (l, u) = collect(base_lower, base_upper, groups);
        return sweep.sandwich(&l, &u, lo, hi);
    }
    let (a, b) = groups.split_at(groups.len() / 2);
    let ra = dc(sweep, base_lower, base_upper, a, lo, hi)?;
    let rb = dc(sweep, base_lower, base_upper, b, lo, hi)?;
    sweep.intersect_regions(&ra, &rb)
}

/// `φ` of the direction in `Π_θ` parallel to the plane with local normal
/// `n`, in `[0, π)`.
fn split_phi(n: &Vec3, theta: f64) -> f64 {
    let f = (-n.z).atan2(n.x * theta.cos() + n.y * theta.sin());
    if f < 0.0 {
        f + PI
    } else {
        f
    }
}

fn split_arc(id: usize, poly: usize, n_local: Vec3, lo: f64, hi: f64) -> MonotoneArc {
    MonotoneArc::new(id, ArcLabel::Split { poly }, lo, hi, 2, move |t| split_phi(&n_local, t))
}

fn piece_arc(id: usize, frame: &Arc<EdgeFrame>, solids: &Arc<Vec<Polyhedron>>, kind: PieceKind, lo: f64, hi: f64) -> MonotoneArc {
    let (frame, solids) = (frame.clone(), solids.clone());
    match kind {
        PieceKind::Tangent { poly, edge } => {
            let raw = move |t: f64| -> Option<(f64, f64)> {
                let c = frame.center(t).ok()?;
                let x = frame.edge_point(&solids[poly], edge, t)?;
                Some((x.0 - c.0, x.1 - c.1))
            };
            let sign = raw(0.5 * (lo + hi)).map_or(1.0, |(ds, _)| if ds < 0.0 { -1.0 } else { 1.0 });
            MonotoneArc::new(id, ArcLabel::Piece(kind), lo, hi, 2, move |t| match raw(t) {
                Some((ds, dt)) => unwrapped_phi(sign * ds, sign * dt),
                None => f64::NAN,
            })
        }
        _ => {
            let p = frame.poly;
            MonotoneArc::new(id, ArcLabel::Piece(kind), lo, hi, 2, move |t| {
                kind.eval(&frame, &solids[p], t).unwrap_or(f64::NAN)
            })
        }
    }
}

/// Polar angle of `(ds, dt)` for `ds ≥ 0`, continued past `0` and `π` so
/// that a trace stays continuous at the ends of its piece.
fn unwrapped_phi(ds: f64, dt: f64) -> f64 {
    let f = ds.atan2(dt);
    if f < -0.5 * PI {
        f + 2.0 * PI
    } else {
        f
    }
}

enum Constraint {
    Line(PluckerLine),
    Point(Vec3),
}

/// Crossings of frame arcs from their defining lines: every crossing is a
/// line through the pivot and `e₀` meeting two more lines (edges or lines
/// at infinity of split planes), or passing through an endpoint of `e₀`.
struct FrameFinder<'a> {
    frame: &'a EdgeFrame,
    solids: &'a [Polyhedron],
    pivot: &'a Pivot,
    normals: &'a HashMap<usize, Vec3>,
    e0: PluckerLine,
}

impl<'a> FrameFinder<'a> {
    fn new(frame: &'a EdgeFrame, solids: &'a [Polyhedron], pivot: &'a Pivot, normals: &'a HashMap<usize, Vec3>) -> Self {
        let (a, b) = solids[frame.poly].edge_points(frame.edge);
        FrameFinder { frame, solids, pivot, normals, e0: PluckerLine::through(&a, &(b - a)) }
    }

    fn constraint(&self, l: &ArcLabel) -> Option<Constraint> {
        match *l {
            ArcLabel::Piece(PieceKind::Tangent { poly, edge }) => {
                let (a, b) = self.solids[poly].edge_points(edge);
                Some(Constraint::Line(PluckerLine::through(&a, &(b - a))))
            }
            ArcLabel::Piece(PieceKind::Endpoint(w)) => {
                Some(Constraint::Point(self.frame.to_world(&self.frame.endpoint_local(w))))
            }
            ArcLabel::Split { poly } => self.normals.get(&poly).map(|n| Constraint::Line(PluckerLine::at_infinity(n))),
            _ => None,
        }
    }

    /// Lines through the pivot and `e₀` satisfying both labels.
    fn lines(&self, a: &ArcLabel, b: &ArcLabel) -> Vec<PluckerLine> {
        match (self.constraint(a), self.constraint(b)) {
            (Some(Constraint::Line(x)), Some(Constraint::Line(y))) => {
                transversals_to_four_lines([&self.pivot.line, &self.e0, &x, &y]).unwrap_or_default()
            }
            (Some(Constraint::Point(v)), Some(Constraint::Line(x))) | (Some(Constraint::Line(x)), Some(Constraint::Point(v))) => {
                vertex_edge_line(&self.pivot.line, &v, &x).into_iter().collect()
            }
            _ => Vec::new(),
        }
    }
}

impl CrossingFinder for FrameFinder<'_> {
    fn crossings(&self, a: &MonotoneArc, b: &MonotoneArc, lo: f64, hi: f64) -> Vec<f64> {
        self.lines(&a.label, &b.label)
            .iter()
            .filter_map(|l| self.frame.angles_of(l))
            .map(|(t, _)| t)
            .filter(|&t| t >= lo && t <= hi)
            .collect()
    }
}
