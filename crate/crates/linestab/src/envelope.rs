//! Envelopes and sandwich regions of partially defined `θ`-monotone arcs
//! with a bounded number of pairwise crossings.

use std::fmt;
use std::sync::Arc;

use crate::error::{Diagnostic, Error, Result};
use crate::linespace::PieceKind;

pub type Eval = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// What an arc stands for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ArcLabel {
    Piece(PieceKind),
    /// A tangency surface slice of a polyhedron.
    Surface { poly: usize },
    /// Directions parallel to the plane separating a polyhedron from the
    /// pivot.
    Split { poly: usize },
    Index(usize),
}

/// A continuous function over `[lo, hi]`.
#[derive(Clone)]
pub struct MonotoneArc {
    pub id: usize,
    pub label: ArcLabel,
    pub lo: f64,
    pub hi: f64,
    pub eval: Eval,
    /// Maximum number of crossings with any other arc.
    pub crossing_bound: usize,
}

impl fmt::Debug for MonotoneArc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MonotoneArc")
            .field("id", &self.id)
            .field("label", &self.label)
            .field("lo", &self.lo)
            .field("hi", &self.hi)
            .finish()
    }
}

impl MonotoneArc {
    pub fn new(id: usize, label: ArcLabel, lo: f64, hi: f64, crossing_bound: usize, eval: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        MonotoneArc { id, label, lo, hi, eval: Arc::new(eval), crossing_bound }
    }

    pub fn at(&self, t: f64) -> f64 {
        (self.eval)(t)
    }
}

/// Supplies candidate crossings of two arcs computed from their defining
/// geometry. Candidates are verified; sampling covers anything missed.
pub trait CrossingFinder: Sync {
    fn crossings(&self, a: &MonotoneArc, b: &MonotoneArc, lo: f64, hi: f64) -> Vec<f64>;
}

/// A finder with no geometric knowledge.
pub struct Sampling;

impl CrossingFinder for Sampling {
    fn crossings(&self, _: &MonotoneArc, _: &MonotoneArc, _: f64, _: f64) -> Vec<f64> {
        Vec::new()
    }
}

#[derive(Debug, Clone)]
pub struct EnvPiece {
    pub lo: f64,
    pub hi: f64,
    pub arc: MonotoneArc,
}

/// Pointwise maximum (`upper`) or minimum of a family of arcs, with gaps
/// where no arc is defined.
#[derive(Debug, Clone)]
pub struct Envelope {
    pub upper: bool,
    pub pieces: Vec<EnvPiece>,
}

impl Envelope {
    pub fn piece_at(&self, t: f64) -> Option<&EnvPiece> {
        let i = self.pieces.partition_point(|p| p.hi < t);
        self.pieces.get(i).filter(|p| p.lo <= t && t <= p.hi)
    }

    pub fn eval(&self, t: f64) -> Option<f64> {
        self.piece_at(t).map(|p| p.arc.at(t))
    }

    /// Interior `θ` where the defining arc changes.
    pub fn breakpoints(&self) -> Vec<f64> {
        self.pieces.windows(2).map(|w| w[0].hi).collect()
    }

    fn better(&self, a: f64, b: f64) -> bool {
        if self.upper {
            a >= b
        } else {
            a <= b
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
pub enum VertexKind {
    /// Two arcs of the same envelope cross.
    Crossing,
    /// An envelope switches arcs without a crossing (an arc ends).
    Breakpoint,
    /// The lower and upper envelopes meet.
    Pinch,
    /// A corner at an end of the `θ` strip.
    End,
}

#[derive(Debug, Clone)]
pub struct RegionVertex {
    pub theta: f64,
    pub value: f64,
    pub labels: Vec<ArcLabel>,
    pub kind: VertexKind,
}

/// `{(θ, v) : L(θ) ≤ v ≤ U(θ)}` for a lower bound `L` (an upper envelope)
/// and an upper bound `U` (a lower envelope) over `[lo, hi]`.
#[derive(Debug, Clone)]
pub struct Region2D {
    pub lo: f64,
    pub hi: f64,
    pub lower: Envelope,
    pub upper: Envelope,
    pub vertices: Vec<RegionVertex>,
    /// Maximal `θ` intervals over which the region is nonempty.
    pub components: Vec<(f64, f64)>,
}

impl Region2D {
    pub fn contains(&self, t: f64, v: f64) -> bool {
        if t < self.lo || t > self.hi {
            return false;
        }
        match (self.lower.eval(t), self.upper.eval(t)) {
            (Some(l), Some(u)) => l <= v && v <= u,
            _ => false,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }
}

/// Envelope computations sharing a crossing finder and a diagnostics sink.
pub struct Sweep<'a> {
    pub finder: &'a dyn CrossingFinder,
    pub diagnostics: Vec<Diagnostic>,
}

impl Default for Sweep<'static> {
    fn default() -> Self {
        Sweep { finder: &Sampling, diagnostics: Vec::new() }
    }
}

const SAMPLES: usize = 64;

impl<'a> Sweep<'a> {
    pub fn new(finder: &'a dyn CrossingFinder) -> Self {
        Sweep { finder, diagnostics: Vec::new() }
    }

    /// Sorted `θ` in `[lo, hi]` where `a` and `b` cross or touch.
    pub fn intersection_points(&mut self, a: &MonotoneArc, b: &MonotoneArc, lo: f64, hi: f64) -> Result<Vec<f64>> {
        let lo = lo.max(a.lo).max(b.lo);
        let hi = hi.min(a.hi).min(b.hi);
        if lo > hi {
            return Ok(Vec::new());
        }
        let f = |t: f64| a.at(t) - b.at(t);
        let scale = |t: f64| 1.0 + a.at(t).abs();
        let ts: Vec<f64> = (0..=SAMPLES).map(|i| lo + (hi - lo) * i as f64 / SAMPLES as f64).collect();
        let fs: Vec<f64> = ts.iter().map(|&t| f(t)).collect();
        if fs.iter().zip(&ts).all(|(v, &t)| v.abs() <= 1e-12 * scale(t)) {
            self.diagnostics.push(Diagnostic::new(
                "identical_arcs",
                format!("arcs {} and {} coincide on [{lo}, {hi}]", a.id, b.id),
            ));
            return Ok(Vec::new());
        }
        let mut roots: Vec<f64> = Vec::new();
        for c in self.finder.crossings(a, b, lo, hi) {
            if c >= lo && c <= hi && f(c).abs() <= 1e-7 * scale(c) {
                roots.push(c);
            }
        }
        for i in 0..SAMPLES {
            let (mut x0, mut x1, mut f0) = (ts[i], ts[i + 1], fs[i]);
            let f1 = fs[i + 1];
            if f0 == 0.0 && i > 0 {
                continue;
            }
            if f0 == 0.0 {
                roots.push(x0);
                continue;
            }
            if f1 == 0.0 {
                roots.push(x1);
                continue;
            }
            if (f0 < 0.0) == (f1 < 0.0) {
                continue;
            }
            for _ in 0..80 {
                let m = 0.5 * (x0 + x1);
                let fm = f(m);
                if fm == 0.0 || x1 - x0 <= 1e-15 * (1.0 + m.abs()) {
                    x0 = m;
                    x1 = m;
                    break;
                }
                if (fm < 0.0) == (f0 < 0.0) {
                    x0 = m;
                    f0 = fm;
                } else {
                    x1 = m;
                }
            }
            let r = 0.5 * (x0 + x1);
            if !roots.iter().any(|&q| (q - r).abs() <= 1e-7 * (1.0 + (hi - lo))) {
                roots.push(r);
            }
        }
        roots.sort_by(f64::total_cmp);
        roots.dedup_by(|x, y| (*x - *y).abs() <= 1e-9 * (1.0 + (hi - lo)));
        if roots.len() > a.crossing_bound.max(b.crossing_bound) {
            return Err(Error::CrossingBoundViolated(a.id, b.id));
        }
        Ok(roots)
    }

    fn merge(&mut self, a: Envelope, b: Envelope) -> Result<Envelope> {
        let upper = a.upper;
        let mut cuts: Vec<f64> = a.pieces.iter().chain(&b.pieces).flat_map(|p| [p.lo, p.hi]).collect();
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let mut out = Envelope { upper, pieces: Vec::new() };
        for w in cuts.windows(2) {
            let (t0, t1) = (w[0], w[1]);
            if t1 <= t0 {
                continue;
            }
            let mid = 0.5 * (t0 + t1);
            match (a.piece_at(mid), b.piece_at(mid)) {
                (None, None) => {}
                (Some(p), None) | (None, Some(p)) => push(&mut out, t0, t1, &p.arc),
                (Some(p), Some(q)) => {
                    let mut ts = vec![t0];
                    ts.extend(self.intersection_points(&p.arc, &q.arc, t0, t1)?.into_iter().filter(|&r| r > t0 && r < t1));
                    ts.push(t1);
                    for s in ts.windows(2) {
                        let m = 0.5 * (s[0] + s[1]);
                        let arc = if out.better(p.arc.at(m), q.arc.at(m)) { &p.arc } else { &q.arc };
                        push(&mut out, s[0], s[1], arc);
                    }
                }
            }
        }
        Ok(out)
    }

    fn envelope(&mut self, arcs: &[MonotoneArc], upper: bool) -> Result<Envelope> {
        match arcs.len() {
            0 => Ok(Envelope { upper, pieces: Vec::new() }),
            1 => Ok(Envelope {
                upper,
                pieces: vec![EnvPiece { lo: arcs[0].lo, hi: arcs[0].hi, arc: arcs[0].clone() }],
            }),
            n => {
                let a = self.envelope(&arcs[..n / 2], upper)?;
                let b = self.envelope(&arcs[n / 2..], upper)?;
                self.merge(a, b)
            }
        }
    }

    /// Pointwise maximum.
    pub fn upper_envelope(&mut self, arcs: &[MonotoneArc]) -> Result<Envelope> {
        self.envelope(arcs, true)
    }

    /// Pointwise minimum.
    pub fn lower_envelope(&mut self, arcs: &[MonotoneArc]) -> Result<Envelope> {
        self.envelope(arcs, false)
    }

    pub fn sandwich(&mut self, lower_arcs: &[MonotoneArc], upper_arcs: &[MonotoneArc], lo: f64, hi: f64) -> Result<Region2D> {
        let l = self.upper_envelope(lower_arcs)?;
        let u = self.lower_envelope(upper_arcs)?;
        self.region(l, u, lo, hi)
    }

    pub fn intersect_regions(&mut self, a: &Region2D, b: &Region2D) -> Result<Region2D> {
        let l = self.merge(a.lower.clone(), b.lower.clone())?;
        let u = self.merge(a.upper.clone(), b.upper.clone())?;
        self.region(l, u, a.lo.max(b.lo), a.hi.min(b.hi))
    }

    /// Assembles the region bounded by `l` from below and `u` from above.
    pub fn region(&mut self, l: Envelope, u: Envelope, lo: f64, hi: f64) -> Result<Region2D> {
        let mut cuts: Vec<f64> = vec![lo, hi];
        cuts.extend(l.pieces.iter().chain(&u.pieces).flat_map(|p| [p.lo, p.hi]).filter(|&t| t > lo && t < hi));
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let mut pinches: Vec<RegionVertex> = Vec::new();
        let mut fine = Vec::new();
        for w in cuts.windows(2) {
            let (t0, t1) = (w[0], w[1]);
            fine.push(t0);
            let mid = 0.5 * (t0 + t1);
            if let (Some(p), Some(q)) = (l.piece_at(mid), u.piece_at(mid)) {
                for r in self.intersection_points(&p.arc, &q.arc, t0, t1)? {
                    if r > t0 && r < t1 {
                        fine.push(r);
                        pinches.push(RegionVertex {
                            theta: r,
                            value: p.arc.at(r),
                            labels: vec![p.arc.label, q.arc.label],
                            kind: VertexKind::Pinch,
                        });
                    }
                }
            }
        }
        fine.push(hi);
        fine.sort_by(f64::total_cmp);
        fine.dedup();
        let inside = |t: f64| matches!((l.eval(t), u.eval(t)), (Some(a), Some(b)) if a <= b);
        let mut components: Vec<(f64, f64)> = Vec::new();
        for w in fine.windows(2) {
            if w[1] > w[0] && inside(0.5 * (w[0] + w[1])) {
                match components.last_mut() {
                    Some(c) if c.1 == w[0] => c.1 = w[1],
                    _ => components.push((w[0], w[1])),
                }
            }
        }
        let in_closure = |t: f64| components.iter().any(|c| c.0 <= t && t <= c.1);
        let mut vertices = Vec::new();
        for env in [&l, &u] {
            for w in env.pieces.windows(2) {
                let t = w[0].hi;
                if t <= lo || t >= hi || !in_closure(t) {
                    continue;
                }
                let (va, vb) = (w[0].arc.at(t), w[1].arc.at(t));
                let kind = if w[0].hi == w[1].lo && (va - vb).abs() <= 1e-7 * (1.0 + va.abs()) {
                    VertexKind::Crossing
                } else {
                    VertexKind::Breakpoint
                };
                vertices.push(RegionVertex { theta: t, value: va, labels: vec![w[0].arc.label, w[1].arc.label], kind });
            }
        }
        vertices.extend(pinches.into_iter().filter(|v| in_closure(v.theta)));
        for &(c0, c1) in &components {
            for t in [c0, c1] {
                if t != lo && t != hi {
                    continue;
                }
                for env in [&l, &u] {
                    if let Some(p) = env.piece_at(t) {
                        vertices.push(RegionVertex { theta: t, value: p.arc.at(t), labels: vec![p.arc.label], kind: VertexKind::End });
                    }
                }
            }
        }
        vertices.sort_by(|a, b| a.theta.total_cmp(&b.theta).then(a.value.total_cmp(&b.value)));
        Ok(Region2D { lo, hi, lower: l, upper: u, vertices, components })
    }
}

fn push(out: &mut Envelope, lo: f64, hi: f64, arc: &MonotoneArc) {
    if let Some(last) = out.pieces.last_mut() {
        if last.arc.id == arc.id && last.hi == lo {
            last.hi = hi;
            return;
        }
    }
    out.pieces.push(EnvPiece { lo, hi, arc: arc.clone() });
}

/// Pointwise maximum with the sampling finder.
pub fn upper_envelope(arcs: &[MonotoneArc]) -> Result<Envelope> {
    Sweep::default().upper_envelope(arcs)
}

/// Pointwise minimum with the sampling finder.
pub fn lower_envelope(arcs: &[MonotoneArc]) -> Result<Envelope> {
    Sweep::default().lower_envelope(arcs)
}

pub fn sandwich(lower_arcs: &[MonotoneArc], upper_arcs: &[MonotoneArc], lo: f64, hi: f64) -> Result<Region2D> {
    Sweep::default().sandwich(lower_arcs, upper_arcs, lo, hi)
}

pub fn intersect_regions(a: &Region2D, b: &Region2D) -> Result<Region2D> {
    Sweep::default().intersect_regions(a, b)
}

pub fn intersection_points(a: &MonotoneArc, b: &MonotoneArc) -> Result<Vec<f64>> {
    Sweep::default().intersection_points(a, b, f64::NEG_INFINITY, f64::INFINITY)
}
