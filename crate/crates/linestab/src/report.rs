//! JSON reports and SVG plots of planar regions.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::engine::ExtremalStabbingLine;
use crate::envelope::{ArcLabel, Envelope, Region2D};
use crate::error::{Diagnostic, Error, Result};
use crate::geometry::{Feature, FeatureKind};
use crate::linespace::PieceKind;
use crate::scenes::Scene;

/// Bumped only when a field changes meaning; new fields may be appended.
pub const REPORT_VERSION: u32 = 1;

/// `P<poly>.v<vertex>` or `P<poly>.e<edge>`.
pub fn feature_name(f: &Feature) -> String {
    match f.kind {
        FeatureKind::Vertex(v) => format!("P{}.v{v}", f.poly),
        FeatureKind::Edge(e) => format!("P{}.e{e}", f.poly),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VertexRecord {
    pub theta: f64,
    pub phi: f64,
    pub z: f64,
    pub features: Vec<String>,
    pub depth: usize,
}

impl From<&ExtremalStabbingLine> for VertexRecord {
    fn from(l: &ExtremalStabbingLine) -> Self {
        VertexRecord {
            theta: l.coords.theta,
            phi: l.coords.phi,
            z: l.coords.z,
            features: l.features.iter().map(feature_name).collect(),
            depth: l.depth,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Counts {
    pub vertices: usize,
    pub arcs: usize,
    pub components: usize,
    pub permutations: usize,
    /// Vertices per depth.
    pub depth_histogram: BTreeMap<usize, usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub version: u32,
    pub command: String,
    /// Every option as given or defaulted.
    pub args: BTreeMap<String, String>,
    pub scene_digest: Option<String>,
    pub counts: Counts,
    pub vertices: Vec<VertexRecord>,
    #[serde(default)]
    pub permutations: Vec<Vec<usize>>,
    /// Seconds per phase. Excluded from [`Report::deterministic_json`].
    pub timings: BTreeMap<String, f64>,
    pub diagnostics: Vec<Diagnostic>,
    /// Command-specific payload.
    #[serde(default)]
    pub extra: serde_json::Value,
}

impl Report {
    pub fn new(command: &str, args: BTreeMap<String, String>) -> Report {
        Report {
            version: REPORT_VERSION,
            command: command.to_string(),
            args,
            scene_digest: None,
            counts: Counts::default(),
            vertices: Vec::new(),
            permutations: Vec::new(),
            timings: BTreeMap::new(),
            diagnostics: Vec::new(),
            extra: serde_json::Value::Null,
        }
    }

    pub fn with_scene(mut self, scene: &Scene) -> Report {
        self.scene_digest = Some(scene_digest(scene));
        self
    }

    /// Replaces the vertex records and their counts.
    pub fn set_vertices(&mut self, lines: &[ExtremalStabbingLine]) {
        self.vertices = lines.iter().map(VertexRecord::from).collect();
        self.counts.vertices = self.vertices.len();
        self.counts.depth_histogram.clear();
        for l in lines {
            *self.counts.depth_histogram.entry(l.depth).or_default() += 1;
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// The report without timings, for byte comparisons between runs.
    pub fn deterministic_json(&self) -> String {
        let mut r = self.clone();
        r.timings.clear();
        r.to_json()
    }

    pub fn from_json(text: &str) -> Result<Report> {
        serde_json::from_str(text).map_err(|e| Error::ParseError(e.to_string()))
    }
}

/// SHA-256 of the canonical scene file, hex encoded.
pub fn scene_digest(scene: &Scene) -> String {
    let hash = Sha256::digest(scene.to_json().as_bytes());
    hash.iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

/// Records of `a` without a partner in `b` (same features, coordinates
/// within `tol`) and of `b` without one in `a`.
pub fn compare_vertex_records<'a>(
    a: &'a [VertexRecord],
    b: &'a [VertexRecord],
    tol: f64,
) -> (Vec<&'a VertexRecord>, Vec<&'a VertexRecord>) {
    let close = |x: &VertexRecord, y: &VertexRecord| {
        x.features == y.features
            && (x.theta - y.theta).abs() <= tol
            && (x.phi - y.phi).abs() <= tol
            && (x.z - y.z).abs() <= tol * (1.0 + x.z.abs())
    };
    let missing = |x: &'a [VertexRecord], y: &'a [VertexRecord]| {
        x.iter().filter(|r| !y.iter().any(|s| close(r, s))).collect::<Vec<_>>()
    };
    (missing(a, b), missing(b, a))
}

fn label_name(l: &ArcLabel) -> String {
    match l {
        ArcLabel::Piece(PieceKind::Tangent { poly, edge }) => format!("tangent P{poly}.e{edge}"),
        ArcLabel::Piece(k) => format!("{k:?}"),
        ArcLabel::Surface { poly } => format!("surface P{poly}"),
        ArcLabel::Split { poly } => format!("split P{poly}"),
        ArcLabel::Index(i) => format!("arc {i}"),
    }
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 40.0;

/// Plot of a region: both envelopes sampled at `density` points per piece,
/// vertices as marks whose tooltip lists the arcs meeting there.
pub fn svg_string(region: &Region2D, density: usize) -> String {
    let density = density.max(2);
    let trace = |env: &Envelope| -> Vec<Vec<(f64, f64)>> {
        env.pieces
            .iter()
            .map(|p| {
                (0..density)
                    .map(|i| {
                        let t = p.lo + (p.hi - p.lo) * i as f64 / (density - 1) as f64;
                        (t, p.arc.at(t))
                    })
                    .filter(|(_, v)| v.is_finite())
                    .collect()
            })
            .collect()
    };
    let (lower, upper) = (trace(&region.lower), trace(&region.upper));
    let values = lower.iter().chain(&upper).flatten().map(|p| p.1).chain(region.vertices.iter().map(|v| v.value));
    let (mut vlo, mut vhi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !vlo.is_finite() {
        (vlo, vhi) = (0.0, 1.0);
    } else if vhi - vlo <= 1e-12 {
        (vlo, vhi) = (vlo - 1.0, vhi + 1.0);
    }
    let (tlo, thi) = if region.hi > region.lo { (region.lo, region.hi) } else { (region.lo, region.lo + 1.0) };
    let x = |t: f64| MARGIN + (t - tlo) / (thi - tlo) * (WIDTH - 2.0 * MARGIN);
    let y = |v: f64| HEIGHT - MARGIN - (v - vlo) / (vhi - vlo) * (HEIGHT - 2.0 * MARGIN);
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#);
    let _ = writeln!(
        s,
        r#"<g stroke="black" stroke-width="1"><line x1="{m}" y1="{b}" x2="{r}" y2="{b}"/><line x1="{m}" y1="{t}" x2="{m}" y2="{b}"/></g>"#,
        m = MARGIN,
        b = HEIGHT - MARGIN,
        r = WIDTH - MARGIN,
        t = MARGIN
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" font-size="12">theta [{tlo:.4}, {thi:.4}]</text><text x="4" y="{}" font-size="12">[{vlo:.4}, {vhi:.4}]</text>"#,
        WIDTH / 2.0 - 40.0,
        HEIGHT - 10.0,
        MARGIN - 10.0
    );
    for (curves, color, class) in [(&lower, "#1f77b4", "lower"), (&upper, "#d62728", "upper")] {
        for c in curves.iter().filter(|c| c.len() >= 2) {
            let pts: Vec<String> = c.iter().map(|&(t, v)| format!("{:.3},{:.3}", x(t), y(v))).collect();
            let _ = writeln!(s, r#"<polyline class="{class}" fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, pts.join(" "));
        }
    }
    for v in &region.vertices {
        let names: Vec<String> = v.labels.iter().map(label_name).collect();
        let _ = writeln!(
            s,
            r#"<circle class="vertex" cx="{:.3}" cy="{:.3}" r="3" fill="black" data-theta="{}" data-value="{}"><title>{:?}: {}</title></circle>"#,
            x(v.theta),
            y(v.value),
            v.theta,
            v.value,
            v.kind,
            names.join(", ")
        );
    }
    s.push_str("</svg>\n");
    s
}

pub fn emit_svg(region: &Region2D, path: impl AsRef<Path>, density: usize) -> Result<()> {
    std::fs::write(path, svg_string(region, density))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envelope::{sandwich, MonotoneArc};

    fn lens() -> Region2D {
        let lower = MonotoneArc::new(0, ArcLabel::Index(0), 0.0, 1.0, 2, |t| (t - 0.5) * (t - 0.5));
        let upper = MonotoneArc::new(1, ArcLabel::Index(1), 0.0, 1.0, 2, |_| 0.1);
        sandwich(&[lower], &[upper], 0.0, 1.0).unwrap()
    }

    #[test]
    fn empty_region_draws_axes_only() {
        let lower = MonotoneArc::new(0, ArcLabel::Index(0), 0.0, 1.0, 2, |_| 2.0);
        let upper = MonotoneArc::new(1, ArcLabel::Index(1), 0.0, 1.0, 2, |_| 1.0);
        let r = sandwich(&[lower], &[upper], 0.0, 1.0).unwrap();
        let svg = svg_string(&r, 16);
        assert!(svg.starts_with("<svg") && svg.contains("<line"));
        assert_eq!(svg.matches("class=\"vertex\"").count(), 0);
    }

    #[test]
    fn lens_has_two_marked_vertices() {
        let r = lens();
        let svg = svg_string(&r, 32);
        assert_eq!(svg.matches("class=\"vertex\"").count(), r.vertices.len());
        assert_eq!(r.vertices.iter().filter(|v| v.kind == crate::envelope::VertexKind::Pinch).count(), 2);
        for v in &r.vertices {
            assert!(svg.contains(&format!("data-theta=\"{}\"", v.theta)));
        }
    }

    #[test]
    fn report_round_trips() {
        let mut r = Report::new("through-line", BTreeMap::from([("eps".to_string(), "1e-9".to_string())]));
        r.timings.insert("total".into(), 0.5);
        let back = Report::from_json(&r.to_json()).unwrap();
        assert_eq!(back, r);
        assert!(!r.deterministic_json().contains("total"));
    }
}
