use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use linestab::engine::{
    compare_sets, extremal_lines_global, extremal_lines_in_plane, extremal_lines_through_line, pairwise_region,
    region_disjoint_case, region_through_line, region_unbounded_case, upper_envelope_eu, Mode,
};
use linestab::error::{Diagnostic, Error, Result};
use linestab::geometry::{Plane, Vec3, EPS};
use linestab::oracle::{brute_force_extremal_lines, grid_region_check};
use linestab::permutations::{check_labels, enumerate_permutations, label_bound, Labeler};
use linestab::report::{compare_vertex_records, emit_svg, Report};
use linestab::scenes::{
    gen_lower_bound_scene, gen_paraboloid_scene, gen_random_scene, general_position_audit, load_scene,
    paraboloid_richness, save_scene, Scene, SceneFlags,
};

#[derive(Parser)]
#[command(name = "linestab", version, about = "Line transversals of convex polyhedra through a pivot line")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Relative tolerance. Echoed in reports; predicates use the built-in value.
    #[arg(long, global = true, default_value_t = EPS)]
    eps: f64,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Oracle grid resolution per axis.
    #[arg(long, global = true, default_value_t = 50)]
    grid: usize,
    /// Directory for SVG plots of region pieces.
    #[arg(long, global = true)]
    svg_out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = CliMode::Structured)]
    mode: CliMode,
    /// Report path; stdout when absent.
    #[arg(long, short, global = true)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum CliMode {
    Structured,
    RandomizedDc,
}

impl CliMode {
    fn mode(self) -> Mode {
        match self {
            CliMode::Structured => Mode::Structured,
            CliMode::RandomizedDc => Mode::RandomizedDc,
        }
    }

    fn name(self) -> &'static str {
        match self {
            CliMode::Structured => "structured",
            CliMode::RandomizedDc => "randomized-dc",
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Region of lines through the pivot stabbing two bodies.
    Pairwise {
        scene: PathBuf,
        #[arg(long, default_value_t = 0)]
        p: usize,
        #[arg(long, default_value_t = 1)]
        q: usize,
    },
    /// Extremal stabbing lines through the pivot.
    ThroughLine { scene: PathBuf },
    /// Extremal stabbing lines through the pivot parallel to a plane.
    InPlane {
        scene: PathBuf,
        /// Plane normal `x,y,z`.
        #[arg(long, value_parser = parse_vec3)]
        normal: Vec3,
    },
    /// Vertices of the region of all transversals.
    Global { scene: PathBuf },
    /// Upper envelope of the lower tangency surfaces.
    Envelope { scene: PathBuf },
    /// Region for bodies disjoint from the pivot.
    Disjoint { scene: PathBuf },
    /// Region for bodies unbounded along the pivot.
    Unbounded { scene: PathBuf },
    /// Geometric permutations and their labels.
    Permutations {
        scene: PathBuf,
        /// Transversals sampled for the label check.
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
    },
    /// Brute-force vertices and grid membership against the engine; exits
    /// nonzero on disagreement.
    Oracle { scene: PathBuf },
    /// Writes a generated scene file.
    GenScene {
        #[command(subcommand)]
        kind: GenKind,
    },
    /// General-position audit.
    Audit { scene: PathBuf },
    /// Compares the vertex records of two reports; exits nonzero when they differ.
    Compare {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
}

#[derive(Subcommand)]
enum GenKind {
    LowerBound {
        #[arg(long, default_value_t = 3)]
        pairs: usize,
        #[arg(long, default_value_t = 12)]
        drum_facets: usize,
        #[arg(long)]
        scene_out: PathBuf,
    },
    Paraboloid {
        #[arg(long, default_value_t = 6)]
        k: usize,
        #[arg(long, default_value_t = 0.05)]
        offset: f64,
        #[arg(long)]
        scene_out: PathBuf,
    },
    Random {
        #[arg(long, default_value_t = 3)]
        k: usize,
        #[arg(long, default_value_t = 12)]
        n: usize,
        /// Half-width of the bounding cube centred at the origin.
        #[arg(long, default_value_t = 4.0)]
        extent: f64,
        #[arg(long)]
        disjoint: bool,
        #[arg(long)]
        pivot_disjoint: bool,
        #[arg(long)]
        unbounded: bool,
        #[arg(long)]
        scene_out: PathBuf,
    },
}

fn parse_vec3(s: &str) -> std::result::Result<Vec3, String> {
    let v: Vec<f64> = s.split(',').map(|x| x.trim().parse::<f64>().map_err(|e| e.to_string())).collect::<std::result::Result<_, _>>()?;
    match v.as_slice() {
        [x, y, z] => Ok(Vec3::new(*x, *y, *z)),
        _ => Err("expected three comma-separated numbers".into()),
    }
}

/// Outcome of a command: the report and whether it counts as success.
struct Outcome {
    report: Report,
    ok: bool,
}

fn args_of(common: &Common, extra: &[(&str, String)]) -> BTreeMap<String, String> {
    let mut m = BTreeMap::from([
        ("eps".to_string(), common.eps.to_string()),
        ("seed".to_string(), common.seed.to_string()),
        ("grid".to_string(), common.grid.to_string()),
        ("mode".to_string(), common.mode.name().to_string()),
    ]);
    if let Some(p) = &common.svg_out {
        m.insert("svg_out".into(), p.display().to_string());
    }
    m.extend(extra.iter().map(|(k, v)| (k.to_string(), v.clone())));
    m
}

fn load(path: &Path) -> Result<Scene> {
    load_scene(path)
}

fn write_pieces(dir: &Path, regions: &[&linestab::envelope::Region2D]) -> Result<usize> {
    std::fs::create_dir_all(dir)?;
    for (i, r) in regions.iter().enumerate() {
        emit_svg(r, dir.join(format!("piece_{i:04}.svg")), 64)?;
    }
    Ok(regions.len())
}

fn run(cli: &Cli) -> Result<Outcome> {
    let c = &cli.common;
    let t0 = Instant::now();
    let mut ok = true;
    let mut report = match &cli.command {
        Command::Pairwise { scene, p, q } => {
            let s = load(scene)?;
            let (bp, bq) = (s.polyhedra.get(*p), s.polyhedra.get(*q));
            let (Some(bp), Some(bq)) = (bp, bq) else {
                return Err(Error::InvalidInput(format!("no bodies {p} and {q}")));
            };
            let region = pairwise_region(&bp.clone().with_unbounded_dir(None), &bq.clone().with_unbounded_dir(None), &s.pivot)?;
            let mut r = Report::new("pairwise", args_of(c, &[("scene", scene.display().to_string()), ("p", p.to_string()), ("q", q.to_string())])).with_scene(&s);
            r.set_vertices(&region.vertices);
            r.diagnostics = region.diagnostics;
            r
        }
        Command::ThroughLine { scene } => {
            let s = load(scene)?;
            let mut r = Report::new("through-line", args_of(c, &[("scene", scene.display().to_string())])).with_scene(&s);
            r.set_vertices(&extremal_lines_through_line(&s, c.mode.mode())?);
            if let Some(dir) = &c.svg_out {
                let region = region_through_line(&s)?;
                let pieces: Vec<_> = region.pieces.iter().map(|p| &p.region).collect();
                r.counts.arcs = region.pieces.iter().map(|p| p.region.lower.pieces.len() + p.region.upper.pieces.len()).sum();
                r.counts.components = region.component_count();
                r.extra = json!({ "svg_files": write_pieces(dir, &pieces)? });
                r.diagnostics = region.diagnostics;
            }
            r
        }
        Command::InPlane { scene, normal } => {
            let s = load(scene)?;
            let pivot = s.pivot_frame();
            let h = Plane::through(&pivot.origin, *normal);
            let mut r = Report::new("in-plane", args_of(c, &[("scene", scene.display().to_string()), ("normal", format!("{},{},{}", normal.x, normal.y, normal.z))])).with_scene(&s);
            r.set_vertices(&extremal_lines_in_plane(&s, &h)?);
            r
        }
        Command::Global { scene } => {
            let s = load(scene)?;
            let mut r = Report::new("global", args_of(c, &[("scene", scene.display().to_string())])).with_scene(&s);
            r.set_vertices(&extremal_lines_global(&s)?);
            r
        }
        Command::Envelope { scene } => {
            let s = load(scene)?;
            let env = upper_envelope_eu(&s)?;
            let mut r = Report::new("envelope", args_of(c, &[("scene", scene.display().to_string())])).with_scene(&s);
            r.set_vertices(&env.vertices);
            let n = c.grid.max(2);
            let mut samples = Vec::new();
            for i in 0..n {
                for j in 0..n {
                    let theta = std::f64::consts::PI * (i as f64 + 0.5) / n as f64;
                    let phi = std::f64::consts::PI * (j as f64 + 0.5) / n as f64;
                    if let Some((z, top)) = env.eval(theta, phi) {
                        samples.push(json!([theta, phi, z, top]));
                    }
                }
            }
            r.extra = json!({ "samples": samples });
            r.diagnostics = env.diagnostics;
            r
        }
        Command::Disjoint { scene } => {
            let s = load(scene)?;
            let region = region_disjoint_case(&s)?;
            let mut r = Report::new("disjoint", args_of(c, &[("scene", scene.display().to_string())])).with_scene(&s);
            r.set_vertices(&region.vertices);
            r.diagnostics = region.diagnostics;
            r
        }
        Command::Unbounded { scene } => {
            let s = load(scene)?;
            let region = region_unbounded_case(&s)?;
            let mut r = Report::new("unbounded", args_of(c, &[("scene", scene.display().to_string())])).with_scene(&s);
            r.set_vertices(&region.vertices);
            r.counts.components = region.component_count();
            r.diagnostics = region.diagnostics;
            r
        }
        Command::Permutations { scene, samples } => {
            let s = load(scene)?;
            let labeler = Labeler::new(&s)?;
            let perms = enumerate_permutations(&s)?;
            let check = check_labels(&s, *samples, c.seed)?;
            let mut r = Report::new("permutations", args_of(c, &[("scene", scene.display().to_string()), ("samples", samples.to_string())])).with_scene(&s);
            r.counts.permutations = perms.len();
            r.permutations = perms.iter().map(|p| p.order.clone()).collect();
            r.extra = json!({
                "pivot_positions": perms.iter().map(|p| p.pivot_position).collect::<Vec<_>>(),
                "wedges": labeler.wedge_count(),
                "intervals": labeler.interval_count(),
                "label_bound": label_bound(s.k()),
                "label_check": check,
            });
            r.diagnostics = labeler.diagnostics;
            ok = check.conflicts == 0;
            r
        }
        Command::Oracle { scene } => {
            let s = load(scene)?;
            let oracle = brute_force_extremal_lines(&s)?;
            let engine = extremal_lines_through_line(&s, c.mode.mode())?;
            let (extra, missing) = compare_sets(&engine, &oracle, s.scale());
            let region = region_through_line(&s)?;
            let grid = grid_region_check(&s, [c.grid; 3], Some(&region))?;
            let band = 1e-6 * s.scale();
            let outside_band = grid.disagreements.iter().filter(|d| d.band > band).count();
            let mut r = Report::new("oracle", args_of(c, &[("scene", scene.display().to_string())])).with_scene(&s);
            r.set_vertices(&oracle);
            r.extra = json!({
                "engine_vertices": engine.len(),
                "engine_only": extra.len(),
                "oracle_only": missing.len(),
                "grid_points": grid.points,
                "grid_transversals": grid.transversals,
                "grid_disagreements": grid.disagreements.len(),
                "grid_disagreements_outside_band": outside_band,
            });
            ok = extra.is_empty() && missing.is_empty() && outside_band == 0;
            r
        }
        Command::GenScene { kind } => {
            let (name, s, path, mut extra) = match kind {
                GenKind::LowerBound { pairs, drum_facets, scene_out } => {
                    ("lower-bound", gen_lower_bound_scene(*pairs, *drum_facets, c.seed)?, scene_out, vec![("pairs", pairs.to_string()), ("drum_facets", drum_facets.to_string())])
                }
                GenKind::Paraboloid { k, offset, scene_out } => {
                    ("paraboloid", gen_paraboloid_scene(*k, *offset, c.seed)?, scene_out, vec![("k", k.to_string()), ("offset", offset.to_string())])
                }
                GenKind::Random { k, n, extent, disjoint, pivot_disjoint, unbounded, scene_out } => {
                    let flags = SceneFlags { pairwise_disjoint: *disjoint, pivot_disjoint: *pivot_disjoint, unbounded_parallel: *unbounded };
                    let bbox = (Vec3::repeat(-extent), Vec3::repeat(*extent));
                    ("random", gen_random_scene(*k, *n, bbox, c.seed, flags)?, scene_out, vec![("k", k.to_string()), ("n", n.to_string())])
                }
            };
            save_scene(&s, path)?;
            extra.push(("kind", name.to_string()));
            extra.push(("scene_out", path.display().to_string()));
            let mut r = Report::new("gen-scene", args_of(c, &extra)).with_scene(&s);
            let audit = general_position_audit(&s);
            r.diagnostics = audit.issues.clone();
            let mut payload = json!({ "k": s.k(), "n": s.n(), "audit_passed": audit.passed() });
            if name == "paraboloid" {
                payload["richness"] = match paraboloid_richness(&s) {
                    Ok(()) => json!("ok"),
                    Err(d) => json!(d),
                };
            }
            r.extra = payload;
            r
        }
        Command::Audit { scene } => {
            let s = load(scene)?;
            let audit = general_position_audit(&s);
            let mut r = Report::new("audit", args_of(c, &[("scene", scene.display().to_string())])).with_scene(&s);
            r.extra = json!({ "passed": audit.passed(), "notes": audit.notes });
            r.diagnostics = audit.issues;
            ok = r.diagnostics.is_empty();
            r
        }
        Command::Compare { a, b, tol } => {
            let ra = Report::from_json(&std::fs::read_to_string(a)?)?;
            let rb = Report::from_json(&std::fs::read_to_string(b)?)?;
            let (only_a, only_b) = compare_vertex_records(&ra.vertices, &rb.vertices, *tol);
            let mut r = Report::new("compare", args_of(c, &[("a", a.display().to_string()), ("b", b.display().to_string()), ("tol", tol.to_string())]));
            r.extra = json!({ "only_a": only_a, "only_b": only_b });
            ok = only_a.is_empty() && only_b.is_empty();
            r
        }
    };
    if c.eps != EPS {
        report.diagnostics.push(Diagnostic::new("eps_not_applied", format!("predicates use the built-in tolerance {EPS}; --eps {} is only recorded", c.eps)));
    }
    report.timings.insert("total".into(), t0.elapsed().as_secs_f64());
    Ok(Outcome { report, ok })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(Outcome { report, ok }) => {
            let text = report.to_json();
            match &cli.common.out {
                Some(p) => {
                    if let Err(e) = std::fs::write(p, text) {
                        return fail(&Error::from(e));
                    }
                }
                None => print!("{text}"),
            }
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => fail(&e),
    }
}

fn fail(e: &Error) -> ExitCode {
    let payload = json!({ "version": linestab::report::REPORT_VERSION, "error": { "code": e.code(), "message": e.to_string() } });
    eprintln!("{payload}");
    ExitCode::from(2)
}
