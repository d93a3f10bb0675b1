//! The `reeb-holo` command line: scene loading, subcommand dispatch and
//! report output.
//!
//! Exit codes: 0 success, 2 validation failure (bad input or a failed
//! check), 3 numerical ambiguity, 64 malformed flags.

use crate::contact_fields::{contact_field, verify_on_domain};
use crate::error::{Error, Result};
use crate::flow::{causality_map, format_word, inflow_grid, property_a_check};
use crate::geometry::{sample_interior, Point};
use crate::holography::{
    compatibility, extract_boundary_data, reconstruct_from_entry, trajectory_coordinates, BoundaryData,
    BoundaryDiffeo, CanonicalExtension, LyapunovMode,
};
use crate::invariants::compute_invariants;
use crate::legendrian::{
    concavity_criterion, isotropy, lift_shadow, shadow_beta_integral, shadow_project, LegendrianSpec,
};
use crate::nonsqueezing::{nonsqueezing_check, shadow_kappa, Embedding};
use crate::quadrature::QuadratureSpec;
use crate::report::{fmt_f64, write_csv, write_json};
use crate::scene::ContactScene;
use crate::scene_file::{parse_field, SceneFile};
use crate::selftest;
use crate::strata::{stratum_positivity_scan, trace_stratum_curves};
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Map, Value};
use std::ffi::OsString;
use std::path::{Path, PathBuf};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_AMBIGUOUS: i32 = 3;
pub const EXIT_USAGE: i32 = 64;

/// Caps the rayon worker pool.
pub const THREADS_ENV: &str = "REEB_HOLO_THREADS";

#[derive(Parser, Debug)]
#[command(name = "reeb-holo", version, about = "Reeb flows, boundary strata, invariants and holography of contact domains")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// Scene JSON file.
    #[arg(long, global = true)]
    scene: Option<PathBuf>,
    /// Quadrature spec JSON file.
    #[arg(long, global = true)]
    spec: Option<PathBuf>,
    /// Grid size: cells per chart axis, samples or curve resolution.
    #[arg(long, global = true)]
    grid: Option<usize>,
    /// Seed for sampled points and Monte Carlo estimates
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file; reports go to stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Tolerance of the subcommand's own checks.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Do not sample the contact condition when loading scenes.
    #[arg(long, global = true)]
    skip_check: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Causality map on an inflow grid (CSV when --out ends in .csv).
    Causality,
    /// Tangency strata: ∂_2 curves, positivity scans, Property A.
    Strata,
    /// Volumes, κ_j, κ_j^+, Reeb diameter and average length.
    Invariants,
    /// Contact vector fields of a Hamiltonian on interior samples.
    ContactField {
        #[arg(long, default_value = "builtin:sphere")]
        h: String,
    },
    /// Boundary data, reconstruction round trips and canonical extensions.
    Reconstruct {
        /// Boundary data JSON; extracted from the scene when omitted.
        #[arg(long)]
        bdata: Option<PathBuf>,
        /// identity or rotation:θ
        #[arg(long, default_value = "identity")]
        map: String,
        /// CSV of probe points; seeded interior samples when omitted.
        #[arg(long)]
        probe: Option<PathBuf>,
        /// exact-z or chord-midpoint
        #[arg(long)]
        mode: Option<String>,
        /// Also write the boundary data used.
        #[arg(long)]
        save_bdata: Option<PathBuf>,
    },
    /// Shadow of a Legendrian patch on ∂_1^+X.
    Shadow {
        #[arg(long)]
        legendrian: PathBuf,
    },
    /// Lift of a curve on ∂_1^+X along the Reeb flow.
    Lift {
        #[arg(long)]
        legendrian: PathBuf,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        s0: f64,
    },
    /// Complexity and non-squeezing slacks of an embedding.
    Squeeze {
        /// Scene embedded into the target
        #[arg(long)]
        source: PathBuf,
        #[arg(long)]
        target: PathBuf,
        /// identity, z-translate:c, translate:c0,… or scale:λ,μ
        #[arg(long, default_value = "identity")]
        map: String,
        /// Also compare κ_1^+ with its projection onto the target.
        #[arg(long)]
        kappa: bool,
    },
    /// The acceptance criteria.
    Selftest {
        /// Comma-separated criterion numbers.
        #[arg(long, value_delimiter = ',')]
        only: Vec<usize>,
    },
}

/// Parses `argv` (program name first), runs the subcommand and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return code;
        }
    };
    init_threads();
    match dispatch(&cli) {
        Ok(true) => EXIT_OK,
        Ok(false) => EXIT_VALIDATION,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    if e.is_ambiguity() {
        EXIT_AMBIGUOUS
    } else {
        EXIT_VALIDATION
    }
}

fn init_threads() {
    if let Some(n) = std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse::<usize>().ok()) {
        if n > 0 {
            // Fails only if a pool already exists, which is harmless.
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

struct Loaded {
    file: SceneFile,
    scene: ContactScene,
}

impl Common {
    fn load(&self, path: Option<&Path>) -> Result<Loaded> {
        let path = path.ok_or_else(|| Error::Invalid("--scene is required".into()))?;
        let file = SceneFile::load(path)?;
        let scene = file.build(self.skip_check)?;
        Ok(Loaded { file, scene })
    }

    fn scene(&self) -> Result<Loaded> {
        self.load(self.scene.as_deref())
    }

    fn seed(&self, file: &SceneFile) -> u64 {
        self.seed.or(file.seed).unwrap_or(1)
    }

    /// --spec, else the scene's quadrature block, else defaults; --tol and
    /// --seed override.
    fn quadrature(&self, file: &SceneFile) -> Result<QuadratureSpec> {
        let mut q = match &self.spec {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| Error::Invalid(format!("cannot read spec {}: {e}", p.display())))?;
                serde_json::from_str(&text)?
            }
            None => file.quadrature.clone().unwrap_or_default(),
        };
        if let Some(t) = self.tol {
            q.rel_tol = t;
        }
        if let Some(s) = self.seed {
            q.seed = s;
        }
        q.validate()?;
        Ok(q)
    }

    fn emit<T: Serialize>(&self, command: &str, scene: Option<&SceneFile>, report: &T) -> Result<()> {
        let mut env = Map::new();
        env.insert("command".into(), json!(command));
        if let Some(s) = scene {
            env.insert("scene".into(), serde_json::to_value(s)?);
        }
        env.insert("report".into(), serde_json::to_value(report)?);
        write_json(&Value::Object(env), self.out.as_deref())
    }

    fn csv_out(&self) -> Option<&Path> {
        self.out.as_deref().filter(|p| p.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")))
    }
}

fn dispatch(cli: &Cli) -> Result<bool> {
    let c = &cli.common;
    match &cli.command {
        Command::Causality => causality(c),
        Command::Strata => strata(c),
        Command::Invariants => invariants(c),
        Command::ContactField { h } => contact_fields(c, h),
        Command::Reconstruct { bdata, map, probe, mode, save_bdata } => {
            reconstruct(c, bdata.as_deref(), map, probe.as_deref(), mode.as_deref(), save_bdata.as_deref())
        }
        Command::Shadow { legendrian } => shadow(c, legendrian),
        Command::Lift { legendrian, s0 } => lift(c, legendrian, *s0),
        Command::Squeeze { source, target, map, kappa } => squeeze(c, source, target, map, *kappa),
        Command::Selftest { only } => run_selftest(c, only),
    }
}

fn join(v: &[f64]) -> Vec<String> {
    v.iter().map(|x| fmt_f64(*x)).collect()
}

fn causality(c: &Common) -> Result<bool> {
    let l = c.scene()?;
    let grid = c.grid.unwrap_or(32);
    let samples = inflow_grid(&l.scene, grid, None)?;
    let mut pairs = Vec::with_capacity(samples.len());
    for s in &samples {
        pairs.push((s, causality_map(&l.scene, &Point::from_column_slice(&s.point))?));
    }
    let prop_a = property_a_check(&l.scene, grid.min(16), c.seed(&l.file))?;
    if let Some(path) = c.csv_out() {
        let d = l.scene.dim();
        let k = samples.first().map_or(0, |s| s.u.len());
        let mut header = vec!["chart".to_string()];
        header.extend((0..k).map(|i| format!("u{i}")));
        header.extend((0..d).map(|i| format!("x_plus_{i}")));
        header.extend((0..d).map(|i| format!("x_minus_{i}")));
        header.extend(["chord_time".to_string(), "word".to_string()]);
        let rows: Vec<Vec<String>> = pairs
            .iter()
            .map(|(s, p)| {
                let mut r = vec![s.chart.to_string()];
                r.extend(join(&s.u));
                r.extend(join(&p.x_plus));
                r.extend(join(&p.x_minus));
                r.push(fmt_f64(p.chord_time));
                r.push(format_word(&p.word));
                r
            })
            .collect();
        write_csv(path, &header, &rows)?;
        let summary = json!({ "pairs": pairs.len(), "csv": path.display().to_string(), "property_a": prop_a });
        write_json(&json!({ "command": "causality", "report": summary }), None)?;
    } else {
        let list: Vec<Value> = pairs
            .iter()
            .map(|(s, p)| json!({ "chart": s.chart, "u": s.u, "pair": p }))
            .collect();
        c.emit("causality", Some(&l.file), &json!({ "grid": grid, "pairs": list, "property_a": prop_a }))?;
    }
    Ok(true)
}

fn strata(c: &Common) -> Result<bool> {
    let l = c.scene()?;
    let n = l.scene.n();
    let mut report = Map::new();
    if n == 1 {
        report.insert("curves".into(), serde_json::to_value(trace_stratum_curves(&l.scene, c.grid.unwrap_or(64))?)?);
    }
    let samples = c.grid.map_or(2000, |g| g * g);
    let mut scans = Vec::new();
    for j in 1..=2 * n {
        scans.push(stratum_positivity_scan(&l.scene, j, samples)?);
    }
    report.insert("positivity".into(), serde_json::to_value(scans)?);
    report.insert("property_a".into(), serde_json::to_value(property_a_check(&l.scene, 12, c.seed(&l.file))?)?);
    c.emit("strata", Some(&l.file), &report)?;
    Ok(true)
}

fn invariants(c: &Common) -> Result<bool> {
    let l = c.scene()?;
    let q = c.quadrature(&l.file)?;
    let r = compute_invariants(&l.scene, &q)?;
    let mut m = match serde_json::to_value(&r)? {
        Value::Object(m) => m,
        _ => unreachable!("struct serializes to an object"),
    };
    m.remove("kappa");
    m.remove("kappa_plus");
    for (j, (k, kp)) in r.kappa.iter().zip(&r.kappa_plus).enumerate() {
        m.insert(format!("kappa_{}", j + 1), json!(k));
        m.insert(format!("kappa_plus_{}", j + 1), json!(kp));
    }
    m.insert("quadrature".into(), serde_json::to_value(&q)?);
    c.emit("invariants", Some(&l.file), &m)?;
    Ok(true)
}

fn contact_fields(c: &Common, h: &str) -> Result<bool> {
    let l = c.scene()?;
    let field = parse_field(h, l.scene.n())?;
    let count = c.grid.unwrap_or(200);
    let seed = c.seed(&l.file);
    let mut check = verify_on_domain(&l.scene.form, &field, &l.scene.domain, count, seed)?;
    if let Some(t) = c.tol {
        check.passed = check.equation < t && check.kernel < t;
    }
    if let Some(path) = c.csv_out() {
        let d = l.scene.dim();
        let mut header: Vec<String> = (0..d).map(|i| format!("p{i}")).collect();
        header.extend((0..d).map(|i| format!("w{i}")));
        header.extend((0..d).map(|i| format!("u{i}")));
        header.push("lambda".into());
        let mut rows = Vec::with_capacity(count);
        for p in sample_interior(&l.scene.domain, count, seed)? {
            let s = contact_field(&l.scene.form, &field, &p)?;
            let mut r = join(&s.point);
            r.extend(join(&s.w));
            r.extend(join(&s.u));
            r.push(fmt_f64(s.lambda));
            rows.push(r);
        }
        write_csv(path, &header, &rows)?;
        write_json(&json!({ "command": "contact-field", "h": h, "report": check }), None)?;
    } else {
        c.emit("contact-field", Some(&l.file), &json!({ "h": h, "residuals": check }))?;
    }
    Ok(check.passed)
}

fn read_probes(path: &Path, dim: usize) -> Result<Vec<Point>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).flexible(true).from_path(path)?;
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let vals: std::result::Result<Vec<f64>, _> = rec.iter().map(|s| s.trim().parse::<f64>()).collect();
        match vals {
            Ok(v) if v.len() == dim => out.push(Point::from_vec(v)),
            Ok(v) => return Err(Error::Invalid(format!("probe row has {} values, expected {dim}", v.len()))),
            // A header row.
            Err(_) if out.is_empty() => continue,
            Err(_) => return Err(Error::Invalid(format!("bad probe row {:?}", rec))),
        }
    }
    Ok(out)
}

#[derive(Serialize)]
struct ProbeRow {
    x: Vec<f64>,
    entry: Vec<f64>,
    f: f64,
    round_trip: f64,
    image: Option<Vec<f64>>,
}

fn reconstruct(
    c: &Common,
    bdata: Option<&Path>,
    map: &str,
    probe: Option<&Path>,
    mode: Option<&str>,
    save: Option<&Path>,
) -> Result<bool> {
    let l = c.scene()?;
    let s = &l.scene;
    let data: BoundaryData = match bdata {
        Some(p) => serde_json::from_str(&std::fs::read_to_string(p)?)?,
        None => {
            let mode = match mode {
                Some(m) => LyapunovMode::parse(m)?,
                None => LyapunovMode::for_scene(s),
            };
            extract_boundary_data(s, mode, c.grid.unwrap_or(16))?
        }
    };
    if let Some(p) = save {
        write_json(&data, Some(p))?;
    }
    let tol = c.tol.unwrap_or(1e-8);
    let diffeo = BoundaryDiffeo::parse(map, s.dim())?;
    let compat = compatibility(s, &data, &diffeo)?;
    let ext = if compat.passed { Some(CanonicalExtension::with_data(s, &data, diffeo)?) } else { None };
    let probes = match probe {
        Some(p) => read_probes(p, s.dim())?,
        None => sample_interior(&s.domain, 100, c.seed(&l.file))?,
    };
    let mut rows = Vec::with_capacity(probes.len());
    let mut worst: f64 = 0.0;
    for x in &probes {
        let (entry, f) = trajectory_coordinates(s, data.mode, x)?;
        let back = reconstruct_from_entry(s, data.mode, &entry, f)?;
        let err = (back - x).norm();
        worst = worst.max(err);
        let image = match &ext {
            Some(e) => Some(e.apply(x)?.iter().copied().collect()),
            None => None,
        };
        rows.push(ProbeRow { x: x.iter().copied().collect(), entry: entry.iter().copied().collect(), f, round_trip: err, image });
    }
    let passed = compat.passed && worst < tol;
    let report = json!({
        "mode": data.mode,
        "map": map,
        "records": data.records.len(),
        "monotonicity": data.monotonicity(),
        "compatibility": compat,
        "max_round_trip": worst,
        "passed": passed,
        "probes": rows,
    });
    c.emit("reconstruct", Some(&l.file), &report)?;
    Ok(passed)
}

fn load_patch(path: &Path) -> Result<crate::legendrian::Patch> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Invalid(format!("cannot read Legendrian {}: {e}", path.display())))?;
    serde_json::from_str::<LegendrianSpec>(&text)?.build()
}

fn shadow(c: &Common, legendrian: &Path) -> Result<bool> {
    let l = c.scene()?;
    let patch = load_patch(legendrian)?;
    let iso = isotropy(&l.scene, &patch);
    let sh = shadow_project(&l.scene, &patch)?;
    let mut report = Map::new();
    report.insert("isotropy".into(), serde_json::to_value(&iso)?);
    if patch.is_closed_curve() {
        report.insert("integral".into(), serde_json::to_value(shadow_beta_integral(&l.scene, &sh)?)?);
        report.insert("concavity".into(), serde_json::to_value(concavity_criterion(&l.scene, &patch)?)?);
    }
    report.insert("flagged_fraction".into(), json!(sh.flagged_fraction()));
    report.insert("shadow".into(), serde_json::to_value(&sh)?);
    c.emit("shadow", Some(&l.file), &report)?;
    Ok(iso.passed)
}

fn lift(c: &Common, legendrian: &Path, s0: f64) -> Result<bool> {
    let l = c.scene()?;
    let patch = load_patch(legendrian)?;
    let lifted = lift_shadow(&l.scene, &patch, s0)?;
    let passed = lifted.isotropy.passed;
    c.emit("lift", Some(&l.file), &lifted)?;
    Ok(passed)
}

fn squeeze(c: &Common, source: &Path, target: &Path, map: &str, kappa: bool) -> Result<bool> {
    let x = c.load(Some(source))?;
    let y = c.load(Some(target))?;
    let q = c.quadrature(&x.file)?;
    let emb = Embedding::parse(x.scene, y.scene, map)?;
    let r = nonsqueezing_check(&emb, &q, c.grid.unwrap_or(16))?;
    let mut passed = r.passed;
    let mut report = json!({ "embedding": r, "pullback_exact": emb.contact });
    if kappa {
        let k = shadow_kappa(&emb, 1, &q)?;
        passed &= k.rel_diff < 1e-2;
        report["kappa_plus_1"] = serde_json::to_value(k)?;
    }
    report["passed"] = json!(passed);
    let files = json!({ "source": x.file, "target": y.file });
    c.emit("squeeze", None, &json!({ "scenes": files, "result": report }))?;
    Ok(passed)
}

fn run_selftest(c: &Common, only: &[usize]) -> Result<bool> {
    let ids: Vec<usize> = if only.is_empty() { (1..=selftest::TITLES.len()).collect() } else { only.to_vec() };
    let mut results = Vec::with_capacity(ids.len());
    for id in ids {
        let r = selftest::run_criterion(id);
        println!("{}", r.line());
        results.push(r);
    }
    let passed = results.iter().all(|r| r.passed);
    if c.out.is_some() {
        c.emit("selftest", None, &json!({ "criteria": results, "passed": passed }))?;
    }
    Ok(passed)
}
