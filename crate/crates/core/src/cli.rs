//! Command-line driver.
//!
//! Every command resolves a [`RunConfig`] (config file first, then flags),
//! runs one pipeline and prints a JSON report that embeds the resolved
//! config. Exit codes: 0 success, 2 a hypothesis check completed with a
//! negative outcome, 1 computational error, 64 configuration error.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::ball::{largest_empty_ball, smallest_enclosing_ball, BallConfig, BallObjective};
use crate::beltrami::blowup_study;
use crate::error::{Error, Result};
use crate::gallery::{chart_from_spec, parse_angle, parse_coords};
use crate::gauss_map::{DegreeOptions, GaussMapContext};
use crate::immersion::{default_resolution, fmt17, ImmersionChart};
use crate::quotient::{check_corollary, check_theorem2, mesh_set_from_spec, IsometryGroup, QuotientConfig};
use crate::rigidity::{check_theorem1, check_variation, sharpness_scan, RigidityConfig, RigidityReport, SharpnessConfig, TheoremId};
use crate::sphere::SpherePoint;

pub const REPORT_VERSION: &str = "1";

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_HYPOTHESIS_FAILED: i32 = 2;
pub const EXIT_CONFIG: i32 = 64;

#[derive(Parser, Debug)]
#[command(name = "hyperrig", version, about = "Curvature rigidity checks for sampled hypersurfaces of spheres and spherical space forms")]
struct Cli {
    /// Flat `key = value` config file; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a theorem check on a chart.
    Analyze(Flags),
    /// Describe a gallery chart (or list the chart kinds).
    Gallery(Flags),
    /// Smallest enclosing or largest empty ball of a chart's samples.
    Ball(Flags),
    /// Degree of the transport Gauss map at a basepoint.
    Degree(Flags),
    /// Curvature of Beltrami-deformed copies of a chart.
    BeltramiStudy(Flags),
    /// Quotient check for a group-invariant mesh set.
    QuotientCheck(Flags),
    /// Clifford-torus scan of the weakened curvature condition.
    Sharpness(Flags),
}

#[derive(Args, Debug, Default)]
struct Flags {
    /// Chart, e.g. `sphere:rho=pi/6`, `clifford:r=0.6,j=1,k=2`, `latitude:c=5pi/12`.
    #[arg(long)]
    chart: Option<String>,
    /// t1, t2, t3 or corollary.
    #[arg(long)]
    theorem: Option<String>,
    /// Cells per axis, one value or comma separated.
    #[arg(long)]
    resolution: Option<String>,
    /// Basepoint coordinates, comma or semicolon separated.
    #[arg(long)]
    p0: Option<String>,
    /// Group by name: `antipodal:dim=4`, `lens:k=5,q=2`, `cyclic:k=3`.
    #[arg(long)]
    group: Option<String>,
    /// JSON list of orthogonal matrices, identity first.
    #[arg(long)]
    group_file: Option<PathBuf>,
    /// Sharpness test curvature level (default 0.3)
    #[arg(long)]
    epsilon: Option<String>,
    /// Comma-separated deformation parameters, e.g. `1,1/2,1/4,1/8`.
    #[arg(long)]
    t_list: Option<String>,
    /// enclosing or empty.
    #[arg(long)]
    objective: Option<String>,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write a CSV dump (mesh or table) here.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Seed for ball multistarts
    #[arg(long)]
    seed: Option<u64>,
    /// Run the brute-force ball oracle.
    #[arg(long)]
    oracle: bool,
}

/// Fully resolved settings, embedded in every report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: String,
    pub chart: Option<String>,
    pub theorem: Option<String>,
    pub resolution: Option<Vec<usize>>,
    pub p0: Option<Vec<f64>>,
    pub group: Option<String>,
    pub group_file: Option<String>,
    pub epsilon: Option<f64>,
    pub t_list: Option<Vec<f64>>,
    pub objective: Option<String>,
    pub out: Option<String>,
    pub csv: Option<String>,
    pub seed: u64,
    pub ball: BallConfig,
    pub degree: DegreeOptions,
    pub quotient: QuotientConfig,
    pub sharpness_decision_tol: f64,
    pub sharpness_r_grid: Vec<f64>,
}

impl RunConfig {
    pub fn new(command: &str) -> Self {
        let sharp = SharpnessConfig::default();
        RunConfig {
            command: command.to_string(),
            chart: None,
            theorem: None,
            resolution: None,
            p0: None,
            group: None,
            group_file: None,
            epsilon: None,
            t_list: None,
            objective: None,
            out: None,
            csv: None,
            seed: 0,
            ball: BallConfig::default(),
            degree: DegreeOptions::default(),
            quotient: QuotientConfig::default(),
            sharpness_decision_tol: sharp.decision_tol,
            sharpness_r_grid: sharp.r_grid,
        }
    }

    /// Applies one `key = value` pair; unknown keys are rejected.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        let real = |v: &str| parse_angle(v);
        let int = |v: &str| v.parse::<usize>().map_err(|_| Error::Config(format!("{key}: expected an integer, got '{v}'")));
        let list = |v: &str| v.split(',').filter(|s| !s.trim().is_empty()).map(|s| parse_angle(s.trim())).collect::<Result<Vec<f64>>>();
        match key.trim() {
            "chart" => self.chart = Some(v.to_string()),
            "theorem" => self.theorem = Some(v.to_string()),
            "resolution" => self.resolution = Some(v.split(',').map(|s| int(s.trim())).collect::<Result<_>>()?),
            "p0" => self.p0 = Some(parse_coords(v)?),
            "group" => self.group = Some(v.to_string()),
            "group_file" => self.group_file = Some(v.to_string()),
            "epsilon" => self.epsilon = Some(real(v)?),
            "t_list" => self.t_list = Some(list(v)?),
            "objective" => self.objective = Some(v.to_string()),
            "out" => self.out = Some(v.to_string()),
            "csv" => self.csv = Some(v.to_string()),
            "seed" | "ball.seed" => {
                self.seed = v.parse().map_err(|_| Error::Config(format!("{key}: expected an integer")))?;
                self.ball.seed = self.seed;
            }
            "oracle" | "ball.oracle" => {
                self.ball.oracle = v.parse().map_err(|_| Error::Config(format!("{key}: expected true or false")))?
            }
            "ball.multistarts" => self.ball.multistarts = int(v)?,
            "ball.max_iters" => self.ball.max_iters = int(v)?,
            "ball.oracle_density" => self.ball.oracle_density = int(v)?,
            "ball.step" => self.ball.step = real(v)?,
            "ball.tie_tol" => self.ball.tie_tol = real(v)?,
            "ball.move_tol" => self.ball.move_tol = real(v)?,
            "degree.singular_tol" => self.degree.singular_tol = real(v)?,
            "degree.residual_tol" => self.degree.residual_tol = real(v)?,
            "quotient.mesh_tol" => self.quotient.mesh_tol = real(v)?,
            "quotient.link_tol" => self.quotient.link_tol = real(v)?,
            "quotient.boundary_density" => self.quotient.boundary_density = int(v)?,
            "sharpness.decision_tol" => self.sharpness_decision_tol = real(v)?,
            "sharpness.r_grid" => self.sharpness_r_grid = list(v)?,
            other => return Err(Error::Config(format!("unknown config key '{other}'"))),
        }
        self.quotient.degree = self.degree;
        Ok(())
    }

    /// Parses a flat `key = value` file (`#` comments, blank lines ignored).
    pub fn apply_file(&mut self, text: &str) -> Result<()> {
        for (no, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("config line {}: expected key = value", no + 1)))?;
            self.set(k, v)?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("ball.step", self.ball.step),
            ("ball.tie_tol", self.ball.tie_tol),
            ("ball.move_tol", self.ball.move_tol),
            ("degree.singular_tol", self.degree.singular_tol),
            ("degree.residual_tol", self.degree.residual_tol),
            ("quotient.mesh_tol", self.quotient.mesh_tol),
            ("quotient.link_tol", self.quotient.link_tol),
            ("sharpness.decision_tol", self.sharpness_decision_tol),
        ];
        for (k, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{k} must be positive, got {v}")));
            }
        }
        if let Some(e) = self.epsilon {
            if !(e > 0.0) {
                return Err(Error::Config(format!("epsilon must be positive, got {e}")));
            }
        }
        if self.ball.multistarts == 0 || self.ball.max_iters == 0 {
            return Err(Error::Config("ball.multistarts and ball.max_iters must be positive".into()));
        }
        if let Some(r) = &self.resolution {
            if r.is_empty() || r.iter().any(|&x| x < 8) {
                return Err(Error::Config("resolution entries must be at least 8".into()));
            }
        }
        Ok(())
    }

    fn apply_flags(&mut self, f: &Flags) -> Result<()> {
        let pairs: [(&str, Option<String>); 10] = [
            ("chart", f.chart.clone()),
            ("theorem", f.theorem.clone()),
            ("resolution", f.resolution.clone()),
            ("p0", f.p0.clone()),
            ("group", f.group.clone()),
            ("group_file", f.group_file.as_ref().map(|p| p.display().to_string())),
            ("epsilon", f.epsilon.clone()),
            ("t_list", f.t_list.clone()),
            ("objective", f.objective.clone()),
            ("seed", f.seed.map(|s| s.to_string())),
        ];
        for (k, v) in pairs {
            if let Some(v) = v {
                self.set(k, &v)?;
            }
        }
        if let Some(p) = &f.out {
            self.out = Some(p.display().to_string());
        }
        if let Some(p) = &f.csv {
            self.csv = Some(p.display().to_string());
        }
        if f.oracle {
            self.ball.oracle = true;
        }
        Ok(())
    }
}

struct Outcome {
    report: Value,
    exit: i32,
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(args, &mut stdout.lock(), &mut stderr.lock())
}

pub fn run_with<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = if e.use_stderr() { write!(err, "{e}") } else { write!(out, "{e}") };
            return code;
        }
    };
    let (name, flags) = match &cli.command {
        Command::Analyze(f) => ("analyze", f),
        Command::Gallery(f) => ("gallery", f),
        Command::Ball(f) => ("ball", f),
        Command::Degree(f) => ("degree", f),
        Command::BeltramiStudy(f) => ("beltrami-study", f),
        Command::QuotientCheck(f) => ("quotient-check", f),
        Command::Sharpness(f) => ("sharpness", f),
    };
    let resolved = (|| {
        let mut cfg = RunConfig::new(name);
        if let Some(path) = &cli.config {
            let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            cfg.apply_file(&text)?;
        }
        cfg.apply_flags(flags)?;
        cfg.validate()?;
        Ok::<_, Error>(cfg)
    })();
    let cfg = match resolved {
        Ok(c) => c,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return exit_code(&e);
        }
    };
    match execute(&cfg).and_then(|o| emit(&cfg, o, out)) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::InvalidGroup { .. } | Error::TrivialGroup => EXIT_CONFIG,
        _ => EXIT_ERROR,
    }
}

fn emit(cfg: &RunConfig, outcome: Outcome, out: &mut dyn Write) -> Result<i32> {
    let mut doc = serde_json::Map::new();
    doc.insert("report_version".into(), json!(REPORT_VERSION));
    doc.insert("command".into(), json!(cfg.command));
    doc.insert("config".into(), serde_json::to_value(cfg).map_err(|e| Error::Io(e.to_string()))?);
    match outcome.report {
        Value::Object(m) => doc.extend(m),
        other => {
            doc.insert("result".into(), other);
        }
    }
    let text = serde_json::to_string_pretty(&Value::Object(doc)).map_err(|e| Error::Io(e.to_string()))? + "\n";
    match &cfg.out {
        Some(path) => std::fs::write(path, text)?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(outcome.exit)
}

fn need_chart(cfg: &RunConfig) -> Result<&str> {
    cfg.chart.as_deref().ok_or_else(|| Error::Config(format!("{} needs --chart", cfg.command)))
}

fn resolution_for(cfg: &RunConfig, chart: &ImmersionChart) -> Result<Vec<usize>> {
    let n = chart.param_dim();
    match &cfg.resolution {
        None => Ok(default_resolution(n)),
        Some(r) if r.len() == 1 => Ok(vec![r[0]; n]),
        Some(r) if r.len() == n => Ok(r.clone()),
        Some(r) => Err(Error::Config(format!("resolution has {} entries, chart has {n} parameters", r.len()))),
    }
}

fn p0_for(cfg: &RunConfig, dim: usize) -> Result<Option<SpherePoint>> {
    match &cfg.p0 {
        None => Ok(None),
        Some(c) if c.len() != dim => Err(Error::Config(format!("p0 has {} coordinates, expected {dim}", c.len()))),
        Some(c) => SpherePoint::from_slice(c).map(Some).map_err(|e| Error::Config(format!("p0: {e}"))),
    }
}

fn rigidity_config(cfg: &RunConfig, p0: Option<SpherePoint>) -> RigidityConfig {
    RigidityConfig { ball: cfg.ball.clone(), p0, degree: cfg.degree }
}

fn to_value<T: Serialize>(v: &T) -> Result<Value> {
    serde_json::to_value(v).map_err(|e| Error::Io(e.to_string()))
}

fn write_csv(cfg: &RunConfig, f: impl FnOnce(&mut std::io::BufWriter<std::fs::File>) -> Result<()>) -> Result<()> {
    if let Some(path) = &cfg.csv {
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        f(&mut w)?;
        w.flush()?;
    }
    Ok(())
}

fn report_outcome(report: &RigidityReport) -> Result<Outcome> {
    let exit = if report.hypothesis_holds && !report.falsification { EXIT_OK } else { EXIT_HYPOTHESIS_FAILED };
    Ok(Outcome { report: to_value(report)?, exit })
}

fn execute(cfg: &RunConfig) -> Result<Outcome> {
    match cfg.command.as_str() {
        "analyze" => analyze(cfg),
        "gallery" => gallery(cfg),
        "ball" => ball(cfg),
        "degree" => degree(cfg),
        "beltrami-study" => beltrami(cfg),
        "quotient-check" => quotient(cfg),
        "sharpness" => sharpness(cfg),
        other => Err(Error::Config(format!("unknown command '{other}'"))),
    }
}

fn analyze(cfg: &RunConfig) -> Result<Outcome> {
    let theorem: TheoremId = cfg.theorem.as_deref().unwrap_or("t1").parse()?;
    if matches!(theorem, TheoremId::T2 | TheoremId::Corollary) {
        return quotient(cfg);
    }
    let chart = chart_from_spec(need_chart(cfg)?)?;
    let mesh = chart.sample_mesh(&resolution_for(cfg, &chart)?)?;
    let p0 = p0_for(cfg, chart.ambient_dim())?;
    let report = match theorem {
        TheoremId::T1 => check_theorem1(&mesh, &rigidity_config(cfg, p0))?,
        _ => {
            let p0 = p0.unwrap_or_else(|| SpherePoint::north_pole(chart.ambient_dim()));
            check_variation(&mesh, &p0, &rigidity_config(cfg, None))?
        }
    };
    write_csv(cfg, |w| mesh.write_csv(w))?;
    report_outcome(&report)
}

const GALLERY_KINDS: [(&str, &str); 5] = [
    ("sphere", "sphere:rho=pi/6[,n=2][,center=x;y;z;w]"),
    ("equator", "equator[:n=2]"),
    ("clifford", "clifford:r=0.6[,j=1,k=1]"),
    ("cartan", "cartan:theta=pi/12"),
    ("off-pole", "off-pole[:rho=pi/4,tilt=pi/8,n=2]"),
];

fn gallery(cfg: &RunConfig) -> Result<Outcome> {
    let Some(spec) = cfg.chart.as_deref() else {
        let kinds: BTreeMap<&str, &str> = GALLERY_KINDS.iter().cloned().collect();
        return Ok(Outcome { report: json!({ "kinds": kinds }), exit: EXIT_OK });
    };
    let chart = chart_from_spec(spec)?;
    let res = resolution_for(cfg, &chart)?;
    let mesh = chart.sample_mesh(&res)?;
    let seam_gap = chart.check_seams(16).err().map(|e| e.to_string());
    let n = chart.param_dim();
    let mut mean = vec![0.0; n];
    for s in &mesh.samples {
        for (m, k) in mean.iter_mut().zip(&s.principal_curvatures) {
            *m += k / mesh.len() as f64;
        }
    }
    write_csv(cfg, |w| mesh.write_csv(w))?;
    Ok(Outcome {
        report: json!({
            "chart": chart.info(),
            "param_dim": n,
            "ambient_dim": chart.ambient_dim(),
            "orientation_sign": chart.orientation_sign(),
            "resolution": res,
            "samples": mesh.len(),
            "total_area": mesh.total_area,
            "mean_curvatures": mean,
            "min_abs_curvature": mesh.min_abs_curvature(),
            "max_abs_curvature": mesh.max_abs_curvature(),
            "max_shape_asymmetry": mesh.max_asymmetry(),
            "max_spacing": mesh.max_spacing(),
            "orientation_defects": mesh.orientation_defects(),
            "seam_error": seam_gap,
        }),
        exit: EXIT_OK,
    })
}

fn ball(cfg: &RunConfig) -> Result<Outcome> {
    let chart = chart_from_spec(need_chart(cfg)?)?;
    let mesh = chart.sample_mesh(&resolution_for(cfg, &chart)?)?;
    let objective: BallObjective = cfg.objective.as_deref().unwrap_or("enclosing").parse()?;
    let points = mesh.points();
    let result = match objective {
        BallObjective::Enclosing => smallest_enclosing_ball(&points, &cfg.ball)?,
        BallObjective::Empty => largest_empty_ball(&points, &cfg.ball)?,
    };
    write_csv(cfg, |w| mesh.write_csv(w))?;
    let mut v = to_value(&result)?;
    v["samples"] = json!(points.len());
    Ok(Outcome { report: v, exit: EXIT_OK })
}

fn degree(cfg: &RunConfig) -> Result<Outcome> {
    let chart = chart_from_spec(need_chart(cfg)?)?;
    let mesh = chart.sample_mesh(&resolution_for(cfg, &chart)?)?;
    let p0 = match p0_for(cfg, chart.ambient_dim())? {
        Some(p) => p,
        None => smallest_enclosing_ball(&mesh.points(), &cfg.ball)?.center,
    };
    let ctx = GaussMapContext::new(p0.clone(), &mesh)?;
    let scan = ctx.nonsingular_scan(cfg.degree.singular_tol)?;
    let raw = ctx.degree_raw()?;
    let (deg, residual) = match ctx.degree_with(&cfg.degree) {
        Ok((d, r)) => (Some(d), Some(r)),
        Err(Error::SingularGaussMap { .. }) | Err(Error::NonIntegerDegree { .. }) => (None, None),
        Err(e) => return Err(e),
    };
    Ok(Outcome {
        report: json!({
            "basepoint": p0,
            "samples": mesh.len(),
            "gauss_map_nonsingular": scan.nonsingular,
            "min_abs_jacobian": scan.min_abs_det,
            "degree_raw": raw,
            "degree": deg,
            "degree_residual": residual,
        }),
        exit: EXIT_OK,
    })
}

fn beltrami(cfg: &RunConfig) -> Result<Outcome> {
    let spec = cfg.chart.clone().unwrap_or_else(|| "off-pole".to_string());
    let chart = chart_from_spec(&spec)?;
    let t_list = cfg.t_list.clone().unwrap_or_else(|| vec![1.0, 0.5, 0.25, 0.125]);
    let res = match &cfg.resolution {
        Some(_) => Some(resolution_for(cfg, &chart)?),
        None => None,
    };
    let study = blowup_study(&chart, &t_list, res.as_deref())?;
    write_csv(cfg, |w| study.write_csv(w))?;
    Ok(Outcome { report: to_value(&study)?, exit: EXIT_OK })
}

fn load_group(cfg: &RunConfig) -> Result<Option<IsometryGroup>> {
    match (&cfg.group, &cfg.group_file) {
        (Some(_), Some(_)) => Err(Error::Config("give either group or group_file, not both".into())),
        (Some(spec), None) => IsometryGroup::from_spec(spec).map(Some),
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{path}: {e}")))?;
            IsometryGroup::from_json(&text).map(Some)
        }
        (None, None) => Ok(None),
    }
}

fn quotient(cfg: &RunConfig) -> Result<Outcome> {
    let theorem: TheoremId = cfg.theorem.as_deref().unwrap_or("t2").parse()?;
    let group = match (load_group(cfg)?, cfg.p0.as_ref()) {
        (Some(g), _) => g,
        (None, Some(p)) => IsometryGroup::antipodal(p.len())?,
        (None, None) => IsometryGroup::antipodal(4)?,
    };
    let dim = group.dim();
    let p0 = p0_for(cfg, dim)?.unwrap_or_else(|| SpherePoint::north_pole(dim));
    let res = cfg.resolution.as_ref().map(|r| if r.len() == 1 { vec![r[0]; dim - 2] } else { r.clone() });
    let set = mesh_set_from_spec(need_chart(cfg)?, &group, &p0, res.as_deref())?;
    let report = match theorem {
        TheoremId::Corollary => check_corollary(&p0, &set, &cfg.quotient)?,
        TheoremId::T2 => check_theorem2(&group, &p0, &set, &cfg.quotient)?,
        other => return Err(Error::Config(format!("quotient-check runs t2 or corollary, not {other:?}"))),
    };
    write_csv(cfg, |w| {
        writeln!(w, "piece,x0,x1,x2,x3,min_abs_curvature")?;
        for (i, piece) in set.pieces.iter().enumerate() {
            for s in &piece.samples {
                let xs: Vec<String> = s.point.coords().iter().map(|v| fmt17(*v)).collect();
                let k = s.principal_curvatures.iter().map(|v| v.abs()).fold(f64::INFINITY, f64::min);
                writeln!(w, "{i},{},{}", xs.join(","), fmt17(k))?;
            }
        }
        Ok(())
    })?;
    // a mesh that is not invariant or a too-large R is a completed check with a negative outcome
    report_outcome(&report)
}

fn sharpness(cfg: &RunConfig) -> Result<Outcome> {
    let epsilon = cfg.epsilon.unwrap_or(0.3);
    let mut sc = SharpnessConfig {
        r_grid: cfg.sharpness_r_grid.clone(),
        decision_tol: cfg.sharpness_decision_tol,
        ball: cfg.ball.clone(),
        ..SharpnessConfig::default()
    };
    if let Some(r) = &cfg.resolution {
        sc.resolution = r[0];
    }
    let table = sharpness_scan(epsilon, &sc)?;
    write_csv(cfg, |w| {
        writeln!(w, "r,s,min_abs_curvature,R_enclosing,R_empty,ratio,ce_holds,is_sphere")?;
        for row in &table.rows {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{}",
                fmt17(row.r),
                fmt17(row.s),
                fmt17(row.min_abs_curvature),
                fmt17(row.r_enclosing),
                fmt17(row.r_empty),
                fmt17(row.ratio),
                row.ce_holds,
                row.is_sphere
            )?;
        }
        Ok(())
    })?;
    Ok(Outcome { report: to_value(&table)?, exit: EXIT_OK })
}
