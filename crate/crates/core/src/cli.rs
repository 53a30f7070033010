//! Command-line driver. Every subcommand writes its files into `--out` only after
//! all computation succeeded; on failure a `FAILED` marker holds the error line.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::functionals::{
    energy_e_curve, epsilon_series, phi1, phi1_critical_residual, phi2_curve, phi2_mesh,
    psi_pairwise, psi_total, xi, EnergyReport, VolumeSchedule,
};
use crate::geom::io::{read_curve, read_mesh};
use crate::geom::{ClosedCurve, Shape, SurfaceMesh};
use crate::maps::{CurveMap, MeshMap, TimeVectorField, TimeVectorFieldFile, DEFAULT_DT};
use crate::minimizers::{
    minimize_phi1, minimize_phi2_curve, minimize_xi_numeric, optimal_schedule, random_monotone_map,
    sphere_family_phi2, sphere_family_phi2_on, wrapping_sequence, LiftClass, MinimizationTrace,
    OptimizerConfig,
};
use crate::morphing::{
    is_pairwise_minimal, make_linear_morph, optimal_morph_curve, pairwise_minimalize_curve,
    FrameIo, Morph,
};

/// Name of the marker written next to the outputs when a command fails.
pub const FAILURE_MARKER: &str = "FAILED";

/// Environment variable capping the worker-thread count.
pub const THREADS_ENV: &str = "DISTMIN_THREADS";

#[derive(Parser, Debug)]
#[command(
    name = "distmin",
    version,
    about = "Distortion energies, minimizers and minimal morphs"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Stretching energy of a map between two curves or two meshes.
    EvalPhi1(CommonArgs),
    /// Deformation energy of a map between two curves or two meshes.
    EvalPhi2(CommonArgs),
    /// Schedule functional of a volume schedule file, or of the optimal schedule for --a/--b.
    EvalXi(CommonArgs),
    /// Projected descent of the stretching energy between two curves.
    MinimizePhi1(CommonArgs),
    /// Descent of the deformation energy between two curves.
    MinimizePhi2(CommonArgs),
    /// Damped Newton on the schedule functional.
    MinimizeXi(CommonArgs),
    /// Deformation energies of the wrapping sequence, k = 1..=K.
    WrapSequence(CommonArgs),
    /// Deformation energy along conformal dilations of a scaled sphere.
    SphereCheck(CommonArgs),
    /// Linear-interpolation morph between two curves or meshes.
    MorphMake(CommonArgs),
    /// Pairwise-minimal resampling of a curve morph file.
    MorphPairwise(CommonArgs),
    /// Minimal total-distortion morph between two curves.
    MorphOptimal(CommonArgs),
    /// Flow energy of a time-dependent vector field between two metrics.
    FlowEnergy(CommonArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Correspondence {
    /// Affine lift with zero offset.
    Linear,
    /// Vertex i goes to vertex i.
    Vertex,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum InitKind {
    Random,
    Linear,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum LiftClassArg {
    Monotone,
    Folding,
}

#[derive(Args, Debug, Clone)]
pub struct CommonArgs {
    /// Source curve (.json), mesh (.obj), schedule or morph file.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Target curve (.json) or mesh (.obj).
    #[arg(long)]
    pub target: Option<PathBuf>,
    /// Number of morph time steps K (K + 1 frames).
    #[arg(long)]
    pub frames: Option<usize>,
    /// Grid size: schedule samples, or sphere-family parameter count.
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Gradient tolerance of the optimizers.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Output directory (created if missing).
    #[arg(long)]
    pub out: PathBuf,
    /// Optimizer configuration JSON; flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    #[arg(long, value_enum)]
    pub lift_class: Option<LiftClassArg>,
    #[arg(long, value_enum, default_value_t = InitKind::Random)]
    pub init: InitKind,
    /// Lift file `{"lift": [...], "orientation": ±1}` overriding --correspondence.
    #[arg(long)]
    pub map: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Correspondence::Linear)]
    pub correspondence: Correspondence,
    /// Base morph file for morph-optimal.
    #[arg(long)]
    pub morph: Option<PathBuf>,
    /// Vector field file for flow-energy.
    #[arg(long)]
    pub field: Option<PathBuf>,
    #[arg(long)]
    pub dt: Option<f64>,
    /// Start volume for schedule commands.
    #[arg(long)]
    pub a: Option<f64>,
    /// End volume for schedule commands.
    #[arg(long)]
    pub b: Option<f64>,
    /// Largest wrapping-sequence index.
    #[arg(long)]
    pub k: Option<usize>,
    /// Sphere scale factor R.
    #[arg(long)]
    pub radius: Option<f64>,
}

/// Lift file used by `--map` and written by the minimizers.
#[derive(Debug, Serialize, Deserialize)]
pub struct MapFile {
    pub lift: Vec<f64>,
    pub orientation: i8,
}

impl From<&CurveMap> for MapFile {
    fn from(h: &CurveMap) -> Self {
        MapFile {
            lift: h.lift().to_vec(),
            orientation: h.orientation(),
        }
    }
}

/// Result of a command that ran to completion.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Done,
    NotConverged,
}

/// Process exit code for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse(_) | Error::Io(_) => 2,
        Error::MorphFold { .. } => 4,
        _ => 1,
    }
}

/// Single-line machine-readable error.
pub fn error_line(e: &Error) -> String {
    let mut v = json!({ "error": e.kind(), "message": e.to_string() });
    if let Error::MorphFold { time, .. } = e {
        v["time"] = json!(time);
    }
    v.to_string()
}

/// Parses the process arguments, runs the command and returns the exit code.
pub fn main_entry() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("invalid arguments");
            eprintln!("{}", json!({ "error": "usage", "message": first }));
            return 2;
        }
    };
    configure_threads();
    let out = cli.command.args().out.clone();
    match run(&cli.command) {
        Ok(Status::Done) => 0,
        Ok(Status::NotConverged) => 3,
        Err(e) => {
            let line = error_line(&e);
            eprintln!("{line}");
            if std::fs::create_dir_all(&out).is_ok() {
                let _ = std::fs::write(out.join(FAILURE_MARKER), format!("{line}\n"));
            }
            exit_code(&e)
        }
    }
}

fn configure_threads() {
    if let Some(n) = std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
    {
        if n > 0 {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global();
        }
    }
}

impl Command {
    pub fn args(&self) -> &CommonArgs {
        match self {
            Command::EvalPhi1(a)
            | Command::EvalPhi2(a)
            | Command::EvalXi(a)
            | Command::MinimizePhi1(a)
            | Command::MinimizePhi2(a)
            | Command::MinimizeXi(a)
            | Command::WrapSequence(a)
            | Command::SphereCheck(a)
            | Command::MorphMake(a)
            | Command::MorphPairwise(a)
            | Command::MorphOptimal(a)
            | Command::FlowEnergy(a) => a,
        }
    }
}

/// Output files collected in memory and written together.
struct Outputs {
    dir: PathBuf,
    files: Vec<(String, String)>,
}

impl Outputs {
    fn new(dir: &Path) -> Self {
        Outputs {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        }
    }

    fn add(&mut self, name: &str, content: String) {
        self.files.push((name.to_owned(), content));
    }

    fn json(&mut self, name: &str, v: &Value) {
        self.add(
            name,
            format!("{}\n", serde_json::to_string_pretty(v).expect("json value")),
        );
    }

    fn commit(self) -> Result<()> {
        std::fs::create_dir_all(&self.dir)
            .map_err(|e| Error::Io(format!("{}: {e}", self.dir.display())))?;
        let stale = self.dir.join(FAILURE_MARKER);
        if stale.exists() {
            std::fs::remove_file(&stale)?;
        }
        for (name, content) in &self.files {
            let path = self.dir.join(name);
            std::fs::write(&path, content)
                .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        }
        Ok(())
    }
}

pub fn run(cmd: &Command) -> Result<Status> {
    let args = cmd.args();
    let mut out = Outputs::new(&args.out);
    let status = match cmd {
        Command::EvalPhi1(a) => eval_map_energy(a, &mut out, Energy::Stretching)?,
        Command::EvalPhi2(a) => eval_map_energy(a, &mut out, Energy::Deformation)?,
        Command::EvalXi(a) => eval_xi(a, &mut out)?,
        Command::MinimizePhi1(a) => minimize_map(a, &mut out, Energy::Stretching)?,
        Command::MinimizePhi2(a) => minimize_map(a, &mut out, Energy::Deformation)?,
        Command::MinimizeXi(a) => minimize_xi_cmd(a, &mut out)?,
        Command::WrapSequence(a) => wrap_sequence_cmd(a, &mut out)?,
        Command::SphereCheck(a) => sphere_check(a, &mut out)?,
        Command::MorphMake(a) => morph_make(a, &mut out)?,
        Command::MorphPairwise(a) => morph_pairwise(a, &mut out)?,
        Command::MorphOptimal(a) => morph_optimal(a, &mut out)?,
        Command::FlowEnergy(a) => flow_energy(a, &mut out)?,
    };
    out.commit()?;
    Ok(status)
}

fn required<'a, T>(v: &'a Option<T>, flag: &str) -> Result<&'a T> {
    v.as_ref()
        .ok_or_else(|| Error::Parse(format!("missing required flag --{flag}")))
}

fn is_mesh_path(p: &Path) -> bool {
    p.extension().is_some_and(|e| e.eq_ignore_ascii_case("obj"))
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    Ok(serde_json::from_str(&text)?)
}

fn curve_pair(a: &CommonArgs) -> Result<(ClosedCurve, ClosedCurve)> {
    Ok((
        read_curve(required(&a.input, "input")?)?,
        read_curve(required(&a.target, "target")?)?,
    ))
}

fn mesh_pair(a: &CommonArgs) -> Result<(SurfaceMesh, SurfaceMesh)> {
    Ok((
        read_mesh(required(&a.input, "input")?)?,
        read_mesh(required(&a.target, "target")?)?,
    ))
}

fn curve_map(a: &CommonArgs, m: ClosedCurve, n: ClosedCurve) -> Result<CurveMap> {
    if let Some(path) = &a.map {
        let f: MapFile = read_json(path)?;
        return CurveMap::new(m, n, f.lift, f.orientation);
    }
    match a.correspondence {
        Correspondence::Linear => CurveMap::linear(m, n, 0.0, 1),
        Correspondence::Vertex => {
            if m.len() != n.len() {
                return Err(Error::DomainMismatch(format!(
                    "vertex correspondence needs equal vertex counts ({} vs {})",
                    m.len(),
                    n.len()
                )));
            }
            let lift = n.arc_table().to_vec();
            CurveMap::new(m, n, lift, 1)
        }
    }
}

fn optimizer_config(a: &CommonArgs) -> Result<OptimizerConfig> {
    let mut cfg = match &a.config {
        Some(p) => read_json(p)?,
        None => OptimizerConfig::default(),
    };
    if let Some(v) = a.max_iters {
        cfg.max_iters = v;
    }
    if let Some(v) = a.tol {
        cfg.grad_tol = v;
    }
    if let Some(v) = a.seed {
        cfg.seed = v;
    }
    if let Some(c) = a.lift_class {
        cfg.lift_class = match c {
            LiftClassArg::Monotone => LiftClass::Monotone,
            LiftClassArg::Folding => LiftClass::Folding,
        };
    }
    cfg.validate()?;
    Ok(cfg)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Energy {
    Stretching,
    Deformation,
}

fn write_report(out: &mut Outputs, rep: &EnergyReport) {
    out.add("report.json", format!("{}\n", rep.to_json()));
    out.add("densities.csv", rep.densities_csv());
    println!("{}", json!({ "value": rep.value }));
}

fn eval_map_energy(a: &CommonArgs, out: &mut Outputs, which: Energy) -> Result<Status> {
    let input = required(&a.input, "input")?;
    let rep = if is_mesh_path(input) {
        let (m, n) = mesh_pair(a)?;
        let h = MeshMap::new(m, n)?;
        match which {
            Energy::Stretching => phi1(&h)?,
            Energy::Deformation => phi2_mesh(&h)?,
        }
    } else {
        let (m, n) = curve_pair(a)?;
        let h = curve_map(a, m, n)?;
        match which {
            Energy::Stretching => phi1(&h)?,
            Energy::Deformation => phi2_curve(&h),
        }
    };
    write_report(out, &rep);
    Ok(Status::Done)
}

fn eval_xi(a: &CommonArgs, out: &mut Outputs) -> Result<Status> {
    let phi = match &a.input {
        Some(p) => read_json::<VolumeSchedule>(p)?,
        None => optimal_schedule(
            *required(&a.a, "a")?,
            *required(&a.b, "b")?,
            a.grid.unwrap_or(200),
        )?,
    };
    let value = xi(&phi);
    out.json(
        "report.json",
        &json!({ "value": value, "samples": phi.samples().len() }),
    );
    out.json("schedule.json", &serde_json::to_value(&phi)?);
    println!("{}", json!({ "value": value }));
    Ok(Status::Done)
}

fn trace_status<T>(t: &MinimizationTrace<T>) -> Status {
    if t.converged {
        Status::Done
    } else {
        Status::NotConverged
    }
}

fn minimize_map(a: &CommonArgs, out: &mut Outputs, which: Energy) -> Result<Status> {
    let (m, n) = curve_pair(a)?;
    let cfg = optimizer_config(a)?;
    let init = match a.init {
        InitKind::Random => random_monotone_map(&m, &n, cfg.seed)?,
        InitKind::Linear => CurveMap::linear(m.clone(), n.clone(), 0.0, 1)?,
    };
    let (lm, ln) = (m.length(), n.length());
    let (trace, reference, residual) = match which {
        Energy::Stretching => {
            let t = minimize_phi1(&m, &n, &init, &cfg)?;
            let r = phi1_critical_residual(&t.final_state)?;
            (t, (lm - ln).powi(2) / lm, Some(r))
        }
        Energy::Deformation => {
            let t = minimize_phi2_curve(&m, &n, &init, &cfg)?;
            let reference = if ln >= lm {
                (ln * ln - lm * lm).powi(2) / lm.powi(3)
            } else {
                0.0
            };
            (t, reference, None)
        }
    };
    out.add("trace.csv", trace.to_csv());
    out.json(
        "final_map.json",
        &serde_json::to_value(MapFile::from(&trace.final_state))?,
    );
    let mut summary = json!({
        "final_energy": trace.final_energy(),
        "iterations": trace.iterations(),
        "converged": trace.converged,
        "reference_value": reference,
        "monotone": trace.final_state.is_monotone(),
        "seed": cfg.seed,
    });
    if let Some(r) = residual {
        summary["critical_residual"] = json!(r);
    }
    out.json("summary.json", &summary);
    println!(
        "{}",
        json!({ "final_energy": trace.final_energy(), "converged": trace.converged })
    );
    Ok(trace_status(&trace))
}

fn minimize_xi_cmd(a: &CommonArgs, out: &mut Outputs) -> Result<Status> {
    let (va, vb) = (*required(&a.a, "a")?, *required(&a.b, "b")?);
    let n = a.grid.unwrap_or(200);
    let cfg = optimizer_config(a)?;
    let trace = minimize_xi_numeric(va, vb, n, &cfg)?;
    let closed = optimal_schedule(va, vb, n)?;
    let sup_rel = trace
        .final_state
        .samples()
        .iter()
        .zip(closed.samples())
        .map(|(x, y)| ((x - y) / y).abs())
        .fold(0.0, f64::max);
    out.add("trace.csv", trace.to_csv());
    out.json("schedule.json", &serde_json::to_value(&trace.final_state)?);
    out.json(
        "summary.json",
        &json!({
            "final_energy": trace.final_energy(),
            "iterations": trace.iterations(),
            "converged": trace.converged,
            "closed_form_value": 4.0 * (vb.sqrt() - va.sqrt()).powi(2),
            "sup_rel_error_vs_closed_form": sup_rel,
        }),
    );
    println!(
        "{}",
        json!({ "final_energy": trace.final_energy(), "converged": trace.converged })
    );
    Ok(trace_status(&trace))
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (a, b) in lx.iter().zip(&ly) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
    }
    sxy / sxx
}

fn wrap_sequence_cmd(a: &CommonArgs, out: &mut Outputs) -> Result<Status> {
    let (m, n) = curve_pair(a)?;
    let kmax = a.k.unwrap_or(20);
    if kmax == 0 {
        return Err(Error::InvalidParameter("--k must be at least 1".into()));
    }
    let mut csv = String::from("k,phi2\n");
    let mut ks = Vec::new();
    let mut es = Vec::new();
    for k in 1..=kmax {
        let e = phi2_curve(&wrapping_sequence(&m, &n, k)?).value;
        writeln!(csv, "{k},{e}").unwrap();
        ks.push(k as f64);
        es.push(e);
    }
    let slope = if kmax >= 2 {
        loglog_slope(&ks, &es)
    } else {
        f64::NAN
    };
    out.add("wrap.csv", csv);
    out.json(
        "summary.json",
        &json!({
            "energies": es,
            "loglog_slope": if slope.is_finite() { json!(slope) } else { Value::Null },
            "strictly_decreasing": es.windows(2).all(|w| w[1] < w[0]),
        }),
    );
    Ok(Status::Done)
}

fn sphere_check(a: &CommonArgs, out: &mut Outputs) -> Result<Status> {
    let r = a.radius.unwrap_or(2.0);
    let count = a.grid.unwrap_or(11);
    if count < 2 {
        return Err(Error::InvalidParameter("--grid must be at least 2".into()));
    }
    let s_grid: Vec<f64> = (0..count)
        .map(|i| (2 * i) as f64 / (2 * (count - 1)) as f64 - 0.5)
        .collect();
    let (table, area) = match &a.input {
        Some(p) => {
            let m = read_mesh(p)?;
            (sphere_family_phi2_on(&m, r, &s_grid)?, m.area())
        }
        None => (
            sphere_family_phi2(r, &s_grid)?,
            SurfaceMesh::icosphere(crate::minimizers::SPHERE_SUBDIVISIONS, 1.0)?.area(),
        ),
    };
    out.add("sphere.csv", table.to_csv());
    out.json(
        "summary.json",
        &json!({
            "radius": r,
            "argmin_s": table.argmin_s(),
            "rows": serde_json::to_value(&table.rows)?,
            "scaling_value": 2.0 * (r * r - 1.0).powi(2) * area,
        }),
    );
    Ok(Status::Done)
}

fn morph_outputs<S: FrameIo>(out: &mut Outputs, f: &Morph<S>) -> Result<(f64, Value)> {
    let eps = epsilon_series(f)?;
    let mut csv = String::from("t,volume,epsilon\n");
    for ((t, v), e) in f.times().iter().zip(f.volume_path()).zip(&eps) {
        writeln!(csv, "{t},{v},{e}").unwrap();
    }
    let psi = psi_total(f)?;
    let pw = psi_pairwise(f)?;
    let report = is_pairwise_minimal(f, crate::functionals::PAIRWISE_TOL);
    out.add("morph.json", format!("{}\n", f.to_json()));
    out.add("volume_path.csv", csv);
    let summary = json!({
        "frames": f.frames().len(),
        "psi_total": psi,
        "psi_pairwise": pw.value,
        "pairwise_minimal": report.verdict,
        "max_pairwise_deviation": report.max_deviation,
    });
    Ok((psi, summary))
}

fn morph_make(a: &CommonArgs, out: &mut Outputs) -> Result<Status> {
    let k = a.frames.unwrap_or(32);
    let input = required(&a.input, "input")?;
    let (psi, summary) = if is_mesh_path(input) {
        let (m, n) = mesh_pair(a)?;
        let f = make_linear_morph(&MeshMap::new(m, n)?, k)?;
        morph_outputs(out, &f)?
    } else {
        let (m, n) = curve_pair(a)?;
        let f = make_linear_morph(&curve_map(a, m, n)?, k)?;
        morph_outputs(out, &f)?
    };
    out.json("summary.json", &summary);
    println!("{}", json!({ "psi_total": psi }));
    Ok(Status::Done)
}

fn morph_pairwise(a: &CommonArgs, out: &mut Outputs) -> Result<Status> {
    let f = Morph::<ClosedCurve>::read(required(&a.input, "input")?)?;
    let before = psi_total(&f)?;
    let g = pairwise_minimalize_curve(&f)?;
    let (after, mut summary) = morph_outputs(out, &g)?;
    summary["psi_before"] = json!(before);
    summary["psi_gap"] = json!(before - after);
    out.json("summary.json", &summary);
    println!("{}", json!({ "psi_before": before, "psi_after": after }));
    Ok(Status::Done)
}

fn morph_optimal(a: &CommonArgs, out: &mut Outputs) -> Result<Status> {
    let (m, n) = curve_pair(a)?;
    let base = match &a.morph {
        Some(p) => Morph::<ClosedCurve>::read(p)?,
        None => make_linear_morph(&curve_map(a, m.clone(), n.clone())?, a.frames.unwrap_or(32))?,
    };
    let g = optimal_morph_curve(&m, &n, &base)?;
    let (psi, mut summary) = morph_outputs(out, &g)?;
    let (va, vb) = (m.volume(), n.volume());
    let closed = 4.0 * (vb.sqrt() - va.sqrt()).powi(2);
    summary["closed_form_value"] = json!(closed);
    summary["relative_error"] = json!(if closed > 0.0 {
        (psi - closed).abs() / closed
    } else {
        psi
    });
    out.json("psi_summary.json", &summary);
    println!(
        "{}",
        json!({ "psi_total": psi, "closed_form_value": closed })
    );
    Ok(Status::Done)
}

fn flow_energy(a: &CommonArgs, out: &mut Outputs) -> Result<Status> {
    let (g1, g2) = curve_pair(a)?;
    let file: TimeVectorFieldFile = read_json(required(&a.field, "field")?)?;
    let v = TimeVectorField::from_file(g1.clone(), file)?;
    let rep = energy_e_curve(&v, &g1, &g2, a.dt.unwrap_or(DEFAULT_DT))?;
    write_report(out, &rep);
    Ok(Status::Done)
}
