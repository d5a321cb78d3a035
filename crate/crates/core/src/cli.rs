//! Command-line front end.
//!
//! Every subcommand accepts `--config FILE` with flat `key = value` lines.
//! File keys are the long flag names; flags given on the command line win.
//! Each run writes `meta.json` (resolved settings and results) into the
//! output directory, plus `timing.json` with the wall time, which is kept
//! apart so that `meta.json` stays byte-identical across repeated runs.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{ArgAction, CommandFactory, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use crate::analysis::{
    bifurcation_scan, cylinder_spectrum, fit_pitchfork, numerical_spectrum, polish_equilibrium,
    trace_branch, JacobianMethod,
};
use crate::config::{normalize_key, pairs_exact, parse_grid, read_config};
use crate::dynamics::{simulate, Scheme, SimConfig, Termination};
use crate::equilibria::{classify_cmc, unduloid_parametric, unduloid_profile, UnduloidSpec};
use crate::error::Error;
use crate::geometry::{g_divergence, mean_curvature, surface_area};
use crate::grid::{PeriodicProfile, TorusGrid};
use crate::io::{
    read_profile_csv, read_trajectory_csv, to_json_line, write_branch_csv,
    write_json, write_profile_csv, write_trajectory_csv, TrajectoryTable,
};
use crate::reduced::equivalent_cylinder_radius;
use crate::svg::{emit_svg, Series};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;
pub const EXIT_IO: i32 = 4;

/// Environment variable naming the default output directory.
pub const OUT_ENV: &str = "ASDFLOW_OUT";

#[derive(Debug)]
enum CliError {
    Usage(String),
    Numeric(String),
    Io(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Numeric(_) => EXIT_NUMERIC,
            CliError::Io(_) => EXIT_IO,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Numeric(m) | CliError::Io(m) => m,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::Argument(_) | Error::UnsupportedParameter(_) | Error::Classification { .. } => {
                CliError::Usage(msg)
            }
            Error::Io(_) | Error::Parse(_) => CliError::Io(msg),
            Error::Domain { .. } | Error::NoLift { .. } | Error::Numeric(_) => CliError::Numeric(msg),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Parser, Debug)]
#[command(name = "asdflow", version, about = "Periodic axisymmetric surface diffusion lab")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Options shared by every subcommand.
#[derive(clap::Args, Debug, Serialize)]
struct Common {
    /// Flat `key = value` file; command-line flags override its keys.
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
    /// Output directory (default: $ASDFLOW_OUT, else ./asdflow-out).
    #[arg(long)]
    #[serde(skip)]
    out: Option<PathBuf>,
    /// Recorded in the metadata for reproducibility of randomized sweeps.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Integrate the flow from an initial profile.
    #[command(args_override_self = true)]
    Simulate(SimulateArgs),
    /// Analytic or numerical linearization spectrum.
    #[command(args_override_self = true)]
    Spectrum(SpectrumArgs),
    /// Unduloid equilibrium profile.
    #[command(args_override_self = true)]
    Equilibrium(EquilibriumArgs),
    /// Classify the constant mean curvature curve with parameter B.
    #[command(args_override_self = true)]
    Classify(ClassifyArgs),
    /// Trace the unduloid branch and fit the pitchfork.
    #[command(args_override_self = true)]
    Branch(BranchArgs),
    /// Scan the reduced symbol for sign changes.
    #[command(args_override_self = true)]
    Scan(ScanArgs),
    /// Re-check volume and area invariants of a stored trajectory.
    #[command(args_override_self = true)]
    Audit(AuditArgs),
}

#[derive(clap::Args, Debug, Serialize)]
struct SimulateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    common: Common,
    /// Constant profile of this radius.
    #[arg(long)]
    cylinder: Option<f64>,
    /// `r=..,k=..,eps=..`: the profile r + eps cos(kx).
    #[arg(long)]
    perturbed: Option<String>,
    /// `B=..,k=..`: unduloid profile.
    #[arg(long)]
    unduloid: Option<String>,
    /// Profile CSV with header `x,r`.
    #[arg(long)]
    file: Option<PathBuf>,
    /// Grid size (taken from the file when `--file` is used).
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 1e-4)]
    dt0: f64,
    #[arg(long = "t-end", default_value_t = 1.0)]
    t_end: f64,
    #[arg(long = "stab-margin", default_value_t = 1.25)]
    stab_margin: f64,
    #[arg(long = "adapt-tol", default_value_t = 1e-8)]
    adapt_tol: f64,
    #[arg(long = "pinch-frac", default_value_t = 0.2)]
    pinch_frac: f64,
    #[arg(long = "snapshot-every", default_value_t = 100)]
    snapshot_every: usize,
    #[arg(long = "k-track", default_value_t = 4)]
    k_track: usize,
    /// `euler` or `trapezoid`.
    #[arg(long, default_value = "euler")]
    scheme: String,
}

#[derive(clap::Args, Debug, Serialize)]
struct SpectrumArgs {
    #[command(flatten)]
    #[serde(flatten)]
    common: Common,
    /// Analytic spectrum of the cylinder with this radius.
    #[arg(long)]
    radius: Option<f64>,
    #[arg(long, default_value_t = 8)]
    kmax: usize,
    /// Include the zero eigenvalue of the constant mode.
    #[arg(long)]
    full: bool,
    /// Numerical spectrum at the profile stored in this CSV.
    #[arg(long)]
    profile: Option<PathBuf>,
    /// Numerical spectrum at the unduloid `B=..,k=..`.
    #[arg(long)]
    unduloid: Option<String>,
    #[arg(long, default_value_t = 64)]
    n: usize,
    /// `complex` (complex step) or `central` (central differences).
    #[arg(long, default_value = "complex")]
    method: String,
}

#[derive(clap::Args, Debug, Serialize)]
struct EquilibriumArgs {
    #[command(flatten)]
    #[serde(flatten)]
    common: Common,
    #[arg(long = "B", allow_negative_numbers = true)]
    b: f64,
    #[arg(long, default_value_t = 1)]
    k: u32,
    #[arg(long, default_value_t = 256)]
    n: usize,
    /// Also write `equilibrium.svg`.
    #[arg(long)]
    svg: bool,
    /// Refine by Newton iteration at fixed volume.
    #[arg(long)]
    polish: bool,
}

#[derive(clap::Args, Debug, Serialize)]
struct ClassifyArgs {
    #[command(flatten)]
    #[serde(flatten)]
    common: Common,
    #[arg(long = "B", allow_negative_numbers = true)]
    b: f64,
}

#[derive(clap::Args, Debug, Serialize)]
struct BranchArgs {
    #[command(flatten)]
    #[serde(flatten)]
    common: Common,
    #[arg(long, default_value_t = 1)]
    l: u32,
    /// `lo:step:hi` or a comma list; mirrored to negative values.
    #[arg(long = "B-grid", default_value = "0:0.05:0.2")]
    b_grid: String,
    #[arg(long, default_value_t = 128)]
    n: usize,
    /// Fit λ against the amplitude and report the Taylor coefficients.
    #[arg(long)]
    fit: bool,
    /// Also write `branch.svg`.
    #[arg(long)]
    svg: bool,
}

#[derive(clap::Args, Debug, Serialize)]
struct ScanArgs {
    #[command(flatten)]
    #[serde(flatten)]
    common: Common,
    #[arg(long, default_value_t = 0.1)]
    lo: f64,
    #[arg(long, default_value_t = 3.5)]
    hi: f64,
    #[arg(long, default_value_t = 0.01)]
    step: f64,
    #[arg(long, default_value_t = 6)]
    kmax: u32,
}

#[derive(clap::Args, Debug, Serialize)]
struct AuditArgs {
    #[command(flatten)]
    #[serde(flatten)]
    common: Common,
    /// Trajectory CSV written by `simulate`.
    #[arg(long)]
    trajectory: PathBuf,
    #[arg(long = "volume-tol", default_value_t = 1e-7)]
    volume_tol: f64,
    #[arg(long = "area-slack", default_value_t = 1e-9)]
    area_slack: f64,
}

/// Runs the CLI on `args` (including the program name) and returns the exit code.
pub fn run<I, S>(args: I, env_out: Option<PathBuf>, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let args: Vec<String> = args.into_iter().map(Into::into).collect();
    let args = match splice_config(args) {
        Ok(a) => a,
        Err(e) => {
            let _ = writeln!(stderr, "error: {}", e.message());
            return e.code();
        }
    };
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(stderr, "{text}")
            } else {
                write!(stdout, "{text}")
            };
            return code;
        }
    };
    match dispatch(cli.command, env_out, stdout) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {}", e.message());
            e.code()
        }
    }
}

/// Inserts the keys of `--config FILE` as flags right after the subcommand,
/// so that later command-line flags override them.
fn splice_config(args: Vec<String>) -> CliResult<Vec<String>> {
    let mut path = None;
    for (i, a) in args.iter().enumerate() {
        if a == "--config" {
            path = args.get(i + 1).cloned();
        } else if let Some(p) = a.strip_prefix("--config=") {
            path = Some(p.to_string());
        }
    }
    let (Some(path), Some(sub)) = (path, args.get(1).cloned()) else {
        return Ok(args);
    };
    let map = read_config(Path::new(&path)).map_err(|e| match e {
        Error::Io(io) => CliError::Io(format!("cannot read config '{path}': {io}")),
        other => CliError::Usage(format!("config '{path}': {other}")),
    })?;
    let root = Cli::command();
    let cmd = root
        .find_subcommand(&sub)
        .ok_or_else(|| CliError::Usage(format!("unknown subcommand '{sub}'")))?;
    let mut injected = Vec::new();
    for (key, value) in &map {
        let arg = cmd
            .get_arguments()
            .find(|a| a.get_long().map(normalize_key).as_deref() == Some(key.as_str()))
            .filter(|a| !matches!(a.get_long(), Some("config" | "out")))
            .ok_or_else(|| CliError::Usage(format!("unknown key '{key}' in config '{path}'")))?;
        let long = arg.get_long().unwrap_or_default();
        if matches!(arg.get_action(), ArgAction::SetTrue) {
            match value.as_str() {
                "true" => injected.push(format!("--{long}")),
                "false" => {}
                other => {
                    return Err(CliError::Usage(format!(
                        "key '{key}' expects true or false, found '{other}'"
                    )))
                }
            }
        } else {
            injected.push(format!("--{long}={value}"));
        }
    }
    let mut out = args[..2].to_vec();
    out.extend(injected);
    out.extend_from_slice(&args[2..]);
    Ok(out)
}

fn out_dir(common: &Common, env_out: Option<PathBuf>) -> CliResult<PathBuf> {
    let dir = common
        .out
        .clone()
        .or(env_out)
        .unwrap_or_else(|| PathBuf::from("asdflow-out"));
    fs::create_dir_all(&dir)
        .map_err(|e| CliError::Io(format!("cannot create '{}': {e}", dir.display())))?;
    Ok(dir)
}

fn io_err(path: &Path) -> impl Fn(Error) -> CliError + '_ {
    move |e| match e {
        Error::Io(io) => CliError::Io(format!("{}: {io}", path.display())),
        other => other.into(),
    }
}

#[derive(Serialize)]
struct Meta<'a, A: Serialize, R: Serialize> {
    command: &'a str,
    version: &'a str,
    config: &'a A,
    result: R,
}

fn write_meta<A: Serialize, R: Serialize>(dir: &Path, command: &str, config: &A, result: R, started: Instant) -> CliResult<()> {
    let meta = Meta {
        command,
        version: env!("CARGO_PKG_VERSION"),
        config,
        result,
    };
    let path = dir.join("meta.json");
    write_json(&path, &meta).map_err(io_err(&path))?;
    let path = dir.join("timing.json");
    write_json(&path, &json!({ "wall_seconds": started.elapsed().as_secs_f64() })).map_err(io_err(&path))
}

fn dispatch(command: Command, env_out: Option<PathBuf>, stdout: &mut dyn Write) -> CliResult<i32> {
    let started = Instant::now();
    match command {
        Command::Simulate(a) => cmd_simulate(&a, out_dir(&a.common, env_out)?, stdout, started),
        Command::Spectrum(a) => cmd_spectrum(&a, out_dir(&a.common, env_out)?, stdout, started),
        Command::Equilibrium(a) => cmd_equilibrium(&a, out_dir(&a.common, env_out)?, stdout, started),
        Command::Classify(a) => cmd_classify(&a, out_dir(&a.common, env_out)?, stdout, started),
        Command::Branch(a) => cmd_branch(&a, out_dir(&a.common, env_out)?, stdout, started),
        Command::Scan(a) => cmd_scan(&a, out_dir(&a.common, env_out)?, stdout, started),
        Command::Audit(a) => cmd_audit(&a, out_dir(&a.common, env_out)?, stdout, started),
    }
}

fn say(stdout: &mut dyn Write, line: impl AsRef<str>) -> CliResult<()> {
    writeln!(stdout, "{}", line.as_ref()).map_err(|e| CliError::Io(format!("stdout: {e}")))
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn positive_int(v: f64, what: &str) -> CliResult<u32> {
    if v >= 1.0 && v.fract() == 0.0 && v <= u32::MAX as f64 {
        Ok(v as u32)
    } else {
        Err(usage(format!("{what} must be a positive integer, got {v}")))
    }
}

fn parse_unduloid(spec: &str) -> CliResult<(f64, u32)> {
    let [b, k] = pairs_exact(spec, ["B", "k"])?;
    Ok((b, positive_int(k, "k")?))
}

fn initial_profile(a: &SimulateArgs) -> CliResult<PeriodicProfile> {
    let given = [
        a.cylinder.is_some(),
        a.perturbed.is_some(),
        a.unduloid.is_some(),
        a.file.is_some(),
    ];
    if given.iter().filter(|&&g| g).count() != 1 {
        return Err(usage(
            "give exactly one of --cylinder, --perturbed, --unduloid, --file",
        ));
    }
    if let Some(path) = &a.file {
        let r = read_profile_csv(path).map_err(io_err(path))?;
        if let Some(n) = a.n.filter(|&n| n != r.len()) {
            return Err(usage(format!("n = {n} does not match the {} nodes in the file", r.len())));
        }
        return Ok(r);
    }
    let grid = TorusGrid::new(a.n.unwrap_or(256))?;
    if let Some(radius) = a.cylinder {
        if !(radius > 0.0) {
            return Err(usage(format!("cylinder radius must be positive, got {radius}")));
        }
        return Ok(PeriodicProfile::constant(grid, radius));
    }
    if let Some(spec) = &a.perturbed {
        let [r, k, eps] = pairs_exact(spec, ["r", "k", "eps"])?;
        let k = positive_int(k, "k")? as f64;
        let p = PeriodicProfile::from_fn(grid, |x| r + eps * (k * x).cos());
        if !(p.min() > 0.0) {
            return Err(usage(format!("perturbed profile '{spec}' is not positive")));
        }
        return Ok(p);
    }
    let spec = a.unduloid.as_deref().unwrap_or_default();
    let (b, k) = parse_unduloid(spec)?;
    Ok(unduloid_profile(b, k, grid)?)
}

fn cmd_simulate(a: &SimulateArgs, dir: PathBuf, stdout: &mut dyn Write, started: Instant) -> CliResult<i32> {
    let r0 = initial_profile(a)?;
    let cfg = SimConfig {
        n: r0.len(),
        dt0: a.dt0,
        t_end: a.t_end,
        stab_margin: a.stab_margin,
        adapt_tol: a.adapt_tol,
        pinch_frac: a.pinch_frac,
        snapshot_every: a.snapshot_every,
        k_track: a.k_track,
        scheme: a.scheme.parse::<Scheme>()?,
    };
    cfg.validate()?;
    let traj = simulate(&r0, &cfg)?;

    let path = dir.join("trajectory.csv");
    write_trajectory_csv(&path, &TrajectoryTable::from(&traj)).map_err(io_err(&path))?;
    let snap_dir = dir.join("snapshots");
    fs::create_dir_all(&snap_dir).map_err(|e| CliError::Io(format!("{}: {e}", snap_dir.display())))?;
    let mut snapshots = Vec::with_capacity(traj.snapshots.len());
    for (i, (t, p)) in traj.snapshots.iter().enumerate() {
        let name = format!("snapshot_{i:05}.csv");
        let path = snap_dir.join(&name);
        write_profile_csv(&path, p).map_err(io_err(&path))?;
        snapshots.push(json!({ "t": t, "file": format!("snapshots/{name}") }));
    }
    if let Some(last) = traj.final_profile() {
        let path = dir.join("final.csv");
        write_profile_csv(&path, last).map_err(io_err(&path))?;
    }

    let final_time = traj.times.last().copied().unwrap_or(0.0);
    let result = json!({
        "termination": traj.termination.as_str(),
        "final_time": final_time,
        "accepted_steps": traj.accepted_steps,
        "rejected_steps": traj.rejected_steps,
        "max_volume_drift": traj.max_volume_drift(),
        "max_area_increase": traj.max_area_increase(),
        "resolved": cfg,
        "snapshots": snapshots,
    });
    write_meta(&dir, "simulate", a, result, started)?;
    say(
        stdout,
        format!(
            "termination={} t={final_time} steps={} rejected={}",
            traj.termination.as_str(),
            traj.accepted_steps,
            traj.rejected_steps
        ),
    )?;
    Ok(match traj.termination {
        Termination::ReachedTEnd | Termination::PinchDetected => EXIT_OK,
        Termination::Diverged | Termination::StepUnderflow => EXIT_NUMERIC,
    })
}

fn cmd_spectrum(a: &SpectrumArgs, dir: PathBuf, stdout: &mut dyn Write, started: Instant) -> CliResult<i32> {
    let sources = [a.radius.is_some(), a.profile.is_some(), a.unduloid.is_some()];
    if sources.iter().filter(|&&s| s).count() != 1 {
        return Err(usage("give exactly one of --radius, --profile, --unduloid"));
    }
    let report = if let Some(radius) = a.radius {
        cylinder_spectrum(radius, a.kmax, !a.full)?
    } else {
        let method: JacobianMethod = a.method.parse()?;
        let profile = match (&a.profile, &a.unduloid) {
            (Some(path), _) => read_profile_csv(path).map_err(io_err(path))?,
            (None, Some(spec)) => {
                let (b, k) = parse_unduloid(spec)?;
                unduloid_profile(b, k, TorusGrid::new(a.n)?)?
            }
            (None, None) => unreachable!("checked above"),
        };
        numerical_spectrum(&profile, method)?
    };
    let path = dir.join("spectrum.json");
    write_json(&path, &report).map_err(io_err(&path))?;
    let mus: Vec<f64> = report.entries.iter().map(|e| e.mu_re).collect();
    let shown = if a.radius.is_some() { &mus[..] } else { &mus[..mus.len().min(a.kmax)] };
    say(stdout, to_json_line(shown)?.trim_end())?;
    write_meta(
        &dir,
        "spectrum",
        a,
        json!({ "leading_real_part": report.leading_real_part(), "count": report.entries.len() }),
        started,
    )?;
    Ok(EXIT_OK)
}

fn cmd_equilibrium(a: &EquilibriumArgs, dir: PathBuf, stdout: &mut dyn Write, started: Instant) -> CliResult<i32> {
    let spec = UnduloidSpec::new(a.b, a.k)?;
    let grid = TorusGrid::new(a.n)?;
    let mut profile = unduloid_profile(a.b, a.k, grid)?;
    let residual = g_divergence(&profile)?.norm_inf();
    let mut polish = serde_json::Value::Null;
    if a.polish {
        let p = polish_equilibrium(&profile, 8)?;
        polish = json!({
            "residual_before": p.residual_before,
            "residual_after": p.residual_after,
            "iterations": p.iterations,
            "max_change": p.profile.max_abs_diff(&profile)?,
        });
        profile = p.profile;
    }
    let h = mean_curvature(&profile)?;
    let path = dir.join("profile.csv");
    write_profile_csv(&path, &profile).map_err(io_err(&path))?;
    if a.svg {
        let curve = unduloid_parametric(&spec, 512)?;
        let series = [
            Series::new(
                "profile",
                grid.nodes().zip(profile.values().iter().copied()).collect(),
            ),
            Series::new(
                "parametric",
                curve.x.iter().copied().zip(curve.rho.iter().copied()).collect(),
            ),
        ];
        let path = dir.join("equilibrium.svg");
        emit_svg(&series, &path).map_err(io_err(&path))?;
    }
    let (rho_min, rho_max) = spec.radius_range();
    let result = json!({
        "class": classify_cmc(a.b),
        "mean_curvature_parameter": spec.h,
        "mean_curvature_grid_mean": h.mean(),
        "rho_min": rho_min,
        "rho_max": rho_max,
        "equivalent_radius": equivalent_cylinder_radius(&profile)?,
        "surface_area": surface_area(&profile)?,
        "residual": residual,
        "polish": polish,
    });
    write_meta(&dir, "equilibrium", a, result, started)?;
    say(stdout, format!("residual={residual:e} min={} max={}", profile.min(), profile.max()))?;
    Ok(EXIT_OK)
}

fn cmd_classify(a: &ClassifyArgs, dir: PathBuf, stdout: &mut dyn Write, started: Instant) -> CliResult<i32> {
    let class = classify_cmc(a.b);
    say(stdout, to_json_line(&class)?.trim_end())?;
    write_meta(&dir, "classify", a, class, started)?;
    Ok(EXIT_OK)
}

/// Adds the mirror image of every value and sorts.
fn symmetrized(grid: &[f64]) -> Vec<f64> {
    let mut all: Vec<f64> = grid.iter().flat_map(|&b| [b, -b]).map(|b| b + 0.0).collect();
    all.sort_by(f64::total_cmp);
    all.dedup();
    all
}

fn cmd_branch(a: &BranchArgs, dir: PathBuf, stdout: &mut dyn Write, started: Instant) -> CliResult<i32> {
    let b_grid = symmetrized(&parse_grid(&a.b_grid)?);
    let samples = trace_branch(a.l, &b_grid, a.n)?;
    let path = dir.join("branch.csv");
    write_branch_csv(&path, &samples).map_err(io_err(&path))?;
    let fit = if a.fit { Some(fit_pitchfork(&samples)?) } else { None };
    let path = dir.join("branch.json");
    write_json(&path, &json!({ "samples": samples, "fit": fit })).map_err(io_err(&path))?;
    if a.svg {
        let series = [Series::new(
            format!("l = {}", a.l),
            samples.iter().map(|s| (s.amplitude, s.lambda)).collect(),
        )];
        let path = dir.join("branch.svg");
        emit_svg(&series, &path).map_err(io_err(&path))?;
    }
    if let Some(f) = &fit {
        say(
            stdout,
            format!("lambda0={} dlambda={} d2lambda={}", f.lambda0, f.dlambda, f.d2lambda),
        )?;
    } else {
        say(stdout, format!("{} samples", samples.len()))?;
    }
    write_meta(&dir, "branch", a, json!({ "b_values": b_grid, "fit": fit }), started)?;
    Ok(EXIT_OK)
}

fn cmd_scan(a: &ScanArgs, dir: PathBuf, stdout: &mut dyn Write, started: Instant) -> CliResult<i32> {
    let crossings = bifurcation_scan(a.lo, a.hi, a.step, a.kmax)?;
    let path = dir.join("scan.json");
    write_json(&path, &crossings).map_err(io_err(&path))?;
    let roots: Vec<f64> = crossings.iter().map(|c| c.lambda_root).collect();
    say(stdout, to_json_line(&roots)?.trim_end())?;
    write_meta(&dir, "scan", a, json!({ "crossings": crossings.len() }), started)?;
    Ok(EXIT_OK)
}

fn cmd_audit(a: &AuditArgs, dir: PathBuf, stdout: &mut dyn Write, started: Instant) -> CliResult<i32> {
    let t = read_trajectory_csv(&a.trajectory).map_err(io_err(&a.trajectory))?;
    let Some((&v0, &a0)) = t.volume.first().zip(t.area.first()) else {
        return Err(usage("trajectory is empty"));
    };
    let volume_drift = t
        .volume
        .iter()
        .map(|v| ((v - v0) / v0).abs())
        .fold(0.0, f64::max);
    let area_increase = t
        .area
        .windows(2)
        .map(|w| (w[1] - w[0]) / a0)
        .fold(0.0, f64::max);
    let times_increasing = t.times.windows(2).all(|w| w[1] > w[0]);
    let volume_ok = volume_drift <= a.volume_tol;
    let area_ok = area_increase <= a.area_slack;
    let ok = volume_ok && area_ok && times_increasing;
    let result = json!({
        "samples": t.times.len(),
        "max_volume_drift": volume_drift,
        "max_area_increase": area_increase,
        "times_increasing": times_increasing,
        "volume_ok": volume_ok,
        "area_ok": area_ok,
        "ok": ok,
    });
    let path = dir.join("audit.json");
    write_json(&path, &result).map_err(io_err(&path))?;
    write_meta(&dir, "audit", a, &result, started)?;
    say(
        stdout,
        format!("ok={ok} volume_drift={volume_drift:e} area_increase={area_increase:e}"),
    )?;
    Ok(if ok { EXIT_OK } else { EXIT_NUMERIC })
}
