//! Command-line front end: one subcommand per capability, JSON reports plus
//! CSV artifacts in an output directory.
//!
//! Report files contain no timestamps and are byte-identical across runs of
//! the same configuration; volatile metadata goes to a `meta.json` sidecar,
//! suppressed with `--no-meta`. Exit codes: 0 success, 1 usage error,
//! 2 domain error (details as JSON on stderr).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use shiftlab::kreigen::{
    power_iteration, IntegralOperatorSpec, PeriodicProfile, DEFAULT_PERIOD,
};
use shiftlab::nondegeneracy::build_pn_capped;
use shiftlab::pantograph::{
    classify_point, ClassifyConfig, LocalLinearDDE, PantographForm, Verdict,
};
use shiftlab::pipeline::{run_coexistence, CoexistenceConfig};
use shiftlab::report::JsonWriter;
use shiftlab::shiftmap::{orbit_to_csv, propagate_classification, rotation_number, Label};
use shiftlab::stepsim::{coefficient_bound, gronwall_check, jet_comparison, match_initial};
use shiftlab::{Error, Result, ShiftMap, TruncatedSeries};

#[derive(Parser)]
#[command(name = "shiftlab", version, about = "Shift-map equation toolkit")]
struct Cli {
    /// Directory for reports and CSVs (default: $SHIFTLAB_OUTPUT_DIR or ".").
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,
    /// Skip the meta.json sidecar (timestamps); report files never carry them.
    #[arg(long, global = true)]
    no_meta: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide analyticity at the fixed point of a constant-coefficient equation.
    Classify(ClassifyArgs),
    /// Linearizing conjugacy for the sine-family shift at t = 0.
    Koenigs(KoenigsArgs),
    /// Leading eigenpair of the positive delayed-integral operator.
    Eigen(EigenArgs),
    /// Full coexistence run on the sine-family delay.
    Coexist(CoexistArgs),
    /// Two-sided method-of-steps solve with boundary matching.
    Steps(StepsArgs),
    /// Rotation number of a circle-map lift.
    Rotation(RotationArgs),
    /// Print the universal nondegeneracy polynomial P_n.
    Pn(PnArgs),
    /// Run many configurations concurrently from a JSON file.
    Sweep(SweepArgs),
}

#[derive(Args, Deserialize, Debug, Clone)]
#[serde(deny_unknown_fields)]
struct ClassifyArgs {
    #[arg(long)]
    a0: f64,
    #[arg(long)]
    b0: f64,
    #[arg(long)]
    lambda: f64,
    #[arg(long)]
    y0: f64,
}

#[derive(Args, Deserialize, Debug, Clone)]
#[serde(deny_unknown_fields)]
struct KoenigsArgs {
    #[arg(long)]
    lambda: f64,
    #[arg(long, default_value_t = 30)]
    #[serde(default = "default_koenigs_order")]
    order: usize,
}

fn default_koenigs_order() -> usize {
    30
}

#[derive(Args, Deserialize, Debug, Clone)]
#[serde(deny_unknown_fields)]
struct EigenArgs {
    /// Sine-family delay parameter; requires --m.
    #[arg(long)]
    lambda: Option<f64>,
    /// Sine-family branch.
    #[arg(long)]
    m: Option<u32>,
    /// Constant delay instead of the sine family.
    #[arg(long)]
    r0: Option<f64>,
    #[arg(long, default_value_t = 2048)]
    #[serde(default = "default_grid")]
    grid: usize,
    #[arg(long, default_value_t = 1e-10)]
    #[serde(default = "default_eigen_tol")]
    tol: f64,
}

fn default_grid() -> usize {
    2048
}

fn default_eigen_tol() -> f64 {
    1e-10
}

#[derive(Args, Deserialize, Debug, Clone)]
#[serde(deny_unknown_fields)]
struct CoexistArgs {
    #[arg(long)]
    lambda: f64,
    #[arg(long)]
    m: u32,
    #[arg(long)]
    n: u32,
    #[arg(long, default_value_t = 1024)]
    #[serde(default = "default_coexist_grid")]
    grid: usize,
    #[arg(long, default_value_t = 40)]
    #[serde(default = "default_coexist_order")]
    order: usize,
    #[arg(long, default_value_t = 256)]
    #[serde(default = "default_w_order")]
    w_order: usize,
}

fn default_coexist_grid() -> usize {
    1024
}

fn default_coexist_order() -> usize {
    40
}

fn default_w_order() -> usize {
    256
}

#[derive(Args, Deserialize, Debug, Clone)]
#[serde(deny_unknown_fields)]
struct StepsArgs {
    #[arg(long)]
    lambda: f64,
    #[arg(long)]
    a0: f64,
    #[arg(long)]
    b0: f64,
    #[arg(long)]
    tau: f64,
    #[arg(long, default_value_t = 1.0)]
    #[serde(default = "default_y0")]
    y0: f64,
    #[arg(long, default_value_t = 20)]
    #[serde(default = "default_depth")]
    depth: usize,
    #[arg(long, default_value_t = 128)]
    #[serde(default = "default_steps")]
    steps: usize,
}

fn default_y0() -> f64 {
    1.0
}

fn default_depth() -> usize {
    20
}

fn default_steps() -> usize {
    128
}

#[derive(Args, Deserialize, Debug, Clone)]
#[serde(deny_unknown_fields)]
struct RotationArgs {
    /// Constant advance of the lift.
    #[arg(long)]
    advance: f64,
    #[arg(long, default_value_t = 0.0)]
    #[serde(default)]
    amplitude: f64,
    #[arg(long, default_value_t = DEFAULT_PERIOD)]
    #[serde(default = "default_period")]
    period: f64,
    #[arg(long, default_value_t = 0.0)]
    #[serde(default)]
    t0: f64,
    #[arg(long, default_value_t = 100_000)]
    #[serde(default = "default_n_iter")]
    n_iter: usize,
}

fn default_period() -> f64 {
    DEFAULT_PERIOD
}

fn default_n_iter() -> usize {
    100_000
}

#[derive(Args, Deserialize, Debug, Clone)]
#[serde(deny_unknown_fields)]
struct PnArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = shiftlab::nondegeneracy::DEFAULT_CAP)]
    #[serde(default = "default_cap")]
    cap: usize,
}

fn default_cap() -> usize {
    shiftlab::nondegeneracy::DEFAULT_CAP
}

#[derive(Args, Debug, Clone)]
struct SweepArgs {
    /// JSON array of run configurations, each `{"command": ..., ...}`.
    #[arg(long)]
    config: PathBuf,
}

/// One entry of a sweep file; unknown keys are rejected.
#[derive(Deserialize, Debug, Clone)]
#[serde(tag = "command", rename_all = "lowercase", deny_unknown_fields)]
enum SweepRun {
    Classify(ClassifyArgs),
    Koenigs(KoenigsArgs),
    Eigen(EigenArgs),
    Coexist(CoexistArgs),
    Steps(StepsArgs),
    Rotation(RotationArgs),
    Pn(PnArgs),
}

/// What a single run produced: a line for stdout and named artifacts.
struct RunOutput {
    stdout: String,
    files: Vec<(String, String)>,
}

fn run_classify(args: &ClassifyArgs) -> Result<RunOutput> {
    let order = 64;
    let map = ShiftMap::Affine { lambda: args.lambda, t0: 0.0 };
    let dde = LocalLinearDDE::new(
        TruncatedSeries::constant(0.0, args.a0, order),
        TruncatedSeries::constant(0.0, args.b0, order),
        TruncatedSeries::constant(0.0, 0.0, order),
        map,
    )?;
    let verdict = classify_point(&dde, args.y0, &ClassifyConfig::default())?;

    let mut w = JsonWriter::new();
    w.string("verdict", verdict.class_name())
        .real("lambda", args.lambda)
        .real("a0", args.a0)
        .real("b0", args.b0)
        .real("y0", args.y0);
    let mut files = Vec::new();
    match &verdict {
        Verdict::Analytic { series } => {
            files.push(("series.csv".into(), series.to_csv()));
        }
        Verdict::AnalyticCandidate { series, w_inf } => {
            w.real("w_inf", *w_inf);
            files.push(("series.csv".into(), series.to_csv()));
        }
        Verdict::Nonanalytic { w_inf, tail_gap, n_used } => {
            w.real("w_inf", *w_inf).real("tail_gap", *tail_gap).uint("n_used", *n_used as u64);
        }
        Verdict::Inconclusive { w_inf } => {
            w.real("w_inf", *w_inf);
        }
    }
    let report = w.finish();
    files.insert(0, ("classify.json".into(), report.clone()));
    Ok(RunOutput { stdout: report, files })
}

fn run_koenigs(args: &KoenigsArgs) -> Result<RunOutput> {
    let map = ShiftMap::SineShift { lambda: args.lambda, offset: 0.0 };
    let conj = shiftlab::koenigs::koenigs_series(&map, 0.0, args.order)?;
    let mut w = JsonWriter::new();
    w.real("lambda", conj.lambda)
        .uint("order", args.order as u64)
        .real("residual", conj.residual)
        .real("sigma2", conj.sigma.coeff(2))
        .real("sigma3", conj.sigma.coeff(3));
    let report = w.finish();
    Ok(RunOutput {
        stdout: report.clone(),
        files: vec![("koenigs.json".into(), report), ("sigma.csv".into(), conj.sigma.to_csv())],
    })
}

fn run_eigen(args: &EigenArgs) -> Result<RunOutput> {
    let r = match (args.r0, args.lambda, args.m) {
        (Some(r0), None, None) => PeriodicProfile::Const(r0),
        (None, Some(lambda), Some(m)) => PeriodicProfile::SineDelay { lambda, m },
        _ => return Err(Error::Invalid(EIGEN_FLAGS_MSG.into())),
    };
    let spec = IntegralOperatorSpec::new(r, PeriodicProfile::Const(1.0), DEFAULT_PERIOD);
    let eigen = power_iteration(&spec, args.grid, args.tol, 20_000)?;
    let report = eigen.to_json();
    Ok(RunOutput {
        stdout: report.clone(),
        files: vec![
            ("eigen.json".into(), report),
            ("eigenfunction.csv".into(), eigen.x.to_csv()),
        ],
    })
}

fn run_coexist(args: &CoexistArgs) -> Result<RunOutput> {
    let cfg = CoexistenceConfig {
        lambda: args.lambda,
        m: args.m,
        n: args.n,
        grid: args.grid,
        order: args.order,
        w_order: args.w_order,
        eigen_tol: 1e-10,
    };
    let report = run_coexistence(&cfg)?;
    let json = report.to_json();
    let mut files = vec![
        ("coexist.json".into(), json.clone()),
        ("w.csv".into(), report.w_diag.to_csv()),
        ("eigenfunction.csv".into(), report.eigen.x.to_csv()),
    ];
    // labeled orbits: basin points of the contractive branch are analytic,
    // the expansive fixed point is nonanalytic when w_inf stays away from 0
    let mut points = Vec::new();
    if let Some(rec) = &report.contractive {
        let shifted = ShiftMap::SineShift {
            lambda: args.lambda,
            offset: -DEFAULT_PERIOD * args.n as f64,
        };
        let seeds = [
            (rec.t_star, Label::Analytic),
            (rec.t_star + 0.05, Label::Analytic),
            (rec.t_star - 0.05, Label::Analytic),
        ];
        points.extend(propagate_classification(&shifted, &seeds, 12, false)?);
    }
    if report.w_diag.w_inf.abs() > 1e-6 * report.w_diag.w[0].abs().max(1.0) {
        let base = ShiftMap::SineShift { lambda: args.lambda, offset: 0.0 };
        points.extend(propagate_classification(&base, &[(0.0, Label::Nonanalytic)], 3, false)?);
    }
    if !points.is_empty() {
        files.push(("orbit.csv".into(), orbit_to_csv(&points)));
    }
    Ok(RunOutput { stdout: json, files })
}

fn run_steps(args: &StepsArgs) -> Result<RunOutput> {
    let order = 8;
    let form = PantographForm {
        alpha: TruncatedSeries::constant(0.0, args.a0, order),
        beta: TruncatedSeries::constant(0.0, args.b0, order),
        gamma: TruncatedSeries::constant(0.0, 0.0, order),
        lambda: args.lambda,
    };
    let matched = match_initial(&form, args.tau, args.y0, args.depth, args.steps)?;
    let k_bound = coefficient_bound(&form, args.tau);
    let gronwall_ok = gronwall_check(&matched.solution, k_bound);
    let jets = jet_comparison(&matched.solution, &form, args.y0, 3)?;

    let mut w = JsonWriter::new();
    w.real("c_minus", matched.c_minus)
        .real("c_plus", matched.c_plus)
        .real("residual", matched.residual)
        .real("lambda_minus", matched.solution.lambda_minus)
        .real("lambda_plus", matched.solution.lambda_plus)
        .boolean("gronwall_ok", gronwall_ok)
        .real_array("jet_fd", &jets.iter().map(|j| j.fd_coeff).collect::<Vec<_>>())
        .real_array(
            "jet_recursion",
            &jets.iter().map(|j| j.recursion_coeff).collect::<Vec<_>>(),
        )
        .real_array("jet_gap", &jets.iter().map(|j| j.gap).collect::<Vec<_>>());
    let report = w.finish();
    Ok(RunOutput {
        stdout: report.clone(),
        files: vec![
            ("steps.json".into(), report),
            ("solution.csv".into(), matched.solution.to_csv()),
        ],
    })
}

fn run_rotation(args: &RotationArgs) -> Result<RunOutput> {
    let map = ShiftMap::PerturbedRotation { advance: args.advance, amplitude: args.amplitude };
    let est = rotation_number(&map, args.period, args.t0, args.n_iter)?;
    let mut w = JsonWriter::new();
    w.real("omega", est.omega)
        .real("error_bar", est.error_bar)
        .uint("n_iter", est.n_iter as u64);
    let report = w.finish();
    Ok(RunOutput { stdout: report.clone(), files: vec![("rotation.json".into(), report)] })
}

fn run_pn(args: &PnArgs) -> Result<RunOutput> {
    let poly = build_pn_capped(args.n, args.cap)?;
    let rendered = poly.render();
    let mut w = JsonWriter::new();
    w.uint("n", args.n as u64)
        .string("polynomial", &rendered)
        .uint("terms", poly.term_count() as u64);
    Ok(RunOutput {
        stdout: format!("{rendered}\n"),
        files: vec![("pn.json".into(), w.finish())],
    })
}

const EIGEN_FLAGS_MSG: &str = "eigen needs either --r0 or both --lambda and --m";

/// Flag-combination problems are usage errors, not domain errors.
fn usage_problem(run: &SweepRun) -> Option<String> {
    match run {
        SweepRun::Eigen(a)
            if !matches!(
                (a.r0, a.lambda, a.m),
                (Some(_), None, None) | (None, Some(_), Some(_))
            ) =>
        {
            Some(EIGEN_FLAGS_MSG.into())
        }
        _ => None,
    }
}

fn dispatch_run(run: &SweepRun) -> Result<RunOutput> {
    match run {
        SweepRun::Classify(a) => run_classify(a),
        SweepRun::Koenigs(a) => run_koenigs(a),
        SweepRun::Eigen(a) => run_eigen(a),
        SweepRun::Coexist(a) => run_coexist(a),
        SweepRun::Steps(a) => run_steps(a),
        SweepRun::Rotation(a) => run_rotation(a),
        SweepRun::Pn(a) => run_pn(a),
    }
}

fn error_json(e: &Error) -> String {
    let mut w = JsonWriter::new();
    w.string("error", &e.to_string());
    w.finish()
}

fn meta_json() -> String {
    let now = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let mut w = JsonWriter::new();
    w.uint("generated_unix", now).string("tool", concat!("shiftlab ", env!("CARGO_PKG_VERSION")));
    w.finish()
}

fn write_outputs(
    dir: &std::path::Path,
    prefix: &str,
    out: &RunOutput,
    no_meta: bool,
) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    for (name, content) in &out.files {
        std::fs::write(dir.join(format!("{prefix}{name}")), content)?;
    }
    if !no_meta {
        std::fs::write(dir.join(format!("{prefix}meta.json")), meta_json())?;
    }
    Ok(())
}

fn usage_error(msg: &str) -> ExitCode {
    eprintln!("{}", error_json(&Error::Invalid(msg.to_string())));
    ExitCode::from(1)
}

fn run_sweep(args: &SweepArgs, dir: &std::path::Path, no_meta: bool) -> ExitCode {
    let text = match std::fs::read_to_string(&args.config) {
        Ok(t) => t,
        Err(e) => return usage_error(&format!("cannot read {}: {e}", args.config.display())),
    };
    let runs: Vec<SweepRun> = match serde_json::from_str(&text) {
        Ok(r) => r,
        Err(e) => return usage_error(&format!("bad sweep config: {e}")),
    };
    for run in &runs {
        if let Some(msg) = usage_problem(run) {
            return usage_error(&msg);
        }
    }
    let results: Vec<Result<RunOutput>> = std::thread::scope(|scope| {
        let handles: Vec<_> =
            runs.iter().map(|run| scope.spawn(move || dispatch_run(run))).collect();
        handles.into_iter().map(|h| h.join().expect("run panicked")).collect()
    });
    let mut failed = false;
    for (i, res) in results.iter().enumerate() {
        match res {
            Ok(out) => {
                let prefix = format!("run{i:03}_");
                if let Err(e) = write_outputs(dir, &prefix, out, no_meta) {
                    return usage_error(&format!("cannot write outputs: {e}"));
                }
                print!("{}", out.stdout);
            }
            Err(e) => {
                eprintln!("{}", error_json(e).trim_end());
                failed = true;
            }
        }
    }
    if failed {
        ExitCode::from(2)
    } else {
        ExitCode::SUCCESS
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            eprint!("{e}");
            return ExitCode::from(1);
        }
    };
    let dir = cli
        .output_dir
        .or_else(|| std::env::var_os("SHIFTLAB_OUTPUT_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));

    let run = match &cli.command {
        Command::Sweep(args) => return run_sweep(args, &dir, cli.no_meta),
        Command::Classify(a) => SweepRun::Classify(a.clone()),
        Command::Koenigs(a) => SweepRun::Koenigs(a.clone()),
        Command::Eigen(a) => SweepRun::Eigen(a.clone()),
        Command::Coexist(a) => SweepRun::Coexist(a.clone()),
        Command::Steps(a) => SweepRun::Steps(a.clone()),
        Command::Rotation(a) => SweepRun::Rotation(a.clone()),
        Command::Pn(a) => SweepRun::Pn(a.clone()),
    };
    if let Some(msg) = usage_problem(&run) {
        return usage_error(&msg);
    }
    match dispatch_run(&run) {
        Ok(out) => {
            if let Err(e) = write_outputs(&dir, "", &out, cli.no_meta) {
                return usage_error(&format!("cannot write outputs: {e}"));
            }
            print!("{}", out.stdout);
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprint!("{}", error_json(&e));
            ExitCode::from(2)
        }
    }
}
