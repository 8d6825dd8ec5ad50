//! The `fou2` command line: `simulate`, `estimate`, `asymptotics`, `mc`.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 numerical,
//! domain or file error. The master seed comes from `--seed`, then from
//! the study config (for `mc`), then from the `FOU2_SEED` environment
//! variable.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::estimate::{estimate_theta_known_h, estimate_theta_unknown_h, Filter};
use crate::json::to_canonical_string;
use crate::mcstudy::{run_study_with, EstimatorKind, SamplerKind, StudyConfig};
use crate::model::{sigma_theta2, ModelParams};
use crate::numerics::{QuadratureSpec, RngStream};
use crate::simulate::{
    sample_integrated, sample_stationary, ObservedPath, SamplingScheme, DEFAULT_REFINE,
};

pub const SEED_ENV: &str = "FOU2_SEED";

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "fou2",
    version,
    about = "Simulation and drift estimation for the fOU process of the second kind"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample a path and write it as `time,value` CSV.
    Simulate(SimulateArgs),
    /// Estimate θ (and H) from a path CSV.
    Estimate(EstimateArgs),
    /// Print Ψ, Ψ′, σ² and σ_θ² for given parameters.
    Asymptotics(AsymptoticsArgs),
    /// Run a Monte Carlo study.
    Mc(McArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum SamplerArg {
    Stationary,
    Integrated,
}

impl From<SamplerArg> for SamplerKind {
    fn from(s: SamplerArg) -> Self {
        match s {
            SamplerArg::Stationary => SamplerKind::Stationary,
            SamplerArg::Integrated => SamplerKind::Integrated,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug)]
#[value(rename_all = "snake_case")]
enum EstimatorArg {
    ThetaKnownH,
    ThetaUnknownH,
    HurstOnly,
}

impl From<EstimatorArg> for EstimatorKind {
    fn from(e: EstimatorArg) -> Self {
        match e {
            EstimatorArg::ThetaKnownH => EstimatorKind::ThetaKnownH,
            EstimatorArg::ThetaUnknownH => EstimatorKind::ThetaUnknownH,
            EstimatorArg::HurstOnly => EstimatorKind::HurstOnly,
        }
    }
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
struct SimulateArgs {
    #[arg(long)]
    theta: f64,
    #[arg(long)]
    hurst: f64,
    /// Number of observations N.
    #[arg(long)]
    n: usize,
    /// Grid spacing Δ_N.
    #[arg(long, conflicts_with = "alpha", required_unless_present = "alpha")]
    delta: Option<f64>,
    /// Mesh exponent α, Δ_N = N^{−α}.
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long, value_enum, default_value = "stationary")]
    sampler: SamplerArg,
    /// Fine-grid refinement of the integrated sampler.
    #[arg(long, default_value_t = DEFAULT_REFINE)]
    refine: usize,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
struct EstimateArgs {
    /// Path CSV with header `time,value`.
    #[arg(long)]
    input: PathBuf,
    /// Known Hurst index; estimates θ̂.
    #[arg(long, conflicts_with = "filter", required_unless_present = "filter")]
    hurst: Option<f64>,
    /// Filter coefficients such as `1,-2,1`; estimates Ĥ and θ̃.
    #[arg(long, allow_hyphen_values = true)]
    filter: Option<String>,
    #[arg(long, default_value_t = 2)]
    filter_order: usize,
    /// Also write the JSON report here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
struct AsymptoticsArgs {
    #[arg(long)]
    theta: f64,
    #[arg(long)]
    hurst: f64,
    #[arg(long)]
    abs_tol: Option<f64>,
    #[arg(long)]
    rel_tol: Option<f64>,
    #[arg(long)]
    max_subdivisions: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
struct McArgs {
    /// StudyConfig JSON; replaces the inline study flags.
    #[arg(long, conflicts_with_all = ["theta", "hurst", "n", "delta", "alpha", "estimator", "replications", "filter", "sampler", "refine"])]
    config: Option<PathBuf>,
    #[arg(long, required_unless_present = "config")]
    theta: Option<f64>,
    #[arg(long, required_unless_present = "config")]
    hurst: Option<f64>,
    #[arg(long, required_unless_present = "config")]
    n: Option<usize>,
    #[arg(long, conflicts_with = "alpha", required_unless_present_any = ["alpha", "config"])]
    delta: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long, value_enum, required_unless_present = "config")]
    estimator: Option<EstimatorArg>,
    #[arg(long, required_unless_present = "config")]
    replications: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    filter: Option<String>,
    #[arg(long, default_value_t = 2)]
    filter_order: usize,
    #[arg(long, value_enum)]
    sampler: Option<SamplerArg>,
    #[arg(long)]
    refine: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Directory for `replications.csv` and `summary.json`.
    #[arg(long)]
    out_dir: PathBuf,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    workers: Option<usize>,
}

fn env_seed() -> Result<Option<u64>> {
    match std::env::var(SEED_ENV) {
        Ok(s) => s.trim().parse().map(Some).map_err(|_| {
            Error::Config(format!("{SEED_ENV}={s} is not an unsigned 64-bit integer"))
        }),
        Err(_) => Ok(None),
    }
}

fn resolve_seed(flag: Option<u64>, config: Option<u64>) -> Result<u64> {
    match flag.or(config) {
        Some(s) => Ok(s),
        None => env_seed()?
            .ok_or_else(|| Error::Config(format!("no seed given: pass --seed or set {SEED_ENV}"))),
    }
}

fn scheme(n: usize, delta: Option<f64>, alpha: Option<f64>) -> Result<SamplingScheme> {
    match (delta, alpha) {
        (Some(d), None) => SamplingScheme::with_mesh(n, d),
        (None, Some(a)) => SamplingScheme::with_mesh_exponent(n, a),
        _ => Err(Error::Config(
            "give exactly one of --delta and --alpha".into(),
        )),
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text)?;
    Ok(())
}

fn cmd_simulate(a: SimulateArgs, out: &mut dyn Write) -> Result<()> {
    let params = ModelParams::new(a.theta, a.hurst)?;
    let scheme = scheme(a.n, a.delta, a.alpha)?;
    let stream = RngStream::new(resolve_seed(a.seed, None)?, 0);
    let path = match a.sampler {
        SamplerArg::Stationary => sample_stationary(params, scheme, stream)?,
        SamplerArg::Integrated => sample_integrated(params, scheme, a.refine, stream)?,
    };
    path.save(&a.out)?;
    writeln!(
        out,
        "N={} mesh={} horizon={} points={}",
        scheme.n(),
        scheme.mesh(),
        scheme.horizon(),
        path.len()
    )?;
    Ok(())
}

fn cmd_estimate(a: EstimateArgs, out: &mut dyn Write) -> Result<()> {
    let path = ObservedPath::load(&a.input)?;
    let report = match (a.hurst, &a.filter) {
        (Some(h), None) => estimate_theta_known_h(&path, h)?,
        (None, Some(f)) => estimate_theta_unknown_h(&path, &Filter::parse(f, a.filter_order)?)?,
        _ => {
            return Err(Error::Config(
                "give exactly one of --hurst and --filter".into(),
            ))
        }
    };
    let text = to_canonical_string(&report)?;
    if let Some(p) = &a.out {
        write_text(p, &text)?;
    }
    out.write_all(text.as_bytes())?;
    Ok(())
}

fn cmd_asymptotics(a: AsymptoticsArgs, out: &mut dyn Write) -> Result<()> {
    let params = ModelParams::new(a.theta, a.hurst)?;
    let d = QuadratureSpec::default();
    let spec = QuadratureSpec::new(
        a.abs_tol.unwrap_or(d.abs_tol),
        a.rel_tol.unwrap_or(d.rel_tol),
        a.max_subdivisions.unwrap_or(d.max_subdivisions),
    )
    .map_err(|e| Error::Config(e.to_string()))?;
    let text = to_canonical_string(&sigma_theta2(params, &spec)?)?;
    if let Some(p) = &a.out {
        write_text(p, &text)?;
    }
    out.write_all(text.as_bytes())?;
    Ok(())
}

fn study_config(a: &McArgs) -> Result<StudyConfig> {
    if let Some(path) = &a.config {
        let text = fs::read_to_string(path)?;
        let mut value: serde_json::Value = serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let obj = value
            .as_object_mut()
            .ok_or_else(|| Error::Config("study config must be a JSON object".into()))?;
        let from_file =
            match obj.get("master_seed") {
                None => None,
                Some(v) => Some(v.as_u64().ok_or_else(|| {
                    Error::Config("master_seed must be an unsigned integer".into())
                })?),
            };
        obj.insert(
            "master_seed".into(),
            resolve_seed(a.seed, from_file)?.into(),
        );
        let config: StudyConfig = serde_json::from_value(value)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        config.validate()?;
        return Ok(config);
    }
    let missing = |name: &str| Error::Config(format!("--{name} is required without --config"));
    let estimator: EstimatorKind = a.estimator.ok_or_else(|| missing("estimator"))?.into();
    let filter = match &a.filter {
        Some(f) => Some(Filter::parse(f, a.filter_order)?),
        None => None,
    };
    let config = StudyConfig {
        params: ModelParams::new(
            a.theta.ok_or_else(|| missing("theta"))?,
            a.hurst.ok_or_else(|| missing("hurst"))?,
        )?,
        scheme: scheme(a.n.ok_or_else(|| missing("n"))?, a.delta, a.alpha)?,
        estimator,
        replications: a.replications.ok_or_else(|| missing("replications"))?,
        filter,
        sampler: a.sampler.map(Into::into).unwrap_or_default(),
        refine: a.refine.unwrap_or(DEFAULT_REFINE),
        master_seed: resolve_seed(a.seed, None)?,
    };
    config.validate()?;
    Ok(config)
}

fn cmd_mc(a: McArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let config = study_config(&a)?;
    if a.workers == Some(0) {
        return Err(Error::Config("--workers must be at least 1".into()));
    }
    let result = run_study_with(&config, a.workers)?;
    fs::create_dir_all(&a.out_dir)?;
    let mut csv = Vec::new();
    result.write_records_csv(&mut csv)?;
    fs::write(a.out_dir.join("replications.csv"), csv)?;
    write_text(
        &a.out_dir.join("summary.json"),
        &to_canonical_string(&result.summary)?,
    )?;
    let s = &result.summary;
    writeln!(
        out,
        "replications={} failed={} mean={} sd={} bias={} ks_p={}",
        s.replications, s.failed_replications, s.estimate_mean, s.estimate_sd, s.bias, s.ks_p
    )?;
    writeln!(err, "runtime {:.2} s", s.runtime_seconds)?;
    Ok(())
}

/// Exit code for an error.
pub fn exit_code(e: &Error) -> i32 {
    if e.is_usage() {
        EXIT_USAGE
    } else {
        EXIT_NUMERICAL
    }
}

/// Parses `args` (including the program name) and runs the subcommand.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK {
                out.write_all(text.as_bytes())
            } else {
                err.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let result = match cli.command {
        Command::Simulate(a) => cmd_simulate(a, out),
        Command::Estimate(a) => cmd_estimate(a, out),
        Command::Asymptotics(a) => cmd_asymptotics(a, out),
        Command::Mc(a) => cmd_mc(a, out, err),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(
            std::iter::once("fou2").chain(args.iter().copied()),
            &mut out,
            &mut err,
        );
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(run_capture(&[]).0, EXIT_USAGE);
        assert_eq!(run_capture(&["frobnicate"]).0, EXIT_USAGE);
        let (code, _, err) = run_capture(&["asymptotics", "--theta", "0", "--hurst", "0.7"]);
        assert_eq!(code, EXIT_USAGE, "{err}");
        let (code, _, err) = run_capture(&["asymptotics", "--theta", "1", "--hurst", "0.4"]);
        assert_eq!(code, EXIT_USAGE);
        assert!(err.contains("(1/2, 1)"), "{err}");
        let (code, _, _) = run_capture(&["asymptotics", "--theta", "-1", "--hurst", "0.7"]);
        assert_eq!(code, EXIT_USAGE);
        let (code, _, _) = run_capture(&[
            "simulate", "--theta", "1", "--hurst", "0.7", "--n", "10", "--delta", "0.1", "--alpha",
            "0.5", "--seed", "1", "--out", "x.csv",
        ]);
        assert_eq!(code, EXIT_USAGE);
    }

    #[test]
    fn help_exits_zero() {
        let (code, out, _) = run_capture(&["--help"]);
        assert_eq!(code, EXIT_OK);
        assert!(out.contains("simulate"));
    }

    #[test]
    fn asymptotics_report() {
        let (code, out, err) = run_capture(&["asymptotics", "--theta", "1", "--hurst", "0.7"]);
        assert_eq!(code, EXIT_OK, "{err}");
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        let psi = v["psi"].as_f64().unwrap();
        assert!((psi - 0.7f64.powf(1.4)).abs() < 1e-12);
        assert!(v["sigma_theta2"].as_f64().unwrap() > 0.0);
        assert_eq!(to_canonical_string(&v).unwrap(), out);
        let (code, _, _) = run_capture(&[
            "asymptotics",
            "--theta",
            "1",
            "--hurst",
            "0.7",
            "--rel-tol",
            "0",
        ]);
        assert_eq!(code, EXIT_USAGE);
    }
}
