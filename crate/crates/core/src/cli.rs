//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 on I/O failure or a failed property, 2 on
//! invalid arguments. Angles are read in degrees and converted once.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::error::Error;
use crate::protocol::PolarizerAngle;
use crate::report::{self, AngleEcho, ChshRow, EstimateRow, Format, RunManifest};
use crate::stats::{
    chsh_combination, chsh_maximize, joint_expectation_sharded, quantum_reference, ChshSettings,
};
use crate::verify::{run_suite, Suite};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "s3-bell",
    version,
    about = "Hidden-handedness EPR correlation experiments"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate the joint correlation at one pair of settings.
    Simulate(SimulateArgs),
    /// Tabulate the joint correlation over a range of Bob's angle.
    Scan(ScanArgs),
    /// Evaluate or maximize the CHSH combination.
    Chsh(ChshArgs),
    /// Run an invariant suite: algebra, topology, protocol or all.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    /// Trials per setting.
    #[arg(long, default_value_t = 10_000)]
    pub n: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Worker threads; results are identical for any value.
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Alice's polarizer angle in degrees.
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: f64,
    /// Bob's polarizer angle in degrees.
    #[arg(long, allow_negative_numbers = true)]
    pub beta: f64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    /// Alice's fixed angle in degrees.
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
    pub alpha: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub beta_start: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub beta_stop: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub beta_step: f64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct ChshArgs {
    /// α α′ β β′ in degrees.
    #[arg(allow_negative_numbers = true, num_args = 0..)]
    pub angles: Vec<f64>,
    /// Grid-search the settings instead of evaluating given ones.
    #[arg(long)]
    pub maximize: bool,
    /// Grid spacing in degrees for --maximize.
    #[arg(long, default_value_t = 0.25)]
    pub step: f64,
    /// Use cos 2(α−β) instead of Monte Carlo estimates.
    #[arg(long)]
    pub analytic: bool,
    /// Monte Carlo trials per setting.
    #[arg(long)]
    pub n: Option<u64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    pub suite: String,
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

/// Failure of a command, carrying its exit code.
#[derive(Debug)]
pub struct CommandError {
    pub code: i32,
    pub message: String,
}

impl CommandError {
    fn usage(message: impl Into<String>) -> Self {
        CommandError {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl From<Error> for CommandError {
    fn from(err: Error) -> Self {
        let code = match err {
            Error::ZeroTrials
            | Error::NonFinite(_)
            | Error::InvalidRange(_)
            | Error::NonPositiveResolution(_)
            | Error::UnknownSuite(_) => EXIT_USAGE,
            _ => EXIT_FAILURE,
        };
        CommandError {
            code,
            message: err.to_string(),
        }
    }
}

type CmdResult = std::result::Result<i32, CommandError>;

/// Parse `argv` (including the program name) and run. Returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let args: Vec<String> = argv
        .iter()
        .skip(1)
        .map(|a| a.to_string_lossy().into_owned())
        .collect();
    let result = match &cli.command {
        Command::Simulate(a) => cmd_simulate(a, &args),
        Command::Scan(a) => cmd_scan(a, &args),
        Command::Chsh(a) => cmd_chsh(a, &args),
        Command::Verify(a) => cmd_verify(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}

fn check_common(common: &Common) -> std::result::Result<(), CommandError> {
    if common.n == 0 {
        return Err(Error::ZeroTrials.into());
    }
    if common.threads == 0 {
        return Err(CommandError::usage("--threads must be at least 1"));
    }
    Ok(())
}

fn finite(value: f64, what: &'static str) -> std::result::Result<f64, CommandError> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFinite(what).into())
    }
}

fn write_output(
    bytes: &[u8],
    out: Option<&Path>,
    command: &str,
    args: &[String],
    config: serde_json::Value,
    started: Instant,
) -> std::result::Result<(), CommandError> {
    report::emit(bytes, out)?;
    if let Some(path) = out {
        let manifest = RunManifest::new(
            command,
            args.to_vec(),
            config,
            started.elapsed().as_secs_f64(),
        );
        manifest.write_beside(path)?;
    }
    Ok(())
}

pub fn cmd_simulate(a: &SimulateArgs, args: &[String]) -> CmdResult {
    let started = Instant::now();
    check_common(&a.common)?;
    let (alpha_deg, beta_deg) = (finite(a.alpha, "alpha")?, finite(a.beta, "beta")?);
    let alpha = PolarizerAngle::from_degrees(alpha_deg);
    let beta = PolarizerAngle::from_degrees(beta_deg);
    let c = &a.common;
    let estimate = joint_expectation_sharded(alpha, beta, c.n, c.seed, c.threads)?;
    let row = EstimateRow::new(alpha, beta_deg, &estimate, c.seed);
    let bytes = report::encode_estimates(&[row], c.format)?;
    let config = json!({
        "alpha": AngleEcho::from_degrees(alpha_deg),
        "beta": AngleEcho::from_degrees(beta_deg),
        "trial_count": c.n,
        "seed": c.seed,
        "threads": c.threads,
        "format": c.format,
    });
    write_output(&bytes, c.out.as_deref(), "simulate", args, config, started)?;
    Ok(EXIT_OK)
}

/// `start, start + step, …` up to and including `stop` (with a small slack).
pub fn scan_angles(start: f64, stop: f64, step: f64) -> crate::Result<Vec<f64>> {
    if !(start.is_finite() && stop.is_finite() && step.is_finite()) {
        return Err(Error::InvalidRange("non-finite bound".into()));
    }
    if step <= 0.0 {
        return Err(Error::InvalidRange(format!(
            "step must be positive, got {step}"
        )));
    }
    if stop < start {
        return Err(Error::InvalidRange(format!(
            "stop {stop} is below start {start}"
        )));
    }
    let count = ((stop - start) / step + 1e-9).floor() as u64 + 1;
    if count > 10_000_000 {
        return Err(Error::InvalidRange(format!("{count} rows requested")));
    }
    Ok((0..count).map(|k| start + k as f64 * step).collect())
}

pub fn cmd_scan(a: &ScanArgs, args: &[String]) -> CmdResult {
    let started = Instant::now();
    check_common(&a.common)?;
    let alpha_deg = finite(a.alpha, "alpha")?;
    let alpha = PolarizerAngle::from_degrees(alpha_deg);
    let betas = scan_angles(a.beta_start, a.beta_stop, a.beta_step)?;
    let c = &a.common;
    let rows = betas
        .iter()
        .map(|&beta_deg| {
            let beta = PolarizerAngle::from_degrees(beta_deg);
            let estimate = joint_expectation_sharded(alpha, beta, c.n, c.seed, c.threads)?;
            Ok(EstimateRow::new(alpha, beta_deg, &estimate, c.seed))
        })
        .collect::<crate::Result<Vec<_>>>()?;
    let bytes = report::encode_estimates(&rows, c.format)?;
    let config = json!({
        "alpha": AngleEcho::from_degrees(alpha_deg),
        "beta_start": AngleEcho::from_degrees(a.beta_start),
        "beta_stop": AngleEcho::from_degrees(a.beta_stop),
        "beta_step": AngleEcho::from_degrees(a.beta_step),
        "trial_count": c.n,
        "seed": c.seed,
        "threads": c.threads,
        "format": c.format,
    });
    write_output(&bytes, c.out.as_deref(), "scan", args, config, started)?;
    Ok(EXIT_OK)
}

pub fn cmd_chsh(a: &ChshArgs, args: &[String]) -> CmdResult {
    let started = Instant::now();
    match (a.maximize, a.angles.len()) {
        (true, 0) | (false, 4) => {}
        (true, _) => return Err(CommandError::usage("--maximize takes no explicit angles")),
        (false, k) => {
            return Err(CommandError::usage(format!(
                "expected 4 angles (α α′ β β′), got {k}"
            )))
        }
    }
    let n = match (a.analytic, a.n) {
        (true, None) => None,
        (false, Some(0)) => return Err(Error::ZeroTrials.into()),
        (false, Some(n)) => Some(n),
        (true, Some(_)) => {
            return Err(CommandError::usage(
                "--analytic and --n are mutually exclusive",
            ))
        }
        (false, None) => return Err(CommandError::usage("either --analytic or --n is required")),
    };
    if a.threads == 0 {
        return Err(CommandError::usage("--threads must be at least 1"));
    }
    for angle in &a.angles {
        finite(*angle, "angle")?;
    }

    let (seed, threads) = (a.seed, a.threads);
    let monte_carlo = |alpha: PolarizerAngle, beta: PolarizerAngle, n: u64| {
        joint_expectation_sharded(alpha, beta, n, seed, threads).map(|e| e.scalar_mean)
    };

    let settings = if a.maximize {
        if !a.step.is_finite() || a.step <= 0.0 {
            return Err(Error::NonPositiveResolution(a.step).into());
        }
        let step = a.step.to_radians();
        let (settings, _) = match n {
            None => chsh_maximize(step, quantum_reference)?,
            Some(n) => {
                let mut failure = None;
                let found = chsh_maximize(step, |x, y| {
                    monte_carlo(x, y, n).unwrap_or_else(|e| {
                        failure.get_or_insert(e);
                        f64::NAN
                    })
                })?;
                if let Some(e) = failure {
                    return Err(e.into());
                }
                found
            }
        };
        settings
    } else {
        ChshSettings::from_degrees(a.angles[0], a.angles[1], a.angles[2], a.angles[3])
    };

    let terms = match n {
        None => settings.pairs().map(|(x, y)| quantum_reference(x, y)),
        Some(n) => {
            let mut terms = [0.0; 4];
            for (t, (x, y)) in terms.iter_mut().zip(settings.pairs()) {
                *t = monte_carlo(x, y, n)?;
            }
            terms
        }
    };
    let value = chsh_combination(terms);
    let row = ChshRow {
        alpha_deg: settings.alpha.degrees(),
        alpha_prime_deg: settings.alpha_prime.degrees(),
        beta_deg: settings.beta.degrees(),
        beta_prime_deg: settings.beta_prime.degrees(),
        mode: if n.is_some() {
            "monte_carlo"
        } else {
            "analytic"
        }
        .to_string(),
        e_ab: terms[0],
        e_ab_prime: terms[1],
        e_a_prime_b: terms[2],
        e_a_prime_b_prime: terms[3],
        chsh: value,
        n,
        seed: n.map(|_| seed),
    };

    if let Some(path) = &a.out {
        let bytes = report::encode_chsh(std::slice::from_ref(&row), a.format)?;
        let config = json!({
            "angles": a.angles.iter().map(|d| AngleEcho::from_degrees(*d)).collect::<Vec<_>>(),
            "maximize": a.maximize,
            "step": AngleEcho::from_degrees(a.step),
            "analytic": a.analytic,
            "trial_count": n,
            "seed": seed,
            "threads": threads,
            "format": a.format,
        });
        write_output(&bytes, Some(path), "chsh", args, config, started)?;
    }
    if a.maximize {
        println!(
            "argmax (deg): alpha={} alpha'={} beta={} beta'={}",
            row.alpha_deg, row.alpha_prime_deg, row.beta_deg, row.beta_prime_deg
        );
    }
    println!("CHSH = {}", report::fmt_f64(value));
    Ok(EXIT_OK)
}

pub fn cmd_verify(a: &VerifyArgs) -> CmdResult {
    let suite: Suite = a.suite.parse()?;
    if a.samples == 0 {
        return Err(CommandError::usage("--samples must be at least 1"));
    }
    let checks = run_suite(suite, a.samples, a.seed);
    for c in &checks {
        println!("{c}");
    }
    let failed = checks.iter().filter(|c| !c.passed()).count();
    println!("{} properties, {} failed", checks.len(), failed);
    Ok(if failed == 0 { EXIT_OK } else { EXIT_FAILURE })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scan_angle_ranges() {
        assert_eq!(scan_angles(0.0, 90.0, 90.0).unwrap(), vec![0.0, 90.0]);
        assert_eq!(scan_angles(45.0, 45.0, 1.0).unwrap(), vec![45.0]);
        assert_eq!(scan_angles(0.0, 180.0, 5.0).unwrap().len(), 37);
        assert_eq!(scan_angles(0.0, 1.0, 0.1).unwrap().len(), 11);
        assert!(scan_angles(0.0, 10.0, 0.0).is_err());
        assert!(scan_angles(10.0, 0.0, 1.0).is_err());
        assert!(scan_angles(0.0, f64::NAN, 1.0).is_err());
    }

    #[test]
    fn error_codes() {
        assert_eq!(CommandError::from(Error::ZeroTrials).code, EXIT_USAGE);
        assert_eq!(
            CommandError::from(Error::UnknownSuite("x".into())).code,
            EXIT_USAGE
        );
        let io = Error::Io(std::io::Error::other("disk"));
        assert_eq!(CommandError::from(io).code, EXIT_FAILURE);
    }

    #[test]
    fn bad_chsh_combinations_are_usage_errors() {
        for argv in [
            vec!["s3-bell", "chsh", "0", "1", "2", "--analytic"],
            vec![
                "s3-bell",
                "chsh",
                "--maximize",
                "0",
                "1",
                "2",
                "3",
                "--analytic",
            ],
            vec!["s3-bell", "chsh", "0", "1", "2", "3"],
            vec![
                "s3-bell",
                "chsh",
                "0",
                "1",
                "2",
                "3",
                "--analytic",
                "--n",
                "10",
            ],
            vec!["s3-bell", "chsh", "0", "1", "2", "3", "--n", "0"],
            vec!["s3-bell", "chsh", "--maximize", "--step", "0", "--analytic"],
        ] {
            assert_eq!(run(argv.clone()), EXIT_USAGE, "{argv:?}");
        }
    }

    #[test]
    fn unknown_suite_is_usage_error() {
        assert_eq!(run(["s3-bell", "verify", "foo"]), EXIT_USAGE);
        assert_eq!(
            run(["s3-bell", "verify", "protocol", "--samples", "1"]),
            EXIT_OK
        );
    }
}
