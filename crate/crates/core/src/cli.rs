//! Command-line front end. Every command returns a [`CommandResult`] whose
//! payload is printed to stdout by the binary.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{ArgGroup, Parser, Subcommand};
use serde::Serialize;

use crate::conformal::sigma_k_curvature;
use crate::divisor::{classify, gbc_total, ConicDivisor, DEFAULT_CRITICAL_EPS};
use crate::error::Error;
use crate::io::Sig17;
use crate::levelset::{self, gbc_from_profile, level_grid, relation_report, DEFAULT_LEVELS};
use crate::radial::{
    football_profile, measured_asymptotics, reconstruct_factor, sphere_profile, RadialProfile,
    DEFAULT_TOLERANCE, DEFAULT_T_MAX,
};
use crate::verify::{run_suite, Check, Suite, VerifyConfig, DEFAULT_SAMPLES, DEFAULT_SEED};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Grid step of the closed-form sphere profile.
pub const SPHERE_STEP: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommandResult {
    pub exit_code: i32,
    pub payload: String,
}

impl CommandResult {
    fn json(exit_code: i32, value: &impl Serialize) -> Self {
        let payload = serde_json::to_string_pretty(value)
            .unwrap_or_else(|e| format!("{{\"error\":\"{e}\"}}"));
        Self { exit_code, payload }
    }

    fn usage(err: impl std::fmt::Display) -> Self {
        Self::error(EXIT_USAGE, err)
    }

    fn error(exit_code: i32, err: impl std::fmt::Display) -> Self {
        #[derive(Serialize)]
        struct Message {
            error: String,
        }
        Self::json(
            exit_code,
            &Message {
                error: err.to_string(),
            },
        )
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "conic-sigma2",
    version,
    about = "σ₂ curvature on conic 4-spheres"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Classify a divisor given by its cone orders.
    Classify {
        /// Comma-separated orders in (-1, 0), e.g. -0.3,-0.6
        #[arg(long, allow_hyphen_values = true)]
        betas: String,
        #[arg(long, default_value_t = DEFAULT_CRITICAL_EPS)]
        eps: f64,
    },
    /// Integrate a football (or tabulate the round sphere) and write its profile CSV.
    #[command(group(ArgGroup::new("shape").required(true).args(["beta", "sphere"])))]
    Football {
        #[arg(long, allow_hyphen_values = true)]
        beta: Option<f64>,
        #[arg(long)]
        sphere: bool,
        #[arg(long, default_value_t = DEFAULT_T_MAX)]
        tmax: f64,
        #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
        tol: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Level-set summary of a profile CSV.
    Levelset {
        #[arg(long)]
        profile: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the acceptance checks.
    Verify {
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_SAMPLES)]
        samples: usize,
    },
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> CommandResult
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => execute(cli.command),
        Err(e) => {
            let exit_code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            CommandResult {
                exit_code,
                payload: e.render().to_string(),
            }
        }
    }
}

pub fn execute(command: Command) -> CommandResult {
    match command {
        Command::Classify { betas, eps } => cmd_classify(&betas, eps),
        Command::Football {
            beta,
            sphere,
            tmax,
            tol,
            out,
        } => cmd_football(if sphere { None } else { beta }, tmax, tol, &out),
        Command::Levelset { profile, out } => cmd_levelset(&profile, &out),
        Command::Verify {
            suite,
            seed,
            samples,
        } => cmd_verify(&suite, seed, samples),
    }
}

fn parse_betas(list: &str) -> Result<Vec<f64>, Error> {
    if list.trim().is_empty() {
        return Err(Error::Parse("empty list of cone orders".into()));
    }
    list.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("{s:?}: {e}")))
        })
        .collect()
}

#[derive(Serialize)]
struct ClassifyPayload {
    kind: &'static str,
    /// 1-based.
    witness_index: Option<usize>,
    lhs: Sig17,
    rhs: Sig17,
    gbc_total: Sig17,
}

pub fn cmd_classify(betas: &str, eps: f64) -> CommandResult {
    let outcome = (|| {
        let d = ConicDivisor::new(parse_betas(betas)?, false)?;
        let c = classify(&d, eps)?;
        Ok::<_, Error>((c, gbc_total(&d, 4)?))
    })();
    match outcome {
        Ok((c, total)) => CommandResult::json(
            EXIT_OK,
            &ClassifyPayload {
                kind: c.kind.as_str(),
                witness_index: c.witness_index.map(|i| i + 1),
                lhs: Sig17(c.lhs),
                rhs: Sig17(c.rhs),
                gbc_total: Sig17(total),
            },
        ),
        Err(e) => CommandResult::usage(e),
    }
}

#[derive(Serialize)]
struct FootballSummary {
    beta: Sig17,
    t_max: Sig17,
    tol: Sig17,
    points: usize,
    slope_minus: Sig17,
    slope_plus: Sig17,
    beta_zero: Sig17,
    beta_infinity: Sig17,
    decayed: bool,
    k_drift: Sig17,
    sigma2_residual: Sig17,
    gbc: Sig17,
    out: String,
}

/// `max |σ₂ − 3/2|` of the reconstructed factor at integer cylinder times
/// where `e^{4h} ≥ 1e-6`.
fn sigma2_residual(p: &RadialProfile) -> Result<f64, Error> {
    let u = reconstruct_factor(p);
    let (t0, t1) = p.t_range();
    let mut worst = 0.0f64;
    for k in t0.ceil() as i64..=t1.floor() as i64 {
        let t = k as f64;
        if (4.0 * p.state_at(t)?.0).exp() < 1e-6 {
            continue;
        }
        let r = t.exp();
        let x = [0.5 * r, -0.5 * r, 0.5 * r, 0.5 * r];
        worst = worst.max((sigma_k_curvature(&u, &x, 2)? - 1.5).abs());
    }
    Ok(worst)
}

#[derive(Serialize)]
struct IntegrationFailure {
    error: &'static str,
    reason: String,
    t: Sig17,
    h: Sig17,
    dh: Sig17,
}

pub fn cmd_football(beta: Option<f64>, t_max: f64, tol: f64, out: &Path) -> CommandResult {
    if let Some(b) = beta {
        if !(b > -1.0 && b < 0.0) {
            return CommandResult::usage(format!(
                "cone order {b} outside (-1, 0); use --sphere for the smooth case"
            ));
        }
    }
    if !(t_max > 0.0 && t_max.is_finite() && tol > 0.0) {
        return CommandResult::usage("--tmax and --tol must be positive");
    }
    let profile = match beta {
        Some(b) => football_profile(b, t_max, tol),
        None => sphere_profile(t_max, SPHERE_STEP),
    };
    let profile = match profile {
        Ok(p) => p,
        Err(Error::Integration { t, h, dh, reason }) => {
            return CommandResult::json(
                EXIT_FAILURE,
                &IntegrationFailure {
                    error: "integration failed",
                    reason,
                    t: Sig17(t),
                    h: Sig17(h),
                    dh: Sig17(dh),
                },
            )
        }
        Err(e) => return CommandResult::usage(e),
    };
    let written = File::create(out).map_err(Error::from).and_then(|f| {
        let mut w = BufWriter::new(f);
        profile.write_csv(&mut w)?;
        w.flush().map_err(Error::from)
    });
    if let Err(e) = written {
        return CommandResult::usage(e);
    }
    let summary = measured_asymptotics(&profile).and_then(|a| {
        Ok(FootballSummary {
            beta: Sig17(profile.beta()),
            t_max: Sig17(t_max),
            tol: Sig17(tol),
            points: profile.len(),
            slope_minus: Sig17(a.slope_minus),
            slope_plus: Sig17(a.slope_plus),
            beta_zero: Sig17(a.beta_zero),
            beta_infinity: Sig17(a.beta_infinity),
            decayed: a.decayed,
            k_drift: Sig17(profile.first_integral_drift()),
            sigma2_residual: Sig17(sigma2_residual(&profile)?),
            gbc: Sig17(gbc_from_profile(&profile)),
            out: out.display().to_string(),
        })
    });
    match summary {
        Ok(s) => CommandResult::json(EXIT_OK, &s),
        Err(e) => CommandResult::error(EXIT_FAILURE, e),
    }
}

#[derive(Serialize)]
struct LimitPayload {
    z_end: Sig17,
    z_start: Sig17,
    #[serde(rename = "D_end")]
    d_end: Sig17,
    #[serde(rename = "D_start")]
    d_start: Sig17,
    #[serde(rename = "C_end")]
    c_end: Sig17,
    #[serde(rename = "C_start")]
    c_start: Sig17,
}

#[derive(Serialize)]
struct LevelsetPayload {
    beta: Sig17,
    levels: usize,
    #[serde(rename = "max_abs_CA")]
    max_abs_ca: Sig17,
    #[serde(rename = "max_abs_AD")]
    max_abs_ad: Sig17,
    #[serde(rename = "max_abs_dA_dD")]
    max_abs_da_dd: Sig17,
    #[serde(rename = "min_M_slope")]
    min_m_slope: Sig17,
    #[serde(rename = "M_spread")]
    m_spread: Sig17,
    #[serde(rename = "M_mean")]
    m_mean: Sig17,
    limit_errors: LimitPayload,
    gbc: Sig17,
    out: String,
}

pub fn cmd_levelset(profile: &Path, out: &Path) -> CommandResult {
    let parsed = File::open(profile)
        .map_err(|e| Error::Parse(format!("{}: {e}", profile.display())))
        .and_then(|f| RadialProfile::read_csv(BufReader::new(f)));
    let p = match parsed {
        Ok(p) => p,
        Err(e) => return CommandResult::usage(e),
    };
    let report = level_grid(&p, DEFAULT_LEVELS).and_then(|levels| relation_report(&p, &levels));
    let report = match report {
        Ok(r) => r,
        Err(e) => return CommandResult::usage(e),
    };
    let written = File::create(out).map_err(Error::from).and_then(|f| {
        let mut w = BufWriter::new(f);
        levelset::csv::write_summaries(&report.summaries, &mut w)?;
        w.flush().map_err(Error::from)
    });
    if let Err(e) = written {
        return CommandResult::usage(e);
    }
    let e = report.limit_errors;
    CommandResult::json(
        EXIT_OK,
        &LevelsetPayload {
            beta: Sig17(p.beta()),
            levels: report.summaries.len(),
            max_abs_ca: Sig17(report.max_abs_ca),
            max_abs_ad: Sig17(report.max_abs_ad),
            max_abs_da_dd: Sig17(report.max_abs_da_dd),
            min_m_slope: Sig17(report.min_m_slope),
            m_spread: Sig17(report.m_spread),
            m_mean: Sig17(report.m_mean),
            limit_errors: LimitPayload {
                z_end: Sig17(e.z_end),
                z_start: Sig17(e.z_start),
                d_end: Sig17(e.d_end),
                d_start: Sig17(e.d_start),
                c_end: Sig17(e.c_end),
                c_start: Sig17(e.c_start),
            },
            gbc: Sig17(gbc_from_profile(&p)),
            out: out.display().to_string(),
        },
    )
}

#[derive(Serialize)]
struct VerifyPayload {
    suite: &'static str,
    passed: bool,
    checks: Vec<Check>,
}

pub fn cmd_verify(suite: &str, seed: u64, samples: usize) -> CommandResult {
    let suite: Suite = match suite.parse() {
        Ok(s) => s,
        Err(e) => return CommandResult::usage(e),
    };
    if samples < levelset::MIN_SAMPLES {
        return CommandResult::usage(format!(
            "--samples must be at least {}",
            levelset::MIN_SAMPLES
        ));
    }
    let checks = run_suite(suite, &VerifyConfig { seed, samples });
    let passed = checks.iter().all(|c| c.passed);
    CommandResult::json(
        if passed { EXIT_OK } else { EXIT_FAILURE },
        &VerifyPayload {
            suite: suite.as_str(),
            passed,
            checks,
        },
    )
}
