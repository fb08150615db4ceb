use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::de::DeserializeOwned;

use permbound::bounds::{bound_report, BoundOptions};
use permbound::error::{Error, Result};
use permbound::experiments::{
    run_concentration, run_tightness, run_verify, tail_rows_csv, tightness_csv,
    ConcentrationConfig, TightnessConfig, VerifyConfig,
};
use permbound::glynn::estimate_perm;
use permbound::io::{read_matrix, to_json_string};
use permbound::linalg::{op_norm_default, Field};
use permbound::permanent::{perm_glynn_exact, perm_ryser, PermValue, GLYNN_EXACT_MAX_N};

#[derive(Parser)]
#[command(
    name = "permbound",
    version,
    about = "Matrix permanents and their operator-norm bounds"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact permanent (Ryser, cross-checked by Glynn enumeration for n <= 26)
    Perm { file: PathBuf },
    /// Monte Carlo estimate from the Glynn estimator
    Estimate {
        file: PathBuf,
        #[arg(long)]
        samples: usize,
        #[arg(long)]
        seed: u64,
        /// Scale T >= operator norm; defaults to the operator norm
        #[arg(long = "T")]
        t: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Every log-space bound with the exact permanent when feasible
    Bounds {
        file: PathBuf,
        #[arg(long = "T")]
        t: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Soundness sweep of all bounds against exact permanents
    Verify {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Empirical tails of ||AX||_1 and the partition events (CSV)
    Concentration {
        #[arg(long)]
        config: Option<PathBuf>,
        /// CSV output; a JSON summary is written next to it
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// The delta*I table (CSV)
    Tightness {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

enum Outcome {
    Pass,
    Fail(String),
}

fn load_config<T: DeserializeOwned + Default>(path: Option<&Path>) -> Result<T> {
    match path {
        None => Ok(T::default()),
        Some(p) => serde_json::from_str(&fs::read_to_string(p)?)
            .map_err(|e| Error::Parse(format!("{}: {e}", p.display()))),
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => Ok(fs::write(p, text)?),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn format_scalar(field: Field, z: permbound::Scalar) -> String {
    match field {
        Field::Real => z.re.to_string(),
        Field::Complex if z.im < 0.0 || (z.im == 0.0 && z.im.is_sign_negative()) => {
            format!("{}-{}i", z.re, -z.im)
        }
        Field::Complex => format!("{}+{}i", z.re, z.im),
    }
}

fn cmd_perm(file: &Path) -> Result<Outcome> {
    let a = read_matrix(file)?;
    let r = perm_ryser(&a)?;
    if a.n() <= GLYNN_EXACT_MAX_N {
        let g = perm_glynn_exact(&a)?;
        // floor for cancelling sums: every permutation term is bounded by the
        // product of row l1 norms
        let scale: f64 = a
            .rows()
            .map(|row| row.iter().map(|z| z.norm()).sum::<f64>())
            .product();
        let tol = 1e-9 * r.norm().max(g.norm()) + 1e-12 * scale;
        if (r - g).norm() > tol {
            return Err(Error::Consistency(format!(
                "Ryser gives {r} but Glynn enumeration gives {g}"
            )));
        }
    }
    let p = PermValue::new(r);
    println!("{}", format_scalar(a.field(), r));
    println!("ln|perm| = {}", p.ln_abs);
    match a.field() {
        Field::Real => println!(
            "sign = {}",
            if r.re < 0.0 {
                -1
            } else if r.re > 0.0 {
                1
            } else {
                0
            }
        ),
        Field::Complex => println!("phase = {}", p.phase),
    }
    Ok(Outcome::Pass)
}

fn run(cli: Cli) -> Result<Outcome> {
    match cli.command {
        Command::Perm { file } => cmd_perm(&file),
        Command::Estimate {
            file,
            samples,
            seed,
            t,
            out,
        } => {
            let a = read_matrix(&file)?;
            let t = match t {
                Some(t) => t,
                None => op_norm_default(&a)?,
            };
            let report = estimate_perm(&a, t, samples, seed)?;
            emit(out.as_deref(), &to_json_string(&report)?)?;
            Ok(Outcome::Pass)
        }
        Command::Bounds { file, t, out } => {
            let a = read_matrix(&file)?;
            let opts = BoundOptions {
                t_override: t,
                ..Default::default()
            };
            emit(out.as_deref(), &to_json_string(&bound_report(&a, &opts)?)?)?;
            Ok(Outcome::Pass)
        }
        Command::Verify { config, out } => {
            let cfg: VerifyConfig = load_config(config.as_deref())?;
            let report = run_verify(&cfg)?;
            emit(out.as_deref(), &to_json_string(&report)?)?;
            if report.passed() {
                Ok(Outcome::Pass)
            } else {
                let lines: Vec<String> = report
                    .violations
                    .iter()
                    .map(|v| {
                        format!(
                            "matrix {} ({}, n = {}): ln|perm| = {} > {} = {}",
                            v.matrix_id, v.ensemble, v.n, v.log_perm, v.bound, v.log_value
                        )
                    })
                    .collect();
                Ok(Outcome::Fail(lines.join("\n")))
            }
        }
        Command::Concentration { config, out } => {
            let cfg: ConcentrationConfig = load_config(config.as_deref())?;
            let summary = run_concentration(&cfg)?;
            let csv = tail_rows_csv(&summary.rows)?;
            match &out {
                Some(p) => {
                    fs::write(p, &csv)?;
                    fs::write(p.with_extension("json"), to_json_string(&summary)?)?;
                }
                None => print!("{csv}"),
            }
            let failures = summary.failures();
            if failures.is_empty() {
                Ok(Outcome::Pass)
            } else {
                let lines: Vec<String> = failures
                    .iter()
                    .map(|r| {
                        format!(
                            "{} {} t = {}: empirical {} > bound {}",
                            r.matrix, r.statistic, r.t, r.empirical, r.bound
                        )
                    })
                    .collect();
                Ok(Outcome::Fail(lines.join("\n")))
            }
        }
        Command::Tightness { config, out } => {
            let cfg: TightnessConfig = load_config(config.as_deref())?;
            let report = run_tightness(&cfg)?;
            emit(out.as_deref(), &tightness_csv(&report.rows)?)?;
            if report.passed() {
                Ok(Outcome::Pass)
            } else {
                Ok(Outcome::Fail(
                    "n ln(delta) left the second-order envelope".into(),
                ))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Fail(msg)) => {
            eprintln!("assertion failed:\n{msg}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            let code = match e {
                Error::Consistency(_) | Error::NonConvergence { .. } => 1,
                _ => 2,
            };
            ExitCode::from(code)
        }
    }
}
