//! Command-line laboratory for the adaptive filter: theory predictions,
//! optimal step sizes, Monte Carlo simulation, and parameter sweeps.

use clap::{Args, Parser, Subcommand};
use folms::error::Error;
use folms::estimator::StepSizes;
use folms::harness::{
    self, resolve_fixed_steps, run_monte_carlo, run_sweep, write_sweep_csv, EstimatorKind,
    ExperimentConfig,
};
use folms::theory::{
    predict_emse_complete, predict_emse_simple, solve_with_options, to_db, SolveOptions,
};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "folms",
    about = "Adaptive filter laboratory: joint channel/CFO/SFO tracking, steady-state EMSE theory, and Monte Carlo experiments",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Experiment configuration (TOML). Defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed override (takes precedence over FOLMS_SEED and the config).
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the closed-form steady-state EMSE at given step sizes.
    Predict {
        #[command(flatten)]
        common: Common,
        /// Channel step size (overrides the config).
        #[arg(long)]
        mu_w: Option<f64>,
        /// Carrier frequency-offset step size.
        #[arg(long)]
        mu_eps: Option<f64>,
        /// Sampling frequency-offset step size.
        #[arg(long)]
        mu_eta: Option<f64>,
        /// Use the small-step-size approximations instead of the complete
        /// expressions.
        #[arg(long)]
        simple: bool,
        /// Append the prediction as a CSV row.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Solve for the step sizes minimizing the predicted total EMSE.
    Optimize {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Monte Carlo simulation of the configured estimator at one point.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Write the result as a one-row CSV.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Run at the full reference scale (1e6 measured iterations).
        #[arg(long)]
        full_scale: bool,
    },
    /// Sweep step sizes or system parameters over a log grid.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// CSV output path (overrides [output].csv).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        full_scale: bool,
    },
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Config(_) | Error::InvalidArgument(_) => 2,
        Error::AllReplicasDiverged(_) => 3,
        Error::Infeasible => 4,
        _ => 1,
    }
}

fn load_config(common: &Common) -> Result<(ExperimentConfig, u64), Error> {
    let config = match &common.config {
        Some(path) => ExperimentConfig::from_file(path)?,
        None => ExperimentConfig::default(),
    };
    let seed = common
        .seed
        .or_else(|| {
            std::env::var(harness::SEED_ENV_VAR)
                .ok()
                .and_then(|v| v.parse().ok())
        })
        .unwrap_or(config.run.seed);
    Ok((config, seed))
}

fn print_kv(key: &str, value: impl std::fmt::Display) {
    println!("{key} = {value}");
}

fn print_power(key: &str, watts: f64) {
    let db = to_db(watts);
    if db.is_nan() {
        println!("{key} = {watts:.4e} W");
    } else {
        println!("{key} = {watts:.4e} W ({db:.1} dB)");
    }
}

fn run() -> Result<(), Error> {
    let cli = Cli::parse();
    match cli.command {
        Command::Predict {
            common,
            mu_w,
            mu_eps,
            mu_eta,
            simple,
            csv,
        } => {
            let (mut config, _) = load_config(&common)?;
            if mu_w.is_some() || mu_eps.is_some() || mu_eta.is_some() {
                config.estimator.optimal = false;
                config.estimator.mu_w = mu_w.or(config.estimator.mu_w);
                config.estimator.mu_eps = mu_eps.or(config.estimator.mu_eps);
                config.estimator.mu_eta = mu_eta.or(config.estimator.mu_eta);
            }
            let params = config.system.build()?;
            let steps = StepSizes::new(
                config.estimator.mu_w.unwrap_or(0.0),
                config.estimator.mu_eps.unwrap_or(0.0),
                config.estimator.mu_eta.unwrap_or(0.0),
            );
            let pred = if simple {
                predict_emse_simple(&params, &steps)
            } else {
                predict_emse_complete(&params, &steps)
            };
            print_kv("mu_w", format!("{:.6e}", steps.mu_w));
            print_kv("mu_eps", format!("{:.6e}", steps.mu_eps));
            print_kv("mu_eta", format!("{:.6e}", steps.mu_eta));
            print_power("zeta_w", pred.zeta_w);
            print_power("zeta_eps", pred.zeta_eps);
            print_power("zeta_eta", pred.zeta_eta);
            print_power("zeta_total", pred.zeta_total);
            print_power("mse", pred.mse);
            print_kv("gamma", format!("{:.6}", pred.gamma));
            print_kv("valid", pred.valid);
            if let Some(path) = csv {
                let mut out = String::new();
                out.push_str("mu_w,mu_eps,mu_eta,zeta_pred_dB,gamma,zeta_pred_w\n");
                out.push_str(&format!(
                    "{:.8e},{:.8e},{:.8e},{:.4},{:.6},{:.8e}\n",
                    steps.mu_w,
                    steps.mu_eps,
                    steps.mu_eta,
                    to_db(pred.zeta_total),
                    pred.gamma,
                    pred.zeta_total
                ));
                std::fs::write(path, out)?;
            }
            Ok(())
        }
        Command::Optimize { common, csv } => {
            let (config, _) = load_config(&common)?;
            let params = config.system.build()?;
            let opts = SolveOptions {
                pins: [
                    config.estimator.mu_w,
                    config.estimator.mu_eps,
                    config.estimator.mu_eta,
                ],
                ..SolveOptions::default()
            };
            let sol = solve_with_options(&params, &opts)?;
            print_kv("mu_w", format!("{:.6e}", sol.steps.mu_w));
            print_kv("mu_eps", format!("{:.6e}", sol.steps.mu_eps));
            print_kv("mu_eta", format!("{:.6e}", sol.steps.mu_eta));
            print_power("zeta_total", sol.prediction.zeta_total);
            print_power("mse", sol.prediction.mse);
            print_kv("gamma", format!("{:.6}", sol.prediction.gamma));
            print_kv("converged", sol.converged);
            print_kv(
                "bound_active",
                format!(
                    "[{}, {}, {}]",
                    sol.bound_active[0], sol.bound_active[1], sol.bound_active[2]
                ),
            );
            if let Some(path) = csv {
                let mut out = String::new();
                out.push_str("mu_w,mu_eps,mu_eta,zeta_pred_dB,gamma,zeta_pred_w\n");
                out.push_str(&format!(
                    "{:.8e},{:.8e},{:.8e},{:.4},{:.6},{:.8e}\n",
                    sol.steps.mu_w,
                    sol.steps.mu_eps,
                    sol.steps.mu_eta,
                    to_db(sol.prediction.zeta_total),
                    sol.prediction.gamma,
                    sol.prediction.zeta_total
                ));
                std::fs::write(path, out)?;
            }
            Ok(())
        }
        Command::Simulate {
            common,
            out,
            full_scale,
        } => {
            let (mut config, seed) = load_config(&common)?;
            config.run.full_scale |= full_scale;
            let params = config.system.build()?;
            let summary = run_monte_carlo(&config, seed)?;
            let (steps, pred) = match config.estimator.kind {
                EstimatorKind::Fixed => resolve_fixed_steps(&params, &config.estimator)?,
                EstimatorKind::Vss => {
                    let reference = solve_with_options(&params, &SolveOptions::default())
                        .map(|s| (s.steps, s.prediction));
                    match reference {
                        Ok(v) => v,
                        Err(_) => (
                            summary.steps,
                            predict_emse_complete(&params, &summary.steps),
                        ),
                    }
                }
            };
            print_kv("estimator", format!("{:?}", config.estimator.kind));
            print_kv("replicas", config.run.replicas);
            print_kv("iterations", config.run.effective_iterations());
            print_kv("seed", seed);
            print_kv("mu_w", format!("{:.6e}", summary.steps.mu_w));
            print_kv("mu_eps", format!("{:.6e}", summary.steps.mu_eps));
            print_kv("mu_eta", format!("{:.6e}", summary.steps.mu_eta));
            print_power("zeta_pred", pred.zeta_total);
            print_power("zeta_sim", summary.mean);
            print_kv("stderr_w", format!("{:.4e}", summary.stderr));
            print_kv("diverged", summary.diverged);
            if let Some(path) = out {
                let mut text = String::new();
                text.push_str(
                    "mu_w,mu_eps,mu_eta,zeta_pred_dB,zeta_sim_dB,stderr_dB,diverged,gamma,zeta_pred_w,zeta_sim_w,stderr_w\n",
                );
                let stderr_db = if summary.mean > 0.0 && summary.stderr > 0.0 {
                    format!(
                        "{:.4}",
                        10.0 / std::f64::consts::LN_10 * summary.stderr / summary.mean
                    )
                } else {
                    "nan".into()
                };
                text.push_str(&format!(
                    "{:.8e},{:.8e},{:.8e},{},{},{},{},{:.6},{:.8e},{:.8e},{:.8e}\n",
                    steps.mu_w,
                    steps.mu_eps,
                    steps.mu_eta,
                    if to_db(pred.zeta_total).is_nan() {
                        "nan".into()
                    } else {
                        format!("{:.4}", to_db(pred.zeta_total))
                    },
                    if to_db(summary.mean).is_nan() {
                        "nan".into()
                    } else {
                        format!("{:.4}", to_db(summary.mean))
                    },
                    stderr_db,
                    summary.diverged,
                    pred.gamma,
                    pred.zeta_total,
                    summary.mean,
                    summary.stderr
                ));
                std::fs::write(path, text)?;
            }
            Ok(())
        }
        Command::Sweep {
            common,
            out,
            full_scale,
        } => {
            let (mut config, seed) = load_config(&common)?;
            config.run.full_scale |= full_scale;
            let result = run_sweep(&config, seed)?;
            let path = out
                .or_else(|| config.output.csv.as_ref().map(PathBuf::from))
                .ok_or_else(|| {
                    Error::Config("sweep needs an output path (--out or [output].csv)".into())
                })?;
            let mut buf = Vec::new();
            write_sweep_csv(&result, &mut buf)?;
            std::fs::write(&path, buf)?;
            eprintln!("wrote {} rows to {}", result.rows.len(), path.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
