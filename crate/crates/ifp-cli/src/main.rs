//! `ifp` — check, solve, simulate, tail and sweep workflows for the income
//! fluctuation problem.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ifp::error::Error;
use ifp_cli::commands::{self, Quantity, SimFlags, SolveFlags, SweepFlags, TailFlags};

#[derive(Parser)]
#[command(name = "ifp", version, about = "Income fluctuation problem toolkit")]
struct Cli {
    /// Worker threads (default: all cores; env IFP_THREADS as fallback).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Model or template config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory for artifacts and the run manifest.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Compute growth rates and assumption flags; exit 2 on failure.
    Check {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Solve the consumption policy by time iteration.
    Solve {
        #[command(flatten)]
        common: CommonArgs,
        /// Number of asset grid nodes.
        #[arg(long, default_value_t = 200)]
        grid_points: usize,
        /// Lowest grid node (default: 1e-3 x median income).
        #[arg(long)]
        grid_min: Option<f64>,
        /// Highest grid node (default: 200 x median income).
        #[arg(long)]
        grid_max: Option<f64>,
        /// Convergence tolerance in marginal-utility units.
        #[arg(long, default_value_t = 1e-8)]
        tol_rho: f64,
        #[arg(long, default_value_t = 2000)]
        max_iter: usize,
        /// Gauss-Hermite nodes per lognormal innovation.
        #[arg(long, default_value_t = 11)]
        quad_nodes: usize,
        /// Euler-equation root tolerance, relative to the wealth level.
        #[arg(long, default_value_t = 1e-10)]
        root_tol: f64,
    },
    /// Simulate the wealth process under a stored policy.
    Simulate {
        #[command(flatten)]
        common: CommonArgs,
        /// Policy CSV produced by `solve` (sidecar expected next to it).
        #[arg(long)]
        policy: PathBuf,
        #[arg(long, default_value_t = 1000)]
        paths: usize,
        #[arg(long, default_value_t = 1000)]
        horizon: usize,
        #[arg(long, default_value_t = 500)]
        burn_in: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1.0)]
        initial_assets: f64,
        /// Fixed initial exogenous state (default: stationary draw).
        #[arg(long)]
        initial_state: Option<usize>,
        /// Also write the full (path, t, state, asset) panel CSV.
        #[arg(long, default_value_t = false)]
        full: bool,
    },
    /// Tail analysis: lambda curve, kappa, and a Hill estimate.
    Tail {
        #[command(flatten)]
        common: CommonArgs,
        /// Policy CSV produced by `solve`.
        #[arg(long)]
        policy: PathBuf,
        /// Upper end of the moment-order grid.
        #[arg(long, default_value_t = 20.0)]
        s_max: f64,
        #[arg(long, default_value_t = 1000)]
        paths: usize,
        #[arg(long, default_value_t = 1500)]
        horizon: usize,
        #[arg(long, default_value_t = 500)]
        burn_in: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Fraction of the sample used as the Hill tail.
        #[arg(long, default_value_t = 0.01)]
        tail_fraction: f64,
    },
    /// Recompute a growth quantity over a 2D parameter grid.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        x_param: String,
        /// LO:HI
        #[arg(long)]
        x_range: String,
        #[arg(long, default_value_t = 20)]
        x_count: usize,
        #[arg(long)]
        y_param: String,
        /// LO:HI
        #[arg(long)]
        y_range: String,
        #[arg(long, default_value_t = 20)]
        y_count: usize,
        #[arg(long, value_enum)]
        quantity: Quantity,
    },
}

fn parse_range(text: &str) -> Result<(f64, f64), Error> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 2 {
        return Err(Error::InvalidParameter(format!(
            "range \"{text}\" is not LO:HI"
        )));
    }
    let lo: f64 = parts[0]
        .parse()
        .map_err(|_| Error::InvalidParameter(format!("bad range bound {}", parts[0])))?;
    let hi: f64 = parts[1]
        .parse()
        .map_err(|_| Error::InvalidParameter(format!("bad range bound {}", parts[1])))?;
    Ok((lo, hi))
}

fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::AssumptionViolated(_) => 2,
        Error::NotConverged { .. } | Error::NoConvergence { .. } => 4,
        _ => 3,
    }
}

#[cfg(feature = "parallel")]
fn configure_threads(requested: Option<usize>) {
    let n = requested.or_else(|| {
        std::env::var("IFP_THREADS")
            .ok()
            .and_then(|v| v.parse().ok())
    });
    if let Some(n) = n {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("warning: could not configure thread pool: {e}");
        }
    }
}

#[cfg(not(feature = "parallel"))]
fn configure_threads(requested: Option<usize>) {
    if requested.is_some() {
        eprintln!("warning: built without the parallel feature; --threads is ignored");
    }
}

fn fmt(v: f64) -> String {
    format!("{v}")
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    configure_threads(cli.threads);

    let result: Result<u8, Error> = match &cli.command {
        Command::Check { common } => {
            let argv = vec![
                "check".into(),
                "--config".into(),
                common.config.display().to_string(),
                "--out".into(),
                common.out.display().to_string(),
            ];
            commands::cmd_check(&common.config, &common.out, argv).map(|outcome| {
                if outcome.all_required_pass {
                    0
                } else {
                    2
                }
            })
        }
        Command::Solve {
            common,
            grid_points,
            grid_min,
            grid_max,
            tol_rho,
            max_iter,
            quad_nodes,
            root_tol,
        } => {
            let flags = SolveFlags {
                grid_points: *grid_points,
                grid_min: *grid_min,
                grid_max: *grid_max,
                tol_rho: *tol_rho,
                max_iter: *max_iter,
                quad_nodes: *quad_nodes,
                root_tol: *root_tol,
            };
            let mut argv = vec![
                "solve".into(),
                "--config".into(),
                common.config.display().to_string(),
                "--out".into(),
                common.out.display().to_string(),
                "--grid-points".into(),
                grid_points.to_string(),
                "--tol-rho".into(),
                fmt(*tol_rho),
                "--max-iter".into(),
                max_iter.to_string(),
                "--quad-nodes".into(),
                quad_nodes.to_string(),
                "--root-tol".into(),
                fmt(*root_tol),
            ];
            if let (Some(lo), Some(hi)) = (grid_min, grid_max) {
                argv.extend(["--grid-min".into(), fmt(*lo), "--grid-max".into(), fmt(*hi)]);
            }
            commands::cmd_solve(&common.config, &common.out, &flags, argv).map(|_| 0)
        }
        Command::Simulate {
            common,
            policy,
            paths,
            horizon,
            burn_in,
            seed,
            initial_assets,
            initial_state,
            full,
        } => {
            let flags = SimFlags {
                n_paths: *paths,
                horizon: *horizon,
                burn_in: *burn_in,
                seed: *seed,
                initial_assets: *initial_assets,
                initial_state: *initial_state,
                export_full: *full,
            };
            let mut argv = vec![
                "simulate".into(),
                "--config".into(),
                common.config.display().to_string(),
                "--out".into(),
                common.out.display().to_string(),
                "--policy".into(),
                policy.display().to_string(),
                "--paths".into(),
                paths.to_string(),
                "--horizon".into(),
                horizon.to_string(),
                "--burn-in".into(),
                burn_in.to_string(),
                "--seed".into(),
                seed.to_string(),
                "--initial-assets".into(),
                fmt(*initial_assets),
            ];
            if let Some(z) = initial_state {
                argv.extend(["--initial-state".into(), z.to_string()]);
            }
            if *full {
                argv.push("--full".into());
            }
            commands::cmd_simulate(&common.config, policy, &common.out, &flags, argv).map(|_| 0)
        }
        Command::Tail {
            common,
            policy,
            s_max,
            paths,
            horizon,
            burn_in,
            seed,
            tail_fraction,
        } => {
            let flags = TailFlags {
                s_max: *s_max,
                n_paths: *paths,
                horizon: *horizon,
                burn_in: *burn_in,
                seed: *seed,
                tail_fraction: *tail_fraction,
            };
            let argv = vec![
                "tail".into(),
                "--config".into(),
                common.config.display().to_string(),
                "--out".into(),
                common.out.display().to_string(),
                "--policy".into(),
                policy.display().to_string(),
                "--s-max".into(),
                fmt(*s_max),
                "--paths".into(),
                paths.to_string(),
                "--horizon".into(),
                horizon.to_string(),
                "--burn-in".into(),
                burn_in.to_string(),
                "--seed".into(),
                seed.to_string(),
                "--tail-fraction".into(),
                fmt(*tail_fraction),
            ];
            commands::cmd_tail(&common.config, policy, &common.out, &flags, argv).map(|_| 0)
        }
        Command::Sweep {
            common,
            x_param,
            x_range,
            x_count,
            y_param,
            y_range,
            y_count,
            quantity,
        } => (|| {
            let flags = SweepFlags {
                x_param: x_param.clone(),
                x_range: parse_range(x_range)?,
                x_count: *x_count,
                y_param: y_param.clone(),
                y_range: parse_range(y_range)?,
                y_count: *y_count,
                quantity: *quantity,
            };
            let argv = vec![
                "sweep".into(),
                "--config".into(),
                common.config.display().to_string(),
                "--out".into(),
                common.out.display().to_string(),
                "--x-param".into(),
                x_param.clone(),
                "--x-range".into(),
                x_range.clone(),
                "--x-count".into(),
                x_count.to_string(),
                "--y-param".into(),
                y_param.clone(),
                "--y-range".into(),
                y_range.clone(),
                "--y-count".into(),
                y_count.to_string(),
                "--quantity".into(),
                quantity.name().into(),
            ];
            commands::cmd_sweep(&common.config, &common.out, &flags, argv).map(|_| 0)
        })(),
    };

    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
