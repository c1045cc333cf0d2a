//! The five workflows behind the subcommands.

use std::path::{Path, PathBuf};

use ifp::dynamics::{self, InitialState, SimConfig};
use ifp::error::{Error, Result};
use ifp::model::{self, ModelSpec};
use ifp::solver::{self, AssetGrid, Policy, PolicySidecar, SolverConfig};
use ifp::tail;

use crate::config::ConfigDoc;
use crate::manifest::RunManifest;

pub struct CheckOutcome {
    pub all_required_pass: bool,
}

/// Growth rates and assumption flags; JSON to stdout and to a file.
pub fn cmd_check(config_path: &Path, out_dir: &Path, argv: Vec<String>) -> Result<CheckOutcome> {
    let doc = ConfigDoc::from_file(config_path)?;
    let spec = doc.build_model()?;
    let report = model::compute_growth_report(&spec)?;
    let text = serde_json::to_string_pretty(&report)?;
    println!("{text}");
    let mut manifest = RunManifest::new("check", argv, config_path, None);
    manifest.write_output(&out_dir.join("check_report.json"), &text)?;
    manifest.save(out_dir)?;
    Ok(CheckOutcome {
        all_required_pass: report.flags.all_static_pass(),
    })
}

#[derive(Debug, Clone, Copy)]
pub struct SolveFlags {
    pub grid_points: usize,
    pub grid_min: Option<f64>,
    pub grid_max: Option<f64>,
    pub tol_rho: f64,
    pub max_iter: usize,
    pub quad_nodes: usize,
    pub root_tol: f64,
}

impl Default for SolveFlags {
    fn default() -> Self {
        let c = SolverConfig::default();
        SolveFlags {
            grid_points: 200,
            grid_min: None,
            grid_max: None,
            tol_rho: c.tol_rho,
            max_iter: c.max_iter,
            quad_nodes: c.quad_nodes,
            root_tol: c.root_tol,
        }
    }
}

pub fn build_grid(spec: &ModelSpec, flags: &SolveFlags) -> Result<AssetGrid> {
    match (flags.grid_min, flags.grid_max) {
        (Some(lo), Some(hi)) => AssetGrid::exponential(lo, hi, flags.grid_points),
        (None, None) => {
            if flags.grid_points == 200 {
                AssetGrid::default_for_spec(spec)
            } else {
                let default = AssetGrid::default_for_spec(spec)?;
                AssetGrid::exponential(default.min(), default.max(), flags.grid_points)
            }
        }
        _ => Err(Error::InvalidParameter(
            "--grid-min and --grid-max must be given together".into(),
        )),
    }
}

/// Solve and write the policy CSV plus its sidecar. On non-convergence the
/// best iterate is still written before the error propagates.
pub fn cmd_solve(
    config_path: &Path,
    out_dir: &Path,
    flags: &SolveFlags,
    argv: Vec<String>,
) -> Result<RunManifest> {
    let doc = ConfigDoc::from_file(config_path)?;
    let spec = doc.build_model()?;
    let grid = build_grid(&spec, flags)?;
    let config = SolverConfig {
        tol_rho: flags.tol_rho,
        max_iter: flags.max_iter,
        quad_nodes: flags.quad_nodes,
        root_tol: flags.root_tol,
    };
    let mut manifest = RunManifest::new("solve", argv, config_path, None);
    match solver::solve(&spec, grid, &config) {
        Ok(sol) => {
            write_policy(&mut manifest, out_dir, &sol.policy, &sol.trace)?;
            manifest.save(out_dir)?;
            eprintln!(
                "converged in {} iterations (last distance {:.3e})",
                sol.trace.len(),
                sol.trace.last().unwrap_or(&f64::NAN)
            );
            Ok(manifest)
        }
        Err(Error::NotConverged {
            policy,
            trace,
            iterations,
            last_distance,
        }) => {
            write_policy(&mut manifest, out_dir, &policy, &trace)?;
            manifest.save(out_dir)?;
            Err(Error::NotConverged {
                policy,
                trace,
                iterations,
                last_distance,
            })
        }
        Err(e) => Err(e),
    }
}

fn write_policy(
    manifest: &mut RunManifest,
    out_dir: &Path,
    policy: &Policy,
    trace: &[f64],
) -> Result<()> {
    let csv = solver::policy_to_csv(policy);
    let sidecar = PolicySidecar {
        alpha: policy.alphas().to_vec(),
        a_bar: policy.binding_thresholds().to_vec(),
        trace: trace.to_vec(),
    };
    manifest.write_output(&out_dir.join("policy.csv"), &csv)?;
    manifest.write_output(
        &out_dir.join("policy_sidecar.json"),
        &serde_json::to_string_pretty(&sidecar)?,
    )?;
    Ok(())
}

/// `policy.csv` -> `policy_sidecar.json`.
pub fn sidecar_path_for(policy_path: &Path) -> PathBuf {
    let stem = policy_path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("policy");
    policy_path.with_file_name(format!("{stem}_sidecar.json"))
}

pub fn load_policy(policy_path: &Path) -> Result<(Policy, Vec<f64>)> {
    let csv = std::fs::read_to_string(policy_path).map_err(|e| {
        Error::SchemaViolation(format!("cannot read policy {}: {e}", policy_path.display()))
    })?;
    let sidecar_path = sidecar_path_for(policy_path);
    let sidecar_text = std::fs::read_to_string(&sidecar_path).map_err(|e| {
        Error::SchemaViolation(format!(
            "cannot read sidecar {}: {e}",
            sidecar_path.display()
        ))
    })?;
    let sidecar: PolicySidecar = serde_json::from_str(&sidecar_text)
        .map_err(|e| Error::SchemaViolation(format!("sidecar {}: {e}", sidecar_path.display())))?;
    solver::policy_from_csv(&csv, &sidecar)
}

#[derive(Debug, Clone, Copy)]
pub struct SimFlags {
    pub n_paths: usize,
    pub horizon: usize,
    pub burn_in: usize,
    pub seed: u64,
    pub initial_assets: f64,
    pub initial_state: Option<usize>,
    pub export_full: bool,
}

impl Default for SimFlags {
    fn default() -> Self {
        SimFlags {
            n_paths: 1000,
            horizon: 1000,
            burn_in: 500,
            seed: 0,
            initial_assets: 1.0,
            initial_state: None,
            export_full: false,
        }
    }
}

fn sim_config(flags: &SimFlags) -> SimConfig {
    SimConfig {
        n_paths: flags.n_paths,
        horizon: flags.horizon,
        burn_in: flags.burn_in,
        seed: flags.seed,
        initial_assets: flags.initial_assets,
        initial_state: match flags.initial_state {
            Some(z) => InitialState::Fixed(z),
            None => InitialState::Stationary,
        },
    }
}

/// Simulate the wealth panel under a stored policy and export it.
pub fn cmd_simulate(
    config_path: &Path,
    policy_path: &Path,
    out_dir: &Path,
    flags: &SimFlags,
    argv: Vec<String>,
) -> Result<RunManifest> {
    let doc = ConfigDoc::from_file(config_path)?;
    let spec = doc.build_model()?;
    let (policy, _) = load_policy(policy_path)?;
    let report = model::compute_growth_report(&spec)?;
    if !report.flags.savings_stability {
        eprintln!(
            "warning: savings stability fails (s_bar = {:.4}, s_bar G_R = {:.4}); \
             the wealth process may have no stationary distribution",
            report.s_bar,
            report.s_bar * report.g_r
        );
    }
    let config = sim_config(flags);
    let panel = dynamics::simulate(&spec, &policy, &config)?;
    if panel.any_diverged() {
        eprintln!(
            "warning: {} paths hit the divergence cap",
            panel.diverged_count()
        );
    }

    let mut manifest = RunManifest::new("simulate", argv, config_path, Some(flags.seed));
    let summary = serde_json::to_string_pretty(&panel.summary())?;
    manifest.write_output(&out_dir.join("panel_summary.json"), &summary)?;
    manifest.write_output(
        &out_dir.join("panel_terminal.csv"),
        &panel.to_csv_terminal(),
    )?;
    if flags.export_full {
        manifest.write_output(&out_dir.join("panel_full.csv"), &panel.to_csv_full())?;
    }
    manifest.save(out_dir)?;
    Ok(manifest)
}

#[derive(Debug, Clone, Copy)]
pub struct TailFlags {
    pub s_max: f64,
    pub n_paths: usize,
    pub horizon: usize,
    pub burn_in: usize,
    pub seed: u64,
    pub tail_fraction: f64,
}

impl Default for TailFlags {
    fn default() -> Self {
        TailFlags {
            s_max: 20.0,
            n_paths: 1000,
            horizon: 1500,
            burn_in: 500,
            seed: 0,
            tail_fraction: 0.01,
        }
    }
}

/// Tail analysis: lambda curve, kappa, and the Hill check against a
/// freshly simulated stationary sample.
pub fn cmd_tail(
    config_path: &Path,
    policy_path: &Path,
    out_dir: &Path,
    flags: &TailFlags,
    argv: Vec<String>,
) -> Result<RunManifest> {
    let doc = ConfigDoc::from_file(config_path)?;
    let spec = doc.build_model()?;
    let (policy, _) = load_policy(policy_path)?;
    let config = SimConfig {
        n_paths: flags.n_paths,
        horizon: flags.horizon,
        burn_in: flags.burn_in,
        seed: flags.seed,
        initial_assets: 1.0,
        initial_state: InitialState::Stationary,
    };
    let panel = dynamics::simulate(&spec, &policy, &config)?;
    let sample = panel.pooled_after_burn_in();
    let report = tail::build_tail_report(
        &spec,
        &policy,
        flags.s_max,
        Some(&sample),
        flags.tail_fraction,
        flags.seed,
    )?;

    let mut manifest = RunManifest::new("tail", argv, config_path, Some(flags.seed));
    manifest.write_output(
        &out_dir.join("tail_report.json"),
        &serde_json::to_string_pretty(&report)?,
    )?;
    manifest.write_output(
        &out_dir.join("lambda_curve.csv"),
        &tail::lambda_curve_to_csv(&report.lambda_curve),
    )?;
    manifest.save(out_dir)?;
    eprintln!("{}", report.verdict);
    Ok(manifest)
}

#[derive(Debug, Clone)]
pub struct SweepFlags {
    pub x_param: String,
    pub x_range: (f64, f64),
    pub x_count: usize,
    pub y_param: String,
    pub y_range: (f64, f64),
    pub y_count: usize,
    pub quantity: Quantity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Quantity {
    GBeta,
    GBetaR,
    GR,
    SBar,
    Stable,
}

impl Quantity {
    pub fn name(&self) -> &'static str {
        match self {
            Quantity::GBeta => "g_beta",
            Quantity::GBetaR => "g_beta_r",
            Quantity::GR => "g_r",
            Quantity::SBar => "s_bar",
            Quantity::Stable => "stable",
        }
    }

    fn extract(&self, report: &model::GrowthReport) -> f64 {
        match self {
            Quantity::GBeta => report.g_beta,
            Quantity::GBetaR => report.g_beta_r,
            Quantity::GR => report.g_r,
            Quantity::SBar => report.s_bar,
            Quantity::Stable => {
                let worst = report
                    .g_beta_r
                    .max(report.s_bar)
                    .max(report.s_bar * report.g_r);
                if worst < 1.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let step = (hi - lo) / (n - 1) as f64;
    (0..n).map(|i| lo + step * i as f64).collect()
}

#[cfg(feature = "parallel")]
fn map_cells<T: Send, F: Fn(usize) -> T + Sync + Send>(n: usize, f: F) -> Vec<T> {
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn map_cells<T: Send, F: Fn(usize) -> T + Sync + Send>(n: usize, f: F) -> Vec<T> {
    (0..n).map(f).collect()
}

/// Re-discretize and recompute the chosen quantity over a parameter grid.
/// Rows are emitted x-major: x varies in the outer loop, y in the inner.
pub fn cmd_sweep(
    config_path: &Path,
    out_dir: &Path,
    flags: &SweepFlags,
    argv: Vec<String>,
) -> Result<RunManifest> {
    let doc = ConfigDoc::from_file(config_path)?;
    let mut probe = doc.clone();
    {
        // Validate both parameter names up front for a clean error.
        let template = probe.template_mut()?;
        template.set_param(&flags.x_param, flags.x_range.0)?;
        template.set_param(&flags.y_param, flags.y_range.0)?;
    }
    let xs = linspace(flags.x_range.0, flags.x_range.1, flags.x_count);
    let ys = linspace(flags.y_range.0, flags.y_range.1, flags.y_count);

    let n_cells = xs.len() * ys.len();
    let values: Vec<Result<f64>> = map_cells(n_cells, |idx| {
        let (i, j) = (idx / ys.len(), idx % ys.len());
        let mut cell_doc = doc.clone();
        let template = cell_doc.template_mut()?;
        template.set_param(&flags.x_param, xs[i])?;
        template.set_param(&flags.y_param, ys[j])?;
        let spec = template.build()?;
        let report = model::compute_growth_report(&spec)?;
        Ok(flags.quantity.extract(&report))
    });

    let mut csv = format!(
        "{},{},{}\n",
        flags.x_param,
        flags.y_param,
        flags.quantity.name()
    );
    for (idx, value) in values.into_iter().enumerate() {
        let (i, j) = (idx / ys.len(), idx % ys.len());
        csv.push_str(&format!("{},{},{}\n", xs[i], ys[j], value?));
    }

    let mut manifest = RunManifest::new("sweep", argv, config_path, None);
    manifest.write_output(
        &out_dir.join(format!("sweep_{}.csv", flags.quantity.name())),
        &csv,
    )?;
    manifest.save(out_dir)?;
    Ok(manifest)
}
