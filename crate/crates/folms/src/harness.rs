//! Monte Carlo experiment runner: co-simulates the world and an estimator
//! across replicas, sweeps step sizes or system parameters, aggregates
//! steady-state EMSE, and emits machine-readable CSV.
//!
//! Replicas and sweep points execute in parallel with deterministic seeding
//! (replica `k` of master seed `s` always sees the same world, regardless of
//! scheduling), so a `(config, seed)` pair fully determines every output
//! byte except the wall-time column.

use crate::error::{Error, Result};
use crate::estimator::{
    run_folms_with, RunOptions, StepSizes, WarmStart,
};
use crate::seeds;
use crate::sigproc::DerivativeScheme;
use crate::theory::{
    predict_emse_complete, solve_with_options, to_db, EmsePrediction, SolveOptions,
};
use crate::vss::{run_vss_with, Clamp, NoiseKnowledge, VssConfig};
use crate::world::SystemParams;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::time::Instant;

/// Environment variable overriding the master seed.
pub const SEED_ENV_VAR: &str = "FOLMS_SEED";

/// How the VSS algorithm learns the measurement-noise power.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseMode {
    /// Exact knowledge of sigma_v^2.
    #[default]
    Known,
    /// Run-time estimation from the signal/error cross-correlation.
    Estimated,
    /// Estimation lower-bounded by the known receiver floor sigma_g^2.
    EstimatedFloored,
    /// Deliberately misleading: treats the receiver floor sigma_g^2 as the
    /// total noise power even when a background signal is present.
    StaleFloor,
}

/// VSS settings as they appear in the configuration file.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct VssSettings {
    pub lambda_e: f64,
    pub lambda_y: f64,
    pub lambda_eps: f64,
    pub lambda_eta: f64,
    pub lambda_r: f64,
    pub mu_w_min: f64,
    pub mu_w_max: f64,
    pub mu_eps_min: f64,
    pub mu_eps_max: f64,
    pub mu_eta_min: f64,
    pub mu_eta_max: f64,
    pub noise: NoiseMode,
    pub delta_scale: f64,
}

impl Default for VssSettings {
    fn default() -> Self {
        let d = VssConfig::default();
        VssSettings {
            lambda_e: d.lambda_e,
            lambda_y: d.lambda_y,
            lambda_eps: d.lambda_eps,
            lambda_eta: d.lambda_eta,
            lambda_r: d.lambda_r,
            mu_w_min: d.clamp_w.min,
            mu_w_max: d.clamp_w.max,
            mu_eps_min: d.clamp_eps.min,
            mu_eps_max: d.clamp_eps.max,
            mu_eta_min: d.clamp_eta.min,
            mu_eta_max: d.clamp_eta.max,
            noise: NoiseMode::Known,
            delta_scale: d.delta_scale,
        }
    }
}

impl VssSettings {
    /// Materialize a [`VssConfig`] for a concrete system and warm start.
    pub fn build(&self, params: &SystemParams, warm_start: WarmStart) -> VssConfig {
        let noise = match self.noise {
            NoiseMode::Known => NoiseKnowledge::Known(params.noise_power()),
            NoiseMode::Estimated => NoiseKnowledge::Estimated { floor: None },
            NoiseMode::EstimatedFloored => NoiseKnowledge::Estimated {
                floor: Some(params.noise_floor),
            },
            NoiseMode::StaleFloor => NoiseKnowledge::Known(params.noise_floor),
        };
        VssConfig {
            lambda_e: self.lambda_e,
            lambda_y: self.lambda_y,
            lambda_eps: self.lambda_eps,
            lambda_eta: self.lambda_eta,
            lambda_r: self.lambda_r,
            clamp_w: Clamp::new(self.mu_w_min, self.mu_w_max),
            clamp_eps: Clamp::new(self.mu_eps_min, self.mu_eps_max),
            clamp_eta: Clamp::new(self.mu_eta_min, self.mu_eta_max),
            noise,
            delta_scale: self.delta_scale,
            // A fully warm-started run begins converged; seeding the error
            // tracker at the noise power keeps mu_w off its ceiling during
            // the tracker's descent from the cold-start convention.
            initial_error_power: if warm_start == WarmStart::Full {
                params.noise_power()
            } else {
                1.0
            },
        }
    }
}

/// Estimator selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EstimatorKind {
    #[default]
    Fixed,
    Vss,
}

/// `[estimator]` section.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct EstimatorConfig {
    pub kind: EstimatorKind,
    /// Fixed step sizes; any left unset are filled from the optimal-step
    /// solver when `optimal = true` (the default), else default to zero.
    pub mu_w: Option<f64>,
    pub mu_eps: Option<f64>,
    pub mu_eta: Option<f64>,
    /// Solve for optimal step sizes (explicit `mu_*` values act as pins).
    pub optimal: bool,
    pub vss: VssSettings,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        EstimatorConfig {
            kind: EstimatorKind::Fixed,
            mu_w: None,
            mu_eps: None,
            mu_eta: None,
            optimal: true,
            vss: VssSettings::default(),
        }
    }
}

/// `[run]` section.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Independent replicas per data point.
    pub replicas: usize,
    /// Measured iterations per run.
    pub iterations: usize,
    /// Convergence pre-roll excluded from the measurement.
    pub preroll: usize,
    /// Tail fraction discarded by the plain `measure_emse` form (diagnostic).
    pub discard: f64,
    /// Master seed; overridable by `--seed` or `FOLMS_SEED`.
    pub seed: u64,
    pub warm_start: WarmStart,
    pub scheme: DerivativeScheme,
    /// Run at the full reference scale (1e6 measured iterations).
    pub full_scale: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            replicas: 16,
            iterations: 200_000,
            preroll: 50_000,
            discard: 0.5,
            seed: 1,
            warm_start: WarmStart::Full,
            scheme: DerivativeScheme::Centered,
            full_scale: false,
        }
    }
}

impl RunConfig {
    pub fn effective_iterations(&self) -> usize {
        if self.full_scale {
            1_000_000
        } else {
            self.iterations
        }
    }

    pub fn run_options(&self) -> RunOptions {
        RunOptions {
            n_iter: self.effective_iterations(),
            preroll: self.preroll,
            warm_start: self.warm_start,
            scheme: self.scheme,
            ..RunOptions::new(self.effective_iterations())
        }
    }
}

/// One sweep axis: log-spaced grid over a named parameter.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SweepAxis {
    pub param: String,
    pub from: f64,
    pub to: f64,
    pub points: usize,
}

impl SweepAxis {
    pub fn grid(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.from];
        }
        let (la, lb) = (self.from.log10(), self.to.log10());
        (0..self.points)
            .map(|k| 10f64.powf(la + (lb - la) * k as f64 / (self.points - 1) as f64))
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.points == 0 {
            return Err(Error::Config("sweep axis needs at least one point".into()));
        }
        if !(self.from > 0.0 && self.to > 0.0 && self.from <= self.to) {
            return Err(Error::Config(
                "sweep bounds must be positive with from <= to".into(),
            ));
        }
        Ok(())
    }
}

/// `[sweep]` section: one or two axes.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Default)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub axis: Option<SweepAxis>,
    pub axis2: Option<SweepAxis>,
}

/// `[output]` section.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Default)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub csv: Option<String>,
}

/// Complete experiment description (the TOML config file).
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Default)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub system: SystemSection,
    pub estimator: EstimatorConfig,
    pub run: RunConfig,
    pub sweep: SweepConfig,
    pub output: OutputConfig,
}

/// `[system]`: an optional preset plus field overrides. Unknown keys are
/// rejected when the section is materialized into [`SystemParams`].
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Default)]
#[serde(default)]
pub struct SystemSection {
    /// `"baseline"` (no nonstationarities) or `"drifting"`.
    pub preset: Option<String>,
    #[serde(flatten)]
    pub overrides: toml::value::Table,
}

impl SystemSection {
    pub fn build(&self) -> Result<SystemParams> {
        let base = match self.preset.as_deref() {
            None | Some("baseline") => SystemParams::baseline(),
            Some("drifting") => SystemParams::drifting(),
            Some(other) => {
                return Err(Error::Config(format!(
                    "unknown system preset '{other}' (expected 'baseline' or 'drifting')"
                )))
            }
        };
        // Apply field overrides through serde so names match the struct.
        let mut value = toml::Value::try_from(&base)
            .map_err(|e| Error::Config(format!("internal: {e}")))?;
        if let toml::Value::Table(table) = &mut value {
            for (k, v) in &self.overrides {
                if !table.contains_key(k) {
                    return Err(Error::Config(format!("unknown system parameter '{k}'")));
                }
                table.insert(k.clone(), v.clone());
            }
        }
        let params: SystemParams = value
            .try_into()
            .map_err(|e| Error::Config(format!("invalid system parameter: {e}")))?;
        params.validate()?;
        Ok(params)
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::Config(format!("cannot read config '{}': {e}", path.display()))
        })?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.run.replicas == 0 {
            return Err(Error::Config("replicas must be >= 1".into()));
        }
        if self.run.effective_iterations() < 1_000 {
            return Err(Error::Config("iterations must be >= 1000".into()));
        }
        if !(0.0..1.0).contains(&self.run.discard) {
            return Err(Error::Config("discard must be in [0, 1)".into()));
        }
        if let Some(axis) = &self.sweep.axis {
            axis.validate()?;
        }
        if let Some(axis) = &self.sweep.axis2 {
            axis.validate()?;
            if self.sweep.axis.is_none() {
                return Err(Error::Config("axis2 requires axis".into()));
            }
        }
        self.system.build()?;
        Ok(())
    }
}

/// Aggregated Monte Carlo outcome for one data point.
#[derive(Debug, Clone)]
pub struct MonteCarloSummary {
    /// Mean steady-state EMSE across surviving replicas, watts.
    pub mean: f64,
    /// Standard error across replicas, watts.
    pub stderr: f64,
    /// Per-replica EMSE estimates (`None` for diverged replicas).
    pub per_replica: Vec<Option<f64>>,
    pub diverged: usize,
    /// Step sizes used (fixed runs) or tail-averaged emitted values (VSS).
    pub steps: StepSizes,
}

fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Solve for the step sizes a fixed run should use, honoring explicit pins.
pub fn resolve_fixed_steps(
    params: &SystemParams,
    est: &EstimatorConfig,
) -> Result<(StepSizes, EmsePrediction)> {
    if est.optimal {
        let opts = SolveOptions {
            pins: [est.mu_w, est.mu_eps, est.mu_eta],
            ..SolveOptions::default()
        };
        let sol = solve_with_options(params, &opts)?;
        Ok((sol.steps, sol.prediction))
    } else {
        let steps = StepSizes::new(
            est.mu_w.unwrap_or(0.0),
            est.mu_eps.unwrap_or(0.0),
            est.mu_eta.unwrap_or(0.0),
        );
        let pred = predict_emse_complete(params, &steps);
        Ok((steps, pred))
    }
}

/// Run `replicas` independent runs of the configured estimator and average
/// the per-replica steady-state EMSE (noise-canceled tail mean). Diverged
/// replicas are excluded and counted; if every replica diverges the
/// experiment fails.
pub fn run_point(
    params: &SystemParams,
    est: &EstimatorConfig,
    run: &RunConfig,
    master_seed: u64,
) -> Result<MonteCarloSummary> {
    let opts = run.run_options();
    let replicas = run.replicas;
    enum Outcome {
        Ok { zeta: f64, steps: StepSizes },
        Diverged,
    }
    let fixed = match est.kind {
        EstimatorKind::Fixed => Some(resolve_fixed_steps(params, est)?.0),
        EstimatorKind::Vss => None,
    };
    let results: Vec<Outcome> = (0..replicas as u64)
        .into_par_iter()
        .map(|replica| {
            let seed = seeds::derive(master_seed, replica);
            let outcome = match est.kind {
                EstimatorKind::Fixed => {
                    let steps = fixed.as_ref().unwrap();
                    run_folms_with(params, steps, &opts, seed)
                        .map(|trace| (trace.noise_canceled_emse(), *steps))
                }
                EstimatorKind::Vss => {
                    let cfg = est.vss.build(params, opts.warm_start);
                    run_vss_with(params, &cfg, &opts, seed).map(|trace| {
                        let tail = opts.preroll;
                        let n = (trace.vss.mu_w.len() - tail) as f64;
                        let avg = |v: &[f64]| v[tail..].iter().sum::<f64>() / n;
                        (
                            trace.run.noise_canceled_emse(),
                            StepSizes::new(
                                avg(&trace.vss.mu_w),
                                avg(&trace.vss.mu_eps),
                                avg(&trace.vss.mu_eta),
                            ),
                        )
                    })
                }
            };
            match outcome {
                Ok((zeta, steps)) => Outcome::Ok { zeta, steps },
                Err(Error::Diverged { .. }) => Outcome::Diverged,
                Err(_) => Outcome::Diverged,
            }
        })
        .collect();

    let mut per_replica = Vec::with_capacity(replicas);
    let mut values = Vec::new();
    let mut steps_acc = StepSizes::zero();
    let mut diverged = 0usize;
    for outcome in results {
        match outcome {
            Outcome::Ok { zeta, steps } => {
                per_replica.push(Some(zeta));
                values.push(zeta);
                steps_acc.mu_w += steps.mu_w;
                steps_acc.mu_eps += steps.mu_eps;
                steps_acc.mu_eta += steps.mu_eta;
            }
            Outcome::Diverged => {
                per_replica.push(None);
                diverged += 1;
            }
        }
    }
    if values.is_empty() {
        return Err(Error::AllReplicasDiverged(replicas));
    }
    let k = values.len() as f64;
    let (mean, stderr) = mean_stderr(&values);
    Ok(MonteCarloSummary {
        mean,
        stderr,
        per_replica,
        diverged,
        steps: StepSizes::new(steps_acc.mu_w / k, steps_acc.mu_eps / k, steps_acc.mu_eta / k),
    })
}

/// Monte Carlo for the config's single operating point.
pub fn run_monte_carlo(config: &ExperimentConfig, seed: u64) -> Result<MonteCarloSummary> {
    let params = config.system.build()?;
    run_point(&params, &config.estimator, &config.run, seed)
}

/// One row of a sweep result.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub swept: Vec<(String, f64)>,
    pub steps: StepSizes,
    pub prediction: EmsePrediction,
    pub simulated: Option<MonteCarloSummary>,
    pub diverged: usize,
    pub runtime_s: f64,
}

/// Sweep outcome: one row per grid point plus the theoretical optimum of the
/// base configuration.
#[derive(Debug, Clone)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    pub axes: Vec<String>,
    /// Solver optimum of the unswept configuration, when solvable.
    pub optimum: Option<(StepSizes, EmsePrediction)>,
}

const STEP_AXES: [&str; 3] = ["mu_w", "mu_eps", "mu_eta"];
const PARAM_AXES: [&str; 12] = [
    "channel_walk_var",
    "phase_noise_var",
    "jitter_var",
    "cfo_walk_var",
    "sfo_walk_var",
    "cfo_drift",
    "sfo_drift",
    "channel_gain",
    "filter_taps",
    "background_power",
    "lambda_r",
    "lambda_e",
];

fn apply_axis(
    params: &mut SystemParams,
    est: &mut EstimatorConfig,
    name: &str,
    value: f64,
) -> Result<()> {
    match name {
        "mu_w" => est.mu_w = Some(value),
        "mu_eps" => est.mu_eps = Some(value),
        "mu_eta" => est.mu_eta = Some(value),
        "channel_walk_var" => params.channel_walk_var = value,
        "phase_noise_var" => params.phase_noise_var = value,
        "jitter_var" => params.jitter_var = value,
        "cfo_walk_var" => params.cfo_walk_var = value,
        "sfo_walk_var" => params.sfo_walk_var = value,
        "cfo_drift" => params.cfo_drift = value,
        "sfo_drift" => params.sfo_drift = value,
        "channel_gain" => params.channel_gain = value,
        "filter_taps" => params.filter_taps = value.round() as usize,
        "background_power" => params.background_power = value,
        "lambda_r" => est.vss.lambda_r = value,
        "lambda_e" => est.vss.lambda_e = value,
        other => {
            return Err(Error::Config(format!(
                "unknown sweep axis '{other}'; step axes: {STEP_AXES:?}, parameter axes: {PARAM_AXES:?}"
            )))
        }
    }
    Ok(())
}

/// Run the configured sweep: per grid point, a theory prediction and a Monte
/// Carlo simulation. Points where every replica diverges (or where no valid
/// step sizes exist) are recorded with the failure counted, not fatal.
pub fn run_sweep(config: &ExperimentConfig, seed: u64) -> Result<SweepResult> {
    let axis = config
        .sweep
        .axis
        .as_ref()
        .ok_or_else(|| Error::Config("sweep requires [sweep.axis]".into()))?;
    let base_params = config.system.build()?;
    let mut axes = vec![axis.param.clone()];
    let mut grid: Vec<Vec<(String, f64)>> = axis
        .grid()
        .into_iter()
        .map(|v| vec![(axis.param.clone(), v)])
        .collect();
    if let Some(axis2) = &config.sweep.axis2 {
        axes.push(axis2.param.clone());
        grid = grid
            .into_iter()
            .flat_map(|point| {
                axis2
                    .grid()
                    .into_iter()
                    .map(move |v| {
                        let mut p = point.clone();
                        p.push((axis2.param.clone(), v));
                        p
                    })
            })
            .collect();
    }

    let optimum = solve_with_options(&base_params, &SolveOptions::default())
        .ok()
        .map(|sol| (sol.steps, sol.prediction));

    let mut rows = Vec::with_capacity(grid.len());
    for point in grid {
        let start = Instant::now();
        let mut params = base_params.clone();
        let mut est = config.estimator.clone();
        for (name, value) in &point {
            apply_axis(&mut params, &mut est, name, *value)?;
        }
        params.validate()?;

        let (steps, prediction) = match est.kind {
            EstimatorKind::Fixed => match resolve_fixed_steps(&params, &est) {
                Ok(v) => v,
                Err(Error::Infeasible) => {
                    // No stable step sizes at this point; record and move on.
                    rows.push(SweepRow {
                        swept: point,
                        steps: StepSizes::zero(),
                        prediction: predict_emse_complete(&params, &StepSizes::zero()),
                        simulated: None,
                        diverged: config.run.replicas,
                        runtime_s: start.elapsed().as_secs_f64(),
                    });
                    continue;
                }
                Err(e) => return Err(e),
            },
            EstimatorKind::Vss => {
                // Reference line: the fixed estimator at optimal step sizes.
                match solve_with_options(&params, &SolveOptions::default()) {
                    Ok(sol) => (sol.steps, sol.prediction),
                    Err(_) => (StepSizes::zero(), predict_emse_complete(&params, &StepSizes::zero())),
                }
            }
        };

        let point_seed = {
            let mut h = seed;
            for (_, v) in &point {
                h = seeds::derive(h, v.to_bits());
            }
            h
        };
        let sim = run_point(&params, &est, &config.run, point_seed);
        let (simulated, diverged) = match sim {
            Ok(summary) => {
                let d = summary.diverged;
                (Some(summary), d)
            }
            Err(Error::AllReplicasDiverged(n)) => (None, n),
            Err(e) => return Err(e),
        };
        let steps_out = simulated
            .as_ref()
            .map(|s| match est.kind {
                EstimatorKind::Vss => s.steps,
                EstimatorKind::Fixed => steps,
            })
            .unwrap_or(steps);
        rows.push(SweepRow {
            swept: point,
            steps: steps_out,
            prediction,
            simulated,
            diverged,
            runtime_s: start.elapsed().as_secs_f64(),
        });
    }
    Ok(SweepResult {
        rows,
        axes,
        optimum,
    })
}

fn fmt_db(v: f64) -> String {
    let db = to_db(v);
    if db.is_nan() {
        "nan".to_string()
    } else {
        format!("{db:.4}")
    }
}

fn fmt_w(v: f64) -> String {
    format!("{v:.8e}")
}

/// Write a sweep as CSV.
///
/// Column order: `swept_param_1[,swept_param_2],mu_w,mu_eps,mu_eta,
/// zeta_pred_dB,zeta_sim_dB,stderr_dB,diverged,gamma,runtime_s` followed by
/// the linear-power columns `zeta_pred_w,zeta_sim_w,stderr_w`. The stderr dB
/// column is the delta-method equivalent `10 log10(e) * stderr / mean`.
pub fn write_sweep_csv<W: Write>(result: &SweepResult, mut out: W) -> Result<()> {
    if let Some((steps, pred)) = &result.optimum {
        writeln!(
            out,
            "# theoretical_optimum mu_w={:.6e} mu_eps={:.6e} mu_eta={:.6e} zeta_dB={}",
            steps.mu_w,
            steps.mu_eps,
            steps.mu_eta,
            fmt_db(pred.zeta_total)
        )?;
    }
    let mut header: Vec<String> = Vec::new();
    for (i, _) in result.axes.iter().enumerate() {
        header.push(format!("swept_param_{}", i + 1));
    }
    header.extend(
        [
            "mu_w",
            "mu_eps",
            "mu_eta",
            "zeta_pred_dB",
            "zeta_sim_dB",
            "stderr_dB",
            "diverged",
            "gamma",
            "runtime_s",
            "zeta_pred_w",
            "zeta_sim_w",
            "stderr_w",
        ]
        .iter()
        .map(|s| s.to_string()),
    );
    writeln!(out, "{}", header.join(","))?;
    for row in &result.rows {
        let mut fields: Vec<String> = row.swept.iter().map(|(_, v)| format!("{v:.8e}")).collect();
        fields.push(fmt_w(row.steps.mu_w));
        fields.push(fmt_w(row.steps.mu_eps));
        fields.push(fmt_w(row.steps.mu_eta));
        fields.push(fmt_db(row.prediction.zeta_total));
        match &row.simulated {
            Some(s) => {
                fields.push(fmt_db(s.mean));
                let stderr_db = if s.mean > 0.0 && s.stderr > 0.0 {
                    format!("{:.4}", 10.0 / std::f64::consts::LN_10 * s.stderr / s.mean)
                } else {
                    "nan".to_string()
                };
                fields.push(stderr_db);
            }
            None => {
                fields.push("nan".into());
                fields.push("nan".into());
            }
        }
        fields.push(row.diverged.to_string());
        fields.push(format!("{:.6}", row.prediction.gamma));
        fields.push(format!("{:.3}", row.runtime_s));
        fields.push(fmt_w(row.prediction.zeta_total));
        match &row.simulated {
            Some(s) => {
                fields.push(fmt_w(s.mean));
                fields.push(fmt_w(s.stderr));
            }
            None => {
                fields.push("nan".into());
                fields.push("nan".into());
            }
        }
        writeln!(out, "{}", fields.join(","))?;
    }
    Ok(())
}
