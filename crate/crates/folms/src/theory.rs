//! Closed-form steady-state EMSE predictions and the optimal step-size
//! solver.
//!
//! The complete expressions share the stability denominator
//! `gamma = 2 - mu_w (1+M) sigma_x^2 - (mu_eps/mu_w) ||w||^2
//!  - 2 (mu_eta/mu_w)(2 + 2/M) ||w||^2`; `gamma <= 0` marks the prediction
//! invalid. Tracking terms with a step size in the denominator are defined
//! as zero when their driving nonstationarity parameter is exactly zero and
//! infinite otherwise, which keeps sweeps with disabled update branches
//! well-defined.

use crate::error::{Error, Result};
use crate::estimator::StepSizes;
use crate::world::SystemParams;
use serde::{Deserialize, Serialize};

/// Which frequency-offset loop a quantity refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OffsetKind {
    Carrier,
    Sampling,
}

/// Theoretical steady-state EMSE decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmsePrediction {
    /// Channel-update EMSE, watts.
    pub zeta_w: f64,
    /// Carrier-update EMSE, watts.
    pub zeta_eps: f64,
    /// Sampling-update EMSE, watts.
    pub zeta_eta: f64,
    /// Total EMSE, watts.
    pub zeta_total: f64,
    /// Total MSE including the measurement noise, watts.
    pub mse: f64,
    /// Stability denominator.
    pub gamma: f64,
    /// True when `gamma > 0` and every evaluated term is finite.
    pub valid: bool,
}

/// `num / den`, with the convention that a zero driving parameter disables
/// the term entirely and a zero step size under a live parameter signals an
/// infinite tracking error.
fn track(num: f64, den: f64) -> f64 {
    if num == 0.0 {
        0.0
    } else if den > 0.0 {
        num / den
    } else {
        f64::INFINITY
    }
}

/// Stability denominator of the complete expressions.
pub fn stability_gamma(params: &SystemParams, steps: &StepSizes) -> f64 {
    let m = params.filter_taps as f64;
    let gain = params.channel_gain;
    2.0 - steps.mu_w * (1.0 + m) * params.signal_power
        - track(steps.mu_eps * gain, steps.mu_w)
        - 2.0 * track(steps.mu_eta * (2.0 + 2.0 / m) * gain, steps.mu_w)
}

fn assemble(zeta_w: f64, zeta_eps: f64, zeta_eta: f64, gamma: f64, noise: f64) -> EmsePrediction {
    let zeta_total = zeta_w + zeta_eps + zeta_eta;
    EmsePrediction {
        zeta_w,
        zeta_eps,
        zeta_eta,
        zeta_total,
        mse: zeta_total + noise,
        gamma,
        valid: gamma > 0.0 && zeta_total.is_finite(),
    }
}

/// Complete steady-state EMSE expressions.
pub fn predict_emse_complete(params: &SystemParams, steps: &StepSizes) -> EmsePrediction {
    let sx = params.signal_power;
    let sv = params.noise_power();
    let gain = params.channel_gain;
    let mf = params.filter_taps as f64;
    let mc = params.channel_taps as f64;
    let ts = params.sampling_period;
    let (mu_w, mu_eps, mu_eta) = (steps.mu_w, steps.mu_eps, steps.mu_eta);

    let gamma = stability_gamma(params, steps);

    let zeta_w_num = mu_w * mf * sv * sx
        + track(mc * params.channel_walk_var, mu_w)
        + track(mu_eps * gain * sv, 2.0 * mu_w)
        + track(mu_eta * gain * sv, mu_w)
        + track(gain * params.phase_noise_var, mu_w)
        + track(gain * params.jitter_var, mu_w * ts);

    let zeta_eps_num = mu_eps * sx * gain * sv
        + track(params.cfo_walk_var * ts * ts, mu_w * mu_eps * sx)
        + track(
            2.0 * params.cfo_drift * params.cfo_drift * ts * ts,
            mu_eps * mu_eps * sx * gain,
        );

    let coeff = 2.0 + 2.0 / mf;
    let zeta_eta_num = 2.0 * mu_eta * sx * gain * sv
        + track(params.sfo_walk_var * ts * ts, mu_w * mu_eta * sx)
        + track(
            params.sfo_drift * params.sfo_drift * ts * ts,
            coeff * mu_eta * mu_eta * sx * gain,
        )
        + track(mu_w * gain * params.jitter_var, mu_eta * ts)
        + track(mu_w * params.sfo_walk_var * ts * ts, mu_eta * mu_eta * gain);

    assemble(
        zeta_w_num / gamma,
        zeta_eps_num / gamma,
        zeta_eta_num / gamma,
        gamma,
        sv,
    )
}

/// Small-step-size EMSE approximations (six / three / four terms).
pub fn predict_emse_simple(params: &SystemParams, steps: &StepSizes) -> EmsePrediction {
    let sx = params.signal_power;
    let sv = params.noise_power();
    let gain = params.channel_gain;
    let mf = params.filter_taps as f64;
    let mc = params.channel_taps as f64;
    let ts = params.sampling_period;
    let (mu_w, mu_eps, mu_eta) = (steps.mu_w, steps.mu_eps, steps.mu_eta);

    let zeta_w = mu_w * mf * sx * sv / 2.0
        + track(mc * params.channel_walk_var, 2.0 * mu_w)
        + track(mu_eps * gain * sv, 4.0 * mu_w)
        + track(mu_eta * gain * sv, 2.0 * mu_w)
        + track(gain * params.phase_noise_var, 2.0 * mu_w)
        + track(gain * params.jitter_var, 2.0 * mu_w * ts);

    let zeta_eps = mu_eps * sx * gain * sv / 2.0
        + track(params.cfo_walk_var * ts * ts, 2.0 * mu_w * mu_eps * sx)
        + track(
            params.cfo_drift * params.cfo_drift * ts * ts,
            mu_eps * mu_eps * sx * gain,
        );

    let coeff = 2.0 + 2.0 / mf;
    let zeta_eta = mu_eta * sx * gain * sv
        + track(params.sfo_walk_var * ts * ts, 2.0 * mu_w * mu_eta * sx)
        + track(
            params.sfo_drift * params.sfo_drift * ts * ts,
            2.0 * coeff * mu_eta * mu_eta * sx * gain,
        )
        + track(mu_w * gain * params.jitter_var, 2.0 * mu_eta * ts);

    // The simple forms carry no gamma; report gamma for validity anyway.
    let gamma = stability_gamma(params, steps);
    assemble(zeta_w, zeta_eps, zeta_eta, gamma, sv)
}

/// Decoupled approximation of the optimal channel step size,
/// `sqrt((M sigma_q^2 + ||w||^2 sigma_beta^2 / T_s + ||w||^2 sigma_phi^2)
///  / (M sigma_v^2 sigma_x^2))`. Returns zero when no channel-facing
/// nonstationarity is active.
pub fn approx_mu_w_opt(params: &SystemParams) -> f64 {
    let gain = params.channel_gain;
    let ts = params.sampling_period;
    let num = params.channel_taps as f64 * params.channel_walk_var
        + gain * params.jitter_var / ts
        + gain * params.phase_noise_var;
    if num == 0.0 {
        return 0.0;
    }
    let den = params.filter_taps as f64 * params.noise_power() * params.signal_power;
    (num / den).sqrt()
}

/// Decoupled approximation of the optimal frequency-offset step sizes:
/// square-root (random-walk) term plus cube-root (linear-drift) term, with
/// `mu_w` standing in for the optimal channel step size.
pub fn approx_mu_fo_opt(kind: OffsetKind, params: &SystemParams, mu_w: f64) -> f64 {
    let sx = params.signal_power;
    let sv = params.noise_power();
    let gain = params.channel_gain;
    let ts = params.sampling_period;
    let walk_den = gain * sv * sx * (2.0 * mu_w * sx + 1.0);
    let drift_den = 2.0 * gain * gain * mu_w * sv * sx * sx + gain * gain * sv * sx;
    match kind {
        OffsetKind::Carrier => {
            let walk = track(2.0 * params.cfo_walk_var * ts * ts, walk_den);
            let drift = track(
                8.0 * mu_w * params.cfo_drift * params.cfo_drift * ts * ts,
                drift_den,
            );
            walk.sqrt() + drift.cbrt()
        }
        OffsetKind::Sampling => {
            let walk_num =
                gain * params.jitter_var * mu_w * mu_w * sx / ts + params.sfo_walk_var * ts * ts;
            let walk = track(walk_num, walk_den);
            let drift = track(
                mu_w * params.sfo_drift * params.sfo_drift * ts * ts,
                drift_den,
            );
            walk.sqrt() + drift.cbrt()
        }
    }
}

/// Options for the optimal-step-size search.
#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    /// Search box per coordinate `(mu_w, mu_eps, mu_eta)`.
    pub bounds: [(f64, f64); 3],
    /// Pin a coordinate to a fixed value (e.g. a disabled update branch).
    pub pins: [Option<f64>; 3],
    /// Convergence tolerance in log10 units.
    pub tol_log10: f64,
    /// Cap on coordinate-descent cycles.
    pub max_cycles: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            bounds: [(1e-6, 1e-1), (1e-10, 1e-2), (1e-10, 1e-2)],
            pins: [None, None, None],
            tol_log10: 1e-3,
            max_cycles: 200,
        }
    }
}

/// Result of the optimal-step-size search.
#[derive(Debug, Clone, Copy)]
pub struct Solution {
    pub steps: StepSizes,
    pub prediction: EmsePrediction,
    /// False when the cycle cap was hit before the tolerance; the best point
    /// found is still returned.
    pub converged: bool,
    /// Per coordinate: the optimum sits at a search-box edge (pinned
    /// coordinates are never marked).
    pub bound_active: [bool; 3],
}

fn objective(params: &SystemParams, x: [f64; 3]) -> f64 {
    let pred = predict_emse_complete(params, &StepSizes::new(x[0], x[1], x[2]));
    if pred.valid && pred.zeta_total >= 0.0 {
        pred.zeta_total
    } else {
        f64::INFINITY
    }
}

fn golden_section(
    mut f: impl FnMut(f64) -> f64,
    mut a: f64,
    mut b: f64,
    tol: f64,
) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while (b - a).abs() > tol {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Minimize the complete-expression total EMSE over the step sizes by
/// cyclic per-coordinate search in log space (coarse bracketing scan plus
/// golden-section refinement), seeded by the decoupled approximations.
pub fn solve_with_options(params: &SystemParams, opts: &SolveOptions) -> Result<Solution> {
    let clamp = |v: f64, (lo, hi): (f64, f64)| v.clamp(lo, hi);

    let mu_w_seed = clamp(approx_mu_w_opt(params), opts.bounds[0]);
    let mut x = [
        opts.pins[0].unwrap_or(mu_w_seed),
        opts.pins[1].unwrap_or_else(|| {
            clamp(
                approx_mu_fo_opt(OffsetKind::Carrier, params, mu_w_seed),
                opts.bounds[1],
            )
        }),
        opts.pins[2].unwrap_or_else(|| {
            clamp(
                approx_mu_fo_opt(OffsetKind::Sampling, params, mu_w_seed),
                opts.bounds[2],
            )
        }),
    ];

    let free: Vec<usize> = (0..3).filter(|&i| opts.pins[i].is_none()).collect();
    if free.is_empty() {
        let prediction = predict_emse_complete(params, &StepSizes::new(x[0], x[1], x[2]));
        return Ok(Solution {
            steps: StepSizes::new(x[0], x[1], x[2]),
            prediction,
            converged: true,
            bound_active: [false; 3],
        });
    }

    // Establish a feasible starting point.
    if !objective(params, x).is_finite() {
        let mut best = f64::INFINITY;
        let mut best_x = x;
        let scan = 9;
        let mut probe = x;
        let mut found = false;
        fn grid(lo: f64, hi: f64, n: usize, k: usize) -> f64 {
            let llo = lo.log10();
            let lhi = hi.log10();
            10f64.powf(llo + (lhi - llo) * k as f64 / (n - 1) as f64)
        }
        // Coarse scan over the free coordinates (up to 3 nested axes).
        let counts: Vec<usize> = free.iter().map(|_| scan).collect();
        let total: usize = counts.iter().product();
        for flat in 0..total {
            let mut rem = flat;
            for (axis, &i) in free.iter().enumerate() {
                let k = rem % counts[axis];
                rem /= counts[axis];
                probe[i] = grid(opts.bounds[i].0, opts.bounds[i].1, scan, k);
            }
            let v = objective(params, probe);
            if v < best {
                best = v;
                best_x = probe;
                found = true;
            }
        }
        if !found || !best.is_finite() {
            return Err(Error::Infeasible);
        }
        x = best_x;
    }

    let mut converged = false;
    for _ in 0..opts.max_cycles {
        let mut max_move: f64 = 0.0;
        for &i in &free {
            let (lo, hi) = opts.bounds[i];
            let (llo, lhi) = (lo.log10(), hi.log10());
            let scan = 25;
            let mut best_k = 0usize;
            let mut best_v = f64::INFINITY;
            for k in 0..scan {
                let lx = llo + (lhi - llo) * k as f64 / (scan - 1) as f64;
                let mut probe = x;
                probe[i] = 10f64.powf(lx);
                let v = objective(params, probe);
                if v < best_v {
                    best_v = v;
                    best_k = k;
                }
            }
            // Also keep the current point in contention.
            let cur_v = objective(params, x);
            let step = (lhi - llo) / (scan - 1) as f64;
            let center = if cur_v < best_v {
                x[i].log10()
            } else {
                llo + step * best_k as f64
            };
            let a = (center - step).max(llo);
            let b = (center + step).min(lhi);
            let (lx_best, _) = golden_section(
                |lx| {
                    let mut probe = x;
                    probe[i] = 10f64.powf(lx);
                    objective(params, probe)
                },
                a,
                b,
                opts.tol_log10 * 0.5,
            );
            let old = x[i].log10();
            x[i] = 10f64.powf(lx_best);
            max_move = max_move.max((lx_best - old).abs());
        }
        if max_move < opts.tol_log10 {
            converged = true;
            break;
        }
    }

    let steps = StepSizes::new(x[0], x[1], x[2]);
    let prediction = predict_emse_complete(params, &steps);
    if !prediction.valid {
        return Err(Error::Infeasible);
    }
    let mut bound_active = [false; 3];
    for &i in &free {
        let (lo, hi) = opts.bounds[i];
        let lx = x[i].log10();
        bound_active[i] = (lx - lo.log10()).abs() < 2.0 * opts.tol_log10
            || (hi.log10() - lx).abs() < 2.0 * opts.tol_log10;
    }
    Ok(Solution {
        steps,
        prediction,
        converged,
        bound_active,
    })
}

/// [`solve_with_options`] with the default search box and no pins.
pub fn solve_optimal_step_sizes(params: &SystemParams) -> Result<Solution> {
    solve_with_options(params, &SolveOptions::default())
}

/// Convert a linear power to dBW (`NaN` for non-positive values).
pub fn to_db(watts: f64) -> f64 {
    if watts > 0.0 {
        10.0 * watts.log10()
    } else {
        f64::NAN
    }
}
