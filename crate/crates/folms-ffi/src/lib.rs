//! C ABI for the adaptive-filter laboratory: opaque system-parameter
//! handles, closed-form EMSE prediction, the optimal step-size solver, and
//! Monte Carlo simulation.
//!
//! Conventions:
//! * every function returns a [`FolmsStatus`] code (0 on success) unless it
//!   returns a pointer, in which case NULL signals failure;
//! * handles from `folms_params_*` constructors must be released with
//!   [`folms_params_free`];
//! * no call unwinds across the boundary.

use folms::estimator::StepSizes;
use folms::harness::{EstimatorConfig, ExperimentConfig, RunConfig};
use folms::theory::{predict_emse_complete, predict_emse_simple, solve_with_options, SolveOptions};
use folms::world::SystemParams;
use folms::Error;
use std::ffi::{c_char, c_double, c_int, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};

/// Status codes returned by every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FolmsStatus {
    Ok = 0,
    /// A required pointer argument was NULL.
    NullArgument = 1,
    /// Configuration text or a parameter value failed to parse/validate.
    InvalidConfig = 2,
    /// Every Monte Carlo replica diverged.
    Diverged = 3,
    /// No stable step sizes exist in the search box.
    Infeasible = 4,
    /// Unknown parameter key.
    UnknownKey = 5,
    /// Internal panic (a bug; the call had no effect).
    Panic = 6,
}

/// Step-size triple.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct FolmsStepSizes {
    pub mu_w: c_double,
    pub mu_eps: c_double,
    pub mu_eta: c_double,
}

/// Steady-state EMSE prediction.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct FolmsEmse {
    pub zeta_w: c_double,
    pub zeta_eps: c_double,
    pub zeta_eta: c_double,
    pub zeta_total: c_double,
    pub mse: c_double,
    pub gamma: c_double,
    /// Nonzero when gamma > 0 and all terms are finite.
    pub valid: c_int,
}

/// Monte Carlo outcome.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct FolmsSimResult {
    /// Mean steady-state EMSE across surviving replicas, watts.
    pub emse_w: c_double,
    /// Standard error across replicas, watts.
    pub stderr_w: c_double,
    /// Replicas excluded after divergence.
    pub diverged: u32,
}

/// Opaque system-parameter handle.
pub struct FolmsParams(SystemParams);

fn status_of(err: &Error) -> FolmsStatus {
    match err {
        Error::Config(_) | Error::InvalidArgument(_) => FolmsStatus::InvalidConfig,
        Error::AllReplicasDiverged(_) | Error::Diverged { .. } => FolmsStatus::Diverged,
        Error::Infeasible => FolmsStatus::Infeasible,
        _ => FolmsStatus::InvalidConfig,
    }
}

fn guarded(f: impl FnOnce() -> FolmsStatus) -> FolmsStatus {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or(FolmsStatus::Panic)
}

/// Parameters of the stationary reference link.
#[no_mangle]
pub extern "C" fn folms_params_default() -> *mut FolmsParams {
    Box::into_raw(Box::new(FolmsParams(SystemParams::baseline())))
}

/// Parameters of the fully drifting reference setup.
#[no_mangle]
pub extern "C" fn folms_params_drifting() -> *mut FolmsParams {
    Box::into_raw(Box::new(FolmsParams(SystemParams::drifting())))
}

/// Build parameters from experiment-config TOML (the `[system]` section of
/// the text is honored; other sections are ignored here). Returns NULL on
/// parse failure.
///
/// # Safety
/// `toml_text` must be a valid NUL-terminated UTF-8 string.
#[no_mangle]
pub unsafe extern "C" fn folms_params_from_toml(toml_text: *const c_char) -> *mut FolmsParams {
    if toml_text.is_null() {
        return std::ptr::null_mut();
    }
    let text = match CStr::from_ptr(toml_text).to_str() {
        Ok(t) => t,
        Err(_) => return std::ptr::null_mut(),
    };
    let parsed = catch_unwind(|| {
        ExperimentConfig::from_toml(text)
            .and_then(|cfg| cfg.system.build())
            .ok()
    })
    .ok()
    .flatten();
    match parsed {
        Some(params) => Box::into_raw(Box::new(FolmsParams(params))),
        None => std::ptr::null_mut(),
    }
}

/// Release a parameter handle.
///
/// # Safety
/// `params` must come from a `folms_params_*` constructor and not already be
/// freed. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn folms_params_free(params: *mut FolmsParams) {
    if !params.is_null() {
        drop(Box::from_raw(params));
    }
}

fn field_mut<'a>(params: &'a mut SystemParams, key: &str) -> Option<&'a mut f64> {
    Some(match key {
        "signal_power" => &mut params.signal_power,
        "sampling_period" => &mut params.sampling_period,
        "channel_gain" => &mut params.channel_gain,
        "ar_coefficient" => &mut params.ar_coefficient,
        "channel_walk_var" => &mut params.channel_walk_var,
        "cfo_hz" => &mut params.cfo_hz,
        "phase_noise_var" => &mut params.phase_noise_var,
        "cfo_walk_var" => &mut params.cfo_walk_var,
        "cfo_drift" => &mut params.cfo_drift,
        "sfo_offset" => &mut params.sfo_offset,
        "jitter_var" => &mut params.jitter_var,
        "sfo_walk_var" => &mut params.sfo_walk_var,
        "sfo_drift" => &mut params.sfo_drift,
        "noise_floor" => &mut params.noise_floor,
        "background_power" => &mut params.background_power,
        _ => return None,
    })
}

/// Set a scalar parameter by its config-file key. Integer-valued fields
/// (`channel_taps`, `filter_taps`, `oversampling`) round to the nearest
/// integer.
///
/// # Safety
/// `params` must be a live handle; `key` a NUL-terminated UTF-8 string.
#[no_mangle]
pub unsafe extern "C" fn folms_params_set(
    params: *mut FolmsParams,
    key: *const c_char,
    value: c_double,
) -> FolmsStatus {
    if params.is_null() || key.is_null() {
        return FolmsStatus::NullArgument;
    }
    let params = &mut (*params).0;
    let key = match CStr::from_ptr(key).to_str() {
        Ok(k) => k,
        Err(_) => return FolmsStatus::InvalidConfig,
    };
    guarded(|| {
        match key {
            "channel_taps" => params.channel_taps = value.round().max(1.0) as usize,
            "filter_taps" => params.filter_taps = value.round().max(1.0) as usize,
            "oversampling" => params.oversampling = value.round().max(1.0) as usize,
            _ => match field_mut(params, key) {
                Some(slot) => *slot = value,
                None => return FolmsStatus::UnknownKey,
            },
        }
        match params.validate() {
            Ok(()) => FolmsStatus::Ok,
            Err(e) => status_of(&e),
        }
    })
}

/// Read a scalar parameter by key.
///
/// # Safety
/// As [`folms_params_set`]; `out` must point to a writable double.
#[no_mangle]
pub unsafe extern "C" fn folms_params_get(
    params: *const FolmsParams,
    key: *const c_char,
    out: *mut c_double,
) -> FolmsStatus {
    if params.is_null() || key.is_null() || out.is_null() {
        return FolmsStatus::NullArgument;
    }
    let p = &(*params).0;
    let key = match CStr::from_ptr(key).to_str() {
        Ok(k) => k,
        Err(_) => return FolmsStatus::InvalidConfig,
    };
    let value = match key {
        "channel_taps" => p.channel_taps as f64,
        "filter_taps" => p.filter_taps as f64,
        "oversampling" => p.oversampling as f64,
        _ => {
            let mut clone = p.clone();
            match field_mut(&mut clone, key) {
                Some(slot) => *slot,
                None => return FolmsStatus::UnknownKey,
            }
        }
    };
    *out = value;
    FolmsStatus::Ok
}

fn emse_out(pred: &folms::EmsePrediction) -> FolmsEmse {
    FolmsEmse {
        zeta_w: pred.zeta_w,
        zeta_eps: pred.zeta_eps,
        zeta_eta: pred.zeta_eta,
        zeta_total: pred.zeta_total,
        mse: pred.mse,
        gamma: pred.gamma,
        valid: pred.valid as c_int,
    }
}

/// Closed-form steady-state EMSE at the given step sizes. `complete`
/// selects the complete expressions (nonzero) or the small-step-size
/// approximations (zero).
///
/// # Safety
/// All pointers must be valid; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn folms_predict_emse(
    params: *const FolmsParams,
    steps: *const FolmsStepSizes,
    complete: c_int,
    out: *mut FolmsEmse,
) -> FolmsStatus {
    if params.is_null() || steps.is_null() || out.is_null() {
        return FolmsStatus::NullArgument;
    }
    let p = &(*params).0;
    let s = StepSizes::new((*steps).mu_w, (*steps).mu_eps, (*steps).mu_eta);
    guarded(|| {
        let pred = if complete != 0 {
            predict_emse_complete(p, &s)
        } else {
            predict_emse_simple(p, &s)
        };
        *out = emse_out(&pred);
        FolmsStatus::Ok
    })
}

/// Solve for the step sizes minimizing the predicted total EMSE. Negative
/// pin values leave a coordinate free; non-negative values pin it.
///
/// # Safety
/// `params` live; `out_steps`/`out_pred` writable or NULL to skip.
#[no_mangle]
pub unsafe extern "C" fn folms_optimal_step_sizes(
    params: *const FolmsParams,
    pin_mu_w: c_double,
    pin_mu_eps: c_double,
    pin_mu_eta: c_double,
    out_steps: *mut FolmsStepSizes,
    out_pred: *mut FolmsEmse,
) -> FolmsStatus {
    if params.is_null() {
        return FolmsStatus::NullArgument;
    }
    let p = &(*params).0;
    let pin = |v: c_double| if v >= 0.0 { Some(v) } else { None };
    guarded(|| {
        let opts = SolveOptions {
            pins: [pin(pin_mu_w), pin(pin_mu_eps), pin(pin_mu_eta)],
            ..SolveOptions::default()
        };
        match solve_with_options(p, &opts) {
            Ok(sol) => {
                if !out_steps.is_null() {
                    *out_steps = FolmsStepSizes {
                        mu_w: sol.steps.mu_w,
                        mu_eps: sol.steps.mu_eps,
                        mu_eta: sol.steps.mu_eta,
                    };
                }
                if !out_pred.is_null() {
                    *out_pred = emse_out(&sol.prediction);
                }
                FolmsStatus::Ok
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Monte Carlo estimate of the steady-state EMSE of the fixed-step
/// estimator at the given step sizes: `replicas` independent runs of
/// `iterations` measured samples after a `preroll` exclusion, averaged.
///
/// # Safety
/// `params` live; `steps` valid; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn folms_simulate_emse(
    params: *const FolmsParams,
    steps: *const FolmsStepSizes,
    seed: u64,
    replicas: u32,
    iterations: u32,
    preroll: u32,
    out: *mut FolmsSimResult,
) -> FolmsStatus {
    if params.is_null() || steps.is_null() || out.is_null() {
        return FolmsStatus::NullArgument;
    }
    let p = (*params).0.clone();
    let s = StepSizes::new((*steps).mu_w, (*steps).mu_eps, (*steps).mu_eta);
    guarded(|| {
        let est = EstimatorConfig {
            optimal: false,
            mu_w: Some(s.mu_w),
            mu_eps: Some(s.mu_eps),
            mu_eta: Some(s.mu_eta),
            ..EstimatorConfig::default()
        };
        let run = RunConfig {
            replicas: replicas.max(1) as usize,
            iterations: iterations as usize,
            preroll: preroll as usize,
            ..RunConfig::default()
        };
        match folms::harness::run_point(&p, &est, &run, seed) {
            Ok(summary) => {
                *out = FolmsSimResult {
                    emse_w: summary.mean,
                    stderr_w: summary.stderr,
                    diverged: summary.diverged as u32,
                };
                FolmsStatus::Ok
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn folms_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ffi::CString;

    #[test]
    fn predict_matches_hand_value() {
        let params = folms_params_default();
        let steps = FolmsStepSizes {
            mu_w: 1e-3,
            mu_eps: 0.0,
            mu_eta: 0.0,
        };
        let mut out = FolmsEmse {
            zeta_w: 0.0,
            zeta_eps: 0.0,
            zeta_eta: 0.0,
            zeta_total: 0.0,
            mse: 0.0,
            gamma: 0.0,
            valid: 0,
        };
        let st = unsafe { folms_predict_emse(params, &steps, 1, &mut out) };
        assert_eq!(st, FolmsStatus::Ok);
        assert!((out.zeta_total - 5e-9 / 1.994).abs() < 1e-15);
        assert_eq!(out.valid, 1);
        unsafe { folms_params_free(params) };
    }

    #[test]
    fn set_get_and_unknown_keys() {
        let params = folms_params_default();
        let key = CString::new("channel_walk_var").unwrap();
        assert_eq!(
            unsafe { folms_params_set(params, key.as_ptr(), 1e-12) },
            FolmsStatus::Ok
        );
        let mut v = 0.0;
        assert_eq!(
            unsafe { folms_params_get(params, key.as_ptr(), &mut v) },
            FolmsStatus::Ok
        );
        assert_eq!(v, 1e-12);
        let bad = CString::new("no_such_key").unwrap();
        assert_eq!(
            unsafe { folms_params_set(params, bad.as_ptr(), 1.0) },
            FolmsStatus::UnknownKey
        );
        // Invalid value is rejected and reported.
        let ar = CString::new("ar_coefficient").unwrap();
        assert_eq!(
            unsafe { folms_params_set(params, ar.as_ptr(), 2.0) },
            FolmsStatus::InvalidConfig
        );
        unsafe { folms_params_free(params) };
    }

    #[test]
    fn solver_and_simulation_roundtrip() {
        let params = folms_params_default();
        let key = CString::new("channel_walk_var").unwrap();
        unsafe { folms_params_set(params, key.as_ptr(), 1e-12) };
        let mut steps = FolmsStepSizes {
            mu_w: 0.0,
            mu_eps: 0.0,
            mu_eta: 0.0,
        };
        let st = unsafe {
            folms_optimal_step_sizes(params, -1.0, -1.0, -1.0, &mut steps, std::ptr::null_mut())
        };
        assert_eq!(st, FolmsStatus::Ok);
        assert!((steps.mu_w - 1e-3).abs() < 0.1e-3);

        let mut sim = FolmsSimResult {
            emse_w: 0.0,
            stderr_w: 0.0,
            diverged: 0,
        };
        let st = unsafe { folms_simulate_emse(params, &steps, 7, 2, 20_000, 5_000, &mut sim) };
        assert_eq!(st, FolmsStatus::Ok);
        // ~ -83 dB at the optimum; accept a loose band for this smoke test.
        let db = 10.0 * sim.emse_w.log10();
        assert!((-86.0..=-80.0).contains(&db), "simulated {db:.1} dB");
        unsafe { folms_params_free(params) };
    }

    #[test]
    fn toml_and_null_handling() {
        let text = CString::new("[system]\nchannel_walk_var = 1e-13\n").unwrap();
        let params = unsafe { folms_params_from_toml(text.as_ptr()) };
        assert!(!params.is_null());
        let key = CString::new("channel_walk_var").unwrap();
        let mut v = 0.0;
        unsafe { folms_params_get(params, key.as_ptr(), &mut v) };
        assert_eq!(v, 1e-13);
        unsafe { folms_params_free(params) };

        let bad = CString::new("[system]\nnot_a_field = 3\n").unwrap();
        assert!(unsafe { folms_params_from_toml(bad.as_ptr()) }.is_null());
        assert!(unsafe { folms_params_from_toml(std::ptr::null()) }.is_null());
        assert_eq!(
            unsafe { folms_predict_emse(std::ptr::null(), std::ptr::null(), 1, std::ptr::null_mut()) },
            FolmsStatus::NullArgument
        );
        unsafe { folms_params_free(std::ptr::null_mut()) };
    }

    #[test]
    fn infeasible_box_maps_to_status() {
        let params = folms_params_default();
        for (k, v) in [("cfo_walk_var", 1e-6f64)] {
            let key = CString::new(k).unwrap();
            unsafe { folms_params_set(params, key.as_ptr(), v) };
        }
        // Pin mu_w absurdly high: gamma < 0 everywhere.
        let st = unsafe {
            folms_optimal_step_sizes(
                params,
                0.9,
                -1.0,
                -1.0,
                std::ptr::null_mut(),
                std::ptr::null_mut(),
            )
        };
        assert_eq!(st, FolmsStatus::Infeasible);
        unsafe { folms_params_free(params) };
    }
}
