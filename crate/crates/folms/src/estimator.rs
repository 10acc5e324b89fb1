//! Fixed-step-size FO-LMS: joint SGD tracking of the channel, the carrier
//! frequency offset, and the sampling frequency offset against a known
//! reference signal.
//!
//! Per sample, with regressor `y_n` at the estimated time `t(n)` and
//! rotation `e^{j phi(n)}`:
//!
//! ```text
//! e      = d - w^H y e^{j phi}
//! w     += mu_w  y e^{j phi} e*
//! eps   += mu_eps  Im{ (w^H y  e^{j phi})* e }
//! eta   += mu_eta  Re{ (w^H y' e^{j phi})* e }
//! phi   += eps ,  t += 1 + eta
//! ```
//!
//! The frequency-offset gradients are the conjugated detector forms: for the
//! sampling loop this equals the usual `Re{w^H y' e^{j phi} e*}`, while for
//! the carrier loop the conjugation fixes the discriminator sign so that a
//! positive phase lag drives the offset estimate upward.

use crate::error::{Error, Result};
use crate::seeds;
use crate::sigproc::{filtered_derivative, DerivativeScheme, KnownSignal};
use crate::world::{SystemParams, World};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Divergence guard: the run aborts when `|e|^2` exceeds this multiple of
/// the nominal received power.
pub const DIVERGENCE_FACTOR: f64 = 1e6;

/// Live parameters of the estimator.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterState {
    /// Channel estimate `w_n`.
    pub weights: Vec<Complex64>,
    /// Carrier frequency offset estimate, radians per sample.
    pub cfo: f64,
    /// Sampling frequency offset estimate, dimensionless.
    pub sfo: f64,
    /// Phase accumulator, radians.
    pub phase: f64,
    /// Time accumulator, fractional sample units.
    pub time: f64,
}

impl FilterState {
    /// Cold start: zero estimates, accumulators at zero.
    pub fn new(filter_taps: usize) -> Self {
        Self::with_start(filter_taps, 0.0)
    }

    /// Cold start with the time accumulator at `t0`.
    pub fn with_start(filter_taps: usize, t0: f64) -> Self {
        FilterState {
            weights: vec![Complex64::new(0.0, 0.0); filter_taps],
            cfo: 0.0,
            sfo: 0.0,
            phase: 0.0,
            time: t0,
        }
    }

    pub fn taps(&self) -> usize {
        self.weights.len()
    }
}

/// The step-size triple.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepSizes {
    pub mu_w: f64,
    pub mu_eps: f64,
    pub mu_eta: f64,
}

impl StepSizes {
    pub fn new(mu_w: f64, mu_eps: f64, mu_eta: f64) -> Self {
        StepSizes {
            mu_w,
            mu_eps,
            mu_eta,
        }
    }

    pub fn zero() -> Self {
        StepSizes::new(0.0, 0.0, 0.0)
    }
}

/// Intermediate quantities of one estimator step, shared by the fixed and
/// variable step-size variants so their update arithmetic is identical.
#[derive(Debug, Clone, Copy)]
pub struct StepTerms {
    /// Instantaneous error `e(n)`.
    pub error: Complex64,
    /// Rotated estimate `w^H y e^{j phi}`.
    pub estimate: Complex64,
    /// Rotated filtered derivative `w^H y' e^{j phi}`.
    pub derivative: Complex64,
    /// `e^{j phi(n)}`.
    pub rotation: Complex64,
    /// Carrier gradient `Im{(w^H y e^{j phi})* e}`.
    pub grad_eps: f64,
    /// Sampling gradient `Re{(w^H y' e^{j phi})* e}`.
    pub grad_eta: f64,
    /// Regressor energy `y^H y`.
    pub regressor_energy: f64,
}

/// Reusable scratch buffers for the per-sample regressors.
#[derive(Debug, Clone)]
pub struct StepScratch {
    pub y: Vec<Complex64>,
    y_a: Vec<Complex64>,
    y_b: Vec<Complex64>,
}

impl StepScratch {
    pub fn new(taps: usize) -> Self {
        StepScratch {
            y: vec![Complex64::new(0.0, 0.0); taps],
            y_a: vec![Complex64::new(0.0, 0.0); taps],
            y_b: vec![Complex64::new(0.0, 0.0); taps],
        }
    }
}

fn dot_conj(w: &[Complex64], y: &[Complex64]) -> Complex64 {
    w.iter().zip(y).map(|(wi, yi)| wi.conj() * yi).sum()
}

/// Compute the error, gradients, and regressors for the current state.
pub(crate) fn compute_terms(
    state: &FilterState,
    known: &KnownSignal,
    d: Complex64,
    scheme: DerivativeScheme,
    scratch: &mut StepScratch,
) -> Result<StepTerms> {
    known.regressor_into(state.time, &mut scratch.y)?;
    let delta = 1.0 + state.sfo;
    let raw_derivative = match scheme {
        DerivativeScheme::Centered => {
            known.regressor_into(state.time + delta, &mut scratch.y_a)?;
            known.regressor_into(state.time - delta, &mut scratch.y_b)?;
            filtered_derivative(&state.weights, &scratch.y_a, &scratch.y_b, state.sfo, scheme)?
        }
        DerivativeScheme::Backward => {
            known.regressor_into(state.time - delta, &mut scratch.y_b)?;
            filtered_derivative(&state.weights, &scratch.y, &scratch.y_b, state.sfo, scheme)?
        }
    };
    let rotation = Complex64::from_polar(1.0, state.phase);
    let estimate = dot_conj(&state.weights, &scratch.y) * rotation;
    let derivative = raw_derivative * rotation;
    let error = d - estimate;
    Ok(StepTerms {
        error,
        estimate,
        derivative,
        rotation,
        grad_eps: (estimate.conj() * error).im,
        grad_eta: (derivative.conj() * error).re,
        regressor_energy: scratch.y.iter().map(|y| y.norm_sqr()).sum(),
    })
}

/// Apply the three gradient updates and advance the accumulators.
pub(crate) fn apply_updates(
    state: &mut FilterState,
    y: &[Complex64],
    terms: &StepTerms,
    mu: &StepSizes,
) {
    let g = terms.rotation * terms.error.conj();
    for (w, yi) in state.weights.iter_mut().zip(y) {
        *w += mu.mu_w * (yi * g);
    }
    state.cfo += mu.mu_eps * terms.grad_eps;
    state.sfo += mu.mu_eta * terms.grad_eta;
    state.phase += state.cfo;
    state.time += 1.0 + state.sfo;
}

/// Instantaneous error and the terms entering the updates, without mutating
/// the state. Returns `(e, y_n, w^H y' e^{j phi})`.
pub fn folms_error(
    state: &FilterState,
    known: &KnownSignal,
    d: Complex64,
    scheme: DerivativeScheme,
) -> Result<(Complex64, Vec<Complex64>, Complex64)> {
    let mut scratch = StepScratch::new(state.taps());
    let terms = compute_terms(state, known, d, scheme, &mut scratch)?;
    Ok((terms.error, scratch.y, terms.derivative))
}

/// One fixed-step FO-LMS update. Returns the instantaneous error.
pub fn folms_step(
    state: &mut FilterState,
    known: &KnownSignal,
    d: Complex64,
    steps: &StepSizes,
    scheme: DerivativeScheme,
) -> Result<Complex64> {
    let mut scratch = StepScratch::new(state.taps());
    folms_step_with(state, known, d, steps, scheme, &mut scratch)
}

pub(crate) fn folms_step_with(
    state: &mut FilterState,
    known: &KnownSignal,
    d: Complex64,
    steps: &StepSizes,
    scheme: DerivativeScheme,
    scratch: &mut StepScratch,
) -> Result<Complex64> {
    let terms = compute_terms(state, known, d, scheme, scratch)?;
    apply_updates(state, &scratch.y, &terms, steps);
    Ok(terms.error)
}

/// Estimator initialization for a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WarmStart {
    /// Zero estimates (Algorithm-style cold start).
    Cold,
    /// True initial frequency offsets, zero channel; the default for
    /// steady-state measurements.
    #[default]
    Offsets,
    /// True offsets and true initial channel.
    Full,
}

/// Options controlling a simulated run.
#[derive(Debug, Clone, Copy)]
pub struct RunOptions {
    /// Measured iterations (after the pre-roll).
    pub n_iter: usize,
    /// Convergence pre-roll iterations excluded from measurement.
    pub preroll: usize,
    pub warm_start: WarmStart,
    pub scheme: DerivativeScheme,
    /// Common start of the estimator and true time accumulators; keeps the
    /// regressor windows inside the generated signal.
    pub start_time: f64,
    /// Record per-sample parameter-error diagnostics.
    pub record_param_errors: bool,
}

impl RunOptions {
    pub fn new(n_iter: usize) -> Self {
        RunOptions {
            n_iter,
            preroll: 0,
            warm_start: WarmStart::Cold,
            scheme: DerivativeScheme::Centered,
            start_time: 64.0,
            record_param_errors: false,
        }
    }

    pub fn total_iterations(&self) -> usize {
        self.n_iter + self.preroll
    }
}

/// Per-sample parameter-error diagnostics of a run.
#[derive(Debug, Clone, Default)]
pub struct Diagnostics {
    /// `|| w_n^o e^{j(phi_o - phi)} - w_n ||^2`, the phase-aligned channel error.
    pub channel_error: Vec<f64>,
    /// True minus estimated carrier frequency offset, radians per sample.
    pub cfo_error: Vec<f64>,
    /// True minus estimated sampling frequency offset.
    pub sfo_error: Vec<f64>,
}

/// Error sequence and diagnostics from one co-simulated run.
#[derive(Debug, Clone, Default)]
pub struct RunTrace {
    /// Instantaneous errors `e(n)` over the whole run (pre-roll included).
    pub errors: Vec<Complex64>,
    /// Injected measurement-noise powers `|v(n)|^2`, for noise-canceled
    /// steady-state estimates.
    pub noise_powers: Vec<f64>,
    /// Iterations at the head of `errors` that belong to the pre-roll.
    pub preroll: usize,
    pub diagnostics: Option<Diagnostics>,
}

impl RunTrace {
    pub fn iterations(&self) -> usize {
        self.errors.len()
    }

    /// Mean of `|e|^2 - |v|^2` over the post-pre-roll tail: an unbiased
    /// steady-state EMSE estimate with the noise sampling variance removed.
    pub fn noise_canceled_emse(&self) -> f64 {
        let tail = &self.errors[self.preroll..];
        let noise = &self.noise_powers[self.preroll..];
        let n = tail.len().max(1) as f64;
        tail.iter()
            .zip(noise)
            .map(|(e, v)| e.norm_sqr() - v)
            .sum::<f64>()
            / n
    }
}

/// Measured steady-state excess MSE: mean `|e|^2` over the retained tail
/// minus the measurement-noise power. May be slightly negative from
/// estimation variance; reported as-is.
pub fn measure_emse(trace: &RunTrace, noise_power: f64, discard_fraction: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&discard_fraction) {
        return Err(Error::invalid("discard_fraction must be in [0, 1)"));
    }
    let skip = (trace.errors.len() as f64 * discard_fraction).floor() as usize;
    let tail = &trace.errors[skip.min(trace.errors.len())..];
    if tail.is_empty() {
        return Err(Error::invalid("no samples left after discarding"));
    }
    let mean = tail.iter().map(|e| e.norm_sqr()).sum::<f64>() / tail.len() as f64;
    Ok(mean - noise_power)
}

/// Smallest 5-smooth number >= `n` (keeps the generation FFT fast) that is
/// also a multiple of `l`.
fn fft_friendly(n: usize, l: usize) -> usize {
    fn smooth(mut x: usize) -> bool {
        for p in [2, 3, 5] {
            while x % p == 0 {
                x /= p;
            }
        }
        x == 1
    }
    let mut x = n.max(l);
    x = x.div_ceil(l) * l;
    while !smooth(x / l.max(1)) || !smooth(x) {
        x += l;
    }
    x
}

fn signal_length(opts: &RunOptions, oversampling: usize) -> usize {
    let need = opts.total_iterations() + 2 * (opts.start_time.ceil() as usize) + 16;
    fft_friendly(need, oversampling)
}

/// Length of the reference signal a run with these options generates; lets
/// external code replay a run against the identical signal.
pub fn prepared_signal_length(opts: &RunOptions, oversampling: usize) -> usize {
    signal_length(opts, oversampling)
}

pub(crate) struct RunSetup {
    pub known: KnownSignal,
    pub world: World,
    pub rng: ChaCha8Rng,
    pub state: FilterState,
    pub threshold: f64,
}

pub(crate) fn prepare_run(
    params: &SystemParams,
    opts: &RunOptions,
    seed: u64,
) -> Result<RunSetup> {
    if opts.n_iter == 0 {
        return Err(Error::invalid("n_iter must be positive"));
    }
    params.validate()?;
    let run_seeds = seeds::RunSeeds {
        signal: seeds::derive(seed, 1),
        world: seeds::derive(seed, 2),
    };
    let known = KnownSignal::generate(
        signal_length(opts, params.oversampling),
        params.signal_power,
        params.oversampling,
        run_seeds.signal,
    )?;
    let mut rng = ChaCha8Rng::seed_from_u64(run_seeds.world);
    let world = World::init(params, opts.start_time, &mut rng);
    let mut state = FilterState::with_start(params.filter_taps, opts.start_time);
    match opts.warm_start {
        WarmStart::Cold => {}
        WarmStart::Offsets => {
            state.cfo = world.carrier.freq_offset;
            state.sfo = world.sampling.freq_offset;
        }
        WarmStart::Full => {
            state.cfo = world.carrier.freq_offset;
            state.sfo = world.sampling.freq_offset;
            state.phase = world.carrier.phase;
            let copy = state.taps().min(world.channel.taps());
            for i in 0..copy {
                state.weights[i] = world.channel.response(i);
            }
        }
    }
    let threshold = DIVERGENCE_FACTOR * params.signal_power * params.channel_gain;
    Ok(RunSetup {
        known,
        world,
        rng,
        state,
        threshold,
    })
}

pub(crate) fn record_diagnostics(
    diag: &mut Diagnostics,
    state: &FilterState,
    world: &World,
) {
    let phase_err = world.carrier.phase - state.phase;
    let align = Complex64::from_polar(1.0, phase_err);
    let taps = state.taps().max(world.channel.taps());
    let mut acc = 0.0;
    for i in 0..taps {
        let truth = if i < world.channel.taps() {
            world.channel.response(i) * align
        } else {
            Complex64::new(0.0, 0.0)
        };
        let est = if i < state.taps() {
            state.weights[i]
        } else {
            Complex64::new(0.0, 0.0)
        };
        acc += (truth - est).norm_sqr();
    }
    diag.channel_error.push(acc);
    diag.cfo_error.push(world.carrier.freq_offset - state.cfo);
    diag.sfo_error.push(world.sampling.freq_offset - state.sfo);
}

/// Co-simulate the world and the fixed-step estimator.
pub fn run_folms(
    params: &SystemParams,
    steps: &StepSizes,
    n_iter: usize,
    seed: u64,
) -> Result<RunTrace> {
    run_folms_with(params, steps, &RunOptions::new(n_iter), seed)
}

/// Co-simulate with explicit run options.
pub fn run_folms_with(
    params: &SystemParams,
    steps: &StepSizes,
    opts: &RunOptions,
    seed: u64,
) -> Result<RunTrace> {
    let RunSetup {
        known,
        mut world,
        mut rng,
        mut state,
        threshold,
    } = prepare_run(params, opts, seed)?;
    let total = opts.total_iterations();
    let mut trace = RunTrace {
        errors: Vec::with_capacity(total),
        noise_powers: Vec::with_capacity(total),
        preroll: opts.preroll,
        diagnostics: opts.record_param_errors.then(Diagnostics::default),
    };
    let mut scratch = StepScratch::new(state.taps());
    for n in 0..total {
        let (clean, noise) = world.emit_parts(&known, &mut rng)?;
        let d = clean + noise;
        if let Some(diag) = trace.diagnostics.as_mut() {
            record_diagnostics(diag, &state, &world);
        }
        let e = folms_step_with(&mut state, &known, d, steps, opts.scheme, &mut scratch)?;
        let power = e.norm_sqr();
        if !(power <= threshold) {
            return Err(Error::Diverged {
                iteration: n,
                error_power: power,
                threshold,
            });
        }
        trace.errors.push(e);
        trace.noise_powers.push(noise.norm_sqr());
        world.step(&mut rng);
    }
    Ok(trace)
}
