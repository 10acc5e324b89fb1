//! Ground-truth simulation: AR(1) time-varying channel, three-state carrier
//! and sampling clocks, measurement noise, and the received signal.
//!
//! All clock states are sample-normalized: one step is one consumer sample,
//! carrier quantities are radians per sample, sampling time is in consumer
//! sample units. [`SystemParams`] carries the physically parameterized
//! description (drift and walk rates coupled to the nominal sampling period
//! `T_s`, as the closed-form theory expects them) and converts to per-step
//! injection variances when building clock states:
//!
//! * carrier walk `sigma_eps^2 -> sigma_eps^2 T_s^2`, drift `kappa -> kappa T_s`
//! * sampling walk `sigma_eta^2 -> sigma_eta^2 T_s^2`, drift `rho -> rho T_s`
//! * jitter `sigma_beta^2 -> sigma_beta^2 / T_s` (sample^2 per step)
//! * phase noise `sigma_phi^2` is already radians^2 per step
//!
//! With that convention the figures' parameter values drive both the
//! simulation and the theory consistently.

use crate::error::{Error, Result};
use crate::sigproc::KnownSignal;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

fn draw_normal(rng: &mut impl Rng, var: f64) -> f64 {
    let z: f64 = rng.sample(StandardNormal);
    z * var.sqrt()
}

fn draw_complex_normal(rng: &mut impl Rng, var: f64) -> Complex64 {
    // Circularly symmetric: each component carries half the power.
    let s = (var / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re * s, im * s)
}

/// Carrier oscillator state (three-state clock model).
#[derive(Debug, Clone, PartialEq)]
pub struct CarrierClockState {
    /// Accumulated carrier phase, radians.
    pub phase: f64,
    /// Carrier frequency offset, radians per sample.
    pub freq_offset: f64,
    /// Linear frequency drift, radians per sample^2.
    pub drift: f64,
    /// Random-walk phase noise variance per step, radians^2.
    pub phase_noise_var: f64,
    /// Random-walk frequency drift variance per step, (radians/sample)^2.
    pub freq_walk_var: f64,
}

impl CarrierClockState {
    /// Advance one sample: `phi' = phi + eps + w_phi`, `eps' = eps + w_eps + kappa`.
    pub fn step(&mut self, rng: &mut impl Rng) {
        self.phase += self.freq_offset + draw_normal(rng, self.phase_noise_var);
        self.freq_offset += draw_normal(rng, self.freq_walk_var) + self.drift;
    }
}

/// Sampling oscillator state (three-state clock model).
#[derive(Debug, Clone, PartialEq)]
pub struct SamplingClockState {
    /// True sampling time, fractional consumer-sample units.
    pub time: f64,
    /// Sampling frequency offset, dimensionless.
    pub freq_offset: f64,
    /// Linear frequency drift per sample.
    pub drift: f64,
    /// Random-walk jitter variance per step, sample^2.
    pub jitter_var: f64,
    /// Random-walk frequency drift variance per step.
    pub freq_walk_var: f64,
}

impl SamplingClockState {
    /// Advance one sample: `t' = t + (1 + eta) + w_beta`, `eta' = eta + w_eta + rho`.
    pub fn step(&mut self, rng: &mut impl Rng) {
        self.time += (1.0 + self.freq_offset) + draw_normal(rng, self.jitter_var);
        self.freq_offset += draw_normal(rng, self.freq_walk_var) + self.drift;
    }
}

/// Time-varying channel `w_n = w_mean + theta_n`, with `theta` an AR(1)
/// vector process of per-tap increment variance `sigma_q^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelState {
    pub mean: Vec<Complex64>,
    pub perturbation: Vec<Complex64>,
    pub ar_coefficient: f64,
    pub perturbation_var: f64,
}

impl ChannelState {
    /// Draw a channel: complex Gaussian mean taps normalized to `gain`
    /// exactly, perturbation initialized from its stationary distribution.
    pub fn draw(
        taps: usize,
        gain: f64,
        ar_coefficient: f64,
        perturbation_var: f64,
        rng: &mut impl Rng,
    ) -> Self {
        assert!(taps >= 1, "channel needs at least one tap");
        assert!(
            (0.0..1.0).contains(&ar_coefficient),
            "AR coefficient must be in [0, 1)"
        );
        let mut mean: Vec<Complex64> = (0..taps).map(|_| draw_complex_normal(rng, 1.0)).collect();
        let norm_sq: f64 = mean.iter().map(|c| c.norm_sqr()).sum();
        let scale = if gain > 0.0 && norm_sq > 0.0 {
            (gain / norm_sq).sqrt()
        } else {
            0.0
        };
        for tap in &mut mean {
            *tap *= scale;
        }
        let stationary = perturbation_var / (1.0 - ar_coefficient * ar_coefficient);
        let perturbation = (0..taps)
            .map(|_| draw_complex_normal(rng, stationary))
            .collect();
        ChannelState {
            mean,
            perturbation,
            ar_coefficient,
            perturbation_var,
        }
    }

    /// Advance one sample: `theta' = alpha theta + q`.
    pub fn step(&mut self, rng: &mut impl Rng) {
        for theta in &mut self.perturbation {
            *theta = *theta * self.ar_coefficient + draw_complex_normal(rng, self.perturbation_var);
        }
    }

    pub fn taps(&self) -> usize {
        self.mean.len()
    }

    /// Instantaneous response `w_n[i] = mean[i] + theta[i]`.
    pub fn response(&self, i: usize) -> Complex64 {
        self.mean[i] + self.perturbation[i]
    }

    pub fn gain(&self) -> f64 {
        self.mean.iter().map(|c| c.norm_sqr()).sum()
    }
}

/// Measurement noise: receiver floor plus an optional background signal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    pub receiver_floor: f64,
    pub background_power: f64,
}

impl NoiseModel {
    pub fn total(&self) -> f64 {
        self.receiver_floor + self.background_power
    }
}

/// Full statistical description of the simulated link.
///
/// Clock nonstationarity parameters are in the physically normalized units
/// used by the steady-state theory (see module docs); `baseline()` matches
/// the reference setup: 0 dBW white known signal oversampled by two, -60 dBW
/// noise floor, five-tap unity-gain channel with `alpha = 0.99999`, 100 Hz
/// carrier offset and a 1 Hz offset on a 1 MHz sampling clock.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct SystemParams {
    /// Known-signal power sigma_x^2, watts.
    pub signal_power: f64,
    /// Oversampling factor L of the stored known signal.
    pub oversampling: usize,
    /// Nominal sampling period T_s, seconds.
    pub sampling_period: f64,

    /// True channel length M.
    pub channel_taps: usize,
    /// Taps the estimator uses to model the channel (may differ from M).
    pub filter_taps: usize,
    /// Channel gain ||w||^2, linear.
    pub channel_gain: f64,
    /// AR(1) coefficient alpha.
    pub ar_coefficient: f64,
    /// Per-tap channel perturbation variance sigma_q^2 per step.
    pub channel_walk_var: f64,

    /// Initial carrier frequency offset, Hz.
    pub cfo_hz: f64,
    /// Random-walk phase noise variance sigma_phi^2.
    pub phase_noise_var: f64,
    /// Carrier frequency random-walk variance sigma_eps^2.
    pub cfo_walk_var: f64,
    /// Linear carrier drift kappa.
    pub cfo_drift: f64,

    /// Initial sampling frequency offset eta, dimensionless.
    pub sfo_offset: f64,
    /// Sampling jitter variance sigma_beta^2.
    pub jitter_var: f64,
    /// Sampling frequency random-walk variance sigma_eta^2.
    pub sfo_walk_var: f64,
    /// Linear sampling drift rho.
    pub sfo_drift: f64,

    /// Receiver noise floor sigma_g^2, watts.
    pub noise_floor: f64,
    /// Background signal power sigma_s^2, watts.
    pub background_power: f64,
}

impl Default for SystemParams {
    fn default() -> Self {
        Self::baseline()
    }
}

impl SystemParams {
    /// Reference setup with no channel or clock nonstationarities.
    pub fn baseline() -> Self {
        SystemParams {
            signal_power: 1.0,
            oversampling: 2,
            sampling_period: 1e-6,
            channel_taps: 5,
            filter_taps: 5,
            channel_gain: 1.0,
            ar_coefficient: 0.99999,
            channel_walk_var: 0.0,
            cfo_hz: 100.0,
            phase_noise_var: 0.0,
            cfo_walk_var: 0.0,
            cfo_drift: 0.0,
            sfo_offset: 1e-6,
            jitter_var: 0.0,
            sfo_walk_var: 0.0,
            sfo_drift: 0.0,
            noise_floor: 1e-6,
            background_power: 0.0,
        }
    }

    /// Reference setup with every channel and clock parameter time-varying
    /// at the default rates used for the variable-step-size comparisons.
    pub fn drifting() -> Self {
        SystemParams {
            channel_walk_var: 1e-13,
            phase_noise_var: 1e-13,
            cfo_walk_var: 1e-8,
            cfo_drift: 1e-8,
            jitter_var: 1e-20,
            sfo_walk_var: 1e-9,
            sfo_drift: 1e-8,
            ..Self::baseline()
        }
    }

    /// Total measurement noise power sigma_v^2.
    pub fn noise_power(&self) -> f64 {
        self.noise_floor + self.background_power
    }

    pub fn noise_model(&self) -> NoiseModel {
        NoiseModel {
            receiver_floor: self.noise_floor,
            background_power: self.background_power,
        }
    }

    /// Initial carrier clock state in per-sample units.
    pub fn carrier_state(&self) -> CarrierClockState {
        let ts = self.sampling_period;
        CarrierClockState {
            phase: 0.0,
            freq_offset: 2.0 * std::f64::consts::PI * self.cfo_hz * ts,
            drift: self.cfo_drift * ts,
            phase_noise_var: self.phase_noise_var,
            freq_walk_var: self.cfo_walk_var * ts * ts,
        }
    }

    /// Initial sampling clock state in per-sample units, starting at `t0`.
    pub fn sampling_state(&self, t0: f64) -> SamplingClockState {
        let ts = self.sampling_period;
        SamplingClockState {
            time: t0,
            freq_offset: self.sfo_offset,
            drift: self.sfo_drift * ts,
            jitter_var: self.jitter_var / ts,
            freq_walk_var: self.sfo_walk_var * ts * ts,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.signal_power > 0.0) {
            return Err(Error::invalid("signal_power must be positive"));
        }
        if self.oversampling == 0 {
            return Err(Error::invalid("oversampling must be >= 1"));
        }
        if !(self.sampling_period > 0.0) {
            return Err(Error::invalid("sampling_period must be positive"));
        }
        if self.channel_taps == 0 || self.filter_taps == 0 {
            return Err(Error::invalid("channel_taps and filter_taps must be >= 1"));
        }
        if !(0.0..1.0).contains(&self.ar_coefficient) {
            return Err(Error::invalid("ar_coefficient must be in [0, 1)"));
        }
        if self.channel_gain < 0.0 {
            return Err(Error::invalid("channel_gain must be non-negative"));
        }
        for (name, v) in [
            ("channel_walk_var", self.channel_walk_var),
            ("phase_noise_var", self.phase_noise_var),
            ("cfo_walk_var", self.cfo_walk_var),
            ("jitter_var", self.jitter_var),
            ("sfo_walk_var", self.sfo_walk_var),
            ("noise_floor", self.noise_floor),
            ("background_power", self.background_power),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("{name} must be non-negative")));
            }
        }
        Ok(())
    }
}

/// Complete world state for one run.
#[derive(Debug, Clone)]
pub struct World {
    pub channel: ChannelState,
    pub carrier: CarrierClockState,
    pub sampling: SamplingClockState,
    pub noise: NoiseModel,
}

impl World {
    /// Build a world from `params`, drawing the channel from `rng`, with the
    /// sampling clock starting at `t0`.
    pub fn init(params: &SystemParams, t0: f64, rng: &mut impl Rng) -> Self {
        World {
            channel: ChannelState::draw(
                params.channel_taps,
                params.channel_gain,
                params.ar_coefficient,
                params.channel_walk_var,
                rng,
            ),
            carrier: params.carrier_state(),
            sampling: params.sampling_state(t0),
            noise: params.noise_model(),
        }
    }

    /// Received sample at the current world state:
    /// `d = w_n^H y_n e^{j phi} + g + s`.
    pub fn emit(&self, known: &KnownSignal, rng: &mut impl Rng) -> Result<Complex64> {
        let (clean, noise) = self.emit_parts(known, rng)?;
        Ok(clean + noise)
    }

    /// Received sample split into its noiseless part and the injected noise
    /// sample, so runs can form noise-canceled steady-state estimates.
    pub fn emit_parts(
        &self,
        known: &KnownSignal,
        rng: &mut impl Rng,
    ) -> Result<(Complex64, Complex64)> {
        emit_received_parts(
            known,
            &self.channel,
            &self.carrier,
            &self.sampling,
            &self.noise,
            rng,
        )
    }

    /// Advance channel, carrier, and sampling states by one sample.
    pub fn step(&mut self, rng: &mut impl Rng) {
        self.channel.step(rng);
        self.carrier.step(rng);
        self.sampling.step(rng);
    }
}

/// Received signal `d(n) = w_n^H y_n^o e^{j phi_o} + g + s` at the current
/// true sampling time.
pub fn emit_received(
    known: &KnownSignal,
    channel: &ChannelState,
    carrier: &CarrierClockState,
    sampling: &SamplingClockState,
    noise: &NoiseModel,
    rng: &mut impl Rng,
) -> Result<Complex64> {
    let (clean, v) = emit_received_parts(known, channel, carrier, sampling, noise, rng)?;
    Ok(clean + v)
}

/// As [`emit_received`], returning `(noiseless, noise)` separately. Noise
/// draws happen even at zero power so the RNG stream does not depend on the
/// noise configuration.
pub fn emit_received_parts(
    known: &KnownSignal,
    channel: &ChannelState,
    carrier: &CarrierClockState,
    sampling: &SamplingClockState,
    noise: &NoiseModel,
    rng: &mut impl Rng,
) -> Result<(Complex64, Complex64)> {
    let m = channel.taps();
    assert!(m <= 64, "channel longer than the regressor scratch buffer");
    let mut reg = [Complex64::new(0.0, 0.0); 64];
    let reg = &mut reg[..m];
    known.regressor_into(sampling.time, reg)?;
    let mut response = Complex64::new(0.0, 0.0);
    for (i, y) in reg.iter().enumerate() {
        response += channel.response(i).conj() * y;
    }
    let rotated = response * Complex64::from_polar(1.0, carrier.phase);
    let g = draw_complex_normal(rng, noise.receiver_floor);
    let s = draw_complex_normal(rng, noise.background_power);
    Ok((rotated, g + s))
}
