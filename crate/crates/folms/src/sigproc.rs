//! Known reference signal: band-limited generation, fractional-time
//! interpolation, and divided-difference derivatives.
//!
//! Sample times `t` are in stored-sample units; integer `t` lands exactly on
//! stored samples. An oversampling factor `L` means the sequence carries
//! content only below `pi / L` of the sample rate (generation fills exactly
//! the lowest `1/L` fraction of the spectrum, so out-of-band energy is
//! identically zero). The spectral margin is what lets a finite kernel
//! interpolate to the noise floor and keeps fractional timing offsets almost
//! losslessly absorbable by a short adaptive filter.

use crate::error::{Error, Result};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rustfft::FftPlanner;
use std::io::Write;
use std::sync::{Arc, OnceLock};

/// Default taps per side of the interpolation kernel.
pub const KERNEL_HALF_WIDTH: usize = 16;
/// Default Kaiser window shape parameter.
pub const KAISER_SHAPE: f64 = 8.0;

const PHASES: usize = 1024;
const MAX_KERNEL_TAPS: usize = 64;

/// Modified Bessel function of the first kind, order zero.
fn bessel_i0(x: f64) -> f64 {
    let half = x / 2.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 1.0;
    loop {
        term *= (half / k) * (half / k);
        sum += term;
        if term < sum * 1e-17 {
            return sum;
        }
        k += 1.0;
    }
}

fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else if x == x.trunc() {
        // Exact zeros at integer arguments keep the interpolation condition
        // bit-exact (sin(pi * j) never rounds to zero on its own).
        0.0
    } else {
        let px = std::f64::consts::PI * x;
        px.sin() / px
    }
}

/// Kaiser-windowed sinc interpolator with a precomputed polyphase table.
///
/// Kernel taps for a fractional offset `f` in [0, 1) sit at integer grid
/// offsets `j = -(K-1) ..= K` around `floor(tau)` and are normalized so they
/// sum to one. At `f = 0` the kernel is an exact unit impulse, so integer
/// sample times reproduce stored samples bit for bit.
#[derive(Debug)]
pub struct Interpolator {
    half_width: usize,
    shape: f64,
    /// `(PHASES + 1)` rows of `2 * half_width` normalized taps.
    table: Vec<f64>,
}

impl Interpolator {
    pub fn new(half_width: usize, shape: f64) -> Self {
        assert!(
            half_width >= 1 && 2 * half_width <= MAX_KERNEL_TAPS,
            "kernel half-width out of range"
        );
        let taps = 2 * half_width;
        let mut table = vec![0.0; (PHASES + 1) * taps];
        for p in 0..=PHASES {
            let frac = p as f64 / PHASES as f64;
            let row = Self::kernel_exact(half_width, shape, frac);
            table[p * taps..(p + 1) * taps].copy_from_slice(&row);
        }
        Interpolator {
            half_width,
            shape,
            table,
        }
    }

    pub fn half_width(&self) -> usize {
        self.half_width
    }

    pub fn shape(&self) -> f64 {
        self.shape
    }

    /// Directly evaluated, normalized kernel for offset `frac` in [0, 1].
    pub fn kernel_exact(half_width: usize, shape: f64, frac: f64) -> Vec<f64> {
        let k = half_width as i64;
        let denom = bessel_i0(shape);
        let mut taps: Vec<f64> = (1 - k..=k)
            .map(|j| {
                let x = j as f64 - frac;
                let u = x / half_width as f64;
                let window = if u.abs() <= 1.0 {
                    bessel_i0(shape * (1.0 - u * u).sqrt()) / denom
                } else {
                    0.0
                };
                sinc(x) * window
            })
            .collect();
        let sum: f64 = taps.iter().sum();
        for t in &mut taps {
            *t /= sum;
        }
        taps
    }

    /// Fill `out` (length `2 * half_width`) with the kernel at offset `frac`,
    /// linearly interpolated between table phases.
    fn kernel_into(&self, frac: f64, out: &mut [f64]) {
        let taps = 2 * self.half_width;
        debug_assert_eq!(out.len(), taps);
        let pos = frac * PHASES as f64;
        let p = (pos as usize).min(PHASES - 1);
        let r = pos - p as f64;
        if r == 0.0 {
            out.copy_from_slice(&self.table[p * taps..(p + 1) * taps]);
            return;
        }
        let lo = &self.table[p * taps..(p + 1) * taps];
        let hi = &self.table[(p + 1) * taps..(p + 2) * taps];
        for i in 0..taps {
            out[i] = lo[i] + r * (hi[i] - lo[i]);
        }
    }
}

fn default_interpolator() -> Arc<Interpolator> {
    static DEFAULT: OnceLock<Arc<Interpolator>> = OnceLock::new();
    DEFAULT
        .get_or_init(|| Arc::new(Interpolator::new(KERNEL_HALF_WIDTH, KAISER_SHAPE)))
        .clone()
}

/// Divided-difference scheme for the time derivative of the filtered signal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DerivativeScheme {
    /// Centered first-order divided difference, error O(h^2).
    #[default]
    Centered,
    /// Backward first-order divided difference, error O(h).
    Backward,
}

/// Band-limited complex reference sequence with continuous-time access.
#[derive(Debug, Clone)]
pub struct KnownSignal {
    grid: Vec<Complex64>,
    oversampling: usize,
    variance: f64,
    len: usize,
    interp: Arc<Interpolator>,
}

impl KnownSignal {
    /// Generate `n_samples` of circularly-symmetric complex Gaussian signal
    /// with mean power `variance`, band-limited to `pi / oversampling` of the
    /// sample rate. Deterministic for a given seed.
    ///
    /// The draw happens in the DFT domain: exactly the `n_samples / L`
    /// lowest-frequency bins are filled, which makes the out-of-band energy
    /// identically zero and gives exact autocorrelation zeros at lags that
    /// are multiples of `L`.
    pub fn generate(
        n_samples: usize,
        variance: f64,
        oversampling: usize,
        seed: u64,
    ) -> Result<Self> {
        if n_samples == 0 {
            return Err(Error::invalid("n_samples must be positive"));
        }
        if !(variance > 0.0 && variance.is_finite()) {
            return Err(Error::invalid("variance must be positive and finite"));
        }
        if oversampling == 0 {
            return Err(Error::invalid("oversampling factor must be >= 1"));
        }
        let grid_len = n_samples;
        if grid_len < 4 * KERNEL_HALF_WIDTH {
            return Err(Error::invalid(
                "signal too short for the interpolation kernel",
            ));
        }
        if grid_len % oversampling != 0 {
            return Err(Error::invalid(
                "n_samples must be a multiple of the oversampling factor",
            ));
        }

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n_bins = grid_len / oversampling;
        let half_down = n_bins / 2;
        let scale = (variance * (grid_len * oversampling) as f64 / 2.0).sqrt();
        let mut spectrum = vec![Complex64::new(0.0, 0.0); grid_len];
        for offset in 0..n_bins {
            let k = offset as i64 - half_down as i64;
            let idx = k.rem_euclid(grid_len as i64) as usize;
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            spectrum[idx] = Complex64::new(re * scale, im * scale);
        }

        let fft = FftPlanner::new().plan_fft_inverse(grid_len);
        fft.process(&mut spectrum);
        let norm = 1.0 / grid_len as f64;
        for v in &mut spectrum {
            *v *= norm;
        }

        Ok(KnownSignal {
            grid: spectrum,
            oversampling,
            variance,
            len: n_samples,
            interp: default_interpolator(),
        })
    }

    /// Wrap an existing grid-rate sequence (mainly for tests and tooling).
    pub fn from_grid(grid: Vec<Complex64>, oversampling: usize, variance: f64) -> Result<Self> {
        if oversampling == 0 {
            return Err(Error::invalid("oversampling factor must be >= 1"));
        }
        if grid.len() < 4 * KERNEL_HALF_WIDTH {
            return Err(Error::invalid(
                "grid too short for the interpolation kernel",
            ));
        }
        let len = grid.len();
        Ok(KnownSignal {
            grid,
            oversampling,
            variance,
            len,
            interp: default_interpolator(),
        })
    }

    /// Number of stored samples.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn oversampling(&self) -> usize {
        self.oversampling
    }

    /// Nominal mean power sigma_x^2.
    pub fn variance(&self) -> f64 {
        self.variance
    }

    /// Band edge of the stored sequence in cycles per sample.
    pub fn max_frequency(&self) -> f64 {
        0.5 / self.oversampling as f64
    }

    /// Stored sample `n`.
    pub fn sample(&self, n: usize) -> Complex64 {
        self.grid[n]
    }

    /// The stored sequence.
    pub fn grid(&self) -> &[Complex64] {
        &self.grid
    }

    /// Smallest valid fractional sample time.
    pub fn min_t(&self) -> f64 {
        (self.interp.half_width - 1) as f64
    }

    /// Largest valid fractional sample time (exclusive).
    pub fn max_t(&self) -> f64 {
        (self.grid.len() - self.interp.half_width) as f64
    }

    fn check_grid_span(&self, t: f64, tau_lo: f64, tau_hi: f64) -> Result<()> {
        let k = self.interp.half_width as f64;
        if !(tau_lo >= k - 1.0) || !(tau_hi < self.grid.len() as f64 - k) {
            return Err(Error::OutOfRange {
                t,
                min: self.min_t(),
                max: self.max_t(),
            });
        }
        Ok(())
    }

    /// Windowed-sinc interpolated value at fractional sample time `t`.
    /// Exact at integer `t`.
    pub fn sample_at(&self, t: f64) -> Result<Complex64> {
        let tau = t;
        self.check_grid_span(t, tau, tau)?;
        let i0 = tau.floor() as usize;
        let frac = tau - i0 as f64;
        let taps = 2 * self.interp.half_width;
        let mut kernel = [0.0; MAX_KERNEL_TAPS];
        self.interp.kernel_into(frac, &mut kernel[..taps]);
        let base = i0 + 1 - self.interp.half_width;
        let mut acc = Complex64::new(0.0, 0.0);
        for (c, s) in kernel[..taps].iter().zip(&self.grid[base..base + taps]) {
            acc += s * *c;
        }
        Ok(acc)
    }

    /// Regressor `[y(t), y(t-1), ..., y(t-m+1)]`.
    pub fn regressor_at(&self, t: f64, m: usize) -> Result<Vec<Complex64>> {
        let mut out = vec![Complex64::new(0.0, 0.0); m];
        self.regressor_into(t, &mut out)?;
        Ok(out)
    }

    /// Fill `out` with the regressor at `t`; `out.len()` sets the lag count.
    ///
    /// All lags share one kernel evaluation since integer lags leave the
    /// fractional offset unchanged.
    pub fn regressor_into(&self, t: f64, out: &mut [Complex64]) -> Result<()> {
        let m = out.len();
        if m == 0 {
            return Err(Error::invalid("regressor length must be positive"));
        }
        let tau = t;
        let tau_last = tau - (m - 1) as f64;
        self.check_grid_span(t, tau_last, tau)?;
        let i0 = tau.floor() as usize;
        let frac = tau - i0 as f64;
        let taps = 2 * self.interp.half_width;
        let mut kernel = [0.0; MAX_KERNEL_TAPS];
        self.interp.kernel_into(frac, &mut kernel[..taps]);
        let k = self.interp.half_width;
        for (i, slot) in out.iter_mut().enumerate() {
            let base = i0 - i + 1 - k;
            let mut acc = Complex64::new(0.0, 0.0);
            for (c, s) in kernel[..taps].iter().zip(&self.grid[base..base + taps]) {
                acc += s * *c;
            }
            *slot = acc;
        }
        Ok(())
    }

    /// Dump the sequence as little-endian interleaved f64 I/Q pairs.
    pub fn write_iq<W: Write>(&self, mut w: W) -> Result<()> {
        for s in &self.grid {
            w.write_all(&s.re.to_le_bytes())?;
            w.write_all(&s.im.to_le_bytes())?;
        }
        Ok(())
    }
}

/// Filtered time derivative `w^H y'` from two regressors.
///
/// Centered scheme expects `reg_a = y_{n+1}`, `reg_b = y_{n-1}` and divides
/// by `2 (1 + eta)`; backward expects `reg_a = y_n`, `reg_b = y_{n-1}` and
/// divides by `1 + eta`.
pub fn filtered_derivative(
    weights: &[Complex64],
    reg_a: &[Complex64],
    reg_b: &[Complex64],
    eta: f64,
    scheme: DerivativeScheme,
) -> Result<Complex64> {
    if weights.len() != reg_a.len() || weights.len() != reg_b.len() {
        return Err(Error::invalid(
            "weights and regressors must have equal length",
        ));
    }
    let step = 1.0 + eta;
    if !(step > 0.0) {
        return Err(Error::invalid("1 + eta must be positive"));
    }
    let mut diff = Complex64::new(0.0, 0.0);
    for ((w, a), b) in weights.iter().zip(reg_a).zip(reg_b) {
        diff += w.conj() * (a - b);
    }
    Ok(match scheme {
        DerivativeScheme::Centered => diff / (2.0 * step),
        DerivativeScheme::Backward => diff / step,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn tone(n_grid: usize, cycles_per_grid_sample: f64) -> Vec<Complex64> {
        (0..n_grid)
            .map(|n| {
                Complex64::from_polar(
                    1.0,
                    2.0 * std::f64::consts::PI * cycles_per_grid_sample * n as f64,
                )
            })
            .collect()
    }

    #[test]
    fn integer_times_reproduce_samples_exactly() {
        let sig = KnownSignal::generate(512, 1.0, 2, 11).unwrap();
        for n in 16..490 {
            let direct = sig.sample(n);
            let interp = sig.sample_at(n as f64).unwrap();
            assert_eq!(direct, interp, "mismatch at n = {n}");
        }
    }

    #[test]
    fn kernel_rows_sum_to_one() {
        let interp = Interpolator::new(KERNEL_HALF_WIDTH, KAISER_SHAPE);
        for p in [0.0, 0.125, 0.3, 0.5, 0.77, 0.999] {
            let mut kernel = [0.0; MAX_KERNEL_TAPS];
            interp.kernel_into(p, &mut kernel[..2 * KERNEL_HALF_WIDTH]);
            let sum: f64 = kernel[..2 * KERNEL_HALF_WIDTH].iter().sum();
            assert!((sum - 1.0).abs() < 1e-12, "sum {sum} at frac {p}");
        }
        let exact = Interpolator::kernel_exact(KERNEL_HALF_WIDTH, KAISER_SHAPE, 0.42);
        let sum: f64 = exact.iter().sum();
        assert!((sum - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tone_interpolation_below_minus_60_db() {
        // f = 0.1 cycles/sample at L = 1; expected value is analytic.
        let f = 0.1;
        let sig = KnownSignal::from_grid(tone(1024, f), 1, 1.0).unwrap();
        let t = 100.5;
        let got = sig.sample_at(t).unwrap();
        let want = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * f * t);
        let err = (got - want).norm();
        assert!(err < 1e-3, "interpolation error {err:.2e} above -60 dB");
    }

    #[test]
    fn out_of_range_is_an_error() {
        let sig = KnownSignal::generate(256, 1.0, 2, 3).unwrap();
        let n = sig.len() as f64;
        assert!(matches!(
            sig.sample_at(n + 5.0),
            Err(Error::OutOfRange { .. })
        ));
        assert!(matches!(sig.sample_at(2.0), Err(Error::OutOfRange { .. })));
        assert!(sig.sample_at(sig.min_t()).is_ok());
    }

    #[test]
    fn generation_rejects_bad_arguments() {
        assert!(KnownSignal::generate(0, 1.0, 2, 1).is_err());
        assert!(KnownSignal::generate(100, 0.0, 2, 1).is_err());
        assert!(KnownSignal::generate(100, -1.0, 2, 1).is_err());
        assert!(KnownSignal::generate(100, 1.0, 0, 1).is_err());
    }

    #[test]
    fn generated_power_matches_variance() {
        let sig = KnownSignal::generate(1_000_000, 1.0, 2, 7).unwrap();
        let power: f64 =
            (0..sig.len()).map(|n| sig.sample(n).norm_sqr()).sum::<f64>() / sig.len() as f64;
        assert!((0.99..=1.01).contains(&power), "mean power {power}");
    }

    #[test]
    fn out_of_band_energy_at_least_60_db_down() {
        // FFT periodogram oracle on the stored grid.
        let sig = KnownSignal::generate(100_000, 1.0, 2, 5).unwrap();
        let mut spec: Vec<Complex64> = sig.grid().to_vec();
        let fft = FftPlanner::new().plan_fft_forward(spec.len());
        fft.process(&mut spec);
        let n = spec.len();
        let band = n / 4; // |omega| <= pi/2 <=> bins within n/4 of DC
        let total: f64 = spec.iter().map(|c| c.norm_sqr()).sum();
        let out_of_band: f64 = spec
            .iter()
            .enumerate()
            .filter(|(k, _)| {
                let d = (*k).min(n - *k);
                d > band
            })
            .map(|(_, c)| c.norm_sqr())
            .sum();
        assert!(
            out_of_band <= 1e-6 * total,
            "out-of-band fraction {:.2e}",
            out_of_band / total
        );
    }

    #[test]
    fn base_rate_signal_is_white() {
        // L = 1: plain white Gaussian; lag-1 autocorrelation within 3 sigma of 0.
        let sig = KnownSignal::generate(100_000, 1.0, 1, 13).unwrap();
        let n = sig.len() - 1;
        let acf: Complex64 = (0..n)
            .map(|i| sig.sample(i + 1) * sig.sample(i).conj())
            .sum::<Complex64>()
            / n as f64;
        let sigma = 1.0 / (n as f64).sqrt();
        assert!(acf.norm() < 3.0 * sigma, "lag-1 acf {:.3e}", acf.norm());
    }

    #[test]
    fn half_band_signal_decorrelates_at_even_lags() {
        // Content below pi/2 puts exact autocorrelation zeros at even lags.
        let sig = KnownSignal::generate(100_000, 1.0, 2, 17).unwrap();
        let n = sig.len() - 2;
        let acf2: Complex64 = (0..n)
            .map(|i| sig.sample(i + 2) * sig.sample(i).conj())
            .sum::<Complex64>()
            / n as f64;
        let sigma = 1.0 / (n as f64).sqrt();
        assert!(acf2.norm() < 3.0 * sigma, "lag-2 acf {:.3e}", acf2.norm());
        // Lag 1 carries the expected half-band correlation ~ 2/pi.
        let acf1: Complex64 = (0..n)
            .map(|i| sig.sample(i + 1) * sig.sample(i).conj())
            .sum::<Complex64>()
            / n as f64;
        assert!(
            (acf1.re - 2.0 / std::f64::consts::PI).abs() < 0.02,
            "lag-1 acf {:.3}",
            acf1.re
        );
    }

    #[test]
    fn regressor_matches_elementwise_sampling() {
        let sig = KnownSignal::generate(4096, 1.0, 2, 23).unwrap();
        let t = 100.25;
        let reg = sig.regressor_at(t, 5).unwrap();
        for (i, v) in reg.iter().enumerate() {
            let want = sig.sample_at(t - i as f64).unwrap();
            assert!(
                (v - want).norm() < 1e-13,
                "lag {i}: {:.3e}",
                (v - want).norm()
            );
        }
        // m = 1 degenerates to sample_at.
        let single = sig.regressor_at(t, 1).unwrap();
        assert_eq!(single[0], {
            let mut out = [Complex64::new(0.0, 0.0)];
            sig.regressor_into(t, &mut out).unwrap();
            out[0]
        });
    }

    #[test]
    fn regressor_at_integer_time_is_raw_window() {
        let sig = KnownSignal::generate(1024, 1.0, 2, 29).unwrap();
        let t = 200;
        let reg = sig.regressor_at(t as f64, 5).unwrap();
        for (i, v) in reg.iter().enumerate() {
            assert_eq!(*v, sig.sample(t - i));
        }
    }

    #[test]
    fn shift_composition() {
        // Delaying the grid by d consumer samples shifts sample_at by d.
        let sig = KnownSignal::generate(2048, 1.0, 2, 31).unwrap();
        let d = 7usize;
        let shifted: Vec<Complex64> = sig.grid()[d..].to_vec();
        let delayed = KnownSignal::from_grid(shifted, 2, 1.0).unwrap();
        for &t in &[60.0, 101.375, 333.5] {
            let a = sig.sample_at(t).unwrap();
            let b = delayed.sample_at(t - d as f64).unwrap();
            assert_eq!(a, b, "t = {t}");
        }
    }

    #[test]
    fn derivative_of_constant_is_zero() {
        let w = vec![Complex64::new(0.3, -0.2); 4];
        let reg = vec![Complex64::new(1.0, 1.0); 4];
        for scheme in [DerivativeScheme::Centered, DerivativeScheme::Backward] {
            let d = filtered_derivative(&w, &reg, &reg, 0.0, scheme).unwrap();
            assert_eq!(d, Complex64::new(0.0, 0.0));
        }
    }

    #[test]
    fn derivative_rejects_bad_arguments() {
        let w = vec![Complex64::new(1.0, 0.0); 3];
        let a = vec![Complex64::new(1.0, 0.0); 4];
        let b = vec![Complex64::new(1.0, 0.0); 3];
        assert!(filtered_derivative(&w, &a, &b, 0.0, DerivativeScheme::Centered).is_err());
        assert!(filtered_derivative(&w, &b, &b, -1.0, DerivativeScheme::Centered).is_err());
    }

    /// Analytic regressor of a unit tone at consumer-rate frequency `f`.
    fn tone_regressor(f: f64, t: f64, m: usize) -> Vec<Complex64> {
        (0..m)
            .map(|i| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * f * (t - i as f64)))
            .collect()
    }

    #[test]
    fn centered_derivative_matches_scaled_tone_derivative() {
        // On a tone the centered difference equals the analytic derivative
        // scaled by sin(w h)/(w h); check against that closed form to 0.1%.
        let f = 0.05;
        let w: Vec<Complex64> = vec![
            Complex64::new(0.9, 0.1),
            Complex64::new(-0.2, 0.4),
            Complex64::new(0.05, -0.3),
        ];
        let t = 100.0;
        let y = tone_regressor(f, t, 3);
        let y_next = tone_regressor(f, t + 1.0, 3);
        let y_prev = tone_regressor(f, t - 1.0, 3);
        let got = filtered_derivative(&w, &y_next, &y_prev, 0.0, DerivativeScheme::Centered)
            .unwrap();
        let omega = 2.0 * std::f64::consts::PI * f;
        let wy: Complex64 = w.iter().zip(&y).map(|(wi, yi)| wi.conj() * yi).sum();
        let want = Complex64::i() * omega * wy * (omega.sin() / omega);
        assert!(
            (got - want).norm() < 1e-3 * want.norm(),
            "rel err {:.2e}",
            (got - want).norm() / want.norm()
        );
    }

    #[test]
    fn derivative_error_orders() {
        // Relative error vs the true tone derivative: centered ~ O(h^2) in
        // frequency (ratio ~4 when f halves), backward ~ O(h) (ratio ~2).
        let w: Vec<Complex64> = vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(0.2, -0.5),
            Complex64::new(-0.1, 0.3),
        ];
        let rel_err = |f: f64, scheme: DerivativeScheme| -> f64 {
            let t = 50.0;
            let y = tone_regressor(f, t, 3);
            let y_next = tone_regressor(f, t + 1.0, 3);
            let y_prev = tone_regressor(f, t - 1.0, 3);
            let (a, b) = match scheme {
                DerivativeScheme::Centered => (&y_next, &y_prev),
                DerivativeScheme::Backward => (&y, &y_prev),
            };
            let got = filtered_derivative(&w, a, b, 0.0, scheme).unwrap();
            let omega = 2.0 * std::f64::consts::PI * f;
            let wy: Complex64 = w.iter().zip(&y).map(|(wi, yi)| wi.conj() * yi).sum();
            let want = Complex64::i() * omega * wy;
            (got - want).norm() / want.norm()
        };

        let f = 0.05;
        let centered_ratio =
            rel_err(f, DerivativeScheme::Centered) / rel_err(f / 2.0, DerivativeScheme::Centered);
        let backward_ratio =
            rel_err(f, DerivativeScheme::Backward) / rel_err(f / 2.0, DerivativeScheme::Backward);
        assert!(
            (centered_ratio - 4.0).abs() < 0.8,
            "centered ratio {centered_ratio}"
        );
        assert!(
            (backward_ratio - 2.0).abs() < 0.4,
            "backward ratio {backward_ratio}"
        );
        // And centered beats backward outright on a smooth signal.
        assert!(rel_err(f, DerivativeScheme::Centered) < rel_err(f, DerivativeScheme::Backward));
    }

    #[test]
    fn iq_dump_is_little_endian_interleaved() {
        let sig = KnownSignal::generate(128, 1.0, 2, 3).unwrap();
        let mut buf = Vec::new();
        sig.write_iq(&mut buf).unwrap();
        assert_eq!(buf.len(), sig.len() * 16);
        let re = f64::from_le_bytes(buf[0..8].try_into().unwrap());
        let im = f64::from_le_bytes(buf[8..16].try_into().unwrap());
        assert_eq!(Complex64::new(re, im), sig.sample(0));
    }

    proptest! {
        #[test]
        fn prop_kernel_sums_to_one(frac in 0.0f64..1.0) {
            let interp = Interpolator::new(KERNEL_HALF_WIDTH, KAISER_SHAPE);
            let mut kernel = [0.0; MAX_KERNEL_TAPS];
            interp.kernel_into(frac, &mut kernel[..2 * KERNEL_HALF_WIDTH]);
            let sum: f64 = kernel[..2 * KERNEL_HALF_WIDTH].iter().sum();
            prop_assert!((sum - 1.0).abs() < 1e-12);
        }

        #[test]
        fn prop_interpolation_condition(n in 16usize..240) {
            let sig = KnownSignal::generate(256, 1.0, 2, 41).unwrap();
            prop_assert_eq!(sig.sample_at(n as f64).unwrap(), sig.sample(n));
        }
    }
}
