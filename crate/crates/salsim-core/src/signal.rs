//! Sampled-signal substrate: time grids, complex baseband envelopes,
//! Parseval-scaled spectra, frequency-domain masking and decimation.
//!
//! Conventions used throughout the crate:
//!
//! * envelopes are complex baseband fields relative to the laser carrier,
//!   `power = |s|^2`, `energy = sum(|s|^2) * dt`;
//! * spectra are fftshifted (frequencies strictly increasing over
//!   `[-Fs/2, Fs/2)`) and scaled by `dt` so that discrete Parseval holds:
//!   `sum(|S|^2) * df == sum(|s|^2) * dt`;
//! * pulse-local time is centered, `t in [-Tp/2, Tp/2)`, matching the
//!   rectangular pulse support used by the transmit chain.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

pub mod io;

// ---------------------------------------------------------------------------
// FFT plan cache
// ---------------------------------------------------------------------------

struct PlanCache {
    planner: FftPlanner<f64>,
    forward: HashMap<usize, Arc<dyn Fft<f64>>>,
    inverse: HashMap<usize, Arc<dyn Fft<f64>>>,
}

fn plan_cache() -> &'static Mutex<PlanCache> {
    static CACHE: OnceLock<Mutex<PlanCache>> = OnceLock::new();
    CACHE.get_or_init(|| {
        Mutex::new(PlanCache {
            planner: FftPlanner::new(),
            forward: HashMap::new(),
            inverse: HashMap::new(),
        })
    })
}

/// In-place forward DFT (no scaling).
pub fn fft_forward(buf: &mut [Complex64]) {
    let plan = {
        let mut cache = plan_cache().lock().unwrap();
        let n = buf.len();
        if let Some(p) = cache.forward.get(&n) {
            p.clone()
        } else {
            let p = cache.planner.plan_fft_forward(n);
            cache.forward.insert(n, p.clone());
            p
        }
    };
    plan.process(buf);
}

/// In-place inverse DFT, scaled by `1/N` so that `ifft(fft(x)) == x`.
pub fn fft_inverse(buf: &mut [Complex64]) {
    let plan = {
        let mut cache = plan_cache().lock().unwrap();
        let n = buf.len();
        if let Some(p) = cache.inverse.get(&n) {
            p.clone()
        } else {
            let p = cache.planner.plan_fft_inverse(n);
            cache.inverse.insert(n, p.clone());
            p
        }
    };
    plan.process(buf);
    let scale = 1.0 / buf.len() as f64;
    for v in buf.iter_mut() {
        *v *= scale;
    }
}

/// Frequency of unshifted DFT bin `i` out of `n` at sample rate `fs`.
#[inline]
pub fn bin_freq(i: usize, n: usize, fs: f64) -> f64 {
    let half = (n - 1) / 2;
    if i <= half {
        i as f64 * fs / n as f64
    } else {
        (i as f64 - n as f64) * fs / n as f64
    }
}

// ---------------------------------------------------------------------------
// TimeGrid
// ---------------------------------------------------------------------------

/// Uniform sampling grid in pulse-local time.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    /// Samples per second.
    pub sample_rate: f64,
    /// Number of samples.
    pub num_samples: usize,
    /// Time of sample 0, seconds.
    pub t_start: f64,
}

impl TimeGrid {
    pub fn new(sample_rate: f64, num_samples: usize, t_start: f64) -> Result<Self> {
        if !(sample_rate > 0.0) || !sample_rate.is_finite() {
            return Err(Error::invalid(format!(
                "sample_rate must be positive and finite, got {sample_rate}"
            )));
        }
        if num_samples == 0 {
            return Err(Error::invalid("num_samples must be positive"));
        }
        if !t_start.is_finite() {
            return Err(Error::invalid("t_start must be finite"));
        }
        Ok(TimeGrid {
            sample_rate,
            num_samples,
            t_start,
        })
    }

    /// Sample spacing, seconds.
    #[inline]
    pub fn dt(&self) -> f64 {
        1.0 / self.sample_rate
    }

    /// Total span, `num_samples / sample_rate`.
    pub fn duration(&self) -> f64 {
        self.num_samples as f64 / self.sample_rate
    }

    /// Time of sample `i`.
    #[inline]
    pub fn time(&self, i: usize) -> f64 {
        self.t_start + i as f64 / self.sample_rate
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.num_samples).map(move |i| self.time(i))
    }

    /// Same rate, length and origin.
    pub fn matches(&self, other: &TimeGrid) -> bool {
        self == other
    }

    pub(crate) fn ensure_matches(&self, other: &TimeGrid, what: &str) -> Result<()> {
        if self.matches(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!(
                "{what}: {} samples @ {} Hz from {} s vs {} samples @ {} Hz from {} s",
                self.num_samples,
                self.sample_rate,
                self.t_start,
                other.num_samples,
                other.sample_rate,
                other.t_start
            )))
        }
    }
}

/// Build a grid covering `duration` seconds at `sample_rate`.
///
/// With `centered` the grid spans `[-duration/2, duration/2)`; otherwise it
/// starts at zero. `num_samples = round(sample_rate * duration)`.
pub fn make_grid(sample_rate: f64, duration: f64, centered: bool) -> Result<TimeGrid> {
    if !(duration > 0.0) || !duration.is_finite() {
        return Err(Error::invalid(format!(
            "duration must be positive and finite, got {duration}"
        )));
    }
    let n = (sample_rate * duration).round();
    if !(n >= 1.0) {
        return Err(Error::invalid(format!(
            "grid would be empty: sample_rate {sample_rate} Hz x duration {duration} s"
        )));
    }
    let t_start = if centered { -duration / 2.0 } else { 0.0 };
    TimeGrid::new(sample_rate, n as usize, t_start)
}

// ---------------------------------------------------------------------------
// ComplexEnvelope
// ---------------------------------------------------------------------------

/// Uniformly sampled complex baseband field (dimensionless amplitude).
#[derive(Debug, Clone)]
pub struct ComplexEnvelope {
    pub grid: TimeGrid,
    pub samples: Vec<Complex64>,
}

impl ComplexEnvelope {
    /// Validating constructor: length must match the grid and every sample
    /// must be finite.
    pub fn new(grid: TimeGrid, samples: Vec<Complex64>) -> Result<Self> {
        if samples.len() != grid.num_samples {
            return Err(Error::invalid(format!(
                "sample count {} does not match grid length {}",
                samples.len(),
                grid.num_samples
            )));
        }
        if !samples.iter().all(|s| s.re.is_finite() && s.im.is_finite()) {
            return Err(Error::invalid("envelope contains non-finite samples"));
        }
        Ok(ComplexEnvelope { grid, samples })
    }

    /// Internal constructor for values produced by arithmetic on already
    /// validated envelopes; skips the finiteness scan.
    pub(crate) fn from_parts(grid: TimeGrid, samples: Vec<Complex64>) -> Self {
        debug_assert_eq!(samples.len(), grid.num_samples);
        ComplexEnvelope { grid, samples }
    }

    pub fn from_fn(grid: TimeGrid, mut f: impl FnMut(f64) -> Complex64) -> Self {
        let samples = grid.times().map(&mut f).collect();
        ComplexEnvelope { grid, samples }
    }

    pub fn constant(grid: TimeGrid, value: Complex64) -> Self {
        let samples = vec![value; grid.num_samples];
        ComplexEnvelope { grid, samples }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// `sum(|s|^2) * dt`.
    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|s| s.norm_sqr()).sum::<f64>() * self.grid.dt()
    }
}

// ---------------------------------------------------------------------------
// Spectrum
// ---------------------------------------------------------------------------

/// Discrete spectrum of an envelope, scaled so Parseval holds.
#[derive(Debug, Clone)]
pub struct Spectrum {
    /// Baseband offsets from the carrier, strictly increasing, uniform.
    pub freqs: Vec<f64>,
    pub values: Vec<Complex64>,
    /// Bin spacing, Hz.
    pub resolution_bw: f64,
    /// Time origin of the transformed envelope (kept so the inverse
    /// transform can restore the grid).
    pub t_start: f64,
}

impl Spectrum {
    /// `sum(|S|^2) * df`.
    pub fn energy(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.resolution_bw
    }

    pub fn sample_rate(&self) -> f64 {
        self.resolution_bw * self.values.len() as f64
    }
}

/// Forward transform: fftshifted DFT scaled by `dt`.
pub fn spectrum(env: &ComplexEnvelope) -> Result<Spectrum> {
    if env.is_empty() {
        return Err(Error::invalid("cannot transform an empty envelope"));
    }
    let n = env.len();
    let fs = env.grid.sample_rate;
    let dt = env.grid.dt();
    let df = fs / n as f64;

    let mut buf = env.samples.clone();
    fft_forward(&mut buf);

    // fftshift: output index i holds unshifted bin (i + shift) % n,
    // where shift = ceil(n/2) puts negative frequencies first.
    let shift = n.div_ceil(2);
    let mut values = Vec::with_capacity(n);
    let mut freqs = Vec::with_capacity(n);
    let half = n / 2;
    for i in 0..n {
        values.push(buf[(i + shift) % n] * dt);
        freqs.push((i as f64 - half as f64) * df);
    }
    Ok(Spectrum {
        freqs,
        values,
        resolution_bw: df,
        t_start: env.grid.t_start,
    })
}

/// Inverse of [`spectrum`].
pub fn inverse_spectrum(spec: &Spectrum) -> Result<ComplexEnvelope> {
    let n = spec.values.len();
    if n == 0 {
        return Err(Error::invalid("cannot invert an empty spectrum"));
    }
    let fs = spec.sample_rate();
    let dt = 1.0 / fs;
    let shift = n.div_ceil(2);
    let mut buf = vec![Complex64::default(); n];
    for i in 0..n {
        buf[(i + shift) % n] = spec.values[i] / dt;
    }
    fft_inverse(&mut buf);
    let grid = TimeGrid::new(fs, n, spec.t_start)?;
    Ok(ComplexEnvelope::from_parts(grid, buf))
}

// ---------------------------------------------------------------------------
// Frequency-domain masking
// ---------------------------------------------------------------------------

fn check_band(env: &ComplexEnvelope, f_lo: f64, f_hi: f64) -> Result<()> {
    let fs = env.grid.sample_rate;
    let nyq = fs / 2.0;
    if !(f_lo < f_hi) {
        return Err(Error::invalid(format!(
            "band edges must satisfy f_lo < f_hi, got [{f_lo}, {f_hi}]"
        )));
    }
    if f_lo < -nyq || f_hi > nyq {
        return Err(Error::BandOutOfRange {
            lo: f_lo,
            hi: f_hi,
            sample_rate: fs,
        });
    }
    Ok(())
}

fn apply_mask(env: &ComplexEnvelope, mask: impl Fn(f64) -> f64) -> ComplexEnvelope {
    let n = env.len();
    let fs = env.grid.sample_rate;
    let mut buf = env.samples.clone();
    fft_forward(&mut buf);
    for (i, v) in buf.iter_mut().enumerate() {
        *v *= mask(bin_freq(i, n, fs));
    }
    fft_inverse(&mut buf);
    ComplexEnvelope::from_parts(env.grid.clone(), buf)
}

/// Ideal rectangular band-pass: keeps bins with `f_lo <= f <= f_hi`.
pub fn bandpass(env: &ComplexEnvelope, f_lo: f64, f_hi: f64) -> Result<ComplexEnvelope> {
    check_band(env, f_lo, f_hi)?;
    Ok(apply_mask(env, |f| {
        if f >= f_lo && f <= f_hi {
            1.0
        } else {
            0.0
        }
    }))
}

/// Band-pass with raised-cosine roll-off of width `edge_width` outside each
/// band edge; `edge_width == 0` reduces to the ideal mask.
pub fn bandpass_raised_cosine(
    env: &ComplexEnvelope,
    f_lo: f64,
    f_hi: f64,
    edge_width: f64,
) -> Result<ComplexEnvelope> {
    check_band(env, f_lo, f_hi)?;
    if edge_width < 0.0 {
        return Err(Error::invalid("edge_width must be non-negative"));
    }
    if edge_width == 0.0 {
        return bandpass(env, f_lo, f_hi);
    }
    Ok(apply_mask(env, |f| {
        if f >= f_lo && f <= f_hi {
            1.0
        } else if f < f_lo && f >= f_lo - edge_width {
            0.5 * (1.0 + (std::f64::consts::PI * (f_lo - f) / edge_width).cos())
        } else if f > f_hi && f <= f_hi + edge_width {
            0.5 * (1.0 + (std::f64::consts::PI * (f - f_hi) / edge_width).cos())
        } else {
            0.0
        }
    }))
}

// ---------------------------------------------------------------------------
// Decimation
// ---------------------------------------------------------------------------

/// Anti-alias low-pass at the new Nyquist, then keep every `factor`-th
/// sample. Caller asserts the signal bandwidth fits `Fs / (2 * factor)`.
pub fn decimate(env: &ComplexEnvelope, factor: usize) -> Result<ComplexEnvelope> {
    if factor < 1 {
        return Err(Error::invalid("decimation factor must be >= 1"));
    }
    if factor == 1 {
        return Ok(env.clone());
    }
    if env.len() < factor {
        return Err(Error::invalid(format!(
            "cannot decimate {} samples by {}",
            env.len(),
            factor
        )));
    }
    let cutoff = env.grid.sample_rate / (2.0 * factor as f64);
    let filtered = apply_mask(env, |f| if f.abs() <= cutoff { 1.0 } else { 0.0 });
    let samples: Vec<Complex64> = filtered.samples.iter().step_by(factor).copied().collect();
    let grid = TimeGrid::new(
        env.grid.sample_rate / factor as f64,
        samples.len(),
        env.grid.t_start,
    )?;
    Ok(ComplexEnvelope::from_parts(grid, samples))
}

// ---------------------------------------------------------------------------
// Windows
// ---------------------------------------------------------------------------

/// Modified Bessel function of the first kind, order zero (power series).
pub fn bessel_i0(x: f64) -> f64 {
    let base = x * x / 4.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..200 {
        term *= base / ((k * k) as f64);
        let prev = sum;
        sum += term;
        if sum == prev || !sum.is_finite() {
            break;
        }
    }
    sum
}

/// Kaiser window of length `n`; larger `beta` trades main-lobe width for
/// lower sidelobes (beta 24 puts the floor near -230 dB).
pub fn kaiser_window(n: usize, beta: f64) -> Vec<f64> {
    if n <= 1 {
        return vec![1.0; n];
    }
    let denom = bessel_i0(beta);
    let m = (n - 1) as f64;
    (0..n)
        .map(|i| {
            let x = 2.0 * i as f64 / m - 1.0;
            bessel_i0(beta * (1.0 - x * x).max(0.0).sqrt()) / denom
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Phase metrology
// ---------------------------------------------------------------------------

/// Unwrapped sample phase, radians.
pub fn unwrapped_phase(samples: &[Complex64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(samples.len());
    let mut prev = 0.0;
    let mut offset = 0.0;
    for (i, s) in samples.iter().enumerate() {
        let raw = s.arg();
        if i > 0 {
            let mut d = raw + offset - prev;
            while d > std::f64::consts::PI {
                offset -= 2.0 * std::f64::consts::PI;
                d -= 2.0 * std::f64::consts::PI;
            }
            while d < -std::f64::consts::PI {
                offset += 2.0 * std::f64::consts::PI;
                d += 2.0 * std::f64::consts::PI;
            }
        }
        prev = raw + offset;
        out.push(prev);
    }
    out
}

/// Instantaneous frequency in Hz via phase unwrap and central differences.
pub fn instantaneous_frequency(env: &ComplexEnvelope) -> Vec<f64> {
    let n = env.len();
    let phase = unwrapped_phase(&env.samples);
    let fs = env.grid.sample_rate;
    let mut out = vec![0.0; n];
    if n == 1 {
        return out;
    }
    let two_pi = 2.0 * std::f64::consts::PI;
    out[0] = (phase[1] - phase[0]) * fs / two_pi;
    out[n - 1] = (phase[n - 1] - phase[n - 2]) * fs / two_pi;
    for i in 1..n - 1 {
        out[i] = (phase[i + 1] - phase[i - 1]) * fs / (2.0 * two_pi);
    }
    out
}

/// Least-squares line fit; returns `(intercept, slope)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    assert_eq!(x.len(), y.len());
    assert!(x.len() >= 2);
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (&xi, &yi) in x.iter().zip(y) {
        sxx += (xi - mx) * (xi - mx);
        sxy += (xi - mx) * (yi - my);
    }
    let slope = sxy / sxx;
    (my - slope * mx, slope)
}

// ===========================================================================
// Tests
// ===========================================================================
