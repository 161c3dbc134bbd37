//! Strip-map side-looking geometry and per-pulse echo / reference fields.
//!
//! Delays are bookkept relative to the reference chain: the pulse-local grid
//! spans only the scene swath, never the full round trip, and the absolute
//! carrier phase `exp(-j 2 pi f_c t_o)` of a delayed field is applied
//! analytically. The stop-and-hop approximation freezes the platform during
//! each pulse (at Table-1 speeds the platform moves millimeters per pulse,
//! far below a resolution cell).

use num_complex::Complex64;

use crate::consts::SPEED_OF_LIGHT;
use crate::error::{Error, Result};
use crate::jones::JonesField;
use crate::signal::{fft_forward, fft_inverse, bin_freq, ComplexEnvelope};

// ---------------------------------------------------------------------------
// Types
// ---------------------------------------------------------------------------

/// Platform and scene description (strip-map, side-looking).
#[derive(Debug, Clone, PartialEq)]
pub struct SceneGeometry {
    /// Optical wavelength, m.
    pub wavelength: f64,
    /// Full beam divergence, rad.
    pub divergence: f64,
    /// Vertical standoff range R to the scene center, m.
    pub standoff_range: f64,
    /// Along-track platform speed, m/s.
    pub platform_speed: f64,
    /// Pulse repetition frequency, Hz.
    pub prf: f64,
    /// Reference-chain delay distance R_ref, m (defaults to the standoff
    /// range: scene-centered dechirp).
    pub reference_range: f64,
    /// Power fraction routed to the reference chain by the tap coupler;
    /// `None` disables the split (unit amplitudes both ways).
    pub reference_power_fraction: Option<f64>,
}

impl Default for SceneGeometry {
    fn default() -> Self {
        SceneGeometry {
            wavelength: 1550e-9,
            divergence: 0.1e-3,
            standoff_range: 10e3,
            platform_speed: 50.0,
            prf: 20e3,
            reference_range: 10e3,
            reference_power_fraction: None,
        }
    }
}

impl SceneGeometry {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("wavelength", self.wavelength),
            ("divergence", self.divergence),
            ("standoff_range", self.standoff_range),
            ("platform_speed", self.platform_speed),
            ("prf", self.prf),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::invalid(format!(
                    "geometry {name} must be positive, got {v}"
                )));
            }
        }
        if self.reference_range < 0.0 {
            return Err(Error::invalid("reference_range must be non-negative"));
        }
        if let Some(f) = self.reference_power_fraction {
            if !(f > 0.0 && f < 1.0) {
                return Err(Error::invalid(
                    "reference_power_fraction must be inside (0, 1)",
                ));
            }
        }
        Ok(())
    }

    /// Optical carrier frequency, Hz.
    pub fn carrier_freq(&self) -> f64 {
        SPEED_OF_LIGHT / self.wavelength
    }

    /// Beam footprint on the ground, `divergence * R`, m.
    pub fn footprint(&self) -> f64 {
        self.divergence * self.standoff_range
    }

    /// Synthetic-aperture time `footprint / v`, s.
    pub fn aperture_time(&self) -> f64 {
        self.footprint() / self.platform_speed
    }

    /// Pulses inside one synthetic aperture: `round(T_a * prf)`.
    pub fn pulse_count(&self) -> usize {
        (self.aperture_time() * self.prf).round() as usize
    }

    /// Centered slow-time axis, one entry per pulse, uniform at `1/prf`.
    pub fn slow_time_axis(&self) -> Vec<f64> {
        let n = self.pulse_count();
        let mid = (n as f64 - 1.0) / 2.0;
        (0..n).map(|i| (i as f64 - mid) / self.prf).collect()
    }

    /// Azimuth FM rate of the matched filter, `K_a = 2 v^2 / (lambda R)`.
    pub fn azimuth_rate(&self) -> f64 {
        2.0 * self.platform_speed * self.platform_speed
            / (self.wavelength * self.standoff_range)
    }
}

/// A point scatterer.
#[derive(Debug, Clone, PartialEq)]
pub struct PointTarget {
    /// Along-track position, m.
    pub azimuth_position: f64,
    /// Cross-track offset from the scene center range, m.
    pub range_offset: f64,
    /// Complex reflectivity.
    pub reflectivity: Complex64,
}

impl PointTarget {
    pub fn new(azimuth_position: f64, range_offset: f64, reflectivity: Complex64) -> Self {
        PointTarget {
            azimuth_position,
            range_offset,
            reflectivity,
        }
    }
}

/// Echo and reference fields for one pulse.
#[derive(Debug, Clone)]
pub struct PulseFields {
    pub slow_time: f64,
    pub echo: JonesField,
    pub reference: JonesField,
}

/// Materialized per-pulse fields over the aperture (small scenes/tests;
/// full-scale runs stream pulse by pulse instead).
#[derive(Debug, Clone)]
pub struct PulseSet {
    pub slow_time: Vec<f64>,
    pub pulses: Vec<PulseFields>,
}

// ---------------------------------------------------------------------------
// Geometry
// ---------------------------------------------------------------------------

/// Instantaneous slant range `sqrt((R + dr)^2 + (v t_m - x)^2)`.
pub fn slant_range(g: &SceneGeometry, target: &PointTarget, slow_time: f64) -> f64 {
    let cross = g.standoff_range + target.range_offset;
    let along = g.platform_speed * slow_time - target.azimuth_position;
    (cross * cross + along * along).sqrt()
}

/// Whether the (uniform) beam illuminates the target at this slow time.
pub fn target_visible(g: &SceneGeometry, target: &PointTarget, slow_time: f64) -> bool {
    (g.platform_speed * slow_time - target.azimuth_position).abs() <= g.footprint() / 2.0
}

// ---------------------------------------------------------------------------
// Delay machinery
// ---------------------------------------------------------------------------

/// Circular fractional-sample delay via a frequency-domain phase ramp.
pub fn fractional_delay(env: &ComplexEnvelope, delay: f64) -> ComplexEnvelope {
    let n = env.len();
    let fs = env.grid.sample_rate;
    let mut buf = env.samples.clone();
    fft_forward(&mut buf);
    // exp(-j 2 pi f k delay) over the uniform bin grid is a geometric
    // sequence in k; a recurrence keeps this O(n) without a cexp per bin.
    let df = fs / n as f64;
    let step = Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * df * delay);
    let mut ramp = Complex64::new(1.0, 0.0);
    let half = (n - 1) / 2;
    for (i, v) in buf.iter_mut().enumerate() {
        if i <= half {
            *v *= ramp;
            ramp *= step;
        } else {
            // negative-frequency bins: restart the recurrence from -f_max
            if i == half + 1 {
                let f_neg = bin_freq(i, n, fs);
                ramp = Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * f_neg * delay);
            }
            *v *= ramp;
            ramp *= step;
        }
    }
    fft_inverse(&mut buf);
    ComplexEnvelope::from_parts(env.grid.clone(), buf)
}

fn split_amplitudes(g: &SceneGeometry) -> (f64, f64) {
    match g.reference_power_fraction {
        Some(f) => ((1.0 - f).sqrt(), f.sqrt()),
        None => (1.0, 1.0),
    }
}

// ---------------------------------------------------------------------------
// Echo / reference synthesis
// ---------------------------------------------------------------------------

/// Echo of one point target at slow time `t_m`, as a 45-degree linear field
/// `[s, s] / sqrt(2)`.
///
/// `s(t) = a * tx(t - (t_o - t_ref)) * exp(-j 2 pi f_c t_o)` with
/// `t_o = 2 R_i / c`: the envelope shift is reference-relative, the carrier
/// phase absolute. Returns an all-zero field when the beam does not
/// illuminate the target.
pub fn synthesize_echo(
    tx: &ComplexEnvelope,
    g: &SceneGeometry,
    target: &PointTarget,
    slow_time: f64,
) -> Result<JonesField> {
    g.validate()?;
    let r_i = slant_range(g, target, slow_time);
    let t_o = 2.0 * r_i / SPEED_OF_LIGHT;
    let t_ref = 2.0 * g.reference_range / SPEED_OF_LIGHT;
    let delay = t_o - t_ref;
    if delay.abs() >= tx.grid.duration() {
        return Err(Error::invalid(format!(
            "echo delay {delay} s exceeds the pulse grid ({} s); scene too deep for this grid",
            tx.grid.duration()
        )));
    }

    let n = tx.len();
    if !target_visible(g, target, slow_time) {
        let zeros = vec![Complex64::default(); n];
        return JonesField::new(tx.grid.clone(), zeros.clone(), zeros);
    }

    let (tx_amp, _) = split_amplitudes(g);
    let delayed = fractional_delay(tx, delay);
    let carrier = Complex64::from_polar(
        1.0,
        -2.0 * std::f64::consts::PI * g.carrier_freq() * t_o,
    );
    let scale = target.reflectivity * carrier * tx_amp * std::f64::consts::FRAC_1_SQRT_2;
    let comp: Vec<Complex64> = delayed.samples.iter().map(|s| s * scale).collect();
    JonesField::new(tx.grid.clone(), comp.clone(), comp)
}

/// Reference field `[w, 0]` with `w(t) = a * tx(t) * exp(-j 2 pi f_c t_ref)`
/// (zero envelope shift in reference-relative time).
pub fn synthesize_reference(tx: &ComplexEnvelope, g: &SceneGeometry) -> Result<JonesField> {
    g.validate()?;
    let t_ref = 2.0 * g.reference_range / SPEED_OF_LIGHT;
    let (_, ref_amp) = split_amplitudes(g);
    let carrier = Complex64::from_polar(
        1.0,
        -2.0 * std::f64::consts::PI * g.carrier_freq() * t_ref,
    );
    let scale = carrier * ref_amp;
    let h: Vec<Complex64> = tx.samples.iter().map(|s| s * scale).collect();
    let v = vec![Complex64::default(); tx.len()];
    JonesField::new(tx.grid.clone(), h, v)
}

/// Coherent multi-target echo for one pulse (sum of single-target echoes).
pub fn synthesize_scene_echo(
    tx: &ComplexEnvelope,
    g: &SceneGeometry,
    targets: &[PointTarget],
    slow_time: f64,
) -> Result<JonesField> {
    let n = tx.len();
    let mut acc = vec![Complex64::default(); n];
    for target in targets {
        let echo = synthesize_echo(tx, g, target, slow_time)?;
        for (a, h) in acc.iter_mut().zip(&echo.horizontal) {
            *a += h;
        }
    }
    JonesField::new(tx.grid.clone(), acc.clone(), acc)
}

/// Materialize echo + reference fields for every pulse in the aperture.
/// Pulses are independent; synthesis runs in parallel.
pub fn build_pulse_set(
    tx: &ComplexEnvelope,
    g: &SceneGeometry,
    targets: &[PointTarget],
) -> Result<PulseSet> {
    use rayon::prelude::*;
    g.validate()?;
    let slow_time = g.slow_time_axis();
    let reference = synthesize_reference(tx, g)?;
    let pulses: Vec<PulseFields> = slow_time
        .par_iter()
        .map(|&t_m| {
            let echo = synthesize_scene_echo(tx, g, targets, t_m)?;
            Ok(PulseFields {
                slow_time: t_m,
                echo,
                reference: reference.clone(),
            })
        })
        .collect::<Result<_>>()?;
    Ok(PulseSet { slow_time, pulses })
}

// ===========================================================================
// Tests
// ===========================================================================

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::{make_grid, spectrum};
    use std::f64::consts::PI;

    fn unit_target() -> PointTarget {
        PointTarget::new(0.0, 0.0, Complex64::new(1.0, 0.0))
    }

    #[test]
    fn table1_aperture_bookkeeping() {
        let g = SceneGeometry::default();
        assert!((g.footprint() - 1.0).abs() < 1e-12);
        assert!((g.aperture_time() - 0.02).abs() < 1e-12);
        assert_eq!(g.pulse_count(), 400);
        let tm = g.slow_time_axis();
        assert_eq!(tm.len(), 400);
        assert!((tm[1] - tm[0] - 1.0 / 20e3).abs() < 1e-15);
        assert!((tm[0] + tm[399]).abs() < 1e-12, "axis centered");
        // K_a = 2 v^2 / (lambda R) ~ 3.226e5 Hz/s
        assert!((g.azimuth_rate() - 3.2258e5).abs() / 3.2258e5 < 1e-3);
    }

    #[test]
    fn slant_range_closest_approach() {
        let g = SceneGeometry::default();
        let tgt = PointTarget::new(0.35, 0.12, Complex64::new(1.0, 0.0));
        let t_closest = tgt.azimuth_position / g.platform_speed;
        let r = slant_range(&g, &tgt, t_closest);
        assert!((r - (10e3 + 0.12)).abs() < 1e-9);
    }

    #[test]
    fn slant_range_migration_magnitude() {
        // R = 10 km, v = 50 m/s, t_m = 10 ms: sqrt(1e8 + 0.25) m
        let g = SceneGeometry::default();
        let r = slant_range(&g, &unit_target(), 0.01);
        assert!((r - (1e8f64 + 0.25).sqrt()).abs() < 1e-9);
        assert!((r - 10e3 - 1.25e-5).abs() < 1e-9, "RCM ~ 1.25e-5 m");
    }

    #[test]
    fn slant_range_symmetric() {
        let g = SceneGeometry::default();
        for tm in [1e-3, 5e-3, 9e-3] {
            let a = slant_range(&g, &unit_target(), tm);
            let b = slant_range(&g, &unit_target(), -tm);
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_delay_echo_is_scaled_tx() {
        // R_ref = R and a target at the scene center: t_o == t_ref, so the
        // echo is tx at 45 degrees with only the carrier rotation.
        let grid = make_grid(1e8, 10e-6, true).unwrap();
        let tx = ComplexEnvelope::from_fn(grid, |t| Complex64::from_polar(1.0, 2.0 * PI * 1e6 * t));
        let g = SceneGeometry::default();
        let echo = synthesize_echo(&tx, &g, &unit_target(), 0.0).unwrap();
        let t_o = 2.0 * 10e3 / SPEED_OF_LIGHT;
        let expect_phase = -2.0 * PI * g.carrier_freq() * t_o;
        let rot = Complex64::from_polar(std::f64::consts::FRAC_1_SQRT_2, expect_phase);
        for (s, e) in tx.samples.iter().zip(&echo.horizontal) {
            assert!((s * rot - e).norm() < 1e-9);
        }
        for (h, v) in echo.horizontal.iter().zip(&echo.vertical) {
            assert!((h - v).norm() < 1e-15, "45-degree launch");
        }
    }

    #[test]
    fn integer_sample_delay_shifts_exactly() {
        let grid = make_grid(1e8, 10e-6, true).unwrap();
        let tx = ComplexEnvelope::from_fn(grid.clone(), |t| {
            Complex64::from_polar(1.0, 2.0 * PI * (3e6 * t + 0.5 * 4e11 * t * t))
        });
        let delay = 25.0 * grid.dt();
        let out = fractional_delay(&tx, delay);
        let n = tx.len();
        for i in 25..n {
            assert!(
                (out.samples[i] - tx.samples[i - 25]).norm() < 1e-9,
                "sample {i}"
            );
        }
    }

    #[test]
    fn carrier_phase_closed_form() {
        // 5 ns of extra delay rotates the carrier by -2 pi f_c t_o.
        let grid = make_grid(1e8, 10e-6, true).unwrap();
        let tx = ComplexEnvelope::constant(grid, Complex64::new(1.0, 0.0));
        let g = SceneGeometry::default();
        let extra = 5e-9 * SPEED_OF_LIGHT / 2.0; // range offset for 5 ns
        let tgt = PointTarget::new(0.0, extra, Complex64::new(1.0, 0.0));
        let echo = synthesize_echo(&tx, &g, &tgt, 0.0).unwrap();
        let r_i = slant_range(&g, &tgt, 0.0);
        let t_o = 2.0 * r_i / SPEED_OF_LIGHT;
        let expect = Complex64::from_polar(
            std::f64::consts::FRAC_1_SQRT_2,
            -2.0 * PI * g.carrier_freq() * t_o,
        );
        let mid = echo.horizontal[tx.len() / 2];
        assert!(
            (mid - expect).norm() < 1e-9,
            "carrier rotation {mid} vs {expect}"
        );
    }

    #[test]
    fn reference_matches_tx_horizontal() {
        let grid = make_grid(1e8, 10e-6, true).unwrap();
        let tx = ComplexEnvelope::from_fn(grid, |t| Complex64::from_polar(1.0, 2.0 * PI * 2e6 * t));
        let g = SceneGeometry {
            reference_range: 0.0,
            ..Default::default()
        };
        let refer = synthesize_reference(&tx, &g).unwrap();
        for (s, w) in tx.samples.iter().zip(&refer.horizontal) {
            assert!((s - w).norm() < 1e-12);
        }
        assert!(refer.vertical.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn splitter_power_fractions() {
        let grid = make_grid(1e8, 10e-6, true).unwrap();
        let tx = ComplexEnvelope::constant(grid, Complex64::new(1.0, 0.0));
        let g = SceneGeometry {
            reference_power_fraction: Some(0.01),
            ..Default::default()
        };
        let refer = synthesize_reference(&tx, &g).unwrap();
        let ref_power = refer.energy() / tx.grid.duration();
        assert!((ref_power - 0.01).abs() < 1e-12, "1% reference tap");
        let echo = synthesize_echo(&tx, &g, &unit_target(), 0.0).unwrap();
        let echo_power = echo.energy() / tx.grid.duration();
        assert!((echo_power - 0.99).abs() < 1e-9, "99% transmit side");
    }

    #[test]
    fn delay_composition() {
        let grid = make_grid(1e8, 10e-6, true).unwrap();
        let tx = ComplexEnvelope::from_fn(grid, |t| {
            Complex64::from_polar(1.0, 2.0 * PI * (1e6 * t + 2e11 * t * t))
        });
        let d1 = 3.7e-9;
        let d2 = 1.9e-9;
        let a = fractional_delay(&fractional_delay(&tx, d1), d2);
        let b = fractional_delay(&tx, d1 + d2);
        let max_err = a
            .samples
            .iter()
            .zip(&b.samples)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max);
        assert!(max_err < 1e-9, "composition error {max_err}");
    }

    #[test]
    fn echo_rejects_excessive_delay() {
        let grid = make_grid(1e8, 1e-6, true).unwrap();
        let tx = ComplexEnvelope::constant(grid, Complex64::new(1.0, 0.0));
        let g = SceneGeometry {
            reference_range: 0.0, // full 67 us round trip on a 1 us grid
            ..Default::default()
        };
        assert!(synthesize_echo(&tx, &g, &unit_target(), 0.0).is_err());
    }

    #[test]
    fn scene_echo_is_linear_superposition() {
        let grid = make_grid(1e8, 10e-6, true).unwrap();
        let tx = ComplexEnvelope::from_fn(grid, |t| Complex64::from_polar(1.0, 2.0 * PI * 5e6 * t));
        let g = SceneGeometry::default();
        let t1 = PointTarget::new(0.0, 0.1, Complex64::new(1.0, 0.0));
        let t2 = PointTarget::new(0.05, -0.2, Complex64::new(0.0, 0.7));
        let both = synthesize_scene_echo(&tx, &g, &[t1.clone(), t2.clone()], 1e-3).unwrap();
        let a = synthesize_echo(&tx, &g, &t1, 1e-3).unwrap();
        let b = synthesize_echo(&tx, &g, &t2, 1e-3).unwrap();
        for i in 0..tx.len() {
            let sum = a.horizontal[i] + b.horizontal[i];
            assert!((both.horizontal[i] - sum).norm() < 1e-12);
        }
    }

    #[test]
    fn beam_visibility_window() {
        let g = SceneGeometry::default(); // footprint 1 m
        let tgt = PointTarget::new(0.02, 0.0, Complex64::new(1.0, 0.0));
        assert!(target_visible(&g, &tgt, 0.0));
        // |v t - 0.02| > 0.5 -> t > 0.0104
        assert!(!target_visible(&g, &tgt, 0.0112));
        assert!(target_visible(&g, &tgt, 0.0104 - 1e-6));
    }

    #[test]
    fn dechirp_beat_frequency_oracle() {
        // Full receiver chain: a target at R_delta away from the reference
        // range beats at 2 gamma R_delta / c.
        use crate::eom::{awg_drive_phase, phase_modulate, select_order, ChirpDriveParams};
        use crate::jones::{balanced_detect, propagate, BenchParams};
        use crate::laser::PhaseTrack;

        // f0 = 3B keeps orders 1 and 3 clear of the selected band
        let p = ChirpDriveParams {
            chirp_rate: 1e12, // B = 50 MHz at Tp = 50 us
            offset_freq: 150e6,
            ..Default::default()
        };
        let fs = 2e9;
        let grid = make_grid(fs, p.pulse_duration, true).unwrap();
        let drive = awg_drive_phase(&p, &grid).unwrap();
        let laser = PhaseTrack::zero(grid.clone());
        let modulated = phase_modulate(&drive, &laser, 1.0).unwrap();
        let tx = select_order(&modulated, &p).unwrap();
        let gamma = p.optical_chirp_rate();

        let g = SceneGeometry::default();
        let bench = BenchParams::default();
        let mut state = 0xC0FFEEu64;
        let mut rnd = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        for _ in 0..20 {
            let r_delta = rnd() * 40.0; // +/- 20 m
            let tgt = PointTarget::new(0.0, r_delta, Complex64::new(1.0, 0.0));
            let echo = synthesize_echo(&tx, &g, &tgt, 0.0).unwrap();
            let refer = synthesize_reference(&tx, &g).unwrap();
            let paths = propagate(&echo, &refer, &bench).unwrap();
            let iq = balanced_detect(&paths).unwrap();
            let beat = ComplexEnvelope::from_parts(
                iq.grid.clone(),
                iq.i_samples
                    .iter()
                    .zip(&iq.q_samples)
                    .map(|(&i, &q)| Complex64::new(i, q))
                    .collect(),
            );
            let spec = spectrum(&beat).unwrap();
            let (imax, _) = spec
                .values
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.norm_sqr().total_cmp(&b.1.norm_sqr()))
                .unwrap();
            let expect = 2.0 * gamma * (slant_range(&g, &tgt, 0.0) - g.reference_range)
                / SPEED_OF_LIGHT;
            let err_bins = (spec.freqs[imax] - expect).abs() / spec.resolution_bw;
            assert!(
                err_bins <= 0.5,
                "R_delta {r_delta}: beat {} vs {expect}, {err_bins} bins",
                spec.freqs[imax]
            );
        }
    }
}
