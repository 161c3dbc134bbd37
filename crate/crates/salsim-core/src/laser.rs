//! Non-ideal laser phase synthesis.
//!
//! The laser's departure from a single-frequency carrier is modeled as a
//! phase track with three terms: a deterministic sinusoidal frequency
//! jitter, a Gaussian random-frequency walk and white Gaussian phase noise.
//! The random terms are drawn per sample from a counter-based generator, so
//! a given seed reproduces the track bit for bit.
//!
//! Both random terms are sample-rate dependent by construction (the walk
//! integrates i.i.d. draws with the grid's dt, the phase term is white at
//! the grid rate); no correlation time is imposed.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::signal::{ComplexEnvelope, TimeGrid};

/// Laser noise description. All-zero noise parameters give the ideal
/// single-frequency laser.
#[derive(Debug, Clone, PartialEq)]
pub struct LaserParams {
    /// Optical center frequency, Hz. Informational in the baseband
    /// representation; the carrier phase of delayed fields is applied
    /// analytically by the scene model.
    pub center_freq: f64,
    /// Amplitude of the sinusoidal frequency jitter, Hz.
    pub jitter_amplitude: f64,
    /// Frequency of the sinusoidal jitter, Hz.
    pub jitter_freq: f64,
    /// Std dev of the Gaussian random frequency drawn per sample, Hz.
    pub sigma_freq_walk: f64,
    /// Std dev of the white Gaussian phase, rad.
    pub sigma_phase: f64,
    /// RNG seed; identical seeds reproduce identical tracks.
    pub seed: u64,
}

impl Default for LaserParams {
    fn default() -> Self {
        LaserParams {
            center_freq: crate::consts::SPEED_OF_LIGHT / 1550e-9,
            jitter_amplitude: 0.0,
            jitter_freq: 0.0,
            sigma_freq_walk: 0.0,
            sigma_phase: 0.0,
            seed: 0,
        }
    }
}

impl LaserParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("jitter_amplitude", self.jitter_amplitude),
            ("jitter_freq", self.jitter_freq),
            ("sigma_freq_walk", self.sigma_freq_walk),
            ("sigma_phase", self.sigma_phase),
        ] {
            if v < 0.0 || !v.is_finite() {
                return Err(Error::invalid(format!("laser {name} must be >= 0, got {v}")));
            }
        }
        if !(self.center_freq > 0.0) {
            return Err(Error::invalid("laser center_freq must be positive"));
        }
        Ok(())
    }
}

/// Sampled phase offset from the ideal carrier, radians.
#[derive(Debug, Clone)]
pub struct PhaseTrack {
    pub grid: TimeGrid,
    pub phase: Vec<f64>,
}

impl PhaseTrack {
    pub fn new(grid: TimeGrid, phase: Vec<f64>) -> Result<Self> {
        if phase.len() != grid.num_samples {
            return Err(Error::invalid(format!(
                "phase length {} does not match grid length {}",
                phase.len(),
                grid.num_samples
            )));
        }
        if !phase.iter().all(|p| p.is_finite()) {
            return Err(Error::invalid("phase track contains non-finite values"));
        }
        Ok(PhaseTrack { grid, phase })
    }

    pub fn zero(grid: TimeGrid) -> Self {
        let phase = vec![0.0; grid.num_samples];
        PhaseTrack { grid, phase }
    }
}

/// Synthesize the laser phase track on `grid`.
///
/// The jitter term uses the closed-form integral
/// `(A/f_a) * (1 - cos(2 pi f_a t))` (zero-phase at t = 0); the random
/// frequency is integrated by cumulative sum; the random phase is added
/// per sample.
pub fn synthesize_phase(params: &LaserParams, grid: &TimeGrid) -> Result<PhaseTrack> {
    params.validate()?;
    let n = grid.num_samples;
    let mut phase = vec![0.0; n];

    // sin(2 pi f_a t) integrates to zero when f_a == 0, so that case is a no-op
    if params.jitter_amplitude > 0.0 && params.jitter_freq > 0.0 {
        let ratio = params.jitter_amplitude / params.jitter_freq;
        for (p, t) in phase.iter_mut().zip(grid.times()) {
            *p += ratio * (1.0 - (2.0 * std::f64::consts::PI * params.jitter_freq * t).cos());
        }
    }

    let mut rng = ChaCha12Rng::seed_from_u64(params.seed);
    if params.sigma_freq_walk > 0.0 {
        let dt = grid.dt();
        let mut acc = 0.0;
        for p in phase.iter_mut() {
            let draw: f64 = StandardNormal.sample(&mut rng);
            acc += params.sigma_freq_walk * draw * dt;
            *p += 2.0 * std::f64::consts::PI * acc;
        }
    }
    if params.sigma_phase > 0.0 {
        for p in phase.iter_mut() {
            let draw: f64 = StandardNormal.sample(&mut rng);
            *p += params.sigma_phase * draw;
        }
    }

    Ok(PhaseTrack {
        grid: grid.clone(),
        phase,
    })
}

/// Multiply an envelope by `exp(j * phase)`.
pub fn apply_phase(env: &ComplexEnvelope, track: &PhaseTrack) -> Result<ComplexEnvelope> {
    env.grid.ensure_matches(&track.grid, "apply_phase")?;
    let samples = env
        .samples
        .iter()
        .zip(&track.phase)
        .map(|(s, &p)| s * Complex64::from_polar(1.0, p))
        .collect();
    Ok(ComplexEnvelope::from_parts(env.grid.clone(), samples))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::make_grid;

    #[test]
    fn ideal_laser_has_zero_phase() {
        let g = make_grid(1e6, 1e-3, true).unwrap();
        let track = synthesize_phase(&LaserParams::default(), &g).unwrap();
        assert!(track.phase.iter().all(|&p| p == 0.0));
    }

    #[test]
    fn jitter_closed_form() {
        // A = f_a = 1 kHz: phase(t) = (A/f_a)(1 - cos(2 pi f_a t)),
        // maximum 2.0 rad at t = 1/(2 f_a).
        let g = make_grid(1e6, 1e-3, false).unwrap();
        let params = LaserParams {
            jitter_amplitude: 1e3,
            jitter_freq: 1e3,
            ..Default::default()
        };
        let track = synthesize_phase(&params, &g).unwrap();
        let i_half = (0.5e-3 * 1e6) as usize; // t = 1/(2 f_a)
        assert!(
            (track.phase[i_half] - 2.0).abs() < 1e-9,
            "phase at half period {}",
            track.phase[i_half]
        );
        for (p, t) in track.phase.iter().zip(g.times()) {
            let expect = 1.0 - (2.0 * std::f64::consts::PI * 1e3 * t).cos();
            assert!((p - expect).abs() < 1e-9);
        }
    }

    #[test]
    fn white_phase_statistics() {
        // 1e6 samples of sigma = 0.1 rad white phase: sample std within
        // 0.1 +/- 5e-3.
        let g = make_grid(1e9, 1e-3, true).unwrap();
        let params = LaserParams {
            sigma_phase: 0.1,
            seed: 7,
            ..Default::default()
        };
        let track = synthesize_phase(&params, &g).unwrap();
        let n = track.phase.len() as f64;
        let mean = track.phase.iter().sum::<f64>() / n;
        let var = track.phase.iter().map(|p| (p - mean).powi(2)).sum::<f64>() / n;
        let std = var.sqrt();
        assert!((std - 0.1).abs() < 5e-3, "std {std}");
    }

    #[test]
    fn walk_variance_grows() {
        let g = make_grid(1e6, 1e-2, false).unwrap();
        let params = LaserParams {
            sigma_freq_walk: 1e3,
            seed: 3,
            ..Default::default()
        };
        let track = synthesize_phase(&params, &g).unwrap();
        let n = track.phase.len();
        let early: f64 = track.phase[..n / 10].iter().map(|p| p * p).sum::<f64>() / (n / 10) as f64;
        let late: f64 =
            track.phase[9 * n / 10..].iter().map(|p| p * p).sum::<f64>() / (n - 9 * n / 10) as f64;
        assert!(late > early, "walk should spread over time: {early} vs {late}");
    }

    #[test]
    fn determinism_by_seed() {
        let g = make_grid(1e6, 1e-4, true).unwrap();
        let params = LaserParams {
            jitter_amplitude: 10.0,
            jitter_freq: 1e4,
            sigma_freq_walk: 100.0,
            sigma_phase: 0.05,
            seed: 42,
            ..Default::default()
        };
        let a = synthesize_phase(&params, &g).unwrap();
        let b = synthesize_phase(&params, &g).unwrap();
        assert_eq!(a.phase, b.phase, "same seed must be bit-identical");
        let c = synthesize_phase(
            &LaserParams {
                seed: 43,
                ..params
            },
            &g,
        )
        .unwrap();
        assert_ne!(a.phase, c.phase);
    }

    #[test]
    fn apply_phase_identity_and_flip() {
        let g = make_grid(1e6, 1e-4, true).unwrap();
        let env = ComplexEnvelope::constant(g.clone(), Complex64::new(0.7, 0.2));
        let zero = PhaseTrack::zero(g.clone());
        let out = apply_phase(&env, &zero).unwrap();
        assert!(out
            .samples
            .iter()
            .zip(&env.samples)
            .all(|(a, b)| (a - b).norm() < 1e-15));

        let pi_track =
            PhaseTrack::new(g.clone(), vec![std::f64::consts::PI; g.num_samples]).unwrap();
        let flipped = apply_phase(&env, &pi_track).unwrap();
        assert!(flipped
            .samples
            .iter()
            .zip(&env.samples)
            .all(|(a, b)| (a + b).norm() < 1e-12));
    }

    #[test]
    fn apply_phase_preserves_magnitude() {
        let g = make_grid(1e6, 1e-4, true).unwrap();
        let env = ComplexEnvelope::from_fn(g.clone(), |t| Complex64::new(t * 1e4, 0.3));
        let params = LaserParams {
            sigma_phase: 1.0,
            seed: 5,
            ..Default::default()
        };
        let track = synthesize_phase(&params, &g).unwrap();
        let out = apply_phase(&env, &track).unwrap();
        for (a, b) in env.samples.iter().zip(&out.samples) {
            assert!((a.norm() - b.norm()).abs() < 1e-12);
        }
    }

    #[test]
    fn apply_phase_rejects_grid_mismatch() {
        let g1 = make_grid(1e6, 1e-4, true).unwrap();
        let g2 = make_grid(1e6, 2e-4, true).unwrap();
        let env = ComplexEnvelope::constant(g1, Complex64::new(1.0, 0.0));
        let track = PhaseTrack::zero(g2);
        assert!(matches!(
            apply_phase(&env, &track),
            Err(Error::GridMismatch(_))
        ));
    }
}
