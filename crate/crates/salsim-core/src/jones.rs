//! Free-space polarization I/Q dechirp receiver in Jones calculus.
//!
//! The bench mixes a 45-degree linearly polarized echo with a horizontally
//! polarized reference that first passes a quarter-wave plate. The first
//! polarizing beam splitter produces two mixed branches, each branch passes
//! a half-wave plate and is split again; the four resulting paths feed two
//! balanced detectors whose difference currents are the I and Q channels.
//!
//! Two amplitude conventions are available:
//!
//! * [`BenchNormalization::EnergyConserving`] (default) treats every
//!   lossless element as unitary: the quarter-wave plate carries a
//!   `1/sqrt(2)` normalization and the projective beam-splitter pair is
//!   port-normalized so the four path powers sum to the input power.
//! * [`BenchNormalization::PaperRaw`] keeps the raw matrix algebra of the
//!   design source (unnormalized quarter-wave plate, `sqrt(2)/2` splitter
//!   amplitudes). It reproduces the closed-form path amplitudes
//!   `sqrt(2)/4 * |s + w e^{j delta}|` exactly, at the cost of a uniform
//!   (delay-independent) power loss. The two modes differ only by real
//!   scale factors, never in phase, so every beat observable downstream is
//!   identical.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::signal::TimeGrid;

// ---------------------------------------------------------------------------
// Types
// ---------------------------------------------------------------------------

/// 2x2 complex field transfer operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JonesMatrix {
    /// Row-major entries `[[hh, hv], [vh, vv]]`.
    pub m: [[Complex64; 2]; 2],
}

impl JonesMatrix {
    pub fn new(hh: Complex64, hv: Complex64, vh: Complex64, vv: Complex64) -> Self {
        JonesMatrix {
            m: [[hh, hv], [vh, vv]],
        }
    }

    pub fn identity() -> Self {
        JonesMatrix::new(
            Complex64::new(1.0, 0.0),
            Complex64::default(),
            Complex64::default(),
            Complex64::new(1.0, 0.0),
        )
    }

    /// Matrix product `self * rhs` (apply `rhs` first).
    pub fn mul(&self, rhs: &JonesMatrix) -> JonesMatrix {
        let a = &self.m;
        let b = &rhs.m;
        JonesMatrix {
            m: [
                [
                    a[0][0] * b[0][0] + a[0][1] * b[1][0],
                    a[0][0] * b[0][1] + a[0][1] * b[1][1],
                ],
                [
                    a[1][0] * b[0][0] + a[1][1] * b[1][0],
                    a[1][0] * b[0][1] + a[1][1] * b[1][1],
                ],
            ],
        }
    }

    pub fn scale(&self, s: f64) -> JonesMatrix {
        let mut out = *self;
        for row in out.m.iter_mut() {
            for v in row.iter_mut() {
                *v *= s;
            }
        }
        out
    }

    /// Apply to a single (h, v) field sample.
    #[inline]
    pub fn apply(&self, h: Complex64, v: Complex64) -> (Complex64, Complex64) {
        (
            self.m[0][0] * h + self.m[0][1] * v,
            self.m[1][0] * h + self.m[1][1] * v,
        )
    }

    /// Max deviation of `M^dagger M` from the identity.
    pub fn unitarity_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                let mut acc = Complex64::default();
                for k in 0..2 {
                    acc += self.m[k][i].conj() * self.m[k][j];
                }
                let target = if i == j {
                    Complex64::new(1.0, 0.0)
                } else {
                    Complex64::default()
                };
                worst = worst.max((acc - target).norm());
            }
        }
        worst
    }
}

/// Two-component complex polarization field on a time grid.
#[derive(Debug, Clone)]
pub struct JonesField {
    pub grid: TimeGrid,
    pub horizontal: Vec<Complex64>,
    pub vertical: Vec<Complex64>,
}

impl JonesField {
    pub fn new(grid: TimeGrid, horizontal: Vec<Complex64>, vertical: Vec<Complex64>) -> Result<Self> {
        if horizontal.len() != grid.num_samples || vertical.len() != grid.num_samples {
            return Err(Error::invalid(
                "polarization components must match the grid length",
            ));
        }
        Ok(JonesField {
            grid,
            horizontal,
            vertical,
        })
    }

    /// `sum(|H|^2 + |V|^2) * dt`.
    pub fn energy(&self) -> f64 {
        let p: f64 = self
            .horizontal
            .iter()
            .zip(&self.vertical)
            .map(|(h, v)| h.norm_sqr() + v.norm_sqr())
            .sum();
        p * self.grid.dt()
    }

    /// Apply a constant Jones matrix samplewise.
    pub fn transformed(&self, m: &JonesMatrix) -> JonesField {
        let mut h = Vec::with_capacity(self.horizontal.len());
        let mut v = Vec::with_capacity(self.vertical.len());
        for (a, b) in self.horizontal.iter().zip(&self.vertical) {
            let (nh, nv) = m.apply(*a, *b);
            h.push(nh);
            v.push(nv);
        }
        JonesField {
            grid: self.grid.clone(),
            horizontal: h,
            vertical: v,
        }
    }
}

/// Amplitude bookkeeping convention, see module docs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BenchNormalization {
    #[default]
    EnergyConserving,
    PaperRaw,
}

/// Receiver bench settings.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchParams {
    /// PBS transmit amplitude t (default `sqrt(2)/2 * (1 - sigma)`).
    pub transmit_amplitude: f64,
    /// PBS reflect amplitude r (same default).
    pub reflect_amplitude: f64,
    /// PBS power loss factor.
    pub sigma: f64,
    /// Transmit phase, default pi.
    pub phi_t: f64,
    /// Reflect phase, default pi.
    pub phi_r: f64,
    /// Quarter-wave plate angle, default pi/4 (circular reference).
    pub qwp_angle: f64,
    /// Half-wave plate angles; pi/8 realizes the printed matrix values.
    pub hwp_angle_1: f64,
    pub hwp_angle_2: f64,
    pub normalization: BenchNormalization,
}

impl Default for BenchParams {
    fn default() -> Self {
        BenchParams::with_sigma(0.0)
    }
}

impl BenchParams {
    /// Defaults with a given splitter loss: `t = r = sqrt(2)/2 * (1 - sigma)`.
    pub fn with_sigma(sigma: f64) -> Self {
        let amp = std::f64::consts::FRAC_1_SQRT_2 * (1.0 - sigma);
        BenchParams {
            transmit_amplitude: amp,
            reflect_amplitude: amp,
            sigma,
            phi_t: std::f64::consts::PI,
            phi_r: std::f64::consts::PI,
            qwp_angle: std::f64::consts::FRAC_PI_4,
            hwp_angle_1: std::f64::consts::PI / 8.0,
            hwp_angle_2: std::f64::consts::PI / 8.0,
            normalization: BenchNormalization::EnergyConserving,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.sigma) {
            return Err(Error::invalid("sigma must be in [0, 1)"));
        }
        for (name, v) in [
            ("transmit_amplitude", self.transmit_amplitude),
            ("reflect_amplitude", self.reflect_amplitude),
        ] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(Error::invalid(format!("{name} must be in (0, 1], got {v}")));
            }
        }
        Ok(())
    }
}

/// Both detector difference currents on a shared grid.
#[derive(Debug, Clone)]
pub struct IQStream {
    pub grid: TimeGrid,
    pub i_samples: Vec<f64>,
    pub q_samples: Vec<f64>,
}

// ---------------------------------------------------------------------------
// Elements
// ---------------------------------------------------------------------------

/// PBS transmit/reflect pair built from the bench parameters.
///
/// Transmit passes only the horizontal component with `t e^{j phi_t}`,
/// reflect passes only the vertical with `r e^{j phi_r}`; all three PBS
/// instances on the bench share the pair.
pub fn pbs_matrices(p: &BenchParams) -> (JonesMatrix, JonesMatrix) {
    let zero = Complex64::default();
    let t = Complex64::from_polar(p.transmit_amplitude, p.phi_t);
    let r = Complex64::from_polar(p.reflect_amplitude, p.phi_r);
    (
        JonesMatrix::new(t, zero, zero, zero),
        JonesMatrix::new(zero, zero, zero, r),
    )
}

/// Quarter-wave plate at angle `eta`, normalized by `1/sqrt(2)` so it is
/// unitary.
pub fn qwp(eta: f64) -> JonesMatrix {
    qwp_paper_raw(eta).scale(std::f64::consts::FRAC_1_SQRT_2)
}

/// Quarter-wave plate exactly as the raw algebra writes it (not unitary;
/// used by the PaperRaw audit mode).
pub fn qwp_paper_raw(eta: f64) -> JonesMatrix {
    let j = Complex64::new(0.0, 1.0);
    let c = (2.0 * eta).cos();
    let s = (2.0 * eta).sin();
    JonesMatrix::new(
        Complex64::new(1.0, 0.0) - j * c,
        -j * s,
        -j * s,
        Complex64::new(1.0, 0.0) + j * c,
    )
}

/// Half-wave plate at angle `theta`:
/// `[[cos 2theta, sin 2theta], [sin 2theta, -cos 2theta]]`.
pub fn hwp(theta: f64) -> JonesMatrix {
    let c = Complex64::new((2.0 * theta).cos(), 0.0);
    let s = Complex64::new((2.0 * theta).sin(), 0.0);
    JonesMatrix::new(c, s, s, -c)
}

// ---------------------------------------------------------------------------
// Propagation
// ---------------------------------------------------------------------------

/// Constant per-path operators: `l_k = sig[k] . S + refm[k] . W`.
struct PathOperators {
    sig: [JonesMatrix; 4],
    refm: [JonesMatrix; 4],
}

fn path_operators(p: &BenchParams) -> PathOperators {
    let (t, r) = pbs_matrices(p);
    let h1 = hwp(p.hwp_angle_1);
    let h2 = hwp(p.hwp_angle_2);
    let (q, pbs_scale) = match p.normalization {
        // each PBS crossing is port-normalized by sqrt(2); two crossings
        BenchNormalization::EnergyConserving => (qwp(p.qwp_angle), 2.0),
        BenchNormalization::PaperRaw => (qwp_paper_raw(p.qwp_angle), 1.0),
    };
    // branch A = H1 (T1 QW + R1 S) splits into l1 (reflect) / l2 (transmit);
    // branch B = H2 (R1 QW + T1 S) splits into l3 (transmit) / l4 (reflect)
    let tq = t.mul(&q);
    let rq = r.mul(&q);
    let sig = [
        r.mul(&h1).mul(&r).scale(pbs_scale),
        t.mul(&h1).mul(&r).scale(pbs_scale),
        t.mul(&h2).mul(&t).scale(pbs_scale),
        r.mul(&h2).mul(&t).scale(pbs_scale),
    ];
    let refm = [
        r.mul(&h1).mul(&tq).scale(pbs_scale),
        t.mul(&h1).mul(&tq).scale(pbs_scale),
        t.mul(&h2).mul(&rq).scale(pbs_scale),
        r.mul(&h2).mul(&rq).scale(pbs_scale),
    ];
    PathOperators { sig, refm }
}

fn check_polarization(signal: &JonesField, reference: &JonesField) -> Result<()> {
    let mut max_amp: f64 = 0.0;
    let mut max_sig_dev: f64 = 0.0;
    let mut max_ref_dev: f64 = 0.0;
    for ((sh, sv), (wh, wv)) in signal
        .horizontal
        .iter()
        .zip(&signal.vertical)
        .zip(reference.horizontal.iter().zip(&reference.vertical))
    {
        max_amp = max_amp
            .max(sh.norm())
            .max(sv.norm())
            .max(wh.norm())
            .max(wv.norm());
        max_sig_dev = max_sig_dev.max((sh - sv).norm());
        max_ref_dev = max_ref_dev.max(wv.norm());
    }
    let tol = 1e-9 * max_amp.max(1e-300);
    if max_sig_dev > tol {
        return Err(Error::Polarization(format!(
            "signal must be 45-degree linear ([s, s]); components differ by {max_sig_dev:.3e}"
        )));
    }
    if max_ref_dev > tol {
        return Err(Error::Polarization(format!(
            "reference must be horizontal ([w, 0]); vertical magnitude {max_ref_dev:.3e}"
        )));
    }
    Ok(())
}

/// Propagate the echo and reference through the four bench paths.
///
/// Preconditions: the signal is 45-degree linear (`[s, s]`), the reference
/// horizontal (`[w, 0]`); the closed-form detector pairing downstream is
/// derived only for these launch states.
pub fn propagate(
    signal: &JonesField,
    reference: &JonesField,
    p: &BenchParams,
) -> Result<[JonesField; 4]> {
    p.validate()?;
    signal.grid.ensure_matches(&reference.grid, "propagate")?;
    check_polarization(signal, reference)?;

    let ops = path_operators(p);
    let n = signal.grid.num_samples;
    let mut paths: [JonesField; 4] = std::array::from_fn(|_| JonesField {
        grid: signal.grid.clone(),
        horizontal: Vec::with_capacity(n),
        vertical: Vec::with_capacity(n),
    });
    for k in 0..4 {
        let ms = &ops.sig[k];
        let mw = &ops.refm[k];
        let (h, v): (Vec<_>, Vec<_>) = signal
            .horizontal
            .iter()
            .zip(&signal.vertical)
            .zip(reference.horizontal.iter().zip(&reference.vertical))
            .map(|((sh, sv), (wh, wv))| {
                let (ah, av) = ms.apply(*sh, *sv);
                let (bh, bv) = mw.apply(*wh, *wv);
                (ah + bh, av + bv)
            })
            .unzip();
        paths[k].horizontal = h;
        paths[k].vertical = v;
    }
    Ok(paths)
}

/// Balanced detection: `I = |l2|^2 - |l1|^2`, `Q = |l3|^2 - |l4|^2`.
///
/// The pi-shifted pairs cancel the self-beat terms exactly, leaving the
/// signal-reference cross term; the pairing and signs are chosen so a
/// zero-delay beat gives `I > 0, Q = 0` and `I + jQ` spins positively for a
/// target beyond the reference range.
pub fn balanced_detect(paths: &[JonesField; 4]) -> Result<IQStream> {
    let grid = paths[0].grid.clone();
    for p in &paths[1..] {
        grid.ensure_matches(&p.grid, "balanced_detect")?;
    }
    let power = |f: &JonesField, i: usize| f.horizontal[i].norm_sqr() + f.vertical[i].norm_sqr();
    let n = grid.num_samples;
    let mut i_samples = Vec::with_capacity(n);
    let mut q_samples = Vec::with_capacity(n);
    for idx in 0..n {
        i_samples.push(power(&paths[1], idx) - power(&paths[0], idx));
        q_samples.push(power(&paths[2], idx) - power(&paths[3], idx));
    }
    Ok(IQStream {
        grid,
        i_samples,
        q_samples,
    })
}

// ===========================================================================
// Tests
// ===========================================================================
