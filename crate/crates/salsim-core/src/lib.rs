//! Desk-scale simulator of an electro-optic-modulator synthetic aperture lidar.
//!
//! The simulation chain mirrors the optical bench end to end:
//!
//! 1. [`laser`] — continuous-wave laser with sinusoidal frequency jitter,
//!    Gaussian random frequency and Gaussian random phase,
//! 2. [`eom`] — arbitrary-waveform chirp drive, electro-optic phase
//!    modulation, sideband decomposition, optical filtering of one
//!    modulation order and EDFA gain,
//! 3. [`scene`] — strip-map side-looking geometry, point-target slant-range
//!    histories and delayed echo / reference fields,
//! 4. [`jones`] — the free-space polarization receiver (polarizing beam
//!    splitters, wave plates, balanced detectors) producing I/Q streams,
//! 5. [`imaging`] — dechirp beat assembly, residual-video-phase removal,
//!    range compression, range cell migration correction and azimuth
//!    matched filtering into a focused two-dimensional image.
//!
//! [`signal`] provides the sampled-signal substrate shared by all stages,
//! [`config`] and [`run`] drive reproducible, config-described experiments,
//! and [`run::emit_ledger`] prints the machine-checked list of quantitative
//! discrepancies the simulator found while auditing its design sources.
//!
//! All optical fields are complex baseband envelopes relative to the laser
//! carrier; the real passband signal is represented by its analytic signal.
//! Every operation is a pure function of its inputs, so callers may map the
//! chain over independent pulses in parallel.

pub mod config;
pub mod consts;
pub mod eom;
pub mod error;
pub mod imaging;
pub mod jones;
pub mod laser;
pub mod run;
pub mod scene;
pub mod signal;

pub use error::{Error, Result};
