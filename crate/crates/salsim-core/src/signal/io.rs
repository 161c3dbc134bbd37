//! Envelope/spectrum dump formats.
//!
//! CSV: header `t_or_f,re,im`, one row per sample. Binary: little-endian
//! float64 interleaved re/im. Every dump gets a JSON sidecar manifest at
//! `<path>.json` recording the grid and the producing configuration.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use super::{ComplexEnvelope, Spectrum};
use crate::error::Result;

/// Sidecar manifest written next to each dump.
#[derive(Debug, Clone, Serialize)]
pub struct DumpManifest {
    pub sample_rate: f64,
    pub t_start: f64,
    pub units: String,
    /// Human-readable tag of the producing configuration (tool version,
    /// preset name, config hash).
    pub config_describe: String,
}

fn write_sidecar(path: &Path, manifest: &DumpManifest) -> Result<()> {
    let sidecar = path.with_extension(format!(
        "{}.json",
        path.extension().and_then(|e| e.to_str()).unwrap_or("dat")
    ));
    let f = File::create(sidecar)?;
    serde_json::to_writer_pretty(BufWriter::new(f), manifest)
        .map_err(|e| crate::Error::invalid(format!("manifest serialization: {e}")))?;
    Ok(())
}

pub fn write_envelope_csv(path: &Path, env: &ComplexEnvelope, manifest: &DumpManifest) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "t_or_f,re,im")?;
    for (t, s) in env.grid.times().zip(&env.samples) {
        writeln!(w, "{t:.12e},{:.12e},{:.12e}", s.re, s.im)?;
    }
    w.flush()?;
    write_sidecar(path, manifest)
}

pub fn write_envelope_bin(path: &Path, env: &ComplexEnvelope, manifest: &DumpManifest) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for s in &env.samples {
        w.write_all(&s.re.to_le_bytes())?;
        w.write_all(&s.im.to_le_bytes())?;
    }
    w.flush()?;
    write_sidecar(path, manifest)
}

pub fn write_spectrum_csv(path: &Path, spec: &Spectrum, manifest: &DumpManifest) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "t_or_f,re,im")?;
    for (f, v) in spec.freqs.iter().zip(&spec.values) {
        writeln!(w, "{f:.12e},{:.12e},{:.12e}", v.re, v.im)?;
    }
    w.flush()?;
    write_sidecar(path, manifest)
}

/// Power spectrum binned down to at most `max_rows` rows (mean power per
/// bin), for plotting-sized artifacts from multi-million-point spectra.
pub fn write_spectrum_psd_csv(
    path: &Path,
    spec: &Spectrum,
    max_rows: usize,
    manifest: &DumpManifest,
) -> Result<()> {
    let n = spec.values.len();
    let chunk = n.div_ceil(max_rows.max(1)).max(1);
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "freq_hz,psd")?;
    let mut i = 0;
    while i < n {
        let j = (i + chunk).min(n);
        let f_mid = 0.5 * (spec.freqs[i] + spec.freqs[j - 1]);
        let p = spec.values[i..j].iter().map(|v| v.norm_sqr()).sum::<f64>() / (j - i) as f64;
        writeln!(w, "{f_mid:.9e},{p:.9e}")?;
        i = j;
    }
    w.flush()?;
    write_sidecar(path, manifest)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::{make_grid, spectrum};
    use num_complex::Complex64;

    #[test]
    fn csv_and_sidecar_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let g = make_grid(1e6, 1e-4, true).unwrap();
        let env = ComplexEnvelope::constant(g, Complex64::new(0.5, -0.25));
        let manifest = DumpManifest {
            sample_rate: env.grid.sample_rate,
            t_start: env.grid.t_start,
            units: "field".into(),
            config_describe: "test".into(),
        };
        let p = dir.path().join("env.csv");
        write_envelope_csv(&p, &env, &manifest).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "t_or_f,re,im");
        assert_eq!(text.lines().count(), env.len() + 1);
        assert!(p.with_extension("csv.json").exists());

        let spec = spectrum(&env).unwrap();
        let ps = dir.path().join("spec.csv");
        write_spectrum_csv(&ps, &spec, &manifest).unwrap();
        assert!(ps.exists());

        let pb = dir.path().join("env.bin");
        write_envelope_bin(&pb, &env, &manifest).unwrap();
        let bytes = std::fs::read(&pb).unwrap();
        assert_eq!(bytes.len(), env.len() * 16);
        let re = f64::from_le_bytes(bytes[0..8].try_into().unwrap());
        assert_eq!(re, 0.5);
    }
}
