//! Result persistence: CSV files with `#`-prefixed header blocks and the
//! run manifest. Result payloads are deterministic; timing lives only in the
//! manifest.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use spdc_core::observables::{GainFit, MomentResult, SpectrumResult};

pub struct OutputDir {
    pub root: PathBuf,
}

impl OutputDir {
    pub fn create(root: &str) -> io::Result<Self> {
        fs::create_dir_all(root)?;
        Ok(Self {
            root: PathBuf::from(root),
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }
}

fn header(what: &str, columns: &str, units: &str, hash: &str, extra: &[String]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# {what}");
    let _ = writeln!(s, "# columns: {columns}");
    let _ = writeln!(s, "# units: {units}");
    let _ = writeln!(s, "# config_hash: {hash}");
    for line in extra {
        let _ = writeln!(s, "# {line}");
    }
    s
}

pub fn write_spectrum(
    path: &Path,
    sr: &SpectrumResult,
    hash: &str,
    extra: &[String],
) -> io::Result<()> {
    let mut s = header(
        "single-photon spectrum",
        "omega,sigma,sigma_normalized",
        "omega in omega_p0; sigma arbitrary",
        hash,
        extra,
    );
    let norm = sr.normalized();
    let _ = writeln!(s, "# position: {:.9e}", sr.position);
    let _ = writeln!(s, "# pump_energy: {:.9e}", sr.pump_energy);
    let _ = writeln!(s, "# pump_tau: {:.9e}", sr.pump_width);
    for i in 0..sr.frequencies.len() {
        let _ = writeln!(
            s,
            "{:.12e},{:.12e},{:.12e}",
            sr.frequencies[i], sr.intensity[i], norm[i]
        );
    }
    fs::write(path, s)
}

pub fn write_moment(path: &Path, m: &MomentResult, hash: &str) -> io::Result<()> {
    let mut s = header(
        "second-order moment N(omega, omega')",
        "row,col,omega,omega_prime,re,im",
        "omega in omega_p0; N arbitrary",
        hash,
        &[],
    );
    let n = m.frequencies.len();
    for i in 0..n {
        for j in 0..n {
            let v = m.at(i, j);
            let _ = writeln!(
                s,
                "{},{},{:.9e},{:.9e},{:.12e},{:.12e}",
                i, j, m.frequencies[i], m.frequencies[j], v.re, v.im
            );
        }
    }
    fs::write(path, s)
}

pub fn write_spatial(
    path: &Path,
    rows: &[(f64, Vec<f64>)],
    omega: &[f64],
    hash: &str,
) -> io::Result<()> {
    let mut s = header(
        "spatial evolution of the spectrum",
        "position,omega,sigma",
        "position in c/omega_p0; omega in omega_p0; sigma arbitrary",
        hash,
        &[],
    );
    for (z, sig) in rows {
        for (w, v) in omega.iter().zip(sig) {
            let _ = writeln!(s, "{:.9e},{:.9e},{:.12e}", z, w, v);
        }
    }
    fs::write(path, s)
}

pub fn write_gain_scan(
    path: &Path,
    scan: &[(f64, f64)],
    fit: Option<&GainFit>,
    hash: &str,
) -> io::Result<()> {
    let mut extra = Vec::new();
    if let Some(f) = fit {
        extra.push(format!("fit_a: {:.9e}", f.a));
        extra.push(format!("fit_b: {:.9e}", f.b));
        extra.push(format!("fit_residual: {:.9e}", f.residual));
    }
    let mut s = header(
        "gain scan: peak spectral intensity vs pump energy",
        "energy,peak,gain",
        "energy arbitrary; peak arbitrary; gain dimensionless",
        hash,
        &extra,
    );
    for (i, (u, pk)) in scan.iter().enumerate() {
        let g = fit.map(|f| f.gains[i]).unwrap_or(f64::NAN);
        let _ = writeln!(s, "{:.12e},{:.12e},{:.9e}", u, pk, g);
    }
    fs::write(path, s)
}

pub fn write_table(
    path: &Path,
    what: &str,
    columns: &str,
    rows: &[Vec<f64>],
    hash: &str,
    extra: &[String],
) -> io::Result<()> {
    let mut s = header(what, columns, "normalized/arbitrary", hash, extra);
    for row in rows {
        let line: Vec<String> = row.iter().map(|v| format!("{v:.12e}")).collect();
        let _ = writeln!(s, "{}", line.join(","));
    }
    fs::write(path, s)
}

/// Run manifest: config echo + grid/solver facts, written before the run and
/// finalized (with wall time and outputs) after.
pub struct Manifest {
    path: PathBuf,
    lines: Vec<String>,
}

impl Manifest {
    pub fn start(path: PathBuf, canonical_config: &str, hash: &str) -> Self {
        let mut lines = vec![
            format!("library_version = {}", env!("CARGO_PKG_VERSION")),
            format!("config_hash = {hash}"),
            "status = running".to_string(),
        ];
        for l in canonical_config.lines() {
            lines.push(format!("config.{l}"));
        }
        let m = Self { path, lines };
        m.flush();
        m
    }

    pub fn add(&mut self, key: &str, value: impl std::fmt::Display) {
        self.lines.push(format!("{key} = {value}"));
        self.flush();
    }

    pub fn finalize(&mut self, wall_seconds: f64) {
        self.lines
            .retain(|l| !l.starts_with("status = "));
        self.lines.push(format!("wall_seconds = {wall_seconds:.3}"));
        self.lines.push("status = complete".to_string());
        self.flush();
    }

    fn flush(&self) {
        let _ = fs::write(&self.path, self.lines.join("\n") + "\n");
    }
}
