//! Physical outputs from final coefficients: spectra, second-order moments,
//! extinction, widths, and the sinh² gain fit.

use crate::error::Error;
use crate::evolve::{CoefficientField, SpectrumSnapshot};
use crate::excitation::PumpPulse;
use crate::kernels::field_index;
use crate::C64;

/// Single-photon spectrum σ(z₀, ω) with its scan metadata.
#[derive(Debug, Clone)]
pub struct SpectrumResult {
    /// Observation position (snapped to the nearest z node).
    pub position: f64,
    pub frequencies: Vec<f64>,
    pub freq_weights: Vec<f64>,
    /// σ ≥ 0, arbitrary units.
    pub intensity: Vec<f64>,
    pub pump_energy: f64,
    pub pump_width: f64,
}

impl SpectrumResult {
    /// Self-normalized copy of the intensity (max = 1).
    pub fn normalized(&self) -> Vec<f64> {
        let peak = self.intensity.iter().cloned().fold(0.0f64, f64::max);
        if peak <= 0.0 {
            return self.intensity.clone();
        }
        self.intensity.iter().map(|v| v / peak).collect()
    }

    pub fn peak(&self) -> f64 {
        self.intensity.iter().cloned().fold(0.0f64, f64::max)
    }

    /// Intensity at the node closest to `omega`.
    pub fn value_at(&self, omega: f64) -> f64 {
        let mut best = 0;
        let mut d = f64::INFINITY;
        for (i, &w) in self.frequencies.iter().enumerate() {
            if (w - omega).abs() < d {
                d = (w - omega).abs();
                best = i;
            }
        }
        self.intensity[best]
    }
}

/// Second-order moment N(ω, ω′); not Hermitian in general.
#[derive(Debug, Clone)]
pub struct MomentResult {
    pub frequencies: Vec<f64>,
    /// Row-major `[ω][ω′]`.
    pub n: Vec<C64>,
}

impl MomentResult {
    pub fn at(&self, i: usize, j: usize) -> C64 {
        self.n[i * self.frequencies.len() + j]
    }
}

/// Result of the sinh² gain fit ℐ_m = a·sinh²(b·√U₀).
#[derive(Debug, Clone)]
pub struct GainFit {
    pub a: f64,
    pub b: f64,
    /// 𝒢 = b·√U₀ per scan point.
    pub gains: Vec<f64>,
    /// Normalized RMS residual of the fit.
    pub residual: f64,
}

/// σ(z₀, ω_k) = Σ_cols w_col·|Ã(z₀, ω_k, col)|².
pub fn spectrum(state: &CoefficientField, z0: f64, pump: &PumpPulse) -> SpectrumResult {
    let n0 = state.z_index(z0);
    SpectrumResult {
        position: state.z_nodes[n0],
        frequencies: state.omega_nodes.clone(),
        freq_weights: state.omega_weights.clone(),
        intensity: state.sigma_at(n0),
        pump_energy: pump.energy,
        pump_width: pump.temporal_width,
    }
}

/// N(ω, ω′) = Σ_cols w_col·B̃(z₀, ω, col)·conj Ã(z₀, ω′, col).
pub fn second_moment(state: &CoefficientField, z0: f64) -> MomentResult {
    let n0 = state.z_index(z0);
    let nw = state.nomega;
    let mut n = vec![C64::new(0.0, 0.0); nw * nw];
    for col in &state.columns {
        // Lab-frame row vectors at the observation node.
        let b_row: Vec<C64> = (0..nw).map(|j| state.b_lab(col, j, n0)).collect();
        let a_row: Vec<C64> = (0..nw).map(|j| state.a_lab(col, j, n0)).collect();
        for i in 0..nw {
            let wb = col.weight * b_row[i];
            for j in 0..nw {
                n[i * nw + j] += wb * a_row[j].conj();
            }
        }
    }
    MomentResult {
        frequencies: state.omega_nodes.clone(),
        n,
    }
}

/// Full width at half maximum by linear interpolation around the unique
/// maximum of a sampled curve.
pub fn fwhm(nodes: &[f64], values: &[f64]) -> Result<f64, Error> {
    assert_eq!(nodes.len(), values.len());
    assert!(nodes.len() >= 3);
    let (imax, &peak) = values
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .unwrap();
    let half = 0.5 * peak;
    let mut left = None;
    for i in (1..=imax).rev() {
        if values[i - 1] <= half && values[i] > half {
            let f = (half - values[i - 1]) / (values[i] - values[i - 1]);
            left = Some(nodes[i - 1] + f * (nodes[i] - nodes[i - 1]));
            break;
        }
    }
    let Some(left) = left else {
        return Err(Error::NoCrossing { side: "left" });
    };
    let mut right = None;
    for i in imax..nodes.len() - 1 {
        if values[i] > half && values[i + 1] <= half {
            let f = (values[i] - half) / (values[i] - values[i + 1]);
            right = Some(nodes[i] + f * (nodes[i + 1] - nodes[i]));
            break;
        }
    }
    let Some(right) = right else {
        return Err(Error::NoCrossing { side: "right" });
    };
    Ok(right - left)
}

fn comparable(a: &SpectrumResult, b: &SpectrumResult) -> Result<(), Error> {
    if a.frequencies.len() != b.frequencies.len()
        || a.frequencies
            .iter()
            .zip(&b.frequencies)
            .any(|(x, y)| (x - y).abs() > 1e-12)
    {
        return Err(Error::AxisMismatch {
            reason: "frequency axes differ".into(),
        });
    }
    if (a.pump_energy - b.pump_energy).abs() > 1e-12 * a.pump_energy.abs().max(1e-300)
        || (a.pump_width - b.pump_width).abs() > 1e-12 * a.pump_width
    {
        return Err(Error::AxisMismatch {
            reason: "scan parameters differ".into(),
        });
    }
    Ok(())
}

/// Pointwise σ_lossless − σ_lossy on a shared axis.
pub fn extinction(lossless: &SpectrumResult, lossy: &SpectrumResult) -> Result<Vec<f64>, Error> {
    comparable(lossless, lossy)?;
    Ok(lossless
        .intensity
        .iter()
        .zip(&lossy.intensity)
        .map(|(a, b)| a - b)
        .collect())
}

/// Extinction with the lossy spectrum normalized to its lossless counterpart,
/// 1 − σ_lossy/σ_lossless: the relative dip depth.
pub fn relative_extinction(
    lossless: &SpectrumResult,
    lossy: &SpectrumResult,
) -> Result<Vec<f64>, Error> {
    comparable(lossless, lossy)?;
    let floor = 1e-12 * lossless.peak();
    Ok(lossless
        .intensity
        .iter()
        .zip(&lossy.intensity)
        .map(|(a, b)| if *a > floor { 1.0 - b / a } else { 0.0 })
        .collect())
}

/// Residual threshold above which the scan is declared outside the sinh²
/// regime.
const FIT_RESIDUAL_LIMIT: f64 = 0.2;

/// Fit ℐ = a·sinh²(b√U₀): golden-section search over b with the closed-form
/// least-squares amplitude a(b) = Σℐ·sinh²/Σ sinh⁴.
pub fn fit_gain(scan: &[(f64, f64)]) -> Result<GainFit, Error> {
    assert!(scan.len() >= 5, "gain fit needs at least 5 scan points");
    let umax = scan.iter().map(|p| p.0).fold(0.0f64, f64::max);
    assert!(umax > 0.0);
    let norm: f64 = scan.iter().map(|p| p.1 * p.1).sum::<f64>() / scan.len() as f64;
    let amp_for = |b: f64| -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for &(u, i) in scan {
            let s2 = (b * u.sqrt()).sinh().powi(2);
            num += i * s2;
            den += s2 * s2;
        }
        if den > 0.0 {
            num / den
        } else {
            0.0
        }
    };
    let sse = |b: f64| -> f64 {
        let a = amp_for(b);
        scan.iter()
            .map(|&(u, i)| {
                let f = a * (b * u.sqrt()).sinh().powi(2);
                (i - f) * (i - f)
            })
            .sum()
    };
    // Coarse log scan, then golden-section refinement.
    let lo = 1e-3 / umax.sqrt();
    let hi = 250.0 / umax.sqrt();
    let n_coarse = 400;
    let mut best = (lo, f64::INFINITY);
    for i in 0..=n_coarse {
        let b = lo * (hi / lo).powf(i as f64 / n_coarse as f64);
        let v = sse(b);
        if v < best.1 {
            best = (b, v);
        }
    }
    let ratio = (hi / lo).powf(1.0 / n_coarse as f64);
    let mut a = best.0 / ratio;
    let mut c = best.0 * ratio;
    let g = 0.5 * (5.0f64.sqrt() - 1.0);
    let mut x1 = c - g * (c - a);
    let mut x2 = a + g * (c - a);
    let mut f1 = sse(x1);
    let mut f2 = sse(x2);
    for _ in 0..200 {
        if f1 < f2 {
            c = x2;
            x2 = x1;
            f2 = f1;
            x1 = c - g * (c - a);
            f1 = sse(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (c - a);
            f2 = sse(x2);
        }
        if (c - a) < 1e-13 * best.0 {
            break;
        }
    }
    let b = 0.5 * (a + c);
    let amp = amp_for(b);
    let residual = (sse(b) / scan.len() as f64).sqrt() / norm.sqrt();
    if !residual.is_finite() || residual > FIT_RESIDUAL_LIMIT {
        return Err(Error::FitDiverged {
            residual,
            threshold: FIT_RESIDUAL_LIMIT,
        });
    }
    Ok(GainFit {
        a: amp,
        b,
        gains: scan.iter().map(|p| b * p.0.sqrt()).collect(),
        residual,
    })
}

/// σ(z₀, ω) at a set of interior observation positions, from the final-time
/// coefficients.
pub fn spatial_evolution(state: &CoefficientField, positions: &[f64]) -> Vec<(f64, Vec<f64>)> {
    positions
        .iter()
        .map(|&z0| {
            let n0 = state.z_index(z0);
            (state.z_nodes[n0], state.sigma_at(n0))
        })
        .collect()
}

/// Same, from recorded mid-run snapshots.
pub fn spatial_evolution_snapshots(snaps: &[SpectrumSnapshot]) -> Vec<(f64, f64, Vec<f64>)> {
    let mut rows = Vec::new();
    for s in snaps {
        for (p, sig) in s.positions.iter().zip(&s.sigma) {
            rows.push((s.t, *p, sig.clone()));
        }
    }
    rows
}

/// Peak σ over the signal band as a function of position: the spatial growth
/// curve of the spectral maximum.
pub fn peak_growth(state: &CoefficientField, positions: &[f64], band: &[usize]) -> Vec<(f64, f64)> {
    positions
        .iter()
        .map(|&z0| {
            let n0 = state.z_index(z0);
            let peak = band
                .iter()
                .map(|&j| {
                    state
                        .columns
                        .iter()
                        .map(|c| c.weight * c.a[field_index(state.nz, j, n0)].norm_sqr())
                        .sum::<f64>()
                })
                .fold(0.0f64, f64::max);
            (state.z_nodes[n0], peak)
        })
        .collect()
}
