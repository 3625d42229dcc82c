//! Pump pulse and periodically poled nonlinearity.

use crate::error::Error;
use crate::medium::MediumModel;
use crate::{C64, I};

/// Gaussian pump pulse, frequency-domain form
/// `𝓔_P⁽⁺⁾(z, ω) = E₀·√τ_p·exp(−2τ_p²(ω_p0 − ω)²)·exp(i k(ω) z)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PumpPulse {
    /// Central frequency ω_p0 (1 in normalized units).
    pub central_freq: f64,
    /// Temporal width τ_p.
    pub temporal_width: f64,
    /// Total pulse energy U₀ (arbitrary units).
    pub energy: f64,
    /// Field normalization E₀ = √U₀ (the E₀↔U₀ constant is fixed to 1).
    pub amplitude_scale: f64,
}

impl PumpPulse {
    pub fn new(temporal_width: f64, energy: f64) -> Self {
        Self::with_center(1.0, temporal_width, energy)
    }

    pub fn with_center(central_freq: f64, temporal_width: f64, energy: f64) -> Self {
        assert!(temporal_width > 0.0, "τ_p must be positive");
        assert!(energy >= 0.0, "U₀ must be non-negative");
        assert!(central_freq > 0.0);
        Self {
            central_freq,
            temporal_width,
            energy,
            amplitude_scale: energy.sqrt(),
        }
    }

    /// Same pulse at a different energy.
    pub fn with_energy(&self, energy: f64) -> Self {
        Self::with_center(self.central_freq, self.temporal_width, energy)
    }

    /// Spectral envelope without the propagation phase,
    /// `E₀√τ_p·exp(−2τ_p²(ω_p0−ω)²)`.
    pub fn spectral_envelope(&self, omega_p: f64) -> f64 {
        let d = self.central_freq - omega_p;
        let t = self.temporal_width;
        self.amplitude_scale * t.sqrt() * (-2.0 * t * t * d * d).exp()
    }

    /// `𝓔_P⁽⁺⁾(z, ω_p)`; the pump propagates with the full complex k(ω_p),
    /// so absorption acts on it as well.
    pub fn spectrum(&self, medium: &MediumModel, z: f64, omega_p: f64) -> C64 {
        debug_assert!(omega_p >= 0.0);
        let env = self.spectral_envelope(omega_p);
        // Far in the Gaussian tail the envelope underflows; skip the
        // propagation phase there (ω_p may sit on a material resonance where
        // e^{ikz} overflows).
        if env < 1e-280 {
            return C64::new(0.0, 0.0);
        }
        let k = medium.wavenumber(omega_p);
        env * (I * k * z).exp()
    }

    /// `𝓔_P⁽⁻⁾(z, ω_p) = conj 𝓔_P⁽⁺⁾(z, ω_p)`.
    pub fn spectrum_neg(&self, medium: &MediumModel, z: f64, omega_p: f64) -> C64 {
        self.spectrum(medium, z, omega_p).conj()
    }

    /// Time-domain field `E_P⁽⁺⁾(z, t) = Σ_p w_p 𝓔_P⁽⁺⁾(z, ω_p)·e^{−iω_p t}`,
    /// quadratured over the pump grid so that both solver formulations consume
    /// identical pump data. `E_P⁽⁻⁾` is the conjugate.
    pub fn time_field(&self, medium: &MediumModel, omega_p: &crate::grid::Axis, z: f64, t: f64) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for (&w, &wp) in omega_p.weights().iter().zip(omega_p.nodes()) {
            acc += w * self.spectrum(medium, z, wp) * (-I * wp * t).exp();
        }
        acc
    }
}

/// χ⁽²⁾(z) = χ_m·cos(Λz) on |z − center| ≤ L/2, zero outside.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoledNonlinearity {
    /// Peak nonlinear susceptibility χ_m (arbitrary units).
    pub peak: f64,
    /// Poling wavevector Λ in cos(Λz) (inverse length).
    pub poling: f64,
    /// Length L of the nonlinear region.
    pub length: f64,
    /// Center of the region (0 throughout).
    pub center: f64,
}

impl PoledNonlinearity {
    pub fn new(peak: f64, poling: f64, length: f64) -> Self {
        assert!(length > 0.0, "region length must be positive");
        Self {
            peak,
            poling,
            length,
            center: 0.0,
        }
    }

    /// Spatial poling period 2π/Λ.
    pub fn poling_period(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.poling.abs()
    }

    pub fn half_length(&self) -> f64 {
        0.5 * self.length
    }

    /// χ⁽²⁾(z); exactly zero outside the poled region.
    pub fn chi(&self, z: f64) -> f64 {
        if (z - self.center).abs() <= self.half_length() {
            self.peak * (self.poling * z).cos()
        } else {
            0.0
        }
    }
}

/// Λ that phase-matches `ω_s0` against `ω_p0 − ω_s0`:
/// `Λ = Re k(ω_p0) − Re k(ω_s0) − Re k(ω_p0 − ω_s0)`.
pub fn solve_poling(pump: &PumpPulse, medium: &MediumModel, target_signal_freq: f64) -> f64 {
    let wp = pump.central_freq;
    assert!(
        target_signal_freq > 0.5 * wp && target_signal_freq < wp,
        "signal frequency must lie in (ω_p0/2, ω_p0)"
    );
    medium.wavenumber(wp).re
        - medium.wavenumber(target_signal_freq).re
        - medium.wavenumber(wp - target_signal_freq).re
}

/// Central phase-matched pair (ω_s0, ω_i0) for a given poling wavevector:
/// bisection of `Re k(ω_p0) − Re k(ω_s) − Re k(ω_p0 − ω_s) − Λ` on
/// (ω_p0/2, ω_p0).
pub fn phase_matching_offset(
    pump: &PumpPulse,
    medium: &MediumModel,
    poling: f64,
) -> Result<(f64, f64), Error> {
    let wp = pump.central_freq;
    let mismatch = |ws: f64| {
        medium.wavenumber(wp).re - medium.wavenumber(ws).re - medium.wavenumber(wp - ws).re
            - poling
    };
    let tol = 1e-13 * medium.wavenumber(wp).re.max(1.0);
    let mut lo = 0.5 * wp;
    let mut hi = wp * (1.0 - 1e-9);
    let f_lo = mismatch(lo);
    let f_hi = mismatch(hi);
    if f_lo.abs() <= tol {
        // Degenerate (dispersionless, Λ = 0) case.
        return Ok((0.5 * wp, 0.5 * wp));
    }
    if f_lo * f_hi > 0.0 {
        return Err(Error::NoPhaseMatch {
            lo,
            hi,
            poling,
        });
    }
    let mut f_lo = f_lo;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let f_mid = mismatch(mid);
        if f_mid == 0.0 || hi - lo < 1e-15 * wp {
            return Ok((mid, wp - mid));
        }
        if f_lo * f_mid < 0.0 {
            hi = mid;
        } else {
            lo = mid;
            f_lo = f_mid;
        }
    }
    let ws = 0.5 * (lo + hi);
    Ok((ws, wp - ws))
}
