//! Complex permittivity of the waveguide dielectric plus analyte.
//!
//! Both constituents are Lorentz oscillators,
//! `χ(ω) = Ω_Pl² / (Ω₀² − ω² − iΓω)`, so the model satisfies the
//! Kramers-Kronig relations by construction. The analyte contribution is
//! scaled by the dimensionless near-field overlap `α`; `α = 0` is the
//! no-analyte ("lossless") medium.

use crate::error::Error;
use crate::C64;

/// One Lorentz oscillator, all frequencies normalized to the pump center.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LorentzParams {
    /// Plasma frequency Ω_Pl.
    pub plasma_freq: f64,
    /// Resonance frequency (Ω₀ for the dielectric, ω_loss for the analyte).
    pub resonance_freq: f64,
    /// Resonance linewidth (Γ or γ).
    pub linewidth: f64,
}

impl LorentzParams {
    /// All three parameters must be positive.
    pub fn new(plasma_freq: f64, resonance_freq: f64, linewidth: f64) -> Self {
        assert!(
            plasma_freq > 0.0 && resonance_freq > 0.0 && linewidth > 0.0,
            "Lorentz parameters must be positive"
        );
        Self {
            plasma_freq,
            resonance_freq,
            linewidth,
        }
    }

    /// Oscillator susceptibility χ(ω) = Ω_Pl²/(Ω₀² − ω² − iΓω).
    pub fn susceptibility(&self, omega: f64) -> C64 {
        let re = self.resonance_freq * self.resonance_freq - omega * omega;
        let im = -self.linewidth * omega;
        // Rationalized division keeps the ω = 0 case exact.
        let denom = re * re + im * im;
        let num = self.plasma_freq * self.plasma_freq;
        C64::new(num * re / denom, -num * im / denom)
    }
}

/// Waveguide dielectric plus analyte, the medium every other module samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MediumModel {
    pub dielectric: LorentzParams,
    pub analyte: LorentzParams,
    /// Near-field overlap α of the guided mode with the analyte, ≥ 0.
    pub overlap: f64,
}

/// ε(ω) sample carrying the frequency it was evaluated at.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexPermittivity {
    pub value: C64,
    pub frequency: f64,
}

impl ComplexPermittivity {
    pub fn re(&self) -> f64 {
        self.value.re
    }

    pub fn im(&self) -> f64 {
        self.value.im
    }
}

impl MediumModel {
    pub fn new(dielectric: LorentzParams, analyte: LorentzParams, overlap: f64) -> Self {
        assert!(overlap >= 0.0, "overlap factor α must be ≥ 0");
        Self {
            dielectric,
            analyte,
            overlap,
        }
    }

    /// The same medium with the analyte removed (α = 0).
    pub fn without_analyte(&self) -> Self {
        Self {
            overlap: 0.0,
            ..*self
        }
    }

    /// ε(ω) = 1 + χ_dielectric(ω) + α·χ_analyte(ω), for ω ≥ 0.
    pub fn permittivity(&self, omega: f64) -> ComplexPermittivity {
        debug_assert!(omega >= 0.0);
        let mut value = 1.0 + self.dielectric.susceptibility(omega);
        if self.overlap > 0.0 {
            value += self.overlap * self.analyte.susceptibility(omega);
        }
        ComplexPermittivity {
            value,
            frequency: omega,
        }
    }

    /// √ε(ω) on the passive branch, Im √ε ≥ 0.
    pub fn refractive_index(&self, omega: f64) -> C64 {
        let r = self.permittivity(omega).value.sqrt();
        // The principal branch already lands here for Im ε ≥ 0; the flip
        // guards the exactly-real case against a signed zero.
        if r.im < 0.0 {
            -r
        } else {
            r
        }
    }

    /// Complex wavenumber k(ω) = ω·√ε(ω) (normalized units, c = 1).
    pub fn wavenumber(&self, omega: f64) -> C64 {
        omega * self.refractive_index(omega)
    }

    /// Decay length l_d(ν) = 1 / (ν · Im √ε(ν)) of excitations at ν > 0.
    pub fn decay_length(&self, nu: f64) -> Result<f64, Error> {
        assert!(nu > 0.0, "decay length is defined for ν > 0");
        let im_k = self.wavenumber(nu).im;
        if im_k <= f64::MIN_POSITIVE {
            return Err(Error::DecayLengthInfinite {
                nu,
                im_sqrt_eps: im_k / nu,
            });
        }
        Ok(1.0 / im_k)
    }
}

/// Media used throughout the tests and presets.
pub mod presets {
    use super::*;

    /// Published waveguide-plus-analyte system: Ω₀ = 2.1, Ω_Pl = 0.25,
    /// Γ = 10⁻⁷, analyte at ω_loss = 0.3 with γ = 2.5×10⁻³, α = 3×10⁻⁸.
    pub fn paper_medium() -> MediumModel {
        MediumModel::new(
            LorentzParams::new(0.25, 2.1, 1e-7),
            LorentzParams::new(0.25, 0.3, 2.5e-3),
            3e-8,
        )
    }

    /// Strongly dispersive variant used by the fast ("mini") presets: the
    /// dielectric resonance sits closer to the band so phase matching is
    /// achieved over a few poling periods instead of dozens.
    pub fn mini_medium(alpha: f64, gamma_loss: f64) -> MediumModel {
        MediumModel::new(
            LorentzParams::new(0.6, 1.3, 1e-7),
            LorentzParams::new(0.6, 0.3, gamma_loss),
            alpha,
        )
    }
}
