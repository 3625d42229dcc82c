//! Non-perturbative simulation of spontaneous parametric down-conversion in
//! open, dispersive 1D nonlinear waveguides.
//!
//! The solver propagates the input-output coefficients of the generated
//! quantum field through the pump pulse, for media with arbitrary loss and
//! dispersion described by a complex permittivity and the associated 1D
//! Green's function. The frequency-domain ("filtered") formulation is the
//! production path; a time-domain formulation on tiny grids serves as a
//! cross-check.
//!
//! # Units
//!
//! Everything is normalized: frequencies in units of the pump central
//! frequency `ω_p0`, times in `1/ω_p0`, lengths in `c/ω_p0` (so that the
//! wavenumber is `k(ω) = ω·√ε(ω)` with no extra constants). Config files
//! measure lengths in pump vacuum wavelengths (`2πc/ω_p0`); the CLI converts
//! on input. Spectra are in arbitrary units.

pub mod error;
pub mod evolve;
pub mod excitation;
pub mod greens;
pub mod grid;
pub mod kernels;
pub mod medium;
pub mod observables;
pub mod oracle;
pub mod timedomain;

pub use error::Error;

/// Complex double, the working scalar of every field quantity.
pub type C64 = num_complex::Complex64;

/// i as a `C64`.
pub(crate) const I: C64 = C64::new(0.0, 1.0);
