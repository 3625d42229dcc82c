//! Scalar Green's function of the homogeneous lossy 1D medium,
//! `G(z, z′, ω) = i/(2k(ω))·exp(i k(ω) |z − z′|)`, and its self-consistency
//! identity `(ω²/c²)·∫dξ ε″(ξ,ω)·G(z,ξ,ω)·G*(z′,ξ,ω) = Im G(z,z′,ω)` — the
//! quadrature gate for every kernel integral in the solver.

use crate::error::Error;
use crate::grid::Axis;
use crate::medium::MediumModel;
use crate::{C64, I};

#[derive(Debug, Clone, Copy)]
pub struct GreensFunction1D {
    pub medium: MediumModel,
}

impl GreensFunction1D {
    pub fn new(medium: MediumModel) -> Self {
        Self { medium }
    }

    /// G(z, z′, ω); symmetric in z ↔ z′ by construction.
    pub fn evaluate(&self, z: f64, z_src: f64, omega: f64) -> C64 {
        debug_assert!(omega > 0.0);
        let k = self.medium.wavenumber(omega);
        I / (2.0 * k) * (I * k * (z - z_src).abs()).exp()
    }

    /// Im G(z, z′, ω), the kernel weight of the coupled equations.
    pub fn im_g(&self, z: f64, z_src: f64, omega: f64) -> f64 {
        self.evaluate(z, z_src, omega).im
    }

    /// Relative residual of the Green's-function identity quadrature on the
    /// given ξ axis. Errors with `GridTooNarrow` when the axis does not reach
    /// 5 decay lengths past both probe points.
    pub fn verify_gf_identity(
        &self,
        z: f64,
        z_src: f64,
        omega: f64,
        xi: &Axis,
    ) -> Result<f64, Error> {
        let ld = self.medium.decay_length(omega)?;
        let required = 5.0 * ld;
        let above = xi.max() - z.max(z_src);
        let below = z.min(z_src) - xi.min();
        let extent = above.min(below);
        if extent < required {
            return Err(Error::GridTooNarrow { extent, required });
        }
        let eps_im = self.medium.permittivity(omega).im();
        let mut acc = C64::new(0.0, 0.0);
        for (&wt, &q) in xi.weights().iter().zip(xi.nodes()) {
            acc += wt * eps_im * self.evaluate(z, q, omega) * self.evaluate(z_src, q, omega).conj();
        }
        let lhs = omega * omega * acc;
        let rhs = self.im_g(z, z_src, omega);
        Ok((lhs - rhs).norm() / rhs.abs())
    }
}
