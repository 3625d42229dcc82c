//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A frequency where `Im √ε` vanishes to floating precision: the
    /// excitation padding rule cannot terminate there.
    #[error("decay length diverges at ν = {nu}: Im √ε = {im_sqrt_eps:.3e}")]
    DecayLengthInfinite { nu: f64, im_sqrt_eps: f64 },

    /// ξ grid does not extend far enough past the probe points for the
    /// Green's-function identity quadrature to converge.
    #[error("ξ grid extends {extent:.3e} past the probe points, need ≥ {required:.3e}")]
    GridTooNarrow { extent: f64, required: f64 },

    /// Signal and idler bands overlap; the two-band layout is invalid.
    #[error("signal band [{s_lo:.4}, {s_hi:.4}] collides with idler band [{i_lo:.4}, {i_hi:.4}]")]
    BandCollision {
        s_lo: f64,
        s_hi: f64,
        i_lo: f64,
        i_hi: f64,
    },

    /// No phase-matched signal frequency exists for the given poling period.
    #[error("no phase-matched frequency in ({lo:.4}, {hi:.4}) for Λ = {poling:.6e}")]
    NoPhaseMatch { lo: f64, hi: f64, poling: f64 },

    /// A projected allocation exceeds the configured memory budget.
    #[error("{what} needs {needed_mb:.1} MB, budget is {budget_mb:.1} MB")]
    OutOfBudget {
        what: &'static str,
        needed_mb: f64,
        budget_mb: f64,
    },

    /// A coefficient became NaN or infinite during time stepping.
    #[error("non-finite state at t = {t:.6e} (step {step})")]
    NonFiniteState { t: f64, step: usize },

    /// The sinh² fit residual exceeds its threshold: the scan is not in the
    /// single-mode squeezer regime.
    #[error("gain fit residual {residual:.3e} exceeds threshold {threshold:.3e}")]
    FitDiverged { residual: f64, threshold: f64 },

    /// A half-maximum crossing is missing on one side of the curve.
    #[error("no half-maximum crossing on the {side} side of the curve")]
    NoCrossing { side: &'static str },

    /// Two spectra do not share a frequency axis (or scan parameters).
    #[error("spectra are not comparable: {reason}")]
    AxisMismatch { reason: String },
}
