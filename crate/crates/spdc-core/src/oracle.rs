//! Independent low-gain spectrum: the first-order perturbative solution of
//! the filtered system, used to validate the non-perturbative solver.
//!
//! Two mutually validating evaluations exist: the Ξ-sum (first-order
//! coefficient squared, integrated over the excitation grid) and the reduced
//! double-z-integral over `Im G(z′, z″, ν)`, which eliminates ξ analytically
//! and is far cheaper.

use crate::excitation::{PoledNonlinearity, PumpPulse};
use crate::greens::GreensFunction1D;
use crate::grid::SimulationGrids;
use crate::medium::MediumModel;
use crate::{C64, I};

/// First-order coefficient
/// `Ã₁(z₀, ω, ξ, ν) = 2i·ν²ω²·√ε″(ν)·∫dz′ χ(z′)·𝓔_P⁽⁻⁾(z′, ω+ν)·G*(z₀,z′,ω)·G(z′,ξ,ν)`.
pub fn perturbative_coefficient(
    grids: &SimulationGrids,
    medium: &MediumModel,
    pump: &PumpPulse,
    nonlinearity: &PoledNonlinearity,
    z0: f64,
    xi: f64,
    nu: f64,
    omega: f64,
) -> C64 {
    let gf = GreensFunction1D::new(*medium);
    let eps_im = medium.permittivity(nu).im().max(0.0);
    let mut acc = C64::new(0.0, 0.0);
    for m in 0..grids.z.len() {
        let zm = grids.z.node(m);
        acc += grids.z.weight(m)
            * nonlinearity.chi(zm)
            * pump.spectrum_neg(medium, zm, omega + nu)
            * gf.evaluate(z0, zm, omega).conj()
            * gf.evaluate(zm, xi, nu);
    }
    2.0 * I * nu * nu * omega * omega * eps_im.sqrt() * acc
}

/// Low-gain spectrum over the ω axis by the reduced double-z-integral:
///
/// `σ₁(ω) = 4ω⁴·Σ_ν w_ν ν²·Σ_{m,m′} u_m·u*_{m′}·Im G(z_m, z_m′, ν)` with
/// `u_m = w_m χ(z_m)·𝓔_P⁽⁻⁾(z_m, ω+ν)·G*(z₀, z_m, ω)`.
///
/// The prefactor makes it numerically identical (through the
/// Green's-function identity) to the Ξ-sum form, so no free scale remains.
pub fn perturbative_spectrum(
    grids: &SimulationGrids,
    medium: &MediumModel,
    pump: &PumpPulse,
    nonlinearity: &PoledNonlinearity,
    z0: f64,
) -> Vec<f64> {
    let gf = GreensFunction1D::new(*medium);
    let z = &grids.z;
    let nz = z.len();
    let omega = &grids.axes.omega;
    let nu_axis = &grids.axes.nu;
    let chi_w: Vec<f64> = (0..nz)
        .map(|m| nonlinearity.chi(z.node(m)) * z.weight(m))
        .collect();
    // Im G(z_m, z_m′, ν) per ν node.
    let img: Vec<Vec<f64>> = nu_axis
        .nodes()
        .iter()
        .map(|&v| {
            let mut mat = vec![0.0f64; nz * nz];
            for m in 0..nz {
                for mp in m..nz {
                    let val = gf.im_g(z.node(m), z.node(mp), v);
                    mat[m * nz + mp] = val;
                    mat[mp * nz + m] = val;
                }
            }
            mat
        })
        .collect();

    omega
        .nodes()
        .iter()
        .map(|&w| {
            let gstar: Vec<C64> = (0..nz)
                .map(|m| gf.evaluate(z0, z.node(m), w).conj())
                .collect();
            let mut total = 0.0;
            for (iv, &v) in nu_axis.nodes().iter().enumerate() {
                let u: Vec<C64> = (0..nz)
                    .map(|m| chi_w[m] * pump.spectrum_neg(medium, z.node(m), w + v) * gstar[m])
                    .collect();
                let mat = &img[iv];
                let mut quad = 0.0;
                for m in 0..nz {
                    // Diagonal plus twice the real upper triangle.
                    quad += mat[m * nz + m] * u[m].norm_sqr();
                    for mp in (m + 1)..nz {
                        quad += 2.0 * mat[m * nz + mp] * (u[m] * u[mp].conj()).re;
                    }
                }
                total += nu_axis.weight(iv) * v * v * quad;
            }
            4.0 * w.powi(4) * total
        })
        .collect()
}

/// Low-gain spectrum by the explicit Ξ-sum over the (ξ, ν) grid;
/// the expensive cross-check of the reduced form.
pub fn perturbative_spectrum_xi_sum(
    grids: &SimulationGrids,
    medium: &MediumModel,
    pump: &PumpPulse,
    nonlinearity: &PoledNonlinearity,
    z0: f64,
) -> Vec<f64> {
    let omega = &grids.axes.omega;
    let nu_axis = &grids.axes.nu;
    let xi = &grids.xi.axis;
    omega
        .nodes()
        .iter()
        .map(|&w| {
            let mut total = 0.0;
            for (iv, &v) in nu_axis.nodes().iter().enumerate() {
                for q in 0..xi.len() {
                    let a1 = perturbative_coefficient(
                        grids,
                        medium,
                        pump,
                        nonlinearity,
                        z0,
                        xi.node(q),
                        v,
                        w,
                    );
                    total += nu_axis.weight(iv) * xi.weight(q) * a1.norm_sqr();
                }
            }
            total
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::excitation::solve_poling;
    use crate::grid::{Axis, BandResolution, GridParams, SimulationGrids};
    use crate::medium::presets::{mini_medium, paper_medium};
    use crate::observables::fwhm;
    use approx::assert_relative_eq;

    /// Strongly lossy, finely resolved single-period system: both forms of
    /// the oracle converge on it.
    fn fine_system() -> (MediumModel, PumpPulse, PoledNonlinearity, SimulationGrids) {
        let m = mini_medium(2e-2, 0.03);
        let p = PumpPulse::new(40.0, 1.0);
        let poling = solve_poling(&p, &m, 0.7);
        let nl = PoledNonlinearity::new(0.8, poling, 2.0 * std::f64::consts::PI / poling);
        let params = GridParams {
            nodes_per_period: 2400,
            side_lobes: 1,
            pump_nodes: 33,
            padding_decay_lengths: 6.0,
            compressed_nodes: 260,
            phase_cap: 0.5,
            band: BandResolution {
                fine_spacing: Some(0.04),
                core_halfwidth: Some(0.08),
                coarse_spacing: Some(0.08),
                single_band: false,
            },
        };
        let grids = SimulationGrids::build(&m, &p, &nl, &params).unwrap();
        (m, p, nl, grids)
    }

    #[test]
    fn vanishes_without_nonlinearity() {
        let (m, p, nl, grids) = fine_system();
        let nl0 = PoledNonlinearity::new(0.0, nl.poling, nl.length);
        let v = perturbative_coefficient(&grids, &m, &p, &nl0, 30.0, 5.0, 0.3, 0.7);
        assert_eq!(v.norm(), 0.0);
    }

    #[test]
    fn gaussian_tail_suppression() {
        // ω + ν detuned > 6/τ_p from the pump center is negligible.
        let (m, p, nl, grids) = fine_system();
        let on = perturbative_coefficient(&grids, &m, &p, &nl, 30.0, 5.0, 0.3, 0.7);
        let tau = p.temporal_width;
        let off = perturbative_coefficient(&grids, &m, &p, &nl, 30.0, 5.0, 0.3, 0.7 + 8.0 / tau);
        assert!(off.norm() < 1e-6 * on.norm());
    }

    #[test]
    fn coefficient_matches_refined_quadrature() {
        let (m, p, nl, grids) = fine_system();
        // ξ on a z node keeps the |z−ξ| kink of the integrand on-grid for
        // both quadratures.
        let xi = grids.z.node(2 * (grids.z.len() - 1) / 3);
        let (z0, nu, w) = (nl.half_length(), 0.3, 0.72);
        let got = perturbative_coefficient(&grids, &m, &p, &nl, z0, xi, nu, w);
        // Independent 4×-refined trapezoid of the closed-form integrand.
        let gf = GreensFunction1D::new(m);
        let eps_im = m.permittivity(nu).im();
        let nzr = (grids.z.len() - 1) * 4 + 1;
        let hz = nl.length / (nzr - 1) as f64;
        let mut acc = C64::new(0.0, 0.0);
        for a in 0..nzr {
            let zp = -nl.half_length() + a as f64 * hz;
            let wz = if a == 0 || a == nzr - 1 { 0.5 * hz } else { hz };
            acc += wz
                * nl.chi(zp)
                * p.spectrum_neg(&m, zp, w + nu)
                * gf.evaluate(z0, zp, w).conj()
                * gf.evaluate(zp, xi, nu);
        }
        let want = 2.0 * I * nu * nu * w * w * eps_im.sqrt() * acc;
        assert!(
            (got - want).norm() <= 1e-4 * want.norm(),
            "oracle coefficient {got:?} vs refined {want:?}"
        );
    }

    #[test]
    fn reduced_form_matches_xi_sum() {
        let (m, p, nl, grids) = fine_system();
        let z0 = nl.half_length();
        let reduced = perturbative_spectrum(&grids, &m, &p, &nl, z0);
        let xi_sum = perturbative_spectrum_xi_sum(&grids, &m, &p, &nl, z0);
        let peak = reduced.iter().cloned().fold(0.0f64, f64::max);
        assert!(peak > 0.0);
        for (a, b) in reduced.iter().zip(&xi_sum) {
            assert!(
                (a - b).abs() <= 0.01 * peak.max(*a),
                "forms disagree: {a:.6e} vs {b:.6e}"
            );
        }
    }

    #[test]
    fn spectrum_scales_with_pump_energy() {
        let (m, p, nl, grids) = fine_system();
        let z0 = nl.half_length();
        let s1 = perturbative_spectrum(&grids, &m, &p, &nl, z0);
        let p4 = PumpPulse::new(p.temporal_width, 4.0 * p.energy);
        let s4 = perturbative_spectrum(&grids, &m, &p4, &nl, z0);
        for (a, b) in s1.iter().zip(&s4) {
            if *a > 0.0 {
                assert_relative_eq!(b / a, 4.0, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn peak_sits_at_phase_matching_center() {
        // Published medium at a reduced length, coarse band: the low-gain
        // spectrum peaks at ω_s0 = 0.7 on the signal side.
        let m = paper_medium();
        let p = PumpPulse::new(2400.0, 1.0);
        let poling = solve_poling(&p, &m, 0.7);
        let nl = PoledNonlinearity::new(1.0, poling, 3e3 * 2.0 * std::f64::consts::PI);
        let params = GridParams {
            // Fine z: the aliased non-phase-matched kernel components add
            // pointwise jitter ∝ 1/Nz that would blur the peak position.
            nodes_per_period: 96,
            side_lobes: 1,
            pump_nodes: 48,
            padding_decay_lengths: 5.0,
            compressed_nodes: 8,
            phase_cap: 0.5,
            band: BandResolution {
                // Uniform in-band spacing: a fine core inside coarse wings
                // would imprint the ν-weight step onto the spectrum shape.
                fine_spacing: Some(0.008),
                core_halfwidth: Some(0.2),
                coarse_spacing: Some(0.02),
                single_band: false,
            },
        };
        let grids = SimulationGrids::build(&m, &p, &nl, &params).unwrap();
        let sig = perturbative_spectrum(&grids, &m, &p, &nl, nl.half_length());
        // Peak over the signal band.
        let signal = grids.axes.signal_indices();
        let (jmax, _) = signal
            .iter()
            .map(|&j| (j, sig[j]))
            .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
            .unwrap();
        let w_peak = grids.axes.omega.node(jmax);
        assert!(
            (w_peak - 0.7).abs() <= 0.008 + 1e-12,
            "signal peak at {w_peak}, expected 0.7"
        );
    }

    #[test]
    fn lobe_width_scales_inversely_with_length() {
        // FWHM of the main lobe follows the ~1/L sinc law within 10% over a
        // factor-4 length sweep. Nearly lossless analyte so the lobe is a
        // clean sinc with no absorption dip.
        let m = mini_medium(1e-6, 0.03);
        // Pump narrow enough that its bandwidth stays well under the
        // phase-matching bandwidth at the longest length.
        let p = PumpPulse::new(600.0, 1.0);
        let poling = solve_poling(&p, &m, 0.7);
        let period = 2.0 * std::f64::consts::PI / poling;
        // Longer regions keep the band narrow enough that the group-slope
        // difference is nearly constant across it (the sinc regime).
        let widths: Vec<f64> = [16.0, 32.0, 64.0]
            .iter()
            .map(|&periods| {
                let nl = PoledNonlinearity::new(0.8, poling, periods * period);
                let params = GridParams {
                    nodes_per_period: 12,
                    side_lobes: 1,
                    pump_nodes: 33,
                    padding_decay_lengths: 5.0,
                    compressed_nodes: 8,
                    phase_cap: 0.5,
                    band: BandResolution {
                        fine_spacing: None,
                        core_halfwidth: None,
                        coarse_spacing: None,
                        single_band: false,
                    },
                };
                let grids = SimulationGrids::build(&m, &p, &nl, &params).unwrap();
                let sig = perturbative_spectrum(&grids, &m, &p, &nl, nl.half_length());
                let idx = grids.axes.signal_indices();
                let nodes: Vec<f64> = idx.iter().map(|&j| grids.axes.omega.node(j)).collect();
                let vals: Vec<f64> = idx.iter().map(|&j| sig[j]).collect();
                fwhm(&nodes, &vals).unwrap()
            })
            .collect();
        assert_relative_eq!(widths[0] / widths[1], 2.0, max_relative = 0.1);
        assert_relative_eq!(widths[1] / widths[2], 2.0, max_relative = 0.1);
    }
}
