//! Grids and quadrature weights for every axis the solver touches.
//!
//! Frequencies live on two mirror-symmetric bands around the phase-matched
//! signal and idler centers (ω_s0 + ω_i0 = ω_p0 exactly, node for node), with
//! a fine core resolving the analyte linewidth and coarser wings resolving
//! the phase-matching lobes. The excitation position axis ξ is the nonlinear
//! region plus compressed padding generated by the double-exponential map
//! ξ = sinh((π/2)·sinh θ).

use crate::error::Error;
use crate::excitation::{phase_matching_offset, PoledNonlinearity, PumpPulse};
use crate::medium::MediumModel;

const FRAC_PI_2: f64 = std::f64::consts::FRAC_PI_2;

/// Ordered sample points with quadrature weights.
///
/// Weights are trapezoidal per contiguous segment; gaps between segments
/// carry no weight, so integrating over a two-band axis integrates over the
/// union of the bands.
#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl Axis {
    /// Uniform trapezoid axis on [a, b] with n ≥ 2 nodes.
    pub fn uniform(a: f64, b: f64, n: usize) -> Self {
        assert!(n >= 2 && b > a);
        let h = (b - a) / (n - 1) as f64;
        let nodes: Vec<f64> = (0..n).map(|i| a + i as f64 * h).collect();
        Self::from_segments(std::slice::from_ref(&nodes))
    }

    /// Trapezoid weights for explicit (possibly non-uniform) nodes, one
    /// contiguous segment per entry.
    pub fn from_segments(segments: &[Vec<f64>]) -> Self {
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        for seg in segments {
            assert!(seg.len() >= 2, "a segment needs at least two nodes");
            for w in seg.windows(2) {
                assert!(w[1] > w[0], "nodes must be strictly increasing");
            }
            if let Some(&last) = nodes.last() {
                assert!(seg[0] > last, "segments must be ordered and disjoint");
            }
            let n = seg.len();
            for i in 0..n {
                let left = if i == 0 { seg[0] } else { seg[i - 1] };
                let right = if i == n - 1 { seg[n - 1] } else { seg[i + 1] };
                weights.push(0.5 * (right - left));
            }
            nodes.extend_from_slice(seg);
        }
        Self { nodes, weights }
    }

    /// Axis with externally supplied weights (double-exponential padding).
    pub fn from_parts(nodes: Vec<f64>, weights: Vec<f64>) -> Self {
        assert_eq!(nodes.len(), weights.len());
        for w in nodes.windows(2) {
            assert!(w[1] > w[0], "nodes must be strictly increasing");
        }
        assert!(weights.iter().all(|&w| w > 0.0), "weights must be positive");
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn node(&self, i: usize) -> f64 {
        self.nodes[i]
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn min(&self) -> f64 {
        self.nodes[0]
    }

    pub fn max(&self) -> f64 {
        *self.nodes.last().unwrap()
    }

    /// Index of the node closest to `x`.
    pub fn nearest(&self, x: f64) -> usize {
        let mut best = 0;
        let mut dist = f64::INFINITY;
        for (i, &n) in self.nodes.iter().enumerate() {
            let d = (n - x).abs();
            if d < dist {
                dist = d;
                best = i;
            }
        }
        best
    }
}

/// Resolution of the observable/excitation bands. `None` fields are derived
/// from the analyte linewidth and the phase-matching lobe width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandResolution {
    /// Node spacing inside the fine core around each band center.
    pub fine_spacing: Option<f64>,
    /// Half-width of the fine core.
    pub core_halfwidth: Option<f64>,
    /// Node spacing in the lobe wings.
    pub coarse_spacing: Option<f64>,
    /// Build one contiguous band instead of erroring when the two bands
    /// collide (the explicit escape hatch for near-degenerate operation).
    pub single_band: bool,
}

impl Default for BandResolution {
    fn default() -> Self {
        Self {
            fine_spacing: None,
            core_halfwidth: None,
            coarse_spacing: None,
            single_band: false,
        }
    }
}

/// The four frequency axes plus the band geometry they were built from.
#[derive(Debug, Clone)]
pub struct FrequencyAxes {
    pub omega: Axis,
    pub nu: Axis,
    pub omega_p: Axis,
    pub omega_bar: Axis,
    pub signal_center: f64,
    pub idler_center: f64,
    /// Band half-width W = side_lobes·2π/(|k′(ω_s0) − k′(ω_i0)|·L).
    pub half_width: f64,
    /// First zero of the phase-matching sinc, 2π/(|Δk′|·L).
    pub lobe_width: f64,
}

impl FrequencyAxes {
    /// Indices of omega nodes inside the signal band.
    pub fn signal_indices(&self) -> Vec<usize> {
        self.band_indices(self.signal_center)
    }

    pub fn idler_indices(&self) -> Vec<usize> {
        self.band_indices(self.idler_center)
    }

    fn band_indices(&self, center: f64) -> Vec<usize> {
        self.omega
            .nodes()
            .iter()
            .enumerate()
            .filter(|(_, &w)| (w - center).abs() <= self.half_width + 1e-12)
            .map(|(i, _)| i)
            .collect()
    }
}

/// d Re k / dω by central difference.
fn group_slope(medium: &MediumModel, omega: f64) -> f64 {
    let h = 1e-6 * omega.max(1e-3);
    (medium.wavenumber(omega + h).re - medium.wavenumber(omega - h).re) / (2.0 * h)
}

/// Symmetric offset ladder for one band: fine core then coarse wings,
/// always ending exactly at ±W.
fn band_offsets(w: f64, core: f64, fine: f64, coarse: f64) -> Vec<f64> {
    let mut half = vec![0.0];
    let core = core.min(w);
    let n_fine = (core / fine).round().max(1.0) as usize;
    let fine_h = core / n_fine as f64;
    for i in 1..=n_fine {
        half.push(fine_h * i as f64);
    }
    if core < w {
        let n_coarse = ((w - core) / coarse).ceil().max(1.0) as usize;
        let coarse_h = (w - core) / n_coarse as f64;
        for i in 1..=n_coarse {
            half.push(core + coarse_h * i as f64);
        }
    }
    let mut all: Vec<f64> = half.iter().skip(1).map(|x| -x).rev().collect();
    all.extend_from_slice(&half);
    all
}

/// Observable, excitation, pump, and internal kernel axes per the two-band
/// layout. Signal and idler bands are exact mirrors through ω_p0/2; colliding
/// bands are an error unless `single_band` is set.
pub fn build_frequency_axes(
    pump: &PumpPulse,
    medium: &MediumModel,
    nonlinearity: &PoledNonlinearity,
    side_lobes: usize,
    pump_nodes: usize,
    res: &BandResolution,
) -> Result<FrequencyAxes, Error> {
    assert!(side_lobes >= 1, "side_lobes must be ≥ 1");
    let wp = pump.central_freq;
    let (ws0, wi0) = phase_matching_offset(pump, medium, nonlinearity.poling)?;
    let dk = (group_slope(medium, ws0) - group_slope(medium, wi0)).abs();
    let lobe = (2.0 * std::f64::consts::PI / (dk * nonlinearity.length)).min(0.5 * wp);
    let w = (side_lobes as f64 * lobe).min(0.5 * wp);

    let gamma = medium.analyte.linewidth;
    let fine = res
        .fine_spacing
        .unwrap_or((gamma / 6.0).min(w / 8.0))
        .max(w / 2000.0);
    let core = res
        .core_halfwidth
        .unwrap_or((4.0 * gamma).max(0.55 * w))
        .min(w);
    let coarse = res.coarse_spacing.unwrap_or(lobe / 10.0).max(fine);

    let collide = wi0 + w >= ws0 - w;
    if collide && !res.single_band {
        return Err(Error::BandCollision {
            s_lo: ws0 - w,
            s_hi: ws0 + w,
            i_lo: wi0 - w,
            i_hi: wi0 + w,
        });
    }

    let omega = if collide {
        // One contiguous band, mirror-symmetric about ω_p0/2.
        let reach = ws0 + w - 0.5 * wp;
        let upper: Vec<f64> = band_offsets(reach, reach, fine, coarse)
            .into_iter()
            .map(|o| 0.5 * wp + o)
            .filter(|&x| x >= 0.0)
            .collect();
        Axis::from_segments(std::slice::from_ref(&upper))
    } else {
        let offs = band_offsets(w, core, fine, coarse);
        let signal: Vec<f64> = offs.iter().map(|o| ws0 + o).collect();
        // Exact mirrors: ω_i = ω_p0 − ω_s, reversed to stay increasing.
        let idler: Vec<f64> = signal.iter().rev().map(|&s| wp - s).filter(|&x| x >= 0.0).collect();
        Axis::from_segments(&[idler, signal])
    };

    // Pump axis: ±4/τ_p around ω_p0. The default 33 nodes put the trapezoid
    // rule on the Gaussian well below the 1e-6 Parseval gate; the time-domain
    // solver asks for more so its discrete pump comb outruns the time window.
    let span = 4.0 / pump.temporal_width;
    let lo = (wp - span).max(0.0);
    let omega_p = Axis::uniform(lo, wp + span, pump_nodes.max(9));

    Ok(FrequencyAxes {
        nu: omega.clone(),
        omega_bar: omega.clone(),
        omega,
        omega_p,
        signal_center: ws0,
        idler_center: wi0,
        half_width: w,
        lobe_width: lobe,
    })
}

/// Axis over the nonlinear region, `nodes_per_period` nodes per poling
/// period with a floor of 24 nodes total.
///
/// Interior nodes carry a deterministic golden-ratio sub-cell jitter
/// (±20% of the cell). On a strictly periodic lattice the non-phase-matched
/// kernel oscillations alias coherently whenever some combination phase
/// q·δz approaches a multiple of 2π, producing order-unity spurious spikes
/// at isolated frequencies; the aperiodic pattern breaks every such
/// resonance while the slow phase-matched components are unaffected.
pub fn build_z_axis(nonlinearity: &PoledNonlinearity, nodes_per_period: usize) -> Axis {
    let periods = nonlinearity.length / nonlinearity.poling_period();
    let n = ((nodes_per_period as f64 * periods).round() as usize).max(24) + 1;
    let half = nonlinearity.half_length();
    let h = 2.0 * half / (n - 1) as f64;
    let nodes: Vec<f64> = (0..n)
        .map(|m| {
            if m == 0 || m == n - 1 {
                -half + m as f64 * h
            } else {
                let jit = 0.4 * (splitmix(m as u64) - 0.5);
                -half + (m as f64 + jit) * h
            }
        })
        .collect();
    Axis::from_segments(std::slice::from_ref(&nodes))
}

/// Deterministic white sequence in [0, 1) (splitmix64 finalizer).
fn splitmix(i: u64) -> f64 {
    let mut x = i.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^= x >> 31;
    (x >> 11) as f64 / (1u64 << 53) as f64
}

/// ξ axis build product: the axis, the index range coinciding with the z
/// axis, and any padding warnings.
#[derive(Debug, Clone)]
pub struct XiAxis {
    pub axis: Axis,
    /// Indices of the ξ nodes that coincide with the z axis.
    pub inner: std::ops::Range<usize>,
    pub warnings: Vec<String>,
}

/// z nodes inside the region plus double-exponential compressed padding out
/// to `padding_decay_lengths · max_ν l_d(ν)` on each side (hard-capped at
/// 50·L when the decay length diverges or exceeds the cap).
pub fn build_xi_axis(
    medium: &MediumModel,
    nonlinearity: &PoledNonlinearity,
    nu: &Axis,
    z: &Axis,
    padding_decay_lengths: f64,
    compressed_nodes: usize,
) -> XiAxis {
    assert!(padding_decay_lengths >= 5.0, "padding must be ≥ 5 decay lengths");
    assert!(compressed_nodes >= 2);
    let mut warnings = Vec::new();

    let mut max_ld: f64 = 0.0;
    let mut diverged = false;
    for &v in nu.nodes() {
        match medium.decay_length(v) {
            Ok(ld) => max_ld = max_ld.max(ld),
            Err(_) => diverged = true,
        }
    }
    let cap = 50.0 * nonlinearity.length;
    let mut extent = padding_decay_lengths * max_ld;
    if diverged {
        warnings.push(format!(
            "decay length diverges on the ν axis; padding capped at 50·L = {cap:.3e}"
        ));
        extent = cap;
    } else if extent > cap {
        warnings.push(format!(
            "padding of {extent:.3e} exceeds 50·L; capped at {cap:.3e}"
        ));
        extent = cap;
    }

    // Double-exponential map for the padding: ξ = edge ± s·sinh((π/2)·sinh θ),
    // θ uniform on (0, θ_max]. The scale s is the shortest decay length on
    // the band, so nodes cluster where excitations still reach the region;
    // θ_max is then fixed by requiring the outermost node at the extent.
    let mut min_ld = f64::INFINITY;
    for &v in nu.nodes() {
        if let Ok(ld) = medium.decay_length(v) {
            min_ld = min_ld.min(ld);
        }
    }
    let scale = if min_ld.is_finite() {
        min_ld.min(extent / padding_decay_lengths)
    } else {
        extent / padding_decay_lengths
    };
    let theta_max = ((2.0 / std::f64::consts::PI) * (extent / scale).asinh()).asinh();
    let n = compressed_nodes;
    let dtheta = theta_max / n as f64;
    let mut pad_nodes = Vec::with_capacity(n);
    let mut pad_weights = Vec::with_capacity(n);
    for j in 1..=n {
        let th = j as f64 * dtheta;
        let inner = FRAC_PI_2 * th.sinh();
        pad_nodes.push(scale * inner.sinh());
        let jac = scale * FRAC_PI_2 * th.cosh() * inner.cosh();
        let wt = if j == n { 0.5 * dtheta } else { dtheta };
        pad_weights.push(wt * jac);
    }
    // Half-weight of the θ = 0 endpoint belongs to the shared edge node.
    let edge_extra = 0.5 * dtheta * scale * FRAC_PI_2;

    let edge = nonlinearity.half_length();
    let nz = z.len();
    let mut nodes = Vec::with_capacity(nz + 2 * n);
    let mut weights = Vec::with_capacity(nz + 2 * n);
    for j in (0..n).rev() {
        nodes.push(-edge - pad_nodes[j]);
        weights.push(pad_weights[j]);
    }
    for i in 0..nz {
        nodes.push(z.node(i));
        let mut wt = z.weight(i);
        if i == 0 || i == nz - 1 {
            wt += edge_extra;
        }
        weights.push(wt);
    }
    for j in 0..n {
        nodes.push(edge + pad_nodes[j]);
        weights.push(pad_weights[j]);
    }

    XiAxis {
        axis: Axis::from_parts(nodes, weights),
        inner: n..n + nz,
        warnings,
    }
}

/// Time window and step: `T = L·Re √ε(ω_p0) + 6τ_p`, step set by the fastest
/// kernel/source phase on the grid, `Δt = phase_cap / max(|ω−ω̄|, |ω_p−ω−ν|)`.
pub fn build_time_axis(
    pump: &PumpPulse,
    nonlinearity: &PoledNonlinearity,
    medium: &MediumModel,
    axes: &FrequencyAxes,
    phase_cap: f64,
) -> (f64, f64) {
    assert!(
        phase_cap > 0.0 && phase_cap <= 0.5,
        "phase_cap must lie in (0, 0.5]"
    );
    let t_end = nonlinearity.length * medium.refractive_index(pump.central_freq).re
        + 6.0 * pump.temporal_width;
    let w_lo = axes.omega.min();
    let w_hi = axes.omega.max();
    let kernel_rate = w_hi - w_lo;
    let p_lo = axes.omega_p.min();
    let p_hi = axes.omega_p.max();
    let source_rate = (2.0 * w_hi - p_lo).abs().max((2.0 * w_lo - p_hi).abs());
    let dt = phase_cap / kernel_rate.max(source_rate);
    (dt, t_end)
}

/// Everything the kernel assembly and the solvers need.
#[derive(Debug, Clone)]
pub struct SimulationGrids {
    pub axes: FrequencyAxes,
    pub z: Axis,
    pub xi: XiAxis,
    pub dt: f64,
    /// Time window is [−t_end, +t_end].
    pub t_end: f64,
    pub warnings: Vec<String>,
}

/// Knobs for `SimulationGrids::build`.
#[derive(Debug, Clone)]
pub struct GridParams {
    pub nodes_per_period: usize,
    pub side_lobes: usize,
    pub pump_nodes: usize,
    pub padding_decay_lengths: f64,
    pub compressed_nodes: usize,
    pub phase_cap: f64,
    pub band: BandResolution,
}

impl Default for GridParams {
    fn default() -> Self {
        Self {
            nodes_per_period: 40,
            side_lobes: 1,
            pump_nodes: 33,
            padding_decay_lengths: 5.0,
            compressed_nodes: 40,
            phase_cap: 0.5,
            band: BandResolution::default(),
        }
    }
}

impl SimulationGrids {
    pub fn build(
        medium: &MediumModel,
        pump: &PumpPulse,
        nonlinearity: &PoledNonlinearity,
        params: &GridParams,
    ) -> Result<Self, Error> {
        let z = build_z_axis(nonlinearity, params.nodes_per_period);
        Self::build_with_z(medium, pump, nonlinearity, params, z)
    }

    /// Build with an explicit z axis (toy grids below the production node
    /// floor).
    pub fn build_with_z(
        medium: &MediumModel,
        pump: &PumpPulse,
        nonlinearity: &PoledNonlinearity,
        params: &GridParams,
        z: Axis,
    ) -> Result<Self, Error> {
        // The discrete pump comb must stay faithful across the whole time
        // window: node spacing h needs h·T ≤ π.
        let t_est = nonlinearity.length * medium.refractive_index(pump.central_freq).re
            + 6.0 * pump.temporal_width;
        let span = 8.0 / pump.temporal_width;
        let auto_pump = (span * t_est / std::f64::consts::PI).ceil() as usize + 9;
        let axes = build_frequency_axes(
            pump,
            medium,
            nonlinearity,
            params.side_lobes,
            params.pump_nodes.max(auto_pump),
            &params.band,
        )?;
        let xi = build_xi_axis(
            medium,
            nonlinearity,
            &axes.nu,
            &z,
            params.padding_decay_lengths,
            params.compressed_nodes,
        );
        let (dt, t_end) = build_time_axis(pump, nonlinearity, medium, &axes, params.phase_cap);
        let warnings = xi.warnings.clone();
        Ok(Self {
            axes,
            z,
            xi,
            dt,
            t_end,
            warnings,
        })
    }

    /// Number of fixed steps covering [−T, T].
    pub fn step_count(&self) -> usize {
        (2.0 * self.t_end / self.dt).ceil() as usize
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::excitation::solve_poling;
    use crate::medium::presets::{mini_medium, paper_medium};
    use approx::assert_relative_eq;

    fn paper_setup() -> (MediumModel, PumpPulse, PoledNonlinearity) {
        let m = paper_medium();
        let p = PumpPulse::new(2400.0, 1.0);
        let poling = solve_poling(&p, &m, 0.7);
        // Desk-scale length: 3×10³ pump wavelengths.
        let nl = PoledNonlinearity::new(1.0, poling, 3e3 * 2.0 * std::f64::consts::PI);
        (m, p, nl)
    }

    #[test]
    fn axis_weights_sum_to_extent() {
        let a = Axis::uniform(-2.0, 3.0, 17);
        let total: f64 = a.weights().iter().sum();
        assert_relative_eq!(total, 5.0, max_relative = 1e-14);
    }

    #[test]
    fn two_band_axis_masses_bands_only() {
        let a = Axis::from_segments(&[vec![0.1, 0.2, 0.3], vec![0.7, 0.8, 0.9]]);
        let total: f64 = a.weights().iter().sum();
        assert_relative_eq!(total, 0.4, max_relative = 1e-14);
    }

    #[test]
    fn paper_bands_are_disjoint_and_mirrored() {
        let (m, p, nl) = paper_setup();
        let axes = build_frequency_axes(&p, &m, &nl, 1, 33, &BandResolution::default()).unwrap();
        assert!((axes.signal_center - 0.7).abs() < 1e-6);
        assert!((axes.idler_center - 0.3).abs() < 1e-6);
        let s = axes.signal_indices();
        let i = axes.idler_indices();
        assert!(!s.is_empty() && !i.is_empty());
        assert_eq!(s.len() + i.len(), axes.omega.len());
        // Exact mirror node pairing about ω_p0/2.
        let nodes = axes.omega.nodes();
        for (a, b) in i.iter().zip(s.iter().rev()) {
            assert_relative_eq!(nodes[*a] + nodes[*b], 1.0, max_relative = 1e-13);
        }
        // All nodes non-negative.
        assert!(nodes.iter().all(|&x| x >= 0.0));
        // nu and omega_bar share the omega axis.
        assert_eq!(axes.nu, axes.omega);
        assert_eq!(axes.omega_bar, axes.omega);
    }

    #[test]
    fn degenerate_target_collides() {
        let (m, p, _) = paper_setup();
        let poling = solve_poling(&p, &m, 0.500001);
        let nl = PoledNonlinearity::new(1.0, poling, 3e3 * 2.0 * std::f64::consts::PI);
        match build_frequency_axes(&p, &m, &nl, 1, 33, &BandResolution::default()) {
            Err(Error::BandCollision { .. }) => {}
            other => panic!("expected BandCollision, got {other:?}"),
        }
        // The explicit single-band escape hatch builds one contiguous band.
        let res = BandResolution {
            single_band: true,
            ..Default::default()
        };
        let axes = build_frequency_axes(&p, &m, &nl, 1, 33, &res).unwrap();
        assert!(axes.omega.len() > 4);
    }

    #[test]
    fn pump_parseval_gate() {
        // Trapezoid over the pump axis vs the analytic Gaussian integral.
        let (m, p, nl) = paper_setup();
        let axes = build_frequency_axes(&p, &m, &nl, 1, 33, &BandResolution::default()).unwrap();
        let t = p.temporal_width;
        let mut num = 0.0;
        for (&w, &wp) in axes.omega_p.weights().iter().zip(axes.omega_p.nodes()) {
            num += w * (-2.0 * t * t * (1.0 - wp) * (1.0 - wp)).exp();
        }
        let exact = (std::f64::consts::PI / 2.0).sqrt() / t;
        assert_relative_eq!(num, exact, max_relative = 1e-6);
    }

    #[test]
    fn xi_axis_contains_z_and_is_symmetric() {
        let m = mini_medium(1e-3, 0.03);
        let p = PumpPulse::new(100.0, 1.0);
        let poling = solve_poling(&p, &m, 0.7);
        let nl = PoledNonlinearity::new(1.0, poling, 5.0 * 2.0 * std::f64::consts::PI / poling);
        let z = build_z_axis(&nl, 12);
        // Strongly lossy ν range keeps the padding well under the 50·L cap.
        let nu = Axis::uniform(0.27, 0.33, 13);
        let xi = build_xi_axis(&m, &nl, &nu, &z, 5.0, 24);
        // Node-for-node coincidence with the z axis inside the region.
        let inner = &xi.axis.nodes()[xi.inner.clone()];
        assert_eq!(inner.len(), z.len());
        for (a, b) in inner.iter().zip(z.nodes()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        // Padding symmetric about the region center, weights positive.
        let n = xi.axis.len();
        for j in 0..xi.inner.start {
            assert_relative_eq!(
                -xi.axis.node(j),
                xi.axis.node(n - 1 - j),
                max_relative = 1e-13
            );
            assert_relative_eq!(
                xi.axis.weight(j),
                xi.axis.weight(n - 1 - j),
                max_relative = 1e-13
            );
        }
        assert!(xi.axis.weights().iter().all(|&w| w > 0.0));
        assert!(xi.warnings.is_empty());
    }

    #[test]
    fn xi_padding_shrinks_with_stronger_loss() {
        let p = PumpPulse::new(100.0, 1.0);
        let weak = mini_medium(3e-3, 0.03);
        let strong = mini_medium(3e-2, 0.03);
        let poling = solve_poling(&p, &weak, 0.7);
        let nl = PoledNonlinearity::new(1.0, poling, 5.0 * 2.0 * std::f64::consts::PI / poling);
        let z = build_z_axis(&nl, 12);
        let nu = Axis::uniform(0.28, 0.32, 9);
        let a = build_xi_axis(&weak, &nl, &nu, &z, 5.0, 24);
        let b = build_xi_axis(&strong, &nl, &nu, &z, 5.0, 24);
        assert!(b.axis.max() < a.axis.max());
    }

    #[test]
    fn xi_padding_capped_for_lossless() {
        // Near-lossless medium: the decay length diverges past the 50·L cap.
        let m = paper_medium().without_analyte();
        let p = PumpPulse::new(2400.0, 1.0);
        let poling = solve_poling(&p, &m, 0.7);
        let nl = PoledNonlinearity::new(1.0, poling, 3e3 * 2.0 * std::f64::consts::PI);
        let axes = build_frequency_axes(&p, &m, &nl, 1, 33, &BandResolution::default()).unwrap();
        let z = build_z_axis(&nl, 24);
        let xi = build_xi_axis(&m, &nl, &axes.nu, &z, 5.0, 24);
        assert!(!xi.warnings.is_empty());
        let cap = 50.0 * nl.length;
        assert!(xi.axis.max() <= nl.half_length() + cap * 1.0000001);
    }

    #[test]
    fn time_axis_scalings() {
        let (m, p, nl) = paper_setup();
        let axes = build_frequency_axes(&p, &m, &nl, 1, 33, &BandResolution::default()).unwrap();
        let (dt, t_end) = build_time_axis(&p, &nl, &m, &axes, 0.1);
        assert!(dt > 0.0 && t_end > 0.0);
        // Doubling τ_p grows T by 6·τ_p.
        let p2 = PumpPulse::new(2.0 * p.temporal_width, 1.0);
        let axes2 = build_frequency_axes(&p2, &m, &nl, 1, 33, &BandResolution::default()).unwrap();
        let (_, t2) = build_time_axis(&p2, &nl, &m, &axes2, 0.1);
        assert_relative_eq!(t2 - t_end, 6.0 * p.temporal_width, max_relative = 1e-10);
        // A longer region narrows the bands, so the step can grow.
        let nl_long = PoledNonlinearity::new(1.0, nl.poling, 2.0 * nl.length);
        let axes3 = build_frequency_axes(&p, &m, &nl_long, 1, 33, &BandResolution::default()).unwrap();
        let (dt3, _) = build_time_axis(&p, &nl_long, &m, &axes3, 0.1);
        assert!(dt3 > dt);
    }

    #[test]
    fn z_axis_resolves_poling() {
        let (_, _, nl) = paper_setup();
        let z = build_z_axis(&nl, 40);
        let mean_spacing = (z.max() - z.min()) / (z.len() - 1) as f64;
        let per_period = nl.poling_period() / mean_spacing;
        assert!(per_period >= 39.0);
        assert!(z.len() >= 24);
        assert_relative_eq!(z.min(), -nl.half_length(), max_relative = 1e-12);
        assert_relative_eq!(z.max(), nl.half_length(), max_relative = 1e-12);
    }
}
