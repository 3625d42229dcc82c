//! Time-domain formulation of the coupled system, for tiny grids only.
//!
//! Solves `∂_t A = S⁰ + ∫conj F·B`, `∂_t B = ∫F·A` per excitation column with
//! the static boundary tensor `b⁰` handled through the source term, exactly
//! as the decomposition `𝓑 = b⁰ + B` prescribes. Exists to validate the
//! filtered path: the discrete commutator functional must stay constant, and
//! the double-time-integral spectrum must match the filtered spectrum.

use crate::error::Error;
use crate::excitation::{PoledNonlinearity, PumpPulse};
use crate::greens::GreensFunction1D;
use crate::grid::SimulationGrids;
use crate::kernels::{field_index, TimeDomainKernel};
use crate::medium::MediumModel;
use crate::{C64, I};

/// One (ξ, ν) excitation column of the time-domain solver.
#[derive(Debug, Clone)]
pub struct TimeDomainColumn {
    pub xi: f64,
    pub nu: f64,
    /// Index of ν on the shared ω axis.
    pub nu_index: usize,
    pub weight: f64,
    /// Static boundary tensor b⁰(z, ω): the ω-delta carries 1/w_ω.
    pub b0: Vec<C64>,
    pub a: Vec<C64>,
    pub b: Vec<C64>,
}

/// State of every column at a common time.
#[derive(Debug, Clone)]
pub struct TimeDomainState {
    pub columns: Vec<TimeDomainColumn>,
    pub t: f64,
    pub nz: usize,
    pub nomega: usize,
    pub omega_nodes: Vec<f64>,
    pub omega_weights: Vec<f64>,
    pub z_nodes: Vec<f64>,
}

/// History of the A coefficient at one observation node, for the
/// double-time-integral spectrum.
pub struct History {
    pub times: Vec<f64>,
    /// `[step][col · nomega + j]`, A at the observation z node.
    pub rows: Vec<Vec<C64>>,
    pub z_index: usize,
}

pub struct TimeDomainSolver {
    pub medium: MediumModel,
    pub pump: PumpPulse,
    pub nonlinearity: PoledNonlinearity,
    pub grids: SimulationGrids,
    pub kernel: TimeDomainKernel,
}

impl TimeDomainSolver {
    pub fn new(
        medium: MediumModel,
        pump: PumpPulse,
        nonlinearity: PoledNonlinearity,
        grids: SimulationGrids,
    ) -> Self {
        let kernel = TimeDomainKernel::assemble(&grids, &medium, &nonlinearity);
        Self {
            medium,
            pump,
            nonlinearity,
            grids,
            kernel,
        }
    }

    /// Zero A, B and the static b⁰ per column at t = −T.
    pub fn initial_state(&self) -> TimeDomainState {
        let nz = self.grids.z.len();
        let omega = &self.grids.axes.omega;
        let nomega = omega.len();
        let nu = &self.grids.axes.nu;
        let xi = &self.grids.xi.axis;
        let gf = GreensFunction1D::new(self.medium);
        let zero = vec![C64::new(0.0, 0.0); nz * nomega];
        let mut columns = Vec::with_capacity(nu.len() * xi.len());
        for (iv, &v) in nu.nodes().iter().enumerate() {
            let eps_im = self.medium.permittivity(v).im().max(0.0);
            for q in 0..xi.len() {
                let xiq = xi.node(q);
                let mut b0 = zero.clone();
                // b⁰(z, ω) = i·ν²·√ε″(ξ,ν)·G(z, ξ, ν)·δ(ω−ν); the discrete
                // delta is 1/w_ω at the ν node.
                for m in 0..nz {
                    b0[field_index(nz, iv, m)] = I
                        * v
                        * v
                        * eps_im.sqrt()
                        * gf.evaluate(self.grids.z.node(m), xiq, v)
                        / omega.weight(iv);
                }
                columns.push(TimeDomainColumn {
                    xi: xiq,
                    nu: v,
                    nu_index: iv,
                    weight: nu.weight(iv) * xi.weight(q),
                    b0,
                    a: zero.clone(),
                    b: zero.clone(),
                });
            }
        }
        TimeDomainState {
            columns,
            t: -self.grids.t_end,
            nz,
            nomega,
            omega_nodes: omega.nodes().to_vec(),
            omega_weights: omega.weights().to_vec(),
            z_nodes: self.grids.z.nodes().to_vec(),
        }
    }

    fn derivative(
        &self,
        col: &TimeDomainColumn,
        a: &[C64],
        b: &[C64],
        t: f64,
        da: &mut [C64],
        db: &mut [C64],
        scratch: &mut [C64],
    ) {
        // ∂A = S⁰ + conj F ∘ B
        self.kernel.source_field(
            &self.grids,
            &self.pump,
            &self.medium,
            &self.nonlinearity,
            col.xi,
            col.nu,
            t,
            da,
        );
        self.kernel
            .apply(&self.grids, &self.pump, &self.medium, b, t, true, scratch);
        for i in 0..da.len() {
            da[i] += scratch[i];
        }
        // ∂B = F ∘ A
        self.kernel
            .apply(&self.grids, &self.pump, &self.medium, a, t, false, db);
    }

    /// Classical RK4 step for every column.
    pub fn step(&self, state: &mut TimeDomainState, dt: f64) -> Result<(), Error> {
        let t0 = state.t;
        let len = state.nz * state.nomega;
        let zero = vec![C64::new(0.0, 0.0); len];
        let mut scratch = zero.clone();
        let (mut k1a, mut k1b) = (zero.clone(), zero.clone());
        let (mut k2a, mut k2b) = (zero.clone(), zero.clone());
        let (mut k3a, mut k3b) = (zero.clone(), zero.clone());
        let (mut k4a, mut k4b) = (zero.clone(), zero.clone());
        let (mut ya, mut yb) = (zero.clone(), zero);
        for col in &mut state.columns {
            self.derivative(col, &col.a, &col.b, t0, &mut k1a, &mut k1b, &mut scratch);
            for i in 0..len {
                ya[i] = col.a[i] + 0.5 * dt * k1a[i];
                yb[i] = col.b[i] + 0.5 * dt * k1b[i];
            }
            self.derivative(col, &ya, &yb, t0 + 0.5 * dt, &mut k2a, &mut k2b, &mut scratch);
            for i in 0..len {
                ya[i] = col.a[i] + 0.5 * dt * k2a[i];
                yb[i] = col.b[i] + 0.5 * dt * k2b[i];
            }
            self.derivative(col, &ya, &yb, t0 + 0.5 * dt, &mut k3a, &mut k3b, &mut scratch);
            for i in 0..len {
                ya[i] = col.a[i] + dt * k3a[i];
                yb[i] = col.b[i] + dt * k3b[i];
            }
            self.derivative(col, &ya, &yb, t0 + dt, &mut k4a, &mut k4b, &mut scratch);
            for i in 0..len {
                col.a[i] += dt / 6.0 * (k1a[i] + 2.0 * (k2a[i] + k3a[i]) + k4a[i]);
                col.b[i] += dt / 6.0 * (k1b[i] + 2.0 * (k2b[i] + k3b[i]) + k4b[i]);
            }
        }
        state.t = t0 + dt;
        for col in &state.columns {
            if !col.a.iter().chain(&col.b).all(|v| v.re.is_finite() && v.im.is_finite()) {
                return Err(Error::NonFiniteState {
                    t: state.t,
                    step: 0,
                });
            }
        }
        Ok(())
    }

    /// Integrate the full window, recording the A row at `z0` each step.
    /// `budget_mb` bounds the history storage.
    pub fn run_with_history(
        &self,
        dt: f64,
        z0: f64,
        budget_mb: f64,
    ) -> Result<(TimeDomainState, History), Error> {
        let mut state = self.initial_state();
        let steps = (2.0 * self.grids.t_end / dt).ceil() as usize;
        let dt = 2.0 * self.grids.t_end / steps as f64;
        let n0 = {
            let mut best = 0;
            let mut d = f64::INFINITY;
            for (i, &z) in state.z_nodes.iter().enumerate() {
                if (z - z0).abs() < d {
                    d = (z - z0).abs();
                    best = i;
                }
            }
            best
        };
        let row_len = state.columns.len() * state.nomega;
        let hist_mb = ((steps + 1) * row_len * 16) as f64 / 1e6;
        if hist_mb > budget_mb {
            return Err(Error::OutOfBudget {
                what: "time-domain history",
                needed_mb: hist_mb,
                budget_mb,
            });
        }
        let mut history = History {
            times: Vec::with_capacity(steps + 1),
            rows: Vec::with_capacity(steps + 1),
            z_index: n0,
        };
        let record = |state: &TimeDomainState, history: &mut History| {
            let mut row = Vec::with_capacity(row_len);
            for col in &state.columns {
                for j in 0..state.nomega {
                    row.push(col.a[field_index(state.nz, j, n0)]);
                }
            }
            history.times.push(state.t);
            history.rows.push(row);
        };
        record(&state, &mut history);
        for _ in 0..steps {
            self.step(&mut state, dt)?;
            record(&state, &mut history);
        }
        Ok((state, history))
    }

    /// Discrete commutator functional
    /// `C(ω_j, ω_j′; z_n, z_n′) = Σ_Ξ w_Ξ·[𝓑𝓑′* − 𝓐*𝓐′]` with 𝓑 = b⁰ + B.
    pub fn commutator(
        &self,
        state: &TimeDomainState,
        n: usize,
        np: usize,
        j: usize,
        jp: usize,
    ) -> C64 {
        let nz = state.nz;
        let mut acc = C64::new(0.0, 0.0);
        for col in &state.columns {
            let bb = col.b0[field_index(nz, j, n)] + col.b[field_index(nz, j, n)];
            let bbp = col.b0[field_index(nz, jp, np)] + col.b[field_index(nz, jp, np)];
            let aa = col.a[field_index(nz, j, n)];
            let aap = col.a[field_index(nz, jp, np)];
            acc += col.weight * (bb * bbp.conj() - aa.conj() * aap);
        }
        acc
    }
}

/// Spectrum from the stored A history (the double time/frequency integral):
/// `σ(z₀, ω₀) = Σ_Ξ w_Ξ·|Σ_steps w_t Σ_j w_j·A(z₀,ω_j,Ξ;t)·e^{−i(ω₀−ω_j)t}|²`.
pub fn spectrum_from_history(
    history: &History,
    omega_nodes: &[f64],
    omega_weights: &[f64],
    col_weights: &[f64],
    omega0: f64,
) -> f64 {
    let nomega = omega_nodes.len();
    let nsteps = history.times.len();
    let ncols = col_weights.len();
    let mut g = vec![C64::new(0.0, 0.0); ncols];
    for (s, &t) in history.times.iter().enumerate() {
        // Trapezoid weight in time.
        let wt = if s == 0 {
            0.5 * (history.times[1] - history.times[0])
        } else if s == nsteps - 1 {
            0.5 * (history.times[s] - history.times[s - 1])
        } else {
            0.5 * (history.times[s + 1] - history.times[s - 1])
        };
        let row = &history.rows[s];
        for c in 0..ncols {
            let mut inner = C64::new(0.0, 0.0);
            for j in 0..nomega {
                inner += omega_weights[j]
                    * row[c * nomega + j]
                    * (-I * (omega0 - omega_nodes[j]) * t).exp();
            }
            g[c] += wt * inner;
        }
    }
    col_weights
        .iter()
        .zip(&g)
        .map(|(w, v)| w * v.norm_sqr())
        .sum()
}
