use criterion::{criterion_group, criterion_main, Criterion};

use spdc_core::evolve::{ExcitationBasis, FilteredSolver, RunOptions, Stepper};
use spdc_core::excitation::{solve_poling, PoledNonlinearity, PumpPulse};
use spdc_core::grid::{BandResolution, GridParams, SimulationGrids};
use spdc_core::kernels::{OmegaBarQuadrature, SweepScratch};
use spdc_core::medium::presets::mini_medium;
use spdc_core::C64;

fn bench_system() -> FilteredSolver {
    let m = mini_medium(5e-4, 0.04);
    let p = PumpPulse::new(100.0, 1e-3);
    let poling = solve_poling(&p, &m, 0.7);
    let nl = PoledNonlinearity::new(0.8, poling, 5.0 * 2.0 * std::f64::consts::PI / poling);
    let params = GridParams {
        nodes_per_period: 12,
        side_lobes: 1,
        pump_nodes: 33,
        padding_decay_lengths: 5.0,
        compressed_nodes: 24,
        phase_cap: 0.5,
        band: BandResolution {
            fine_spacing: Some(0.0066),
            core_halfwidth: Some(0.08),
            coarse_spacing: Some(0.016),
            single_band: false,
        },
    };
    let grids = SimulationGrids::build(&m, &p, &nl, &params).unwrap();
    let quad = OmegaBarQuadrature::auto(&m, &p, &nl);
    FilteredSolver::new(m, p, nl, grids, quad, 3000.0).unwrap()
}

fn kernel_drive(c: &mut Criterion) {
    let solver = bench_system();
    let nz = solver.grids.z.len();
    let nomega = solver.grids.axes.omega.len();
    let x: Vec<C64> = (0..nz * nomega)
        .map(|i| C64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()))
        .collect();
    let mut out = vec![C64::new(0.0, 0.0); nz];
    let mut scratch = SweepScratch::new(nz);
    c.bench_function("kernel_drive", |b| {
        b.iter(|| {
            solver
                .kernel
                .drive(&x, 3.0, false, true, &mut out, &mut scratch);
            std::hint::black_box(&out);
        })
    });
}

fn etd_step(c: &mut Criterion) {
    let solver = bench_system();
    let options = RunOptions {
        basis: ExcitationBasis::Eigen { tolerance: 1e-7 },
        stepper: Stepper::Etdrk4 { phase_cap: 0.45 },
        ..Default::default()
    };
    let mut state = solver.initial_state(&options).unwrap();
    state.t = -30.0;
    c.bench_function("etd_step", |b| {
        b.iter(|| {
            solver.step_etd(&mut state, 2.0).unwrap();
            state.t = -30.0;
        })
    });
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = kernel_drive, etd_step
}
criterion_main!(benches);
