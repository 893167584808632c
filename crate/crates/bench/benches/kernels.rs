use std::hint::black_box;
use std::time::Duration;

use criterion::{criterion_group, criterion_main, Criterion};
use ptwigner_core::hamiltonian::{assemble, potential_element_closed, PotentialSpec};
use ptwigner_core::spectrum::{eigendecompose, spectrum_at};
use ptwigner_core::wigner::{flow_field, wigner_from_coeffs, JpConfig, PhaseGrid};

fn matrix(c: &mut Criterion) {
    let mut g = c.benchmark_group("matrix");
    g.sample_size(10).measurement_time(Duration::from_secs(5));
    g.bench_function("element_closed_40_57", |b| {
        b.iter(|| potential_element_closed(black_box(40), black_box(57), 1.5))
    });
    g.bench_function("assemble_71", |b| b.iter(|| assemble(black_box(1.5), 71).unwrap()));
    let m = assemble(1.5, 71).unwrap();
    g.bench_function("eigendecompose_71", |b| b.iter(|| eigendecompose(black_box(&m)).unwrap()));
    g.finish();
}

fn phase_space(c: &mut Criterion) {
    let mut g = c.benchmark_group("phase_space");
    g.sample_size(10).measurement_time(Duration::from_secs(10));
    let s = spectrum_at(1.5, 71).unwrap();
    let state = &s.pairs[1];
    let grid = PhaseGrid::square(5.0, 101).unwrap();
    g.bench_function("wigner_grid_101", |b| {
        b.iter(|| wigner_from_coeffs(&state.coeffs, state.value, black_box(&grid)).unwrap())
    });
    let small = PhaseGrid::square(5.0, 41).unwrap();
    let w = wigner_from_coeffs(&state.coeffs, state.value, &small).unwrap();
    let potential = PotentialSpec::new(1.5).unwrap();
    g.bench_function("flow_field_41", |b| {
        b.iter(|| flow_field(black_box(&w), &state.coeffs, &potential, JpConfig::default()).unwrap())
    });
    g.finish();
}

criterion_group!(benches, matrix, phase_space);
criterion_main!(benches);
