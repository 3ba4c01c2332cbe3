use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use floquet_core::dirac::DiracModel;
use floquet_core::linalg::Tridiagonal;
use floquet_core::*;
use num_complex::Complex64;

fn schrodinger_step(c: &mut Criterion) {
    let spec = builtin_potential(1, 0.5).unwrap();
    let grid = GridSpec::new(100.0, 64, Boundary::Vanishing).unwrap();
    let f = ForcingSpec::new(0.01, 0.6).unwrap();
    let stepper = SchrodingerStepper::new(&spec, &f, &grid).unwrap();
    let mut psi: Vec<Complex64> = grid.points().iter().map(|x| Complex64::new((-x * x / 50.0).exp(), 0.0)).collect();
    let mut t = 0.0;
    c.bench_function("cn_step_12800", |b| {
        b.iter(|| {
            stepper.step(&mut psi, t, 0.01).unwrap();
            t += 0.01;
        })
    });
}

fn dirac_step(c: &mut Criterion) {
    let grid = SlowGrid::covering(100.0, 0.05).unwrap();
    let op = assemble_dirac_operator(&DiracModel::normalized(), &grid).unwrap();
    let (zm, _) = dirac_zero_mode_numeric(&op).unwrap();
    let f = ForcingSpec::new(0.01, 0.6).unwrap();
    c.bench_function("dirac_evolve_100_steps_4001", |b| {
        b.iter(|| evolve_dirac(&op, &f, &zm, Some(&zm), &EvolveOptions::new(0.05, 5.0, 10)).unwrap())
    });
}

fn banded_solve(c: &mut Criterion) {
    let n = 20000;
    let lower = vec![Complex64::new(-1.0, 0.2); n - 1];
    let upper = vec![Complex64::new(-1.0, -0.2); n - 1];
    let diag: Vec<Complex64> = (0..n).map(|i| Complex64::new(4.0 + (i as f64).sin(), 0.5)).collect();
    let m = Tridiagonal::new(lower, diag, upper).unwrap();
    let rhs = vec![Complex64::new(1.0, 0.0); n];
    c.bench_function("thomas_solve_20000", |b| b.iter(|| m.solve_unpivoted(black_box(&rhs)).unwrap()));
}

fn bloch_eigen(c: &mut Criterion) {
    let spec = builtin_potential(2, 0.5).unwrap();
    c.bench_function("dirac_parameters_family2_80pts", |b| {
        b.iter(|| extract_dirac_parameters(black_box(&spec), 80).unwrap())
    });
}

criterion_group!(benches, schrodinger_step, dirac_step, banded_solve, bloch_eigen);
criterion_main!(benches);
