use std::f64::consts::PI;

use floquet_core::*;
use num_complex::Complex64;
use proptest::prelude::*;

fn free_spec() -> PotentialSpec {
    PotentialSpec { bulk: Bulk::SquareWells { depth: 0.0, radius: 0.05 }, wall: DomainWallKind::Tanh, eps: 0.0 }
}

fn l2(dx: f64, psi: &[Complex64]) -> f64 {
    (dx * psi.iter().map(|z| z.norm_sqr()).sum::<f64>()).sqrt()
}

fn gaussian(grid: &GridSpec, x0: f64, width: f64, k: f64) -> Vec<Complex64> {
    let mut psi: Vec<Complex64> = (0..grid.len())
        .map(|j| {
            let x = grid.x(j);
            Complex64::from_polar((-(x - x0).powi(2) / (2.0 * width * width)).exp(), k * x)
        })
        .collect();
    let n = l2(grid.dx(), &psi);
    psi.iter_mut().for_each(|z| *z /= n);
    psi
}

fn run(stepper: &SchrodingerStepper, psi: &mut Vec<Complex64>, t0: f64, dt: f64, steps: usize) {
    for m in 0..steps {
        stepper.step(psi, t0 + m as f64 * dt, dt).unwrap();
    }
}

#[test]
fn plane_wave_step_is_scalar_cayley_factor() {
    let grid = GridSpec::new(2.0, 16, Boundary::Periodic).unwrap();
    let stepper = SchrodingerStepper::new(&free_spec(), &ForcingSpec::unforced(), &grid).unwrap();
    let n = grid.len();
    let m = 3.0;
    let psi0: Vec<Complex64> = (0..n).map(|j| Complex64::from_polar(1.0, 2.0 * PI * m * j as f64 / n as f64)).collect();
    let dx = grid.dx();
    let lam = (2.0 - 2.0 * (2.0 * PI * m / n as f64).cos()) / (dx * dx);
    let dt = 0.01;
    let factor = Complex64::new(1.0, -0.5 * lam * dt) / Complex64::new(1.0, 0.5 * lam * dt);
    assert!((factor.norm() - 1.0).abs() < 1e-15);
    let mut psi = psi0.clone();
    stepper.step(&mut psi, 0.0, dt).unwrap();
    for (a, b) in psi.iter().zip(&psi0) {
        assert!((a - factor * b).norm() < 1e-12);
    }
}

#[test]
fn discrete_eigenvector_is_stationary() {
    let spec = builtin_potential(1, 0.5).unwrap();
    let grid = GridSpec::new(20.0, 32, Boundary::Vanishing).unwrap();
    let h = assemble_dw_hamiltonian(&spec, &grid).unwrap();
    let e = h.tri.eigenvalue(40);
    let v = h.tri.inverse_iteration(e);
    let mut psi0: Vec<Complex64> = v.iter().map(|&r| Complex64::new(r, 0.0)).collect();
    let n = l2(grid.dx(), &psi0);
    psi0.iter_mut().for_each(|z| *z /= n);
    let opts = EvolveOptions::new(0.01, 5.0, 10);
    let tr = evolve_schrodinger(&spec, &ForcingSpec::unforced(), &grid, &psi0, Some(&psi0), &opts).unwrap();
    for p in tr.abs_projection().unwrap() {
        assert!((p - 1.0).abs() < 1e-10, "{p}");
    }
}

#[test]
fn norm_drift_over_1e5_forced_steps() {
    let spec = builtin_potential(1, 0.5).unwrap();
    let grid = GridSpec::new(4.0, 16, Boundary::Vanishing).unwrap();
    let forcing = ForcingSpec::new(0.3, 0.6).unwrap();
    let psi0 = gaussian(&grid, 0.0, 1.0, 3.0);
    let opts = EvolveOptions::new(0.01, 1000.0, 1000);
    let tr = evolve_schrodinger(&spec, &forcing, &grid, &psi0, None, &opts).unwrap();
    assert_eq!(opts.steps(), 100_000);
    let drift = tr.norms.iter().map(|n| (n - tr.norms[0]).abs()).fold(0.0, f64::max) / tr.norms[0];
    assert!(drift <= 1e-8, "drift {drift}");
}

#[test]
fn periodic_forced_run_conserves_norm() {
    let spec = builtin_potential(2, 0.5).unwrap();
    let grid = GridSpec::new(4.0, 20, Boundary::Periodic).unwrap();
    let forcing = ForcingSpec::new(0.5, 1.1).unwrap();
    let psi0 = gaussian(&grid, 0.5, 0.7, -2.0);
    let tr = evolve_schrodinger(&spec, &forcing, &grid, &psi0, None, &EvolveOptions::new(0.01, 50.0, 100)).unwrap();
    for n in &tr.norms {
        assert!((n - 1.0).abs() < 1e-10);
    }
}

#[test]
fn unforced_forward_backward_returns_initial_state() {
    let spec = builtin_potential(1, 0.5).unwrap();
    let grid = GridSpec::new(10.0, 32, Boundary::Vanishing).unwrap();
    let stepper = SchrodingerStepper::new(&spec, &ForcingSpec::unforced(), &grid).unwrap();
    let psi0 = gaussian(&grid, 1.0, 1.5, 2.0);
    let mut psi = psi0.clone();
    let (dt, n) = (0.01, 2000);
    run(&stepper, &mut psi, 0.0, dt, n);
    run(&stepper, &mut psi, n as f64 * dt, -dt, n);
    let err: Vec<Complex64> = psi.iter().zip(&psi0).map(|(a, b)| a - b).collect();
    assert!(l2(grid.dx(), &err) <= 1e-6);
}

#[test]
fn forced_step_is_second_order_in_dt() {
    let spec = builtin_potential(1, 0.5).unwrap();
    let grid = GridSpec::new(4.0, 16, Boundary::Vanishing).unwrap();
    let forcing = ForcingSpec::new(2.0, 3.0).unwrap();
    let stepper = SchrodingerStepper::new(&spec, &forcing, &grid).unwrap();
    let psi0 = gaussian(&grid, 0.0, 1.0, 1.0);
    let t_end = 0.4;
    let solve = |dt: f64| {
        let mut psi = psi0.clone();
        run(&stepper, &mut psi, 0.0, dt, (t_end / dt).round() as usize);
        psi
    };
    let reference = solve(0.4 / 8192.0);
    let errs: Vec<f64> = [0.4 / 128.0, 0.4 / 256.0, 0.4 / 512.0]
        .iter()
        .map(|&dt| {
            let d: Vec<Complex64> = solve(dt).iter().zip(&reference).map(|(a, b)| a - b).collect();
            l2(grid.dx(), &d)
        })
        .collect();
    for w in errs.windows(2) {
        let ratio = w[0] / w[1];
        assert!((3.6..=4.4).contains(&ratio), "ratio {ratio}, errors {errs:?}");
    }
}

#[test]
fn orthogonal_eigenstates_stay_orthogonal_without_forcing() {
    let spec = builtin_potential(1, 0.5).unwrap();
    let grid = GridSpec::new(20.0, 32, Boundary::Vanishing).unwrap();
    let h = assemble_dw_hamiltonian(&spec, &grid).unwrap();
    let to_c = |v: Vec<f64>| -> Vec<Complex64> {
        let s = (grid.dx() * v.iter().map(|x| x * x).sum::<f64>()).sqrt();
        v.into_iter().map(|x| Complex64::new(x / s, 0.0)).collect()
    };
    let a = to_c(h.tri.inverse_iteration(h.tri.eigenvalue(10)));
    let b = to_c(h.tri.inverse_iteration(h.tri.eigenvalue(30)));
    let tr = evolve_schrodinger(&spec, &ForcingSpec::unforced(), &grid, &b, Some(&a), &EvolveOptions::new(0.01, 10.0, 10))
        .unwrap();
    for p in projection_series(&tr).unwrap() {
        assert!(p <= 1e-8);
    }
}

#[test]
fn coarse_dt_is_rejected_when_forced() {
    let spec = builtin_potential(1, 0.5).unwrap();
    let grid = GridSpec::new(4.0, 16, Boundary::Vanishing).unwrap();
    let psi0 = gaussian(&grid, 0.0, 1.0, 0.0);
    let forcing = ForcingSpec::new(0.01, 0.6).unwrap();
    let r = evolve_schrodinger(&spec, &forcing, &grid, &psi0, None, &EvolveOptions::new(0.5, 10.0, 1));
    assert!(matches!(r, Err(FloquetError::Config(_))));
    let r = evolve_schrodinger(&spec, &forcing, &grid, &psi0[1..], None, &EvolveOptions::new(0.01, 1.0, 1));
    assert!(matches!(r, Err(FloquetError::Dimension(_))));
}

#[test]
fn missing_projection_observer_is_a_config_error() {
    let spec = builtin_potential(1, 0.5).unwrap();
    let grid = GridSpec::new(4.0, 16, Boundary::Vanishing).unwrap();
    let psi0 = gaussian(&grid, 0.0, 1.0, 0.0);
    let tr = evolve_schrodinger(&spec, &ForcingSpec::unforced(), &grid, &psi0, None, &EvolveOptions::new(0.01, 1.0, 10))
        .unwrap();
    assert!(matches!(projection_series(&tr), Err(FloquetError::Config(_))));
}

#[test]
fn observer_cadence_and_snapshots() {
    let spec = builtin_potential(1, 0.5).unwrap();
    let grid = GridSpec::new(4.0, 16, Boundary::Vanishing).unwrap();
    let psi0 = gaussian(&grid, 0.0, 1.0, 0.0);
    let mut opts = EvolveOptions::new(0.01, 1.0, 10);
    opts.snapshot_times = vec![0.0, 0.5, 0.5, 1.0];
    let tr = evolve_schrodinger(&spec, &ForcingSpec::unforced(), &grid, &psi0, None, &opts).unwrap();
    assert_eq!(tr.times.len(), 11);
    assert!((tr.times[10] - 1.0).abs() < 1e-12);
    let ts: Vec<f64> = tr.snapshots.iter().map(|s| s.t).collect();
    assert_eq!(ts.len(), 3);
    assert!(tr.snapshots.iter().all(|s| s.abs.len() == grid.len()));
    assert_eq!(tr.x.len(), grid.len());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn single_steps_preserve_norm(beta in 0.0f64..2.0, t in 0.0f64..50.0, k in -5.0f64..5.0, periodic in any::<bool>()) {
        let spec = builtin_potential(1, 0.5).unwrap();
        let bc = if periodic { Boundary::Periodic } else { Boundary::Vanishing };
        let grid = GridSpec::new(3.0, 16, bc).unwrap();
        let stepper = SchrodingerStepper::new(&spec, &ForcingSpec::new(beta, 0.6).unwrap(), &grid).unwrap();
        let mut psi = gaussian(&grid, 0.3, 0.8, k);
        stepper.step(&mut psi, t, 0.05).unwrap();
        prop_assert!((l2(grid.dx(), &psi) - 1.0).abs() < 1e-12);
    }
}
