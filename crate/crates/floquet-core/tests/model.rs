use approx::assert_relative_eq;
use floquet_core::model::{default_half_length, default_points_per_period, ln_cosh, piecewise_step, q_plus_minus, theta};
use floquet_core::*;
use proptest::prelude::*;

#[test]
fn grid_layout() {
    let g = GridSpec::new(2.5, 8, Boundary::Vanishing).unwrap();
    assert_eq!(g.len(), 40);
    assert_eq!(g.origin(), 20);
    assert_eq!(g.x(20), 0.0);
    assert_eq!(g.x(0), -2.5);
    assert_eq!(g.x(28), 1.0);
}

#[test]
fn grid_validation() {
    assert!(matches!(GridSpec::new(10.0, 4, Boundary::Periodic), Err(FloquetError::Resolution(_))));
    assert!(matches!(GridSpec::new(10.01, 64, Boundary::Periodic), Err(FloquetError::Config(_))));
    assert!(GridSpec::new(-1.0, 64, Boundary::Periodic).is_err());
}

#[test]
fn family_defaults() {
    assert_eq!(default_points_per_period(1), 64);
    assert_eq!(default_points_per_period(2), 80);
    assert_eq!(default_half_length(1), 400.0);
    assert!(builtin_potential(4, 0.5).is_err());
    assert!(builtin_potential(1, 0.0).is_err());
    assert!(builtin_potential(1, 1.5).is_err());
}

#[test]
fn square_function_takes_half_on_the_edge() {
    assert_eq!(theta(0.05, 0.05), 0.5);
    assert_eq!(theta(-0.05, 0.05), 0.5);
    assert_eq!(theta(0.0, 0.05), 1.0);
    assert_eq!(theta(0.2, 0.05), 0.0);
    assert_eq!(q_plus_minus(0.5, 0.05, -1.0), -1.0);
    assert_eq!(q_plus_minus(0.98, 0.05, 1.0), 1.0);
}

#[test]
fn well_potentials_on_eighty_point_grid() {
    let spec = builtin_potential(2, 0.5).unwrap();
    let (v, w) = spec.sample_cell(80);
    // x = 0.05 is the 4th grid point: a well edge
    assert_eq!(v[4], -2.5);
    assert_eq!(v[0], -5.0);
    assert_eq!(w[40], 5.0);
    assert_eq!(v[20], 0.0);
}

#[test]
fn piecewise_wall_values() {
    let y0 = piecewise_step();
    assert_relative_eq!(y0, 0.5 * 3.0f64.ln());
    let k = DomainWallKind::Piecewise;
    assert_eq!(k.eval(0.5 * y0), 0.0);
    assert_eq!(k.eval(1.5 * y0), 0.5);
    assert_eq!(k.eval(-3.0 * y0), -1.0);
    assert_relative_eq!(k.integral(3.0 * y0), 1.5 * y0);
}

#[test]
fn ln_cosh_is_stable() {
    assert_relative_eq!(ln_cosh(0.3), 0.3f64.cosh().ln(), max_relative = 1e-14);
    assert_relative_eq!(ln_cosh(800.0), 800.0 - std::f64::consts::LN_2, max_relative = 1e-15);
    assert_eq!(ln_cosh(0.0), 0.0);
}

#[test]
fn forcing_validation() {
    assert!(ForcingSpec::new(-0.1, 0.6).is_err());
    assert!(ForcingSpec::new(0.1, 0.0).is_err());
    let f = ForcingSpec::new(0.01, 0.6).unwrap();
    assert_relative_eq!(forcing_value(&f, 0.5, 10.0), 0.01 * 3.0f64.cos());
    assert_eq!(ForcingSpec::unforced().slow_value(3.0), 0.0);
}

#[test]
fn potential_combines_bulk_and_wall() {
    let spec = builtin_potential(1, 0.5).unwrap();
    let x = 3.3;
    let want = (4.0 * std::f64::consts::PI * x).cos() + 0.5 * (0.5 * x).tanh() * (2.0 * std::f64::consts::PI * x).cos();
    assert_relative_eq!(eval_potential(&spec, x), want, max_relative = 1e-14);
}

fn walls() -> impl Strategy<Value = DomainWallKind> {
    prop_oneof![
        Just(DomainWallKind::Tanh),
        Just(DomainWallKind::Piecewise),
        (-0.5f64..0.5).prop_map(|shift| DomainWallKind::Sign { shift }),
    ]
}

proptest! {
    #[test]
    fn bulk_profiles_have_dirac_point_symmetries(x in -5.0f64..5.0, family in 1u8..=3) {
        let spec = builtin_potential(family, 0.5).unwrap();
        let tol = 1e-9;
        // skip points within rounding of a well edge
        let to_center = (x - 0.5 * (2.0 * x).round()).abs();
        prop_assume!(spec.bulk == Bulk::Cosine || (to_center - 0.05).abs() > 1e-6);
        prop_assert!((spec.v(x + 0.5) - spec.v(x)).abs() < tol);
        prop_assert!((spec.v(-x) - spec.v(x)).abs() < tol);
        prop_assert!((spec.w(x + 0.5) + spec.w(x)).abs() < tol);
        prop_assert!((spec.w(x + 1.0) - spec.w(x)).abs() < tol);
    }

    #[test]
    fn walls_have_opposite_limits(w in walls()) {
        prop_assert_eq!(w.eval(50.0), w.kappa_inf());
        prop_assert_eq!(w.eval(-50.0), -w.kappa_inf());
        prop_assert!(w.is_wall());
    }

    #[test]
    fn integral_is_a_primitive(w in walls(), x in -6.0f64..6.0) {
        let h = 1e-6;
        let d = (w.integral(x + h) - w.integral(x - h)) / (2.0 * h);
        // away from the jumps of piecewise and sign walls
        let near_jump = [0.0, piecewise_step(), 2.0 * piecewise_step(), -piecewise_step(), -2.0 * piecewise_step()]
            .iter()
            .any(|j| (x - j).abs() < 1e-3)
            || matches!(w, DomainWallKind::Sign { shift } if (x + shift).abs() < 1e-3);
        prop_assume!(!near_jump);
        prop_assert!((d - w.eval(x)).abs() < 1e-6);
        prop_assert!(w.integral(0.0).abs() < 1e-15);
    }

    #[test]
    fn forcing_is_periodic(beta in 0.0f64..1.0, omega in 0.1f64..2.0, t in 0.0f64..100.0) {
        let f = ForcingSpec::new(beta, omega).unwrap();
        let period = 2.0 * std::f64::consts::PI / omega;
        prop_assert!((f.slow_value(t + period) - f.slow_value(t)).abs() < 1e-10);
    }
}
