use std::f64::consts::PI;

use floquet_core::linalg::{Banded, CyclicTridiagonal, SymCyclic, SymTridiagonal, Tridiagonal};
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn dense_tri(t: &Tridiagonal<Complex64>) -> DMatrix<Complex64> {
    let n = t.diag.len();
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = t.diag[i];
        if i + 1 < n {
            m[(i, i + 1)] = t.upper[i];
            m[(i + 1, i)] = t.lower[i];
        }
    }
    m
}

fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn complex_vec(len: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0).prop_map(|(a, b)| c(a, b)), len)
}

fn tri_strategy(n: usize) -> impl Strategy<Value = Tridiagonal<Complex64>> {
    (complex_vec(n - 1), complex_vec(n), complex_vec(n - 1)).prop_map(|(lower, diag, upper)| {
        // diagonally dominant so the unpivoted sweep is stable
        let diag = diag.into_iter().map(|d| d + c(4.0, 0.0)).collect();
        Tridiagonal { lower, diag, upper }
    })
}

#[test]
fn tridiagonal_constructor_checks_lengths() {
    assert!(Tridiagonal::new(vec![1.0], vec![1.0, 2.0, 3.0], vec![1.0, 1.0]).is_err());
    assert!(Tridiagonal::new(vec![1.0, 1.0], vec![1.0, 2.0, 3.0], vec![1.0, 1.0]).is_ok());
}

#[test]
fn pivoted_lu_handles_zero_leading_pivot() {
    // [[0,1],[1,0]] has no unpivoted factorization
    let t = Tridiagonal { lower: vec![1.0], diag: vec![0.0, 0.0], upper: vec![1.0] };
    assert!(t.solve_unpivoted(&[1.0, 2.0]).is_err());
    let x = t.lu().solve(&[1.0, 2.0]);
    assert!((x[0] - 2.0).abs() < 1e-15 && (x[1] - 1.0).abs() < 1e-15);
}

#[test]
fn dirichlet_laplacian_eigenvalues_match_closed_form() {
    let n = 50;
    let t = SymTridiagonal::new(vec![2.0; n], vec![-1.0; n - 1]).unwrap();
    for k in 0..n {
        let exact = 2.0 - 2.0 * (PI * (k + 1) as f64 / (n + 1) as f64).cos();
        assert!((t.eigenvalue(k) - exact).abs() < 1e-12, "k = {k}");
    }
    assert_eq!(t.count_below(0.0), 0);
    assert_eq!(t.count_below(4.0), n);
}

#[test]
fn inverse_iteration_returns_normalized_eigenvector() {
    let n = 40;
    let diag: Vec<f64> = (0..n).map(|j| (j as f64 * 0.37).cos()).collect();
    let t = SymTridiagonal::new(diag, vec![0.8; n - 1]).unwrap();
    for k in [0, 7, 20, 39] {
        let lam = t.eigenvalue(k);
        let v = t.inverse_iteration(lam);
        let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!((norm - 1.0).abs() < 1e-12);
        let av = t.matvec(&v);
        let r: f64 = av.iter().zip(&v).map(|(a, b)| (a - lam * b).powi(2)).sum::<f64>().sqrt();
        assert!(r < 1e-10, "residual {r}");
    }
}

#[test]
fn sturm_bisection_matches_dense_eigenvalues() {
    let n = 60;
    let diag: Vec<f64> = (0..n).map(|j| ((j * j) as f64 * 0.013).sin() * 3.0).collect();
    let off: Vec<f64> = (0..n - 1).map(|j| 1.0 + 0.5 * (j as f64).cos()).collect();
    let t = SymTridiagonal::new(diag.clone(), off.clone()).unwrap();
    let mut m = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = diag[i];
        if i + 1 < n {
            m[(i, i + 1)] = off[i];
            m[(i + 1, i)] = off[i];
        }
    }
    let mut e: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
    e.sort_by(f64::total_cmp);
    for k in 0..n {
        assert!((t.eigenvalue(k) - e[k]).abs() < 1e-10);
    }
    let (lo, hi) = t.gershgorin();
    assert!(lo <= e[0] && e[n - 1] <= hi);
    let inside = t.eigenvalues_in(-1.0, 1.0);
    assert_eq!(inside.len(), e.iter().filter(|&&x| (-1.0..1.0).contains(&x)).count());
}

#[test]
fn periodic_laplacian_matvec_is_circulant() {
    let n = 16;
    let a = SymCyclic { tri: SymTridiagonal::new(vec![2.0; n], vec![-1.0; n - 1]).unwrap(), corner: -1.0 };
    let m = 3;
    let x: Vec<f64> = (0..n).map(|j| (2.0 * PI * (m * j) as f64 / n as f64).cos()).collect();
    let lam = 2.0 - 2.0 * (2.0 * PI * m as f64 / n as f64).cos();
    for (y, xi) in a.matvec(&x).iter().zip(&x) {
        assert!((y - lam * xi).abs() < 1e-12);
    }
    let shifted = a.shifted(-0.5);
    let y = shifted.factor().unwrap().solve(&x);
    for (yi, xi) in y.iter().zip(&x) {
        assert!((yi - xi / (lam + 0.5)).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn thomas_and_pivoted_lu_agree_with_dense(t in tri_strategy(12), b in complex_vec(12)) {
        let dense = dense_tri(&t);
        let want = dense.clone().lu().solve(&DVector::from_vec(b.clone())).unwrap();
        let want: Vec<Complex64> = want.iter().copied().collect();
        prop_assert!(max_diff(&t.solve_unpivoted(&b).unwrap(), &want) < 1e-10);
        let lu = t.lu();
        prop_assert!(max_diff(&lu.solve(&b), &want) < 1e-10);
        let want_t = dense.transpose().lu().solve(&DVector::from_vec(b.clone())).unwrap();
        let want_t: Vec<Complex64> = want_t.iter().copied().collect();
        prop_assert!(max_diff(&lu.solve_transpose(&b), &want_t) < 1e-10);
        let mv: Vec<Complex64> = (&dense * DVector::from_vec(b.clone())).iter().copied().collect();
        prop_assert!(max_diff(&t.matvec(&b), &mv) < 1e-12);
    }

    #[test]
    fn pivoted_lu_solves_general_tridiagonal(
        lower in complex_vec(9), diag in complex_vec(10), upper in complex_vec(9), b in complex_vec(10)
    ) {
        let t = Tridiagonal { lower, diag, upper };
        let dense = dense_tri(&t);
        prop_assume!(dense.clone().lu().determinant().norm() > 1e-3);
        let x = t.lu().solve(&b);
        let r = t.matvec(&x);
        prop_assert!(max_diff(&r, &b) < 1e-8 * (1.0 + x.iter().map(|z| z.norm()).fold(0.0, f64::max)));
    }

    #[test]
    fn cyclic_solvers_agree_with_dense(
        t in tri_strategy(11), tr in (-1.0f64..1.0, -1.0f64..1.0), bl in (-1.0f64..1.0, -1.0f64..1.0), b in complex_vec(11)
    ) {
        let cy = CyclicTridiagonal { tri: t, top_right: c(tr.0, tr.1), bottom_left: c(bl.0, bl.1) };
        let mut dense = dense_tri(&cy.tri);
        dense[(0, 10)] = cy.top_right;
        dense[(10, 0)] = cy.bottom_left;
        let want: Vec<Complex64> = dense.clone().lu().solve(&DVector::from_vec(b.clone())).unwrap().iter().copied().collect();
        prop_assert!(max_diff(&cy.solve_unpivoted(&b).unwrap(), &want) < 1e-10);
        prop_assert!(max_diff(&cy.factor().unwrap().solve(&b), &want) < 1e-10);
        let mv: Vec<Complex64> = (&dense * DVector::from_vec(b.clone())).iter().copied().collect();
        prop_assert!(max_diff(&cy.matvec(&b), &mv) < 1e-12);
    }

    #[test]
    fn banded_solvers_agree_with_dense(entries in complex_vec(14 * 5), b in complex_vec(14), shift in 0.0f64..3.0) {
        let n = 14;
        let mut band = Banded::zeros(n, 2, 2);
        let mut dense = DMatrix::<Complex64>::zeros(n, n);
        let mut it = entries.into_iter();
        for i in 0..n {
            for j in i.saturating_sub(2)..(i + 3).min(n) {
                let mut v = it.next().unwrap();
                if i == j {
                    v += c(shift, 0.0);
                }
                band.set(i, j, v);
                dense[(i, j)] = v;
            }
        }
        for i in 0..n {
            for j in 0..n {
                prop_assert_eq!(band.get(i, j), dense[(i, j)]);
            }
        }
        let mv: Vec<Complex64> = (&dense * DVector::from_vec(b.clone())).iter().copied().collect();
        prop_assert!(max_diff(&band.matvec(&b), &mv) < 1e-12);
        prop_assume!(dense.clone().lu().determinant().norm() > 1e-2);
        let x = band.lu().solve(&b);
        let scale = 1.0 + x.iter().map(|z| z.norm()).fold(0.0, f64::max);
        prop_assert!(max_diff(&band.matvec(&x), &b) < 1e-9 * scale);
    }

    #[test]
    fn scaled_plus_identity_matches_dense(entries in complex_vec(8 * 3), b in complex_vec(8)) {
        let n = 8;
        let mut band = Banded::zeros(n, 1, 1);
        let mut it = entries.into_iter();
        for i in 0..n {
            for j in i.saturating_sub(1)..(i + 2).min(n) {
                band.set(i, j, it.next().unwrap());
            }
        }
        let a = c(0.0, 0.3);
        let s = band.scaled_plus_identity(a, c(1.0, 0.0));
        let want: Vec<Complex64> = band.matvec(&b).iter().zip(&b).map(|(y, x)| a * y + x).collect();
        prop_assert!(max_diff(&s.matvec(&b), &want) < 1e-12);
        // identity + small perturbation is safely solvable without pivoting
        let small = band.scaled_plus_identity(c(0.1, 0.0), c(1.0, 0.0));
        let x = small.solve_unpivoted(&b).unwrap();
        prop_assert!(max_diff(&small.matvec(&x), &b) < 1e-10);
    }
}
