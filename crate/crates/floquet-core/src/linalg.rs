//! Banded and tridiagonal solvers, Sturm bisection and inverse iteration.
//!
//! Everything here is O(n) or O(n·bandwidth²); the grids used by the evolvers
//! have 10⁴–10⁵ points, far beyond what dense factorizations can hold.

use std::ops::{Add, Div, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{FloquetError, Result};

/// Field operations shared by `f64` and `Complex64`.
pub trait Scalar:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + PartialEq
    + Send
    + Sync
{
    fn zero() -> Self;
    fn one() -> Self;
    fn modulus(self) -> f64;
    fn from_real(x: f64) -> Self;
    fn finite(self) -> bool;
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn modulus(self) -> f64 {
        self.abs()
    }
    fn from_real(x: f64) -> Self {
        x
    }
    fn finite(self) -> bool {
        self.is_finite()
    }
}

impl Scalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn modulus(self) -> f64 {
        self.norm()
    }
    fn from_real(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    fn finite(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

// Replacement for an exactly vanishing pivot; only reached when the matrix is
// singular to working precision, which inverse iteration tolerates.
const TINY_PIVOT: f64 = 1e-300;

/// General tridiagonal matrix: `lower[i] = A[i+1][i]`, `upper[i] = A[i][i+1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal<S> {
    pub lower: Vec<S>,
    pub diag: Vec<S>,
    pub upper: Vec<S>,
}

impl<S: Scalar> Tridiagonal<S> {
    pub fn new(lower: Vec<S>, diag: Vec<S>, upper: Vec<S>) -> Result<Self> {
        let n = diag.len();
        if n == 0 || lower.len() + 1 != n || upper.len() + 1 != n {
            return Err(FloquetError::Dimension(format!(
                "tridiagonal with diag {} lower {} upper {}",
                n,
                lower.len(),
                upper.len()
            )));
        }
        Ok(Self { lower, diag, upper })
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn matvec(&self, x: &[S]) -> Vec<S> {
        let n = self.len();
        let mut y: Vec<S> = (0..n).map(|i| self.diag[i] * x[i]).collect();
        for i in 0..n - 1 {
            y[i] = y[i] + self.upper[i] * x[i + 1];
            y[i + 1] = y[i + 1] + self.lower[i] * x[i];
        }
        y
    }

    /// Thomas algorithm without pivoting. Stable for diagonally dominant
    /// matrices and for `I + iτH` with Hermitian `H` (its Hermitian part is `I`).
    pub fn solve_unpivoted(&self, rhs: &[S]) -> Result<Vec<S>> {
        let n = self.len();
        if rhs.len() != n {
            return Err(FloquetError::Dimension(format!("rhs {} vs {}", rhs.len(), n)));
        }
        let mut c = vec![S::zero(); n];
        let mut d = vec![S::zero(); n];
        let mut piv = self.diag[0];
        if piv.modulus() == 0.0 {
            return Err(FloquetError::Numerical("zero pivot at row 0".into()));
        }
        if n > 1 {
            c[0] = self.upper[0] / piv;
        }
        d[0] = rhs[0] / piv;
        for i in 1..n {
            piv = self.diag[i] - self.lower[i - 1] * c[i - 1];
            if piv.modulus() == 0.0 {
                return Err(FloquetError::Numerical(format!("zero pivot at row {i}")));
            }
            if i < n - 1 {
                c[i] = self.upper[i] / piv;
            }
            d[i] = (rhs[i] - self.lower[i - 1] * d[i - 1]) / piv;
        }
        for i in (0..n - 1).rev() {
            d[i] = d[i] - c[i] * d[i + 1];
        }
        Ok(d)
    }

    /// LU factorization with partial pivoting (row interchanges), as in LAPACK `gttrf`.
    pub fn lu(&self) -> TridiagonalLu<S> {
        let n = self.len();
        let mut dl = self.lower.clone();
        let mut d = self.diag.clone();
        let mut du = self.upper.clone();
        let mut du2 = vec![S::zero(); n.saturating_sub(2)];
        let mut swap = vec![false; n];
        for i in 0..n.saturating_sub(1) {
            if d[i].modulus() >= dl[i].modulus() {
                if d[i].modulus() == 0.0 {
                    d[i] = S::from_real(TINY_PIVOT);
                }
                let fact = dl[i] / d[i];
                dl[i] = fact;
                d[i + 1] = d[i + 1] - fact * du[i];
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 1 < n - 1 {
                    du2[i] = du[i + 1];
                    du[i + 1] = -fact * du[i + 1];
                }
                swap[i] = true;
            }
        }
        if d[n - 1].modulus() == 0.0 {
            d[n - 1] = S::from_real(TINY_PIVOT);
        }
        TridiagonalLu { dl, d, du, du2, swap }
    }
}

/// Pivoted tridiagonal LU factors.
#[derive(Debug, Clone)]
pub struct TridiagonalLu<S> {
    dl: Vec<S>,
    d: Vec<S>,
    du: Vec<S>,
    du2: Vec<S>,
    swap: Vec<bool>,
}

impl<S: Scalar> TridiagonalLu<S> {
    pub fn solve(&self, rhs: &[S]) -> Vec<S> {
        let n = self.d.len();
        let mut b = rhs.to_vec();
        for i in 0..n.saturating_sub(1) {
            if self.swap[i] {
                b.swap(i, i + 1);
            }
            b[i + 1] = b[i + 1] - self.dl[i] * b[i];
        }
        b[n - 1] = b[n - 1] / self.d[n - 1];
        if n > 1 {
            b[n - 2] = (b[n - 2] - self.du[n - 2] * b[n - 1]) / self.d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - self.du[i] * b[i + 1] - self.du2[i] * b[i + 2]) / self.d[i];
        }
        b
    }

    /// Solves `Aᵀx = b` (plain transpose, no conjugation).
    pub fn solve_transpose(&self, rhs: &[S]) -> Vec<S> {
        let n = self.d.len();
        let mut b = rhs.to_vec();
        // Uᵀ y = b
        b[0] = b[0] / self.d[0];
        if n > 1 {
            b[1] = (b[1] - self.du[0] * b[0]) / self.d[1];
        }
        for i in 2..n {
            b[i] = (b[i] - self.du[i - 1] * b[i - 1] - self.du2[i - 2] * b[i - 2]) / self.d[i];
        }
        // Lᵀ x = y, undoing interchanges in reverse
        for i in (0..n.saturating_sub(1)).rev() {
            b[i] = b[i] - self.dl[i] * b[i + 1];
            if self.swap[i] {
                b.swap(i, i + 1);
            }
        }
        b
    }
}

impl Tridiagonal<f64> {
    pub fn transpose(&self) -> Self {
        Self { lower: self.upper.clone(), diag: self.diag.clone(), upper: self.lower.clone() }
    }

    /// Smallest singular value and its right singular vector (unit length),
    /// by inverse iteration on `AᵀA`; stops once `σ` moves by less than `tol`.
    pub fn smallest_singular(&self, tol: f64) -> (Vec<f64>, f64) {
        let lu = self.lu();
        let mut u = vec![1.0; self.len()];
        let mut sigma = f64::INFINITY;
        for _ in 0..50 {
            let y = lu.solve_transpose(&u);
            let mut z = lu.solve(&y);
            let nrm = z.iter().map(|v| v * v).sum::<f64>().sqrt();
            z.iter_mut().for_each(|v| *v /= nrm);
            let az = self.matvec(&z);
            let new_sigma = az.iter().map(|v| v * v).sum::<f64>().sqrt();
            let diff: f64 = z.iter().zip(&u).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            u = z;
            let done = diff < 1e-14 || (new_sigma - sigma).abs() <= tol;
            sigma = new_sigma;
            if done {
                break;
            }
        }
        (u, sigma)
    }
}

/// Tridiagonal matrix with the two corner entries of a periodic stencil.
#[derive(Debug, Clone, PartialEq)]
pub struct CyclicTridiagonal<S> {
    pub tri: Tridiagonal<S>,
    /// `A[0][n-1]`
    pub top_right: S,
    /// `A[n-1][0]`
    pub bottom_left: S,
}

impl<S: Scalar> CyclicTridiagonal<S> {
    pub fn matvec(&self, x: &[S]) -> Vec<S> {
        let n = self.tri.len();
        let mut y = self.tri.matvec(x);
        y[0] = y[0] + self.top_right * x[n - 1];
        y[n - 1] = y[n - 1] + self.bottom_left * x[0];
        y
    }

    // Sherman-Morrison split A = T' + u vᵀ with u = (γ, 0, …, 0, bottom_left)
    // and v = (1, 0, …, 0, top_right/γ).
    fn split(&self) -> (Tridiagonal<S>, S) {
        let n = self.tri.len();
        let mut t = self.tri.clone();
        let gamma = if t.diag[0].modulus() > 0.0 { -t.diag[0] } else { S::one() };
        t.diag[0] = t.diag[0] - gamma;
        t.diag[n - 1] = t.diag[n - 1] - self.top_right * self.bottom_left / gamma;
        (t, gamma)
    }

    fn correct(&self, gamma: S, x: Vec<S>, z: Vec<S>) -> Result<Vec<S>> {
        let n = x.len();
        let ratio = self.top_right / gamma;
        let vx = x[0] + ratio * x[n - 1];
        let vz = z[0] + ratio * z[n - 1];
        let denom = S::one() + vz;
        if denom.modulus() == 0.0 {
            return Err(FloquetError::Numerical("singular Sherman-Morrison update".into()));
        }
        let f = vx / denom;
        Ok(x.iter().zip(&z).map(|(&a, &b)| a - f * b).collect())
    }

    fn u_vector(&self, gamma: S) -> Vec<S> {
        let n = self.tri.len();
        let mut u = vec![S::zero(); n];
        u[0] = gamma;
        u[n - 1] = self.bottom_left;
        u
    }

    /// Rank-one corrected Thomas solve (no pivoting).
    pub fn solve_unpivoted(&self, rhs: &[S]) -> Result<Vec<S>> {
        if self.tri.len() < 3 {
            return Err(FloquetError::Dimension("cyclic system needs n >= 3".into()));
        }
        let (t, gamma) = self.split();
        let x = t.solve_unpivoted(rhs)?;
        let z = t.solve_unpivoted(&self.u_vector(gamma))?;
        self.correct(gamma, x, z)
    }

    /// Rank-one corrected solve with a pivoted LU of the tridiagonal part.
    pub fn factor(&self) -> Result<CyclicLu<S>> {
        if self.tri.len() < 3 {
            return Err(FloquetError::Dimension("cyclic system needs n >= 3".into()));
        }
        let (t, gamma) = self.split();
        let lu = t.lu();
        let z = lu.solve(&self.u_vector(gamma));
        Ok(CyclicLu { lu, z, gamma, top_right: self.top_right })
    }
}

/// Reusable factorization of a cyclic tridiagonal matrix.
#[derive(Debug, Clone)]
pub struct CyclicLu<S> {
    lu: TridiagonalLu<S>,
    z: Vec<S>,
    gamma: S,
    top_right: S,
}

impl<S: Scalar> CyclicLu<S> {
    pub fn solve(&self, rhs: &[S]) -> Vec<S> {
        let x = self.lu.solve(rhs);
        let n = x.len();
        let ratio = self.top_right / self.gamma;
        let vx = x[0] + ratio * x[n - 1];
        let vz = self.z[0] + ratio * self.z[n - 1];
        let mut denom = S::one() + vz;
        if denom.modulus() == 0.0 {
            denom = S::from_real(TINY_PIVOT);
        }
        let f = vx / denom;
        x.iter().zip(&self.z).map(|(&a, &b)| a - f * b).collect()
    }
}

/// Square band matrix with `kl` sub- and `ku` super-diagonals, stored by rows:
/// `data[i*(kl+ku+1) + (j + kl - i)] = A[i][j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Banded<S> {
    n: usize,
    kl: usize,
    ku: usize,
    data: Vec<S>,
}

impl<S: Scalar> Banded<S> {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        Self { n, kl, ku, data: vec![S::zero(); n * (kl + ku + 1)] }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn bandwidths(&self) -> (usize, usize) {
        (self.kl, self.ku)
    }

    fn idx(&self, i: usize, j: usize) -> Option<usize> {
        if i >= self.n || j >= self.n || j + self.kl < i || j > i + self.ku {
            return None;
        }
        Some(i * (self.kl + self.ku + 1) + (j + self.kl - i))
    }

    pub fn get(&self, i: usize, j: usize) -> S {
        self.idx(i, j).map_or(S::zero(), |k| self.data[k])
    }

    /// Panics if `(i, j)` lies outside the band.
    pub fn set(&mut self, i: usize, j: usize, v: S) {
        let k = self.idx(i, j).expect("entry outside band");
        self.data[k] = v;
    }

    pub fn add(&mut self, i: usize, j: usize, v: S) {
        let k = self.idx(i, j).expect("entry outside band");
        self.data[k] = self.data[k] + v;
    }

    pub fn matvec(&self, x: &[S]) -> Vec<S> {
        let w = self.kl + self.ku + 1;
        (0..self.n)
            .map(|i| {
                let j0 = i.saturating_sub(self.kl);
                let j1 = (i + self.ku).min(self.n - 1);
                let row = &self.data[i * w..(i + 1) * w];
                let mut acc = S::zero();
                for j in j0..=j1 {
                    acc = acc + row[j + self.kl - i] * x[j];
                }
                acc
            })
            .collect()
    }

    /// Returns `a·self + b·I`, used to form Cayley factors.
    pub fn scaled_plus_identity(&self, a: S, b: S) -> Self {
        let mut out = self.clone();
        for v in out.data.iter_mut() {
            *v = a * *v;
        }
        for i in 0..self.n {
            out.add(i, i, b);
        }
        out
    }

    /// In-place Gaussian elimination without pivoting, then solve.
    pub fn solve_unpivoted(&self, rhs: &[S]) -> Result<Vec<S>> {
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        if rhs.len() != n {
            return Err(FloquetError::Dimension(format!("rhs {} vs {}", rhs.len(), n)));
        }
        let w = kl + ku + 1;
        let mut a = self.data.clone();
        let mut b = rhs.to_vec();
        for k in 0..n {
            let piv = a[k * w + kl];
            if piv.modulus() == 0.0 {
                return Err(FloquetError::Numerical(format!("zero pivot at row {k}")));
            }
            let iend = (k + kl).min(n - 1);
            let jend = (k + ku).min(n - 1);
            for i in k + 1..=iend {
                let f = a[i * w + (k + kl - i)] / piv;
                if f.modulus() == 0.0 {
                    continue;
                }
                for j in k + 1..=jend {
                    let v = a[k * w + (j + kl - k)];
                    a[i * w + (j + kl - i)] = a[i * w + (j + kl - i)] - f * v;
                }
                b[i] = b[i] - f * b[k];
            }
        }
        for k in (0..n).rev() {
            let jend = (k + ku).min(n - 1);
            let mut acc = b[k];
            for j in k + 1..=jend {
                acc = acc - a[k * w + (j + kl - k)] * b[j];
            }
            b[k] = acc / a[k * w + kl];
        }
        Ok(b)
    }

    /// LU with partial pivoting; the upper factor gains `kl` extra diagonals.
    pub fn lu(&self) -> BandedLu<S> {
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        let uw = ku + kl; // upper bandwidth after fill-in
        let w = kl + uw + 1;
        // row-major storage with column offset j - i + kl in [0, kl+uw]
        let mut a = vec![S::zero(); n * w];
        for i in 0..n {
            for j in i.saturating_sub(kl)..=(i + ku).min(n - 1) {
                a[i * w + (j + kl - i)] = self.get(i, j);
            }
        }
        let at = |i: usize, j: usize| i * w + (j + kl - i);
        let mut perm = vec![0usize; n];
        for k in 0..n {
            let iend = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = a[at(k, k)].modulus();
            for i in k + 1..=iend {
                let m = a[at(i, k)].modulus();
                if m > best {
                    best = m;
                    p = i;
                }
            }
            perm[k] = p;
            let jend = (k + uw).min(n - 1);
            if p != k {
                for j in k..=jend {
                    // row p holds columns up to p + ku <= k + uw
                    let (ik, ip) = (at(k, j), at(p, j));
                    a.swap(ik, ip);
                }
            }
            if a[at(k, k)].modulus() == 0.0 {
                a[at(k, k)] = S::from_real(TINY_PIVOT);
            }
            let piv = a[at(k, k)];
            for i in k + 1..=iend {
                let f = a[at(i, k)] / piv;
                a[at(i, k)] = f;
                if f.modulus() == 0.0 {
                    continue;
                }
                for j in k + 1..=jend {
                    let v = a[at(k, j)];
                    let t = at(i, j);
                    a[t] = a[t] - f * v;
                }
            }
        }
        BandedLu { n, kl, uw, a, perm }
    }
}

/// Pivoted band LU factors.
#[derive(Debug, Clone)]
pub struct BandedLu<S> {
    n: usize,
    kl: usize,
    uw: usize,
    a: Vec<S>,
    perm: Vec<usize>,
}

impl<S: Scalar> BandedLu<S> {
    pub fn solve(&self, rhs: &[S]) -> Vec<S> {
        let (n, kl, uw) = (self.n, self.kl, self.uw);
        let w = kl + uw + 1;
        let at = |i: usize, j: usize| i * w + (j + kl - i);
        let mut b = rhs.to_vec();
        for k in 0..n {
            let p = self.perm[k];
            if p != k {
                b.swap(k, p);
            }
            for i in k + 1..=(k + kl).min(n - 1) {
                b[i] = b[i] - self.a[at(i, k)] * b[k];
            }
        }
        for k in (0..n).rev() {
            let mut acc = b[k];
            for j in k + 1..=(k + uw).min(n - 1) {
                acc = acc - self.a[at(k, j)] * b[j];
            }
            b[k] = acc / self.a[at(k, k)];
        }
        b
    }
}

/// Real symmetric tridiagonal matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiagonal {
    pub diag: Vec<f64>,
    /// `off[i] = A[i][i+1] = A[i+1][i]`
    pub off: Vec<f64>,
}

impl SymTridiagonal {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Result<Self> {
        if diag.is_empty() || off.len() + 1 != diag.len() {
            return Err(FloquetError::Dimension(format!(
                "symmetric tridiagonal with diag {} off {}",
                diag.len(),
                off.len()
            )));
        }
        Ok(Self { diag, off })
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        let mut y: Vec<f64> = (0..n).map(|i| self.diag[i] * x[i]).collect();
        for i in 0..n - 1 {
            y[i] += self.off[i] * x[i + 1];
            y[i + 1] += self.off[i] * x[i];
        }
        y
    }

    /// Gershgorin enclosure of the spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let r = if i > 0 { self.off[i - 1].abs() } else { 0.0 }
                + if i + 1 < n { self.off[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    /// Number of eigenvalues strictly below `x` (Sturm sequence).
    pub fn count_below(&self, x: f64) -> usize {
        let guard = f64::EPSILON * (1.0 + x.abs());
        let mut count = 0;
        let mut q = 1.0;
        for i in 0..self.len() {
            let coupling = if i == 0 { 0.0 } else { self.off[i - 1] * self.off[i - 1] / q };
            q = self.diag[i] - x - coupling;
            if q.abs() < guard {
                q = -guard;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// The `k`-th smallest eigenvalue (0-based) by bisection.
    pub fn eigenvalue(&self, k: usize) -> f64 {
        let (mut lo, mut hi) = self.gershgorin();
        let scale = lo.abs().max(hi.abs()).max(1.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if hi - lo <= 4.0 * f64::EPSILON * scale || mid == lo || mid == hi {
                break;
            }
            if self.count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// All eigenvalues in the open interval `(a, b)`, ascending.
    pub fn eigenvalues_in(&self, a: f64, b: f64) -> Vec<f64> {
        let k0 = self.count_below(a);
        let k1 = self.count_below(b);
        (k0..k1).map(|k| self.eigenvalue(k)).filter(|&e| e > a && e < b).collect()
    }

    /// Unit (Euclidean) eigenvector for an accurately known eigenvalue.
    pub fn inverse_iteration(&self, lambda: f64) -> Vec<f64> {
        let n = self.len();
        let shift = lambda + 8.0 * f64::EPSILON * lambda.abs().max(1.0);
        let lower = self.off.clone();
        let upper = self.off.clone();
        let diag: Vec<f64> = self.diag.iter().map(|d| d - shift).collect();
        let lu = Tridiagonal { lower, diag, upper }.lu();
        // deterministic, non-symmetric start so that no eigenvector is missed by parity
        let mut x: Vec<f64> = (0..n).map(|i| 1.0 + 0.5 * ((i as f64) * 0.618_033_988_7).sin()).collect();
        for _ in 0..4 {
            x = lu.solve(&x);
            let nrm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            x.iter_mut().for_each(|v| *v /= nrm);
        }
        x
    }
}

/// Real symmetric cyclic tridiagonal matrix (periodic stencil).
#[derive(Debug, Clone, PartialEq)]
pub struct SymCyclic {
    pub tri: SymTridiagonal,
    /// `A[0][n-1] = A[n-1][0]`
    pub corner: f64,
}

impl SymCyclic {
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.tri.len();
        let mut y = self.tri.matvec(x);
        y[0] += self.corner * x[n - 1];
        y[n - 1] += self.corner * x[0];
        y
    }

    pub fn shifted(&self, sigma: f64) -> CyclicTridiagonal<f64> {
        CyclicTridiagonal {
            tri: Tridiagonal {
                lower: self.tri.off.clone(),
                diag: self.tri.diag.iter().map(|d| d - sigma).collect(),
                upper: self.tri.off.clone(),
            },
            top_right: self.corner,
            bottom_left: self.corner,
        }
    }
}

pub(crate) fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    a.iter().zip(b).fold(S::zero(), |acc, (&x, &y)| acc + x * y)
}

/// Conjugated inner product `Σ conj(a)·b`.
pub fn cdot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm2(a: &[Complex64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}
