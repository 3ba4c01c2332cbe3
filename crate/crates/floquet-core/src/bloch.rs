//! Floquet-Bloch eigenproblems on the unit cell and Dirac-point parameters.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{FloquetError, Result};
use crate::model::PotentialSpec;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Quasimomentum of the Dirac point.
pub const K_DIRAC: f64 = PI;

/// Discretization of `-∂ₓ² + V` on `[0, 1)` with `f(x+1) = e^{ik} f(x)`.
pub fn assemble_bloch_operator(v: &[f64], k: f64) -> Result<DMatrix<Complex64>> {
    let n = v.len();
    if n < 8 {
        return Err(FloquetError::Resolution(format!("unit cell has {n} < 8 points")));
    }
    let h2 = (n * n) as f64;
    let mut m = DMatrix::<Complex64>::zeros(n, n);
    for j in 0..n {
        m[(j, j)] = Complex64::new(2.0 * h2 + v[j], 0.0);
        if j + 1 < n {
            m[(j, j + 1)] = Complex64::new(-h2, 0.0);
            m[(j + 1, j)] = Complex64::new(-h2, 0.0);
        }
    }
    let phase = Complex64::from_polar(1.0, k);
    m[(n - 1, 0)] += -h2 * phase;
    m[(0, n - 1)] += -h2 * phase.conj();
    Ok(m)
}

/// Ascending eigenpairs of a Hermitian matrix; eigenvectors are columns.
fn hermitian_eigen(m: DMatrix<Complex64>) -> (Vec<f64>, Vec<Vec<Complex64>>) {
    let eig = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = order
        .iter()
        .map(|&i| eig.eigenvectors.column(i).iter().copied().collect())
        .collect();
    (vals, vecs)
}

/// Trapezoid inner product on the periodic cell.
pub fn cell_inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    let dx = 1.0 / a.len() as f64;
    dx * a.iter().zip(b).map(|(x, y)| x.conj() * y).sum::<Complex64>()
}

fn normalize(f: &mut [Complex64]) {
    let nrm = cell_inner(f, f).re.sqrt();
    f.iter_mut().for_each(|z| *z /= nrm);
}

/// Centered derivative of a `k`-quasi-periodic cell function.
pub fn quasi_periodic_derivative(f: &[Complex64], k: f64) -> Vec<Complex64> {
    let n = f.len();
    let inv = n as f64 / 2.0;
    let phase = Complex64::from_polar(1.0, k);
    (0..n)
        .map(|j| {
            let next = if j + 1 < n { f[j + 1] } else { phase * f[0] };
            let prev = if j > 0 { f[j - 1] } else { phase.conj() * f[n - 1] };
            (next - prev) * inv
        })
        .collect()
}

/// `x → -x` on the cell grid, continued quasi-periodically.
pub fn parity(f: &[Complex64], k: f64) -> Vec<Complex64> {
    let n = f.len();
    let back = Complex64::from_polar(1.0, -k);
    (0..n).map(|j| if j == 0 { f[0] } else { back * f[n - j] }).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandStructure {
    pub k: Vec<f64>,
    /// `energies[i][b]` ascending in `b`.
    pub energies: Vec<Vec<f64>>,
    /// `modes[i][b]`, unit L² norm on the cell.
    #[serde(skip)]
    pub modes: Vec<Vec<Vec<Complex64>>>,
}

pub fn band_structure(v: &[f64], k_samples: &[f64], n_bands: usize) -> Result<BandStructure> {
    let n = v.len();
    if n_bands == 0 || n_bands > n {
        return Err(FloquetError::InvalidArgument(format!("n_bands = {n_bands} with {n} cell points")));
    }
    if let Some(&k) = k_samples.iter().find(|k| !(-1e-12..=2.0 * PI + 1e-12).contains(*k)) {
        return Err(FloquetError::InvalidArgument(format!("k = {k} outside [0, 2π]")));
    }
    let per_k: Vec<Result<(Vec<f64>, Vec<Vec<Complex64>>)>> = k_samples
        .par_iter()
        .map(|&k| {
            let m = assemble_bloch_operator(v, k)?;
            let (vals, vecs) = hermitian_eigen(m);
            if vals.iter().any(|e| !e.is_finite()) {
                return Err(FloquetError::Numerical(format!("eigensolver failed at k = {k}")));
            }
            let mut modes: Vec<Vec<Complex64>> = vecs.into_iter().take(n_bands).collect();
            modes.iter_mut().for_each(|m| normalize(m));
            Ok((vals[..n_bands].to_vec(), modes))
        })
        .collect();
    let mut energies = Vec::with_capacity(k_samples.len());
    let mut modes = Vec::with_capacity(k_samples.len());
    for r in per_k {
        let (e, m) = r?;
        energies.push(e);
        modes.push(m);
    }
    Ok(BandStructure { k: k_samples.to_vec(), energies, modes })
}

/// Degenerate pair at `k_D` in the parity-related, phase-fixed basis.
#[derive(Debug, Clone, PartialEq)]
pub struct DiracBasis {
    pub phi1: Vec<Complex64>,
    pub phi2: Vec<Complex64>,
    pub energy: f64,
    pub band: usize,
    pub k: f64,
}

impl DiracBasis {
    pub fn cell_points(&self) -> usize {
        self.phi1.len()
    }

    /// `Φ_j` at fast-grid offset `q` from `x = 0` (`x = q·dx`), extended by `e^{ikm}`.
    pub fn extended(&self, which: usize, q: i64) -> Complex64 {
        let n = self.cell_points() as i64;
        let m = q.div_euclid(n);
        let r = q.rem_euclid(n) as usize;
        let f = if which == 0 { &self.phi1 } else { &self.phi2 };
        Complex64::from_polar(1.0, self.k * m as f64) * f[r]
    }
}

fn is_even(v: &[f64]) -> bool {
    let n = v.len();
    let scale = v.iter().fold(1.0f64, |m, x| m.max(x.abs()));
    (1..n).all(|j| (v[j] - v[n - j]).abs() <= 1e-12 * scale)
}

/// Degenerate pair `(b, b+1)` at `k = π`, with `Φ₂(x) = Φ₁(-x)` and
/// `2i⟨Φ₁, ∂ₓΦ₁⟩ > 0`.
pub fn dirac_eigenbasis(v: &[f64], band: usize) -> Result<DiracBasis> {
    if !is_even(v) {
        return Err(FloquetError::InvalidArgument("V must be even".into()));
    }
    let k = K_DIRAC;
    let m = assemble_bloch_operator(v, k)?;
    let (vals, vecs) = hermitian_eigen(m);
    if band + 1 >= vals.len() {
        return Err(FloquetError::InvalidArgument(format!("band {band} out of range")));
    }
    let (e1, e2) = (vals[band], vals[band + 1]);
    let energy = 0.5 * (e1 + e2);
    if (e2 - e1).abs() >= 1e-6 * energy.abs() + 1e-9 {
        return Err(FloquetError::NoDiracPoint(format!(
            "bands {band},{} split by {:.3e} at k = π",
            band + 1,
            e2 - e1
        )));
    }
    let mut a = vecs[band].clone();
    let mut b = vecs[band + 1].clone();
    normalize(&mut a);
    normalize(&mut b);
    // 2i∂ₓ restricted to the eigenspace; Φ₁ is its positive eigenvector
    let da = quasi_periodic_derivative(&a, k);
    let db = quasi_periodic_derivative(&b, k);
    let r = |f: &[Complex64], d: &[Complex64]| 2.0 * I * cell_inner(f, d);
    let (raa, rab, rba, rbb) = (r(&a, &da), r(&a, &db), r(&b, &da), r(&b, &db));
    let mut small = DMatrix::<Complex64>::zeros(2, 2);
    small[(0, 0)] = raa;
    small[(0, 1)] = 0.5 * (rab + rba.conj());
    small[(1, 0)] = small[(0, 1)].conj();
    small[(1, 1)] = rbb;
    let (_, svecs) = hermitian_eigen(small);
    let c = &svecs[1];
    let mut phi1: Vec<Complex64> = a.iter().zip(&b).map(|(x, y)| c[0] * x + c[1] * y).collect();
    normalize(&mut phi1);
    fix_phase(&mut phi1);
    let phi2 = parity(&phi1, k);
    Ok(DiracBasis { phi1, phi2, energy, band, k })
}

/// Rotates so that the largest-magnitude entry is real positive.
pub fn fix_phase(f: &mut [Complex64]) {
    let mut best = 0;
    let mut bmag = -1.0;
    for (i, z) in f.iter().enumerate() {
        // tie-break on index keeps the choice deterministic
        if z.norm() > bmag * (1.0 + 1e-12) {
            bmag = z.norm();
            best = i;
        }
    }
    if bmag > 0.0 {
        let rot = f[best].conj() / bmag;
        f.iter_mut().for_each(|z| *z *= rot);
    }
}

/// `v_D = 2i⟨Φ₁, ∂ₓΦ₁⟩`.
pub fn fermi_velocity(phi1: &[Complex64], k: f64) -> Result<f64> {
    let d = quasi_periodic_derivative(phi1, k);
    let val = 2.0 * I * cell_inner(phi1, &d);
    if val.im.abs() > 1e-8 * val.re.abs().max(1.0) {
        return Err(FloquetError::InconsistentBasis(format!("2i<Φ,∂Φ> = {val}")));
    }
    Ok(val.re)
}

/// `ϑ♯ = ⟨Φ₁, WΦ₂⟩`, checking `⟨Φ_j, WΦ_j⟩ = 0`.
pub fn coupling_theta(phi1: &[Complex64], phi2: &[Complex64], w: &[f64]) -> Result<f64> {
    let apply = |f: &[Complex64]| -> Vec<Complex64> { f.iter().zip(w).map(|(z, &wv)| z * wv).collect() };
    let w2 = apply(phi2);
    let d1 = cell_inner(phi1, &apply(phi1));
    let d2 = cell_inner(phi2, &w2);
    let scale = w.iter().fold(1.0f64, |m, x| m.max(x.abs()));
    if d1.norm() > 1e-8 * scale || d2.norm() > 1e-8 * scale {
        return Err(FloquetError::SymmetryViolation(format!("<Φ1,WΦ1> = {d1}, <Φ2,WΦ2> = {d2}")));
    }
    let t = cell_inner(phi1, &w2);
    if t.im.abs() > 1e-8 * t.re.abs().max(1.0) {
        return Err(FloquetError::InconsistentBasis(format!("<Φ1,WΦ2> = {t}")));
    }
    Ok(t.re)
}

/// Effective Dirac parameters of a domain-wall potential.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiracParameters {
    pub k_d: f64,
    pub e_d: f64,
    pub band: usize,
    pub v_d: f64,
    pub theta: f64,
    pub kappa_inf: f64,
    pub eps: f64,
}

impl DiracParameters {
    /// `ε|ϑ♯|κ∞`, the half-width of the bulk gap about `E_D`.
    pub fn gap_half_width(&self) -> f64 {
        self.eps * self.theta.abs() * self.kappa_inf
    }
}

/// Basis and parameters for the lowest degenerate pair at `k = π`.
pub fn extract_dirac_parameters(spec: &PotentialSpec, points_per_period: usize) -> Result<(DiracParameters, DiracBasis)> {
    let (v, w) = spec.sample_cell(points_per_period);
    let basis = dirac_eigenbasis(&v, 0)?;
    let v_d = fermi_velocity(&basis.phi1, basis.k)?;
    let theta = coupling_theta(&basis.phi1, &basis.phi2, &w)?;
    let params = DiracParameters {
        k_d: basis.k,
        e_d: basis.energy,
        band: basis.band,
        v_d,
        theta,
        kappa_inf: spec.wall.kappa_inf(),
        eps: spec.eps,
    };
    Ok((params, basis))
}
