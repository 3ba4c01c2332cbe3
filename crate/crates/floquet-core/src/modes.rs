//! Defect modes: the Schrödinger mid-gap eigenpair, the Dirac zero mode, and
//! the two-scale map between envelopes and wavepackets.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bloch::{fix_phase, DiracBasis};
use crate::dirac::DiracOperator;
use crate::error::{FloquetError, Result};
use crate::linalg::{SymCyclic, SymTridiagonal};
use crate::model::{eval_potential, Boundary, DomainWallKind, GridSpec, PotentialSpec};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// `-∂ₓ² + U_ε` on a grid, three-point stencil.
#[derive(Debug, Clone, PartialEq)]
pub struct DwHamiltonian {
    pub grid: GridSpec,
    pub tri: SymTridiagonal,
    /// Wrap entry for periodic grids.
    pub corner: Option<f64>,
}

impl DwHamiltonian {
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        match self.corner {
            Some(c) => SymCyclic { tri: self.tri.clone(), corner: c }.matvec(x),
            None => self.tri.matvec(x),
        }
    }

    pub fn len(&self) -> usize {
        self.tri.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tri.is_empty()
    }

    /// Dense copy, for small cross-checks only.
    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.len();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = self.tri.diag[i];
            if i + 1 < n {
                m[(i, i + 1)] = self.tri.off[i];
                m[(i + 1, i)] = self.tri.off[i];
            }
        }
        if let Some(c) = self.corner {
            m[(0, n - 1)] += c;
            m[(n - 1, 0)] += c;
        }
        m
    }
}

pub fn sample_potential(spec: &PotentialSpec, grid: &GridSpec) -> Vec<f64> {
    (0..grid.len()).map(|j| eval_potential(spec, grid.x(j))).collect()
}

pub fn assemble_dw_hamiltonian(spec: &PotentialSpec, grid: &GridSpec) -> Result<DwHamiltonian> {
    let n = grid.len();
    if n < 3 {
        return Err(FloquetError::Resolution(format!("grid has {n} points")));
    }
    let inv = (grid.points_per_period * grid.points_per_period) as f64;
    let diag: Vec<f64> = sample_potential(spec, grid).into_iter().map(|u| 2.0 * inv + u).collect();
    let off = vec![-inv; n - 1];
    let corner = match grid.boundary {
        Boundary::Periodic => Some(-inv),
        Boundary::Vanishing => None,
    };
    Ok(DwHamiltonian { grid: *grid, tri: SymTridiagonal::new(diag, off)?, corner })
}

/// Normalized eigenpair localized at the wall.
#[derive(Debug, Clone, PartialEq)]
pub struct DefectMode {
    pub energy: f64,
    pub psi: Vec<Complex64>,
    pub grid: GridSpec,
    /// `‖Hψ - Eψ‖` in L².
    pub residual: f64,
    /// Fraction of `|ψ|²` in `|x| ≤ L/2`.
    pub central_mass: f64,
}

/// Outcome of a mid-gap search.
#[derive(Debug, Clone, PartialEq)]
pub struct MidgapSearch {
    /// Localized in-gap eigenpairs, closest to `E_D` first.
    pub modes: Vec<DefectMode>,
    /// In-gap eigenvalues that failed the localization test.
    pub delocalized: Vec<f64>,
}

impl MidgapSearch {
    pub fn primary(&self) -> &DefectMode {
        &self.modes[0]
    }

    pub fn is_ambiguous(&self) -> bool {
        self.modes.len() > 1
    }
}

/// Minimum fraction of `|ψ|²` inside `|x| ≤ L/2` for a localized mode.
pub const LOCALIZATION_MASS: f64 = 0.99;

fn l2_normalize(psi: &mut [f64], dx: f64) {
    let nrm = (dx * psi.iter().map(|v| v * v).sum::<f64>()).sqrt();
    psi.iter_mut().for_each(|v| *v /= nrm);
}

fn central_mass(psi: &[f64], grid: &GridSpec) -> f64 {
    let half = 0.5 * grid.half_length;
    let total: f64 = psi.iter().map(|v| v * v).sum();
    let inner: f64 = psi
        .iter()
        .enumerate()
        .filter(|(j, _)| grid.x(*j).abs() <= half)
        .map(|(_, v)| v * v)
        .sum();
    inner / total
}

fn finish_mode(h: &DwHamiltonian, energy: f64, mut v: Vec<f64>) -> DefectMode {
    let dx = h.grid.dx();
    l2_normalize(&mut v, dx);
    let hv = h.matvec(&v);
    let residual = (dx * hv.iter().zip(&v).map(|(a, b)| (a - energy * b).powi(2)).sum::<f64>()).sqrt();
    let central = central_mass(&v, &h.grid);
    let mut psi: Vec<Complex64> = v.into_iter().map(|r| Complex64::new(r, 0.0)).collect();
    fix_phase(&mut psi);
    DefectMode { energy, psi, grid: h.grid, residual, central_mass: central }
}

// Shift-invert block iteration about `sigma` for the periodic operator.
fn periodic_eigenpairs(h: &DwHamiltonian, sigma: f64, lo: f64, hi: f64) -> Result<Vec<(f64, Vec<f64>)>> {
    const BLOCK: usize = 12;
    let n = h.len();
    let cyc = SymCyclic { tri: h.tri.clone(), corner: h.corner.unwrap_or(0.0) };
    let lu = cyc.shifted(sigma).factor()?;
    let scale = h.tri.gershgorin().1.abs().max(1.0);
    let mut q: Vec<Vec<f64>> = (0..BLOCK)
        .map(|b| (0..n).map(|j| ((j * (b + 1)) as f64 * 0.754_877_666).sin() + 0.1 * b as f64).collect())
        .collect();
    let mut result = Vec::new();
    for _ in 0..80 {
        q = q.iter().map(|v| lu.solve(v)).collect();
        orthonormalize(&mut q);
        let hq: Vec<Vec<f64>> = q.iter().map(|v| h.matvec(v)).collect();
        let mut small = DMatrix::<f64>::zeros(BLOCK, BLOCK);
        for a in 0..BLOCK {
            for b in 0..BLOCK {
                small[(a, b)] = crate::linalg::dot(&q[a], &hq[b]);
            }
        }
        let small = 0.5 * (&small + small.transpose());
        let eig = SymmetricEigen::new(small);
        let mut ritz: Vec<(f64, Vec<f64>, f64)> = (0..BLOCK)
            .map(|c| {
                let y = eig.eigenvectors.column(c);
                let mut v = vec![0.0; n];
                let mut hv = vec![0.0; n];
                for a in 0..BLOCK {
                    for j in 0..n {
                        v[j] += y[a] * q[a][j];
                        hv[j] += y[a] * hq[a][j];
                    }
                }
                let th = eig.eigenvalues[c];
                let res = hv.iter().zip(&v).map(|(x, y)| (x - th * y).powi(2)).sum::<f64>().sqrt();
                (th, v, res)
            })
            .collect();
        let wanted: Vec<&(f64, Vec<f64>, f64)> = ritz.iter().filter(|r| r.0 > lo && r.0 < hi).collect();
        let converged = wanted.iter().all(|r| r.2 <= 1e-12 * scale);
        ritz.sort_by(|a, b| (a.0 - sigma).abs().total_cmp(&(b.0 - sigma).abs()));
        q = ritz.iter().map(|r| r.1.clone()).collect();
        if converged {
            result = ritz.into_iter().filter(|r| r.0 > lo && r.0 < hi).map(|r| (r.0, r.1)).collect();
            break;
        }
        result = ritz
            .into_iter()
            .filter(|r| r.0 > lo && r.0 < hi && r.2 <= 1e-9 * scale)
            .map(|r| (r.0, r.1))
            .collect();
    }
    Ok(result)
}

fn orthonormalize(q: &mut [Vec<f64>]) {
    for a in 0..q.len() {
        for b in 0..a {
            let p = crate::linalg::dot(&q[a], &q[b]);
            let (qa, qb) = (q[a].clone(), &q[b]);
            q[a] = qa.iter().zip(qb).map(|(x, y)| x - p * y).collect();
        }
        let nrm = q[a].iter().map(|v| v * v).sum::<f64>().sqrt();
        q[a].iter_mut().for_each(|v| *v /= nrm);
    }
}

/// Localized eigenpairs with `|E - E_D| < gap_half_width`.
pub fn midgap_mode(h: &DwHamiltonian, e_d: f64, gap_half_width: f64) -> Result<MidgapSearch> {
    if !(gap_half_width > 0.0) {
        return Err(FloquetError::InvalidArgument(format!("gap half-width {gap_half_width}")));
    }
    let (lo, hi) = (e_d - gap_half_width, e_d + gap_half_width);
    let pairs: Vec<(f64, Vec<f64>)> = match h.corner {
        None => h
            .tri
            .eigenvalues_in(lo, hi)
            .into_iter()
            .map(|e| (e, h.tri.inverse_iteration(e)))
            .collect(),
        Some(_) => periodic_eigenpairs(h, e_d, lo, hi)?,
    };
    let mut modes = Vec::new();
    let mut delocalized = Vec::new();
    for (e, v) in pairs {
        let m = finish_mode(h, e, v);
        if m.central_mass >= LOCALIZATION_MASS {
            modes.push(m);
        } else {
            delocalized.push(e);
        }
    }
    if modes.is_empty() {
        return Err(FloquetError::NoDefectMode { lo, hi });
    }
    modes.sort_by(|a, b| (a.energy - e_d).abs().total_cmp(&(b.energy - e_d).abs()));
    Ok(MidgapSearch { modes, delocalized })
}

/// Symmetric slow grid `X_j = (j - J)·h`, `j = 0..=2J`, with vanishing
/// values outside.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlowGrid {
    pub h: f64,
    pub half_points: usize,
}

impl SlowGrid {
    pub fn new(h: f64, half_points: usize) -> Result<Self> {
        if !(h > 0.0) || half_points == 0 {
            return Err(FloquetError::Config(format!("slow grid h = {h}, J = {half_points}")));
        }
        Ok(Self { h, half_points })
    }

    /// Largest symmetric grid with spacing `h` inside `[-half_length, half_length]`.
    pub fn covering(half_length: f64, h: f64) -> Result<Self> {
        Self::new(h, (half_length / h + 1e-9).floor() as usize)
    }

    /// Spacing commensurate with a fast grid: the largest multiple of `ε·dx`
    /// not exceeding `max_h`.
    pub fn commensurate(fast: &GridSpec, eps: f64, max_h: f64) -> Result<Self> {
        let unit = eps * fast.dx();
        let m = ((max_h / unit) + 1e-9).floor().max(1.0);
        Self::covering(eps * fast.half_length, m * unit)
    }

    pub fn len(&self) -> usize {
        2 * self.half_points + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn x(&self, j: usize) -> f64 {
        (j as f64 - self.half_points as f64) * self.h
    }

    pub fn half_length(&self) -> f64 {
        self.half_points as f64 * self.h
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.len()).map(|j| self.x(j)).collect()
    }
}

/// Two-component field on a slow grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinorField {
    pub grid: SlowGrid,
    pub a1: Vec<Complex64>,
    pub a2: Vec<Complex64>,
}

impl SpinorField {
    pub fn zeros(grid: SlowGrid) -> Self {
        let z = vec![Complex64::new(0.0, 0.0); grid.len()];
        Self { grid, a1: z.clone(), a2: z }
    }

    /// Interleaved `(α₁₀, α₂₀, α₁₁, …)`.
    pub fn interleaved(&self) -> Vec<Complex64> {
        self.a1.iter().zip(&self.a2).flat_map(|(&a, &b)| [a, b]).collect()
    }

    pub fn from_interleaved(grid: SlowGrid, v: &[Complex64]) -> Self {
        Self { grid, a1: v.iter().step_by(2).copied().collect(), a2: v.iter().skip(1).step_by(2).copied().collect() }
    }

    pub fn inner(&self, other: &SpinorField) -> Complex64 {
        let s: Complex64 = self
            .a1
            .iter()
            .zip(&other.a1)
            .chain(self.a2.iter().zip(&other.a2))
            .map(|(a, b)| a.conj() * b)
            .sum();
        self.grid.h * s
    }

    pub fn norm(&self) -> f64 {
        self.inner(self).re.sqrt()
    }

    pub fn normalize(&mut self) {
        let n = self.norm();
        self.a1.iter_mut().chain(self.a2.iter_mut()).for_each(|z| *z /= n);
    }

    /// `σ₃α`.
    pub fn sigma3(&self) -> SpinorField {
        Self { grid: self.grid, a1: self.a1.clone(), a2: self.a2.iter().map(|z| -z).collect() }
    }

    /// Linear interpolation; zero outside the grid.
    pub fn sample(&self, x: f64) -> (Complex64, Complex64) {
        let s = x / self.grid.h + self.grid.half_points as f64;
        let last = (self.grid.len() - 1) as f64;
        if s < -1e-9 || s > last + 1e-9 {
            return (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
        }
        let s = s.clamp(0.0, last);
        let j = (s.floor() as usize).min(self.grid.len() - 1);
        let t = s - j as f64;
        if t < 1e-9 || j + 1 >= self.grid.len() {
            return (self.a1[j], self.a2[j]);
        }
        (
            self.a1[j] * (1.0 - t) + self.a1[j + 1] * t,
            self.a2[j] * (1.0 - t) + self.a2[j + 1] * t,
        )
    }

    /// Resampled onto another slow grid.
    pub fn resample(&self, grid: SlowGrid) -> SpinorField {
        let (a1, a2) = (0..grid.len()).map(|j| self.sample(grid.x(j))).unzip();
        SpinorField { grid, a1, a2 }
    }

    /// Largest-magnitude component made real positive.
    pub fn fix_phase(&mut self) {
        let mut all = self.interleaved();
        fix_phase(&mut all);
        *self = Self::from_interleaved(self.grid, &all);
    }

    pub fn abs1(&self) -> Vec<f64> {
        self.a1.iter().map(|z| z.norm()).collect()
    }

    pub fn abs2(&self) -> Vec<f64> {
        self.a2.iter().map(|z| z.norm()).collect()
    }
}

/// `min_θ ‖a - e^{iθ}b‖ / ‖a‖` on `a`'s grid.
pub fn relative_discrepancy(reference: &SpinorField, other: &SpinorField) -> f64 {
    let b = other.resample(reference.grid);
    let na2 = reference.inner(reference).re;
    let nb2 = b.inner(&b).re;
    let cross = reference.inner(&b).norm();
    ((na2 + nb2 - 2.0 * cross).max(0.0) / na2).sqrt()
}

/// `C(1, i·sgn(ϑ♯/v_D))ᵀ exp(-|ϑ♯/v_D| ∫₀^X κ)`, unit norm.
pub fn dirac_zero_mode_analytic(wall: &DomainWallKind, theta: f64, v_d: f64, grid: &SlowGrid) -> Result<SpinorField> {
    if !wall.is_wall() || !(wall.kappa_inf() > 0.0) {
        return Err(FloquetError::InvalidWall(format!("{wall:?} has no sign change")));
    }
    let r = theta / v_d;
    if !(r.abs() > 0.0) || !r.is_finite() {
        return Err(FloquetError::InvalidWall(format!("theta/v_D = {r}")));
    }
    let s = r.signum();
    let f: Vec<f64> = grid.points().iter().map(|&x| (-r.abs() * wall.integral(x)).exp()).collect();
    let a1 = f.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let a2 = f.iter().map(|&v| I * s * v).collect();
    let mut out = SpinorField { grid: *grid, a1, a2 };
    out.normalize();
    out.fix_phase();
    Ok(out)
}

/// Zero mode of the discretized operator, computed in the normalizable
/// chirality sector; returns the mode and its (singular) eigenvalue.
pub fn dirac_zero_mode_numeric(op: &DiracOperator) -> Result<(SpinorField, f64)> {
    let sector = (op.theta / op.v_d).signum();
    let (u, sigma) = op.chiral_block(sector).smallest_singular(1e-15 * op.gap());
    if !(sigma <= 0.5 * op.gap()) {
        return Err(FloquetError::Ambiguous(format!(
            "smallest singular value {sigma:.3e} not isolated from the gap edge {:.3e}",
            op.gap()
        )));
    }
    let a1 = u.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let a2 = u.iter().map(|&v| I * sector * v).collect();
    let mut out = SpinorField { grid: op.grid, a1, a2 };
    out.normalize();
    out.fix_phase();
    Ok((out, sigma))
}

fn check_commensurate(grid: &GridSpec, basis: &DiracBasis) -> Result<()> {
    if basis.cell_points() != grid.points_per_period {
        return Err(FloquetError::Config(format!(
            "Bloch basis has {} points per cell, grid has {}",
            basis.cell_points(),
            grid.points_per_period
        )));
    }
    Ok(())
}

/// `ψ(x) = ε^{1/2}[α₁(εx)Φ₁(x) + α₂(εx)Φ₂(x)]`.
pub fn wavepacket_from_envelope(
    alpha: &SpinorField,
    basis: &DiracBasis,
    eps: f64,
    grid: &GridSpec,
) -> Result<Vec<Complex64>> {
    check_commensurate(grid, basis)?;
    let ratio = alpha.grid.h / (eps * grid.dx());
    if (ratio - ratio.round()).abs() > 1e-9 * ratio.max(1.0) || ratio.round() < 1.0 {
        return Err(FloquetError::Config(format!(
            "slow spacing {} is not a multiple of eps*dx = {}",
            alpha.grid.h,
            eps * grid.dx()
        )));
    }
    let origin = grid.origin() as i64;
    let s = eps.sqrt();
    Ok((0..grid.len())
        .map(|j| {
            let q = j as i64 - origin;
            let (a1, a2) = alpha.sample(eps * grid.x(j));
            s * (a1 * basis.extended(0, q) + a2 * basis.extended(1, q))
        })
        .collect())
}

/// Per-cell demodulation `α_j(εn) = ε^{-1/2}⟨Φ_j, ψ⟩_{cell n}`; slow spacing `ε`.
pub fn envelope_from_wavepacket(
    psi: &[Complex64],
    basis: &DiracBasis,
    eps: f64,
    grid: &GridSpec,
) -> Result<SpinorField> {
    check_commensurate(grid, basis)?;
    if psi.len() != grid.len() {
        return Err(FloquetError::Dimension(format!("psi {} vs grid {}", psi.len(), grid.len())));
    }
    let p = grid.points_per_period as i64;
    let origin = grid.origin() as i64;
    let lo_off = p / 2;
    let cells = ((origin - lo_off) / p).max(0) as usize;
    let slow = SlowGrid::new(eps, cells)?;
    let dx = grid.dx();
    let inv = 1.0 / eps.sqrt();
    let mut a1 = Vec::with_capacity(slow.len());
    let mut a2 = Vec::with_capacity(slow.len());
    for c in 0..slow.len() {
        let n = c as i64 - cells as i64;
        let (mut s1, mut s2) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
        for q in n * p - lo_off..n * p - lo_off + p {
            let val = psi[(q + origin) as usize];
            s1 += basis.extended(0, q).conj() * val;
            s2 += basis.extended(1, q).conj() * val;
        }
        a1.push(s1 * dx * inv);
        a2.push(s2 * dx * inv);
    }
    Ok(SpinorField { grid: slow, a1, a2 })
}
