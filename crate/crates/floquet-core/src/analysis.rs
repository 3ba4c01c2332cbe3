//! Golden-rule quantities and decay fits.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dirac::DiracOperator;
use crate::error::{FloquetError, Result};
use crate::linalg::Banded;
use crate::model::ForcingSpec;
use crate::modes::SpinorField;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Largest slow grid accepted by [`SpectralData::compute`] (dense eigensolve).
pub const MAX_DENSE_POINTS: usize = 2500;

/// Eigenpairs of the discretized `D̸₀` with the coupling weights of `σ₃α★`.
#[derive(Debug, Clone)]
pub struct SpectralData {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Vec<SpinorField>,
    /// Indices of the zero-mode pair (the wall mode and its lattice partner).
    pub zero_indices: Vec<usize>,
    /// `w_n = |⟨φ_n, σ₃α★⟩|²`.
    pub weights: Vec<f64>,
    /// `c` in the forcing `c·βA(T)σ₃`.
    pub coupling: f64,
}

impl SpectralData {
    /// Eigenpairs of the real symmetric form `S = [[0, Mᵀ], [M, 0]]` in the chiral
    /// basis `α = u e₊ + i w e₋`, from the dense eigensolve of `MᵀM`:
    /// `S(v, ±u) = ±σ(v, ±u)` for each singular triple `Mv = σu`.
    pub fn compute(op: &DiracOperator, zero_mode: &SpinorField) -> Result<Self> {
        let n = op.grid.len();
        if n > MAX_DENSE_POINTS {
            return Err(FloquetError::Config(format!(
                "dense spectrum limited to {MAX_DENSE_POINTS} slow points, got {n}"
            )));
        }
        let m = op.chiral_block(1.0);
        let mut dense = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            dense[(i, i)] = m.diag[i];
            if i + 1 < n {
                dense[(i, i + 1)] = m.upper[i];
                dense[(i + 1, i)] = m.lower[i];
            }
        }
        let eig = SymmetricEigen::new(dense.transpose() * &dense);
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let cut = 0.5 * op.gap();
        let mut pairs: Vec<(f64, Vec<f64>, Vec<f64>)> = Vec::with_capacity(2 * n);
        for (rank, &c) in order.iter().enumerate() {
            let mut v: Vec<f64> = eig.eigenvectors.column(c).iter().copied().collect();
            let mut sigma = eig.eigenvalues[c].max(0.0).sqrt();
            let u: Vec<f64> = if rank == 0 && sigma < cut {
                // √λ and Mv/σ lose all precision near zero; use inverse iteration
                // on M and Mᵀ for this pair
                (v, sigma) = m.smallest_singular(1e-15 * op.gap());
                let (mut u, _) = m.transpose().smallest_singular(1e-15 * op.gap());
                if crate::linalg::dot(&u, &m.matvec(&v)) < 0.0 {
                    u.iter_mut().for_each(|x| *x = -*x);
                }
                u
            } else {
                m.matvec(&v).iter().map(|x| x / sigma).collect()
            };
            let neg: Vec<f64> = u.iter().map(|x| -x).collect();
            pairs.push((sigma, v.clone(), u));
            pairs.push((-sigma, v, neg));
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let inv_h = 1.0 / op.grid.h.sqrt();
        let s3 = zero_mode.sigma3();
        let mut eigenvalues = Vec::with_capacity(2 * n);
        let mut eigenvectors = Vec::with_capacity(2 * n);
        let mut weights = Vec::with_capacity(2 * n);
        for (e, v, u) in pairs {
            // column (v, ±u)/√2 of S; α₁ = (a + ib)/√2, α₂ = (ia + b)/√2
            let a1 = (0..n).map(|j| 0.5 * inv_h * Complex64::new(v[j], u[j])).collect();
            let a2 = (0..n).map(|j| 0.5 * inv_h * Complex64::new(u[j], v[j])).collect();
            let vec = SpinorField { grid: op.grid, a1, a2 };
            weights.push(vec.inner(&s3).norm_sqr());
            eigenvalues.push(e);
            eigenvectors.push(vec);
        }
        let zero_indices = (0..eigenvalues.len()).filter(|&i| eigenvalues[i].abs() < cut).collect();
        Ok(Self { eigenvalues, eigenvectors, zero_indices, weights, coupling: op.coupling })
    }

    fn continuum(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        (0..self.eigenvalues.len())
            .filter(|i| !self.zero_indices.contains(i))
            .map(|i| (self.eigenvalues[i], self.weights[i]))
    }

    /// Mean spacing of continuum levels within `±window` of `|E| = ω`.
    pub fn level_spacing_near(&self, omega: f64, window: f64) -> f64 {
        let mut near: Vec<f64> = self
            .continuum()
            .map(|(e, _)| e)
            .filter(|e| (e.abs() - omega).abs() <= window && *e > 0.0)
            .collect();
        near.sort_by(f64::total_cmp);
        if near.len() < 2 {
            return window;
        }
        (near[near.len() - 1] - near[0]) / (near.len() - 1) as f64
    }

    /// 4× the local level spacing.
    pub fn default_broadening(&self, omega: f64) -> f64 {
        4.0 * self.level_spacing_near(omega, 0.05 * omega.max(self.gap_estimate()))
    }

    fn gap_estimate(&self) -> f64 {
        self.continuum().map(|(e, _)| e.abs()).fold(f64::INFINITY, f64::min)
    }
}

fn lorentzian(e: f64, eta: f64) -> f64 {
    eta / PI / (e * e + eta * eta)
}

/// `Γ₀ = (π/4)c²Σ_{n∉zero} w_n[L_η(E_n + ω) + L_η(E_n - ω)]`.
pub fn gamma0(spec: &SpectralData, omega: f64, eta: f64) -> Result<f64> {
    if !(omega > 0.0) || !(eta > 0.0) {
        return Err(FloquetError::InvalidArgument(format!("omega = {omega}, eta = {eta}")));
    }
    let s: f64 = spec
        .continuum()
        .map(|(e, w)| w * (lorentzian(e + omega, eta) + lorentzian(e - omega, eta)))
        .sum();
    Ok(0.25 * PI * spec.coupling * spec.coupling * s)
}

/// True when `η` is below the local level spacing (δ under-smoothed).
pub fn is_undersmoothed(spec: &SpectralData, omega: f64, eta: f64) -> bool {
    eta < spec.level_spacing_near(omega, 0.05 * omega)
}

/// `Λ₀ = (1/4)c²Σ_{n∉zero} w_n[R(E_n + ω) + R(E_n - ω)]`, `R(e) = e/(e² + cutoff²)`.
pub fn lambda0(spec: &SpectralData, omega: f64, pv_cutoff: f64) -> f64 {
    let r = |e: f64| e / (e * e + pv_cutoff * pv_cutoff);
    let s: f64 = spec.continuum().map(|(e, w)| w * (r(e + omega) + r(e - omega))).sum();
    0.25 * spec.coupling * spec.coupling * s
}

/// Complex absorbing layer for the resolvent evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Absorber {
    /// Width of the layer at each end of the slow domain.
    pub width: f64,
    /// `W = strength·((|X| - X₀)/width)²` inside the layer.
    pub strength: f64,
}

impl Default for Absorber {
    fn default() -> Self {
        Self { width: 80.0, strength: 1.0 }
    }
}

/// `(Γ₀, Λ₀)` from `⟨f, (D̸₀ - iW - λ)⁻¹ f⟩` at `λ = ±ω`, `f = c·𝒫_cσ₃α★`.
pub fn fgr_resolvent(op: &DiracOperator, zero_mode: &SpinorField, omega: f64, absorber: &Absorber) -> Result<(f64, f64)> {
    if !(omega > 0.0) {
        return Err(FloquetError::InvalidArgument(format!("omega = {omega}")));
    }
    let half = op.grid.half_length();
    if !(absorber.width > 0.0 && absorber.width < half) {
        return Err(FloquetError::Config(format!(
            "absorber width {} must lie in (0, {half})",
            absorber.width
        )));
    }
    let s3 = zero_mode.sigma3();
    let overlap = zero_mode.inner(&s3);
    let mut f = s3.clone();
    for (fv, zv) in f.a1.iter_mut().chain(f.a2.iter_mut()).zip(zero_mode.a1.iter().chain(&zero_mode.a2)) {
        *fv = op.coupling * (*fv - overlap * zv);
    }
    let fv = f.interleaved();
    let x0 = half - absorber.width;
    let mut base: Banded<Complex64> = op.matrix().clone();
    for j in 0..op.grid.len() {
        let r = ((op.grid.x(j).abs() - x0) / absorber.width).max(0.0);
        let w = Complex64::new(0.0, -absorber.strength * r * r);
        base.add(2 * j, 2 * j, w);
        base.add(2 * j + 1, 2 * j + 1, w);
    }
    let mut total = Complex64::new(0.0, 0.0);
    for lam in [omega, -omega] {
        let m = base.scaled_plus_identity(Complex64::new(1.0, 0.0), Complex64::new(-lam, 0.0));
        let u = m.lu().solve(&fv);
        total += op.grid.h * crate::linalg::cdot(&fv, &u);
    }
    Ok((0.25 * total.im, 0.25 * total.re))
}

/// `Γ₀(ω)` by the absorbing-layer resolvent.
pub fn gamma0_resolvent(op: &DiracOperator, zero_mode: &SpinorField, omega: f64, absorber: &Absorber) -> Result<f64> {
    fgr_resolvent(op, zero_mode, omega, absorber).map(|r| r.0)
}

/// `η_A(T) = ⟨α★, σ₃α★⟩·sin(ωT)/ω`.
pub fn eta_a(zero_mode: &SpinorField, forcing: &ForcingSpec, big_t: f64) -> f64 {
    let s = zero_mode.inner(&zero_mode.sigma3()).re;
    s * (forcing.omega * big_t).sin() / forcing.omega
}

/// Leading-order `g(T; β) = e^{i(βη_A(T) + β²Λ₀T)}e^{-Γ₀β²T}`.
pub fn predicted_g(gamma0: f64, lambda0: f64, eta_a: f64, beta: f64, big_t: f64) -> Complex64 {
    let phase = beta * eta_a + beta * beta * lambda0 * big_t;
    (I * phase).exp() * (-gamma0 * beta * beta * big_t).exp()
}

/// Fit window for exponential decay.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitWindow {
    pub t_min: f64,
    pub t_max: f64,
    /// Samples at or below this value end the window.
    pub floor: f64,
}

impl FitWindow {
    /// Excludes `t < 5/ω` and the tail below `1e-3`.
    pub fn for_forcing(omega: f64, t_max: f64) -> Self {
        Self { t_min: 5.0 / omega, t_max, floor: 1e-3 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub rate: f64,
    pub amplitude: f64,
    /// RMS of `log y - fit` over the window.
    pub residual: f64,
    pub t_min: f64,
    pub t_max: f64,
    pub samples: usize,
    /// Window ended early at a sample below the floor.
    pub shrunk: bool,
    /// Negative slope clamped to zero rate.
    pub clamped: bool,
}

fn line_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let rms = (x.iter().zip(y).map(|(a, b)| (b - icpt - slope * a).powi(2)).sum::<f64>() / n).sqrt();
    (slope, icpt, rms)
}

/// Least-squares line through `log y` over the window; `Γ = -slope`.
pub fn fit_exponential_decay(t: &[f64], y: &[f64], window: &FitWindow) -> Result<DecayFit> {
    if t.len() != y.len() {
        return Err(FloquetError::Dimension(format!("{} times vs {} values", t.len(), y.len())));
    }
    let mut xs = Vec::new();
    let mut ls = Vec::new();
    let mut shrunk = false;
    for (&ti, &yi) in t.iter().zip(y) {
        if ti < window.t_min || ti > window.t_max {
            continue;
        }
        if !(yi > window.floor.max(0.0)) {
            shrunk = true;
            break;
        }
        xs.push(ti);
        ls.push(yi.ln());
    }
    if xs.len() < 10 {
        return Err(FloquetError::InvalidArgument(format!(
            "fit window [{}, {}] holds {} samples, need 10",
            window.t_min,
            window.t_max,
            xs.len()
        )));
    }
    let (slope, icpt, rms) = line_fit(&xs, &ls);
    let clamped = slope > 0.0;
    Ok(DecayFit {
        rate: if clamped { 0.0 } else { -slope },
        amplitude: icpt.exp(),
        residual: rms,
        t_min: xs[0],
        t_max: xs[xs.len() - 1],
        samples: xs.len(),
        shrunk,
        clamped,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub exponent: f64,
    pub prefactor: f64,
    pub residual: f64,
}

/// `Γ ≈ prefactor·β^exponent` by least squares in log-log.
pub fn fit_power_law(betas: &[f64], gammas: &[f64]) -> Result<PowerLawFit> {
    if betas.len() != gammas.len() || betas.len() < 3 {
        return Err(FloquetError::InvalidArgument(format!(
            "need >= 3 (beta, gamma) pairs, got {} and {}",
            betas.len(),
            gammas.len()
        )));
    }
    if betas.iter().chain(gammas).any(|v| !(*v > 0.0)) {
        return Err(FloquetError::InvalidArgument("power-law inputs must be positive".into()));
    }
    let lx: Vec<f64> = betas.iter().map(|b| b.ln()).collect();
    let ly: Vec<f64> = gammas.iter().map(|g| g.ln()).collect();
    let (slope, icpt, rms) = line_fit(&lx, &ly);
    Ok(PowerLawFit { exponent: slope, prefactor: icpt.exp(), residual: rms })
}
