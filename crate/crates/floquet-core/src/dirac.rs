//! Effective Dirac operator `D̸₀ = iv_Dσ₃∂_X + ϑ♯κ(X)σ₁` and its forced evolution.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bloch::DiracParameters;
use crate::error::{FloquetError, Result};
use crate::linalg::{Banded, Tridiagonal};
use crate::model::{DomainWallKind, ForcingSpec};
use crate::modes::{SlowGrid, SpinorField};
use crate::schrodinger::{EvolutionTrace, EvolveOptions, Recorder};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Default upper bound on the slow grid spacing.
pub const DEFAULT_MAX_DX: f64 = 0.05;

/// Coefficients of the effective model, including the forcing coupling `c`
/// in `c·βA(T)σ₃`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiracModel {
    pub v_d: f64,
    pub theta: f64,
    pub wall: DomainWallKind,
    pub coupling: f64,
}

/// How the effective coefficients are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DiracPreset {
    /// `v_D`, `ϑ♯` from the Bloch computation; forcing `v_D·βA(T)σ₃`.
    Physical,
    /// `v_D = 1`, `ϑ♯κ∞ = ½`, `κ = tanh`; forcing `βA(T)σ₃`.
    Normalized,
}

impl DiracModel {
    pub fn physical(params: &DiracParameters, wall: DomainWallKind) -> Self {
        Self { v_d: params.v_d, theta: params.theta, wall, coupling: params.v_d }
    }

    pub fn normalized() -> Self {
        Self { v_d: 1.0, theta: 0.5, wall: DomainWallKind::Tanh, coupling: 1.0 }
    }

    /// `|ϑ♯|κ∞`, the edge of the continuous spectrum.
    pub fn gap(&self) -> f64 {
        self.theta.abs() * self.wall.kappa_inf().abs()
    }
}

/// Discretized `D̸₀` on an interleaved two-component grid with vanishing BC.
#[derive(Debug, Clone, PartialEq)]
pub struct DiracOperator {
    pub grid: SlowGrid,
    pub v_d: f64,
    pub theta: f64,
    pub kappa: Vec<f64>,
    pub kappa_inf: f64,
    pub coupling: f64,
    matrix: Banded<Complex64>,
}

pub fn assemble_dirac_operator(model: &DiracModel, grid: &SlowGrid) -> Result<DiracOperator> {
    assemble_dirac_operator_with(model, grid, DEFAULT_MAX_DX)
}

pub fn assemble_dirac_operator_with(model: &DiracModel, grid: &SlowGrid, max_dx: f64) -> Result<DiracOperator> {
    if grid.h > max_dx * (1.0 + 1e-12) {
        return Err(FloquetError::Resolution(format!("dX = {} exceeds {max_dx}", grid.h)));
    }
    if !(model.v_d != 0.0) || !model.v_d.is_finite() || !model.theta.is_finite() {
        return Err(FloquetError::InvalidArgument(format!("v_D = {}, theta = {}", model.v_d, model.theta)));
    }
    let n = grid.len();
    let kappa: Vec<f64> = grid.points().iter().map(|&x| model.wall.eval(x)).collect();
    let mut m = Banded::zeros(2 * n, 2, 2);
    let d = I * model.v_d / (2.0 * grid.h);
    for j in 0..n {
        let (a, b) = (2 * j, 2 * j + 1);
        let k = Complex64::new(model.theta * kappa[j], 0.0);
        m.set(a, b, k);
        m.set(b, a, k);
        if j + 1 < n {
            m.set(a, a + 2, d);
            m.set(a + 2, a, -d);
            m.set(b, b + 2, -d);
            m.set(b + 2, b, d);
        }
    }
    Ok(DiracOperator {
        grid: *grid,
        v_d: model.v_d,
        theta: model.theta,
        kappa,
        kappa_inf: model.wall.kappa_inf(),
        coupling: model.coupling,
        matrix: m,
    })
}

impl DiracOperator {
    pub fn matrix(&self) -> &Banded<Complex64> {
        &self.matrix
    }

    /// `|ϑ♯|κ∞`.
    pub fn gap(&self) -> f64 {
        self.theta.abs() * self.kappa_inf.abs()
    }

    pub fn apply(&self, alpha: &SpinorField) -> SpinorField {
        SpinorField::from_interleaved(self.grid, &self.matrix.matvec(&alpha.interleaved()))
    }

    /// `M_s = v_D·D + s·ϑ♯K` with `D` the centered difference: for
    /// `e± = (1, ±i)/√2`, `D̸₀(u e₊) = i e₋ M₊u` and `D̸₀(w e₋) = i e₊ M₋w`.
    pub fn chiral_block(&self, sector: f64) -> Tridiagonal<f64> {
        let n = self.grid.len();
        let c = self.v_d / (2.0 * self.grid.h);
        Tridiagonal {
            lower: vec![-c; n - 1],
            diag: self.kappa.iter().map(|k| sector * self.theta * k).collect(),
            upper: vec![c; n - 1],
        }
    }

    /// `H(T) = D̸₀ + c·βA(T)σ₃` as a band matrix.
    pub fn forced_matrix(&self, forcing: &ForcingSpec, big_t: f64) -> Banded<Complex64> {
        let mut m = self.matrix.clone();
        let f = Complex64::new(self.coupling * forcing.slow_value(big_t), 0.0);
        for j in 0..self.grid.len() {
            m.add(2 * j, 2 * j, f);
            m.add(2 * j + 1, 2 * j + 1, -f);
        }
        m
    }

    /// Fraction of `‖α‖²` at discrete wavenumbers above half the grid maximum.
    pub fn high_wavenumber_fraction(&self, alpha: &SpinorField) -> f64 {
        high_wavenumber_fraction(&alpha.a1, &alpha.a2)
    }
}

fn high_wavenumber_fraction(a1: &[Complex64], a2: &[Complex64]) -> f64 {
    // Discrete sine transform matches the vanishing boundary condition.
    let n = a1.len();
    let mut high = 0.0;
    let mut total = 0.0;
    let scale = std::f64::consts::PI / (n + 1) as f64;
    for m in 1..=n {
        let mut s1 = Complex64::new(0.0, 0.0);
        let mut s2 = Complex64::new(0.0, 0.0);
        for j in 0..n {
            let w = ((j + 1) as f64 * m as f64 * scale).sin();
            s1 += a1[j] * w;
            s2 += a2[j] * w;
        }
        let p = s1.norm_sqr() + s2.norm_sqr();
        total += p;
        if 2 * m > n {
            high += p;
        }
    }
    if total > 0.0 {
        high / total
    } else {
        0.0
    }
}

/// Largest `dT` resolving one forcing period with 64 steps.
pub fn max_dirac_dt(forcing: &ForcingSpec) -> Option<f64> {
    (forcing.beta > 0.0).then(|| 2.0 * std::f64::consts::PI / forcing.omega / 64.0)
}

/// Cayley stepping of `i∂_Tα = (D̸₀ + c·βA(T)σ₃)α`; projections are
/// `g(T) = ⟨reference, α(T)⟩`.
pub fn evolve_dirac(
    op: &DiracOperator,
    forcing: &ForcingSpec,
    alpha0: &SpinorField,
    reference: Option<&SpinorField>,
    opts: &EvolveOptions,
) -> Result<EvolutionTrace> {
    opts.validate(max_dirac_dt(forcing))?;
    if alpha0.grid != op.grid || reference.is_some_and(|r| r.grid != op.grid) {
        return Err(FloquetError::Dimension("spinor grid does not match operator".into()));
    }
    let ref_vec = reference.map(|r| r.interleaved());
    let mut rec = Recorder::new(opts, ref_vec.as_deref(), op.grid.h, op.grid.points(), 2);
    let mut state = alpha0.interleaved();
    rec.observe(0, 0.0, &state)?;
    let a = 0.5 * opts.dt * I;
    let one = Complex64::new(1.0, 0.0);
    for m in 0..opts.steps() {
        let tm = (m as f64 + 0.5) * opts.dt;
        let h = op.forced_matrix(forcing, tm);
        let rhs = h.scaled_plus_identity(-a, one).matvec(&state);
        state = h
            .scaled_plus_identity(a, one)
            .solve_unpivoted(&rhs)
            .map_err(|e| FloquetError::Numerical(format!("step {m}: {e}")))?;
        if state.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(FloquetError::NonFinite { step: m + 1 });
        }
        rec.observe(m + 1, (m + 1) as f64 * opts.dt, &state)?;
    }
    Ok(rec.finish())
}

/// `g(T_m)` from a trace recorded against `α★`.
pub fn g_series(trace: &EvolutionTrace) -> Result<Vec<Complex64>> {
    trace
        .projections
        .clone()
        .ok_or_else(|| FloquetError::Config("trace has no projection observer".into()))
}
