//! Crank-Nicolson evolution of `i∂ₜψ = (-∂ₓ² + U_ε + 2iεβA(εt)∂ₓ)ψ`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{FloquetError, Result};
use crate::linalg::{cdot, CyclicTridiagonal, Tridiagonal};
use crate::model::{forcing_value, ForcingSpec, GridSpec, PotentialSpec};
use crate::modes::sample_potential;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Time stepping and observer settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolveOptions {
    pub dt: f64,
    pub t_end: f64,
    /// Observer cadence in steps.
    pub stride: usize,
    /// Snapshot times; each is taken at the nearest step.
    #[serde(default)]
    pub snapshot_times: Vec<f64>,
    /// Keep the full state at each snapshot.
    #[serde(default)]
    pub keep_states: bool,
}

impl EvolveOptions {
    pub fn new(dt: f64, t_end: f64, stride: usize) -> Self {
        Self { dt, t_end, stride, snapshot_times: Vec::new(), keep_states: false }
    }

    pub fn steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }

    pub(crate) fn validate(&self, max_dt: Option<f64>) -> Result<()> {
        if !(self.dt > 0.0) || !(self.t_end >= 0.0) || self.stride == 0 {
            return Err(FloquetError::Config(format!(
                "dt = {}, t_end = {}, stride = {}",
                self.dt, self.t_end, self.stride
            )));
        }
        if let Some(m) = max_dt {
            if self.dt > m * (1.0 + 1e-12) {
                return Err(FloquetError::Config(format!(
                    "dt = {} does not resolve the forcing period (max {m:.4e})",
                    self.dt
                )));
            }
        }
        Ok(())
    }
}

/// `|ψ|` on the grid at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub abs: Vec<f64>,
    /// Full state (interleaved for spinors) when requested.
    pub state: Option<Vec<Complex64>>,
}

/// Observer samples of a run.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EvolutionTrace {
    pub times: Vec<f64>,
    pub norms: Vec<f64>,
    /// `⟨ref, ψ(t)⟩` when a reference state was supplied.
    pub projections: Option<Vec<Complex64>>,
    pub snapshots: Vec<Snapshot>,
    /// Spatial coordinates of snapshot samples.
    pub x: Vec<f64>,
}

impl EvolutionTrace {
    pub fn abs_projection(&self) -> Result<Vec<f64>> {
        self.projections
            .as_ref()
            .map(|p| p.iter().map(|z| z.norm()).collect())
            .ok_or_else(|| FloquetError::Config("trace has no projection observer".into()))
    }
}

/// `|⟨ψ★, ψ(t_m)⟩|` from a trace recorded against `ψ★`.
pub fn projection_series(trace: &EvolutionTrace) -> Result<Vec<f64>> {
    trace.abs_projection()
}

/// Observer bookkeeping shared by both evolvers.
pub(crate) struct Recorder<'a> {
    trace: EvolutionTrace,
    reference: Option<&'a [Complex64]>,
    weight: f64,
    snap_steps: Vec<usize>,
    stride: usize,
    stride_abs: usize,
    keep_states: bool,
}

impl<'a> Recorder<'a> {
    pub(crate) fn new(opts: &EvolveOptions, reference: Option<&'a [Complex64]>, weight: f64, x: Vec<f64>, stride_abs: usize) -> Self {
        let mut snap_steps: Vec<usize> = opts
            .snapshot_times
            .iter()
            .map(|&t| (t / opts.dt).round() as usize)
            .collect();
        snap_steps.sort_unstable();
        snap_steps.dedup();
        Self {
            trace: EvolutionTrace { projections: reference.map(|_| Vec::new()), x, ..Default::default() },
            reference,
            weight,
            snap_steps,
            stride: opts.stride,
            stride_abs,
            keep_states: opts.keep_states,
        }
    }

    pub(crate) fn observe(&mut self, step: usize, t: f64, state: &[Complex64]) -> Result<()> {
        let at_snap = self.snap_steps.binary_search(&step).is_ok();
        if step % self.stride != 0 && !at_snap {
            return Ok(());
        }
        let norm = (self.weight * state.iter().map(|z| z.norm_sqr()).sum::<f64>()).sqrt();
        if !norm.is_finite() {
            return Err(FloquetError::NonFinite { step });
        }
        if step % self.stride == 0 {
            self.trace.times.push(t);
            self.trace.norms.push(norm);
            if let (Some(r), Some(p)) = (self.reference, self.trace.projections.as_mut()) {
                p.push(self.weight * cdot(r, state));
            }
        }
        if at_snap {
            let abs = if self.stride_abs == 1 {
                state.iter().map(|z| z.norm()).collect()
            } else {
                state
                    .chunks(self.stride_abs)
                    .map(|c| c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
                    .collect()
            };
            let state = self.keep_states.then(|| state.to_vec());
            self.trace.snapshots.push(Snapshot { t, abs, state });
        }
        Ok(())
    }

    pub(crate) fn finish(self) -> EvolutionTrace {
        self.trace
    }
}

/// One Cayley step of the Schrödinger problem on a fixed grid.
#[derive(Debug, Clone)]
pub struct SchrodingerStepper {
    pub grid: GridSpec,
    pub eps: f64,
    pub forcing: ForcingSpec,
    diag: Vec<f64>,
    inv_dx2: f64,
    periodic: bool,
}

impl SchrodingerStepper {
    pub fn new(spec: &PotentialSpec, forcing: &ForcingSpec, grid: &GridSpec) -> Result<Self> {
        if grid.len() < 3 {
            return Err(FloquetError::Resolution(format!("grid has {} points", grid.len())));
        }
        let inv_dx2 = (grid.points_per_period * grid.points_per_period) as f64;
        let diag = sample_potential(spec, grid).into_iter().map(|u| 2.0 * inv_dx2 + u).collect();
        Ok(Self {
            grid: *grid,
            eps: spec.eps,
            forcing: *forcing,
            diag,
            inv_dx2,
            periodic: grid.boundary == crate::model::Boundary::Periodic,
        })
    }

    /// `(diag, upper, lower)` entries of `H(t)`; `upper = H[j][j+1]`.
    fn entries(&self, t: f64) -> (Complex64, Complex64) {
        let c = 2.0 * self.eps * forcing_value(&self.forcing, self.eps, t);
        let drift = I * c * 0.5 * self.grid.points_per_period as f64;
        let off = Complex64::new(-self.inv_dx2, 0.0);
        (off + drift, off - drift)
    }

    /// `H(t)ψ`.
    pub fn apply_h(&self, t: f64, psi: &[Complex64]) -> Vec<Complex64> {
        let n = psi.len();
        let (up, lo) = self.entries(t);
        let mut out: Vec<Complex64> = psi.iter().zip(&self.diag).map(|(z, d)| z * d).collect();
        for j in 0..n - 1 {
            out[j] += up * psi[j + 1];
            out[j + 1] += lo * psi[j];
        }
        if self.periodic {
            out[n - 1] += up * psi[0];
            out[0] += lo * psi[n - 1];
        }
        out
    }

    /// Advances `psi` from `t` to `t + dt`; `dt < 0` steps backward.
    pub fn step(&self, psi: &mut Vec<Complex64>, t: f64, dt: f64) -> Result<()> {
        self.step_with(psi, t, dt, &mut Scratch::default())
    }

    fn step_with(&self, psi: &mut Vec<Complex64>, t: f64, dt: f64, scratch: &mut Scratch) -> Result<()> {
        let tm = t + 0.5 * dt;
        let (up, lo) = self.entries(tm);
        let a = 0.5 * dt * I;
        let n = psi.len();
        let one = Complex64::new(1.0, 0.0);
        if self.periodic {
            let hpsi = self.apply_h(tm, psi);
            let rhs: Vec<Complex64> = psi.iter().zip(&hpsi).map(|(p, h)| p - a * h).collect();
            let tri = Tridiagonal {
                lower: vec![a * lo; n - 1],
                diag: self.diag.iter().map(|d| one + a * d).collect(),
                upper: vec![a * up; n - 1],
            };
            *psi = CyclicTridiagonal { tri, top_right: a * lo, bottom_left: a * up }.solve_unpivoted(&rhs)?;
            return Ok(());
        }
        // rhs = (I - aH)ψ, then a Thomas sweep for (I + aH) with uniform off-diagonals
        let rhs = &mut scratch.rhs;
        rhs.clear();
        rhs.extend((0..n).map(|j| {
            let mut h = self.diag[j] * psi[j];
            if j + 1 < n {
                h += up * psi[j + 1];
            }
            if j > 0 {
                h += lo * psi[j - 1];
            }
            psi[j] - a * h
        }));
        let (al, au) = (a * lo, a * up);
        let c = &mut scratch.c;
        c.clear();
        c.resize(n, Complex64::new(0.0, 0.0));
        let mut prev_c = Complex64::new(0.0, 0.0);
        let mut prev_r = Complex64::new(0.0, 0.0);
        for j in 0..n {
            let denom = one + a * self.diag[j] - al * prev_c;
            if denom.norm() == 0.0 {
                return Err(FloquetError::Numerical(format!("zero pivot at row {j}")));
            }
            let inv = one / denom;
            prev_c = au * inv;
            prev_r = (rhs[j] - al * prev_r) * inv;
            c[j] = prev_c;
            rhs[j] = prev_r;
        }
        psi[n - 1] = rhs[n - 1];
        for j in (0..n - 1).rev() {
            psi[j] = rhs[j] - c[j] * psi[j + 1];
        }
        Ok(())
    }
}

#[derive(Debug, Default)]
struct Scratch {
    rhs: Vec<Complex64>,
    c: Vec<Complex64>,
}

/// Largest `dt` resolving one slow forcing period with 64 steps.
pub fn max_schrodinger_dt(forcing: &ForcingSpec, eps: f64) -> Option<f64> {
    (forcing.beta > 0.0).then(|| 2.0 * std::f64::consts::PI / (eps * forcing.omega) / 64.0)
}

pub fn evolve_schrodinger(
    spec: &PotentialSpec,
    forcing: &ForcingSpec,
    grid: &GridSpec,
    psi0: &[Complex64],
    reference: Option<&[Complex64]>,
    opts: &EvolveOptions,
) -> Result<EvolutionTrace> {
    opts.validate(max_schrodinger_dt(forcing, spec.eps))?;
    if psi0.len() != grid.len() || reference.is_some_and(|r| r.len() != grid.len()) {
        return Err(FloquetError::Dimension("initial/reference state does not match grid".into()));
    }
    let stepper = SchrodingerStepper::new(spec, forcing, grid)?;
    let mut rec = Recorder::new(opts, reference, grid.dx(), grid.points(), 1);
    let mut psi = psi0.to_vec();
    let mut scratch = Scratch::default();
    rec.observe(0, 0.0, &psi)?;
    for m in 0..opts.steps() {
        let t = m as f64 * opts.dt;
        stepper.step_with(&mut psi, t, opts.dt, &mut scratch).map_err(|e| match e {
            FloquetError::Numerical(msg) => FloquetError::Numerical(format!("step {m}: {msg}")),
            other => other,
        })?;
        if psi.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(FloquetError::NonFinite { step: m + 1 });
        }
        rec.observe(m + 1, (m + 1) as f64 * opts.dt, &psi)?;
    }
    Ok(rec.finish())
}
