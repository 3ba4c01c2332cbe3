//! Potentials, domain walls, forcing and spatial grids.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{FloquetError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Periodic,
    Vanishing,
}

/// Uniform grid `x_j = -L + j·dx`, `j = 0..N`, with `N = 2·L·points_per_period`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub half_length: f64,
    pub points_per_period: usize,
    pub boundary: Boundary,
}

impl GridSpec {
    /// `L·points_per_period` must be an integer so that the integers (cell
    /// boundaries) and `x = 0` are grid points.
    pub fn new(half_length: f64, points_per_period: usize, boundary: Boundary) -> Result<Self> {
        if points_per_period < 8 {
            return Err(FloquetError::Resolution(format!(
                "points_per_period = {points_per_period} < 8"
            )));
        }
        if !(half_length > 0.0) || !half_length.is_finite() {
            return Err(FloquetError::Config(format!("half_length = {half_length} must be positive")));
        }
        let m = half_length * points_per_period as f64;
        if (m - m.round()).abs() > 1e-9 * m.max(1.0) {
            return Err(FloquetError::Config(format!(
                "half_length {half_length} is incommensurate with {points_per_period} points per period"
            )));
        }
        Ok(Self { half_length, points_per_period, boundary })
    }

    pub fn dx(&self) -> f64 {
        1.0 / self.points_per_period as f64
    }

    /// Index of `x = 0`.
    pub fn origin(&self) -> usize {
        (self.half_length * self.points_per_period as f64).round() as usize
    }

    pub fn len(&self) -> usize {
        2 * self.origin()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn x(&self, j: usize) -> f64 {
        (j as f64 - self.origin() as f64) * self.dx()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.len()).map(|j| self.x(j)).collect()
    }
}

/// Unit-periodic bulk profiles `V` and `W`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Bulk {
    /// `V = cos(4πx)`, `W = cos(2πx)`.
    Cosine,
    /// `V = -depth·Q₊(x; radius)`, `W = -depth·Q₋(x; radius)`.
    SquareWells { depth: f64, radius: f64 },
    /// `V = a₁cos(2πx) + a₂cos(4πx)`, `W = cos(2πx)`; a Dirac point needs `a₁ = 0`.
    Trig { a1: f64, a2: f64 },
}

/// Slowly varying wall `κ(X)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DomainWallKind {
    Tanh,
    /// Odd staircase 0, ½, 1 with steps at `y₀ = artanh(½)` and `2y₀`.
    Piecewise,
    /// `sgn(X + shift)`.
    Sign { shift: f64 },
    /// `κ ≡ value`; used for bulk (wall-free) comparisons.
    Constant { value: f64 },
}

/// Step location of the piecewise wall.
pub fn piecewise_step() -> f64 {
    0.5f64.atanh()
}

impl DomainWallKind {
    pub fn eval(&self, y: f64) -> f64 {
        match *self {
            Self::Tanh => y.tanh(),
            Self::Piecewise => {
                let y0 = piecewise_step();
                let a = y.abs();
                let v = if a < y0 {
                    0.0
                } else if a < 2.0 * y0 {
                    0.5
                } else {
                    1.0
                };
                if y < 0.0 {
                    -v
                } else {
                    v
                }
            }
            Self::Sign { shift } => {
                let s = y + shift;
                if s > 0.0 {
                    1.0
                } else if s < 0.0 {
                    -1.0
                } else {
                    0.0
                }
            }
            Self::Constant { value } => value,
        }
    }

    /// `∫₀^X κ(s) ds`.
    pub fn integral(&self, x: f64) -> f64 {
        match *self {
            Self::Tanh => ln_cosh(x),
            Self::Piecewise => {
                let y0 = piecewise_step();
                let a = x.abs();
                // odd κ gives an even primitive
                if a < y0 {
                    0.0
                } else if a < 2.0 * y0 {
                    0.5 * (a - y0)
                } else {
                    0.5 * y0 + (a - 2.0 * y0)
                }
            }
            Self::Sign { shift } => (x + shift).abs() - shift.abs(),
            Self::Constant { value } => value * x,
        }
    }

    /// `κ∞ = lim_{X→+∞} κ(X)`.
    pub fn kappa_inf(&self) -> f64 {
        match *self {
            Self::Tanh | Self::Piecewise | Self::Sign { .. } => 1.0,
            Self::Constant { value } => value,
        }
    }

    /// True when `κ(X) → ±κ∞` with opposite signs at ±∞.
    pub fn is_wall(&self) -> bool {
        !matches!(self, Self::Constant { .. })
    }
}

/// `ln cosh x` without overflow.
pub fn ln_cosh(x: f64) -> f64 {
    let a = x.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

// Points within this distance of a well edge get the half-weight average of
// the two one-sided values.
const JUMP_TOL: f64 = 1e-9;

/// Square function `Θ(x; a)`: 1 inside, 0 outside, ½ on the edge.
pub fn theta(x: f64, a: f64) -> f64 {
    let d = x.abs() - a;
    if d.abs() <= JUMP_TOL {
        0.5
    } else if d < 0.0 {
        1.0
    } else {
        0.0
    }
}

fn nearest_image(x: f64) -> f64 {
    x - x.round()
}

/// `Q±(x; a) = Σ_z Θ(x+z; a) ± Θ(x+z+½; a)` for `a < ¼`.
pub fn q_plus_minus(x: f64, a: f64, sign: f64) -> f64 {
    theta(nearest_image(x), a) + sign * theta(nearest_image(x + 0.5), a)
}

impl Bulk {
    pub fn v(&self, x: f64) -> f64 {
        match *self {
            Self::Cosine => (4.0 * PI * x).cos(),
            Self::SquareWells { depth, radius } => -depth * q_plus_minus(x, radius, 1.0),
            Self::Trig { a1, a2 } => a1 * (2.0 * PI * x).cos() + a2 * (4.0 * PI * x).cos(),
        }
    }

    pub fn w(&self, x: f64) -> f64 {
        match *self {
            Self::Cosine => (2.0 * PI * x).cos(),
            Self::SquareWells { depth, radius } => -depth * q_plus_minus(x, radius, -1.0),
            Self::Trig { .. } => (2.0 * PI * x).cos(),
        }
    }

    /// True if the profile has jump discontinuities.
    pub fn is_discontinuous(&self) -> bool {
        matches!(self, Self::SquareWells { .. })
    }
}

/// `U_ε(x) = V(x) + ε·κ(εx)·W(x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PotentialSpec {
    pub bulk: Bulk,
    pub wall: DomainWallKind,
    pub eps: f64,
}

impl PotentialSpec {
    pub fn v(&self, x: f64) -> f64 {
        self.bulk.v(x)
    }

    pub fn w(&self, x: f64) -> f64 {
        self.bulk.w(x)
    }

    pub fn kappa(&self, big_x: f64) -> f64 {
        self.wall.eval(big_x)
    }

    pub fn with_wall(self, wall: DomainWallKind) -> Self {
        Self { wall, ..self }
    }

    /// Samples `(V, W)` on `n` points of the unit cell `[0, 1)`.
    pub fn sample_cell(&self, n: usize) -> (Vec<f64>, Vec<f64>) {
        let dx = 1.0 / n as f64;
        (0..n).map(|j| (self.v(j as f64 * dx), self.w(j as f64 * dx))).unzip()
    }
}

/// Depth of the square wells in families 2 and 3.
pub const WELL_DEPTH: f64 = 5.0;
/// Radius of the square wells in families 2 and 3.
pub const WELL_RADIUS: f64 = 0.05;
/// Default wall shift of family 3 in slow units (`x + ¼` at `ε = ½`).
pub const FAMILY3_SHIFT: f64 = 0.125;

/// The three built-in potential families.
pub fn builtin_potential(family: u8, eps: f64) -> Result<PotentialSpec> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(FloquetError::InvalidArgument(format!("eps = {eps} not in (0, 1]")));
    }
    let wells = Bulk::SquareWells { depth: WELL_DEPTH, radius: WELL_RADIUS };
    let (bulk, wall) = match family {
        1 => (Bulk::Cosine, DomainWallKind::Tanh),
        2 => (wells, DomainWallKind::Piecewise),
        3 => (wells, DomainWallKind::Sign { shift: FAMILY3_SHIFT }),
        f => return Err(FloquetError::InvalidArgument(format!("unknown family {f}"))),
    };
    Ok(PotentialSpec { bulk, wall, eps })
}

/// Default points per period: square wells need edges on grid points.
pub fn default_points_per_period(family: u8) -> usize {
    if family == 1 {
        64
    } else {
        80
    }
}

/// Default half-length of the Schrödinger domain.
pub fn default_half_length(family: u8) -> f64 {
    if family == 1 {
        400.0
    } else {
        200.0
    }
}

pub fn eval_potential(spec: &PotentialSpec, x: f64) -> f64 {
    spec.v(x) + spec.eps * spec.kappa(spec.eps * x) * spec.w(x)
}

/// Forcing amplitude `β` and slow frequency `ω`; `A(T) = cos(ωT)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForcingSpec {
    pub beta: f64,
    pub omega: f64,
}

impl ForcingSpec {
    pub fn new(beta: f64, omega: f64) -> Result<Self> {
        if !(beta >= 0.0) || !beta.is_finite() {
            return Err(FloquetError::InvalidArgument(format!("beta = {beta} must be >= 0")));
        }
        if !(omega > 0.0) || !omega.is_finite() {
            return Err(FloquetError::InvalidArgument(format!("omega = {omega} must be > 0")));
        }
        Ok(Self { beta, omega })
    }

    pub fn unforced() -> Self {
        Self { beta: 0.0, omega: 1.0 }
    }

    /// `β·A(T)` on the slow clock.
    pub fn slow_value(&self, big_t: f64) -> f64 {
        self.beta * (self.omega * big_t).cos()
    }
}

/// `β·cos(ω·ε·t)`; the Schrödinger evolver multiplies this by `2ε`.
pub fn forcing_value(f: &ForcingSpec, eps: f64, t: f64) -> f64 {
    f.slow_value(eps * t)
}
