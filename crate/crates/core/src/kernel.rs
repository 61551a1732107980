//! Pointwise two-point kernels of the free massive scalar field in 1+1 dimensions.
//!
//! With `λ = dt² − dx²`,
//!
//! ```text
//! Δ_PJ(dt, dx) = −½ sign(dt) θ(λ) J₀(m√λ)
//! H(dt, dx)    = −½ θ(λ) Y₀(m√λ) + (1/π) θ(−λ) K₀(m√−λ)
//! ```

use std::f64::consts::FRAC_1_PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::specfun;

/// Smallest admissible mass. The 1+1 massless limit is infrared divergent.
pub const MASS_MIN: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum KernelError {
    #[error("mass {0} is below the infrared guard {MASS_MIN} or not finite")]
    InvalidMass(f64),
    #[error("Hadamard kernel evaluated on the light cone (dt = {dt}, dx = {dx})")]
    SingularPoint { dt: f64, dx: f64 },
}

/// Field mass in inverse length units.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Mass(f64);

impl Mass {
    pub fn new(m: f64) -> Result<Self, KernelError> {
        if m.is_finite() && m >= MASS_MIN {
            Ok(Self(m))
        } else {
            Err(KernelError::InvalidMass(m))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for Mass {
    type Error = KernelError;

    fn try_from(m: f64) -> Result<Self, Self::Error> {
        Mass::new(m)
    }
}

impl From<Mass> for f64 {
    fn from(m: Mass) -> f64 {
        m.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpacetimePoint {
    pub t: f64,
    pub x: f64,
}

impl SpacetimePoint {
    pub fn new(t: f64, x: f64) -> Self {
        Self { t, x }
    }

    /// Separation `self − other` as `(dt, dx)`.
    pub fn separation(self, other: SpacetimePoint) -> (f64, f64) {
        (self.t - other.t, self.x - other.x)
    }
}

/// The Minkowski interval `dt² − dx²`.
pub fn interval(dt: f64, dx: f64) -> f64 {
    dt * dt - dx * dx
}

/// Pauli-Jordan commutator kernel. Exactly zero off the open future and past cones
/// and on the `dt = 0` slice.
pub fn pauli_jordan(dt: f64, dx: f64, m: Mass) -> f64 {
    let lambda = interval(dt, dx);
    if lambda <= 0.0 || dt == 0.0 {
        return 0.0;
    }
    -0.5 * dt.signum() * specfun::j0(m.0 * lambda.sqrt())
}

/// Hadamard kernel. The light cone `λ = 0` carries an integrable logarithmic
/// singularity and is rejected.
pub fn hadamard(dt: f64, dx: f64, m: Mass) -> Result<f64, KernelError> {
    let lambda = interval(dt, dx);
    if lambda == 0.0 {
        return Err(KernelError::SingularPoint { dt, dx });
    }
    Ok(hadamard_at(lambda, m.0))
}

/// Hadamard kernel as a function of `λ ≠ 0`.
#[inline]
pub(crate) fn hadamard_at(lambda: f64, m: f64) -> f64 {
    if lambda > 0.0 {
        -0.5 * specfun::y0(m * lambda.sqrt())
    } else {
        FRAC_1_PI * specfun::k0(m * (-lambda).sqrt())
    }
}

/// Pauli-Jordan kernel in light-cone separations `du = dx + dt`, `dv = dx − dt`,
/// where `λ = −du·dv` and `sign(dt) = sign(du − dv)`.
#[inline]
pub(crate) fn pauli_jordan_lightcone(du: f64, dv: f64, m: f64) -> f64 {
    let lambda = -du * dv;
    if lambda <= 0.0 {
        return 0.0;
    }
    -0.5 * (du - dv).signum() * specfun::j0(m * lambda.sqrt())
}
