//! Smooth bump test functions supported on causal diamonds centered on the `t = 0` axis.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kernel::Mass;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TestFnError {
    #[error("invalid {field}: {value}")]
    Invalid { field: &'static str, value: f64 },
}

fn positive(field: &'static str, value: f64) -> Result<f64, TestFnError> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(TestFnError::Invalid { field, value })
    }
}

fn finite(field: &'static str, value: f64) -> Result<f64, TestFnError> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(TestFnError::Invalid { field, value })
    }
}

/// `amplitude · exp(−sharpness / (radius² − s²))` for `s = |x − center_x| + |t| < radius`,
/// zero elsewhere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiamondBump {
    pub center_x: f64,
    pub radius: f64,
    pub sharpness: f64,
    pub amplitude: f64,
}

impl DiamondBump {
    pub fn new(center_x: f64, radius: f64, sharpness: f64, amplitude: f64) -> Result<Self, TestFnError> {
        Ok(Self {
            center_x: finite("center_x", center_x)?,
            radius: positive("radius", radius)?,
            sharpness: positive("sharpness", sharpness)?,
            amplitude: finite("amplitude", amplitude)?,
        })
    }

    /// Value at `(t, x)`.
    pub fn value(&self, t: f64, x: f64) -> f64 {
        self.profile((x - self.center_x).abs() + t.abs())
    }

    /// Value at light-cone coordinates `u = x + t`, `v = x − t`, where the diamond
    /// distance becomes `max(|u − c|, |v − c|)`.
    #[inline]
    pub fn value_lightcone(&self, u: f64, v: f64) -> f64 {
        self.profile((u - self.center_x).abs().max((v - self.center_x).abs()))
    }

    /// Radial profile as a function of the diamond distance `s`.
    #[inline]
    pub fn profile(&self, s: f64) -> f64 {
        if s >= self.radius {
            return 0.0;
        }
        let gap = (self.radius - s) * (self.radius + s);
        self.amplitude * (-self.sharpness / gap).exp()
    }

    /// `−d profile / ds`. The bump equals `∫_s^R layer_weight(σ) dσ`, i.e. it is a
    /// superposition of indicator functions of nested diamonds.
    #[inline]
    pub fn layer_weight(&self, s: f64) -> f64 {
        if s >= self.radius || s < 0.0 {
            return 0.0;
        }
        let gap = (self.radius - s) * (self.radius + s);
        self.amplitude * (-self.sharpness / gap).exp() * 2.0 * self.sharpness * s / (gap * gap)
    }

    /// Diamond distance at which the profile has fallen to `fraction` of its peak,
    /// for `0 < fraction ≤ 1`.
    pub fn level_radius(&self, fraction: f64) -> f64 {
        let r2 = self.radius * self.radius;
        let gap = self.sharpness / (self.sharpness / r2 - fraction.ln());
        (r2 - gap).max(0.0).sqrt()
    }

    /// Spatial extent `[center − radius, center + radius]` of the support on `t = 0`.
    pub fn support_interval(&self) -> (f64, f64) {
        (self.center_x - self.radius, self.center_x + self.radius)
    }

    pub fn with_amplitude(mut self, amplitude: f64) -> Self {
        self.amplitude = amplitude;
        self
    }
}

/// Diamond `|x − R| + |t| ≤ R` (Alice's wedge, touching the origin).
pub fn right_diamond(radius: f64, sharpness: f64, amplitude: f64) -> Result<DiamondBump, TestFnError> {
    DiamondBump::new(radius, radius, sharpness, amplitude)
}

/// Diamond `|x + R| + |t| ≤ R` (Bob's wedge).
pub fn left_diamond(radius: f64, sharpness: f64, amplitude: f64) -> Result<DiamondBump, TestFnError> {
    DiamondBump::new(-radius, radius, sharpness, amplitude)
}

/// Diamond `|x − d − 3R| + |t| ≤ R`, covering `x ∈ [d + 2R, d + 4R]`: a gap `d`
/// to the right of the right diamond of the same radius.
pub fn third_diamond(radius: f64, gap: f64, sharpness: f64, amplitude: f64) -> Result<DiamondBump, TestFnError> {
    if !(gap.is_finite() && gap >= 0.0) {
        return Err(TestFnError::Invalid { field: "d", value: gap });
    }
    DiamondBump::new(gap + 3.0 * radius, radius, sharpness, amplitude)
}

/// Spatial gap between the two supports on the `t = 0` axis (negative when they overlap).
pub fn spatial_gap(a: &DiamondBump, b: &DiamondBump) -> f64 {
    (a.center_x - b.center_x).abs() - a.radius - b.radius
}

/// Every point of one diamond is spacelike or null separated from every point of the other.
/// For diamonds centered on a common time slice this holds iff the closures touch at most
/// at a single point. Tangency is decided up to rounding in the centers.
pub fn supports_spacelike(a: &DiamondBump, b: &DiamondBump) -> bool {
    spatial_gap(a, b) >= -1e-12 * (a.radius + b.radius)
}

/// Parameters of the Bell-CHSH configuration: `f, f′` on the right diamonds,
/// `g, g′` on the left ones. Primed functions use the primed radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BellParameters {
    pub a: f64,
    pub eta: f64,
    pub b: f64,
    pub sigma: f64,
    pub a_prime: f64,
    pub eta_prime: f64,
    pub b_prime: f64,
    pub sigma_prime: f64,
    pub m: Mass,
    #[serde(rename = "R")]
    pub r: f64,
    #[serde(rename = "R_prime")]
    pub r_prime: f64,
}

impl BellParameters {
    pub fn validate(&self) -> Result<(), TestFnError> {
        self.f()?;
        self.f_prime()?;
        self.g()?;
        self.g_prime()?;
        Ok(())
    }

    pub fn f(&self) -> Result<DiamondBump, TestFnError> {
        right_diamond(self.r, self.a, self.eta)
    }

    pub fn f_prime(&self) -> Result<DiamondBump, TestFnError> {
        right_diamond(self.r_prime, self.a_prime, self.eta_prime)
    }

    pub fn g(&self) -> Result<DiamondBump, TestFnError> {
        left_diamond(self.r, self.b, self.sigma)
    }

    pub fn g_prime(&self) -> Result<DiamondBump, TestFnError> {
        left_diamond(self.r_prime, self.b_prime, self.sigma_prime)
    }
}

/// Mermin-3 configuration: the Bell diamonds plus `h, h′` on a third diamond to the right.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MerminParameters {
    #[serde(flatten)]
    pub bell: BellParameters,
    pub p: f64,
    pub p_prime: f64,
    pub zeta: f64,
    pub zeta_prime: f64,
    pub d: f64,
    pub d_prime: f64,
}

impl MerminParameters {
    pub fn validate(&self) -> Result<(), TestFnError> {
        self.bell.validate()?;
        self.h()?;
        self.h_prime()?;
        Ok(())
    }

    pub fn h(&self) -> Result<DiamondBump, TestFnError> {
        third_diamond(self.bell.r, self.d, self.p, self.zeta)
    }

    /// Centered at `d′ + 3R′` with radius `R′`.
    pub fn h_prime(&self) -> Result<DiamondBump, TestFnError> {
        third_diamond(self.bell.r_prime, self.d_prime, self.p_prime, self.zeta_prime)
    }
}

/// Cluster check: `f` on the right diamond and `h` on a diamond of the same radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClusterParameters {
    pub a: f64,
    pub eta: f64,
    pub p: f64,
    pub zeta: f64,
    #[serde(rename = "R")]
    pub r: f64,
    pub m: Mass,
    /// Center of `h`; `d + 3R` when the gap `d` is given.
    pub h_center: f64,
}

impl ClusterParameters {
    /// `h` placed a gap `d` to the right of `f`.
    pub fn with_gap(a: f64, eta: f64, p: f64, zeta: f64, r: f64, m: Mass, d: f64) -> Self {
        Self {
            a,
            eta,
            p,
            zeta,
            r,
            m,
            h_center: d + 3.0 * r,
        }
    }

    pub fn f(&self) -> Result<DiamondBump, TestFnError> {
        right_diamond(self.r, self.a, self.eta)
    }

    pub fn h(&self) -> Result<DiamondBump, TestFnError> {
        DiamondBump::new(self.h_center, self.r, self.p, self.zeta)
    }

    /// Minimum spatial distance between the two supports.
    pub fn gap(&self) -> Result<f64, TestFnError> {
        Ok(spatial_gap(&self.f()?, &self.h()?))
    }
}
