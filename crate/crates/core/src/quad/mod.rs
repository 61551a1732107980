//! Smeared bilinears `H(f, g)` and `Δ_PJ(f, g)` as four-dimensional integrals over
//! products of diamond supports, in light-cone coordinates `u = x + t`, `v = x − t`.
//!
//! Three backends: the deterministic layer-cake rule, randomly shifted Sobol
//! points, and plain Monte Carlo.

pub mod cache;
pub mod corner;
pub mod gauss;
pub(crate) mod layer;
pub(crate) mod sampling;
pub mod sobol;
pub mod suite;

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use cache::{cache_key, BilinearCache};
pub use corner::KernelKind;

use crate::kernel::Mass;
use crate::testfn::DiamondBump;

/// `dt dx = ½ du dv` for each spacetime point.
pub const LIGHTCONE_JACOBIAN: f64 = 0.5;
pub const MIN_POINTS_PER_AXIS: usize = 8;
pub const MAX_POINTS_PER_AXIS: usize = 96;
pub const MIN_SAMPLE_COUNT: u64 = 10_000;
pub const MAX_LIGHTCONE_CLAMP: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    Deterministic,
    Qmc,
    McOracle,
}

impl std::fmt::Display for Backend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Backend::Deterministic => "deterministic",
            Backend::Qmc => "qmc",
            Backend::McOracle => "mc_oracle",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadError {
    #[error("points_per_axis must be in [{MIN_POINTS_PER_AXIS}, {MAX_POINTS_PER_AXIS}], got {0}")]
    PointsPerAxis(usize),
    #[error("sample_count must be at least {MIN_SAMPLE_COUNT}, got {0}")]
    SampleCount(u64),
    #[error("lightcone_clamp {0} is not positive: the Hadamard kernel is singular on the light cone λ = 0")]
    SingularPoint(f64),
    #[error("lightcone_clamp {0} exceeds {MAX_LIGHTCONE_CLAMP}")]
    ClampTooLarge(f64),
    #[error("target_rel_error must be positive and finite, got {0}")]
    Target(f64),
}

/// Quadrature configuration. `points_per_axis` is the Gauss-Legendre order per axis
/// on every piece of the deterministic outer rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadSettings {
    pub backend: Backend,
    pub points_per_axis: usize,
    pub sample_count: u64,
    pub lightcone_clamp: f64,
    pub seed: u64,
    pub target_rel_error: f64,
}

impl Default for QuadSettings {
    fn default() -> Self {
        Self {
            backend: Backend::Deterministic,
            points_per_axis: 12,
            sample_count: 1 << 19,
            lightcone_clamp: 1e-10,
            seed: 0x5eed_d1a3,
            target_rel_error: 1e-3,
        }
    }
}

impl QuadSettings {
    /// Cheapest admissible deterministic rule, for searches.
    pub fn fast() -> Self {
        Self {
            points_per_axis: MIN_POINTS_PER_AXIS,
            ..Self::default()
        }
    }

    pub fn with_backend(mut self, backend: Backend) -> Self {
        self.backend = backend;
        self
    }

    pub fn validate(&self) -> Result<(), QuadError> {
        if !(MIN_POINTS_PER_AXIS..=MAX_POINTS_PER_AXIS).contains(&self.points_per_axis) {
            return Err(QuadError::PointsPerAxis(self.points_per_axis));
        }
        if self.sample_count < MIN_SAMPLE_COUNT {
            return Err(QuadError::SampleCount(self.sample_count));
        }
        if !(self.lightcone_clamp > 0.0) {
            return Err(QuadError::SingularPoint(self.lightcone_clamp));
        }
        if self.lightcone_clamp > MAX_LIGHTCONE_CLAMP {
            return Err(QuadError::ClampTooLarge(self.lightcone_clamp));
        }
        if !(self.target_rel_error.is_finite() && self.target_rel_error > 0.0) {
            return Err(QuadError::Target(self.target_rel_error));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BilinearResult {
    pub value: f64,
    pub error_estimate: f64,
    pub backend: Backend,
    pub evaluation_count: u64,
    /// `error_estimate` met the settings' target.
    pub converged: bool,
}

/// Axis-aligned square occupied by a diamond in `(u, v)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LightconeBox {
    pub u: (f64, f64),
    pub v: (f64, f64),
}

impl LightconeBox {
    /// Area in `(u, v)`; the spacetime area is `LIGHTCONE_JACOBIAN` times this.
    pub fn area(&self) -> f64 {
        (self.u.1 - self.u.0) * (self.v.1 - self.v.0)
    }
}

pub fn lightcone_box(b: &DiamondBump) -> LightconeBox {
    let side = (b.center_x - b.radius, b.center_x + b.radius);
    LightconeBox { u: side, v: side }
}

/// Quadrature engine with an optional shared cache.
#[derive(Debug, Clone)]
pub struct Quadrature {
    settings: QuadSettings,
    cache: Option<Arc<BilinearCache>>,
}

impl Quadrature {
    pub fn new(settings: QuadSettings) -> Result<Self, QuadError> {
        settings.validate()?;
        Ok(Self { settings, cache: None })
    }

    pub fn with_cache(mut self, cache: Arc<BilinearCache>) -> Self {
        self.cache = Some(cache);
        self
    }

    pub fn settings(&self) -> &QuadSettings {
        &self.settings
    }

    pub fn cache(&self) -> Option<&Arc<BilinearCache>> {
        self.cache.as_ref()
    }

    pub fn h_form(&self, f: &DiamondBump, g: &DiamondBump, m: Mass) -> BilinearResult {
        self.bilinear(KernelKind::Hadamard, f, g, m)
    }

    pub fn pj_form(&self, f: &DiamondBump, g: &DiamondBump, m: Mass) -> BilinearResult {
        self.bilinear(KernelKind::PauliJordan, f, g, m)
    }

    pub fn bilinear(&self, kind: KernelKind, f: &DiamondBump, g: &DiamondBump, m: Mass) -> BilinearResult {
        let key = self.cache.as_ref().map(|c| (c, cache_key(kind, f, g, m.value(), &self.settings)));
        if let Some((cache, key)) = &key {
            if let Some((value, error)) = cache.get(*key) {
                return self.finish(f, g, value, error, 0);
            }
        }
        let r = self.compute(kind, f, g, m.value());
        if let Some((cache, key)) = key {
            cache.insert(key, r.value, r.error_estimate);
        }
        r
    }

    fn compute(&self, kind: KernelKind, f: &DiamondBump, g: &DiamondBump, m: f64) -> BilinearResult {
        if f.amplitude == 0.0 || g.amplitude == 0.0 {
            return self.finish(f, g, 0.0, 0.0, 0);
        }
        let s = &self.settings;
        let (value, error, evaluations) = match s.backend {
            Backend::Deterministic => {
                let r = layer::integrate(kind, m, f, g, s.points_per_axis);
                (r.value, r.error, r.evaluations)
            }
            Backend::Qmc => {
                let r = sampling::qmc(kind, m, f, g, s.sample_count, s.lightcone_clamp, s.seed);
                (r.value, r.error, r.evaluations)
            }
            Backend::McOracle => {
                let r = sampling::monte_carlo(kind, m, f, g, s.sample_count, s.lightcone_clamp, s.seed);
                (r.value, r.error, r.evaluations)
            }
        };
        self.finish(f, g, value, error, evaluations)
    }

    fn finish(&self, f: &DiamondBump, g: &DiamondBump, value: f64, error: f64, evaluations: u64) -> BilinearResult {
        // Natural size of the integral, for outputs that vanish.
        let floor = 1e-12 * (f.amplitude * g.amplitude).abs() * (f.radius * g.radius).powi(2);
        BilinearResult {
            value,
            error_estimate: error,
            backend: self.settings.backend,
            evaluation_count: evaluations,
            converged: error <= self.settings.target_rel_error * value.abs() + floor,
        }
    }
}

/// `H(f, g) = ∫ d²x d²y f(x) H(x − y) g(y)`.
pub fn h_form(f: &DiamondBump, g: &DiamondBump, m: Mass, settings: &QuadSettings) -> Result<BilinearResult, QuadError> {
    Ok(Quadrature::new(*settings)?.h_form(f, g, m))
}

/// `Δ_PJ(f, g) = ∫ d²x d²y f(x) Δ_PJ(x − y) g(y)`.
pub fn pj_form(f: &DiamondBump, g: &DiamondBump, m: Mass, settings: &QuadSettings) -> Result<BilinearResult, QuadError> {
    Ok(Quadrature::new(*settings)?.pj_form(f, g, m))
}
