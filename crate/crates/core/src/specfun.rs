//! Real-argument Bessel functions of order zero: J₀, Y₀ and K₀.
//!
//! Three evaluation regimes are used, selected by fixed crossover points:
//!
//! * `x ≤ SERIES_CUTOFF`: ascending power series.
//! * `SERIES_CUTOFF < x < ASYMPTOTIC_CUTOFF`: Miller backward recurrence
//!   (J₀, Y₀ through the Neumann series) and a trapezoidal rule on
//!   `K₀(x) = ∫₀^∞ exp(−x cosh t) dt`.
//! * `x ≥ ASYMPTOTIC_CUTOFF`: Hankel asymptotic expansions.
//!
//! All functions are pure and reentrant.

use std::f64::consts::{FRAC_2_PI, FRAC_PI_2, SQRT_2};

use serde::Serialize;
use thiserror::Error;

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Upper end of the power-series regime.
pub const SERIES_CUTOFF: f64 = 2.0;
/// Lower end of the asymptotic regime.
pub const ASYMPTOTIC_CUTOFF: f64 = 25.0;
/// Step of the trapezoidal rule used for K₀ in the middle regime.
pub const K0_TRAPEZOID_STEP: f64 = 0.125;
/// The K₀ integrand `exp(−x (cosh t − 1))` is truncated once its exponent drops below this.
pub const K0_TRAPEZOID_CUTOFF: f64 = 42.0;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum SpecFunError {
    #[error("{function}: argument {x} outside the domain")]
    Domain { function: &'static str, x: f64 },
}

/// Accuracy contract of this module.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpecFunAccuracy {
    pub target_relative_error: f64,
}

impl Default for SpecFunAccuracy {
    fn default() -> Self {
        Self {
            target_relative_error: 1e-12,
        }
    }
}

impl SpecFunAccuracy {
    pub fn new(target_relative_error: f64) -> Option<Self> {
        (target_relative_error > 0.0 && target_relative_error < 1e-6).then_some(Self {
            target_relative_error,
        })
    }
}

/// Crossover points, recorded in run manifests.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Crossovers {
    pub series_cutoff: f64,
    pub asymptotic_cutoff: f64,
    pub k0_trapezoid_step: f64,
    pub k0_trapezoid_cutoff: f64,
}

pub const CROSSOVERS: Crossovers = Crossovers {
    series_cutoff: SERIES_CUTOFF,
    asymptotic_cutoff: ASYMPTOTIC_CUTOFF,
    k0_trapezoid_step: K0_TRAPEZOID_STEP,
    k0_trapezoid_cutoff: K0_TRAPEZOID_CUTOFF,
};

/// Evaluation regime, exposed so the regimes can be cross-checked.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Series,
    Recurrence,
    Asymptotic,
}

impl Regime {
    fn select(x: f64) -> Self {
        if x <= SERIES_CUTOFF {
            Regime::Series
        } else if x < ASYMPTOTIC_CUTOFF {
            Regime::Recurrence
        } else {
            Regime::Asymptotic
        }
    }
}

/// J₀(x). Negative arguments are accepted (J₀ is even).
pub fn bessel_j0(x: f64) -> Result<f64, SpecFunError> {
    if !x.is_finite() {
        return Err(SpecFunError::Domain { function: "J0", x });
    }
    Ok(j0(x.abs()))
}

/// Y₀(x) for `x > 0`.
pub fn bessel_y0(x: f64) -> Result<f64, SpecFunError> {
    if !(x.is_finite() && x > 0.0) {
        return Err(SpecFunError::Domain { function: "Y0", x });
    }
    Ok(y0(x))
}

/// K₀(x) for `x > 0`.
pub fn bessel_k0(x: f64) -> Result<f64, SpecFunError> {
    if !(x > 0.0) || x.is_nan() {
        return Err(SpecFunError::Domain { function: "K0", x });
    }
    Ok(k0(x))
}

/// J₀ evaluated in a forced regime. `x` must be positive.
pub fn bessel_j0_in(regime: Regime, x: f64) -> f64 {
    match regime {
        Regime::Series => j0_series(x),
        Regime::Recurrence => miller(x).0,
        Regime::Asymptotic => hankel(x).0,
    }
}

/// Y₀ evaluated in a forced regime. `x` must be positive.
pub fn bessel_y0_in(regime: Regime, x: f64) -> f64 {
    match regime {
        Regime::Series => y0_series(x),
        Regime::Recurrence => miller(x).1,
        Regime::Asymptotic => hankel(x).1,
    }
}

/// K₀ evaluated in a forced regime. `x` must be positive.
pub fn bessel_k0_in(regime: Regime, x: f64) -> f64 {
    match regime {
        Regime::Series => k0_series(x),
        Regime::Recurrence => k0_trapezoid(x),
        Regime::Asymptotic => k0_asymptotic(x),
    }
}

pub(crate) fn j0(x: f64) -> f64 {
    match Regime::select(x) {
        Regime::Series => j0_series(x),
        Regime::Recurrence => miller(x).0,
        Regime::Asymptotic => hankel(x).0,
    }
}

pub(crate) fn y0(x: f64) -> f64 {
    match Regime::select(x) {
        Regime::Series => y0_series(x),
        Regime::Recurrence => miller(x).1,
        Regime::Asymptotic => hankel(x).1,
    }
}

pub(crate) fn k0(x: f64) -> f64 {
    match Regime::select(x) {
        Regime::Series => k0_series(x),
        Regime::Recurrence => k0_trapezoid(x),
        Regime::Asymptotic => k0_asymptotic(x),
    }
}

const SERIES_EPS: f64 = 1e-18;

fn j0_series(x: f64) -> f64 {
    let q = -0.25 * x * x;
    let mut term = 1.0_f64;
    let mut sum = 1.0_f64;
    let mut k = 1.0;
    while term.abs() > SERIES_EPS * sum.abs() {
        term *= q / (k * k);
        sum += term;
        k += 1.0;
    }
    sum
}

/// Returns `(Σ (−q)^k/(k!)², Σ H_k (−q)^k/(k!)²)` with `q = x²/4` and `H_k` the
/// harmonic numbers; `sign = −1` gives the J/Y pair, `sign = +1` the I/K pair.
fn log_series(x: f64, sign: f64) -> (f64, f64) {
    let q = sign * 0.25 * x * x;
    let mut term = 1.0_f64;
    let mut harmonic = 0.0_f64;
    let mut regular = 1.0_f64;
    let mut log_part = 0.0_f64;
    let mut k = 1.0;
    loop {
        term *= q / (k * k);
        harmonic += 1.0 / k;
        regular += term;
        log_part += harmonic * term;
        if term.abs() * harmonic.max(1.0) <= SERIES_EPS * regular.abs().max(log_part.abs()) {
            break;
        }
        k += 1.0;
    }
    (regular, log_part)
}

fn y0_series(x: f64) -> f64 {
    let (j, s) = log_series(x, -1.0);
    // Y₀ = (2/π)[(ln(x/2) + γ) J₀ − Σ H_k (−x²/4)^k/(k!)²]
    FRAC_2_PI * (((0.5 * x).ln() + EULER_GAMMA) * j - s)
}

fn k0_series(x: f64) -> f64 {
    let (i, s) = log_series(x, 1.0);
    -((0.5 * x).ln() + EULER_GAMMA) * i + s
}

/// Miller backward recurrence; returns `(J₀, Y₀)`.
fn miller(x: f64) -> (f64, f64) {
    let start = 2 * ((x + 24.0 + (40.0 * x).sqrt()) as usize / 2);
    let mut next = 0.0; // J_{k+1}
    let mut cur = 1e-30_f64; // J_k
    let mut norm = 0.0;
    let mut neumann = 0.0;
    let two_over_x = 2.0 / x;
    let mut k = start;
    while k > 0 {
        let prev = k as f64 * two_over_x * cur - next;
        next = cur;
        cur = prev;
        k -= 1;
        if k % 2 == 0 && k > 0 {
            norm += 2.0 * cur;
            let half = (k / 2) as f64;
            let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
            neumann += sign * cur / half;
        }
        if cur.abs() > 1e250 {
            cur *= 1e-250;
            next *= 1e-250;
            norm *= 1e-250;
            neumann *= 1e-250;
        }
    }
    norm += cur;
    let j0 = cur / norm;
    let y0 = FRAC_2_PI * ((0.5 * x).ln() + EULER_GAMMA) * j0 - 2.0 * FRAC_2_PI * neumann / norm;
    (j0, y0)
}

/// Hankel expansion; returns `(J₀, Y₀)`.
fn hankel(x: f64) -> (f64, f64) {
    let (p, q) = hankel_pq(x);
    let (s, c) = x.sin_cos();
    // χ = x − π/4
    let cos_chi = (c + s) / SQRT_2;
    let sin_chi = (s - c) / SQRT_2;
    let amp = (FRAC_2_PI / x).sqrt();
    (amp * (p * cos_chi - q * sin_chi), amp * (p * sin_chi + q * cos_chi))
}

fn hankel_pq(x: f64) -> (f64, f64) {
    let eight_x = 8.0 * x;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut a = 1.0_f64;
    let mut last = f64::INFINITY;
    for k in 1..64 {
        let odd = (2 * k - 1) as f64;
        a *= -odd * odd / (k as f64 * eight_x);
        let mag = a.abs();
        if mag > last || mag < 1e-18 {
            break;
        }
        last = mag;
        // a_k x^{-k}: odd k feeds Q with sign (−1)^{(k−1)/2}, even k feeds P with (−1)^{k/2}.
        match k % 4 {
            0 => p += a,
            1 => q += a,
            2 => p -= a,
            _ => q -= a,
        }
    }
    (p, q)
}

fn k0_trapezoid(x: f64) -> f64 {
    let h = K0_TRAPEZOID_STEP;
    let mut sum = 0.5;
    let mut t = h;
    loop {
        let e = x * (t.cosh() - 1.0);
        if e > K0_TRAPEZOID_CUTOFF {
            break;
        }
        sum += (-e).exp();
        t += h;
    }
    h * sum * (-x).exp()
}

fn k0_asymptotic(x: f64) -> f64 {
    let eight_x = 8.0 * x;
    let mut sum = 1.0;
    let mut c = 1.0_f64;
    let mut last = f64::INFINITY;
    for k in 1..64 {
        let odd = (2 * k - 1) as f64;
        c *= -odd * odd / (k as f64 * eight_x);
        if c.abs() > last || c.abs() < 1e-18 {
            break;
        }
        last = c.abs();
        sum += c;
    }
    (FRAC_PI_2 / x).sqrt() * (-x).exp() * sum
}
