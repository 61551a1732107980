//! Exact rectangle moments of the light-cone kernels.
//!
//! Both kernels depend on a light-cone separation `(α, β)` only through the product
//! `P = αβ` (plus the sign of `α` for Pauli-Jordan). Scaling `α = a x`, `β = b y` gives
//!
//! ```text
//! ∫₀^a ∫₀^b α^k β^l K(α, β) dβ dα = a^{k+1} b^{l+1} ∫₀¹∫₀¹ x^k y^l K(ab·xy) dx dy
//! ```
//!
//! and the unit-square integral collapses to one dimension in `z = xy`:
//! weight `−ln z` for `(0,0)`, `1 − z` for `(1,0)` and `(0,1)`, `−z ln z` for `(1,1)`.
//! Near `z = 0` the kernels are power series in `Q z`, `Q = m²P/4` (times `ln z`
//! for the Hadamard kernel), which integrate term by term.

use std::f64::consts::FRAC_1_PI;
use std::sync::OnceLock;

use super::gauss::GaussLegendre;
use crate::specfun::{self, EULER_GAMMA};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelKind {
    Hadamard,
    PauliJordan,
}

const KMAX: usize = 40;
/// Largest `|Q|` handled by the series alone (argument `2√|Q| = 4`).
const Q_SERIES: f64 = 4.0;
/// Spacelike tail cut: `K₀(60) < 1e-26`.
const X_TAIL: f64 = 60.0;
/// Width in Bessel argument of one panel of the numeric part.
const PANEL_WIDTH: f64 = 2.5;
const PANEL_ORDER: usize = 12;

struct Tables {
    /// Hadamard non-logarithmic coefficients per basis weight.
    a: [[f64; KMAX]; 4],
    /// `J₀`-series coefficients per basis weight.
    b: [[f64; KMAX]; 4],
    rule: GaussLegendre,
}

fn tables() -> &'static Tables {
    static TABLES: OnceLock<Tables> = OnceLock::new();
    TABLES.get_or_init(|| {
        let mut a = [[0.0; KMAX]; 4];
        let mut b = [[0.0; KMAX]; 4];
        let mut c = 1.0;
        let mut harmonic = 0.0;
        for k in 0..KMAX {
            let kf = k as f64;
            if k > 0 {
                c /= kf * kf;
                harmonic += 1.0 / kf;
            }
            let h = harmonic * c;
            let (k1, k2) = (kf + 1.0, kf + 2.0);
            // ∫ g z^k and ∫ g z^k ln z for g = 1, z, −ln z, −z ln z.
            let moment = [1.0 / k1, 1.0 / k2, 1.0 / (k1 * k1), 1.0 / (k2 * k2)];
            let log_moment = [
                -1.0 / (k1 * k1),
                -1.0 / (k2 * k2),
                -2.0 / (k1 * k1 * k1),
                -2.0 / (k2 * k2 * k2),
            ];
            for i in 0..4 {
                a[i][k] = h * moment[i] - 0.5 * c * log_moment[i];
                b[i][k] = c * moment[i];
            }
        }
        Tables {
            a,
            b,
            rule: GaussLegendre::new(PANEL_ORDER),
        }
    })
}

fn horner(coef: &[f64], q: f64) -> f64 {
    coef.iter().rev().fold(0.0, |acc, &c| acc * q + c)
}

/// Number of series terms needed at `|q|`; terms fall like `|q|^k / (k!)²`.
fn term_count(qa: f64) -> usize {
    let mut t = 1.0;
    for k in 1..KMAX {
        let kf = k as f64;
        t *= qa / (kf * kf);
        if t < 1e-18 {
            return k + 1;
        }
    }
    KMAX
}

/// `∫₀¹ g_i(z) φ(z) dz` for `g = (1, z, −ln z, −z ln z)`, series form.
fn series_basis(kind: KernelKind, q: f64) -> [f64; 4] {
    let t = tables();
    let n = term_count(q.abs());
    let mut out = [0.0; 4];
    match kind {
        KernelKind::Hadamard => {
            let shift = 0.5 * q.abs().ln() + EULER_GAMMA;
            for i in 0..4 {
                out[i] = FRAC_1_PI * (horner(&t.a[i][..n], q) - shift * horner(&t.b[i][..n], q));
            }
        }
        KernelKind::PauliJordan => {
            for i in 0..4 {
                out[i] = horner(&t.b[i][..n], q);
            }
        }
    }
    out
}

/// Radial kernel profile at Bessel argument `x = m√|λ|`.
#[inline]
fn profile(kind: KernelKind, spacelike: bool, x: f64) -> f64 {
    match (kind, spacelike) {
        (KernelKind::Hadamard, true) => FRAC_1_PI * specfun::k0(x),
        (KernelKind::Hadamard, false) => -0.5 * specfun::y0(x),
        (KernelKind::PauliJordan, _) => specfun::j0(x),
    }
}

/// Basis integrals `∫₀¹ g_i(z) φ(p z) dz` where `φ(P)` is the kernel profile at
/// light-cone product `P` (so `λ = −P`).
fn basis(kind: KernelKind, m: f64, p: f64) -> [f64; 4] {
    let q = 0.25 * m * m * p;
    let qa = q.abs();
    if qa <= Q_SERIES {
        return series_basis(kind, q);
    }
    // Series on [0, z0], numeric quadrature on [z0, 1] in u = √z.
    let z0 = Q_SERIES / qa;
    let lz = z0.ln();
    let s = series_basis(kind, q * z0);
    let mut out = [
        z0 * s[0],
        z0 * z0 * s[1],
        z0 * (-lz * s[0] + s[2]),
        z0 * z0 * (-lz * s[1] + s[3]),
    ];
    let spacelike = p > 0.0;
    let scale = 2.0 * qa.sqrt();
    let u0 = z0.sqrt();
    let mut u1: f64 = 1.0;
    if kind == KernelKind::Hadamard && spacelike {
        u1 = u1.min(X_TAIL / scale);
    }
    if u1 <= u0 {
        return out;
    }
    let panels = ((scale * (u1 - u0)) / PANEL_WIDTH).ceil().max(1.0) as usize;
    let h = (u1 - u0) / panels as f64;
    let rule = &tables().rule;
    for j in 0..panels {
        let lo = u0 + j as f64 * h;
        for (u, w) in rule.mapped(lo, lo + h) {
            let z = u * u;
            let lnz = z.ln();
            let v = profile(kind, spacelike, scale * u) * 2.0 * u * w;
            out[0] += v;
            out[1] += v * z;
            out[2] -= v * lnz;
            out[3] -= v * z * lnz;
        }
    }
    out
}

/// `[F₀₀, F₁₀, F₀₁, F₁₁]` with `F_kl(a, b) = ∫₀^a∫₀^b α^k β^l K(α, β) dβ dα` (oriented).
fn corner_from_basis(kind: KernelKind, a: f64, b: f64, j: &[f64; 4]) -> [f64; 4] {
    let ab = a * b;
    let pref = match kind {
        KernelKind::Hadamard => 1.0,
        KernelKind::PauliJordan => -0.5 * a.signum(),
    };
    let phi10 = j[0] - j[1];
    [
        pref * ab * j[2],
        pref * a * ab * phi10,
        pref * b * ab * phi10,
        pref * ab * ab * j[3],
    ]
}

fn corner_active(kind: KernelKind, p: f64) -> bool {
    match kind {
        KernelKind::Hadamard => p != 0.0,
        KernelKind::PauliJordan => p < 0.0,
    }
}

/// Corner moments of one kernel, exposed for cross-checks.
pub fn corner_moments(kind: KernelKind, m: f64, a: f64, b: f64) -> [f64; 4] {
    let p = a * b;
    if !corner_active(kind, p) {
        return [0.0; 4];
    }
    corner_from_basis(kind, a, b, &basis(kind, m, p))
}

/// `¼ ∫∫ T(α) T(β) K(α, β) dα dβ` where `T` is the overlap length of
/// `[c₁ − s₁, c₁ + s₁]` with `[c₂ − s₂ + α, c₂ + s₂ + α]` and `d = c₁ − c₂`.
///
/// This is the bilinear form between indicator functions of the two diamonds of
/// radii `s₁`, `s₂`.
pub fn square_pair_integral(kind: KernelKind, m: f64, d: f64, s1: f64, s2: f64) -> f64 {
    let sum = s1 + s2;
    let diff = (s1 - s2).abs();
    let e = [d - sum, d - diff, d + diff, d + sum];
    // T on each panel is p + q α.
    let panels = [(-e[0], 1.0), (sum - diff, 0.0), (e[3], -1.0)];

    let mut corners = [[[0.0; 4]; 4]; 4];
    for i in 0..4 {
        for j in i..4 {
            let p = e[i] * e[j];
            if !corner_active(kind, p) {
                continue;
            }
            let jb = basis(kind, m, p);
            corners[i][j] = corner_from_basis(kind, e[i], e[j], &jb);
            if j != i {
                corners[j][i] = corner_from_basis(kind, e[j], e[i], &jb);
            }
        }
    }

    let mut total = 0.0;
    for (i, &(pa, qa)) in panels.iter().enumerate() {
        if e[i + 1] == e[i] {
            continue;
        }
        for (j, &(pb, qb)) in panels.iter().enumerate() {
            if e[j + 1] == e[j] {
                continue;
            }
            let mut mom = [0.0; 4];
            for (k, mk) in mom.iter_mut().enumerate() {
                *mk = corners[i + 1][j + 1][k] - corners[i][j + 1][k] - corners[i + 1][j][k]
                    + corners[i][j][k];
            }
            total += pa * pb * mom[0] + qa * pb * mom[1] + pa * qb * mom[2] + qa * qb * mom[3];
        }
    }
    0.25 * total
}
