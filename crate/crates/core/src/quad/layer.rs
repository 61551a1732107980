//! Deterministic backend: layer-cake decomposition of both bumps.
//!
//! A bump is `∫₀^R w(s) 1[diamond of radius s] ds` with `w = −d profile/ds`, so a
//! bilinear form equals `∫∫ w_f(s₁) w_g(s₂) I(s₁, s₂) ds₁ ds₂` where `I` is the exact
//! indicator-pair integral from [`super::corner`]. The outer square is cut along the
//! lines where `I` has kinks and along level sets of the profiles, and every convex
//! piece gets a Gauss-Legendre product rule.

use rayon::prelude::*;

use super::corner::{square_pair_integral, KernelKind};
use super::gauss::GaussLegendre;
use crate::testfn::DiamondBump;

/// Profile fractions at which the radial axes are cut.
const LEVELS: [f64; 9] = [0.99, 0.9, 0.7, 0.5, 0.3, 0.1, 0.01, 1e-4, 1e-8];

type Point = [f64; 2];

#[derive(Debug, Clone)]
pub(crate) struct Piece {
    vertices: Vec<Point>,
}

fn area(poly: &[Point]) -> f64 {
    let n = poly.len();
    let mut a = 0.0;
    for i in 0..n {
        let p = poly[i];
        let q = poly[(i + 1) % n];
        a += p[0] * q[1] - q[0] * p[1];
    }
    0.5 * a
}

/// Splits a convex polygon by the line `n·x = c`.
fn split(poly: &[Point], n: Point, c: f64, tol: f64) -> Vec<Vec<Point>> {
    let dist: Vec<f64> = poly.iter().map(|p| n[0] * p[0] + n[1] * p[1] - c).collect();
    if dist.iter().all(|&d| d >= -tol) || dist.iter().all(|&d| d <= tol) {
        return vec![poly.to_vec()];
    }
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    let len = poly.len();
    for i in 0..len {
        let (p, dp) = (poly[i], dist[i]);
        let (q, dq) = (poly[(i + 1) % len], dist[(i + 1) % len]);
        if dp.abs() <= tol {
            pos.push(p);
            neg.push(p);
        } else if dp > 0.0 {
            pos.push(p);
        } else {
            neg.push(p);
        }
        if (dp > tol && dq < -tol) || (dp < -tol && dq > tol) {
            let t = dp / (dp - dq);
            let x = [p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])];
            pos.push(x);
            neg.push(x);
        }
    }
    vec![pos, neg]
}

fn axis_cuts(b: &DiamondBump) -> Vec<f64> {
    let mut cuts = vec![0.0, b.radius];
    for &q in &LEVELS {
        let s = b.level_radius(q);
        if s > 0.0 && s < b.radius {
            cuts.push(s);
        }
    }
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * (1.0 + b.abs()));
    cuts
}

/// Convex pieces of `[0, R_f] × [0, R_g]` for center offset `d = c_f − c_g`.
pub(crate) fn pieces(f: &DiamondBump, g: &DiamondBump) -> Vec<Piece> {
    let d = f.center_x - g.center_x;
    let c1 = axis_cuts(f);
    let c2 = axis_cuts(g);
    let scale = f.radius.max(g.radius);
    let tol = 1e-13 * scale;
    let mut lines: Vec<(Point, f64)> = vec![([1.0, -1.0], 0.0)];
    if d != 0.0 {
        lines.push(([1.0, 1.0], d.abs()));
        lines.push(([1.0, -1.0], d));
        lines.push(([1.0, -1.0], -d));
    }
    let min_area = 1e-14 * f.radius * g.radius;
    let mut out = Vec::new();
    for w1 in c1.windows(2) {
        for w2 in c2.windows(2) {
            let mut polys = vec![vec![[w1[0], w2[0]], [w1[1], w2[0]], [w1[1], w2[1]], [w1[0], w2[1]]]];
            for &(n, c) in &lines {
                polys = polys.iter().flat_map(|p| split(p, n, c, tol)).collect();
            }
            for p in polys {
                if p.len() >= 3 && area(&p).abs() > min_area {
                    out.push(Piece { vertices: p });
                }
            }
        }
    }
    out
}

/// Quadrature nodes `(s₁, s₂, weight)` for one piece.
fn piece_nodes(piece: &Piece, rule: &GaussLegendre, out: &mut Vec<(f64, f64, f64)>) {
    let v = &piece.vertices;
    if v.len() == 4 {
        quad_nodes(v, rule, out);
    } else {
        for k in 1..v.len() - 1 {
            triangle_nodes([v[0], v[k], v[k + 1]], rule, out);
        }
    }
}

/// Collapsed product rule on a triangle.
fn triangle_nodes(t: [Point; 3], rule: &GaussLegendre, out: &mut Vec<(f64, f64, f64)>) {
    let e1 = [t[1][0] - t[0][0], t[1][1] - t[0][1]];
    let e2 = [t[2][0] - t[1][0], t[2][1] - t[1][1]];
    let det = (e1[0] * e2[1] - e1[1] * e2[0]).abs();
    for (xi, wx) in rule.mapped(0.0, 1.0) {
        for (eta, wy) in rule.mapped(0.0, 1.0) {
            let s1 = t[0][0] + xi * (e1[0] + eta * e2[0]);
            let s2 = t[0][1] + xi * (e1[1] + eta * e2[1]);
            out.push((s1, s2, wx * wy * xi * det));
        }
    }
}

/// Bilinear map of a convex quadrilateral.
fn quad_nodes(q: &[Point], rule: &GaussLegendre, out: &mut Vec<(f64, f64, f64)>) {
    for (x, wx) in rule.mapped(0.0, 1.0) {
        for (y, wy) in rule.mapped(0.0, 1.0) {
            let n = [(1.0 - x) * (1.0 - y), x * (1.0 - y), x * y, (1.0 - x) * y];
            let s1 = n.iter().zip(q).map(|(a, p)| a * p[0]).sum();
            let s2 = n.iter().zip(q).map(|(a, p)| a * p[1]).sum();
            let dx = [
                (1.0 - y) * (q[1][0] - q[0][0]) + y * (q[2][0] - q[3][0]),
                (1.0 - y) * (q[1][1] - q[0][1]) + y * (q[2][1] - q[3][1]),
            ];
            let dy = [
                (1.0 - x) * (q[3][0] - q[0][0]) + x * (q[2][0] - q[1][0]),
                (1.0 - x) * (q[3][1] - q[0][1]) + x * (q[2][1] - q[1][1]),
            ];
            let jac = (dx[0] * dy[1] - dx[1] * dy[0]).abs();
            out.push((s1, s2, wx * wy * jac));
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct LayerEstimate {
    pub value: f64,
    pub error: f64,
    pub evaluations: u64,
}

/// Integrates with product orders `order` and a coarser companion; the error is
/// their difference.
pub(crate) fn integrate(
    kind: KernelKind,
    m: f64,
    f: &DiamondBump,
    g: &DiamondBump,
    order: usize,
) -> LayerEstimate {
    let d = f.center_x - g.center_x;
    let fine = GaussLegendre::new(order);
    let coarse = GaussLegendre::new(coarse_order(order));
    let pieces = pieces(f, g);
    let sums: Vec<(f64, f64, u64)> = pieces
        .par_iter()
        .map(|piece| {
            let mut nodes = Vec::new();
            let mut eval = |rule: &GaussLegendre| -> (f64, u64) {
                nodes.clear();
                piece_nodes(piece, rule, &mut nodes);
                let mut acc = 0.0;
                let mut count = 0;
                for &(s1, s2, w) in &nodes {
                    let weight = w * f.layer_weight(s1) * g.layer_weight(s2);
                    if weight == 0.0 {
                        continue;
                    }
                    acc += weight * square_pair_integral(kind, m, d, s1, s2);
                    count += 1;
                }
                (acc, count)
            };
            let (hi, n_hi) = eval(&fine);
            let (lo, n_lo) = eval(&coarse);
            (hi, lo, n_hi + n_lo)
        })
        .collect();
    let mut value = 0.0;
    let mut low = 0.0;
    let mut evaluations = 0;
    for (hi, lo, n) in sums {
        value += hi;
        low += lo;
        evaluations += n;
    }
    LayerEstimate {
        value,
        error: (value - low).abs(),
        evaluations,
    }
}

pub(crate) fn coarse_order(order: usize) -> usize {
    (2 * order).div_ceil(3).max(2)
}
