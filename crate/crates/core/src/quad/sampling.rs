//! Sampling backends over the product of the two light-cone squares.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::corner::KernelKind;
use super::sobol::{to_unit, Sobol4};
use crate::kernel::{hadamard_at, pauli_jordan_lightcone};
use crate::testfn::DiamondBump;

pub(crate) const REPLICATES: u64 = 32;
const CHUNK: u64 = 1 << 14;

#[derive(Debug, Clone, Copy)]
pub(crate) struct SampleEstimate {
    pub value: f64,
    pub error: f64,
    pub evaluations: u64,
}

struct Integrand<'a> {
    kind: KernelKind,
    m: f64,
    f: &'a DiamondBump,
    g: &'a DiamondBump,
    clamp: f64,
    /// Largest kernel magnitude on the excluded band `|λ| < ε`.
    band_kernel: f64,
    /// `¼ · (2R_f)² · (2R_g)²`.
    scale: f64,
}

#[derive(Debug, Clone, Copy, Default)]
struct Partial {
    sum: f64,
    sum_sq: f64,
    skipped: f64,
}

impl Partial {
    fn add(&mut self, other: Partial) {
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
        self.skipped += other.skipped;
    }
}

impl<'a> Integrand<'a> {
    fn new(kind: KernelKind, m: f64, f: &'a DiamondBump, g: &'a DiamondBump, clamp: f64) -> Self {
        let band_kernel = match kind {
            KernelKind::Hadamard => hadamard_at(clamp, m).abs().max(hadamard_at(-clamp, m).abs()),
            KernelKind::PauliJordan => 0.5,
        };
        let scale = 0.25 * (2.0 * f.radius).powi(2) * (2.0 * g.radius).powi(2);
        Self {
            kind,
            m,
            f,
            g,
            clamp,
            band_kernel,
            scale,
        }
    }

    #[inline]
    fn accumulate(&self, x: [f64; 4], acc: &mut Partial) {
        let (f, g) = (self.f, self.g);
        let u1 = f.center_x + f.radius * (2.0 * x[0] - 1.0);
        let v1 = f.center_x + f.radius * (2.0 * x[1] - 1.0);
        let fv = f.value_lightcone(u1, v1);
        if fv == 0.0 {
            return;
        }
        let u2 = g.center_x + g.radius * (2.0 * x[2] - 1.0);
        let v2 = g.center_x + g.radius * (2.0 * x[3] - 1.0);
        let gv = g.value_lightcone(u2, v2);
        if gv == 0.0 {
            return;
        }
        let (du, dv) = (u1 - u2, v1 - v2);
        let lambda = -du * dv;
        let weight = self.scale * fv * gv;
        if lambda.abs() < self.clamp {
            acc.skipped += (weight * self.band_kernel).abs();
            return;
        }
        let k = match self.kind {
            KernelKind::Hadamard => hadamard_at(lambda, self.m),
            KernelKind::PauliJordan => pauli_jordan_lightcone(du, dv, self.m),
        };
        let v = weight * k;
        acc.sum += v;
        acc.sum_sq += v * v;
    }
}

/// Randomly shifted Sobol points: `REPLICATES` independent digital shifts of
/// `samples / REPLICATES` points each; the error is the replicate standard error
/// plus the clamp band bound.
pub(crate) fn qmc(
    kind: KernelKind,
    m: f64,
    f: &DiamondBump,
    g: &DiamondBump,
    samples: u64,
    clamp: f64,
    seed: u64,
) -> SampleEstimate {
    let integrand = Integrand::new(kind, m, f, g, clamp);
    let sobol = Sobol4::new();
    let per = (samples / REPLICATES).max(1);
    let chunks = per.div_ceil(CHUNK);
    let mut shifts = Vec::with_capacity(REPLICATES as usize);
    for r in 0..REPLICATES {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(r);
        shifts.push([rng.next_u32(), rng.next_u32(), rng.next_u32(), rng.next_u32()]);
    }
    let jobs: Vec<(u64, u64)> = (0..REPLICATES).flat_map(|r| (0..chunks).map(move |c| (r, c))).collect();
    let partials: Vec<Partial> = jobs
        .par_iter()
        .map(|&(r, c)| {
            let start = c * CHUNK;
            let end = (start + CHUNK).min(per);
            let shift = shifts[r as usize];
            let mut acc = Partial::default();
            let mut state = sobol.point(start as u32);
            integrand.accumulate(to_unit(state, shift), &mut acc);
            for i in start + 1..end {
                sobol.advance(&mut state, i as u32);
                integrand.accumulate(to_unit(state, shift), &mut acc);
            }
            acc
        })
        .collect();
    let mut means = Vec::with_capacity(REPLICATES as usize);
    let mut skipped = 0.0;
    for r in 0..REPLICATES as usize {
        let mut acc = Partial::default();
        for p in &partials[r * chunks as usize..(r + 1) * chunks as usize] {
            acc.add(*p);
        }
        means.push(acc.sum / per as f64);
        skipped += acc.skipped;
    }
    let n = means.len() as f64;
    let mean = means.iter().sum::<f64>() / n;
    let var = means.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    SampleEstimate {
        value: mean,
        error: (var / n).sqrt() + skipped / (per as f64 * n),
        evaluations: per * REPLICATES,
    }
}

/// Plain Monte Carlo with a counter-based stream per block of samples.
pub(crate) fn monte_carlo(
    kind: KernelKind,
    m: f64,
    f: &DiamondBump,
    g: &DiamondBump,
    samples: u64,
    clamp: f64,
    seed: u64,
) -> SampleEstimate {
    let integrand = Integrand::new(kind, m, f, g, clamp);
    let blocks = samples.div_ceil(CHUNK);
    let partials: Vec<Partial> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b);
            let count = CHUNK.min(samples - b * CHUNK);
            let mut acc = Partial::default();
            for _ in 0..count {
                let x: [f64; 4] = [rng.random(), rng.random(), rng.random(), rng.random()];
                integrand.accumulate(x, &mut acc);
            }
            acc
        })
        .collect();
    let mut acc = Partial::default();
    for p in partials {
        acc.add(p);
    }
    let n = samples as f64;
    let mean = acc.sum / n;
    let var = (acc.sum_sq / n - mean * mean).max(0.0) * n / (n - 1.0).max(1.0);
    SampleEstimate {
        value: mean,
        error: (var / n).sqrt() + acc.skipped / n,
        evaluations: samples,
    }
}
