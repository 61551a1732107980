//! Parameter vectors → bilinear tables → correlator reports.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::correlators::{
    chsh_correlator, cluster_quantity, mermin3_correlator, BilinearTable, ClusterReport, Conventions, CorrelatorError,
    CorrelatorReport, Label,
};
use crate::kernel::Mass;
use crate::quad::{BilinearResult, KernelKind, Quadrature};
use crate::testfn::{supports_spacelike, BellParameters, ClusterParameters, DiamondBump, MerminParameters, TestFnError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Parameters(#[from] TestFnError),
    #[error(transparent)]
    Correlator(#[from] CorrelatorError),
}

const BELL_LABELS: [Label; 4] = [Label::F, Label::FPrime, Label::G, Label::GPrime];
const MERMIN_LABELS: [Label; 6] = [Label::F, Label::FPrime, Label::G, Label::GPrime, Label::H, Label::HPrime];

/// One computed bilinear.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BilinearEntry {
    pub kind: KernelKind,
    pub left: Label,
    pub right: Label,
    pub result: BilinearResult,
}

/// A filled table plus the quadrature results behind it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub table: BilinearTable,
    pub entries: Vec<BilinearEntry>,
}

impl Evaluation {
    pub fn converged(&self) -> bool {
        self.entries.iter().all(|e| e.result.converged)
    }

    pub fn entry(&self, kind: KernelKind, a: Label, b: Label) -> Option<&BilinearEntry> {
        self.entries
            .iter()
            .find(|e| e.kind == kind && ((e.left, e.right) == (a, b) || (e.left, e.right) == (b, a)))
    }

    pub fn evaluation_count(&self) -> u64 {
        self.entries.iter().map(|e| e.result.evaluation_count).sum()
    }
}

/// All diagonal `H` entries, and `H` and `Δ_PJ` for every pair of labels
/// belonging to different parties.
pub fn evaluate_bumps(quad: &Quadrature, m: Mass, bumps: &[(Label, DiamondBump)]) -> Evaluation {
    let party = |l: Label| match l {
        Label::F | Label::FPrime => 0,
        Label::G | Label::GPrime => 1,
        Label::H | Label::HPrime => 2,
    };
    let mut jobs = Vec::new();
    for (i, &(a, fa)) in bumps.iter().enumerate() {
        jobs.push((KernelKind::Hadamard, a, fa, a, fa));
        for &(b, fb) in &bumps[i + 1..] {
            if party(a) != party(b) {
                jobs.push((KernelKind::Hadamard, a, fa, b, fb));
                jobs.push((KernelKind::PauliJordan, a, fa, b, fb));
            }
        }
    }
    let entries: Vec<BilinearEntry> = jobs
        .into_par_iter()
        .map(|(kind, left, fl, right, fr)| BilinearEntry {
            kind,
            left,
            right,
            result: quad.bilinear(kind, &fl, &fr, m),
        })
        .collect();
    let mut table = BilinearTable::new(m);
    for e in &entries {
        match e.kind {
            KernelKind::Hadamard => table.set_h(e.left, e.right, e.result.value),
            KernelKind::PauliJordan => table.set_pj(e.left, e.right, e.result.value),
        }
    }
    Evaluation { table, entries }
}

pub fn bell_bumps(p: &BellParameters) -> Result<Vec<(Label, DiamondBump)>, TestFnError> {
    Ok(vec![
        (Label::F, p.f()?),
        (Label::FPrime, p.f_prime()?),
        (Label::G, p.g()?),
        (Label::GPrime, p.g_prime()?),
    ])
}

pub fn mermin_bumps(p: &MerminParameters) -> Result<Vec<(Label, DiamondBump)>, TestFnError> {
    let mut bumps = bell_bumps(&p.bell)?;
    bumps.push((Label::H, p.h()?));
    bumps.push((Label::HPrime, p.h_prime()?));
    Ok(bumps)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChshRun {
    pub report: CorrelatorReport,
    pub evaluation: Evaluation,
}

pub fn run_chsh(params: &BellParameters, quad: &Quadrature, conventions: Conventions) -> Result<ChshRun, ExperimentError> {
    let evaluation = evaluate_bumps(quad, params.m, &bell_bumps(params)?);
    let report = chsh_correlator(&evaluation.table, BELL_LABELS, conventions)?;
    Ok(ChshRun { report, evaluation })
}

/// Outcome of the Mermin causality filter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FilterStatus {
    Accepted,
    RejectedCausality,
    RejectedGeometry,
}

impl std::fmt::Display for FilterStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            FilterStatus::Accepted => "accepted",
            FilterStatus::RejectedCausality => "rejected_causality",
            FilterStatus::RejectedGeometry => "rejected_geometry",
        })
    }
}

/// `|Δ_PJ(h, f)| ≤ τ` with `τ = factor · √(H(f,f) H(h,h))`.
pub const DEFAULT_PJ_TOLERANCE_FACTOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PjCheck {
    pub left: Label,
    pub right: Label,
    pub value: f64,
    pub tolerance: f64,
}

impl PjCheck {
    pub fn passes(&self) -> bool {
        self.value.abs() <= self.tolerance
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MerminRun {
    pub status: FilterStatus,
    /// The four `Δ_PJ(h, f)` checks; empty when the geometry was rejected.
    pub pj_checks: Vec<PjCheck>,
    /// Present only when accepted.
    pub report: Option<CorrelatorReport>,
    pub evaluation: Option<Evaluation>,
}

/// Every cross-party pair of supports is spacelike.
pub fn mermin_geometry_ok(params: &MerminParameters) -> Result<bool, TestFnError> {
    let bumps = mermin_bumps(params)?;
    let party = |i: usize| i / 2;
    for i in 0..bumps.len() {
        for j in i + 1..bumps.len() {
            if party(i) != party(j) && !supports_spacelike(&bumps[i].1, &bumps[j].1) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn pj_checks(table: &BilinearTable, factor: f64) -> Result<Vec<PjCheck>, CorrelatorError> {
    let mut out = Vec::with_capacity(4);
    for h in [Label::H, Label::HPrime] {
        for f in [Label::F, Label::FPrime] {
            let tolerance = factor * (table.h(f, f)? * table.h(h, h)?).abs().sqrt();
            out.push(PjCheck {
                left: h,
                right: f,
                value: table.pj(h, f)?,
                tolerance,
            });
        }
    }
    Ok(out)
}

pub fn run_mermin(
    params: &MerminParameters,
    quad: &Quadrature,
    conventions: Conventions,
    pj_tolerance_factor: f64,
) -> Result<MerminRun, ExperimentError> {
    params.validate()?;
    if !mermin_geometry_ok(params)? {
        return Ok(MerminRun {
            status: FilterStatus::RejectedGeometry,
            pj_checks: Vec::new(),
            report: None,
            evaluation: None,
        });
    }
    let evaluation = evaluate_bumps(quad, params.bell.m, &mermin_bumps(params)?);
    let checks = pj_checks(&evaluation.table, pj_tolerance_factor)?;
    if !checks.iter().all(PjCheck::passes) {
        return Ok(MerminRun {
            status: FilterStatus::RejectedCausality,
            pj_checks: checks,
            report: None,
            evaluation: Some(evaluation),
        });
    }
    let report = mermin3_correlator(&evaluation.table, MERMIN_LABELS, conventions)?;
    Ok(MerminRun {
        status: FilterStatus::Accepted,
        pj_checks: checks,
        report: Some(report),
        evaluation: Some(evaluation),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterRun {
    pub report: ClusterReport,
    pub evaluation: Evaluation,
}

pub fn run_cluster(params: &ClusterParameters, quad: &Quadrature) -> Result<ClusterRun, ExperimentError> {
    let bumps = [(Label::F, params.f()?), (Label::H, params.h()?)];
    let evaluation = evaluate_bumps(quad, params.m, &bumps);
    let report = cluster_quantity(&evaluation.table, Label::F, Label::H, params.gap()?.max(0.0))?;
    Ok(ClusterRun { report, evaluation })
}
