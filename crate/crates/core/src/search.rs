//! Random parameter search, the Mermin causality filter, mass sweeps and the
//! massless extrapolation.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::correlators::{Conventions, Dressing, FormulaMode, Label};
use crate::experiment::{
    mermin_bumps, mermin_geometry_ok, run_chsh, run_cluster, run_mermin, BilinearEntry, ExperimentError, FilterStatus,
    PjCheck, DEFAULT_PJ_TOLERANCE_FACTOR,
};
use crate::kernel::{Mass, MASS_MIN};
use crate::quad::{KernelKind, QuadError, QuadSettings, Quadrature};
use crate::testfn::{BellParameters, ClusterParameters, MerminParameters};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SearchError {
    #[error("empty or invalid range for {field}: [{lo}, {hi}]")]
    Range { field: &'static str, lo: f64, hi: f64 },
    #[error("mass range [{lo}, {hi}] must lie in [{MASS_MIN}, 10]")]
    MassRange { lo: f64, hi: f64 },
    #[error(transparent)]
    Quadrature(#[from] QuadError),
    #[error(transparent)]
    Experiment(#[from] ExperimentError),
    #[error("extrapolation needs at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("mass {0} outside (0, 1)")]
    MassOutOfRange(f64),
    #[error("degenerate design matrix for the degree-{0} fit")]
    Degenerate(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchTarget {
    #[default]
    Chsh,
    Mermin3,
    Cluster,
}

impl std::fmt::Display for SearchTarget {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SearchTarget::Chsh => "chsh",
            SearchTarget::Mermin3 => "mermin3",
            SearchTarget::Cluster => "cluster",
        })
    }
}

/// Closed interval, written `[lo, hi]` in config files.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl From<[f64; 2]> for Interval {
    fn from([lo, hi]: [f64; 2]) -> Self {
        Self { lo, hi }
    }
}

impl From<Interval> for [f64; 2] {
    fn from(i: Interval) -> Self {
        [i.lo, i.hi]
    }
}

impl Interval {
    pub const fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub const fn point(x: f64) -> Self {
        Self { lo: x, hi: x }
    }

    fn check(&self, field: &'static str, positive: bool) -> Result<(), SearchError> {
        let ok = self.lo.is_finite() && self.hi.is_finite() && self.lo <= self.hi && (!positive || self.lo > 0.0);
        if ok {
            Ok(())
        } else {
            Err(SearchError::Range {
                field,
                lo: self.lo,
                hi: self.hi,
            })
        }
    }

    fn uniform(&self, rng: &mut ChaCha8Rng) -> f64 {
        let u: f64 = rng.random();
        if self.lo == self.hi {
            self.lo
        } else {
            self.lo + (self.hi - self.lo) * u
        }
    }

    fn log_uniform(&self, rng: &mut ChaCha8Rng) -> f64 {
        let u: f64 = rng.random();
        if self.lo == self.hi {
            self.lo
        } else {
            (self.lo.ln() + (self.hi.ln() - self.lo.ln()) * u).exp().clamp(self.lo, self.hi)
        }
    }
}

/// Sampling box. `m` is drawn log-uniformly, everything else uniformly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParameterRanges {
    pub a: Interval,
    pub eta: Interval,
    pub b: Interval,
    pub sigma: Interval,
    pub a_prime: Interval,
    pub eta_prime: Interval,
    pub b_prime: Interval,
    pub sigma_prime: Interval,
    pub p: Interval,
    pub p_prime: Interval,
    pub zeta: Interval,
    pub zeta_prime: Interval,
    #[serde(rename = "R")]
    pub r: Interval,
    #[serde(rename = "R_prime")]
    pub r_prime: Interval,
    pub m: Interval,
    /// Mermin gaps; `None` places both third diamonds at `d = d′ = 2R`.
    /// For the cluster target `d` falls back to [`DEFAULT_CLUSTER_GAP`].
    pub d: Option<Interval>,
    pub d_prime: Option<Interval>,
}

pub const DEFAULT_CLUSTER_GAP: Interval = Interval::new(0.5, 5.0);

impl Default for ParameterRanges {
    fn default() -> Self {
        let sharp_small = Interval::new(0.01, 1.0);
        let sharp_large = Interval::new(0.1, 8.0);
        let amp_small = Interval::new(0.005, 0.5);
        let amp_large = Interval::new(0.01, 12.0);
        Self {
            a: sharp_small,
            eta: amp_small,
            b: sharp_small,
            sigma: amp_small,
            a_prime: sharp_large,
            eta_prime: amp_large,
            b_prime: sharp_large,
            sigma_prime: amp_large,
            p: sharp_large,
            p_prime: sharp_large,
            zeta: amp_large,
            zeta_prime: amp_large,
            r: Interval::new(0.5, 3.0),
            r_prime: Interval::new(0.5, 3.0),
            m: Interval::new(1e-8, 1.0),
            d: None,
            d_prime: None,
        }
    }
}

impl ParameterRanges {
    /// Every range collapsed onto a Bell parameter vector.
    pub fn at_bell(p: &BellParameters) -> Self {
        Self {
            a: Interval::point(p.a),
            eta: Interval::point(p.eta),
            b: Interval::point(p.b),
            sigma: Interval::point(p.sigma),
            a_prime: Interval::point(p.a_prime),
            eta_prime: Interval::point(p.eta_prime),
            b_prime: Interval::point(p.b_prime),
            sigma_prime: Interval::point(p.sigma_prime),
            r: Interval::point(p.r),
            r_prime: Interval::point(p.r_prime),
            m: Interval::point(p.m.value()),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), SearchError> {
        for (field, i) in [
            ("a", self.a),
            ("b", self.b),
            ("a_prime", self.a_prime),
            ("b_prime", self.b_prime),
            ("p", self.p),
            ("p_prime", self.p_prime),
            ("R", self.r),
            ("R_prime", self.r_prime),
        ] {
            i.check(field, true)?;
        }
        for (field, i) in [
            ("eta", self.eta),
            ("sigma", self.sigma),
            ("eta_prime", self.eta_prime),
            ("sigma_prime", self.sigma_prime),
            ("zeta", self.zeta),
            ("zeta_prime", self.zeta_prime),
        ] {
            i.check(field, false)?;
        }
        for (field, i) in [("d", self.d), ("d_prime", self.d_prime)] {
            if let Some(i) = i {
                i.check(field, false)?;
                if i.lo < 0.0 {
                    return Err(SearchError::Range { field, lo: i.lo, hi: i.hi });
                }
            }
        }
        let m = self.m;
        if !(m.lo >= MASS_MIN && m.hi <= 10.0 && m.lo <= m.hi) {
            return Err(SearchError::MassRange { lo: m.lo, hi: m.hi });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchConfig {
    pub target: SearchTarget,
    pub sample_count: u64,
    pub seed: u64,
    pub top_k: usize,
    pub bob_dressing: Dressing,
    /// Causality-filter tolerance relative to `√(H(f,f) H(h,h))`.
    pub pj_tolerance: f64,
    pub ranges: ParameterRanges,
    #[serde(skip)]
    pub quadrature: QuadSettings,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            target: SearchTarget::Chsh,
            sample_count: 100_000,
            seed: 1,
            top_k: 20,
            bob_dressing: Dressing::Adjoint,
            pj_tolerance: DEFAULT_PJ_TOLERANCE_FACTOR,
            ranges: ParameterRanges::default(),
            quadrature: QuadSettings::default(),
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<(), SearchError> {
        self.ranges.validate()?;
        self.quadrature.validate()?;
        Ok(())
    }

    fn conventions(&self) -> Conventions {
        Conventions {
            mode: FormulaMode::Derived,
            bob: self.bob_dressing,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampledParameters {
    Bell(BellParameters),
    Mermin(MerminParameters),
    Cluster(ClusterParameters),
}

impl SampledParameters {
    /// Named columns in a fixed order per variant.
    pub fn columns(&self) -> Vec<(&'static str, f64)> {
        let bell = |p: &BellParameters| {
            vec![
                ("a", p.a),
                ("eta", p.eta),
                ("b", p.b),
                ("sigma", p.sigma),
                ("a_prime", p.a_prime),
                ("eta_prime", p.eta_prime),
                ("b_prime", p.b_prime),
                ("sigma_prime", p.sigma_prime),
                ("m", p.m.value()),
                ("R", p.r),
                ("R_prime", p.r_prime),
            ]
        };
        match self {
            SampledParameters::Bell(p) => bell(p),
            SampledParameters::Mermin(p) => {
                let mut c = bell(&p.bell);
                c.extend([
                    ("p", p.p),
                    ("p_prime", p.p_prime),
                    ("zeta", p.zeta),
                    ("zeta_prime", p.zeta_prime),
                    ("d", p.d),
                    ("d_prime", p.d_prime),
                ]);
                c
            }
            SampledParameters::Cluster(p) => vec![
                ("a", p.a),
                ("eta", p.eta),
                ("p", p.p),
                ("zeta", p.zeta),
                ("R", p.r),
                ("m", p.m.value()),
                ("d", p.h_center - 3.0 * p.r),
            ],
        }
    }
}

/// Error estimate of one bilinear, e.g. `H(f,g')`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BilinearError {
    pub name: String,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchRecord {
    pub index: u64,
    pub parameters: SampledParameters,
    pub status: FilterStatus,
    /// Present iff accepted.
    pub value: Option<f64>,
    pub errors: Vec<BilinearError>,
    pub converged: bool,
}

impl SearchRecord {
    pub fn max_error(&self) -> f64 {
        self.errors.iter().map(|e| e.error).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SearchDiagnostics {
    pub sampled: u64,
    pub accepted: u64,
    pub rejected_causality: u64,
    pub rejected_geometry: u64,
    pub non_converged: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchOutcome {
    /// Accepted records ranked by `|value|` descending, ties by index.
    pub records: Vec<SearchRecord>,
    pub diagnostics: SearchDiagnostics,
}

/// Parameters of sample `index`: a ChaCha8 stream per sample, drawn in a fixed order.
pub fn sample_parameters(cfg: &SearchConfig, index: u64) -> Result<SampledParameters, SearchError> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(index);
    let r = &cfg.ranges;
    let mass = |rng: &mut ChaCha8Rng| Mass::new(r.m.log_uniform(rng)).map_err(|_| SearchError::MassRange { lo: r.m.lo, hi: r.m.hi });
    Ok(match cfg.target {
        SearchTarget::Chsh | SearchTarget::Mermin3 => {
            let bell = BellParameters {
                a: r.a.uniform(&mut rng),
                eta: r.eta.uniform(&mut rng),
                b: r.b.uniform(&mut rng),
                sigma: r.sigma.uniform(&mut rng),
                a_prime: r.a_prime.uniform(&mut rng),
                eta_prime: r.eta_prime.uniform(&mut rng),
                b_prime: r.b_prime.uniform(&mut rng),
                sigma_prime: r.sigma_prime.uniform(&mut rng),
                r: r.r.uniform(&mut rng),
                r_prime: r.r_prime.uniform(&mut rng),
                m: mass(&mut rng)?,
            };
            if cfg.target == SearchTarget::Chsh {
                SampledParameters::Bell(bell)
            } else {
                let p = r.p.uniform(&mut rng);
                let p_prime = r.p_prime.uniform(&mut rng);
                let zeta = r.zeta.uniform(&mut rng);
                let zeta_prime = r.zeta_prime.uniform(&mut rng);
                let d = r.d.map_or(2.0 * bell.r, |i| i.uniform(&mut rng));
                let d_prime = r.d_prime.map_or(2.0 * bell.r, |i| i.uniform(&mut rng));
                SampledParameters::Mermin(MerminParameters {
                    bell,
                    p,
                    p_prime,
                    zeta,
                    zeta_prime,
                    d,
                    d_prime,
                })
            }
        }
        SearchTarget::Cluster => {
            let a = r.a.uniform(&mut rng);
            let eta = r.eta.uniform(&mut rng);
            let p = r.p.uniform(&mut rng);
            let zeta = r.zeta.uniform(&mut rng);
            let radius = r.r.uniform(&mut rng);
            let m = mass(&mut rng)?;
            let d = r.d.unwrap_or(DEFAULT_CLUSTER_GAP).uniform(&mut rng);
            SampledParameters::Cluster(ClusterParameters::with_gap(a, eta, p, zeta, radius, m, d))
        }
    })
}

fn errors_of(entries: &[BilinearEntry]) -> Vec<BilinearError> {
    entries
        .iter()
        .map(|e| {
            let k = match e.kind {
                KernelKind::Hadamard => "H",
                KernelKind::PauliJordan => "PJ",
            };
            BilinearError {
                name: format!("{k}({},{})", e.left, e.right),
                error: e.result.error_estimate,
            }
        })
        .collect()
}

fn evaluate_sample(cfg: &SearchConfig, quad: &Quadrature, index: u64) -> Result<SearchRecord, SearchError> {
    let parameters = sample_parameters(cfg, index)?;
    let (status, value, errors, converged) = match &parameters {
        SampledParameters::Bell(p) => {
            let run = run_chsh(p, quad, cfg.conventions())?;
            let converged = run.evaluation.converged();
            (FilterStatus::Accepted, Some(run.report.value), errors_of(&run.evaluation.entries), converged)
        }
        SampledParameters::Mermin(p) => {
            let run = run_mermin(p, quad, cfg.conventions(), cfg.pj_tolerance)?;
            let (errors, converged) = match &run.evaluation {
                Some(e) => (errors_of(&e.entries), e.converged()),
                None => (Vec::new(), true),
            };
            (run.status, run.report.map(|r| r.value), errors, converged)
        }
        SampledParameters::Cluster(p) => {
            let run = run_cluster(p, quad)?;
            let converged = run.evaluation.converged();
            (FilterStatus::Accepted, Some(run.report.value), errors_of(&run.evaluation.entries), converged)
        }
    };
    Ok(SearchRecord {
        index,
        parameters,
        status,
        value,
        errors,
        converged,
    })
}

/// Ranks by `|value|` descending with ties broken by ascending index; records
/// without a value go last.
pub fn rank(records: &mut [SearchRecord]) {
    records.sort_by(|x, y| {
        let ax = x.value.map_or(f64::NEG_INFINITY, f64::abs);
        let ay = y.value.map_or(f64::NEG_INFINITY, f64::abs);
        ay.total_cmp(&ax).then(x.index.cmp(&y.index))
    });
}

/// Evaluates `sample_count` draws and keeps the `top_k` accepted ones (`top_k = 0`
/// keeps all). Results do not depend on the number of worker threads.
pub fn random_search(cfg: &SearchConfig, quad: &Quadrature) -> Result<SearchOutcome, SearchError> {
    cfg.validate()?;
    let all: Vec<SearchRecord> = (0..cfg.sample_count)
        .into_par_iter()
        .map(|i| evaluate_sample(cfg, quad, i))
        .collect::<Result<_, _>>()?;
    let mut diagnostics = SearchDiagnostics {
        sampled: cfg.sample_count,
        ..Default::default()
    };
    for r in &all {
        match r.status {
            FilterStatus::Accepted => diagnostics.accepted += 1,
            FilterStatus::RejectedCausality => diagnostics.rejected_causality += 1,
            FilterStatus::RejectedGeometry => diagnostics.rejected_geometry += 1,
        }
        if !r.converged {
            diagnostics.non_converged += 1;
        }
    }
    let mut records: Vec<SearchRecord> = all.into_iter().filter(|r| r.status == FilterStatus::Accepted).collect();
    rank(&mut records);
    if cfg.top_k > 0 {
        records.truncate(cfg.top_k);
    }
    Ok(SearchOutcome { records, diagnostics })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterOutcome {
    pub status: FilterStatus,
    pub checks: Vec<PjCheck>,
}

/// Geometry first; then `|Δ_PJ(h,f)|`, `|Δ_PJ(h′,f)|`, `|Δ_PJ(h,f′)|`, `|Δ_PJ(h′,f′)|`
/// against `factor · √(H(f,f) H(h,h))` (primes as in the pair).
pub fn causality_filter(params: &MerminParameters, quad: &Quadrature, factor: f64) -> Result<FilterOutcome, SearchError> {
    params.validate().map_err(ExperimentError::from)?;
    if !mermin_geometry_ok(params).map_err(ExperimentError::from)? {
        return Ok(FilterOutcome {
            status: FilterStatus::RejectedGeometry,
            checks: Vec::new(),
        });
    }
    let bumps = mermin_bumps(params).map_err(ExperimentError::from)?;
    let bump = |l: Label| bumps.iter().find(|(k, _)| *k == l).map(|(_, b)| *b).expect("all labels present");
    let m = params.bell.m;
    let mut checks = Vec::with_capacity(4);
    for h in [Label::H, Label::HPrime] {
        for f in [Label::F, Label::FPrime] {
            let (bh, bf) = (bump(h), bump(f));
            let hff = quad.h_form(&bf, &bf, m).value;
            let hhh = quad.h_form(&bh, &bh, m).value;
            checks.push(PjCheck {
                left: h,
                right: f,
                value: quad.pj_form(&bh, &bf, m).value,
                tolerance: factor * (hff * hhh).abs().sqrt(),
            });
        }
    }
    let status = if checks.iter().all(PjCheck::passes) {
        FilterStatus::Accepted
    } else {
        FilterStatus::RejectedCausality
    };
    Ok(FilterOutcome { status, checks })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MassPoint {
    pub m: f64,
    /// `1/|ln m|`.
    pub xi: f64,
    pub value: f64,
    pub converged: bool,
}

pub fn inverse_log_mass(m: f64) -> f64 {
    1.0 / m.ln().abs()
}

/// CHSH value per parameter vector, ordered by descending mass (stable, duplicates kept).
pub fn mass_sweep(
    entries: &[BellParameters],
    quad: &Quadrature,
    conventions: Conventions,
) -> Result<Vec<MassPoint>, SearchError> {
    let mut out = entries
        .iter()
        .map(|p| {
            let run = run_chsh(p, quad, conventions)?;
            let m = p.m.value();
            Ok(MassPoint {
                m,
                xi: inverse_log_mass(m),
                value: run.report.value,
                converged: run.evaluation.converged(),
            })
        })
        .collect::<Result<Vec<_>, SearchError>>()?;
    out.sort_by(|x, y| y.m.total_cmp(&x.m));
    Ok(out)
}

pub const DEFAULT_FIT_DEGREE: usize = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Extrapolation {
    /// Fit at `ξ = 0`, i.e. `m → 0`.
    pub intercept: f64,
    /// Polynomial coefficients in `ξ = 1/|ln m|`, constant term first.
    pub coefficients: Vec<f64>,
    pub degree: usize,
}

/// Least-squares polynomial in `ξ = 1/|ln m|`.
pub fn extrapolate_massless(points: &[(f64, f64)], degree: usize) -> Result<Extrapolation, SearchError> {
    let needed = (degree + 1).max(3);
    if points.len() < needed {
        return Err(SearchError::TooFewPoints {
            needed,
            got: points.len(),
        });
    }
    if let Some(&(m, _)) = points.iter().find(|(m, _)| !(*m > 0.0 && *m < 1.0)) {
        return Err(SearchError::MassOutOfRange(m));
    }
    let n = points.len();
    let design = DMatrix::from_fn(n, degree + 1, |i, j| inverse_log_mass(points[i].0).powi(j as i32));
    let rhs = DVector::from_iterator(n, points.iter().map(|p| p.1));
    let svd = design.svd(true, true);
    let smax = svd.singular_values.max();
    if svd.singular_values.min() <= 1e-12 * smax {
        return Err(SearchError::Degenerate(degree));
    }
    let coefficients = svd
        .solve(&rhs, 0.0)
        .map_err(|_| SearchError::Degenerate(degree))?
        .iter()
        .copied()
        .collect::<Vec<_>>();
    Ok(Extrapolation {
        intercept: coefficients[0],
        coefficients,
        degree,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fast_cfg(target: SearchTarget, n: u64) -> SearchConfig {
        SearchConfig {
            target,
            sample_count: n,
            seed: 7,
            top_k: 0,
            quadrature: QuadSettings::fast(),
            ..Default::default()
        }
    }

    fn quad() -> Quadrature {
        Quadrature::new(QuadSettings::fast()).unwrap()
    }

    #[test]
    fn zero_samples_is_empty() {
        let out = random_search(&fast_cfg(SearchTarget::Chsh, 0), &quad()).unwrap();
        assert!(out.records.is_empty());
        assert_eq!(out.diagnostics, SearchDiagnostics::default());
    }

    #[test]
    fn invalid_ranges() {
        let mut cfg = fast_cfg(SearchTarget::Chsh, 1);
        cfg.ranges.a = Interval::new(1.0, 0.5);
        assert!(matches!(cfg.validate(), Err(SearchError::Range { field: "a", .. })));
        let mut cfg = fast_cfg(SearchTarget::Chsh, 1);
        cfg.ranges.m = Interval::new(1e-12, 1.0);
        assert!(matches!(cfg.validate(), Err(SearchError::MassRange { .. })));
    }

    #[test]
    fn sampling_is_per_index() {
        let cfg = fast_cfg(SearchTarget::Mermin3, 10);
        let a = sample_parameters(&cfg, 3).unwrap();
        assert_eq!(a, sample_parameters(&cfg, 3).unwrap());
        assert_ne!(a, sample_parameters(&cfg, 4).unwrap());
        let SampledParameters::Mermin(p) = a else { panic!() };
        assert_eq!(p.d, 2.0 * p.bell.r);
        assert_eq!(p.d_prime, 2.0 * p.bell.r);
        let m = p.bell.m.value();
        assert!((1e-8..=1.0).contains(&m));
    }

    #[test]
    fn collapsed_ranges_hit_the_point() {
        let p = BellParameters {
            a: 0.453107,
            eta: 0.06256,
            b: 0.241230,
            sigma: 0.033623,
            a_prime: 3.008120,
            eta_prime: 4.486029,
            b_prime: 0.699209,
            sigma_prime: 4.096952,
            m: Mass::new(0.00939).unwrap(),
            r: 1.859616,
            r_prime: 0.840575,
        };
        let mut cfg = fast_cfg(SearchTarget::Chsh, 1);
        cfg.ranges = ParameterRanges::at_bell(&p);
        assert_eq!(sample_parameters(&cfg, 0).unwrap(), SampledParameters::Bell(p));
        let out = random_search(&cfg, &quad()).unwrap();
        let direct = run_chsh(&p, &quad(), cfg.conventions()).unwrap().report.value;
        assert_eq!(out.records[0].value, Some(direct));
    }

    #[test]
    fn search_is_ranked_and_bounded() {
        let out = random_search(&fast_cfg(SearchTarget::Chsh, 60), &quad()).unwrap();
        assert_eq!(out.records.len(), 60);
        for w in out.records.windows(2) {
            assert!(w[0].value.unwrap().abs() >= w[1].value.unwrap().abs());
        }
        for r in &out.records {
            assert!(r.value.unwrap().abs() <= crate::correlators::TSIRELSON + 1e-3);
        }
    }

    #[test]
    fn ranking_ties_by_index() {
        let cfg = fast_cfg(SearchTarget::Chsh, 3);
        let mk = |index, value| SearchRecord {
            index,
            parameters: sample_parameters(&cfg, index).unwrap(),
            status: FilterStatus::Accepted,
            value,
            errors: Vec::new(),
            converged: true,
        };
        let mut rs = vec![mk(2, Some(-1.5)), mk(0, None), mk(1, Some(1.5)), mk(3, Some(2.0))];
        rank(&mut rs);
        let order: Vec<u64> = rs.iter().map(|r| r.index).collect();
        assert_eq!(order, vec![3, 1, 2, 0]);
    }

    #[test]
    fn mermin_search_filters_and_counts() {
        let out = random_search(&fast_cfg(SearchTarget::Mermin3, 12), &quad()).unwrap();
        let d = out.diagnostics;
        assert_eq!(d.sampled, 12);
        assert_eq!(d.accepted + d.rejected_causality + d.rejected_geometry, 12);
        assert_eq!(out.records.len() as u64, d.accepted);
        for r in &out.records {
            let SampledParameters::Mermin(p) = r.parameters else { panic!() };
            assert!(mermin_geometry_ok(&p).unwrap());
            assert!(r.value.unwrap().abs() <= 4.0 + 1e-3);
        }
    }

    #[test]
    fn all_rejecting_mermin_ranges() {
        let mut cfg = fast_cfg(SearchTarget::Mermin3, 5);
        cfg.ranges.d = Some(Interval::point(0.0));
        cfg.ranges.d_prime = Some(Interval::point(0.0));
        cfg.ranges.r_prime = Interval::new(2.5, 3.0);
        cfg.ranges.r = Interval::new(0.5, 1.0);
        let out = random_search(&cfg, &quad()).unwrap();
        assert!(out.records.is_empty());
        assert_eq!(out.diagnostics.rejected_geometry, 5);
    }

    #[test]
    fn filter_examples() {
        let bell = BellParameters {
            a: 0.9465,
            eta: 0.3055,
            b: 0.1312,
            sigma: 0.0749,
            a_prime: 2.7175,
            eta_prime: 2.4143,
            b_prime: 7.3920,
            sigma_prime: 9.9823,
            m: Mass::new(0.0898).unwrap(),
            r: 1.7299,
            r_prime: 2.6952,
        };
        let p = MerminParameters {
            bell,
            p: 0.3337,
            p_prime: 1.2638,
            zeta: 0.09370,
            zeta_prime: 0.3913,
            d: 2.0 * bell.r,
            d_prime: 2.0 * bell.r,
        };
        let out = causality_filter(&p, &quad(), DEFAULT_PJ_TOLERANCE_FACTOR).unwrap();
        assert_eq!(out.status, FilterStatus::Accepted);
        assert_eq!(out.checks.len(), 4);
        let overlapping = MerminParameters { d: 0.0, d_prime: 0.0, ..p };
        let out = causality_filter(&overlapping, &quad(), DEFAULT_PJ_TOLERANCE_FACTOR).unwrap();
        assert_eq!(out.status, FilterStatus::RejectedGeometry);
    }

    #[test]
    fn tangent_third_diamond_is_accepted() {
        // R = R′ and d = 0: f′ and h touch at a single point.
        let bell = BellParameters {
            a: 0.5,
            eta: 0.2,
            b: 0.4,
            sigma: 0.1,
            a_prime: 2.0,
            eta_prime: 1.0,
            b_prime: 2.0,
            sigma_prime: 1.0,
            m: Mass::new(0.1).unwrap(),
            r: 1.0,
            r_prime: 1.0,
        };
        let p = MerminParameters {
            bell,
            p: 1.0,
            p_prime: 1.0,
            zeta: 0.5,
            zeta_prime: 0.5,
            d: 0.0,
            d_prime: 0.0,
        };
        let out = causality_filter(&p, &quad(), DEFAULT_PJ_TOLERANCE_FACTOR).unwrap();
        assert_eq!(out.status, FilterStatus::Accepted);
    }

    #[test]
    fn mass_sweep_orders_and_keeps_duplicates() {
        let base = BellParameters {
            a: 0.5,
            eta: 0.2,
            b: 0.4,
            sigma: 0.1,
            a_prime: 2.0,
            eta_prime: 1.0,
            b_prime: 2.0,
            sigma_prime: 1.0,
            m: Mass::new(1e-3).unwrap(),
            r: 1.0,
            r_prime: 1.0,
        };
        let light = BellParameters {
            m: Mass::new(1e-6).unwrap(),
            ..base
        };
        let c = Conventions::default();
        let single = mass_sweep(&[base], &quad(), c).unwrap();
        assert_eq!(single.len(), 1);
        let out = mass_sweep(&[light, base, base], &quad(), c).unwrap();
        let ms: Vec<f64> = out.iter().map(|p| p.m).collect();
        assert_eq!(ms, vec![1e-3, 1e-3, 1e-6]);
        assert_eq!(out[0].value, out[1].value);
        assert_eq!(out[2].xi, 1.0 / (1e-6f64).ln().abs());
    }

    #[test]
    fn extrapolation_examples() {
        let pts: Vec<(f64, f64)> = [1e-2, 1e-4, 1e-6].iter().map(|&m| (m, 2.5)).collect();
        let e = extrapolate_massless(&pts, 2).unwrap();
        assert!((e.intercept - 2.5).abs() < 1e-12);
        assert!(matches!(extrapolate_massless(&pts[..2], 2), Err(SearchError::TooFewPoints { .. })));
        assert!(matches!(extrapolate_massless(&[(1e-2, 1.0), (1e-2, 1.1), (1e-2, 1.2)], 2), Err(SearchError::Degenerate(2))));
        assert!(matches!(extrapolate_massless(&[(1.5, 1.0), (1e-2, 1.1), (1e-3, 1.2)], 2), Err(SearchError::MassOutOfRange(_))));
    }

    proptest! {
        #[test]
        fn exact_quadratic_is_recovered(c0 in -3.0..3.0f64, c1 in -3.0..3.0f64, c2 in -3.0..3.0f64) {
            let pts: Vec<(f64, f64)> = [0.5, 1e-1, 1e-3, 1e-5, 1e-8]
                .iter()
                .map(|&m| {
                    let xi = inverse_log_mass(m);
                    (m, c0 + c1 * xi + c2 * xi * xi)
                })
                .collect();
            let e = extrapolate_massless(&pts, 2).unwrap();
            prop_assert!((e.intercept - c0).abs() < 1e-10);
        }
    }
}
