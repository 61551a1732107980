//! Quick invariant suite: kernel symmetries, causality zeros, special-function
//! regime agreement, reducer identities and a backend cross-check.

use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use diamond_bell::correlators::{
    chsh_correlator, cluster_quantity, mermin3_correlator, reduce_vacuum_expectation,
    reduce_vacuum_expectation_complex, three_op_correlator, two_op_correlator, BilinearTable, Conventions,
    DressedProjectorWord, Dressing, Factor, FormulaMode, Label,
};
use diamond_bell::kernel::{hadamard, pauli_jordan, Mass};
use diamond_bell::quad::{Backend, BilinearCache, QuadSettings, Quadrature};
use diamond_bell::specfun::{bessel_j0_in, bessel_k0_in, bessel_y0_in, Regime, ASYMPTOTIC_CUTOFF, SERIES_CUTOFF};
use diamond_bell::testfn::{left_diamond, right_diamond};

use crate::config;
use crate::CliError;

/// One verification line.
#[derive(Debug, Clone)]
pub struct Check {
    pub name: &'static str,
    pub outcome: Result<(), String>,
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Small LCG for reproducible test tables; quality is irrelevant here.
struct Lcg(u64);

impl Lcg {
    fn next(&mut self) -> f64 {
        self.0 = self.0.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (self.0 >> 11) as f64 / (1u64 << 53) as f64
    }
}

fn kernel_symmetries() -> Result<(), String> {
    let m = Mass::new(0.7).map_err(|e| e.to_string())?;
    for i in 0..20 {
        for j in 0..20 {
            let (dt, dx) = (-3.0 + 0.31 * i as f64, -3.0 + 0.29 * j as f64);
            ensure(pauli_jordan(dt, dx, m) == -pauli_jordan(-dt, -dx, m), || format!("Δ_PJ not odd at ({dt}, {dx})"))?;
            if dx.abs() > dt.abs() {
                ensure(pauli_jordan(dt, dx, m) == 0.0, || format!("Δ_PJ nonzero at spacelike ({dt}, {dx})"))?;
            }
            if dt.abs() != dx.abs() {
                let h = hadamard(dt, dx, m).map_err(|e| e.to_string())?;
                ensure(h == hadamard(-dt, -dx, m).map_err(|e| e.to_string())?, || format!("H not even at ({dt}, {dx})"))?;
            }
        }
    }
    Ok(())
}

fn specfun_regimes() -> Result<(), String> {
    for x in [SERIES_CUTOFF, ASYMPTOTIC_CUTOFF] {
        let (lo, hi) = if x == SERIES_CUTOFF {
            (Regime::Series, Regime::Recurrence)
        } else {
            (Regime::Recurrence, Regime::Asymptotic)
        };
        let envelope = (2.0 / (std::f64::consts::PI * x)).sqrt();
        for (name, f) in [("J0", bessel_j0_in as fn(Regime, f64) -> f64), ("Y0", bessel_y0_in)] {
            let d = (f(lo, x) - f(hi, x)).abs();
            ensure(d <= 1e-10 * envelope.max(f(hi, x).abs()), || format!("{name} regimes disagree at {x}: {d:e}"))?;
        }
        let k = bessel_k0_in(hi, x);
        let d = (bessel_k0_in(lo, x) - k).abs();
        ensure(d <= 1e-10 * k, || format!("K0 regimes disagree at {x}: {d:e}"))?;
    }
    Ok(())
}

fn causality_zeros(quad: &Quadrature) -> Result<(), String> {
    let m = Mass::new(0.3).map_err(|e| e.to_string())?;
    let f = right_diamond(1.0, 0.5, 1.0).map_err(|e| e.to_string())?;
    let g = left_diamond(0.8, 0.7, 2.0).map_err(|e| e.to_string())?;
    let pfg = quad.pj_form(&f, &g, m).value;
    let tau = 1e-6 * (quad.h_form(&f, &f, m).value * quad.h_form(&g, &g, m).value).sqrt();
    ensure(pfg.abs() <= tau, || format!("Δ_PJ(f,g) = {pfg:e} for tangent diamonds"))?;
    let pff = quad.pj_form(&f, &f, m).value;
    ensure(pff.abs() <= 1e-10, || format!("Δ_PJ(f,f) = {pff:e}"))
}

fn zero_tables() -> Result<(), String> {
    use Label::*;
    let t = BilinearTable::zeros(Mass::new(0.1).map_err(|e| e.to_string())?, &Label::ALL);
    let c = Conventions::default();
    let chsh = chsh_correlator(&t, [F, FPrime, G, GPrime], c).map_err(|e| e.to_string())?.value;
    let two = two_op_correlator(&t, F, G).map_err(|e| e.to_string())?;
    let three = three_op_correlator(&t, [F, G, H], c).map_err(|e| e.to_string())?;
    let mermin = mermin3_correlator(&t, Label::ALL, c).map_err(|e| e.to_string())?.value;
    ensure([chsh, two, three, mermin] == [2.0, 1.0, -1.0, -2.0], || {
        format!("all-zero tables gave {chsh}, {two}, {three}, {mermin}")
    })
}

fn random_table(rng: &mut Lcg, labels: &[Label]) -> BilinearTable {
    let mut t = BilinearTable::zeros(Mass::new(0.1).expect("valid mass"), labels);
    for (i, &a) in labels.iter().enumerate() {
        t.set_h(a, a, 3.0 * rng.next());
        for &b in &labels[i + 1..] {
            t.set_h(a, b, rng.next() - 0.5);
        }
    }
    t
}

fn reducer_identities() -> Result<(), String> {
    use Label::*;
    let mut rng = Lcg(17);
    for _ in 0..200 {
        let t = random_table(&mut rng, &[F, G, H]);
        let word = DressedProjectorWord::new(vec![Factor::new(F, Dressing::Adjoint), Factor::new(G, Dressing::Direct)]);
        let r = reduce_vacuum_expectation(&word, &t).map_err(|e| e.to_string())?;
        let p = two_op_correlator(&t, F, G).map_err(|e| e.to_string())?;
        ensure((r - p).abs() <= 1e-14, || format!("reducer {r} vs closed form {p}"))?;
        let c = cluster_quantity(&t, F, H, 1.0).map_err(|e| e.to_string())?;
        ensure((c.connected - c.connected_closed_form).abs() <= 1e-14, || {
            format!("connected correlator {} vs {}", c.connected, c.connected_closed_form)
        })?;
        let ab = reduce_vacuum_expectation_complex(&word, &t).map_err(|e| e.to_string())?;
        let ba = reduce_vacuum_expectation_complex(
            &DressedProjectorWord::new(vec![word.factors[1], word.factors[0]]),
            &t,
        )
        .map_err(|e| e.to_string())?;
        ensure((ab - ba).norm() <= 1e-14, || format!("⟨[A,B]⟩ = {}", ab - ba))?;
    }
    let t = random_table(&mut rng, &Label::ALL);
    let printed = Conventions {
        mode: FormulaMode::Printed,
        bob: Dressing::Direct,
    };
    let derived = Conventions {
        mode: FormulaMode::Derived,
        bob: Dressing::Direct,
    };
    let p = chsh_correlator(&t, [F, FPrime, G, GPrime], printed).map_err(|e| e.to_string())?.value;
    let d = chsh_correlator(&t, [F, FPrime, G, GPrime], derived).map_err(|e| e.to_string())?.value;
    ensure((p - d).abs() <= 1e-13, || format!("CHSH printed {p} vs derived {d}"))
}

fn backend_cross_check(settings: &QuadSettings, cache: Arc<BilinearCache>) -> Result<(), String> {
    let m = Mass::new(0.2).map_err(|e| e.to_string())?;
    let f = right_diamond(1.0, 0.4, 0.6).map_err(|e| e.to_string())?;
    let g = left_diamond(0.9, 0.6, 1.1).map_err(|e| e.to_string())?;
    let det = Quadrature::new(settings.with_backend(Backend::Deterministic))
        .map_err(|e| e.to_string())?
        .with_cache(cache.clone());
    let qmc_settings = QuadSettings {
        sample_count: 1 << 16,
        ..settings.with_backend(Backend::Qmc)
    };
    let qmc = Quadrature::new(qmc_settings).map_err(|e| e.to_string())?.with_cache(cache.clone());
    let a = det.h_form(&f, &g, m);
    let b = qmc.h_form(&f, &g, m);
    let tol = 3.0 * (a.error_estimate + b.error_estimate);
    ensure((a.value - b.value).abs() <= tol, || {
        format!("deterministic {} vs qmc {} (tolerance {tol:e})", a.value, b.value)
    })?;
    let hits = cache.hits();
    let again = det.h_form(&f, &g, m);
    ensure(again.value == a.value && cache.hits() == hits + 1, || "cache did not serve a repeated bilinear".into())
}

/// Runs the suite with the `[quadrature]` and cache settings of `config`, if given.
/// Prints one `PASS`/`FAIL` line per check.
pub fn cmd_verify(config_path: Option<&Path>, out: &mut dyn Write) -> Result<Vec<Check>, CliError> {
    let (settings, cache_file) = match config_path {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
            match config::parse(&text) {
                Ok(c) => (c.quadrature, c.run.cache_file),
                Err(e) => {
                    writeln!(out, "FAIL quadrature settings: {e}")?;
                    return Err(e);
                }
            }
        }
        None => (QuadSettings::default(), None),
    };
    let cache = Arc::new(match &cache_file {
        Some(p) => BilinearCache::open(p)?,
        None => BilinearCache::in_memory(),
    });
    let quad = Quadrature::new(settings)
        .map_err(|e| CliError::Config(e.to_string()))?
        .with_cache(cache.clone());
    let checks = vec![
        Check {
            name: "kernel symmetries",
            outcome: kernel_symmetries(),
        },
        Check {
            name: "special-function regimes",
            outcome: specfun_regimes(),
        },
        Check {
            name: "causality zeros",
            outcome: causality_zeros(&quad),
        },
        Check {
            name: "all-zero tables",
            outcome: zero_tables(),
        },
        Check {
            name: "reducer identities",
            outcome: reducer_identities(),
        },
        Check {
            name: "backend cross-check",
            outcome: backend_cross_check(&settings, cache),
        },
    ];
    let mut failed = 0;
    for c in &checks {
        match &c.outcome {
            Ok(()) => writeln!(out, "PASS {}", c.name)?,
            Err(msg) => {
                failed += 1;
                writeln!(out, "FAIL {}: {msg}", c.name)?;
            }
        }
    }
    if failed > 0 {
        return Err(CliError::Verification(failed));
    }
    Ok(checks)
}
