use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use diamond_bell::correlators::{Conventions, FormulaMode};
use diamond_bell::experiment::{run_chsh, run_cluster, run_mermin, Evaluation, FilterStatus, DEFAULT_PJ_TOLERANCE_FACTOR};
use diamond_bell::quad::{BilinearCache, Quadrature};
use diamond_bell::search::{extrapolate_massless, mass_sweep, random_search, sample_parameters};
use diamond_bell::specfun::CROSSOVERS;
use serde_json::{json, Value};

use crate::config::{self, LoadedConfig};
use crate::manifest::{CacheStats, RunManifest};
use crate::CliError;

/// Command-line overrides of the `[run]` section.
#[derive(Debug, Clone, Default)]
pub struct CommandOptions {
    /// Literal closed forms instead of the reducer.
    pub printed: bool,
    pub output_dir: Option<PathBuf>,
    pub name: Option<String>,
}

/// Files written by a command and its headline value.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub report: PathBuf,
    pub csv: PathBuf,
    pub manifest: PathBuf,
    pub value: Option<f64>,
}

struct Context<'a> {
    loaded: &'a LoadedConfig,
    command: &'static str,
    name: String,
    dir: PathBuf,
    conventions: Conventions,
    quad: Quadrature,
    cache: Arc<BilinearCache>,
    started: Instant,
    started_unix: u64,
}

impl<'a> Context<'a> {
    fn new(loaded: &'a LoadedConfig, opts: &CommandOptions, command: &'static str) -> Result<Self, CliError> {
        let run = &loaded.config.run;
        let cache = Arc::new(match &run.cache_file {
            Some(p) => BilinearCache::open(p)?,
            None => BilinearCache::in_memory(),
        });
        let quad = Quadrature::new(loaded.config.quadrature)
            .map_err(|e| CliError::Config(format!("[quadrature]: {e}")))?
            .with_cache(cache.clone());
        let mode = if opts.printed {
            FormulaMode::Printed
        } else {
            run.formula_mode
        };
        Ok(Self {
            loaded,
            command,
            name: opts.name.clone().unwrap_or_else(|| run.name.clone()),
            dir: opts.output_dir.clone().unwrap_or_else(|| run.output_dir.clone()),
            conventions: Conventions {
                mode,
                bob: run.bob_dressing,
            },
            quad,
            cache,
            started: Instant::now(),
            started_unix: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
        })
    }

    fn path(&self, ext: &str) -> PathBuf {
        self.dir.join(format!("{}.{ext}", self.name))
    }

    fn write(
        &self,
        report: Value,
        header: &[String],
        rows: &[Vec<String>],
        seed: u64,
        diagnostics: Option<Value>,
        exit_code: i32,
        value: Option<f64>,
    ) -> Result<RunOutput, CliError> {
        fs::create_dir_all(&self.dir)?;
        let out = RunOutput {
            report: self.path("report.json"),
            csv: self.path("csv"),
            manifest: self.path("manifest"),
            value,
        };
        fs::write(&out.report, serde_json::to_string_pretty(&report)? + "\n")?;
        let mut w = csv::Writer::from_path(&out.csv)?;
        w.write_record(header)?;
        for r in rows {
            w.write_record(r)?;
        }
        w.flush()?;
        let manifest = RunManifest {
            tool: "diamond-bell",
            tool_version: env!("CARGO_PKG_VERSION"),
            command: self.command.to_string(),
            run_name: self.name.clone(),
            config_path: self.loaded.path.display().to_string(),
            config_hash: self.loaded.content_hash(),
            config: self.loaded.text.clone(),
            seed,
            quadrature: *self.quad.settings(),
            formula_mode: self.conventions.mode,
            bob_dressing: self.conventions.bob,
            threads: rayon::current_num_threads(),
            started_unix: self.started_unix,
            wall_clock_seconds: self.started.elapsed().as_secs_f64(),
            specfun_crossovers: CROSSOVERS,
            cache: CacheStats {
                hits: self.cache.hits(),
                misses: self.cache.misses(),
                entries: self.cache.len(),
            },
            cache_file: self.cache.path().map(|p| p.display().to_string()),
            outputs: [&out.report, &out.csv]
                .iter()
                .map(|p| p.display().to_string())
                .collect(),
            exit_code,
            diagnostics,
        };
        fs::write(&out.manifest, serde_json::to_string_pretty(&manifest)? + "\n")?;
        Ok(out)
    }
}

/// Round-trip float text, independent of locale.
fn num(x: f64) -> String {
    format!("{x:?}")
}

fn strings(xs: &[&str]) -> Vec<String> {
    xs.iter().map(|s| s.to_string()).collect()
}

fn max_error(e: &Evaluation) -> f64 {
    e.entries.iter().map(|e| e.result.error_estimate).fold(0.0, f64::max)
}

fn bilinears_json(e: &Evaluation) -> Value {
    serde_json::to_value(&e.entries).unwrap_or(Value::Null)
}

pub fn cmd_chsh(path: &Path, opts: &CommandOptions) -> Result<RunOutput, CliError> {
    let loaded = config::load(path)?;
    let ctx = Context::new(&loaded, opts, "chsh")?;
    let params = loaded.config.bell()?;
    let run = run_chsh(&params, &ctx.quad, ctx.conventions).map_err(|e| CliError::Failed(e.to_string()))?;
    let converged = run.evaluation.converged();
    let r = &run.report;
    let report = json!({
        "command": "chsh",
        "name": ctx.name,
        "value": r.value,
        "formula_mode": r.formula_mode,
        "bob_dressing": r.bob_dressing,
        "bound_check": r.bound_check,
        "converged": converged,
        "partial": !converged,
        "parameters": params,
        "terms": r.terms,
        "bilinears": bilinears_json(&run.evaluation),
    });
    let header = strings(&["name", "formula_mode", "bob_dressing", "value", "bound_check", "max_error", "converged"]);
    let row = vec![
        ctx.name.clone(),
        r.formula_mode.to_string(),
        json!(r.bob_dressing).as_str().unwrap_or_default().to_string(),
        num(r.value),
        json!(r.bound_check).as_str().unwrap_or_default().to_string(),
        num(max_error(&run.evaluation)),
        converged.to_string(),
    ];
    let code = if converged { 0 } else { 3 };
    let out = ctx.write(report, &header, &[row], loaded.config.quadrature.seed, None, code, Some(r.value))?;
    if !converged {
        return Err(CliError::NonConvergence(out.report));
    }
    Ok(out)
}

pub fn cmd_mermin(path: &Path, opts: &CommandOptions) -> Result<RunOutput, CliError> {
    let loaded = config::load(path)?;
    let ctx = Context::new(&loaded, opts, "mermin")?;
    let (params, tol) = loaded.config.mermin()?;
    let factor = tol.unwrap_or(DEFAULT_PJ_TOLERANCE_FACTOR);
    let run = run_mermin(&params, &ctx.quad, ctx.conventions, factor).map_err(|e| CliError::Failed(e.to_string()))?;
    let converged = run.evaluation.as_ref().is_none_or(Evaluation::converged);
    let value = run.report.as_ref().map(|r| r.value);
    let report = json!({
        "command": "mermin",
        "name": ctx.name,
        "status": run.status,
        "value": value,
        "formula_mode": run.report.as_ref().map_or(ctx.conventions.mode, |r| r.formula_mode),
        "bob_dressing": run.report.as_ref().map_or(ctx.conventions.bob, |r| r.bob_dressing),
        "bound_check": run.report.as_ref().map(|r| r.bound_check),
        "pj_tolerance_factor": factor,
        "pj_checks": run.pj_checks,
        "converged": converged,
        "partial": !converged,
        "parameters": params,
        "terms": run.report.as_ref().map(|r| &r.terms),
        "bilinears": run.evaluation.as_ref().map(bilinears_json),
    });
    let mut header = strings(&["name", "formula_mode", "bob_dressing", "status", "value", "bound_check"]);
    header.extend(strings(&["pj_h_f", "pj_hp_f", "pj_h_fp", "pj_hp_fp", "max_error", "converged"]));
    let mut row = vec![
        ctx.name.clone(),
        report["formula_mode"].as_str().unwrap_or_default().to_string(),
        report["bob_dressing"].as_str().unwrap_or_default().to_string(),
        run.status.to_string(),
        value.map(num).unwrap_or_default(),
        report["bound_check"].as_str().unwrap_or_default().to_string(),
    ];
    for i in 0..4 {
        row.push(run.pj_checks.get(i).map(|c| num(c.value)).unwrap_or_default());
    }
    row.push(run.evaluation.as_ref().map(|e| num(max_error(e))).unwrap_or_default());
    row.push(converged.to_string());
    let code = match (run.status, converged) {
        (FilterStatus::Accepted, true) => 0,
        (FilterStatus::Accepted, false) => 3,
        _ => 4,
    };
    let out = ctx.write(report, &header, &[row], loaded.config.quadrature.seed, None, code, value)?;
    match code {
        0 => Ok(out),
        3 => Err(CliError::NonConvergence(out.report)),
        _ => Err(CliError::FilterRejected {
            status: run.status.to_string(),
            report: out.report,
        }),
    }
}

pub fn cmd_cluster(path: &Path, opts: &CommandOptions) -> Result<RunOutput, CliError> {
    let loaded = config::load(path)?;
    let ctx = Context::new(&loaded, opts, "cluster")?;
    let params = loaded.config.cluster()?;
    let run = run_cluster(&params, &ctx.quad).map_err(|e| CliError::Failed(e.to_string()))?;
    let converged = run.evaluation.converged();
    let r = &run.report;
    let report = json!({
        "command": "cluster",
        "name": ctx.name,
        "C_cluster": r.value,
        "m": r.m,
        "d": r.d,
        "connected": r.connected,
        "connected_closed_form": r.connected_closed_form,
        "bound_holds": r.value <= 0.0,
        "converged": converged,
        "partial": !converged,
        "parameters": params,
        "bilinears": bilinears_json(&run.evaluation),
    });
    let header = strings(&["C_cluster", "m", "d", "connected", "connected_closed_form", "max_error", "converged"]);
    let row = vec![
        num(r.value),
        num(r.m),
        num(r.d),
        num(r.connected),
        num(r.connected_closed_form),
        num(max_error(&run.evaluation)),
        converged.to_string(),
    ];
    let code = if converged { 0 } else { 3 };
    let out = ctx.write(report, &header, &[row], loaded.config.quadrature.seed, None, code, Some(r.value))?;
    if !converged {
        return Err(CliError::NonConvergence(out.report));
    }
    Ok(out)
}

/// Column layout of the search CSV; parameter columns depend on the target.
pub fn search_header(parameter_columns: &[&str]) -> Vec<String> {
    let mut h = strings(&["rank", "index", "status", "value", "max_error", "converged"]);
    h.extend(strings(parameter_columns));
    h
}

pub fn cmd_search(path: &Path, opts: &CommandOptions) -> Result<RunOutput, CliError> {
    let loaded = config::load(path)?;
    let mut ctx = Context::new(&loaded, opts, "search")?;
    let cfg = loaded.config.search()?;
    ctx.conventions.mode = FormulaMode::Derived;
    let outcome = random_search(&cfg, &ctx.quad).map_err(|e| CliError::Failed(e.to_string()))?;
    let columns: Vec<&str> = sample_parameters(&cfg, 0)
        .map_err(|e| CliError::Config(e.to_string()))?
        .columns()
        .into_iter()
        .map(|(k, _)| k)
        .collect();
    let header = search_header(&columns);
    let rows: Vec<Vec<String>> = outcome
        .records
        .iter()
        .enumerate()
        .map(|(rank, r)| {
            let mut row = vec![
                (rank + 1).to_string(),
                r.index.to_string(),
                r.status.to_string(),
                r.value.map(num).unwrap_or_default(),
                num(r.max_error()),
                r.converged.to_string(),
            ];
            row.extend(r.parameters.columns().into_iter().map(|(_, v)| num(v)));
            row
        })
        .collect();
    let diagnostics = serde_json::to_value(outcome.diagnostics)?;
    let report = json!({
        "command": "search",
        "name": ctx.name,
        "target": cfg.target,
        "sample_count": cfg.sample_count,
        "seed": cfg.seed,
        "top_k": cfg.top_k,
        "ranges": cfg.ranges,
        "diagnostics": diagnostics,
        "records": outcome.records,
    });
    ctx.write(report, &header, &rows, cfg.seed, Some(diagnostics), 0, outcome.records.first().and_then(|r| r.value))
}

pub fn cmd_mass_sweep(path: &Path, opts: &CommandOptions) -> Result<RunOutput, CliError> {
    let loaded = config::load(path)?;
    let ctx = Context::new(&loaded, opts, "mass_sweep")?;
    let entries = loaded.config.sweep()?;
    let points = mass_sweep(&entries, &ctx.quad, ctx.conventions).map_err(|e| CliError::Failed(e.to_string()))?;
    let converged = points.iter().all(|p| p.converged);
    let degree = loaded.config.run.fit_degree;
    let (extrapolation, fit_error) = if points.len() > 1 {
        let xy: Vec<(f64, f64)> = points.iter().map(|p| (p.m, p.value)).collect();
        match extrapolate_massless(&xy, degree) {
            Ok(e) => (Some(e), None),
            Err(e) => (None, Some(e.to_string())),
        }
    } else {
        (None, None)
    };
    let mut report = json!({
        "command": "mass_sweep",
        "name": ctx.name,
        "formula_mode": ctx.conventions.mode,
        "bob_dressing": ctx.conventions.bob,
        "points": points,
        "converged": converged,
        "partial": !converged,
    });
    if let Some(e) = &extrapolation {
        report["extrapolation"] = serde_json::to_value(e)?;
    }
    if let Some(msg) = &fit_error {
        report["extrapolation_error"] = json!(msg);
    }
    let header = strings(&["m", "inv_log_m", "C"]);
    let rows: Vec<Vec<String>> = points.iter().map(|p| vec![num(p.m), num(p.xi), num(p.value)]).collect();
    let code = if converged { 0 } else { 3 };
    let diagnostics = extrapolation.as_ref().map(|e| json!({ "extrapolation": e }));
    let out = ctx.write(
        report,
        &header,
        &rows,
        loaded.config.quadrature.seed,
        diagnostics,
        code,
        extrapolation.map(|e| e.intercept),
    )?;
    if !converged {
        return Err(CliError::NonConvergence(out.report));
    }
    Ok(out)
}
