use diamond_bell::correlators::{Dressing, FormulaMode};
use diamond_bell::quad::QuadSettings;
use diamond_bell::specfun::Crossovers;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct CacheStats {
    pub hits: u64,
    pub misses: u64,
    pub entries: usize,
}

/// Written once per run next to the outputs.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub tool_version: &'static str,
    pub command: String,
    pub run_name: String,
    pub config_path: String,
    /// SHA-256 of the config text.
    pub config_hash: String,
    pub config: String,
    pub seed: u64,
    pub quadrature: QuadSettings,
    pub formula_mode: FormulaMode,
    pub bob_dressing: Dressing,
    pub threads: usize,
    pub started_unix: u64,
    pub wall_clock_seconds: f64,
    pub specfun_crossovers: Crossovers,
    pub cache: CacheStats,
    pub cache_file: Option<String>,
    pub outputs: Vec<String>,
    pub exit_code: i32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagnostics: Option<serde_json::Value>,
}
