use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const BELL: &str = r#"
[bell]
a = 0.753259
eta = 0.249479
b = 0.413562
sigma = 0.0140057
a_prime = 4.97831
eta_prime = 4.43684
b_prime = 0.898361
sigma_prime = 7.15717
m = 4.14395e-6
R = 0.815919
R_prime = 0.752558
"#;

const MERMIN_BELL: &str = r#"
[bell]
a = 0.6489
eta = 0.0485
b = 0.2419
sigma = 0.0737
a_prime = 4.5423
eta_prime = 3.4910
b_prime = 4.8776
sigma_prime = 9.7773
m = 0.0339
R = 1.9304
R_prime = 2.6174
"#;

const FAST: &str = "[quadrature]\npoints_per_axis = 8\n";

struct Run {
    dir: TempDir,
}

impl Run {
    fn new() -> Self {
        Self {
            dir: tempfile::tempdir().unwrap(),
        }
    }

    fn config(&self, name: &str, text: &str) -> PathBuf {
        let p = self.dir.path().join(name);
        fs::write(&p, text).unwrap();
        p
    }

    fn out(&self) -> PathBuf {
        self.dir.path().join("out")
    }

    fn exec(&self, args: &[&str], config: &Path, threads: Option<usize>) -> Output {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_diamond-bell"));
        cmd.args(args).arg(config).arg("--output-dir").arg(self.out());
        cmd.env_remove("DIAMOND_BELL_THREADS");
        if let Some(n) = threads {
            cmd.env("DIAMOND_BELL_THREADS", n.to_string());
        }
        cmd.output().unwrap()
    }

    fn report(&self, name: &str) -> Value {
        serde_json::from_str(&fs::read_to_string(self.out().join(format!("{name}.report.json"))).unwrap()).unwrap()
    }

    fn csv(&self, name: &str) -> String {
        fs::read_to_string(self.out().join(format!("{name}.csv"))).unwrap()
    }

    fn manifest(&self, name: &str) -> Value {
        serde_json::from_str(&fs::read_to_string(self.out().join(format!("{name}.manifest"))).unwrap()).unwrap()
    }
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap_or(-1)
}

fn zeroed(text: &str, keys: &[&str]) -> String {
    text.lines()
        .map(|l| match l.split_once(" = ") {
            Some((k, _)) if keys.contains(&k) => format!("{k} = 0.0"),
            _ => l.to_string(),
        })
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn zero_amplitude_chsh_is_two() {
    let run = Run::new();
    let text = zeroed(BELL, &["eta", "sigma", "eta_prime", "sigma_prime"]);
    let cfg = run.config("zero.toml", &format!("[run]\nname = \"zero\"\n{FAST}{text}"));
    for printed in [false, true] {
        let args: &[&str] = if printed { &["chsh", "--printed"] } else { &["chsh"] };
        let o = run.exec(args, &cfg, None);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        assert_eq!(run.report("zero")["value"].as_f64(), Some(2.0));
    }
    let csv = run.csv("zero");
    assert!(csv.starts_with("name,formula_mode,bob_dressing,value,bound_check,max_error,converged\n"));
    assert!(csv.contains(",2.0,"));
}

#[test]
fn missing_mass_is_a_config_error() {
    let run = Run::new();
    let text: String = BELL.lines().filter(|l| !l.starts_with("m =")).collect::<Vec<_>>().join("\n");
    let cfg = run.config("nomass.toml", &text);
    let o = run.exec(&["chsh"], &cfg, None);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("config error"));
    assert!(!run.out().exists());
}

#[test]
fn unknown_key_is_a_config_error() {
    let run = Run::new();
    let cfg = run.config("typo.toml", &format!("{BELL}\nsharpness = 1.0\n"));
    assert_eq!(code(&run.exec(&["chsh"], &cfg, None)), 2);
}

#[test]
fn zero_amplitude_mermin_is_minus_two() {
    let run = Run::new();
    let bell = zeroed(MERMIN_BELL, &["eta", "sigma", "eta_prime", "sigma_prime"]);
    let mermin = "[mermin]\np = 0.2551\np_prime = 0.2830\nzeta = 0.0\nzeta_prime = 0.0\n";
    let cfg = run.config("m.toml", &format!("[run]\nname = \"m\"\n{FAST}{bell}\n{mermin}"));
    let o = run.exec(&["mermin"], &cfg, None);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = run.report("m");
    assert_eq!(r["value"].as_f64(), Some(-2.0));
    assert_eq!(r["status"], "accepted");
    assert_eq!(r["pj_checks"].as_array().unwrap().len(), 4);
}

#[test]
fn overlapping_mermin_diamonds_exit_four() {
    let run = Run::new();
    let mermin = "[mermin]\np = 0.2551\np_prime = 0.2830\nzeta = 0.0987\nzeta_prime = 0.0135\nd = 0.0\nd_prime = 0.0\n";
    let cfg = run.config("bad.toml", &format!("[run]\nname = \"bad\"\n{FAST}{MERMIN_BELL}\n{mermin}"));
    let o = run.exec(&["mermin"], &cfg, None);
    assert_eq!(code(&o), 4, "{}", String::from_utf8_lossy(&o.stderr));
    let r = run.report("bad");
    assert_eq!(r["status"], "rejected_geometry");
    assert!(r["value"].is_null());
    assert_eq!(run.manifest("bad")["exit_code"], 4);
}

#[test]
fn cluster_gap_from_h_center() {
    let run = Run::new();
    let body = "a = 0.300835\neta = 0.242515\np = 0.499921\nzeta = 0.677292\nR = 1.83324\nm = 0.145679\n";
    let by_gap = run.config("gap.toml", &format!("[run]\nname = \"gap\"\n{FAST}[cluster]\n{body}d = 1.5\n"));
    // h centered at d + 3R
    let center = 1.5 + 3.0 * 1.83324;
    let by_center =
        run.config("ctr.toml", &format!("[run]\nname = \"ctr\"\n{FAST}[cluster]\n{body}h_center = {center:?}\n"));
    assert_eq!(code(&run.exec(&["cluster"], &by_gap, None)), 0);
    assert_eq!(code(&run.exec(&["cluster"], &by_center, None)), 0);
    let (a, b) = (run.report("gap"), run.report("ctr"));
    assert!((b["d"].as_f64().unwrap() - 1.5).abs() < 1e-12);
    assert!((a["C_cluster"].as_f64().unwrap() - b["C_cluster"].as_f64().unwrap()).abs() < 1e-10);
}

#[test]
fn cluster_without_h_reduces_to_mass_gap_term() {
    let run = Run::new();
    let cfg = run.config(
        "c.toml",
        &format!("[run]\nname = \"c\"\n{FAST}[cluster]\na = 0.3\neta = 0.24\np = 0.5\nzeta = 0.0\nR = 1.8\nm = 0.15\nd = 3.0\n"),
    );
    assert_eq!(code(&run.exec(&["cluster"], &cfg, None)), 0);
    let v = run.report("c")["C_cluster"].as_f64().unwrap();
    assert!((v + 0.25 * (-0.15f64 * 3.0).exp()).abs() < 1e-15, "{v}");
}

#[test]
fn search_csv_is_identical_across_thread_counts() {
    let run = Run::new();
    let cfg = run.config(
        "s.toml",
        &format!("[run]\nname = \"s\"\n{FAST}[search]\ntarget = \"chsh\"\nsample_count = 24\nseed = 7\ntop_k = 0\n"),
    );
    assert_eq!(code(&run.exec(&["search"], &cfg, Some(1))), 0);
    let one = run.csv("s");
    assert_eq!(run.manifest("s")["threads"], 1);
    assert_eq!(code(&run.exec(&["search"], &cfg, Some(4))), 0);
    assert_eq!(run.manifest("s")["threads"], 4);
    assert_eq!(one, run.csv("s"));
    assert_eq!(one.lines().count(), 25);
    let header = one.lines().next().unwrap();
    assert!(header.starts_with("rank,index,status,value,max_error,converged,a,eta,"));
}

#[test]
fn all_rejecting_mermin_search_writes_an_empty_csv() {
    let run = Run::new();
    // h′ sits on top of f′ whenever R′ > R.
    let text = format!(
        "[run]\nname = \"rej\"\n{FAST}[search]\ntarget = \"mermin3\"\nsample_count = 10\nseed = 3\n\
         [search.ranges]\nR = [0.5, 0.6]\nR_prime = [2.0, 3.0]\nd = [0.0, 0.1]\nd_prime = [0.0, 0.1]\n"
    );
    let cfg = run.config("rej.toml", &text);
    let o = run.exec(&["search"], &cfg, None);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(run.csv("rej").lines().count(), 1);
    let d = &run.manifest("rej")["diagnostics"];
    assert_eq!(d["accepted"], 0);
    assert_eq!(d["rejected_geometry"], 10);
}

#[test]
fn single_mass_sweep_has_no_extrapolation() {
    let run = Run::new();
    let entry = BELL.replace("[bell]", "[[sweep]]");
    let cfg = run.config("one.toml", &format!("[run]\nname = \"one\"\n{FAST}{entry}"));
    let o = run.exec(&["mass-sweep"], &cfg, None);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = run.report("one");
    assert!(r.get("extrapolation").is_none());
    assert!(r.get("extrapolation_error").is_none());
    assert_eq!(run.csv("one").lines().next(), Some("m,inv_log_m,C"));
    assert_eq!(run.csv("one").lines().count(), 2);
}

#[test]
fn rerun_from_manifest_is_bit_identical() {
    let run = Run::new();
    let cfg = run.config("r.toml", &format!("[run]\nname = \"r\"\n{FAST}{BELL}"));
    assert_eq!(code(&run.exec(&["chsh"], &cfg, None)), 0);
    let (csv, manifest) = (run.csv("r"), run.manifest("r"));
    let again = run.config("again.toml", manifest["config"].as_str().unwrap());
    assert_eq!(code(&run.exec(&["chsh"], &again, None)), 0);
    assert_eq!(csv, run.csv("r"));
    assert_eq!(manifest["config_hash"], run.manifest("r")["config_hash"]);
    let value: f64 = csv.lines().nth(1).unwrap().split(',').nth(3).unwrap().parse().unwrap();
    assert_eq!(Some(value), run.report("r")["value"].as_f64());
}

#[test]
fn verify_passes_on_defaults() {
    let o = Command::new(env!("CARGO_BIN_EXE_diamond-bell")).arg("verify").output().unwrap();
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert_eq!(code(&o), 0, "{stdout}");
    assert_eq!(stdout.lines().filter(|l| l.starts_with("PASS")).count(), 6);
}

#[test]
fn verify_surfaces_a_zero_clamp() {
    let run = Run::new();
    let cfg = run.config("clamp.toml", "[quadrature]\nlightcone_clamp = 0.0\n");
    let o = Command::new(env!("CARGO_BIN_EXE_diamond-bell")).arg("verify").arg(&cfg).output().unwrap();
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stdout).starts_with("FAIL quadrature settings"));
}

#[test]
fn verify_ignores_a_corrupt_cache() {
    let run = Run::new();
    let cache = run.config("cache.bin", "not a cache \u{0}\u{1}garbage");
    let cfg = run.config("v.toml", &format!("[run]\ncache_file = {:?}\n", cache.display().to_string()));
    let o = Command::new(env!("CARGO_BIN_EXE_diamond-bell"))
        .arg("verify")
        .arg(&cfg)
        .env("RUST_LOG", "warn")
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    assert!(String::from_utf8_lossy(&o.stderr).contains("corrupt"));
}
