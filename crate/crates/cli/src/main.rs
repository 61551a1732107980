use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use diamond_bell_cli::{
    cmd_chsh, cmd_cluster, cmd_mass_sweep, cmd_mermin, cmd_search, cmd_verify, CliError, CommandOptions, RunOutput,
    THREADS_ENV,
};

#[derive(Parser)]
#[command(name = "diamond-bell", version, about = "Bell-CHSH, Mermin-3 and cluster correlators for diamond test functions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// TOML config file.
    config: PathBuf,
    /// Use the literal closed forms instead of the reducer.
    #[arg(long)]
    printed: bool,
    /// Overrides `[run] output_dir`.
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Overrides `[run] name`.
    #[arg(long)]
    name: Option<String>,
}

impl RunArgs {
    fn options(&self) -> CommandOptions {
        CommandOptions {
            printed: self.printed,
            output_dir: self.output_dir.clone(),
            name: self.name.clone(),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// CHSH correlator for the `[bell]` parameters.
    Chsh(RunArgs),
    /// Mermin-3 correlator for `[bell]` + `[mermin]`, with the causality filter.
    Mermin(RunArgs),
    /// Cluster check for `[cluster]`.
    Cluster(RunArgs),
    /// Random search over `[search]`.
    Search(RunArgs),
    /// CHSH over the `[[sweep]]` entries and the massless extrapolation.
    MassSweep(RunArgs),
    /// Invariant suite; uses the `[quadrature]` and cache settings of CONFIG if given.
    Verify { config: Option<PathBuf> },
}

fn report(result: Result<RunOutput, CliError>) -> ExitCode {
    match result {
        Ok(out) => {
            let mut text = out.value.map(|v| format!("{v}\n")).unwrap_or_default();
            text += &format!(
                "report: {}\ncsv: {}\nmanifest: {}\n",
                out.report.display(),
                out.csv.display(),
                out.manifest.display()
            );
            // A closed pipe downstream is not a failure of the run.
            let _ = std::io::stdout().write_all(text.as_bytes());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        match v.parse::<usize>() {
            Ok(n) if n > 0 => {
                if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                    eprintln!("error: {e}");
                    return ExitCode::from(1);
                }
            }
            _ => {
                eprintln!("error: {THREADS_ENV} must be a positive integer, got {v:?}");
                return ExitCode::from(2);
            }
        }
    }
    let cli = Cli::parse();
    match cli.command {
        Command::Chsh(a) => report(cmd_chsh(&a.config, &a.options())),
        Command::Mermin(a) => report(cmd_mermin(&a.config, &a.options())),
        Command::Cluster(a) => report(cmd_cluster(&a.config, &a.options())),
        Command::Search(a) => report(cmd_search(&a.config, &a.options())),
        Command::MassSweep(a) => report(cmd_mass_sweep(&a.config, &a.options())),
        Command::Verify { config } => {
            let mut stdout = std::io::stdout();
            match cmd_verify(config.as_deref(), &mut stdout) {
                Ok(_) => ExitCode::SUCCESS,
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(e.exit_code() as u8)
                }
            }
        }
    }
}
