use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use curation_cli::commands::{self, SweepConfig};
use curation_cli::config::Mode;
use curation_cli::{CliError, CliResult, RunConfig};

#[derive(Parser)]
#[command(name = "curation", version, about = "Two-agent Bradley-Terry curation simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Exact,
    Particle,
}

#[derive(Subcommand)]
enum Command {
    /// Run a preset scenario or a config file.
    Run {
        /// Preset name; omit when --config is given.
        scenario: Option<String>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        iterations: Option<usize>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Run theorem checks: `all` or ids such as T1 C1 T6.
    Check {
        ids: Vec<String>,
        /// Run scenario-dependent checks on this config instead of the defaults.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Utility matrix over a misreport grid.
    Sweep {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        iterations: Option<usize>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Write every run the figure renderer reads.
    ExportFigures {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

fn load_run_config(scenario: Option<String>, config: Option<PathBuf>) -> CliResult<RunConfig> {
    match (scenario, config) {
        (_, Some(path)) => RunConfig::load(&path),
        (Some(name), None) => RunConfig::preset(&name),
        (None, None) => Err(CliError::Usage("give a scenario name or --config".into())),
    }
}

fn dispatch(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Run { scenario, config, mode, seed, iterations, out } => {
            let mut cfg = load_run_config(scenario, config)?;
            if let Some(m) = mode {
                cfg.mode = match m {
                    ModeArg::Exact => Mode::Exact,
                    ModeArg::Particle => Mode::Particle,
                };
            }
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(t) = iterations {
                cfg.set_iterations(t);
            }
            let manifest = commands::cmd_run(&cfg, &out)?;
            println!("wrote {} file(s) to {} in {:.2}s", manifest.files.len(), out.display(), manifest.duration_secs);
            Ok(())
        }
        Command::Check { ids, config, out } => {
            let ids = commands::parse_ids(&ids)?;
            let cfg = config.map(|p| RunConfig::load(&p)).transpose()?;
            let verdicts = commands::cmd_check(&ids, cfg.as_ref(), &out)?;
            print!("{}", commands::verdict_summary(&verdicts));
            match verdicts.iter().filter(|v| !v.passed).count() {
                0 => Ok(()),
                n => Err(CliError::ChecksFailed(n)),
            }
        }
        Command::Sweep { config, iterations, out } => {
            let mut cfg = match config {
                Some(p) => {
                    let text = std::fs::read_to_string(&p).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
                    SweepConfig::parse(&text)?
                }
                None => SweepConfig::default(),
            };
            if let Some(t) = iterations {
                cfg.iterations = t;
            }
            let all = commands::cmd_sweep(&cfg, &out)?;
            for (name, m) in &all {
                let (ro, rp) = m.regrets();
                println!("{name}: owner max regret {ro:.3e}, public max regret {rp:.3e}");
            }
            Ok(())
        }
        Command::ExportFigures { seed, out } => {
            let runs = commands::cmd_export_figures(seed, &out)?;
            println!("exported {} under {}", runs.join(", "), out.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
