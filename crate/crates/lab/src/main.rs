use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nudlab::{parse_config, run_to_dir, Experiment, LabError, LabResult};

const OUT_ENV: &str = "NUDLAB_OUT_DIR";
const DEFAULT_OUT: &str = "nudlab-out";

#[derive(Parser)]
#[command(name = "nudlab", version, about = "Run and record the nudlab numerical experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write its report.
    Run {
        experiment: String,
        /// File of `key = value` lines.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Override one key; may be repeated.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        /// Output directory [default: $NUDLAB_OUT_DIR, else ./nudlab-out].
        #[arg(long)]
        out: Option<PathBuf>,
        /// Reduced sweeps.
        #[arg(long)]
        quick: bool,
    },
    /// List the experiments and the claim each one checks.
    List,
}

fn run(experiment: &str, config: Option<PathBuf>, set: &[String], out: Option<PathBuf>, quick: bool) -> LabResult<bool> {
    let text = match &config {
        Some(path) => Some(std::fs::read_to_string(path)
            .map_err(|e| LabError::Config(format!("cannot read {}: {e}", path.display())))?),
        None => None,
    };
    let cfg = parse_config(Some(experiment), text.as_deref(), set, quick)?;
    let dir = out
        .or_else(|| cfg.out.clone())
        .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    let (report, written) = run_to_dir(&cfg, &dir)?;
    for check in &report.checks {
        let status = if check.pass { "PASS" } else { "FAIL" };
        println!("{status} {}: {}", check.rule, check.detail);
    }
    if report.quick {
        println!("(quick mode)");
    }
    println!("report: {} and {}", written.json.display(), written.csv.display());
    for path in &written.snapshots {
        println!("snapshot: {}", path.display());
    }
    Ok(report.passed())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::List => {
            for e in Experiment::ALL {
                println!("{:<18} {}", e.name(), e.claim());
            }
            ExitCode::SUCCESS
        }
        Command::Run { experiment, config, set, out, quick } => match run(&experiment, config, &set, out, quick) {
            Ok(true) => ExitCode::SUCCESS,
            Ok(false) => ExitCode::from(1),
            Err(e) => {
                eprintln!("nudlab: {e}");
                ExitCode::from(e.exit_code() as u8)
            }
        },
    }
}
