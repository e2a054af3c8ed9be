use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gfid::config::ConfigError;
use gfid::output::{emit_csv, summarize, write_csv};
use gfid::{plot, presets, run_scenario, RunOptions, ScenarioConfig};

const EXIT_CONFIG: u8 = 2;
const EXIT_IO: u8 = 3;

#[derive(Parser)]
#[command(name = "gfid", version, about = "Blind graph-filter identification experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Source {
    /// Scenario JSON file.
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    config: Option<PathBuf>,
    /// Bundled scenario name (fig1a, fig1b, fig1c, fig2a, fig2b, fig3a, fig3b).
    #[arg(long)]
    preset: Option<String>,
}

impl Source {
    fn load(&self) -> Result<ScenarioConfig, ConfigError> {
        match (&self.config, &self.preset) {
            (Some(path), _) => ScenarioConfig::from_file(path),
            (None, Some(name)) => presets::preset(name),
            (None, None) => unreachable!("clap requires one source"),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write one CSV row per trial.
    Run {
        #[command(flatten)]
        source: Source,
        /// Output CSV; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the master seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override trials per cell.
        #[arg(long)]
        trials: Option<usize>,
        /// Also write SVG charts next to the CSV.
        #[arg(long, requires = "out")]
        plot: bool,
        /// Use the full trial counts instead of the desk-scale defaults.
        #[arg(long)]
        full_scale: bool,
        /// Run trials on one thread.
        #[arg(long)]
        serial: bool,
    },
    /// Validate a scenario without running it.
    Check {
        #[command(flatten)]
        source: Source,
    },
    /// Print a bundled scenario as JSON.
    Preset { name: String },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Check { source } => match source.load() {
            Ok(cfg) => {
                println!("{}: ok ({} cells, {} trials each)", cfg.scenario, cfg.n_cells(), cfg.trials);
                ExitCode::SUCCESS
            }
            Err(e) => config_failure(e),
        },
        Command::Preset { name } => match presets::preset_json(&name) {
            Some(json) => {
                print!("{json}");
                ExitCode::SUCCESS
            }
            None => config_failure(presets::preset(&name).unwrap_err()),
        },
        Command::Run { source, out, seed, trials, plot, full_scale, serial } => {
            let cfg = match source.load() {
                Ok(cfg) => cfg,
                Err(e) => return config_failure(e),
            };
            if trials == Some(0) {
                eprintln!("error: --trials must be at least 1");
                return ExitCode::from(EXIT_CONFIG);
            }
            let rows = run_scenario(&cfg, &RunOptions { trials, seed, full_scale, serial });
            let written = match &out {
                Some(path) => emit_csv(&cfg.scenario, &rows, path),
                None => write_csv(&cfg.scenario, &rows, std::io::stdout().lock()),
            };
            if let Err(e) = written {
                eprintln!("error: writing results: {e}");
                return ExitCode::from(EXIT_IO);
            }
            for c in summarize(&rows) {
                let k = c.k.map(|k| format!(" k={k}")).unwrap_or_default();
                eprintln!(
                    "{}{k} sigma={}: success {:.3}, median error {:.3e}, failed {}",
                    c.setting, c.sigma, c.success_rate, c.median_error, c.failed
                );
            }
            if plot {
                let path = out.expect("clap enforces --out with --plot");
                match plot::plot_rows(&cfg.scenario, &rows, &path) {
                    Ok(paths) => paths.iter().for_each(|p| eprintln!("wrote {}", p.display())),
                    Err(e) => {
                        eprintln!("error: plotting: {e}");
                        return ExitCode::from(EXIT_IO);
                    }
                }
            }
            ExitCode::SUCCESS
        }
    }
}

fn config_failure(e: ConfigError) -> ExitCode {
    eprintln!("error: {e}");
    match e {
        ConfigError::Io(..) => ExitCode::from(EXIT_IO),
        ConfigError::Invalid { .. } => ExitCode::from(EXIT_CONFIG),
    }
}
