use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use squidchain::scenario::{self, ScenarioConfig};
use squidchain::Error;

#[derive(Parser)]
#[command(name = "squidchain", version, about = "SQUID chain in a phonon bath: rates, dynamics, entanglement")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Integrate one scenario and write trajectory.csv and report.txt.
    Run {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a scenario once per value of one config key.
    Sweep {
        #[command(flatten)]
        source: Source,
        /// Config key to vary, e.g. splitting_GHz or bath.temperature_GHz.
        #[arg(long)]
        axis: String,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
        values: Vec<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print energies, rate tables and the transition network.
    Rates {
        #[command(flatten)]
        source: Source,
        /// Also write rates.txt here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print a preset as scenario-file text.
    Preset { name: String },
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct Source {
    /// One of fig1..fig8.
    #[arg(long)]
    preset: Option<String>,
    /// Scenario file with [chain], [bath] and [run] sections.
    #[arg(long)]
    config: Option<PathBuf>,
}

impl Source {
    fn load(&self) -> Result<ScenarioConfig, Error> {
        match (&self.preset, &self.config) {
            (Some(p), _) => scenario::preset(p),
            (None, Some(path)) => {
                let text = fs::read_to_string(path)?;
                let (cfg, warnings) = scenario::parse_config_verbose(&text)?;
                for w in warnings {
                    eprintln!("warning: {w}");
                }
                Ok(cfg)
            }
            (None, None) => unreachable!("clap enforces one source"),
        }
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.cmd {
        Cmd::Run { source, out } => {
            let cfg = source.load()?;
            let report = scenario::run_scenario(&cfg, &out)?;
            println!("{}", fs::read_to_string(&report.report_path)?);
            println!("wrote {}", report.csv_path.display());
        }
        Cmd::Sweep {
            source,
            axis,
            values,
            out,
        } => {
            let cfg = source.load()?;
            let points = scenario::sweep(&cfg, &axis, &values, &out)?;
            let mut first_err = None;
            for p in points {
                match p.outcome {
                    Ok(r) => println!(
                        "{axis} = {}: components {}, final populations {:?} -> {}",
                        p.value,
                        r.network.describe(),
                        r.final_populations,
                        p.dir.display()
                    ),
                    Err(e) => {
                        eprintln!("{axis} = {}: {e}", p.value);
                        first_err.get_or_insert(e);
                    }
                }
            }
            if let Some(e) = first_err {
                return Err(e);
            }
        }
        Cmd::Rates { source, out } => {
            let cfg = source.load()?;
            let text = scenario::analyze(&cfg)?.rates_text();
            print!("{text}");
            if let Some(dir) = out {
                write_into(&dir, "rates.txt", &text)?;
            }
        }
        Cmd::Preset { name } => print!("{}", scenario::preset_text(&name)?),
    }
    Ok(())
}

fn write_into(dir: &Path, name: &str, text: &str) -> Result<(), Error> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(name), text)?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // help and version are not usage errors
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_physics_validity() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
