use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use equiboot_cli::error::HarnessError;
use equiboot_cli::simulate::replication_seed;
use equiboot_cli::{report, run_dataset_pipeline, run_simulation, ExperimentConfig};
use equiboot_core::data::{load_csv, ColumnRoles};
use equiboot_core::rng::StreamRng;
use equiboot_core::simgen::generate_with;
use rand::SeedableRng;

#[derive(Parser)]
#[command(name = "equiboot", version, about = "Equity-directed bootstrapping experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the odds-ratio simulation study and write table4.csv / table4.txt.
    Simulate {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Scenario name (repeatable); overrides the config list.
        #[arg(long)]
        scenario: Vec<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        replications: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare blind and equity training on a CSV dataset.
    Pipeline {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write one simulated dataset as CSV.
    Gen {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "discrete-a3")]
        scenario: String,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn load_config(path: Option<&PathBuf>) -> Result<ExperimentConfig, HarnessError> {
    match path {
        Some(p) => ExperimentConfig::from_file(p),
        None => Ok(ExperimentConfig::default()),
    }
}

fn configure_threads() -> Result<(), HarnessError> {
    if let Ok(v) = std::env::var("EQUIBOOT_THREADS") {
        let n: usize = v
            .parse()
            .map_err(|_| HarnessError::Config(format!("EQUIBOOT_THREADS={v:?} is not a count")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| HarnessError::Config(e.to_string()))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), HarnessError> {
    configure_threads()?;
    match cli.command {
        Command::Simulate {
            config,
            scenario,
            seed,
            replications,
            out,
        } => {
            let mut cfg = load_config(config.as_ref())?;
            if !scenario.is_empty() {
                cfg.scenarios = scenario;
            }
            if let Some(s) = seed {
                cfg.master_seed = s;
            }
            if let Some(r) = replications {
                cfg.replications = r;
            }
            let dir = out.unwrap_or_else(|| cfg.output_dir.clone());
            let table = run_simulation(&cfg)?;
            print!("{}", report::table4_text(&table));
            for p in report::write_table4(&table, &dir)? {
                eprintln!("wrote {}", p.display());
            }
        }
        Command::Pipeline {
            data,
            config,
            seed,
            out,
        } => {
            let mut cfg = load_config(config.as_ref())?;
            if let Some(s) = seed {
                cfg.master_seed = s;
            }
            let roles = ColumnRoles {
                group: cfg.dataset.group_column.clone(),
                label: cfg.dataset.label_column.clone(),
            };
            let dataset = load_csv(&data, &roles)?;
            let dir = out.unwrap_or_else(|| cfg.output_dir.clone());
            let result = run_dataset_pipeline(&cfg, &dataset)?;
            print!("{}", report::pipeline_text(&result));
            for p in report::write_pipeline(&result, &dir)? {
                eprintln!("wrote {}", p.display());
            }
        }
        Command::Gen {
            config,
            scenario,
            seed,
            out,
        } => {
            let mut cfg = load_config(config.as_ref())?;
            if let Some(s) = seed {
                cfg.master_seed = s;
            }
            cfg.scenarios = vec![scenario];
            let (idx, sc) = cfg.scenario_list()?[0];
            let seed = replication_seed(cfg.master_seed, idx, 0);
            let mut rng = StreamRng::seed_from_u64(seed);
            let sim = generate_with(&sc.config(cfg.sim.n, cfg.sim.p, seed), &mut rng)?;
            if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
                report::ensure_dir(parent)?;
            }
            let file = std::fs::File::create(&out).map_err(|source| HarnessError::Io {
                path: out.display().to_string(),
                source,
            })?;
            sim.data.write_csv(std::io::BufWriter::new(file))?;
            eprintln!("wrote {} ({} rows)", out.display(), sim.data.n());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
