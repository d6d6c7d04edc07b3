use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fsa_aoi_cli::commands::{analytic, compare, optimal_f, simulate, write_format, write_table};
use fsa_aoi_cli::config::{ExperimentConfig, Format, Mode, Overrides};
use fsa_aoi_cli::figures::{figure, FIGURE_IDS};
use fsa_aoi_cli::CliError;

#[derive(Parser)]
#[command(name = "fsa-aoi", version, about = "Age of information under frame slotted ALOHA in Poisson networks")]
struct Cli {
    /// Worker threads; defaults to all cores.
    #[arg(long, global = true, env = "FSA_AOI_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// TOML experiment file; flags override its values.
    #[arg(long, short = 'c')]
    config: Option<PathBuf>,
    #[command(flatten)]
    overrides: Overrides,
}

impl Common {
    fn load(&self) -> Result<ExperimentConfig, CliError> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => ExperimentConfig::default(),
        };
        cfg.apply(&self.overrides)?;
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the analytic statistics over the configured grid.
    Analytic(Common),
    /// Run the Monte Carlo simulator over the grid (`--mode both` adds analytic columns).
    Simulate(Common),
    /// Optimal frame size and the y(F) curve for bipolar networks.
    OptimalF {
        #[command(flatten)]
        common: Common,
        /// Largest frame size considered.
        #[arg(long, default_value_t = 20)]
        f_max: u32,
    },
    /// Compare slotted ALOHA at rate eta with its two frame slotted conversions.
    Compare(Common),
    /// Write the canned figure tables as CSV files.
    Figures {
        /// Figure ids, or `all`.
        #[arg(required = true)]
        ids: Vec<String>,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
        /// Add simulated columns to network figures.
        #[arg(long)]
        simulate: bool,
        #[arg(long, default_value_t = 200)]
        realizations: u32,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    match cli.command {
        Command::Analytic(c) => {
            let cfg = c.load()?;
            write_table(&analytic(&cfg)?, &cfg)
        }
        Command::Simulate(c) => {
            let mut cfg = c.load()?;
            if cfg.mode == Mode::Analytic {
                cfg.mode = Mode::Simulate;
            }
            write_table(&simulate(&cfg)?, &cfg)
        }
        Command::OptimalF { common, f_max } => {
            if f_max == 0 {
                return Err(CliError::Config("--f-max must be at least 1".into()));
            }
            let cfg = common.load()?;
            let (t, report) = optimal_f(&cfg, f_max)?;
            print!("{report}");
            match cfg.output.path {
                Some(_) => write_table(&t, &cfg),
                None => Ok(()),
            }
        }
        Command::Compare(c) => {
            let cfg = c.load()?;
            let (t, report) = compare(&cfg)?;
            print!("{report}");
            match cfg.output.path {
                Some(_) => write_table(&t, &cfg),
                None => Ok(()),
            }
        }
        Command::Figures {
            ids,
            out_dir,
            simulate,
            realizations,
            seed,
        } => {
            let ids: Vec<String> = if ids.iter().any(|i| i == "all") {
                FIGURE_IDS.iter().map(|s| s.to_string()).collect()
            } else {
                ids
            };
            let mut sim = ExperimentConfig::default();
            sim.sim.realizations = Some(realizations);
            std::fs::create_dir_all(&out_dir).map_err(|e| CliError::Io(format!("{}: {e}", out_dir.display())))?;
            for id in &ids {
                let t = figure(id, seed, simulate.then_some(&sim))?;
                let path = out_dir.join(format!("figure_{id}.csv"));
                let f = std::fs::File::create(&path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
                write_format(&t, Format::Csv, std::io::BufWriter::new(f))?;
                eprintln!("wrote {} ({} rows)", path.display(), t.rows.len());
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return ExitCode::from(if usage { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("fsa-aoi: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
