use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use ineqprep::arithmetic::PredicateMode;
use ineqprep::experiment::{batch_sweep, run, ExperimentConfig, Mode, SweepGrid};
use ineqprep::prep::{AaRounds, Backend};
use ineqprep::PrepError;

const EXIT_CONFIG: u8 = 1;
const EXIT_RUNTIME: u8 = 2;

/// Simulate black-box state preparation by inequality test and write a JSON
/// report (or a CSV table for sweeps).
///
/// The dense qubit budget defaults to 26 and can be changed with the
/// INEQPREP_MAX_QUBITS environment variable.
#[derive(Debug, Parser)]
#[command(name = "ineqprep", version)]
struct Cli {
    /// inverse | division | general | uniform | estimate
    #[arg(long)]
    mode: Mode,

    /// CSV (one integer per line, optional β column) or JSON data file
    #[arg(long)]
    data: Option<PathBuf>,

    /// Inline data values instead of a file, e.g. 3,5
    #[arg(long, value_delimiter = ',')]
    alphas: Option<Vec<u64>>,

    /// Division numerators, e.g. 1,3
    #[arg(long, value_delimiter = ',')]
    betas: Option<Vec<u64>>,

    /// Constant C for the reciprocal scheme (default 1)
    #[arg(long = "const-c")]
    const_c: Option<u64>,

    /// Superposition grid width
    #[arg(long)]
    m: Option<usize>,

    /// Data width in bits (default: fitted to the data)
    #[arg(long)]
    n: Option<usize>,

    /// Dimension for uniform mode (default: data length)
    #[arg(long)]
    d: Option<usize>,

    /// Builtin function for general mode: inv_sqrt_1p, reciprocal, linear
    #[arg(long = "f-name")]
    f_name: Option<String>,

    /// Forward table file (label,value) for general mode
    #[arg(long = "g-table")]
    g_table: Option<PathBuf>,

    /// Backward table file (label,value) for general mode
    #[arg(long = "hinv-table")]
    hinv_table: Option<PathBuf>,

    /// less_than | product_less_than_one, for custom tables
    #[arg(long, value_parser = parse_predicate)]
    predicate: Option<PredicateMode>,

    /// Target precision for estimate mode
    #[arg(long)]
    epsilon: Option<f64>,

    /// Amplification rounds: auto or a count
    #[arg(long, default_value = "auto")]
    aa: AaRounds,

    /// dense | block
    #[arg(long, default_value = "dense")]
    backend: Backend,

    /// Seed for measurement sampling
    #[arg(long)]
    seed: Option<u64>,

    /// Number of index-register samples to draw from the final state
    #[arg(long)]
    shots: Option<usize>,

    /// Sweep axis, `name=lo..hi` or `name=v1,v2`; repeatable
    #[arg(long)]
    sweep: Vec<String>,

    /// Output file (default: stdout)
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_predicate(s: &str) -> Result<PredicateMode, String> {
    match s {
        "less_than" => Ok(PredicateMode::LessThan),
        "product_less_than_one" | "product" => Ok(PredicateMode::ProductLessThanOne),
        other => Err(format!("unknown predicate `{other}`")),
    }
}

impl Cli {
    fn config(&self) -> ExperimentConfig {
        let mut cfg = ExperimentConfig::new(self.mode);
        cfg.data_path = self.data.clone();
        cfg.alphas = self.alphas.clone();
        cfg.betas = self.betas.clone();
        cfg.c = self.const_c;
        cfg.m = self.m;
        cfg.n = self.n;
        cfg.d = self.d;
        cfg.f_name = self.f_name.clone();
        cfg.g_table = self.g_table.clone();
        cfg.hinv_table = self.hinv_table.clone();
        cfg.predicate = self.predicate;
        cfg.epsilon = self.epsilon;
        cfg.aa = self.aa;
        cfg.backend = self.backend;
        cfg.seed = self.seed;
        cfg.shots = self.shots;
        cfg.output_path = self.out.clone();
        cfg
    }
}

fn execute(cli: &Cli) -> Result<(), PrepError> {
    let cfg = cli.config();
    let text = if cli.sweep.is_empty() {
        run(&cfg)?.to_json()?
    } else {
        let mut grid = SweepGrid::new();
        for axis in &cli.sweep {
            grid.parse_axis(axis)?;
        }
        batch_sweep(&cfg, &grid)?
    };
    match &cli.out {
        Some(path) => fs::write(path, text).map_err(|e| PrepError::Io(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_CONFIG,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config_error() { EXIT_CONFIG } else { EXIT_RUNTIME })
        }
    }
}
