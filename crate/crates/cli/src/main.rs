use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use tcnot::experiment::{to_csv, to_json, ExperimentResult, SweepConfig};
use tcnot::*;

type CliResult<T> = std::result::Result<T, Box<dyn std::error::Error>>;

#[derive(Parser)]
#[command(name = "tcnot", version, about = "Transversal-CNOT logical error rate experiments")]
struct Cli {
    /// Worker threads for shot sampling (default: all cores).
    #[arg(long, global = true, env = "TCNOT_WORKERS")]
    workers: Option<usize>,

    /// Log progress to stderr (RUST_LOG overrides).
    #[arg(short, long, global = true)]
    verbose: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Idle patch for `--n-r` rounds (default d).
    Memory(GridArgs),
    /// Two patches with alternating transversal CNOTs.
    CnotChain {
        #[command(flatten)]
        grid: GridArgs,
        /// Number of CNOTs.
        #[arg(long, default_value_t = 1)]
        cnots: usize,
        /// Also run the memory-equivalent baseline of every point.
        #[arg(long)]
        baseline: bool,
    },
    /// The 8-patch CNOT block of a |Y> distillation factory.
    YFactory {
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long)]
        baseline: bool,
    },
    /// Run a grid described in a TOML file.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Print the noisy circuit of one experiment point.
    Circuit(PointArgs),
    /// Print the per-patch matching graph of one experiment point.
    Graph(PointArgs),
}

#[derive(Args)]
struct CodeArgs {
    #[arg(long, default_value = "rotated_surface")]
    family: CodeFamily,
    #[arg(long, default_value = "sd6")]
    noise: NoiseModel,
    /// Preparation and readout basis.
    #[arg(long, default_value = "Z")]
    basis: Basis,
}

#[derive(Args)]
struct GridArgs {
    #[command(flatten)]
    code: CodeArgs,
    /// Code distances (comma separated).
    #[arg(long, value_delimiter = ',', default_value = "3")]
    d: Vec<usize>,
    /// Physical error rates (comma separated).
    #[arg(long, value_delimiter = ',', default_value = "0.001")]
    p: Vec<f64>,
    /// Rounds between CNOT layers, or total rounds for memory.
    #[arg(long = "n-r", value_delimiter = ',')]
    n_r: Vec<usize>,
    #[arg(long, default_value_t = 10_000)]
    shots: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Maximum decoder sweeps (default: number of CNOTs + 1).
    #[arg(long = "l-max")]
    l_max: Option<usize>,
    #[arg(long, default_value = "either")]
    termination: Termination,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct OutputArgs {
    /// Output file (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Args)]
struct PointArgs {
    #[arg(long, value_enum, default_value_t = Kind::CnotChain)]
    experiment: Kind,
    #[command(flatten)]
    code: CodeArgs,
    #[arg(long, default_value_t = 3)]
    d: usize,
    #[arg(long, default_value_t = 0.001)]
    p: f64,
    #[arg(long = "n-r")]
    n_r: Option<usize>,
    #[arg(long, default_value_t = 1)]
    cnots: usize,
    #[arg(long)]
    baseline: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Memory,
    CnotChain,
    YFactory,
}

impl From<Kind> for ExperimentKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Memory => ExperimentKind::Memory,
            Kind::CnotChain => ExperimentKind::CnotChain,
            Kind::YFactory => ExperimentKind::YFactory,
        }
    }
}

fn grid(kind: ExperimentKind, g: &GridArgs, cnots: usize, baseline: bool) -> SweepConfig {
    SweepConfig {
        base: ExperimentConfig {
            experiment: kind,
            family: g.code.family,
            noise: g.code.noise,
            basis: g.code.basis,
            num_cnots: cnots,
            shots: g.shots,
            seed: g.seed,
            l_max: g.l_max,
            termination: g.termination,
            ..Default::default()
        },
        distances: g.d.clone(),
        probabilities: g.p.clone(),
        rounds: g.n_r.clone(),
        with_baseline: baseline,
    }
}

fn point(a: &PointArgs) -> ExperimentConfig {
    ExperimentConfig {
        experiment: a.experiment.into(),
        family: a.code.family,
        noise: a.code.noise,
        basis: a.code.basis,
        d: a.d,
        p: a.p,
        n_r: a.n_r,
        num_cnots: a.cnots,
        baseline: a.baseline,
        ..Default::default()
    }
}

fn run_grid(sweep: &SweepConfig) -> Result<Vec<ExperimentResult>> {
    let configs = sweep.expand();
    // Fail on a bad point before spending time on the good ones.
    for c in &configs {
        c.spec()?.build()?;
    }
    configs.iter().map(run_experiment).collect()
}

fn emit(results: &[ExperimentResult], out: &OutputArgs) -> CliResult<()> {
    let text = match out.format {
        Format::Csv => to_csv(results),
        Format::Json => to_json(results)? + "\n",
    };
    match &out.out {
        Some(path) => fs::write(path, text).map_err(|e| format!("writing {}: {e}", path.display()))?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn load_sweep(path: &PathBuf) -> CliResult<SweepConfig> {
    let text = fs::read_to_string(path).map_err(|e| format!("reading {}: {e}", path.display()))?;
    Ok(toml::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?)
}

fn execute(cli: Cli) -> CliResult<()> {
    if let Some(w) = cli.workers {
        if w == 0 {
            return Err("--workers must be positive".into());
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build_global()?;
    }
    let (sweep, output) = match &cli.command {
        Command::Memory(g) => (grid(ExperimentKind::Memory, g, 0, false), &g.output),
        Command::CnotChain { grid: g, cnots, baseline } => {
            (grid(ExperimentKind::CnotChain, g, *cnots, *baseline), &g.output)
        }
        Command::YFactory { grid: g, baseline } => (grid(ExperimentKind::YFactory, g, 0, *baseline), &g.output),
        Command::Sweep { config, output } => (load_sweep(config)?, output),
        Command::Circuit(a) => {
            let lc = point(a).spec()?.build()?;
            print!("{}", lc.circuit.to_text());
            return Ok(());
        }
        Command::Graph(a) => {
            let g = MatchingGraph::from_spec(&point(a).spec()?)?;
            print!("{}", g.to_text());
            return Ok(());
        }
    };
    let results = run_grid(&sweep)?;
    emit(&results, output)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.verbose { "info" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
