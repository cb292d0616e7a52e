mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgAction, Args, Parser, Subcommand};
use refswarm::swarm::Mode;

use crate::commands::CliError;
use crate::config::FileConfig;

#[derive(Debug, Parser)]
#[command(
    name = "refswarm",
    version,
    about = "Rank candidate referees for a manuscript by swarming over a co-authorship graph"
)]
struct Cli {
    /// Worker threads for the Monte Carlo engine [default: all cores]
    #[arg(long, global = true, env = "REFSWARM_THREADS")]
    threads: Option<usize>,

    /// TOML file with swarm, blackout and evaluation settings
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Log more (-v info, -vv debug)
    #[arg(short, long, global = true, action = ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build the co-authorship graph from a line-delimited JSON corpus
    BuildGraph {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Rank referees for one manuscript
    Rank(RankArgs),
    /// Check rankings against committee bids
    Evaluate(EvaluateArgs),
    /// Write a synthetic planted-community bundle (background corpus,
    /// submissions, bids)
    Synth {
        #[arg(long, value_name = "DIR")]
        out_dir: PathBuf,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

#[derive(Debug, Args)]
struct RankArgs {
    #[arg(long)]
    graph: PathBuf,
    /// Corpus-format file holding the manuscript(s) to rank
    #[arg(long)]
    manuscripts: PathBuf,
    /// Manuscript id; required when the file holds more than one
    #[arg(long)]
    id: Option<String>,
    /// Keep only the first N referees
    #[arg(long, value_name = "N")]
    top: Option<usize>,
    /// Ranking JSON destination [default: stdout]
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Also write the raw energy field as TSV
    #[arg(long, value_name = "FILE")]
    energy_out: Option<PathBuf>,
    #[command(flatten)]
    swarm: SwarmArgs,
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    #[arg(long)]
    graph: PathBuf,
    /// Submissions in corpus format; references seed the swarm
    #[arg(long)]
    submissions: PathBuf,
    /// Tab-separated `member<TAB>manuscript_id<TAB>bid` lines
    #[arg(long)]
    bids: PathBuf,
    /// Significance level for the ordering check [default: 0.05]
    #[arg(long)]
    alpha: Option<f64>,
    /// Print the JSON report instead of the table
    #[arg(long)]
    json: bool,
    /// Also write the JSON report here
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Write per-category samples and histograms into this directory
    #[arg(long, value_name = "DIR")]
    emit_distributions: Option<PathBuf>,
    #[command(flatten)]
    swarm: SwarmArgs,
}

#[derive(Debug, Clone, Default, Args)]
pub struct SwarmArgs {
    /// monte-carlo or expectation [default: monte-carlo]
    #[arg(long)]
    mode: Option<Mode>,
    /// Particles per reference occurrence [default: 100]
    #[arg(long)]
    particles: Option<usize>,
    /// Initial particle energy [default: 1.0]
    #[arg(long)]
    energy: Option<f64>,
    /// Fraction of energy lost per step, in [0, 1) [default: 0.15]
    #[arg(long)]
    decay: Option<f64>,
    /// Deposits per particle [default: 100]
    #[arg(long)]
    steps: Option<usize>,
    /// Random seed for the Monte Carlo engine [default: 0]
    #[arg(long)]
    seed: Option<u64>,
    /// Run the negative swarm from the manuscript's authors
    #[arg(long)]
    blackout: bool,
    /// Blackout radius in hops; implies --blackout, 0 turns it off [default: 2]
    #[arg(long, value_name = "K")]
    blackout_steps: Option<usize>,
    /// Energy of each blackout particle [default: -1000]
    #[arg(long, allow_negative_numbers = true)]
    blackout_energy: Option<f64>,
    /// Decay of blackout particles [default: 0]
    #[arg(long)]
    blackout_decay: Option<f64>,
    /// Blackout particles per author [default: 100]
    #[arg(long)]
    blackout_particles: Option<usize>,
    /// Drop the manuscript's own authors from the ranking
    #[arg(long)]
    exclude_authors: bool,
}

fn init_logging(verbose: u8) {
    let level = match verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_target(false)
        .init();
}

fn run(cli: Cli) -> Result<(), CliError> {
    let file = match &cli.config {
        Some(path) => FileConfig::load(path).map_err(CliError::Config)?,
        None => FileConfig::default(),
    };
    if let Some(n) = cli.threads.or(file.threads) {
        if n == 0 {
            return Err(CliError::Config("thread count must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    match cli.command {
        Command::BuildGraph { corpus, output } => commands::build_graph(&corpus, &output),
        Command::Rank(a) => {
            let settings = a.swarm.resolve(&file)?;
            commands::rank(&commands::RankJob {
                graph: a.graph,
                manuscripts: a.manuscripts,
                id: a.id,
                top: a.top,
                output: a.output,
                energy_out: a.energy_out,
                settings,
            })
        }
        Command::Evaluate(a) => {
            let settings = a.swarm.resolve(&file)?;
            commands::evaluate(&commands::EvaluateJob {
                graph: a.graph,
                submissions: a.submissions,
                bids: a.bids,
                alpha: a.alpha.or(file.evaluate.alpha).unwrap_or(0.05),
                json: a.json,
                output: a.output,
                emit_distributions: a.emit_distributions,
                settings,
            })
        }
        Command::Synth { out_dir, seed } => commands::synth(&out_dir, seed),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    init_logging(cli.verbose);
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
