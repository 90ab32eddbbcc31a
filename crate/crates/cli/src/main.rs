use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;

#[derive(Parser)]
#[command(name = "dodo", version, about = "Single-IDS-correcting codebooks from a learned Levenshtein embedding")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train an embedding model for codeword length n.
    Train(TrainArgs),
    /// Build codebooks by greedy search (degs, rand) or the VT construction.
    Search(SearchArgs),
    /// Check minimum distance (and optionally maximality) of a codebook.
    Verify(VerifyArgs),
    /// Code rates against the reference redundancy curves, as CSV.
    RateTable(RateTableArgs),
    /// Failure counts and timing of tree and brute-force segment correction.
    BenchCorrect(BenchArgs),
    /// Dump embeddings as a float-32 matrix with a JSON sidecar.
    ExportEmbeddings(ExportArgs),
    /// Send random messages through an IDS channel and decode them.
    ChannelSim(ChannelArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum LossArg {
    Revised,
    Pnll,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 64)]
    m: usize,
    #[arg(long, default_value_t = 10)]
    layers: usize,
    #[arg(long, default_value_t = 64)]
    channels: usize,
    #[arg(long, default_value_t = 3)]
    kernel: usize,
    #[arg(long, default_value_t = 50_000)]
    steps: u64,
    #[arg(long, default_value_t = 1e-3)]
    lr: f64,
    /// Pairs per batch at one edit, two edits, and independent.
    #[arg(long, num_args = 3, value_names = ["ONE", "TWO", "INDEP"], default_values_t = [102, 102, 52])]
    mix: Vec<usize>,
    #[arg(long)]
    cosine: bool,
    #[arg(long, value_enum, default_value_t = LossArg::Revised)]
    loss: LossArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Start from these weights instead of a fresh initialization (any
    /// codeword length; the architecture must match).
    #[arg(long)]
    init: Option<PathBuf>,
    /// Held-out pairs per category for the manifest evaluation (0 skips it).
    #[arg(long, default_value_t = 2000)]
    eval_pairs: usize,
    /// Weight file to write; the manifest goes next to it with a .json extension.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    quiet: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Degs,
    Rand,
    Vt,
}

#[derive(Args)]
struct SearchArgs {
    #[arg(long, value_enum)]
    method: MethodArg,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    runs: usize,
    /// Base seed; run i uses seed + i (tie-breaking seed for degs).
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Alphabet size for rand.
    #[arg(long, default_value_t = 4)]
    q: u8,
    #[arg(long)]
    model: Option<PathBuf>,
    /// Covariance ridge; defaults to 1e-6 * trace / m.
    #[arg(long)]
    ridge: Option<f64>,
    /// Break score ties lexicographically instead of by seeded hash.
    #[arg(long)]
    lexicographic_ties: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    codebook: PathBuf,
    #[arg(long, default_value_t = 3)]
    dmin: usize,
    /// Also require that no sequence can be added.
    #[arg(long)]
    maximal: bool,
}

#[derive(Args)]
struct RateTableArgs {
    /// Search summaries (JSON); the largest codebook per n is used.
    #[arg(long, num_args = 1..)]
    summary: Vec<PathBuf>,
    /// Explicit sizes as N=SIZE.
    #[arg(long, num_args = 1..)]
    size: Vec<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    codebook: PathBuf,
    #[arg(long)]
    model: PathBuf,
    #[arg(long, value_delimiter = ',', default_values_t = [1, 2, 3, 4, 5])]
    k: Vec<usize>,
    #[arg(long, default_value_t = 100_000)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also time brute-force correction of the same stream.
    #[arg(long)]
    brute: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExportArgs {
    #[arg(long)]
    model: PathBuf,
    /// Export every sequence of this length.
    #[arg(long)]
    n: Option<usize>,
    /// Codebook used for flags; exports only its words unless --n is given.
    #[arg(long)]
    codebook: Option<PathBuf>,
    /// Output prefix: writes PREFIX.f32 and PREFIX.json.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ChannelArgs {
    #[arg(long)]
    codebook: PathBuf,
    /// Decode with the embedding tree; brute force when absent.
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long, default_value_t = 4)]
    k: usize,
    #[arg(long, default_value_t = 1000)]
    messages: usize,
    #[arg(long, default_value_t = 256)]
    bits: usize,
    #[arg(long, default_value_t = 0.0)]
    p_ins: f64,
    #[arg(long, default_value_t = 0.0)]
    p_del: f64,
    #[arg(long, default_value_t = 0.0)]
    p_sub: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write every message transcript here.
    #[arg(long)]
    transcript: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Train(a) => commands::train(a),
        Command::Search(a) => commands::search(a),
        Command::Verify(a) => commands::verify(a),
        Command::RateTable(a) => commands::rate_table(a),
        Command::BenchCorrect(a) => commands::bench_correct(a),
        Command::ExportEmbeddings(a) => commands::export_embeddings(a),
        Command::ChannelSim(a) => commands::channel_sim(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
