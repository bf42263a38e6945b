use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use distenum::OutputMode;

#[derive(Debug, Parser)]
#[command(
    name = "distenum",
    version,
    about = "Enumerate shortest distances with bounded delay"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a graph from one of the built-in families.
    Generate(GenerateArgs),
    /// Stream distance triples, one `u v d` line each.
    Enumerate(EnumerateArgs),
    /// Check an enumeration against the brute-force oracle.
    Verify(VerifyArgs),
    /// Measure delays over a family of growing graphs.
    Bench(BenchArgs),
    /// Multiply two boolean matrices through reachable enumeration.
    Bmm(BmmArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Family {
    CliquePath,
    Star,
    Bmm,
    IsolatedEdge,
    Random,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    pub family: Family,
    /// Clique size (clique-path).
    #[arg(long)]
    pub k: Option<usize>,
    /// Vertex count (star, isolated-edge, random).
    #[arg(long)]
    pub n: Option<usize>,
    /// Edge count (random).
    #[arg(long)]
    pub m: Option<usize>,
    /// Comma-separated spike weights (star). Random when omitted.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub weights: Option<Vec<i64>>,
    /// Matrix dimension (bmm with random matrices).
    #[arg(long)]
    pub d: Option<usize>,
    /// Entry density of random matrices (bmm).
    #[arg(long, default_value_t = 0.3)]
    pub density: f64,
    /// Matrix files (bmm). Overrides --d.
    #[arg(long, requires = "b")]
    pub a: Option<PathBuf>,
    #[arg(long, requires = "a")]
    pub b: Option<PathBuf>,
    #[arg(long)]
    pub directed: bool,
    /// Largest edge weight (random); 0 means unweighted.
    #[arg(long, default_value_t = 0)]
    pub max_weight: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output file; standard output when omitted.
    #[arg(short, long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, Args)]
pub struct ModeFlags {
    #[arg(long)]
    pub row_wise: bool,
    #[arg(long)]
    pub no_self: bool,
    #[arg(long)]
    pub reachable: bool,
    #[arg(long)]
    pub sorted: bool,
    /// Emit one orientation per unordered pair (undirected graphs, all pairs).
    #[arg(long)]
    pub dedup: bool,
}

impl ModeFlags {
    pub fn mode(&self) -> OutputMode {
        OutputMode {
            row_wise: self.row_wise,
            no_self: self.no_self,
            reachable_only: self.reachable,
            sorted: self.sorted,
        }
    }
}

#[derive(Debug, Args)]
pub struct EnumerateArgs {
    pub graph: PathBuf,
    #[command(flatten)]
    pub flags: ModeFlags,
    /// Enumerate distances from this vertex only.
    #[arg(long)]
    pub source: Option<usize>,
    /// Print the delay report to standard error when done.
    #[arg(long)]
    pub report: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Fault {
    Drop,
    Duplicate,
    Corrupt,
    Swap,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    pub graph: PathBuf,
    #[command(flatten)]
    pub flags: ModeFlags,
    #[arg(long)]
    pub source: Option<usize>,
    /// Verify every valid mode combination.
    #[arg(long, conflicts_with_all = ["row_wise", "no_self", "reachable", "sorted", "source"])]
    pub all_modes: bool,
    /// Tamper with the stream before validation.
    #[arg(long, hide = true)]
    pub inject_fault: Option<Fault>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Kv,
    Records,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    pub family: Family,
    /// Sizes: k for clique-path, d for bmm, n otherwise.
    #[arg(long, value_delimiter = ',', required = true)]
    pub sizes: Vec<usize>,
    #[command(flatten)]
    pub flags: ModeFlags,
    #[arg(long)]
    pub source: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub repeats: usize,
    /// Edges per vertex (random).
    #[arg(long, default_value_t = 4)]
    pub edges_per_vertex: usize,
    #[arg(long)]
    pub directed: bool,
    /// Random weights up to n³ (random).
    #[arg(long)]
    pub weighted: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Also validate every run against the oracle.
    #[arg(long)]
    pub check: bool,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct BmmArgs {
    pub a: PathBuf,
    pub b: PathBuf,
    #[arg(short, long)]
    pub out: Option<PathBuf>,
    /// Compare against the direct product.
    #[arg(long)]
    pub check: bool,
}
