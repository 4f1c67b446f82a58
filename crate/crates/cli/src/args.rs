use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "hypfill", version, about = "Hyperbolic fillings and uniformized metric graphs")]
pub struct Cli {
    /// Worker threads for parallel sweeps.
    #[arg(long, global = true, env = "HYPFILL_THREADS")]
    pub threads: Option<usize>,
    /// Directory for report files.
    #[arg(long, global = true, default_value = ".")]
    pub out_dir: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate base spaces.
    Corpus {
        #[command(subcommand)]
        command: CorpusCommand,
    },
    /// Build hyperbolic fillings.
    Fill {
        #[command(subcommand)]
        command: FillCommand,
    },
    /// Write the conformal reweighting of a graph.
    Uniformize(UniformizeArgs),
    /// Estimate Gromov δ and rough starlikeness.
    Delta(DeltaArgs),
    /// Gehring–Hayman sweeps, critical exponents, scaling check.
    Gh {
        #[command(subcommand)]
        command: GhCommand,
    },
    /// Closed-form model-plane sweeps.
    Model {
        #[command(subcommand)]
        command: ModelCommand,
    },
    /// Compare Gromov and metric boundary partitions.
    Boundary {
        #[command(subcommand)]
        command: BoundaryCommand,
    },
    /// Re-run a stored experiment record and check its outputs byte for byte.
    Replay(ReplayArgs),
}

#[derive(Debug, Subcommand)]
pub enum CorpusCommand {
    /// Write a generated base space.
    Gen(CorpusGenArgs),
}

#[derive(Debug, Subcommand)]
pub enum FillCommand {
    /// Build a filling from a space file or generator.
    Build(FillBuildArgs),
}

#[derive(Debug, Subcommand)]
pub enum GhCommand {
    /// Distortion ratios over pairs of one graph.
    Sweep(GhSweepArgs),
    /// Bracket the ε where the collapse slope changes sign.
    Critical(CriticalArgs),
    /// Check uniformized lengths under metric rescaling.
    ScaleCheck(ScaleCheckArgs),
}

#[derive(Debug, Subcommand)]
pub enum ModelCommand {
    /// Collapse slopes of the model plane across ε.
    Sweep(ModelSweepArgs),
}

#[derive(Debug, Subcommand)]
pub enum BoundaryCommand {
    /// Partition sampled rays two ways and compare.
    Probe(ProbeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GeneratorArg {
    Segment,
    Circle,
    Cantor,
    PointCloudFile,
    Tree,
}

#[derive(Debug, Args)]
pub struct CorpusGenArgs {
    #[arg(long, value_enum)]
    pub generator: GeneratorArg,
    #[arg(long)]
    pub name: Option<String>,
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(long)]
    pub length: Option<f64>,
    #[arg(long)]
    pub ratio: Option<f64>,
    #[arg(long)]
    pub depth: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub path: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FillBuildArgs {
    #[arg(long)]
    pub space: PathBuf,
    #[arg(long, default_value_t = 2.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = 2.0)]
    pub tau: f64,
    #[arg(long, default_value_t = 8)]
    pub depth: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

// A graph file, a filling file, or a space to fill on the fly. Without
// `--graph` or `--space` the 64-point segment is filled.
#[derive(Debug, Args)]
pub struct GraphSource {
    /// Graph or filling JSON.
    #[arg(long, conflicts_with = "space")]
    pub graph: Option<PathBuf>,
    /// Space JSON to fill.
    #[arg(long)]
    pub space: Option<PathBuf>,
    #[arg(long, default_value_t = 2.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = 2.0)]
    pub tau: f64,
    #[arg(long, default_value_t = 8)]
    pub depth: usize,
    #[arg(long, default_value_t = 0)]
    pub fill_seed: u64,
}

#[derive(Debug, Args)]
pub struct UniformizeArgs {
    #[command(flatten)]
    pub source: GraphSource,
    #[arg(long, allow_hyphen_values = true)]
    pub epsilon: f64,
    /// Basepoint label; defaults to the graph's own basepoint.
    #[arg(long)]
    pub basepoint: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DeltaMethodArg {
    Auto,
    Exact,
    Sampled,
}

#[derive(Debug, Args)]
pub struct DeltaArgs {
    #[command(flatten)]
    pub source: GraphSource,
    #[arg(long, value_enum, default_value = "auto")]
    pub method: DeltaMethodArg,
    #[arg(long, default_value_t = 100_000)]
    pub samples: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Largest vertex count for the exact scan.
    #[arg(long, default_value_t = hypfill_core::hyperbolicity::DEFAULT_EXACT_CAP)]
    pub cap: usize,
}

#[derive(Debug, Args)]
pub struct GhSweepArgs {
    #[command(flatten)]
    pub source: GraphSource,
    #[arg(long, allow_hyphen_values = true)]
    pub epsilon: f64,
    /// Pair budget for both the main and the deep-pair sample.
    #[arg(long, default_value_t = 20_000)]
    pub pairs: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    Filling,
    H2,
    Model,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Range {
    pub lo: f64,
    pub hi: f64,
}

pub fn parse_range(s: &str) -> Result<Range, String> {
    let (a, b) = s.split_once(':').ok_or("expected LO:HI")?;
    let lo: f64 = a.trim().parse().map_err(|e| format!("bad LO: {e}"))?;
    let hi: f64 = b.trim().parse().map_err(|e| format!("bad HI: {e}"))?;
    if lo.partial_cmp(&hi) != Some(std::cmp::Ordering::Less) {
        return Err("LO must be below HI".into());
    }
    Ok(Range { lo, hi })
}

#[derive(Debug, Args)]
pub struct CriticalArgs {
    #[arg(long, value_enum)]
    pub family: FamilyArg,
    #[arg(long, default_value_t = 2.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = -1.0, allow_hyphen_values = true)]
    pub kappa: f64,
    /// ε search range; defaults to 0.2:2.0 for fillings, 0.3:3√-κ for models.
    #[arg(long, value_parser = parse_range)]
    pub range: Option<Range>,
    #[arg(long, default_value_t = 0.01)]
    pub tol: f64,
    /// Space to fill; the 64-point segment when omitted.
    #[arg(long)]
    pub space: Option<PathBuf>,
    #[arg(long, default_value_t = 2.0)]
    pub tau: f64,
    #[arg(long, default_value_t = 0)]
    pub fill_seed: u64,
    /// Filling depths, ascending.
    #[arg(long, value_delimiter = ',', default_value = "6,7,8")]
    pub depths: Vec<usize>,
    /// Largest ray length for model families; depths are k_max/3, 2k_max/3, k_max.
    #[arg(long, default_value_t = 30)]
    pub k_max: usize,
    /// Sweep points per depth.
    #[arg(long, default_value_t = 5)]
    pub grid: usize,
}

#[derive(Debug, Args)]
pub struct ScaleCheckArgs {
    #[command(flatten)]
    pub source: GraphSource,
    #[arg(long, allow_hyphen_values = true)]
    pub k: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 100)]
    pub curves: usize,
    #[arg(long, default_value_t = 8)]
    pub max_edges: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct ModelSweepArgs {
    #[arg(long, default_value_t = -1.0, allow_hyphen_values = true)]
    pub kappa: f64,
    #[arg(long, value_parser = parse_range)]
    pub eps_range: Range,
    #[arg(long, default_value_t = 30)]
    pub k_max: usize,
    /// Number of ε values across the range.
    #[arg(long, default_value_t = 11)]
    pub steps: usize,
    /// Angle between the two rays.
    #[arg(long, default_value_t = std::f64::consts::PI)]
    pub dtheta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SamplingArg {
    Uniform,
    Spread,
}

#[derive(Debug, Args)]
pub struct ProbeArgs {
    #[command(flatten)]
    pub source: GraphSource,
    #[arg(long, allow_hyphen_values = true)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 2)]
    pub rays: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "spread")]
    pub sampling: SamplingArg,
    /// Gromov threshold T_G; default N - 2δ̂.
    #[arg(long, allow_hyphen_values = true)]
    pub tg: Option<f64>,
    /// Metric threshold T_M; default 2(e^{-εT_G} - e^{-εN})/ε.
    #[arg(long)]
    pub tm: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    pub record: PathBuf,
    /// Also write the regenerated outputs to --out-dir.
    #[arg(long)]
    pub write: bool,
}
