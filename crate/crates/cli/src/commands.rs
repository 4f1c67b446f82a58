use std::fmt;
use std::path::{Path, PathBuf};

use hypfill_core::boundary_probe::{probe, ProbeConfig, RaySampling};
use hypfill_core::corpus::{corpus_generate, segment, Generator, SpaceCorpusEntry};
use hypfill_core::filling::{normalize_space, Filling, FillingParams, NORMALIZED_DIAMETER};
use hypfill_core::gehring_hayman::{
    collapse_slope, estimate_critical_exponent, gh_ratio_scaling_defect, gh_sweep, random_curves, scaling_check,
    CollapseFamily, FillingFamily, ScalingCheckParams,
};
use hypfill_core::hyperbolicity::{default_rays, delta_exact, delta_sampled, estimate_starlikeness};
use hypfill_core::io::{format_f64, read_graph_input, read_space, to_json_string, ConformalFile, FillingFile, GraphInput, SpaceFile};
use hypfill_core::metric::{validate_metric, FiniteMetricSpace};
use hypfill_core::model_spaces::{ray_collapse_slope, ModelSpaceFamily, ModelSpaceParams};
use hypfill_core::uniformize::{ConformalGraph, UniformizationParams};
use hypfill_core::{Error, Label};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use crate::args::*;

#[derive(Debug)]
pub enum CliError {
    Core(Error),
    Io(std::io::Error),
    Usage(String),
    Replay(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "error: {e}"),
            CliError::Io(e) => write!(f, "error: {e}"),
            CliError::Usage(msg) => write!(f, "{msg}"),
            CliError::Replay(msg) => write!(f, "replay mismatch: {msg}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(std::io::Error::other(e))
    }
}

type Result<T> = std::result::Result<T, CliError>;

/// Files produced by one command, kept in memory until written.
#[derive(Debug, Default)]
pub struct Outcome {
    pub stem: String,
    pub outputs: Vec<(String, Vec<u8>)>,
    pub inputs: Vec<PathBuf>,
    pub seeds: Vec<u64>,
}

impl Outcome {
    fn new(stem: &str) -> Self {
        Self { stem: stem.into(), ..Self::default() }
    }

    fn json<T: Serialize + ?Sized>(mut self, name: &str, value: &T) -> Result<Self> {
        self.outputs.push((name.into(), to_json_string(value)?.into_bytes()));
        Ok(self)
    }

    fn csv(mut self, name: &str, header: &[&str], rows: Vec<Vec<String>>) -> Result<Self> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header)?;
        for r in rows {
            w.write_record(&r)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Io(std::io::Error::other(e.to_string())))?;
        self.outputs.push((name.into(), bytes));
        Ok(self)
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(format_f64).unwrap_or_default()
}

pub fn parse_label(s: &str) -> Label {
    s.parse::<u64>().map(Label::Int).unwrap_or_else(|_| Label::Str(s.to_owned()))
}

fn default_space() -> hypfill_core::Result<FiniteMetricSpace> {
    segment(64, NORMALIZED_DIAMETER)
}

fn load_base(space: Option<&Path>, inputs: &mut Vec<PathBuf>) -> Result<FiniteMetricSpace> {
    let s = match space {
        Some(p) => {
            inputs.push(p.to_path_buf());
            read_space(p)?
        }
        None => default_space()?,
    };
    Ok(normalize_space(&s)?.0)
}

fn load_source(src: &GraphSource, inputs: &mut Vec<PathBuf>, seeds: &mut Vec<u64>) -> Result<GraphInput> {
    if let Some(p) = &src.graph {
        inputs.push(p.clone());
        return Ok(read_graph_input(p)?);
    }
    let base = load_base(src.space.as_deref(), inputs)?;
    seeds.push(src.fill_seed);
    let params = FillingParams::new(src.alpha, src.tau, src.depth, src.fill_seed)?;
    Ok(GraphInput::Filling(Box::new(Filling::build(&base, params)?)))
}

pub fn execute(cmd: &Command) -> Result<Outcome> {
    match cmd {
        Command::Corpus { command: CorpusCommand::Gen(a) } => corpus_gen(a),
        Command::Fill { command: FillCommand::Build(a) } => fill_build(a),
        Command::Uniformize(a) => uniformize(a),
        Command::Delta(a) => delta(a),
        Command::Gh { command: GhCommand::Sweep(a) } => sweep(a),
        Command::Gh { command: GhCommand::Critical(a) } => critical(a),
        Command::Gh { command: GhCommand::ScaleCheck(a) } => scale_check(a),
        Command::Model { command: ModelCommand::Sweep(a) } => model_sweep(a),
        Command::Boundary { command: BoundaryCommand::Probe(a) } => boundary(a),
        Command::Replay(_) => Err(CliError::Usage("replay cannot be nested".into())),
    }
}

fn corpus_gen(a: &CorpusGenArgs) -> Result<Outcome> {
    let generator = match a.generator {
        GeneratorArg::Segment => Generator::Segment,
        GeneratorArg::Circle => Generator::Circle,
        GeneratorArg::Cantor => Generator::Cantor,
        GeneratorArg::PointCloudFile => Generator::PointCloudFile,
        GeneratorArg::Tree => Generator::Tree,
    };
    let name = a.name.clone().unwrap_or_else(|| format!("{:?}", generator).to_lowercase());
    let entry = SpaceCorpusEntry {
        name: name.clone(),
        generator,
        points: a.points,
        length: a.length,
        ratio: a.ratio,
        depth: a.depth,
        seed: a.seed,
        path: a.path.as_ref().map(|p| p.display().to_string()),
    };
    let mut out = Outcome::new("space");
    out.inputs.extend(a.path.iter().cloned());
    out.seeds.extend(a.seed);
    let generated = corpus_generate(&entry, |p| read_space(Path::new(p)))?;
    let violations = validate_metric(&generated.space);
    if !violations.is_empty() {
        return Err(Error::InvalidParameter(format!(
            "generated space fails metric validation ({} violations, first {:?})",
            violations.len(),
            violations[0]
        ))
        .into());
    }
    let mut file = SpaceFile::from_space(&generated.space);
    file.name = Some(name);
    file.hypothesis = Some(generated.hypothesis);
    out.json("space.json", &file)
}

fn fill_build(a: &FillBuildArgs) -> Result<Outcome> {
    let mut out = Outcome::new("filling");
    let base = load_base(Some(&a.space), &mut out.inputs)?;
    out.seeds.push(a.seed);
    let f = Filling::build(&base, FillingParams::new(a.alpha, a.tau, a.depth, a.seed)?)?;
    out.json("filling.json", &FillingFile::from_filling(&f))
}

fn uniformize(a: &UniformizeArgs) -> Result<Outcome> {
    let mut out = Outcome::new("conformal");
    let input = load_source(&a.source, &mut out.inputs, &mut out.seeds)?;
    let cg = match &a.basepoint {
        None => input.uniformize(a.epsilon)?,
        Some(l) => {
            let p = input.graph().index_of(&parse_label(l))?;
            ConformalGraph::new(input.graph(), UniformizationParams::new(a.epsilon, p)?)?
        }
    };
    out.json("conformal.json", &ConformalFile::from_conformal(&cg))
}

fn delta(a: &DeltaArgs) -> Result<Outcome> {
    let mut out = Outcome::new("delta");
    let input = load_source(&a.source, &mut out.inputs, &mut out.seeds)?;
    let g = input.graph();
    let exact = match a.method {
        DeltaMethodArg::Auto => g.len() <= a.cap,
        DeltaMethodArg::Exact => true,
        DeltaMethodArg::Sampled => false,
    };
    let est = if exact {
        delta_exact(g, a.cap)?
    } else {
        out.seeds.push(a.seed);
        delta_sampled(g, a.samples, a.seed)?
    };
    let star = match g.basepoint() {
        Some(p) => Some(estimate_starlikeness(g, p, &default_rays(g, p)?)?),
        None => None,
    };
    out.json("delta.json", &json!({ "vertices": g.len(), "delta": est, "starlikeness": star }))
}

fn sweep(a: &GhSweepArgs) -> Result<Outcome> {
    let mut out = Outcome::new("gh_sweep");
    let input = load_source(&a.source, &mut out.inputs, &mut out.seeds)?;
    out.seeds.push(a.seed);
    let cg = input.uniformize(a.epsilon)?;
    let report = gh_sweep(&cg, a.pairs, a.seed)?;
    let slope = match &input {
        GraphInput::Filling(f) => collapse_slope(f, a.epsilon, None).ok(),
        GraphInput::Graph(_) => None,
    };
    let depth = match &input {
        GraphInput::Filling(f) => f.depth() as f64,
        GraphInput::Graph(_) => report.truncation_depth,
    };
    let rows = vec![vec![format_f64(a.epsilon), opt(slope), format_f64(report.max_ratio), format_f64(depth)]];
    out.json("gh_sweep.json", &json!({ "report": report, "collapseSlope": slope }))?
        .csv("gh_sweep.csv", &["epsilon", "slope", "maxRatio", "depth"], rows)
}

fn critical(a: &CriticalArgs) -> Result<Outcome> {
    let mut out = Outcome::new("critical");
    let family: Box<dyn CollapseFamily> = match a.family {
        FamilyArg::Filling => {
            let base = load_base(a.space.as_deref(), &mut out.inputs)?;
            out.seeds.push(a.fill_seed);
            let mut depths = a.depths.clone();
            depths.sort_unstable();
            depths.dedup();
            Box::new(FillingFamily::new(&base, a.alpha, a.tau, a.fill_seed, &depths)?)
        }
        FamilyArg::H2 | FamilyArg::Model => {
            let kappa = if a.family == FamilyArg::H2 { -1.0 } else { a.kappa };
            ModelSpaceParams::new(kappa, 1.0)?;
            let k = a.k_max.max(12);
            Box::new(ModelSpaceFamily::new(kappa, vec![k / 3, 2 * k / 3, k]))
        }
    };
    let range = a.range.unwrap_or(match a.family {
        FamilyArg::Filling => Range { lo: 0.2, hi: 2.0 },
        FamilyArg::H2 => Range { lo: 0.3, hi: 3.0 },
        FamilyArg::Model => Range { lo: 0.3, hi: 3.0 * (-a.kappa).sqrt() },
    });
    let est = estimate_critical_exponent(family.as_ref(), range.lo, range.hi, a.tol, a.grid)?;
    let rows = est
        .sweep
        .iter()
        .map(|p| vec![format_f64(p.epsilon), format_f64(p.collapse_slope), opt(p.max_gh_ratio), p.depth.to_string()])
        .collect();
    out.json("critical.json", &est)?.csv("critical.csv", &["epsilon", "slope", "maxRatio", "depth"], rows)
}

fn scale_check(a: &ScaleCheckArgs) -> Result<Outcome> {
    let mut out = Outcome::new("scale_check");
    let input = load_source(&a.source, &mut out.inputs, &mut out.seeds)?;
    out.seeds.push(a.seed);
    let g = input.graph();
    let params = ScalingCheckParams::new(a.k, a.epsilon)?;
    let curves = random_curves(g, a.curves, a.max_edges, a.seed);
    let mut report = scaling_check(g, params, &curves)?;
    if g.len() >= 2 {
        let mut rng = ChaCha8Rng::seed_from_u64(a.seed ^ 0x5ca1e);
        let pairs: Vec<(usize, usize)> = (0..a.curves.max(1))
            .map(|_| {
                let x = rng.gen_range(0..g.len());
                let y = (x + rng.gen_range(1..g.len())) % g.len();
                (x, y)
            })
            .collect();
        report.max_ratio_defect = Some(gh_ratio_scaling_defect(g, params, &pairs)?);
    }
    out.json("scale_check.json", &report)
}

fn model_sweep(a: &ModelSweepArgs) -> Result<Outcome> {
    let out = Outcome::new("model_sweep");
    if a.steps == 0 || a.k_max == 0 {
        return Err(Error::InvalidParameter("steps and k-max must be positive".into()).into());
    }
    let mut rows = Vec::new();
    let mut points = Vec::new();
    for i in 0..a.steps {
        let t = if a.steps == 1 { 0.0 } else { i as f64 / (a.steps - 1) as f64 };
        let eps = a.eps_range.lo + t * (a.eps_range.hi - a.eps_range.lo);
        let params = ModelSpaceParams::new(a.kappa, eps)?;
        let slope = ray_collapse_slope(&params, a.dtheta, a.k_max).ok();
        for k in 1..=a.k_max {
            let k = k as f64;
            let bound = params.ray_separation_bound(k)?;
            let upper = params.d_eps_ray_upper(a.dtheta, k)?;
            rows.push(vec![format_f64(eps), format_f64(k), format_f64(bound), format_f64(upper.value), opt(slope)]);
        }
        points.push(json!({ "epsilon": eps, "slope": slope }));
    }
    out.json(
        "model_sweep.json",
        &json!({ "kappa": a.kappa, "kMax": a.k_max, "dtheta": a.dtheta, "points": points }),
    )?
    .csv("model_sweep.csv", &["epsilon", "k", "bound", "rayUpper", "slope"], rows)
}

fn boundary(a: &ProbeArgs) -> Result<Outcome> {
    let mut out = Outcome::new("boundary");
    let input = load_source(&a.source, &mut out.inputs, &mut out.seeds)?;
    out.seeds.push(a.seed);
    let cg = input.uniformize(a.epsilon)?;
    let config = ProbeConfig {
        epsilon: a.epsilon,
        max_rays: a.rays,
        seed: a.seed,
        sampling: match a.sampling {
            SamplingArg::Uniform => RaySampling::Uniform,
            SamplingArg::Spread => RaySampling::Spread,
        },
        gromov_threshold: a.tg,
        metric_threshold: a.tm,
    };
    out.json("boundary.json", &probe(&cg, config)?)
}
