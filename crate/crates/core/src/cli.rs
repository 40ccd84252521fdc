//! The `spred` command line. Every subcommand is deterministic given its
//! flags; settings can also come from a TOML file, with flags taking
//! precedence. The resolved settings are written as `run_config.toml` next
//! to the outputs.

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::{self, Deserializer};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

use crate::datasets::{iris, sample_cylinder};
use crate::diagram_distance::wasserstein;
use crate::equivalence::{similarity, DEFAULT_BUDGET};
use crate::error::{Result, SpredError};
use crate::experiment::{run_experiment, write_outcome, ExperimentConfig};
use crate::geometry::{pairwise_distances, project, ProjectionMatrix};
use crate::grassmann::{distributed_reduce, weiszfeld_median, GrassmannPoint};
use crate::io::{
    matrix_to_csv, read_diagram, read_points, read_projection, trace_to_csv, write_diagram, write_json, write_text,
};
use crate::optimizer::{anneal, AnnealingConfig, OrderWeight};
use crate::persistence::rips_diagrams;
use crate::plot::{diagram_svg, scatter_svg};

/// Either a fixed shift or half the smallest contraction ratio.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Eta {
    #[default]
    Auto,
    Value(f64),
}

impl Eta {
    pub fn parse(text: &str) -> Result<Self> {
        if text.trim().eq_ignore_ascii_case("auto") {
            return Ok(Eta::Auto);
        }
        match text.trim().parse::<f64>() {
            Ok(v) if v.is_finite() && v >= 0.0 => Ok(Eta::Value(v)),
            _ => Err(SpredError::Config(format!("eta must be `auto` or a nonnegative number, got `{text}`"))),
        }
    }

    pub fn value(self) -> Option<f64> {
        match self {
            Eta::Auto => None,
            Eta::Value(v) => Some(v),
        }
    }
}

impl fmt::Display for Eta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Eta::Auto => f.write_str("auto"),
            Eta::Value(v) => write!(f, "{v:?}"),
        }
    }
}

impl Serialize for Eta {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Eta::Auto => s.serialize_str("auto"),
            Eta::Value(v) => s.serialize_f64(*v),
        }
    }
}

impl<'de> Deserialize<'de> for Eta {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Int(i64),
            Text(String),
        }
        let text = match Raw::deserialize(d)? {
            Raw::Num(v) => format!("{v:?}"),
            Raw::Int(v) => v.to_string(),
            Raw::Text(t) => t,
        };
        Eta::parse(&text).map_err(de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimilaritySettings {
    /// Highest homology degree compared; 1 when unset, except for the iris
    /// experiment where it is 0.
    pub l: Option<usize>,
    pub eta: Eta,
    pub budget: usize,
}

impl Default for SimilaritySettings {
    fn default() -> Self {
        Self { l: None, eta: Eta::Auto, budget: DEFAULT_BUDGET }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSettings {
    pub name: String,
    /// Master seed, mandatory for experiments.
    pub seed: Option<u64>,
    pub n: usize,
    pub noise_var: f64,
}

impl Default for ExperimentSettings {
    fn default() -> Self {
        let d = ExperimentConfig::default();
        Self { name: d.name, seed: None, n: d.n, noise_var: d.noise_var }
    }
}

/// Everything a run can be configured with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Number of subsets for distributed reduction.
    pub parts: usize,
    pub anneal: AnnealingConfig,
    pub similarity: SimilaritySettings,
    pub experiment: ExperimentSettings,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            parts: 1,
            anneal: AnnealingConfig::default(),
            similarity: SimilaritySettings::default(),
            experiment: ExperimentSettings::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| SpredError::Config(e.to_string()))
    }

    pub fn load(path: Option<&Path>) -> Result<Self> {
        match path {
            None => Ok(Self::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| SpredError::Config(format!("cannot read {}: {e}", p.display())))?;
                Self::from_toml_str(&text)
            }
        }
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| SpredError::Config(e.to_string()))
    }

    /// The experiment described by this configuration.
    pub fn experiment_config(&self) -> ExperimentConfig {
        ExperimentConfig {
            name: self.experiment.name.clone(),
            seed: self.experiment.seed,
            n: self.experiment.n,
            noise_var: self.experiment.noise_var,
            l: self.similarity.l,
            eta: self.similarity.eta.value(),
            budget: self.similarity.budget,
            anneal: self.anneal.clone(),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "spred", version, about = "Topology-preserving linear dimensionality reduction")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample a point cloud (or export the bundled iris data) as CSV.
    Generate(GenerateArgs),
    /// Rips persistence diagrams of a point cloud, one JSON file per degree.
    Diagram(DiagramArgs),
    /// Wasserstein (or, with --p inf, bottleneck) distance of two diagrams.
    Distance(DistanceArgs),
    /// Anneal a projection that preserves the chosen persistence diagrams.
    Reduce(ReduceArgs),
    /// Reduce random subsets separately and combine them by a Grassmann median.
    ReduceDistributed(ReduceDistributedArgs),
    /// Geometric median of projection matrices on the Grassmannian.
    Median(MedianArgs),
    /// Interval classification and similarity measures for a projection.
    Similarity(SimilarityArgs),
    /// Render a 2-D point cloud or persistence diagrams as SVG.
    Plot(PlotArgs),
    /// Run the cylinder or iris comparison and write a report directory.
    Experiment(ExperimentArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Shape {
    Cylinder,
    Iris,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long, value_enum)]
    pub shape: Shape,
    #[arg(long, default_value_t = 100)]
    pub n: usize,
    #[arg(long, default_value_t = 0.05)]
    pub noise_var: f64,
    /// Required for the cylinder.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct DiagramArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub maxdim: usize,
    /// Receives `diagram_H<j>.json` for every degree.
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct DistanceArgs {
    pub first: PathBuf,
    pub second: PathBuf,
    /// Wasserstein order; `inf` gives the bottleneck distance.
    #[arg(long, default_value_t = 2.0)]
    pub p: f64,
    /// Ground norm on the plane.
    #[arg(long, default_value_t = 2.0)]
    pub q: f64,
}

/// Annealing flags shared by the reducing commands.
#[derive(Debug, Args, Default)]
pub struct AnnealFlags {
    #[arg(long)]
    pub k: Option<usize>,
    /// Weighted degrees, e.g. `0:0.5,1:0.5`.
    #[arg(long)]
    pub orders: Option<String>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long)]
    pub tau0: Option<f64>,
    #[arg(long)]
    pub tau_end: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub steps_per_temp: Option<usize>,
    #[arg(long)]
    pub chains: Option<usize>,
    #[arg(long)]
    pub pca_penalty: Option<f64>,
}

impl AnnealFlags {
    fn apply(&self, cfg: &mut AnnealingConfig) -> Result<()> {
        macro_rules! set {
            ($($f:ident),*) => { $(if let Some(v) = self.$f { cfg.$f = v; })* };
        }
        set!(k, p, q, tau0, tau_end, gamma, sigma, steps_per_temp, chains, pca_penalty);
        if let Some(o) = &self.orders {
            cfg.orders = OrderWeight::parse_list(o)?;
        }
        Ok(())
    }
}

#[derive(Debug, Args, Default)]
pub struct SimilarityFlags {
    #[arg(long)]
    pub l: Option<usize>,
    /// A nonnegative number or `auto`.
    #[arg(long)]
    pub eta: Option<String>,
    /// Rewrite steps allowed per group presentation.
    #[arg(long)]
    pub budget: Option<usize>,
}

impl SimilarityFlags {
    fn apply(&self, s: &mut SimilaritySettings) -> Result<()> {
        if self.l.is_some() {
            s.l = self.l;
        }
        if let Some(e) = &self.eta {
            s.eta = Eta::parse(e)?;
        }
        if let Some(b) = self.budget {
            s.budget = b;
        }
        Ok(())
    }
}

#[derive(Debug, Args)]
pub struct ReduceArgs {
    /// TOML file with `[anneal]` settings; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub anneal: AnnealFlags,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out_proj: PathBuf,
    #[arg(long)]
    pub out_points: Option<PathBuf>,
    #[arg(long)]
    pub out_trace: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReduceDistributedArgs {
    #[command(flatten)]
    pub reduce: ReduceArgs,
    #[arg(long)]
    pub parts: Option<usize>,
    /// Receives `subset_<i>.csv`, the projection found for each subset.
    #[arg(long)]
    pub out_subsets: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MedianArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    pub inputs: Vec<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[arg(long, default_value_t = 1000)]
    pub max_iter: usize,
}

#[derive(Debug, Args)]
pub struct SimilarityArgs {
    /// TOML file with `[similarity]` settings; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub proj: PathBuf,
    #[command(flatten)]
    pub similarity: SimilarityFlags,
    /// Report path; printed to stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    /// A 2-D point cloud CSV.
    #[arg(long, conflicts_with = "diagram", required_unless_present = "diagram")]
    pub points: Option<PathBuf>,
    /// One or more diagram JSON files drawn on shared axes.
    #[arg(long, value_delimiter = ',')]
    pub diagram: Vec<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value = "")]
    pub title: String,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// TOML file; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// `cylinder` or `iris`.
    #[arg(long)]
    pub name: Option<String>,
    /// Master seed; every method derives its own stream from it.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub noise_var: Option<f64>,
    #[command(flatten)]
    pub anneal: AnnealFlags,
    #[command(flatten)]
    pub similarity: SimilarityFlags,
    #[arg(long)]
    pub out_dir: PathBuf,
}

/// Formats `v` rounded to 12 significant digits.
pub fn format_sig12(v: f64) -> String {
    if !v.is_finite() {
        return if v.is_nan() { "nan".into() } else if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let rounded: f64 = format!("{v:.11e}").parse().expect("formatted float parses");
    format!("{rounded}")
}

fn echo_config(cfg: &RunConfig, outputs: &[&Path]) -> Result<()> {
    let text = cfg.to_toml()?;
    let dirs: BTreeSet<PathBuf> = outputs.iter().map(|p| p.parent().map(Path::to_path_buf).unwrap_or_default()).collect();
    for d in dirs {
        write_text(&d.join("run_config.toml"), &text)?;
    }
    Ok(())
}

fn resolve_reduce(args: &ReduceArgs) -> Result<RunConfig> {
    let mut cfg = RunConfig::load(args.config.as_deref())?;
    args.anneal.apply(&mut cfg.anneal)?;
    if let Some(s) = args.seed {
        cfg.anneal.seed = s;
    }
    cfg.anneal = cfg.anneal.validated()?;
    Ok(cfg)
}

fn reduce_outputs(args: &ReduceArgs) -> Vec<&Path> {
    let mut v = vec![args.out_proj.as_path()];
    v.extend(args.out_points.as_deref());
    v.extend(args.out_trace.as_deref());
    v
}

/// Runs one parsed command.
pub fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate(a) => {
            let x = match a.shape {
                Shape::Cylinder => {
                    let seed = a.seed.ok_or_else(|| SpredError::Config("--seed is required for the cylinder".into()))?;
                    sample_cylinder(a.n, a.noise_var, seed)?
                }
                Shape::Iris => iris(),
            };
            write_text(&a.out, &matrix_to_csv(&x.rows()))
        }
        Command::Diagram(a) => {
            let x = read_points(&a.input)?;
            for d in rips_diagrams(&pairwise_distances(&x), a.maxdim) {
                write_diagram(&a.out_dir.join(format!("diagram_H{}.json", d.degree)), &d)?;
            }
            Ok(())
        }
        Command::Distance(a) => {
            let (d1, d2) = (read_diagram(&a.first)?, read_diagram(&a.second)?);
            println!("{}", format_sig12(wasserstein(&d1, &d2, a.p, a.q)?));
            Ok(())
        }
        Command::Reduce(a) => {
            let cfg = resolve_reduce(&a)?;
            let x = read_points(&a.input)?;
            let (p, trace) = anneal(&x, &cfg.anneal)?;
            write_text(&a.out_proj, &matrix_to_csv(&p.rows()))?;
            if let Some(path) = &a.out_points {
                write_text(path, &matrix_to_csv(&project(&x, &p)?.rows()))?;
            }
            if let Some(path) = &a.out_trace {
                write_text(path, &trace_to_csv(&trace))?;
            }
            eprintln!("best cost {} (chain {})", format_sig12(trace.best_cost), trace.chain);
            echo_config(&cfg, &reduce_outputs(&a))
        }
        Command::ReduceDistributed(a) => {
            let mut cfg = resolve_reduce(&a.reduce)?;
            if let Some(m) = a.parts {
                cfg.parts = m;
            }
            let x = read_points(&a.reduce.input)?;
            let r = distributed_reduce(&x, cfg.parts, &cfg.anneal)?;
            write_text(&a.reduce.out_proj, &matrix_to_csv(&r.projection.rows()))?;
            if let Some(path) = &a.reduce.out_points {
                write_text(path, &matrix_to_csv(&project(&x, &r.projection)?.rows()))?;
            }
            let mut outputs = reduce_outputs(&a.reduce);
            let subset_paths: Vec<PathBuf> = match &a.out_subsets {
                Some(dir) => (0..r.subset_projections.len()).map(|i| dir.join(format!("subset_{i}.csv"))).collect(),
                None => Vec::new(),
            };
            for (path, p) in subset_paths.iter().zip(&r.subset_projections) {
                write_text(path, &matrix_to_csv(&p.rows()))?;
            }
            outputs.extend(subset_paths.iter().map(PathBuf::as_path));
            if let Some(m) = &r.median {
                eprintln!("median: {} iterations, converged = {}", m.iterations, m.converged);
            }
            echo_config(&cfg, &outputs)
        }
        Command::Median(a) => {
            let points = a
                .inputs
                .iter()
                .map(|p| Ok(GrassmannPoint::from(&read_projection(p)?)))
                .collect::<Result<Vec<_>>>()?;
            let m = weiszfeld_median(&points, a.tol, a.max_iter)?;
            eprintln!("{} iterations, converged = {}", m.iterations, m.converged);
            write_text(&a.out, &matrix_to_csv(&m.point.to_projection().rows()))
        }
        Command::Similarity(a) => {
            let mut cfg = RunConfig::load(a.config.as_deref())?;
            a.similarity.apply(&mut cfg.similarity)?;
            let s = &cfg.similarity;
            let (x, p): (_, ProjectionMatrix) = (read_points(&a.input)?, read_projection(&a.proj)?);
            let report = similarity(&x, &p, s.eta.value(), s.l.unwrap_or(1), s.budget)?;
            let v = report.to_json_value();
            match &a.out {
                Some(path) => {
                    write_json(path, &v)?;
                    echo_config(&cfg, &[path])
                }
                None => {
                    println!("{}", serde_json::to_string_pretty(&v)?);
                    Ok(())
                }
            }
        }
        Command::Plot(a) => {
            let svg = match &a.points {
                Some(path) => scatter_svg(&read_points(path)?, &a.title)?,
                None => {
                    let ds = a.diagram.iter().map(|p| read_diagram(p)).collect::<Result<Vec<_>>>()?;
                    diagram_svg(&ds, &a.title)
                }
            };
            write_text(&a.out, &svg)
        }
        Command::Experiment(a) => {
            let mut cfg = RunConfig::load(a.config.as_deref())?;
            a.anneal.apply(&mut cfg.anneal)?;
            a.similarity.apply(&mut cfg.similarity)?;
            let e = &mut cfg.experiment;
            if let Some(name) = &a.name {
                e.name = name.clone();
            }
            if a.seed.is_some() {
                e.seed = a.seed;
            }
            if let Some(n) = a.n {
                e.n = n;
            }
            if let Some(v) = a.noise_var {
                e.noise_var = v;
            }
            if e.seed.is_none() {
                return Err(SpredError::Config("experiments need a master seed (--seed or experiment.seed)".into()));
            }
            let outcome = run_experiment(&cfg.experiment_config())?;
            write_outcome(&outcome, &a.out_dir)?;
            write_text(&a.out_dir.join("run_config.toml"), &cfg.to_toml()?)?;
            println!("{:<14} {:>12} {:>12} {:>10}", "method", "f0", "f1", "mu_quasi");
            for m in &outcome.methods {
                println!("{:<14} {:>12.6} {:>12.6} {:>10.6}", m.name, m.f0, m.f1, m.report.mu_quasi_iso);
            }
            Ok(())
        }
    }
}

/// Parses `args` and runs the command, returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
