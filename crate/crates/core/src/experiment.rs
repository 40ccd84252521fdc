//! The cylinder and iris comparisons: PCA, a random frame and the annealed
//! projections of order 0 and order 1, each scored by both topological costs
//! and by the similarity measures.

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::datasets::{iris, sample_cylinder};
use crate::equivalence::{similarity, SimilarityReport, DEFAULT_BUDGET};
use crate::error::{Result, SpredError};
use crate::geometry::{pairwise_distances, project, PointCloud, ProjectionMatrix};
use crate::io::{matrix_to_csv, trace_to_csv, write_diagram, write_json, write_text};
use crate::optimizer::{anneal, cost, derive_seed, pca_projection, random_projection, AnnealingConfig, AnnealingTrace, OrderWeight};
use crate::persistence::{rips_diagrams, PersistenceDiagram};
use crate::plot::{diagram_svg, scatter_svg};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// `cylinder` or `iris`.
    pub name: String,
    /// Master seed; required.
    pub seed: Option<u64>,
    /// Cylinder sample size.
    pub n: usize,
    /// Cylinder noise variance.
    pub noise_var: f64,
    /// Homology level for the similarity measures; 1 for the cylinder and 0
    /// for iris when unset.
    pub l: Option<usize>,
    /// Canonical-embedding shift; half the smallest contraction when unset.
    pub eta: Option<f64>,
    pub budget: usize,
    /// Annealing settings shared by both annealed methods; `orders` and
    /// `seed` are set per method.
    pub anneal: AnnealingConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            name: "cylinder".into(),
            seed: None,
            n: 100,
            noise_var: 0.05,
            l: None,
            eta: None,
            budget: DEFAULT_BUDGET,
            anneal: AnnealingConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn level(&self) -> usize {
        self.l.unwrap_or(if self.name == "iris" { 0 } else { 1 })
    }

    pub fn data(&self) -> Result<PointCloud> {
        match self.name.as_str() {
            "cylinder" => sample_cylinder(self.n, self.noise_var, self.master_seed()?),
            "iris" => Ok(iris()),
            other => Err(SpredError::Config(format!("unknown experiment `{other}` (expected cylinder or iris)"))),
        }
    }

    fn master_seed(&self) -> Result<u64> {
        self.seed.ok_or_else(|| SpredError::Config("experiments need an explicit seed".into()))
    }
}

pub const METHODS: [&str; 4] = ["pca", "random", "spred_order0", "spred_order1"];

#[derive(Debug, Clone)]
pub struct MethodOutcome {
    pub name: &'static str,
    pub projection: ProjectionMatrix,
    pub trace: Option<AnnealingTrace>,
    pub points: PointCloud,
    pub diagrams: Vec<PersistenceDiagram>,
    pub f0: f64,
    pub f1: f64,
    pub report: SimilarityReport,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub config: ExperimentConfig,
    pub data: PointCloud,
    pub diagrams: Vec<PersistenceDiagram>,
    pub methods: Vec<MethodOutcome>,
}

impl ExperimentOutcome {
    pub fn method(&self, name: &str) -> Option<&MethodOutcome> {
        self.methods.iter().find(|m| m.name == name)
    }

    pub fn summary(&self) -> Value {
        let c = &self.config;
        json!({
            "experiment": c.name,
            "seed": c.seed,
            "points": self.data.len(),
            "ambient_dim": self.data.dim(),
            "k": c.anneal.k,
            "l": c.level(),
            "p": c.anneal.p,
            "q": c.anneal.q,
            "original": {
                "h0_max_persistence": self.diagrams[0].max_finite_persistence(),
                "h1_max_persistence": self.diagrams[1].max_finite_persistence(),
            },
            "methods": self.methods.iter().map(|m| json!({
                "name": m.name,
                "f0": m.f0,
                "f1": m.f1,
                "mu_quasi_iso": m.report.mu_quasi_iso,
                "mu_equiv": [m.report.mu_equiv_lower, m.report.mu_equiv_upper],
                "eta": m.report.eta,
                "h1_max_persistence": m.diagrams[1].max_finite_persistence(),
                "annealed_objective": m.trace.as_ref().map(|t| t.best_cost),
            })).collect::<Vec<_>>(),
        })
    }
}

fn with_order(base: &AnnealingConfig, degree: usize, seed: u64) -> AnnealingConfig {
    AnnealingConfig { orders: vec![OrderWeight { degree, weight: 1.0 }], seed, ..base.clone() }
}

/// Runs all four methods (concurrently) and scores them.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutcome> {
    run_methods(config, &METHODS)
}

/// Like [`run_experiment`] restricted to some of [`METHODS`]. Each method's
/// result does not depend on which others run.
pub fn run_methods(config: &ExperimentConfig, names: &[&str]) -> Result<ExperimentOutcome> {
    let selected: Vec<&'static str> = METHODS.iter().copied().filter(|m| names.contains(m)).collect();
    if let Some(bad) = names.iter().find(|n| !METHODS.contains(n)) {
        return Err(SpredError::Config(format!("unknown method `{bad}`")));
    }
    let seed = config.master_seed()?;
    let base = config.anneal.clone().validated()?;
    let x = config.data()?;
    if base.k > x.dim() {
        return Err(SpredError::Config(format!("k = {} exceeds the data dimension {}", base.k, x.dim())));
    }
    let diagrams = rips_diagrams(&pairwise_distances(&x), 1);
    let projections: Vec<Result<(ProjectionMatrix, Option<AnnealingTrace>)>> = selected
        .par_iter()
        .map(|&name| match name {
            "pca" => Ok((pca_projection(&x, base.k)?.projection, None)),
            "random" => {
                let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 1000));
                Ok((random_projection(x.dim(), base.k, &mut rng)?, None))
            }
            _ => {
                let degree = usize::from(name == "spred_order1");
                let (p, trace) = anneal(&x, &with_order(&base, degree, derive_seed(seed, degree as u64 + 1)))?;
                Ok((p, Some(trace)))
            }
        })
        .collect();
    let cost_cfg = |degree| with_order(&base, degree, seed);
    let mut methods = Vec::with_capacity(selected.len());
    for (name, r) in selected.iter().zip(projections) {
        let (projection, trace) = r?;
        let points = project(&x, &projection)?;
        methods.push(MethodOutcome {
            name,
            diagrams: rips_diagrams(&pairwise_distances(&points), 1),
            f0: cost(&x, &projection, &cost_cfg(0))?,
            f1: cost(&x, &projection, &cost_cfg(1))?,
            report: similarity(&x, &projection, config.eta, config.level(), config.budget)?,
            points,
            projection,
            trace,
        });
    }
    Ok(ExperimentOutcome { config: config.clone(), data: x, diagrams, methods })
}

/// Writes every artifact of an outcome below `dir`.
pub fn write_outcome(outcome: &ExperimentOutcome, dir: &Path) -> Result<()> {
    write_json(&dir.join("summary.json"), &outcome.summary())?;
    let original = dir.join("original");
    write_text(&original.join("points.csv"), &matrix_to_csv(&outcome.data.rows()))?;
    write_diagrams(&original, &outcome.diagrams, "original")?;
    for m in &outcome.methods {
        let d = dir.join(m.name);
        write_text(&d.join("projection.csv"), &matrix_to_csv(&m.projection.rows()))?;
        write_text(&d.join("points.csv"), &matrix_to_csv(&m.points.rows()))?;
        write_diagrams(&d, &m.diagrams, m.name)?;
        write_json(&d.join("similarity.json"), &m.report.to_json_value())?;
        if m.points.dim() == 2 {
            write_text(&d.join("points.svg"), &scatter_svg(&m.points, m.name)?)?;
        }
        if let Some(t) = &m.trace {
            write_text(&d.join("trace.csv"), &trace_to_csv(t))?;
        }
    }
    Ok(())
}

fn write_diagrams(dir: &Path, diagrams: &[PersistenceDiagram], title: &str) -> Result<()> {
    for d in diagrams {
        write_diagram(&dir.join(format!("diagram_H{}.json", d.degree)), d)?;
    }
    write_text(&dir.join("diagram.svg"), &diagram_svg(diagrams, title))
}
