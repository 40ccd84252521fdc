//! The topological projection objective and simulated annealing over
//! orthonormal frames.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diagram_distance::wasserstein;
use crate::error::{Result, SpredError};
use crate::geometry::{pairwise_distances, project, PointCloud, ProjectionMatrix};
use crate::linalg::{normalize_column_signs, qr_q_positive, sorted_symmetric_eigen};
use crate::persistence::{rips_diagrams, PersistenceDiagram};

/// Resampling attempts before a rank-deficient perturbation is reported.
pub const PERTURB_RETRIES: usize = 16;

/// Weight of one homology degree in the objective.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrderWeight {
    pub degree: usize,
    pub weight: f64,
}

impl OrderWeight {
    /// Parses `"0:0.5,1:0.5"`. A bare degree such as `"1"` gets weight 1.
    pub fn parse_list(text: &str) -> Result<Vec<OrderWeight>> {
        let bad = |item: &str| SpredError::Config(format!("bad order `{item}`, expected degree:weight"));
        text.split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|item| {
                let (deg, w) = item.split_once(':').unwrap_or((item, "1"));
                let degree = deg.trim().parse().map_err(|_| bad(item))?;
                let weight = w.trim().parse().map_err(|_| bad(item))?;
                Ok(OrderWeight { degree, weight })
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnnealingConfig {
    /// Target dimension.
    pub k: usize,
    pub tau0: f64,
    pub tau_end: f64,
    pub gamma: f64,
    /// Standard deviation of the entrywise Gaussian random walk.
    pub sigma: f64,
    pub steps_per_temp: usize,
    pub seed: u64,
    pub p: f64,
    pub q: f64,
    pub orders: Vec<OrderWeight>,
    /// Weight of the subtracted `tr(PᵀΣP)` variance reward; 0 disables it.
    pub pca_penalty: f64,
    pub chains: usize,
}

impl Default for AnnealingConfig {
    fn default() -> Self {
        Self {
            k: 2,
            tau0: 1.0,
            tau_end: 1e-3,
            gamma: 0.95,
            sigma: 0.1,
            steps_per_temp: 1,
            seed: 0,
            p: 2.0,
            q: 2.0,
            orders: vec![OrderWeight { degree: 0, weight: 1.0 }],
            pca_penalty: 0.0,
            chains: 1,
        }
    }
}

impl AnnealingConfig {
    /// Checks every field and rescales the order weights to sum to one.
    pub fn validated(mut self) -> Result<Self> {
        let fail = |msg: String| Err(SpredError::Config(msg));
        if self.k == 0 {
            return fail("k must be at least 1".into());
        }
        if !(self.tau0 > 0.0 && self.tau0.is_finite()) || !(self.tau_end > 0.0 && self.tau_end.is_finite()) {
            return fail(format!("temperatures must be positive, got tau0 = {} and tau_end = {}", self.tau0, self.tau_end));
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return fail(format!("gamma = {} must lie in (0, 1)", self.gamma));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return fail(format!("sigma = {} must be positive", self.sigma));
        }
        if self.steps_per_temp == 0 || self.chains == 0 {
            return fail("steps_per_temp and chains must be at least 1".into());
        }
        if self.p.is_nan() || self.p < 1.0 || self.q.is_nan() || self.q < 1.0 {
            return fail(format!("p = {} and q = {} must be >= 1", self.p, self.q));
        }
        if !self.pca_penalty.is_finite() || self.pca_penalty < 0.0 {
            return fail(format!("pca_penalty = {} must be a nonnegative number", self.pca_penalty));
        }
        if self.orders.is_empty() {
            return fail("at least one homology degree is required".into());
        }
        if self.orders.iter().any(|o| !o.weight.is_finite() || o.weight < 0.0) {
            return fail("order weights must be finite and nonnegative".into());
        }
        let mut seen = std::collections::BTreeSet::new();
        if !self.orders.iter().all(|o| seen.insert(o.degree)) {
            return fail("each degree may appear only once in orders".into());
        }
        let total: f64 = self.orders.iter().map(|o| o.weight).sum();
        if total <= 0.0 {
            return fail("order weights sum to zero".into());
        }
        for o in &mut self.orders {
            o.weight /= total;
        }
        Ok(self)
    }

    /// Highest homology degree in the objective.
    pub fn max_degree(&self) -> usize {
        self.orders.iter().map(|o| o.degree).max().unwrap_or(0)
    }

    /// Simplex dimension the filtrations are built to.
    pub fn max_dim_hint(&self) -> usize {
        self.max_degree() + 1
    }
}

/// The annealing objective for one point cloud, with the cloud's own
/// diagrams computed once.
pub struct Objective {
    x: PointCloud,
    reference: Vec<PersistenceDiagram>,
    orders: Vec<OrderWeight>,
    p: f64,
    q: f64,
    penalty: f64,
    covariance: DMatrix<f64>,
}

impl Objective {
    pub fn new(x: &PointCloud, cfg: &AnnealingConfig) -> Result<Self> {
        let cfg = cfg.clone().validated()?;
        let reference = rips_diagrams(&pairwise_distances(x), cfg.max_degree());
        Ok(Self {
            x: x.clone(),
            reference,
            covariance: if cfg.pca_penalty > 0.0 { x.covariance() } else { DMatrix::zeros(0, 0) },
            orders: cfg.orders,
            p: cfg.p,
            q: cfg.q,
            penalty: cfg.pca_penalty,
        })
    }

    pub fn cloud(&self) -> &PointCloud {
        &self.x
    }

    pub fn reference_diagrams(&self) -> &[PersistenceDiagram] {
        &self.reference
    }

    /// Weighted Wasserstein discrepancy alone.
    pub fn topological_cost(&self, proj: &ProjectionMatrix) -> Result<f64> {
        let y = project(&self.x, proj)?;
        let max_degree = self.reference.len() - 1;
        let diagrams = rips_diagrams(&pairwise_distances(&y), max_degree);
        let mut total = 0.0;
        for o in &self.orders {
            if o.weight > 0.0 {
                total += o.weight * wasserstein(&self.reference[o.degree], &diagrams[o.degree], self.p, self.q)?;
            }
        }
        Ok(total)
    }

    /// What the annealer minimizes: the topological cost minus the variance reward.
    pub fn value(&self, proj: &ProjectionMatrix) -> Result<f64> {
        let c = self.topological_cost(proj)?;
        if self.penalty == 0.0 {
            return Ok(c);
        }
        let p = proj.matrix();
        Ok(c - self.penalty * (p.transpose() * &self.covariance * p).trace())
    }
}

/// `Σ_j λ_j W_p(D_j(X), D_j(XP))` with normalized weights.
pub fn cost(x: &PointCloud, proj: &ProjectionMatrix, cfg: &AnnealingConfig) -> Result<f64> {
    Objective::new(x, cfg)?.topological_cost(proj)
}

/// Q factor of `P + E` with `E` entrywise `N(0, sigma²)`.
pub fn perturb<R: Rng + ?Sized>(p: &ProjectionMatrix, sigma: f64, rng: &mut R) -> Result<ProjectionMatrix> {
    let normal = Normal::new(0.0, sigma)
        .map_err(|_| SpredError::InvalidInput(format!("sigma = {sigma} is not a valid standard deviation")))?;
    let base = p.matrix();
    for _ in 0..PERTURB_RETRIES {
        let noise = DMatrix::from_fn(base.nrows(), base.ncols(), |_, _| normal.sample(rng));
        if let Some(q) = qr_q_positive(&(base + noise)) {
            return ProjectionMatrix::new(q);
        }
    }
    Err(SpredError::DegenerateQr { retries: PERTURB_RETRIES })
}

/// Metropolis rule: downhill always, uphill iff `u < exp(−δ/τ)`.
/// A NaN difference (e.g. `∞ − ∞`) is rejected.
pub fn accept(delta: f64, tau: f64, u: f64) -> bool {
    if delta.is_nan() {
        false
    } else if delta < 0.0 {
        true
    } else {
        u < (-delta / tau).exp()
    }
}

/// Temperature after `t` cooling steps.
pub fn temperature(cfg: &AnnealingConfig, t: u32) -> f64 {
    cfg.tau0 * cfg.gamma.powi(t as i32)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceStep {
    pub temperature: f64,
    /// Objective value of the proposal.
    pub cost: f64,
    pub accepted: bool,
    pub best_cost: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnnealingTrace {
    pub initial_cost: f64,
    pub steps: Vec<TraceStep>,
    pub best: ProjectionMatrix,
    pub best_cost: f64,
    /// Index of the chain that produced `best`.
    pub chain: usize,
}

/// Anneals a single chain from `start`.
pub fn anneal_from(objective: &Objective, start: ProjectionMatrix, cfg: &AnnealingConfig, seed: u64) -> Result<AnnealingTrace> {
    let cfg = cfg.clone().validated()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut current = start;
    let mut current_cost = objective.value(&current)?;
    let initial_cost = current_cost;
    let mut best = current.clone();
    let mut best_cost = current_cost;
    let mut steps = Vec::new();
    let mut t = 0u32;
    let mut tau = temperature(&cfg, 0);
    while tau > cfg.tau_end {
        for _ in 0..cfg.steps_per_temp {
            let candidate = perturb(&current, cfg.sigma, &mut rng)?;
            let c = objective.value(&candidate)?;
            let u: f64 = rng.random();
            let accepted = accept(c - current_cost, tau, u);
            if accepted {
                current = candidate;
                current_cost = c;
                if c < best_cost {
                    best = current.clone();
                    best_cost = c;
                }
            }
            steps.push(TraceStep { temperature: tau, cost: c, accepted, best_cost });
        }
        t += 1;
        tau = temperature(&cfg, t);
    }
    Ok(AnnealingTrace { initial_cost, steps, best, best_cost, chain: 0 })
}

/// Seed of chain `i`: the master seed itself for chain 0, a splitmix64 mix otherwise.
pub fn derive_seed(master: u64, i: u64) -> u64 {
    if i == 0 {
        return master;
    }
    let mut z = master.wrapping_add(i.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Runs `cfg.chains` independent chains from the PCA frame and keeps the best
/// (lowest chain index on ties).
pub fn anneal(x: &PointCloud, cfg: &AnnealingConfig) -> Result<(ProjectionMatrix, AnnealingTrace)> {
    let cfg = cfg.clone().validated()?;
    let objective = Objective::new(x, &cfg)?;
    let start = pca_projection(x, cfg.k)?.projection;
    let traces: Vec<Result<AnnealingTrace>> = (0..cfg.chains)
        .into_par_iter()
        .map(|i| {
            let mut tr = anneal_from(&objective, start.clone(), &cfg, derive_seed(cfg.seed, i as u64))?;
            tr.chain = i;
            Ok(tr)
        })
        .collect();
    let mut best: Option<AnnealingTrace> = None;
    for tr in traces {
        let tr = tr?;
        if best.as_ref().is_none_or(|b| tr.best_cost < b.best_cost) {
            best = Some(tr);
        }
    }
    let best = best.expect("at least one chain");
    Ok((best.best.clone(), best))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PcaResult {
    pub projection: ProjectionMatrix,
    /// Eigenvalues of the covariance, descending.
    pub variances: Vec<f64>,
    /// Fewer than `k` directions carry variance; the rest of the frame is an
    /// arbitrary orthonormal completion.
    pub rank_deficient: bool,
}

/// Top-`k` principal directions of the mean-centered cloud.
pub fn pca_projection(x: &PointCloud, k: usize) -> Result<PcaResult> {
    if x.len() < 2 {
        return Err(SpredError::InvalidInput("PCA needs at least two points".into()));
    }
    let n = x.dim();
    if k == 0 || k > n {
        return Err(SpredError::InvalidInput(format!("cannot project R^{n} onto {k} dimensions")));
    }
    let (variances, vectors) = sorted_symmetric_eigen(&x.covariance());
    let mut frame = vectors.columns(0, k).into_owned();
    normalize_column_signs(&mut frame);
    let top = variances[0].abs().max(f64::MIN_POSITIVE);
    let rank_deficient = variances[k - 1] <= 1e-12 * top;
    Ok(PcaResult { projection: ProjectionMatrix::new(frame)?, variances, rank_deficient })
}

/// Orthonormalized `n × k` standard Gaussian matrix.
pub fn random_projection<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Result<ProjectionMatrix> {
    if k == 0 || k > n {
        return Err(SpredError::InvalidInput(format!("cannot project R^{n} onto {k} dimensions")));
    }
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    for _ in 0..PERTURB_RETRIES {
        let g = DMatrix::from_fn(n, k, |_, _| normal.sample(rng));
        if let Some(q) = qr_q_positive(&g) {
            return ProjectionMatrix::new(q);
        }
    }
    Err(SpredError::DegenerateQr { retries: PERTURB_RETRIES })
}
