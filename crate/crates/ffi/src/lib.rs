//! C interface to spred. Objects cross the boundary as opaque handles that
//! the caller frees; every fallible call returns a [`SpredStatus`] and leaves
//! a message for [`spred_last_error`] on failure. Matrices are row-major.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use spred::diagram_distance::wasserstein;
use spred::equivalence::similarity;
use spred::geometry::{pairwise_distances, project, PointCloud, ProjectionMatrix};
use spred::optimizer::{anneal, pca_projection, AnnealingConfig, OrderWeight};
use spred::persistence::{rips_diagrams, PersistenceDiagram};
use spred::SpredError;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpredStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    Numerical = 3,
    Config = 4,
    BufferTooSmall = 5,
    Panic = 6,
}

pub struct SpredCloud(PointCloud);
pub struct SpredProjection(ProjectionMatrix);
pub struct SpredDiagram(PersistenceDiagram);

/// Annealing settings. Orders are given as weights of degrees 0 and 1; they
/// are rescaled to sum to one.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct SpredAnnealConfig {
    pub k: usize,
    pub weight0: f64,
    pub weight1: f64,
    pub p: f64,
    pub q: f64,
    pub tau0: f64,
    pub tau_end: f64,
    pub gamma: f64,
    pub sigma: f64,
    pub steps_per_temp: usize,
    pub chains: usize,
    pub seed: u64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct SpredSimilarity {
    pub eta: f64,
    pub mu_quasi_iso: f64,
    pub mu_equiv_lower: f64,
    pub mu_equiv_upper: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(SpredStatus, String);

impl From<SpredError> for Failure {
    fn from(e: SpredError) -> Self {
        let status = match e.exit_code() {
            3 => SpredStatus::Numerical,
            4 => SpredStatus::Config,
            _ => SpredStatus::InvalidInput,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(SpredStatus::NullPointer, format!("`{what}` is null"))
}

/// Runs `f`, turning errors and panics into a status and a stored message.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> SpredStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SpredStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            SpredStatus::Panic
        }
    }
}

unsafe fn matrix_rows(data: *const f64, rows: usize, cols: usize) -> Result<Vec<Vec<f64>>, Failure> {
    if data.is_null() {
        return Err(null("data"));
    }
    let len = rows.checked_mul(cols).ok_or_else(|| Failure(SpredStatus::InvalidInput, "size overflows".into()))?;
    let flat = std::slice::from_raw_parts(data, len);
    Ok(flat.chunks(cols.max(1)).take(rows).map(<[f64]>::to_vec).collect())
}

unsafe fn write_out<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("out"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn copy_rows(rows: Vec<Vec<f64>>, out: *mut f64, len: usize) -> Result<(), Failure> {
    let flat: Vec<f64> = rows.into_iter().flatten().collect();
    if flat.len() > len {
        return Err(Failure(SpredStatus::BufferTooSmall, format!("need {} values, buffer holds {len}", flat.len())));
    }
    if out.is_null() {
        return Err(null("out"));
    }
    ptr::copy_nonoverlapping(flat.as_ptr(), out, flat.len());
    Ok(())
}

unsafe fn borrow<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

/// Message of the last failure on this thread, or null. Valid until the next
/// failing call on the same thread.
#[no_mangle]
pub extern "C" fn spred_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `data` must hold `rows * cols` readable doubles.
#[no_mangle]
pub unsafe extern "C" fn spred_cloud_new(data: *const f64, rows: usize, cols: usize, out: *mut *mut SpredCloud) -> SpredStatus {
    guard(|| {
        let cloud = PointCloud::from_rows(&matrix_rows(data, rows, cols)?)?;
        write_out(out, SpredCloud(cloud))
    })
}

/// # Safety
/// `cloud` must come from this library and not be freed twice; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn spred_cloud_free(cloud: *mut SpredCloud) {
    if !cloud.is_null() {
        drop(Box::from_raw(cloud));
    }
}

/// Number of points, or 0 for null.
///
/// # Safety
/// `cloud` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn spred_cloud_len(cloud: *const SpredCloud) -> usize {
    cloud.as_ref().map_or(0, |c| c.0.len())
}

/// # Safety
/// `cloud` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn spred_cloud_dim(cloud: *const SpredCloud) -> usize {
    cloud.as_ref().map_or(0, |c| c.0.dim())
}

/// Copies the points into `out` (row-major, `len` doubles available).
///
/// # Safety
/// `cloud` must be a live handle and `out` must hold `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn spred_cloud_copy(cloud: *const SpredCloud, out: *mut f64, len: usize) -> SpredStatus {
    guard(|| copy_rows(borrow(cloud, "cloud")?.0.rows(), out, len))
}

/// An `n x k` matrix with orthonormal columns.
///
/// # Safety
/// `data` must hold `n * k` readable doubles.
#[no_mangle]
pub unsafe extern "C" fn spred_projection_new(data: *const f64, n: usize, k: usize, out: *mut *mut SpredProjection) -> SpredStatus {
    guard(|| {
        let p = ProjectionMatrix::from_rows(&matrix_rows(data, n, k)?)?;
        write_out(out, SpredProjection(p))
    })
}

/// # Safety
/// `proj` must come from this library and not be freed twice; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn spred_projection_free(proj: *mut SpredProjection) {
    if !proj.is_null() {
        drop(Box::from_raw(proj));
    }
}

/// # Safety
/// `proj` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn spred_projection_ambient_dim(proj: *const SpredProjection) -> usize {
    proj.as_ref().map_or(0, |p| p.0.ambient_dim())
}

/// # Safety
/// `proj` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn spred_projection_target_dim(proj: *const SpredProjection) -> usize {
    proj.as_ref().map_or(0, |p| p.0.target_dim())
}

/// # Safety
/// `proj` must be a live handle and `out` must hold `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn spred_projection_copy(proj: *const SpredProjection, out: *mut f64, len: usize) -> SpredStatus {
    guard(|| copy_rows(borrow(proj, "proj")?.0.rows(), out, len))
}

/// The top `k` principal directions.
///
/// # Safety
/// `cloud` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn spred_pca(cloud: *const SpredCloud, k: usize, out: *mut *mut SpredProjection) -> SpredStatus {
    guard(|| {
        let r = pca_projection(&borrow(cloud, "cloud")?.0, k)?;
        write_out(out, SpredProjection(r.projection))
    })
}

/// The library defaults: `k = 2`, order 0, `p = q = 2`, one chain, seed 0.
#[no_mangle]
pub extern "C" fn spred_anneal_config_default() -> SpredAnnealConfig {
    let d = AnnealingConfig::default();
    SpredAnnealConfig {
        k: d.k,
        weight0: 1.0,
        weight1: 0.0,
        p: d.p,
        q: d.q,
        tau0: d.tau0,
        tau_end: d.tau_end,
        gamma: d.gamma,
        sigma: d.sigma,
        steps_per_temp: d.steps_per_temp,
        chains: d.chains,
        seed: d.seed,
    }
}

fn to_config(c: &SpredAnnealConfig) -> AnnealingConfig {
    let orders = [(0, c.weight0), (1, c.weight1)]
        .into_iter()
        .filter(|&(_, w)| w != 0.0)
        .map(|(degree, weight)| OrderWeight { degree, weight })
        .collect();
    AnnealingConfig {
        k: c.k,
        tau0: c.tau0,
        tau_end: c.tau_end,
        gamma: c.gamma,
        sigma: c.sigma,
        steps_per_temp: c.steps_per_temp,
        seed: c.seed,
        p: c.p,
        q: c.q,
        orders,
        chains: c.chains,
        ..AnnealingConfig::default()
    }
}

/// Anneals a projection; `best_cost` may be null.
///
/// # Safety
/// `cloud` and `config` must be valid pointers and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn spred_anneal(
    cloud: *const SpredCloud,
    config: *const SpredAnnealConfig,
    out: *mut *mut SpredProjection,
    best_cost: *mut f64,
) -> SpredStatus {
    guard(|| {
        let cfg = to_config(borrow(config, "config")?);
        let (p, trace) = anneal(&borrow(cloud, "cloud")?.0, &cfg)?;
        if !best_cost.is_null() {
            *best_cost = trace.best_cost;
        }
        write_out(out, SpredProjection(p))
    })
}

/// # Safety
/// `cloud` and `proj` must be live handles and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn spred_project(cloud: *const SpredCloud, proj: *const SpredProjection, out: *mut *mut SpredCloud) -> SpredStatus {
    guard(|| {
        let y = project(&borrow(cloud, "cloud")?.0, &borrow(proj, "proj")?.0)?;
        write_out(out, SpredCloud(y))
    })
}

/// Rips persistence diagram of the given degree (radius scale).
///
/// # Safety
/// `cloud` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn spred_diagram(cloud: *const SpredCloud, degree: usize, out: *mut *mut SpredDiagram) -> SpredStatus {
    guard(|| {
        let x = &borrow(cloud, "cloud")?.0;
        let mut dgs = rips_diagrams(&pairwise_distances(x), degree);
        write_out(out, SpredDiagram(dgs.swap_remove(degree)))
    })
}

/// Builds a diagram from `len` pairs; an infinite death marks an essential class.
///
/// # Safety
/// `births` and `deaths` must each hold `len` readable doubles.
#[no_mangle]
pub unsafe extern "C" fn spred_diagram_new(
    degree: usize,
    births: *const f64,
    deaths: *const f64,
    len: usize,
    out: *mut *mut SpredDiagram,
) -> SpredStatus {
    guard(|| {
        if len > 0 && (births.is_null() || deaths.is_null()) {
            return Err(null("births or deaths"));
        }
        let pairs = (0..len)
            .map(|i| spred::persistence::PersistencePair::new(*births.add(i), *deaths.add(i)))
            .collect();
        write_out(out, SpredDiagram(PersistenceDiagram::new(degree, pairs)?))
    })
}

/// # Safety
/// `diagram` must come from this library and not be freed twice; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn spred_diagram_free(diagram: *mut SpredDiagram) {
    if !diagram.is_null() {
        drop(Box::from_raw(diagram));
    }
}

/// Number of pairs, or 0 for null.
///
/// # Safety
/// `diagram` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn spred_diagram_len(diagram: *const SpredDiagram) -> usize {
    diagram.as_ref().map_or(0, |d| d.0.len())
}

/// Copies births and deaths (infinite for essential classes).
///
/// # Safety
/// `diagram` must be a live handle; `births` and `deaths` must each hold
/// `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn spred_diagram_copy(diagram: *const SpredDiagram, births: *mut f64, deaths: *mut f64, len: usize) -> SpredStatus {
    guard(|| {
        let pairs = borrow(diagram, "diagram")?.0.pairs();
        if pairs.len() > len {
            return Err(Failure(SpredStatus::BufferTooSmall, format!("need {} pairs, buffer holds {len}", pairs.len())));
        }
        if births.is_null() || deaths.is_null() {
            return Err(null("births or deaths"));
        }
        for (i, p) in pairs.iter().enumerate() {
            *births.add(i) = p.birth;
            *deaths.add(i) = p.death;
        }
        Ok(())
    })
}

/// `p`-Wasserstein distance with ground `q`-norm; infinite `p` gives the
/// bottleneck distance.
///
/// # Safety
/// Both diagrams must be live handles and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn spred_wasserstein(a: *const SpredDiagram, b: *const SpredDiagram, p: f64, q: f64, out: *mut f64) -> SpredStatus {
    guard(|| {
        let d = wasserstein(&borrow(a, "a")?.0, &borrow(b, "b")?.0, p, q)?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = d;
        Ok(())
    })
}

/// Similarity measures of the canonical embedding. A negative or NaN `eta`
/// selects the automatic value.
///
/// # Safety
/// `cloud` and `proj` must be live handles and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn spred_similarity(
    cloud: *const SpredCloud,
    proj: *const SpredProjection,
    eta: f64,
    l: usize,
    budget: usize,
    out: *mut SpredSimilarity,
) -> SpredStatus {
    guard(|| {
        let eta = (eta >= 0.0).then_some(eta);
        let r = similarity(&borrow(cloud, "cloud")?.0, &borrow(proj, "proj")?.0, eta, l, budget)?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = SpredSimilarity {
            eta: r.eta,
            mu_quasi_iso: r.mu_quasi_iso,
            mu_equiv_lower: r.mu_equiv_lower,
            mu_equiv_upper: r.mu_equiv_upper,
        };
        Ok(())
    })
}
