//! Synthetic and bundled point clouds.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Result, SpredError};
use crate::geometry::PointCloud;
use crate::io::parse_matrix_csv;

const IRIS_CSV: &str = include_str!("../data/iris.csv");

/// `n` points on the unit cylinder `S¹ × [−2, 2]` in R³: uniform angle,
/// uniform height, then isotropic Gaussian noise of variance `noise_var`.
pub fn sample_cylinder(n: usize, noise_var: f64, seed: u64) -> Result<PointCloud> {
    if n == 0 {
        return Err(SpredError::InvalidInput("sample size must be positive".into()));
    }
    if !(noise_var >= 0.0 && noise_var.is_finite()) {
        return Err(SpredError::InvalidInput(format!("noise variance {noise_var} must be nonnegative")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, noise_var.sqrt()).expect("nonnegative standard deviation");
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            let theta = rng.random_range(0.0..std::f64::consts::TAU);
            let z = rng.random_range(-2.0..=2.0);
            let mut p = [theta.cos(), theta.sin(), z];
            if noise_var > 0.0 {
                for v in &mut p {
                    *v += noise.sample(&mut rng);
                }
            }
            p.to_vec()
        })
        .collect();
    PointCloud::from_rows(&rows)
}

/// Fisher's iris measurements: 150 flowers, 50 per species, four columns
/// (sepal length, sepal width, petal length, petal width) in centimetres.
pub fn iris() -> PointCloud {
    PointCloud::from_rows(&parse_matrix_csv(IRIS_CSV).expect("bundled iris data parses")).expect("bundled iris data is valid")
}
