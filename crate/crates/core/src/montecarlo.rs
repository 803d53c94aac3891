//! Random suites and the scaling of the approximable fraction with `eps`.
//!
//! Sample `i` of a run draws from a ChaCha8 generator seeded with the run
//! seed and switched to stream `i`, so results do not depend on how samples
//! are scheduled across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::random_unit_vector;
use crate::projective::ProjectivePoint;
use crate::suites::{fit_suite, FitOptions, Suite};

/// Fit restarts used per sample inside the scaling pipeline.
pub const PIPELINE_RESTARTS: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub n: usize,
    pub ell: usize,
    pub eps_grid: Vec<f64>,
    pub fractions: Vec<f64>,
    pub slope: f64,
    pub predicted_exponent: f64,
    pub samples_per_eps: usize,
    pub seed: u64,
    #[serde(default)]
    pub notes: Vec<String>,
}

/// Predicted exponent `2 (ell - n - 1)(n - 1)` of the approximable volume.
pub fn predicted_exponent(n: usize, ell: usize) -> f64 {
    2.0 * (ell as f64 - n as f64 - 1.0) * (n as f64 - 1.0)
}

fn random_point<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ProjectivePoint {
    ProjectivePoint::new(random_unit_vector(rng, n)).expect("unit vectors are nonzero")
}

/// `2 ell` independent Fubini-Study uniform points of `CP^{n-1}`. The domain
/// half is redrawn in the (probability zero) event that two points coincide.
pub fn sample_suite<R: Rng + ?Sized>(n: usize, ell: usize, rng: &mut R) -> Result<Suite> {
    if n < 2 || ell < 1 {
        return Err(Error::BadOptions(format!("need n >= 2 and ell >= 1, got n = {n}, ell = {ell}")));
    }
    let range: Vec<_> = (0..ell).map(|_| random_point(rng, n)).collect();
    loop {
        let domain: Vec<_> = (0..ell).map(|_| random_point(rng, n)).collect();
        if let Ok(s) = Suite::new(domain, range.clone()) {
            return Ok(s);
        }
    }
}

/// Generator for sample `index` of a run seeded with `seed`.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn check_grid(eps_grid: &[f64]) -> Result<()> {
    if eps_grid.is_empty() {
        return Err(Error::BadOptions("empty eps grid".into()));
    }
    if eps_grid.iter().any(|e| !(*e > 0.0) || !e.is_finite()) {
        return Err(Error::BadOptions("eps values must be positive and finite".into()));
    }
    if eps_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::BadOptions("eps grid must be strictly increasing".into()));
    }
    Ok(())
}

/// Fraction of sampled suites found to be `eps`-approximable, for every
/// `eps` in the grid. Each suite is fitted once and the fit is compared with
/// every grid value, so the fractions are nondecreasing in `eps`.
///
/// The fit is a heuristic upper bound on the distance to PL, so each
/// fraction is a lower bound on the true one.
pub fn estimate_fractions(
    n: usize,
    ell: usize,
    eps_grid: &[f64],
    samples: usize,
    seed: u64,
    restarts: usize,
) -> Result<Vec<f64>> {
    check_grid(eps_grid)?;
    if samples == 0 {
        return Err(Error::BadOptions("samples must be positive".into()));
    }
    let distances = (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = sample_rng(seed, i);
            let sigma = sample_suite(n, ell, &mut rng)?;
            let opts = FitOptions {
                restarts,
                max_iters: FitOptions::default().max_iters,
                seed: rng.random(),
            };
            Ok(fit_suite(&sigma, &opts)?.max_fs)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(eps_grid
        .iter()
        .map(|&eps| distances.iter().filter(|&&d| d < eps).count() as f64 / samples as f64)
        .collect())
}

pub fn estimate_fraction(n: usize, ell: usize, eps: f64, samples: usize, seed: u64) -> Result<f64> {
    Ok(estimate_fractions(n, ell, &[eps], samples, seed, PIPELINE_RESTARTS)?[0])
}

/// Least-squares slope of `log fraction` against `log eps`. Grid points whose
/// fraction is 0 or 1 are left out and listed in `notes`.
pub fn fit_scaling(
    n: usize,
    ell: usize,
    eps_grid: &[f64],
    fractions: &[f64],
    samples_per_eps: usize,
    seed: u64,
) -> Result<ScalingReport> {
    check_grid(eps_grid)?;
    if fractions.len() != eps_grid.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} fractions for {} grid points",
            fractions.len(),
            eps_grid.len()
        )));
    }
    let mut notes = Vec::new();
    let mut pts = Vec::new();
    for (&e, &f) in eps_grid.iter().zip(fractions) {
        if f > 0.0 && f < 1.0 {
            pts.push((e.ln(), f.ln()));
        } else {
            notes.push(format!("eps = {e}: fraction {f} excluded from the fit"));
        }
    }
    if pts.len() < 3 {
        return Err(Error::DegenerateGrid(pts.len()));
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Ok(ScalingReport {
        n,
        ell,
        eps_grid: eps_grid.to_vec(),
        fractions: fractions.to_vec(),
        slope: sxy / sxx,
        predicted_exponent: predicted_exponent(n, ell),
        samples_per_eps: samples_per_eps,
        seed,
        notes,
    })
}

/// Samples, fits and reports in one call.
pub fn run_scaling(
    n: usize,
    ell: usize,
    eps_grid: &[f64],
    samples: usize,
    seed: u64,
    restarts: usize,
) -> Result<ScalingReport> {
    let fractions = estimate_fractions(n, ell, eps_grid, samples, seed, restarts)?;
    fit_scaling(n, ell, eps_grid, &fractions, samples, seed)
}
