//! Heuristic distance from a suite to the nearest PL suite.
//!
//! The search runs over an operator `L` and over domain points `d_i` near the
//! suite's own domain, minimizing the largest of the `2 ell` distances
//! `FS(p_i, d_i)` and `FS(p_{ell+i}, QL(d_i))`. The result is an upper bound
//! on the true distance; nothing certifies that it is the minimum.

use std::f64::consts::FRAC_PI_2;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{border_operator, exact_realize_suite, realization_system, Suite};
use crate::error::{Error, Result};
use crate::linalg::{
    norm, orthonormal_completion, random_gaussian, svd, ComplexMatrix, C64,
};
use crate::projective::{
    combinations, fs_distance_vectors, in_general_position, pl_from_correspondence,
    ProjectivePoint,
};
use crate::search::{pattern_search, SearchOptions};

/// Relative determinant below which an operator is treated as singular.
const DET_BARRIER: f64 = 1e-12;
/// A fit this good ends the restart loop early.
const GOOD_ENOUGH: f64 = 1e-12;
/// Soft-max temperatures used before the final pass on the true maximum.
const TEMPERATURES: [f64; 2] = [1e-2, 1e-3];
const INITIAL_STEP: f64 = 0.1;
const BORDER_START_K: f64 = 1e3;
/// Step floors for the smoothed stages and for the final pass.
const SMOOTH_MIN_STEP: f64 = 1e-6;
const MIN_STEP: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FitOptions {
    pub restarts: usize,
    /// Pattern-search iterations per stage of each restart.
    pub max_iters: usize,
    pub seed: u64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            restarts: 20,
            max_iters: 500,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct FitResult {
    /// The PL suite `(d, QL(d))` found by the search.
    pub tau: Suite,
    pub l: ComplexMatrix,
    /// Largest FS distance between corresponding points of `sigma` and `tau`.
    pub max_fs: f64,
    /// Whether the step size of the best restart fell below its floor.
    pub converged: bool,
}

/// Buffers reused across objective evaluations.
struct Scratch {
    l: Vec<C64>,
    lu: Vec<C64>,
    d: Vec<C64>,
    image: Vec<C64>,
    dist: Vec<f64>,
}

/// `|det|` of a row-major `n x n` matrix by in-place elimination with
/// partial pivoting.
fn abs_determinant(a: &mut [C64], n: usize) -> f64 {
    let mut det = 1.0;
    for k in 0..n {
        let p = (k..n)
            .max_by(|&i, &j| a[i * n + k].norm().total_cmp(&a[j * n + k].norm()))
            .unwrap_or(k);
        let pivot = a[p * n + k];
        if pivot.norm() == 0.0 {
            return 0.0;
        }
        if p != k {
            for c in 0..n {
                a.swap(k * n + c, p * n + c);
            }
        }
        det *= pivot.norm();
        for r in k + 1..n {
            let f = a[r * n + k] / pivot;
            for c in k..n {
                let v = a[k * n + c];
                a[r * n + c] -= f * v;
            }
        }
    }
    det
}

/// Precomputed data for the objective.
struct Problem {
    n: usize,
    ell: usize,
    domain: Vec<Vec<C64>>,
    range: Vec<Vec<C64>>,
    /// Orthonormal basis of the complement of each domain point.
    tangents: Vec<Vec<Vec<C64>>>,
}

impl Problem {
    fn new(sigma: &Suite) -> Result<Self> {
        let n = sigma.n();
        let domain: Vec<Vec<C64>> = sigma.domain().iter().map(|p| p.coords().to_vec()).collect();
        let range = sigma.range().iter().map(|p| p.coords().to_vec()).collect();
        let tangents = domain
            .iter()
            .map(|v| {
                let u = orthonormal_completion(&ComplexMatrix::column_vector(v), n)?;
                Ok((1..n).map(|j| u.column(j)).collect())
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            n,
            ell: sigma.ell(),
            domain,
            range,
            tangents,
        })
    }

    fn operator_len(&self) -> usize {
        2 * self.n * self.n
    }

    fn dim(&self) -> usize {
        self.operator_len() + 2 * (self.n - 1) * self.ell
    }

    fn operator(&self, x: &[f64]) -> ComplexMatrix {
        let n = self.n;
        ComplexMatrix::from_fn(n, n, |r, c| {
            let k = 2 * (r * n + c);
            C64::new(x[k], x[k + 1])
        })
    }

    fn encode_operator(&self, l: &ComplexMatrix, x: &mut [f64]) {
        let s = 1.0 / l.frobenius_norm();
        for (k, z) in l.data().iter().enumerate() {
            x[2 * k] = z.re * s;
            x[2 * k + 1] = z.im * s;
        }
    }

    fn moved_domain_point(&self, x: &[f64], i: usize, out: &mut [C64]) {
        let base = self.operator_len() + 2 * (self.n - 1) * i;
        out.copy_from_slice(&self.domain[i]);
        for (j, t) in self.tangents[i].iter().enumerate() {
            let c = C64::new(x[base + 2 * j], x[base + 2 * j + 1]);
            for (o, e) in out.iter_mut().zip(t) {
                *o += c * e;
            }
        }
    }

    /// The `2 ell` distances, or `false` when `L` is numerically singular.
    fn distances(&self, x: &[f64], scratch: &mut Scratch) -> bool {
        let n = self.n;
        let nn = n * n;
        let Scratch { l, lu, d, image, dist } = scratch;
        for (k, z) in l.iter_mut().enumerate() {
            *z = C64::new(x[2 * k], x[2 * k + 1]);
        }
        let frob = l.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if frob == 0.0 || !frob.is_finite() {
            return false;
        }
        lu[..nn].copy_from_slice(l);
        if abs_determinant(lu, n) < DET_BARRIER * (frob / (n as f64).sqrt()).powi(n as i32) {
            return false;
        }
        dist.clear();
        for i in 0..self.ell {
            self.moved_domain_point(x, i, d);
            dist.push(fs_distance_vectors(&self.domain[i], d));
            for (r, slot) in image.iter_mut().enumerate() {
                *slot = l[r * n..(r + 1) * n].iter().zip(d.iter()).map(|(a, b)| a * b).sum();
            }
            dist.push(if norm(image) <= 1e-300 {
                FRAC_PI_2
            } else {
                fs_distance_vectors(&self.range[i], image)
            });
        }
        true
    }

    /// Soft maximum at temperature `t`, or the plain maximum for `t = 0`.
    fn objective(&self, t: f64) -> impl FnMut(&[f64]) -> f64 + '_ {
        let zero = C64::new(0.0, 0.0);
        let mut scratch = Scratch {
            l: vec![zero; self.n * self.n],
            lu: vec![zero; self.n * self.n],
            d: vec![zero; self.n],
            image: vec![zero; self.n],
            dist: Vec::with_capacity(2 * self.ell),
        };
        move |x: &[f64]| {
            if !self.distances(x, &mut scratch) {
                return f64::INFINITY;
            }
            let dist = &scratch.dist;
            let top = dist.iter().copied().fold(0.0, f64::max);
            if t == 0.0 {
                top
            } else {
                top + t * dist.iter().map(|v| ((v - top) / t).exp()).sum::<f64>().ln()
            }
        }
    }

    fn max_fs(&self, x: &[f64]) -> f64 {
        self.objective(0.0)(x)
    }

    fn moved_domain(&self, x: &[f64]) -> Result<Vec<ProjectivePoint>> {
        let mut d = vec![C64::new(0.0, 0.0); self.n];
        (0..self.ell)
            .map(|i| {
                self.moved_domain_point(x, i, &mut d);
                ProjectivePoint::new(d.clone())
            })
            .collect()
    }
}

/// Starting operators: the algebraic least-squares fit, then exact PL maps
/// through `n + 1` of the correspondences, then Gaussian operators.
fn starting_operator(sigma: &Suite, restart: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    let n = sigma.n();
    if restart == 0 {
        if let Ok(s) = svd(&realization_system(sigma)) {
            let x = s.right_vectors.column(s.right_vectors.cols() - 1);
            let l = ComplexMatrix::from_fn(n, n, |r, c| x[r * n + c]);
            if l.max_abs() > 0.0 {
                return l;
            }
        }
    }
    // Border suites have no exact realization; start near the end of the
    // known sequence approaching them.
    if restart == 1 && n == 2 {
        if let Ok(l) = border_operator(sigma, BORDER_START_K) {
            return l;
        }
    }
    if sigma.ell() > n {
        let subsets = combinations(sigma.ell(), n + 1);
        let mut usable = subsets.iter().filter_map(|idx| {
            let ps: Vec<_> = idx.iter().map(|&i| sigma.domain()[i].clone()).collect();
            let qs: Vec<_> = idx.iter().map(|&i| sigma.range()[i].clone()).collect();
            if in_general_position(&ps, n) && in_general_position(&qs, n) {
                pl_from_correspondence(&ps, &qs).ok()
            } else {
                None
            }
        });
        if let Some(l) = usable.nth(restart.saturating_sub(1)) {
            return l;
        }
    }
    random_gaussian(rng, n, n)
}

fn run_restart(problem: &Problem, start: &ComplexMatrix, opts: &FitOptions, rng: &mut ChaCha8Rng) -> (Vec<f64>, f64, bool) {
    let mut x = vec![0.0; problem.dim()];
    problem.encode_operator(start, &mut x);
    let mut step = INITIAL_STEP;
    let mut converged = false;
    let mut value = f64::INFINITY;
    for t in TEMPERATURES.iter().copied().chain([0.0]) {
        let out = pattern_search(
            problem.objective(t),
            x,
            SearchOptions {
                initial_step: step,
                min_step: if t == 0.0 { MIN_STEP } else { SMOOTH_MIN_STEP },
                max_iters: opts.max_iters,
            },
            rng,
        );
        x = out.x;
        value = out.value;
        converged = out.converged;
        step = (out.final_step * 8.0).clamp(1e-4, INITIAL_STEP);
    }
    // The last stage minimizes the plain maximum, so `value` is max_fs.
    (x, value, converged)
}

/// Multi-start search for a PL suite close to `sigma`. Restart `r` draws its
/// randomness from a generator seeded with `seed + r`.
pub fn fit_suite(sigma: &Suite, opts: &FitOptions) -> Result<FitResult> {
    if opts.restarts == 0 || opts.max_iters == 0 {
        return Err(Error::BadOptions("restarts and max_iters must be positive".into()));
    }
    let problem = Problem::new(sigma)?;

    if let Some(l) = exact_realize_suite(sigma) {
        if l.determinant().map(|d| d.norm()).unwrap_or(0.0) > DET_BARRIER * l.max_abs().powi(sigma.n() as i32) {
            let mut x = vec![0.0; problem.dim()];
            problem.encode_operator(&l, &mut x);
            let value = problem.max_fs(&x);
            if value <= GOOD_ENOUGH {
                return finish(sigma, &problem, x, true);
            }
        }
    }

    let mut best: Option<(Vec<f64>, f64, bool)> = None;
    for r in 0..opts.restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(r as u64));
        let start = starting_operator(sigma, r, &mut rng);
        let candidate = run_restart(&problem, &start, opts, &mut rng);
        if best.as_ref().is_none_or(|b| candidate.1 < b.1) {
            best = Some(candidate);
        }
        if best.as_ref().is_some_and(|b| b.1 <= GOOD_ENOUGH) {
            break;
        }
    }
    let (x, _, converged) = best.expect("at least one restart ran");
    finish(sigma, &problem, x, converged)
}

fn finish(sigma: &Suite, problem: &Problem, mut x: Vec<f64>, converged: bool) -> Result<FitResult> {
    let l = problem.operator(&x);
    let tau = match problem.moved_domain(&x).and_then(|d| Suite::induced(d, &l)) {
        Ok(tau) => tau,
        Err(_) => {
            x[problem.operator_len()..].iter_mut().for_each(|v| *v = 0.0);
            Suite::induced(sigma.domain().to_vec(), &l)?
        }
    };
    let max_fs = sigma.max_fs_to(&tau)?;
    Ok(FitResult {
        tau,
        l: l.scale(C64::new(1.0 / l.max_abs(), 0.0)),
        max_fs,
        converged,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Approximability {
    Yes,
    /// The search found nothing within `eps`; a closer PL suite may exist.
    Unknown,
}

#[derive(Debug, Clone)]
pub struct EpsVerdict {
    pub verdict: Approximability,
    pub witness: Option<FitResult>,
}

/// `Yes` with a witness when [`fit_suite`] gets within `eps` of `sigma`.
pub fn is_eps_approximable(sigma: &Suite, eps: f64, opts: &FitOptions) -> Result<EpsVerdict> {
    if !(eps > 0.0) {
        return Err(Error::BadOptions(format!("eps must be positive, got {eps}")));
    }
    let fit = fit_suite(sigma, opts)?;
    Ok(verdict_for(fit, eps))
}

pub(crate) fn verdict_for(fit: FitResult, eps: f64) -> EpsVerdict {
    if fit.max_fs < eps {
        EpsVerdict {
            verdict: Approximability::Yes,
            witness: Some(fit),
        }
    } else {
        EpsVerdict {
            verdict: Approximability::Unknown,
            witness: None,
        }
    }
}
