//! Finite transformations of `CP^{n-1}` written as suites
//! `(p_1, ..., p_ell, p_{ell+1}, ..., p_{2 ell})`, read as `p_i ↦ p_{ell+i}`.

mod fit;

pub use fit::{fit_suite, is_eps_approximable, Approximability, EpsVerdict, FitOptions, FitResult};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{nullspace, random_gaussian, ComplexMatrix, C64, RANK_TOL};
use crate::projective::{
    apply_ql, cross_ratio_homogeneous, fs_distance, from_riemann, tetrad_configuration,
    to_riemann, ProjectivePoint, RiemannPoint, TetradConfiguration, POINT_EQ_TOL,
};

/// Largest FS error accepted when checking an exact realization.
pub const EXACT_FS_TOL: f64 = 1e-7;
/// `|mu_i| >= MU_TOL * max |mu|` is required of every scaling factor.
pub const MU_TOL: f64 = 1e-7;
/// Random nullspace combinations tried before giving up.
pub const MU_ATTEMPTS: usize = 50;
/// Relative residual under which a cross-ratio equation counts as satisfied.
pub const VARIETY_TOL: f64 = 1e-8;

/// `2 ell` points of `CP^{n-1}` whose first `ell` are pairwise distinct.
#[derive(Debug, Clone, PartialEq)]
pub struct Suite {
    n: usize,
    ell: usize,
    points: Vec<ProjectivePoint>,
}

impl Suite {
    pub fn new(domain: Vec<ProjectivePoint>, range: Vec<ProjectivePoint>) -> Result<Self> {
        let ell = domain.len();
        if ell == 0 || range.len() != ell {
            return Err(Error::InvalidSuite(format!(
                "domain has {ell} points, range has {}",
                range.len()
            )));
        }
        let n = domain[0].dim();
        if domain.iter().chain(&range).any(|p| p.dim() != n) {
            return Err(Error::InvalidSuite("points of different dimensions".into()));
        }
        for i in 0..ell {
            for j in i + 1..ell {
                if fs_distance(&domain[i], &domain[j])? <= POINT_EQ_TOL {
                    return Err(Error::InvalidSuite(format!(
                        "domain points {i} and {j} coincide"
                    )));
                }
            }
        }
        let mut points = domain;
        points.extend(range);
        Ok(Self { n, ell, points })
    }

    /// Single-qubit suite from Riemann-sphere values.
    pub fn from_riemann(domain: &[RiemannPoint], range: &[RiemannPoint]) -> Result<Self> {
        Self::new(
            domain.iter().map(from_riemann).collect(),
            range.iter().map(from_riemann).collect(),
        )
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn ell(&self) -> usize {
        self.ell
    }

    pub fn points(&self) -> &[ProjectivePoint] {
        &self.points
    }

    pub fn domain(&self) -> &[ProjectivePoint] {
        &self.points[..self.ell]
    }

    pub fn range(&self) -> &[ProjectivePoint] {
        &self.points[self.ell..]
    }

    /// Largest coordinate-wise FS distance to another suite of the same shape.
    pub fn max_fs_to(&self, other: &Suite) -> Result<f64> {
        if self.n != other.n || self.ell != other.ell {
            return Err(Error::DimensionMismatch("suites of different shapes".into()));
        }
        self.points
            .iter()
            .zip(&other.points)
            .try_fold(0.0f64, |acc, (p, q)| Ok(acc.max(fs_distance(p, q)?)))
    }

    /// The suite `(domain, QL(domain))`; fails if `L` kills a domain point.
    pub fn induced(domain: Vec<ProjectivePoint>, l: &ComplexMatrix) -> Result<Self> {
        let range = domain
            .iter()
            .map(|p| apply_ql(l, p)?.ok_or(Error::Singular))
            .collect::<Result<Vec<_>>>()?;
        Self::new(domain, range)
    }

    fn riemann_range(&self) -> Result<Vec<RiemannPoint>> {
        self.range().iter().map(to_riemann).collect()
    }

    fn riemann_domain(&self) -> Result<Vec<RiemannPoint>> {
        self.domain().iter().map(to_riemann).collect()
    }
}

/// Linear system in `(vec L, mu)` whose solutions satisfy `L v_i = mu_i w_i`.
fn realization_system(sigma: &Suite) -> ComplexMatrix {
    let (n, ell) = (sigma.n, sigma.ell);
    let mut a = ComplexMatrix::zeros(ell * n, n * n + ell);
    for (i, (v, w)) in sigma.domain().iter().zip(sigma.range()).enumerate() {
        for r in 0..n {
            let row = i * n + r;
            for (c, &vc) in v.coords().iter().enumerate() {
                a[(row, r * n + c)] = vc;
            }
            a[(row, n * n + i)] = -w.coords()[r];
        }
    }
    a
}

fn split_solution(x: &[C64], n: usize) -> (ComplexMatrix, Vec<C64>) {
    let l = ComplexMatrix::from_fn(n, n, |r, c| x[r * n + c]);
    (l, x[n * n..].to_vec())
}

/// Exact realizations of `sigma`, as the nullspace of the realization system.
/// A vector of that nullspace is a genuine realization only when every
/// `mu_i` is nonzero.
pub fn realization_nullspace(sigma: &Suite) -> Result<Vec<ComplexMatrix>> {
    nullspace(&realization_system(sigma), RANK_TOL)
}

fn accept_candidate(sigma: &Suite, x: &[C64]) -> Option<ComplexMatrix> {
    let (l, mu) = split_solution(x, sigma.n);
    let top = mu.iter().map(|m| m.norm()).fold(0.0, f64::max);
    if top == 0.0 || mu.iter().any(|m| m.norm() < MU_TOL * top) {
        return None;
    }
    let scale = l.max_abs();
    if scale == 0.0 {
        return None;
    }
    let l = l.scale(C64::new(1.0 / scale, 0.0));
    for (p, q) in sigma.domain().iter().zip(sigma.range()) {
        let image = apply_ql(&l, p).ok()??;
        if fs_distance(&image, q).ok()? > EXACT_FS_TOL {
            return None;
        }
    }
    Some(l)
}

/// An operator `L` with `QL(p_i) = p_{ell+i}` for every `i`, if one exists at
/// working tolerance. The result is scaled to unit max-entry.
pub fn exact_realize_suite(sigma: &Suite) -> Option<ComplexMatrix> {
    let basis = realization_nullspace(sigma).ok()?;
    match basis.len() {
        0 => None,
        1 => accept_candidate(sigma, basis[0].data()),
        k => {
            let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_ba5e);
            (0..MU_ATTEMPTS).find_map(|_| {
                let coeffs = random_gaussian(&mut rng, k, 1);
                let len = basis[0].rows();
                let x: Vec<C64> = (0..len)
                    .map(|r| (0..k).map(|j| coeffs[(j, 0)] * basis[j][(r, 0)]).sum())
                    .collect();
                accept_candidate(sigma, &x)
            })
        }
    }
}

/// `lambda_min / lambda_max` of the operator realizing `sigma`, defined here
/// only when that operator is unique up to scale.
pub fn suite_rho(sigma: &Suite) -> Result<Option<f64>> {
    if realization_nullspace(sigma)?.len() != 1 {
        return Ok(None);
    }
    exact_realize_suite(sigma)
        .map(|l| crate::realize::rho(&l))
        .transpose()
}

/// Verdicts of the single-qubit infinite-approximability trichotomy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum SingleQubitClass {
    ExactlyRealizablePL,
    ExactlyRealizableSingular,
    BorderOfPL,
    NotInfinitelyApproximable,
}

impl SingleQubitClass {
    pub fn is_infinitely_approximable(self) -> bool {
        self != SingleQubitClass::NotInfinitelyApproximable
    }
}

/// Groups the range points into clusters of coincident points. Returns the
/// cluster index of each point; clusters are numbered by first occurrence.
fn range_clusters(sigma: &Suite) -> Vec<usize> {
    let range = sigma.range();
    let mut label: Vec<usize> = (0..range.len()).collect();
    for i in 0..range.len() {
        for j in i + 1..range.len() {
            if range[i].coincides(&range[j]) {
                let (from, to) = (label[i].max(label[j]), label[i].min(label[j]));
                label.iter_mut().filter(|l| **l == from).for_each(|l| *l = to);
            }
        }
    }
    let mut order: Vec<usize> = Vec::new();
    for &l in &label {
        if !order.contains(&l) {
            order.push(l);
        }
    }
    label
        .iter()
        .map(|l| order.iter().position(|o| o == l).unwrap())
        .collect()
}

fn cluster_sizes(labels: &[usize]) -> Vec<usize> {
    let k = labels.iter().max().map_or(0, |m| m + 1);
    let mut sizes = vec![0; k];
    for &l in labels {
        sizes[l] += 1;
    }
    sizes
}

pub fn classify_single_qubit(sigma: &Suite) -> Result<SingleQubitClass> {
    if sigma.n != 2 {
        return Err(Error::WrongDimension {
            expected: 2,
            actual: sigma.n,
        });
    }
    let ell = sigma.ell;
    let sizes = cluster_sizes(&range_clusters(sigma));
    let all_equal = sizes.len() == 1;
    if ell < 3 {
        return Ok(if all_equal && ell == 2 {
            SingleQubitClass::ExactlyRealizableSingular
        } else {
            SingleQubitClass::ExactlyRealizablePL
        });
    }
    if all_equal {
        return Ok(SingleQubitClass::ExactlyRealizableSingular);
    }
    if sizes.len() == ell && exact_realize_suite(sigma).is_some() {
        return Ok(SingleQubitClass::ExactlyRealizablePL);
    }
    if sizes.len() == 2 && sizes.contains(&(ell - 1)) {
        return Ok(SingleQubitClass::BorderOfPL);
    }
    Ok(SingleQubitClass::NotInfinitelyApproximable)
}

/// The operator `f^{-1} ∘ (g / k)` whose induced suites approach a border
/// suite as `k` grows. Here `f` sends the repeated range point to 0 and the
/// outlier to infinity, and `g` sends the outlier's domain point to infinity.
pub fn border_operator(sigma: &Suite, k: f64) -> Result<ComplexMatrix> {
    if !(k >= 1.0) || !k.is_finite() {
        return Err(Error::BadOptions(format!("k must be a positive integer, got {k}")));
    }
    if classify_single_qubit(sigma)? != SingleQubitClass::BorderOfPL {
        return Err(Error::NotBorder);
    }
    let labels = range_clusters(sigma);
    let sizes = cluster_sizes(&labels);
    // The largest cluster is p; with ell >= 3 it is unique.
    let p_label = if sizes[0] >= sizes[1] { 0 } else { 1 };
    let p_idx = labels.iter().position(|&l| l == p_label).unwrap();
    let q_idx = labels.iter().position(|&l| l != p_label).unwrap();
    let p = sigma.range()[p_idx].coords();
    let q = sigma.range()[q_idx].coords();
    let d = sigma.domain()[q_idx].coords();

    // f(x) = ([x, p], [x, q]) with [x, y] = x_1 y_2 - x_2 y_1.
    let f = ComplexMatrix::from_rows(&[vec![p[1], -p[0]], vec![q[1], -q[0]]]);
    let f_inv = f.inverse()?;
    // g(x) = (<d, x>, [x, d]) sends d to infinity.
    let g = ComplexMatrix::from_rows(&[vec![d[0].conj(), d[1].conj()], vec![d[1], -d[0]]]);
    let shrink = ComplexMatrix::from_diagonal(&[1.0, k]);
    let l = &(&f_inv * &shrink) * &g;
    Ok(l.scale(C64::new(1.0 / l.max_abs(), 0.0)))
}

/// The PL suite `(dom sigma, QL_k(dom sigma))` for [`border_operator`].
pub fn border_sequence(sigma: &Suite, k: u64) -> Result<Suite> {
    if k == 0 {
        return Err(Error::BadOptions("k must be positive".into()));
    }
    let l = border_operator(sigma, k as f64)?;
    Suite::induced(sigma.domain().to_vec(), &l)
}

#[derive(Debug, Clone, PartialEq)]
pub struct VarietyCheck {
    pub on_variety: bool,
    pub residuals: Vec<f64>,
}

/// Evaluates the `ell - 3` equations `chi(a1, a2, a3, a_i) = chi(b1, b2, b3, b_i)`
/// with fractions cleared. Each residual is `|N_a D_b - N_b D_a|` divided by
/// the norms of the two homogeneous pairs.
pub fn pl_variety_check(sigma: &Suite) -> Result<VarietyCheck> {
    if sigma.n != 2 {
        return Err(Error::WrongDimension {
            expected: 2,
            actual: sigma.n,
        });
    }
    if sigma.ell <= 3 {
        return Ok(VarietyCheck {
            on_variety: true,
            residuals: Vec::new(),
        });
    }
    let a = sigma.riemann_domain()?;
    let b = sigma.riemann_range()?;
    let mut residuals = Vec::with_capacity(sigma.ell - 3);
    for i in 3..sigma.ell {
        for t in [[a[0], a[1], a[2], a[i]], [b[0], b[1], b[2], b[i]]] {
            if matches!(
                tetrad_configuration(&t[0], &t[1], &t[2], &t[3]),
                TetradConfiguration::ThreeOne | TetradConfiguration::Four
            ) {
                return Err(Error::SingularConfiguration);
            }
        }
        let (na, da) = cross_ratio_homogeneous(&a[0], &a[1], &a[2], &a[i]);
        let (nb, db) = cross_ratio_homogeneous(&b[0], &b[1], &b[2], &b[i]);
        let scale = (na.norm_sqr() + da.norm_sqr()).sqrt() * (nb.norm_sqr() + db.norm_sqr()).sqrt();
        residuals.push((na * db - nb * da).norm() / scale);
    }
    Ok(VarietyCheck {
        on_variety: residuals.iter().all(|&r| r <= VARIETY_TOL),
        residuals,
    })
}

/// `|(ab + cd)/2 - ((a + b)/2)((c + d)/2)|` for a suite
/// `(0, inf, 1, -1 ↦ a, b, c, d)`; zero on PL suites.
pub fn averages_identity_check(sigma: &Suite) -> Result<f64> {
    if sigma.n != 2 {
        return Err(Error::WrongDimension {
            expected: 2,
            actual: sigma.n,
        });
    }
    if sigma.ell != 4 {
        return Err(Error::WrongDomain);
    }
    let expected = [
        RiemannPoint::real(0.0),
        RiemannPoint::infinity(),
        RiemannPoint::real(1.0),
        RiemannPoint::real(-1.0),
    ];
    let domain = sigma.riemann_domain()?;
    if domain.iter().zip(&expected).any(|(x, y)| !x.coincides(y)) {
        return Err(Error::WrongDomain);
    }
    let values = sigma
        .riemann_range()?
        .iter()
        .enumerate()
        .map(|(i, z)| z.value().ok_or(Error::InfiniteRangePoint(i)))
        .collect::<Result<Vec<_>>>()?;
    let (a, b, c, d) = (values[0], values[1], values[2], values[3]);
    Ok(((a * b + c * d) / 2.0 - (a + b) / 2.0 * ((c + d) / 2.0)).norm())
}
