//! Dense complex linear algebra.
//!
//! Everything here works on [`ComplexMatrix`], a row-major array of
//! `Complex64`. The kernels are small and deterministic: a cyclic complex
//! Jacobi eigensolver for Hermitian matrices, a one-sided (Hestenes) Jacobi
//! SVD used for numerical rank and nullspaces, pivoted Gram-Schmidt
//! completion to a unitary, and LU with partial pivoting.

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Default relative threshold below which singular values count as zero.
pub const RANK_TOL: f64 = 1e-9;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Dense rectangular complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    /// Builds a matrix from row-major entries. Fails on a length mismatch
    /// or on non-finite entries.
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { ONE } else { ZERO })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Real diagonal matrix.
    pub fn from_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Self::from_fn(n, n, |i, j| if i == j { C64::new(diag[i], 0.0) } else { ZERO })
    }

    /// Builds a matrix from nested rows; panics on ragged input, so this is
    /// meant for literals in code and tests.
    pub fn from_rows(rows: &[Vec<C64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Self {
            rows: r,
            cols: c,
            data: rows.iter().flatten().copied().collect(),
        }
    }

    /// Real-valued convenience constructor for literals.
    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let rows: Vec<Vec<C64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| C64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn column_vector(v: &[C64]) -> Self {
        Self {
            rows: v.len(),
            cols: 1,
            data: v.to_vec(),
        }
    }

    /// Matrix whose columns are the given vectors (all of length `rows`).
    pub fn from_columns(rows: usize, columns: &[Vec<C64>]) -> Self {
        assert!(columns.iter().all(|c| c.len() == rows), "column length mismatch");
        Self::from_fn(rows, columns.len(), |i, j| columns[j][i])
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn scale(&self, c: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * c).collect(),
        }
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn set_column(&mut self, j: usize, v: &[C64]) {
        assert_eq!(v.len(), self.rows);
        for (i, &z) in v.iter().enumerate() {
            self[(i, j)] = z;
        }
    }

    /// Copy of the block starting at `(r0, c0)` with the given shape.
    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Self {
        assert!(r0 + rows <= self.rows && c0 + cols <= self.cols, "block out of range");
        Self::from_fn(rows, cols, |i, j| self[(r0 + i, c0 + j)])
    }

    /// Writes `src` into `self` with its top-left corner at `(r0, c0)`.
    pub fn set_block(&mut self, r0: usize, c0: usize, src: &ComplexMatrix) {
        assert!(r0 + src.rows <= self.rows && c0 + src.cols <= self.cols);
        for i in 0..src.rows {
            for j in 0..src.cols {
                self[(r0 + i, c0 + j)] = src[(i, j)];
            }
        }
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.cols, "vector length mismatch");
        (0..self.rows)
            .map(|i| {
                let row = &self.data[i * self.cols..(i + 1) * self.cols];
                row.iter().zip(v).map(|(a, b)| a * b).sum()
            })
            .collect()
    }

    pub fn checked_mul(&self, rhs: &ComplexMatrix) -> Result<ComplexMatrix> {
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = ComplexMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                for j in 0..rhs.cols {
                    out.data[i * rhs.cols + j] += a * rhs.data[k * rhs.cols + j];
                }
            }
        }
        Ok(out)
    }

    /// `max_ij |M - M^dag|`.
    pub fn hermitian_deviation(&self) -> f64 {
        assert!(self.is_square());
        let mut dev: f64 = 0.0;
        for i in 0..self.rows {
            for j in i..self.cols {
                dev = dev.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        dev
    }

    /// `max_ij |U^dag U - I|`.
    pub fn unitary_deviation(&self) -> f64 {
        let g = &self.adjoint() * self;
        (&g - &ComplexMatrix::identity(g.rows)).max_abs()
    }

    /// Deviation in both orders, `max(|U^dag U - I|, |U U^dag - I|)`.
    pub fn two_sided_unitary_deviation(&self) -> f64 {
        let h = self * &self.adjoint();
        let right = (&h - &ComplexMatrix::identity(h.rows)).max_abs();
        self.unitary_deviation().max(right)
    }

    /// Determinant via LU; zero for exactly singular input.
    pub fn determinant(&self) -> Result<C64> {
        self.require_square()?;
        let Some(lu) = Lu::factor(self) else {
            return Ok(ZERO);
        };
        let mut det = if lu.swaps % 2 == 0 { ONE } else { -ONE };
        for i in 0..self.rows {
            det *= lu.lu[(i, i)];
        }
        Ok(det)
    }

    /// Solves `self * X = rhs` by LU with partial pivoting.
    pub fn solve(&self, rhs: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.require_square()?;
        if rhs.rows != self.rows {
            return Err(Error::DimensionMismatch(format!(
                "right-hand side has {} rows, expected {}",
                rhs.rows, self.rows
            )));
        }
        let lu = Lu::factor(self).ok_or(Error::Singular)?;
        let scale = self.max_abs();
        for i in 0..self.rows {
            if lu.lu[(i, i)].norm() <= 1e-14 * scale {
                return Err(Error::Singular);
            }
        }
        Ok(lu.solve(rhs))
    }

    pub fn inverse(&self) -> Result<ComplexMatrix> {
        self.solve(&ComplexMatrix::identity(self.rows))
    }

    pub(crate) fn require_square(&self) -> Result<()> {
        if self.is_square() {
            Ok(())
        } else {
            Err(Error::NotSquare {
                rows: self.rows,
                cols: self.cols,
            })
        }
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.checked_mul(rhs).expect("matrix shapes do not conform")
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

/// Standard inner product, conjugate-linear in the first argument.
pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

struct Lu {
    lu: ComplexMatrix,
    perm: Vec<usize>,
    swaps: usize,
}

impl Lu {
    /// `None` when a pivot column is exactly zero.
    fn factor(a: &ComplexMatrix) -> Option<Lu> {
        let n = a.rows;
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut swaps = 0;
        for k in 0..n {
            let (p, pivot) = (k..n)
                .map(|i| (i, lu[(i, k)].norm()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pivot == 0.0 {
                return None;
            }
            if p != k {
                for j in 0..n {
                    let tmp = lu[(k, j)];
                    lu[(k, j)] = lu[(p, j)];
                    lu[(p, j)] = tmp;
                }
                perm.swap(k, p);
                swaps += 1;
            }
            let d = lu[(k, k)];
            for i in k + 1..n {
                let f = lu[(i, k)] / d;
                lu[(i, k)] = f;
                for j in k + 1..n {
                    let t = lu[(k, j)];
                    lu[(i, j)] -= f * t;
                }
            }
        }
        Some(Lu { lu, perm, swaps })
    }

    fn solve(&self, rhs: &ComplexMatrix) -> ComplexMatrix {
        let n = self.lu.rows;
        let mut x = ComplexMatrix::from_fn(n, rhs.cols, |i, j| rhs[(self.perm[i], j)]);
        for c in 0..rhs.cols {
            for i in 0..n {
                let mut s = x[(i, c)];
                for k in 0..i {
                    s -= self.lu[(i, k)] * x[(k, c)];
                }
                x[(i, c)] = s;
            }
            for i in (0..n).rev() {
                let mut s = x[(i, c)];
                for k in i + 1..n {
                    s -= self.lu[(i, k)] * x[(k, c)];
                }
                x[(i, c)] = s / self.lu[(i, i)];
            }
        }
        x
    }
}

/// Spectrum of a Hermitian matrix: eigenvalues ascending, column `j` of
/// `eigenvectors` paired with `eigenvalues[j]`.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

impl EigenSystem {
    /// `V diag(lambda) V^dag`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let d = ComplexMatrix::from_diagonal(&self.eigenvalues);
        &(&self.eigenvectors * &d) * &self.eigenvectors.adjoint()
    }

    pub fn min(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }
}

/// Eigen-decomposition of a Hermitian matrix by cyclic complex Jacobi
/// rotations.
pub fn hermitian_eigensystem(m: &ComplexMatrix) -> Result<EigenSystem> {
    m.require_square()?;
    if !m.is_finite() {
        return Err(Error::NonFinite);
    }
    let scale = m.max_abs();
    let asym = m.hermitian_deviation();
    if asym > 1e-9 * scale {
        return Err(Error::NotHermitian(asym));
    }
    let n = m.rows;
    // Work on the exactly Hermitian part.
    let mut a = ComplexMatrix::from_fn(n, n, |i, j| (m[(i, j)] + m[(j, i)].conj()) * 0.5);
    let mut v = ComplexMatrix::identity(n);
    let total = a.frobenius_norm();

    if total > 0.0 {
        for _sweep in 0..100 {
            let off: f64 = (0..n)
                .flat_map(|p| (p + 1..n).map(move |q| (p, q)))
                .map(|(p, q)| a[(p, q)].norm_sqr())
                .sum::<f64>()
                .sqrt();
            if off <= 1e-15 * total {
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    jacobi_rotate(&mut a, &mut v, p, q);
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let eigenvalues = order.iter().map(|&i| a[(i, i)].re).collect();
    let eigenvectors = ComplexMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    Ok(EigenSystem {
        eigenvalues,
        eigenvectors,
    })
}

fn jacobi_rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    let abs = apq.norm();
    if abs == 0.0 {
        return;
    }
    let n = a.rows;
    let phase = (apq / abs).conj();
    let theta = (a[(q, q)].re - a[(p, p)].re) / (2.0 * abs);
    let t = if theta == 0.0 {
        1.0
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    // J restricted to (p, q): [[c, s], [-s e^{-i phi}, c e^{-i phi}]].
    let jpp = C64::new(c, 0.0);
    let jpq = C64::new(s, 0.0);
    let jqp = -phase * s;
    let jqq = phase * c;

    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * jpp + akq * jqp;
        a[(k, q)] = akp * jpq + akq * jqq;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = jpp.conj() * apk + jqp.conj() * aqk;
        a[(q, k)] = jpq.conj() * apk + jqq.conj() * aqk;
    }
    a[(p, q)] = ZERO;
    a[(q, p)] = ZERO;
    a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = C64::new(a[(q, q)].re, 0.0);

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * jpp + vkq * jqp;
        v[(k, q)] = vkp * jpq + vkq * jqq;
    }
}

/// Singular values (descending) and right singular vectors of a matrix.
#[derive(Debug, Clone)]
pub struct Svd {
    pub singular_values: Vec<f64>,
    /// `cols x cols` unitary; column `j` pairs with `singular_values[j]`.
    pub right_vectors: ComplexMatrix,
}

/// One-sided Jacobi SVD. Accurate for small singular values, which is what
/// rank decisions and nullspaces need.
pub fn svd(a: &ComplexMatrix) -> Result<Svd> {
    if !a.is_finite() {
        return Err(Error::NonFinite);
    }
    let (m, n) = (a.rows, a.cols);
    let mut cols: Vec<Vec<C64>> = (0..n).map(|j| a.column(j)).collect();
    let mut v = ComplexMatrix::identity(n);

    for _sweep in 0..80 {
        let mut rotated = false;
        for i in 0..n {
            for j in i + 1..n {
                let alpha: f64 = cols[i].iter().map(|z| z.norm_sqr()).sum();
                let beta: f64 = cols[j].iter().map(|z| z.norm_sqr()).sum();
                if alpha == 0.0 || beta == 0.0 {
                    continue;
                }
                let gamma = inner(&cols[i], &cols[j]);
                let g = gamma.norm();
                if g <= 1e-15 * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let phase = (gamma / g).conj();
                let zeta = (beta - alpha) / (2.0 * g);
                let t = if zeta == 0.0 {
                    1.0
                } else {
                    zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for k in 0..m {
                    let x = cols[i][k];
                    let y = cols[j][k] * phase;
                    cols[i][k] = x * c - y * s;
                    cols[j][k] = x * s + y * c;
                }
                for k in 0..n {
                    let x = v[(k, i)];
                    let y = v[(k, j)] * phase;
                    v[(k, i)] = x * c - y * s;
                    v[(k, j)] = x * s + y * c;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let sigma: Vec<f64> = cols.iter().map(|c| norm(c)).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| sigma[j].total_cmp(&sigma[i]));
    Ok(Svd {
        singular_values: order.iter().map(|&i| sigma[i]).collect(),
        right_vectors: ComplexMatrix::from_fn(n, n, |r, c| v[(r, order[c])]),
    })
}

/// Number of singular values above `tol_rel * sigma_max`.
pub fn numerical_rank(a: &ComplexMatrix, tol_rel: f64) -> Result<usize> {
    let s = svd(a)?;
    let top = s.singular_values.first().copied().unwrap_or(0.0);
    if top == 0.0 {
        return Ok(0);
    }
    Ok(s.singular_values.iter().filter(|&&x| x > tol_rel * top).count())
}

/// Orthonormal basis of the numerical nullspace, returned as column vectors.
pub fn nullspace(a: &ComplexMatrix, tol_rel: f64) -> Result<Vec<ComplexMatrix>> {
    if !(tol_rel > 0.0 && tol_rel < 1.0) {
        return Err(Error::BadOptions(format!("tol_rel must lie in (0, 1), got {tol_rel}")));
    }
    let s = svd(a)?;
    let top = s.singular_values.first().copied().unwrap_or(0.0);
    Ok(s
        .singular_values
        .iter()
        .enumerate()
        .filter(|&(_, &x)| top == 0.0 || x <= tol_rel * top)
        .map(|(j, _)| ComplexMatrix::column_vector(&s.right_vectors.column(j)))
        .collect())
}

/// Extends `k` orthonormal columns in `C^dim` to a `dim x dim` unitary whose
/// first `k` columns are the inputs, unchanged.
///
/// New columns come from the standard basis: at each step the candidate with
/// the largest component outside the current span is orthogonalized (twice)
/// and appended. An empty input completes to the identity.
pub fn orthonormal_completion(partial: &ComplexMatrix, dim: usize) -> Result<ComplexMatrix> {
    let k = partial.cols;
    if k > 0 && partial.rows != dim {
        return Err(Error::DimensionMismatch(format!(
            "columns have length {}, expected {dim}",
            partial.rows
        )));
    }
    if k > dim {
        return Err(Error::DimensionMismatch(format!("{k} columns exceed dimension {dim}")));
    }
    if !partial.is_finite() {
        return Err(Error::NonFinite);
    }
    if k > 0 {
        let dev = partial.unitary_deviation();
        if dev > 1e-9 {
            return Err(Error::NotOrthonormal(dev));
        }
    }

    let mut basis: Vec<Vec<C64>> = (0..k).map(|j| partial.column(j)).collect();
    let mut used = vec![false; dim];
    while basis.len() < dim {
        let mut best: Option<(usize, Vec<C64>, f64)> = None;
        for (idx, taken) in used.iter().enumerate() {
            if *taken {
                continue;
            }
            let mut e = vec![ZERO; dim];
            e[idx] = ONE;
            let r = project_out(&project_out(&e, &basis), &basis);
            let nr = norm(&r);
            if best.as_ref().is_none_or(|b| nr > b.2) {
                best = Some((idx, r, nr));
            }
        }
        let (idx, r, nr) = best.expect("a candidate always remains");
        used[idx] = true;
        basis.push(r.iter().map(|z| z / nr).collect());
    }
    Ok(ComplexMatrix::from_columns(dim, &basis))
}

fn project_out(v: &[C64], basis: &[Vec<C64>]) -> Vec<C64> {
    let mut r = v.to_vec();
    for b in basis {
        let c = inner(b, &r);
        for (x, y) in r.iter_mut().zip(b) {
            *x -= c * y;
        }
    }
    r
}

/// Standard complex Gaussian entries (real and imaginary parts N(0, 1)).
pub fn random_gaussian<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

/// Haar-distributed unitary from Gram-Schmidt on a Gaussian matrix.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexMatrix {
    let g = random_gaussian(rng, n, n);
    let mut basis: Vec<Vec<C64>> = Vec::with_capacity(n);
    for j in 0..n {
        let r = project_out(&project_out(&g.column(j), &basis), &basis);
        let nr = norm(&r);
        basis.push(r.iter().map(|z| z / nr).collect());
    }
    ComplexMatrix::from_columns(n, &basis)
}

/// Uniformly distributed unit vector in `C^n`.
pub fn random_unit_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<C64> {
    loop {
        let v = random_gaussian(rng, n, 1).data;
        let nv = norm(&v);
        if nv > 1e-12 {
            return v.iter().map(|z| z / nv).collect();
        }
    }
}
