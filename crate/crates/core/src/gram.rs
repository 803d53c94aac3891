//! Vectors with prescribed inner products.
//!
//! A Hermitian positive semidefinite `Q = V D V^dag` is the Gram matrix of the
//! columns of `X = sqrt(D) V^dag`, i.e. `X^dag X = Q`. The columns live in
//! `C^n`, which is all the one-ancilla dilation needs.

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigensystem, ComplexMatrix, C64};

/// Relative tolerance for eigenvalues treated as zero rather than negative.
pub const NEGATIVE_EIGEN_TOL: f64 = 1e-9;

/// A target Gram matrix.
#[derive(Debug, Clone)]
pub struct GramSpec {
    pub q: ComplexMatrix,
    /// Magnitude the negativity tolerance is measured against, in addition to
    /// the largest eigenvalue of `q`. Zero means "relative to `q` alone".
    pub reference_scale: f64,
}

impl GramSpec {
    pub fn new(q: ComplexMatrix) -> Self {
        Self {
            q,
            reference_scale: 0.0,
        }
    }

    /// For Gram matrices of the form `I - A` whose natural scale is 1 even
    /// when `q` itself is rounding noise.
    pub fn with_reference_scale(q: ComplexMatrix, scale: f64) -> Self {
        Self {
            q,
            reference_scale: scale,
        }
    }
}

/// Returns `X` (`n x n`) whose columns `x_i` satisfy `<x_i, x_j> = Q_ij`.
pub fn vectors_with_gram(spec: &GramSpec) -> Result<ComplexMatrix> {
    let q = &spec.q;
    q.require_square()?;
    let es = hermitian_eigensystem(q)?;
    let scale = es.max().max(spec.reference_scale);
    let lowest = es.min();
    if lowest < -NEGATIVE_EIGEN_TOL * scale {
        return Err(Error::NotPsd(lowest));
    }
    let n = q.rows();
    let sqrt_d: Vec<f64> = es.eigenvalues.iter().map(|&l| l.max(0.0).sqrt()).collect();
    let v = &es.eigenvectors;
    Ok(ComplexMatrix::from_fn(n, n, |i, j| {
        v[(j, i)].conj() * C64::new(sqrt_d[i], 0.0)
    }))
}
