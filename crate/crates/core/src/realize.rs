//! One-ancilla unitary realizations of linear operators.
//!
//! Basis convention: the composite space is `C^2 (ancilla) ⊗ C^n`, ancilla as
//! the high-order factor, so the `n` basis states with the ancilla in `|0>`
//! occupy indices `0..n`. The ancilla starts and is post-selected in `|0>`.
//! Under this layout the post-selected map `Ũ` of a `2n x 2n` unitary is just
//! its top-left `n x n` block.

use crate::error::{Error, Result};
use crate::gram::{vectors_with_gram, GramSpec};
use crate::linalg::{hermitian_eigensystem, norm, orthonormal_completion, ComplexMatrix, C64};

/// Slack on the largest eigenvalue of `L^dag L` still counted as `<= 1`.
pub const CONTRACTION_TOL: f64 = 1e-9;

/// Extreme eigenvalues of `L^dag L`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContractionSpectrum {
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub weakly_contracting: bool,
}

/// A realizing unitary together with the data that certifies it.
#[derive(Debug, Clone)]
pub struct DilationResult {
    /// `2n x 2n` unitary whose top-left block is `scale_c * L`.
    pub u: ComplexMatrix,
    pub scale_c: C64,
    /// Extreme eigenvalues of `L^dag L` for the operator as given.
    pub lambda_min: f64,
    pub lambda_max: f64,
    /// Guaranteed success probability of `u`.
    pub gsp: f64,
}

/// Unnormalized post-selected state and its probability.
#[derive(Debug, Clone)]
pub struct PostSelectOutcome {
    pub state: ComplexMatrix,
    pub success_prob: f64,
}

/// Which nonzero multiple of `L` gets dilated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scaling {
    /// `c = 1/sqrt(lambda_max)`: maximizes the guaranteed success probability.
    #[default]
    Optimal,
    /// `c = 1` when `L` is already weakly contracting, else `1/sqrt(lambda_max)`.
    Literal,
}

fn require_nonzero(l: &ComplexMatrix) -> Result<()> {
    if !l.is_finite() {
        return Err(Error::NonFinite);
    }
    if l.max_abs() <= f64::MIN_POSITIVE {
        return Err(Error::ZeroOperator);
    }
    Ok(())
}

pub fn contraction_spectrum(l: &ComplexMatrix) -> Result<ContractionSpectrum> {
    l.require_square()?;
    require_nonzero(l)?;
    let es = hermitian_eigensystem(&(&l.adjoint() * l))?;
    let lambda_min = es.min().max(0.0);
    let lambda_max = es.max().max(0.0);
    Ok(ContractionSpectrum {
        lambda_min,
        lambda_max,
        weakly_contracting: lambda_max <= 1.0 + CONTRACTION_TOL,
    })
}

/// Unitary `U` on `C^{2n}` with `L` in its top-left block.
///
/// The block under `L` is `X` with `X^dag X = I - L^dag L`; the last `n`
/// columns complete the first `n` to an orthonormal basis.
pub fn dilate_literal(l: &ComplexMatrix) -> Result<ComplexMatrix> {
    let spec = contraction_spectrum(l)?;
    if !spec.weakly_contracting {
        return Err(Error::NotContracting(spec.lambda_max));
    }
    let n = l.rows();
    let q = &ComplexMatrix::identity(n) - &(&l.adjoint() * l);
    let x = vectors_with_gram(&GramSpec::with_reference_scale(q, 1.0))?;
    let mut first = ComplexMatrix::zeros(2 * n, n);
    first.set_block(0, 0, l);
    first.set_block(n, 0, &x);
    orthonormal_completion(&first, 2 * n)
}

/// Exact realization of a nonzero `L` by a one-ancilla unitary.
pub fn exact_realize(l: &ComplexMatrix, scaling: Scaling) -> Result<DilationResult> {
    let spec = contraction_spectrum(l)?;
    let c = match scaling {
        Scaling::Literal if spec.weakly_contracting => 1.0,
        _ => 1.0 / spec.lambda_max.sqrt(),
    };
    let gsp = match scaling {
        Scaling::Optimal => spec.lambda_min / spec.lambda_max,
        Scaling::Literal => c * c * spec.lambda_min,
    };
    let scale_c = C64::new(c, 0.0);
    let u = dilate_literal(&l.scale(scale_c))?;
    Ok(DilationResult {
        u,
        scale_c,
        lambda_min: spec.lambda_min,
        lambda_max: spec.lambda_max,
        gsp,
    })
}

/// `Ũ|psi>`: the principal-system part of `U(|0> ⊗ |psi>)` with the ancilla
/// found in `|0>`.
pub fn apply_postselected(u: &ComplexMatrix, psi: &ComplexMatrix) -> Result<PostSelectOutcome> {
    u.require_square()?;
    let dim = u.rows();
    if dim % 2 != 0 || psi.cols() != 1 || psi.rows() * 2 != dim {
        return Err(Error::DimensionMismatch(format!(
            "state of length {} does not fit a {dim}x{dim} dilation",
            psi.rows()
        )));
    }
    let dev = u.unitary_deviation();
    if dev > 1e-8 {
        return Err(Error::NotUnitary(dev));
    }
    let nrm = norm(psi.data());
    if (nrm - 1.0).abs() > 1e-9 {
        return Err(Error::NotNormalized(nrm));
    }
    let n = psi.rows();
    let state = u.block(0, 0, n, n).apply(psi.data());
    let success_prob = state.iter().map(|z| z.norm_sqr()).sum();
    Ok(PostSelectOutcome {
        state: ComplexMatrix::column_vector(&state),
        success_prob,
    })
}

/// Guaranteed success probability of an arbitrary `2n x 2n` unitary: the
/// least eigenvalue of `M^dag M` for its top-left block `M`.
pub fn guaranteed_success_probability(u: &ComplexMatrix) -> Result<f64> {
    u.require_square()?;
    if u.rows() % 2 != 0 {
        return Err(Error::DimensionMismatch("dilation dimension must be even".into()));
    }
    let n = u.rows() / 2;
    let m = u.block(0, 0, n, n);
    let es = hermitian_eigensystem(&(&m.adjoint() * &m))?;
    Ok(es.min().max(0.0))
}

/// Literal realization of `sum_i w_i U_i`, which is always weakly contracting.
pub fn realize_convex_combination(
    unitaries: &[ComplexMatrix],
    weights: &[f64],
) -> Result<DilationResult> {
    if unitaries.is_empty() || unitaries.len() != weights.len() {
        return Err(Error::BadWeights(format!(
            "{} unitaries with {} weights",
            unitaries.len(),
            weights.len()
        )));
    }
    if weights.iter().any(|&w| !(w >= 0.0)) {
        return Err(Error::BadWeights("weights must be nonnegative".into()));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-10 {
        return Err(Error::BadWeights(format!("weights sum to {total}")));
    }
    let n = unitaries[0].rows();
    let mut l = ComplexMatrix::zeros(n, n);
    for (index, (u, &w)) in unitaries.iter().zip(weights).enumerate() {
        if u.rows() != n || !u.is_square() {
            return Err(Error::DimensionMismatch(format!("member {index} has the wrong shape")));
        }
        let deviation = u.unitary_deviation();
        if deviation > 1e-8 {
            return Err(Error::NotUnitaryMember { index, deviation });
        }
        l = &l + &u.scale(C64::new(w, 0.0));
    }
    let spec = contraction_spectrum(&l)?;
    let u = dilate_literal(&l)?;
    Ok(DilationResult {
        u,
        scale_c: C64::new(1.0, 0.0),
        lambda_min: spec.lambda_min,
        lambda_max: spec.lambda_max,
        gsp: spec.lambda_min,
    })
}

/// `lambda_min / lambda_max` of `L^dag L`; zero exactly for singular `L`.
pub fn rho(l: &ComplexMatrix) -> Result<f64> {
    let spec = contraction_spectrum(l)?;
    Ok(spec.lambda_min / spec.lambda_max)
}
