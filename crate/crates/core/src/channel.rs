//! The channel obtained by measuring the ancilla of a dilation without
//! looking at the outcome.
//!
//! With the ancilla prepared in `|0>`, the unitary applied, and the ancilla
//! measured, the Kraus operators are `K_i = P_i U E`, the blocks of the first
//! block column of `U`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigensystem, ComplexMatrix, C64};

const UNITARY_TOL: f64 = 1e-8;
const HERMITIAN_TOL: f64 = 1e-10;
const TRACE_TOL: f64 = 1e-10;
const PSD_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KrausChannel {
    pub kraus: Vec<ComplexMatrix>,
    pub n_in: usize,
    pub n_out: usize,
}

impl KrausChannel {
    /// `sum_i K_i^dag K_i`, the identity for a trace-preserving channel.
    pub fn completeness(&self) -> ComplexMatrix {
        self.kraus
            .iter()
            .fold(ComplexMatrix::zeros(self.n_in, self.n_in), |acc, k| {
                &acc + &(&k.adjoint() * k)
            })
    }

    pub fn completeness_deviation(&self) -> f64 {
        (&self.completeness() - &ComplexMatrix::identity(self.n_in)).max_abs()
    }
}

/// A validated density matrix: Hermitian, unit trace, positive semidefinite.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityMatrix {
    rho: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(rho: ComplexMatrix) -> Result<Self> {
        rho.require_square()?;
        if !rho.is_finite() {
            return Err(Error::NonFinite);
        }
        let herm = rho.hermitian_deviation();
        if herm > HERMITIAN_TOL {
            return Err(Error::NotHermitian(herm));
        }
        let trace = rho.trace();
        if (trace - C64::new(1.0, 0.0)).norm() > TRACE_TOL {
            return Err(Error::NotNormalized(trace.re));
        }
        let lowest = hermitian_eigensystem(&rho)?.min();
        if lowest < -PSD_TOL {
            return Err(Error::NotPsd(lowest));
        }
        Ok(Self { rho })
    }

    /// `|psi><psi|` for a unit vector `psi`.
    pub fn pure(psi: &[C64]) -> Result<Self> {
        let v = ComplexMatrix::column_vector(psi);
        Self::new(&v * &v.adjoint())
    }

    pub fn dim(&self) -> usize {
        self.rho.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.rho
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.rho
    }
}

/// Kraus operators of a `2n x 2n` unitary acting on system and ancilla.
pub fn build_kraus(u: &ComplexMatrix) -> Result<KrausChannel> {
    u.require_square()?;
    if u.rows() % 2 != 0 {
        return Err(Error::DimensionMismatch(format!(
            "a one-ancilla unitary has even dimension, got {}",
            u.rows()
        )));
    }
    let dev = u.two_sided_unitary_deviation();
    if dev > UNITARY_TOL {
        return Err(Error::NotUnitary(dev));
    }
    let n = u.rows() / 2;
    Ok(KrausChannel {
        kraus: vec![u.block(0, 0, n, n), u.block(n, 0, n, n)],
        n_in: n,
        n_out: n,
    })
}

fn branch(k: &ComplexMatrix, rho: &ComplexMatrix) -> ComplexMatrix {
    &(k * rho) * &k.adjoint()
}

fn hermitize(m: &ComplexMatrix) -> ComplexMatrix {
    let half = C64::new(0.5, 0.0);
    (m + &m.adjoint()).scale(half)
}

fn check_input(ch: &KrausChannel, rho: &DensityMatrix) -> Result<()> {
    if rho.dim() != ch.n_in {
        return Err(Error::DimensionMismatch(format!(
            "channel takes dimension {}, state has {}",
            ch.n_in,
            rho.dim()
        )));
    }
    Ok(())
}

/// `sum_i K_i rho K_i^dag`, symmetrized to remove rounding asymmetry.
pub fn apply_channel(ch: &KrausChannel, rho: &DensityMatrix) -> Result<DensityMatrix> {
    check_input(ch, rho)?;
    let out = ch
        .kraus
        .iter()
        .fold(ComplexMatrix::zeros(ch.n_out, ch.n_out), |acc, k| {
            &acc + &branch(k, rho.matrix())
        });
    DensityMatrix::new(hermitize(&out))
}

/// The unnormalized state `K_i rho K_i^dag` and its trace, the probability of
/// outcome `i`.
pub fn postselect_branch(
    ch: &KrausChannel,
    i: usize,
    rho: &DensityMatrix,
) -> Result<(ComplexMatrix, f64)> {
    check_input(ch, rho)?;
    let k = ch.kraus.get(i).ok_or_else(|| {
        Error::DimensionMismatch(format!("outcome {i} of a {}-outcome channel", ch.kraus.len()))
    })?;
    let sub = hermitize(&branch(k, rho.matrix()));
    let prob = sub.trace().re;
    Ok((sub, prob))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{random_gaussian, random_unit_vector, random_unitary};
    use crate::realize::{apply_postselected, dilate_literal};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_density(rng: &mut ChaCha8Rng, n: usize) -> DensityMatrix {
        let g = random_gaussian(rng, n, n);
        let m = &g * &g.adjoint();
        let t = m.trace().re;
        DensityMatrix::new(hermitize(&m.scale(C64::new(1.0 / t, 0.0)))).unwrap()
    }

    fn weak_contraction(rng: &mut ChaCha8Rng, n: usize) -> ComplexMatrix {
        let a = random_gaussian(rng, n, n);
        a.scale(C64::new(1.0 / (1.01 * a.frobenius_norm()), 0.0))
    }

    #[test]
    fn identity_unitary_leaves_the_ancilla_alone() {
        let ch = build_kraus(&ComplexMatrix::identity(2)).unwrap();
        assert_eq!(ch.kraus[0], ComplexMatrix::identity(1));
        assert_eq!(ch.kraus[1], ComplexMatrix::zeros(1, 1));
        let rho = DensityMatrix::pure(&[C64::new(1.0, 0.0)]).unwrap();
        assert_eq!(postselect_branch(&ch, 1, &rho).unwrap().1, 0.0);
    }

    #[test]
    fn success_operator_is_the_contraction() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let l = weak_contraction(&mut rng, 3);
        let ch = build_kraus(&dilate_literal(&l).unwrap()).unwrap();
        assert!((&ch.kraus[0] - &l).max_abs() < 1e-12);
    }

    #[test]
    fn random_unitaries_give_trace_preserving_channels() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..500 {
            let n = 1 + (rng.random::<u32>() % 4) as usize;
            let ch = build_kraus(&random_unitary(&mut rng, 2 * n)).unwrap();
            assert!(ch.completeness_deviation() < 1e-10);
        }
    }

    #[test]
    fn rejects_non_unitary_and_odd_inputs() {
        let m = ComplexMatrix::from_real_rows(&[&[1.0, 1.0], &[0.0, 1.0]]);
        assert!(matches!(build_kraus(&m), Err(Error::NotUnitary(_))));
        assert!(matches!(
            build_kraus(&ComplexMatrix::identity(3)),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn identity_channel_fixes_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let ch = build_kraus(&ComplexMatrix::identity(6)).unwrap();
        let rho = random_density(&mut rng, 3);
        let out = apply_channel(&ch, &rho).unwrap();
        assert!((out.matrix() - rho.matrix()).max_abs() < 1e-14);
    }

    #[test]
    fn dilated_unitary_acts_by_conjugation() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let v = random_unitary(&mut rng, 3);
        let ch = build_kraus(&dilate_literal(&v).unwrap()).unwrap();
        let rho = DensityMatrix::pure(&random_unit_vector(&mut rng, 3)).unwrap();
        let out = apply_channel(&ch, &rho).unwrap();
        let expected = &(&v * rho.matrix()) * &v.adjoint();
        assert!((out.matrix() - &expected).max_abs() < 1e-10);
        assert!((postselect_branch(&ch, 0, &rho).unwrap().1 - 1.0).abs() < 1e-10);
    }

    #[test]
    fn outputs_are_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let n = 1 + (rng.random::<u32>() % 4) as usize;
            let ch = build_kraus(&random_unitary(&mut rng, 2 * n)).unwrap();
            let rho = random_density(&mut rng, n);
            let out = apply_channel(&ch, &rho).unwrap();
            assert!((out.matrix().trace().re - 1.0).abs() < 1e-10);
            assert!(hermitian_eigensystem(out.matrix()).unwrap().min() >= -1e-9);
            let p0 = postselect_branch(&ch, 0, &rho).unwrap().1;
            let p1 = postselect_branch(&ch, 1, &rho).unwrap().1;
            assert!((p0 + p1 - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn diagonal_example_probability() {
        let l = ComplexMatrix::from_diagonal(&[0.5, 1.0]);
        let ch = build_kraus(&dilate_literal(&l).unwrap()).unwrap();
        let rho = DensityMatrix::pure(&[C64::new(1.0, 0.0), C64::new(0.0, 0.0)]).unwrap();
        let (_, p) = postselect_branch(&ch, 0, &rho).unwrap();
        assert!((p - 0.25).abs() < 1e-12);
    }

    #[test]
    fn agrees_with_the_pure_state_path() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..200 {
            let l = weak_contraction(&mut rng, 3);
            let u = dilate_literal(&l).unwrap();
            let psi = random_unit_vector(&mut rng, 3);
            let ch = build_kraus(&u).unwrap();
            let (_, p) = postselect_branch(&ch, 0, &DensityMatrix::pure(&psi).unwrap()).unwrap();
            let pure = apply_postselected(&u, &ComplexMatrix::column_vector(&psi)).unwrap();
            let lpsi = l.apply(&psi);
            let expected: f64 = lpsi.iter().map(|z| z.norm_sqr()).sum();
            assert!((p - pure.success_prob).abs() < 1e-10);
            assert!((p - expected).abs() < 1e-8);
        }
    }

    #[test]
    fn density_validation() {
        let not_unit = ComplexMatrix::from_diagonal(&[0.5, 0.4]);
        assert!(matches!(DensityMatrix::new(not_unit), Err(Error::NotNormalized(_))));
        let negative = ComplexMatrix::from_diagonal(&[1.5, -0.5]);
        assert!(matches!(DensityMatrix::new(negative), Err(Error::NotPsd(_))));
        let skew = ComplexMatrix::from_real_rows(&[&[0.5, 0.1], &[0.0, 0.5]]);
        assert!(matches!(DensityMatrix::new(skew), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn dimension_checks() {
        let ch = build_kraus(&ComplexMatrix::identity(4)).unwrap();
        let rho = DensityMatrix::pure(&[C64::new(1.0, 0.0)]).unwrap();
        assert!(matches!(apply_channel(&ch, &rho), Err(Error::DimensionMismatch(_))));
        let rho2 = DensityMatrix::pure(&[C64::new(1.0, 0.0), C64::new(0.0, 0.0)]).unwrap();
        assert!(matches!(postselect_branch(&ch, 2, &rho2), Err(Error::DimensionMismatch(_))));
    }
}
