//! Geometry of `CP^{n-1}` and, for `n = 2`, of the Riemann sphere.

use crate::error::{Error, Result};
use crate::linalg::{inner, norm, numerical_rank, ComplexMatrix, C64, RANK_TOL};

/// Two points closer than this (Fubini-Study) are the same point.
pub const POINT_EQ_TOL: f64 = 1e-9;

/// Below this fraction of `|L|_max`, `L v` counts as the zero vector.
pub const KERNEL_TOL: f64 = 1e-10;

/// A point of `CP^{n-1}` stored as its canonical representative: unit norm,
/// with the first largest-magnitude entry real and positive.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectivePoint {
    coords: Vec<C64>,
}

impl ProjectivePoint {
    pub fn new(coords: Vec<C64>) -> Result<Self> {
        if coords.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        let nv = norm(&coords);
        if nv == 0.0 || coords.is_empty() {
            return Err(Error::ZeroVector);
        }
        let (k, _) = coords
            .iter()
            .enumerate()
            .fold((0, -1.0), |best, (i, z)| if z.norm() > best.1 { (i, z.norm()) } else { best });
        // Already canonical: keep the bits so serialized points read back
        // unchanged.
        if coords[k].im == 0.0 && coords[k].re > 0.0 && (nv - 1.0).abs() <= 4.0 * f64::EPSILON {
            return Ok(Self { coords });
        }
        let phase = coords[k].conj() / coords[k].norm();
        let mut coords: Vec<C64> = coords.iter().map(|z| z * phase / nv).collect();
        coords[k] = C64::new(coords[k].norm(), 0.0);
        Ok(Self { coords })
    }

    pub fn from_real(coords: &[f64]) -> Result<Self> {
        Self::new(coords.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    /// `Q e_i` in `CP^{n-1}`.
    pub fn basis(n: usize, i: usize) -> Self {
        let mut v = vec![C64::new(0.0, 0.0); n];
        v[i] = C64::new(1.0, 0.0);
        Self { coords: v }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[C64] {
        &self.coords
    }

    pub fn coincides(&self, other: &ProjectivePoint) -> bool {
        fs_distance(self, other).is_ok_and(|d| d <= POINT_EQ_TOL)
    }
}

/// Fubini-Study distance between the points named by two nonzero vectors,
/// `arccos(|<u|v>| / (|u| |v|))`.
///
/// Evaluated as `atan2(|v_perp|, |<u|v>|)`, which has the same value but
/// keeps full relative accuracy for nearby points.
pub fn fs_distance_vectors(u: &[C64], v: &[C64]) -> f64 {
    let nu = norm(u);
    let nv = norm(v);
    let overlap = inner(u, v) / (nu * nu);
    let perp: f64 = u
        .iter()
        .zip(v)
        .map(|(a, b)| (b - overlap * a).norm_sqr())
        .sum::<f64>()
        .sqrt();
    let cos = (overlap.norm() * nu / nv).min(1.0);
    (perp / nv).atan2(cos)
}

pub fn fs_distance(p: &ProjectivePoint, q: &ProjectivePoint) -> Result<f64> {
    if p.dim() != q.dim() {
        return Err(Error::DimensionMismatch(format!(
            "points of dimension {} and {}",
            p.dim(),
            q.dim()
        )));
    }
    Ok(fs_distance_vectors(&p.coords, &q.coords))
}

/// Image of `p` under the partial map `Q L`; `None` when `p` lies in the
/// kernel of `L`.
pub fn apply_ql(l: &ComplexMatrix, p: &ProjectivePoint) -> Result<Option<ProjectivePoint>> {
    if !l.is_square() || l.cols() != p.dim() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} operator on a point of dimension {}",
            l.rows(),
            l.cols(),
            p.dim()
        )));
    }
    let image = l.apply(&p.coords);
    if norm(&image) <= KERNEL_TOL * l.max_abs() {
        return Ok(None);
    }
    ProjectivePoint::new(image).map(Some)
}

/// All `k`-element index subsets of `0..m`, in lexicographic order.
pub(crate) fn combinations(m: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, m: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..m {
            if m - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, m, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, m, k, &mut Vec::with_capacity(k), &mut out);
    out
}

/// True iff every `min(n, m)` of the representing vectors are linearly
/// independent. Smaller subsets then follow automatically.
pub fn in_general_position(points: &[ProjectivePoint], n: usize) -> bool {
    if points.is_empty() || points.iter().any(|p| p.dim() != n) {
        return false;
    }
    let k = n.min(points.len());
    combinations(points.len(), k).into_iter().all(|subset| {
        let cols: Vec<Vec<C64>> = subset.iter().map(|&i| points[i].coords.clone()).collect();
        let m = ComplexMatrix::from_columns(n, &cols);
        numerical_rank(&m, RANK_TOL).is_ok_and(|r| r == k)
    })
}

/// Invertible `L` with `L e_i ∝ v_i` for `i < n` and `L (e_1 + ... + e_n) ∝ v_{n+1}`.
fn standard_frame(vs: &[ProjectivePoint], n: usize) -> Result<ComplexMatrix> {
    let cols: Vec<Vec<C64>> = vs[..n].iter().map(|p| p.coords.clone()).collect();
    let base = ComplexMatrix::from_columns(n, &cols);
    let weights = base.solve(&ComplexMatrix::column_vector(&vs[n].coords))?;
    Ok(ComplexMatrix::from_fn(n, n, |i, j| base[(i, j)] * weights[(j, 0)]))
}

/// The projective linear map sending `ps[i]` to `qs[i]` for all `n + 1`
/// points, as a matrix normalized to unit max-entry. Unique up to scale.
pub fn pl_from_correspondence(
    ps: &[ProjectivePoint],
    qs: &[ProjectivePoint],
) -> Result<ComplexMatrix> {
    let n = ps.first().map_or(0, ProjectivePoint::dim);
    if n == 0 || ps.len() != n + 1 || qs.len() != n + 1 {
        return Err(Error::DimensionMismatch(format!(
            "need n + 1 = {} points on each side, got {} and {}",
            n + 1,
            ps.len(),
            qs.len()
        )));
    }
    if !in_general_position(ps, n) || !in_general_position(qs, n) {
        return Err(Error::NotGeneralPosition);
    }
    let from = standard_frame(ps, n).map_err(|_| Error::NotGeneralPosition)?;
    let to = standard_frame(qs, n).map_err(|_| Error::NotGeneralPosition)?;
    let l = &to * &from.inverse().map_err(|_| Error::NotGeneralPosition)?;
    Ok(l.scale(C64::new(1.0 / l.max_abs(), 0.0)))
}

/// A point of the Riemann sphere as a homogeneous pair `(a, b)` standing for
/// `a / b`, with `b = 0` meaning infinity. Scaled so `max(|a|, |b|) = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiemannPoint {
    pub a: C64,
    pub b: C64,
}

impl RiemannPoint {
    pub fn from_homogeneous(a: C64, b: C64) -> Result<Self> {
        if !(a.re.is_finite() && a.im.is_finite() && b.re.is_finite() && b.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        let m = a.norm().max(b.norm());
        if m == 0.0 {
            return Err(Error::ZeroVector);
        }
        Ok(Self { a: a / m, b: b / m })
    }

    pub fn finite(z: C64) -> Self {
        Self::from_homogeneous(z, C64::new(1.0, 0.0)).expect("finite value")
    }

    pub fn real(x: f64) -> Self {
        Self::finite(C64::new(x, 0.0))
    }

    pub fn infinity() -> Self {
        Self {
            a: C64::new(1.0, 0.0),
            b: C64::new(0.0, 0.0),
        }
    }

    /// `a / b`, or `None` at infinity.
    pub fn value(&self) -> Option<C64> {
        (self.b != C64::new(0.0, 0.0)).then(|| self.a / self.b)
    }

    pub fn is_infinite(&self) -> bool {
        self.b == C64::new(0.0, 0.0)
    }

    /// Euclidean distance between the Bloch-sphere images, `2 sin(FS)`.
    pub fn chordal_distance(&self, other: &RiemannPoint) -> f64 {
        let det = self.a * other.b - self.b * other.a;
        let ns = (self.a.norm_sqr() + self.b.norm_sqr()).sqrt();
        let no = (other.a.norm_sqr() + other.b.norm_sqr()).sqrt();
        (2.0 * det.norm() / (ns * no)).min(2.0)
    }

    pub fn fs_distance(&self, other: &RiemannPoint) -> f64 {
        fs_distance_vectors(&[self.a, self.b], &[other.a, other.b])
    }

    pub fn coincides(&self, other: &RiemannPoint) -> bool {
        self.fs_distance(other) <= POINT_EQ_TOL
    }
}

/// `Q(a, b) ↦ a / b`.
pub fn to_riemann(p: &ProjectivePoint) -> Result<RiemannPoint> {
    if p.dim() != 2 {
        return Err(Error::WrongDimension {
            expected: 2,
            actual: p.dim(),
        });
    }
    RiemannPoint::from_homogeneous(p.coords[0], p.coords[1])
}

pub fn from_riemann(z: &RiemannPoint) -> ProjectivePoint {
    ProjectivePoint::new(vec![z.a, z.b]).expect("Riemann points are nonzero")
}

/// Inverse stereographic projection from the north pole through the
/// equatorial plane. Infinity goes to `(0, 0, 1)`, zero to `(0, 0, -1)`.
pub fn to_bloch(z: &RiemannPoint) -> [f64; 3] {
    let ab = z.a * z.b.conj();
    let total = z.a.norm_sqr() + z.b.norm_sqr();
    [
        2.0 * ab.re / total,
        2.0 * ab.im / total,
        (z.a.norm_sqr() - z.b.norm_sqr()) / total,
    ]
}

/// Fractional linear transformation `z ↦ (m00 z + m01) / (m10 z + m11)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Moebius {
    m: ComplexMatrix,
}

impl Moebius {
    /// Smallest `|det|` accepted after scaling the matrix to unit max-entry.
    pub const DET_TOL: f64 = 1e-12;

    pub fn new(m: ComplexMatrix) -> Result<Self> {
        if m.rows() != 2 || m.cols() != 2 {
            return Err(Error::WrongDimension {
                expected: 2,
                actual: m.rows().max(m.cols()),
            });
        }
        if !m.is_finite() {
            return Err(Error::NonFinite);
        }
        let top = m.max_abs();
        if top == 0.0 {
            return Err(Error::Singular);
        }
        let m = m.scale(C64::new(1.0 / top, 0.0));
        if m.determinant()?.norm() < Self::DET_TOL {
            return Err(Error::Singular);
        }
        Ok(Self { m })
    }

    pub fn from_coefficients(c1: C64, c2: C64, c3: C64, c4: C64) -> Result<Self> {
        Self::new(ComplexMatrix::from_rows(&[vec![c1, c2], vec![c3, c4]]))
    }

    pub fn identity() -> Self {
        Self {
            m: ComplexMatrix::identity(2),
        }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.m
    }

    pub fn apply(&self, z: &RiemannPoint) -> RiemannPoint {
        let m = &self.m;
        RiemannPoint::from_homogeneous(
            m[(0, 0)] * z.a + m[(0, 1)] * z.b,
            m[(1, 0)] * z.a + m[(1, 1)] * z.b,
        )
        .expect("invertible maps send nonzero pairs to nonzero pairs")
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Moebius) -> Moebius {
        Moebius::new(&self.m * &other.m).expect("product of invertible maps")
    }

    pub fn inverse(&self) -> Moebius {
        let m = &self.m;
        Moebius::from_coefficients(m[(1, 1)], -m[(0, 1)], -m[(1, 0)], m[(0, 0)])
            .expect("inverse of an invertible map")
    }
}

pub fn moebius_apply(f: &Moebius, z: &RiemannPoint) -> RiemannPoint {
    f.apply(z)
}

/// Coincidence pattern of four points on the Riemann sphere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum TetradConfiguration {
    Distinct,
    TwoOneOne,
    TwoTwo,
    ThreeOne,
    Four,
}

/// Cluster sizes (descending) of the tetrad under [`POINT_EQ_TOL`], with
/// clusters closed transitively, and the cluster label of each point.
fn cluster(points: &[RiemannPoint; 4]) -> ([usize; 4], Vec<usize>) {
    let mut label = [0, 1, 2, 3];
    for i in 0..4 {
        for j in i + 1..4 {
            if points[i].coincides(&points[j]) {
                let (from, to) = (label[j].max(label[i]), label[j].min(label[i]));
                for l in label.iter_mut() {
                    if *l == from {
                        *l = to;
                    }
                }
            }
        }
    }
    let mut sizes = [0usize; 4];
    for &l in &label {
        sizes[l] += 1;
    }
    sizes.sort_unstable_by(|a, b| b.cmp(a));
    (sizes, label.to_vec())
}

pub fn tetrad_configuration(a: &RiemannPoint, b: &RiemannPoint, c: &RiemannPoint, d: &RiemannPoint) -> TetradConfiguration {
    match cluster(&[*a, *b, *c, *d]).0 {
        [4, ..] => TetradConfiguration::Four,
        [3, ..] => TetradConfiguration::ThreeOne,
        [2, 2, ..] => TetradConfiguration::TwoTwo,
        [2, ..] => TetradConfiguration::TwoOneOne,
        _ => TetradConfiguration::Distinct,
    }
}

fn bracket(x: &RiemannPoint, y: &RiemannPoint) -> C64 {
    x.a * y.b - x.b * y.a
}

/// Numerator and denominator of the cross-ratio with all fractions cleared:
/// `[ac][bd] / ([bc][ad])`, where `[xy] = x_a y_b - x_b y_a`.
pub fn cross_ratio_homogeneous(
    a: &RiemannPoint,
    b: &RiemannPoint,
    c: &RiemannPoint,
    d: &RiemannPoint,
) -> (C64, C64) {
    (bracket(a, c) * bracket(b, d), bracket(b, c) * bracket(a, d))
}

/// `((a-c)/(b-c)) * ((b-d)/(a-d))`, extended continuously to tetrads with
/// one coincident pair (2+1+1) and to 2+2 tetrads, where the value is forced
/// to 1, 0 or infinity.
pub fn cross_ratio(
    a: &RiemannPoint,
    b: &RiemannPoint,
    c: &RiemannPoint,
    d: &RiemannPoint,
) -> Result<RiemannPoint> {
    let (sizes, label) = cluster(&[*a, *b, *c, *d]);
    match sizes {
        [3, ..] | [4, ..] => Err(Error::SingularConfiguration),
        [2, 2, ..] => Ok(if label[0] == label[1] {
            RiemannPoint::real(1.0)
        } else if label[0] == label[2] {
            RiemannPoint::real(0.0)
        } else {
            RiemannPoint::infinity()
        }),
        _ => {
            let (num, den) = cross_ratio_homogeneous(a, b, c, d);
            RiemannPoint::from_homogeneous(num, den).map_err(|_| Error::SingularConfiguration)
        }
    }
}
