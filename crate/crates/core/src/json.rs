//! JSON wire formats.
//!
//! * matrix: `{"rows": r, "cols": c, "data": [[re, im], ...]}`, row-major
//! * complex scalar: `[re, im]`
//! * projective point: `{"coords": [[re, im], ...]}`
//! * Riemann point: `{"a": [re, im], "b": [re, im]}`
//! * suite: `{"n": n, "ell": l, "domain": [point, ...], "range": [point, ...]}`;
//!   for `n = 2` a point may also be a number, `"inf"`, `[re, im]` or a
//!   Riemann point
//! * dilation: `{"U": matrix, "scale_c": [re, im], "lambda_min": x,
//!   "lambda_max": y, "gsp": z}`
//!
//! [`to_string`] writes every float with 17 significant digits.

use std::io;

use serde::de::{self, DeserializeOwned, Deserializer};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};
use serde_json::ser::Formatter;

use crate::linalg::{ComplexMatrix, C64};
use crate::projective::{from_riemann, to_riemann, ProjectivePoint, RiemannPoint};
use crate::realize::DilationResult;
use crate::suites::{FitResult, Suite};

fn pair(z: &C64) -> [f64; 2] {
    [z.re, z.im]
}

fn unpair(p: [f64; 2]) -> C64 {
    C64::new(p[0], p[1])
}

/// Serde adapter for a complex scalar written as `[re, im]`.
pub mod complex_pair {
    use super::*;

    pub fn serialize<S: Serializer>(z: &C64, s: S) -> Result<S::Ok, S::Error> {
        pair(z).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<C64, D::Error> {
        <[f64; 2]>::deserialize(d).map(unpair)
    }
}

#[derive(Serialize, Deserialize)]
struct MatrixWire {
    rows: usize,
    cols: usize,
    data: Vec<[f64; 2]>,
}

impl Serialize for ComplexMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        MatrixWire {
            rows: self.rows(),
            cols: self.cols(),
            data: self.data().iter().map(pair).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let w = MatrixWire::deserialize(d)?;
        ComplexMatrix::new(w.rows, w.cols, w.data.into_iter().map(unpair).collect())
            .map_err(de::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
struct PointWire {
    coords: Vec<[f64; 2]>,
}

impl Serialize for ProjectivePoint {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        PointWire {
            coords: self.coords().iter().map(pair).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for ProjectivePoint {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let w = PointWire::deserialize(d)?;
        ProjectivePoint::new(w.coords.into_iter().map(unpair).collect()).map_err(de::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
struct RiemannWire {
    a: [f64; 2],
    b: [f64; 2],
}

impl Serialize for RiemannPoint {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        RiemannWire {
            a: pair(&self.a),
            b: pair(&self.b),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for RiemannPoint {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let w = RiemannWire::deserialize(d)?;
        RiemannPoint::from_homogeneous(unpair(w.a), unpair(w.b)).map_err(de::Error::custom)
    }
}

/// Any accepted spelling of a suite point.
#[derive(Deserialize)]
#[serde(untagged)]
enum PointInput {
    Point(ProjectivePoint),
    Riemann(RiemannPoint),
    Real(f64),
    Complex([f64; 2]),
    Word(String),
}

impl PointInput {
    fn into_point(self, n: usize) -> Result<ProjectivePoint, String> {
        let shorthand = |z: RiemannPoint| {
            if n == 2 {
                Ok(from_riemann(&z))
            } else {
                Err(format!("Riemann-sphere shorthand needs n = 2, got n = {n}"))
            }
        };
        match self {
            PointInput::Point(p) if p.dim() == n => Ok(p),
            PointInput::Point(p) => Err(format!("point of dimension {} in a suite with n = {n}", p.dim())),
            PointInput::Riemann(z) => shorthand(z),
            PointInput::Real(x) if x.is_finite() => shorthand(RiemannPoint::real(x)),
            PointInput::Complex([re, im]) if re.is_finite() && im.is_finite() => {
                shorthand(RiemannPoint::finite(C64::new(re, im)))
            }
            PointInput::Word(w) if matches!(w.as_str(), "inf" | "infinity" | "∞") => {
                shorthand(RiemannPoint::infinity())
            }
            PointInput::Word(w) => Err(format!("unrecognized point {w:?}")),
            _ => Err("non-finite point value".into()),
        }
    }
}

/// A point of the Riemann sphere in any accepted spelling: a number,
/// `"inf"`, `[re, im]`, `{"a": .., "b": ..}` or `{"coords": [z1, z2]}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiemannShorthand(pub RiemannPoint);

impl<'de> Deserialize<'de> for RiemannShorthand {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let p = PointInput::deserialize(d)?.into_point(2).map_err(de::Error::custom)?;
        to_riemann(&p).map(RiemannShorthand).map_err(de::Error::custom)
    }
}

#[derive(Serialize)]
struct SuiteOut<'a> {
    n: usize,
    ell: usize,
    domain: &'a [ProjectivePoint],
    range: &'a [ProjectivePoint],
}

#[derive(Deserialize)]
struct SuiteIn {
    n: usize,
    ell: usize,
    domain: Vec<PointInput>,
    range: Vec<PointInput>,
}

impl Serialize for Suite {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        SuiteOut {
            n: self.n(),
            ell: self.ell(),
            domain: self.domain(),
            range: self.range(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Suite {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let w = SuiteIn::deserialize(d)?;
        if w.domain.len() != w.ell || w.range.len() != w.ell {
            return Err(de::Error::custom(format!(
                "ell = {} but domain has {} points and range has {}",
                w.ell,
                w.domain.len(),
                w.range.len()
            )));
        }
        let convert = |pts: Vec<PointInput>| {
            pts.into_iter()
                .map(|p| p.into_point(w.n))
                .collect::<Result<Vec<_>, _>>()
                .map_err(de::Error::custom)
        };
        let domain = convert(w.domain)?;
        let range = convert(w.range)?;
        Suite::new(domain, range).map_err(de::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
struct DilationWire {
    #[serde(rename = "U")]
    u: ComplexMatrix,
    #[serde(with = "complex_pair")]
    scale_c: C64,
    lambda_min: f64,
    lambda_max: f64,
    gsp: f64,
}

impl Serialize for DilationResult {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        DilationWire {
            u: self.u.clone(),
            scale_c: self.scale_c,
            lambda_min: self.lambda_min,
            lambda_max: self.lambda_max,
            gsp: self.gsp,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for DilationResult {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let w = DilationWire::deserialize(d)?;
        Ok(DilationResult {
            u: w.u,
            scale_c: w.scale_c,
            lambda_min: w.lambda_min,
            lambda_max: w.lambda_max,
            gsp: w.gsp,
        })
    }
}

#[derive(Serialize)]
struct FitOut<'a> {
    tau: &'a Suite,
    #[serde(rename = "L")]
    l: &'a ComplexMatrix,
    max_fs: f64,
    converged: bool,
}

#[derive(Deserialize)]
struct FitIn {
    tau: Suite,
    #[serde(rename = "L")]
    l: ComplexMatrix,
    max_fs: f64,
    converged: bool,
}

impl Serialize for FitResult {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        FitOut {
            tau: &self.tau,
            l: &self.l,
            max_fs: self.max_fs,
            converged: self.converged,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for FitResult {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let w = FitIn::deserialize(d)?;
        Ok(FitResult {
            tau: w.tau,
            l: w.l,
            max_fs: w.max_fs,
            converged: w.converged,
        })
    }
}

/// Compact output with floats as 17 significant digits.
struct SeventeenDigits;

impl Formatter for SeventeenDigits {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            write!(w, "{value:.16e}")
        } else {
            w.write_all(b"null")
        }
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, f64::from(value))
    }
}

pub fn to_writer<W: io::Write, T: Serialize + ?Sized>(w: W, value: &T) -> serde_json::Result<()> {
    let mut ser = serde_json::Serializer::with_formatter(w, SeventeenDigits);
    value.serialize(&mut ser)
}

pub fn to_string<T: Serialize + ?Sized>(value: &T) -> serde_json::Result<String> {
    let mut buf = Vec::new();
    to_writer(&mut buf, value)?;
    Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
}

pub fn from_str<T: DeserializeOwned>(s: &str) -> serde_json::Result<T> {
    serde_json::from_str(s)
}
