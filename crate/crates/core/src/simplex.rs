//! The integer simplex of confusion matrices with a fixed total and its
//! embedding as a regular tetrahedron.

use std::ops::{Add, Mul};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::confusion::{ConfusionMatrix, MeasureValue};
use crate::error::{Error, Result};
use crate::measures::{lookup, BoundMeasure, Params};
use crate::scalar::Scalar;

/// Number of confusion matrices with total `n`, C(n+3, 3).
pub fn grid_size(n: u64) -> u64 {
    (n + 1) * (n + 2) * (n + 3) / 6
}

/// Lexicographic walk over every (tp, fn, fp, tn) with sum `n`: tp is the
/// slowest index, then fn, then fp.
#[derive(Debug, Clone)]
pub struct GridIter {
    n: u64,
    next: Option<[u64; 3]>,
    remaining: u64,
}

impl Iterator for GridIter {
    type Item = ConfusionMatrix;

    fn next(&mut self) -> Option<Self::Item> {
        let [tp, fn_, fp] = self.next?;
        let n = self.n;
        let cm = ConfusionMatrix::new(tp, fn_, fp, n - tp - fn_ - fp);
        self.next = if tp + fn_ + fp < n {
            Some([tp, fn_, fp + 1])
        } else if tp + fn_ < n {
            Some([tp, fn_ + 1, 0])
        } else if tp < n {
            Some([tp + 1, 0, 0])
        } else {
            None
        };
        self.remaining -= 1;
        Some(cm)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let r = self.remaining as usize;
        (r, Some(r))
    }
}

impl ExactSizeIterator for GridIter {}

pub fn enumerate_grid(n: u64) -> Result<GridIter> {
    if n < 1 {
        return Err(Error::InvalidResolution(n));
    }
    Ok(GridIter { n, next: Some([0, 0, 0]), remaining: grid_size(n) })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point3<T>(pub [T; 3]);

impl<T: Scalar> Point3<T> {
    pub fn new(x: T, y: T, z: T) -> Self {
        Point3([x, y, z])
    }

    pub fn origin() -> Self {
        Point3([T::zero(); 3])
    }

    pub fn distance(&self, other: &Self) -> T {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(&a, &b)| (a - b) * (a - b))
            .sum::<T>()
            .sqrt()
    }
}

impl<T: Scalar> Add for Point3<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Point3([self.0[0] + rhs.0[0], self.0[1] + rhs.0[1], self.0[2] + rhs.0[2]])
    }
}

impl<T: Scalar> Mul<T> for Point3<T> {
    type Output = Self;
    fn mul(self, k: T) -> Self {
        Point3(self.0.map(|c| c * k))
    }
}

/// Weights of the TP, FN, FP and TN vertices.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BarycentricPoint<T> {
    pub a: T,
    pub b: T,
    pub c: T,
    pub d: T,
}

impl<T: Scalar> BarycentricPoint<T> {
    /// Validates non-negative weights summing to one.
    pub fn new(a: T, b: T, c: T, d: T) -> Result<Self> {
        let w = [a, b, c, d];
        if w.iter().any(|&x| !(x >= T::zero())) {
            return Err(Error::InvalidArgument("barycentric weights must be non-negative".into()));
        }
        let sum: T = w.into_iter().sum();
        if (sum - T::one()).abs() > T::tolerance() * T::from_count(4) {
            return Err(Error::InvalidArgument(format!("barycentric weights sum to {sum}, not 1")));
        }
        Ok(Self { a, b, c, d })
    }

    /// Divides non-negative weights by their sum.
    pub fn normalized(a: T, b: T, c: T, d: T) -> Result<Self> {
        let sum = a + b + c + d;
        if !(sum > T::zero()) {
            return Err(Error::InvalidArgument("barycentric weights must have a positive sum".into()));
        }
        Self::new(a / sum, b / sum, c / sum, d / sum)
    }

    pub fn from_counts(cm: &ConfusionMatrix) -> Self {
        let n = T::from_count(cm.total());
        Self {
            a: T::from_count(cm.tp) / n,
            b: T::from_count(cm.fn_) / n,
            c: T::from_count(cm.fp) / n,
            d: T::from_count(cm.tn) / n,
        }
    }

    pub fn weights(&self) -> [T; 4] {
        [self.a, self.b, self.c, self.d]
    }
}

/// Cartesian positions of the four tetrahedron vertices.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TetraVertexSet<T> {
    pub tp: Point3<T>,
    #[serde(rename = "fn")]
    pub fn_: Point3<T>,
    pub fp: Point3<T>,
    pub tn: Point3<T>,
}

impl<T: Scalar> TetraVertexSet<T> {
    /// Regular tetrahedron inscribed in the cube [-1,1]^3 scaled by 1/sqrt(3),
    /// so every vertex lies on the unit sphere. TP and TN share a face diagonal.
    pub fn canonical() -> Self {
        let s = T::one() / T::from_count(3).sqrt();
        let p = |x: f64, y: f64, z: f64| {
            Point3::new(T::from_f64_lossy(x) * s, T::from_f64_lossy(y) * s, T::from_f64_lossy(z) * s)
        };
        Self {
            tp: p(1.0, 1.0, 1.0),
            fn_: p(1.0, -1.0, -1.0),
            fp: p(-1.0, 1.0, -1.0),
            tn: p(-1.0, -1.0, 1.0),
        }
    }

    pub fn vertices(&self) -> [Point3<T>; 4] {
        [self.tp, self.fn_, self.fp, self.tn]
    }
}

impl<T: Scalar> Default for TetraVertexSet<T> {
    fn default() -> Self {
        Self::canonical()
    }
}

pub fn to_cartesian<T: Scalar>(bary: &BarycentricPoint<T>, verts: &TetraVertexSet<T>) -> Point3<T> {
    verts.tp * bary.a + verts.fn_ * bary.b + verts.fp * bary.c + verts.tn * bary.d
}

/// One evaluated grid point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FieldSample<T> {
    pub cm: ConfusionMatrix,
    pub bary: BarycentricPoint<T>,
    pub xyz: Point3<T>,
    pub value: MeasureValue<T>,
}

impl<T: Scalar> FieldSample<T> {
    pub fn new(cm: ConfusionMatrix, measure: &BoundMeasure<T>, verts: &TetraVertexSet<T>) -> Self {
        let bary = BarycentricPoint::from_counts(&cm);
        Self { cm, bary, xyz: to_cartesian(&bary, verts), value: measure.eval(&cm) }
    }
}

fn sample_points<T: Scalar>(points: &[ConfusionMatrix], measure: &BoundMeasure<T>) -> Vec<FieldSample<T>> {
    let verts = TetraVertexSet::canonical();
    points.par_iter().map(|&cm| FieldSample::new(cm, measure, &verts)).collect()
}

/// Evaluates a bound measure on every grid point, in enumeration order.
pub fn sample_bound<T: Scalar>(measure: &BoundMeasure<T>, n: u64) -> Result<Vec<FieldSample<T>>> {
    let points: Vec<_> = enumerate_grid(n)?.collect();
    Ok(sample_points(&points, measure))
}

pub fn sample_field<T: Scalar>(measure_id: &str, params: &Params<T>, n: u64) -> Result<Vec<FieldSample<T>>> {
    let bound = lookup(measure_id)?.bind(params)?;
    sample_bound(&bound, n)
}

/// Grid points on the six tetrahedron edges (at least two zero counts).
pub fn skeleton<T: Scalar>(measure_id: &str, params: &Params<T>, n: u64) -> Result<Vec<FieldSample<T>>> {
    let bound = lookup(measure_id)?.bind(params)?;
    let points: Vec<_> = enumerate_grid(n)?.filter(|cm| cm.zero_count() >= 2).collect();
    Ok(sample_points(&points, &bound))
}

/// Slice of the grid at a fixed number of actual positives.
///
/// Samples are stored row-major: row `r` holds `tn = r` (TNR ascending) and
/// column `c` holds `tp = c` (TPR ascending).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossSection<T> {
    pub n: u64,
    pub positives: u64,
    pub pos_fraction: T,
    pub samples: Vec<FieldSample<T>>,
}

impl<T: Scalar> CrossSection<T> {
    pub fn negatives(&self) -> u64 {
        self.n - self.positives
    }

    /// Number of columns, one per TPR step.
    pub fn tpr_steps(&self) -> usize {
        self.positives as usize + 1
    }

    /// Number of rows, one per TNR step.
    pub fn tnr_steps(&self) -> usize {
        self.negatives() as usize + 1
    }

    pub fn get(&self, row: usize, col: usize) -> &FieldSample<T> {
        &self.samples[row * self.tpr_steps() + col]
    }

    /// TPR at each column; `None` throughout when there are no positives.
    pub fn tpr_axis(&self) -> Vec<Option<T>> {
        (0..=self.positives).map(|tp| crate::confusion::ratio(tp, self.positives)).collect()
    }

    pub fn tnr_axis(&self) -> Vec<Option<T>> {
        let neg = self.negatives();
        (0..=neg).map(|tn| crate::confusion::ratio(tn, neg)).collect()
    }
}

/// Converts a positive-class fraction into an integer count at resolution `n`.
pub fn resolve_fraction<T: Scalar>(fraction: T, n: u64) -> Result<u64> {
    if n < 1 {
        return Err(Error::InvalidResolution(n));
    }
    let f = fraction.to_f64_lossy();
    let scaled = f * n as f64;
    let nearest = scaled.round();
    if (0.0..=1.0).contains(&f) && (scaled - nearest).abs() <= 1e-9 * n as f64 {
        return Ok(nearest as u64);
    }
    let clamp = |x: f64| x.clamp(0.0, n as f64);
    let lower = clamp(scaled.floor()) / n as f64;
    let upper = clamp(scaled.ceil()) / n as f64;
    Err(Error::Unrealizable {
        message: format!(
            "positive fraction {f} is not realizable at n={n}; nearest valid fractions are {lower} and {upper}"
        ),
        suggestions: vec![lower, upper],
    })
}

pub fn cross_section_bound<T: Scalar>(measure: &BoundMeasure<T>, n: u64, pos_fraction: T) -> Result<CrossSection<T>> {
    let positives = resolve_fraction(pos_fraction, n)?;
    let negatives = n - positives;
    let points: Vec<_> = (0..=negatives)
        .flat_map(|tn| {
            (0..=positives).map(move |tp| ConfusionMatrix::new(tp, positives - tp, negatives - tn, tn))
        })
        .collect();
    Ok(CrossSection { n, positives, pos_fraction, samples: sample_points(&points, measure) })
}

pub fn cross_section<T: Scalar>(
    measure_id: &str,
    params: &Params<T>,
    n: u64,
    pos_fraction: T,
) -> Result<CrossSection<T>> {
    let bound = lookup(measure_id)?.bind(params)?;
    cross_section_bound(&bound, n, pos_fraction)
}
