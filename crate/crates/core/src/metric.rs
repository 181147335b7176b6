//! Points, coordinate boxes and the L1 / product metrics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One player's state: a list of real coordinates (outputs, or
/// `(realized, surplus)` pairs in the surplus model).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Bundle(Vec<f64>);

impl Bundle {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::Configuration("bundle needs at least one coordinate".into()));
        }
        if let Some(bad) = coords.iter().find(|c| !c.is_finite()) {
            return Err(Error::Configuration(format!("non-finite coordinate {bad}")));
        }
        Ok(Self(coords))
    }

    /// Builds a bundle without validation. Non-finite values are caught later
    /// by the solver's evaluation check.
    pub fn from_raw(coords: Vec<f64>) -> Self {
        Self(coords)
    }

    pub fn scalar(v: f64) -> Self {
        Self(vec![v])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }
}

impl std::ops::Index<usize> for Bundle {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// A point of `X1 x X2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductPoint {
    pub first: Bundle,
    pub second: Bundle,
}

impl ProductPoint {
    pub fn new(first: Bundle, second: Bundle) -> Self {
        Self { first, second }
    }

    /// Point of a one-dimensional-per-player system.
    pub fn scalar(x: f64, y: f64) -> Self {
        Self::new(Bundle::scalar(x), Bundle::scalar(y))
    }

    pub fn from_vecs(first: Vec<f64>, second: Vec<f64>) -> Result<Self> {
        Ok(Self::new(Bundle::new(first)?, Bundle::new(second)?))
    }

    /// Splits a concatenated coordinate vector after `dim1` entries.
    pub fn from_concat(z: &[f64], dim1: usize) -> Self {
        Self::new(Bundle::from_raw(z[..dim1].to_vec()), Bundle::from_raw(z[dim1..].to_vec()))
    }

    pub fn concat(&self) -> Vec<f64> {
        let mut z = Vec::with_capacity(self.dim());
        z.extend_from_slice(self.first.coords());
        z.extend_from_slice(self.second.coords());
        z
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.first.dim(), self.second.dim())
    }

    pub fn dim(&self) -> usize {
        self.first.dim() + self.second.dim()
    }

    pub fn is_finite(&self) -> bool {
        self.first.is_finite() && self.second.is_finite()
    }

    /// Largest coordinate magnitude.
    pub fn max_abs(&self) -> f64 {
        self.first.coords().iter().chain(self.second.coords()).fold(0.0_f64, |m, c| m.max(c.abs()))
    }
}

/// Sum of absolute coordinate differences of two equal-length slices.
#[inline]
pub(crate) fn l1(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

/// L1 distance `sum_i |a_i - b_i|`.
pub fn l1_distance(a: &Bundle, b: &Bundle) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), found: b.dim() });
    }
    Ok(l1(a.coords(), b.coords()))
}

/// Product metric `rho = d1 + d2`.
pub fn product_distance(p: &ProductPoint, q: &ProductPoint) -> Result<f64> {
    Ok(l1_distance(&p.first, &q.first)? + l1_distance(&p.second, &q.second)?)
}

/// Closed interval `[lo, hi]`. Infinite ends are allowed for unbounded axes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || lo > hi {
            return Err(Error::Configuration(format!("invalid interval [{lo}, {hi}]")));
        }
        Ok(Self { lo, hi })
    }

    pub fn unbounded() -> Self {
        Self { lo: f64::NEG_INFINITY, hi: f64::INFINITY }
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn is_bounded(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    pub fn clamp(&self, v: f64) -> f64 {
        v.max(self.lo).min(self.hi)
    }
}

/// Axis-aligned box, one interval per coordinate of a bundle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DomainBox(Vec<Interval>);

impl DomainBox {
    pub fn new(intervals: Vec<Interval>) -> Result<Self> {
        if intervals.is_empty() {
            return Err(Error::Configuration("domain box needs at least one axis".into()));
        }
        Ok(Self(intervals))
    }

    /// `dim` copies of `[lo, hi]`.
    pub fn cube(dim: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![Interval::new(lo, hi)?; dim])
    }

    pub fn unbounded(dim: usize) -> Self {
        Self(vec![Interval::unbounded(); dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.0
    }

    pub fn is_bounded(&self) -> bool {
        self.0.iter().all(Interval::is_bounded)
    }

    pub fn contains(&self, b: &Bundle) -> bool {
        b.dim() == self.dim() && self.0.iter().zip(b.coords()).all(|(iv, &c)| iv.contains(c))
    }
}
