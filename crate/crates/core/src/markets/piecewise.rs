use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::DomainBox;
use crate::solver::{Projection, ResponseSystem};

/// One constant piece. The first piece of a response is closed `[lo, hi]`,
/// later pieces are half-open `(lo, hi]`, so a breakpoint belongs to the
/// piece on its left.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Piece {
    pub lo: f64,
    pub hi: f64,
    pub value: f64,
}

/// Piecewise-constant response of one variable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PiecewiseResponse {
    pieces: Vec<Piece>,
}

impl PiecewiseResponse {
    /// Pieces must be contiguous and increasing: each `lo` equals the
    /// previous `hi`.
    pub fn new(pieces: Vec<Piece>) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::Configuration("piecewise response needs a piece".into()));
        }
        for (i, p) in pieces.iter().enumerate() {
            if !(p.lo.is_finite() && p.hi.is_finite() && p.value.is_finite()) {
                return Err(Error::Configuration(format!("piece {i} has non-finite bounds or value")));
            }
            // only the first piece may be degenerate: (lo, lo] is empty
            if p.lo > p.hi || (i > 0 && p.lo == p.hi) {
                return Err(Error::Configuration(format!("piece {i} is empty: [{}, {}]", p.lo, p.hi)));
            }
            if i > 0 {
                let prev = pieces[i - 1].hi;
                if p.lo < prev {
                    return Err(Error::Configuration(format!("piece {i} overlaps its predecessor at {}", p.lo)));
                }
                if p.lo > prev {
                    return Err(Error::Configuration(format!("gap between {prev} and {}", p.lo)));
                }
            }
        }
        Ok(Self { pieces })
    }

    /// Convenience for `[(lo, v0), (b1, v1), ...]`-style breakpoint lists:
    /// `values[i]` holds on the interval ending at `ends[i]`.
    pub fn from_breakpoints(lo: f64, ends: &[f64], values: &[f64]) -> Result<Self> {
        if ends.len() != values.len() {
            return Err(Error::Configuration("one value per interval end is required".into()));
        }
        let mut start = lo;
        let pieces = ends
            .iter()
            .zip(values)
            .map(|(&hi, &value)| {
                let p = Piece { lo: start, hi, value };
                start = hi;
                p
            })
            .collect();
        Self::new(pieces)
    }

    pub fn lo(&self) -> f64 {
        self.pieces[0].lo
    }

    pub fn hi(&self) -> f64 {
        self.pieces[self.pieces.len() - 1].hi
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    /// `NaN` outside `[lo, hi]`, which the solver reports as an evaluation error.
    pub fn eval(&self, x: f64) -> f64 {
        if !(x >= self.lo() && x <= self.hi()) {
            return f64::NAN;
        }
        self.pieces.iter().find(|p| x <= p.hi).map_or(f64::NAN, |p| p.value)
    }
}

/// System with `F1` reading only `x` and `F2` reading only `y`.
///
/// Each response must partition exactly its player's domain axis and take
/// values inside it.
pub fn build_piecewise(
    pr1: &PiecewiseResponse,
    pr2: &PiecewiseResponse,
    domain1: DomainBox,
    domain2: DomainBox,
) -> Result<ResponseSystem> {
    for (pr, dom, who) in [(pr1, &domain1, "first"), (pr2, &domain2, "second")] {
        if dom.dim() != 1 {
            return Err(Error::Configuration(format!("{who} domain must be one-dimensional")));
        }
        let iv = dom.intervals()[0];
        if pr.lo() != iv.lo || pr.hi() != iv.hi {
            return Err(Error::Configuration(format!(
                "{who} response covers [{}, {}] but the domain is [{}, {}]",
                pr.lo(),
                pr.hi(),
                iv.lo,
                iv.hi
            )));
        }
        if let Some(p) = pr.pieces().iter().find(|p| !iv.contains(p.value)) {
            return Err(Error::Configuration(format!("{who} response value {} leaves the domain", p.value)));
        }
    }
    let (r1, r2) = (pr1.clone(), pr2.clone());
    ResponseSystem::new(
        move |x, _| vec![r1.eval(x[0])],
        move |_, y| vec![r2.eval(y[0])],
        domain1,
        domain2,
        Projection::ClampBelowZero,
    )
}
