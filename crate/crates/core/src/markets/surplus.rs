use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::DomainBox;
use crate::oracle::AffineResponse;
use crate::solver::{Projection, ResponseSystem};

type PlayerMap = Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>;
type MarketMap = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Players with surplus stock.
///
/// Each player's state is `(realized, surplus)`. Player responses `f1(x, y, dx)`
/// and `f2(x, y, dy)` give new production levels `u1, u2`; the market answers
/// with surpluses `Q1(u1, u2)`, `Q2(u1, u2)`, and the realized quantity is
/// production minus surplus.
#[derive(Clone)]
pub struct SurplusModel {
    f1: PlayerMap,
    f2: PlayerMap,
    q1: MarketMap,
    q2: MarketMap,
}

impl fmt::Debug for SurplusModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SurplusModel").finish_non_exhaustive()
    }
}

impl SurplusModel {
    pub fn new<F1, F2, Q1, Q2>(f1: F1, f2: F2, q1: Q1, q2: Q2) -> Self
    where
        F1: Fn(f64, f64, f64) -> f64 + Send + Sync + 'static,
        F2: Fn(f64, f64, f64) -> f64 + Send + Sync + 'static,
        Q1: Fn(f64, f64) -> f64 + Send + Sync + 'static,
        Q2: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        Self { f1: Arc::new(f1), f2: Arc::new(f2), q1: Arc::new(q1), q2: Arc::new(q2) }
    }

    /// Production levels `(u1, u2)` at state `(x, dx, y, dy)`.
    pub fn productions(&self, x: f64, dx: f64, y: f64, dy: f64) -> (f64, f64) {
        ((self.f1)(x, y, dx), (self.f2)(x, y, dy))
    }

    /// `(F1, F2)` as `((u1 - Q1, Q1), (u2 - Q2, Q2))`.
    pub fn respond(&self, x: f64, dx: f64, y: f64, dy: f64) -> ([f64; 2], [f64; 2]) {
        let (u1, u2) = self.productions(x, dx, y, dy);
        let s1 = (self.q1)(u1, u2);
        let s2 = (self.q2)(u1, u2);
        ([u1 - s1, s1], [u2 - s2, s2])
    }
}

/// Affine surplus model coefficients.
///
/// `f1 = c + cx x + cy y + cs dx` is stored as `[c, cx, cy, cs]` (likewise
/// `f2` with `dy`), and `Q_i = a u1 + b u2` as `[a, b]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AffineSurplus {
    pub f1: [f64; 4],
    pub f2: [f64; 4],
    pub q1: [f64; 2],
    pub q2: [f64; 2],
}

impl AffineSurplus {
    pub fn model(&self) -> SurplusModel {
        let Self { f1, f2, q1, q2 } = *self;
        SurplusModel::new(
            move |x, y, dx| f1[0] + f1[1] * x + f1[2] * y + f1[3] * dx,
            move |x, y, dy| f2[0] + f2[1] * x + f2[2] * y + f2[3] * dy,
            move |u1, u2| q1[0] * u1 + q1[1] * u2,
            move |u1, u2| q2[0] * u1 + q2[1] * u2,
        )
    }

    /// The composed map on `(x, dx, y, dy)` as one affine response.
    pub fn composed(&self) -> AffineResponse {
        let Self { f1, f2, q1, q2 } = *self;
        // rows of u1 and u2 over (1, x, dx, y, dy)
        let u1 = [f1[0], f1[1], f1[3], f1[2], 0.0];
        let u2 = [f2[0], f2[1], 0.0, f2[2], f2[3]];
        let combine = |a: f64, b: f64| -> [f64; 5] { std::array::from_fn(|i| a * u1[i] + b * u2[i]) };
        let rows =
            [combine(1.0 - q1[0], -q1[1]), combine(q1[0], q1[1]), combine(-q2[0], 1.0 - q2[1]), combine(q2[0], q2[1])];
        AffineResponse {
            matrix: rows.iter().map(|r| r[1..].to_vec()).collect(),
            offset: rows.iter().map(|r| r[0]).collect(),
            dim1: 2,
        }
    }
}

/// Response system over `(realized, surplus)` bundles for both players.
pub fn build_surplus(sm: &SurplusModel, domain1: DomainBox, domain2: DomainBox) -> Result<ResponseSystem> {
    if domain1.dim() != 2 || domain2.dim() != 2 {
        return Err(Error::Configuration("surplus model bundles are (realized, surplus) pairs".into()));
    }
    let (m1, m2) = (sm.clone(), sm.clone());
    ResponseSystem::new(
        move |x, y| m1.respond(x[0], x[1], y[0], y[1]).0.to_vec(),
        move |x, y| m2.respond(x[0], x[1], y[0], y[1]).1.to_vec(),
        domain1,
        domain2,
        Projection::ClampBelowZero,
    )
}
