use std::fmt;
use std::sync::Arc;

use crate::metric::DomainBox;
use crate::oracle::{finite_difference, second_difference};
use crate::solver::{Projection, ResponseSystem};
use crate::Result;

type Price = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
type Cost = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Cournot duopoly: inverse demand `P(x, y)` and costs `c1(x)`, `c2(y)`.
///
/// Profits are `x P(x, y) - c1(x)` and `y P(x, y) - c2(y)`.
#[derive(Clone)]
pub struct CournotModel {
    price: Price,
    cost1: Cost,
    cost2: Cost,
}

impl fmt::Debug for CournotModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CournotModel").finish_non_exhaustive()
    }
}

impl CournotModel {
    pub fn new<P, C1, C2>(price: P, cost1: C1, cost2: C2) -> Self
    where
        P: Fn(f64, f64) -> f64 + Send + Sync + 'static,
        C1: Fn(f64) -> f64 + Send + Sync + 'static,
        C2: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self { price: Arc::new(price), cost1: Arc::new(cost1), cost2: Arc::new(cost2) }
    }

    /// `P = a - b1 x - b2 y`, `c1 = q1 x^2`, `c2 = q2 y^2`.
    pub fn linear_quadratic(a: f64, b1: f64, b2: f64, q1: f64, q2: f64) -> Self {
        Self::new(move |x, y| a - b1 * x - b2 * y, move |x| q1 * x * x, move |y| q2 * y * y)
    }

    pub fn profit1(&self, x: f64, y: f64) -> f64 {
        x * (self.price)(x, y) - (self.cost1)(x)
    }

    pub fn profit2(&self, x: f64, y: f64) -> f64 {
        y * (self.price)(x, y) - (self.cost2)(y)
    }
}

/// `(x P - c1(x), y P - c2(y))`.
pub fn payoffs(m: &CournotModel, x: f64, y: f64) -> (f64, f64) {
    (m.profit1(x, y), m.profit2(x, y))
}

/// Central-difference `(dPi1/dx, dPi2/dy)`; both vanish at a first-order
/// equilibrium.
pub fn foc_residual(m: &CournotModel, x: f64, y: f64, h: f64) -> (f64, f64) {
    let d1 = finite_difference(|p| m.profit1(p[0], p[1]), &[x, y], 0, h);
    let d2 = finite_difference(|p| m.profit2(p[0], p[1]), &[x, y], 1, h);
    (d1, d2)
}

/// Tolerance on second differences in [`second_order_check`].
pub const SECOND_ORDER_TOL: f64 = 1e-6;

/// Whether `d2Pi1/dx2 <= 0` and `d2Pi2/dy2 <= 0` at `(x, y)`.
pub fn second_order_check(m: &CournotModel, x: f64, y: f64, h: f64) -> (bool, bool) {
    let s1 = second_difference(|p| m.profit1(p[0], p[1]), &[x, y], 0, h);
    let s2 = second_difference(|p| m.profit2(p[0], p[1]), &[x, y], 1, h);
    (s1 <= SECOND_ORDER_TOL, s2 <= SECOND_ORDER_TOL)
}

/// Responses `F1 = dPi1/dx + x`, `F2 = dPi2/dy + y`, whose fixed points are
/// exactly the first-order equilibria.
pub fn response_from_payoff(
    m: &CournotModel,
    h: f64,
    domain1: DomainBox,
    domain2: DomainBox,
) -> Result<ResponseSystem> {
    let (m1, m2) = (m.clone(), m.clone());
    ResponseSystem::new(
        move |x, y| vec![foc_residual(&m1, x[0], y[0], h).0 + x[0]],
        move |x, y| vec![foc_residual(&m2, x[0], y[0], h).1 + y[0]],
        domain1,
        domain2,
        Projection::ClampBelowZero,
    )
}
