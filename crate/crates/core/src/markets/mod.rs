//! Duopoly market models and the response systems built from them.
//!
//! Every builder attaches clamp-below-at-zero projection: productions are
//! nonnegative, and raw iterates such as `-91` are pulled back to `0`.

mod cournot;
mod isoelastic;
mod piecewise;
mod surplus;

pub use cournot::{foc_residual, payoffs, response_from_payoff, second_order_check, CournotModel};
pub use isoelastic::{build_isoelastic, isoelastic_feasible, isoelastic_response, IsoelasticParams};
pub use piecewise::{build_piecewise, Piece, PiecewiseResponse};
pub use surplus::{build_surplus, AffineSurplus, SurplusModel};

use crate::metric::DomainBox;
use crate::oracle::AffineResponse;
use crate::solver::{Projection, ResponseSystem};

/// `F1 = b1 + c11 x + c12 y`, `F2 = b2 + c21 x + c22 y` on `[lo, hi]^2`.
///
/// # Panics
/// If `domain` is not a valid nonnegative interval.
pub fn build_affine(c11: f64, c12: f64, b1: f64, c21: f64, c22: f64, b2: f64, domain: (f64, f64)) -> ResponseSystem {
    let dom = DomainBox::cube(1, domain.0, domain.1).expect("valid interval");
    try_build_affine(c11, c12, b1, c21, c22, b2, dom.clone(), dom).expect("nonnegative domain")
}

/// Fallible form of [`build_affine`] with explicit per-player boxes.
#[allow(clippy::too_many_arguments)]
pub fn try_build_affine(
    c11: f64,
    c12: f64,
    b1: f64,
    c21: f64,
    c22: f64,
    b2: f64,
    domain1: DomainBox,
    domain2: DomainBox,
) -> crate::Result<ResponseSystem> {
    AffineResponse::scalar(c11, c12, b1, c21, c22, b2).to_system(domain1, domain2, Projection::ClampBelowZero)
}
