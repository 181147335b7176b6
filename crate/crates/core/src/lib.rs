//! Coupled fixed points of pairs of response maps.
//!
//! A [`ResponseSystem`] bundles two maps `F1: X1 x X2 -> X1` and
//! `F2: X1 x X2 -> X2` over real coordinate boxes. The crate iterates them
//! simultaneously ([`solve`]), audits the Hardy-Rogers type error estimates
//! along the trace, checks contraction inequalities on sampled pairs
//! ([`certify`]), and ships constructors for the duopoly market models in
//! [`markets`].
//!
//! ```
//! use coupled_core::{markets, solve, ProductPoint, SolverPolicy, Stop};
//!
//! // Cournot duopoly responses that cycle forever.
//! let sys = markets::build_affine(-2.0, -1.0, 100.0, -1.0, -2.0, 100.0, (0.0, 100.0));
//! let start = ProductPoint::scalar(20.0, 30.0);
//! let (report, _trace) = solve(&sys, &start, &SolverPolicy::default()).unwrap();
//! assert_eq!(report.stop, Stop::Cycle { period: 2 });
//! ```

// `!(x < y)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod contraction;
mod error;
pub mod markets;
pub mod metric;
pub mod oracle;
pub mod par;
pub mod solver;

pub use contraction::{
    certify, contraction_factor, estimate_lipschitz, hr_gap, partial_derivative_bound_check, reduce_four_coefficients,
    CertificateReport, ConditionKind, DerivativeCheck, FourCoefficientConstants, HardyRogersConstants, SamplerPolicy,
};
pub use error::{Error, Result};
pub use metric::{l1_distance, product_distance, Bundle, DomainBox, Interval, ProductPoint};
pub use oracle::{affine_fixed_point, finite_difference, grid_fixed_point, AffineResponse};
pub use par::Execution;
pub use solver::{
    a_posteriori_bound, a_priori_bound, iterate, solve, solve_many, step, symmetric_collapse, verify_bounds,
    verify_bounds_with_limit_error, EquilibriumReport, IterationTrace, Projection, ResponseMap, ResponseSystem,
    SolveFailure, SolverPolicy, Stop, TraceEntry,
};
