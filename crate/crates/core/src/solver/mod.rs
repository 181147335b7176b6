//! Simultaneous coupled iteration with convergence, cycle and divergence
//! detection, and the a priori / a posteriori / rate error estimates.

mod system;
mod trace;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::contraction::{contraction_factor, HardyRogersConstants};
use crate::error::{Error, Result};
use crate::metric::{l1_distance, product_distance, ProductPoint};
use crate::par::{self, Execution};

pub(crate) use system::step_at;
pub use system::{step, Projection, ResponseMap, ResponseSystem};
pub use trace::{IterationTrace, TraceEntry};

/// Absolute tolerance of [`verify_bounds`].
pub const AUDIT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverPolicy {
    /// Stop once `rho(p_n, p_{n-1})` drops to this value.
    pub convergence_tol: f64,
    pub max_iters: usize,
    /// Stop rules other than divergence are not checked before this many steps.
    pub min_iters: usize,
    pub cycle_window: usize,
    /// Relative: a revisit counts when it is this small compared with the
    /// shortest step inside the would-be period.
    pub cycle_tol: f64,
    pub divergence_bound: f64,
    /// Tolerance on `d(xi, eta)` for the symmetric-collapse flag.
    pub collapse_tol: f64,
    pub constants: Option<HardyRogersConstants>,
}

impl Default for SolverPolicy {
    fn default() -> Self {
        Self {
            convergence_tol: 1e-9,
            max_iters: 100_000,
            min_iters: 0,
            cycle_window: 32,
            cycle_tol: 1e-9,
            divergence_bound: 1e12,
            collapse_tol: 1e-8,
            constants: None,
        }
    }
}

impl SolverPolicy {
    pub fn with_constants(mut self, c: HardyRogersConstants) -> Self {
        self.constants = Some(c);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.convergence_tol > 0.0) {
            return Err(Error::Configuration("convergence_tol must be > 0".into()));
        }
        if self.max_iters < 1 {
            return Err(Error::Configuration("max_iters must be >= 1".into()));
        }
        if self.cycle_window < 2 {
            return Err(Error::Configuration("cycle_window must be >= 2".into()));
        }
        if !(self.cycle_tol >= 0.0) || !(self.divergence_bound > 0.0) {
            return Err(Error::Configuration("cycle_tol and divergence_bound must be nonnegative".into()));
        }
        if let Some(c) = &self.constants {
            c.validate()?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Stop {
    Converged,
    Cycle { period: usize },
    Diverged,
    MaxIters,
}

impl fmt::Display for Stop {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Stop::Converged => f.write_str("converged"),
            Stop::Cycle { period } => write!(f, "cycle({period})"),
            Stop::Diverged => f.write_str("diverged"),
            Stop::MaxIters => f.write_str("max_iters"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumReport {
    pub stop: Stop,
    /// Present iff `stop` is [`Stop::Converged`].
    pub point: Option<ProductPoint>,
    pub iterations: usize,
    pub symmetric_collapse: Option<bool>,
    /// Whether the three error estimates were audited (needs constants and convergence).
    pub bounds_audited: bool,
    pub bound_violations: usize,
}

/// Evaluation failure during [`solve`], with the iterates computed so far.
#[derive(Debug, Clone)]
pub struct SolveFailure {
    pub error: Error,
    pub trace: IterationTrace,
}

impl fmt::Display for SolveFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (after {} trace entries)", self.error, self.trace.len())
    }
}

impl std::error::Error for SolveFailure {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.error)
    }
}

impl From<Error> for SolveFailure {
    fn from(error: Error) -> Self {
        Self { error, trace: IterationTrace::default() }
    }
}

fn check_factor(k: f64) -> Result<()> {
    if !(0.0..1.0).contains(&k) {
        return Err(Error::InvalidConstants(format!("contraction factor {k} outside [0, 1)")));
    }
    Ok(())
}

/// `k^n / (1 - k) * d01`.
pub fn a_priori_bound(k: f64, d01: f64, n: usize) -> Result<f64> {
    check_factor(k)?;
    let n = i32::try_from(n).unwrap_or(i32::MAX);
    Ok(k.powi(n) / (1.0 - k) * d01)
}

/// `k / (1 - k) * d_n`.
pub fn a_posteriori_bound(k: f64, d_n: f64) -> Result<f64> {
    check_factor(k)?;
    Ok(k / (1.0 - k) * d_n)
}

/// Runs exactly `steps` simultaneous updates from `start` without any stop
/// rule. Returns `steps + 1` points.
pub fn iterate(sys: &ResponseSystem, start: &ProductPoint, steps: usize) -> Result<Vec<ProductPoint>> {
    let mut points = Vec::with_capacity(steps + 1);
    points.push(start.clone());
    for n in 0..steps {
        let next = step_at(sys, &points[n], n)?;
        points.push(next);
    }
    Ok(points)
}

/// Iterates `p_{n+1} = (F1(p_n), F2(p_n))` until a stop rule fires.
///
/// Stop rules, in priority order when several fire on one step: step size at
/// most `convergence_tol`, a revisit of one of the last `cycle_window` states
/// (within `cycle_tol` times the smallest step taken since that state), a coordinate beyond `divergence_bound`, and the
/// iteration cap. With constants in the policy every entry carries its
/// a priori and a posteriori bounds, and a converged run is audited by
/// [`verify_bounds_with_limit_error`].
pub fn solve(
    sys: &ResponseSystem,
    start: &ProductPoint,
    policy: &SolverPolicy,
) -> Result<(EquilibriumReport, IterationTrace), SolveFailure> {
    policy.validate()?;
    let factor = policy.constants.as_ref().map(contraction_factor).transpose()?;
    if start.dims() != sys.dims() {
        return Err(Error::DimensionMismatch { expected: sys.dim_total(), found: start.dim() }.into());
    }
    if !sys.contains(start) {
        return Err(Error::OutsideDomain(format!("start {start:?}")).into());
    }

    let mut trace = IterationTrace::default();
    trace.push(TraceEntry { n: 0, point: start.clone(), step_distance: None, a_priori: None, a_posteriori: None });

    let mut stop = Stop::MaxIters;
    let mut d01 = 0.0;
    for n in 1..=policy.max_iters {
        let prev = &trace.entries()[n - 1].point;
        let next = match step_at(sys, prev, n - 1) {
            Ok(p) => p,
            Err(error) => return Err(SolveFailure { error, trace }),
        };
        let dist = product_distance(&next, prev).expect("dimensions checked");
        let (a_priori, a_posteriori) = match factor {
            Some(k) => {
                if n == 1 {
                    d01 = dist;
                    trace.entries_mut()[0].a_priori = Some(a_priori_bound(k, d01, 0).expect("valid k"));
                }
                (Some(a_priori_bound(k, d01, n).expect("valid k")), Some(a_posteriori_bound(k, dist).expect("valid k")))
            }
            None => (None, None),
        };

        let checks_enabled = n >= policy.min_iters;
        let mut fired = None;
        if checks_enabled && dist <= policy.convergence_tol {
            fired = Some(Stop::Converged);
        }
        if fired.is_none() && checks_enabled {
            let oldest = n.saturating_sub(policy.cycle_window);
            // Walking back from the most recent state gives the shortest period.
            // The revisit is measured against the smallest step inside the
            // candidate period, so a damped oscillation that nearly returns
            // to an earlier state is not mistaken for a cycle.
            let mut min_step = dist;
            for m in (oldest..n.saturating_sub(1)).rev() {
                min_step = min_step.min(trace.entries()[m + 1].step_distance.unwrap_or(0.0));
                let earlier = &trace.entries()[m].point;
                let revisit = product_distance(&next, earlier).expect("dimensions checked");
                if min_step > 0.0 && revisit <= policy.cycle_tol * min_step {
                    fired = Some(Stop::Cycle { period: n - m });
                    break;
                }
            }
        }
        if fired.is_none() && next.max_abs() > policy.divergence_bound {
            fired = Some(Stop::Diverged);
        }

        trace.push(TraceEntry { n, point: next, step_distance: Some(dist), a_priori, a_posteriori });
        if let Some(s) = fired {
            stop = s;
            break;
        }
    }

    let iterations = trace.len() - 1;
    let mut report = EquilibriumReport {
        stop,
        point: None,
        iterations,
        symmetric_collapse: None,
        bounds_audited: false,
        bound_violations: 0,
    };
    if stop == Stop::Converged {
        let point = trace.last().expect("nonempty").point.clone();
        if sys.symmetric_hint() && point.first.dim() == point.second.dim() {
            let d = l1_distance(&point.first, &point.second).expect("same dimension");
            report.symmetric_collapse = Some(d <= policy.collapse_tol);
        }
        if let Some(k) = factor {
            let last_step = trace.last().and_then(|e| e.step_distance).unwrap_or(0.0);
            let limit_error = a_posteriori_bound(k, last_step).expect("valid k");
            report.bound_violations = verify_bounds_with_limit_error(&trace, &point, k, limit_error);
            report.bounds_audited = true;
        }
        report.point = Some(point);
    }
    Ok((report, trace))
}

/// Independent runs from many starts, in parallel when enabled.
pub fn solve_many(
    sys: &ResponseSystem,
    starts: &[ProductPoint],
    policy: &SolverPolicy,
    exec: Execution,
) -> Vec<Result<(EquilibriumReport, IterationTrace), SolveFailure>> {
    par::map_slice(exec, starts, |s| solve(sys, s, policy))
}

/// Counts trace indices where one of the three estimates fails by more than
/// [`AUDIT_TOL`], taking `limit` as the exact fixed point:
///
/// * `rho(limit, p_n) <= k^n / (1 - k) * rho(p_0, p_1)`
/// * `rho(limit, p_n) <= k / (1 - k) * rho(p_{n-1}, p_n)`
/// * `rho(limit, p_n) <= k * rho(limit, p_{n-1})`
pub fn verify_bounds(trace: &IterationTrace, limit: &ProductPoint, k: f64) -> usize {
    verify_bounds_with_limit_error(trace, limit, k, 0.0)
}

/// [`verify_bounds`] for a limit only known to within `limit_error` of the
/// true fixed point (for instance the last iterate of a converged run).
/// Each inequality is relaxed by the most that error can shift it.
pub fn verify_bounds_with_limit_error(trace: &IterationTrace, limit: &ProductPoint, k: f64, limit_error: f64) -> usize {
    if check_factor(k).is_err() {
        return trace.len();
    }
    let entries = trace.entries();
    let dist_to_limit: Vec<f64> =
        entries.iter().map(|e| product_distance(limit, &e.point).unwrap_or(f64::INFINITY)).collect();
    let d01 = entries.get(1).and_then(|e| e.step_distance).unwrap_or(0.0);
    let eps = limit_error.max(0.0);

    let mut violations = 0;
    for (n, e) in entries.iter().enumerate() {
        let dist = dist_to_limit[n];
        let mut ok = entries.len() < 2 || dist <= a_priori_bound(k, d01, n).unwrap() + eps + AUDIT_TOL;
        if n >= 1 {
            let step = e.step_distance.unwrap_or(f64::INFINITY);
            ok &= dist <= a_posteriori_bound(k, step).unwrap() + eps + AUDIT_TOL;
            ok &= dist <= k * dist_to_limit[n - 1] + (1.0 + k) * eps + AUDIT_TOL;
        }
        if !ok {
            violations += 1;
        }
    }
    violations
}

/// Whether a converged run collapsed onto the diagonal, `d(xi, eta) <= tol`.
///
/// Only meaningful for systems built with `F2(x, y) = F1(y, x)`.
pub fn symmetric_collapse(sys: &ResponseSystem, report: &EquilibriumReport, tol: f64) -> Result<bool> {
    if !sys.symmetric_hint() {
        return Err(Error::NotApplicable("system is not marked symmetric".into()));
    }
    let point =
        report.point.as_ref().ok_or_else(|| Error::NotApplicable(format!("run stopped with {}", report.stop)))?;
    if point.first.dim() != point.second.dim() {
        return Err(Error::NotApplicable("component dimensions differ".into()));
    }
    Ok(l1_distance(&point.first, &point.second)? <= tol)
}

impl ResponseSystem {
    pub(crate) fn dim_total(&self) -> usize {
        let (a, b) = self.dims();
        a + b
    }
}
