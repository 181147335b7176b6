//! Contraction constants, the coupled Hardy-Rogers inequality and sampled
//! certificate checks.
//!
//! The inequality checked for a pair of points `p = (x, y)`, `q = (u, v)`
//! with `G = (F1, F2)` and `rho = d1 + d2` is
//!
//! ```text
//! rho(Gp, Gq) <= k1 * rho(p, q)
//!              + k2 * (rho(p, Gp) + rho(q, Gq))
//!              + k3 * (rho(p, Gq) + rho(q, Gp))
//! ```
//!
//! which expands to the per-player sums over `d1` and `d2`. A sampled pass is
//! evidence, not proof; a violation is a counterexample.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{l1, Interval, ProductPoint};
use crate::par::{self, Execution};
use crate::solver::{step, ResponseSystem};

/// Absolute tolerance on `rhs - lhs`.
pub const SLACK_TOL: f64 = 1e-12;
/// Allowance on central-difference derivative estimates.
pub const DERIVATIVE_TOL: f64 = 1e-6;
/// Pair budget of [`SamplerPolicy::default_for`].
pub const DEFAULT_PAIR_BUDGET: usize = 1_000_000;

/// `(k1, k2, k3)` with `k1 + 2 k2 + 2 k3 < 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HardyRogersConstants {
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
}

impl HardyRogersConstants {
    pub fn new(k1: f64, k2: f64, k3: f64) -> Result<Self> {
        let c = Self { k1, k2, k3 };
        c.validate()?;
        Ok(c)
    }

    pub fn banach(k1: f64) -> Result<Self> {
        Self::new(k1, 0.0, 0.0)
    }

    /// Symmetrizes the five coefficients `a1..a5` of the single-map form:
    /// `k1 = a1`, `k2 = (a2 + a3) / 2`, `k3 = (a4 + a5) / 2`.
    pub fn from_five(a: [f64; 5]) -> Result<Self> {
        if a.iter().any(|v| !(*v >= 0.0)) {
            return Err(Error::InvalidConstants(format!("negative coefficient in {a:?}")));
        }
        if !(a.iter().sum::<f64>() < 1.0) {
            return Err(Error::InvalidConstants(format!("coefficients {a:?} sum to >= 1")));
        }
        Self::new(a[0], (a[1] + a[2]) / 2.0, (a[3] + a[4]) / 2.0)
    }

    pub fn validate(&self) -> Result<()> {
        let Self { k1, k2, k3 } = *self;
        if !(k1 >= 0.0 && k2 >= 0.0 && k3 >= 0.0) {
            return Err(Error::InvalidConstants(format!("negative constant in ({k1}, {k2}, {k3})")));
        }
        if !(k1 + 2.0 * k2 + 2.0 * k3 < 1.0) {
            return Err(Error::InvalidConstants(format!("k1 + 2 k2 + 2 k3 >= 1 for ({k1}, {k2}, {k3})")));
        }
        Ok(())
    }

    pub fn kind(&self) -> ConditionKind {
        match (self.k1 > 0.0, self.k2 > 0.0, self.k3 > 0.0) {
            (_, false, false) => ConditionKind::Banach,
            (false, true, false) => ConditionKind::Kannan,
            (false, false, true) => ConditionKind::Chatterjea,
            _ => ConditionKind::HardyRogers,
        }
    }
}

/// `k = (k1 + k2 + k3) / (1 - k2 - k3)`, the geometric rate of the iteration.
pub fn contraction_factor(c: &HardyRogersConstants) -> Result<f64> {
    c.validate()?;
    Ok((c.k1 + c.k2 + c.k3) / (1.0 - c.k2 - c.k3))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConditionKind {
    Banach,
    Kannan,
    Chatterjea,
    HardyRogers,
}

/// Per-player Lipschitz coefficients: `d(F1) <= alpha dx + beta dy`,
/// `d(F2) <= gamma dx + delta dy`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FourCoefficientConstants {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
}

impl FourCoefficientConstants {
    /// `s = max(alpha + gamma, beta + delta)`.
    pub fn s(&self) -> f64 {
        (self.alpha + self.gamma).max(self.beta + self.delta)
    }
}

/// Sums the two per-player inequalities into a Banach constant `k1 = s`.
pub fn reduce_four_coefficients(fc: &FourCoefficientConstants) -> Result<HardyRogersConstants> {
    let all = [fc.alpha, fc.beta, fc.gamma, fc.delta];
    if all.iter().any(|v| !(*v >= 0.0)) {
        return Err(Error::InvalidConstants(format!("negative coefficient in {fc:?}")));
    }
    let s = fc.s();
    if !(s < 1.0) {
        return Err(Error::InvalidConstants(format!("s = {s} is not < 1")));
    }
    HardyRogersConstants::banach(s)
}

fn check_pair(sys: &ResponseSystem, p: &ProductPoint) -> Result<()> {
    if p.dims() != sys.dims() {
        return Err(Error::DimensionMismatch { expected: sys.dim_total(), found: p.dim() });
    }
    Ok(())
}

/// Both sides of the coupled inequality for one pair of points.
pub fn hr_gap(
    sys: &ResponseSystem,
    c: &HardyRogersConstants,
    p: &ProductPoint,
    q: &ProductPoint,
) -> Result<(f64, f64)> {
    check_pair(sys, p)?;
    check_pair(sys, q)?;
    let (zp, zq) = (p.concat(), q.concat());
    let gp = step(sys, p)?.concat();
    let gq = step(sys, q)?.concat();
    Ok(gap_terms(c, &zp, &gp, &zq, &gq))
}

#[inline]
fn gap_terms(c: &HardyRogersConstants, p: &[f64], gp: &[f64], q: &[f64], gq: &[f64]) -> (f64, f64) {
    let lhs = l1(gp, gq);
    let rhs = c.k1 * l1(p, q) + c.k2 * (l1(p, gp) + l1(q, gq)) + c.k3 * (l1(p, gq) + l1(q, gp));
    (lhs, rhs)
}

/// Which pairs of `X1 x X2` a certificate or estimate looks at.
///
/// A full grid with `grid_points` values per axis (all unordered pairs of
/// distinct grid points) plus `random_pairs` uniform pairs drawn from a
/// ChaCha8 stream seeded with `seed`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplerPolicy {
    pub grid_points: Option<usize>,
    pub random_pairs: usize,
    pub seed: u64,
    pub execution: Execution,
}

impl Default for SamplerPolicy {
    fn default() -> Self {
        Self { grid_points: None, random_pairs: 10_000, seed: 0, execution: Execution::default() }
    }
}

impl SamplerPolicy {
    pub fn grid(points_per_axis: usize) -> Self {
        Self { grid_points: Some(points_per_axis), random_pairs: 0, ..Default::default() }
    }

    pub fn random(pairs: usize, seed: u64) -> Self {
        Self { grid_points: None, random_pairs: pairs, seed, ..Default::default() }
    }

    /// Grid points per axis for spacing `step` on an axis of width `width`.
    pub fn points_for_step(width: f64, step: f64) -> usize {
        (width / step).round() as usize + 1
    }

    /// Largest uniform grid with at most [`DEFAULT_PAIR_BUDGET`] pairs, plus
    /// 10 000 random pairs.
    pub fn default_for(sys: &ResponseSystem) -> Self {
        let dim = sys.dim_total() as f64;
        let max_points = ((2.0 * DEFAULT_PAIR_BUDGET as f64).sqrt()).floor();
        let per_axis = (max_points.powf(1.0 / dim).floor() as usize).max(2);
        Self { grid_points: Some(per_axis), ..Default::default() }
    }

    pub fn with_execution(mut self, execution: Execution) -> Self {
        self.execution = execution;
        self
    }

    pub fn with_random_pairs(mut self, pairs: usize, seed: u64) -> Self {
        self.random_pairs = pairs;
        self.seed = seed;
        self
    }
}

/// Flat grid over `axes`, first axis varying slowest.
pub(crate) fn grid_coords(axes: &[Interval], per_axis: usize) -> Vec<f64> {
    let dim = axes.len();
    let total = per_axis.pow(dim as u32);
    let mut out = Vec::with_capacity(total * dim);
    let mut idx = vec![0usize; dim];
    for _ in 0..total {
        for (a, iv) in axes.iter().enumerate() {
            out.push(axis_value(iv, idx[a], per_axis));
        }
        for a in (0..dim).rev() {
            idx[a] += 1;
            if idx[a] < per_axis {
                break;
            }
            idx[a] = 0;
        }
    }
    out
}

/// `lo + (hi - lo) * i / (n - 1)`; multiplying before dividing keeps values
/// like 0.8 on a [0, 1] grid exact.
#[inline]
pub(crate) fn axis_value(iv: &Interval, i: usize, n: usize) -> f64 {
    if n <= 1 {
        return iv.lo;
    }
    if i + 1 == n {
        return iv.hi;
    }
    iv.lo + iv.width() * i as f64 / (n - 1) as f64
}

/// Sample points with their projected images.
struct Sample {
    dim: usize,
    dim1: usize,
    grid_len: usize,
    random_pairs: usize,
    points: Vec<f64>,
    images: Vec<f64>,
    execution: Execution,
}

impl Sample {
    fn build(sys: &ResponseSystem, sampler: &SamplerPolicy) -> Result<Self> {
        let axes = sys.axes();
        let dim = axes.len();
        let needs_bounds = sampler.grid_points.is_some() || sampler.random_pairs > 0;
        if needs_bounds && !axes.iter().all(Interval::is_bounded) {
            return Err(Error::Configuration("sampling needs a bounded domain".into()));
        }
        let mut points = match sampler.grid_points {
            Some(n) if n >= 1 => grid_coords(&axes, n),
            Some(_) => return Err(Error::Configuration("grid needs at least one point per axis".into())),
            None => Vec::new(),
        };
        let grid_len = points.len() / dim;
        let mut rng = ChaCha8Rng::seed_from_u64(sampler.seed);
        for _ in 0..2 * sampler.random_pairs {
            for iv in &axes {
                let v = if iv.width() > 0.0 { rng.gen_range(iv.lo..=iv.hi) } else { iv.lo };
                points.push(v);
            }
        }
        if grid_len < 2 && sampler.random_pairs == 0 {
            return Err(Error::Configuration("sample contains no pairs".into()));
        }

        let (dim1, _) = sys.dims();
        let n_points = points.len() / dim;
        let images = par::map_indices(sampler.execution, n_points, |i| {
            let z = &points[i * dim..(i + 1) * dim];
            step(sys, &ProductPoint::from_concat(z, dim1)).map(|g| g.concat())
        });
        let mut flat = Vec::with_capacity(points.len());
        for img in images {
            flat.extend(img?);
        }
        Ok(Self {
            dim,
            dim1,
            grid_len,
            random_pairs: sampler.random_pairs,
            points,
            images: flat,
            execution: sampler.execution,
        })
    }

    #[inline]
    fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    #[inline]
    fn image(&self, i: usize) -> &[f64] {
        &self.images[i * self.dim..(i + 1) * self.dim]
    }

    fn product_point(&self, i: usize) -> ProductPoint {
        ProductPoint::from_concat(self.point(i), self.dim1)
    }

    fn pair_count(&self) -> usize {
        self.grid_len * self.grid_len.saturating_sub(1) / 2 + self.random_pairs
    }

    /// Visits every sampled pair `(i, j)` and merges per-row accumulators in
    /// row order: grid rows `i < j` first, then the random pairs in chunks.
    fn fold_pairs<A, V>(&self, visit: V) -> A
    where
        A: PairAcc,
        V: Fn(&mut A, usize, usize) + Sync + Send,
    {
        const CHUNK: usize = 1024;
        let random_rows = self.random_pairs.div_ceil(CHUNK);
        let rows = self.grid_len + random_rows;
        let partials = par::map_indices(self.execution, rows, |row| {
            let mut acc = A::default();
            if row < self.grid_len {
                for j in row + 1..self.grid_len {
                    visit(&mut acc, row, j);
                }
            } else {
                let start = (row - self.grid_len) * CHUNK;
                let end = (start + CHUNK).min(self.random_pairs);
                for r in start..end {
                    let i = self.grid_len + 2 * r;
                    visit(&mut acc, i, i + 1);
                }
            }
            acc
        });
        partials.into_iter().fold(A::default(), A::merge)
    }
}

trait PairAcc: Default + Send {
    fn merge(self, other: Self) -> Self;
}

/// Extremum with its pair; ties keep the earlier pair.
#[derive(Debug, Clone, Copy)]
struct Extremum {
    value: f64,
    pair: (usize, usize),
}

fn pick_min(a: Option<Extremum>, b: Option<Extremum>) -> Option<Extremum> {
    match (a, b) {
        (Some(x), Some(y)) => Some(if y.value < x.value { y } else { x }),
        (x, None) => x,
        (None, y) => y,
    }
}

fn pick_max(a: Option<Extremum>, b: Option<Extremum>) -> Option<Extremum> {
    match (a, b) {
        (Some(x), Some(y)) => Some(if y.value > x.value { y } else { x }),
        (x, None) => x,
        (None, y) => y,
    }
}

#[derive(Debug, Default)]
struct CertAcc {
    pairs: usize,
    slack: Option<Extremum>,
    ratio: Option<Extremum>,
    first_violation: Option<(usize, usize)>,
}

impl PairAcc for CertAcc {
    fn merge(self, other: Self) -> Self {
        Self {
            pairs: self.pairs + other.pairs,
            slack: pick_min(self.slack, other.slack),
            ratio: pick_max(self.ratio, other.ratio),
            first_violation: self.first_violation.or(other.first_violation),
        }
    }
}

#[derive(Debug, Default)]
struct LipAcc {
    ratio: Option<Extremum>,
}

impl PairAcc for LipAcc {
    fn merge(self, other: Self) -> Self {
        Self { ratio: pick_max(self.ratio, other.ratio) }
    }
}

/// Outcome of [`certify`]. A pass is sampled evidence only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateReport {
    pub condition_kind: ConditionKind,
    pub constants: HardyRogersConstants,
    pub pairs_tested: usize,
    /// `min (rhs - lhs)` over the sample.
    pub worst_slack: f64,
    /// `max lhs / rhs` over pairs with `rhs > 0`.
    pub worst_ratio: f64,
    /// The most violated pair; present iff the check failed.
    pub violating_pair: Option<(ProductPoint, ProductPoint)>,
    /// First violated pair in sampling order.
    pub first_violation: Option<(ProductPoint, ProductPoint)>,
    pub passed: bool,
    pub evidence: String,
}

/// Evaluates [`hr_gap`] on every sampled pair.
///
/// Deterministic for a given sampler: pairs are reduced in a fixed order and
/// ties resolve to the earliest pair.
pub fn certify(sys: &ResponseSystem, c: &HardyRogersConstants, sampler: &SamplerPolicy) -> Result<CertificateReport> {
    c.validate()?;
    let sample = Sample::build(sys, sampler)?;
    let acc = sample.fold_pairs(|acc: &mut CertAcc, i, j| {
        let (lhs, rhs) = gap_terms(c, sample.point(i), sample.image(i), sample.point(j), sample.image(j));
        let slack = rhs - lhs;
        acc.pairs += 1;
        acc.slack = pick_min(acc.slack, Some(Extremum { value: slack, pair: (i, j) }));
        if rhs > 0.0 {
            acc.ratio = pick_max(acc.ratio, Some(Extremum { value: lhs / rhs, pair: (i, j) }));
        }
        if slack < -SLACK_TOL && acc.first_violation.is_none() {
            acc.first_violation = Some((i, j));
        }
    });

    debug_assert_eq!(acc.pairs, sample.pair_count());
    let worst_slack = acc.slack.map_or(f64::INFINITY, |e| e.value);
    let passed = worst_slack >= -SLACK_TOL;
    let to_points = |(i, j): (usize, usize)| (sample.product_point(i), sample.product_point(j));
    Ok(CertificateReport {
        condition_kind: c.kind(),
        constants: *c,
        pairs_tested: acc.pairs,
        worst_slack,
        worst_ratio: acc.ratio.map_or(0.0, |e| e.value),
        violating_pair: if passed { None } else { acc.slack.map(|e| to_points(e.pair)) },
        first_violation: acc.first_violation.map(to_points),
        passed,
        evidence: if passed { "sampled evidence (not a proof)" } else { "counterexample found" }.into(),
    })
}

/// Largest `rho(Gp, Gq) / rho(p, q)` over sampled distinct pairs: the
/// smallest Banach constant consistent with the sample.
pub fn estimate_lipschitz(sys: &ResponseSystem, sampler: &SamplerPolicy) -> Result<f64> {
    if sys.axes().iter().all(|iv| iv.width() == 0.0) {
        return Err(Error::Configuration("domain is a single point".into()));
    }
    debug_assert!(sample_pairs_possible(sampler));
    let sample = Sample::build(sys, sampler)?;
    let acc = sample.fold_pairs(|acc: &mut LipAcc, i, j| {
        let d = l1(sample.point(i), sample.point(j));
        if d > 0.0 {
            let ratio = l1(sample.image(i), sample.image(j)) / d;
            acc.ratio = pick_max(acc.ratio, Some(Extremum { value: ratio, pair: (i, j) }));
        }
    });
    acc.ratio.map(|e| e.value).ok_or_else(|| Error::Configuration("no distinct pairs sampled".into()))
}

fn sample_pairs_possible(s: &SamplerPolicy) -> bool {
    s.grid_points.is_some() || s.random_pairs > 0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivativeCheck {
    pub passed: bool,
    /// Largest estimate of `sum_j |dF1_j / dx_i|` or `sum_j |dF2_j / dy_i|`.
    pub max_abs_derivative: f64,
    pub points_checked: usize,
    /// Sample points within `h` of the boundary along some own axis.
    pub skipped: usize,
}

/// Central-difference check that each player's response moves by at most
/// `alpha` per unit of its own output: `|dF1/dx| <= alpha`, `|dF2/dy| <= alpha`.
pub fn partial_derivative_bound_check(
    sys: &ResponseSystem,
    alpha: f64,
    sampler: &SamplerPolicy,
    h: f64,
) -> Result<DerivativeCheck> {
    if !(h > 0.0) {
        return Err(Error::Configuration(format!("step h = {h} must be positive")));
    }
    let sample = Sample::build(sys, sampler)?;
    let (dim1, dim2) = sys.dims();
    let axes = sys.axes();
    let n_points = sample.points.len() / sample.dim;

    let per_point = par::map_indices(sampler.execution, n_points, |i| -> Result<Option<f64>> {
        let z = sample.point(i);
        let mut worst = 0.0_f64;
        for axis in 0..dim1 + dim2 {
            if !axes[axis].contains(z[axis] - h) || !axes[axis].contains(z[axis] + h) {
                return Ok(None);
            }
            let mut plus = z.to_vec();
            let mut minus = z.to_vec();
            plus[axis] += h;
            minus[axis] -= h;
            let gp = step(sys, &ProductPoint::from_concat(&plus, dim1))?.concat();
            let gm = step(sys, &ProductPoint::from_concat(&minus, dim1))?.concat();
            let own = if axis < dim1 { 0..dim1 } else { dim1..dim1 + dim2 };
            let sum: f64 = own.map(|j| ((gp[j] - gm[j]) / (2.0 * h)).abs()).sum();
            worst = worst.max(sum);
        }
        Ok(Some(worst))
    });

    let mut check = DerivativeCheck { passed: true, max_abs_derivative: 0.0, points_checked: 0, skipped: 0 };
    for r in per_point {
        match r? {
            Some(d) => {
                check.points_checked += 1;
                check.max_abs_derivative = check.max_abs_derivative.max(d);
            }
            None => check.skipped += 1,
        }
    }
    check.passed = check.max_abs_derivative <= alpha + DERIVATIVE_TOL;
    Ok(check)
}
