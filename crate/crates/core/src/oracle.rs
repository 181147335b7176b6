//! Fixed-point oracles that do not go through the iteration: direct affine
//! solves and brute-force residual minimisation on a grid.

use serde::{Deserialize, Serialize};

use crate::contraction::{axis_value, grid_coords};
use crate::error::{Error, Result};
use crate::metric::{l1, DomainBox, Interval, ProductPoint};
use crate::par::{self, Execution};
use crate::solver::{Projection, ResponseSystem};

/// Pivot magnitude below which `I - A` counts as singular.
pub const PIVOT_TOL: f64 = 1e-12;

/// `z -> A z + b` on the concatenated point `z = (x, y)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffineResponse {
    /// Row-major, `(dim1 + dim2)` square.
    pub matrix: Vec<Vec<f64>>,
    pub offset: Vec<f64>,
    pub dim1: usize,
}

impl AffineResponse {
    pub fn new(matrix: Vec<Vec<f64>>, offset: Vec<f64>, dim1: usize) -> Result<Self> {
        let n = offset.len();
        if matrix.len() != n || matrix.iter().any(|row| row.len() != n) {
            return Err(Error::DimensionMismatch { expected: n, found: matrix.len() });
        }
        if dim1 == 0 || dim1 >= n {
            return Err(Error::Configuration(format!("dim1 = {dim1} must split {n} coordinates")));
        }
        Ok(Self { matrix, offset, dim1 })
    }

    /// One coordinate per player: `F1 = b1 + c11 x + c12 y`, `F2 = b2 + c21 x + c22 y`.
    pub fn scalar(c11: f64, c12: f64, b1: f64, c21: f64, c22: f64, b2: f64) -> Self {
        Self { matrix: vec![vec![c11, c12], vec![c21, c22]], offset: vec![b1, b2], dim1: 1 }
    }

    pub fn dim(&self) -> usize {
        self.offset.len()
    }

    pub fn apply(&self, z: &[f64]) -> Vec<f64> {
        self.matrix
            .iter()
            .zip(&self.offset)
            .map(|(row, b)| b + row.iter().zip(z).map(|(a, x)| a * x).sum::<f64>())
            .collect()
    }

    /// The affine maps as a [`ResponseSystem`].
    pub fn to_system(&self, domain1: DomainBox, domain2: DomainBox, projection: Projection) -> Result<ResponseSystem> {
        let dim1 = self.dim1;
        let (first, second) = (self.clone(), self.clone());
        ResponseSystem::new(
            move |x, y| {
                let z: Vec<f64> = x.iter().chain(y).copied().collect();
                first.apply(&z)[..dim1].to_vec()
            },
            move |x, y| {
                let z: Vec<f64> = x.iter().chain(y).copied().collect();
                second.apply(&z)[dim1..].to_vec()
            },
            domain1,
            domain2,
            projection,
        )
    }
}

/// Solves `(I - A) z = b` by Gaussian elimination with partial pivoting.
pub fn affine_fixed_point(ar: &AffineResponse) -> Result<ProductPoint> {
    let n = ar.dim();
    let mut m: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut row: Vec<f64> = (0..n).map(|j| f64::from(u8::from(i == j)) - ar.matrix[i][j]).collect();
            row.push(ar.offset[i]);
            row
        })
        .collect();

    for col in 0..n {
        let pivot_row = (col..n).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs())).expect("nonempty range");
        let pivot = m[pivot_row][col];
        if !(pivot.abs() > PIVOT_TOL) {
            return Err(Error::Singular { pivot });
        }
        m.swap(col, pivot_row);
        let (upper, lower) = m.split_at_mut(col + 1);
        let top = &upper[col];
        for row in lower {
            let factor = row[col] / pivot;
            if factor != 0.0 {
                for (v, p) in row[col..].iter_mut().zip(&top[col..]) {
                    *v -= factor * p;
                }
            }
        }
    }
    let mut z = vec![0.0; n];
    for r in (0..n).rev() {
        let tail: f64 = (r + 1..n).map(|c| m[r][c] * z[c]).sum();
        z[r] = (m[r][n] - tail) / m[r][r];
    }
    Ok(ProductPoint::from_concat(&z, ar.dim1))
}

/// Residual `rho(p, G p)` of a concatenated point; infinite when the maps fail.
fn residual(sys: &ResponseSystem, z: &[f64]) -> f64 {
    match sys.image_concat(z) {
        Some(g) => l1(z, &g),
        None => f64::INFINITY,
    }
}

/// Brute-force fixed points: minimises `rho(p, step(p))` over a grid with
/// `resolution` points per axis, then refines around every discrete local
/// minimum `refinements` times, shrinking the search box tenfold per round.
///
/// Returns the refined minima whose residual is within a few final grid
/// cells of zero, deduplicated and sorted by residual.
pub fn grid_fixed_point(sys: &ResponseSystem, resolution: usize, refinements: usize) -> Result<Vec<ProductPoint>> {
    grid_fixed_point_with(sys, resolution, refinements, Execution::default())
}

pub fn grid_fixed_point_with(
    sys: &ResponseSystem,
    resolution: usize,
    refinements: usize,
    exec: Execution,
) -> Result<Vec<ProductPoint>> {
    const MAX_CANDIDATES: usize = 16;
    let axes = sys.axes();
    if !axes.iter().all(Interval::is_bounded) {
        return Err(Error::Configuration("grid search needs a bounded domain".into()));
    }
    if resolution < 2 {
        return Err(Error::Configuration("grid search needs resolution >= 2".into()));
    }
    let dim = axes.len();
    let coords = grid_coords(&axes, resolution);
    let total = coords.len() / dim;
    let values = par::map_indices(exec, total, |i| residual(sys, &coords[i * dim..(i + 1) * dim]));

    // discrete local minima: no axis neighbour is strictly lower
    let strides: Vec<usize> = (0..dim).map(|a| resolution.pow((dim - 1 - a) as u32)).collect();
    let mut minima: Vec<usize> = (0..total)
        .filter(|&i| {
            let v = values[i];
            v.is_finite()
                && strides.iter().all(|&s| {
                    let pos = (i / s) % resolution;
                    (pos == 0 || values[i - s] >= v) && (pos + 1 == resolution || values[i + s] >= v)
                })
        })
        .collect();
    minima.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    minima.truncate(MAX_CANDIDATES);

    let widths: Vec<f64> = axes.iter().map(Interval::width).collect();
    let refined = par::map_slice(exec, &minima, |&i| {
        let mut best = coords[i * dim..(i + 1) * dim].to_vec();
        let mut best_val = values[i];
        for round in 1..=refinements {
            let half = 0.5 * 10f64.powi(-(round as i32));
            let local: Vec<Interval> = (0..dim)
                .map(|a| Interval {
                    lo: (best[a] - half * widths[a]).max(axes[a].lo),
                    hi: (best[a] + half * widths[a]).min(axes[a].hi),
                })
                .collect();
            let local_coords = grid_coords(&local, resolution);
            for z in local_coords.chunks_exact(dim) {
                let v = residual(sys, z);
                if v < best_val {
                    best_val = v;
                    best.copy_from_slice(z);
                }
            }
        }
        (best, best_val)
    });

    let coarse_cell: f64 = widths.iter().sum::<f64>() / (resolution - 1) as f64;
    let final_cell = coarse_cell * 10f64.powi(-(refinements as i32));
    let tol = 4.0 * final_cell + 1e-12;
    let merge_radius = coarse_cell;

    let mut out: Vec<(Vec<f64>, f64)> = Vec::new();
    for (z, v) in refined {
        if v > tol {
            continue;
        }
        if out.iter().any(|(w, _)| l1(w, &z) <= merge_radius) {
            continue;
        }
        out.push((z, v));
    }
    out.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (dim1, _) = sys.dims();
    Ok(out.into_iter().map(|(z, _)| ProductPoint::from_concat(&z, dim1)).collect())
}

/// Central difference `(f(p + h e_i) - f(p - h e_i)) / 2h`.
pub fn finite_difference<F>(f: F, point: &[f64], index: usize, h: f64) -> f64
where
    F: Fn(&[f64]) -> f64,
{
    let mut p = point.to_vec();
    p[index] = point[index] + h;
    let up = f(&p);
    p[index] = point[index] - h;
    let down = f(&p);
    (up - down) / (2.0 * h)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Derivative {
    pub value: f64,
    /// Set when `p +- h e_i` left `bounds` and a one-sided difference was used.
    pub one_sided: bool,
}

/// [`finite_difference`] that stays inside `bounds`, falling back to a
/// forward or backward difference at the edges.
pub fn finite_difference_within<F>(f: F, point: &[f64], index: usize, h: f64, bounds: &Interval) -> Derivative
where
    F: Fn(&[f64]) -> f64,
{
    let x = point[index];
    let mut p = point.to_vec();
    let (lo_ok, hi_ok) = (bounds.contains(x - h), bounds.contains(x + h));
    if lo_ok && hi_ok {
        return Derivative { value: finite_difference(f, point, index, h), one_sided: false };
    }
    let centre = f(point);
    let value = if hi_ok {
        p[index] = x + h;
        (f(&p) - centre) / h
    } else {
        p[index] = x - h;
        (centre - f(&p)) / h
    };
    Derivative { value, one_sided: true }
}

/// Second central difference `(f(p + h) - 2 f(p) + f(p - h)) / h^2`.
pub fn second_difference<F>(f: F, point: &[f64], index: usize, h: f64) -> f64
where
    F: Fn(&[f64]) -> f64,
{
    let mut p = point.to_vec();
    p[index] = point[index] + h;
    let up = f(&p);
    p[index] = point[index] - h;
    let down = f(&p);
    (up - 2.0 * f(point) + down) / (h * h)
}

/// Grid value helper re-exported for callers that build their own sweeps.
pub fn grid_axis(iv: &Interval, points: usize) -> Vec<f64> {
    (0..points).map(|i| axis_value(iv, i, points)).collect()
}
