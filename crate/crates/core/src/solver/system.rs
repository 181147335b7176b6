use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{Bundle, DomainBox, ProductPoint};

/// Black-box response map: `(x, y) -> new bundle`.
pub type ResponseMap = Arc<dyn Fn(&[f64], &[f64]) -> Vec<f64> + Send + Sync>;

/// How raw map outputs are pulled back into the feasible set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Projection {
    /// Negative productions become zero.
    #[default]
    ClampBelowZero,
    ClampToBox,
    None,
}

/// A pair of response maps `F1: X1 x X2 -> X1`, `F2: X1 x X2 -> X2` on box
/// domains, together with the projection applied to their outputs.
#[derive(Clone)]
pub struct ResponseSystem {
    first: ResponseMap,
    second: ResponseMap,
    domain1: DomainBox,
    domain2: DomainBox,
    projection: Projection,
    symmetric_hint: bool,
}

impl fmt::Debug for ResponseSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ResponseSystem")
            .field("domain1", &self.domain1)
            .field("domain2", &self.domain2)
            .field("projection", &self.projection)
            .field("symmetric_hint", &self.symmetric_hint)
            .finish_non_exhaustive()
    }
}

impl ResponseSystem {
    /// Clamping at zero is only allowed on domains without negative
    /// coordinates, otherwise it would move points that are already feasible.
    pub fn new<F1, F2>(
        first: F1,
        second: F2,
        domain1: DomainBox,
        domain2: DomainBox,
        projection: Projection,
    ) -> Result<Self>
    where
        F1: Fn(&[f64], &[f64]) -> Vec<f64> + Send + Sync + 'static,
        F2: Fn(&[f64], &[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        if projection == Projection::ClampBelowZero {
            let negative = domain1.intervals().iter().chain(domain2.intervals()).any(|iv| iv.lo < 0.0);
            if negative {
                return Err(Error::Configuration("clamp-below-at-zero needs domain boxes with lo >= 0".into()));
            }
        }
        Ok(Self {
            first: Arc::new(first),
            second: Arc::new(second),
            domain1,
            domain2,
            projection,
            symmetric_hint: false,
        })
    }

    /// Marks the system as built with `F2(x, y) = F1(y, x)`.
    pub fn with_symmetric_hint(mut self, hint: bool) -> Self {
        self.symmetric_hint = hint;
        self
    }

    pub fn domain1(&self) -> &DomainBox {
        &self.domain1
    }

    pub fn domain2(&self) -> &DomainBox {
        &self.domain2
    }

    pub fn projection(&self) -> Projection {
        self.projection
    }

    pub fn symmetric_hint(&self) -> bool {
        self.symmetric_hint
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.domain1.dim(), self.domain2.dim())
    }

    /// Concatenated domain axes of `X1 x X2`.
    pub fn axes(&self) -> Vec<crate::metric::Interval> {
        self.domain1.intervals().iter().chain(self.domain2.intervals()).copied().collect()
    }

    pub fn contains(&self, p: &ProductPoint) -> bool {
        self.domain1.contains(&p.first) && self.domain2.contains(&p.second)
    }

    /// Unprojected map outputs.
    pub fn raw(&self, x: &[f64], y: &[f64]) -> (Vec<f64>, Vec<f64>) {
        ((self.first)(x, y), (self.second)(x, y))
    }

    fn project(&self, mut v: Vec<f64>, domain: &DomainBox) -> Vec<f64> {
        match self.projection {
            Projection::ClampBelowZero => {
                for c in &mut v {
                    // also folds -0.0 into 0.0
                    if *c <= 0.0 {
                        *c = 0.0;
                    }
                }
            }
            Projection::ClampToBox => {
                for (c, iv) in v.iter_mut().zip(domain.intervals()) {
                    if !c.is_nan() {
                        *c = iv.clamp(*c);
                    }
                }
            }
            Projection::None => {}
        }
        v
    }

    /// Projected image `(F1(x, y), F2(x, y))` of a concatenated point.
    ///
    /// Returns `None` if an output is non-finite or has the wrong length.
    /// Used by the hot loops that already know the input is in the domain.
    pub(crate) fn image_concat(&self, z: &[f64]) -> Option<Vec<f64>> {
        let d1 = self.domain1.dim();
        let (x, y) = z.split_at(d1);
        let (a, b) = self.raw(x, y);
        if a.len() != d1 || b.len() != self.domain2.dim() {
            return None;
        }
        let mut out = self.project(a, &self.domain1);
        out.extend(self.project(b, &self.domain2));
        out.iter().all(|c| c.is_finite()).then_some(out)
    }
}

/// One simultaneous update `(x, y) -> (P(F1(x, y)), P(F2(x, y)))`.
///
/// Both maps read the same input point.
pub fn step(sys: &ResponseSystem, p: &ProductPoint) -> Result<ProductPoint> {
    step_at(sys, p, 0)
}

pub(crate) fn step_at(sys: &ResponseSystem, p: &ProductPoint, iteration: usize) -> Result<ProductPoint> {
    let (d1, d2) = sys.dims();
    if p.first.dim() != d1 {
        return Err(Error::DimensionMismatch { expected: d1, found: p.first.dim() });
    }
    if p.second.dim() != d2 {
        return Err(Error::DimensionMismatch { expected: d2, found: p.second.dim() });
    }
    if !sys.contains(p) {
        return Err(Error::OutsideDomain(format!("{p:?}")));
    }
    let (a, b) = sys.raw(p.first.coords(), p.second.coords());
    if a.len() != d1 || b.len() != d2 {
        return Err(Error::Evaluation { iteration, point: p.clone() });
    }
    let a = sys.project(a, &sys.domain1);
    let b = sys.project(b, &sys.domain2);
    let next = ProductPoint::new(Bundle::from_raw(a), Bundle::from_raw(b));
    if !next.is_finite() {
        return Err(Error::Evaluation { iteration, point: p.clone() });
    }
    if !sys.contains(&next) {
        return Err(Error::OutsideDomain(format!(
            "image {next:?} of {p:?} leaves the domain at iteration {iteration}"
        )));
    }
    Ok(next)
}
