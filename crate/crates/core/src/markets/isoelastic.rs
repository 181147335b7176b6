use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::DomainBox;
use crate::solver::{Projection, ResponseSystem};

/// Isoelastic demand `P(Q) = Q^(-1/eta)` with shared marginal cost `c` and a
/// ceiling `q_max` on total output.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IsoelasticParams {
    pub eta: f64,
    pub c: f64,
    pub q_max: f64,
}

/// `0 < c q_max^(1/eta) < (1 - 2 eta) / (2 (1 + eta))` with `eta < 1/2`.
///
/// Under this condition the shared response is a contraction with constant
/// `2 (eta + c (1 + eta) q_max^(1/eta)) < 1`.
pub fn isoelastic_feasible(eta: f64, c: f64, q_max: f64) -> bool {
    if !(eta > 0.0 && eta < 0.5 && c > 0.0 && q_max > 0.0) {
        return false;
    }
    let lhs = c * q_max.powf(1.0 / eta);
    lhs > 0.0 && lhs < (1.0 - 2.0 * eta) / (2.0 * (1.0 + eta))
}

/// The shared response `F(x, y) = eta Q - c eta Q^(1 + 1/eta)`, `Q = x + y`.
pub fn isoelastic_response(p: &IsoelasticParams, x: f64, y: f64) -> f64 {
    let q = x + y;
    p.eta * q - p.c * p.eta * q.powf(1.0 + 1.0 / p.eta)
}

/// Symmetric system `F1 = F2 = F` on boxes inside `{x + y <= q_max}`.
pub fn build_isoelastic(p: &IsoelasticParams, domain1: DomainBox, domain2: DomainBox) -> Result<ResponseSystem> {
    if !isoelastic_feasible(p.eta, p.c, p.q_max) {
        return Err(Error::Infeasible(format!(
            "eta = {}, c = {}, q_max = {} violates 0 < c q_max^(1/eta) < (1 - 2 eta) / (2 (1 + eta))",
            p.eta, p.c, p.q_max
        )));
    }
    if domain1.dim() != 1 || domain2.dim() != 1 {
        return Err(Error::Configuration("isoelastic model has one output per firm".into()));
    }
    let (a, b) = (domain1.intervals()[0], domain2.intervals()[0]);
    if a.lo < 0.0 || b.lo < 0.0 || a.hi + b.hi > p.q_max {
        return Err(Error::Configuration(format!("domain must lie in {{x, y >= 0, x + y <= {}}}", p.q_max)));
    }
    let (p1, p2) = (*p, *p);
    Ok(ResponseSystem::new(
        move |x, y| vec![isoelastic_response(&p1, x[0], y[0])],
        move |x, y| vec![isoelastic_response(&p2, x[0], y[0])],
        domain1,
        domain2,
        Projection::ClampBelowZero,
    )?
    .with_symmetric_hint(true))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn half() -> DomainBox {
        DomainBox::cube(1, 0.0, 0.5).unwrap()
    }

    #[test]
    fn feasibility() {
        assert!(isoelastic_feasible(0.25, 0.1, 1.0));
        assert!(!isoelastic_feasible(0.5, 0.01, 1.0));
        assert!(!isoelastic_feasible(0.25, 0.3, 1.0));
        assert!(!isoelastic_feasible(0.25, 0.0, 1.0));
    }

    #[test]
    fn response_value() {
        let p = IsoelasticParams { eta: 0.25, c: 0.1, q_max: 1.0 };
        assert!((isoelastic_response(&p, 0.5, 0.5) - 0.225).abs() < 1e-15);
        assert_eq!(isoelastic_response(&p, 0.0, 0.0), 0.0);
    }

    #[test]
    fn builder_matches_feasibility() {
        for (eta, c) in [(0.25, 0.1), (0.25, 0.3), (0.1, 0.5), (0.4, 0.05), (0.45, 0.01), (0.6, 0.01)] {
            let p = IsoelasticParams { eta, c, q_max: 1.0 };
            let built = build_isoelastic(&p, half(), half());
            assert_eq!(built.is_ok(), isoelastic_feasible(eta, c, 1.0), "eta={eta} c={c}");
            if let Err(e) = built {
                assert!(matches!(e, Error::Infeasible(_)));
            }
        }
    }

    #[test]
    fn domain_must_fit_under_ceiling() {
        let p = IsoelasticParams { eta: 0.25, c: 0.1, q_max: 1.0 };
        let wide = DomainBox::cube(1, 0.0, 1.0).unwrap();
        assert!(matches!(build_isoelastic(&p, wide.clone(), wide), Err(Error::Configuration(_))));
        assert!(build_isoelastic(&p, half(), half()).unwrap().symmetric_hint());
    }
}
