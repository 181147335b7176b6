#![allow(dead_code)]

use coupled_core::markets::{self, AffineSurplus, IsoelasticParams, PiecewiseResponse};
use coupled_core::{DomainBox, ProductPoint, ResponseSystem};

pub fn example2() -> ResponseSystem {
    markets::build_affine(-2.0, -1.0, 100.0, -1.0, -2.0, 100.0, (0.0, 100.0))
}

pub fn example3() -> ResponseSystem {
    markets::build_affine(-0.98, -0.09, 45.0, -0.01, -0.9, 50.0, (0.0, 100.0))
}

pub fn example4() -> ResponseSystem {
    let f1 = PiecewiseResponse::from_breakpoints(0.0, &[0.8, 1.0], &[0.2, 0.1]).unwrap();
    let f2 = PiecewiseResponse::from_breakpoints(0.0, &[0.1, 1.0], &[0.9, 0.8]).unwrap();
    let unit = DomainBox::cube(1, 0.0, 1.0).unwrap();
    markets::build_piecewise(&f1, &f2, unit.clone(), unit).unwrap()
}

pub fn isoelastic_params() -> IsoelasticParams {
    IsoelasticParams { eta: 0.25, c: 0.1, q_max: 1.0 }
}

pub fn isoelastic() -> ResponseSystem {
    let half = DomainBox::cube(1, 0.0, 0.5).unwrap();
    markets::build_isoelastic(&isoelastic_params(), half.clone(), half).unwrap()
}

pub fn surplus_coefficients() -> AffineSurplus {
    AffineSurplus { f1: [45.0, -0.5, 0.25, -0.1], f2: [20.0, -0.2, -0.25, -0.05], q1: [0.05, 0.03], q2: [0.04, 0.06] }
}

pub fn surplus_domains() -> (DomainBox, DomainBox) {
    (
        DomainBox::new(vec![
            coupled_core::Interval::new(0.0, 60.0).unwrap(),
            coupled_core::Interval::new(0.0, 10.0).unwrap(),
        ])
        .unwrap(),
        DomainBox::new(vec![
            coupled_core::Interval::new(0.0, 30.0).unwrap(),
            coupled_core::Interval::new(0.0, 10.0).unwrap(),
        ])
        .unwrap(),
    )
}

pub fn surplus() -> ResponseSystem {
    let (d1, d2) = surplus_domains();
    markets::build_surplus(&surplus_coefficients().model(), d1, d2).unwrap()
}

pub fn surplus_start() -> ProductPoint {
    ProductPoint::from_vecs(vec![0.0, 0.0], vec![0.0, 0.0]).unwrap()
}

pub fn no_attention() -> ResponseSystem {
    markets::build_affine(-0.5, 0.25, 45.0, -0.2, -0.25, 20.0, (0.0, 100.0))
}

/// Fixed point of the surplus composition, derived by hand.
///
/// With `u1 = f1`, `u2 = f2` at the fixed point, the state is
/// `x = u1 - Q1(u), dx = Q1(u), y = u2 - Q2(u), dy = Q2(u)`. Substituting into
/// `u1 = 45 - 0.5 x + 0.25 y - 0.1 dx` and `u2 = 20 - 0.2 x - 0.25 y - 0.05 dy`
/// gives a 2x2 linear system in `(u1, u2)`, solved here by Cramer's rule.
pub fn surplus_oracle() -> [f64; 4] {
    let (q11, q12, q21, q22) = (0.05, 0.03, 0.04, 0.06);
    // x  = (1 - q11) u1 - q12 u2,  dx = q11 u1 + q12 u2
    // y  = -q21 u1 + (1 - q22) u2, dy = q21 u1 + q22 u2
    // u1 = 45 - 0.5 x + 0.25 y - 0.1 dx
    let a11 = 1.0 + 0.5 * (1.0 - q11) + 0.25 * q21 + 0.1 * q11;
    let a12 = -0.5 * q12 - 0.25 * (1.0 - q22) + 0.1 * q12;
    // u2 = 20 - 0.2 x - 0.25 y - 0.05 dy
    let a21 = 0.2 * (1.0 - q11) - 0.25 * q21 + 0.05 * q21;
    let a22 = 1.0 - 0.2 * q12 + 0.25 * (1.0 - q22) + 0.05 * q22;
    let det = a11 * a22 - a12 * a21;
    let u1 = (45.0 * a22 - a12 * 20.0) / det;
    let u2 = (a11 * 20.0 - a21 * 45.0) / det;
    [(1.0 - q11) * u1 - q12 * u2, q11 * u1 + q12 * u2, -q21 * u1 + (1.0 - q22) * u2, q21 * u1 + q22 * u2]
}

pub fn rho(a: &ProductPoint, b: &ProductPoint) -> f64 {
    coupled_core::product_distance(a, b).unwrap()
}
