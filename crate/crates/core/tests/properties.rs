mod common;

use common::*;
use coupled_core::markets::{
    build_isoelastic, foc_residual, isoelastic_feasible, response_from_payoff, CournotModel, IsoelasticParams,
};
use coupled_core::{
    affine_fixed_point, certify, contraction_factor, estimate_lipschitz, grid_fixed_point, hr_gap, solve, step,
    AffineResponse, DomainBox, Error, Execution, HardyRogersConstants, Interval, ProductPoint, Projection,
    ResponseSystem, SamplerPolicy, SolverPolicy, Stop,
};
use proptest::prelude::*;

fn constants() -> impl Strategy<Value = HardyRogersConstants> {
    (0.0..0.99f64, 0.0..1.0f64, 0.0..1.0f64).prop_filter_map("invalid", |(k1, a, b)| {
        let room = (1.0 - k1) / 2.0 * 0.999;
        HardyRogersConstants::new(k1, room * a * (1.0 - b), room * b * (1.0 - a)).ok()
    })
}

fn unit_point() -> impl Strategy<Value = ProductPoint> {
    (0.0..=1.0f64, 0.0..=1.0f64).prop_map(|(x, y)| ProductPoint::scalar(x, y))
}

fn linear_point() -> impl Strategy<Value = ProductPoint> {
    (0.0..=100.0f64, 0.0..=100.0f64).prop_map(|(x, y)| ProductPoint::scalar(x, y))
}

/// 1+1 affine map `z -> A z + b` with L1 operator norm `< 0.95`, on a box
/// wide enough to contain all images.
fn contraction_1x1() -> impl Strategy<Value = (AffineResponse, f64)> {
    (prop::array::uniform4(-1.0..1.0f64), prop::array::uniform2(-10.0..10.0f64), 0.1..0.95f64).prop_map(
        |(a, b, norm)| {
            let cols = ((a[0].abs() + a[2].abs()).max(a[1].abs() + a[3].abs())).max(1e-9);
            let s = norm / cols;
            let ar = AffineResponse::scalar(a[0] * s, a[1] * s, b[0], a[2] * s, a[3] * s, b[1]);
            let col =
                (ar.matrix[0][0].abs() + ar.matrix[1][0].abs()).max(ar.matrix[0][1].abs() + ar.matrix[1][1].abs());
            (ar, col)
        },
    )
}

fn box_system(ar: &AffineResponse, half_width: f64) -> ResponseSystem {
    let d = DomainBox::cube(1, -half_width, half_width).unwrap();
    ar.to_system(d.clone(), d, Projection::None).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn factor_is_monotone(c in constants(), i in 0usize..3, t in 0.0..1.0f64) {
        let k = [c.k1, c.k2, c.k3];
        let slack = 1.0 - (c.k1 + 2.0 * c.k2 + 2.0 * c.k3);
        let mut bumped = k;
        bumped[i] += t * slack * if i == 0 { 0.999 } else { 0.4995 };
        let d = HardyRogersConstants::new(bumped[0], bumped[1], bumped[2]).unwrap();
        prop_assert!(contraction_factor(&d).unwrap() >= contraction_factor(&c).unwrap());
    }

    #[test]
    fn gap_is_symmetric(c in constants(), p in unit_point(), q in unit_point()) {
        let sys = example4();
        let (l1, r1) = hr_gap(&sys, &c, &p, &q).unwrap();
        let (l2, r2) = hr_gap(&sys, &c, &q, &p).unwrap();
        prop_assert_eq!(l1, l2);
        prop_assert!((r1 - r2).abs() <= 1e-15 * r1.abs().max(1.0));
    }

    #[test]
    fn dominating_constants_keep_passing(d2 in 0.0..0.3f64, d3 in 0.0..0.1f64) {
        // (0, 1/7, 0) passes on this sample; enlarge k2 and k3 within the valid region
        let base = HardyRogersConstants::new(0.0, 1.0 / 7.0, 0.0).unwrap();
        let bigger = HardyRogersConstants::new(0.0, (1.0 / 7.0 + d2).min(0.49 - d3), d3).unwrap();
        let sampler = SamplerPolicy::grid(21);
        prop_assert!(certify(&example4(), &base, &sampler).unwrap().passed);
        prop_assert!(certify(&example4(), &bigger, &sampler).unwrap().passed);
    }

    #[test]
    fn lipschitz_estimate_stays_below_column_bound((ar, col) in contraction_1x1(), seed in 0u64..1000) {
        // clamping to the box is 1-Lipschitz per coordinate
        let d = DomainBox::cube(1, -1e3, 1e3).unwrap();
        let sys = ar.to_system(d.clone(), d, Projection::ClampToBox).unwrap();
        let lip = estimate_lipschitz(&sys, &SamplerPolicy::grid(7).with_random_pairs(500, seed)).unwrap();
        prop_assert!(lip <= col + 1e-12, "{} > {}", lip, col);
    }

    #[test]
    fn solver_matches_affine_oracle((ar, col) in contraction_1x1(), x in -50.0..50.0f64, y in -50.0..50.0f64) {
        let sys = box_system(&ar, 1e4);
        let oracle = affine_fixed_point(&ar).unwrap();
        let policy = SolverPolicy { convergence_tol: 1e-11, ..SolverPolicy::default() }
            .with_constants(HardyRogersConstants::banach(col).unwrap());
        let (report, _) = solve(&sys, &ProductPoint::scalar(x, y), &policy).unwrap();
        prop_assert_eq!(report.stop, Stop::Converged);
        prop_assert!(rho(report.point.as_ref().unwrap(), &oracle) <= 1e-8);
        prop_assert_eq!(report.bound_violations, 0);
    }

    #[test]
    fn limits_from_two_starts_agree((ar, col) in contraction_1x1(), a in linear_point(), b in linear_point()) {
        let sys = box_system(&ar, 1e4);
        let policy = SolverPolicy::default();
        let (ra, _) = solve(&sys, &a, &policy).unwrap();
        let (rb, _) = solve(&sys, &b, &policy).unwrap();
        // each limit is within k/(1-k) * tol of the fixed point
        let bound = 2.0 * col / (1.0 - col) * policy.convergence_tol + 1e-12;
        prop_assert!(rho(ra.point.as_ref().unwrap(), rb.point.as_ref().unwrap()) <= bound);
    }

    #[test]
    fn solve_is_bit_identical(p in linear_point()) {
        let policy = SolverPolicy::default().with_constants(HardyRogersConstants::banach(0.99).unwrap());
        let (r1, t1) = solve(&example3(), &p, &policy).unwrap();
        let (r2, t2) = solve(&example3(), &p, &policy).unwrap();
        prop_assert_eq!(r1, r2);
        prop_assert_eq!(t1.to_csv(), t2.to_csv());
    }

    #[test]
    fn step_is_simultaneous(p in linear_point()) {
        let sys = example3();
        let (x, y) = (p.first[0], p.second[0]);
        let next = step(&sys, &p).unwrap();
        // second player first, then first player, both from the old point
        let y1 = sys.raw(&[x], &[y]).1[0];
        let x1 = sys.raw(&[x], &[y]).0[0];
        prop_assert_eq!(next, ProductPoint::scalar(x1.max(0.0), y1.max(0.0)));
    }

    #[test]
    fn projection_keeps_interior_points(x in 0.0..=1.0f64, y in 0.0..=1.0f64, clamp_to_box in any::<bool>()) {
        let d = DomainBox::new(vec![Interval::new(0.0, 1.0).unwrap()]).unwrap();
        let projection = if clamp_to_box { Projection::ClampToBox } else { Projection::ClampBelowZero };
        let sys = ResponseSystem::new(move |_, _| vec![x], move |_, _| vec![y], d.clone(), d, projection).unwrap();
        prop_assert_eq!(step(&sys, &ProductPoint::scalar(0.5, 0.5)).unwrap(), ProductPoint::scalar(x, y));
    }

    #[test]
    fn payoff_response_minus_own_output_is_marginal_profit(x in 1.0..99.0f64, y in 1.0..99.0f64) {
        let model = CournotModel::linear_quadratic(100.0, 1.0, 1.0, 0.5, 0.5);
        let dom = DomainBox::cube(1, 0.0, 100.0).unwrap();
        let sys = response_from_payoff(&model, 1e-3, dom.clone(), dom).unwrap();
        let (f1, f2) = sys.raw(&[x], &[y]);
        let (r1, r2) = foc_residual(&model, x, y, 1e-3);
        prop_assert!((f1[0] - x - r1).abs() <= 1e-6);
        prop_assert!((f2[0] - y - r2).abs() <= 1e-6);
    }

    #[test]
    fn isoelastic_builder_refuses_exactly_infeasible(eta in 0.01..0.7f64, c in 0.001..0.5f64, q_max in 0.5..2.0f64) {
        let half = DomainBox::cube(1, 0.0, q_max / 2.0).unwrap();
        let built = build_isoelastic(&IsoelasticParams { eta, c, q_max }, half.clone(), half);
        if isoelastic_feasible(eta, c, q_max) {
            prop_assert!(built.is_ok());
        } else {
            prop_assert!(matches!(built, Err(Error::Infeasible(_))));
        }
    }

    #[test]
    fn surplus_outputs_conserve_production(
        x in 0.0..60.0f64, dx in 0.0..10.0f64, y in 0.0..30.0f64, dy in 0.0..10.0f64,
    ) {
        let model = surplus_coefficients().model();
        let (u1, u2) = model.productions(x, dx, y, dy);
        let (a, b) = model.respond(x, dx, y, dy);
        prop_assert!((a[0] + a[1] - u1).abs() <= 1e-12);
        prop_assert!((b[0] + b[1] - u2).abs() <= 1e-12);
    }

    #[test]
    fn affine_oracle_residual_is_tiny((ar, _) in contraction_1x1()) {
        let z = affine_fixed_point(&ar).unwrap().concat();
        let image = ar.apply(&z);
        let residual: f64 = z.iter().zip(&image).map(|(a, b)| (a - b).abs()).sum();
        prop_assert!(residual <= 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn grid_oracle_agrees_with_affine_oracle((ar, _) in contraction_1x1()) {
        let oracle = affine_fixed_point(&ar).unwrap();
        let sys = box_system(&ar, 60.0);
        let found = grid_fixed_point(&sys, 41, 3).unwrap();
        prop_assert!(!found.is_empty());
        // four coarse cells shrunk by 10^3, summed over two axes
        prop_assert!(rho(&found[0], &oracle) <= 2.0 * 4.0 * 3.0 * 1e-3, "{:?} vs {:?}", found[0], oracle);
    }

    #[test]
    fn execution_mode_does_not_change_certificates(seed in 0u64..1000) {
        let c = HardyRogersConstants::banach(0.99).unwrap();
        let sampler = SamplerPolicy::grid(15).with_random_pairs(2000, seed);
        let seq = certify(&example4(), &c, &sampler.clone().with_execution(Execution::Sequential)).unwrap();
        let par = certify(&example4(), &c, &sampler.with_execution(Execution::Parallel)).unwrap();
        prop_assert_eq!(seq, par);
    }
}
