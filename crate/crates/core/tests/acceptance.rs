//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line;
//! the test fails if any criterion does.

mod common;

use std::time::{Duration, Instant};

use common::*;
use coupled_core::markets::{
    foc_residual, isoelastic_feasible, response_from_payoff, second_order_check, CournotModel, IsoelasticParams,
};
use coupled_core::{
    affine_fixed_point, certify, estimate_lipschitz, iterate, solve, symmetric_collapse, verify_bounds, AffineResponse,
    DomainBox, Error, HardyRogersConstants, ProductPoint, Projection, SamplerPolicy, SolverPolicy, Stop,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<Vec<String>, String>;

/// Name, time limit in seconds, check.
type Criterion = (&'static str, u64, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn fmt_point(p: &ProductPoint) -> String {
    let c: Vec<String> = p.concat().iter().map(|v| format!("{v:.6}")).collect();
    format!("({})", c.join(", "))
}

fn criterion_1() -> Outcome {
    let sys = example2();
    let (report, trace) =
        solve(&sys, &ProductPoint::scalar(20.0, 30.0), &SolverPolicy::default()).map_err(|e| e.to_string())?;
    ensure(report.stop == Stop::Cycle { period: 2 }, || format!("stop was {}", report.stop))?;
    let pts = iterate(&sys, &ProductPoint::scalar(20.0, 30.0), 6).map_err(|e| e.to_string())?;
    for (n, p) in pts.iter().enumerate() {
        let want = if n % 2 == 0 { ProductPoint::scalar(20.0, 30.0) } else { ProductPoint::scalar(30.0, 20.0) };
        ensure(*p == want, || format!("iterate {n} is {p:?}"))?;
    }
    for e in trace.entries() {
        ensure(e.point.concat().iter().all(|v| v.fract() == 0.0), || format!("non-integer iterate {:?}", e.point))?;
    }
    Ok(vec![format!("stop {} after {} steps", report.stop, report.iterations)])
}

fn criterion_2() -> Outcome {
    let sys = example2();
    let xs = [20.0, 29.0, 24.0, 17.0, 60.0, 0.0, 100.0];
    let ys = [31.0, 18.0, 35.0, 6.0, 71.0, 0.0, 100.0];
    let pts = iterate(&sys, &ProductPoint::scalar(20.0, 31.0), 6).map_err(|e| e.to_string())?;
    for (n, p) in pts.iter().enumerate() {
        ensure(*p == ProductPoint::scalar(xs[n], ys[n]), || format!("iterate {n} is {p:?}"))?;
    }
    Ok(vec![])
}

fn criterion_3() -> Outcome {
    let oracle =
        affine_fixed_point(&AffineResponse::scalar(-2.0, -1.0, 100.0, -1.0, -2.0, 100.0)).map_err(|e| e.to_string())?;
    ensure(rho(&oracle, &ProductPoint::scalar(25.0, 25.0)) <= 1e-12, || format!("oracle {oracle:?}"))?;
    let model = CournotModel::linear_quadratic(100.0, 1.0, 1.0, 0.5, 0.5);
    let (r1, r2) = foc_residual(&model, 25.0, 25.0, 1e-3);
    ensure(r1.abs() <= 1e-6 && r2.abs() <= 1e-6, || format!("foc residual ({r1}, {r2})"))?;
    ensure(second_order_check(&model, 25.0, 25.0, 1e-3) == (true, true), || "second-order check failed".into())?;
    let (report, _) =
        solve(&example2(), &ProductPoint::scalar(20.0, 30.0), &SolverPolicy::default()).map_err(|e| e.to_string())?;
    ensure(matches!(report.stop, Stop::Cycle { .. }), || format!("stop was {}", report.stop))?;
    Ok(vec![format!("foc residual ({r1:e}, {r2:e}); iteration stops with {}", report.stop)])
}

fn criterion_4() -> Outcome {
    let sys = example3();
    let c = HardyRogersConstants::banach(0.99).unwrap();
    let cert = certify(&sys, &c, &SamplerPolicy::grid(101)).map_err(|e| e.to_string())?;
    ensure(cert.pairs_tested == 101 * 101 * (101 * 101 - 1) / 2, || format!("{} pairs", cert.pairs_tested))?;
    ensure(cert.passed, || format!("certificate failed, worst slack {}", cert.worst_slack))?;

    let oracle = affine_fixed_point(&AffineResponse::scalar(-0.98, -0.09, 45.0, -0.01, -0.9, 50.0))
        .map_err(|e| e.to_string())?;
    let policy = SolverPolicy::default().with_constants(c);
    let (report, trace) = solve(&sys, &ProductPoint::scalar(10.0, 30.0), &policy).map_err(|e| e.to_string())?;
    ensure(report.stop == Stop::Converged, || format!("stop was {}", report.stop))?;
    let limit = report.point.clone().unwrap();
    let err = rho(&limit, &oracle);
    ensure(err <= 1e-6, || format!("distance to oracle {err}"))?;
    let violations = verify_bounds(&trace, &oracle, 0.99);
    ensure(violations == 0, || format!("{violations} bound violations"))?;

    let published = ProductPoint::scalar(24.06, 26.18);
    let mut notes = vec![
        format!("oracle {}; solve {} in {} steps", fmt_point(&oracle), fmt_point(&limit), report.iterations),
        format!("worst ratio {:.6} over {} pairs", cert.worst_ratio, cert.pairs_tested),
    ];
    if rho(&published, &oracle) > 0.01 {
        notes.push(format!(
            "published equilibrium (24.06, 26.18) does not match; distance {:.3}",
            rho(&published, &oracle)
        ));
    }
    Ok(notes)
}

fn criterion_5() -> Outcome {
    let sys = example4();
    let target = ProductPoint::scalar(0.2, 0.8);
    let mut worst_iters = 0;
    for i in 0..=20 {
        for j in 0..=20 {
            let start = ProductPoint::scalar(i as f64 / 20.0, j as f64 / 20.0);
            let (report, _) = solve(&sys, &start, &SolverPolicy::default()).map_err(|e| e.to_string())?;
            ensure(report.stop == Stop::Converged, || format!("{start:?}: stop {}", report.stop))?;
            ensure(report.iterations <= 3, || format!("{start:?}: {} iterations", report.iterations))?;
            let p = report.point.unwrap();
            ensure(rho(&p, &target) <= 1e-12, || format!("{start:?}: limit {p:?}"))?;
            worst_iters = worst_iters.max(report.iterations);
        }
    }

    let grid = SamplerPolicy::grid(101);
    let kannan = HardyRogersConstants::new(0.0, 1.0 / 7.0, 0.0).unwrap();
    let pass = certify(&sys, &kannan, &grid).map_err(|e| e.to_string())?;
    ensure(pass.passed, || format!("(0, 1/7, 0) failed, worst slack {}", pass.worst_slack))?;

    let banach = HardyRogersConstants::banach(0.99).unwrap();
    let fail = certify(&sys, &banach, &grid).map_err(|e| e.to_string())?;
    ensure(!fail.passed, || "(0.99, 0, 0) unexpectedly passed".into())?;
    let (p, q) = fail.violating_pair.clone().ok_or("no violating pair")?;
    let (x, u) = (p.first[0], q.first[0]);
    ensure(x == 0.8 && u > 0.8 && u <= 0.81 + 1e-12, || format!("violating pair {p:?} / {q:?}"))?;
    Ok(vec![
        format!("441 starts, at most {worst_iters} iterations"),
        format!("(0, 1/7, 0): worst slack {:.3e} over {} pairs", pass.worst_slack, pass.pairs_tested),
        format!("(0.99, 0, 0): violating pair {} / {}, slack {:.4}", fmt_point(&p), fmt_point(&q), fail.worst_slack),
    ])
}

fn criterion_6() -> Outcome {
    let p = isoelastic_params();
    ensure(isoelastic_feasible(p.eta, p.c, p.q_max), || "parameters reported infeasible".into())?;
    let sys = isoelastic();
    let lip = estimate_lipschitz(&sys, &SamplerPolicy::default_for(&sys)).map_err(|e| e.to_string())?;
    ensure(lip < 1.0, || format!("Lipschitz estimate {lip}"))?;
    let policy = SolverPolicy::default();
    let (report, _) = solve(&sys, &ProductPoint::scalar(0.3, 0.2), &policy).map_err(|e| e.to_string())?;
    ensure(report.stop == Stop::Converged, || format!("stop was {}", report.stop))?;
    let limit = report.point.clone().unwrap();
    let err = rho(&limit, &ProductPoint::scalar(0.0, 0.0));
    ensure(err <= 1e-9, || format!("distance to origin {err}"))?;
    let collapse = symmetric_collapse(&sys, &report, policy.collapse_tol).map_err(|e| e.to_string())?;
    ensure(collapse && report.symmetric_collapse == Some(true), || "no symmetric collapse".into())?;
    let half = DomainBox::cube(1, 0.0, 0.5).unwrap();
    let bad = IsoelasticParams { eta: 0.25, c: 0.3, q_max: 1.0 };
    let rejected = coupled_core::markets::build_isoelastic(&bad, half.clone(), half);
    ensure(matches!(rejected, Err(Error::Infeasible(_))), || format!("c = 0.3 gave {rejected:?}"))?;
    Ok(vec![format!("Lipschitz estimate {lip:.4}; limit {} after {} steps", fmt_point(&limit), report.iterations)])
}

fn criterion_7() -> Outcome {
    let sys = surplus();
    let coeffs = surplus_coefficients();
    let oracle = ProductPoint::from_concat(&surplus_oracle(), 2);
    let via_matrix = affine_fixed_point(&coeffs.composed()).map_err(|e| e.to_string())?;
    ensure(rho(&oracle, &via_matrix) <= 1e-9, || format!("oracles disagree: {via_matrix:?}"))?;

    let (report, trace) = solve(&sys, &surplus_start(), &SolverPolicy::default()).map_err(|e| e.to_string())?;
    ensure(report.stop == Stop::Converged, || format!("stop was {}", report.stop))?;
    let limit = report.point.clone().unwrap();
    let err = rho(&limit, &oracle);
    ensure(err <= 1e-9, || format!("distance to oracle {err:e}"))?;

    let model = coeffs.model();
    let pts: Vec<&ProductPoint> = trace.points().collect();
    for w in pts.windows(2) {
        let (prev, next) = (w[0], w[1]);
        let (u1, u2) = model.productions(prev.first[0], prev.first[1], prev.second[0], prev.second[1]);
        let gap1 = (next.first[0] + next.first[1] - u1).abs();
        let gap2 = (next.second[0] + next.second[1] - u2).abs();
        ensure(gap1 <= 1e-12 && gap2 <= 1e-12, || format!("conservation gap ({gap1:e}, {gap2:e}) at {prev:?}"))?;
    }

    let lip = estimate_lipschitz(&sys, &SamplerPolicy::default_for(&sys)).map_err(|e| e.to_string())?;
    ensure(lip <= 0.76, || format!("Lipschitz estimate {lip}"))?;

    let (plain, _) =
        solve(&no_attention(), &ProductPoint::scalar(0.0, 0.0), &SolverPolicy::default()).map_err(|e| e.to_string())?;
    let plain_limit = plain.point.clone().ok_or("no-surplus variant did not converge")?;
    let plain_oracle = ProductPoint::scalar(350.0 / 11.0, 120.0 / 11.0);
    ensure(rho(&plain_limit, &plain_oracle) <= 1e-6, || format!("no-surplus limit {plain_limit:?}"))?;
    Ok(vec![
        format!("limit {} in {} steps, error {err:.1e}", fmt_point(&limit), report.iterations),
        format!("Lipschitz estimate {lip:.4}; no-surplus limit {}", fmt_point(&plain_limit)),
    ])
}

/// A random affine system whose coefficient matrix has every absolute row
/// and column sum at most `0.95`; the column bound makes the map a Banach
/// contraction for the L1 product metric.
struct RandomAffine {
    response: AffineResponse,
    k1: f64,
}

fn abs_sums(m: &[Vec<f64>]) -> (f64, f64) {
    let n = m.len();
    let rows = m.iter().map(|r| r.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max);
    let cols = (0..n).map(|j| m.iter().map(|r| r[j].abs()).sum::<f64>()).fold(0.0, f64::max);
    (rows, cols)
}

fn random_affine(rng: &mut ChaCha8Rng, symmetric: bool) -> RandomAffine {
    let d: usize = rng.gen_range(1..=2);
    let n = 2 * d;
    let mut m = vec![vec![0.0; n]; n];
    let mut offset = vec![0.0; n];
    if symmetric {
        // F1(x, y) = b + P x + Q y and F2(x, y) = b + P y + Q x
        let p: Vec<Vec<f64>> = (0..d).map(|_| (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
        let q: Vec<Vec<f64>> = (0..d).map(|_| (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
        let b: Vec<f64> = (0..d).map(|_| rng.gen_range(-50.0..50.0)).collect();
        for i in 0..d {
            for j in 0..d {
                m[i][j] = p[i][j];
                m[i][d + j] = q[i][j];
                m[d + i][j] = q[i][j];
                m[d + i][d + j] = p[i][j];
            }
            offset[i] = b[i];
            offset[d + i] = b[i];
        }
    } else {
        for row in &mut m {
            for v in row.iter_mut() {
                *v = rng.gen_range(-1.0..1.0);
            }
        }
        for b in &mut offset {
            *b = rng.gen_range(-50.0..50.0);
        }
    }
    let (rows, cols) = abs_sums(&m);
    let scale = 0.95 * rng.gen_range(0.2..1.0) / rows.max(cols);
    for row in &mut m {
        for v in row.iter_mut() {
            *v *= scale;
        }
    }
    let (rows, cols) = abs_sums(&m);
    RandomAffine { response: AffineResponse::new(m, offset, d).unwrap(), k1: rows.max(cols) }
}

fn criterion_8() -> Outcome {
    const SYSTEMS: usize = 200;
    // Solver step tolerance such that k / (1 - k) * tol stays below the
    // accuracy target for every k <= 0.95.
    const STEP_TOL: f64 = 1e-10;
    const ACCURACY: f64 = 1e-8;
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_601);
    let mut worst = (0.0f64, 0.0f64, 0.0f64);
    let mut symmetric_runs = 0;
    for idx in 0..2 * SYSTEMS {
        let symmetric = idx >= SYSTEMS;
        let RandomAffine { response, k1 } = random_affine(&mut rng, symmetric);
        let d = response.dim1;
        let sys = response
            .to_system(DomainBox::cube(d, -1e6, 1e6).unwrap(), DomainBox::cube(d, -1e6, 1e6).unwrap(), Projection::None)
            .map_err(|e| e.to_string())?;
        let oracle = affine_fixed_point(&response).map_err(|e| e.to_string())?;
        let policy = SolverPolicy { convergence_tol: STEP_TOL, ..SolverPolicy::default() }
            .with_constants(HardyRogersConstants::banach(k1).unwrap());
        let mut limits = Vec::new();
        for _ in 0..2 {
            let start: Vec<f64> = (0..2 * d).map(|_| rng.gen_range(-100.0..100.0)).collect();
            let start = ProductPoint::from_concat(&start, d);
            let (report, trace) = solve(&sys, &start, &policy).map_err(|e| format!("system {idx}: {e}"))?;
            ensure(report.stop == Stop::Converged, || format!("system {idx}: stop {}", report.stop))?;
            let limit = report.point.clone().unwrap();
            let err = rho(&limit, &oracle);
            ensure(err <= ACCURACY, || format!("system {idx}: distance to oracle {err:e}"))?;
            let violations = verify_bounds(&trace, &oracle, k1);
            ensure(violations == 0, || format!("system {idx}: {violations} bound violations"))?;
            worst.0 = worst.0.max(err);
            limits.push(limit);
        }
        let spread = rho(&limits[0], &limits[1]);
        ensure(spread <= 2.0 * ACCURACY, || format!("system {idx}: starts disagree by {spread:e}"))?;
        worst.1 = worst.1.max(spread);
        if symmetric {
            symmetric_runs += 1;
            for l in &limits {
                let asym = coupled_core::l1_distance(&l.first, &l.second).map_err(|e| e.to_string())?;
                ensure(asym <= ACCURACY, || format!("system {idx}: |xi - eta| = {asym:e}"))?;
                worst.2 = worst.2.max(asym);
            }
        }
    }
    Ok(vec![format!(
        "{SYSTEMS} general + {symmetric_runs} symmetric systems; worst oracle error {:.1e}, start spread {:.1e}, asymmetry {:.1e}",
        worst.0, worst.1, worst.2
    )])
}

fn criterion_9() -> Outcome {
    let model = CournotModel::linear_quadratic(100.0, 1.0, 1.0, 0.5, 0.5);
    let dom = DomainBox::cube(1, 0.0, 100.0).unwrap();
    let sys = response_from_payoff(&model, 1e-3, dom.clone(), dom).map_err(|e| e.to_string())?;
    let f = |x: f64, y: f64| {
        let (a, b) = sys.raw(&[x], &[y]);
        (a[0], b[0])
    };
    let (x0, y0) = (20.0, 30.0);
    let base = f(x0, y0);
    let dx = f(x0 + 1.0, y0);
    let dy = f(x0, y0 + 1.0);
    let c11 = dx.0 - base.0;
    let c21 = dx.1 - base.1;
    let c12 = dy.0 - base.0;
    let c22 = dy.1 - base.1;
    let b1 = base.0 - c11 * x0 - c12 * y0;
    let b2 = base.1 - c21 * x0 - c22 * y0;
    let got = [c11, c12, b1, c21, c22, b2];
    let want = [-2.0, -1.0, 100.0, -1.0, -2.0, 100.0];
    for (g, w) in got.iter().zip(want) {
        ensure((g - w).abs() <= 1e-5, || format!("coefficients {got:?}"))?;
    }
    let fixed = affine_fixed_point(&AffineResponse::scalar(c11, c12, b1, c21, c22, b2)).map_err(|e| e.to_string())?;
    let (r1, r2) = foc_residual(&model, fixed.first[0], fixed.second[0], 1e-3);
    ensure(r1.abs() <= 1e-5 && r2.abs() <= 1e-5, || format!("foc residual ({r1}, {r2})"))?;
    let image = coupled_core::step(&sys, &fixed).map_err(|e| e.to_string())?;
    ensure(rho(&image, &fixed) <= 1e-5, || format!("{fixed:?} is not fixed"))?;
    Ok(vec![format!("fixed point {}; foc residual ({r1:.1e}, {r2:.1e})", fmt_point(&fixed))])
}

#[test]
fn acceptance_criteria() {
    let criteria: [Criterion; 9] = [
        ("table 1 cycle", 1, criterion_1),
        ("table 2 clamped iterates", 1, criterion_2),
        ("first-order point is not reached", 1, criterion_3),
        ("linear market certificate and bounds", 5, criterion_4),
        ("step-function market", 10, criterion_5),
        ("isoelastic market", 1, criterion_6),
        ("surplus market", 1, criterion_7),
        ("random affine properties", 30, criterion_8),
        ("payoff round trip", 1, criterion_9),
    ];
    let mut failed = Vec::new();
    for (i, (name, limit, run)) in criteria.into_iter().enumerate() {
        let started = Instant::now();
        let outcome = run();
        let elapsed = started.elapsed();
        let outcome = match outcome {
            Ok(notes) if elapsed > Duration::from_secs(limit) => {
                Err(format!("took {elapsed:.2?}, limit {limit} s; {}", notes.join("; ")))
            }
            other => other,
        };
        match outcome {
            Ok(notes) => {
                println!("PASS criterion {} ({name}) in {elapsed:.2?}", i + 1);
                for n in notes {
                    println!("     {n}");
                }
            }
            Err(reason) => {
                println!("FAIL criterion {} ({name}) in {elapsed:.2?}: {reason}", i + 1);
                failed.push(i + 1);
            }
        }
    }
    assert!(failed.is_empty(), "failing criteria: {failed:?}");
}
