mod common;

use common::{orthotropic, square_clamped, square_ss, thin_square};
use dqplate::newton::SweepRow;
use dqplate::{
    assemble_spec, fd_jacobian, load_sweep, newton, solve_plate, BcKind, DMatrix, DVector, GridKind, JacobianStrategy,
    NewtonOptions, PlateSpec,
};

fn accepted_cases() -> Vec<PlateSpec> {
    vec![
        square_ss(),
        square_clamped(),
        thin_square(0.0457764 * 100.0, 5, GridKind::ChebyshevMapped),
        orthotropic(BcKind::SimplySupported, 1.0, 7),
        orthotropic(BcKind::Clamped, 1.0, 9),
    ]
}

#[test]
fn scalar_square_root() {
    let (x, report) = newton(
        |x: &DVector<f64>| Ok(x.map(|t| t * t - 4.0)),
        |x: &DVector<f64>| Ok(DMatrix::from_element(1, 1, 2.0 * x[0])),
        DVector::from_element(1, 3.0),
        &NewtonOptions {
            tol: 1e-12,
            ..Default::default()
        },
    )
    .unwrap();
    assert!(report.converged);
    assert!((x[0] - 2.0).abs() < 1e-12);
    assert!(report.iterations <= 6);
}

#[test]
fn fd_jacobian_reproduces_linear_map_and_rejects_zero_step() {
    let a = DMatrix::from_fn(4, 4, |i, j| (i as f64 + 1.0) * (j as f64 - 1.5));
    let x = DVector::from_vec(vec![1.0, -2.0, 0.5, 3.0]);
    let j = fd_jacobian(|x| Ok(&a * x), &x, 1e-6).unwrap();
    assert!((j - &a).amax() < 1e-8);
    assert!(fd_jacobian(|x| Ok(&a * x), &x, 0.0).is_err());
}

#[test]
fn converged_start_needs_no_iteration() {
    let sys = assemble_spec(&square_ss()).unwrap();
    let opts = NewtonOptions::default();
    let (field, _) = solve_plate(&sys, None, &opts).unwrap();
    let (again, report) = solve_plate(&sys, Some(&field.w_bar), &opts).unwrap();
    assert_eq!(report.iterations, 0);
    assert_eq!(again.w_bar, field.w_bar);
}

#[test]
fn residual_falls_quadratically() {
    for spec in accepted_cases() {
        let sys = assemble_spec(&spec).unwrap();
        let opts = NewtonOptions {
            tol: 1e-9,
            ..Default::default()
        };
        let (_, report) = solve_plate(&sys, None, &opts).unwrap();
        assert!(report.converged, "{spec:?}");
        let h = &report.residual_history;
        // ratios r_{k+1} / r_k^2 once in the asymptotic regime stay bounded
        let ratios: Vec<f64> = h
            .windows(2)
            .filter(|p| p[0] < 1.0 && p[1] > 1e-11)
            .map(|p| p[1] / (p[0] * p[0]))
            .collect();
        assert!(!ratios.is_empty(), "{h:?}");
        assert!(ratios.iter().all(|&c| c < 10.0), "{h:?}");
    }
}

#[test]
fn jacobian_strategies_agree() {
    for spec in accepted_cases() {
        let sys = assemble_spec(&spec).unwrap();
        let solve = |strategy| {
            let opts = NewtonOptions {
                tol: 1e-9,
                strategy,
                ..Default::default()
            };
            solve_plate(&sys, None, &opts).unwrap()
        };
        let (sjt, rs) = solve(JacobianStrategy::SjtAnalytic);
        let (fd, rf) = solve(JacobianStrategy::FiniteDifference);
        assert!(rs.converged && rf.converged);
        assert!((&sjt.w_bar - &fd.w_bar).amax() <= 1e-7 * sjt.w_bar.amax());
        assert!(rs.iterations <= rf.iterations);
    }
}

#[test]
fn every_reported_load_converges_from_the_linear_guess() {
    let mut specs = vec![square_ss(), square_clamped()];
    for p in [10.0, 25.0, 50.0, 100.0, 200.0, 300.0, 400.0] {
        let q = p * 30e6 * 1e-4 / 16f64.powi(4);
        specs.push(thin_square(q, 5, GridKind::ChebyshevMapped));
        specs.push(thin_square(q, 7, GridKind::Uniform));
        specs.push(thin_square(q, 13, GridKind::ChebyshevMapped));
    }
    for q in [0.25, 0.5, 0.75, 1.0, 1.25, 1.5] {
        for bc in [BcKind::SimplySupported, BcKind::Clamped] {
            for n in [7, 9] {
                specs.push(orthotropic(bc, q, n));
            }
        }
        specs.push(orthotropic(BcKind::Clamped, q, 15));
    }
    for spec in specs {
        let sys = assemble_spec(&spec).unwrap();
        let (_, report) = solve_plate(&sys, None, &NewtonOptions::default()).unwrap();
        assert!(report.converged && report.iterations <= 10, "{spec:?}: {report}");
    }
}

#[test]
fn sweep_matches_independent_solves() {
    let spec = orthotropic(BcKind::Clamped, 1.0, 9);
    let loads = [0.25, 0.5, 1.0, 1.5];
    let opts = NewtonOptions {
        tol: 1e-10,
        ..Default::default()
    };
    let table = load_sweep(&spec, &loads, &opts).unwrap();
    assert!(table.is_complete());
    assert_eq!(table.rows.len(), loads.len());
    for (row, &q) in table.rows.iter().zip(&loads) {
        let sys = assemble_spec(&spec.clone().with_pressure(q)).unwrap();
        let (field, _) = solve_plate(&sys, None, &opts).unwrap();
        assert!((row.center_deflection_ratio - field.center_deflection_ratio).abs() < 1e-9 * field.center_deflection_ratio);
    }
}

#[test]
fn load_deflection_curve_hardens() {
    for bc in [BcKind::SimplySupported, BcKind::Clamped] {
        let spec = orthotropic(bc, 1.0, 9);
        let loads: Vec<f64> = (1..=8).map(|k| 0.25 * k as f64).collect();
        let table = load_sweep(&spec, &loads, &NewtonOptions::default()).unwrap();
        assert!(table.is_complete());
        let rows: &[SweepRow] = &table.rows;
        assert!(rows.windows(2).all(|p| p[1].center_deflection_ratio > p[0].center_deflection_ratio));
        // secant stiffness q / w grows with load
        assert!(rows
            .windows(2)
            .all(|p| p[1].q / p[1].center_deflection_ratio > p[0].q / p[0].center_deflection_ratio));
    }
}

#[test]
fn zero_pressure_gives_flat_plate() {
    let sys = assemble_spec(&square_clamped().with_pressure(0.0)).unwrap();
    let (field, report) = solve_plate(&sys, None, &NewtonOptions::default()).unwrap();
    assert_eq!(report.iterations, 0);
    assert_eq!(field.w.amax(), 0.0);
    assert_eq!(field.u.amax() + field.v.amax(), 0.0);
}
