//! Newton-Raphson iteration with a pluggable Jacobian, plus the plate solve
//! driver and load sweeps built on it.

use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::plate::{assemble_spec, recover_fields, AssembledSystem, PlateSpec, SolutionField};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JacobianStrategy {
    #[serde(alias = "sjt")]
    SjtAnalytic,
    #[serde(alias = "fd")]
    FiniteDifference,
}

impl std::fmt::Display for JacobianStrategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            JacobianStrategy::SjtAnalytic => "sjt",
            JacobianStrategy::FiniteDifference => "fd",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions {
    /// Stop once the max-norm of the residual is at or below this.
    pub tol: f64,
    pub max_iter: usize,
    /// Halve the step (up to 10 times) whenever a full step increases the
    /// residual norm.
    pub damping: bool,
    pub strategy: JacobianStrategy,
    /// Relative step for finite-difference Jacobians.
    pub fd_step: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            tol: 1e-5,
            max_iter: 25,
            damping: false,
            strategy: JacobianStrategy::SjtAnalytic,
            fd_step: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PhaseTimes {
    pub residual: Duration,
    pub jacobian: Duration,
    pub linear_solve: Duration,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NewtonReport {
    pub iterations: usize,
    /// Max-norm of the residual at the start and after every update.
    pub residual_history: Vec<f64>,
    pub converged: bool,
    pub jacobian_strategy: JacobianStrategy,
    pub times: PhaseTimes,
}

impl NewtonReport {
    pub fn final_residual(&self) -> f64 {
        self.residual_history.last().copied().unwrap_or(f64::NAN)
    }
}

impl std::fmt::Display for NewtonReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(
            f,
            "newton: converged={} iterations={} jacobian={}",
            self.converged, self.iterations, self.jacobian_strategy
        )?;
        for (k, r) in self.residual_history.iter().enumerate() {
            writeln!(f, "  iter {k:>3}  max|phi| = {r:.6e}")?;
        }
        write!(
            f,
            "  time: residual {:.3} ms, jacobian {:.3} ms, linear solve {:.3} ms",
            ms(self.times.residual),
            ms(self.times.jacobian),
            ms(self.times.linear_solve)
        )
    }
}

fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

fn max_norm(v: &DVector<f64>) -> f64 {
    if v.iter().all(|x| x.is_finite()) {
        v.amax()
    } else {
        f64::NAN
    }
}

/// Plain Newton iteration `x <- x - J(x)^-1 phi(x)` using an LU solve per step.
///
/// Returns with `converged = false` when `max_iter` updates did not reach the
/// tolerance. A singular Jacobian or a non-finite iterate is an error.
pub fn newton<R, J>(
    mut residual: R,
    mut jacobian: J,
    x0: DVector<f64>,
    opts: &NewtonOptions,
) -> Result<(DVector<f64>, NewtonReport)>
where
    R: FnMut(&DVector<f64>) -> Result<DVector<f64>>,
    J: FnMut(&DVector<f64>) -> Result<DMatrix<f64>>,
{
    if !(opts.tol > 0.0) {
        return Err(invalid(format!("tolerance must be positive, got {}", opts.tol)));
    }
    if x0.iter().any(|x| !x.is_finite()) {
        return Err(invalid("initial guess has non-finite entries"));
    }
    let mut report = NewtonReport {
        iterations: 0,
        residual_history: Vec::new(),
        converged: false,
        jacobian_strategy: opts.strategy,
        times: PhaseTimes::default(),
    };
    let diverged = |reason: String, report: &NewtonReport| Error::Diverged {
        reason,
        report: Box::new(report.clone()),
    };

    let mut x = x0;
    let t = Instant::now();
    let mut r = residual(&x)?;
    report.times.residual += t.elapsed();
    let mut norm = max_norm(&r);
    report.residual_history.push(norm);
    if norm.is_nan() {
        return Err(diverged("residual at the initial guess is not finite".into(), &report));
    }

    loop {
        if norm <= opts.tol {
            report.converged = true;
            break;
        }
        if report.iterations >= opts.max_iter {
            break;
        }

        let t = Instant::now();
        let jac = jacobian(&x)?;
        report.times.jacobian += t.elapsed();

        let t = Instant::now();
        let step = jac.lu().solve(&r);
        report.times.linear_solve += t.elapsed();
        let Some(step) = step else {
            return Err(diverged(
                format!("singular Jacobian at iteration {}", report.iterations),
                &report,
            ));
        };

        let mut scale = 1.0;
        let (x_new, r_new, norm_new) = loop {
            let candidate = &x - scale * &step;
            let t = Instant::now();
            let rc = residual(&candidate)?;
            report.times.residual += t.elapsed();
            let nc = max_norm(&rc);
            let worse = nc.is_nan() || nc > norm;
            if opts.damping && worse && scale > 1.0 / 1024.0 {
                scale *= 0.5;
                continue;
            }
            break (candidate, rc, nc);
        };
        report.iterations += 1;
        report.residual_history.push(norm_new);
        if norm_new.is_nan() || x_new.iter().any(|v| !v.is_finite()) {
            return Err(diverged(
                format!("non-finite iterate at iteration {}", report.iterations),
                &report,
            ));
        }
        x = x_new;
        r = r_new;
        norm = norm_new;
    }
    Ok((x, report))
}

/// Central-difference Jacobian; column `j` perturbs `x_j` by
/// `step * max(1, |x_j|)` in both directions.
pub fn fd_jacobian<R>(mut residual: R, x: &DVector<f64>, step: f64) -> Result<DMatrix<f64>>
where
    R: FnMut(&DVector<f64>) -> Result<DVector<f64>>,
{
    if !(step > 0.0) {
        return Err(invalid(format!("finite-difference step must be positive, got {step}")));
    }
    let n = x.len();
    let mut jac: Option<DMatrix<f64>> = None;
    let mut probe = x.clone();
    for j in 0..n {
        let hj = step * x[j].abs().max(1.0);
        probe[j] = x[j] + hj;
        let plus = residual(&probe)?;
        probe[j] = x[j] - hj;
        let minus = residual(&probe)?;
        probe[j] = x[j];
        let jac = jac.get_or_insert_with(|| DMatrix::zeros(plus.len(), n));
        jac.set_column(j, &((plus - minus) / (2.0 * hj)));
    }
    Ok(jac.unwrap_or_else(|| DMatrix::zeros(0, 0)))
}

/// Jacobian of the plate residual by the requested strategy.
pub fn plate_jacobian(
    sys: &AssembledSystem,
    w: &DVector<f64>,
    strategy: JacobianStrategy,
    fd_step: f64,
) -> Result<DMatrix<f64>> {
    match strategy {
        JacobianStrategy::SjtAnalytic => sys.jacobian(w),
        JacobianStrategy::FiniteDifference => fd_jacobian(|x| sys.residual(x), w, fd_step),
    }
}

/// Solves the nonlinear plate problem from `start`, or from the linear
/// solution when `start` is `None`. A run that exhausts `max_iter` returns
/// `Ok` with `report.converged == false`.
pub fn solve_plate(
    sys: &AssembledSystem,
    start: Option<&DVector<f64>>,
    opts: &NewtonOptions,
) -> Result<(SolutionField, NewtonReport)> {
    let w0 = match start {
        Some(w) => w.clone(),
        None => sys.linear_solve()?,
    };
    let (w, report) = newton(
        |x| sys.residual(x),
        |x| plate_jacobian(sys, x, opts.strategy, opts.fd_step),
        w0,
        opts,
    )?;
    let (u, v) = sys.recover_inplane(&w)?;
    let mut field = recover_fields(sys, &w, &u, &v)?;
    field.newton_iterations = report.iterations;
    Ok((field, report))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub q: f64,
    pub center_deflection_ratio: f64,
    pub iterations: usize,
    pub final_residual: f64,
}

/// Load step that stopped a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepFailure {
    pub q: f64,
    pub reason: String,
    /// Newton report of the failing step, when the iteration got that far.
    pub report: Option<NewtonReport>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
    pub failure: Option<SweepFailure>,
}

impl SweepTable {
    pub fn is_complete(&self) -> bool {
        self.failure.is_none()
    }
}

/// Solves a sequence of increasing loads, warm-starting each from the
/// previous converged state; the first load starts from the linear solution.
/// Stops at the first load that fails and records it in `failure`.
pub fn load_sweep(spec: &PlateSpec, q_values: &[f64], opts: &NewtonOptions) -> Result<SweepTable> {
    if q_values.is_empty() {
        return Err(invalid("load sweep needs at least one load"));
    }
    if q_values.iter().any(|q| !(q.is_finite() && *q > 0.0)) {
        return Err(invalid("sweep loads must be positive"));
    }
    if q_values.windows(2).any(|p| p[1] <= p[0]) {
        return Err(invalid("sweep loads must be strictly increasing"));
    }
    let mut sys = assemble_spec(&spec.clone().with_pressure(q_values[0]))?;
    let mut rows = Vec::with_capacity(q_values.len());
    let mut previous: Option<DVector<f64>> = None;
    for &q in q_values {
        sys.set_pressure(q)?;
        let outcome = solve_plate(&sys, previous.as_ref(), opts);
        match outcome {
            Ok((field, report)) if report.converged => {
                rows.push(SweepRow {
                    q,
                    center_deflection_ratio: field.center_deflection_ratio,
                    iterations: report.iterations,
                    final_residual: report.final_residual(),
                });
                previous = Some(field.w_bar);
            }
            Ok((_, report)) => {
                return Ok(SweepTable {
                    rows,
                    failure: Some(SweepFailure {
                        q,
                        reason: format!(
                            "no convergence after {} iterations (max|phi| = {:e})",
                            report.iterations,
                            report.final_residual()
                        ),
                        report: Some(report),
                    }),
                })
            }
            Err(e) => {
                let reason = e.to_string();
                let report = match e {
                    Error::Diverged { report, .. } => Some(*report),
                    _ => None,
                };
                return Ok(SweepTable {
                    rows,
                    failure: Some(SweepFailure { q, reason, report }),
                });
            }
        }
    }
    Ok(SweepTable { rows, failure: None })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar(f: impl Fn(f64) -> f64) -> impl FnMut(&DVector<f64>) -> Result<DVector<f64>> {
        move |x: &DVector<f64>| Ok(DVector::from_element(1, f(x[0])))
    }

    #[test]
    fn square_root_of_four() {
        let (x, rep) = newton(
            scalar(|x| x * x - 4.0),
            |x: &DVector<f64>| Ok(DMatrix::from_element(1, 1, 2.0 * x[0])),
            DVector::from_element(1, 3.0),
            &NewtonOptions::default(),
        )
        .unwrap();
        assert!(rep.converged);
        assert!(rep.iterations <= 6);
        assert!((x[0] - 2.0).abs() < 1e-6);
    }

    #[test]
    fn converged_start_takes_no_step() {
        let (x, rep) = newton(
            scalar(|x| x * x - 4.0),
            |x: &DVector<f64>| Ok(DMatrix::from_element(1, 1, 2.0 * x[0])),
            DVector::from_element(1, 2.0),
            &NewtonOptions::default(),
        )
        .unwrap();
        assert_eq!(rep.iterations, 0);
        assert_eq!(x[0], 2.0);
    }

    #[test]
    fn singular_jacobian_diverges() {
        let err = newton(
            scalar(|x| x * x + 1.0),
            |_: &DVector<f64>| Ok(DMatrix::zeros(1, 1)),
            DVector::from_element(1, 0.0),
            &NewtonOptions::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Diverged { .. }));
    }

    #[test]
    fn non_finite_iterate_diverges() {
        let err = newton(
            scalar(|x| if x.abs() > 10.0 { f64::NAN } else { x - 20.0 }),
            |_: &DVector<f64>| Ok(DMatrix::from_element(1, 1, 0.1)),
            DVector::from_element(1, 0.0),
            &NewtonOptions::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Diverged { .. }));
    }

    #[test]
    fn iteration_cap_reports_not_converged() {
        let opts = NewtonOptions {
            max_iter: 2,
            ..Default::default()
        };
        let (_, rep) = newton(
            scalar(|x| x.atan()),
            |x: &DVector<f64>| Ok(DMatrix::from_element(1, 1, 1.0 / (1.0 + x[0] * x[0]))),
            DVector::from_element(1, 1.0),
            &opts,
        )
        .unwrap();
        assert!(!rep.converged);
        assert_eq!(rep.iterations, 2);
    }

    #[test]
    fn damping_rescues_overshoot() {
        // Plain Newton on atan from x0 = 1.5 oscillates outward.
        let jac = |x: &DVector<f64>| Ok(DMatrix::from_element(1, 1, 1.0 / (1.0 + x[0] * x[0])));
        let plain = newton(scalar(f64::atan), jac, DVector::from_element(1, 1.5), &NewtonOptions::default());
        assert!(!matches!(plain, Ok((_, ref rep)) if rep.converged));
        let opts = NewtonOptions {
            damping: true,
            ..Default::default()
        };
        let (x, rep) = newton(scalar(f64::atan), jac, DVector::from_element(1, 1.5), &opts).unwrap();
        assert!(rep.converged);
        assert!(x[0].abs() < 1e-5);
    }

    #[test]
    fn fd_jacobian_of_linear_map() {
        let a = DMatrix::from_row_slice(3, 3, &[2.0, -1.0, 0.5, 0.0, 3.0, 1.0, -4.0, 0.25, 1.5]);
        let b = DVector::from_vec(vec![1.0, 2.0, 3.0]);
        let x = DVector::from_vec(vec![0.3, -7.0, 120.0]);
        let j = fd_jacobian(|x| Ok(&a * x - &b), &x, 1e-6).unwrap();
        let err = (j - &a).amax();
        assert!(err <= 1e-8 * a.amax(), "{err:e}");
        assert!(fd_jacobian(|x| Ok(&a * x - &b), &x, 0.0).is_err());
    }

    #[test]
    fn sweep_rejects_bad_loads() {
        let spec = PlateSpec::isotropic(100.0, 100.0, 1.0, 2.1e6, 0.25, 1.0, crate::BcKind::SimplySupported, 7);
        let opts = NewtonOptions::default();
        assert!(load_sweep(&spec, &[], &opts).is_err());
        assert!(load_sweep(&spec, &[1.0, 0.5], &opts).is_err());
        assert!(load_sweep(&spec, &[-1.0], &opts).is_err());
    }
}
