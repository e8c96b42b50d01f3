use std::path::Path;
use std::time::{Duration, Instant};

use dqplate::plate::{linear_delta_center, recover_fields};
use dqplate::reference::{clamped_square_center_coefficient, navier_center_deflection};
use dqplate::{
    assemble_spec, load_sweep, plate_jacobian, solve_plate, BcKind, DVector, GridKind, JacobianStrategy,
    NewtonOptions, PlateSpec, SweepTable,
};
use rayon::prelude::*;

use crate::case::{CaseFile, LinearComparison};
use crate::output::{write_table, Cell};
use crate::CliError;

/// Command-line overrides of the solver section.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub jacobian: Option<JacobianStrategy>,
}

impl Overrides {
    fn apply(&self, mut opts: NewtonOptions) -> Result<NewtonOptions, CliError> {
        if let Some(tol) = self.tol {
            if !(tol > 0.0) {
                return Err(CliError::Input(format!("--tol must be positive, got {tol}")));
            }
            opts.tol = tol;
        }
        if let Some(m) = self.max_iter {
            opts.max_iter = m;
        }
        if let Some(j) = self.jacobian {
            opts.strategy = j;
        }
        Ok(opts)
    }
}

fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

#[derive(Debug, Clone)]
pub struct CaseSummary {
    pub center_w_over_h: f64,
    pub iterations: usize,
    pub final_residual: f64,
    pub wall_time_ms: f64,
}

/// Solves one case and writes `solution.csv` and `summary.csv` to `out`.
pub fn run_case(case: &CaseFile, overrides: &Overrides, out: &Path) -> Result<CaseSummary, CliError> {
    let spec = case.plate_spec()?;
    let opts = overrides.apply(case.newton_options())?;
    let start = Instant::now();
    let sys = assemble_spec(&spec)?;
    let (field, report) = solve_plate(&sys, None, &opts)?;
    let wall = start.elapsed();
    if !report.converged {
        return Err(CliError::NotConverged {
            context: format!("q = {}", spec.q),
            report: Box::new(report),
        });
    }
    let summary = CaseSummary {
        center_w_over_h: field.center_deflection_ratio,
        iterations: report.iterations,
        final_residual: report.final_residual(),
        wall_time_ms: ms(wall),
    };

    let mut rows = Vec::with_capacity(field.x.len() * field.y.len());
    for (i, &x) in field.x.iter().enumerate() {
        for (j, &y) in field.y.iter().enumerate() {
            rows.push(vec![
                x.into(),
                y.into(),
                field.w[(i, j)].into(),
                field.u[(i, j)].into(),
                field.v[(i, j)].into(),
            ]);
        }
    }
    write_table(&out.join("solution.csv"), &["x", "y", "w", "u", "v"], &rows)?;
    write_table(
        &out.join("summary.csv"),
        &["center_w_over_h", "iterations", "final_residual", "wall_time_ms"],
        &[vec![
            summary.center_w_over_h.into(),
            summary.iterations.into(),
            summary.final_residual.into(),
            summary.wall_time_ms.into(),
        ]],
    )?;
    Ok(summary)
}

/// Runs the sweep block and writes `sweep.csv`. Rows solved before a
/// failing load are still written; the failure is then returned.
pub fn run_sweep(case: &CaseFile, overrides: &Overrides, out: &Path) -> Result<SweepTable, CliError> {
    let loads = &case
        .sweep
        .as_ref()
        .ok_or_else(|| CliError::Input("sweep: case file has no sweep block".into()))?
        .loads;
    let spec = case.plate_spec()?;
    let opts = overrides.apply(case.newton_options())?;
    let table = load_sweep(&spec, loads, &opts)?;
    let rows: Vec<Vec<Cell>> = table
        .rows
        .iter()
        .map(|r| {
            vec![
                r.q.into(),
                r.center_deflection_ratio.into(),
                r.iterations.into(),
                r.final_residual.into(),
            ]
        })
        .collect();
    write_table(
        &out.join("sweep.csv"),
        &["q", "center_w_over_h", "iterations", "final_residual"],
        &rows,
    )?;
    if let Some(f) = &table.failure {
        return match &f.report {
            Some(report) => Err(CliError::NotConverged {
                context: format!("sweep stopped at q = {}", f.q),
                report: Box::new(report.clone()),
            }),
            None => Err(CliError::Failed(format!("sweep stopped at q = {}: {}", f.q, f.reason))),
        };
    }
    Ok(table)
}

#[derive(Debug, Clone)]
pub struct BenchRow {
    pub n: usize,
    pub strategy: JacobianStrategy,
    pub jac_ms: f64,
    pub solve_ms: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    /// Largest relative difference between the converged `W` of the two
    /// strategies over all grids.
    pub max_strategy_gap: f64,
}

fn median(mut v: Vec<Duration>) -> Duration {
    v.sort();
    v[v.len() / 2]
}

/// Times Jacobian assembly and full solves for both strategies on every
/// grid of the bench block; writes `bench.csv`. Runs sequentially.
pub fn run_bench(case: &CaseFile, overrides: &Overrides, out: &Path) -> Result<BenchReport, CliError> {
    let bench = case
        .bench
        .as_ref()
        .ok_or_else(|| CliError::Input("bench: case file has no bench block".into()))?;
    let base = case.plate_spec()?;
    let opts = overrides.apply(case.newton_options())?;
    let mut rows = Vec::new();
    let mut max_gap: f64 = 0.0;
    for &n in &bench.grids {
        let spec = base.clone().with_grid(n, n, base.grid_kind);
        let sys = assemble_spec(&spec)?;
        let w0 = sys.linear_solve()?;
        let mut solutions: Vec<DVector<f64>> = Vec::new();
        for strategy in [JacobianStrategy::SjtAnalytic, JacobianStrategy::FiniteDifference] {
            let opts = NewtonOptions { strategy, ..opts };
            let mut jac_times = Vec::with_capacity(bench.repetitions);
            let mut solve_times = Vec::with_capacity(bench.repetitions);
            let mut last = None;
            for _ in 0..bench.repetitions {
                let t = Instant::now();
                std::hint::black_box(plate_jacobian(&sys, &w0, strategy, opts.fd_step)?);
                jac_times.push(t.elapsed());
                let t = Instant::now();
                let result = solve_plate(&sys, None, &opts)?;
                solve_times.push(t.elapsed());
                last = Some(result);
            }
            let (field, report) = last.expect("at least one repetition");
            if !report.converged {
                return Err(CliError::NotConverged {
                    context: format!("bench n = {n}, {strategy}"),
                    report: Box::new(report),
                });
            }
            rows.push(BenchRow {
                n,
                strategy,
                jac_ms: ms(median(jac_times)),
                solve_ms: ms(median(solve_times)),
                iterations: report.iterations,
            });
            solutions.push(field.w_bar);
        }
        let gap = (&solutions[0] - &solutions[1]).amax() / solutions[0].amax().max(f64::MIN_POSITIVE);
        max_gap = max_gap.max(gap);
        if gap > 1e-7 {
            log::warn!("n = {n}: strategies differ by {gap:e} (relative)");
        }
    }
    let table: Vec<Vec<Cell>> = rows
        .iter()
        .map(|r| {
            vec![
                r.n.into(),
                r.strategy.to_string().as_str().into(),
                r.jac_ms.into(),
                r.solve_ms.into(),
                r.iterations.into(),
            ]
        })
        .collect();
    write_table(
        &out.join("bench.csv"),
        &["n", "strategy", "jac_ms", "solve_ms", "iterations"],
        &table,
    )?;
    Ok(BenchReport {
        rows,
        max_strategy_gap: max_gap,
    })
}

#[derive(Debug, Clone)]
pub struct ConvergenceRow {
    pub q: f64,
    pub kind: GridKind,
    pub n: usize,
    pub center_w_over_h: f64,
    pub iterations: usize,
    /// Absolute difference from the reference grid, when one is configured.
    pub abs_error: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct LinearRow {
    pub scheme: &'static str,
    pub n: usize,
    pub center_coefficient: f64,
    pub series_coefficient: f64,
    pub abs_error: f64,
}

#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    pub rows: Vec<ConvergenceRow>,
    pub linear: Vec<LinearRow>,
}

fn solve_center(spec: &PlateSpec, opts: &NewtonOptions) -> Result<(f64, usize), CliError> {
    let sys = assemble_spec(spec)?;
    let (field, report) = solve_plate(&sys, None, opts)?;
    if !report.converged {
        return Err(CliError::NotConverged {
            context: format!("{} {}x{} at q = {}", spec.grid_kind, spec.nx, spec.ny, spec.q),
            report: Box::new(report),
        });
    }
    Ok((field.center_deflection_ratio, report.iterations))
}

/// Centre deflection per grid size and kind, optionally against a reference
/// grid, plus the optional linear boundary-treatment comparison. Points are
/// solved in parallel; `convergence.csv` (and `linear_comparison.csv`) are
/// written once everything has finished.
pub fn run_convergence(case: &CaseFile, overrides: &Overrides, out: &Path) -> Result<ConvergenceReport, CliError> {
    let conv = case
        .convergence
        .as_ref()
        .ok_or_else(|| CliError::Input("converge: case file has no convergence block".into()))?;
    let base = case.plate_spec()?;
    let opts = overrides.apply(case.newton_options())?;
    let loads = conv.loads.clone().unwrap_or_else(|| vec![base.q]);

    let mut points = Vec::new();
    for &q in &loads {
        for &kind in &conv.kinds {
            for &n in &conv.grids {
                points.push((q, kind, n));
            }
        }
    }
    let solved: Vec<(f64, usize)> = points
        .par_iter()
        .map(|&(q, kind, n)| solve_center(&base.clone().with_pressure(q).with_grid(n, n, kind), &opts))
        .collect::<Result<_, _>>()?;
    let references: Vec<Option<f64>> = loads
        .par_iter()
        .map(|&q| {
            conv.reference_grid
                .map(|n| {
                    let spec = base.clone().with_pressure(q).with_grid(n, n, GridKind::ChebyshevMapped);
                    solve_center(&spec, &opts).map(|r| r.0)
                })
                .transpose()
        })
        .collect::<Result<_, _>>()?;

    let rows: Vec<ConvergenceRow> = points
        .iter()
        .zip(&solved)
        .map(|(&(q, kind, n), &(w, iterations))| {
            let li = loads.iter().position(|&l| l == q).expect("load from the list");
            ConvergenceRow {
                q,
                kind,
                n,
                center_w_over_h: w,
                iterations,
                abs_error: references[li].map(|r| (w - r).abs()),
            }
        })
        .collect();
    let table: Vec<Vec<Cell>> = rows
        .iter()
        .map(|r| {
            vec![
                r.q.into(),
                r.kind.to_string().as_str().into(),
                r.n.into(),
                r.center_w_over_h.into(),
                r.iterations.into(),
                r.abs_error.into(),
            ]
        })
        .collect();

    let linear = match &conv.linear_comparison {
        Some(lc) => linear_comparison(&base, lc)?,
        None => Vec::new(),
    };

    write_table(
        &out.join("convergence.csv"),
        &["q", "kind", "n", "center_w_over_h", "iterations", "abs_error"],
        &table,
    )?;
    if !linear.is_empty() {
        let lt: Vec<Vec<Cell>> = linear
            .iter()
            .map(|r| {
                vec![
                    r.scheme.into(),
                    r.n.into(),
                    r.center_coefficient.into(),
                    r.series_coefficient.into(),
                    r.abs_error.into(),
                ]
            })
            .collect();
        write_table(
            &out.join("linear_comparison.csv"),
            &["scheme", "n", "center_coefficient", "series_coefficient", "abs_error"],
            &lt,
        )?;
    }
    Ok(ConvergenceReport { rows, linear })
}

/// Small-deflection centre coefficient `w D1 / (q a^4)` from the reduced
/// operators and from the shifted-point scheme, against the series solution.
fn linear_comparison(base: &PlateSpec, lc: &LinearComparison) -> Result<Vec<LinearRow>, CliError> {
    let spec = base.clone().with_grid(lc.n, lc.n, base.grid_kind);
    let sys = assemble_spec(&spec)?;
    let d1 = sys.material.d1;
    let to_coefficient = |w_over_h: f64| w_over_h * spec.h * d1 / (spec.q * spec.a.powi(4));

    let series = match spec.bc {
        BcKind::SimplySupported => {
            let m = &sys.material;
            navier_center_deflection(spec.a, spec.b, m.d1, m.d2, m.d3, 1.0, 200) * d1 / spec.a.powi(4)
        }
        BcKind::Clamped => clamped_square_center_coefficient(30)?,
    };

    let w = sys.linear_solve()?;
    let zero = DVector::zeros(sys.n());
    let reduced = to_coefficient(recover_fields(&sys, &w, &zero, &zero)?.center_deflection_ratio);
    let delta = to_coefficient(linear_delta_center(&spec, lc.delta)?);
    let name = match spec.bc {
        BcKind::SimplySupported => "dqwb",
        BcKind::Clamped => "dqcy",
    };
    Ok([(name, reduced), ("delta", delta)]
        .into_iter()
        .map(|(scheme, c)| LinearRow {
            scheme,
            n: lc.n,
            center_coefficient: c,
            series_coefficient: series,
            abs_error: (c - series).abs(),
        })
        .collect())
}
