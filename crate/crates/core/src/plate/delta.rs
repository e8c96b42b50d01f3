//! Linear plate bending with the shifted-point (delta) boundary scheme, used
//! only to compare boundary treatments in the small-deflection limit.

use nalgebra::{DMatrix, DVector, RowDVector};

use crate::bc::{build_delta_rows, DeltaPlan, RowCondition};
use crate::dq::make_grid;
use crate::error::{Error, Result};
use crate::plate::field::center_value;
use crate::plate::material::{derive_material, PlateSpec};
use crate::tensor::kron;

/// Dimensionless centre deflection `w / h` of the linear plate problem
/// solved on full grids with the delta scheme.
pub fn linear_delta_center(spec: &PlateSpec, delta: f64) -> Result<f64> {
    let (w, plan_x, plan_y) = solve(spec, delta)?;
    Ok(center_value(plan_x.grid.nodes(), plan_y.grid.nodes(), &w))
}

/// Full-grid `W = w / h` of the linear problem.
pub fn linear_delta_field(spec: &PlateSpec, delta: f64) -> Result<DMatrix<f64>> {
    Ok(solve(spec, delta)?.0)
}

fn solve(spec: &PlateSpec, delta: f64) -> Result<(DMatrix<f64>, DeltaPlan, DeltaPlan)> {
    let material = derive_material(spec)?;
    let plan_x = build_delta_rows(&make_grid(spec.nx, spec.grid_kind)?, delta, spec.bc)?;
    let plan_y = build_delta_rows(&make_grid(spec.ny, spec.grid_kind)?, delta, spec.bc)?;
    let dx = plan_x.diff_matrices()?;
    let dy = plan_y.diff_matrices()?;
    let (nx, ny) = (dx.len(), dy.len());
    let ix = DMatrix::<f64>::identity(nx, nx);
    let iy = DMatrix::<f64>::identity(ny, ny);
    let r = spec.a / spec.b;

    let mut op = kron(&dx.fourth, &iy)
        + (2.0 * material.d3 / material.d1 * r * r) * kron(&dx.second, &dy.second)
        + (material.d2 / material.d1 * r.powi(4)) * kron(&ix, &dy.fourth);
    let load = spec.q * spec.a.powi(4) / (material.d1 * spec.h);
    let mut rhs = DVector::from_element(nx * ny, load);

    let unit = |n: usize, k: usize| {
        let mut e = RowDVector::zeros(n);
        e[k] = 1.0;
        e
    };
    for i in 0..nx {
        for j in 0..ny {
            let (cx, cy) = (plan_x.condition_at(i), plan_y.condition_at(j));
            let row = if cx == Some(RowCondition::Deflection) || cy == Some(RowCondition::Deflection) {
                unit(nx * ny, i * ny + j)
            } else if let Some(c) = cx {
                kron_row(&DeltaPlan::condition_row(&dx, i, c), &unit(ny, j))
            } else if let Some(c) = cy {
                kron_row(&unit(nx, i), &DeltaPlan::condition_row(&dy, j, c))
            } else {
                continue;
            };
            op.set_row(i * ny + j, &row);
            rhs[i * ny + j] = 0.0;
        }
    }
    let w = op
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::SingularOperator("delta-scheme plate system is singular".into()))?;
    Ok((DMatrix::from_row_slice(nx, ny, w.as_slice()), plan_x, plan_y))
}

fn kron_row(a: &RowDVector<f64>, b: &RowDVector<f64>) -> RowDVector<f64> {
    RowDVector::from_iterator(a.len() * b.len(), a.iter().flat_map(|x| b.iter().map(move |y| x * y)))
}
