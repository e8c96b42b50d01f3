use nalgebra::{DMatrix, DVector};

use crate::error::Result;
use crate::plate::system::AssembledSystem;
use crate::tensor::unvec_rows;

/// Converged displacement fields on the full grid, in physical units.
#[derive(Debug, Clone)]
pub struct SolutionField {
    pub w_bar: DVector<f64>,
    pub u_bar: DVector<f64>,
    pub v_bar: DVector<f64>,
    /// Physical node coordinates along x and y.
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// `w[(i, j)]` is the deflection at `(x[i], y[j])`.
    pub w: DMatrix<f64>,
    pub u: DMatrix<f64>,
    pub v: DMatrix<f64>,
    pub center_deflection_ratio: f64,
    pub newton_iterations: usize,
    pub final_residual_norm: f64,
}

/// Value of a full-grid field at the plate centre: the middle node when both
/// counts are odd, bilinear interpolation at `(0.5, 0.5)` otherwise.
pub fn center_value(xn: &[f64], yn: &[f64], field: &DMatrix<f64>) -> f64 {
    let bracket = |nodes: &[f64]| -> (usize, usize, f64) {
        let n = nodes.len();
        if n % 2 == 1 {
            return (n / 2, n / 2, 0.0);
        }
        let (lo, hi) = (n / 2 - 1, n / 2);
        (lo, hi, (0.5 - nodes[lo]) / (nodes[hi] - nodes[lo]))
    };
    let (i0, i1, tx) = bracket(xn);
    let (j0, j1, ty) = bracket(yn);
    (1.0 - tx) * (1.0 - ty) * field[(i0, j0)]
        + tx * (1.0 - ty) * field[(i1, j0)]
        + (1.0 - tx) * ty * field[(i0, j1)]
        + tx * ty * field[(i1, j1)]
}

/// Maps stacked interior vectors back to full-grid physical fields.
pub fn recover_fields(
    sys: &AssembledSystem,
    w_bar: &DVector<f64>,
    u_bar: &DVector<f64>,
    v_bar: &DVector<f64>,
) -> Result<SolutionField> {
    let expand = |bar: &DVector<f64>, unit: f64| -> Result<DMatrix<f64>> {
        let interior = unvec_rows(bar, sys.nx, sys.ny)?;
        Ok(unit * (&sys.bcx.recovery * interior * sys.bcy.recovery.transpose()))
    };
    let s = &sys.scaling;
    let w = expand(w_bar, s.h)?;
    let u = expand(u_bar, s.u_unit())?;
    let v = expand(v_bar, s.v_unit())?;
    let xn = sys.bcx.diff.grid.nodes();
    let yn = sys.bcy.diff.grid.nodes();
    let center_deflection_ratio = center_value(xn, yn, &w) / s.h;
    let final_residual_norm = sys.residual(w_bar)?.amax();
    Ok(SolutionField {
        w_bar: w_bar.clone(),
        u_bar: u_bar.clone(),
        v_bar: v_bar.clone(),
        x: xn.iter().map(|x| x * s.a).collect(),
        y: yn.iter().map(|y| y * s.b).collect(),
        w,
        u,
        v,
        center_deflection_ratio,
        newton_iterations: 0,
        final_residual_norm,
    })
}
