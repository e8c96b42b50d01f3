//! Boundary-condition handling for fourth-order problems with two conditions
//! at each end of a coordinate line.
//!
//! Simply supported ends (`w = w'' = 0`) use the interior blocks of the DQ
//! matrices directly, with the fourth-derivative operator formed as the square
//! of the interior second-derivative block. Clamped ends (`w = w' = 0`)
//! eliminate the two unknowns next to the boundary using the slope rows, which
//! leaves `N - 4` unknowns and satisfies all four conditions exactly.
//!
//! [`build_delta_rows`] implements the older alternative that moves the
//! neighbours of the boundary nodes a distance `delta` inward and applies the
//! derivative condition there. It is only used for linear comparisons.

use std::ops::Range;

use nalgebra::{DMatrix, DVector, RowDVector};
use serde::{Deserialize, Serialize};

use crate::dq::{DiffMatrices, Grid1D};
use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BcKind {
    #[serde(alias = "ss")]
    SimplySupported,
    #[serde(alias = "cc")]
    Clamped,
}

impl BcKind {
    /// Number of grid nodes removed from each coordinate line.
    pub fn removed_nodes(self) -> usize {
        match self {
            BcKind::SimplySupported => 2,
            BcKind::Clamped => 4,
        }
    }
}

impl std::fmt::Display for BcKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            BcKind::SimplySupported => "simply_supported",
            BcKind::Clamped => "clamped",
        })
    }
}

/// Both ends of one coordinate line must share a boundary kind.
pub fn uniform_edge_kind(start: BcKind, end: BcKind) -> Result<BcKind> {
    if start != end {
        return Err(invalid(format!(
            "mixed edge conditions ({start} at one end, {end} at the other) are not supported"
        )));
    }
    Ok(start)
}

/// Interior-sized DQ operators with the boundary conditions built in.
#[derive(Debug, Clone)]
pub struct BoundaryOperatorSet {
    pub kind: BcKind,
    pub n_interior: usize,
    pub abar: DMatrix<f64>,
    pub bbar: DMatrix<f64>,
    pub cbar: DMatrix<f64>,
    pub dbar: DMatrix<f64>,
    /// `N x n_interior` map from interior unknowns to full-grid values.
    pub recovery: DMatrix<f64>,
    /// Grid indices (0-based) occupied by the interior unknowns.
    pub interior: Range<usize>,
    pub diff: DiffMatrices,
}

impl BoundaryOperatorSet {
    pub fn build(diff: &DiffMatrices, kind: BcKind) -> Result<Self> {
        match kind {
            BcKind::SimplySupported => build_ss(diff),
            BcKind::Clamped => build_clamped(diff),
        }
    }

    pub fn grid_len(&self) -> usize {
        self.recovery.nrows()
    }

    /// Full-grid values for a vector of interior unknowns.
    pub fn recover(&self, interior: &DVector<f64>) -> DVector<f64> {
        &self.recovery * interior
    }
}

pub fn build_ss(diff: &DiffMatrices) -> Result<BoundaryOperatorSet> {
    let n = diff.len();
    if n < 4 {
        return Err(invalid(format!(
            "simply supported operators need at least 4 nodes, got {n}"
        )));
    }
    let m = n - 2;
    let block = |x: &DMatrix<f64>| x.view((1, 1), (m, m)).into_owned();
    let abar = block(&diff.first);
    let bbar = block(&diff.second);
    let cbar = &abar * &bbar;
    let dbar = &bbar * &bbar;
    let mut recovery = DMatrix::zeros(n, m);
    recovery.view_mut((1, 0), (m, m)).fill_with_identity();
    Ok(BoundaryOperatorSet {
        kind: BcKind::SimplySupported,
        n_interior: m,
        abar,
        bbar,
        cbar,
        dbar,
        recovery,
        interior: 1..n - 1,
        diff: diff.clone(),
    })
}

pub fn build_clamped(diff: &DiffMatrices) -> Result<BoundaryOperatorSet> {
    let n = diff.len();
    if n < 5 {
        return Err(invalid(format!("clamped operators need at least 5 nodes, got {n}")));
    }
    let m = n - 4;
    let a = &diff.first;
    let last = n - 1;

    // Slope rows at both ends with w_1 = w_N = 0 give a 2x2 system for the
    // values next to the boundary in terms of the remaining interior values.
    let (a11, a12) = (a[(0, 1)], a[(0, last - 1)]);
    let (a21, a22) = (a[(last, 1)], a[(last, last - 1)]);
    let det = a11 * a22 - a12 * a21;
    let row_norm = |r: usize| a.row(r).norm();
    let threshold = 1e-12 * row_norm(0) * row_norm(last);
    if det.abs() < threshold {
        return Err(Error::SingularElimination { det, threshold });
    }

    let mut recovery = DMatrix::zeros(n, m);
    for k in 0..m {
        let col = k + 2;
        let (r1, r2) = (-a[(0, col)], -a[(last, col)]);
        recovery[(1, k)] = (r1 * a22 - a12 * r2) / det;
        recovery[(last - 1, k)] = (a11 * r2 - a21 * r1) / det;
        recovery[(col, k)] = 1.0;
    }

    let reduce = |x: &DMatrix<f64>| (x * &recovery).rows(2, m).into_owned();
    Ok(BoundaryOperatorSet {
        kind: BcKind::Clamped,
        n_interior: m,
        abar: reduce(&diff.first),
        bbar: reduce(&diff.second),
        cbar: reduce(&diff.third),
        dbar: reduce(&diff.fourth),
        recovery,
        interior: 2..n - 2,
        diff: diff.clone(),
    })
}

/// Condition imposed on one grid row by the shifted-point scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowCondition {
    Deflection,
    Slope,
    Curvature,
}

/// Row-replacement plan for the shifted-point (delta) scheme.
#[derive(Debug, Clone)]
pub struct DeltaPlan {
    pub grid: Grid1D,
    pub delta: f64,
    pub kind: BcKind,
    /// Grid row and the condition that replaces the governing equation there.
    pub rows: [(usize, RowCondition); 4],
}

/// Moves nodes 2 and N-1 to `delta` and `1 - delta` and plans which rows of a
/// full-grid system become boundary equations.
pub fn build_delta_rows(grid: &Grid1D, delta: f64, kind: BcKind) -> Result<DeltaPlan> {
    let n = grid.len();
    if n < 5 {
        return Err(invalid(format!("delta scheme needs at least 5 nodes, got {n}")));
    }
    let x = grid.nodes();
    if !(delta > 0.0) || delta >= x[1] || delta >= 1.0 - x[n - 2] {
        return Err(invalid(format!(
            "delta must lie in (0, {}), got {delta}",
            x[1].min(1.0 - x[n - 2])
        )));
    }
    let mut nodes = x.to_vec();
    nodes[1] = delta;
    nodes[n - 2] = 1.0 - delta;
    let derivative = match kind {
        BcKind::Clamped => RowCondition::Slope,
        BcKind::SimplySupported => RowCondition::Curvature,
    };
    Ok(DeltaPlan {
        grid: Grid1D::from_nodes(nodes)?,
        delta,
        kind,
        rows: [
            (0, RowCondition::Deflection),
            (1, derivative),
            (n - 2, derivative),
            (n - 1, RowCondition::Deflection),
        ],
    })
}

impl DeltaPlan {
    pub fn diff_matrices(&self) -> Result<DiffMatrices> {
        DiffMatrices::new(&self.grid)
    }

    pub fn condition_at(&self, row: usize) -> Option<RowCondition> {
        self.rows.iter().find(|(r, _)| *r == row).map(|(_, c)| *c)
    }

    /// Coefficients of the boundary equation for `row` on the 1-D grid.
    pub fn condition_row(diff: &DiffMatrices, row: usize, cond: RowCondition) -> RowDVector<f64> {
        match cond {
            RowCondition::Deflection => {
                let mut e = RowDVector::zeros(diff.len());
                e[row] = 1.0;
                e
            }
            RowCondition::Slope => diff.first.row(row).into_owned(),
            RowCondition::Curvature => diff.second.row(row).into_owned(),
        }
    }

    /// Solves `w'''' = load` on the shifted grid with the planned boundary rows.
    pub fn solve_beam(&self, load: f64) -> Result<DVector<f64>> {
        let diff = self.diff_matrices()?;
        let n = diff.len();
        let mut op = diff.fourth.clone();
        let mut rhs = DVector::from_element(n, load);
        for &(row, cond) in &self.rows {
            op.set_row(row, &Self::condition_row(&diff, row, cond));
            rhs[row] = 0.0;
        }
        op.lu()
            .solve(&rhs)
            .ok_or_else(|| Error::SingularOperator("delta-scheme beam system is singular".into()))
    }
}
