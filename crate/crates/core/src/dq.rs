//! One-dimensional collocation grids and differential quadrature (DQ) weights.
//!
//! A DQ weight matrix of order `m` maps samples of a function at the grid
//! nodes to samples of its `m`-th derivative, exactly for every polynomial of
//! degree below the node count. Nodes always live on `[0, 1]`; scaling to a
//! physical length is left to the caller.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Largest node count accepted by [`make_grid`]. High-order DQ matrices lose
/// accuracy quickly beyond this.
pub const MAX_NODES: usize = 31;

/// Smallest allowed gap between neighbouring nodes.
pub const MIN_NODE_GAP: f64 = 1e-12;

/// Relative tolerance for the closed-form Chebyshev weights against the
/// generic Lagrange weights.
const FAST_PATH_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridKind {
    Uniform,
    #[serde(alias = "chebyshev")]
    ChebyshevMapped,
    /// Arbitrary nodes, e.g. a grid with points shifted next to the boundary.
    Custom,
}

impl std::fmt::Display for GridKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            GridKind::Uniform => "uniform",
            GridKind::ChebyshevMapped => "chebyshev",
            GridKind::Custom => "custom",
        })
    }
}

/// Ordered collocation nodes on `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid1D {
    nodes: Vec<f64>,
    kind: GridKind,
    /// Chebyshev roots the nodes were mapped from, in the same order.
    roots: Option<Vec<f64>>,
}

impl Grid1D {
    /// Builds a custom grid. Nodes must increase strictly from exactly 0 to
    /// exactly 1.
    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self> {
        validate_nodes(&nodes)?;
        Ok(Self {
            nodes,
            kind: GridKind::Custom,
            roots: None,
        })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn kind(&self) -> GridKind {
        self.kind
    }

    pub fn roots(&self) -> Option<&[f64]> {
        self.roots.as_deref()
    }
}

fn validate_nodes(nodes: &[f64]) -> Result<()> {
    if nodes.len() < 2 {
        return Err(invalid(format!("grid needs at least 2 nodes, got {}", nodes.len())));
    }
    if nodes[0] != 0.0 || nodes[nodes.len() - 1] != 1.0 {
        return Err(invalid("grid must start at exactly 0 and end at exactly 1"));
    }
    for (i, pair) in nodes.windows(2).enumerate() {
        let gap = pair[1] - pair[0];
        if !(gap > MIN_NODE_GAP) {
            return Err(Error::DegenerateGrid(format!(
                "nodes {} and {} are not strictly increasing (gap {gap:e})",
                i,
                i + 1
            )));
        }
    }
    Ok(())
}

/// Zeros of the Chebyshev polynomial of the first kind of degree `n`,
/// `r_i = cos((2i - 1) pi / 2n)`, in decreasing order.
pub fn chebyshev_roots(n: usize) -> Vec<f64> {
    (1..=n)
        .map(|i| ((2 * i - 1) as f64 * std::f64::consts::PI / (2 * n) as f64).cos())
        .collect()
}

/// Generates an `n`-node grid on `[0, 1]`.
///
/// Chebyshev grids map the roots affinely so that the first and last root land
/// on 0 and 1.
pub fn make_grid(n: usize, kind: GridKind) -> Result<Grid1D> {
    if n < 2 {
        return Err(invalid(format!("grid needs at least 2 nodes, got {n}")));
    }
    if n > MAX_NODES {
        return Err(invalid(format!("grid size {n} exceeds the maximum of {MAX_NODES}")));
    }
    match kind {
        GridKind::Uniform => {
            let last = (n - 1) as f64;
            let nodes = (0..n).map(|i| i as f64 / last).collect();
            Ok(Grid1D {
                nodes,
                kind,
                roots: None,
            })
        }
        GridKind::ChebyshevMapped => {
            let roots = chebyshev_roots(n);
            let (first, last) = (roots[0], roots[n - 1]);
            // (first - r) / (first - last) keeps x_1 = +0.0
            let nodes = roots.iter().map(|r| (first - r) / (first - last)).collect();
            Ok(Grid1D {
                nodes,
                kind,
                roots: Some(roots),
            })
        }
        GridKind::Custom => Err(invalid("custom grids are built with Grid1D::from_nodes")),
    }
}

/// First-derivative weights of the Lagrange interpolant through `nodes`.
///
/// Off-diagonal entries use the product form; the diagonal is the negative
/// off-diagonal row sum so that constants differentiate to zero.
pub fn lagrange_first_derivative(nodes: &[f64]) -> Result<DMatrix<f64>> {
    let n = nodes.len();
    for i in 0..n {
        for j in (i + 1)..n {
            if (nodes[i] - nodes[j]).abs() <= MIN_NODE_GAP {
                return Err(Error::DegenerateGrid(format!(
                    "nodes {i} and {j} coincide at {}",
                    nodes[i]
                )));
            }
        }
    }
    // M_i = prod_{k != i} (x_i - x_k); a_ij = M_i / ((x_i - x_j) M_j)
    let m: Vec<f64> = (0..n)
        .map(|i| {
            (0..n)
                .filter(|&k| k != i)
                .map(|k| nodes[i] - nodes[k])
                .product()
        })
        .collect();
    let mut a = DMatrix::zeros(n, n);
    for i in 0..n {
        let mut row_sum = 0.0;
        for j in 0..n {
            if i != j {
                let w = m[i] / ((nodes[i] - nodes[j]) * m[j]);
                a[(i, j)] = w;
                row_sum += w;
            }
        }
        a[(i, i)] = -row_sum;
    }
    Ok(a)
}

pub fn diff_matrix_first(grid: &Grid1D) -> Result<DMatrix<f64>> {
    lagrange_first_derivative(grid.nodes())
}

/// DQ weight matrices for derivative orders 1 through 4 on one grid.
#[derive(Debug, Clone)]
pub struct DiffMatrices {
    pub first: DMatrix<f64>,
    pub second: DMatrix<f64>,
    pub third: DMatrix<f64>,
    pub fourth: DMatrix<f64>,
    pub grid: Grid1D,
}

impl DiffMatrices {
    pub fn new(grid: &Grid1D) -> Result<Self> {
        let first = diff_matrix_first(grid)?;
        diff_matrices_higher(first, grid)
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// Weight matrix for derivative order `m` in `1..=4`.
    pub fn order(&self, m: usize) -> Option<&DMatrix<f64>> {
        match m {
            1 => Some(&self.first),
            2 => Some(&self.second),
            3 => Some(&self.third),
            4 => Some(&self.fourth),
            _ => None,
        }
    }
}

/// Builds orders 2 to 4 from the first-order weights by the standard
/// recursion `w^(m)_ij = m (w^(1)_ij w^(m-1)_ii - w^(m-1)_ij / (x_i - x_j))`
/// with the diagonal taken as the negative off-diagonal row sum.
pub fn diff_matrices_higher(first: DMatrix<f64>, grid: &Grid1D) -> Result<DiffMatrices> {
    let n = grid.len();
    if first.shape() != (n, n) {
        return Err(invalid(format!(
            "first-order matrix is {:?}, grid has {n} nodes",
            first.shape()
        )));
    }
    let x = grid.nodes();
    let next = |prev: &DMatrix<f64>, order: f64| {
        let mut out = DMatrix::zeros(n, n);
        for i in 0..n {
            let mut row_sum = 0.0;
            for j in 0..n {
                if i != j {
                    let w = order * (first[(i, j)] * prev[(i, i)] - prev[(i, j)] / (x[i] - x[j]));
                    out[(i, j)] = w;
                    row_sum += w;
                }
            }
            out[(i, i)] = -row_sum;
        }
        out
    };
    let second = next(&first, 2.0);
    let third = next(&second, 3.0);
    let fourth = next(&third, 4.0);
    Ok(DiffMatrices {
        first,
        second,
        third,
        fourth,
        grid: grid.clone(),
    })
}

/// Closed-form first-derivative weights for a mapped Chebyshev grid.
///
/// The result is cross-checked against [`diff_matrix_first`]; if the two
/// disagree beyond `1e-10` relative, a warning is logged and the generic
/// weights are returned instead.
pub fn chebyshev_fast_weights(grid: &Grid1D) -> Result<DMatrix<f64>> {
    if grid.kind() != GridKind::ChebyshevMapped {
        return Err(invalid("closed-form weights need a mapped Chebyshev grid"));
    }
    let r = grid
        .roots()
        .ok_or_else(|| invalid("Chebyshev grid is missing its roots"))?;
    let n = r.len();
    let span = r[n - 1] - r[0];
    let mut a = DMatrix::zeros(n, n);
    for i in 0..n {
        let mut row_sum = 0.0;
        for j in 0..n {
            if i != j {
                let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
                let w = sign * span / (r[i] - r[j]) * ((1.0 - r[j] * r[j]) / (1.0 - r[i] * r[i])).sqrt();
                a[(i, j)] = w;
                row_sum += w;
            }
        }
        a[(i, i)] = -row_sum;
    }

    let generic = diff_matrix_first(grid)?;
    let scale = generic.amax().max(1.0);
    let worst = (&a - &generic).amax() / scale;
    if worst > FAST_PATH_TOL {
        log::warn!(
            "closed-form Chebyshev weights differ from Lagrange weights by {worst:e} (N = {n}); using Lagrange weights"
        );
        return Ok(generic);
    }
    Ok(a)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_mat_close(a: &DMatrix<f64>, b: &[f64], tol: f64) {
        let n = a.nrows();
        for i in 0..n {
            for j in 0..a.ncols() {
                let e = b[i * a.ncols() + j];
                assert!(
                    (a[(i, j)] - e).abs() <= tol * e.abs().max(1.0),
                    "entry ({i},{j}) = {} expected {e}",
                    a[(i, j)]
                );
            }
        }
    }

    #[test]
    fn single_root_is_zero() {
        let r = chebyshev_roots(1);
        assert_eq!(r.len(), 1);
        assert!(r[0].abs() < 1e-16);
    }

    #[test]
    fn three_node_chebyshev_grid_is_symmetric() {
        let g = make_grid(3, GridKind::ChebyshevMapped).unwrap();
        assert_eq!(g.nodes()[0], 0.0);
        assert!((g.nodes()[1] - 0.5).abs() < 1e-15);
        assert_eq!(g.nodes()[2], 1.0);
    }

    #[test]
    fn five_node_uniform_grid() {
        let g = make_grid(5, GridKind::Uniform).unwrap();
        assert_eq!(g.nodes(), &[0.0, 0.25, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn grid_size_limits() {
        assert!(matches!(make_grid(1, GridKind::Uniform), Err(Error::InvalidArgument(_))));
        assert!(matches!(
            make_grid(MAX_NODES + 1, GridKind::ChebyshevMapped),
            Err(Error::InvalidArgument(_))
        ));
        assert!(make_grid(MAX_NODES, GridKind::ChebyshevMapped).is_ok());
    }

    #[test]
    fn coincident_nodes_are_degenerate() {
        assert!(matches!(
            lagrange_first_derivative(&[0.0, 0.5, 0.5, 1.0]),
            Err(Error::DegenerateGrid(_))
        ));
        assert!(matches!(
            Grid1D::from_nodes(vec![0.0, 0.3, 0.3, 1.0]),
            Err(Error::DegenerateGrid(_))
        ));
    }

    #[test]
    fn two_node_first_derivative() {
        let g = make_grid(2, GridKind::Uniform).unwrap();
        let a = diff_matrix_first(&g).unwrap();
        assert_mat_close(&a, &[-1.0, 1.0, -1.0, 1.0], 1e-15);
    }

    #[test]
    fn three_node_uniform_stencils() {
        let g = make_grid(3, GridKind::Uniform).unwrap();
        let dm = DiffMatrices::new(&g).unwrap();
        assert_mat_close(&dm.first, &[-3.0, 4.0, -1.0, -1.0, 0.0, 1.0, 1.0, -4.0, 3.0], 1e-13);
        assert_mat_close(&dm.second, &[4.0, -8.0, 4.0, 4.0, -8.0, 4.0, 4.0, -8.0, 4.0], 1e-12);
    }

    #[test]
    fn five_node_uniform_fourth_derivative() {
        let g = make_grid(5, GridKind::Uniform).unwrap();
        let dm = DiffMatrices::new(&g).unwrap();
        let row = [256.0, -1024.0, 1536.0, -1024.0, 256.0];
        let expected: Vec<f64> = (0..5).flat_map(|_| row).collect();
        assert_mat_close(&dm.fourth, &expected, 1e-9);
    }

    #[test]
    fn fast_weights_reject_uniform_grids() {
        let g = make_grid(5, GridKind::Uniform).unwrap();
        assert!(matches!(chebyshev_fast_weights(&g), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn fast_weights_match_lagrange() {
        for n in [3, 5, 9, 15, 21] {
            let g = make_grid(n, GridKind::ChebyshevMapped).unwrap();
            let fast = chebyshev_fast_weights(&g).unwrap();
            let generic = diff_matrix_first(&g).unwrap();
            let rel = (&fast - &generic).amax() / generic.amax();
            assert!(rel < 1e-10, "n = {n}: {rel:e}");
        }
    }

    #[test]
    fn closed_form_diagonal_agrees_with_row_sums() {
        // w_ii = r_i (r_N - r_1) / (2 (1 - r_i^2))
        let g = make_grid(11, GridKind::ChebyshevMapped).unwrap();
        let r = g.roots().unwrap();
        let a = diff_matrix_first(&g).unwrap();
        let span = r[10] - r[0];
        for i in 0..11 {
            let closed = 0.5 * r[i] * span / (1.0 - r[i] * r[i]);
            assert!((a[(i, i)] - closed).abs() < 1e-9 * a.amax(), "row {i}");
        }
    }

    #[test]
    fn fast_weights_differentiate_squares() {
        let g = make_grid(7, GridKind::ChebyshevMapped).unwrap();
        let a = chebyshev_fast_weights(&g).unwrap();
        for i in 0..7 {
            let d: f64 = (0..7).map(|j| a[(i, j)] * g.nodes()[j].powi(2)).sum();
            assert!((d - 2.0 * g.nodes()[i]).abs() < 1e-10);
        }
    }
}
