//! JSON case files.

use std::path::Path;

use dqplate::bc::uniform_edge_kind;
use dqplate::{BcKind, GridKind, JacobianStrategy, NewtonOptions, PlateSpec};
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaseFile {
    pub plate: PlateSection,
    pub bc: BcSection,
    pub grid: GridSection,
    #[serde(default)]
    pub solver: SolverSection,
    pub sweep: Option<SweepSection>,
    pub bench: Option<BenchSection>,
    pub convergence: Option<ConvergenceSection>,
}

/// Material and geometry. `e2` defaults to `e1` and `g12` to the isotropic
/// shear modulus `e1 / (2 (1 + nu12))`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlateSection {
    pub a: f64,
    pub b: f64,
    pub h: f64,
    pub e1: f64,
    pub e2: Option<f64>,
    pub nu12: f64,
    pub g12: Option<f64>,
    pub q: f64,
}

/// Either one kind for all four edges or one kind per edge.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum BcSection {
    Uniform(BcKind),
    PerEdge(EdgeKinds),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeKinds {
    pub x0: BcKind,
    pub x1: BcKind,
    pub y0: BcKind,
    pub y1: BcKind,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub kind: GridKind,
    pub nx: usize,
    pub ny: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    pub tol: f64,
    pub max_iter: usize,
    pub jacobian: JacobianStrategy,
    pub damping: bool,
}

impl Default for SolverSection {
    fn default() -> Self {
        let o = NewtonOptions::default();
        Self {
            tol: o.tol,
            max_iter: o.max_iter,
            jacobian: o.strategy,
            damping: o.damping,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub loads: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchSection {
    /// Square grid sizes to time.
    pub grids: Vec<usize>,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
}

fn default_repetitions() -> usize {
    3
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergenceSection {
    /// Square grid sizes to solve on.
    pub grids: Vec<usize>,
    #[serde(default = "default_kinds")]
    pub kinds: Vec<GridKind>,
    /// Chebyshev grid used as the reference solution; errors are reported
    /// against it when present.
    pub reference_grid: Option<usize>,
    /// Pressures to run; defaults to the plate pressure.
    pub loads: Option<Vec<f64>>,
    pub linear_comparison: Option<LinearComparison>,
}

fn default_kinds() -> Vec<GridKind> {
    vec![GridKind::ChebyshevMapped]
}

/// Small-deflection comparison of boundary treatments against the series
/// solution.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearComparison {
    pub n: usize,
    pub delta: f64,
}

impl CaseFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Input(msg) => CliError::Input(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let case: CaseFile = serde_json::from_str(text).map_err(|e| CliError::Input(e.to_string()))?;
        case.validate()?;
        Ok(case)
    }

    pub fn bc_kind(&self) -> Result<BcKind, CliError> {
        match &self.bc {
            BcSection::Uniform(kind) => Ok(*kind),
            BcSection::PerEdge(e) => {
                let x = uniform_edge_kind(e.x0, e.x1).map_err(input)?;
                let y = uniform_edge_kind(e.y0, e.y1).map_err(input)?;
                uniform_edge_kind(x, y).map_err(input)
            }
        }
    }

    pub fn plate_spec(&self) -> Result<PlateSpec, CliError> {
        let p = &self.plate;
        Ok(PlateSpec {
            a: p.a,
            b: p.b,
            h: p.h,
            e1: p.e1,
            e2: p.e2.unwrap_or(p.e1),
            nu12: p.nu12,
            g12: p.g12.unwrap_or(p.e1 / (2.0 * (1.0 + p.nu12))),
            q: p.q,
            bc: self.bc_kind()?,
            nx: self.grid.nx,
            ny: self.grid.ny,
            grid_kind: self.grid.kind,
        })
    }

    pub fn newton_options(&self) -> NewtonOptions {
        NewtonOptions {
            tol: self.solver.tol,
            max_iter: self.solver.max_iter,
            damping: self.solver.damping,
            strategy: self.solver.jacobian,
            ..NewtonOptions::default()
        }
    }

    pub fn is_isotropic(&self) -> bool {
        let p = &self.plate;
        p.e2.is_none_or(|e2| e2 == p.e1) && p.g12.is_none_or(|g| g == p.e1 / (2.0 * (1.0 + p.nu12)))
    }

    fn validate(&self) -> Result<(), CliError> {
        let spec = self.plate_spec()?;
        spec.validate().map_err(input)?;
        if self.grid.kind == GridKind::Custom {
            return Err(CliError::Input("grid.kind: custom grids cannot be given in a case file".into()));
        }
        for (name, n) in [("grid.nx", self.grid.nx), ("grid.ny", self.grid.ny)] {
            check_grid(name, n)?;
        }
        if !(self.solver.tol > 0.0) {
            return Err(CliError::Input(format!("solver.tol must be positive, got {}", self.solver.tol)));
        }
        if let Some(s) = &self.sweep {
            if s.loads.is_empty() {
                return Err(CliError::Input("sweep.loads must not be empty".into()));
            }
            if s.loads.iter().any(|q| !(*q > 0.0)) || s.loads.windows(2).any(|w| w[1] <= w[0]) {
                return Err(CliError::Input("sweep.loads must be positive and strictly increasing".into()));
            }
        }
        if let Some(b) = &self.bench {
            if b.grids.is_empty() || b.repetitions == 0 {
                return Err(CliError::Input("bench needs at least one grid and one repetition".into()));
            }
            for &n in &b.grids {
                check_grid("bench.grids", n)?;
            }
        }
        if let Some(c) = &self.convergence {
            if c.grids.is_empty() || c.kinds.is_empty() {
                return Err(CliError::Input("convergence needs at least one grid and one kind".into()));
            }
            if c.kinds.contains(&GridKind::Custom) {
                return Err(CliError::Input("convergence.kinds: custom grids are not supported".into()));
            }
            for &n in c.grids.iter().chain(&c.reference_grid) {
                check_grid("convergence.grids", n)?;
            }
            if let Some(loads) = &c.loads {
                if loads.is_empty() || loads.iter().any(|q| !(*q >= 0.0)) {
                    return Err(CliError::Input("convergence.loads must be non-negative".into()));
                }
            }
            if let Some(lc) = &c.linear_comparison {
                check_grid("convergence.linear_comparison.n", lc.n)?;
                if !(self.plate.q > 0.0) {
                    return Err(CliError::Input("linear comparison needs a positive plate.q".into()));
                }
                if spec.bc == BcKind::Clamped && !(self.is_isotropic() && self.plate.a == self.plate.b) {
                    return Err(CliError::Input(
                        "linear comparison for clamped edges needs a square isotropic plate".into(),
                    ));
                }
            }
        }
        Ok(())
    }
}

fn input(e: dqplate::Error) -> CliError {
    CliError::Input(e.to_string())
}

fn check_grid(name: &str, n: usize) -> Result<(), CliError> {
    if !(5..=dqplate::dq::MAX_NODES).contains(&n) {
        return Err(CliError::Input(format!(
            "{name}: grid size {n} outside 5..={}",
            dqplate::dq::MAX_NODES
        )));
    }
    Ok(())
}
