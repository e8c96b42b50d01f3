//! Differential quadrature solver for geometrically nonlinear (von Kármán)
//! bending of rectangular isotropic and orthotropic plates under uniform
//! pressure.
//!
//! The pipeline is: build 1-D weighting matrices ([`dq`]), fold the boundary
//! conditions into reduced interior operators ([`bc`]), assemble the
//! Kronecker-product plate system ([`plate`]) and iterate it with Newton's
//! method ([`newton`]).
//!
//! ```
//! use dqplate::{assemble_spec, solve_plate, BcKind, NewtonOptions, PlateSpec};
//!
//! let spec = PlateSpec::isotropic(100.0, 100.0, 1.0, 2.1e6, 0.25, 1.0, BcKind::SimplySupported, 7);
//! let sys = assemble_spec(&spec).unwrap();
//! let (field, report) = solve_plate(&sys, None, &NewtonOptions::default()).unwrap();
//! assert!(report.converged);
//! assert!((field.center_deflection_ratio - 0.94).abs() < 0.01);
//! ```

pub mod bc;
pub mod dq;
pub mod error;
pub mod newton;
pub mod plate;
pub mod reference;
pub mod tensor;

pub use bc::{BcKind, BoundaryOperatorSet};
pub use dq::{make_grid, DiffMatrices, Grid1D, GridKind};
pub use error::{Error, Result};
pub use nalgebra::{DMatrix, DVector};
pub use newton::{
    fd_jacobian, load_sweep, newton, plate_jacobian, solve_plate, JacobianStrategy, NewtonOptions, NewtonReport,
    SweepTable,
};
pub use plate::{assemble, assemble_spec, AssembledSystem, PlateSpec, SolutionField};
