//! Von Kármán plate model: material constants, H-matrix assembly, the
//! decoupled residual with its analytic Jacobian, and field recovery.

mod delta;
mod field;
mod material;
mod system;

pub use delta::{linear_delta_center, linear_delta_field};
pub use field::{center_value, recover_fields, SolutionField};
pub use material::{derive_material, DerivedMaterial, PlateSpec};
pub use system::{assemble, assemble_spec, AssembledSystem, CoupledResiduals, HMatrices, Scaling};
