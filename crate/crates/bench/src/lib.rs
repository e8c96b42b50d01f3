//! Shared fixtures for the criterion benchmarks.

use dqplate::{BcKind, PlateSpec};

/// Clamped isotropic square plate used for the Jacobian timings.
pub fn clamped_plate(n: usize) -> PlateSpec {
    PlateSpec::isotropic(100.0, 100.0, 1.0, 2.1e6, 0.316, 3.0, BcKind::Clamped, n)
}

/// Simply supported isotropic square plate.
pub fn ss_plate(n: usize) -> PlateSpec {
    PlateSpec::isotropic(100.0, 100.0, 1.0, 2.1e6, 0.25, 1.0, BcKind::SimplySupported, n)
}
