#![allow(dead_code)]

use dqplate::{BcKind, GridKind, PlateSpec};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

/// Simply supported square plate, Chebyshev 7 x 7.
pub fn square_ss() -> PlateSpec {
    PlateSpec::isotropic(100.0, 100.0, 1.0, 2.1e6, 0.25, 1.0, BcKind::SimplySupported, 7)
}

/// Clamped square plate, Chebyshev 9 x 9.
pub fn square_clamped() -> PlateSpec {
    PlateSpec::isotropic(100.0, 100.0, 1.0, 2.1e6, 0.316, 3.0, BcKind::Clamped, 9)
}

/// Thin square plate used for the grid-quality comparison.
pub fn thin_square(q: f64, n: usize, kind: GridKind) -> PlateSpec {
    PlateSpec::isotropic(16.0, 16.0, 0.1, 30e6, 0.316, q, BcKind::SimplySupported, n).with_grid(n, n, kind)
}

/// Rectangular orthotropic plate.
pub fn orthotropic(bc: BcKind, q: f64, n: usize) -> PlateSpec {
    PlateSpec {
        a: 9.4,
        b: 7.75,
        h: 0.0624,
        e1: 18.7e6,
        e2: 1.3e6,
        nu12: 0.3,
        g12: 0.6e6,
        q,
        bc,
        nx: n,
        ny: n,
        grid_kind: GridKind::ChebyshevMapped,
    }
}

/// Deterministic pseudo-random vector in `[-1, 1)`.
pub fn noise(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = StdRng::seed_from_u64(seed);
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}
