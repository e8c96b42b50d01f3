use serde::{Deserialize, Serialize};

use crate::bc::BcKind;
use crate::dq::GridKind;
use crate::error::{Error, Result};

/// Physical description of a thin rectangular plate under uniform pressure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlateSpec {
    /// Plate width along x.
    pub a: f64,
    /// Plate length along y.
    pub b: f64,
    /// Thickness.
    pub h: f64,
    pub e1: f64,
    pub e2: f64,
    pub nu12: f64,
    pub g12: f64,
    /// Uniform transverse pressure.
    pub q: f64,
    pub bc: BcKind,
    pub nx: usize,
    pub ny: usize,
    pub grid_kind: GridKind,
}

impl PlateSpec {
    /// An isotropic plate on an `n x n` grid; `G = E / (2 (1 + nu))`.
    #[allow(clippy::too_many_arguments)]
    pub fn isotropic(a: f64, b: f64, h: f64, e: f64, nu: f64, q: f64, bc: BcKind, n: usize) -> Self {
        Self {
            a,
            b,
            h,
            e1: e,
            e2: e,
            nu12: nu,
            g12: e / (2.0 * (1.0 + nu)),
            q,
            bc,
            nx: n,
            ny: n,
            grid_kind: GridKind::ChebyshevMapped,
        }
    }

    pub fn with_grid(mut self, nx: usize, ny: usize, kind: GridKind) -> Self {
        self.nx = nx;
        self.ny = ny;
        self.grid_kind = kind;
        self
    }

    pub fn with_pressure(mut self, q: f64) -> Self {
        self.q = q;
        self
    }

    pub fn nu21(&self) -> f64 {
        self.nu12 * self.e2 / self.e1
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("a", self.a),
            ("b", self.b),
            ("h", self.h),
            ("e1", self.e1),
            ("e2", self.e2),
            ("g12", self.g12),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidMaterial(format!("{name} must be positive, got {value}")));
            }
        }
        if !self.nu12.is_finite() {
            return Err(Error::InvalidMaterial("nu12 must be finite".into()));
        }
        if !(self.q.is_finite() && self.q >= 0.0) {
            return Err(Error::InvalidMaterial(format!(
                "pressure must be non-negative, got {}",
                self.q
            )));
        }
        if self.nu12 * self.nu21() >= 1.0 {
            return Err(Error::InvalidMaterial(format!(
                "nu12 * nu21 = {} must be below 1",
                self.nu12 * self.nu21()
            )));
        }
        Ok(())
    }
}

/// Rigidities and in-plane constants derived from a [`PlateSpec`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedMaterial {
    pub nu21: f64,
    /// `1 - nu12 nu21`
    pub mu: f64,
    pub d1: f64,
    pub d2: f64,
    /// Twisting rigidity `G12 h^3 / 12`.
    pub dk: f64,
    /// Effective rigidity on the mixed fourth derivative, `nu21 D1 + 2 Dk`.
    pub d3: f64,
    /// Coupling modulus on the mixed in-plane derivative, `nu12 E2 + mu G12`.
    pub c: f64,
}

pub fn derive_material(spec: &PlateSpec) -> Result<DerivedMaterial> {
    spec.validate()?;
    let nu21 = spec.nu21();
    let mu = 1.0 - spec.nu12 * nu21;
    if mu <= 0.0 {
        return Err(Error::InvalidMaterial(format!("1 - nu12 nu21 = {mu} must be positive")));
    }
    let h3 = spec.h.powi(3);
    let d1 = spec.e1 * h3 / (12.0 * mu);
    let d2 = spec.e2 * h3 / (12.0 * mu);
    let dk = spec.g12 * h3 / 12.0;
    Ok(DerivedMaterial {
        nu21,
        mu,
        d1,
        d2,
        dk,
        d3: nu21 * d1 + 2.0 * dk,
        c: spec.nu12 * spec.e2 + mu * spec.g12,
    })
}
