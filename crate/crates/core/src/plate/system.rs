//! Discretised von Kármán system on stacked interior unknowns.
//!
//! Coordinates are scaled to the unit square (`X = x/a`, `Y = y/b`) and the
//! displacements to `W = w/h`, `U = u a/h^2`, `V = v b/h^2`. With `r = a/b`
//! the discrete equations read
//!
//! ```text
//! H1 U + H2 V = -L1(W)
//! H2 U + H3 V = -L2(W)
//! phi(W) = H4 W - k [ (H7 U + (H7 W)^2 / 2) ∘ (H5 W)
//!                   + (H8 V + (H8 W)^2 / 2) ∘ (H6 W)
//!                   + s (H2 W) ∘ (H8 U + H7 V + (H7 W) ∘ (H8 W)) ] - lambda
//! ```
//!
//! where `k = h^3 / (mu D1)`, `s = 2 mu G12 / C` and `lambda = q a^4 / (D1 h)`.
//! The in-plane pair is linear in `(U, V)` for a given `W`, so it is solved
//! exactly inside every residual evaluation and Newton only iterates on `W`.

use nalgebra::{DMatrix, DVector, Dyn, LU};

use crate::bc::{BcKind, BoundaryOperatorSet};
use crate::dq::{make_grid, DiffMatrices};
use crate::error::{invalid, Error, Result};
use crate::plate::material::{derive_material, DerivedMaterial, PlateSpec};
use crate::tensor::{add_scaled_rows, kron};

/// Smallest |pivot| / largest |pivot| accepted for the in-plane block system.
const MIN_PIVOT_RATIO: f64 = 1e-14;

/// Coefficient matrices acting on stacked interior vectors.
#[derive(Debug, Clone)]
pub struct HMatrices {
    pub h1: DMatrix<f64>,
    pub h2: DMatrix<f64>,
    pub h3: DMatrix<f64>,
    pub h4: DMatrix<f64>,
    pub h5: DMatrix<f64>,
    pub h6: DMatrix<f64>,
    pub h7: DMatrix<f64>,
    pub h8: DMatrix<f64>,
}

/// Scale factors tying the dimensionless unknowns to physical ones.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scaling {
    pub a: f64,
    pub b: f64,
    pub h: f64,
    /// `a / b`
    pub aspect: f64,
    /// `h^3 / (mu D1)`, prefactor of the nonlinear bracket.
    pub nonlinear: f64,
    /// `2 mu G12 / C`
    pub shear: f64,
    /// `q a^4 / (D1 h)`, the dimensionless pressure.
    pub load: f64,
}

impl Scaling {
    /// Physical `u` per unit of `U`.
    pub fn u_unit(&self) -> f64 {
        self.h * self.h / self.a
    }

    /// Physical `v` per unit of `V`.
    pub fn v_unit(&self) -> f64 {
        self.h * self.h / self.b
    }
}

#[derive(Debug, Clone)]
pub struct AssembledSystem {
    pub spec: PlateSpec,
    pub material: DerivedMaterial,
    pub bcx: BoundaryOperatorSet,
    pub bcy: BoundaryOperatorSet,
    pub h: HMatrices,
    pub scaling: Scaling,
    /// Interior unknowns along x.
    pub nx: usize,
    /// Interior unknowns along y.
    pub ny: usize,
    inplane: LU<f64, Dyn, Dyn>,
}

/// Matrix-vector products of every H matrix with one `W`.
struct Products {
    h1w: DVector<f64>,
    h2w: DVector<f64>,
    h3w: DVector<f64>,
    h5w: DVector<f64>,
    h6w: DVector<f64>,
    h7w: DVector<f64>,
    h8w: DVector<f64>,
}

/// Per-equation residuals of the coupled three-field system, each divided by
/// the largest term of its equation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoupledResiduals {
    pub inplane_x: f64,
    pub inplane_y: f64,
    pub transverse: f64,
}

impl CoupledResiduals {
    pub fn max(&self) -> f64 {
        self.inplane_x.max(self.inplane_y).max(self.transverse)
    }
}

/// Builds the boundary operator sets for `spec` and assembles the system.
pub fn assemble_spec(spec: &PlateSpec) -> Result<AssembledSystem> {
    let build = |n: usize| -> Result<BoundaryOperatorSet> {
        let grid = make_grid(n, spec.grid_kind)?;
        BoundaryOperatorSet::build(&DiffMatrices::new(&grid)?, spec.bc)
    };
    let bcx = build(spec.nx)?;
    let bcy = build(spec.ny)?;
    assemble(spec, bcx, bcy)
}

pub fn assemble(
    spec: &PlateSpec,
    bcx: BoundaryOperatorSet,
    bcy: BoundaryOperatorSet,
) -> Result<AssembledSystem> {
    let material = derive_material(spec)?;
    if spec.nx < 5 || spec.ny < 5 {
        return Err(invalid(format!(
            "plate grids need at least 5 nodes per direction, got {}x{}",
            spec.nx, spec.ny
        )));
    }
    if bcx.grid_len() != spec.nx || bcy.grid_len() != spec.ny {
        return Err(invalid(format!(
            "boundary operators built for {}x{} nodes, spec asks for {}x{}",
            bcx.grid_len(),
            bcy.grid_len(),
            spec.nx,
            spec.ny
        )));
    }
    if bcx.kind != spec.bc || bcy.kind != spec.bc {
        return Err(invalid(format!(
            "boundary operators ({}, {}) do not match the plate edges ({})",
            bcx.kind, bcy.kind, spec.bc
        )));
    }

    let (nx, ny) = (bcx.n_interior, bcy.n_interior);
    let ix = DMatrix::<f64>::identity(nx, nx);
    let iy = DMatrix::<f64>::identity(ny, ny);
    let r = spec.a / spec.b;
    let (r2, r4) = (r * r, r.powi(4));
    let mu_g = material.mu * spec.g12;

    let bxx = kron(&bcx.bbar, &iy);
    let byy = kron(&ix, &bcy.bbar);
    let axy = kron(&bcx.abar, &bcy.abar);

    let h1 = spec.e1 * &bxx + (mu_g * r2) * &byy;
    let h2 = (material.c * r2) * &axy;
    let h3 = (spec.e2 * r4) * &byy + (mu_g * r2) * &bxx;
    let h4 = kron(&bcx.dbar, &iy)
        + (2.0 * material.d3 / material.d1 * r2) * kron(&bcx.bbar, &bcy.bbar)
        + (material.d2 / material.d1 * r4) * kron(&ix, &bcy.dbar);
    let h5 = spec.e1 * &bxx + (spec.nu12 * spec.e2 * r2) * &byy;
    let h6 = (spec.e2 * r4) * &byy + (material.nu21 * spec.e1 * r2) * &bxx;
    let h7 = kron(&bcx.abar, &iy);
    let h8 = kron(&ix, &bcy.abar);

    let n = nx * ny;
    let mut block = DMatrix::zeros(2 * n, 2 * n);
    block.view_mut((0, 0), (n, n)).copy_from(&h1);
    block.view_mut((0, n), (n, n)).copy_from(&h2);
    block.view_mut((n, 0), (n, n)).copy_from(&h2);
    block.view_mut((n, n), (n, n)).copy_from(&h3);
    let inplane = block.lu();
    let pivot_ratio = pivot_ratio(&inplane);
    if !(pivot_ratio > MIN_PIVOT_RATIO) {
        return Err(Error::DecouplingFailure { pivot_ratio });
    }

    let scaling = Scaling {
        a: spec.a,
        b: spec.b,
        h: spec.h,
        aspect: r,
        nonlinear: spec.h.powi(3) / (material.mu * material.d1),
        shear: 2.0 * mu_g / material.c,
        load: spec.q * spec.a.powi(4) / (material.d1 * spec.h),
    };

    Ok(AssembledSystem {
        spec: spec.clone(),
        material,
        bcx,
        bcy,
        h: HMatrices {
            h1,
            h2,
            h3,
            h4,
            h5,
            h6,
            h7,
            h8,
        },
        scaling,
        nx,
        ny,
        inplane,
    })
}

fn pivot_ratio(lu: &LU<f64, Dyn, Dyn>) -> f64 {
    let u = lu.u();
    let diag = u.diagonal().map(f64::abs);
    let max = diag.max();
    if max == 0.0 {
        0.0
    } else {
        diag.min() / max
    }
}

impl AssembledSystem {
    /// Number of unknowns per field.
    pub fn n(&self) -> usize {
        self.nx * self.ny
    }

    pub fn bc(&self) -> BcKind {
        self.spec.bc
    }

    /// Dimensionless pressure `q a^4 / (D1 h)`.
    pub fn load(&self) -> f64 {
        self.scaling.load
    }

    pub fn load_vector(&self) -> DVector<f64> {
        DVector::from_element(self.n(), self.scaling.load)
    }

    /// Changes the applied pressure; the coefficient matrices are unaffected.
    pub fn set_pressure(&mut self, q: f64) -> Result<()> {
        if !(q.is_finite() && q >= 0.0) {
            return Err(invalid(format!("pressure must be non-negative, got {q}")));
        }
        self.spec.q = q;
        self.scaling.load = q * self.spec.a.powi(4) / (self.material.d1 * self.spec.h);
        Ok(())
    }

    fn check_len(&self, w: &DVector<f64>) -> Result<()> {
        if w.len() != self.n() {
            return Err(invalid(format!(
                "state has {} entries, system has {} unknowns",
                w.len(),
                self.n()
            )));
        }
        Ok(())
    }

    fn products(&self, w: &DVector<f64>) -> Products {
        let h = &self.h;
        Products {
            h1w: &h.h1 * w,
            h2w: &h.h2 * w,
            h3w: &h.h3 * w,
            h5w: &h.h5 * w,
            h6w: &h.h6 * w,
            h7w: &h.h7 * w,
            h8w: &h.h8 * w,
        }
    }

    fn l_from(p: &Products) -> (DVector<f64>, DVector<f64>) {
        let l1 = p.h7w.component_mul(&p.h1w) + p.h8w.component_mul(&p.h2w);
        let l2 = p.h8w.component_mul(&p.h3w) + p.h7w.component_mul(&p.h2w);
        (l1, l2)
    }

    /// Quadratic in-plane forcing terms `(L1, L2)` for a transverse state.
    pub fn l_vectors(&self, w: &DVector<f64>) -> Result<(DVector<f64>, DVector<f64>)> {
        self.check_len(w)?;
        Ok(Self::l_from(&self.products(w)))
    }

    fn solve_inplane(&self, l1: &DVector<f64>, l2: &DVector<f64>) -> Result<(DVector<f64>, DVector<f64>)> {
        let n = self.n();
        let mut rhs = DVector::zeros(2 * n);
        rhs.rows_mut(0, n).copy_from(&(-l1));
        rhs.rows_mut(n, n).copy_from(&(-l2));
        let sol = self.inplane.solve(&rhs).ok_or(Error::DecouplingFailure {
            pivot_ratio: pivot_ratio(&self.inplane),
        })?;
        Ok((sol.rows(0, n).into_owned(), sol.rows(n, n).into_owned()))
    }

    /// In-plane displacements `(U, V)` that satisfy both in-plane equations
    /// exactly for the given `W`.
    pub fn recover_inplane(&self, w: &DVector<f64>) -> Result<(DVector<f64>, DVector<f64>)> {
        let (l1, l2) = self.l_vectors(w)?;
        self.solve_inplane(&l1, &l2)
    }

    pub fn residual(&self, w: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_len(w)?;
        let p = self.products(w);
        let (l1, l2) = Self::l_from(&p);
        let (u, v) = self.solve_inplane(&l1, &l2)?;
        Ok(self.residual_with(w, &p, &u, &v))
    }

    fn residual_with(&self, w: &DVector<f64>, p: &Products, u: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
        let h = &self.h;
        let s = &self.scaling;
        let stretch_x = &h.h7 * u + 0.5 * p.h7w.component_mul(&p.h7w);
        let stretch_y = &h.h8 * v + 0.5 * p.h8w.component_mul(&p.h8w);
        let shear = &h.h8 * u + &h.h7 * v + p.h7w.component_mul(&p.h8w);
        let bracket = stretch_x.component_mul(&p.h5w)
            + stretch_y.component_mul(&p.h6w)
            + s.shear * p.h2w.component_mul(&shear);
        let mut phi = &h.h4 * w - s.nonlinear * bracket;
        phi.add_scalar_mut(-s.load);
        phi
    }

    /// Analytic Jacobian of [`residual`](Self::residual) built from row-scaled
    /// (SJT) products.
    pub fn jacobian(&self, w: &DVector<f64>) -> Result<DMatrix<f64>> {
        self.check_len(w)?;
        let n = self.n();
        let h = &self.h;
        let s = &self.scaling;
        let p = self.products(w);
        let (l1, l2) = Self::l_from(&p);
        let (u, v) = self.solve_inplane(&l1, &l2)?;

        // Sensitivities of the in-plane fields: [H1 H2; H2 H3] [dU; dV] = -[dL1; dL2]
        let mut rhs = DMatrix::zeros(2 * n, n);
        {
            let mut dl1 = DMatrix::zeros(n, n);
            add_scaled_rows(&mut dl1, &p.h1w, &h.h7, -1.0);
            add_scaled_rows(&mut dl1, &p.h7w, &h.h1, -1.0);
            add_scaled_rows(&mut dl1, &p.h2w, &h.h8, -1.0);
            add_scaled_rows(&mut dl1, &p.h8w, &h.h2, -1.0);
            rhs.view_mut((0, 0), (n, n)).copy_from(&dl1);
            let mut dl2 = dl1;
            dl2.fill(0.0);
            add_scaled_rows(&mut dl2, &p.h3w, &h.h8, -1.0);
            add_scaled_rows(&mut dl2, &p.h8w, &h.h3, -1.0);
            add_scaled_rows(&mut dl2, &p.h2w, &h.h7, -1.0);
            add_scaled_rows(&mut dl2, &p.h7w, &h.h2, -1.0);
            rhs.view_mut((n, 0), (n, n)).copy_from(&dl2);
        }
        let duv = self.inplane.solve(&rhs).ok_or(Error::DecouplingFailure {
            pivot_ratio: pivot_ratio(&self.inplane),
        })?;

        let stretch_x = &h.h7 * &u + 0.5 * p.h7w.component_mul(&p.h7w);
        let stretch_y = &h.h8 * &v + 0.5 * p.h8w.component_mul(&p.h8w);
        let shear = &h.h8 * &u + &h.h7 * &v + p.h7w.component_mul(&p.h8w);
        let sh2w = s.shear * &p.h2w;

        // Terms multiplying dU and dV, gathered so each needs one product.
        let mut couple = DMatrix::zeros(n, 2 * n);
        {
            let mut cu = couple.view_mut((0, 0), (n, n));
            let mut tmp = DMatrix::zeros(n, n);
            add_scaled_rows(&mut tmp, &p.h5w, &h.h7, 1.0);
            add_scaled_rows(&mut tmp, &sh2w, &h.h8, 1.0);
            cu.copy_from(&tmp);
            tmp.fill(0.0);
            add_scaled_rows(&mut tmp, &p.h6w, &h.h8, 1.0);
            add_scaled_rows(&mut tmp, &sh2w, &h.h7, 1.0);
            couple.view_mut((0, n), (n, n)).copy_from(&tmp);
        }

        let mut bracket = &couple * &duv;
        add_scaled_rows(&mut bracket, &p.h5w.component_mul(&p.h7w), &h.h7, 1.0);
        add_scaled_rows(&mut bracket, &stretch_x, &h.h5, 1.0);
        add_scaled_rows(&mut bracket, &p.h6w.component_mul(&p.h8w), &h.h8, 1.0);
        add_scaled_rows(&mut bracket, &stretch_y, &h.h6, 1.0);
        add_scaled_rows(&mut bracket, &(s.shear * &shear), &h.h2, 1.0);
        add_scaled_rows(&mut bracket, &sh2w.component_mul(&p.h8w), &h.h7, 1.0);
        add_scaled_rows(&mut bracket, &sh2w.component_mul(&p.h7w), &h.h8, 1.0);

        Ok(&h.h4 - s.nonlinear * bracket)
    }

    /// Small-deflection solution `H4 W = lambda`, used as the Newton start.
    pub fn linear_solve(&self) -> Result<DVector<f64>> {
        self.h
            .h4
            .clone()
            .lu()
            .solve(&self.load_vector())
            .ok_or_else(|| Error::SingularOperator("bending operator H4 is singular".into()))
    }

    /// Residuals of the full coupled system at `(W, U, V)`.
    pub fn coupled_residuals(
        &self,
        w: &DVector<f64>,
        u: &DVector<f64>,
        v: &DVector<f64>,
    ) -> Result<CoupledResiduals> {
        self.check_len(w)?;
        self.check_len(u)?;
        self.check_len(v)?;
        let h = &self.h;
        let p = self.products(w);
        let (l1, l2) = Self::l_from(&p);
        let scaled = |terms: &[&DVector<f64>]| {
            let total: DVector<f64> = terms.iter().fold(DVector::zeros(w.len()), |acc, t| acc + *t);
            let scale = terms.iter().map(|t| t.amax()).fold(0.0, f64::max);
            if scale == 0.0 {
                0.0
            } else {
                total.amax() / scale
            }
        };
        let (h1u, h2v, h2u, h3v) = (&h.h1 * u, &h.h2 * v, &h.h2 * u, &h.h3 * v);
        let phi = self.residual_with(w, &p, u, v);
        let h4w = &h.h4 * w;
        let transverse_scale = h4w.amax().max(self.scaling.load);
        Ok(CoupledResiduals {
            inplane_x: scaled(&[&h1u, &h2v, &l1]),
            inplane_y: scaled(&[&h2u, &h3v, &l2]),
            transverse: if transverse_scale == 0.0 {
                0.0
            } else {
                phi.amax() / transverse_scale
            },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ss_table() -> PlateSpec {
        PlateSpec::isotropic(100.0, 100.0, 1.0, 2.1e6, 0.25, 1.0, BcKind::SimplySupported, 7)
    }

    #[test]
    fn zero_state() {
        let sys = assemble_spec(&ss_table()).unwrap();
        let w = DVector::zeros(sys.n());
        let (l1, l2) = sys.l_vectors(&w).unwrap();
        assert_eq!(l1.amax(), 0.0);
        assert_eq!(l2.amax(), 0.0);
        let (u, v) = sys.recover_inplane(&w).unwrap();
        assert_eq!(u.amax() + v.amax(), 0.0);
        let phi = sys.residual(&w).unwrap();
        for x in phi.iter() {
            assert_eq!(*x, -sys.load());
        }
        assert!(((sys.load() - 535.714_285_7) / 535.714_285_7).abs() < 1e-9);
        assert_eq!(sys.jacobian(&w).unwrap(), sys.h.h4);
    }

    #[test]
    fn sizes_follow_boundary_kind() {
        let ss = assemble_spec(&ss_table().with_grid(9, 7, crate::dq::GridKind::ChebyshevMapped)).unwrap();
        assert_eq!((ss.nx, ss.ny, ss.n()), (7, 5, 35));
        let mut spec = ss_table();
        spec.bc = BcKind::Clamped;
        let cl = assemble_spec(&spec.with_grid(9, 11, crate::dq::GridKind::ChebyshevMapped)).unwrap();
        assert_eq!((cl.nx, cl.ny), (5, 7));
    }

    #[test]
    fn zero_pressure_has_zero_load() {
        let sys = assemble_spec(&ss_table().with_pressure(0.0)).unwrap();
        assert_eq!(sys.load_vector().amax(), 0.0);
        assert_eq!(sys.linear_solve().unwrap().amax(), 0.0);
    }

    #[test]
    fn mismatched_operator_sets_are_rejected() {
        let spec = ss_table();
        let make = |n| {
            let g = make_grid(n, spec.grid_kind).unwrap();
            BoundaryOperatorSet::build(&DiffMatrices::new(&g).unwrap(), BcKind::SimplySupported).unwrap()
        };
        assert!(assemble(&spec, make(7), make(9)).is_err());
        let g = make_grid(7, spec.grid_kind).unwrap();
        let clamped = BoundaryOperatorSet::build(&DiffMatrices::new(&g).unwrap(), BcKind::Clamped).unwrap();
        assert!(assemble(&spec, make(7), clamped).is_err());
    }

    #[test]
    fn wrong_state_length() {
        let sys = assemble_spec(&ss_table()).unwrap();
        assert!(sys.residual(&DVector::zeros(3)).is_err());
        assert!(sys.jacobian(&DVector::zeros(3)).is_err());
        assert!(sys.l_vectors(&DVector::zeros(3)).is_err());
    }

    #[test]
    fn h4_is_symmetric_under_axis_swap_for_square_isotropic_plates() {
        let sys = assemble_spec(&ss_table()).unwrap();
        let m = sys.nx;
        let swap = |k: usize| (k % m) * m + k / m;
        let h4 = &sys.h.h4;
        for i in 0..sys.n() {
            for j in 0..sys.n() {
                assert!((h4[(i, j)] - h4[(swap(i), swap(j))]).abs() < 1e-9 * h4.amax());
            }
        }
    }
}
