//! Hadamard (elementwise) products, the SJT matrix-vector product, Jacobian
//! rules for Hadamard-form expressions, and Kronecker/row-stacking helpers.
//!
//! Two flavours of the SJT product exist here. [`sjt_post`] scales column `j`
//! of a matrix by `v_j`. [`sjt_rows`] scales row `i` by `v_i`, which is the
//! product that appears when differentiating `c ∘ (M u)` with respect to `u`;
//! every Jacobian rule below is written in terms of it.

use nalgebra::{DMatrix, DVector};

use crate::error::{invalid, Error, Result};

fn same_shape(a: &DMatrix<f64>, b: &DMatrix<f64>, what: &str) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(invalid(format!(
            "{what}: shape mismatch {:?} vs {:?}",
            a.shape(),
            b.shape()
        )));
    }
    Ok(())
}

pub fn hadamard(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    same_shape(a, b, "hadamard")?;
    Ok(a.component_mul(b))
}

/// Elementwise power `a_ij^q`. `q = 0` gives the all-ones matrix regardless
/// of the entries.
pub fn hadamard_power(a: &DMatrix<f64>, q: f64) -> Result<DMatrix<f64>> {
    check_power_domain(a.iter().copied(), q)?;
    Ok(a.map(|x| elementwise_pow(x, q)))
}

fn check_power_domain(values: impl Iterator<Item = f64>, q: f64) -> Result<()> {
    if q == 0.0 {
        return Ok(());
    }
    let integer = q.fract() == 0.0;
    for x in values {
        if q < 0.0 && x == 0.0 {
            return Err(Error::Domain(format!("zero entry raised to negative power {q}")));
        }
        if !integer && x < 0.0 {
            return Err(Error::Domain(format!(
                "negative entry {x} raised to non-integer power {q}"
            )));
        }
    }
    Ok(())
}

fn elementwise_pow(x: f64, q: f64) -> f64 {
    if q == 0.0 {
        1.0
    } else if q.fract() == 0.0 && q.abs() <= i32::MAX as f64 {
        x.powi(q as i32)
    } else {
        x.powf(q)
    }
}

/// Elementwise application of `f`. Non-finite results are reported as a
/// domain error.
pub fn hadamard_map(a: &DMatrix<f64>, f: impl Fn(f64) -> f64) -> Result<DMatrix<f64>> {
    let out = a.map(f);
    if let Some(pos) = out.iter().position(|x| !x.is_finite()) {
        return Err(Error::Domain(format!(
            "function is undefined at entry {} (value {})",
            pos,
            a.as_slice()[pos]
        )));
    }
    Ok(out)
}

/// Postmultiplying SJT product `[a_ij v_j]`, i.e. `A diag(v)`.
pub fn sjt_post(a: &DMatrix<f64>, v: &DVector<f64>) -> Result<DMatrix<f64>> {
    if a.ncols() != v.len() {
        return Err(invalid(format!(
            "sjt_post: matrix has {} columns, vector has {} entries",
            a.ncols(),
            v.len()
        )));
    }
    let mut out = a.clone();
    for (j, mut col) in out.column_iter_mut().enumerate() {
        col *= v[j];
    }
    Ok(out)
}

/// Row-scaling SJT product `[a_ij v_i]`, i.e. `diag(v) A`.
pub fn sjt_rows(a: &DMatrix<f64>, v: &DVector<f64>) -> Result<DMatrix<f64>> {
    if a.nrows() != v.len() {
        return Err(invalid(format!(
            "sjt_rows: matrix has {} rows, vector has {} entries",
            a.nrows(),
            v.len()
        )));
    }
    Ok(scale_rows(a, v))
}

/// Unchecked row scaling for internal hot paths.
pub(crate) fn scale_rows(a: &DMatrix<f64>, v: &DVector<f64>) -> DMatrix<f64> {
    let mut out = a.clone();
    scale_rows_in_place(&mut out, v);
    out
}

pub(crate) fn scale_rows_in_place(a: &mut DMatrix<f64>, v: &DVector<f64>) {
    let n = a.nrows();
    for mut col in a.column_iter_mut() {
        for i in 0..n {
            col[i] *= v[i];
        }
    }
}

/// `a += diag(v) m`
pub(crate) fn add_scaled_rows(a: &mut DMatrix<f64>, v: &DVector<f64>, m: &DMatrix<f64>, k: f64) {
    let n = a.nrows();
    for (mut dst, src) in a.column_iter_mut().zip(m.column_iter()) {
        for i in 0..n {
            dst[i] += k * v[i] * src[i];
        }
    }
}

fn check_apply(m: &DMatrix<f64>, u: &DVector<f64>, what: &str) -> Result<()> {
    if m.ncols() != u.len() {
        return Err(invalid(format!(
            "{what}: matrix has {} columns, unknown vector has {} entries",
            m.ncols(),
            u.len()
        )));
    }
    Ok(())
}

/// Jacobian of `c ∘ (M u)` with respect to `u`.
pub fn scale_rule(c: &DVector<f64>, m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    sjt_rows(m, c)
}

/// Jacobian of `(M u)^∘q`.
pub fn power_rule(m: &DMatrix<f64>, u: &DVector<f64>, q: f64) -> Result<DMatrix<f64>> {
    check_apply(m, u, "power_rule")?;
    let mu = m * u;
    check_power_domain(mu.iter().copied(), q - 1.0)?;
    let factor = mu.map(|x| q * elementwise_pow(x, q - 1.0));
    sjt_rows(m, &factor)
}

/// Jacobian of `(M1 u) ∘ (M2 u)`.
pub fn product_rule(m1: &DMatrix<f64>, m2: &DMatrix<f64>, u: &DVector<f64>) -> Result<DMatrix<f64>> {
    check_apply(m1, u, "product_rule")?;
    check_apply(m2, u, "product_rule")?;
    same_shape(m1, m2, "product_rule")?;
    let mut out = sjt_rows(m1, &(m2 * u))?;
    add_scaled_rows(&mut out, &(m1 * u), m2, 1.0);
    Ok(out)
}

/// Jacobian of `f∘(M u)` given the derivative `f'`.
pub fn map_rule(
    m: &DMatrix<f64>,
    u: &DVector<f64>,
    derivative: impl Fn(f64) -> f64,
) -> Result<DMatrix<f64>> {
    check_apply(m, u, "map_rule")?;
    let mu = m * u;
    let fprime = mu.map(derivative);
    if fprime.iter().any(|x| !x.is_finite()) {
        return Err(Error::Domain("derivative is undefined at M u".into()));
    }
    sjt_rows(m, &fprime)
}

pub fn kron(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    a.kronecker(b)
}

/// Stacks the rows of `x` into one vector.
pub fn vec_rows(x: &DMatrix<f64>) -> DVector<f64> {
    DVector::from_column_slice(x.transpose().as_slice())
}

/// Inverse of [`vec_rows`].
pub fn unvec_rows(v: &DVector<f64>, rows: usize, cols: usize) -> Result<DMatrix<f64>> {
    if rows * cols != v.len() {
        return Err(invalid(format!(
            "cannot reshape {} entries into {rows}x{cols}",
            v.len()
        )));
    }
    Ok(DMatrix::from_row_slice(rows, cols, v.as_slice()))
}

/// A rectangular field over interior nodes flattened row by row; entry
/// `i * ny + j` holds the value at `(x_i, y_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct StackedVector {
    pub data: DVector<f64>,
    pub nx: usize,
    pub ny: usize,
}

impl StackedVector {
    pub fn new(data: DVector<f64>, nx: usize, ny: usize) -> Result<Self> {
        if data.len() != nx * ny {
            return Err(invalid(format!(
                "stacked vector of length {} does not match {nx}x{ny}",
                data.len()
            )));
        }
        Ok(Self { data, nx, ny })
    }

    pub fn from_matrix(x: &DMatrix<f64>) -> Self {
        Self {
            data: vec_rows(x),
            nx: x.nrows(),
            ny: x.ncols(),
        }
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.nx, self.ny, self.data.as_slice())
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.ny + j
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m2(a: [f64; 4]) -> DMatrix<f64> {
        DMatrix::from_row_slice(2, 2, &a)
    }

    #[test]
    fn hadamard_small() {
        let p = hadamard(&m2([1., 2., 3., 4.]), &m2([5., 6., 7., 8.])).unwrap();
        assert_eq!(p, m2([5., 12., 21., 32.]));
        assert!(hadamard(&m2([1., 2., 3., 4.]), &DMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn hadamard_unit_and_powers() {
        let a = m2([1., 2., 3., 4.]);
        let ones = hadamard_power(&a, 0.0).unwrap();
        assert_eq!(ones, DMatrix::from_element(2, 2, 1.0));
        assert_eq!(hadamard(&a, &ones).unwrap(), a);
        assert_eq!(hadamard_power(&a, 2.0).unwrap(), m2([1., 4., 9., 16.]));
        let inv = hadamard_power(&a, -1.0).unwrap();
        let prod = hadamard(&a, &inv).unwrap();
        assert!((prod - ones).amax() < 1e-15);
    }

    #[test]
    fn hadamard_power_domain_errors() {
        assert!(matches!(
            hadamard_power(&m2([1., 0., 3., 4.]), -1.0),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            hadamard_power(&m2([1., -2., 3., 4.]), 0.5),
            Err(Error::Domain(_))
        ));
        // zero entries are fine for q = 0
        assert!(hadamard_power(&m2([0., 0., 0., 0.]), 0.0).is_ok());
    }

    #[test]
    fn hadamard_map_cases() {
        let x = DMatrix::from_row_slice(1, 2, &[0.0, std::f64::consts::FRAC_PI_2]);
        let s = hadamard_map(&x, f64::sin).unwrap();
        assert!(s[(0, 0)].abs() < 1e-16 && (s[(0, 1)] - 1.0).abs() < 1e-16);
        assert_eq!(
            hadamard_map(&DMatrix::zeros(2, 3), f64::exp).unwrap(),
            DMatrix::from_element(2, 3, 1.0)
        );
        let a = m2([1.5, -2., 3., 0.25]);
        assert_eq!(hadamard_map(&a, |x| x * x).unwrap(), hadamard_power(&a, 2.0).unwrap());
        assert!(matches!(hadamard_map(&m2([1., -1., 2., 3.]), f64::ln), Err(Error::Domain(_))));
    }

    #[test]
    fn sjt_post_small() {
        let a = m2([1., 2., 3., 4.]);
        let v = DVector::from_vec(vec![10., 100.]);
        assert_eq!(sjt_post(&a, &v).unwrap(), m2([10., 200., 30., 400.]));
        assert_eq!(sjt_post(&a, &DVector::from_element(2, 1.0)).unwrap(), a);
        assert!(sjt_post(&a, &DVector::zeros(3)).is_err());
    }

    #[test]
    fn sjt_rows_small() {
        let a = m2([1., 2., 3., 4.]);
        let v = DVector::from_vec(vec![10., 100.]);
        assert_eq!(sjt_rows(&a, &v).unwrap(), m2([10., 20., 300., 400.]));
    }

    #[test]
    fn product_rule_with_equal_factors_is_power_rule() {
        let m = DMatrix::from_fn(4, 4, |i, j| (i as f64 + 1.0) * 0.3 - j as f64 * 0.7);
        let u = DVector::from_fn(4, |i, _| 0.2 + i as f64);
        let p = product_rule(&m, &m, &u).unwrap();
        let q = power_rule(&m, &u, 2.0).unwrap();
        assert!((p - q).amax() < 1e-12);
    }

    #[test]
    fn map_rule_uses_cosine_for_sine() {
        let m = DMatrix::from_fn(3, 3, |i, j| 0.1 * (i + 2 * j) as f64);
        let u = DVector::from_vec(vec![0.3, -0.2, 0.9]);
        let j = map_rule(&m, &u, f64::cos).unwrap();
        let expected = sjt_rows(&m, &(&m * &u).map(f64::cos)).unwrap();
        assert_eq!(j, expected);
    }

    #[test]
    fn row_stacking() {
        let x = m2([1., 2., 3., 4.]);
        assert_eq!(vec_rows(&x).as_slice(), &[1., 2., 3., 4.]);
        assert_eq!(unvec_rows(&vec_rows(&x), 2, 2).unwrap(), x);
        assert!(unvec_rows(&vec_rows(&x), 3, 2).is_err());
        let s = StackedVector::from_matrix(&DMatrix::from_row_slice(2, 3, &[1., 2., 3., 4., 5., 6.]));
        assert_eq!(s.data[s.index(1, 0)], 4.0);
    }

    #[test]
    fn kron_identity_is_block_diagonal() {
        let b = m2([1., 2., 3., 4.]);
        let k = kron(&DMatrix::identity(2, 2), &b);
        assert_eq!(k.shape(), (4, 4));
        assert_eq!(k.view((0, 0), (2, 2)), b);
        assert_eq!(k.view((2, 2), (2, 2)), b);
        assert_eq!(k.view((0, 2), (2, 2)).amax(), 0.0);
        assert_eq!(k.view((2, 0), (2, 2)).amax(), 0.0);
    }
}
