//! Classical series solutions for small-deflection bending under uniform
//! pressure. Used as independent checks on the linear DQ operators.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use crate::error::{invalid, Error, Result};

/// Double-sine series centre deflection of a simply supported orthotropic
/// plate, `a x b`, with bending stiffnesses `d1`, `d2` and `d3`, summing odd
/// `m, n < 2 * terms`.
pub fn navier_center_deflection(a: f64, b: f64, d1: f64, d2: f64, d3: f64, q: f64, terms: usize) -> f64 {
    let mut sum = 0.0;
    for m in (1..2 * terms).step_by(2) {
        for n in (1..2 * terms).step_by(2) {
            let (mf, nf) = (m as f64, n as f64);
            let sign = if ((m + n) / 2 - 1) % 2 == 0 { 1.0 } else { -1.0 };
            let den = d1 * (mf / a).powi(4) + 2.0 * d3 * (mf * nf / (a * b)).powi(2) + d2 * (nf / b).powi(4);
            sum += sign / (mf * nf * den);
        }
    }
    16.0 * q / PI.powi(6) * sum
}

/// `w D / (q a^4)` at the centre of a simply supported isotropic plate with
/// aspect ratio `b / a`.
pub fn navier_center_coefficient(b_over_a: f64, terms: usize) -> f64 {
    navier_center_deflection(1.0, b_over_a, 1.0, 1.0, 1.0, 1.0, terms)
}

/// Composite Simpson rule on `[lo, hi]` with `intervals` (even) panels.
fn simpson(f: impl Fn(f64) -> f64, lo: f64, hi: f64, intervals: usize) -> f64 {
    let n = intervals + intervals % 2;
    let h = (hi - lo) / n as f64;
    let mut s = f(lo) + f(hi);
    for k in 1..n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(lo + k as f64 * h);
    }
    s * h / 3.0
}

/// `w D / (q a^4)` at the centre of a clamped isotropic square plate.
///
/// Superposes the simply supported single-series solution with edge-moment
/// solutions on both edge pairs; the `terms` odd moment amplitudes come from
/// enforcing zero edge slope in the sine projection.
pub fn clamped_square_center_coefficient(terms: usize) -> Result<f64> {
    if terms == 0 {
        return Err(invalid("clamped series needs at least one term"));
    }
    let a = 1.0;
    let modes: Vec<f64> = (0..terms).map(|k| (2 * k + 1) as f64).collect();
    // Simply supported load solution per mode, y centred on the plate.
    let load_mode = |m: f64| {
        let al = m * PI / a;
        let be = al * a / 2.0;
        let yp = 4.0 / (m * PI * al.powi(4));
        let bb = yp / (2.0 * be.cosh());
        let aa = (-yp - bb * be * be.sinh()) / be.cosh();
        (al, be, yp, aa, bb)
    };
    // Edge-moment solution per unit amplitude, both coefficients divided by cosh(beta).
    let moment_mode = |m: f64| {
        let al = m * PI / a;
        let be = al * a / 2.0;
        let bn = 1.0 / (2.0 * al * al);
        let an = -bn * be * be.tanh();
        (al, be, an, bn)
    };

    let slope_load = DVector::from_iterator(
        terms,
        modes.iter().map(|&m| {
            let (al, be, _, aa, bb) = load_mode(m);
            al * (aa * be.sinh() + bb * (be.sinh() + be * be.cosh()))
        }),
    );
    let mut mat = DMatrix::zeros(terms, terms);
    let panels = 16_000;
    for (j, &mj) in modes.iter().enumerate() {
        let (al, be, an, bn) = moment_mode(mj);
        mat[(j, j)] += al * (an * be.tanh() + bn * (be.tanh() + be));
        let shape = |t: f64| {
            // exp-form of cosh(al t)/cosh(be) and t sinh(al t)/cosh(be) avoids overflow
            let c = ((al * t.abs() - be).exp() + (-al * t.abs() - be).exp()) / (1.0 + (-2.0 * be).exp());
            let s = t.signum() * ((al * t.abs() - be).exp() - (-al * t.abs() - be).exp()) / (1.0 + (-2.0 * be).exp());
            an * c + bn * al * t * s
        };
        for (i, &mi) in modes.iter().enumerate() {
            let ak = mi * PI / a;
            let proj = 2.0 / a * simpson(|t| shape(t) * (ak * (t + a / 2.0)).sin(), -a / 2.0, a / 2.0, panels);
            mat[(i, j)] += al * (al * a).cos() * proj;
        }
    }
    let e = mat
        .lu()
        .solve(&(-slope_load))
        .ok_or_else(|| Error::SingularOperator("clamped series slope system is singular".into()))?;
    let mut wc = 0.0;
    for (j, &m) in modes.iter().enumerate() {
        let (al, be, yp, aa, _) = load_mode(m);
        let s = (al * a / 2.0).sin();
        let (_, _, an, _) = moment_mode(m);
        wc += s * (yp + aa) + 2.0 * s * e[j] * an / be.cosh();
    }
    Ok(wc)
}
