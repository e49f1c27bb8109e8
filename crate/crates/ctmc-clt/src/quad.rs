//! Adaptive Simpson quadrature for scalar- and vector-valued integrands.

use nalgebra::DVector;

use crate::error::{Error, Result};

const MAX_DEPTH: u32 = 60;

/// Adaptive Simpson on `[a, b]` with absolute tolerance `tol`.
/// Returns the integral and an error estimate.
pub fn adaptive_simpson<F: FnMut(f64) -> Result<f64>>(
    mut f: F,
    a: f64,
    b: f64,
    tol: f64,
) -> Result<(f64, f64)> {
    if a == b {
        return Ok((0.0, 0.0));
    }
    let fa = f(a)?;
    let fb = f(b)?;
    let m = 0.5 * (a + b);
    let fm = f(m)?;
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec_scalar(&mut f, a, b, fa, fm, fb, whole, tol, 0)
}

#[allow(clippy::too_many_arguments)]
fn rec_scalar<F: FnMut(f64) -> Result<f64>>(
    f: &mut F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<(f64, f64)> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm)?;
    let frm = f(rm)?;
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * tol || (b - a) < 1e-15 * (a.abs() + b.abs() + 1.0) {
        return Ok((left + right + delta / 15.0, delta.abs() / 15.0));
    }
    if depth >= MAX_DEPTH {
        return Err(Error::QuadratureNotConverged(format!(
            "max depth on [{a:.3e}, {b:.3e}], local error {:.3e}",
            delta.abs() / 15.0
        )));
    }
    let (il, el) = rec_scalar(f, a, m, fa, flm, fm, left, tol / 2.0, depth + 1)?;
    let (ir, er) = rec_scalar(f, m, b, fm, frm, fb, right, tol / 2.0, depth + 1)?;
    Ok((il + ir, el + er))
}

/// Vector-valued adaptive Simpson; refinement is driven by the max-norm
/// of the Richardson correction.
pub fn adaptive_simpson_vec<F: FnMut(f64) -> Result<DVector<f64>>>(
    mut f: F,
    a: f64,
    b: f64,
    tol: f64,
) -> Result<(DVector<f64>, f64)> {
    if a == b {
        let v = f(a)?;
        return Ok((DVector::zeros(v.len()), 0.0));
    }
    let fa = f(a)?;
    let fb = f(b)?;
    let m = 0.5 * (a + b);
    let fm = f(m)?;
    let whole = (&fa + 4.0 * &fm + &fb) * ((b - a) / 6.0);
    rec_vec(&mut f, a, b, &fa, &fm, &fb, &whole, tol, 0)
}

#[allow(clippy::too_many_arguments)]
fn rec_vec<F: FnMut(f64) -> Result<DVector<f64>>>(
    f: &mut F,
    a: f64,
    b: f64,
    fa: &DVector<f64>,
    fm: &DVector<f64>,
    fb: &DVector<f64>,
    whole: &DVector<f64>,
    tol: f64,
    depth: u32,
) -> Result<(DVector<f64>, f64)> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm)?;
    let frm = f(rm)?;
    let left = (fa + 4.0 * &flm + fm) * ((m - a) / 6.0);
    let right = (fm + 4.0 * &frm + fb) * ((b - m) / 6.0);
    let delta = &left + &right - whole;
    let dmax = delta.amax();
    if dmax <= 15.0 * tol || (b - a) < 1e-15 * (a.abs() + b.abs() + 1.0) {
        return Ok((&left + &right + &delta / 15.0, dmax / 15.0));
    }
    if depth >= MAX_DEPTH {
        return Err(Error::QuadratureNotConverged(format!(
            "max depth on [{a:.3e}, {b:.3e}], local error {:.3e}",
            dmax / 15.0
        )));
    }
    let (il, el) = rec_vec(f, a, m, fa, &flm, fm, &left, tol / 2.0, depth + 1)?;
    let (ir, er) = rec_vec(f, m, b, fm, &frm, fb, &right, tol / 2.0, depth + 1)?;
    Ok((il + ir, el + er))
}

/// Integrate `g(t)` over `[a, b]`, `0 < a < b`, in log space:
/// substitute `t = e^x` so widely separated scales cost the same.
pub fn adaptive_simpson_log<F: FnMut(f64) -> Result<f64>>(
    mut g: F,
    a: f64,
    b: f64,
    tol: f64,
) -> Result<(f64, f64)> {
    assert!(a > 0.0 && b > a);
    adaptive_simpson(|x| Ok(g(x.exp())? * x.exp()), a.ln(), b.ln(), tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn integrates_polynomial_exactly() {
        let (v, e) = adaptive_simpson(|x| Ok(x * x * x), 0.0, 2.0, 1e-12).unwrap();
        assert_abs_diff_eq!(v, 4.0, epsilon = 1e-12);
        assert!(e <= 1e-10);
    }

    #[test]
    fn integrates_oscillatory() {
        let (v, _) = adaptive_simpson(|x| Ok((10.0 * x).sin()), 0.0, 1.0, 1e-11).unwrap();
        let exact = (1.0 - (10.0f64).cos()) / 10.0;
        assert_abs_diff_eq!(v, exact, epsilon = 1e-9);
    }

    #[test]
    fn log_substitution_handles_wide_ranges() {
        // integral of 1/t^2 from 1 to 1e12 = 1 - 1e-12
        let (v, _) = adaptive_simpson_log(|t| Ok(t.powi(-2)), 1.0, 1e12, 1e-12).unwrap();
        assert_abs_diff_eq!(v, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn vector_quadrature_matches_componentwise() {
        let f = |t: f64| Ok(DVector::from_row_slice(&[t.exp(), t.cos()]));
        let (v, _) = adaptive_simpson_vec(f, 0.0, 1.0, 1e-12).unwrap();
        assert_abs_diff_eq!(v[0], 1.0f64.exp() - 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(v[1], 1.0f64.sin(), epsilon = 1e-10);
    }
}
