//! Small dense complex matrix helpers on top of nalgebra, with products
//! routed through matrixmultiply's complex GEMM.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub(crate) type CMat = DMatrix<Complex64>;

/// `C ← alpha·A·B + beta·C` on raw column-major views.
///
/// # Safety
/// Pointers must address matrices of the given shapes and strides, and `c`
/// must not overlap `a` or `b`.
#[allow(clippy::too_many_arguments)]
pub(crate) unsafe fn gemm_raw(
    m: usize,
    k: usize,
    n: usize,
    alpha: Complex64,
    a: *const Complex64,
    rsa: isize,
    csa: isize,
    b: *const Complex64,
    rsb: isize,
    csb: isize,
    beta: Complex64,
    c: *mut Complex64,
    rsc: isize,
    csc: isize,
) {
    if m == 0 || n == 0 {
        return;
    }
    matrixmultiply::zgemm(
        matrixmultiply::CGemmOption::Standard,
        matrixmultiply::CGemmOption::Standard,
        m,
        k,
        n,
        [alpha.re, alpha.im],
        a as *const [f64; 2],
        rsa,
        csa,
        b as *const [f64; 2],
        rsb,
        csb,
        [beta.re, beta.im],
        c as *mut [f64; 2],
        rsc,
        csc,
    );
}

pub(crate) fn mul(a: &CMat, b: &CMat) -> CMat {
    assert_eq!(a.ncols(), b.nrows());
    let (m, k, n) = (a.nrows(), a.ncols(), b.ncols());
    let mut c = CMat::zeros(m, n);
    // SAFETY: freshly allocated column-major buffers with matching shapes.
    unsafe {
        gemm_raw(
            m,
            k,
            n,
            Complex64::new(1.0, 0.0),
            a.as_ptr(),
            1,
            m as isize,
            b.as_ptr(),
            1,
            k as isize,
            Complex64::new(0.0, 0.0),
            c.as_mut_ptr(),
            1,
            m as isize,
        );
    }
    c
}

pub(crate) fn inverse(a: CMat, what: &str) -> Result<CMat> {
    let n = a.nrows();
    let norm = one_norm(&a);
    let inv = a
        .lu()
        .try_inverse()
        .ok_or_else(|| Error::Solver(format!("{what}: singular {n}x{n} matrix")))?;
    let cond = norm * one_norm(&inv);
    if !cond.is_finite() || cond > 1e14 {
        return Err(Error::Solver(format!(
            "{what}: condition estimate {cond:e} for {n}x{n} matrix"
        )));
    }
    Ok(inv)
}

pub(crate) fn one_norm(a: &CMat) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gemm_matches_nalgebra() {
        let a = CMat::from_fn(5, 3, |i, j| Complex64::new(i as f64 - j as f64, 0.5 * j as f64));
        let b = CMat::from_fn(3, 4, |i, j| Complex64::new((i * j) as f64, 1.0 - i as f64));
        let diff = mul(&a, &b) - &a * &b;
        assert!(diff.iter().all(|z| z.norm() < 1e-13));
        let inv = inverse(CMat::identity(3, 3) * Complex64::new(0.0, 2.0), "test").unwrap();
        assert!((inv[(1, 1)] - Complex64::new(0.0, -0.5)).norm() < 1e-15);
        assert!(inverse(CMat::zeros(2, 2), "test").is_err());
    }
}
