//! Exact free-particle solutions used as Darboux seeds.

use num_complex::Complex64;

use crate::error::{Error, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// `u` and its analytic derivatives at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeedValue {
    pub u: Complex64,
    pub ux: Complex64,
    pub uxx: Complex64,
    pub ut: Complex64,
}

/// A solution of `i u_t + ½ u_xx = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SeedFunction {
    /// `α + βx + cosh(μx) e^{iωt}`.
    Family1 { alpha: Complex64, beta: Complex64, mu: f64 },
    /// `iα + βx + cos(μx) e^{-iωt}`.
    Family2 { alpha: f64, beta: f64, mu: f64 },
    /// `e^{ipx - ip²t/2}`.
    PlaneWave { p: f64 },
}

pub fn seed_family1(alpha: Complex64, beta: Complex64, mu: f64) -> Result<SeedFunction> {
    check_mu(mu)?;
    if !(alpha.re.is_finite() && alpha.im.is_finite() && beta.re.is_finite() && beta.im.is_finite()) {
        return Err(Error::Parameter("alpha and beta must be finite".into()));
    }
    Ok(SeedFunction::Family1 { alpha, beta, mu })
}

pub fn seed_family2(alpha: f64, beta: f64, mu: f64) -> Result<SeedFunction> {
    check_mu(mu)?;
    if !beta.is_finite() {
        return Err(Error::Parameter("beta must be finite".into()));
    }
    if !(alpha.abs() > 1.0) || !alpha.is_finite() {
        return Err(Error::SingularityRisk(format!(
            "family 2 needs |alpha| > 1 so that u cannot vanish, got alpha = {alpha}"
        )));
    }
    Ok(SeedFunction::Family2 { alpha, beta, mu })
}

fn check_mu(mu: f64) -> Result<()> {
    if !(mu > 0.0) || !mu.is_finite() {
        return Err(Error::Parameter(format!("mu must be positive, got {mu}")));
    }
    Ok(())
}

impl SeedFunction {
    pub fn eval(&self, x: f64, t: f64) -> SeedValue {
        match *self {
            SeedFunction::Family1 { alpha, beta, mu } => {
                let e = Complex64::from_polar(1.0, 0.5 * mu * mu * t);
                let ch = (mu * x).cosh();
                let sh = (mu * x).sinh();
                SeedValue {
                    u: alpha + beta * x + ch * e,
                    ux: beta + mu * sh * e,
                    uxx: mu * mu * ch * e,
                    ut: I * (0.5 * mu * mu) * ch * e,
                }
            }
            SeedFunction::Family2 { alpha, beta, mu } => {
                let z = Complex64::from_polar(1.0, -0.5 * mu * mu * t);
                let (sn, c) = (mu * x).sin_cos();
                SeedValue {
                    u: Complex64::new(beta * x, alpha) + c * z,
                    ux: beta - mu * sn * z,
                    uxx: -mu * mu * c * z,
                    ut: -I * (0.5 * mu * mu) * c * z,
                }
            }
            SeedFunction::PlaneWave { p } => {
                let u = Complex64::from_polar(1.0, p * x - 0.5 * p * p * t);
                SeedValue {
                    u,
                    ux: I * p * u,
                    uxx: -p * p * u,
                    ut: -I * (0.5 * p * p) * u,
                }
            }
        }
    }

    /// `u_x / u`, evaluated without overflow for large `|x|`.
    pub fn log_derivative(&self, x: f64, t: f64) -> Complex64 {
        match *self {
            SeedFunction::Family1 { alpha, beta, mu } => {
                let e = Complex64::from_polar(1.0, 0.5 * mu * mu * t);
                let (s, th) = sech_tanh(mu * x);
                (beta * s + mu * th * e) / ((alpha + beta * x) * s + e)
            }
            SeedFunction::PlaneWave { p } => I * p,
            _ => {
                let v = self.eval(x, t);
                v.ux / v.u
            }
        }
    }

    /// Limits of `u_x/u` as `x → -∞` and `x → +∞`, when they exist.
    pub fn asymptotic_log_derivative(&self) -> Option<(Complex64, Complex64)> {
        match *self {
            SeedFunction::Family1 { mu, .. } => {
                Some((Complex64::new(-mu, 0.0), Complex64::new(mu, 0.0)))
            }
            SeedFunction::Family2 { beta, .. } if beta != 0.0 => {
                Some((Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)))
            }
            SeedFunction::Family2 { .. } => None,
            SeedFunction::PlaneWave { p } => Some((I * p, I * p)),
        }
    }

    /// Drive frequency `ω = μ²/2`; `None` for the plane wave, whose partner is static.
    pub fn omega(&self) -> Option<f64> {
        match *self {
            SeedFunction::Family1 { mu, .. } | SeedFunction::Family2 { mu, .. } => {
                Some(0.5 * mu * mu)
            }
            SeedFunction::PlaneWave { .. } => None,
        }
    }

    /// `|i u_t + ½ u_xx|`, zero up to rounding for a valid seed.
    pub fn free_residual(&self, x: f64, t: f64) -> f64 {
        let v = self.eval(x, t);
        (I * v.ut + 0.5 * v.uxx).norm()
    }
}

/// `(sech y, tanh y)` without overflow.
pub(crate) fn sech_tanh(y: f64) -> (f64, f64) {
    let e = (-2.0 * y.abs()).exp();
    let s = 2.0 * (-y.abs()).exp() / (1.0 + e);
    (s, y.tanh())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn family1_values() {
        let s = seed_family1(c(0.0, 0.0), c(0.0, 0.0), 1.0).unwrap();
        assert!((s.eval(0.0, 0.0).u - c(1.0, 0.0)).norm() < 1e-15);
        let s = seed_family1(c(0.9, 0.0), c(0.0, 0.0), 1.0).unwrap();
        assert!((s.eval(0.0, 0.0).u - c(1.9, 0.0)).norm() < 1e-15);
        assert!((s.eval(0.0, PI).u - c(0.9, 1.0)).norm() < 1e-15);
        assert_eq!(s.omega(), Some(0.5));
        assert!(seed_family1(c(0.9, 0.0), c(0.0, 0.0), 0.0).is_err());
    }

    #[test]
    fn family2_values() {
        let s = seed_family2(2.0, 2.0, 1.0).unwrap();
        assert!((s.eval(0.0, 0.0).u - c(1.0, 2.0)).norm() < 1e-15);
        let s = seed_family2(2.0, 0.0, 1.0).unwrap();
        assert!((s.eval(PI, 0.0).u - c(-1.0, 2.0)).norm() < 1e-15);
        for i in 0..200 {
            let x = -50.0 + 0.5 * i as f64;
            let t = 0.37 * i as f64;
            assert!(s.eval(x, t).u.norm() >= 1.0 - 1e-12);
        }
        assert!(matches!(
            seed_family2(1.0, 2.0, 1.0),
            Err(Error::SingularityRisk(_))
        ));
        assert!(seed_family2(2.0, 2.0, -1.0).is_err());
    }

    #[test]
    fn log_derivative_is_stable_far_out() {
        let s = seed_family1(c(0.9, 0.1), c(0.3, -0.2), 1.0).unwrap();
        for &x in &[-2.0, -0.5, 0.0, 1.5, 3.0] {
            let v = s.eval(x, 0.7);
            assert!((s.log_derivative(x, 0.7) - v.ux / v.u).norm() < 1e-13);
        }
        let far = s.log_derivative(800.0, 0.7);
        assert!((far - c(1.0, 0.0)).norm() < 1e-12);
        let far = s.log_derivative(-800.0, 0.7);
        assert!((far - c(-1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn sech_tanh_far_out() {
        let (s, t) = sech_tanh(800.0);
        assert!(s >= 0.0 && s < 1e-300);
        assert_eq!(t, 1.0);
        let (s, _) = sech_tanh(0.3);
        assert!((s - 1.0 / 0.3f64.cosh()).abs() < 1e-15);
    }
}
