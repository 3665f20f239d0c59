//! Uniform periodic grid and its paired momentum samples.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Uniform periodic grid `x_i = x_min + i*dx`, `i < n_points`.
///
/// Momentum samples follow the standard FFT layout: `k_j = 2*pi*j/L` for
/// `j < n/2` and `2*pi*(j - n)/L` otherwise, so `k_j` lies in `[-pi/dx, pi/dx)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    x_min: f64,
    dx: f64,
    n_points: usize,
}

impl Grid1D {
    pub fn new(x_min: f64, dx: f64, n_points: usize) -> Result<Self> {
        if n_points < 16 || !n_points.is_power_of_two() {
            return Err(Error::Parameter(format!(
                "n_points must be a power of two >= 16, got {n_points}"
            )));
        }
        if !(dx > 0.0) || !dx.is_finite() {
            return Err(Error::Parameter(format!("dx must be positive, got {dx}")));
        }
        if !x_min.is_finite() {
            return Err(Error::Parameter("x_min must be finite".into()));
        }
        Ok(Self { x_min, dx, n_points })
    }

    /// Grid covering `[-half_length, half_length)`.
    pub fn symmetric(half_length: f64, n_points: usize) -> Result<Self> {
        if !(half_length > 0.0) {
            return Err(Error::Parameter("half_length must be positive".into()));
        }
        Self::new(-half_length, 2.0 * half_length / n_points as f64, n_points)
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn length(&self) -> f64 {
        self.n_points as f64 * self.dx
    }

    /// Exclusive upper end of the periodic domain.
    pub fn x_max(&self) -> f64 {
        self.x_min + self.length()
    }

    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx
    }

    pub fn positions(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.x(i)).collect()
    }

    pub fn dk(&self) -> f64 {
        2.0 * PI / self.length()
    }

    #[inline]
    pub fn k(&self, j: usize) -> f64 {
        let n = self.n_points;
        let idx = if j < n / 2 { j as f64 } else { j as f64 - n as f64 };
        idx * self.dk()
    }

    pub fn momenta(&self) -> Vec<f64> {
        (0..self.n_points).map(|j| self.k(j)).collect()
    }

    /// Nearest momentum sample to `p`, useful for grid-commensurate plane waves.
    pub fn commensurate_momentum(&self, p: f64) -> f64 {
        (p / self.dk()).round() * self.dk()
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.x_min && x < self.x_max()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_sizes() {
        assert!(Grid1D::new(0.0, 0.1, 8).is_err());
        assert!(Grid1D::new(0.0, 0.1, 100).is_err());
        assert!(Grid1D::new(0.0, 0.0, 64).is_err());
        assert!(Grid1D::new(0.0, -1.0, 64).is_err());
    }

    #[test]
    fn momentum_layout() {
        let g = Grid1D::symmetric(512.0, 8192).unwrap();
        assert_eq!(g.dx(), 0.125);
        let kmax = PI / g.dx();
        for k in g.momenta() {
            assert!(k >= -kmax - 1e-12 && k < kmax);
        }
        assert_eq!(g.k(0), 0.0);
        assert!((g.k(4096) + kmax).abs() < 1e-12);
    }
}
