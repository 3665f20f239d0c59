//! Complex wavefunction samples and the observables built on them.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::Grid1D;
use crate::spectral::Spectral;

/// Wavefunction samples on a [`Grid1D`] at a given time. Stored unnormalized.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveField {
    grid: Grid1D,
    values: Vec<Complex64>,
    time: f64,
}

impl WaveField {
    pub fn new(grid: Grid1D, values: Vec<Complex64>, time: f64) -> Result<Self> {
        if values.len() != grid.n_points() {
            return Err(Error::Parameter(format!(
                "field has {} samples, grid has {}",
                values.len(),
                grid.n_points()
            )));
        }
        if values.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Parameter("field contains non-finite samples".into()));
        }
        Ok(Self { grid, values, time })
    }

    pub fn zeros(grid: Grid1D, time: f64) -> Self {
        Self {
            grid,
            values: vec![Complex64::new(0.0, 0.0); grid.n_points()],
            time,
        }
    }

    /// Samples `f(x)` at every grid point.
    pub fn from_fn(grid: Grid1D, time: f64, mut f: impl FnMut(f64) -> Complex64) -> Result<Self> {
        let values = (0..grid.n_points()).map(|i| f(grid.x(i))).collect();
        Self::new(grid, values, time)
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub(crate) fn values_mut_vec(&mut self) -> &mut Vec<Complex64> {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub(crate) fn set_time(&mut self, t: f64) {
        self.time = t;
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// `dx * sum |psi_i|^2`.
    pub fn norm2(&self) -> f64 {
        self.grid.dx() * self.values.iter().map(|z| z.norm_sqr()).sum::<f64>()
    }

    /// Norm restricted to grid points with `x_lo <= x < x_hi`; zero for an empty window.
    pub fn windowed_norm(&self, x_lo: f64, x_hi: f64) -> f64 {
        if !(x_lo < x_hi) {
            return 0.0;
        }
        let g = &self.grid;
        let (lo, hi) = index_range(g, x_lo, x_hi);
        g.dx() * self.values[lo..hi].iter().map(|z| z.norm_sqr()).sum::<f64>()
    }

    /// Fraction of the norm inside the outer `fraction` of the domain (both ends together).
    pub fn edge_fraction(&self, fraction: f64) -> f64 {
        let total = self.norm2();
        if total == 0.0 {
            return 0.0;
        }
        let g = &self.grid;
        let band = 0.5 * fraction * g.length();
        let leak = self.windowed_norm(g.x_min(), g.x_min() + band)
            + self.windowed_norm(g.x_max() - band, g.x_max());
        leak / total
    }

    pub fn centroid(&self) -> Result<f64> {
        let mut weight = 0.0;
        let mut first = 0.0;
        for (i, z) in self.values.iter().enumerate() {
            let w = z.norm_sqr();
            weight += w;
            first += w * self.grid.x(i);
        }
        if weight == 0.0 {
            return Err(Error::UndefinedObservable(
                "centroid of a zero-norm field".into(),
            ));
        }
        Ok(first / weight)
    }

    /// Momentum-space power per bin, ordered by increasing `k`.
    ///
    /// Bin powers are `dx/n * |FFT(psi)_j|^2`, so their sum equals [`Self::norm2`].
    pub fn momentum_spectrum(&self) -> MomentumSpectrum {
        let mut spectral = Spectral::new(self.grid.n_points());
        self.momentum_spectrum_with(&mut spectral)
    }

    pub fn momentum_spectrum_with(&self, spectral: &mut Spectral) -> MomentumSpectrum {
        let n = self.grid.n_points();
        let mut data = self.values.clone();
        spectral.forward(&mut data);
        let scale = self.grid.dx() / n as f64;
        let half = n / 2;
        let mut k = Vec::with_capacity(n);
        let mut power = Vec::with_capacity(n);
        // FFT index order n/2..n holds negative momenta.
        for j in (half..n).chain(0..half) {
            k.push(self.grid.k(j));
            power.push(scale * data[j].norm_sqr());
        }
        MomentumSpectrum {
            dk: self.grid.dk(),
            k,
            power,
        }
    }

    /// Copy with samples outside `[x_lo, x_hi)` set to zero.
    pub fn masked(&self, x_lo: f64, x_hi: f64) -> WaveField {
        let mut out = self.clone();
        let (lo, hi) = if x_lo < x_hi {
            index_range(&self.grid, x_lo, x_hi)
        } else {
            (0, 0)
        };
        for (i, z) in out.values.iter_mut().enumerate() {
            if i < lo || i >= hi {
                *z = Complex64::new(0.0, 0.0);
            }
        }
        out
    }

    /// Maximum pointwise modulus of `self - other` over indices in `range`.
    pub fn max_abs_diff(&self, other: &WaveField) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

fn index_range(g: &Grid1D, x_lo: f64, x_hi: f64) -> (usize, usize) {
    let n = g.n_points() as f64;
    let lo = ((x_lo - g.x_min()) / g.dx()).ceil().clamp(0.0, n) as usize;
    let hi = ((x_hi - g.x_min()) / g.dx()).ceil().clamp(0.0, n) as usize;
    (lo, hi.max(lo))
}

/// Discrete momentum spectrum `(k_j, power_j)` sorted by `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentumSpectrum {
    pub dk: f64,
    pub k: Vec<f64>,
    pub power: Vec<f64>,
}

impl MomentumSpectrum {
    pub fn total(&self) -> f64 {
        self.power.iter().sum()
    }

    /// Power in bins with `k_lo <= k < k_hi`.
    pub fn band_power(&self, k_lo: f64, k_hi: f64) -> f64 {
        self.k
            .iter()
            .zip(&self.power)
            .filter(|(k, _)| **k >= k_lo && **k < k_hi)
            .map(|(_, p)| p)
            .sum()
    }

    pub fn peak(&self) -> (f64, f64) {
        self.k
            .iter()
            .zip(&self.power)
            .fold((f64::NAN, f64::NEG_INFINITY), |acc, (k, p)| {
                if *p > acc.1 {
                    (*k, *p)
                } else {
                    acc
                }
            })
    }
}

/// Gaussian packet `exp[-(x-x0)^2/w^2] exp(i p x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PacketParams {
    pub width: f64,
    pub center: f64,
    pub momentum: f64,
}

impl PacketParams {
    pub fn new(width: f64, center: f64, momentum: f64) -> Result<Self> {
        if !(width > 0.0) || !width.is_finite() {
            return Err(Error::Parameter(format!("packet width must be positive, got {width}")));
        }
        if !center.is_finite() || !momentum.is_finite() {
            return Err(Error::Parameter("packet center and momentum must be finite".into()));
        }
        Ok(Self {
            width,
            center,
            momentum,
        })
    }

    /// Continuum norm `w * sqrt(pi/2)` of the unnormalized packet.
    pub fn norm2(&self) -> f64 {
        self.width * (std::f64::consts::PI / 2.0).sqrt()
    }

    /// Normalized momentum density `w/sqrt(2 pi) * exp(-(k-p)^2 w^2 / 2)`.
    pub fn momentum_density(&self, k: f64) -> f64 {
        let w = self.width;
        let d = k - self.momentum;
        w / (2.0 * std::f64::consts::PI).sqrt() * (-0.5 * d * d * w * w).exp()
    }

    pub fn value(&self, x: f64) -> Complex64 {
        let d = (x - self.center) / self.width;
        Complex64::from_polar((-d * d).exp(), self.momentum * x)
    }
}

/// Samples the packet at `t = 0`.
pub fn make_gaussian(grid: &Grid1D, params: &PacketParams) -> Result<WaveField> {
    let lo = params.center - 3.0 * params.width;
    let hi = params.center + 3.0 * params.width;
    if lo < grid.x_min() || hi > grid.x_max() {
        return Err(Error::Domain(format!(
            "packet support [{lo}, {hi}] exceeds grid domain [{}, {})",
            grid.x_min(),
            grid.x_max()
        )));
    }
    WaveField::from_fn(*grid, 0.0, |x| params.value(x))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn figure_grid() -> Grid1D {
        Grid1D::symmetric(512.0, 8192).unwrap()
    }

    #[test]
    fn gaussian_samples() {
        let g = Grid1D::symmetric(8.0, 64).unwrap();
        let f = make_gaussian(&g, &PacketParams::new(1.0, 0.0, 0.0).unwrap()).unwrap();
        // x = 0 sits at index 32, x = 1 at index 36.
        assert!((f.values()[32] - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        assert!((f.values()[36].re - (-1.0f64).exp()).abs() < 1e-15);

        let g = figure_grid();
        let p = PacketParams::new(15.0, -120.0, 1.0).unwrap();
        let f = make_gaussian(&g, &p).unwrap();
        let i = ((-120.0 - g.x_min()) / g.dx()).round() as usize;
        assert!((f.values()[i].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn packet_outside_domain_is_rejected() {
        let g = Grid1D::symmetric(50.0, 256).unwrap();
        let p = PacketParams::new(15.0, -120.0, 1.0).unwrap();
        assert!(matches!(make_gaussian(&g, &p), Err(Error::Domain(_))));
        assert!(PacketParams::new(0.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn norms() {
        let g = figure_grid();
        assert_eq!(WaveField::zeros(g, 0.0).norm2(), 0.0);
        let ones = WaveField::from_fn(g, 0.0, |_| Complex64::from_polar(1.0, 0.3)).unwrap();
        assert!((ones.norm2() - g.length()).abs() < 1e-9);
        let p = PacketParams::new(15.0, -120.0, 1.0).unwrap();
        let f = make_gaussian(&g, &p).unwrap();
        assert!((f.norm2() / p.norm2() - 1.0).abs() < 1e-10);
        assert!((f.windowed_norm(g.x_min(), g.x_max()) - f.norm2()).abs() < 1e-12);
        assert!(f.windowed_norm(0.0, 512.0) < 1e-12);
        assert_eq!(f.windowed_norm(3.0, 3.0), 0.0);
    }

    #[test]
    fn half_windows_of_symmetric_field() {
        let g = figure_grid();
        // Symmetric about the domain midpoint x = -dx/2 would not be exact; use
        // a field symmetric about x = 0 and split at x = 0 including the x = 0
        // sample weight split explicitly.
        let f = WaveField::from_fn(g, 0.0, |x| {
            Complex64::new((-(x - 100.0).powi(2) / 50.0).exp() + (-(x + 100.0).powi(2) / 50.0).exp(), 0.0)
        })
        .unwrap();
        let left = f.windowed_norm(g.x_min(), 0.0);
        let right = f.windowed_norm(0.0, g.x_max());
        assert!((left - f.norm2() / 2.0).abs() < 1e-10 * f.norm2());
        assert!((right - f.norm2() / 2.0).abs() < 1e-10 * f.norm2());
    }

    #[test]
    fn centroids() {
        let g = figure_grid();
        let p = PacketParams::new(15.0, -120.0, 1.0).unwrap();
        let f = make_gaussian(&g, &p).unwrap();
        assert!((f.centroid().unwrap() + 120.0).abs() < 1e-9);

        let twins = WaveField::from_fn(g, 0.0, |x| {
            Complex64::new((-(x - 40.0).powi(2)).exp() + (-(x + 40.0).powi(2)).exp(), 0.0)
        })
        .unwrap();
        assert!(twins.centroid().unwrap().abs() < 1e-9);

        let mut spike = WaveField::zeros(g, 0.0);
        let i = ((3.0 - g.x_min()) / g.dx()).round() as usize;
        spike.values_mut_vec()[i] = Complex64::new(0.0, 2.0);
        assert_eq!(spike.centroid().unwrap(), 3.0);

        assert!(matches!(
            WaveField::zeros(g, 0.0).centroid(),
            Err(Error::UndefinedObservable(_))
        ));
    }

    #[test]
    fn spectrum_of_plane_waves() {
        let g = figure_grid();
        let p = g.commensurate_momentum(1.0);
        let f = WaveField::from_fn(g, 0.0, |x| Complex64::from_polar(1.0, p * x)).unwrap();
        let s = f.momentum_spectrum();
        let total = s.total();
        assert!((total - f.norm2()).abs() < 1e-10 * total);
        let nonzero: Vec<f64> = s
            .k
            .iter()
            .zip(&s.power)
            .filter(|(_, w)| **w > 1e-12 * total)
            .map(|(k, _)| *k)
            .collect();
        assert_eq!(nonzero.len(), 1);
        assert!((nonzero[0] - p).abs() < 1e-12);

        let q = g.commensurate_momentum(-2.5);
        let two = WaveField::from_fn(g, 0.0, |x| {
            Complex64::from_polar(1.0, p * x) + Complex64::from_polar(0.5, q * x)
        })
        .unwrap();
        let s = two.momentum_spectrum();
        let count = s.power.iter().filter(|w| **w > 1e-12 * s.total()).count();
        assert_eq!(count, 2);
    }

    #[test]
    fn packet_spectrum_is_symmetric_about_its_momentum() {
        let g = figure_grid();
        let p0 = g.commensurate_momentum(1.0);
        let f = make_gaussian(&g, &PacketParams::new(15.0, -120.0, p0).unwrap()).unwrap();
        let s = f.momentum_spectrum();
        let (kpk, _) = s.peak();
        assert!((kpk - p0).abs() < 1e-12);
        let j0 = s.k.iter().position(|k| (k - p0).abs() < 1e-12).unwrap();
        let total = s.total();
        for d in 1..60 {
            assert!((s.power[j0 + d] - s.power[j0 - d]).abs() < 1e-8 * total);
        }
    }
}
