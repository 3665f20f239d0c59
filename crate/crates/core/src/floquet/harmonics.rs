//! Temporal Fourier decomposition `V(x,t) = Σₘ Vₘ(x) e^{imωt}`.

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::potential::{PotentialSampler, PotentialSpec};

/// Default number of time samples per period.
pub const DEFAULT_TIME_SAMPLES: usize = 512;
/// Resynthesis tolerance relative to `max|V|`.
pub const RESYNTHESIS_TOLERANCE: f64 = 1e-8;

const CHUNK: usize = 2048;

/// Harmonic profiles `Vₘ(xᵢ)` for `m ∈ [-M, M]` on arbitrary sample points.
#[derive(Debug, Clone)]
pub struct HarmonicPotential {
    xs: Vec<f64>,
    m_max: usize,
    omega: f64,
    n_time: usize,
    /// `profiles[m + M][i]`.
    profiles: Vec<Vec<Complex64>>,
    max_abs_v: f64,
    residual: f64,
}

impl HarmonicPotential {
    pub fn positions(&self) -> &[f64] {
        &self.xs
    }

    pub fn m_max(&self) -> usize {
        self.m_max
    }

    /// Drive frequency; 0 for static potentials.
    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn time_samples(&self) -> usize {
        self.n_time
    }

    pub fn profile(&self, m: i32) -> Option<&[Complex64]> {
        let idx = m + self.m_max as i32;
        if idx < 0 || idx as usize >= self.profiles.len() {
            None
        } else {
            Some(&self.profiles[idx as usize])
        }
    }

    /// Largest `|V(x,t)|` over the sampled lattice.
    pub fn max_abs_v(&self) -> f64 {
        self.max_abs_v
    }

    /// Bound on `max |Σ_{|m|≤M} Vₘ e^{imωt} - V|`: the largest discarded
    /// coefficient sum `Σ_{|m|>M} |Vₘ(x)|` over the sample points.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    pub fn resynthesize(&self, i: usize, t: f64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, prof) in self.profiles.iter().enumerate() {
            let m = k as f64 - self.m_max as f64;
            acc += prof[i] * Complex64::from_polar(1.0, m * self.omega * t);
        }
        acc
    }

    /// Harmonics whose profile exceeds `rel * max|V|` somewhere.
    pub fn support(&self, rel: f64) -> Vec<i32> {
        let floor = rel * self.max_abs_v;
        self.profiles
            .iter()
            .enumerate()
            .filter(|(_, p)| p.iter().any(|v| v.norm() > floor))
            .map(|(k, _)| k as i32 - self.m_max as i32)
            .collect()
    }

    /// Largest `|Vₘ(x)|` over `m` at sample `i`.
    pub fn max_harmonic_at(&self, i: usize) -> f64 {
        self.profiles.iter().map(|p| p[i].norm()).fold(0.0, f64::max)
    }
}

/// Decomposes `spec` on `xs` keeping `|m| ≤ M`, with `DEFAULT_TIME_SAMPLES`
/// (or more, if needed to resolve `M`) time samples per period. Fails with a
/// truncation error if the discarded harmonics exceed the resynthesis tolerance.
pub fn potential_harmonics(spec: &PotentialSpec, xs: &[f64], m_max: usize) -> Result<HarmonicPotential> {
    let n_time = time_samples_for(m_max);
    let h = decompose(spec, xs, Some(m_max), n_time)?;
    let tol = RESYNTHESIS_TOLERANCE * h.max_abs_v;
    if h.residual > tol {
        return Err(Error::HarmonicTruncation {
            m_max,
            residual: h.residual,
            tolerance: tol,
        });
    }
    Ok(h)
}

/// As [`potential_harmonics`] but raises `M` from `m_start` until the
/// resynthesis tolerance holds.
pub fn potential_harmonics_auto(spec: &PotentialSpec, xs: &[f64], m_start: usize) -> Result<HarmonicPotential> {
    if spec.is_static() {
        return decompose(spec, xs, Some(0), 1);
    }
    let mut n_time = time_samples_for(m_start);
    loop {
        let tails = tail_profile(spec, xs, n_time)?;
        let tol = RESYNTHESIS_TOLERANCE * tails.max_abs_v;
        let nyquist = n_time / 2;
        // Coefficients near Nyquist must be negligible, otherwise alias.
        let aliased = tails.tail[nyquist / 2];
        if aliased > 1e-3 * tol && n_time < 16384 {
            n_time *= 2;
            continue;
        }
        let m = (m_start..nyquist / 2).find(|&m| tails.tail[m] <= tol);
        match m {
            Some(m) => return decompose(spec, xs, Some(m), n_time),
            None => {
                return Err(Error::HarmonicTruncation {
                    m_max: nyquist / 2,
                    residual: tails.tail[nyquist / 2 - 1],
                    tolerance: tol,
                })
            }
        }
    }
}

fn time_samples_for(m_max: usize) -> usize {
    DEFAULT_TIME_SAMPLES.max((4 * m_max + 4).next_power_of_two())
}

struct Tails {
    /// `tail[M] = max_x Σ_{|m|>M} |Vₘ(x)|`.
    tail: Vec<f64>,
    max_abs_v: f64,
}

fn for_each_spectrum(
    spec: &PotentialSpec,
    xs: &[f64],
    n_time: usize,
    mut visit: impl FnMut(usize, &[Complex64], f64),
) -> Result<()> {
    let period = spec
        .period()
        .ok_or_else(|| Error::Parameter("time decomposition of a static potential".into()))?;
    let fft = FftPlanner::new().plan_fft_forward(n_time);
    let mut column = vec![Complex64::new(0.0, 0.0); n_time];
    let scale = 1.0 / n_time as f64;
    for (c, chunk) in xs.chunks(CHUNK).enumerate() {
        let sampler = PotentialSampler::new(spec, chunk);
        let mut table = vec![Complex64::new(0.0, 0.0); chunk.len() * n_time];
        let mut row = vec![Complex64::new(0.0, 0.0); chunk.len()];
        for j in 0..n_time {
            sampler.fill(period * j as f64 / n_time as f64, &mut row);
            for (i, v) in row.iter().enumerate() {
                table[i * n_time + j] = *v;
            }
        }
        for i in 0..chunk.len() {
            column.copy_from_slice(&table[i * n_time..(i + 1) * n_time]);
            let vmax = column.iter().map(|v| v.norm()).fold(0.0, f64::max);
            if !vmax.is_finite() {
                return Err(Error::Singular {
                    x: chunk[i],
                    t: 0.0,
                    magnitude: 0.0,
                });
            }
            fft.process(&mut column);
            for v in column.iter_mut() {
                *v *= scale;
            }
            visit(c * CHUNK + i, &column, vmax);
        }
    }
    Ok(())
}

/// `Vₘ = (1/n) Σ_j V(t_j) e^{-imωt_j}` is entry `m mod n` of the scaled
/// forward transform.
#[inline]
fn coeff(column: &[Complex64], m: i64) -> Complex64 {
    let n = column.len() as i64;
    column[m.rem_euclid(n) as usize]
}

fn tail_profile(spec: &PotentialSpec, xs: &[f64], n_time: usize) -> Result<Tails> {
    let half = n_time / 2;
    let mut tail = vec![0.0f64; half];
    let mut max_abs_v: f64 = 0.0;
    let mut local = vec![0.0f64; half];
    for_each_spectrum(spec, xs, n_time, |_, column, vmax| {
        max_abs_v = max_abs_v.max(vmax);
        // local[M] = Σ_{M<|m|<half} |Vₘ|
        let mut acc = 0.0;
        for m in (1..half).rev() {
            local[m - 1] = acc + coeff(column, m as i64).norm() + coeff(column, -(m as i64)).norm();
            acc = local[m - 1];
        }
        local[half - 1] = 0.0;
        for (t, l) in tail.iter_mut().zip(&local) {
            *t = t.max(*l);
        }
    })?;
    Ok(Tails { tail, max_abs_v })
}

fn decompose(spec: &PotentialSpec, xs: &[f64], m_max: Option<usize>, n_time: usize) -> Result<HarmonicPotential> {
    let omega = spec.omega().unwrap_or(0.0);
    if spec.is_static() {
        let profile: Vec<Complex64> = xs.iter().map(|&x| spec.value(x, 0.0)).collect();
        let max_abs_v = profile.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let m_max = m_max.unwrap_or(0);
        let mut profiles = vec![vec![Complex64::new(0.0, 0.0); xs.len()]; 2 * m_max + 1];
        profiles[m_max] = profile;
        return Ok(HarmonicPotential {
            xs: xs.to_vec(),
            m_max,
            omega,
            n_time: 1,
            profiles,
            max_abs_v,
            residual: 0.0,
        });
    }
    let m_max = m_max.unwrap_or(16);
    if 2 * m_max + 1 > n_time {
        return Err(Error::Parameter(format!(
            "{n_time} time samples cannot resolve {m_max} harmonics"
        )));
    }
    let half = n_time / 2;
    let mut profiles = vec![vec![Complex64::new(0.0, 0.0); xs.len()]; 2 * m_max + 1];
    let mut max_abs_v: f64 = 0.0;
    let mut residual: f64 = 0.0;
    for_each_spectrum(spec, xs, n_time, |i, column, vmax| {
        max_abs_v = max_abs_v.max(vmax);
        for m in -(m_max as i64)..=(m_max as i64) {
            profiles[(m + m_max as i64) as usize][i] = coeff(column, m);
        }
        let mut tail = 0.0;
        for m in (m_max + 1)..half {
            tail += coeff(column, m as i64).norm() + coeff(column, -(m as i64)).norm();
        }
        residual = residual.max(tail);
    })?;
    Ok(HarmonicPotential {
        xs: xs.to_vec(),
        m_max,
        omega,
        n_time,
        profiles,
        max_abs_v,
        residual,
    })
}

/// Time average `V₀(x)` of `spec` at a single point.
pub fn mean_potential(spec: &PotentialSpec, x: f64, n_time: usize) -> Complex64 {
    match spec.period() {
        None => spec.value(x, 0.0),
        Some(period) => {
            let sum: Complex64 = (0..n_time)
                .map(|j| spec.value(x, period * j as f64 / n_time as f64))
                .sum();
            sum / n_time as f64
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn xs() -> Vec<f64> {
        (0..401).map(|i| -10.0 + 0.05 * i as f64).collect()
    }

    #[test]
    fn static_well_has_a_single_harmonic() {
        let xs = xs();
        let s = PotentialSpec::sech2(1.0).unwrap();
        let h = potential_harmonics(&s, &xs, 16).unwrap();
        for (i, &x) in xs.iter().enumerate() {
            let expect = -1.0 / x.cosh().powi(2);
            assert!((h.profile(0).unwrap()[i] - c(expect, 0.0)).norm() < 1e-15);
        }
        for m in 1..=16 {
            assert!(h.profile(m).unwrap().iter().all(|v| v.norm() < 1e-12));
            assert!(h.profile(-m).unwrap().iter().all(|v| v.norm() < 1e-12));
        }
    }

    #[test]
    fn family1_static_limit_matches_sech2() {
        let xs = xs();
        let f = PotentialSpec::family1(c(0.0, 0.0), c(0.0, 0.0), 1.0).unwrap();
        let s = PotentialSpec::sech2(1.0).unwrap();
        let hf = potential_harmonics(&f, &xs, 16).unwrap();
        let hs = potential_harmonics(&s, &xs, 16).unwrap();
        for i in 0..xs.len() {
            assert!((hf.profile(0).unwrap()[i] - hs.profile(0).unwrap()[i]).norm() < 1e-14);
        }
    }

    #[test]
    fn family1_harmonics_are_one_sided_and_geometric() {
        let xs = vec![0.0];
        let f = PotentialSpec::family1(c(0.9, 0.0), c(0.0, 0.0), 1.0).unwrap();
        let h = potential_harmonics_auto(&f, &xs, 16).unwrap();
        assert!(h.residual() <= RESYNTHESIS_TOLERANCE * h.max_abs_v());
        for m in 1..=h.m_max() as i32 {
            assert!(h.profile(m).unwrap()[0].norm() < 1e-12);
        }
        // At x = 0, V = -e/(α + e) = -Σ_k (-α)^k e^{-ikωt}: ratio α.
        for m in 20..40 {
            let r = h.profile(-(m + 1)).unwrap()[0].norm() / h.profile(-m).unwrap()[0].norm();
            assert!((r - 0.9).abs() < 1e-9, "m = {m}: ratio {r}");
        }
        for &t in &[0.0, 1.1, 5.0, 2.0 * std::f64::consts::PI] {
            let err = (h.resynthesize(0, t) - f.value(0.0, t)).norm();
            assert!(err < RESYNTHESIS_TOLERANCE * h.max_abs_v());
        }
    }

    #[test]
    fn truncation_is_reported() {
        let f = PotentialSpec::family1(c(0.9, 0.0), c(0.0, 0.0), 1.0).unwrap();
        match potential_harmonics(&f, &[0.0, 0.5], 16) {
            Err(Error::HarmonicTruncation { m_max, residual, .. }) => {
                assert_eq!(m_max, 16);
                assert!(residual > 1e-3);
            }
            other => panic!("expected truncation error, got {other:?}"),
        }
    }

    #[test]
    fn family2_mean_is_the_inverse_square_tail() {
        let f = PotentialSpec::family2(2.0, 2.0, 1.0).unwrap();
        for &x in &[-300.0, 5.0, 700.0] {
            let expect = c(4.0, 0.0) / (c(2.0 * x, 2.0) * c(2.0 * x, 2.0));
            assert!((mean_potential(&f, x, 64) - expect).norm() < 1e-15);
        }
    }
}
