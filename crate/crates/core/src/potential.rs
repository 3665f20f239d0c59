//! Potential descriptors: the two Darboux families, their Hermitian
//! projections, the static sech² well and tabulated data.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::io::{Read, Write};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::io::{read_numeric_csv, CsvWriter};
use crate::seed::{sech_tanh, seed_family1, seed_family2, SeedFunction};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, PartialEq)]
pub enum PotentialSpec {
    /// `V ≡ 0`.
    Free,
    /// Partner of `α + βx + cosh(μx) e^{iωt}`.
    Family1 { alpha: Complex64, beta: Complex64, mu: f64 },
    /// Partner of `iα + βx + cos(μx) e^{-iωt}`.
    Family2 { alpha: f64, beta: f64, mu: f64 },
    /// `Re V` of the inner potential.
    HermitianProjection(Box<PotentialSpec>),
    /// `-μ² sech²(μx)`.
    StaticSech2 { mu: f64 },
    Tabulated(TabulatedPotential),
}

impl PotentialSpec {
    pub fn family1(alpha: Complex64, beta: Complex64, mu: f64) -> Result<Self> {
        seed_family1(alpha, beta, mu)?;
        Ok(PotentialSpec::Family1 { alpha, beta, mu })
    }

    pub fn family2(alpha: f64, beta: f64, mu: f64) -> Result<Self> {
        seed_family2(alpha, beta, mu)?;
        Ok(PotentialSpec::Family2 { alpha, beta, mu })
    }

    pub fn sech2(mu: f64) -> Result<Self> {
        if !(mu > 0.0) || !mu.is_finite() {
            return Err(Error::Parameter(format!("mu must be positive, got {mu}")));
        }
        Ok(PotentialSpec::StaticSech2 { mu })
    }

    pub fn hermitian(inner: PotentialSpec) -> Self {
        PotentialSpec::HermitianProjection(Box::new(inner))
    }

    pub fn value(&self, x: f64, t: f64) -> Complex64 {
        match self {
            PotentialSpec::Free => ZERO,
            &PotentialSpec::Family1 { alpha, beta, mu } => {
                let e = Complex64::from_polar(1.0, 0.5 * mu * mu * t);
                family1_value(alpha + beta * x, beta, mu, x, e)
            }
            &PotentialSpec::Family2 { alpha, beta, mu } => {
                let z = Complex64::from_polar(1.0, -0.5 * mu * mu * t);
                let (sn, c) = (mu * x).sin_cos();
                family2_value(Complex64::new(beta * x, alpha), beta, mu, c, sn, z)
            }
            PotentialSpec::HermitianProjection(inner) => Complex64::new(inner.value(x, t).re, 0.0),
            &PotentialSpec::StaticSech2 { mu } => {
                let (s, _) = sech_tanh(mu * x);
                Complex64::new(-mu * mu * s * s, 0.0)
            }
            PotentialSpec::Tabulated(tab) => tab.value(x, t),
        }
    }

    /// Time period, `None` for static potentials.
    pub fn period(&self) -> Option<f64> {
        match self {
            PotentialSpec::Free | PotentialSpec::StaticSech2 { .. } => None,
            &PotentialSpec::Family1 { alpha, beta, mu } => {
                if alpha == ZERO && beta == ZERO {
                    None
                } else {
                    Some(4.0 * PI / (mu * mu))
                }
            }
            &PotentialSpec::Family2 { mu, .. } => Some(4.0 * PI / (mu * mu)),
            PotentialSpec::HermitianProjection(inner) => inner.period(),
            PotentialSpec::Tabulated(tab) => {
                if tab.n_t > 1 {
                    Some(tab.period)
                } else {
                    None
                }
            }
        }
    }

    /// Drive frequency `2π/T`, `None` for static potentials.
    pub fn omega(&self) -> Option<f64> {
        self.period().map(|t| 2.0 * PI / t)
    }

    /// Nominal drive frequency of the family, also defined in the static limit.
    pub fn family_omega(&self) -> Option<f64> {
        match self {
            PotentialSpec::Family1 { mu, .. }
            | PotentialSpec::Family2 { mu, .. }
            | PotentialSpec::StaticSech2 { mu } => Some(0.5 * mu * mu),
            PotentialSpec::HermitianProjection(inner) => inner.family_omega(),
            _ => self.omega(),
        }
    }

    pub fn is_static(&self) -> bool {
        self.period().is_none()
    }

    pub fn is_hermitian(&self) -> bool {
        match self {
            PotentialSpec::Free
            | PotentialSpec::StaticSech2 { .. }
            | PotentialSpec::HermitianProjection(_) => true,
            PotentialSpec::Family1 { alpha, beta, .. } => *alpha == ZERO && *beta == ZERO,
            PotentialSpec::Family2 { .. } => false,
            PotentialSpec::Tabulated(tab) => tab.samples.iter().all(|v| v.im == 0.0),
        }
    }

    /// Seed generating this potential by a Darboux transformation, if any.
    pub fn seed(&self) -> Option<SeedFunction> {
        match *self {
            PotentialSpec::Family1 { alpha, beta, mu } => {
                Some(SeedFunction::Family1 { alpha, beta, mu })
            }
            PotentialSpec::Family2 { alpha, beta, mu } => {
                Some(SeedFunction::Family2 { alpha, beta, mu })
            }
            PotentialSpec::StaticSech2 { mu } => Some(SeedFunction::Family1 {
                alpha: ZERO,
                beta: ZERO,
                mu,
            }),
            _ => None,
        }
    }

    /// Characteristic length of the well core.
    pub fn length_scale(&self) -> f64 {
        match self {
            PotentialSpec::Free => 1.0,
            PotentialSpec::Family1 { mu, .. }
            | PotentialSpec::Family2 { mu, .. }
            | PotentialSpec::StaticSech2 { mu } => 1.0 / mu,
            PotentialSpec::HermitianProjection(inner) => inner.length_scale(),
            PotentialSpec::Tabulated(tab) => tab.dx.max(1e-3) * 10.0,
        }
    }

    /// True when the potential is known to fall off faster than any power of `x`.
    pub fn is_short_range(&self) -> bool {
        match self {
            PotentialSpec::Family2 { .. } => false,
            PotentialSpec::HermitianProjection(inner) => inner.is_short_range(),
            _ => true,
        }
    }

    /// `max|V|` over the outer 5% of `[x_lo, x_hi]` divided by `max|V|` overall,
    /// sampled on an `n_x × n_t` lattice over one period.
    pub fn localization_ratio(&self, x_lo: f64, x_hi: f64, n_x: usize, n_t: usize) -> f64 {
        let period = self.period().unwrap_or(1.0);
        let n_t = if self.is_static() { 1 } else { n_t.max(1) };
        let band = 0.05 * (x_hi - x_lo) / 2.0;
        let mut inner: f64 = 0.0;
        let mut outer: f64 = 0.0;
        for i in 0..n_x {
            let x = x_lo + (x_hi - x_lo) * i as f64 / (n_x - 1).max(1) as f64;
            let edge = x < x_lo + band || x > x_hi - band;
            for j in 0..n_t {
                let v = self.value(x, period * j as f64 / n_t as f64).norm();
                inner = inner.max(v);
                if edge {
                    outer = outer.max(v);
                }
            }
        }
        if inner == 0.0 {
            0.0
        } else {
            outer / inner
        }
    }

    /// Flat `key=value` description; the inverse of [`PotentialSpec::from_keys`].
    ///
    /// Tabulated data cannot be described inline and is written as a reference
    /// to `table_path`.
    pub fn to_keys(&self, table_path: Option<&str>) -> Vec<(String, String)> {
        let mut out: Vec<(String, String)> = Vec::new();
        let mut push = |k: &str, v: String| out.push((k.to_string(), v));
        match self {
            PotentialSpec::Free => push("family", "free".into()),
            PotentialSpec::Family1 { alpha, beta, mu } => {
                push("family", "1".into());
                push("alpha_re", fmt(alpha.re));
                push("alpha_im", fmt(alpha.im));
                push("beta_re", fmt(beta.re));
                push("beta_im", fmt(beta.im));
                push("mu", fmt(*mu));
            }
            PotentialSpec::Family2 { alpha, beta, mu } => {
                push("family", "2".into());
                push("alpha_re", fmt(*alpha));
                push("alpha_im", "0".into());
                push("beta_re", fmt(*beta));
                push("beta_im", "0".into());
                push("mu", fmt(*mu));
            }
            PotentialSpec::StaticSech2 { mu } => {
                push("family", "sech2".into());
                push("mu", fmt(*mu));
            }
            PotentialSpec::HermitianProjection(inner) => {
                let inner_keys = inner.to_keys(table_path);
                push("family", "hermitian".into());
                for (k, v) in inner_keys {
                    if k == "family" {
                        push("inner", v);
                    } else {
                        push(&k, v);
                    }
                }
            }
            PotentialSpec::Tabulated(tab) => {
                push("family", "table".into());
                push("table", table_path.unwrap_or("potential.csv").to_string());
                push("period", fmt(tab.period));
            }
        }
        out
    }

    /// Builds a spec from `family`, `inner`, `alpha_re`, `alpha_im`, `beta_re`,
    /// `beta_im`, `mu`, `table`, `period` keys. Missing numeric keys default to
    /// 0 (`mu` to 1). Unknown keys are rejected. Tables are loaded through `load_table`.
    pub fn from_keys(
        keys: &BTreeMap<String, String>,
        load_table: &mut dyn FnMut(&str, f64) -> Result<TabulatedPotential>,
    ) -> Result<Self> {
        const KNOWN: [&str; 9] = [
            "family", "inner", "alpha_re", "alpha_im", "beta_re", "beta_im", "mu", "table", "period",
        ];
        for k in keys.keys() {
            if !KNOWN.contains(&k.as_str()) {
                return Err(Error::Parameter(format!("unknown potential key '{k}'")));
            }
        }
        let num = |k: &str, default: f64| -> Result<f64> {
            match keys.get(k) {
                None => Ok(default),
                Some(v) => v
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Parameter(format!("potential key {k} = {v:?}: {e}"))),
            }
        };
        let family = keys
            .get("family")
            .map(|s| s.trim().to_string())
            .unwrap_or_else(|| "1".into());
        let build = |family: &str,
                     load_table: &mut dyn FnMut(&str, f64) -> Result<TabulatedPotential>|
         -> Result<PotentialSpec> {
            match family {
                "free" => Ok(PotentialSpec::Free),
                "1" => PotentialSpec::family1(
                    Complex64::new(num("alpha_re", 0.0)?, num("alpha_im", 0.0)?),
                    Complex64::new(num("beta_re", 0.0)?, num("beta_im", 0.0)?),
                    num("mu", 1.0)?,
                ),
                "2" => {
                    if num("alpha_im", 0.0)? != 0.0 || num("beta_im", 0.0)? != 0.0 {
                        return Err(Error::Parameter(
                            "family 2 takes real alpha and beta".into(),
                        ));
                    }
                    PotentialSpec::family2(num("alpha_re", 0.0)?, num("beta_re", 0.0)?, num("mu", 1.0)?)
                }
                "sech2" => PotentialSpec::sech2(num("mu", 1.0)?),
                "table" => {
                    let path = keys
                        .get("table")
                        .ok_or_else(|| Error::Parameter("family=table needs a 'table' key".into()))?;
                    let period = num("period", 0.0)?;
                    Ok(PotentialSpec::Tabulated(load_table(path.trim(), period)?))
                }
                other => Err(Error::Parameter(format!("unknown potential family '{other}'"))),
            }
        };
        if family == "hermitian" {
            let inner = keys.get("inner").map(|s| s.trim()).unwrap_or("1");
            if inner == "hermitian" {
                return Err(Error::Parameter("nested hermitian projection".into()));
            }
            Ok(PotentialSpec::hermitian(build(inner, load_table)?))
        } else {
            build(&family, load_table)
        }
    }
}

fn fmt(v: f64) -> String {
    format!("{v}")
}

/// Family-1 potential written in terms of `sech`, `tanh`, free of cancellation
/// and overflow at large `|x|`. `a = α + βx`, `e = e^{iωt}`.
#[inline]
fn family1_value(a: Complex64, beta: Complex64, mu: f64, x: f64, e: Complex64) -> Complex64 {
    let (s, th) = sech_tanh(mu * x);
    family1_from_parts(a, beta, mu, s, th, e)
}

#[inline]
fn family1_from_parts(a: Complex64, beta: Complex64, mu: f64, s: f64, th: f64, e: Complex64) -> Complex64 {
    let d = a * s + e;
    let num = beta * beta * s + 2.0 * mu * th * beta * e - mu * mu * a * e - mu * mu * s * e * e;
    s * num / (d * d)
}

/// Family-2 potential, `a = iα + βx`, `z = e^{-iωt}`.
#[inline]
fn family2_value(a: Complex64, beta: f64, mu: f64, c: f64, sn: f64, z: Complex64) -> Complex64 {
    let u = a + c * z;
    let num = beta * beta + mu * mu * z * z + mu * mu * c * z * a - 2.0 * beta * mu * sn * z;
    num / (u * u)
}

/// Evaluates a potential on a fixed set of positions at many times, caching
/// everything that does not depend on `t`.
#[derive(Debug, Clone)]
pub struct PotentialSampler {
    kind: SamplerKind,
    xs: Vec<f64>,
}

#[derive(Debug, Clone)]
enum SamplerKind {
    Static(Vec<Complex64>),
    Family1 {
        beta: Complex64,
        mu: f64,
        parts: Vec<(Complex64, f64, f64)>,
        real_part: bool,
    },
    Family2 {
        beta: f64,
        mu: f64,
        parts: Vec<(Complex64, f64, f64)>,
        real_part: bool,
    },
    Generic(PotentialSpec),
}

impl PotentialSampler {
    pub fn new(spec: &PotentialSpec, xs: &[f64]) -> Self {
        let (inner, real_part) = match spec {
            PotentialSpec::HermitianProjection(inner) => (inner.as_ref(), true),
            other => (other, false),
        };
        let kind = if spec.is_static() {
            SamplerKind::Static(xs.iter().map(|&x| spec.value(x, 0.0)).collect())
        } else {
            match *inner {
                PotentialSpec::Family1 { alpha, beta, mu } => SamplerKind::Family1 {
                    beta,
                    mu,
                    parts: xs
                        .iter()
                        .map(|&x| {
                            let (s, th) = sech_tanh(mu * x);
                            (alpha + beta * x, s, th)
                        })
                        .collect(),
                    real_part,
                },
                PotentialSpec::Family2 { alpha, beta, mu } => SamplerKind::Family2 {
                    beta,
                    mu,
                    parts: xs
                        .iter()
                        .map(|&x| {
                            let (sn, c) = (mu * x).sin_cos();
                            (Complex64::new(beta * x, alpha), c, sn)
                        })
                        .collect(),
                    real_part,
                },
                _ => SamplerKind::Generic(spec.clone()),
            }
        };
        Self {
            kind,
            xs: xs.to_vec(),
        }
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn fill(&self, t: f64, out: &mut [Complex64]) {
        assert_eq!(out.len(), self.xs.len());
        match &self.kind {
            SamplerKind::Static(v) => out.copy_from_slice(v),
            SamplerKind::Family1 {
                beta,
                mu,
                parts,
                real_part,
            } => {
                let e = Complex64::from_polar(1.0, 0.5 * mu * mu * t);
                for (o, &(a, s, th)) in out.iter_mut().zip(parts) {
                    let v = family1_from_parts(a, *beta, *mu, s, th, e);
                    *o = if *real_part { Complex64::new(v.re, 0.0) } else { v };
                }
            }
            SamplerKind::Family2 {
                beta,
                mu,
                parts,
                real_part,
            } => {
                let z = Complex64::from_polar(1.0, -0.5 * mu * mu * t);
                for (o, &(a, c, sn)) in out.iter_mut().zip(parts) {
                    let v = family2_value(a, *beta, *mu, c, sn, z);
                    *o = if *real_part { Complex64::new(v.re, 0.0) } else { v };
                }
            }
            SamplerKind::Generic(spec) => {
                for (o, &x) in out.iter_mut().zip(&self.xs) {
                    *o = spec.value(x, t);
                }
            }
        }
    }
}

/// Potential samples `V(x_i, t_j)` on a uniform `x` lattice and a uniform
/// lattice `t_j = j T / n_t` over one period. Linear interpolation in `x`
/// (zero outside the lattice) and periodic linear interpolation in `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedPotential {
    pub x_min: f64,
    pub dx: f64,
    pub n_x: usize,
    pub period: f64,
    pub n_t: usize,
    /// Row-major by time: `samples[j * n_x + i]`.
    pub samples: Vec<Complex64>,
}

impl TabulatedPotential {
    pub fn new(
        x_min: f64,
        dx: f64,
        n_x: usize,
        period: f64,
        n_t: usize,
        samples: Vec<Complex64>,
    ) -> Result<Self> {
        if n_x < 2 || n_t < 1 || samples.len() != n_x * n_t {
            return Err(Error::Parameter(format!(
                "table of {} samples does not match {n_x} x {n_t}",
                samples.len()
            )));
        }
        if !(dx > 0.0) || (n_t > 1 && !(period > 0.0)) {
            return Err(Error::Parameter("table spacing and period must be positive".into()));
        }
        Ok(Self {
            x_min,
            dx,
            n_x,
            period,
            n_t,
            samples,
        })
    }

    /// Samples `spec` on `n_x` points from `x_min` with spacing `dx`, `n_t` times per period.
    pub fn sample(spec: &PotentialSpec, x_min: f64, dx: f64, n_x: usize, n_t: usize) -> Result<Self> {
        let period = spec.period().unwrap_or(1.0);
        let n_t = if spec.is_static() { 1 } else { n_t };
        let mut samples = Vec::with_capacity(n_x * n_t);
        for j in 0..n_t {
            let t = period * j as f64 / n_t as f64;
            for i in 0..n_x {
                samples.push(spec.value(x_min + dx * i as f64, t));
            }
        }
        Self::new(x_min, dx, n_x, period, n_t, samples)
    }

    fn at(&self, i: usize, j: usize) -> Complex64 {
        self.samples[j * self.n_x + i]
    }

    pub fn value(&self, x: f64, t: f64) -> Complex64 {
        let fx = (x - self.x_min) / self.dx;
        if !(fx >= 0.0) || fx > (self.n_x - 1) as f64 {
            return ZERO;
        }
        let i = (fx.floor() as usize).min(self.n_x - 2);
        let wx = fx - i as f64;
        let lerp_x = |j: usize| self.at(i, j) * (1.0 - wx) + self.at(i + 1, j) * wx;
        if self.n_t == 1 {
            return lerp_x(0);
        }
        let ft = (t / self.period).rem_euclid(1.0) * self.n_t as f64;
        let j = (ft.floor() as usize).min(self.n_t - 1);
        let wt = ft - j as f64;
        lerp_x(j) * (1.0 - wt) + lerp_x((j + 1) % self.n_t) * wt
    }

    /// CSV with columns `x, t, re_V, im_V`, time-major.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut csv = CsvWriter::new(out, &["x", "t", "re_V", "im_V"])?;
        for j in 0..self.n_t {
            let t = self.period * j as f64 / self.n_t as f64;
            for i in 0..self.n_x {
                let v = self.at(i, j);
                csv.floats(&[self.x_min + self.dx * i as f64, t, v.re, v.im])?;
            }
        }
        csv.finish()?;
        Ok(())
    }

    /// Reads the CSV layout of [`TabulatedPotential::write_csv`]. The rows
    /// must form a complete uniform lattice; `period` must be given for
    /// time-dependent tables since it cannot be inferred from the samples alone.
    pub fn read_csv<R: Read>(input: R, period: f64) -> Result<Self> {
        let rows = read_numeric_csv(input, &["x", "t", "re_V", "im_V"])?;
        let mut xs: Vec<f64> = rows.iter().map(|r| r[0]).collect();
        let mut ts: Vec<f64> = rows.iter().map(|r| r[1]).collect();
        for v in [&mut xs, &mut ts] {
            v.sort_by(|a, b| a.partial_cmp(b).expect("finite table coordinates"));
            v.dedup();
        }
        let (n_x, n_t) = (xs.len(), ts.len());
        if n_x < 2 || rows.len() != n_x * n_t {
            return Err(Error::Format(format!(
                "table rows ({}) do not form a full {n_x} x {n_t} lattice",
                rows.len()
            )));
        }
        let dx = (xs[n_x - 1] - xs[0]) / (n_x - 1) as f64;
        if n_t > 1 && !(period > 0.0) {
            return Err(Error::Parameter("time-dependent table needs period > 0".into()));
        }
        let mut samples = vec![ZERO; n_x * n_t];
        for r in &rows {
            let i = ((r[0] - xs[0]) / dx).round() as usize;
            let j = if n_t > 1 {
                ((r[1] - ts[0]) / period * n_t as f64).round() as usize
            } else {
                0
            };
            if i >= n_x || j >= n_t {
                return Err(Error::Format("table lattice is not uniform".into()));
            }
            samples[j * n_x + i] = Complex64::new(r[2], r[3]);
        }
        Self::new(xs[0], dx, n_x, if n_t > 1 { period } else { 1.0 }, n_t, samples)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn family1_point_value() {
        let v = PotentialSpec::family1(c(0.9, 0.0), c(0.0, 0.0), 1.0).unwrap();
        assert!((v.value(0.0, 0.0) - c(-1.0 / 1.9, 0.0)).norm() < 1e-15);
        assert_eq!(v.period(), Some(4.0 * PI));
        assert!(!v.is_hermitian());
    }

    #[test]
    fn static_limit() {
        let f = PotentialSpec::family1(c(0.0, 0.0), c(0.0, 0.0), 1.3).unwrap();
        let s = PotentialSpec::sech2(1.3).unwrap();
        assert!(f.is_static() && f.is_hermitian());
        for i in 0..400 {
            let x = -20.0 + 0.1 * i as f64;
            let t = 0.77 * i as f64;
            assert!((f.value(x, t) - s.value(x, t)).norm() < 1e-14);
        }
    }

    #[test]
    fn family_values_stay_finite_far_out() {
        let f1 = PotentialSpec::family1(c(0.9, 0.2), c(0.5, 0.1), 1.0).unwrap();
        let f2 = PotentialSpec::family2(2.0, 2.0, 1.0).unwrap();
        for &x in &[-1e4, -900.0, 900.0, 1e4] {
            for &t in &[0.0, 1.0, 5.0] {
                assert!(f1.value(x, t).norm() < 1e-200);
                let v = f2.value(x, t);
                assert!(v.norm().is_finite() && v.norm() < 2.0 / x.abs());
            }
        }
    }

    #[test]
    fn sampler_matches_direct_evaluation() {
        let xs: Vec<f64> = (0..300).map(|i| -30.0 + 0.2 * i as f64).collect();
        let specs = [
            PotentialSpec::family1(c(0.9, 0.0), c(0.1, 0.2), 1.0).unwrap(),
            PotentialSpec::family2(2.0, 2.0, 1.0).unwrap(),
            PotentialSpec::hermitian(PotentialSpec::family1(c(0.9, 0.0), c(0.0, 0.0), 1.0).unwrap()),
            PotentialSpec::hermitian(PotentialSpec::family2(2.0, 2.0, 1.0).unwrap()),
            PotentialSpec::sech2(1.0).unwrap(),
            PotentialSpec::Free,
        ];
        for spec in &specs {
            let sampler = PotentialSampler::new(spec, &xs);
            let mut out = vec![ZERO; xs.len()];
            for &t in &[0.0, 0.4, 3.3] {
                sampler.fill(t, &mut out);
                for (x, v) in xs.iter().zip(&out) {
                    assert!((spec.value(*x, t) - v).norm() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn keys_round_trip() {
        let specs = [
            PotentialSpec::family1(c(0.9, -0.1), c(0.25, 0.0), 1.5).unwrap(),
            PotentialSpec::family2(2.0, 2.0, 1.0).unwrap(),
            PotentialSpec::hermitian(PotentialSpec::family2(-3.0, 0.5, 0.7).unwrap()),
            PotentialSpec::sech2(2.0).unwrap(),
            PotentialSpec::Free,
        ];
        let mut no_table = |_: &str, _: f64| -> Result<TabulatedPotential> { unreachable!() };
        for spec in &specs {
            let keys: BTreeMap<String, String> = spec.to_keys(None).into_iter().collect();
            let back = PotentialSpec::from_keys(&keys, &mut no_table).unwrap();
            assert_eq!(&back, spec);
        }
        let mut keys = BTreeMap::new();
        keys.insert("family".to_string(), "2".to_string());
        keys.insert("alpha_re".to_string(), "0.5".to_string());
        assert!(matches!(
            PotentialSpec::from_keys(&keys, &mut no_table),
            Err(Error::SingularityRisk(_))
        ));
        keys.insert("colour".to_string(), "red".to_string());
        assert!(PotentialSpec::from_keys(&keys, &mut no_table).is_err());
    }

    #[test]
    fn table_round_trip_and_interpolation() {
        let spec = PotentialSpec::family1(c(0.9, 0.0), c(0.0, 0.0), 1.0).unwrap();
        let tab = TabulatedPotential::sample(&spec, -10.0, 0.25, 81, 16).unwrap();
        let mut buf = Vec::new();
        tab.write_csv(&mut buf).unwrap();
        let back = TabulatedPotential::read_csv(buf.as_slice(), 4.0 * PI).unwrap();
        assert_eq!(back.n_x, 81);
        assert_eq!(back.n_t, 16);
        for (a, b) in back.samples.iter().zip(&tab.samples) {
            assert!((a - b).norm() < 1e-15);
        }
        let t = 4.0 * PI * 3.0 / 16.0;
        assert!((tab.value(-10.0 + 0.25 * 40.0, t) - spec.value(0.0, t)).norm() < 1e-14);
        assert!((tab.value(-10.0 + 0.25 * 40.0, t + 4.0 * PI) - spec.value(0.0, t)).norm() < 1e-12);
        assert_eq!(tab.value(50.0, 0.0), ZERO);
        let spec = PotentialSpec::Tabulated(tab);
        assert_eq!(spec.period(), Some(4.0 * PI));
    }

    #[test]
    fn localization() {
        let f1 = PotentialSpec::family1(c(0.9, 0.0), c(0.0, 0.0), 1.0).unwrap();
        assert!(f1.localization_ratio(-512.0, 512.0, 4096, 16) < 1e-6);
        // The 1/x tail of family 2 is not localized by this measure.
        let f2 = PotentialSpec::family2(2.0, 2.0, 1.0).unwrap();
        assert!(f2.localization_ratio(-512.0, 512.0, 4096, 16) > 1e-6);
    }
}
