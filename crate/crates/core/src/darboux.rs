//! First-order Darboux transformation of the free particle with `L(t) = 1`:
//! partner potentials, transformed scattering states and their analytic
//! scattering data.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::potential::PotentialSpec;
use crate::seed::SeedFunction;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Incidence side of a scattering state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn sign(self) -> f64 {
        match self {
            Side::Left => 1.0,
            Side::Right => -1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Side::Left => "left",
            Side::Right => "right",
        }
    }
}

/// `V = -∂ₓₓ log u` evaluated from the seed's analytic derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DarbouxPotential {
    seed: SeedFunction,
}

pub fn darboux_potential(seed: SeedFunction) -> DarbouxPotential {
    DarbouxPotential { seed }
}

impl DarbouxPotential {
    pub const SINGULAR_THRESHOLD: f64 = 1e-12;

    pub fn seed(&self) -> &SeedFunction {
        &self.seed
    }

    pub fn value(&self, x: f64, t: f64) -> Result<Complex64> {
        let v = self.seed.eval(x, t);
        let m = v.u.norm();
        if !(m >= Self::SINGULAR_THRESHOLD) {
            return Err(Error::Singular { x, t, magnitude: m });
        }
        Ok(-(v.u * v.uxx - v.ux * v.ux) / (v.u * v.u))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum StateKind {
    Plane,
    Darboux {
        seed: SeedFunction,
        prefactor: Complex64,
    },
}

/// Exact scattering state `ψ(x,t)` at momentum `p > 0`, energy `p²/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticState {
    kind: StateKind,
    side: Side,
    p: f64,
}

impl AnalyticState {
    /// Free plane wave `e^{±ipx - iEt}`.
    pub fn plane_wave(side: Side, p: f64) -> Result<Self> {
        check_momentum(p)?;
        Ok(Self {
            kind: StateKind::Plane,
            side,
            p,
        })
    }

    /// The exact state for `spec`, if one is known.
    pub fn for_spec(spec: &PotentialSpec, side: Side, p: f64) -> Result<Self> {
        match spec {
            PotentialSpec::Free => Self::plane_wave(side, p),
            other => match other.seed() {
                Some(seed) => darboux_state(side, p, seed),
                None => Err(Error::NoOracle(format!(
                    "no closed-form scattering state for {}",
                    describe(other)
                ))),
            },
        }
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn momentum(&self) -> f64 {
        self.p
    }

    pub fn energy(&self) -> f64 {
        0.5 * self.p * self.p
    }

    pub fn value(&self, x: f64, t: f64) -> Complex64 {
        let k = self.side.sign() * self.p;
        let phase = Complex64::from_polar(1.0, k * x - self.energy() * t);
        match self.kind {
            StateKind::Plane => phase,
            StateKind::Darboux { seed, prefactor } => {
                prefactor * (I * k - seed.log_derivative(x, t)) * phase
            }
        }
    }
}

fn check_momentum(p: f64) -> Result<()> {
    if !(p > 0.0) || !p.is_finite() {
        return Err(Error::Parameter(format!("momentum must be positive, got {p}")));
    }
    Ok(())
}

/// `ψ = c (∂ₓ - uₓ/u) e^{±ipx - iEt}`, with `c` chosen so that the incoming
/// wave has unit amplitude.
pub fn darboux_state(side: Side, p: f64, seed: SeedFunction) -> Result<AnalyticState> {
    check_momentum(p)?;
    if let Some((x, t, magnitude)) = quick_zero_scan(&seed) {
        return Err(Error::Singular { x, t, magnitude });
    }
    let (lam_minus, lam_plus) = seed
        .asymptotic_log_derivative()
        .unwrap_or((Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)));
    let k = side.sign() * p;
    let incoming = match side {
        Side::Left => I * k - lam_minus,
        Side::Right => I * k - lam_plus,
    };
    if incoming.norm() < 1e-14 {
        return Err(Error::Parameter(format!(
            "the transformation annihilates the incoming wave at p = {p}"
        )));
    }
    Ok(AnalyticState {
        kind: StateKind::Darboux {
            seed,
            prefactor: 1.0 / incoming,
        },
        side,
        p,
    })
}

/// Coarse scan of the core region for zeros of `u`.
fn quick_zero_scan(seed: &SeedFunction) -> Option<(f64, f64, f64)> {
    let (mu, period) = match *seed {
        SeedFunction::Family1 { mu, .. } => (mu, 4.0 * PI / (mu * mu)),
        _ => return None,
    };
    let r = scan_seed(seed, -40.0 / mu, 40.0 / mu, period, 2048, 64);
    (r.min_abs_u < NONSINGULAR_THRESHOLD).then_some((r.x, r.t, r.min_abs_u))
}

/// `t₀ = (ip - μ)/(ip + μ)` with `p = √(2E)`.
pub fn transmission_family1(energy: f64, mu: f64) -> Result<Complex64> {
    if !(energy > 0.0) || !energy.is_finite() {
        return Err(Error::Parameter(format!("energy must be positive, got {energy}")));
    }
    if !(mu > 0.0) {
        return Err(Error::Parameter(format!("mu must be positive, got {mu}")));
    }
    let p = (2.0 * energy).sqrt();
    Ok((I * p - mu) / (I * p + mu))
}

/// Phase time `Δτ = -2μ / (p(μ² + p²))`.
pub fn group_delay_family1(p: f64, mu: f64) -> Result<f64> {
    check_momentum(p)?;
    if !(mu > 0.0) {
        return Err(Error::Parameter(format!("mu must be positive, got {mu}")));
    }
    Ok(-2.0 * mu / (p * (mu * mu + p * p)))
}

pub const NONSINGULAR_THRESHOLD: f64 = 1e-6;

/// Outcome of [`check_nonsingular`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NonsingularReport {
    /// Smallest `|u|` found by the lattice scan and local refinement.
    pub min_abs_u: f64,
    pub x: f64,
    pub t: f64,
    /// Exact minimum over the real line when a closed criterion applies.
    pub analytic_min: Option<f64>,
    pub passed: bool,
}

/// Scans `|u|` on an `n_x × n_t` lattice over `[x_lo, x_hi] × [0, T)` and
/// refines the deepest local minima by successive local lattices.
pub fn check_nonsingular(
    spec: &PotentialSpec,
    x_lo: f64,
    x_hi: f64,
    n_x: usize,
    n_t: usize,
) -> Result<NonsingularReport> {
    let seed = match spec {
        PotentialSpec::Family1 { .. } | PotentialSpec::Family2 { .. } | PotentialSpec::StaticSech2 { .. } => {
            spec.seed().expect("family specs carry a seed")
        }
        PotentialSpec::HermitianProjection(inner) => {
            return check_nonsingular(inner, x_lo, x_hi, n_x, n_t);
        }
        other => {
            return Err(Error::UnsupportedVariant(format!(
                "nonsingularity check needs a Darboux family, got {}",
                describe(other)
            )))
        }
    };
    if !(x_lo < x_hi) || n_x < 2 || n_t < 1 {
        return Err(Error::Parameter("empty scan lattice".into()));
    }
    let omega = seed.omega().expect("family seeds oscillate");
    let period = 2.0 * PI / omega;
    let scan = scan_seed(&seed, x_lo, x_hi, period, n_x, n_t);
    let analytic_min = analytic_minimum(&seed);
    Ok(NonsingularReport {
        min_abs_u: scan.min_abs_u,
        x: scan.x,
        t: scan.t,
        analytic_min,
        passed: scan.min_abs_u > NONSINGULAR_THRESHOLD,
    })
}

fn analytic_minimum(seed: &SeedFunction) -> Option<f64> {
    match *seed {
        // |α + cosh(μx) e^{iωt}| is smallest at the phase opposite to α, where
        // it equals |cosh(μx) - |α||.
        SeedFunction::Family1 { alpha, beta, .. } if beta.norm() == 0.0 => {
            Some((1.0 - alpha.norm()).max(0.0))
        }
        _ => None,
    }
}

struct Scan {
    min_abs_u: f64,
    x: f64,
    t: f64,
}

fn scan_seed(seed: &SeedFunction, x_lo: f64, x_hi: f64, period: f64, n_x: usize, n_t: usize) -> Scan {
    let xs: Vec<f64> = (0..n_x)
        .map(|i| x_lo + (x_hi - x_lo) * i as f64 / (n_x - 1) as f64)
        .collect();
    let ts: Vec<f64> = (0..n_t).map(|j| period * j as f64 / n_t as f64).collect();
    let mut grid = vec![0.0; n_x * n_t];
    for (i, &x) in xs.iter().enumerate() {
        for (j, &t) in ts.iter().enumerate() {
            grid[i * n_t + j] = seed.eval(x, t).u.norm();
        }
    }
    let at = |i: usize, j: usize| grid[i * n_t + j];
    // Local minima, periodic in t.
    let mut minima: Vec<(f64, usize, usize)> = Vec::new();
    for i in 0..n_x {
        for j in 0..n_t {
            let v = at(i, j);
            let jp = (j + 1) % n_t;
            let jm = (j + n_t - 1) % n_t;
            let is_min = (i == 0 || v <= at(i - 1, j))
                && (i + 1 == n_x || v <= at(i + 1, j))
                && v <= at(i, jp)
                && v <= at(i, jm);
            if is_min {
                minima.push((v, i, j));
            }
        }
    }
    minima.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
    let mut best = Scan {
        min_abs_u: f64::INFINITY,
        x: xs[0],
        t: 0.0,
    };
    for &(v, i, j) in &minima {
        if v < best.min_abs_u {
            best = Scan {
                min_abs_u: v,
                x: xs[i],
                t: ts[j],
            };
        }
    }
    let hx = (x_hi - x_lo) / (n_x - 1) as f64;
    let ht = period / n_t as f64;
    for &(_, i, j) in minima.iter().take(16) {
        let (x, t, m) = zoom_polish(seed, xs[i], ts[j], hx, ht, x_lo, x_hi);
        if m < best.min_abs_u {
            best = Scan {
                min_abs_u: m,
                x,
                t: t.rem_euclid(period),
            };
        }
    }
    best
}

/// Repeated 9×9 lattice zoom around the current best point, shrinking the
/// cell fourfold per round.
fn zoom_polish(
    seed: &SeedFunction,
    x0: f64,
    t0: f64,
    hx: f64,
    ht: f64,
    x_lo: f64,
    x_hi: f64,
) -> (f64, f64, f64) {
    let (mut x, mut t) = (x0, t0);
    let mut m = seed.eval(x, t).u.norm();
    let (mut hx, mut ht) = (hx, ht);
    for _ in 0..30 {
        let (cx, ct) = (x, t);
        for a in -4..=4 {
            for b in -4..=4 {
                let xn = (cx + a as f64 * hx / 4.0).clamp(x_lo, x_hi);
                let tn = ct + b as f64 * ht / 4.0;
                let mn = seed.eval(xn, tn).u.norm();
                if mn < m {
                    (x, t, m) = (xn, tn, mn);
                }
            }
        }
        hx /= 4.0;
        ht /= 4.0;
    }
    (x, t, m)
}

/// `Re V(x,t) + 0i`.
pub fn hermitian_projection(spec: &PotentialSpec) -> PotentialSpec {
    match spec {
        PotentialSpec::HermitianProjection(_) => spec.clone(),
        other => PotentialSpec::hermitian(other.clone()),
    }
}

/// `|i ψ_t + ½ ψ_xx - V ψ|` with sixth-order central differences of step
/// `hx` in space and `ht` in time.
pub fn schrodinger_residual(
    psi: impl Fn(f64, f64) -> Complex64,
    v: Complex64,
    x: f64,
    t: f64,
    hx: f64,
    ht: f64,
) -> (f64, Complex64) {
    const D1: [f64; 3] = [3.0 / 4.0, -3.0 / 20.0, 1.0 / 60.0];
    const D2: [f64; 4] = [-49.0 / 18.0, 3.0 / 2.0, -3.0 / 20.0, 1.0 / 90.0];
    let centre = psi(x, t);
    let mut dt = Complex64::new(0.0, 0.0);
    let mut dxx = D2[0] * centre;
    for k in 1..=3 {
        let kf = k as f64;
        dt += D1[k - 1] * (psi(x, t + kf * ht) - psi(x, t - kf * ht));
        dxx += D2[k] * (psi(x + kf * hx, t) + psi(x - kf * hx, t));
    }
    dt /= ht;
    dxx /= hx * hx;
    ((I * dt + 0.5 * dxx - v * centre).norm(), centre)
}

pub(crate) fn describe(spec: &PotentialSpec) -> &'static str {
    match spec {
        PotentialSpec::Free => "the free potential",
        PotentialSpec::Family1 { .. } => "family 1",
        PotentialSpec::Family2 { .. } => "family 2",
        PotentialSpec::HermitianProjection(_) => "a Hermitian projection",
        PotentialSpec::StaticSech2 { .. } => "the static sech² well",
        PotentialSpec::Tabulated(_) => "a tabulated potential",
    }
}
