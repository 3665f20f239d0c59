//! Coupled-channel Floquet scattering by stabilized S-matrix propagation.
//!
//! With `ψ = Σₙ φₙ(x) e^{-iEₙt}` and `V = Σₘ Vₘ(x) e^{imωt}` the channel
//! functions obey `φₙ'' = -pₙ² φₙ + 2 Σ_{n'} V_{n'-n} φ_{n'}`. The interval
//! carrying the potential is cut into uniform slices, each advanced by a
//! fourth-order (Yoshida) composition of drift–kick–drift steps: exact free
//! propagation between three coupling kicks. Slices are grouped into blocks short enough for
//! the block transfer matrix to stay well conditioned; every block is turned
//! into a scattering matrix and the blocks are chained with the Redheffer star
//! product, so growing evanescent channels never enter a product of transfer
//! matrices.

use num_complex::Complex64;

use crate::darboux::Side;
use crate::error::{Error, Result};
use crate::floquet::channels::{channel_momentum, ChannelSet};
use crate::floquet::harmonics::{mean_potential, potential_harmonics_auto, HarmonicPotential};
use crate::floquet::linalg::{gemm_raw, inverse, mul, CMat};
use crate::floquet::quadrature::gauss_legendre;
use crate::floquet::report::{ChannelResult, FloquetReport};
use crate::potential::PotentialSpec;

const I: Complex64 = Complex64::new(0.0, 1.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

// Yoshida weights: w1 = 1/(2 - 2^{1/3}), w0 = 1 - 2 w1.
const W1: f64 = 1.351_207_191_959_657_6;
const W0: f64 = -1.702_414_383_919_315_3;
/// Kick positions within a slice, in units of the slice width.
const KICK_AT: [f64; 3] = [0.5 * W1, 0.5, 1.0 - 0.5 * W1];
const KICK_WEIGHT: [f64; 3] = [W1, W0, W1];
/// Largest estimated `∫κ dx` across one transfer block (conditioning ≈ e^{2·this}).
const BLOCK_GROWTH: f64 = 5.0;

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    /// Starting channel truncation `N` (channels `-N..=N`).
    pub n_channels: usize,
    /// Raise `N` in steps of 2 until the truncation test passes.
    pub auto_channels: bool,
    pub max_channels: usize,
    /// Upper bound on the power in the outermost channels.
    pub edge_tolerance: f64,
    /// Upper bound on the change of any open-channel power from `N` to `N+2`.
    pub change_tolerance: f64,
    /// Starting harmonic truncation `M`.
    pub m_start: usize,
    /// The potential is dropped where every `|V(x,t)|` is below this.
    pub cutoff: f64,
    /// Hard limit on `|x|` of the interval carrying the potential. For
    /// long-range potentials this is where the smooth taper reaches zero.
    pub x_cap: f64,
    /// Taper start as a fraction of `x_cap` for long-range potentials.
    pub taper_start: f64,
    /// Decay constant of the evanescent basis used inside the interval.
    pub kappa_floor: f64,
    /// Multiplies the default slice width `min(0.05 ℓ, 0.1/max|pₙ|)`.
    pub slice_scale: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            n_channels: 12,
            auto_channels: true,
            max_channels: 96,
            edge_tolerance: 1e-10,
            change_tolerance: 1e-8,
            m_start: 16,
            cutoff: 1e-10,
            x_cap: 900.0,
            taper_start: 1.0 / 3.0,
            kappa_floor: 0.5,
            slice_scale: 1.0,
        }
    }
}

/// A potential prepared for coupled-channel solves: its interval, slicing,
/// harmonic profiles at the slice midpoints and far-tail corrections.
#[derive(Debug, Clone)]
pub struct FloquetProblem {
    harmonics: HarmonicPotential,
    x_left: f64,
    h: f64,
    n_slices: usize,
    /// Taper weight per kick sample; empty when no taper applies.
    weights: Vec<f64>,
    /// `∫ (1-w) V₀` over the left and right far tails.
    tail_left: Complex64,
    tail_right: Complex64,
    support: Vec<i32>,
    omega: f64,
}

impl FloquetProblem {
    /// Prepares `spec` with slice width `h`.
    pub fn new(spec: &PotentialSpec, h: f64, opts: &SolverOptions) -> Result<Self> {
        if !(h > 0.0) {
            return Err(Error::Parameter(format!("slice width must be positive, got {h}")));
        }
        let omega = spec.omega().or(spec.family_omega()).unwrap_or(0.0);
        let (x_left, x_right, taper) = interval(spec, opts);
        let n_slices = ((x_right - x_left) / h).ceil() as usize;
        let h = if n_slices > 0 {
            (x_right - x_left) / n_slices as f64
        } else {
            h
        };
        let xs: Vec<f64> = (0..n_slices)
            .flat_map(|j| KICK_AT.iter().map(move |c| x_left + (j as f64 + c) * h))
            .collect();
        let harmonics = potential_harmonics_auto(spec, &xs, opts.m_start)?;
        let (weights, tail_left, tail_right) = match taper {
            Some((xa, xb)) => {
                let w = xs.iter().map(|&x| taper_weight(x.abs(), xa, xb)).collect();
                let (tl, tr) = tail_integrals(spec, xa, xb);
                (w, tl, tr)
            }
            None => (Vec::new(), ZERO, ZERO),
        };
        let support = harmonics.support(1e-13);
        Ok(Self {
            harmonics,
            x_left,
            h,
            n_slices,
            weights,
            tail_left,
            tail_right,
            support,
            omega,
        })
    }

    pub fn harmonics(&self) -> &HarmonicPotential {
        &self.harmonics
    }

    pub fn slice_width(&self) -> f64 {
        self.h
    }

    pub fn n_slices(&self) -> usize {
        self.n_slices
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.x_left, self.x_left + self.h * self.n_slices as f64)
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    /// Harmonic indices present in the potential.
    pub fn support(&self) -> &[i32] {
        &self.support
    }

    /// Channel range reachable from channel 0 within `[-N, N]`: coupling
    /// through harmonics of one sign only moves flux in one direction.
    pub fn reachable_channels(&self, n_max: usize) -> (i32, i32) {
        let n = n_max as i32;
        let up = self.support.iter().any(|&m| m < 0);
        let down = self.support.iter().any(|&m| m > 0);
        (if down { -n } else { 0 }, if up { n } else { 0 })
    }
}

fn taper_weight(ax: f64, xa: f64, xb: f64) -> f64 {
    if ax <= xa {
        1.0
    } else if ax >= xb {
        0.0
    } else {
        let s = (ax - xa) / (xb - xa);
        (0.5 * std::f64::consts::PI * s).cos().powi(2)
    }
}

/// Interval carrying the potential and, for long-range potentials, the taper.
fn interval(spec: &PotentialSpec, opts: &SolverOptions) -> (f64, f64, Option<(f64, f64)>) {
    if !spec.is_short_range() {
        let xb = opts.x_cap;
        return (-xb, xb, Some((opts.taper_start * xb, xb)));
    }
    let step = 0.1 * spec.length_scale();
    let times: Vec<f64> = match spec.period() {
        Some(t) => (0..32).map(|j| t * j as f64 / 32.0).collect(),
        None => vec![0.0],
    };
    let significant = |x: f64| times.iter().any(|&t| spec.value(x, t).norm() >= opts.cutoff);
    let mut edge = [0.0f64; 2];
    for (k, sign) in [-1.0f64, 1.0].iter().enumerate() {
        let mut last = None;
        let mut x = 0.0;
        while x <= opts.x_cap {
            if significant(sign * x) {
                last = Some(x);
            }
            x += step;
        }
        edge[k] = match last {
            Some(x) => sign * (x + step).min(opts.x_cap),
            None => 0.0,
        };
    }
    (edge[0], edge[1], None)
}

/// `(∫_{-∞}^{-xa} (1-w)V₀, ∫_{xa}^{∞} (1-w)V₀)`, the second part of each
/// tail mapped to `(0, 1]` by `x = xb/s`.
fn tail_integrals(spec: &PotentialSpec, xa: f64, xb: f64) -> (Complex64, Complex64) {
    let (gx, gw) = gauss_legendre(8);
    let panels = 400;
    let mut out = [ZERO; 2];
    for (k, sign) in [-1.0f64, 1.0].iter().enumerate() {
        let mut acc = ZERO;
        let v0 = |x: f64| mean_potential(spec, sign * x, 64);
        let hp = (xb - xa) / panels as f64;
        for p in 0..panels {
            let mid = xa + (p as f64 + 0.5) * hp;
            for (xi, wi) in gx.iter().zip(&gw) {
                let x = mid + 0.5 * hp * xi;
                acc += v0(x) * (1.0 - taper_weight(x, xa, xb)) * (0.5 * hp * wi);
            }
        }
        let hs = 1.0 / panels as f64;
        for p in 0..panels {
            let mid = (p as f64 + 0.5) * hs;
            for (si, wi) in gx.iter().zip(&gw) {
                let s = mid + 0.5 * hs * si;
                acc += v0(xb / s) * (xb / (s * s)) * (0.5 * hs * wi);
            }
        }
        out[k] = acc;
    }
    (out[0], out[1])
}

/// Default slice width for channel momenta up to `p_max`.
pub fn default_slice_width(spec: &PotentialSpec, p_max: f64, opts: &SolverOptions) -> f64 {
    opts.slice_scale * (0.05 * spec.length_scale()).min(0.1 / p_max.max(1e-12))
}

/// Both incidence sides from one solve.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoSidedReport {
    pub left: FloquetReport,
    pub right: FloquetReport,
}

impl TwoSidedReport {
    pub fn side(&self, side: Side) -> &FloquetReport {
        match side {
            Side::Left => &self.left,
            Side::Right => &self.right,
        }
    }
}

/// Scattering amplitudes for unit incidence in channel 0 at energy `E` with
/// channels truncated to `[-N, N]`, for both incidence sides.
pub fn coupled_channel_smatrix_both(
    problem: &FloquetProblem,
    energy: f64,
    n_max: usize,
    opts: &SolverOptions,
) -> Result<TwoSidedReport> {
    let (n_lo, n_hi) = problem.reachable_channels(n_max);
    let set = ChannelSet::range(energy, problem.omega, n_lo, n_hi)?;
    let solver = Solver::new(problem, &set, opts);
    let (s, x_left, x_right) = solver.compose()?;
    let amps = solver.terminate(&s)?;
    let build = |side: Side, col: usize| {
        let nc = set.len();
        let mut channels = Vec::with_capacity(2 * n_max + 1);
        let p0 = set.incident_momentum();
        for n in -(n_max as i32)..=(n_max as i32) {
            let e = energy + n as f64 * problem.omega;
            let pn = channel_momentum(e);
            let (mut t, mut r) = (ZERO, ZERO);
            if let Some(i) = set.index_of(n) {
                let b_left = amps[(i, col)];
                let a_right = amps[(nc + i, col)];
                let out_left = b_left * Complex64::from_polar(1.0, 0.0) * (I * pn * x_left).exp();
                let out_right = a_right * (-I * pn * x_right).exp();
                let (tl, tr) = (problem.tail_left, problem.tail_right);
                match side {
                    Side::Left => {
                        let inc = (-I * tl / p0).exp();
                        t = out_right * inc * (-I * tr / pn).exp();
                        r = out_left * inc * (-I * tl / pn).exp();
                    }
                    Side::Right => {
                        let inc = (-I * tr / p0).exp();
                        t = out_left * inc * (-I * tl / pn).exp();
                        r = out_right * inc * (-I * tr / pn).exp();
                    }
                }
            }
            channels.push(ChannelResult {
                n,
                energy: e,
                momentum: pn,
                t,
                r,
                t_power: 0.0,
                r_power: 0.0,
            });
        }
        FloquetReport::new(energy, problem.omega, side, channels)
    };
    Ok(TwoSidedReport {
        left: build(Side::Left, 0),
        right: build(Side::Right, 1),
    })
}

/// Single-side convenience wrapper of [`coupled_channel_smatrix_both`].
pub fn coupled_channel_smatrix(
    problem: &FloquetProblem,
    energy: f64,
    n_max: usize,
    side: Side,
    opts: &SolverOptions,
) -> Result<FloquetReport> {
    let both = coupled_channel_smatrix_both(problem, energy, n_max, opts)?;
    Ok(match side {
        Side::Left => both.left,
        Side::Right => both.right,
    })
}

/// Truncation diagnostics of an automatic solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Convergence {
    pub n_channels: usize,
    /// Largest power in channels `±N`.
    pub edge_power: f64,
    /// Largest change of an open-channel power from `N` to `N+2`.
    pub change: f64,
    pub m_max: usize,
    pub harmonic_residual: f64,
    pub slice_width: f64,
    pub n_slices: usize,
    pub interval: (f64, f64),
}

#[derive(Debug, Clone)]
pub struct FloquetSolution {
    pub reports: TwoSidedReport,
    pub convergence: Convergence,
}

/// Prepares `spec` and solves at `energy`, raising `N` until the outermost
/// channels carry less than `edge_tolerance` and `N → N+2` changes no
/// open-channel power by more than `change_tolerance`.
pub fn solve_floquet(spec: &PotentialSpec, energy: f64, opts: &SolverOptions) -> Result<FloquetSolution> {
    if !(energy > 0.0) || !energy.is_finite() {
        return Err(Error::Parameter(format!("incident energy must be positive, got {energy}")));
    }
    let omega = spec.omega().unwrap_or(0.0);
    let p_max = |n: usize| (2.0 * (energy + n as f64 * omega)).sqrt();
    let mut n = opts.n_channels.max(1);
    let mut problem: Option<FloquetProblem> = None;
    let mut cached: Option<(usize, TwoSidedReport)> = None;
    loop {
        let h_needed = default_slice_width(spec, p_max(n + 2), opts);
        let rebuild = match &problem {
            None => true,
            Some(p) => p.slice_width() > h_needed * (1.0 + 1e-9),
        };
        if rebuild {
            // Margin for one further N+2 step before the slices must shrink.
            let h = default_slice_width(spec, p_max(n + 4), opts);
            problem = Some(FloquetProblem::new(spec, h, opts)?);
            cached = None;
        }
        let prob = problem.as_ref().expect("problem prepared above");
        let base = match cached.take() {
            Some((m, rep)) if m == n => rep,
            _ => coupled_channel_smatrix_both(prob, energy, n, opts)?,
        };
        let (lo, hi) = prob.reachable_channels(n);
        let trivial = lo == 0 && hi == 0;
        let edge = if trivial { 0.0 } else { edge_power(&base, n) };
        let (x0, x1) = prob.interval();
        let mut convergence = Convergence {
            n_channels: n,
            edge_power: edge,
            change: 0.0,
            m_max: prob.harmonics().m_max(),
            harmonic_residual: prob.harmonics().residual(),
            slice_width: prob.slice_width(),
            n_slices: prob.n_slices(),
            interval: (x0, x1),
        };
        let truncation = |n: usize, edge: f64, change: f64| Error::ChannelTruncation {
            n_channels: n,
            edge_power: edge,
            change,
        };
        if trivial {
            return Ok(FloquetSolution {
                reports: base,
                convergence,
            });
        }
        if edge >= opts.edge_tolerance {
            // Channel powers fall off slowly for broad harmonic spectra, so
            // grow N geometrically until the outermost channels are empty.
            if !opts.auto_channels || n >= opts.max_channels {
                return Err(truncation(n, edge, f64::NAN));
            }
            let next = (n * 3).div_ceil(2);
            n = (next + next % 2).max(n + 2).min(opts.max_channels);
            continue;
        }
        let finer = coupled_channel_smatrix_both(prob, energy, n + 2, opts)?;
        let change = max_change(&base, &finer);
        convergence.change = change;
        if change < opts.change_tolerance {
            return Ok(FloquetSolution {
                reports: base,
                convergence,
            });
        }
        if !opts.auto_channels || n + 2 > opts.max_channels {
            return Err(truncation(n, edge, change));
        }
        cached = Some((n + 2, finer));
        n += 2;
    }
}

fn edge_power(rep: &TwoSidedReport, n: usize) -> f64 {
    let n = n as i32;
    [&rep.left, &rep.right]
        .iter()
        .flat_map(|r| r.channels.iter())
        .filter(|c| c.n.abs() == n)
        .map(|c| c.t_power.max(c.r_power))
        .fold(0.0, f64::max)
}

fn max_change(a: &TwoSidedReport, b: &TwoSidedReport) -> f64 {
    let mut worst: f64 = 0.0;
    for (ra, rb) in [(&a.left, &b.left), (&a.right, &b.right)] {
        for c in &ra.channels {
            if let Some(d) = rb.channel(c.n) {
                worst = worst
                    .max((c.t_power - d.t_power).abs())
                    .max((c.r_power - d.r_power).abs());
            }
        }
    }
    worst
}

/// Block scattering matrix mapping `[a_left; b_right] → [b_left; a_right]`,
/// where `a` are coefficients of `e^{iq(x-x_ref)}` and `b` of `e^{-iq(x-x_ref)}`
/// referenced at the respective block edge.
struct SMat {
    s11: CMat,
    s12: CMat,
    s21: CMat,
    s22: CMat,
}

impl SMat {
    fn identity(n: usize) -> Self {
        Self {
            s11: CMat::zeros(n, n),
            s12: CMat::identity(n, n),
            s21: CMat::identity(n, n),
            s22: CMat::zeros(n, n),
        }
    }

    /// Redheffer star product: `self` on the left, `b` on the right.
    fn star(self, b: &SMat) -> Result<SMat> {
        let n = self.s11.nrows();
        let x = inverse(CMat::identity(n, n) - mul(&self.s22, &b.s11), "interface")?;
        let xa21 = mul(&x, &self.s21);
        let xa22b12 = mul(&x, &mul(&self.s22, &b.s12));
        let s11 = &self.s11 + mul(&self.s12, &mul(&b.s11, &xa21));
        let s12 = mul(&self.s12, &(&b.s12 + mul(&b.s11, &xa22b12)));
        let s21 = mul(&b.s21, &xa21);
        let s22 = &b.s22 + mul(&b.s21, &xa22b12);
        Ok(SMat { s11, s12, s21, s22 })
    }
}

enum Kick {
    /// `(m, offset)`: channel `i` couples to `i + offset` via `V_m`.
    Banded(Vec<(i32, isize)>),
    Dense,
}

struct Solver<'a> {
    problem: &'a FloquetProblem,
    nc: usize,
    n_lo: i32,
    p: Vec<Complex64>,
    /// Basis wavenumbers: `pₙ` for open channels, `i·max(κₙ, κ_floor)` otherwise.
    q: Vec<Complex64>,
    open: Vec<bool>,
    kappa: Vec<f64>,
    kappa_floor: f64,
    kick: Kick,
    harmonics_used: Vec<i32>,
}

impl<'a> Solver<'a> {
    fn new(problem: &'a FloquetProblem, set: &ChannelSet, opts: &SolverOptions) -> Self {
        let nc = set.len();
        let p: Vec<Complex64> = set.channels().iter().map(|c| c.momentum).collect();
        let open: Vec<bool> = set.channels().iter().map(|c| c.is_open()).collect();
        let kappa: Vec<f64> = p.iter().zip(&open).map(|(p, o)| if *o { 0.0 } else { p.im }).collect();
        let q = p
            .iter()
            .zip(&open)
            .zip(&kappa)
            .map(|((p, o), k)| if *o { *p } else { I * k.max(opts.kappa_floor) })
            .collect();
        let span = nc as i32 - 1;
        let harmonics_used: Vec<i32> = problem
            .support
            .iter()
            .copied()
            .filter(|m| m.abs() <= span && *m as i64 <= problem.harmonics.m_max() as i64)
            .collect();
        let kick = if harmonics_used.len() * 8 <= nc {
            Kick::Banded(harmonics_used.iter().map(|&m| (m, m as isize)).collect())
        } else {
            Kick::Dense
        };
        Self {
            problem,
            nc,
            n_lo: set.n_lo(),
            p,
            q,
            open,
            kappa,
            kappa_floor: opts.kappa_floor,
            kick,
            harmonics_used,
        }
    }

    /// Coupling `W_{ii'} = w·V_{n'-n}` at slice `j`, column-major.
    fn coupling(&self, j: usize, w: Complex64, out: &mut [Complex64]) {
        let nc = self.nc;
        out.iter_mut().for_each(|z| *z = ZERO);
        let hp = &self.problem.harmonics;
        for &m in &self.harmonics_used {
            let v = hp.profile(m).expect("harmonic within range")[j] * w;
            // n' - n = m: row i, column i + m.
            for i in 0..nc {
                let col = i as i64 + m as i64;
                if col >= 0 && (col as usize) < nc {
                    out[col as usize * nc + i] = v;
                }
            }
        }
    }

    fn max_coupling(&self, j: usize) -> f64 {
        let hp = &self.problem.harmonics;
        self.harmonics_used
            .iter()
            .map(|&m| hp.profile(m).expect("harmonic within range")[j].norm())
            .sum()
    }

    /// Propagates the whole interval and returns its S-matrix with the
    /// interval end points.
    fn compose(&self) -> Result<(SMat, f64, f64)> {
        let prob = self.problem;
        let nc = self.nc;
        let (x_left, x_right) = prob.interval();
        let mut total = SMat::identity(nc);
        if prob.n_slices == 0 {
            return Ok((total, x_left, x_right));
        }
        let h = prob.h;
        let kappa_max = self.kappa.iter().copied().fold(0.0, f64::max);
        let outer: Vec<[Complex64; 4]> = self.p.iter().map(|&p| drift_matrix(p, 0.5 * W1 * h)).collect();
        let inner: Vec<[Complex64; 4]> =
            self.p.iter().map(|&p| drift_matrix(p, 0.5 * (W1 + W0) * h)).collect();
        let mut wbuf = vec![ZERO; nc * nc];
        let mut j = 0;
        while j < prob.n_slices {
            // Grow the block until the estimated growth exponent reaches BLOCK_GROWTH.
            let mut growth = 0.0;
            let start = j;
            let mut t = CMat::identity(2 * nc, 2 * nc);
            while j < prob.n_slices && (j == start || growth < BLOCK_GROWTH) && j - start < 4096 {
                let w = |k: usize| if prob.weights.is_empty() { 1.0 } else { prob.weights[3 * j + k] };
                let rate = kappa_max.max((2.0 * w(1) * self.max_coupling(3 * j + 1)).sqrt());
                growth += rate * h;
                apply_drift(&mut t, &outer);
                for k in 0..3 {
                    if k > 0 {
                        apply_drift(&mut t, &inner);
                    }
                    self.apply_kick(&mut t, 3 * j + k, 2.0 * h * KICK_WEIGHT[k] * w(k), &mut wbuf);
                }
                apply_drift(&mut t, &outer);
                j += 1;
            }
            let block = self.block_smatrix(&t)?;
            total = total.star(&block)?;
        }
        Ok((total, x_left, x_right))
    }

    fn apply_kick(&self, t: &mut CMat, j: usize, scale: f64, wbuf: &mut [Complex64]) {
        let scale = Complex64::new(scale, 0.0);
        let nc = self.nc;
        let ld = 2 * nc;
        match &self.kick {
            Kick::Banded(list) => {
                let hp = &self.problem.harmonics;
                for &(m, off) in list {
                    let v = hp.profile(m).expect("harmonic within range")[j] * scale;
                    if v == ZERO {
                        continue;
                    }
                    for col in 0..ld {
                        let base = col * ld;
                        for i in 0..nc {
                            let src = i as isize + off;
                            if src >= 0 && (src as usize) < nc {
                                let phi = t.as_slice()[base + src as usize];
                                t.as_mut_slice()[base + nc + i] += v * phi;
                            }
                        }
                    }
                }
            }
            Kick::Dense => {
                self.coupling(j, scale, wbuf);
                let ptr = t.as_mut_ptr();
                // SAFETY: rows 0..nc (read) and nc..2nc (written) of the
                // column-major 2nc×2nc buffer are disjoint.
                unsafe {
                    gemm_raw(
                        nc,
                        nc,
                        ld,
                        ONE,
                        wbuf.as_ptr(),
                        1,
                        nc as isize,
                        ptr as *const Complex64,
                        1,
                        ld as isize,
                        ONE,
                        ptr.add(nc),
                        1,
                        ld as isize,
                    );
                }
            }
        }
    }

    /// Converts a block transfer matrix `[φ; φ']_right = T [φ; φ']_left` into
    /// an S-matrix in the `q` basis.
    fn block_smatrix(&self, t: &CMat) -> Result<SMat> {
        let nc = self.nc;
        let a = t.view((0, 0), (nc, nc));
        let b = t.view((0, nc), (nc, nc));
        let c = t.view((nc, 0), (nc, nc));
        let d = t.view((nc, nc), (nc, nc));
        let g: Vec<Complex64> = self.q.iter().map(|q| I * q).collect();
        let mut x1 = CMat::zeros(nc, nc);
        let mut x2 = CMat::zeros(nc, nc);
        let mut y1 = CMat::zeros(nc, nc);
        let mut y2 = CMat::zeros(nc, nc);
        for col in 0..nc {
            for row in 0..nc {
                let bg = b[(row, col)] * g[col];
                let dg = d[(row, col)] * g[col];
                x1[(row, col)] = a[(row, col)] + bg;
                x2[(row, col)] = a[(row, col)] - bg;
                y1[(row, col)] = (c[(row, col)] + dg) / g[row];
                y2[(row, col)] = (c[(row, col)] - dg) / g[row];
            }
        }
        let t11 = (&x1 + &y1) * Complex64::new(0.5, 0.0);
        let t12 = (&x2 + &y2) * Complex64::new(0.5, 0.0);
        let t21 = (&x1 - &y1) * Complex64::new(0.5, 0.0);
        let t22 = (&x2 - &y2) * Complex64::new(0.5, 0.0);
        let z = inverse(t22, "block")?;
        let s22 = mul(&t12, &z);
        let s21 = &t11 - mul(&s22, &t21);
        let s11 = -mul(&z, &t21);
        Ok(SMat {
            s11,
            s12: z,
            s21,
            s22,
        })
    }

    /// Applies radiation conditions, the decaying-tail loads of closed
    /// channels and unit incidence in channel 0 from each side. Columns of
    /// the result hold `[b_left; a_right]` for left and right incidence.
    fn terminate(&self, s: &SMat) -> Result<CMat> {
        let nc = self.nc;
        let rho: Vec<Complex64> = (0..nc)
            .map(|i| {
                if self.open[i] {
                    ZERO
                } else {
                    let kf = self.kappa[i].max(self.kappa_floor);
                    let k = self.kappa[i];
                    Complex64::new((kf - k) / (kf + k), 0.0)
                }
            })
            .collect();
        let mut m = CMat::identity(2 * nc, 2 * nc);
        for col in 0..nc {
            for row in 0..nc {
                m[(row, col)] -= s.s11[(row, col)] * rho[col];
                m[(row, nc + col)] -= s.s12[(row, col)] * rho[col];
                m[(nc + row, col)] -= s.s21[(row, col)] * rho[col];
                m[(nc + row, nc + col)] -= s.s22[(row, col)] * rho[col];
            }
        }
        let (x_left, x_right) = self.problem.interval();
        let i0 = (-self.n_lo) as usize;
        let p0 = self.p[i0];
        let src_left = (I * p0 * x_left).exp();
        let src_right = (-I * p0 * x_right).exp();
        let mut rhs = CMat::zeros(2 * nc, 2);
        for row in 0..nc {
            rhs[(row, 0)] = s.s11[(row, i0)] * src_left;
            rhs[(nc + row, 0)] = s.s21[(row, i0)] * src_left;
            rhs[(row, 1)] = s.s12[(row, i0)] * src_right;
            rhs[(nc + row, 1)] = s.s22[(row, i0)] * src_right;
        }
        let minv = inverse(m, "termination")?;
        Ok(mul(&minv, &rhs))
    }
}

/// Free transfer over `dx` for wavenumber `p`:
/// `[[cos pdx, sin(pdx)/p], [-p sin pdx, cos pdx]]`, row-major.
fn drift_matrix(p: Complex64, dx: f64) -> [Complex64; 4] {
    let arg = p * dx;
    let c = arg.cos();
    let sinc = if arg.norm() < 1e-6 {
        Complex64::new(dx, 0.0) * (ONE - arg * arg / 6.0)
    } else {
        arg.sin() / p
    };
    [c, sinc, -p * arg.sin(), c]
}

fn apply_drift(t: &mut CMat, m: &[[Complex64; 4]]) {
    let nc = m.len();
    let ld = 2 * nc;
    let data = t.as_mut_slice();
    for col in 0..ld {
        let base = col * ld;
        for (i, m) in m.iter().enumerate() {
            let phi = data[base + i];
            let dphi = data[base + nc + i];
            data[base + i] = m[0] * phi + m[1] * dphi;
            data[base + nc + i] = m[2] * phi + m[3] * dphi;
        }
    }
}
