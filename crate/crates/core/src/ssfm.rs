//! Strang split-step pseudospectral integrator for complex, time-dependent
//! potentials.

use num_complex::Complex64;

use crate::darboux::{AnalyticState, Side};
use crate::error::{Error, Result};
use crate::field::WaveField;
use crate::grid::Grid1D;
use crate::potential::{PotentialSampler, PotentialSpec};
use crate::spectral::Spectral;

/// Outer-window leak check applied after every step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeGuard {
    /// Fraction of the domain length covered by the two outer windows together.
    pub fraction: f64,
    /// Maximum allowed outer-window norm relative to the total norm.
    pub tolerance: f64,
}

impl Default for EdgeGuard {
    fn default() -> Self {
        Self {
            fraction: 0.05,
            tolerance: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropagationConfig {
    pub grid: Grid1D,
    pub potential: PotentialSpec,
    pub dt: f64,
    pub t_final: f64,
    /// Steps between stored snapshots; 0 stores only the initial and final fields.
    pub snapshot_stride: usize,
    pub edge_guard: Option<EdgeGuard>,
}

impl PropagationConfig {
    /// Default resolution: `dt = T/1000` for oscillating potentials, `4π/1000` otherwise.
    pub fn new(grid: Grid1D, potential: PotentialSpec, t_final: f64) -> Self {
        let period = potential
            .period()
            .unwrap_or(4.0 * std::f64::consts::PI);
        Self {
            grid,
            potential,
            dt: period / 1000.0,
            t_final,
            snapshot_stride: 100,
            edge_guard: Some(EdgeGuard::default()),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::Parameter(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_final > 0.0) || !self.t_final.is_finite() {
            return Err(Error::Parameter(format!(
                "t_final must be positive, got {}",
                self.t_final
            )));
        }
        if let Some(period) = self.potential.period() {
            if self.dt > period / 200.0 * (1.0 + 1e-12) {
                return Err(Error::Parameter(format!(
                    "dt = {} exceeds T/200 = {} for an oscillating potential",
                    self.dt,
                    period / 200.0
                )));
            }
        }
        Ok(())
    }

    pub fn n_steps(&self) -> usize {
        (self.t_final / self.dt).round().max(1.0) as usize
    }
}

/// Diagnostics recorded after every step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepDiagnostics {
    pub step: usize,
    pub time: f64,
    pub norm2: f64,
    pub edge_leak: f64,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    /// Stored fields in increasing time; the first is the initial field, the
    /// last the final one.
    pub snapshots: Vec<WaveField>,
    /// Snapshot step indices, parallel to `snapshots`.
    pub snapshot_steps: Vec<usize>,
    /// One entry per step, plus the initial state at index 0.
    pub diagnostics: Vec<StepDiagnostics>,
}

impl Trajectory {
    pub fn final_field(&self) -> &WaveField {
        self.snapshots.last().expect("trajectory holds at least one snapshot")
    }

    pub fn initial_field(&self) -> &WaveField {
        &self.snapshots[0]
    }
}

/// Reusable stepping state for one grid and potential.
pub struct Propagator {
    grid: Grid1D,
    sampler: PotentialSampler,
    hermitian: bool,
    spectral: Spectral,
    dt: f64,
    half_kinetic: Vec<Complex64>,
    static_factor: Option<Vec<Complex64>>,
    vbuf: Vec<Complex64>,
    edge_guard: Option<EdgeGuard>,
    steps_taken: usize,
}

impl std::fmt::Debug for Propagator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Propagator")
            .field("grid", &self.grid)
            .field("dt", &self.dt)
            .field("steps_taken", &self.steps_taken)
            .finish()
    }
}

impl Propagator {
    /// `dt` may be negative, e.g. for time-reversal checks.
    pub fn new(grid: Grid1D, potential: &PotentialSpec, dt: f64) -> Result<Self> {
        if dt == 0.0 || !dt.is_finite() {
            return Err(Error::Parameter("dt must be nonzero and finite".into()));
        }
        let sampler = PotentialSampler::new(potential, &grid.positions());
        let n = grid.n_points();
        let half_kinetic = (0..n)
            .map(|j| {
                let k = grid.k(j);
                Complex64::from_polar(1.0, -0.25 * k * k * dt)
            })
            .collect();
        let mut p = Self {
            grid,
            sampler,
            hermitian: potential.is_hermitian(),
            spectral: Spectral::new(n),
            dt,
            half_kinetic,
            static_factor: None,
            vbuf: vec![Complex64::new(0.0, 0.0); n],
            edge_guard: None,
            steps_taken: 0,
        };
        if potential.is_static() {
            p.sampler.fill(0.0, &mut p.vbuf);
            p.check_gain()?;
            p.static_factor = Some(p.vbuf.iter().map(|&v| potential_factor(v, dt)).collect());
        }
        Ok(p)
    }

    pub fn with_edge_guard(mut self, guard: Option<EdgeGuard>) -> Self {
        self.edge_guard = guard;
        self
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    fn check_gain(&self) -> Result<()> {
        if self.hermitian {
            return Ok(());
        }
        let max_im = self.vbuf.iter().map(|v| v.im.abs()).fold(0.0, f64::max);
        let value = max_im * self.dt.abs();
        if value >= 1.0 {
            return Err(Error::GainGuard { value });
        }
        Ok(())
    }

    fn kinetic_half(&mut self, data: &mut [Complex64]) {
        self.spectral.forward(data);
        for (z, f) in data.iter_mut().zip(&self.half_kinetic) {
            *z *= f;
        }
        self.spectral.inverse(data);
    }

    /// Advances `field` by one step, `e^{-iK dt/2} e^{-iV(t+dt/2) dt} e^{-iK dt/2}`.
    pub fn step(&mut self, field: &mut WaveField) -> Result<()> {
        if field.grid() != &self.grid {
            return Err(Error::Parameter("field grid differs from propagator grid".into()));
        }
        let t = field.time();
        let dt = self.dt;
        let mut data = std::mem::take(field.values_mut_vec());
        self.kinetic_half(&mut data);
        match &self.static_factor {
            Some(factor) => {
                for (z, f) in data.iter_mut().zip(factor) {
                    *z *= f;
                }
            }
            None => {
                let mut vbuf = std::mem::take(&mut self.vbuf);
                self.sampler.fill(t + 0.5 * dt, &mut vbuf);
                self.vbuf = vbuf;
                self.check_gain()?;
                for (z, &v) in data.iter_mut().zip(&self.vbuf) {
                    *z *= potential_factor(v, dt);
                }
            }
        }
        self.kinetic_half(&mut data);
        *field.values_mut_vec() = data;
        field.set_time(t + dt);
        self.steps_taken += 1;
        if !field.is_finite() {
            return Err(Error::Blowup {
                step: self.steps_taken,
            });
        }
        if let Some(guard) = self.edge_guard {
            let fraction = field.edge_fraction(guard.fraction);
            if !(fraction < guard.tolerance) {
                return Err(Error::EdgeLeak {
                    step: self.steps_taken,
                    fraction,
                    tolerance: guard.tolerance,
                });
            }
        }
        Ok(())
    }
}

#[inline]
fn potential_factor(v: Complex64, dt: f64) -> Complex64 {
    // exp(-i V dt) = exp(Im V dt) * exp(-i Re V dt)
    Complex64::from_polar((v.im * dt).exp(), -v.re * dt)
}

/// Single step of `field` under `potential`, without an edge guard.
pub fn step(field: &WaveField, potential: &PotentialSpec, dt: f64) -> Result<WaveField> {
    let mut out = field.clone();
    Propagator::new(*field.grid(), potential, dt)?.step(&mut out)?;
    Ok(out)
}

pub fn propagate(psi0: &WaveField, cfg: &PropagationConfig) -> Result<Trajectory> {
    cfg.validate()?;
    if psi0.grid() != &cfg.grid {
        return Err(Error::Parameter("initial field grid differs from config grid".into()));
    }
    let mut prop = Propagator::new(cfg.grid, &cfg.potential, cfg.dt)?.with_edge_guard(cfg.edge_guard);
    let n_steps = cfg.n_steps();
    let fraction = cfg.edge_guard.map(|g| g.fraction).unwrap_or(0.05);
    let mut field = psi0.clone();
    let diag = |step: usize, f: &WaveField| StepDiagnostics {
        step,
        time: f.time(),
        norm2: f.norm2(),
        edge_leak: f.edge_fraction(fraction),
    };
    let mut diagnostics = Vec::with_capacity(n_steps + 1);
    diagnostics.push(diag(0, &field));
    let mut snapshots = vec![field.clone()];
    let mut snapshot_steps = vec![0];
    for s in 1..=n_steps {
        prop.step(&mut field)?;
        diagnostics.push(diag(s, &field));
        let stride_hit = cfg.snapshot_stride > 0 && s % cfg.snapshot_stride == 0;
        if stride_hit || s == n_steps {
            snapshots.push(field.clone());
            snapshot_steps.push(s);
        }
    }
    Ok(Trajectory {
        snapshots,
        snapshot_steps,
        diagnostics,
    })
}

/// One row of [`convergence_probe`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub dt: f64,
    pub dx: f64,
    pub max_error: f64,
}

/// Maximum-norm error against the exact state at `cfg.t_final` for each
/// refinement level: level `l` uses `dt / 2^l` on `cfg.grid`. The error is
/// measured over grid points with `|x| <= window`; see
/// [`analytic_tracking_error`] for the far-field roll-off.
pub fn convergence_probe(
    cfg: &PropagationConfig,
    state: &AnalyticState,
    levels: usize,
    window: f64,
) -> Result<Vec<ConvergenceRow>> {
    let mut rows = Vec::with_capacity(levels);
    for l in 0..levels {
        let dt = cfg.dt / (1u64 << l) as f64;
        let err = analytic_tracking_error(cfg, state, dt, window)?;
        rows.push(ConvergenceRow {
            dt,
            dx: cfg.grid.dx(),
            max_error: err,
        });
    }
    Ok(rows)
}

/// Propagates the sampled exact state from `t = 0` to `cfg.t_final` with step
/// `dt` and returns the largest deviation from it inside `|x| <= window`.
///
/// A plane-wave state does not fit the periodic box, so it is rolled off
/// smoothly by `exp(-((|x| - 2w)/(0.4w))²)` beyond `|x| = 2w`; the
/// disturbance this causes stays far from the measured window over a period.
pub fn analytic_tracking_error(
    cfg: &PropagationConfig,
    state: &AnalyticState,
    dt: f64,
    window: f64,
) -> Result<f64> {
    let g = cfg.grid;
    if 2.8 * window > g.x_max().min(-g.x_min()) {
        return Err(Error::Domain(format!(
            "tracking window {window} needs a grid reaching |x| = {}",
            2.8 * window
        )));
    }
    let taper = |x: f64| {
        let a = (x.abs() - 2.0 * window) / (0.4 * window);
        if a <= 0.0 {
            1.0
        } else {
            (-a * a).exp()
        }
    };
    let mut field = WaveField::from_fn(g, 0.0, |x| state.value(x, 0.0) * taper(x))?;
    let mut prop = Propagator::new(g, &cfg.potential, dt)?;
    let n = (cfg.t_final / dt).round() as usize;
    for _ in 0..n {
        prop.step(&mut field)?;
    }
    let t = field.time();
    let mut err: f64 = 0.0;
    for (i, z) in field.values().iter().enumerate() {
        let x = g.x(i);
        if x.abs() <= window {
            err = err.max((z - state.value(x, t)).norm());
        }
    }
    Ok(err)
}

/// Exact state for `spec` or an unsupported-oracle error.
pub fn oracle_state(spec: &PotentialSpec, side: Side, p: f64) -> Result<AnalyticState> {
    AnalyticState::for_spec(spec, side, p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{make_gaussian, PacketParams};
    use std::f64::consts::PI;

    fn grid() -> Grid1D {
        Grid1D::symmetric(512.0, 8192).unwrap()
    }

    #[test]
    fn free_plane_wave_phase() {
        let g = grid();
        let p = g.commensurate_momentum(1.0);
        let dt = 4.0 * PI / 1000.0;
        let f = WaveField::from_fn(g, 0.0, |x| Complex64::from_polar(1.0, p * x)).unwrap();
        let out = step(&f, &PotentialSpec::Free, dt).unwrap();
        let phase = Complex64::from_polar(1.0, -0.5 * p * p * dt);
        assert!(out.max_abs_diff(&WaveField::new(g, f.values().iter().map(|z| z * phase).collect(), dt).unwrap()) < 1e-13);
        assert!((out.time() - dt).abs() < 1e-16);
    }

    #[test]
    fn real_potential_preserves_norm() {
        let g = grid();
        let f = make_gaussian(&g, &PacketParams::new(2.0, 0.0, 0.0).unwrap()).unwrap();
        let out = step(&f, &PotentialSpec::sech2(1.0).unwrap(), 0.01).unwrap();
        assert!((out.norm2() / f.norm2() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gain_guard_trips() {
        let g = Grid1D::symmetric(20.0, 256).unwrap();
        let spec = PotentialSpec::family1(Complex64::new(0.9, 0.0), Complex64::new(0.0, 0.0), 1.0).unwrap();
        let f = make_gaussian(&g, &PacketParams::new(1.0, 0.0, 0.0).unwrap()).unwrap();
        // Near ωt = π the well centre carries |Im V| ≈ 5.
        let f = WaveField::new(g, f.into_values(), 2.0 * PI - 0.7).unwrap();
        assert!(matches!(step(&f, &spec, 1.0), Err(Error::GainGuard { .. })));
        assert!(step(&f, &spec, 0.01).is_ok());
    }

    #[test]
    fn edge_leak_is_reported() {
        let g = Grid1D::symmetric(64.0, 1024).unwrap();
        let f = make_gaussian(&g, &PacketParams::new(3.0, 40.0, 3.0).unwrap()).unwrap();
        let mut cfg = PropagationConfig::new(g, PotentialSpec::Free, 20.0);
        cfg.dt = 0.05;
        assert!(matches!(propagate(&f, &cfg), Err(Error::EdgeLeak { .. })));
    }

    #[test]
    fn config_validation() {
        let g = grid();
        let spec = PotentialSpec::family2(2.0, 2.0, 1.0).unwrap();
        let mut cfg = PropagationConfig::new(g, spec, 10.0);
        assert!(cfg.validate().is_ok());
        assert!((cfg.dt - 4.0 * PI / 1000.0).abs() < 1e-15);
        cfg.dt = 4.0 * PI / 100.0;
        assert!(cfg.validate().is_err());
        cfg.dt = -0.1;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn trajectory_bookkeeping() {
        let g = Grid1D::symmetric(64.0, 512).unwrap();
        let f = make_gaussian(&g, &PacketParams::new(3.0, 0.0, 0.5).unwrap()).unwrap();
        let mut cfg = PropagationConfig::new(g, PotentialSpec::Free, 1.0);
        cfg.dt = 0.01;
        cfg.snapshot_stride = 30;
        let tr = propagate(&f, &cfg).unwrap();
        assert_eq!(tr.diagnostics.len(), 101);
        assert_eq!(tr.snapshot_steps, vec![0, 30, 60, 90, 100]);
        assert!(tr.snapshots.windows(2).all(|w| w[0].time() < w[1].time()));
        assert!((tr.final_field().time() - 1.0).abs() < 1e-12);
    }
}
