//! Experiment configuration: flat INI text with sections `[grid]`,
//! `[potential]`, `[packet]`, `[propagation]` and `[analysis]`.
//!
//! Every key has a default, unknown sections and keys are rejected, and the
//! resolved configuration can be written back out as a complete file.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs::File;
use std::path::{Path, PathBuf};

use floquet_core::{Grid1D, PacketParams, PotentialSpec, PropagationConfig, TabulatedPotential};
use ini::Ini;

use crate::CliError;

pub type Sections = BTreeMap<String, BTreeMap<String, String>>;

const SECTIONS: [&str; 5] = ["grid", "potential", "packet", "propagation", "analysis"];

/// What a run is expected to show.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Expectation {
    /// No reflection and no sidebands.
    Suppressed,
    /// Clear Floquet scattering.
    Scattered,
    /// Report only.
    None,
}

impl Expectation {
    fn parse(s: &str) -> Result<Self, CliError> {
        match s {
            "suppressed" => Ok(Self::Suppressed),
            "scattered" => Ok(Self::Scattered),
            "none" => Ok(Self::None),
            _ => Err(CliError::Config(format!(
                "analysis.expect must be suppressed, scattered or none, got {s:?}"
            ))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Suppressed => "suppressed",
            Self::Scattered => "scattered",
            Self::None => "none",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSettings {
    pub half_length: f64,
    pub n_points: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropagationSettings {
    /// `None` selects `T/1000` (or `4π/1000` for static potentials).
    pub dt: Option<f64>,
    pub t_final: f64,
    pub snapshot_stride: usize,
    pub edge_guard: bool,
    pub edge_fraction: f64,
    pub edge_tolerance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisSettings {
    pub expect: Expectation,
    pub well_center: f64,
    pub clearance: f64,
    pub clearance_tolerance: f64,
    pub max_channel: i32,
    pub leakage_correction: bool,
    pub suppression_limit: f64,
    pub scattering_min: f64,
    pub t0_tolerance: f64,
    pub energies: Vec<f64>,
    pub n_channels: usize,
    pub max_channels: usize,
    pub synth_times: Vec<f64>,
    pub synth_x_min: f64,
    pub synth_x_max: f64,
    pub synth_points: usize,
    pub scan_points: usize,
    pub scan_times: usize,
    pub delay_time: f64,
    pub delay_alpha2: f64,
    pub delay_beta2: f64,
    pub delay_mu2: f64,
    pub delay_tolerance: f64,
    pub invisibility_limit: f64,
    pub profile_tolerance: f64,
    pub tail_x_min: f64,
    pub tail_x_max: f64,
    pub crossval_threshold: f64,
    pub crossval_tolerance: f64,
    pub averaging_span: f64,
    pub averaging_tolerance: f64,
    pub averaging_channels: usize,
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub grid: GridSettings,
    pub potential: PotentialSpec,
    /// Resolved `[potential]` keys, kept for the echo.
    pub potential_keys: BTreeMap<String, String>,
    pub packet: PacketParams,
    pub propagation: PropagationSettings,
    pub analysis: AnalysisSettings,
}

/// Parses INI text into sections, rejecting keys outside the five sections.
pub fn parse_sections(text: &str) -> Result<Sections, CliError> {
    let ini = Ini::load_from_str(text).map_err(|e| CliError::Config(format!("malformed config: {e}")))?;
    let mut out = Sections::new();
    for (section, props) in ini.iter() {
        let Some(name) = section else {
            if props.iter().next().is_some() {
                return Err(CliError::Config("keys outside any section".into()));
            }
            continue;
        };
        if !SECTIONS.contains(&name) {
            return Err(CliError::Config(format!("unknown section [{name}]")));
        }
        let entry = out.entry(name.to_string()).or_default();
        for (k, v) in props.iter() {
            entry.insert(k.to_string(), v.to_string());
        }
    }
    Ok(out)
}

/// Overlays `top` on `base` key by key.
pub fn merge(mut base: Sections, top: Sections) -> Sections {
    for (section, keys) in top {
        let entry = base.entry(section).or_default();
        // A new potential family replaces the old description entirely.
        if entry.contains_key("family") && keys.contains_key("family") {
            entry.clear();
        }
        entry.extend(keys);
    }
    base
}

/// Consumes keys of one section so leftovers can be reported as unknown.
struct Reader {
    section: &'static str,
    keys: BTreeMap<String, String>,
}

impl Reader {
    fn new(sections: &Sections, section: &'static str) -> Self {
        Self {
            section,
            keys: sections.get(section).cloned().unwrap_or_default(),
        }
    }

    fn raw(&mut self, key: &str) -> Option<String> {
        self.keys.remove(key).map(|v| v.trim().to_string())
    }

    fn f64(&mut self, key: &str, default: f64) -> Result<f64, CliError> {
        match self.raw(key) {
            None => Ok(default),
            Some(v) => v
                .parse::<f64>()
                .map_err(|e| CliError::Config(format!("{}.{key} = {v:?}: {e}", self.section))),
        }
    }

    fn usize(&mut self, key: &str, default: usize) -> Result<usize, CliError> {
        match self.raw(key) {
            None => Ok(default),
            Some(v) => v
                .parse::<usize>()
                .map_err(|e| CliError::Config(format!("{}.{key} = {v:?}: {e}", self.section))),
        }
    }

    fn bool(&mut self, key: &str, default: bool) -> Result<bool, CliError> {
        match self.raw(key).as_deref() {
            None => Ok(default),
            Some("true") => Ok(true),
            Some("false") => Ok(false),
            Some(v) => Err(CliError::Config(format!(
                "{}.{key} must be true or false, got {v:?}",
                self.section
            ))),
        }
    }

    fn list(&mut self, key: &str, default: &[f64]) -> Result<Vec<f64>, CliError> {
        match self.raw(key) {
            None => Ok(default.to_vec()),
            Some(v) => v
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse::<f64>()
                        .map_err(|e| CliError::Config(format!("{}.{key} entry {s:?}: {e}", self.section)))
                })
                .collect(),
        }
    }

    fn finish(self) -> Result<(), CliError> {
        match self.keys.keys().next() {
            None => Ok(()),
            Some(k) => Err(CliError::Config(format!("unknown key {}.{k}", self.section))),
        }
    }
}

impl ExperimentConfig {
    /// Builds and validates a configuration. Relative table paths resolve
    /// against `base_dir`.
    pub fn from_sections(sections: &Sections, base_dir: &Path) -> Result<Self, CliError> {
        let mut g = Reader::new(sections, "grid");
        let grid = GridSettings {
            half_length: g.f64("half_length", 1024.0)?,
            n_points: g.usize("n_points", 16384)?,
        };
        g.finish()?;

        let mut raw_keys = sections.get("potential").cloned().unwrap_or_default();
        if raw_keys.is_empty() {
            // The oscillating reflectionless well of the packet experiments.
            raw_keys.insert("family".into(), "1".into());
            raw_keys.insert("alpha_re".into(), "0.9".into());
        }
        let mut loader = |path: &str, period: f64| -> floquet_core::Result<TabulatedPotential> {
            let p: PathBuf = if Path::new(path).is_absolute() {
                path.into()
            } else {
                base_dir.join(path)
            };
            TabulatedPotential::read_csv(File::open(&p)?, period)
        };
        let potential = PotentialSpec::from_keys(&raw_keys, &mut loader)?;
        let table = raw_keys.get("table").map(|t| t.trim());
        let potential_keys = potential.to_keys(table).into_iter().collect();

        let mut p = Reader::new(sections, "packet");
        let packet = PacketParams::new(p.f64("width", 15.0)?, p.f64("center", -120.0)?, p.f64("momentum", 1.0)?)?;
        p.finish()?;

        let mut r = Reader::new(sections, "propagation");
        let dt = match r.raw("dt").as_deref() {
            None | Some("auto") => None,
            Some(v) => Some(
                v.parse::<f64>()
                    .map_err(|e| CliError::Config(format!("propagation.dt = {v:?}: {e}")))?,
            ),
        };
        let propagation = PropagationSettings {
            dt,
            t_final: r.f64("t_final", 240.0)?,
            snapshot_stride: r.usize("snapshot_stride", 100)?,
            edge_guard: r.bool("edge_guard", true)?,
            edge_fraction: r.f64("edge_fraction", 0.05)?,
            edge_tolerance: r.f64("edge_tolerance", 1e-8)?,
        };
        r.finish()?;

        let mut a = Reader::new(sections, "analysis");
        let expect = Expectation::parse(a.raw("expect").as_deref().unwrap_or("suppressed"))?;
        let analysis = AnalysisSettings {
            expect,
            well_center: a.f64("well_center", 0.0)?,
            clearance: a.f64("clearance", 20.0)?,
            clearance_tolerance: a.f64("clearance_tolerance", 1e-6)?,
            max_channel: a.usize("max_channel", 16)? as i32,
            leakage_correction: a.bool("leakage_correction", true)?,
            suppression_limit: a.f64("suppression_limit", 1e-4)?,
            scattering_min: a.f64("scattering_min", 1e-2)?,
            t0_tolerance: a.f64("t0_tolerance", 1e-3)?,
            energies: a.list("energies", &[0.125, 0.5, 2.0, 8.0])?,
            n_channels: a.usize("n_channels", 12)?,
            max_channels: a.usize("max_channels", 96)?,
            synth_times: a.list("synth_times", &[0.0, 0.25, 0.375, 0.5, 0.75])?,
            synth_x_min: a.f64("synth_x_min", -20.0)?,
            synth_x_max: a.f64("synth_x_max", 20.0)?,
            synth_points: a.usize("synth_points", 801)?,
            scan_points: a.usize("scan_points", 2048)?,
            scan_times: a.usize("scan_times", 256)?,
            delay_time: a.f64("delay_time", 300.0)?,
            delay_alpha2: a.f64("delay_alpha2", 2.0)?,
            delay_beta2: a.f64("delay_beta2", 2.0)?,
            delay_mu2: a.f64("delay_mu2", 1.0)?,
            delay_tolerance: a.f64("delay_tolerance", 0.1)?,
            invisibility_limit: a.f64("invisibility_limit", 0.02)?,
            profile_tolerance: a.f64("profile_tolerance", 1e-3)?,
            tail_x_min: a.f64("tail_x_min", 250.0)?,
            tail_x_max: a.f64("tail_x_max", 320.0)?,
            crossval_threshold: a.f64("crossval_threshold", 1e-3)?,
            crossval_tolerance: a.f64("crossval_tolerance", 0.05)?,
            averaging_span: a.f64("averaging_span", 4.5)?,
            averaging_tolerance: a.f64("averaging_tolerance", 1e-2)?,
            averaging_channels: a.usize("averaging_channels", 28)?,
        };
        a.finish()?;

        let cfg = Self {
            grid,
            potential,
            potential_keys,
            packet,
            propagation,
            analysis,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_text(text: &str, base_dir: &Path) -> Result<Self, CliError> {
        Self::from_sections(&parse_sections(text)?, base_dir)
    }

    pub fn grid(&self) -> Result<Grid1D, CliError> {
        Ok(Grid1D::symmetric(self.grid.half_length, self.grid.n_points)?)
    }

    pub fn dt(&self) -> f64 {
        self.propagation.dt.unwrap_or_else(|| {
            self.potential
                .period()
                .unwrap_or(4.0 * std::f64::consts::PI)
                / 1000.0
        })
    }

    /// Core propagation settings for `spec` run to `t_final`.
    pub fn propagation_for(&self, spec: &PotentialSpec, t_final: f64) -> Result<PropagationConfig, CliError> {
        let mut cfg = PropagationConfig::new(self.grid()?, spec.clone(), t_final);
        cfg.dt = self.dt();
        cfg.snapshot_stride = self.propagation.snapshot_stride;
        cfg.edge_guard = self.propagation.edge_guard.then_some(floquet_core::EdgeGuard {
            fraction: self.propagation.edge_fraction,
            tolerance: self.propagation.edge_tolerance,
        });
        cfg.validate()?;
        Ok(cfg)
    }

    /// Cross-field checks that the individual parsers cannot see.
    pub fn validate(&self) -> Result<(), CliError> {
        let grid = self.grid()?;
        let w = self.packet.width;
        let (lo, hi) = (self.packet.center - 3.0 * w, self.packet.center + 3.0 * w);
        if lo < grid.x_min() || hi > grid.x_max() {
            return Err(CliError::Config(format!(
                "packet support [{lo}, {hi}] lies outside the grid [{}, {})",
                grid.x_min(),
                grid.x_max()
            )));
        }
        self.propagation_for(&self.potential, self.propagation.t_final)?;
        let a = &self.analysis;
        if a.energies.iter().any(|e| !(*e > 0.0)) {
            return Err(CliError::Config("analysis.energies must all be positive".into()));
        }
        if !(a.synth_x_max > a.synth_x_min) || a.synth_points < 2 {
            return Err(CliError::Config("synth range must be increasing with at least 2 points".into()));
        }
        if !(a.tail_x_max > a.tail_x_min) {
            return Err(CliError::Config("tail window must be increasing".into()));
        }
        if a.n_channels == 0 || a.max_channels < a.n_channels {
            return Err(CliError::Config("need 0 < n_channels <= max_channels".into()));
        }
        if !(a.averaging_span > 0.0) || !(a.averaging_tolerance > 0.0) || a.averaging_channels == 0 {
            return Err(CliError::Config("averaging span, tolerance and channel count must be positive".into()));
        }
        if !(a.clearance > 0.0) || !(a.clearance_tolerance > 0.0) {
            return Err(CliError::Config("clearance settings must be positive".into()));
        }
        Ok(())
    }

    /// Fully resolved configuration text.
    pub fn to_ini(&self) -> String {
        let mut s = String::new();
        let f = |v: f64| format!("{v}");
        let list = |v: &[f64]| v.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join(",");
        let _ = writeln!(s, "[grid]");
        let _ = writeln!(s, "half_length = {}", f(self.grid.half_length));
        let _ = writeln!(s, "n_points = {}", self.grid.n_points);
        let _ = writeln!(s, "\n[potential]");
        for (k, v) in &self.potential_keys {
            let _ = writeln!(s, "{k} = {v}");
        }
        let _ = writeln!(s, "\n[packet]");
        let _ = writeln!(s, "width = {}", f(self.packet.width));
        let _ = writeln!(s, "center = {}", f(self.packet.center));
        let _ = writeln!(s, "momentum = {}", f(self.packet.momentum));
        let p = &self.propagation;
        let _ = writeln!(s, "\n[propagation]");
        let _ = writeln!(s, "dt = {}", f(self.dt()));
        let _ = writeln!(s, "t_final = {}", f(p.t_final));
        let _ = writeln!(s, "snapshot_stride = {}", p.snapshot_stride);
        let _ = writeln!(s, "edge_guard = {}", p.edge_guard);
        let _ = writeln!(s, "edge_fraction = {}", f(p.edge_fraction));
        let _ = writeln!(s, "edge_tolerance = {}", f(p.edge_tolerance));
        let a = &self.analysis;
        let _ = writeln!(s, "\n[analysis]");
        let rows: Vec<(&str, String)> = vec![
            ("expect", a.expect.name().into()),
            ("well_center", f(a.well_center)),
            ("clearance", f(a.clearance)),
            ("clearance_tolerance", f(a.clearance_tolerance)),
            ("max_channel", a.max_channel.to_string()),
            ("leakage_correction", a.leakage_correction.to_string()),
            ("suppression_limit", f(a.suppression_limit)),
            ("scattering_min", f(a.scattering_min)),
            ("t0_tolerance", f(a.t0_tolerance)),
            ("energies", list(&a.energies)),
            ("n_channels", a.n_channels.to_string()),
            ("max_channels", a.max_channels.to_string()),
            ("synth_times", list(&a.synth_times)),
            ("synth_x_min", f(a.synth_x_min)),
            ("synth_x_max", f(a.synth_x_max)),
            ("synth_points", a.synth_points.to_string()),
            ("scan_points", a.scan_points.to_string()),
            ("scan_times", a.scan_times.to_string()),
            ("delay_time", f(a.delay_time)),
            ("delay_alpha2", f(a.delay_alpha2)),
            ("delay_beta2", f(a.delay_beta2)),
            ("delay_mu2", f(a.delay_mu2)),
            ("delay_tolerance", f(a.delay_tolerance)),
            ("invisibility_limit", f(a.invisibility_limit)),
            ("profile_tolerance", f(a.profile_tolerance)),
            ("tail_x_min", f(a.tail_x_min)),
            ("tail_x_max", f(a.tail_x_max)),
            ("crossval_threshold", f(a.crossval_threshold)),
            ("crossval_tolerance", f(a.crossval_tolerance)),
            ("averaging_span", f(a.averaging_span)),
            ("averaging_tolerance", f(a.averaging_tolerance)),
            ("averaging_channels", a.averaging_channels.to_string()),
        ];
        for (k, v) in rows {
            let _ = writeln!(s, "{k} = {v}");
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let cfg = ExperimentConfig::from_text("[potential]\nfamily = 1\nalpha_re = 0.9\n", Path::new(".")).unwrap();
        assert_eq!(cfg.grid.n_points, 16384);
        let again = ExperimentConfig::from_text(&cfg.to_ini(), Path::new(".")).unwrap();
        assert_eq!(again.to_ini(), cfg.to_ini());
        assert_eq!(again.potential, cfg.potential);
    }

    #[test]
    fn unknown_keys_and_sections_are_rejected() {
        assert!(ExperimentConfig::from_text("[grid]\nhalf_lenght = 3\n", Path::new(".")).is_err());
        assert!(ExperimentConfig::from_text("[plot]\ncolor = red\n", Path::new(".")).is_err());
        assert!(ExperimentConfig::from_text("[potential]\nfamily = 1\ngamma = 2\n", Path::new(".")).is_err());
    }

    #[test]
    fn packet_must_fit_the_grid() {
        let err = ExperimentConfig::from_text("[grid]\nhalf_length = 100\nn_points = 1024\n", Path::new("."));
        assert!(matches!(err, Err(CliError::Config(_))));
    }

    #[test]
    fn coarse_dt_is_rejected() {
        let text = "[potential]\nfamily = 1\nalpha_re = 0.9\n[propagation]\ndt = 0.5\n";
        assert!(ExperimentConfig::from_text(text, Path::new(".")).is_err());
    }

    #[test]
    fn merge_replaces_potential_family() {
        let base = parse_sections("[potential]\nfamily = 1\nalpha_re = 0.9\n").unwrap();
        let top = parse_sections("[potential]\nfamily = sech2\nmu = 2\n").unwrap();
        let merged = merge(base, top);
        let cfg = ExperimentConfig::from_sections(&merged, Path::new(".")).unwrap();
        assert_eq!(cfg.potential, PotentialSpec::sech2(2.0).unwrap());
    }
}
