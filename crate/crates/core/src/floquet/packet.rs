//! Floquet channel powers read off the momentum spectrum of a scattered
//! wave packet.
//!
//! A channel `n` collects the spectral power at momenta `q` with
//! `|q²/2 − Eₙ| < ω/2` (equivalently `|q − pₙ| ≲ ω/(2pₙ)`), transmitted
//! bands on the far side of the well and reflected bands on the near side.
//! The finite packet bandwidth spills a little of each channel into its
//! neighbours; this leakage is removed by modelling each channel's spectrum
//! as the incident spectrum mapped through `q²/2 = k²/2 + nω` and solving the
//! resulting (nearly diagonal) linear system for the channel powers.

use nalgebra::{DMatrix, DVector};

use crate::darboux::Side;
use crate::error::{Error, Result};
use crate::field::{MomentumSpectrum, PacketParams, WaveField};
use crate::floquet::report::FloquetReport;

/// Default half-width of the window around the well that must be empty.
pub const DEFAULT_CLEARANCE: f64 = 20.0;
/// Default for [`PacketAnalysis::clearance_tolerance`].
pub const CLEARANCE_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PacketAnalysis {
    pub well_center: f64,
    pub clearance: f64,
    /// Largest norm fraction allowed inside the clearance window.
    pub clearance_tolerance: f64,
    /// Channels `n ≤ max_channel` are reported; power beyond goes unassigned.
    pub max_channel: i32,
    /// Remove inter-band leakage of the finite packet bandwidth.
    pub leakage_correction: bool,
}

impl PacketAnalysis {
    pub fn new(well_center: f64) -> Self {
        Self {
            well_center,
            clearance: DEFAULT_CLEARANCE,
            clearance_tolerance: CLEARANCE_TOLERANCE,
            max_channel: 16,
            leakage_correction: true,
        }
    }
}

/// Packet report plus bookkeeping of power that no channel band received.
#[derive(Debug, Clone, PartialEq)]
pub struct PacketReport {
    pub report: FloquetReport,
    /// Norm fraction in bands outside the reported channels or moving the
    /// wrong way for their window.
    pub unassigned: f64,
    /// Norm fraction still inside the clearance window.
    pub residual_near_well: f64,
}

/// See [`analyze_packet`]; uses the default analysis around `well_center`.
pub fn wavepacket_floquet_report(
    final_field: &WaveField,
    incident: &PacketParams,
    omega: f64,
    well_center: f64,
) -> Result<FloquetReport> {
    analyze_packet(final_field, incident, omega, &PacketAnalysis::new(well_center)).map(|r| r.report)
}

pub fn analyze_packet(
    final_field: &WaveField,
    incident: &PacketParams,
    omega: f64,
    analysis: &PacketAnalysis,
) -> Result<PacketReport> {
    let p = incident.momentum;
    if p == 0.0 {
        return Err(Error::Parameter("incident packet must move (momentum 0)".into()));
    }
    let total = final_field.norm2();
    if !(total > 0.0) {
        return Err(Error::UndefinedObservable("final field has zero norm".into()));
    }
    let c = analysis.well_center;
    let hw = analysis.clearance;
    let near = final_field.windowed_norm(c - hw, c + hw) / total;
    if near >= analysis.clearance_tolerance {
        return Err(Error::PrematureAnalysis {
            fraction: near,
            center: c,
            halfwidth: hw,
        });
    }
    let energy = 0.5 * p * p;
    let pa = p.abs();
    let static_case = omega == 0.0;
    if !static_case {
        let half = omega / (2.0 * pa);
        let sigma = 1.0 / incident.width;
        if half < 2.0 * sigma {
            return Err(Error::BandResolution(format!(
                "band half-width ω/(2p) = {half:.4} is below twice the packet momentum spread 1/w = {sigma:.4}"
            )));
        }
    }
    let side = if p > 0.0 { Side::Left } else { Side::Right };
    let dir = p.signum();
    let grid = final_field.grid();
    // Whatever is still inside the clearance window (quasi-bound or nearly
    // threshold content) has a broad spectrum and is kept out of both.
    let right = final_field.masked(c + hw, grid.x_max() + grid.dx());
    let left = final_field.masked(grid.x_min(), c - hw);
    let (far, near_side) = if dir > 0.0 { (right, left) } else { (left, right) };
    let norm = incident.norm2();
    let trans = far.momentum_spectrum();
    let refl = near_side.momentum_spectrum();

    let n_lo = if static_case {
        0
    } else {
        // Lowest channel whose band [Eₙ − ω/2, Eₙ + ω/2] reaches positive energy.
        (-(energy / omega) - 0.5).floor() as i32 + 1
    };
    let n_hi = if static_case { 0 } else { analysis.max_channel.max(0) };
    let channels: Vec<i32> = (n_lo..=n_hi).collect();

    let mut unassigned = 0.0;
    let mut bands = |spec: &MomentumSpectrum, sign: f64| {
        let mut out = vec![0.0; channels.len()];
        for (q, w) in spec.k.iter().zip(&spec.power) {
            let idx = if static_case {
                Some(0)
            } else {
                band_index(*q, energy, omega, n_lo, n_hi)
            };
            match idx {
                Some(i) if q * sign > 0.0 => out[i] += w / norm,
                _ => unassigned += w / norm,
            }
        }
        out
    };
    let mut t_bands = bands(&trans, dir);
    let mut r_bands = bands(&refl, -dir);

    if analysis.leakage_correction && !static_case && channels.len() > 1 {
        let leak = leakage_matrix(&trans, incident, energy, omega, n_lo, n_hi, dir);
        t_bands = solve(&leak, &t_bands)?;
        let leak = leakage_matrix(&refl, incident, energy, omega, n_lo, n_hi, -dir);
        r_bands = solve(&leak, &r_bands)?;
    }

    let powers: Vec<(i32, f64, f64)> = channels
        .iter()
        .enumerate()
        .map(|(i, &n)| (n, t_bands[i], r_bands[i]))
        .collect();
    Ok(PacketReport {
        report: FloquetReport::from_powers(energy, omega, side, &powers),
        unassigned,
        residual_near_well: near,
    })
}

fn band_index(q: f64, energy: f64, omega: f64, n_lo: i32, n_hi: i32) -> Option<usize> {
    let n = ((0.5 * q * q - energy) / omega).round() as i32;
    if n < n_lo || n > n_hi {
        None
    } else {
        Some((n - n_lo) as usize)
    }
}

/// `L[b][c]`: fraction of a unit-power channel `c` signal that lands in band
/// `b`, for the bins of `spec` moving along `sign`.
///
/// The signal of channel `n` is the incident density carried to `q` by
/// `k = √(q² − 2nω)`. Incident momenta below the channel threshold feed
/// nothing, so each column is normalized over the momenta that do.
fn leakage_matrix(
    spec: &MomentumSpectrum,
    incident: &PacketParams,
    energy: f64,
    omega: f64,
    n_lo: i32,
    n_hi: i32,
    sign: f64,
) -> DMatrix<f64> {
    let nc = (n_hi - n_lo + 1) as usize;
    let mut l = DMatrix::zeros(nc, nc);
    let mut mass = vec![0.0; nc];
    let mirrored = PacketParams {
        momentum: incident.momentum.abs(),
        ..*incident
    };
    for &q in &spec.k {
        if q * sign <= 0.0 {
            continue;
        }
        let band = band_index(q, energy, omega, n_lo, n_hi);
        let qa = q.abs();
        for c in 0..nc {
            let n = n_lo + c as i32;
            let k2 = qa * qa - 2.0 * n as f64 * omega;
            if k2 <= 0.0 {
                continue;
            }
            let k = k2.sqrt();
            // Density in q of channel n fed by incident momentum k.
            let d = mirrored.momentum_density(k) * qa / k * spec.dk;
            mass[c] += d;
            if let Some(b) = band {
                l[(b, c)] += d;
            }
        }
    }
    for c in 0..nc {
        if mass[c] > 0.0 {
            for b in 0..nc {
                l[(b, c)] /= mass[c];
            }
        } else {
            l[(c, c)] = 1.0;
        }
    }
    l
}

fn solve(l: &DMatrix<f64>, b: &[f64]) -> Result<Vec<f64>> {
    let rhs = DVector::from_column_slice(b);
    l.clone()
        .lu()
        .solve(&rhs)
        .map(|x| x.iter().copied().collect())
        .ok_or_else(|| Error::Solver("band leakage system is singular".into()))
}
