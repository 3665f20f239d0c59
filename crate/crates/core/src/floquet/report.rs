use std::io::Write;

use num_complex::Complex64;

use crate::darboux::Side;
use crate::error::Result;
use crate::io::{Cell, CsvWriter};

/// Amplitudes and flux-normalized powers of one channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelResult {
    pub n: i32,
    pub energy: f64,
    pub momentum: Complex64,
    pub t: Complex64,
    pub r: Complex64,
    /// `|tₙ|² pₙ/p` for open channels; 0 for closed ones unless measured
    /// (see [`FloquetReport::from_powers`]).
    pub t_power: f64,
    /// Reflected counterpart of `t_power`.
    pub r_power: f64,
}

impl ChannelResult {
    pub fn is_open(&self) -> bool {
        self.energy > 0.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FloquetReport {
    pub energy: f64,
    pub omega: f64,
    pub side: Side,
    pub channels: Vec<ChannelResult>,
}

impl FloquetReport {
    /// Builds a report from channel data, zeroing closed-channel amplitudes.
    pub fn new(energy: f64, omega: f64, side: Side, mut channels: Vec<ChannelResult>) -> Self {
        let p = (2.0 * energy).sqrt();
        for c in channels.iter_mut() {
            if c.is_open() {
                let flux = c.momentum.re / p;
                c.t_power = c.t.norm_sqr() * flux;
                c.r_power = c.r.norm_sqr() * flux;
            } else {
                c.t = Complex64::new(0.0, 0.0);
                c.r = Complex64::new(0.0, 0.0);
                c.t_power = 0.0;
                c.r_power = 0.0;
            }
        }
        channels.sort_by_key(|c| c.n);
        Self {
            energy,
            omega,
            side,
            channels,
        }
    }

    /// Builds a report from measured powers `(n, t_power, r_power)`. The
    /// amplitudes are the non-negative real magnitudes consistent with the
    /// powers; their phases are unknown.
    ///
    /// Powers are kept even for channels closed at the nominal energy: a
    /// packet's momentum spread carries flux into channels that open just
    /// above it. Such channels get zero amplitudes.
    pub fn from_powers(energy: f64, omega: f64, side: Side, powers: &[(i32, f64, f64)]) -> Self {
        let p = (2.0 * energy).sqrt();
        let mut channels: Vec<ChannelResult> = powers
            .iter()
            .map(|&(n, tp, rp)| {
                let e = energy + n as f64 * omega;
                let momentum = crate::floquet::channels::channel_momentum(e);
                let open = e > 0.0;
                let amp = |w: f64| {
                    if open {
                        Complex64::new((w.max(0.0) * p / momentum.re).sqrt(), 0.0)
                    } else {
                        Complex64::new(0.0, 0.0)
                    }
                };
                ChannelResult {
                    n,
                    energy: e,
                    momentum,
                    t: amp(tp),
                    r: amp(rp),
                    t_power: tp.max(0.0),
                    r_power: rp.max(0.0),
                }
            })
            .collect();
        channels.sort_by_key(|c| c.n);
        Self {
            energy,
            omega,
            side,
            channels,
        }
    }

    pub fn channel(&self, n: i32) -> Option<&ChannelResult> {
        self.channels.iter().find(|c| c.n == n)
    }

    pub fn t0(&self) -> Complex64 {
        self.channel(0).map(|c| c.t).unwrap_or_default()
    }

    pub fn total_transmission(&self) -> f64 {
        self.channels.iter().map(|c| c.t_power).sum()
    }

    pub fn total_reflection(&self) -> f64 {
        self.channels.iter().map(|c| c.r_power).sum()
    }

    pub fn total(&self) -> f64 {
        self.total_transmission() + self.total_reflection()
    }

    /// `Σ_{n≠0} (transmitted + reflected)` powers.
    pub fn sideband_fraction(&self) -> f64 {
        self.channels
            .iter()
            .filter(|c| c.n != 0)
            .map(|c| c.t_power + c.r_power)
            .sum()
    }

    /// Everything except elastic transmission: all reflection plus transmitted sidebands.
    pub fn scattered_fraction(&self) -> f64 {
        self.total_reflection()
            + self
                .channels
                .iter()
                .filter(|c| c.n != 0)
                .map(|c| c.t_power)
                .sum::<f64>()
    }

    /// Largest `|rₙ|` and `|t_{n≠0}|` over open channels.
    pub fn max_unwanted_amplitude(&self) -> f64 {
        self.channels
            .iter()
            .filter(|c| c.is_open())
            .map(|c| if c.n == 0 { c.r.norm() } else { c.r.norm().max(c.t.norm()) })
            .fold(0.0, f64::max)
    }

    /// Columns `n, E_n, Re_p_n, Im_p_n, re_t_n, im_t_n, re_r_n, im_r_n,
    /// t_power, r_power`, then a footer row `total` carrying the total
    /// transmission and reflection in the power columns and the sideband
    /// fraction in the `E_n` column.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut csv = CsvWriter::new(
            out,
            &[
                "n", "E_n", "Re_p_n", "Im_p_n", "re_t_n", "im_t_n", "re_r_n", "im_r_n", "t_power",
                "r_power",
            ],
        )?;
        for c in &self.channels {
            csv.row(&[
                Cell::I(c.n as i64),
                Cell::F(c.energy),
                Cell::F(c.momentum.re),
                Cell::F(c.momentum.im),
                Cell::F(c.t.re),
                Cell::F(c.t.im),
                Cell::F(c.r.re),
                Cell::F(c.r.im),
                Cell::F(c.t_power),
                Cell::F(c.r_power),
            ])?;
        }
        csv.row(&[
            Cell::S("total"),
            Cell::F(self.sideband_fraction()),
            Cell::S(""),
            Cell::S(""),
            Cell::S(""),
            Cell::S(""),
            Cell::S(""),
            Cell::S(""),
            Cell::F(self.total_transmission()),
            Cell::F(self.total_reflection()),
        ])?;
        csv.finish()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ch(n: i32, e: f64, t: f64, r: f64) -> ChannelResult {
        ChannelResult {
            n,
            energy: e,
            momentum: crate::floquet::channels::channel_momentum(e),
            t: Complex64::new(t, 0.0),
            r: Complex64::new(0.0, r),
            t_power: 0.0,
            r_power: 0.0,
        }
    }

    #[test]
    fn aggregates() {
        let rep = FloquetReport::new(
            0.5,
            0.5,
            Side::Left,
            vec![ch(1, 1.0, 0.1, 0.2), ch(0, 0.5, 0.9, 0.1), ch(-1, 0.0, 5.0, 5.0)],
        );
        assert_eq!(rep.channels[0].n, -1);
        assert_eq!(rep.channels[0].t_power, 0.0);
        let p1 = 2f64.sqrt();
        assert!((rep.total_transmission() - (0.81 + 0.01 * p1)).abs() < 1e-15);
        assert!((rep.total_reflection() - (0.01 + 0.04 * p1)).abs() < 1e-15);
        assert!((rep.sideband_fraction() - 0.05 * p1).abs() < 1e-15);
        assert!((rep.scattered_fraction() - (0.01 + 0.05 * p1)).abs() < 1e-15);
        let mut buf = Vec::new();
        rep.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 5);
        assert!(text.lines().last().unwrap().starts_with("total,"));
    }
}
