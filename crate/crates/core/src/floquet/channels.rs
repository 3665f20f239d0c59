use num_complex::Complex64;

use crate::error::{Error, Result};

/// One Floquet channel `n` with `Eₙ = E + nω` and `pₙ = √(2Eₙ)`, `Im pₙ ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Channel {
    pub n: i32,
    pub energy: f64,
    pub momentum: Complex64,
}

impl Channel {
    pub fn is_open(&self) -> bool {
        self.energy > 0.0
    }
}

/// Channels `n ∈ [n_lo, n_hi]` for incident energy `E` and drive frequency `ω`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    pub energy: f64,
    pub omega: f64,
    channels: Vec<Channel>,
}

pub fn channel_momentum(energy: f64) -> Complex64 {
    if energy > 0.0 {
        Complex64::new((2.0 * energy).sqrt(), 0.0)
    } else {
        Complex64::new(0.0, (-2.0 * energy).sqrt())
    }
}

impl ChannelSet {
    /// Symmetric set `n ∈ [-N, N]`.
    pub fn new(energy: f64, omega: f64, n_max: usize) -> Result<Self> {
        Self::range(energy, omega, -(n_max as i32), n_max as i32)
    }

    pub fn range(energy: f64, omega: f64, n_lo: i32, n_hi: i32) -> Result<Self> {
        if !(energy > 0.0) || !energy.is_finite() {
            return Err(Error::Parameter(format!("incident energy must be positive, got {energy}")));
        }
        if !(omega >= 0.0) || !omega.is_finite() {
            return Err(Error::Parameter(format!("omega must be non-negative, got {omega}")));
        }
        if n_lo > 0 || n_hi < 0 {
            return Err(Error::Parameter("channel range must contain n = 0".into()));
        }
        let channels = (n_lo..=n_hi)
            .map(|n| {
                let e = energy + n as f64 * omega;
                Channel {
                    n,
                    energy: e,
                    momentum: channel_momentum(e),
                }
            })
            .collect();
        Ok(Self {
            energy,
            omega,
            channels,
        })
    }

    pub fn channels(&self) -> &[Channel] {
        &self.channels
    }

    pub fn len(&self) -> usize {
        self.channels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.channels.is_empty()
    }

    pub fn n_lo(&self) -> i32 {
        self.channels[0].n
    }

    pub fn n_hi(&self) -> i32 {
        self.channels[self.channels.len() - 1].n
    }

    /// Position of channel `n` in [`ChannelSet::channels`].
    pub fn index_of(&self, n: i32) -> Option<usize> {
        let i = n - self.n_lo();
        (i >= 0 && (i as usize) < self.channels.len()).then_some(i as usize)
    }

    pub fn incident_momentum(&self) -> f64 {
        (2.0 * self.energy).sqrt()
    }

    pub fn max_abs_momentum(&self) -> f64 {
        self.channels
            .iter()
            .map(|c| c.momentum.norm())
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn branches_and_spacing() {
        let set = ChannelSet::new(0.5, 0.5, 4).unwrap();
        assert_eq!(set.len(), 9);
        for w in set.channels().windows(2) {
            assert!((w[1].energy - w[0].energy - 0.5).abs() < 1e-15);
        }
        for c in set.channels() {
            assert!(c.momentum.im >= 0.0);
            if c.is_open() {
                assert_eq!(c.momentum.im, 0.0);
                assert!(((c.momentum * c.momentum).re - 2.0 * c.energy).abs() < 1e-14);
            } else {
                assert_eq!(c.momentum.re, 0.0);
            }
        }
        // E₋₁ = 0 sits exactly at threshold and counts as closed.
        let c = set.channels()[set.index_of(-1).unwrap()];
        assert_eq!(c.energy, 0.0);
        assert!(!c.is_open());
        assert!(ChannelSet::new(0.0, 0.5, 2).is_err());
    }
}
