//! System configuration and the SIC power ladder.
//!
//! Received powers are normalised to the noise power, so a ladder level is
//! the SNR a lone user at that level would see. The ladder is designed so
//! that with exactly one user per level every user sees SINR exactly `Γ`
//! after the stronger levels have been cancelled.

use crate::error::{Error, Result, Violation};

/// Tallest ladder accepted by [`PowerLadder::new`].
pub const MAX_LEVELS: usize = 40;

/// Converts an SINR target in decibels to linear scale.
pub fn gamma_db_to_linear(gamma_db: f64) -> Result<f64> {
    if !gamma_db.is_finite() {
        return Err(Error::arg("gamma_db", format!("must be finite, got {gamma_db}")));
    }
    Ok(10f64.powf(gamma_db / 10.0))
}

pub fn linear_to_db(value: f64) -> f64 {
    10.0 * value.log10()
}

/// The governing tuple `(L, Q, Γ, λ)`.
///
/// `traffic_intensity` is the mean number of active users per channel per
/// slot; the total offered load `Λ = L·λ` is derived on demand.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemConfig {
    pub num_channels: usize,
    pub num_levels: usize,
    /// Linear SINR target `Γ`.
    pub sinr_target: f64,
    pub traffic_intensity: f64,
}

impl SystemConfig {
    pub fn new(num_channels: usize, num_levels: usize, sinr_target: f64, traffic_intensity: f64) -> Self {
        Self {
            num_channels,
            num_levels,
            sinr_target,
            traffic_intensity,
        }
    }

    /// Returns the configuration unchanged if every invariant holds, or one
    /// [`Violation`] per offending field.
    pub fn validate(self) -> Result<Self> {
        let mut violations = Vec::new();
        if self.num_channels < 1 {
            violations.push(Violation {
                field: "num_channels",
                reason: "L must be at least 1".into(),
            });
        }
        if self.num_levels < 1 {
            violations.push(Violation {
                field: "num_levels",
                reason: "Q must be at least 1".into(),
            });
        }
        if !(self.sinr_target.is_finite() && self.sinr_target > 0.0) {
            violations.push(Violation {
                field: "sinr_target",
                reason: format!("Γ must be a positive finite number, got {}", self.sinr_target),
            });
        }
        if !(self.traffic_intensity.is_finite() && self.traffic_intensity >= 0.0) {
            violations.push(Violation {
                field: "traffic_intensity",
                reason: format!("λ must be a non-negative finite number, got {}", self.traffic_intensity),
            });
        }
        if violations.is_empty() {
            Ok(self)
        } else {
            Err(Error::InvalidConfig(violations))
        }
    }

    /// Total offered load over all channels, `Λ = L·λ`.
    pub fn total_traffic(&self) -> f64 {
        self.num_channels as f64 * self.traffic_intensity
    }

    /// Mean number of users per level in one channel, `λ/Q`.
    pub fn per_level_mean(&self) -> f64 {
        self.traffic_intensity / self.num_levels as f64
    }

    pub fn ladder(&self) -> Result<PowerLadder> {
        PowerLadder::new(self.sinr_target, self.num_levels)
    }
}

/// Strictly decreasing received-power levels `v_1 > … > v_Q = Γ`.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerLadder {
    levels: Vec<f64>,
    sinr_target: f64,
}

impl PowerLadder {
    /// Builds the ladder `v_q = Γ(Γ+1)^(Q−q)`, the closed form of
    /// `v_q = Γ(Σ_{m>q} v_m + 1)`.
    pub fn new(sinr_target: f64, num_levels: usize) -> Result<Self> {
        if !(sinr_target.is_finite() && sinr_target > 0.0) {
            return Err(Error::arg(
                "sinr_target",
                format!("Γ must be positive and finite, got {sinr_target}"),
            ));
        }
        if num_levels == 0 {
            return Err(Error::arg("num_levels", "Q must be at least 1"));
        }
        if num_levels > MAX_LEVELS {
            return Err(Error::LadderTooTall {
                q: num_levels,
                max: MAX_LEVELS,
            });
        }
        let ratio = sinr_target + 1.0;
        let levels = (1..=num_levels)
            .map(|q| sinr_target * ratio.powi((num_levels - q) as i32))
            .collect();
        Ok(Self { levels, sinr_target })
    }

    /// Levels in SIC order, strongest first.
    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn num_levels(&self) -> usize {
        self.levels.len()
    }

    pub fn sinr_target(&self) -> f64 {
        self.sinr_target
    }

    /// `v_q` for a 1-based level index.
    pub fn level(&self, q: usize) -> Option<f64> {
        q.checked_sub(1).and_then(|i| self.levels.get(i).copied())
    }
}
