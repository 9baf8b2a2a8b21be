//! Successive interference cancellation on one channel-slot.
//!
//! Levels are indexed `1..=Q` in SIC order (strongest first). The receiver
//! decodes level 1, cancels it, moves to level 2, and so on. A level with two
//! or more users is a power collision: its signals cannot be separated, so
//! cancellation stops there. `q̄` is the last level before the first
//! collision (`Q` when there is none).
//!
//! Two decoder semantics are provided:
//!
//! - [`Decoder::Paper`] judges every singleton level `q ≤ q̄` on its own,
//!   assuming all stronger levels have been removed, even when one of them
//!   failed its SINR test.
//! - [`Decoder::Strict`] keeps the power of any stronger singleton that
//!   failed its SINR test as interference for every later level.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::model::{PowerLadder, MAX_LEVELS};

/// Relative slack on the SINR threshold. With one user per level the
/// designed SINR equals `Γ` exactly, which floating point would otherwise
/// resolve either way.
pub const SINR_SLACK: f64 = 1e-12;

/// Users per power level `(M_1, …, M_Q)` in one channel-slot.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OutcomeVector(Vec<u32>);

impl OutcomeVector {
    pub fn new(counts: Vec<u32>) -> Self {
        Self(counts)
    }

    pub fn zeros(num_levels: usize) -> Self {
        Self(vec![0; num_levels])
    }

    pub fn counts(&self) -> &[u32] {
        &self.0
    }

    pub fn counts_mut(&mut self) -> &mut [u32] {
        &mut self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Active users on the channel, `K = Σ M_q`.
    pub fn active_users(&self) -> u64 {
        self.0.iter().map(|&m| m as u64).sum()
    }
}

impl From<Vec<u32>> for OutcomeVector {
    fn from(counts: Vec<u32>) -> Self {
        Self(counts)
    }
}

impl<const N: usize> From<[u32; N]> for OutcomeVector {
    fn from(counts: [u32; N]) -> Self {
        Self(counts.to_vec())
    }
}

/// Decoder semantics selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Decoder {
    #[default]
    Paper,
    Strict,
}

impl Decoder {
    pub fn as_str(self) -> &'static str {
        match self {
            Decoder::Paper => "paper",
            Decoder::Strict => "strict",
        }
    }
}

impl fmt::Display for Decoder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Decoder {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper" => Ok(Decoder::Paper),
            "strict" => Ok(Decoder::Strict),
            other => Err(Error::arg(
                "decoder",
                format!("expected `paper` or `strict`, got `{other}`"),
            )),
        }
    }
}

/// Why a level did or did not yield a packet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LevelStatus {
    Decoded,
    /// No user at this level.
    Empty,
    /// One user whose SINR fell below `Γ`.
    SinrFail,
    /// The first level with two or more users; SIC halts here.
    Collision,
    /// Past the first collision, never reached by SIC.
    BeyondQbar,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodeResult {
    pub decoded_count: u32,
    pub per_level_status: Vec<LevelStatus>,
    pub qbar: usize,
}

pub fn is_all_singleton(m: &OutcomeVector) -> bool {
    m.counts().iter().all(|&c| c <= 1)
}

/// `q̄`: the level just before the first one with `M_q ≥ 2`, or `Q` if
/// there is no collision.
pub fn last_collision_free_level(m: &OutcomeVector) -> usize {
    qbar(m.counts())
}

fn qbar(counts: &[u32]) -> usize {
    counts.iter().position(|&c| c >= 2).unwrap_or(counts.len())
}

fn check_len(ladder: &PowerLadder, m: &OutcomeVector) -> Result<()> {
    if ladder.num_levels() != m.len() {
        return Err(Error::LengthMismatch {
            expected: ladder.num_levels(),
            got: m.len(),
        });
    }
    Ok(())
}

/// SINR of level `q` (1-based) once levels `1..q` are cancelled:
/// `v_q / (Σ_{j>q} M_j v_j + 1)`. Does not depend on `M_1..M_q`.
pub fn sinr_at_level(ladder: &PowerLadder, m: &OutcomeVector, q: usize) -> Result<f64> {
    check_len(ladder, m)?;
    let num_levels = ladder.num_levels();
    if q == 0 || q > num_levels {
        return Err(Error::LevelOutOfRange {
            level: q,
            q: num_levels,
        });
    }
    let v = ladder.levels();
    // Accumulate from the weakest level up so that an all-ones suffix sums
    // in the same order as the ladder recursion.
    let interference: f64 = (q..num_levels).rev().map(|j| m.counts()[j] as f64 * v[j]).sum();
    Ok(v[q - 1] / (interference + 1.0))
}

fn passes(signal: f64, denominator: f64, gamma: f64) -> bool {
    signal / denominator >= gamma * (1.0 - SINR_SLACK)
}

/// Interference seen by level `i+1` from the levels below it, for every
/// 0-based `i`. Only the first `counts.len()` entries are meaningful.
fn suffix_interference(v: &[f64], counts: &[u32]) -> [f64; MAX_LEVELS] {
    let mut suffix = [0.0; MAX_LEVELS];
    let mut acc = 0.0;
    for i in (0..counts.len()).rev() {
        suffix[i] = acc;
        acc += counts[i] as f64 * v[i];
    }
    suffix
}

/// Number of packets decoded from `counts`, without building a
/// [`DecodeResult`]. This is the hot path for enumeration and simulation;
/// `counts.len()` must equal the ladder height.
pub fn decoded_count(ladder: &PowerLadder, counts: &[u32], decoder: Decoder) -> u32 {
    debug_assert_eq!(ladder.num_levels(), counts.len());
    let v = ladder.levels();
    let gamma = ladder.sinr_target();
    let stop = qbar(counts);
    let suffix = suffix_interference(v, counts);
    let mut decoded = 0;
    let mut residual = 0.0;
    for i in 0..stop {
        if counts[i] != 1 {
            continue;
        }
        let denom = suffix[i] + residual + 1.0;
        if passes(v[i], denom, gamma) {
            decoded += 1;
        } else if decoder == Decoder::Strict {
            residual += v[i];
        }
    }
    decoded
}

/// Decodes one outcome vector, tagging every level with its fate.
pub fn decode(ladder: &PowerLadder, m: &OutcomeVector, decoder: Decoder) -> Result<DecodeResult> {
    check_len(ladder, m)?;
    let counts = m.counts();
    let v = ladder.levels();
    let gamma = ladder.sinr_target();
    let stop = qbar(counts);
    let suffix = suffix_interference(v, counts);

    let mut status = Vec::with_capacity(counts.len());
    let mut decoded_count = 0;
    let mut residual = 0.0;
    for (i, &c) in counts.iter().enumerate() {
        let tag = if i < stop {
            match c {
                0 => LevelStatus::Empty,
                _ if passes(v[i], suffix[i] + residual + 1.0, gamma) => {
                    decoded_count += 1;
                    LevelStatus::Decoded
                }
                _ => {
                    if decoder == Decoder::Strict {
                        residual += v[i];
                    }
                    LevelStatus::SinrFail
                }
            }
        } else if i == stop {
            LevelStatus::Collision
        } else {
            LevelStatus::BeyondQbar
        };
        status.push(tag);
    }
    Ok(DecodeResult {
        decoded_count,
        per_level_status: status,
        qbar: stop,
    })
}

pub fn decode_count_paper(ladder: &PowerLadder, m: &OutcomeVector) -> Result<DecodeResult> {
    decode(ladder, m, Decoder::Paper)
}

pub fn decode_count_strict(ladder: &PowerLadder, m: &OutcomeVector) -> Result<DecodeResult> {
    decode(ladder, m, Decoder::Strict)
}
