//! Seeded slot-level Monte Carlo simulation of one channel.
//!
//! Channels are i.i.d., so simulating a single channel suffices; total
//! throughput is `L` times the per-channel estimate. Each slot draws
//! `M_q ~ Poisson(λ/Q)` independently per level and decodes the outcome.
//!
//! Slots are split into fixed blocks (see [`crate::rng`]) that run in
//! parallel. Per-block decoded-count sums and sums of squares are integers,
//! so merging them is exact and the estimate is bit-identical for any
//! number of worker threads.

use rayon::prelude::*;

use crate::bounds::{argmax_upper_bound, BoundsPoint};
use crate::error::{Error, Result};
use crate::model::{PowerLadder, SystemConfig};
use crate::rng::{mix_seed, BlockStream, BLOCK_SLOTS};
use crate::sic::{decoded_count, Decoder, OutcomeVector};

/// Longest CDF table kept by [`PoissonSampler`].
const MAX_CDF_TERMS: usize = 1024;

/// Poisson sampling by inversion against a precomputed CDF table.
///
/// The table is built with `p_0 = e^(−μ)`, `p_{k+1} = p_k·μ/(k+1)` and stops
/// once the CDF reaches 1 in floating point.
#[derive(Debug, Clone)]
pub struct PoissonSampler {
    cdf: Vec<f64>,
}

impl PoissonSampler {
    pub fn new(mean: f64) -> Result<Self> {
        if !(mean.is_finite() && mean >= 0.0) {
            return Err(Error::arg(
                "per_level_mean",
                format!("must be non-negative and finite, got {mean}"),
            ));
        }
        let mut cdf = Vec::new();
        let mut p = (-mean).exp();
        let mut acc = p;
        cdf.push(acc);
        let mut k = 0;
        while acc < 1.0 && cdf.len() < MAX_CDF_TERMS {
            k += 1;
            p *= mean / k as f64;
            if p == 0.0 && k as f64 > mean {
                break;
            }
            acc += p;
            cdf.push(acc);
        }
        Ok(Self { cdf })
    }

    /// Smallest `k` with `u < F(k)`.
    pub fn sample_with(&self, u: f64) -> u32 {
        self.cdf.iter().position(|&f| u < f).unwrap_or(self.cdf.len()) as u32
    }
}

/// Fills `out` with one independent Poisson draw per level, one uniform each.
pub fn sample_into(stream: &mut BlockStream, sampler: &PoissonSampler, out: &mut [u32]) {
    for slot in out.iter_mut() {
        *slot = sampler.sample_with(stream.next_uniform());
    }
}

pub fn sample_outcome(stream: &mut BlockStream, per_level_mean: f64, num_levels: usize) -> Result<OutcomeVector> {
    let sampler = PoissonSampler::new(per_level_mean)?;
    let mut m = OutcomeVector::zeros(num_levels);
    sample_into(stream, &sampler, m.counts_mut());
    Ok(m)
}

/// Decoded packets in one slot. Outcomes with at most one user per level
/// skip the decoder: every user decodes on the designed ladder.
pub fn slot_decoded(ladder: &PowerLadder, counts: &[u32], decoder: Decoder) -> u32 {
    if counts.iter().all(|&c| c <= 1) {
        counts.iter().sum()
    } else {
        decoded_count(ladder, counts, decoder)
    }
}

/// Per-channel throughput estimate from `num_slots` simulated slots.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThroughputEstimate {
    /// Mean decoded packets per channel per slot.
    pub mean: f64,
    /// Sample standard deviation over `√num_slots`.
    pub std_error: f64,
    pub num_slots: u64,
    pub seed: u64,
    pub decoder: Decoder,
}

impl ThroughputEstimate {
    pub fn total(&self, num_channels: usize) -> f64 {
        self.mean * num_channels as f64
    }
}

#[derive(Default, Clone, Copy)]
struct Moments {
    sum: u64,
    sum_sq: u64,
}

impl Moments {
    fn merge(self, other: Self) -> Self {
        Self {
            sum: self.sum + other.sum,
            sum_sq: self.sum_sq + other.sum_sq,
        }
    }
}

fn run_block(
    ladder: &PowerLadder,
    sampler: &PoissonSampler,
    decoder: Decoder,
    seed: u64,
    block: u64,
    slots: u64,
) -> Moments {
    let mut stream = BlockStream::new(seed, block);
    let mut buf = [0u32; crate::model::MAX_LEVELS];
    let counts = &mut buf[..ladder.num_levels()];
    let mut m = Moments::default();
    for _ in 0..slots {
        sample_into(&mut stream, sampler, counts);
        let d = slot_decoded(ladder, counts, decoder) as u64;
        m.sum += d;
        m.sum_sq += d * d;
    }
    m
}

/// Simulates `num_slots` independent channel-slots.
///
/// The sample variance comes from exact integer moments:
/// `s² = (n·Σd² − (Σd)²) / (n(n−1))`.
pub fn simulate(cfg: &SystemConfig, num_slots: u64, seed: u64, decoder: Decoder) -> Result<ThroughputEstimate> {
    let cfg = cfg.validate()?;
    if num_slots == 0 {
        return Err(Error::arg("slots", "must be at least 1"));
    }
    let ladder = cfg.ladder()?;
    let sampler = PoissonSampler::new(cfg.per_level_mean())?;

    let blocks = num_slots.div_ceil(BLOCK_SLOTS);
    let moments = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let len = BLOCK_SLOTS.min(num_slots - b * BLOCK_SLOTS);
            run_block(&ladder, &sampler, decoder, seed, b, len)
        })
        .reduce(Moments::default, Moments::merge);

    let n = num_slots as u128;
    let sum = moments.sum as u128;
    let mean = moments.sum as f64 / num_slots as f64;
    let std_error = if num_slots > 1 {
        let scatter = n * moments.sum_sq as u128 - sum * sum;
        let variance = scatter as f64 / (num_slots as f64 * (num_slots - 1) as f64);
        (variance / num_slots as f64).sqrt()
    } else {
        0.0
    };
    Ok(ThroughputEstimate {
        mean,
        std_error,
        num_slots,
        seed,
        decoder,
    })
}

/// How a sweep over `Q` chooses the traffic intensity at each point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LambdaRule {
    /// The template's λ at every point.
    Fixed,
    /// `λ = √Q`, the maximiser of the lower bound.
    SqrtQ,
    /// `λ = λ_Q`, the maximiser of the upper bound, located to this tolerance.
    ArgmaxUpper(f64),
}

impl LambdaRule {
    pub fn lambda_for(self, q: usize, fixed: f64) -> Result<f64> {
        match self {
            LambdaRule::Fixed => Ok(fixed),
            LambdaRule::SqrtQ => Ok((q as f64).sqrt()),
            LambdaRule::ArgmaxUpper(tol) => argmax_upper_bound(q, tol),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SweepAxis {
    Lambda,
    Levels(LambdaRule),
}

/// One sweep point: the swept value and either its results or the error
/// that point raised.
#[derive(Debug)]
pub struct SweepPoint {
    pub index: usize,
    pub value: f64,
    pub outcome: Result<(ThroughputEstimate, BoundsPoint)>,
}

fn levels_from(value: f64) -> Result<usize> {
    if value.is_finite() && value >= 1.0 && value.fract() == 0.0 {
        Ok(value as usize)
    } else {
        Err(Error::arg(
            "q",
            format!("sweep value {value} is not a positive integer"),
        ))
    }
}

fn sweep_point(
    template: &SystemConfig,
    axis: SweepAxis,
    value: f64,
    num_slots: u64,
    seed: u64,
    decoder: Decoder,
) -> Result<(ThroughputEstimate, BoundsPoint)> {
    let mut cfg = *template;
    match axis {
        SweepAxis::Lambda => cfg.traffic_intensity = value,
        SweepAxis::Levels(rule) => {
            cfg.num_levels = levels_from(value)?;
            cfg.traffic_intensity = rule.lambda_for(cfg.num_levels, template.traffic_intensity)?;
        }
    }
    let cfg = cfg.validate()?;
    let estimate = simulate(&cfg, num_slots, seed, decoder)?;
    let bounds = BoundsPoint::new(cfg.traffic_intensity, cfg.num_levels)?;
    Ok((estimate, bounds))
}

/// Runs one simulation per value. Point `i` uses the seed
/// [`mix_seed`]`(seed, i)`; a failing point records its error and the sweep
/// moves on.
pub fn sweep(
    template: &SystemConfig,
    axis: SweepAxis,
    values: &[f64],
    num_slots: u64,
    seed: u64,
    decoder: Decoder,
) -> Result<Vec<SweepPoint>> {
    if values.is_empty() {
        return Err(Error::arg("values", "sweep needs at least one value"));
    }
    Ok(values
        .iter()
        .enumerate()
        .map(|(index, &value)| SweepPoint {
            index,
            value,
            outcome: sweep_point(template, axis, value, num_slots, mix_seed(seed, index as u64), decoder),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::lower_bound;
    use crate::sic::decode;

    #[test]
    fn zero_mean_draws_zeros() {
        let mut s = BlockStream::new(3, 0);
        for _ in 0..1000 {
            let m = sample_outcome(&mut s, 0.0, 4).unwrap();
            assert_eq!(m.counts(), &[0, 0, 0, 0]);
        }
    }

    #[test]
    fn sampler_moments() {
        let n = 1_000_000u64;
        let sampler = PoissonSampler::new(0.5).unwrap();
        let mut s = BlockStream::new(11, 0);
        let mut buf = [0u32; 4];
        let mut total = [0u64; 4];
        let mut zeros = [0u64; 4];
        for _ in 0..n / 4 {
            sample_into(&mut s, &sampler, &mut buf);
            for (i, &c) in buf.iter().enumerate() {
                total[i] += c as u64;
                zeros[i] += (c == 0) as u64;
            }
        }
        let draws = n as f64;
        let mean = total.iter().sum::<u64>() as f64 / draws;
        assert!((mean - 0.5).abs() < 4.0 * 0.5f64.sqrt() / 1e3, "{mean}");
        let p0 = zeros.iter().sum::<u64>() as f64 / draws;
        let a = (-0.5f64).exp();
        let sigma = (a * (1.0 - a) / draws).sqrt();
        assert!((p0 - a).abs() < 4.0 * sigma, "{p0}");
    }

    #[test]
    fn sampler_rejects_negative_mean() {
        assert!(PoissonSampler::new(-1.0).is_err());
        assert!(PoissonSampler::new(f64::NAN).is_err());
    }

    #[test]
    fn fast_path_matches_decoder() {
        let g = crate::model::gamma_db_to_linear(4.0).unwrap();
        for q in 1..=6 {
            let ladder = PowerLadder::new(g, q).unwrap();
            let sampler = PoissonSampler::new(0.6).unwrap();
            let mut s = BlockStream::new(5, q as u64);
            let mut m = OutcomeVector::zeros(q);
            for _ in 0..20_000 {
                sample_into(&mut s, &sampler, m.counts_mut());
                for dec in [Decoder::Paper, Decoder::Strict] {
                    let full = decode(&ladder, &m, dec).unwrap().decoded_count;
                    assert_eq!(slot_decoded(&ladder, m.counts(), dec), full);
                    if crate::sic::is_all_singleton(&m) {
                        assert_eq!(full as u64, m.active_users());
                    }
                }
            }
        }
    }

    #[test]
    fn single_level_is_slotted_aloha() {
        let cfg = SystemConfig::new(1, 1, 2.0, 1.0);
        let est = simulate(&cfg, 1_000_000, 1, Decoder::Paper).unwrap();
        let exact = (-1f64).exp();
        assert!((est.mean - exact).abs() < 4.0 * est.std_error, "{est:?}");
        let sd = (exact * (1.0 - exact)).sqrt();
        assert!((est.std_error - sd / 1e3).abs() < 1e-5);
    }

    #[test]
    fn two_levels_track_lower_bound() {
        let g = crate::model::gamma_db_to_linear(4.0).unwrap();
        let lambda = 2f64.sqrt();
        let cfg = SystemConfig::new(1, 2, g, lambda);
        let est = simulate(&cfg, 1_000_000, 9, Decoder::Paper).unwrap();
        let lb = lower_bound(lambda, 2).unwrap();
        assert!((est.mean - lb).abs() < 4.0 * est.std_error, "{} vs {lb}", est.mean);
    }

    #[test]
    fn simulate_validates() {
        assert!(simulate(&SystemConfig::new(0, 2, 2.0, 1.0), 10, 0, Decoder::Paper).is_err());
        assert!(simulate(&SystemConfig::new(1, 2, 2.0, 1.0), 0, 0, Decoder::Paper).is_err());
    }

    #[test]
    fn single_slot_has_zero_error() {
        let est = simulate(&SystemConfig::new(1, 2, 2.0, 1.0), 1, 0, Decoder::Paper).unwrap();
        assert_eq!(est.std_error, 0.0);
    }

    #[test]
    fn partial_blocks_are_prefixes() {
        // Slot randomness depends only on (seed, slot index), so a longer run
        // shares its first block with a shorter one.
        let cfg = SystemConfig::new(1, 3, 2.0, 2.0);
        let ladder = cfg.ladder().unwrap();
        let sampler = PoissonSampler::new(cfg.per_level_mean()).unwrap();
        let short = run_block(&ladder, &sampler, Decoder::Paper, 4, 0, 100);
        let mut stream = BlockStream::new(4, 0);
        let mut counts = [0u32; 3];
        let mut sum = 0;
        for _ in 0..100 {
            sample_into(&mut stream, &sampler, &mut counts);
            sum += slot_decoded(&ladder, &counts, Decoder::Paper) as u64;
        }
        assert_eq!(short.sum, sum);
    }

    #[test]
    fn sweep_zero_lambda() {
        let cfg = SystemConfig::new(1, 2, 2.0, 0.0);
        let pts = sweep(&cfg, SweepAxis::Lambda, &[0.0], 10_000, 1, Decoder::Paper).unwrap();
        assert_eq!(pts.len(), 1);
        let (est, b) = pts[0].outcome.as_ref().unwrap();
        assert_eq!(est.mean, 0.0);
        assert_eq!((b.upper, b.lower), (0.0, 0.0));
    }

    #[test]
    fn sweep_reports_bad_points_and_continues() {
        let cfg = SystemConfig::new(1, 2, 2.0, 1.0);
        let pts = sweep(&cfg, SweepAxis::Lambda, &[1.0, -1.0, 2.0], 1000, 1, Decoder::Paper).unwrap();
        assert!(pts[0].outcome.is_ok());
        assert!(pts[1].outcome.is_err());
        assert!(pts[2].outcome.is_ok());

        let pts = sweep(
            &cfg,
            SweepAxis::Levels(LambdaRule::SqrtQ),
            &[1.0, 2.5, 0.0, 3.0],
            1000,
            1,
            Decoder::Paper,
        )
        .unwrap();
        let ok: Vec<bool> = pts.iter().map(|p| p.outcome.is_ok()).collect();
        assert_eq!(ok, [true, false, false, true]);

        assert!(sweep(&cfg, SweepAxis::Lambda, &[], 10, 1, Decoder::Paper).is_err());
    }

    #[test]
    fn sweep_levels_uses_rule() {
        let cfg = SystemConfig::new(1, 1, 2.0, 0.7);
        let pts = sweep(
            &cfg,
            SweepAxis::Levels(LambdaRule::SqrtQ),
            &[4.0],
            1000,
            1,
            Decoder::Paper,
        )
        .unwrap();
        assert_eq!(pts[0].outcome.as_ref().unwrap().1.lambda, 2.0);
        let pts = sweep(
            &cfg,
            SweepAxis::Levels(LambdaRule::Fixed),
            &[4.0],
            1000,
            1,
            Decoder::Paper,
        )
        .unwrap();
        assert_eq!(pts[0].outcome.as_ref().unwrap().1.lambda, 0.7);
    }
}
