//! Exact expected per-channel throughput by enumeration.
//!
//! Computes `E[η(m)] = Σ_m P(m)·η(m)` with `P(m) = Π_q Poisson(M_q; λ/Q)`
//! over every `m ∈ {0..M_max}^Q`. The neglected mass is charged the worst
//! case `η ≤ Q`, giving a rigorous error bound `Q·(1 − F(M_max)^Q)`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::PowerLadder;
use crate::sic::{decoded_count, Decoder};

/// Largest `Q` accepted by [`exact_throughput`].
pub const MAX_ORACLE_LEVELS: usize = 6;

/// Largest per-level truncation point [`truncation_level`] will return.
pub const MAX_TRUNCATION: usize = 200;

/// Terms kept when summing Poisson tails.
const TAIL_TERMS: usize = MAX_TRUNCATION + 200;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleResult {
    /// Expected decoded packets per channel per slot over the enumerated
    /// states.
    pub value: f64,
    pub truncation_error_bound: f64,
    pub m_max: usize,
    /// `(m_max + 1)^Q`.
    pub enumerated_states: u64,
    pub decoder: Decoder,
}

/// `p_0 = e^(−μ)`, `p_{k+1} = p_k·μ/(k+1)` for `k < len`.
fn poisson_pmf(mean: f64, len: usize) -> Vec<f64> {
    let mut pmf = Vec::with_capacity(len);
    let mut p = (-mean).exp();
    for k in 0..len {
        pmf.push(p);
        p *= mean / (k + 1) as f64;
    }
    pmf
}

/// `Q·(1 − (1 − tail)^Q)` without cancellation.
fn worst_case_loss(tail: f64, q: usize) -> f64 {
    let q = q as f64;
    -q * (q * (-tail).ln_1p()).exp_m1()
}

/// Smallest `M_max` such that charging `Q` packets to every state with some
/// `M_q > M_max` costs at most `epsilon`.
pub fn truncation_level(mean: f64, epsilon: f64, q: usize) -> Result<usize> {
    if !(mean.is_finite() && mean > 0.0) {
        return Err(Error::arg("mean", format!("must be positive and finite, got {mean}")));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::arg("epsilon", format!("must lie in (0, 1), got {epsilon}")));
    }
    if q == 0 {
        return Err(Error::arg("q", "Q must be at least 1"));
    }
    let infeasible = Error::TruncationInfeasible {
        epsilon,
        max: MAX_TRUNCATION,
    };
    // Beyond this the Poisson mass past TAIL_TERMS is no longer negligible,
    // and the truncation point is far above MAX_TRUNCATION anyway.
    if mean > 150.0 {
        return Err(infeasible);
    }
    let pmf = poisson_pmf(mean, TAIL_TERMS);
    // tails[m] = Pr(M > m), summed smallest-first.
    let mut tails = vec![0.0; TAIL_TERMS];
    let mut acc = 0.0;
    for m in (0..TAIL_TERMS - 1).rev() {
        acc += pmf[m + 1];
        tails[m] = acc;
    }
    (0..=MAX_TRUNCATION)
        .find(|&m| worst_case_loss(tails[m], q) <= epsilon)
        .ok_or(infeasible)
}

/// Error bound reported for truncation point `m_max`.
pub fn truncation_error_bound(mean: f64, m_max: usize, q: usize) -> f64 {
    if mean == 0.0 {
        return 0.0;
    }
    let pmf = poisson_pmf(mean, TAIL_TERMS.max(m_max + 2));
    let tail: f64 = pmf[m_max + 1..].iter().rev().sum();
    worst_case_loss(tail, q)
}

/// Compensated (Neumaier) accumulator.
#[derive(Default, Clone, Copy)]
struct Sum {
    total: f64,
    carry: f64,
}

impl Sum {
    fn add(&mut self, x: f64) {
        let t = self.total + x;
        if self.total.abs() >= x.abs() {
            self.carry += (self.total - t) + x;
        } else {
            self.carry += (x - t) + self.total;
        }
        self.total = t;
    }

    fn value(self) -> f64 {
        self.total + self.carry
    }
}

struct Enumeration<'a> {
    ladder: &'a PowerLadder,
    pmf: &'a [f64],
    decoder: Decoder,
    prune: bool,
}

impl Enumeration<'_> {
    fn walk(&self, counts: &mut [u32], depth: usize, weight: f64, acc: &mut Sum) {
        let q = counts.len();
        if depth == q {
            let eta = decoded_count(self.ladder, counts, self.decoder);
            if eta > 0 {
                acc.add(weight * eta as f64);
            }
            return;
        }
        for (k, &p) in self.pmf.iter().enumerate() {
            counts[depth] = k as u32;
            // A collision on level 1 leaves nothing decodable below it.
            if self.prune && depth == 0 && k >= 2 {
                break;
            }
            self.walk(counts, depth + 1, weight * p, acc);
        }
    }

    /// Sum over every state whose first level holds `first` users.
    fn subtree(&self, q: usize, first: usize) -> f64 {
        if self.prune && first >= 2 {
            return 0.0;
        }
        let mut counts = vec![0u32; q];
        counts[0] = first as u32;
        let mut acc = Sum::default();
        self.walk(&mut counts, 1, self.pmf[first], &mut acc);
        acc.value()
    }
}

fn enumerate(
    lambda: f64,
    q: usize,
    sinr_target: f64,
    epsilon: f64,
    decoder: Decoder,
    prune: bool,
) -> Result<OracleResult> {
    if q == 0 {
        return Err(Error::arg("q", "Q must be at least 1"));
    }
    if q > MAX_ORACLE_LEVELS {
        return Err(Error::StateSpaceTooLarge {
            q,
            max: MAX_ORACLE_LEVELS,
        });
    }
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(Error::arg(
            "lambda",
            format!("must be non-negative and finite, got {lambda}"),
        ));
    }
    let ladder = PowerLadder::new(sinr_target, q)?;
    if lambda == 0.0 {
        return Ok(OracleResult {
            value: 0.0,
            truncation_error_bound: 0.0,
            m_max: 0,
            enumerated_states: 1,
            decoder,
        });
    }
    let mean = lambda / q as f64;
    let m_max = truncation_level(mean, epsilon, q)?;
    let pmf = poisson_pmf(mean, m_max + 1);
    let job = Enumeration {
        ladder: &ladder,
        pmf: &pmf,
        decoder,
        prune,
    };
    let partials: Vec<f64> = (0..=m_max).into_par_iter().map(|first| job.subtree(q, first)).collect();
    let mut total = Sum::default();
    for p in partials {
        total.add(p);
    }
    Ok(OracleResult {
        value: total.value(),
        truncation_error_bound: truncation_error_bound(mean, m_max, q),
        m_max,
        enumerated_states: (m_max as u64 + 1).pow(q as u32),
        decoder,
    })
}

/// Exact per-channel throughput up to a truncation error of at most
/// `epsilon`. Restricted to `Q ≤ 6`.
pub fn exact_throughput(
    lambda: f64,
    q: usize,
    sinr_target: f64,
    epsilon: f64,
    decoder: Decoder,
) -> Result<OracleResult> {
    enumerate(lambda, q, sinr_target, epsilon, decoder, true)
}
