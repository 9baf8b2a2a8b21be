//! Closed-form per-channel throughput bounds.
//!
//! With `x = λ/Q`, each level holds `Poisson(x)` users, so
//! `a = Pr(M = 0) = e^(−x)` and `b = Pr(M = 1) = x·e^(−x)`.
//!
//! - The upper bound `b·Σ_{q<Q} (a+b)^q` credits level `q` whenever every
//!   stronger level holds at most one user, ignoring SINR failures caused by
//!   collisions further down.
//! - The lower bound `Q·b·(a+b)^(Q−1)` credits only slots where no level
//!   collides, in which case every user decodes.
//!
//! Both coincide with `λe^(−λ)` at `Q = 1`. All values are per channel.

use crate::error::{Error, Result};

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(Error::arg(
            "lambda",
            format!("must be non-negative and finite, got {lambda}"),
        ));
    }
    Ok(())
}

fn check_q(q: usize) -> Result<()> {
    if q == 0 {
        return Err(Error::arg("q", "Q must be at least 1"));
    }
    Ok(())
}

/// `ln((1+x)e^(−x))`, accurate for small `x`.
fn ln_no_collision(x: f64) -> f64 {
    x.ln_1p() - x
}

/// Upper bound on per-channel throughput.
///
/// Evaluated as the explicit finite sum; the geometric closed form is `0/0`
/// at `λ = 0`.
pub fn upper_bound(lambda: f64, q: usize) -> Result<f64> {
    check_lambda(lambda)?;
    check_q(q)?;
    let x = lambda / q as f64;
    let b = x * (-x).exp();
    let ratio = (1.0 + x) * (-x).exp();
    let mut term = 1.0;
    let mut sum = 0.0;
    for _ in 0..q {
        sum += term;
        term *= ratio;
    }
    Ok(b * sum)
}

/// Lower bound on per-channel throughput,
/// `λe^(−λ/Q)((1+λ/Q)e^(−λ/Q))^(Q−1)`.
pub fn lower_bound(lambda: f64, q: usize) -> Result<f64> {
    check_lambda(lambda)?;
    check_q(q)?;
    if lambda == 0.0 {
        return Ok(0.0);
    }
    let x = lambda / q as f64;
    Ok(lambda * (-x + (q - 1) as f64 * ln_no_collision(x)).exp())
}

/// Upper and lower bound at one operating point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundsPoint {
    pub lambda: f64,
    pub q: usize,
    pub upper: f64,
    pub lower: f64,
}

impl BoundsPoint {
    pub fn new(lambda: f64, q: usize) -> Result<Self> {
        Ok(Self {
            lambda,
            q,
            upper: upper_bound(lambda, q)?,
            lower: lower_bound(lambda, q)?,
        })
    }
}

/// Maximiser and maximum of the lower bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub lambda: f64,
    pub value: f64,
}

/// The lower bound is unimodal in `λ` with its maximum at `λ = √Q`, where it
/// equals `w(Q) = √Q·e^(−√Q)·(1 + 1/√Q)^(Q−1)`.
pub fn lower_bound_peak(q: usize) -> Result<Peak> {
    check_q(q)?;
    let s = (q as f64).sqrt();
    let value = s * (-s).exp() * (1.0 + 1.0 / s).powi(q as i32 - 1);
    Ok(Peak { lambda: s, value })
}

/// Large-`Q` approximation `√Q·e^(−1/√Q)` of the lower bound's maximum,
/// obtained by replacing `1 + x` with `e^x`.
///
/// This is an approximation only: it overstates the true peak (e.g. `9.05`
/// against `5.69` at `Q = 100`) because it drops the second-order term of
/// `ln(1 + x)`, and the further simplification to `√Q − 1` inherits the same
/// error. The true peak still grows like `√Q`, with `w(Q)/√Q → e^(−1/2)`.
pub fn asymptotic_peak(q: usize) -> Result<f64> {
    check_q(q)?;
    let s = (q as f64).sqrt();
    Ok(s * (-1.0 / s).exp())
}

const GOLDEN: f64 = 0.618_033_988_749_894_9;
const SCAN_POINTS: usize = 400;

/// `λ_Q`, the traffic intensity maximising [`upper_bound`] for `Q` levels.
///
/// A coarse scan over `(0, 4√Q]` brackets the maximum, then golden-section
/// search refines it to an absolute tolerance `tol` on `λ`.
pub fn argmax_upper_bound(q: usize, tol: f64) -> Result<f64> {
    check_q(q)?;
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::arg("tol", format!("must be positive, got {tol}")));
    }
    let f = |lambda: f64| upper_bound(lambda, q).expect("λ is in range");
    let hi = 4.0 * (q as f64).sqrt();
    let step = hi / SCAN_POINTS as f64;

    let mut best = 1;
    let mut best_val = f(step);
    for i in 2..=SCAN_POINTS {
        let v = f(i as f64 * step);
        if v > best_val {
            best = i;
            best_val = v;
        }
    }

    let mut lo = (best - 1) as f64 * step;
    let mut hi = ((best + 1).min(SCAN_POINTS)) as f64 * step;
    let mut c = hi - GOLDEN * (hi - lo);
    let mut d = lo + GOLDEN * (hi - lo);
    let mut fc = f(c);
    let mut fd = f(d);
    while hi - lo > tol {
        if fc > fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - GOLDEN * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + GOLDEN * (hi - lo);
            fd = f(d);
        }
    }
    Ok(0.5 * (lo + hi))
}
