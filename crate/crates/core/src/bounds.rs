//! Numerical-convergence and statistical bounds for restricted-step boosting.
//!
//! Everything here is plain formula evaluation; inner minimizations over the
//! split point `l` are exhaustive scans.

use crate::boost::{RunTrace, StepSchedule};
use crate::error::{Error, Result};
use crate::loss::LossSpec;

/// Inputs of the multi-step convergence bound.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundInputs {
    /// Step caps `h_0, h_1, ...`.
    pub h_seq: Vec<f64>,
    /// Per-step slack `eps_bar_j = h_j^2 M / 2 + eps_j`.
    pub eps_bar_seq: Vec<f64>,
    pub f_bar_norm: f64,
    pub f0_norm: f64,
    /// `max(0, A(f_0) - A(f_bar))`.
    pub delta_a0: f64,
    pub curvature: f64,
}

impl BoundInputs {
    /// Inputs for a traced run against a reference with 1-norm `f_bar_norm`
    /// and empirical risk `q_ref`. Gaps live in the loss's `psi` space, and
    /// the inner tolerance is carried into that space step by step.
    pub fn from_trace(
        trace: &RunTrace,
        schedule: &StepSchedule,
        f_bar_norm: f64,
        q_ref: f64,
    ) -> Result<Self> {
        let k = trace.rows.len();
        let h_seq = schedule.caps(k).ok_or_else(|| {
            Error::Precondition("convergence bounds need a restricted schedule".into())
        })?;
        let loss = trace.loss;
        let curvature = loss.curvature();
        let eps_bar_seq = h_seq
            .iter()
            .zip(&trace.rows)
            .map(|(h, row)| {
                0.5 * h * h * curvature + loss.psi_slack(row.train_obj, trace.inner_tol)
            })
            .collect();
        Ok(BoundInputs {
            h_seq,
            eps_bar_seq,
            f_bar_norm,
            f0_norm: 0.0,
            delta_a0: psi_gap(&loss, trace.initial_objective, q_ref),
            curvature,
        })
    }

    fn validate(&self, k: usize) -> Result<()> {
        if self.h_seq.len() < k || self.eps_bar_seq.len() < k {
            return Err(Error::Precondition(format!(
                "bound needs {k} steps, sequences have {} and {}",
                self.h_seq.len(),
                self.eps_bar_seq.len()
            )));
        }
        if self.h_seq.iter().any(|&h| !(h > 0.0)) || self.eps_bar_seq.iter().any(|&e| !(e >= 0.0)) {
            return Err(Error::Precondition(
                "step caps must be positive and slacks nonnegative".into(),
            ));
        }
        nonnegative(&[self.f_bar_norm, self.f0_norm, self.delta_a0, self.curvature])
    }
}

fn nonnegative(values: &[f64]) -> Result<()> {
    match values.iter().find(|v| !(**v >= 0.0)) {
        Some(v) => Err(Error::Precondition(format!(
            "expected a nonnegative value, got {v}"
        ))),
        None => Ok(()),
    }
}

/// `max(0, psi(q) - psi(q_ref))`.
pub fn psi_gap(loss: &LossSpec, q: f64, q_ref: f64) -> f64 {
    (loss.psi(q) - loss.psi(q_ref)).max(0.0)
}

/// Observed gaps `max(0, psi(Q(f_k)) - psi(q_ref))` for `k = 0..=K`.
pub fn observed_gaps(trace: &RunTrace, q_ref: f64) -> Vec<f64> {
    trace
        .objectives()
        .into_iter()
        .map(|q| psi_gap(&trace.loss, q, q_ref))
        .collect()
}

/// `s_0 .. s_k` with `s_j = base + sum_{i<j} h_i`.
fn partial_sums(base: f64, h: &[f64], k: usize) -> Vec<f64> {
    let mut s = Vec::with_capacity(k + 1);
    let mut acc = base;
    s.push(acc);
    for &hi in &h[..k] {
        acc += hi;
        s.push(acc);
    }
    s
}

fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        1.0
    } else {
        num / den
    }
}

/// Multi-step bound on the gap after `k` steps.
pub fn lemma42_bound(inputs: &BoundInputs, k: usize) -> Result<f64> {
    inputs.validate(k)?;
    if k == 0 {
        return Ok(inputs.delta_a0);
    }
    let fb = inputs.f_bar_norm;
    let s = partial_sums(inputs.f0_norm, &inputs.h_seq, k);
    let den = s[k] + fb;
    let tail: f64 = (1..=k)
        .map(|j| (s[j] + fb) / den * inputs.eps_bar_seq[j - 1])
        .sum();
    Ok((inputs.f0_norm + fb) / den * inputs.delta_a0 + tail)
}

fn check_schedule(h_seq: &[f64], needed: usize) -> Result<()> {
    if h_seq.is_empty() {
        return Err(Error::Precondition("empty step schedule".into()));
    }
    if h_seq.len() < needed {
        return Err(Error::Precondition(format!(
            "schedule has {} caps, need {needed}",
            h_seq.len()
        )));
    }
    if h_seq.iter().any(|&h| !(h > 0.0)) || h_seq.windows(2).any(|w| w[1] > w[0]) {
        return Err(Error::Precondition(
            "caps must be positive and nonincreasing".into(),
        ));
    }
    Ok(())
}

/// `min_{1<=l<=k} [l (s_l + fb)/(s_k + fb) h_0^2 + (k - l) h_l^2]`.
fn split_scan(h_seq: &[f64], s: &[f64], k: usize, fb: f64) -> f64 {
    let h0sq = h_seq[0] * h_seq[0];
    (1..=k)
        .map(|l| {
            let head = l as f64 * (s[l] + fb) / (s[k] + fb) * h0sq;
            let tail = if l < k {
                (k - l) as f64 * h_seq[l] * h_seq[l]
            } else {
                0.0
            };
            head + tail
        })
        .fold(f64::INFINITY, f64::min)
}

/// Gap bound for `f_0 = 0`, nonincreasing caps and per-step slack at most
/// `h_k^2 M / 2`.
pub fn cor43_bound(
    h_seq: &[f64],
    f_bar_norm: f64,
    delta_a0: f64,
    curvature: f64,
    k: usize,
) -> Result<f64> {
    check_schedule(h_seq, k)?;
    nonnegative(&[f_bar_norm, delta_a0, curvature])?;
    if k == 0 {
        return Ok(delta_a0);
    }
    let s = partial_sums(0.0, h_seq, k);
    let lead = ratio(f_bar_norm, s[k] + f_bar_norm) * delta_a0;
    if curvature == 0.0 {
        return Ok(lead);
    }
    Ok(lead + split_scan(h_seq, &s, k, f_bar_norm) * curvature)
}

/// Optimization term of the consistency rate after `k_m` steps, with
/// `beta_m = s_{k_m}`.
pub fn thm33_delta(h_seq: &[f64], k_m: usize, f_bar_norm: f64, curvature: f64) -> Result<f64> {
    check_schedule(h_seq, k_m + 1)?;
    nonnegative(&[f_bar_norm, curvature])?;
    if k_m == 0 {
        return Err(Error::Precondition("k_m must be at least 1".into()));
    }
    if curvature == 0.0 {
        return Ok(0.0);
    }
    let s = partial_sums(0.0, h_seq, k_m);
    Ok(split_scan(h_seq, &s, k_m, f_bar_norm) * curvature)
}

/// Statistical bound on the true risk of an early-stopped ensemble.
pub fn thm32_bound(c_s: f64, m: usize, beta_m: f64, f_bar_norm: f64, q_f_bar: f64) -> Result<f64> {
    if m == 0 {
        return Err(Error::Precondition("m must be at least 1".into()));
    }
    nonnegative(&[c_s, beta_m, f_bar_norm])?;
    let root = (m as f64).sqrt();
    let approx = if f_bar_norm + beta_m == 0.0 {
        0.0
    } else {
        f_bar_norm / (f_bar_norm + beta_m)
    };
    Ok(q_f_bar + (2.0 * c_s + 1.0) * beta_m / root + (f_bar_norm + 1.0) / root + approx)
}

/// `2 gamma beta R`: uniform deviation of the risk over the `beta` ball.
pub fn uniform_dev_bound(gamma: f64, beta: f64, r: f64) -> Result<f64> {
    nonnegative(&[gamma, beta, r])?;
    Ok(2.0 * gamma * beta * r)
}

/// Smallest `C` with `R_m <= C / sqrt(m)` on the given `(m, R_m)` pairs.
pub fn fit_complexity_constant(points: &[(usize, f64)]) -> f64 {
    points
        .iter()
        .map(|&(m, r)| (m as f64).sqrt() * r)
        .fold(0.0, f64::max)
}
