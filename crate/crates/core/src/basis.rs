//! Signed stumps `sign * I(x <= a)` on `[0, 1]`.
//!
//! The dictionary is closed under negation through the sign. On a finite
//! sample only finitely many indicator patterns exist, so the infimum over
//! all thresholds reduces to a scan over [`candidate_thresholds`].

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    #[inline]
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn as_int(self) -> i8 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn from_int(s: i64) -> Result<Self> {
        match s {
            1 => Ok(Sign::Plus),
            -1 => Ok(Sign::Minus),
            other => Err(Error::Precondition(format!(
                "sign must be +1 or -1, got {other}"
            ))),
        }
    }

    pub fn negate(self) -> Self {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

/// A dictionary element `sign * I(x <= threshold)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignedStump {
    pub threshold: f64,
    pub sign: Sign,
}

impl SignedStump {
    pub fn new(threshold: f64, sign: Sign) -> Result<Self> {
        if !(0.0..=1.0).contains(&threshold) {
            return Err(Error::Precondition(format!(
                "stump threshold must lie in [0, 1], got {threshold}"
            )));
        }
        Ok(SignedStump { threshold, sign })
    }

    /// Evaluate without the domain check.
    #[inline]
    pub fn value(&self, x: f64) -> f64 {
        if x <= self.threshold {
            self.sign.value()
        } else {
            0.0
        }
    }

    pub fn negate(&self) -> Self {
        SignedStump {
            threshold: self.threshold,
            sign: self.sign.negate(),
        }
    }
}

pub fn stump_eval(s: &SignedStump, x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Precondition(format!(
            "x must lie in [0, 1], got {x}"
        )));
    }
    Ok(s.value(x))
}

/// One threshold per realizable indicator pattern on `xs`: `0`, the
/// midpoints between consecutive distinct sorted values, and `1`.
///
/// The result is strictly increasing. When every sample sits at `0` the
/// thresholds `0` and `1` realize the same pattern and only `0` is returned.
pub fn candidate_thresholds(xs: &[f64]) -> Result<Vec<f64>> {
    if xs.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if let Some(bad) = xs.iter().find(|x| !(0.0..=1.0).contains(*x)) {
        return Err(Error::Precondition(format!(
            "x must lie in [0, 1], got {bad}"
        )));
    }
    let mut sorted = xs.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.dedup();

    let mut out = Vec::with_capacity(sorted.len() + 1);
    out.push(0.0);
    // A sample at 0 is already isolated by threshold 0, so the first
    // midpoint would repeat that pattern.
    let skip = usize::from(sorted[0] == 0.0);
    for w in sorted.windows(2).skip(skip) {
        let mid = 0.5 * (w[0] + w[1]);
        // Adjacent doubles can round the midpoint onto the left value, which
        // still separates the pair because the test is x <= a.
        if mid > *out.last().unwrap() {
            out.push(mid);
        }
    }
    if *sorted.last().unwrap() > 0.0 && *out.last().unwrap() < 1.0 {
        out.push(1.0);
    }
    Ok(out)
}
