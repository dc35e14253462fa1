//! Convex margin losses used by the boosting procedure.
//!
//! Every loss is evaluated in margin form `phi(u)` with `u = f(x) * y` and
//! `y` in `{-1, +1}`. Each loss also carries the constants the convergence
//! analysis needs: a Lipschitz constant on `[-beta, beta]`, a uniform bound
//! `M` on the curvature of `h -> psi(Q(f + h g))`, and the auxiliary
//! monotone transform `psi` under which that curvature bound holds.
//!
//! The boosting update itself never applies `psi`; it only appears in bound
//! bookkeeping.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// A convex margin loss.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LossSpec {
    /// `ln(1 + exp(-u))`
    Logistic,
    /// `exp(-u)`
    Exponential,
    /// `(1 - u)^2 / 2`, the margin form of `(f - y)^2 / 2`
    LeastSquares,
    /// `max(1 - u, 0)^2 / 2`
    ModifiedLeastSquares,
    /// `|1 - u|^p` with `p >= 2`
    PNorm { p: f64 },
}

impl LossSpec {
    /// Build a p-norm loss, rejecting `p < 2`.
    pub fn p_norm(p: f64) -> Result<Self> {
        let spec = LossSpec::PNorm { p };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            LossSpec::PNorm { p } if !(p.is_finite() && p >= 2.0) => Err(Error::Precondition(
                format!("p-norm loss requires p >= 2, got {p}"),
            )),
            _ => Ok(()),
        }
    }

    /// The configuration name of the loss.
    pub fn name(&self) -> &'static str {
        match self {
            LossSpec::Logistic => "logistic",
            LossSpec::Exponential => "exponential",
            LossSpec::LeastSquares => "least_squares",
            LossSpec::ModifiedLeastSquares => "modified_least_squares",
            LossSpec::PNorm { .. } => "p_norm",
        }
    }

    /// Look a loss up by its configuration name. `p` is required for `p_norm`
    /// and ignored otherwise.
    pub fn from_name(name: &str, p: Option<f64>) -> Result<Self> {
        match name {
            "logistic" => Ok(LossSpec::Logistic),
            "exponential" => Ok(LossSpec::Exponential),
            "least_squares" => Ok(LossSpec::LeastSquares),
            "modified_least_squares" => Ok(LossSpec::ModifiedLeastSquares),
            "p_norm" => match p {
                Some(p) => LossSpec::p_norm(p),
                None => Err(Error::Precondition("p_norm loss requires p".into())),
            },
            other => Err(Error::Precondition(format!("unknown loss '{other}'"))),
        }
    }

    /// `phi(u)`. The caller guarantees `u` is finite.
    #[inline]
    pub fn value(&self, u: f64) -> f64 {
        match *self {
            LossSpec::Logistic => {
                if u > 0.0 {
                    (-u).exp().ln_1p()
                } else {
                    -u + u.exp().ln_1p()
                }
            }
            LossSpec::Exponential => (-u).exp(),
            LossSpec::LeastSquares => 0.5 * (1.0 - u) * (1.0 - u),
            LossSpec::ModifiedLeastSquares => {
                let r = (1.0 - u).max(0.0);
                0.5 * r * r
            }
            LossSpec::PNorm { p } => (1.0 - u).abs().powf(p),
        }
    }

    /// `phi'(u)`. At the modified least squares kink this returns the
    /// right-continuous branch (0).
    #[inline]
    pub fn derivative(&self, u: f64) -> f64 {
        match *self {
            LossSpec::Logistic => {
                // -1 / (1 + e^u), written to avoid overflow on either side.
                if u > 0.0 {
                    let e = (-u).exp();
                    -e / (1.0 + e)
                } else {
                    -1.0 / (1.0 + u.exp())
                }
            }
            LossSpec::Exponential => -(-u).exp(),
            LossSpec::LeastSquares => u - 1.0,
            LossSpec::ModifiedLeastSquares => {
                if u >= 1.0 {
                    0.0
                } else {
                    u - 1.0
                }
            }
            LossSpec::PNorm { p } => {
                let r = 1.0 - u;
                if r == 0.0 {
                    0.0
                } else {
                    -p * r.signum() * r.abs().powf(p - 1.0)
                }
            }
        }
    }

    /// `phi''(u)`, right-continuous at kinks.
    #[inline]
    pub fn second_derivative(&self, u: f64) -> f64 {
        match *self {
            LossSpec::Logistic => {
                let e = (-u.abs()).exp();
                e / ((1.0 + e) * (1.0 + e))
            }
            LossSpec::Exponential => (-u).exp(),
            LossSpec::LeastSquares => 1.0,
            LossSpec::ModifiedLeastSquares => {
                if u >= 1.0 {
                    0.0
                } else {
                    1.0
                }
            }
            LossSpec::PNorm { p } => {
                let r = (1.0 - u).abs();
                if p == 2.0 {
                    2.0
                } else {
                    p * (p - 1.0) * r.powf(p - 2.0)
                }
            }
        }
    }

    /// Lipschitz constant of `phi` on `[-beta, beta]`.
    pub fn lipschitz(&self, beta: f64) -> f64 {
        match *self {
            LossSpec::Logistic => 1.0,
            LossSpec::Exponential => beta.exp(),
            LossSpec::LeastSquares | LossSpec::ModifiedLeastSquares => 2.0 * (beta + 1.0),
            LossSpec::PNorm { p } => p * (beta + 1.0).powf(p - 1.0),
        }
    }

    /// Uniform bound `M` on the second derivative of `h -> psi(Q(f + h g))`
    /// for basis functions bounded by 1.
    pub fn curvature(&self) -> f64 {
        match self {
            LossSpec::Logistic => 0.25,
            _ => 1.0,
        }
    }

    /// The auxiliary transform `psi`. The caller guarantees `u` lies in the
    /// domain (`u > 0` for exponential, `u >= 0` for p-norm).
    #[inline]
    pub fn psi(&self, u: f64) -> f64 {
        match *self {
            LossSpec::Exponential => u.ln(),
            LossSpec::PNorm { p } => u.powf(2.0 / p) / (2.0 * (p - 1.0)),
            _ => u,
        }
    }

    /// Upper bound on `psi(q) - psi(q - tol)`: how much an objective slack
    /// of `tol` in risk space can grow to once `psi` is applied. Every `psi`
    /// here is concave, so the derivative at `q - tol` bounds the increment.
    pub fn psi_slack(&self, q: f64, tol: f64) -> f64 {
        if tol == 0.0 {
            return 0.0;
        }
        let lo = q - tol;
        match *self {
            LossSpec::Exponential | LossSpec::PNorm { .. } if lo <= 0.0 => f64::INFINITY,
            LossSpec::Exponential => tol / lo,
            LossSpec::PNorm { p } => tol * lo.powf(2.0 / p - 1.0) / (p * (p - 1.0)),
            _ => tol,
        }
    }
}

impl fmt::Display for LossSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LossSpec::PNorm { p } => write!(f, "p_norm(p={p})"),
            other => f.write_str(other.name()),
        }
    }
}

impl FromStr for LossSpec {
    type Err = Error;

    /// Parses `logistic`, `exponential`, `least_squares`,
    /// `modified_least_squares`, or `p_norm:<p>`.
    fn from_str(s: &str) -> Result<Self> {
        match s.split_once(':') {
            Some(("p_norm", p)) => {
                let p: f64 = p
                    .trim()
                    .parse()
                    .map_err(|_| Error::Precondition(format!("invalid p '{p}'")))?;
                LossSpec::p_norm(p)
            }
            _ => LossSpec::from_name(s, None),
        }
    }
}

fn finite(u: f64, what: &str) -> Result<f64> {
    if u.is_finite() {
        Ok(u)
    } else {
        Err(Error::NumericDomain(format!(
            "{what} must be finite, got {u}"
        )))
    }
}

pub fn loss_value(spec: &LossSpec, u: f64) -> Result<f64> {
    spec.validate()?;
    Ok(spec.value(finite(u, "margin")?))
}

pub fn loss_derivative(spec: &LossSpec, u: f64) -> Result<f64> {
    spec.validate()?;
    Ok(spec.derivative(finite(u, "margin")?))
}

pub fn lipschitz_bound(spec: &LossSpec, beta: f64) -> Result<f64> {
    if !(beta >= 0.0) {
        return Err(Error::Precondition(format!(
            "beta must be >= 0, got {beta}"
        )));
    }
    Ok(spec.lipschitz(beta))
}

pub fn curvature_bound(spec: &LossSpec) -> f64 {
    spec.curvature()
}

pub fn auxiliary_psi(spec: &LossSpec, u: f64) -> Result<f64> {
    let u = finite(u, "psi argument")?;
    match spec {
        LossSpec::Exponential if u <= 0.0 => Err(Error::NumericDomain(format!(
            "exponential psi = ln(u) needs u > 0, got {u}"
        ))),
        LossSpec::PNorm { .. } if u < 0.0 => Err(Error::NumericDomain(format!(
            "p-norm psi needs u >= 0, got {u}"
        ))),
        _ => Ok(spec.psi(u)),
    }
}
