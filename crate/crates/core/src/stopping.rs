//! Early stopping on the total step-size clock `sum |alpha_i|`.
//!
//! Budget rules stop before the step that would push the total past the
//! budget, so the stopped ensemble always satisfies `sum |alpha| <= budget`.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;

use crate::boost::{BoostConfig, Booster, Fit, RunTrace};
use crate::error::{Error, Result};
use crate::loss::LossSpec;
use crate::rng::{stream_rng, STREAM_SHUFFLE};
use crate::synth::Dataset;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleCriterion {
    ClassError,
    ConvexRisk,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StoppingRule {
    /// Budget `m^rho`.
    Rho(f64),
    /// Loss-specific budget strictly inside the consistency rate.
    Theory {
        slack: f64,
    },
    Cv {
        validation_fraction: f64,
    },
    Oracle(OracleCriterion),
    /// Run all `max_iters` steps.
    None,
}

pub const DEFAULT_VALIDATION_FRACTION: f64 = 1.0 / 3.0;

impl StoppingRule {
    pub fn validate(&self) -> Result<()> {
        let open_unit = |v: f64, what: &str| {
            if v > 0.0 && v < 1.0 {
                Ok(())
            } else {
                Err(Error::Precondition(format!(
                    "{what} must lie in (0, 1), got {v}"
                )))
            }
        };
        match *self {
            StoppingRule::Rho(rho) => open_unit(rho, "rho"),
            StoppingRule::Theory { slack } => {
                if (0.0..=1.0).contains(&slack) {
                    Ok(())
                } else {
                    Err(Error::Precondition(format!(
                        "slack must lie in [0, 1], got {slack}"
                    )))
                }
            }
            StoppingRule::Cv {
                validation_fraction,
            } => open_unit(validation_fraction, "validation fraction"),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for StoppingRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StoppingRule::Rho(rho) => write!(f, "rho:{rho}"),
            StoppingRule::Theory { slack } => write!(f, "theory:{slack}"),
            StoppingRule::Cv {
                validation_fraction,
            } => write!(f, "cv:{validation_fraction}"),
            StoppingRule::Oracle(OracleCriterion::ClassError) => f.write_str("oracle:error"),
            StoppingRule::Oracle(OracleCriterion::ConvexRisk) => f.write_str("oracle:convex"),
            StoppingRule::None => f.write_str("none"),
        }
    }
}

impl FromStr for StoppingRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let num = |t: &str| {
            t.parse::<f64>()
                .map_err(|_| Error::Precondition(format!("invalid number '{t}' in stop rule")))
        };
        let parts: Vec<&str> = s.split(':').map(str::trim).collect();
        let rule = match parts.as_slice() {
            ["rho", v] => StoppingRule::Rho(num(v)?),
            ["theory", v] => StoppingRule::Theory { slack: num(v)? },
            ["cv"] => StoppingRule::Cv {
                validation_fraction: DEFAULT_VALIDATION_FRACTION,
            },
            ["cv", v] => StoppingRule::Cv {
                validation_fraction: num(v)?,
            },
            ["oracle", "error"] => StoppingRule::Oracle(OracleCriterion::ClassError),
            ["oracle", "convex"] => StoppingRule::Oracle(OracleCriterion::ConvexRisk),
            ["none"] => StoppingRule::None,
            _ => return Err(Error::Precondition(format!("invalid stop rule '{s}'"))),
        };
        rule.validate()?;
        Ok(rule)
    }
}

pub fn rho_budget(m: usize, rho: f64) -> Result<f64> {
    if m == 0 {
        return Err(Error::Precondition("m must be at least 1".into()));
    }
    StoppingRule::Rho(rho).validate()?;
    Ok((m as f64).powf(rho))
}

pub fn theory_budget(loss: &LossSpec, m: usize, slack: f64) -> Result<f64> {
    if m < 2 {
        return Err(Error::Precondition("m must be at least 2".into()));
    }
    loss.validate()?;
    StoppingRule::Theory { slack }.validate()?;
    let mf = m as f64;
    let keep = 1.0 - slack;
    Ok(match *loss {
        LossSpec::Logistic => mf.powf(0.5 * keep),
        LossSpec::Exponential => mf.ln().powf(keep),
        LossSpec::LeastSquares | LossSpec::ModifiedLeastSquares => mf.powf(0.25 * keep),
        LossSpec::PNorm { p } => mf.powf(keep / (2.0 * p)),
    })
}

/// Boost for at most `config.max_iters` steps, stopping before any step that
/// would take the total step-size past `budget`.
pub fn fit_with_budget(config: &BoostConfig, data: &Dataset, budget: f64) -> Result<Fit> {
    if !(budget >= 0.0) {
        return Err(Error::Precondition(format!(
            "budget must be >= 0, got {budget}"
        )));
    }
    let mut booster = Booster::new(config.clone(), data)?;
    let mut trace = booster.empty_trace(booster.objective());
    while booster.iteration() < config.max_iters {
        let k = booster.iteration();
        let step = booster.propose().map_err(|e| e.at_iteration(k))?;
        if booster.total_alpha() + step.alpha > budget {
            break;
        }
        trace
            .rows
            .push(booster.commit(&step).map_err(|e| e.at_iteration(k))?);
    }
    Ok(Fit {
        trace,
        ensemble: booster.into_ensemble(),
    })
}

/// Index of the smallest error; ties go to the earliest (smallest) budget.
pub fn select_budget(errors: &[f64]) -> Result<usize> {
    argmin(errors).ok_or_else(|| Error::Precondition("empty validation curve".into()))
}

fn argmin(values: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &v) in values.iter().enumerate() {
        if best.is_none_or(|b| v < values[b]) {
            best = Some(i);
        }
    }
    best
}

#[derive(Debug, Clone)]
pub struct CvOutcome {
    pub budget: f64,
    /// Realized total step-sizes on the training split, starting at 0.
    pub budgets: Vec<f64>,
    /// Validation classification error at each entry of `budgets`.
    pub validation_errors: Vec<f64>,
    pub fit: Fit,
}

/// Hold-out selection of the total step-size budget, then a budgeted refit
/// on all of `data`.
pub fn cv_stop(
    data: &Dataset,
    config: &BoostConfig,
    validation_fraction: f64,
) -> Result<CvOutcome> {
    StoppingRule::Cv {
        validation_fraction,
    }
    .validate()?;
    let m = data.len();
    if m < 3 {
        return Err(Error::Precondition(format!(
            "cross-validation needs at least 3 points, got {m}"
        )));
    }
    let n_val = ((m as f64 * validation_fraction).round() as usize).clamp(1, m - 1);
    let mut order: Vec<usize> = (0..m).collect();
    order.shuffle(&mut stream_rng(config.seed, STREAM_SHUFFLE));
    let train = data.select(&order[..m - n_val]);
    let valid = data.select(&order[m - n_val..]);

    let split_config = BoostConfig {
        true_risk: None,
        ..config.clone()
    };
    let mut booster = Booster::new(split_config, &train)?;
    let mut scores = vec![0.0; valid.len()];
    let val_error = |scores: &[f64]| {
        let wrong = scores
            .iter()
            .zip(valid.y())
            .filter(|(&f, &y)| (if f >= 0.0 { 1.0 } else { -1.0 }) != y)
            .count();
        wrong as f64 / scores.len() as f64
    };
    let mut budgets = vec![0.0];
    let mut validation_errors = vec![val_error(&scores)];
    for _ in 0..config.max_iters {
        booster.step()?;
        let term = *booster
            .ensemble()
            .terms()
            .last()
            .expect("a term was just added");
        for (s, &x) in scores.iter_mut().zip(valid.x()) {
            *s += term.coef * term.basis.value(x);
        }
        budgets.push(booster.total_alpha());
        validation_errors.push(val_error(&scores));
    }
    let budget = budgets[select_budget(&validation_errors)?];
    let fit = fit_with_budget(config, data, budget)?;
    Ok(CvOutcome {
        budget,
        budgets,
        validation_errors,
        fit,
    })
}

/// Row index minimizing the chosen true metric; ties go to the earliest row.
pub fn oracle_stop(trace: &RunTrace, criterion: OracleCriterion) -> Result<usize> {
    let values: Option<Vec<f64>> = trace
        .rows
        .iter()
        .map(|r| match criterion {
            OracleCriterion::ClassError => r.true_err,
            OracleCriterion::ConvexRisk => r.true_excess,
        })
        .collect();
    let values = values.ok_or_else(|| {
        Error::Precondition("oracle stopping needs a trace with true risk recorded".into())
    })?;
    argmin(&values)
        .ok_or_else(|| Error::Precondition("oracle stopping needs a nonempty trace".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::Sign;
    use crate::boost::TraceRow;
    use approx::assert_abs_diff_eq;

    #[test]
    fn budgets() {
        assert_abs_diff_eq!(
            rho_budget(100, 0.25).unwrap(),
            3.1622776601683795,
            epsilon = 1e-12
        );
        assert_eq!(rho_budget(1, 0.3).unwrap(), 1.0);
        assert_abs_diff_eq!(rho_budget(10_000, 0.25).unwrap(), 10.0, epsilon = 1e-12);
        assert!(rho_budget(10, 1.0).is_err());

        let ls = LossSpec::LeastSquares;
        assert_abs_diff_eq!(
            theory_budget(&ls, 10_000, 0.2).unwrap(),
            6.309573444801933,
            epsilon = 1e-12
        );
        let m = 10f64.exp().round() as usize;
        assert_abs_diff_eq!(
            theory_budget(&LossSpec::Exponential, m, 0.0).unwrap(),
            10.0,
            epsilon = 1e-4
        );
        assert_eq!(theory_budget(&LossSpec::Logistic, 4, 1.0).unwrap(), 1.0);
        assert!(theory_budget(&ls, 1, 0.2).is_err());
    }

    #[test]
    fn budget_selection() {
        let errs = [0.4, 0.2, 0.2, 0.3];
        let budgets = [0.5, 1.0, 1.5, 2.0];
        assert_eq!(budgets[select_budget(&errs).unwrap()], 1.0);
        assert_eq!(select_budget(&[0.5, 0.4, 0.3]).unwrap(), 2);
        assert!(select_budget(&[]).is_err());
    }

    fn row(err: Option<f64>, excess: Option<f64>) -> TraceRow {
        TraceRow {
            iter: 1,
            threshold: 0.5,
            sign: Sign::Plus,
            alpha: 0.1,
            total_alpha: 0.1,
            s_k: 0.1,
            train_obj: 0.4,
            train_err: 0.0,
            true_err: err,
            true_excess: excess,
        }
    }

    fn trace(rows: Vec<TraceRow>) -> RunTrace {
        RunTrace {
            rows,
            initial_objective: 0.5,
            loss: LossSpec::LeastSquares,
            normalized: false,
            exact_search: false,
            inner_tol: 1e-10,
        }
    }

    #[test]
    fn oracle_examples() {
        let t = trace(
            [0.4, 0.3, 0.35]
                .iter()
                .map(|&e| row(Some(e), Some(0.0)))
                .collect(),
        );
        assert_eq!(oracle_stop(&t, OracleCriterion::ClassError).unwrap(), 1);
        let t = trace(vec![row(Some(0.3), Some(0.0)); 3]);
        assert_eq!(oracle_stop(&t, OracleCriterion::ClassError).unwrap(), 0);
        let t = trace(
            [0.2, 0.1, 0.15]
                .iter()
                .map(|&c| row(Some(0.0), Some(c)))
                .collect(),
        );
        assert_eq!(oracle_stop(&t, OracleCriterion::ConvexRisk).unwrap(), 1);
        let t = trace(vec![row(None, None)]);
        assert!(oracle_stop(&t, OracleCriterion::ClassError).is_err());
    }

    #[test]
    fn rule_parsing() {
        assert_eq!(
            "rho:0.25".parse::<StoppingRule>().unwrap(),
            StoppingRule::Rho(0.25)
        );
        assert_eq!(
            "cv".parse::<StoppingRule>().unwrap(),
            StoppingRule::Cv {
                validation_fraction: DEFAULT_VALIDATION_FRACTION
            }
        );
        assert_eq!(
            "oracle:convex".parse::<StoppingRule>().unwrap(),
            StoppingRule::Oracle(OracleCriterion::ConvexRisk)
        );
        assert!("rho:1.5".parse::<StoppingRule>().is_err());
        assert!("cv:0".parse::<StoppingRule>().is_err());
        assert!("early".parse::<StoppingRule>().is_err());
    }
}
