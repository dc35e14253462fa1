//! Greedy stagewise boosting over signed stumps.
//!
//! Each iteration scans every realizable stump pattern on the sample, solves
//! the one-dimensional problem `min_alpha Q(f + alpha g)` over the step
//! window `[-h_k, h_k]` (or the whole line in unrestricted mode), and adds
//! the best term to the ensemble. The model starts from `f = 0`.
//!
//! Least squares uses the closed-form step. Every other loss uses a
//! safeguarded Newton iteration whose stopping rule bounds the objective
//! slack of the step by `inner_tol`.

use std::fmt;
use std::str::FromStr;

use crate::basis::{candidate_thresholds, Sign, SignedStump};
use crate::error::{Error, Result};
use crate::line::{minimize_on_interval, minimize_unbounded, Stop};
use crate::loss::LossSpec;
use crate::synth::{CellMoments, Dataset, TargetModel};

/// Derivative tolerance scale for exact line searches.
const EXACT_DERIV_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Term {
    pub coef: f64,
    pub basis: SignedStump,
}

/// Additive model `f = sum coef * basis`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Ensemble {
    terms: Vec<Term>,
}

impl Ensemble {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, coef: f64, basis: SignedStump) {
        self.terms.push(Term { coef, basis });
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// `f(x)` without the domain check.
    #[inline]
    pub fn value(&self, x: f64) -> f64 {
        self.terms.iter().map(|t| t.coef * t.basis.value(x)).sum()
    }

    /// Keep the first `len` terms.
    pub fn truncate(&mut self, len: usize) {
        self.terms.truncate(len);
    }

    /// `sum |coef|`, an upper bound on the 1-norm of the represented function.
    pub fn coef_l1(&self) -> f64 {
        self.terms.iter().map(|t| t.coef.abs()).sum()
    }
}

pub fn ensemble_predict(ens: &Ensemble, x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Precondition(format!(
            "x must lie in [0, 1], got {x}"
        )));
    }
    Ok(ens.value(x))
}

/// Step-size caps `h_i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepSchedule {
    Constant {
        h: f64,
    },
    /// `h_i = scale * (i + 1)^(-exponent)`
    Power {
        scale: f64,
        exponent: f64,
    },
    /// No cap; every step is an exact line search.
    Unrestricted,
}

impl StepSchedule {
    pub fn validate(&self) -> Result<()> {
        match *self {
            StepSchedule::Constant { h } if !(h.is_finite() && h > 0.0) => Err(
                Error::Precondition(format!("constant step cap must be positive, got {h}")),
            ),
            StepSchedule::Power { scale, exponent }
                if !(scale.is_finite()
                    && scale > 0.0
                    && exponent.is_finite()
                    && exponent >= 0.0) =>
            {
                Err(Error::Precondition(format!(
                    "power schedule needs scale > 0 and exponent >= 0, got {scale}, {exponent}"
                )))
            }
            _ => Ok(()),
        }
    }

    /// Cap for iteration `i` (0-based), `None` when unrestricted.
    #[inline]
    pub fn cap(&self, i: usize) -> Option<f64> {
        match *self {
            StepSchedule::Constant { h } => Some(h),
            StepSchedule::Power { scale, exponent } => {
                Some(scale * ((i + 1) as f64).powf(-exponent))
            }
            StepSchedule::Unrestricted => None,
        }
    }

    /// The first `k` caps.
    pub fn caps(&self, k: usize) -> Option<Vec<f64>> {
        (0..k).map(|i| self.cap(i)).collect()
    }

    /// `s_k = sum_{i < k} h_i`, infinite when unrestricted.
    pub fn total(&self, k: usize) -> f64 {
        match self {
            StepSchedule::Unrestricted => f64::INFINITY,
            _ => (0..k).filter_map(|i| self.cap(i)).sum(),
        }
    }

    /// Whether `sum h = inf` and `sum h^2 < inf`.
    pub fn is_consistent(&self) -> bool {
        matches!(*self, StepSchedule::Power { exponent, .. } if exponent > 0.5 && exponent <= 1.0)
    }

    pub fn is_restricted(&self) -> bool {
        !matches!(self, StepSchedule::Unrestricted)
    }
}

impl fmt::Display for StepSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StepSchedule::Constant { h } => write!(f, "constant:{h}"),
            StepSchedule::Power { scale, exponent } => write!(f, "power:{scale}:{exponent}"),
            StepSchedule::Unrestricted => f.write_str("unrestricted"),
        }
    }
}

impl FromStr for StepSchedule {
    type Err = Error;

    /// `constant:<h>`, `power:<scale>:<exponent>` or `unrestricted`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').map(str::trim).collect();
        let num = |t: &str| {
            t.parse::<f64>()
                .map_err(|_| Error::Precondition(format!("invalid number '{t}' in schedule")))
        };
        let schedule = match parts.as_slice() {
            ["constant", h] => StepSchedule::Constant { h: num(h)? },
            ["power", scale, exponent] => StepSchedule::Power {
                scale: num(scale)?,
                exponent: num(exponent)?,
            },
            ["unrestricted"] => StepSchedule::Unrestricted,
            _ => return Err(Error::Precondition(format!("invalid schedule '{s}'"))),
        };
        schedule.validate()?;
        Ok(schedule)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoostConfig {
    pub loss: LossSpec,
    pub schedule: StepSchedule,
    pub max_iters: usize,
    /// Allowed objective slack of each greedy step.
    pub inner_tol: f64,
    pub seed: u64,
    /// When set, every trace row carries the exact true classification error
    /// and excess least-squares risk under this model.
    pub true_risk: Option<TargetModel>,
    /// Rescale each candidate so its empirical second moment is 1.
    pub normalize_basis: bool,
}

impl Default for BoostConfig {
    fn default() -> Self {
        BoostConfig {
            loss: LossSpec::LeastSquares,
            schedule: StepSchedule::Power {
                scale: 1.0,
                exponent: 2.0 / 3.0,
            },
            max_iters: 100,
            inner_tol: 1e-10,
            seed: 0,
            true_risk: None,
            normalize_basis: false,
        }
    }
}

impl BoostConfig {
    pub fn validate(&self) -> Result<()> {
        self.loss.validate()?;
        self.schedule.validate()?;
        if !(self.inner_tol >= 0.0) {
            return Err(Error::Precondition(format!(
                "inner_tol must be >= 0, got {}",
                self.inner_tol
            )));
        }
        Ok(())
    }
}

/// Outcome of one greedy search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Step {
    pub stump: SignedStump,
    /// Step length along the (possibly normalized) basis function, `>= 0`.
    pub alpha: f64,
    /// Empirical risk after the step.
    pub objective: f64,
    /// Coefficient added to `I(x <= threshold)`, sign included.
    coef: f64,
    candidate: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub iter: usize,
    pub threshold: f64,
    pub sign: Sign,
    pub alpha: f64,
    pub total_alpha: f64,
    pub s_k: f64,
    pub train_obj: f64,
    pub train_err: f64,
    pub true_err: Option<f64>,
    pub true_excess: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace {
    pub rows: Vec<TraceRow>,
    /// Empirical risk of `f = 0`.
    pub initial_objective: f64,
    pub loss: LossSpec,
    pub normalized: bool,
    pub exact_search: bool,
    pub inner_tol: f64,
}

impl RunTrace {
    pub const CSV_HEADER: &'static str =
        "iter,threshold,sign,alpha,total_alpha,s_k,train_obj,train_err,true_err,true_excess";

    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(64 * (self.rows.len() + 1));
        out.push_str(Self::CSV_HEADER);
        out.push('\n');
        let opt = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{}\n",
                r.iter,
                r.threshold,
                r.sign.as_int(),
                r.alpha,
                r.total_alpha,
                r.s_k,
                r.train_obj,
                r.train_err,
                opt(r.true_err),
                opt(r.true_excess),
            ));
        }
        out
    }

    /// Objective after 0, 1, ..., k steps.
    pub fn objectives(&self) -> Vec<f64> {
        std::iter::once(self.initial_objective)
            .chain(self.rows.iter().map(|r| r.train_obj))
            .collect()
    }
}

/// A finished run: the trace and the fitted ensemble.
#[derive(Debug, Clone)]
pub struct Fit {
    pub trace: RunTrace,
    pub ensemble: Ensemble,
}

/// Per-cell state for exact true-risk tracking.
#[derive(Debug, Clone)]
struct RiskTracker {
    cells: Vec<CellMoments>,
    /// Number of leading cells covered by each candidate stump.
    cover: Vec<usize>,
    values: Vec<f64>,
}

impl RiskTracker {
    fn new(model: &TargetModel, thresholds: &[f64], ens: &Ensemble) -> Self {
        let mut bounds = thresholds.to_vec();
        bounds.push(0.0);
        bounds.push(1.0);
        bounds.sort_by(f64::total_cmp);
        bounds.dedup();
        let cells = bounds
            .windows(2)
            .map(|w| model.moments(w[0], w[1]))
            .collect();
        let rights = &bounds[1..];
        let cover = thresholds
            .iter()
            .map(|&t| rights.partition_point(|&r| r <= t))
            .collect();
        let values = bounds
            .windows(2)
            .map(|w| ens.value(0.5 * (w[0] + w[1])))
            .collect();
        RiskTracker {
            cells,
            cover,
            values,
        }
    }

    fn add(&mut self, candidate: usize, coef: f64) {
        for v in &mut self.values[..self.cover[candidate]] {
            *v += coef;
        }
    }

    fn metrics(&self) -> (f64, f64) {
        self.cells
            .iter()
            .zip(&self.values)
            .fold((0.0, 0.0), |(err, exc), (cell, &c)| {
                (err + cell.class_error(c), exc + cell.half_sq_dev(c))
            })
    }
}

/// Incremental boosting state over a fixed sample.
#[derive(Debug, Clone)]
pub struct Booster {
    config: BoostConfig,
    /// Sample sorted by `x`.
    x: Vec<f64>,
    y: Vec<f64>,
    /// Current predictions at the sorted sample.
    f: Vec<f64>,
    thresholds: Vec<f64>,
    /// Number of sorted samples with `x <= thresholds[j]`.
    prefix: Vec<usize>,
    ensemble: Ensemble,
    iter: usize,
    total_alpha: f64,
    s_k: f64,
    objective: f64,
    risk: Option<RiskTracker>,
}

impl Booster {
    pub fn new(config: BoostConfig, data: &Dataset) -> Result<Self> {
        Self::with_ensemble(config, data, Ensemble::new())
    }

    /// Start from an existing ensemble instead of `f = 0`.
    pub fn with_ensemble(config: BoostConfig, data: &Dataset, ensemble: Ensemble) -> Result<Self> {
        config.validate()?;
        if data.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let mut order: Vec<usize> = (0..data.len()).collect();
        order.sort_by(|&a, &b| data.x()[a].total_cmp(&data.x()[b]));
        let x: Vec<f64> = order.iter().map(|&i| data.x()[i]).collect();
        let y: Vec<f64> = order.iter().map(|&i| data.y()[i]).collect();
        let f: Vec<f64> = x.iter().map(|&xi| ensemble.value(xi)).collect();
        let thresholds = candidate_thresholds(&x)?;
        let prefix = thresholds
            .iter()
            .map(|&t| x.partition_point(|&xi| xi <= t))
            .collect();
        let risk = config
            .true_risk
            .as_ref()
            .map(|model| RiskTracker::new(model, &thresholds, &ensemble));
        let mut booster = Booster {
            total_alpha: ensemble.coef_l1(),
            config,
            x,
            y,
            f,
            thresholds,
            prefix,
            ensemble,
            iter: 0,
            s_k: 0.0,
            objective: 0.0,
            risk,
        };
        booster.objective = booster.empirical_risk()?;
        Ok(booster)
    }

    pub fn config(&self) -> &BoostConfig {
        &self.config
    }

    pub fn iteration(&self) -> usize {
        self.iter
    }

    pub fn objective(&self) -> f64 {
        self.objective
    }

    pub fn total_alpha(&self) -> f64 {
        self.total_alpha
    }

    pub fn s_k(&self) -> f64 {
        if self.config.schedule.is_restricted() {
            self.s_k
        } else {
            f64::INFINITY
        }
    }

    pub fn ensemble(&self) -> &Ensemble {
        &self.ensemble
    }

    pub fn into_ensemble(self) -> Ensemble {
        self.ensemble
    }

    /// Cap for the next step under the configured schedule.
    pub fn next_cap(&self) -> Option<f64> {
        self.config.schedule.cap(self.iter)
    }

    /// Exact true classification error and excess least-squares risk of the
    /// current ensemble, when risk tracking is on.
    pub fn true_metrics(&self) -> Option<(f64, f64)> {
        self.risk.as_ref().map(RiskTracker::metrics)
    }

    pub fn train_error(&self) -> f64 {
        let wrong = self
            .f
            .iter()
            .zip(&self.y)
            .filter(|(&f, &y)| (if f >= 0.0 { 1.0 } else { -1.0 }) != y)
            .count();
        wrong as f64 / self.f.len() as f64
    }

    fn empirical_risk(&self) -> Result<f64> {
        let loss = self.config.loss;
        let q = self
            .f
            .iter()
            .zip(&self.y)
            .map(|(&f, &y)| loss.value(f * y))
            .sum::<f64>()
            / self.f.len() as f64;
        if q.is_finite() {
            Ok(q)
        } else {
            Err(Error::numeric(format!("empirical risk is {q}")))
        }
    }

    /// Greedy search for the next step under the schedule's cap.
    pub fn propose(&self) -> Result<Step> {
        self.propose_capped(self.next_cap())
    }

    /// Greedy search with an explicit cap; `None` searches the whole line.
    pub fn propose_capped(&self, cap: Option<f64>) -> Result<Step> {
        if let Some(h) = cap {
            if !(h.is_finite() && h > 0.0) {
                return Err(Error::Precondition(format!(
                    "step cap must be positive, got {h}"
                )));
            }
        }
        let m = self.x.len() as f64;
        let mut best: Option<(f64, f64, usize)> = None;
        let mut running_residual = 0.0;
        let mut consumed = 0;
        for (j, &n) in self.prefix.iter().enumerate() {
            if n == 0 {
                continue;
            }
            let scale = if self.config.normalize_basis {
                (m / n as f64).sqrt()
            } else {
                1.0
            };
            let window = cap.map(|h| h * scale);
            let (coef, delta) = match self.config.loss {
                LossSpec::LeastSquares => {
                    for i in consumed..n {
                        running_residual += self.y[i] - self.f[i];
                    }
                    consumed = n;
                    let nf = n as f64;
                    let mut c = running_residual / nf;
                    if let Some(w) = window {
                        c = c.clamp(-w, w);
                    }
                    (c, (-c * running_residual + 0.5 * nf * c * c) / m)
                }
                _ => self.solve_prefix(n, window)?,
            };
            if best.is_none_or(|(d, _, _)| delta < d) {
                best = Some((delta, coef, j));
            }
        }
        let (delta, coef, j) = best.expect("threshold 1 always covers the sample");
        let scale = if self.config.normalize_basis {
            (m / self.prefix[j] as f64).sqrt()
        } else {
            1.0
        };
        let sign = if coef >= 0.0 { Sign::Plus } else { Sign::Minus };
        let objective = self.objective + delta;
        if !objective.is_finite() {
            return Err(Error::numeric(format!("objective became {objective}")));
        }
        Ok(Step {
            stump: SignedStump {
                threshold: self.thresholds[j],
                sign,
            },
            alpha: coef.abs() / scale,
            objective,
            coef,
            candidate: j,
        })
    }

    /// Best coefficient on `I(x <= t)` for the prefix of length `n`, and the
    /// resulting change in empirical risk.
    fn solve_prefix(&self, n: usize, window: Option<f64>) -> Result<(f64, f64)> {
        let loss = self.config.loss;
        let m = self.x.len() as f64;
        let (f, y) = (&self.f[..n], &self.y[..n]);
        let deriv = |c: f64| {
            let mut d = 0.0;
            let mut d2 = 0.0;
            for (&fi, &yi) in f.iter().zip(y) {
                let u = (fi + c) * yi;
                d += yi * loss.derivative(u);
                d2 += loss.second_derivative(u);
            }
            (d / m, d2 / m)
        };
        let coef = match window {
            Some(w) => minimize_on_interval(
                deriv,
                -w,
                w,
                Stop {
                    gap: self.config.inner_tol,
                    deriv: 0.0,
                },
            )?,
            None => {
                if unbounded_direction(&loss, y) {
                    return Err(Error::Unbounded);
                }
                let curvature = deriv(0.0).1;
                minimize_unbounded(
                    deriv,
                    Stop {
                        gap: 0.0,
                        deriv: EXACT_DERIV_TOL * (1.0 + curvature),
                    },
                )?
            }
        };
        let delta = f
            .iter()
            .zip(y)
            .map(|(&fi, &yi)| loss.value((fi + coef) * yi) - loss.value(fi * yi))
            .sum::<f64>()
            / m;
        Ok((coef, delta))
    }

    /// Apply a step returned by [`Booster::propose`] and record it.
    pub fn commit(&mut self, step: &Step) -> Result<TraceRow> {
        let n = self.prefix[step.candidate];
        for fi in &mut self.f[..n] {
            *fi += step.coef;
        }
        let stump = step.stump;
        self.ensemble.push(step.coef.abs(), stump);
        if let Some(risk) = &mut self.risk {
            risk.add(step.candidate, step.coef);
        }
        if let Some(h) = self.next_cap() {
            self.s_k += h;
        }
        self.iter += 1;
        self.total_alpha += step.alpha;
        self.objective = self.empirical_risk()?;
        let (true_err, true_excess) = match self.true_metrics() {
            Some((e, x)) => (Some(e), Some(x)),
            None => (None, None),
        };
        Ok(TraceRow {
            iter: self.iter,
            threshold: stump.threshold,
            sign: stump.sign,
            alpha: step.alpha,
            total_alpha: self.total_alpha,
            s_k: self.s_k(),
            train_obj: self.objective,
            train_err: self.train_error(),
            true_err,
            true_excess,
        })
    }

    /// Propose and commit one step.
    pub fn step(&mut self) -> Result<TraceRow> {
        let k = self.iter;
        let step = self.propose().map_err(|e| e.at_iteration(k))?;
        self.commit(&step).map_err(|e| e.at_iteration(k))
    }

    /// An empty trace carrying this run's metadata.
    pub fn empty_trace(&self, initial_objective: f64) -> RunTrace {
        RunTrace {
            rows: Vec::new(),
            initial_objective,
            loss: self.config.loss,
            normalized: self.config.normalize_basis,
            exact_search: !self.config.schedule.is_restricted(),
            inner_tol: self.config.inner_tol,
        }
    }
}

/// Whether logistic or exponential risk keeps decreasing along a direction
/// whose nonzero entries of `g * y` all share a sign.
fn unbounded_direction(loss: &LossSpec, gy: &[f64]) -> bool {
    if !matches!(loss, LossSpec::Logistic | LossSpec::Exponential) {
        return false;
    }
    let pos = gy.iter().any(|&v| v > 0.0);
    let neg = gy.iter().any(|&v| v < 0.0);
    pos != neg
}

/// Run `config.max_iters` greedy steps from `f = 0`.
pub fn fit(config: &BoostConfig, data: &Dataset) -> Result<Fit> {
    let mut booster = Booster::new(config.clone(), data)?;
    let mut trace = booster.empty_trace(booster.objective());
    for _ in 0..config.max_iters {
        trace.rows.push(booster.step()?);
    }
    Ok(Fit {
        trace,
        ensemble: booster.into_ensemble(),
    })
}

pub fn run_boost(config: &BoostConfig, data: &Dataset) -> Result<RunTrace> {
    fit(config, data).map(|f| f.trace)
}

/// One greedy search from `ens` with cap `cap` (`None` for an exact line
/// search) and inner slack `tol`.
pub fn greedy_step(
    ens: &Ensemble,
    data: &Dataset,
    loss: LossSpec,
    cap: Option<f64>,
    tol: f64,
) -> Result<Step> {
    let config = BoostConfig {
        loss,
        inner_tol: tol,
        ..BoostConfig::default()
    };
    Booster::with_ensemble(config, data, ens.clone())?.propose_capped(cap)
}

/// Exact minimizer over all real `alpha` of `Q(f + alpha g)`.
pub fn exact_line_search(
    ens: &Ensemble,
    g: &SignedStump,
    loss: LossSpec,
    data: &Dataset,
) -> Result<f64> {
    loss.validate()?;
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let u: Vec<f64> = data
        .x()
        .iter()
        .zip(data.y())
        .map(|(&x, &y)| ens.value(x) * y)
        .collect();
    let w: Vec<f64> = data
        .x()
        .iter()
        .zip(data.y())
        .map(|(&x, &y)| g.value(x) * y)
        .collect();
    if w.iter().all(|&v| v == 0.0) {
        return Err(Error::DegenerateDirection);
    }
    if loss == LossSpec::LeastSquares {
        let num: f64 = u.iter().zip(&w).map(|(&ui, &wi)| wi * (1.0 - ui)).sum();
        let den: f64 = w.iter().map(|&wi| wi * wi).sum();
        return Ok(num / den);
    }
    if unbounded_direction(&loss, &w) {
        return Err(Error::Unbounded);
    }
    let m = u.len() as f64;
    let deriv = |c: f64| {
        let mut d = 0.0;
        let mut d2 = 0.0;
        for (&ui, &wi) in u.iter().zip(&w) {
            let v = ui + c * wi;
            d += wi * loss.derivative(v);
            d2 += wi * wi * loss.second_derivative(v);
        }
        (d / m, d2 / m)
    };
    let curvature = deriv(0.0).1;
    minimize_unbounded(
        deriv,
        Stop {
            gap: 0.0,
            deriv: EXACT_DERIV_TOL * (1.0 + curvature),
        },
    )
}

/// `(sum alpha_j^2, 2 (Q(f_0) - Q(f_k)))` for a least-squares trace. The two
/// agree for normalized exact-search runs.
pub fn energy_ledger(trace: &RunTrace) -> Result<(f64, f64)> {
    if trace.loss != LossSpec::LeastSquares {
        return Err(Error::Precondition(format!(
            "energy ledger needs a least-squares run, got {}",
            trace.loss
        )));
    }
    let energy = trace.rows.iter().map(|r| r.alpha * r.alpha).sum();
    let last = trace
        .rows
        .last()
        .map_or(trace.initial_objective, |r| r.train_obj);
    Ok((energy, 2.0 * (trace.initial_objective - last)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn two_points() -> Dataset {
        Dataset::new(vec![0.2, 0.8], vec![1.0, -1.0]).unwrap()
    }

    fn stump(a: f64, sign: Sign) -> SignedStump {
        SignedStump::new(a, sign).unwrap()
    }

    #[test]
    fn predict_examples() {
        let mut ens = Ensemble::new();
        assert_eq!(ensemble_predict(&ens, 0.5).unwrap(), 0.0);
        ens.push(1.5, stump(0.6, Sign::Plus));
        assert_eq!(ensemble_predict(&ens, 0.5).unwrap(), 1.5);
        let mut ens = Ensemble::new();
        ens.push(1.0, stump(0.6, Sign::Plus));
        ens.push(0.5, stump(0.3, Sign::Minus));
        assert_eq!(ensemble_predict(&ens, 0.2).unwrap(), 0.5);
        assert!(ensemble_predict(&ens, -0.2).is_err());
    }

    #[test]
    fn schedule_parsing_and_caps() {
        let s: StepSchedule = "power:1:0.6667".parse().unwrap();
        assert_abs_diff_eq!(s.cap(0).unwrap(), 1.0);
        assert_abs_diff_eq!(s.cap(7).unwrap(), 8f64.powf(-0.6667), epsilon = 1e-15);
        assert!(s.is_consistent());
        assert!(!"power:1:0.4"
            .parse::<StepSchedule>()
            .unwrap()
            .is_consistent());
        assert!(!"constant:0.1"
            .parse::<StepSchedule>()
            .unwrap()
            .is_consistent());
        assert_eq!("unrestricted".parse::<StepSchedule>().unwrap().cap(3), None);
        assert!("constant:-1".parse::<StepSchedule>().is_err());
        assert!("power:1".parse::<StepSchedule>().is_err());
        assert_abs_diff_eq!(
            StepSchedule::Constant { h: 0.1 }.total(10),
            1.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn exact_line_search_examples() {
        let g = stump(0.5, Sign::Plus);
        let ls = LossSpec::LeastSquares;
        assert_abs_diff_eq!(
            exact_line_search(&Ensemble::new(), &g, ls, &two_points()).unwrap(),
            1.0
        );

        let ones = Dataset::new(vec![0.1, 0.4, 0.9], vec![1.0; 3]).unwrap();
        assert_eq!(
            exact_line_search(
                &Ensemble::new(),
                &stump(1.0, Sign::Plus),
                LossSpec::Logistic,
                &ones
            ),
            Err(Error::Unbounded)
        );

        let sym = Dataset::new(vec![0.2, 0.2], vec![1.0, -1.0]).unwrap();
        assert_eq!(
            exact_line_search(&Ensemble::new(), &g, ls, &sym).unwrap(),
            0.0
        );

        let right = Dataset::new(vec![0.7, 0.9], vec![1.0, -1.0]).unwrap();
        assert_eq!(
            exact_line_search(&Ensemble::new(), &g, ls, &right),
            Err(Error::DegenerateDirection)
        );
    }

    #[test]
    fn exact_line_search_zeroes_derivative() {
        let data = Dataset::new(vec![0.1, 0.3, 0.5, 0.7], vec![1.0, 1.0, -1.0, 1.0]).unwrap();
        let g = stump(0.6, Sign::Minus);
        let mut ens = Ensemble::new();
        ens.push(0.4, stump(0.2, Sign::Plus));
        for loss in [
            LossSpec::Logistic,
            LossSpec::Exponential,
            LossSpec::ModifiedLeastSquares,
            LossSpec::PNorm { p: 3.0 },
        ] {
            let a = exact_line_search(&ens, &g, loss, &data).unwrap();
            let d: f64 = data
                .x()
                .iter()
                .zip(data.y())
                .map(|(&x, &y)| {
                    g.value(x) * y * loss.derivative((ens.value(x) + a * g.value(x)) * y)
                })
                .sum::<f64>()
                / 4.0;
            assert!(d.abs() <= 1e-9, "{loss}: derivative {d}");
        }
    }

    #[test]
    fn energy_ledger_requires_least_squares() {
        let config = BoostConfig {
            loss: LossSpec::Logistic,
            max_iters: 0,
            ..BoostConfig::default()
        };
        let trace = run_boost(&config, &two_points()).unwrap();
        assert!(energy_ledger(&trace).is_err());
        let trace = run_boost(
            &BoostConfig {
                max_iters: 0,
                ..BoostConfig::default()
            },
            &two_points(),
        )
        .unwrap();
        assert_eq!(energy_ledger(&trace).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn risk_tracker_matches_direct_integration() {
        let model = TargetModel::new(3).unwrap();
        let data = model.sample(40, 5);
        let config = BoostConfig {
            max_iters: 60,
            true_risk: Some(model),
            ..BoostConfig::default()
        };
        let fit = fit(&config, &data).unwrap();
        let last = fit.trace.rows.last().unwrap();
        assert_abs_diff_eq!(
            last.true_err.unwrap(),
            model.class_error(&fit.ensemble),
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            last.true_excess.unwrap(),
            model.excess_convex(&fit.ensemble),
            epsilon = 1e-12
        );
    }

    #[test]
    fn empty_data_is_rejected() {
        let empty = Dataset::new(vec![], vec![]).unwrap();
        assert_eq!(
            run_boost(&BoostConfig::default(), &empty),
            Err(Error::EmptyDataset)
        );
    }
}
