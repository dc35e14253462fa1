//! Python bindings: datasets, the synthetic target, boosting runs, stopping
//! rules, bound evaluators, Rademacher estimates and margin tools.

use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;

use esb::bounds::BoundInputs;
use esb::margin::MarginInstance;
use esb::stopping::StoppingRule;
use esb::Error;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::NumericDomain(_) | Error::Precondition(_) | Error::EmptyDataset => {
            PyValueError::new_err(e.to_string())
        }
        _ => PyArithmeticError::new_err(e.to_string()),
    }
}

fn parse_loss(name: &str, p: Option<f64>) -> PyResult<esb::LossSpec> {
    match p {
        Some(p) => esb::LossSpec::from_name(name, Some(p)),
        None => name.parse(),
    }
    .map_err(py_err)
}

/// Convex margin loss, e.g. `Loss("logistic")` or `Loss("p_norm", 3.0)`.
#[pyclass(name = "Loss", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyLoss(esb::LossSpec);

#[pymethods]
impl PyLoss {
    #[new]
    #[pyo3(signature = (name, p=None))]
    fn new(name: &str, p: Option<f64>) -> PyResult<Self> {
        parse_loss(name, p).map(PyLoss)
    }

    fn value(&self, u: f64) -> PyResult<f64> {
        esb::loss_value(&self.0, u).map_err(py_err)
    }

    fn derivative(&self, u: f64) -> PyResult<f64> {
        esb::loss_derivative(&self.0, u).map_err(py_err)
    }

    fn lipschitz(&self, beta: f64) -> PyResult<f64> {
        esb::lipschitz_bound(&self.0, beta).map_err(py_err)
    }

    fn curvature(&self) -> f64 {
        esb::curvature_bound(&self.0)
    }

    fn psi(&self, u: f64) -> PyResult<f64> {
        esb::auxiliary_psi(&self.0, u).map_err(py_err)
    }

    fn __repr__(&self) -> String {
        format!("Loss('{}')", self.0)
    }
}

#[pyclass(name = "Dataset", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyDataset(esb::Dataset);

#[pymethods]
impl PyDataset {
    #[new]
    fn new(x: Vec<f64>, y: Vec<f64>) -> PyResult<Self> {
        esb::Dataset::new(x, y).map(PyDataset).map_err(py_err)
    }

    #[getter]
    fn x(&self) -> Vec<f64> {
        self.0.x().to_vec()
    }

    #[getter]
    fn y(&self) -> Vec<f64> {
        self.0.y().to_vec()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn to_csv(&self) -> String {
        self.0.to_csv()
    }
}

/// Triangle-wave target of complexity `d`.
#[pyclass(name = "TargetModel", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyTargetModel(esb::TargetModel);

#[pymethods]
impl PyTargetModel {
    #[new]
    fn new(d: u32) -> PyResult<Self> {
        esb::TargetModel::new(d).map(PyTargetModel).map_err(py_err)
    }

    #[getter]
    fn d(&self) -> u32 {
        self.0.d()
    }

    fn eta(&self, x: f64) -> PyResult<f64> {
        esb::target_probability(self.0.d(), x).map_err(py_err)
    }

    fn f_star(&self, x: f64) -> f64 {
        self.0.f_star(x)
    }

    fn sample(&self, m: usize, seed: u64) -> PyDataset {
        PyDataset(self.0.sample(m, seed))
    }

    fn class_error(&self, ens: &PyEnsemble) -> f64 {
        self.0.class_error(&ens.0)
    }

    fn excess_convex(&self, ens: &PyEnsemble) -> f64 {
        self.0.excess_convex(&ens.0)
    }
}

#[pyclass(name = "Ensemble", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyEnsemble(esb::Ensemble);

#[pymethods]
impl PyEnsemble {
    #[new]
    fn new() -> Self {
        PyEnsemble(esb::Ensemble::new())
    }

    /// Terms as `(coef, threshold, sign)`.
    fn terms(&self) -> Vec<(f64, f64, i8)> {
        self.0
            .terms()
            .iter()
            .map(|t| (t.coef, t.basis.threshold, t.basis.sign.as_int()))
            .collect()
    }

    /// A copy with one more term.
    fn with_term(&self, coef: f64, threshold: f64, sign: i64) -> PyResult<Self> {
        let sign = esb::Sign::from_int(sign).map_err(py_err)?;
        let stump = esb::SignedStump::new(threshold, sign).map_err(py_err)?;
        let mut ens = self.0.clone();
        ens.push(coef, stump);
        Ok(PyEnsemble(ens))
    }

    fn predict(&self, x: f64) -> PyResult<f64> {
        esb::ensemble_predict(&self.0, x).map_err(py_err)
    }

    fn coef_l1(&self) -> f64 {
        self.0.coef_l1()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }
}

#[pyclass(name = "RunTrace", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyRunTrace(esb::RunTrace);

type Row = (
    usize,
    f64,
    i8,
    f64,
    f64,
    f64,
    f64,
    f64,
    Option<f64>,
    Option<f64>,
);

#[pymethods]
impl PyRunTrace {
    /// Rows in CSV column order.
    fn rows(&self) -> Vec<Row> {
        self.0
            .rows
            .iter()
            .map(|r| {
                (
                    r.iter,
                    r.threshold,
                    r.sign.as_int(),
                    r.alpha,
                    r.total_alpha,
                    r.s_k,
                    r.train_obj,
                    r.train_err,
                    r.true_err,
                    r.true_excess,
                )
            })
            .collect()
    }

    /// Empirical risk after 0, 1, ..., k steps.
    fn objectives(&self) -> Vec<f64> {
        self.0.objectives()
    }

    fn to_csv(&self) -> String {
        self.0.to_csv()
    }

    fn energy_ledger(&self) -> PyResult<(f64, f64)> {
        esb::energy_ledger(&self.0).map_err(py_err)
    }

    fn __len__(&self) -> usize {
        self.0.rows.len()
    }
}

#[allow(clippy::too_many_arguments)]
fn config(
    loss: &str,
    p: Option<f64>,
    schedule: &str,
    max_iters: usize,
    inner_tol: f64,
    seed: u64,
    d: Option<u32>,
    normalize_basis: bool,
) -> PyResult<esb::BoostConfig> {
    Ok(esb::BoostConfig {
        loss: parse_loss(loss, p)?,
        schedule: schedule.parse().map_err(py_err)?,
        max_iters,
        inner_tol,
        seed,
        true_risk: d.map(esb::TargetModel::new).transpose().map_err(py_err)?,
        normalize_basis,
    })
}

/// Run boosting from `f = 0`. Passing `d` records exact true risk under the
/// triangle-wave target. `stop` takes the CLI rule syntax.
#[pyfunction]
#[pyo3(signature = (data, loss="least_squares", p=None, schedule="power:1:0.6667", max_iters=100,
    inner_tol=1e-10, seed=0, d=None, normalize_basis=false, stop="none"))]
#[allow(clippy::too_many_arguments)]
fn fit(
    py: Python<'_>,
    data: &PyDataset,
    loss: &str,
    p: Option<f64>,
    schedule: &str,
    max_iters: usize,
    inner_tol: f64,
    seed: u64,
    d: Option<u32>,
    normalize_basis: bool,
    stop: &str,
) -> PyResult<(PyRunTrace, PyEnsemble, f64)> {
    let cfg = config(
        loss,
        p,
        schedule,
        max_iters,
        inner_tol,
        seed,
        d,
        normalize_basis,
    )?;
    let rule: StoppingRule = stop.parse().map_err(py_err)?;
    let data = data.0.clone();
    let (fit, budget) = py
        .detach(|| -> esb::Result<(esb::Fit, f64)> {
            match rule {
                StoppingRule::None => Ok((esb::fit(&cfg, &data)?, f64::INFINITY)),
                StoppingRule::Rho(rho) => {
                    let b = esb::stopping::rho_budget(data.len(), rho)?;
                    Ok((esb::stopping::fit_with_budget(&cfg, &data, b)?, b))
                }
                StoppingRule::Theory { slack } => {
                    let b = esb::stopping::theory_budget(&cfg.loss, data.len(), slack)?;
                    Ok((esb::stopping::fit_with_budget(&cfg, &data, b)?, b))
                }
                StoppingRule::Cv {
                    validation_fraction,
                } => {
                    let cv = esb::stopping::cv_stop(&data, &cfg, validation_fraction)?;
                    Ok((cv.fit, cv.budget))
                }
                StoppingRule::Oracle(_) => {
                    let run = esb::experiment::stopped_run(&cfg, rule, &data)?;
                    Ok((run.fit, run.summary.stop_budget))
                }
            }
        })
        .map_err(py_err)?;
    Ok((PyRunTrace(fit.trace), PyEnsemble(fit.ensemble), budget))
}

/// One greedy search; returns `(threshold, sign, alpha, objective)`.
#[pyfunction]
#[pyo3(signature = (ens, data, loss="least_squares", cap=None, tol=1e-10, p=None))]
fn greedy_step(
    ens: &PyEnsemble,
    data: &PyDataset,
    loss: &str,
    cap: Option<f64>,
    tol: f64,
    p: Option<f64>,
) -> PyResult<(f64, i8, f64, f64)> {
    let step = esb::greedy_step(&ens.0, &data.0, parse_loss(loss, p)?, cap, tol).map_err(py_err)?;
    Ok((
        step.stump.threshold,
        step.stump.sign.as_int(),
        step.alpha,
        step.objective,
    ))
}

#[pyfunction]
#[pyo3(signature = (ens, threshold, sign, data, loss="least_squares", p=None))]
fn exact_line_search(
    ens: &PyEnsemble,
    threshold: f64,
    sign: i64,
    data: &PyDataset,
    loss: &str,
    p: Option<f64>,
) -> PyResult<f64> {
    let stump = esb::SignedStump::new(threshold, esb::Sign::from_int(sign).map_err(py_err)?)
        .map_err(py_err)?;
    esb::exact_line_search(&ens.0, &stump, parse_loss(loss, p)?, &data.0).map_err(py_err)
}

#[pyfunction]
fn candidate_thresholds(xs: Vec<f64>) -> PyResult<Vec<f64>> {
    esb::candidate_thresholds(&xs).map_err(py_err)
}

#[pyfunction]
fn bayes_error(d: u32) -> PyResult<f64> {
    esb::bayes_error(d).map_err(py_err)
}

#[pyfunction]
fn rho_budget(m: usize, rho: f64) -> PyResult<f64> {
    esb::stopping::rho_budget(m, rho).map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (loss, m, slack, p=None))]
fn theory_budget(loss: &str, m: usize, slack: f64, p: Option<f64>) -> PyResult<f64> {
    esb::stopping::theory_budget(&parse_loss(loss, p)?, m, slack).map_err(py_err)
}

#[pyfunction]
fn lemma42_bound(
    h_seq: Vec<f64>,
    eps_bar_seq: Vec<f64>,
    f_bar_norm: f64,
    f0_norm: f64,
    delta_a0: f64,
    curvature: f64,
    k: usize,
) -> PyResult<f64> {
    let inputs = BoundInputs {
        h_seq,
        eps_bar_seq,
        f_bar_norm,
        f0_norm,
        delta_a0,
        curvature,
    };
    esb::bounds::lemma42_bound(&inputs, k).map_err(py_err)
}

#[pyfunction]
fn cor43_bound(
    h_seq: Vec<f64>,
    f_bar_norm: f64,
    delta_a0: f64,
    curvature: f64,
    k: usize,
) -> PyResult<f64> {
    esb::bounds::cor43_bound(&h_seq, f_bar_norm, delta_a0, curvature, k).map_err(py_err)
}

#[pyfunction]
fn thm32_bound(c_s: f64, m: usize, beta_m: f64, f_bar_norm: f64, q_f_bar: f64) -> PyResult<f64> {
    esb::bounds::thm32_bound(c_s, m, beta_m, f_bar_norm, q_f_bar).map_err(py_err)
}

#[pyfunction]
fn thm33_delta(h_seq: Vec<f64>, k_m: usize, f_bar_norm: f64, curvature: f64) -> PyResult<f64> {
    esb::bounds::thm33_delta(&h_seq, k_m, f_bar_norm, curvature).map_err(py_err)
}

#[pyfunction]
fn uniform_dev_bound(gamma: f64, beta: f64, r: f64) -> PyResult<f64> {
    esb::bounds::uniform_dev_bound(gamma, beta, r).map_err(py_err)
}

/// Returns `(estimate, stderr)`.
#[pyfunction]
fn rademacher_mc(py: Python<'_>, xs: Vec<f64>, n_draws: usize, seed: u64) -> PyResult<(f64, f64)> {
    let est = py
        .detach(|| esb::rademacher::rademacher_mc(&xs, n_draws, seed))
        .map_err(py_err)?;
    Ok((est.estimate, est.stderr))
}

#[pyfunction]
fn rademacher_exact(xs: Vec<f64>) -> PyResult<f64> {
    esb::rademacher::rademacher_exact(&xs).map_err(py_err)
}

#[pyfunction]
fn max_l1_margin(g: Vec<Vec<f64>>, y: Vec<f64>) -> PyResult<f64> {
    let inst = MarginInstance::new(g, y).map_err(py_err)?;
    Ok(esb::margin::max_l1_margin(&inst))
}

#[pyfunction]
fn margin_error(f_values: Vec<f64>, y: Vec<f64>, gamma: f64) -> PyResult<f64> {
    esb::margin::margin_error(&f_values, &y, gamma).map_err(py_err)
}

/// Rows `(k, exp_loss, norm_margin, bound)`.
#[pyfunction]
#[pyo3(name = "margin_run")]
fn margin_run_py(
    g: Vec<Vec<f64>>,
    y: Vec<f64>,
    h: f64,
    k: usize,
) -> PyResult<Vec<(usize, f64, f64, f64)>> {
    let inst = MarginInstance::new(g, y).map_err(py_err)?;
    let rows = esb::margin::margin_run(&inst, h, k).map_err(py_err)?;
    Ok(rows
        .iter()
        .map(|r| (r.k, r.exp_loss, r.norm_margin, r.bound))
        .collect())
}

#[pymodule]
fn esboost(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyLoss>()?;
    m.add_class::<PyDataset>()?;
    m.add_class::<PyTargetModel>()?;
    m.add_class::<PyEnsemble>()?;
    m.add_class::<PyRunTrace>()?;
    m.add_function(wrap_pyfunction!(fit, m)?)?;
    m.add_function(wrap_pyfunction!(greedy_step, m)?)?;
    m.add_function(wrap_pyfunction!(exact_line_search, m)?)?;
    m.add_function(wrap_pyfunction!(candidate_thresholds, m)?)?;
    m.add_function(wrap_pyfunction!(bayes_error, m)?)?;
    m.add_function(wrap_pyfunction!(rho_budget, m)?)?;
    m.add_function(wrap_pyfunction!(theory_budget, m)?)?;
    m.add_function(wrap_pyfunction!(lemma42_bound, m)?)?;
    m.add_function(wrap_pyfunction!(cor43_bound, m)?)?;
    m.add_function(wrap_pyfunction!(thm32_bound, m)?)?;
    m.add_function(wrap_pyfunction!(thm33_delta, m)?)?;
    m.add_function(wrap_pyfunction!(uniform_dev_bound, m)?)?;
    m.add_function(wrap_pyfunction!(rademacher_mc, m)?)?;
    m.add_function(wrap_pyfunction!(rademacher_exact, m)?)?;
    m.add_function(wrap_pyfunction!(max_l1_margin, m)?)?;
    m.add_function(wrap_pyfunction!(margin_error, m)?)?;
    m.add_function(wrap_pyfunction!(margin_run_py, m)?)?;
    Ok(())
}
