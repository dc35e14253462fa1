//! Experiment orchestration: turns a [`RunConfig`] into CSV tables.
//!
//! Runners build every output in memory, so identical configs give
//! byte-identical files. Writing happens separately through temp files that
//! are renamed into place.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use rand::Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::boost::{fit, BoostConfig, Fit};
use crate::bounds::{cor43_bound, lemma42_bound, observed_gaps, BoundInputs};
use crate::config::{ConfigError, ExperimentKind, RunConfig};
use crate::error::Error;
use crate::margin::{margin_run, MarginInstance, MarginRow};
use crate::rademacher::{rademacher_mc, RademacherEstimate};
use crate::rng::{derive_seed, stream_rng, STREAM_SAMPLE};
use crate::stopping::{
    cv_stop, fit_with_budget, oracle_stop, rho_budget, theory_budget, StoppingRule,
};
use crate::synth::{Dataset, TargetModel, BAYES_ERROR};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{context}: {source}")]
    Numeric { context: String, source: Error },
    #[error("{context}: {source}")]
    Io { context: String, source: io::Error },
}

impl ExperimentError {
    /// Process exit code: 2 for configuration, 3 for numeric, 1 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            ExperimentError::Config(_) => 2,
            ExperimentError::Numeric { .. } => 3,
            ExperimentError::Io { .. } => 1,
        }
    }
}

fn numeric(context: impl Into<String>) -> impl FnOnce(Error) -> ExperimentError {
    let context = context.into();
    move |source| match source {
        Error::Precondition(message) => ExperimentError::Config(ConfigError {
            line: None,
            message,
        }),
        source => ExperimentError::Numeric { context, source },
    }
}

/// One file produced by an experiment, relative to the output directory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutputFile {
    pub path: PathBuf,
    pub contents: String,
}

/// Files produced by a run. The first one is the primary table, which is
/// what goes to stdout when no output directory is given.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outputs {
    pub files: Vec<OutputFile>,
}

impl Outputs {
    fn push(&mut self, path: impl Into<PathBuf>, contents: String) {
        self.files.push(OutputFile {
            path: path.into(),
            contents,
        });
    }

    pub fn primary(&self) -> &OutputFile {
        &self.files[0]
    }

    pub fn get(&self, path: impl AsRef<Path>) -> Option<&str> {
        self.files
            .iter()
            .find(|f| f.path == path.as_ref())
            .map(|f| f.contents.as_str())
    }

    /// Write every file under `dir`. Each file is written to a temporary
    /// sibling and renamed into place.
    pub fn write_to(&self, dir: &Path) -> Result<(), ExperimentError> {
        let io_err = |path: &Path| {
            let context = format!("writing {}", path.display());
            move |source| ExperimentError::Io { context, source }
        };
        for file in &self.files {
            let target = dir.join(&file.path);
            if let Some(parent) = target.parent() {
                fs::create_dir_all(parent).map_err(io_err(parent))?;
            }
            let mut tmp = target.clone().into_os_string();
            tmp.push(".tmp");
            let tmp = PathBuf::from(tmp);
            fs::write(&tmp, &file.contents).map_err(io_err(&tmp))?;
            fs::rename(&tmp, &target).map_err(io_err(&target))?;
        }
        Ok(())
    }
}

/// One line of a sweep summary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SummaryRow {
    pub m: usize,
    pub d: u32,
    pub seed: u64,
    pub stop_budget: f64,
    pub stopped_iter: usize,
    pub final_total_alpha: f64,
    pub true_err: f64,
    pub excess_err: f64,
    pub true_excess_convex: f64,
}

impl SummaryRow {
    pub const CSV_HEADER: &'static str =
        "m,d,seed,stop_budget,stopped_iter,final_total_alpha,true_err,excess_err,true_excess_convex";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.m,
            self.d,
            self.seed,
            self.stop_budget,
            self.stopped_iter,
            self.final_total_alpha,
            self.true_err,
            self.excess_err,
            self.true_excess_convex
        )
    }
}

fn summary_csv(rows: &[SummaryRow]) -> String {
    let mut out = String::from(SummaryRow::CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    out
}

/// Result of applying a stopping rule to one synthetic run.
#[derive(Debug, Clone)]
pub struct StoppedRun {
    pub summary: SummaryRow,
    pub fit: Fit,
}

fn boost_config(cfg: &RunConfig, seed: u64, model: TargetModel) -> BoostConfig {
    BoostConfig {
        loss: cfg.loss,
        schedule: cfg.schedule,
        max_iters: cfg.max_iters,
        inner_tol: cfg.inner_tol,
        seed,
        true_risk: Some(model),
        normalize_basis: cfg.normalize_basis,
    }
}

/// Fit one synthetic sample under `rule` and summarize the stopped model.
pub fn stopped_run(
    config: &BoostConfig,
    rule: StoppingRule,
    data: &Dataset,
) -> crate::error::Result<StoppedRun> {
    let model = config
        .true_risk
        .ok_or_else(|| Error::Precondition("stopped runs need a target model".into()))?;
    let m = data.len();
    let (budget, fit) = match rule {
        StoppingRule::None => (f64::INFINITY, fit(config, data)?),
        StoppingRule::Rho(rho) => {
            let b = rho_budget(m, rho)?;
            (b, fit_with_budget(config, data, b)?)
        }
        StoppingRule::Theory { slack } => {
            let b = theory_budget(&config.loss, m, slack)?;
            (b, fit_with_budget(config, data, b)?)
        }
        StoppingRule::Cv {
            validation_fraction,
        } => {
            let cv = cv_stop(data, config, validation_fraction)?;
            (cv.budget, cv.fit)
        }
        StoppingRule::Oracle(criterion) => {
            let full = fit(config, data)?;
            if full.trace.rows.is_empty() {
                (0.0, full)
            } else {
                let idx = oracle_stop(&full.trace, criterion)?;
                let mut full = full;
                full.trace.rows.truncate(idx + 1);
                full.ensemble.truncate(idx + 1);
                (full.trace.rows[idx].total_alpha, full)
            }
        }
    };
    let (true_err, true_excess_convex) = match fit.trace.rows.last() {
        Some(row) => (
            row.true_err.expect("risk is recorded"),
            row.true_excess.expect("risk is recorded"),
        ),
        None => (
            model.class_error(&fit.ensemble),
            model.excess_convex(&fit.ensemble),
        ),
    };
    Ok(StoppedRun {
        summary: SummaryRow {
            m,
            d: model.d(),
            seed: config.seed,
            stop_budget: budget,
            stopped_iter: fit.trace.rows.len(),
            final_total_alpha: fit.trace.rows.last().map_or(0.0, |r| r.total_alpha),
            true_err,
            excess_err: true_err - BAYES_ERROR,
            true_excess_convex,
        },
        fit,
    })
}

/// Run the experiment `kind`. Relative paths inside the config resolve
/// against `base_dir`.
pub fn run_experiment(
    cfg: &RunConfig,
    kind: ExperimentKind,
    base_dir: &Path,
) -> Result<Outputs, ExperimentError> {
    cfg.require(kind)?;
    let mut out = Outputs { files: Vec::new() };
    match kind {
        ExperimentKind::Gen => {
            let (_, data) = synthetic(cfg)?;
            out.push("data.csv", data.to_csv());
        }
        ExperimentKind::Train => {
            let (model, data) = synthetic(cfg)?;
            let seed = cfg.seed.expect("checked by require");
            let run = stopped_run(&boost_config(cfg, seed, model), cfg.stop, &data)
                .map_err(numeric("train"))?;
            out.push("trace.csv", run.fit.trace.to_csv());
            out.push("summary.csv", summary_csv(&[run.summary]));
        }
        ExperimentKind::Sweep => sweep(cfg, &mut out)?,
        ExperimentKind::Bounds => bounds(cfg, &mut out)?,
        ExperimentKind::Rademacher => {
            let master = cfg.seed.expect("checked by require");
            let rows = cfg
                .sizes()
                .iter()
                .enumerate()
                .map(|(i, &m)| {
                    let mut rng = stream_rng(derive_seed(master, i as u64), STREAM_SAMPLE);
                    let xs: Vec<f64> = (0..m).map(|_| rng.random::<f64>()).collect();
                    rademacher_mc(&xs, cfg.n_draws, master)
                        .map_err(numeric(format!("rademacher m={m}")))
                })
                .collect::<Result<Vec<_>, _>>()?;
            let mut text = format!("{}\n", RademacherEstimate::CSV_HEADER);
            for r in rows {
                text.push_str(&r.csv_row());
                text.push('\n');
            }
            out.push("rademacher.csv", text);
        }
        ExperimentKind::Margin => {
            let path = base_dir.join(cfg.instance.as_ref().expect("checked by require"));
            let text = fs::read_to_string(&path).map_err(|source| ExperimentError::Io {
                context: format!("reading {}", path.display()),
                source,
            })?;
            let inst = MarginInstance::from_csv(&text).map_err(numeric("margin instance"))?;
            let rows = margin_run(&inst, cfg.h.expect("checked"), cfg.k.expect("checked"))
                .map_err(numeric("margin"))?;
            let mut text = format!("{}\n", MarginRow::CSV_HEADER);
            for r in rows {
                text.push_str(&r.csv_row());
                text.push('\n');
            }
            out.push("margin.csv", text);
        }
    }
    Ok(out)
}

fn synthetic(cfg: &RunConfig) -> Result<(TargetModel, Dataset), ExperimentError> {
    let model = TargetModel::new(cfg.d.expect("checked by require")).map_err(numeric("target"))?;
    let data = model.sample(
        cfg.m.expect("checked by require"),
        cfg.seed.expect("checked"),
    );
    Ok((model, data))
}

fn sweep(cfg: &RunConfig, out: &mut Outputs) -> Result<(), ExperimentError> {
    let model = TargetModel::new(cfg.d.expect("checked by require")).map_err(numeric("target"))?;
    let master = cfg.seed.expect("checked by require");
    let jobs: Vec<(usize, usize, u64)> = cfg
        .sizes()
        .into_iter()
        .flat_map(|m| (0..cfg.n_seeds).map(move |s| (m, s)))
        .enumerate()
        .map(|(i, (m, s))| (m, s, derive_seed(master, i as u64)))
        .collect();
    let runs = jobs
        .par_iter()
        .map(|&(m, s, seed)| {
            let data = model.sample(m, seed);
            stopped_run(&boost_config(cfg, seed, model), cfg.stop, &data)
                .map(|run| (m, s, run))
                .map_err(numeric(format!("sweep run m={m} seed={seed}")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let rows: Vec<SummaryRow> = runs.iter().map(|(_, _, r)| r.summary).collect();
    out.push("summary.csv", summary_csv(&rows));
    let mut meta = String::new();
    let sizes: Vec<String> = cfg.sizes().iter().map(usize::to_string).collect();
    for (k, v) in [
        ("seed", master.to_string()),
        ("n_seeds", cfg.n_seeds.to_string()),
        ("d", model.d().to_string()),
        ("m_list", sizes.join(",")),
        ("loss", cfg.loss.to_string()),
        ("schedule", cfg.schedule.to_string()),
        ("stop", cfg.stop.to_string()),
        ("max_iters", cfg.max_iters.to_string()),
        ("inner_tol", cfg.inner_tol.to_string()),
        ("normalize_basis", cfg.normalize_basis.to_string()),
    ] {
        let _ = writeln!(meta, "{k}={v}");
    }
    out.push("summary.meta", meta);
    for (m, s, run) in &runs {
        out.push(format!("runs/m{m}_s{s}.csv"), run.fit.trace.to_csv());
    }
    Ok(())
}

fn bounds(cfg: &RunConfig, out: &mut Outputs) -> Result<(), ExperimentError> {
    let (_, data) = synthetic(cfg)?;
    let config = BoostConfig {
        true_risk: None,
        ..boost_config(
            cfg,
            cfg.seed.expect("checked"),
            TargetModel::new(1).expect("d=1 is valid"),
        )
    };
    let reference = fit(
        &BoostConfig {
            max_iters: cfg.reference_iters.unwrap_or(4 * cfg.max_iters),
            ..config.clone()
        },
        &data,
    )
    .map_err(numeric("bounds reference run"))?;
    let q_ref = reference
        .trace
        .rows
        .last()
        .map_or(reference.trace.initial_objective, |r| r.train_obj);
    let f_bar_norm = reference.ensemble.coef_l1();
    let run = fit(&config, &data).map_err(numeric("bounds run"))?;
    let inputs = BoundInputs::from_trace(&run.trace, &cfg.schedule, f_bar_norm, q_ref)
        .map_err(numeric("bounds"))?;
    let gaps = observed_gaps(&run.trace, q_ref);
    let k_max = run.trace.rows.len();
    // The corollary assumes each step's slack is at most h^2 M / 2.
    let cor43_applies = inputs
        .eps_bar_seq
        .iter()
        .zip(&inputs.h_seq)
        .all(|(e, h)| *e <= h * h * inputs.curvature);
    let mut text = String::from("k,lemma42,cor43,observed_gap\n");
    for (k, gap) in gaps.iter().enumerate().take(k_max + 1) {
        let l42 = lemma42_bound(&inputs, k).map_err(numeric("bounds"))?;
        let c43 = if cor43_applies {
            cor43_bound(
                &inputs.h_seq,
                f_bar_norm,
                inputs.delta_a0,
                inputs.curvature,
                k,
            )
            .map_err(numeric("bounds"))?
            .to_string()
        } else {
            String::new()
        };
        let _ = writeln!(text, "{k},{l42},{c43},{gap}");
    }
    out.push("bounds.csv", text);
    Ok(())
}
