//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Tolerances are fixed constants below.

use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use esboost::bounds::{cor43_bound, lemma42_bound, psi_gap, BoundInputs};
use esboost::experiment::stopped_run;
use esboost::margin::{margin_run, max_l1_margin, MarginInstance};
use esboost::rademacher::{rademacher_exact, rademacher_mc};
use esboost::rng::derive_seed;
use esboost::stopping::{OracleCriterion, StoppingRule};
use esboost::{
    bayes_error, energy_ledger, run_boost, BoostConfig, Dataset, LossSpec, StepSchedule,
    TargetModel, BAYES_ERROR,
};

const LOSSES: [LossSpec; 5] = [
    LossSpec::Logistic,
    LossSpec::Exponential,
    LossSpec::LeastSquares,
    LossSpec::ModifiedLeastSquares,
    LossSpec::PNorm { p: 3.0 },
];

const POWER: StepSchedule = StepSchedule::Power {
    scale: 1.0,
    exponent: 2.0 / 3.0,
};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Random labelled sample of size 1..=50; half of them have tied abscissae.
fn random_dataset(seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = rng.random_range(1..=50);
    let coarse = rng.random::<bool>();
    let x = (0..m)
        .map(|_| {
            let x: f64 = rng.random();
            if coarse {
                (x * 10.0).round() / 10.0
            } else {
                x
            }
        })
        .collect();
    let bias: f64 = rng.random();
    let y = (0..m)
        .map(|_| {
            if rng.random::<f64>() < bias {
                1.0
            } else {
                -1.0
            }
        })
        .collect();
    Dataset::new(x, y).unwrap()
}

fn bayes() -> Outcome {
    let mut worst = 0.0f64;
    for d in 1..=8 {
        let closed = bayes_error(d).unwrap();
        let integral = TargetModel::new(d).unwrap().bayes_error_integral();
        worst = worst
            .max((closed - integral).abs())
            .max((closed - 0.25).abs());
    }
    outcome(
        worst <= 1e-12,
        format!("max |closed - integral| = {worst:.2e}"),
    )
}

const N_DATASETS: u64 = 1000;
const MONO_ITERS: usize = 30;

struct MonotoneStats {
    violations: usize,
    worst_increase: f64,
    bound_violations: usize,
    cor_violations: usize,
    worst_excess: f64,
    runs: usize,
}

/// Criteria 2 and 3 share their runs.
fn monotone_and_bounds() -> MonotoneStats {
    let tol = 1e-10;
    let per_dataset: Vec<MonotoneStats> = (0..N_DATASETS)
        .into_par_iter()
        .map(|i| {
            let data = random_dataset(derive_seed(2024, i));
            let mut s = MonotoneStats {
                violations: 0,
                worst_increase: f64::NEG_INFINITY,
                bound_violations: 0,
                cor_violations: 0,
                worst_excess: f64::NEG_INFINITY,
                runs: 0,
            };
            for loss in LOSSES {
                for schedule in [POWER, StepSchedule::Constant { h: 0.2 }] {
                    let config = BoostConfig {
                        loss,
                        schedule,
                        max_iters: MONO_ITERS,
                        inner_tol: tol,
                        ..BoostConfig::default()
                    };
                    let trace = run_boost(&config, &data).unwrap();
                    s.runs += 1;
                    let q = trace.objectives();
                    for w in q.windows(2) {
                        s.worst_increase = s.worst_increase.max(w[1] - w[0]);
                        if w[1] > w[0] + tol {
                            s.violations += 1;
                        }
                    }
                    // References: the iterates themselves at a few depths.
                    for j in [5, 15, MONO_ITERS] {
                        let q_ref = q[j];
                        let f_bar_norm = trace.rows[j - 1].total_alpha;
                        let inputs =
                            BoundInputs::from_trace(&trace, &schedule, f_bar_norm, q_ref).unwrap();
                        let cor_ok = inputs
                            .eps_bar_seq
                            .iter()
                            .zip(&inputs.h_seq)
                            .all(|(e, h)| *e <= h * h * inputs.curvature);
                        for (k, &qk) in q.iter().enumerate() {
                            let gap = psi_gap(&loss, qk, q_ref);
                            let l42 = lemma42_bound(&inputs, k).unwrap();
                            s.worst_excess = s.worst_excess.max(gap - l42);
                            if gap > l42 + 1e-9 {
                                s.bound_violations += 1;
                            }
                            if cor_ok {
                                let c43 = cor43_bound(
                                    &inputs.h_seq,
                                    f_bar_norm,
                                    inputs.delta_a0,
                                    inputs.curvature,
                                    k,
                                )
                                .unwrap();
                                s.worst_excess = s.worst_excess.max(gap - c43);
                                if gap > c43 + 1e-9 {
                                    s.cor_violations += 1;
                                }
                            }
                        }
                    }
                }
            }
            s
        })
        .collect();
    per_dataset.into_iter().fold(
        MonotoneStats {
            violations: 0,
            worst_increase: f64::NEG_INFINITY,
            bound_violations: 0,
            cor_violations: 0,
            worst_excess: f64::NEG_INFINITY,
            runs: 0,
        },
        |a, b| MonotoneStats {
            violations: a.violations + b.violations,
            worst_increase: a.worst_increase.max(b.worst_increase),
            bound_violations: a.bound_violations + b.bound_violations,
            cor_violations: a.cor_violations + b.cor_violations,
            worst_excess: a.worst_excess.max(b.worst_excess),
            runs: a.runs + b.runs,
        },
    )
}

fn energy() -> Outcome {
    let mut worst = 0.0f64;
    for i in 0..100 {
        let data = random_dataset(derive_seed(77, i));
        let config = BoostConfig {
            loss: LossSpec::LeastSquares,
            schedule: StepSchedule::Unrestricted,
            max_iters: 50,
            normalize_basis: true,
            ..BoostConfig::default()
        };
        let trace = run_boost(&config, &data).unwrap();
        let (a, b) = energy_ledger(&trace).unwrap();
        worst = worst.max((a - b).abs());
    }
    outcome(
        worst <= 1e-8,
        format!("max |sum alpha^2 - 2 dA| = {worst:.2e}"),
    )
}

fn synth_config(loss: LossSpec, max_iters: usize, seed: u64, model: TargetModel) -> BoostConfig {
    BoostConfig {
        loss,
        schedule: POWER,
        max_iters,
        seed,
        true_risk: Some(model),
        ..BoostConfig::default()
    }
}

fn overfitting() -> Outcome {
    let model = TargetModel::new(2).unwrap();
    let (mins, finals): (Vec<f64>, Vec<f64>) = (0..20u64)
        .into_par_iter()
        .map(|s| {
            let seed = derive_seed(5, s);
            let data = model.sample(100, seed);
            let trace = run_boost(
                &synth_config(LossSpec::LeastSquares, 1024, seed, model),
                &data,
            )
            .unwrap();
            let errs: Vec<f64> = trace.rows.iter().map(|r| r.true_err.unwrap()).collect();
            (
                errs.iter().copied().fold(f64::INFINITY, f64::min),
                *errs.last().unwrap(),
            )
        })
        .unzip();
    let (min, fin) = (mean(&mins), mean(&finals));
    outcome(
        fin - min >= 0.02,
        format!(
            "mean min err {min:.4}, mean final err {fin:.4}, gap {:.4}",
            fin - min
        ),
    )
}

/// Mean over 20 seeds of the stopped summary metric.
fn mean_stopped(
    d: u32,
    m: usize,
    rule: StoppingRule,
    max_iters: usize,
    master: u64,
    convex: bool,
) -> f64 {
    let model = TargetModel::new(d).unwrap();
    let vals: Vec<f64> = (0..20u64)
        .into_par_iter()
        .map(|s| {
            let seed = derive_seed(master, s);
            let data = model.sample(m, seed);
            let run = stopped_run(
                &synth_config(LossSpec::LeastSquares, max_iters, seed, model),
                rule,
                &data,
            )
            .unwrap();
            if convex {
                run.summary.true_excess_convex
            } else {
                run.summary.true_err - BAYES_ERROR
            }
        })
        .collect();
    mean(&vals)
}

const SIZES: [usize; 3] = [50, 200, 800];

fn consistency_cv() -> Outcome {
    let rule = StoppingRule::Cv {
        validation_fraction: 1.0 / 3.0,
    };
    let ex: Vec<f64> = SIZES
        .iter()
        .map(|&m| mean_stopped(2, m, rule, 1000, 6, false))
        .collect();
    let pass = ex.windows(2).all(|w| w[1] < w[0]) && ex[2] <= 0.10;
    outcome(pass, format!("mean excess error at m=50,200,800: {ex:.4?}"))
}

fn consistency_rho() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for rho in [1.0 / 6.0, 0.25] {
        let rule = StoppingRule::Rho(rho);
        let small = mean_stopped(2, 50, rule, 1000, 7, false);
        let large = mean_stopped(2, 800, rule, 1000, 7, false);
        pass &= large < small;
        parts.push(format!("rho={rho:.4}: m=50 {small:.4}, m=800 {large:.4}"));
    }
    outcome(pass, parts.join("; "))
}

fn margin() -> Outcome {
    let inst = MarginInstance::new(vec![vec![1.0, 1.0], vec![-1.0, 1.0]], vec![1.0, -1.0]).unwrap();
    let gamma = max_l1_margin(&inst);
    // Grid oracle over the weight ball at resolution 1e-3.
    let mut grid = f64::NEG_INFINITY;
    for a in -1000i32..=1000 {
        let w1 = a as f64 / 1000.0;
        let rest = 1.0 - w1.abs();
        for w2 in [rest, -rest, 0.0] {
            let m1 = w1 + w2;
            let m2 = -(-w1 + w2);
            grid = grid.max(m1.min(m2));
        }
    }
    let coarse = margin_run(&inst, 0.1, 200).unwrap();
    let worst = coarse
        .iter()
        .map(|r| r.exp_loss - (-(r.k as f64) * 0.1 * (gamma - 0.1)).exp())
        .fold(f64::NEG_INFINITY, f64::max);
    let fine = margin_run(&inst, 0.01, 2000).unwrap();
    let last = fine.last().unwrap().norm_margin;
    let pass = (gamma - 1.0).abs() <= 1e-9
        && (grid - gamma).abs() <= 2e-3
        && worst <= 1e-9
        && last >= 0.94;
    outcome(
        pass,
        format!("gamma*={gamma:.6}, grid={grid:.4}, max excess over bound {worst:.2e}, margin at K=2000 {last:.4}"),
    )
}

fn rademacher() -> Outcome {
    let estimates: Vec<f64> = [25usize, 100, 400]
        .iter()
        .map(|&m| {
            let mut rng = ChaCha8Rng::seed_from_u64(m as u64);
            let xs: Vec<f64> = (0..m).map(|_| rng.random()).collect();
            rademacher_mc(&xs, 10_000, 9).unwrap().estimate
        })
        .collect();
    let r1 = estimates[1] / estimates[0];
    let r2 = estimates[2] / estimates[1];
    let mut worst_z = 0.0f64;
    for m in 1..=12 {
        let mut rng = ChaCha8Rng::seed_from_u64(100 + m as u64);
        let xs: Vec<f64> = (0..m).map(|_| rng.random()).collect();
        let exact = rademacher_exact(&xs).unwrap();
        let mc = rademacher_mc(&xs, 10_000, 3).unwrap();
        worst_z = worst_z.max((mc.estimate - exact).abs() / mc.stderr);
    }
    let in_range = |r: f64| (0.35..=0.65).contains(&r);
    outcome(
        in_range(r1) && in_range(r2) && worst_z <= 3.0,
        format!("ratios {r1:.4}, {r2:.4}; worst exact-vs-MC z {worst_z:.2}"),
    )
}

fn complexity() -> Outcome {
    let rule = StoppingRule::Oracle(OracleCriterion::ConvexRisk);
    let ex: Vec<f64> = [1u32, 3, 5]
        .iter()
        .map(|&d| mean_stopped(d, 300, rule, 2000, 10, true))
        .collect();
    outcome(
        ex.windows(2).all(|w| w[1] > w[0]),
        format!("mean excess convex risk at d=1,3,5: {ex:.4?}"),
    )
}

fn main() -> ExitCode {
    let mut all = true;
    let mut report = |n: usize, name: &str, start: Instant, o: Outcome| {
        all &= o.pass;
        println!(
            "criterion {n:>2} {} {name}: {} ({:.1}s)",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            start.elapsed().as_secs_f64()
        );
    };
    let t = Instant::now();
    report(1, "bayes error", t, bayes());

    let t = Instant::now();
    let s = monotone_and_bounds();
    let elapsed = t;
    report(
        2,
        "monotone objective",
        elapsed,
        outcome(
            s.violations == 0,
            format!(
                "{} runs, {} violations, max increase {:.2e}",
                s.runs, s.violations, s.worst_increase
            ),
        ),
    );
    report(
        3,
        "bound domination",
        elapsed,
        outcome(
            s.bound_violations == 0 && s.cor_violations == 0,
            format!(
                "lemma violations {}, corollary violations {}, max gap minus bound {:.2e}",
                s.bound_violations, s.cor_violations, s.worst_excess
            ),
        ),
    );
    let t = Instant::now();
    report(4, "energy conservation", t, energy());
    let t = Instant::now();
    report(5, "overfitting", t, overfitting());
    let t = Instant::now();
    report(6, "cv consistency", t, consistency_cv());
    let t = Instant::now();
    report(7, "rho strategy", t, consistency_rho());
    let t = Instant::now();
    report(8, "margin bound", t, margin());
    let t = Instant::now();
    report(9, "rademacher scaling", t, rademacher());
    let t = Instant::now();
    report(10, "complexity effect", t, complexity());
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
