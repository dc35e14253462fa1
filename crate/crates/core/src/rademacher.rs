//! Empirical Rademacher complexity of the signed-stump dictionary.
//!
//! For a fixed sign vector the supremum over `±I(x <= a)` is attained by a
//! prefix of the sorted sample that never splits ties, so each draw costs
//! one pass over the tie groups.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rng::stream_rng;

/// Largest sample handled by [`rademacher_exact`].
pub const EXACT_MAX_M: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RademacherEstimate {
    pub m: usize,
    pub estimate: f64,
    pub stderr: f64,
    pub n_draws: usize,
    pub seed: u64,
}

impl RademacherEstimate {
    pub const CSV_HEADER: &'static str = "m,estimate,stderr,n_draws,seed";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{}",
            self.m, self.estimate, self.stderr, self.n_draws, self.seed
        )
    }
}

/// Original indices grouped by equal `x`, groups in increasing `x`.
fn tie_groups(xs: &[f64]) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for i in order {
        match groups.last_mut() {
            Some(g) if xs[g[0]] == xs[i] => g.push(i),
            _ => groups.push(vec![i]),
        }
    }
    groups
}

/// `sup_g (1/m) sum sigma_i g(x_i)` over signed stumps.
fn draw_sup(groups: &[Vec<usize>], sigma: &[f64]) -> f64 {
    let mut prefix = 0.0_f64;
    let mut best = 0.0_f64;
    for g in groups {
        prefix += g.iter().map(|&i| sigma[i]).sum::<f64>();
        best = best.max(prefix.abs());
    }
    best / sigma.len() as f64
}

fn check(xs: &[f64]) -> Result<()> {
    if xs.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if let Some(x) = xs.iter().find(|x| !(0.0..=1.0).contains(*x)) {
        return Err(Error::Precondition(format!(
            "x must lie in [0, 1], got {x}"
        )));
    }
    Ok(())
}

/// Monte Carlo estimate of the empirical Rademacher complexity. Draw `i`
/// uses its own RNG stream, so the result does not depend on scheduling.
pub fn rademacher_mc(xs: &[f64], n_draws: usize, seed: u64) -> Result<RademacherEstimate> {
    check(xs)?;
    if n_draws == 0 {
        return Err(Error::Precondition("n_draws must be at least 1".into()));
    }
    let groups = tie_groups(xs);
    let m = xs.len();
    let draws: Vec<f64> = (0..n_draws)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(seed, i as u64);
            let sigma: Vec<f64> = (0..m)
                .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
                .collect();
            draw_sup(&groups, &sigma)
        })
        .collect();
    let n = n_draws as f64;
    let mean = draws.iter().sum::<f64>() / n;
    let stderr = if n_draws > 1 {
        let var = draws.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (var / n).sqrt()
    } else {
        0.0
    };
    Ok(RademacherEstimate {
        m,
        estimate: mean,
        stderr,
        n_draws,
        seed,
    })
}

/// Exact value by enumerating all `2^m` sign vectors.
pub fn rademacher_exact(xs: &[f64]) -> Result<f64> {
    check(xs)?;
    let m = xs.len();
    if m > EXACT_MAX_M {
        return Err(Error::Precondition(format!(
            "exact enumeration supports m <= {EXACT_MAX_M}, got {m}"
        )));
    }
    let groups = tie_groups(xs);
    let total: f64 = (0..1u64 << m)
        .into_par_iter()
        .map(|bits| {
            let sigma: Vec<f64> = (0..m)
                .map(|i| if bits >> i & 1 == 1 { 1.0 } else { -1.0 })
                .collect();
            draw_sup(&groups, &sigma)
        })
        .collect::<Vec<_>>()
        .iter()
        .sum();
    Ok(total / (1u64 << m) as f64)
}
