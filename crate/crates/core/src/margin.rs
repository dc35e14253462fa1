//! Margins on finite dictionaries: the margin error `L_gamma`, constant-step
//! exponential-loss boosting on separable instances, and the maximum
//! L1-margin computed by linear programming.

use crate::error::{Error, Result};
use crate::line::{minimize_on_interval, Stop};

/// Basis values `g_j(x_i)` for a finite sample, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginInstance {
    n_points: usize,
    n_basis: usize,
    g: Vec<f64>,
    y: Vec<f64>,
}

impl MarginInstance {
    pub fn new(rows: Vec<Vec<f64>>, y: Vec<f64>) -> Result<Self> {
        let n_points = rows.len();
        if n_points == 0 || rows[0].is_empty() {
            return Err(Error::Precondition(
                "instance needs at least one point and one basis".into(),
            ));
        }
        let n_basis = rows[0].len();
        if rows.iter().any(|r| r.len() != n_basis) {
            return Err(Error::Precondition("ragged basis matrix".into()));
        }
        if y.len() != n_points {
            return Err(Error::Precondition(format!(
                "{} labels for {n_points} points",
                y.len()
            )));
        }
        if let Some(v) = y.iter().find(|&&v| v != 1.0 && v != -1.0) {
            return Err(Error::Precondition(format!(
                "labels must be +1 or -1, got {v}"
            )));
        }
        let g: Vec<f64> = rows.into_iter().flatten().collect();
        if let Some(v) = g.iter().find(|v| !(v.abs() <= 1.0)) {
            return Err(Error::Precondition(format!(
                "basis values must lie in [-1, 1], got {v}"
            )));
        }
        Ok(MarginInstance {
            n_points,
            n_basis,
            g,
            y,
        })
    }

    /// Parse CSV rows `y,g1,g2,...`. A leading non-numeric line is treated
    /// as a header; blank lines are skipped.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut rows = Vec::new();
        let mut y = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let parsed: std::result::Result<Vec<f64>, _> =
                line.split(',').map(|t| t.trim().parse::<f64>()).collect();
            match parsed {
                Ok(vals) if vals.len() >= 2 => {
                    y.push(vals[0]);
                    rows.push(vals[1..].to_vec());
                }
                Err(_) if rows.is_empty() && y.is_empty() && i == 0 => continue,
                _ => {
                    return Err(Error::Precondition(format!(
                        "instance line {}: expected y,g1,g2,...",
                        i + 1
                    )))
                }
            }
        }
        Self::new(rows, y)
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn n_basis(&self) -> usize {
        self.n_basis
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    #[inline]
    pub fn value(&self, point: usize, basis: usize) -> f64 {
        self.g[point * self.n_basis + basis]
    }

    pub fn column(&self, basis: usize) -> Vec<f64> {
        (0..self.n_points).map(|i| self.value(i, basis)).collect()
    }
}

/// Fraction of points with `y_i f_i <= gamma`.
pub fn margin_error(f_values: &[f64], y: &[f64], gamma: f64) -> Result<f64> {
    if f_values.len() != y.len() {
        return Err(Error::Precondition(format!(
            "{} predictions for {} labels",
            f_values.len(),
            y.len()
        )));
    }
    if y.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let hits = f_values
        .iter()
        .zip(y)
        .filter(|(&f, &yi)| f * yi <= gamma)
        .count();
    Ok(hits as f64 / y.len() as f64)
}

const PIVOT_EPS: f64 = 1e-12;

/// `max c.x` subject to `A x <= b`, `x >= 0`, with `b >= 0` so the origin is
/// a feasible start. Dense tableau, Bland's rule. `None` when unbounded.
fn simplex_max(a: &[Vec<f64>], b: &[f64], c: &[f64]) -> Option<f64> {
    let rows = a.len();
    let vars = c.len();
    let width = vars + rows + 1;
    let mut t = vec![vec![0.0; width]; rows + 1];
    for (i, row) in a.iter().enumerate() {
        t[i][..vars].copy_from_slice(row);
        t[i][vars + i] = 1.0;
        t[i][width - 1] = b[i];
    }
    for (j, &cj) in c.iter().enumerate() {
        t[rows][j] = -cj;
    }
    let mut basis: Vec<usize> = (vars..vars + rows).collect();
    loop {
        let Some(enter) = (0..width - 1).find(|&j| t[rows][j] < -PIVOT_EPS) else {
            return Some(t[rows][width - 1]);
        };
        let mut leave: Option<usize> = None;
        for i in 0..rows {
            if t[i][enter] > PIVOT_EPS {
                let ratio = t[i][width - 1] / t[i][enter];
                let better = match leave {
                    None => true,
                    Some(l) => {
                        let best = t[l][width - 1] / t[l][enter];
                        ratio < best || (ratio == best && basis[i] < basis[l])
                    }
                };
                if better {
                    leave = Some(i);
                }
            }
        }
        let leave = leave?;
        let pivot = t[leave][enter];
        for v in &mut t[leave] {
            *v /= pivot;
        }
        let pivot_row = t[leave].clone();
        for (i, row) in t.iter_mut().enumerate() {
            if i != leave && row[enter] != 0.0 {
                let factor = row[enter];
                for (v, p) in row.iter_mut().zip(&pivot_row) {
                    *v -= factor * p;
                }
            }
        }
        basis[leave] = enter;
    }
}

/// `max_{sum |w| <= 1} min_i y_i (G w)_i`. Nonpositive values mean the
/// instance is not separable by the dictionary.
pub fn max_l1_margin(inst: &MarginInstance) -> f64 {
    // Variables: u (p), v (p), gamma_plus, gamma_minus; w = u - v.
    let p = inst.n_basis;
    let mut a = Vec::with_capacity(inst.n_points + 1);
    for i in 0..inst.n_points {
        let yi = inst.y[i];
        let mut row = vec![0.0; 2 * p + 2];
        for j in 0..p {
            let gij = yi * inst.value(i, j);
            row[j] = -gij;
            row[p + j] = gij;
        }
        row[2 * p] = 1.0;
        row[2 * p + 1] = -1.0;
        a.push(row);
    }
    let mut norm_row = vec![1.0; 2 * p + 2];
    norm_row[2 * p] = 0.0;
    norm_row[2 * p + 1] = 0.0;
    a.push(norm_row);
    let mut b = vec![0.0; inst.n_points];
    b.push(1.0);
    let mut c = vec![0.0; 2 * p + 2];
    c[2 * p] = 1.0;
    c[2 * p + 1] = -1.0;
    simplex_max(&a, &b, &c).expect("margin is bounded by the weight ball")
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarginRow {
    pub k: usize,
    pub exp_loss: f64,
    /// `min_i y_i f(x_i) / sum |alpha|`, 0 before the first nonzero step.
    pub norm_margin: f64,
    /// `exp(-k h (gamma* - h))`.
    pub bound: f64,
}

impl MarginRow {
    pub const CSV_HEADER: &'static str = "k,exp_loss,norm_margin,bound";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{}",
            self.k, self.exp_loss, self.norm_margin, self.bound
        )
    }
}

/// Exponential-loss boosting with constant cap `h` and an exact search over
/// the columns of `inst` (with negation). Returns rows `k = 0..=K`.
pub fn margin_run(inst: &MarginInstance, h: f64, k_max: usize) -> Result<Vec<MarginRow>> {
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::Precondition(format!("h must be positive, got {h}")));
    }
    let gamma_star = max_l1_margin(inst);
    let n = inst.n_points as f64;
    // Margins y_i f(x_i) and y_i g_j(x_i).
    let mut u = vec![0.0; inst.n_points];
    let columns: Vec<Vec<f64>> = (0..inst.n_basis)
        .map(|j| {
            inst.column(j)
                .iter()
                .zip(&inst.y)
                .map(|(g, y)| g * y)
                .collect()
        })
        .collect();
    let mut total = 0.0;
    let row = |k: usize, u: &[f64], total: f64| {
        let exp_loss = u.iter().map(|&v| (-v).exp()).sum::<f64>() / n;
        let norm_margin = if total > 0.0 {
            u.iter().copied().fold(f64::INFINITY, f64::min) / total
        } else {
            0.0
        };
        MarginRow {
            k,
            exp_loss,
            norm_margin,
            bound: (-(k as f64) * h * (gamma_star - h)).exp(),
        }
    };
    let mut rows = vec![row(0, &u, total)];
    for k in 1..=k_max {
        let mut best: Option<(f64, f64, usize)> = None;
        for (j, w) in columns.iter().enumerate() {
            let deriv = |a: f64| {
                let (mut d, mut d2) = (0.0, 0.0);
                for (&ui, &wi) in u.iter().zip(w) {
                    let e = (-(ui + a * wi)).exp();
                    d -= wi * e;
                    d2 += wi * wi * e;
                }
                (d / n, d2 / n)
            };
            let a = minimize_on_interval(
                deriv,
                -h,
                h,
                Stop {
                    gap: 0.0,
                    deriv: 0.0,
                },
            )
            .map_err(|e| e.at_iteration(k - 1))?;
            let value = u
                .iter()
                .zip(w)
                .map(|(&ui, &wi)| (-(ui + a * wi)).exp())
                .sum::<f64>()
                / n;
            if best.is_none_or(|(v, _, _)| value < v) {
                best = Some((value, a, j));
            }
        }
        let (_, a, j) = best.expect("instance has at least one basis");
        for (ui, wi) in u.iter_mut().zip(&columns[j]) {
            *ui += a * wi;
        }
        total += a.abs();
        rows.push(row(k, &u, total));
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn two_basis() -> MarginInstance {
        MarginInstance::new(vec![vec![1.0, 1.0], vec![-1.0, 1.0]], vec![1.0, -1.0]).unwrap()
    }

    #[test]
    fn max_margin_examples() {
        assert_abs_diff_eq!(max_l1_margin(&two_basis()), 1.0, epsilon = 1e-12);
        let perfect =
            MarginInstance::new(vec![vec![1.0], vec![-1.0], vec![1.0]], vec![1.0, -1.0, 1.0])
                .unwrap();
        assert_abs_diff_eq!(max_l1_margin(&perfect), 1.0, epsilon = 1e-12);
        let flat = MarginInstance::new(vec![vec![1.0], vec![1.0]], vec![1.0, -1.0]).unwrap();
        assert_abs_diff_eq!(max_l1_margin(&flat), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn margin_error_examples() {
        let y = [1.0, -1.0];
        assert_eq!(margin_error(&[0.5, -0.5], &y, 0.4).unwrap(), 0.0);
        assert_eq!(margin_error(&[0.5, -0.5], &y, 0.5).unwrap(), 1.0);
        assert_eq!(margin_error(&[0.0, 0.0], &y, 0.0).unwrap(), 1.0);
        assert!(margin_error(&[0.0], &y, 0.0).is_err());
    }

    #[test]
    fn margin_run_examples() {
        let perfect = MarginInstance::new(vec![vec![1.0], vec![-1.0]], vec![1.0, -1.0]).unwrap();
        let rows = margin_run(&perfect, 0.1, 10).unwrap();
        assert_eq!(rows[0].exp_loss, 1.0);
        assert_abs_diff_eq!(rows[10].exp_loss, (-1.0f64).exp(), epsilon = 1e-12);
        assert_abs_diff_eq!(rows[10].bound, (-0.9f64).exp(), epsilon = 1e-12);
        let rows = margin_run(&two_basis(), 0.01, 200).unwrap();
        assert!(rows[200].norm_margin >= 0.94);
        assert!(margin_run(&two_basis(), 0.0, 1).is_err());
    }

    #[test]
    fn csv_parsing() {
        let inst = MarginInstance::from_csv("y,g1,g2\n1,1,1\n-1,-1,1\n").unwrap();
        assert_eq!(inst, two_basis());
        assert!(MarginInstance::from_csv("1,1\n-1\n").is_err());
        assert!(MarginInstance::from_csv("1,2\n").is_err());
    }
}
