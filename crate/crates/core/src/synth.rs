//! Synthetic one-dimensional classification model.
//!
//! `X` is uniform on `[0, 1]` and `P(Y = 1 | X = x)` is a triangle wave with
//! `d` teeth. Because the conditional probability is piecewise linear and
//! every stump ensemble is piecewise constant, the true classification error
//! and the excess least-squares risk of an ensemble integrate in closed form.

use rand::Rng;

use crate::boost::Ensemble;
use crate::error::{Error, Result};
use crate::rng::{stream_rng, STREAM_SAMPLE};

/// Labelled sample with `x` in `[0, 1]` and `y` in `{-1, +1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    x: Vec<f64>,
    y: Vec<f64>,
}

impl Dataset {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::Precondition(format!(
                "x and y lengths differ ({} vs {})",
                x.len(),
                y.len()
            )));
        }
        if let Some(bad) = x.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::Precondition(format!(
                "x must lie in [0, 1], got {bad}"
            )));
        }
        if let Some(bad) = y.iter().find(|v| **v != 1.0 && **v != -1.0) {
            return Err(Error::Precondition(format!(
                "labels must be +1 or -1, got {bad}"
            )));
        }
        Ok(Dataset { x, y })
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// The rows at `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> Dataset {
        Dataset {
            x: indices.iter().map(|&i| self.x[i]).collect(),
            y: indices.iter().map(|&i| self.y[i]).collect(),
        }
    }

    /// CSV with header `x,y`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,y\n");
        for (x, y) in self.x.iter().zip(&self.y) {
            out.push_str(&format!("{x},{}\n", *y as i64));
        }
        out
    }
}

/// Integrals over an interval that the risk integrators need.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CellMoments {
    pub len: f64,
    /// Integral of `eta`.
    pub eta: f64,
    /// Integral of `f* = 2 eta - 1`.
    pub fstar: f64,
    /// Integral of `f*^2`.
    pub fstar_sq: f64,
}

impl CellMoments {
    /// Classification error contributed by a constant prediction `c` on this
    /// cell. `c >= 0` predicts `+1`.
    #[inline]
    pub fn class_error(&self, c: f64) -> f64 {
        if c >= 0.0 {
            self.len - self.eta
        } else {
            self.eta
        }
    }

    /// `0.5 * integral of (c - f*)^2` over the cell.
    #[inline]
    pub fn half_sq_dev(&self, c: f64) -> f64 {
        0.5 * (c * c * self.len - 2.0 * c * self.fstar + self.fstar_sq)
    }
}

/// Triangle-wave conditional probability with complexity `d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TargetModel {
    d: u32,
}

impl TargetModel {
    pub fn new(d: u32) -> Result<Self> {
        if d == 0 {
            return Err(Error::Precondition("complexity d must be >= 1".into()));
        }
        Ok(TargetModel { d })
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    /// `eta(x) = P(Y = 1 | X = x)`.
    #[inline]
    pub fn eta(&self, x: f64) -> f64 {
        let z = self.d as f64 * x;
        let frac = z - z.floor();
        if frac <= 0.5 {
            2.0 * frac
        } else {
            2.0 * (1.0 - frac)
        }
    }

    /// Least-squares target `f*(x) = 2 eta(x) - 1`.
    #[inline]
    pub fn f_star(&self, x: f64) -> f64 {
        2.0 * self.eta(x) - 1.0
    }

    /// Kinks of `eta`: the multiples of `1 / (2d)` in `[0, 1]`.
    pub fn breakpoints(&self) -> Vec<f64> {
        let n = 2 * self.d as usize;
        (0..=n).map(|j| j as f64 / n as f64).collect()
    }

    /// Exact moments of `eta` over `[lo, hi]`, splitting at the kinks so each
    /// piece is linear.
    pub fn moments(&self, lo: f64, hi: f64) -> CellMoments {
        let mut acc = CellMoments::default();
        if hi <= lo {
            return acc;
        }
        let n = 2.0 * self.d as f64;
        let mut a = lo;
        while a < hi {
            // Next kink strictly to the right of a.
            let mut next = ((a * n).floor() + 1.0) / n;
            if next <= a {
                next = ((a * n).floor() + 2.0) / n;
            }
            let b = next.min(hi);
            let w = b - a;
            let (ea, eb) = (self.eta(a), self.eta(b));
            let (fa, fb) = (2.0 * ea - 1.0, 2.0 * eb - 1.0);
            let fm = 0.5 * (fa + fb);
            acc.len += w;
            acc.eta += 0.5 * w * (ea + eb);
            acc.fstar += 0.5 * w * (fa + fb);
            acc.fstar_sq += w / 6.0 * (fa * fa + 4.0 * fm * fm + fb * fb);
            a = b;
        }
        acc
    }

    /// Exact `integral of min(eta, 1 - eta)` over `[0, 1]`.
    pub fn bayes_error_integral(&self) -> f64 {
        // min(eta, 1 - eta) is linear between multiples of 1 / (4d).
        let n = 4 * self.d as usize;
        (0..n)
            .map(|j| {
                let (a, b) = (j as f64 / n as f64, (j + 1) as f64 / n as f64);
                let g = |x: f64| {
                    let e = self.eta(x);
                    e.min(1.0 - e)
                };
                0.5 * (b - a) * (g(a) + g(b))
            })
            .sum()
    }

    /// Draw `m` points: `x` uniform, `y = +1` with probability `eta(x)`.
    pub fn sample(&self, m: usize, seed: u64) -> Dataset {
        let mut rng = stream_rng(seed, STREAM_SAMPLE);
        let mut x = Vec::with_capacity(m);
        let mut y = Vec::with_capacity(m);
        for _ in 0..m {
            let xi: f64 = rng.random();
            let u: f64 = rng.random();
            y.push(if u < self.eta(xi) { 1.0 } else { -1.0 });
            x.push(xi);
        }
        Dataset { x, y }
    }

    /// Cells on which `ens` is constant, paired with its value there.
    fn ensemble_cells(&self, ens: &Ensemble) -> Vec<(CellMoments, f64)> {
        let mut cuts: Vec<f64> = ens
            .terms()
            .iter()
            .map(|t| t.basis.threshold)
            .filter(|&a| a > 0.0 && a < 1.0)
            .collect();
        cuts.push(0.0);
        cuts.push(1.0);
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        cuts.windows(2)
            .map(|w| (self.moments(w[0], w[1]), ens.value(0.5 * (w[0] + w[1]))))
            .collect()
    }

    /// Exact true classification error of the rule `f(x) >= 0 -> +1`.
    pub fn class_error(&self, ens: &Ensemble) -> f64 {
        self.ensemble_cells(ens)
            .iter()
            .map(|(cell, c)| cell.class_error(*c))
            .sum()
    }

    /// Exact excess least-squares risk `0.5 * integral of (f - f*)^2`.
    pub fn excess_convex(&self, ens: &Ensemble) -> f64 {
        self.ensemble_cells(ens)
            .iter()
            .map(|(cell, c)| cell.half_sq_dev(*c))
            .sum()
    }
}

pub fn target_probability(d: u32, x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Precondition(format!(
            "x must lie in [0, 1], got {x}"
        )));
    }
    Ok(TargetModel::new(d)?.eta(x))
}

pub fn sample(d: u32, m: usize, seed: u64) -> Result<Dataset> {
    Ok(TargetModel::new(d)?.sample(m, seed))
}

/// Bayes error of the triangle-wave model for every `d`.
pub const BAYES_ERROR: f64 = 0.25;

/// Bayes error of the triangle-wave model, which is 0.25 for every `d`.
pub fn bayes_error(d: u32) -> Result<f64> {
    let model = TargetModel::new(d)?;
    debug_assert!((model.bayes_error_integral() - 0.25).abs() <= 1e-12);
    Ok(0.25)
}

pub fn true_class_error(ens: &Ensemble, d: u32) -> Result<f64> {
    Ok(TargetModel::new(d)?.class_error(ens))
}

pub fn true_excess_convex(ens: &Ensemble, d: u32) -> Result<f64> {
    Ok(TargetModel::new(d)?.excess_convex(ens))
}
