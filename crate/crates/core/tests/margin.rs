use proptest::prelude::*;

use esboost::margin::{margin_error, margin_run, max_l1_margin, MarginInstance};

/// Grid over the weight ball for two basis columns at resolution 1e-3.
fn grid_margin(rows: &[[f64; 2]], y: &[f64]) -> f64 {
    let mut best = f64::NEG_INFINITY;
    let n = 1000i32;
    for a in -n..=n {
        let w1 = a as f64 / n as f64;
        let rest = 1.0 - w1.abs();
        for b in -n..=n {
            let w2 = b as f64 / n as f64;
            if w2.abs() > rest + 1e-12 {
                continue;
            }
            let worst = rows
                .iter()
                .zip(y)
                .map(|(g, yi)| yi * (g[0] * w1 + g[1] * w2))
                .fold(f64::INFINITY, f64::min);
            best = best.max(worst);
        }
    }
    best
}

fn instance(rows: &[[f64; 2]], y: &[f64]) -> MarginInstance {
    MarginInstance::new(rows.iter().map(|r| r.to_vec()).collect(), y.to_vec()).unwrap()
}

#[test]
fn examples_against_grid_oracle() {
    let rows = [[1.0, 1.0], [-1.0, 1.0]];
    let y = [1.0, -1.0];
    let lp = max_l1_margin(&instance(&rows, &y));
    assert!((lp - 1.0).abs() <= 1e-12);
    assert!((lp - grid_margin(&rows, &y)).abs() <= 2e-3);
    let flat = MarginInstance::new(vec![vec![1.0], vec![1.0]], vec![1.0, -1.0]).unwrap();
    assert!(max_l1_margin(&flat).abs() <= 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn simplex_agrees_with_grid(pts in prop::collection::vec(((-1.0f64..=1.0, -1.0f64..=1.0), any::<bool>()), 1..5)) {
        let rows: Vec<[f64; 2]> = pts.iter().map(|((a, b), _)| [*a, *b]).collect();
        let y: Vec<f64> = pts.iter().map(|(_, s)| if *s { 1.0 } else { -1.0 }).collect();
        let lp = max_l1_margin(&instance(&rows, &y));
        let grid = grid_margin(&rows, &y);
        prop_assert!(lp >= grid - 1e-9);
        prop_assert!((lp - grid).abs() <= 2e-3, "lp {lp} vs grid {grid}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn margin_is_invariant_under_permutation_and_negation(
        g in prop::collection::vec(prop::collection::vec(-1.0f64..=1.0, 3), 1..6),
        signs in prop::collection::vec(any::<bool>(), 6),
        flip in prop::collection::vec(any::<bool>(), 3),
        rotate in 0usize..3,
    ) {
        let y: Vec<f64> = (0..g.len()).map(|i| if signs[i] { 1.0 } else { -1.0 }).collect();
        let base = max_l1_margin(&MarginInstance::new(g.clone(), y.clone()).unwrap());
        let changed: Vec<Vec<f64>> = g
            .iter()
            .map(|row| {
                (0..3)
                    .map(|j| {
                        let src = (j + rotate) % 3;
                        if flip[j] { -row[src] } else { row[src] }
                    })
                    .collect()
            })
            .collect();
        let other = max_l1_margin(&MarginInstance::new(changed, y).unwrap());
        prop_assert!((base - other).abs() <= 1e-9);
    }

    #[test]
    fn margin_error_is_monotone_in_gamma(
        f in prop::collection::vec(-2.0f64..2.0, 1..20),
        g1 in -2.0f64..2.0,
        g2 in -2.0f64..2.0,
    ) {
        let y: Vec<f64> = (0..f.len()).map(|i| if i % 3 == 0 { -1.0 } else { 1.0 }).collect();
        let (lo, hi) = if g1 <= g2 { (g1, g2) } else { (g2, g1) };
        prop_assert!(margin_error(&f, &y, lo).unwrap() <= margin_error(&f, &y, hi).unwrap());
    }

    #[test]
    fn separable_runs_respect_the_decay_bound(
        pts in prop::collection::vec(((-1.0f64..=1.0, -1.0f64..=1.0), any::<bool>()), 1..6),
        h_frac in 0.1f64..0.9,
    ) {
        let rows: Vec<Vec<f64>> = pts.iter().map(|((a, b), _)| vec![*a, *b]).collect();
        let y: Vec<f64> = pts.iter().map(|(_, s)| if *s { 1.0 } else { -1.0 }).collect();
        let inst = MarginInstance::new(rows, y).unwrap();
        let gamma = max_l1_margin(&inst);
        prop_assume!(gamma > 0.05);
        let h = h_frac * gamma;
        for row in margin_run(&inst, h, 150).unwrap() {
            let bound = (-(row.k as f64) * h * (gamma - h)).exp();
            prop_assert!(row.exp_loss <= bound + 1e-9, "k={} {} > {}", row.k, row.exp_loss, bound);
            prop_assert!((row.bound - bound).abs() <= 1e-12);
        }
    }
}

#[test]
fn perfect_basis_margin_grows_toward_optimum() {
    let inst = MarginInstance::new(
        vec![vec![1.0, 0.3], vec![-1.0, 0.5], vec![1.0, -0.2]],
        vec![1.0, -1.0, 1.0],
    )
    .unwrap();
    let gamma = max_l1_margin(&inst);
    let h = 0.05;
    let rows = margin_run(&inst, h, 1000).unwrap();
    assert!(rows[1..]
        .windows(2)
        .all(|w| w[1].norm_margin >= w[0].norm_margin - 1e-12));
    assert!(rows[1000].norm_margin >= gamma - h - 0.05);
    assert_eq!(margin_run(&inst, h, 0).unwrap()[0].exp_loss, 1.0);
}
