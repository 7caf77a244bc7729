use tetrascope_core::measures::Params;
use tetrascope_core::properties::PropertyId;
use tetrascope_core::threshold::{find_threshold, iba_monotonicity_bound, rank_flip_threshold};
use tetrascope_core::{enumerate_grid, ConfusionMatrix};

/// Exact largest alpha keeping (1 + alpha(x - y)) G^e non-decreasing under
/// every legal transfer on the grid. Each transfer changes the value by
/// A + alpha B, so the bound is min A / -B over transfers with B < 0.
fn brute_force_iba_threshold(n: u64, exponent: f64) -> f64 {
    let base = |cm: &ConfusionMatrix| -> Option<(f64, f64)> {
        let (p, q) = (cm.positives(), cm.negatives());
        if p == 0 || q == 0 {
            return None;
        }
        let (x, y) = (cm.tp as f64 / p as f64, cm.tn as f64 / q as f64);
        let g = (x * y).sqrt().powf(exponent);
        Some((g, (x - y) * g))
    };
    let mut best = f64::INFINITY;
    for cm in enumerate_grid(n).unwrap() {
        for after in [cm.fn_to_tp(), cm.fp_to_tn()].into_iter().flatten() {
            if let (Some((g0, d0)), Some((g1, d1))) = (base(&cm), base(&after)) {
                let (a, b) = (g1 - g0, d1 - d0);
                if b < 0.0 {
                    best = best.min(a / -b);
                }
            }
        }
    }
    best
}

fn estimate(n: u64, exponent: f64, tol: f64) -> (f64, (f64, f64)) {
    let params = Params::from([("exponent".to_string(), exponent)]);
    let r = find_threshold("iba_gmean", &params, "alpha", PropertyId::Monotonicity, (0.0, 4.0), tol, n).unwrap();
    assert!(r.holds_below);
    assert!(r.evidence_lo.verdict.passes());
    assert!(!r.evidence_hi.verdict.passes());
    assert!(r.bracket.1 - r.bracket.0 <= 2.0 * tol);
    (r.estimate, r.bracket)
}

#[test]
fn bisection_brackets_the_exact_grid_threshold() {
    for (n, exponent) in [(20, 1.0), (40, 1.0), (20, 2.0), (40, 2.0)] {
        let exact = brute_force_iba_threshold(n, exponent);
        let (est, (lo, hi)) = estimate(n, exponent, 1e-4);
        assert!(lo <= exact + 1e-9 && exact <= hi + 1e-9, "n={n} e={exponent}: {exact} not in ({lo}, {hi})");
        assert!((est - exact).abs() <= 1e-4);
    }
}

#[test]
fn squared_variant_matches_closed_form_grid_threshold() {
    // For e = 2 the binding transfer is TPR = 1/P, TNR: 1 - 1/N -> 1 with P = N = n/2.
    let exact = brute_force_iba_threshold(40, 2.0);
    assert!((exact - 1.0 / 1.9).abs() < 1e-12);
}

#[test]
fn grid_thresholds_approach_the_continuum_bound() {
    let bound = iba_monotonicity_bound(1.0);
    let t40 = brute_force_iba_threshold(40, 1.0);
    let t80 = brute_force_iba_threshold(80, 1.0);
    assert!(t40 > t80 && t80 > bound);
    assert!(t80 - bound < t40 - bound);
}

#[test]
fn estimates_are_bit_reproducible() {
    let a = estimate(24, 1.0, 1e-3);
    let b = estimate(24, 1.0, 1e-3);
    assert_eq!(a.0.to_bits(), b.0.to_bits());
}

#[test]
fn rank_flip_residual_is_small() {
    let a = ConfusionMatrix::new(8, 2, 0, 10);
    let b = ConfusionMatrix::new(10, 0, 5, 5);
    for tol in [1e-3, 1e-6, 1e-9] {
        let r = rank_flip_threshold::<f64>("f_beta", &Params::new(), "beta", &a, &b, (0.1, 10.0), tol).unwrap();
        assert!(r.residual.abs() <= tol.max(1e-6));
        assert!(r.bracket.1 - r.bracket.0 <= 2.0 * tol);
    }
}
