use tetrascope_core::confusion::MeasureValue;
use tetrascope_core::measures::{list_measures, lookup, Params};
use tetrascope_core::{enumerate_grid, ConfusionMatrix};

fn params(pairs: &[(&str, f64)]) -> Params<f64> {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

fn grid(n: u64) -> Vec<ConfusionMatrix> {
    enumerate_grid(n).unwrap().collect()
}

#[test]
fn defined_values_stay_in_declared_range() {
    let extra = [
        ("f_beta", params(&[("beta", 0.3)])),
        ("f_beta", params(&[("beta", 4.0)])),
        ("iba_gmean", params(&[("alpha", 2.5)])),
        ("iba_gmean", params(&[("alpha", 0.7), ("exponent", 2.0)])),
        ("weighted_accuracy", params(&[("w", 0.9)])),
    ];
    let mut cases: Vec<_> = list_measures().iter().map(|d| (d.id, Params::new())).collect();
    cases.extend(extra);
    let points = grid(25);
    for (id, p) in cases {
        let m = lookup(id).unwrap().bind(&p).unwrap();
        let (lo, hi) = m.range();
        for cm in &points {
            if let MeasureValue::Defined(v) = m.eval(cm) {
                assert!(v >= lo - 1e-12 && v <= hi + 1e-12, "{id} {p:?} {cm}: {v} outside [{lo}, {hi}]");
            }
        }
    }
}

#[test]
fn undefined_exactly_where_predicate_holds() {
    let points = grid(25);
    for d in list_measures() {
        let m = d.bind::<f64>(&Params::new()).unwrap();
        for cm in &points {
            assert_eq!(m.eval(cm).is_undefined(), d.is_undefined_at(cm), "{} at {cm}", d.id);
        }
    }
}

#[test]
fn f1_matches_f_beta_at_one() {
    let f1 = lookup("f1").unwrap().bind::<f64>(&Params::new()).unwrap();
    let fb = lookup("f_beta").unwrap().bind(&params(&[("beta", 1.0)])).unwrap();
    for cm in grid(25) {
        assert_eq!(f1.eval(&cm), fb.eval(&cm), "{cm}");
    }
}

#[test]
fn balanced_accuracy_is_mean_of_rates() {
    let ba = lookup("balanced_accuracy").unwrap().bind::<f64>(&Params::new()).unwrap();
    let sens = lookup("recall").unwrap().bind::<f64>(&Params::new()).unwrap();
    let spec = lookup("specificity").unwrap().bind::<f64>(&Params::new()).unwrap();
    for cm in grid(25) {
        if let (Some(a), Some(b)) = (sens.eval(&cm).value(), spec.eval(&cm).value()) {
            let v = ba.eval(&cm).value().unwrap();
            assert!((v - (a + b) / 2.0).abs() <= 1e-12);
        }
    }
}

#[test]
fn iba_at_zero_alpha_is_its_base() {
    let g = lookup("g_mean").unwrap().bind::<f64>(&Params::new()).unwrap();
    let iba = lookup("iba_gmean").unwrap().bind(&params(&[("alpha", 0.0)])).unwrap();
    let iba2 = lookup("iba_gmean").unwrap().bind(&params(&[("alpha", 0.0), ("exponent", 2.0)])).unwrap();
    for cm in grid(25) {
        assert_eq!(iba.eval(&cm), g.eval(&cm));
        match (iba2.eval(&cm).value(), g.eval(&cm).value()) {
            (Some(a), Some(b)) => assert!((a - b * b).abs() <= 1e-12),
            (None, None) => {}
            _ => panic!("definedness differs at {cm}"),
        }
    }
}

#[test]
fn mcc_negates_when_correct_and_incorrect_swap() {
    let mcc = lookup("mcc").unwrap().bind::<f64>(&Params::new()).unwrap();
    for cm in grid(25) {
        let swapped = ConfusionMatrix::new(cm.fn_, cm.tp, cm.tn, cm.fp);
        if let (Some(a), Some(b)) = (mcc.eval(&cm).value(), mcc.eval(&swapped).value()) {
            assert!((a + b).abs() <= 1e-12, "{cm}");
        }
    }
}

/// Pearson correlation of the expanded label vectors.
fn pearson_oracle(cm: &ConfusionMatrix) -> Option<f64> {
    let mut pairs = Vec::new();
    pairs.extend(std::iter::repeat((1.0, 1.0)).take(cm.tp as usize));
    pairs.extend(std::iter::repeat((1.0, 0.0)).take(cm.fn_ as usize));
    pairs.extend(std::iter::repeat((0.0, 1.0)).take(cm.fp as usize));
    pairs.extend(std::iter::repeat((0.0, 0.0)).take(cm.tn as usize));
    let n = pairs.len() as f64;
    let (mx, my) = pairs.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x / n, b + y / n));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in &pairs {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    (sxx > 0.0 && syy > 0.0).then(|| sxy / (sxx * syy).sqrt())
}

/// Observed versus chance agreement.
fn kappa_oracle(cm: &ConfusionMatrix) -> Option<f64> {
    let n = cm.total() as f64;
    let po = (cm.tp + cm.tn) as f64 / n;
    let pe = (cm.positives() as f64 * cm.predicted_positives() as f64
        + cm.negatives() as f64 * cm.predicted_negatives() as f64)
        / (n * n);
    (pe != 1.0).then(|| (po - pe) / (1.0 - pe))
}

#[test]
fn mcc_and_kappa_match_textbook_forms() {
    let mcc = lookup("mcc").unwrap().bind::<f64>(&Params::new()).unwrap();
    let kappa = lookup("kappa").unwrap().bind::<f64>(&Params::new()).unwrap();
    for cm in grid(12) {
        match (mcc.eval(&cm).value(), pearson_oracle(&cm)) {
            (Some(a), Some(b)) => assert!((a - b).abs() < 1e-12, "mcc {cm}: {a} vs {b}"),
            (None, None) => {}
            other => panic!("mcc definedness at {cm}: {other:?}"),
        }
        match (kappa.eval(&cm).value(), kappa_oracle(&cm)) {
            (Some(a), Some(b)) => assert!((a - b).abs() < 1e-12, "kappa {cm}: {a} vs {b}"),
            (None, None) => {}
            other => panic!("kappa definedness at {cm}: {other:?}"),
        }
    }
}

#[test]
fn every_measure_is_scale_invariant() {
    for d in list_measures() {
        let m = d.bind::<f64>(&Params::new()).unwrap();
        for cm in grid(9) {
            match (m.eval(&cm).value(), m.eval(&cm.scaled(3)).value()) {
                (Some(a), Some(b)) => assert!((a - b).abs() <= 1e-12, "{} {cm}", d.id),
                (None, None) => {}
                _ => panic!("{} definedness changes under scaling at {cm}", d.id),
            }
        }
    }
}

#[test]
fn single_and_double_precision_agree() {
    let points = grid(10);
    for d in list_measures() {
        let m64 = d.bind::<f64>(&Params::new()).unwrap();
        let m32 = d.bind::<f32>(&Params::new()).unwrap();
        for cm in &points {
            match (m64.eval(cm).value(), m32.eval(cm).value()) {
                (Some(a), Some(b)) => assert!((a - b as f64).abs() < 1e-5, "{} {cm}", d.id),
                (None, None) => {}
                _ => panic!("{} precision changes definedness at {cm}", d.id),
            }
        }
    }
}
