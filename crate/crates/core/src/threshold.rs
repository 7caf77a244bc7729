//! Parameter values at which a property of a parametric measure changes.
//!
//! The oracle is the exhaustive property check at a fixed resolution; the
//! search is plain bisection on its boolean verdict.

use serde::Serialize;

use crate::confusion::{ConfusionMatrix, MeasureValue};
use crate::error::{Error, Result};
use crate::measures::{lookup, BoundMeasure, Params};
use crate::properties::{check_bound, CheckOptions, PropertyId, PropertyReport, Verdict};
use crate::scalar::Scalar;

/// Points in the coarse scan guarding the monotone-shape assumption.
pub const PRESCAN_POINTS: usize = 9;
const MAX_BISECTIONS: usize = 200;

#[derive(Debug, Clone, Serialize)]
pub struct ThresholdResult<T> {
    pub measure_id: String,
    pub param_name: String,
    pub property: PropertyId,
    pub bracket: (T, T),
    pub estimate: T,
    pub tolerance: T,
    pub n: u64,
    /// Whether the property holds at the lower end of the bracket.
    pub holds_below: bool,
    pub evidence_lo: PropertyReport<T>,
    pub evidence_hi: PropertyReport<T>,
}

/// Flat JSON export of a [`ThresholdResult`].
#[derive(Debug, Clone, Serialize)]
pub struct ThresholdRecord {
    pub measure: String,
    pub param: String,
    pub property: String,
    pub lo: f64,
    pub hi: f64,
    pub estimate: f64,
    pub tol: f64,
    pub n: u64,
}

impl<T: Scalar> ThresholdResult<T> {
    pub fn record(&self) -> ThresholdRecord {
        ThresholdRecord {
            measure: self.measure_id.clone(),
            param: self.param_name.clone(),
            property: self.property.to_string(),
            lo: self.bracket.0.to_f64_lossy(),
            hi: self.bracket.1.to_f64_lossy(),
            estimate: self.estimate.to_f64_lossy(),
            tol: self.tolerance.to_f64_lossy(),
            n: self.n,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.record()).expect("threshold record serializes")
    }
}

struct Oracle<'a, T> {
    base: &'a BoundMeasure<T>,
    param: &'a str,
    property: PropertyId,
    n: u64,
}

impl<T: Scalar> Oracle<'_, T> {
    fn report(&self, value: T) -> Result<PropertyReport<T>> {
        let m = self.base.with_param(self.param, value)?;
        check_bound(&m, self.property, self.n, &CheckOptions::default())
    }

    fn passes(&self, value: T) -> Result<bool> {
        let m = self.base.with_param(self.param, value)?;
        let opts = CheckOptions { witness_cap: 0 };
        Ok(check_bound(&m, self.property, self.n, &opts)?.verdict.passes())
    }
}

fn canonical_param(m: &BoundMeasure<impl Scalar>, name: &str) -> Result<String> {
    m.descriptor()
        .params
        .iter()
        .find(|p| p.name == name || p.aliases.contains(&name))
        .map(|p| p.name.to_string())
        .ok_or_else(|| Error::UnknownParameter { measure: m.id().to_string(), param: name.to_string() })
}

/// Runs a property check at each parameter value.
pub fn property_phase_scan<T: Scalar>(
    measure_id: &str,
    params: &Params<T>,
    param_name: &str,
    values: &[T],
    property: PropertyId,
    n: u64,
) -> Result<Vec<(T, Verdict)>> {
    let base = lookup(measure_id)?.bind(params)?;
    let param = canonical_param(&base, param_name)?;
    let oracle = Oracle { base: &base, param: &param, property, n };
    values
        .iter()
        .map(|&v| {
            let m = oracle.base.with_param(&param, v)?;
            let opts = CheckOptions { witness_cap: 0 };
            Ok((v, check_bound(&m, property, n, &opts)?.verdict))
        })
        .collect()
}

fn validate_bracket<T: Scalar>(bracket: (T, T), tol: T) -> Result<()> {
    let (lo, hi) = bracket;
    if !(tol > T::zero()) || !tol.is_finite() {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidArgument(format!("bracket ({lo}, {hi}) must be finite with lo < hi")));
    }
    Ok(())
}

/// Bisects on the verdict of `property` as `param_name` varies.
///
/// Requires the verdict to differ at the bracket ends and to switch exactly
/// once across a 9-point scan. Probes `tol/8` inside each end reject
/// properties that hold only at an isolated endpoint.
pub fn find_threshold<T: Scalar>(
    measure_id: &str,
    params: &Params<T>,
    param_name: &str,
    property: PropertyId,
    bracket: (T, T),
    tol: T,
    n: u64,
) -> Result<ThresholdResult<T>> {
    validate_bracket(bracket, tol)?;
    let base = lookup(measure_id)?.bind(params)?;
    let param = canonical_param(&base, param_name)?;
    let oracle = Oracle { base: &base, param: &param, property, n };
    let (lo, hi) = bracket;

    let at_lo = oracle.passes(lo)?;
    let at_hi = oracle.passes(hi)?;
    if at_lo == at_hi {
        let state = if at_lo { "holds" } else { "fails" };
        return Err(Error::Bracket(format!(
            "{property} {state} at both {param}={lo} and {param}={hi}"
        )));
    }

    let steps = T::from_count(PRESCAN_POINTS as u64 - 1);
    let grid: Vec<T> = (0..PRESCAN_POINTS)
        .map(|i| match i {
            0 => lo,
            i if i == PRESCAN_POINTS - 1 => hi,
            i => lo + (hi - lo) * T::from_count(i as u64) / steps,
        })
        .collect();
    let mut scan = Vec::with_capacity(grid.len());
    for (i, &x) in grid.iter().enumerate() {
        scan.push(match i {
            0 => at_lo,
            i if i == grid.len() - 1 => at_hi,
            _ => oracle.passes(x)?,
        });
    }
    let switches = scan.windows(2).filter(|w| w[0] != w[1]).count();
    if switches != 1 {
        return Err(Error::OracleShape(format!(
            "{property} switches {switches} times across a {PRESCAN_POINTS}-point scan of ({lo}, {hi})"
        )));
    }
    let probe = tol / T::from_count(8);
    if oracle.passes(lo + probe)? != at_lo || oracle.passes(hi - probe)? != at_hi {
        return Err(Error::OracleShape(format!(
            "{property} changes within {probe} of a bracket end; it holds only at an isolated point"
        )));
    }

    let k = scan.windows(2).position(|w| w[0] != w[1]).expect("one switch");
    let (mut a, mut b) = (grid[k], grid[k + 1]);
    let two_tol = tol + tol;
    for _ in 0..MAX_BISECTIONS {
        if b - a <= two_tol {
            break;
        }
        let mid = a + (b - a) * T::half();
        if mid <= a || mid >= b {
            break;
        }
        if oracle.passes(mid)? == at_lo {
            a = mid;
        } else {
            b = mid;
        }
    }

    let evidence_lo = oracle.report(a)?;
    let evidence_hi = oracle.report(b)?;
    if evidence_lo.verdict.passes() != at_lo || evidence_hi.verdict.passes() != at_hi {
        return Err(Error::OracleShape(format!(
            "re-check of the final bracket ({a}, {b}) did not reproduce the flip"
        )));
    }
    Ok(ThresholdResult {
        measure_id: base.id().to_string(),
        param_name: param,
        property,
        bracket: (a, b),
        estimate: a + (b - a) * T::half(),
        tolerance: tol,
        n,
        holds_below: at_lo,
        evidence_lo,
        evidence_hi,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RankFlip<T> {
    pub estimate: T,
    pub bracket: (T, T),
    /// m(A) - m(B) at the estimate.
    pub residual: T,
}

/// Parameter value at which a measure stops preferring one confusion matrix
/// over another: the root of m(A; p) - m(B; p).
pub fn rank_flip_threshold<T: Scalar>(
    measure_id: &str,
    params: &Params<T>,
    param_name: &str,
    cm_a: &ConfusionMatrix,
    cm_b: &ConfusionMatrix,
    bracket: (T, T),
    tol: T,
) -> Result<RankFlip<T>> {
    validate_bracket(bracket, tol)?;
    let base = lookup(measure_id)?.bind(params)?;
    let param = canonical_param(&base, param_name)?;
    let gap = |p: T| -> Result<T> {
        let m = base.with_param(&param, p)?;
        match (m.eval(cm_a), m.eval(cm_b)) {
            (MeasureValue::Defined(a), MeasureValue::Defined(b)) => Ok(a - b),
            _ => Err(Error::Domain(format!("{} undefined at {cm_a} or {cm_b} for {param}={p}", m.id()))),
        }
    };
    let (lo, hi) = bracket;
    let (g_lo, g_hi) = (gap(lo)?, gap(hi)?);
    let zero = T::zero();
    let done = |x: T, r: T, a: T, b: T| Ok(RankFlip { estimate: x, bracket: (a, b), residual: r });
    if g_lo == zero && g_hi == zero {
        return Err(Error::Bracket(format!("{cm_a} and {cm_b} tie at both ends; no sign change")));
    }
    if g_lo == zero {
        return done(lo, g_lo, lo, lo);
    }
    if g_hi == zero {
        return done(hi, g_hi, hi, hi);
    }
    if (g_lo > zero) == (g_hi > zero) {
        return Err(Error::Bracket(format!(
            "m(A) - m(B) has the same sign at {param}={lo} ({g_lo}) and {param}={hi} ({g_hi})"
        )));
    }
    let (mut a, mut b) = (lo, hi);
    let neg_at_a = g_lo < zero;
    let mut mid = a + (b - a) * T::half();
    for _ in 0..MAX_BISECTIONS {
        mid = a + (b - a) * T::half();
        let g = gap(mid)?;
        if g == zero || b - a <= tol + tol {
            return done(mid, g, a, b);
        }
        if (g < zero) == neg_at_a {
            a = mid;
        } else {
            b = mid;
        }
    }
    done(mid, gap(mid)?, a, b)
}

/// Continuum bound on alpha below which (1 + alpha(TPR - TNR)) G-mean^e is
/// non-decreasing in both TPR and TNR on the unit square: e / (e + 2).
///
/// The binding constraint is the TNR derivative at TPR = 0, TNR = 1, where
/// (e/2)(1 - alpha) >= alpha must hold.
pub fn iba_monotonicity_bound<T: Scalar>(exponent: T) -> T {
    exponent / (exponent + T::two())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(name: &str, v: f64) -> Params<f64> {
        Params::from([(name.to_string(), v)])
    }

    #[test]
    fn f_beta_phase_scans() {
        let none = Params::new();
        let scan = property_phase_scan("f_beta", &none, "beta", &[0.5, 1.0, 2.0], PropertyId::ErrorTypeSymmetry, 20)
            .unwrap();
        let v: Vec<_> = scan.iter().map(|s| s.1).collect();
        assert_eq!(v, vec![Verdict::Fails, Verdict::Holds, Verdict::Fails]);
        let scan = property_phase_scan("f_beta", &none, "beta", &[0.5, 1.0, 2.0], PropertyId::Monotonicity, 20).unwrap();
        assert!(scan.iter().all(|s| s.1 == Verdict::Holds));
    }

    #[test]
    fn iba_phase_scan_never_recovers() {
        let alphas = [0.0, 0.25, 0.5, 1.0, 2.0];
        let scan = property_phase_scan("iba_gmean", &Params::new(), "alpha", &alphas, PropertyId::Monotonicity, 40)
            .unwrap();
        let passes: Vec<bool> = scan.iter().map(|s| s.1.passes()).collect();
        assert!(passes[0]);
        assert!(!passes[4]);
        assert!(passes.windows(2).all(|w| w[0] || !w[1]));
    }

    #[test]
    fn point_property_is_rejected() {
        let err = find_threshold("f_beta", &Params::new(), "beta", PropertyId::ErrorTypeSymmetry, (0.5, 1.0), 1e-3, 20)
            .unwrap_err();
        assert!(matches!(err, Error::OracleShape(_)), "{err:?}");
    }

    #[test]
    fn agreeing_endpoints_are_a_bracket_error() {
        // Weighted accuracy is class-swap symmetric only at the single point w = 0.5.
        let err = find_threshold(
            "weighted_accuracy",
            &Params::new(),
            "w",
            PropertyId::ClassSwapSymmetry,
            (0.3, 0.7),
            1e-4,
            20,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Bracket(_)), "{err:?}");
    }

    #[test]
    fn bad_tolerance_rejected() {
        let r = find_threshold("iba_gmean", &Params::new(), "alpha", PropertyId::Monotonicity, (0.0, 4.0), 0.0, 10);
        assert!(matches!(r, Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn iba_threshold_small_grid() {
        let r = find_threshold("iba_gmean", &Params::new(), "alpha", PropertyId::Monotonicity, (0.0, 4.0), 1e-3, 12)
            .unwrap();
        assert!(r.holds_below);
        assert!(r.bracket.1 - r.bracket.0 <= 2e-3);
        assert!(r.evidence_lo.verdict.passes() && !r.evidence_hi.verdict.passes());
        let json = r.to_json();
        assert!(json.starts_with(r#"{"measure":"iba_gmean","param":"alpha","property":"monotonicity","lo":"#));
    }

    #[test]
    fn weighted_accuracy_rank_flip() {
        let a = ConfusionMatrix::new(10, 0, 10, 0);
        let b = ConfusionMatrix::new(0, 10, 0, 10);
        let r = rank_flip_threshold::<f64>("weighted_accuracy", &Params::new(), "w", &a, &b, (0.2, 0.8), 1e-6).unwrap();
        assert!((r.estimate - 0.5).abs() <= 1e-6);
    }

    #[test]
    fn f_beta_rank_flip_root() {
        let a = ConfusionMatrix::new(8, 2, 0, 10);
        let b = ConfusionMatrix::new(10, 0, 5, 5);
        let r = rank_flip_threshold::<f64>("f_beta", &Params::new(), "beta", &a, &b, (0.1, 10.0), 1e-6).unwrap();
        assert!(r.residual.abs() <= 1e-6);
        let fa = crate::measures::evaluate("f_beta", &p("beta", r.estimate), &a).unwrap().value().unwrap();
        let fb = crate::measures::evaluate("f_beta", &p("beta", r.estimate), &b).unwrap().value().unwrap();
        assert!((fa - fb).abs() <= 1e-6);
        // Closed form: 8/(8 + 2b^2/(1+b^2)) = 10/(10 + 5/(1+b^2)) gives b^2 = 2.
        assert!((r.estimate - 2f64.sqrt()).abs() < 1e-5);
    }

    #[test]
    fn identical_matrices_rejected() {
        let a = ConfusionMatrix::new(8, 2, 0, 10);
        let r = rank_flip_threshold("f_beta", &Params::new(), "beta", &a, &a, (0.1, 10.0), 1e-6);
        assert!(matches!(r, Err(Error::Bracket(_))));
    }

    #[test]
    fn undefined_in_rank_flip_is_domain_error() {
        let a = ConfusionMatrix::new(0, 0, 0, 10);
        let b = ConfusionMatrix::new(5, 0, 0, 5);
        let r = rank_flip_threshold("f_beta", &Params::new(), "beta", &a, &b, (0.1, 10.0), 1e-6);
        assert!(matches!(r, Err(Error::Domain(_))));
    }

    #[test]
    fn analytic_bounds() {
        assert!((iba_monotonicity_bound(1.0f64) - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(iba_monotonicity_bound(2.0f64), 0.5);
    }
}
