//! Exhaustive property checks over the resolution-n grid.
//!
//! Every check walks the full grid, compares measure values at pairs of
//! confusion matrices, and reduces the per-point outcomes in enumeration
//! order so reports (including witness order) are deterministic.

use std::collections::{BTreeMap, HashMap};
use std::fmt::{self, Write as _};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::confusion::{ConfusionMatrix, MeasureValue};
use crate::error::{Error, Result};
use crate::measures::{list_measures, lookup, BoundMeasure, Params};
use crate::scalar::Scalar;
use crate::simplex::{enumerate_grid, resolve_fraction};

pub const DEFAULT_WITNESS_CAP: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PropertyId {
    /// Never decreases under FN -> TP or FP -> TN transfers.
    Monotonicity,
    /// Invariant under (TP,FN,FP,TN) -> (TN,FP,FN,TP).
    ClassSwapSymmetry,
    /// Invariant under exchanging FN and FP.
    ErrorTypeSymmetry,
    /// Depends on the confusion matrix only through TPR and TNR.
    ImbalanceInvariance,
    /// Defined at every grid point.
    UndefinedPoints,
}

impl PropertyId {
    pub const ALL: [PropertyId; 5] = [
        PropertyId::Monotonicity,
        PropertyId::ClassSwapSymmetry,
        PropertyId::ErrorTypeSymmetry,
        PropertyId::ImbalanceInvariance,
        PropertyId::UndefinedPoints,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PropertyId::Monotonicity => "monotonicity",
            PropertyId::ClassSwapSymmetry => "class_swap_symmetry",
            PropertyId::ErrorTypeSymmetry => "error_type_symmetry",
            PropertyId::ImbalanceInvariance => "imbalance_invariance",
            PropertyId::UndefinedPoints => "undefined_points",
        }
    }
}

impl fmt::Display for PropertyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PropertyId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        Ok(match key.as_str() {
            "monotonicity" | "monotone" => PropertyId::Monotonicity,
            "class_swap_symmetry" | "class_swap" => PropertyId::ClassSwapSymmetry,
            "error_type_symmetry" | "error_type" => PropertyId::ErrorTypeSymmetry,
            "imbalance_invariance" | "imbalance" => PropertyId::ImbalanceInvariance,
            "undefined_points" | "undefined" => PropertyId::UndefinedPoints,
            _ => return Err(Error::InvalidArgument(format!("unknown property `{s}`"))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Holds,
    Fails,
    Vacuous,
}

impl Verdict {
    /// Whether the property is considered satisfied (vacuous truth included).
    pub fn passes(self) -> bool {
        self != Verdict::Fails
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Holds => "holds",
            Verdict::Fails => "fails",
            Verdict::Vacuous => "vacuous",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessKind {
    /// Both values defined and the comparison fails.
    Value,
    /// Exactly one side of a symmetry comparison is undefined.
    DefinednessMismatch,
    /// An improving transfer turns a defined value into an undefined one.
    /// Recorded for inspection, never counted as a violation.
    DefinednessRegression,
    /// An undefined grid point.
    UndefinedPoint,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness<T> {
    pub kind: WitnessKind,
    pub before: ConfusionMatrix,
    pub after: ConfusionMatrix,
    pub value_before: MeasureValue<T>,
    pub value_after: MeasureValue<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyReport<T> {
    pub measure_id: String,
    pub params: Params<T>,
    pub property: PropertyId,
    pub n: u64,
    pub verdict: Verdict,
    pub points_visited: usize,
    pub comparisons: usize,
    pub satisfied: usize,
    pub violations: usize,
    pub undefined_pairs_skipped: usize,
    pub definedness_regressions: usize,
    pub witnesses: Vec<Witness<T>>,
    /// Every value witness reproduces after doubling all counts.
    pub embedding_verified: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct CheckOptions {
    pub witness_cap: usize,
}

impl Default for CheckOptions {
    fn default() -> Self {
        Self { witness_cap: DEFAULT_WITNESS_CAP }
    }
}

enum Outcome<T> {
    Satisfied,
    Skipped,
    Regression(Witness<T>),
    Violation(Witness<T>),
}

fn witness<T: Scalar>(
    kind: WitnessKind,
    before: ConfusionMatrix,
    after: ConfusionMatrix,
    value_before: MeasureValue<T>,
    value_after: MeasureValue<T>,
) -> Witness<T> {
    Witness { kind, before, after, value_before, value_after }
}

fn compare_transfer<T: Scalar>(m: &BoundMeasure<T>, before: ConfusionMatrix, after: ConfusionMatrix) -> Outcome<T> {
    let (vb, va) = (m.eval(&before), m.eval(&after));
    match (vb, va) {
        (MeasureValue::Defined(b), MeasureValue::Defined(a)) => {
            if a < b - T::tolerance() {
                Outcome::Violation(witness(WitnessKind::Value, before, after, vb, va))
            } else {
                Outcome::Satisfied
            }
        }
        (MeasureValue::Defined(_), MeasureValue::Undefined) => {
            Outcome::Regression(witness(WitnessKind::DefinednessRegression, before, after, vb, va))
        }
        _ => Outcome::Skipped,
    }
}

fn compare_equal<T: Scalar>(m: &BoundMeasure<T>, before: ConfusionMatrix, after: ConfusionMatrix) -> Outcome<T> {
    let (vb, va) = (m.eval(&before), m.eval(&after));
    match (vb, va) {
        (MeasureValue::Defined(b), MeasureValue::Defined(a)) => {
            if (a - b).abs() > T::tolerance() {
                Outcome::Violation(witness(WitnessKind::Value, before, after, vb, va))
            } else {
                Outcome::Satisfied
            }
        }
        (MeasureValue::Undefined, MeasureValue::Undefined) => Outcome::Skipped,
        _ => Outcome::Violation(witness(WitnessKind::DefinednessMismatch, before, after, vb, va)),
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Exact (TPR, TNR) as reduced fractions, when both classes are present.
fn rate_key(cm: &ConfusionMatrix) -> Option<[u64; 4]> {
    let (p, n) = (cm.positives(), cm.negatives());
    if p == 0 || n == 0 {
        return None;
    }
    let g = gcd(cm.tp, p);
    let h = gcd(cm.tn, n);
    Some([cm.tp / g, p / g, cm.tn / h, n / h])
}

fn same_value<T: Scalar>(a: MeasureValue<T>, b: MeasureValue<T>) -> bool {
    match (a, b) {
        (MeasureValue::Defined(x), MeasureValue::Defined(y)) => (x - y).abs() <= T::tolerance(),
        (MeasureValue::Undefined, MeasureValue::Undefined) => true,
        _ => false,
    }
}

/// Replays every value witness with all counts doubled. Every measure in the
/// registry is scale invariant, so a violation at n persists at 2n.
fn verify_embedding<T: Scalar>(m: &BoundMeasure<T>, witnesses: &[Witness<T>]) -> bool {
    witnesses
        .iter()
        .filter(|w| w.kind == WitnessKind::Value)
        .all(|w| {
            same_value(m.eval(&w.before.scaled(2)), w.value_before)
                && same_value(m.eval(&w.after.scaled(2)), w.value_after)
        })
}

/// Runs one property check for an already bound measure.
pub fn check_bound<T: Scalar>(
    m: &BoundMeasure<T>,
    property: PropertyId,
    n: u64,
    opts: &CheckOptions,
) -> Result<PropertyReport<T>> {
    let points: Vec<ConfusionMatrix> = enumerate_grid(n)?.collect();
    let per_point: Vec<Vec<Outcome<T>>> = match property {
        PropertyId::Monotonicity => points
            .par_iter()
            .map(|&cm| {
                [cm.fn_to_tp(), cm.fp_to_tn()]
                    .into_iter()
                    .flatten()
                    .map(|after| compare_transfer(m, cm, after))
                    .collect()
            })
            .collect(),
        PropertyId::ClassSwapSymmetry => points
            .par_iter()
            .map(|&cm| vec![compare_equal(m, cm, cm.class_swapped())])
            .collect(),
        PropertyId::ErrorTypeSymmetry => points
            .par_iter()
            .map(|&cm| vec![compare_equal(m, cm, cm.error_swapped())])
            .collect(),
        PropertyId::ImbalanceInvariance => {
            let mut first: HashMap<[u64; 4], ConfusionMatrix> = HashMap::new();
            let reference: Vec<Option<ConfusionMatrix>> = points
                .iter()
                .map(|cm| {
                    let key = rate_key(cm)?;
                    let rep = *first.entry(key).or_insert(*cm);
                    (rep != *cm).then_some(rep)
                })
                .collect();
            points
                .par_iter()
                .zip(reference.par_iter())
                .map(|(&cm, rep)| rep.iter().map(|&rep| compare_equal(m, rep, cm)).collect())
                .collect()
        }
        PropertyId::UndefinedPoints => points
            .par_iter()
            .map(|&cm| {
                let v = m.eval(&cm);
                vec![if v.is_defined() {
                    Outcome::Satisfied
                } else {
                    Outcome::Violation(witness(WitnessKind::UndefinedPoint, cm, cm, v, v))
                }]
            })
            .collect(),
    };

    let mut report = PropertyReport {
        measure_id: m.id().to_string(),
        params: m.params(),
        property,
        n,
        verdict: Verdict::Vacuous,
        points_visited: points.len(),
        comparisons: 0,
        satisfied: 0,
        violations: 0,
        undefined_pairs_skipped: 0,
        definedness_regressions: 0,
        witnesses: Vec::new(),
        embedding_verified: true,
    };
    for outcome in per_point.into_iter().flatten() {
        report.comparisons += 1;
        let w = match outcome {
            Outcome::Satisfied => {
                report.satisfied += 1;
                None
            }
            Outcome::Skipped => {
                report.undefined_pairs_skipped += 1;
                None
            }
            Outcome::Regression(w) => {
                report.undefined_pairs_skipped += 1;
                report.definedness_regressions += 1;
                Some(w)
            }
            Outcome::Violation(w) => {
                report.violations += 1;
                Some(w)
            }
        };
        if let Some(w) = w {
            if report.witnesses.len() < opts.witness_cap {
                report.witnesses.push(w);
            }
        }
    }
    report.verdict = if report.violations > 0 {
        Verdict::Fails
    } else if report.satisfied == 0 {
        Verdict::Vacuous
    } else {
        Verdict::Holds
    };
    report.embedding_verified = verify_embedding(m, &report.witnesses);
    Ok(report)
}

pub fn check_property<T: Scalar>(
    measure_id: &str,
    params: &Params<T>,
    property: PropertyId,
    n: u64,
) -> Result<PropertyReport<T>> {
    let m = lookup(measure_id)?.bind(params)?;
    check_bound(&m, property, n, &CheckOptions::default())
}

pub fn check_monotonicity<T: Scalar>(measure_id: &str, params: &Params<T>, n: u64) -> Result<PropertyReport<T>> {
    check_property(measure_id, params, PropertyId::Monotonicity, n)
}

pub fn check_class_swap_symmetry<T: Scalar>(
    measure_id: &str,
    params: &Params<T>,
    n: u64,
) -> Result<PropertyReport<T>> {
    check_property(measure_id, params, PropertyId::ClassSwapSymmetry, n)
}

pub fn check_error_type_symmetry<T: Scalar>(
    measure_id: &str,
    params: &Params<T>,
    n: u64,
) -> Result<PropertyReport<T>> {
    check_property(measure_id, params, PropertyId::ErrorTypeSymmetry, n)
}

/// Bitmask of the nonzero counts of a grid point (bit 0 = TP, 1 = FN,
/// 2 = FP, 3 = TN); identifies the smallest tetrahedron element holding it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BoundaryElement(pub u8);

impl BoundaryElement {
    const NAMES: [&'static str; 4] = ["tp", "fn", "fp", "tn"];

    pub fn of(cm: &ConfusionMatrix) -> Self {
        let mask = cm
            .as_array()
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .fold(0u8, |acc, (i, _)| acc | (1 << i));
        BoundaryElement(mask)
    }

    /// Element spanned by the named vertices, e.g. `["fn", "tn"]`.
    pub fn spanned_by(vertices: &[&str]) -> Self {
        let mask = vertices
            .iter()
            .filter_map(|v| Self::NAMES.iter().position(|n| n == v))
            .fold(0u8, |acc, i| acc | (1 << i));
        BoundaryElement(mask)
    }

    pub fn is_within(&self, other: BoundaryElement) -> bool {
        self.0 & !other.0 == 0
    }
}

impl fmt::Display for BoundaryElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<_> = (0..4).filter(|i| self.0 & (1 << i) != 0).map(|i| Self::NAMES[i]).collect();
        let kind = match names.len() {
            1 => "vertex",
            2 => "edge",
            3 => "face",
            _ => return f.write_str("interior"),
        };
        write!(f, "{kind} {}", names.join("-"))
    }
}

impl Serialize for BoundaryElement {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UndefinedRegions {
    pub measure_id: String,
    pub n: u64,
    pub count: usize,
    /// Undefined points per smallest containing element.
    pub elements: BTreeMap<BoundaryElement, usize>,
    pub samples: Vec<ConfusionMatrix>,
}

impl UndefinedRegions {
    /// Whether every undefined point lies in the closure of `element`.
    pub fn lies_within(&self, element: BoundaryElement) -> bool {
        self.elements.keys().all(|e| e.is_within(element))
    }
}

pub fn detect_undefined_regions<T: Scalar>(measure_id: &str, params: &Params<T>, n: u64) -> Result<UndefinedRegions> {
    let m = lookup(measure_id)?.bind(params)?;
    let points: Vec<ConfusionMatrix> = enumerate_grid(n)?.collect();
    let undefined: Vec<ConfusionMatrix> = points
        .par_iter()
        .filter(|cm| m.eval(cm).is_undefined())
        .copied()
        .collect();
    let mut elements = BTreeMap::new();
    for cm in &undefined {
        *elements.entry(BoundaryElement::of(cm)).or_insert(0) += 1;
    }
    Ok(UndefinedRegions {
        measure_id: m.id().to_string(),
        n,
        count: undefined.len(),
        elements,
        samples: undefined.iter().take(DEFAULT_WITNESS_CAP).copied().collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProfileEntry<T> {
    pub pos_fraction: T,
    pub cm: ConfusionMatrix,
    pub value: MeasureValue<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImbalanceProfile<T> {
    pub measure_id: String,
    pub tpr: T,
    pub tnr: T,
    pub entries: Vec<ProfileEntry<T>>,
    /// max - min over the defined entries; zero when fewer than two.
    pub max_spread: T,
}

fn realize_count<T: Scalar>(rate: T, class_size: u64, what: &str) -> Result<u64> {
    let r = rate.to_f64_lossy();
    let scaled = r * class_size as f64;
    let nearest = scaled.round();
    if (0.0..=1.0).contains(&r) && (scaled - nearest).abs() <= 1e-9 * class_size.max(1) as f64 {
        return Ok(nearest as u64);
    }
    let size = class_size as f64;
    let lower = scaled.floor().clamp(0.0, size) / size;
    let upper = scaled.ceil().clamp(0.0, size) / size;
    Err(Error::Unrealizable {
        message: format!(
            "{what} {r} is not realizable with {class_size} examples; nearest realizable values are {lower} and {upper}"
        ),
        suggestions: vec![lower, upper],
    })
}

/// Evaluates a measure at fixed TPR and TNR across several class balances.
pub fn imbalance_profile<T: Scalar>(
    measure_id: &str,
    params: &Params<T>,
    n: u64,
    tpr: T,
    tnr: T,
    fractions: &[T],
) -> Result<ImbalanceProfile<T>> {
    let m = lookup(measure_id)?.bind(params)?;
    let mut entries = Vec::with_capacity(fractions.len());
    for &f in fractions {
        let p = resolve_fraction(f, n)?;
        let neg = n - p;
        if p == 0 || neg == 0 {
            return Err(Error::Unrealizable {
                message: format!("positive fraction {f} leaves one class empty at n={n}"),
                suggestions: vec![1.0 / n as f64, (n - 1) as f64 / n as f64],
            });
        }
        let tp = realize_count(tpr, p, "tpr")?;
        let tn = realize_count(tnr, neg, "tnr")?;
        let cm = ConfusionMatrix::new(tp, p - tp, neg - tn, tn);
        entries.push(ProfileEntry { pos_fraction: f, cm, value: m.eval(&cm) });
    }
    let defined: Vec<T> = entries.iter().filter_map(|e| e.value.value()).collect();
    let max_spread = match (
        defined.iter().copied().reduce(T::max),
        defined.iter().copied().reduce(T::min),
    ) {
        (Some(hi), Some(lo)) => hi - lo,
        _ => T::zero(),
    };
    Ok(ImbalanceProfile { measure_id: m.id().to_string(), tpr, tnr, entries, max_spread })
}

#[derive(Debug, Clone, Serialize)]
pub struct PropertyCell<T> {
    pub property: PropertyId,
    #[serde(flatten)]
    pub outcome: CellOutcome<T>,
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CellOutcome<T> {
    Report(PropertyReport<T>),
    Error(String),
}

#[derive(Debug, Clone, Serialize)]
pub struct PropertyRow<T> {
    pub measure_id: String,
    pub cells: Vec<PropertyCell<T>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PropertyMatrix<T> {
    pub n: u64,
    pub rows: Vec<PropertyRow<T>>,
}

/// Runs every property check for each measure. Failures are recorded per
/// cell; the table is always complete.
pub fn property_matrix<T: Scalar>(
    measure_ids: &[&str],
    params: &BTreeMap<String, Params<T>>,
    n: u64,
) -> PropertyMatrix<T> {
    let empty = Params::new();
    let rows = measure_ids
        .iter()
        .map(|&id| {
            let bound = lookup(id).and_then(|d| d.bind(params.get(d.id).or(params.get(id)).unwrap_or(&empty)));
            let cells = PropertyId::ALL
                .iter()
                .map(|&property| {
                    let outcome = match &bound {
                        Ok(m) => match check_bound(m, property, n, &CheckOptions::default()) {
                            Ok(r) => CellOutcome::Report(r),
                            Err(e) => CellOutcome::Error(e.to_string()),
                        },
                        Err(e) => CellOutcome::Error(e.to_string()),
                    };
                    PropertyCell { property, outcome }
                })
                .collect();
            let measure_id = bound.as_ref().map(|m| m.id().to_string()).unwrap_or_else(|_| id.to_string());
            PropertyRow { measure_id, cells }
        })
        .collect();
    PropertyMatrix { n, rows }
}

/// Every registered measure id, in registry order.
pub fn all_measure_ids() -> Vec<&'static str> {
    list_measures().iter().map(|d| d.id).collect()
}

impl<T: Scalar> PropertyMatrix<T> {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("measure,property,verdict,violations,undefined_skipped\n");
        for row in &self.rows {
            for cell in &row.cells {
                match &cell.outcome {
                    CellOutcome::Report(r) => writeln!(
                        out,
                        "{},{},{},{},{}",
                        row.measure_id,
                        cell.property,
                        r.verdict.as_str(),
                        r.violations,
                        r.undefined_pairs_skipped
                    ),
                    CellOutcome::Error(_) => writeln!(out, "{},{},error,,", row.measure_id, cell.property),
                }
                .expect("writing to a String");
            }
        }
        out
    }

    pub fn to_markdown(&self) -> String {
        let mut out = String::from("| measure |");
        for p in PropertyId::ALL {
            write!(out, " {p} |").unwrap();
        }
        out.push_str("\n|---|");
        out.push_str(&"---|".repeat(PropertyId::ALL.len()));
        out.push('\n');
        for row in &self.rows {
            write!(out, "| {} |", row.measure_id).unwrap();
            for cell in &row.cells {
                let text = match &cell.outcome {
                    CellOutcome::Report(r) if cell.property == PropertyId::UndefinedPoints => {
                        format!("{} undefined", r.violations)
                    }
                    CellOutcome::Report(r) => match r.verdict {
                        Verdict::Holds => "✓".to_string(),
                        Verdict::Vacuous => "vacuous".to_string(),
                        Verdict::Fails => format!("✗ ({})", r.violations),
                    },
                    CellOutcome::Error(e) => format!("error: {e}"),
                };
                write!(out, " {text} |").unwrap();
            }
            out.push('\n');
        }
        out
    }
}
