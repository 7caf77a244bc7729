//! Registry of the 22 built-in binary classification measures.
//!
//! Every measure is a pure function of a [`ConfusionMatrix`] and its
//! parameters. A zero denominator anywhere in a formula makes the result
//! [`MeasureValue::Undefined`]; `0 / positive` is an ordinary zero. Each
//! descriptor also carries an undefinedness predicate written directly over
//! the integer counts, kept independent of the evaluation path so the two can
//! be checked against each other.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::confusion::{ratio, ConfusionMatrix, MeasureValue};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::simplex::enumerate_grid;

/// Parameter overrides by name. Missing parameters take their defaults.
pub type Params<T> = BTreeMap<String, T>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub lo_open: bool,
    pub hi_open: bool,
}

impl Interval {
    pub const fn closed(lo: f64, hi: f64) -> Self {
        Self { lo, hi, lo_open: false, hi_open: false }
    }

    pub const fn positive() -> Self {
        Self { lo: 0.0, hi: f64::INFINITY, lo_open: true, hi_open: true }
    }

    pub const fn non_negative() -> Self {
        Self { lo: 0.0, hi: f64::INFINITY, lo_open: false, hi_open: true }
    }

    pub fn contains(&self, x: f64) -> bool {
        if x.is_nan() {
            return false;
        }
        let above = if self.lo_open { x > self.lo } else { x >= self.lo };
        let below = if self.hi_open { x < self.hi } else { x <= self.hi };
        above && below
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let open = if self.lo_open { '(' } else { '[' };
        let close = if self.hi_open { ')' } else { ']' };
        let hi = if self.hi.is_infinite() { "inf".to_string() } else { self.hi.to_string() };
        write!(f, "{open}{}, {hi}{close}", self.lo)
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ParamSpec {
    pub name: &'static str,
    #[serde(skip)]
    pub aliases: &'static [&'static str],
    pub default: f64,
    pub interval: Interval,
}

/// Identifies the formula behind a descriptor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasureKind {
    Accuracy,
    ErrorRate,
    Recall,
    Specificity,
    Precision,
    Npv,
    F1,
    FBeta,
    GMean,
    FowlkesMallows,
    BalancedAccuracy,
    YoudenJ,
    Mcc,
    Kappa,
    Jaccard,
    Kulczynski,
    OptimizedPrecision,
    IbaGMean,
    ClassBalanceAccuracy,
    Markedness,
    PredictiveGMean,
    WeightedAccuracy,
}

#[derive(Debug, Serialize)]
pub struct MeasureDescriptor {
    pub id: &'static str,
    pub display_name: &'static str,
    #[serde(skip)]
    pub aliases: &'static [&'static str],
    pub params: &'static [ParamSpec],
    #[serde(skip)]
    pub kind: MeasureKind,
}

const UNIT: (f64, f64) = (0.0, 1.0);
const SIGNED: (f64, f64) = (-1.0, 1.0);

const BETA: ParamSpec = ParamSpec {
    name: "beta",
    aliases: &["β", "b"],
    default: 1.0,
    interval: Interval::positive(),
};
const ALPHA: ParamSpec = ParamSpec {
    name: "alpha",
    aliases: &["α", "a"],
    default: 0.1,
    interval: Interval::non_negative(),
};
const EXPONENT: ParamSpec = ParamSpec {
    name: "exponent",
    aliases: &["e"],
    default: 1.0,
    interval: Interval::positive(),
};
const WEIGHT: ParamSpec = ParamSpec {
    name: "w",
    aliases: &["weight"],
    default: 0.5,
    interval: Interval::closed(0.0, 1.0),
};

macro_rules! measure {
    ($id:literal, $name:literal, $kind:ident) => {
        measure!($id, $name, $kind, [], [])
    };
    ($id:literal, $name:literal, $kind:ident, [$($alias:literal),*]) => {
        measure!($id, $name, $kind, [$($alias),*], [])
    };
    ($id:literal, $name:literal, $kind:ident, [$($alias:literal),*], [$($param:expr),*]) => {
        MeasureDescriptor {
            id: $id,
            display_name: $name,
            aliases: &[$($alias),*],
            params: &[$($param),*],
            kind: MeasureKind::$kind,
        }
    };
}

static MEASURES: [MeasureDescriptor; 22] = [
    measure!("accuracy", "Accuracy", Accuracy, ["acc"]),
    measure!("error_rate", "Error rate", ErrorRate, ["error"]),
    measure!("recall", "Sensitivity (recall, TPR)", Recall, ["sensitivity", "tpr"]),
    measure!("specificity", "Specificity (TNR)", Specificity, ["tnr"]),
    measure!("precision", "Precision (PPV)", Precision, ["ppv"]),
    measure!("npv", "Negative predictive value", Npv),
    measure!("f1", "F1 score", F1, ["f1_score"]),
    measure!("f_beta", "F-beta score", FBeta, ["fbeta"], [BETA]),
    measure!("g_mean", "G-mean", GMean, ["gmean"]),
    measure!("fowlkes_mallows", "Fowlkes-Mallows index", FowlkesMallows, ["fm", "gmean_ppv_tpr"]),
    measure!("balanced_accuracy", "Balanced accuracy", BalancedAccuracy, ["ba"]),
    measure!("youden_j", "Youden's J", YoudenJ, ["youden", "informedness"]),
    measure!("mcc", "Matthews correlation coefficient", Mcc, ["matthews"]),
    measure!("kappa", "Cohen's kappa", Kappa, ["cohen_kappa"]),
    measure!("jaccard", "Jaccard index", Jaccard, []),
    measure!("kulczynski", "Kulczynski index", Kulczynski, []),
    measure!("optimized_precision", "Optimized precision", OptimizedPrecision, ["op"]),
    measure!("iba_gmean", "IBA(G-mean)", IbaGMean, ["iba"], [ALPHA, EXPONENT]),
    measure!("cba", "Class balance accuracy", ClassBalanceAccuracy, ["class_balance_accuracy"]),
    measure!("markedness", "Markedness", Markedness, []),
    measure!("predictive_gmean", "G-mean of PPV and NPV", PredictiveGMean, ["gmean_ppv_npv"]),
    measure!("weighted_accuracy", "Weighted accuracy", WeightedAccuracy, ["wacc"], [WEIGHT]),
];

/// The 22 built-in measures in their stable registry order.
pub fn list_measures() -> &'static [MeasureDescriptor] {
    &MEASURES
}

/// Looks a measure up by id or alias.
pub fn lookup(id: &str) -> Result<&'static MeasureDescriptor> {
    let key = id.trim().to_ascii_lowercase().replace('-', "_");
    MEASURES
        .iter()
        .find(|d| d.id == key || d.aliases.contains(&key.as_str()))
        .ok_or_else(|| Error::UnknownMeasure(id.to_string()))
}

impl MeasureDescriptor {
    fn param_index(&self, name: &str) -> Option<usize> {
        self.params
            .iter()
            .position(|p| p.name == name || p.aliases.contains(&name))
    }

    /// Resolves parameter overrides against this descriptor's schema.
    pub fn bind<T: Scalar>(&'static self, params: &Params<T>) -> Result<BoundMeasure<T>> {
        let mut values: Vec<T> = self
            .params
            .iter()
            .map(|p| T::from_f64_lossy(p.default))
            .collect();
        for (name, &value) in params {
            let idx = self.param_index(name).ok_or_else(|| Error::UnknownParameter {
                measure: self.id.to_string(),
                param: name.clone(),
            })?;
            let spec = &self.params[idx];
            if !spec.interval.contains(value.to_f64_lossy()) {
                return Err(Error::ParameterOutOfRange {
                    measure: self.id.to_string(),
                    param: spec.name.to_string(),
                    value: value.to_f64_lossy(),
                    interval: spec.interval.to_string(),
                });
            }
            values[idx] = value;
        }
        Ok(BoundMeasure { descriptor: self, params: values })
    }

    /// Undefinedness predicate over the raw counts.
    pub fn is_undefined_at(&self, cm: &ConfusionMatrix) -> bool {
        let ConfusionMatrix { tp, fn_, fp, tn } = *cm;
        let p = tp + fn_;
        let n = tn + fp;
        let pp = tp + fp;
        let pn = tn + fn_;
        use MeasureKind::*;
        match self.kind {
            Accuracy | ErrorRate => cm.total() == 0,
            Recall => p == 0,
            Specificity => n == 0,
            Precision => pp == 0,
            Npv => pn == 0,
            F1 | FBeta | Jaccard => tp + fn_ + fp == 0,
            GMean | BalancedAccuracy | YoudenJ | IbaGMean | WeightedAccuracy => p == 0 || n == 0,
            OptimizedPrecision => p == 0 || n == 0 || (tp == 0 && tn == 0),
            FowlkesMallows | Kulczynski => p == 0 || pp == 0,
            Mcc => p == 0 || n == 0 || pp == 0 || pn == 0,
            Kappa => pp * n + p * pn == 0,
            ClassBalanceAccuracy => p.max(pp) == 0 || n.max(pn) == 0,
            Markedness | PredictiveGMean => pp == 0 || pn == 0,
        }
    }
}

/// A measure with its parameters resolved and validated.
#[derive(Debug, Clone)]
pub struct BoundMeasure<T> {
    descriptor: &'static MeasureDescriptor,
    params: Vec<T>,
}

impl<T: Scalar> BoundMeasure<T> {
    pub fn descriptor(&self) -> &'static MeasureDescriptor {
        self.descriptor
    }

    pub fn id(&self) -> &'static str {
        self.descriptor.id
    }

    /// Resolved parameter values keyed by canonical name.
    pub fn params(&self) -> Params<T> {
        self.descriptor
            .params
            .iter()
            .zip(&self.params)
            .map(|(s, &v)| (s.name.to_string(), v))
            .collect()
    }

    pub fn param(&self, name: &str) -> Option<T> {
        self.descriptor.param_index(name).map(|i| self.params[i])
    }

    /// Returns a copy with one parameter replaced, validating the new value.
    pub fn with_param(&self, name: &str, value: T) -> Result<Self> {
        let mut params = self.params();
        let idx = self.descriptor.param_index(name).ok_or_else(|| Error::UnknownParameter {
            measure: self.descriptor.id.to_string(),
            param: name.to_string(),
        })?;
        params.insert(self.descriptor.params[idx].name.to_string(), value);
        self.descriptor.bind(&params)
    }

    /// Closed interval every defined value lies in.
    pub fn range(&self) -> (T, T) {
        let (lo, hi) = match self.descriptor.kind {
            MeasureKind::YoudenJ
            | MeasureKind::Mcc
            | MeasureKind::Kappa
            | MeasureKind::Markedness
            | MeasureKind::OptimizedPrecision => SIGNED,
            MeasureKind::IbaGMean => {
                let alpha = self.params[0].to_f64_lossy();
                ((1.0 - alpha).min(0.0), 1.0 + alpha)
            }
            _ => UNIT,
        };
        (T::from_f64_lossy(lo), T::from_f64_lossy(hi))
    }

    pub fn eval(&self, cm: &ConfusionMatrix) -> MeasureValue<T> {
        self.eval_opt(cm).into()
    }

    fn eval_opt(&self, cm: &ConfusionMatrix) -> Option<T> {
        let ConfusionMatrix { tp, fn_, fp, tn } = *cm;
        let one = T::one();
        let half = T::half();
        let tpr = || cm.tpr::<T>();
        let tnr = || cm.tnr::<T>();
        let ppv = || cm.ppv::<T>();
        let npv = || cm.npv::<T>();
        use MeasureKind::*;
        match self.descriptor.kind {
            Accuracy => ratio(tp + tn, cm.total()),
            ErrorRate => ratio(fn_ + fp, cm.total()),
            Recall => tpr(),
            Specificity => tnr(),
            Precision => ppv(),
            Npv => npv(),
            F1 => ratio(2 * tp, 2 * tp + fn_ + fp),
            FBeta => {
                let b2 = self.params[0] * self.params[0];
                let num = (one + b2) * T::from_count(tp);
                let den = num + b2 * T::from_count(fn_) + T::from_count(fp);
                (den != T::zero()).then(|| num / den)
            }
            GMean => Some((tpr()? * tnr()?).sqrt()),
            FowlkesMallows => Some((tpr()? * ppv()?).sqrt()),
            BalancedAccuracy => Some((tpr()? + tnr()?) * half),
            YoudenJ => Some(tpr()? + tnr()? - one),
            Mcc => {
                let num = (tp * tn) as i128 - (fp * fn_) as i128;
                let den = (tp + fp) as u128 * (tp + fn_) as u128 * (tn + fp) as u128 * (tn + fn_) as u128;
                if den == 0 {
                    return None;
                }
                let num = T::from_i128(num)?;
                let den = T::from_u128(den)?.sqrt();
                Some(num / den)
            }
            Kappa => {
                let num = 2 * ((tp * tn) as i128 - (fn_ * fp) as i128);
                let den = (tp + fp) * (fp + tn) + (tp + fn_) * (fn_ + tn);
                if den == 0 {
                    return None;
                }
                Some(T::from_i128(num)? / T::from_count(den))
            }
            Jaccard => ratio(tp, tp + fp + fn_),
            Kulczynski => Some((ppv()? + tpr()?) * half),
            OptimizedPrecision => {
                let (tpr, tnr) = (tpr()?, tnr()?);
                let sum = tpr + tnr;
                if sum == T::zero() {
                    return None;
                }
                let acc: T = ratio(tp + tn, cm.total())?;
                Some(acc - (tnr - tpr).abs() / sum)
            }
            IbaGMean => {
                let (alpha, exponent) = (self.params[0], self.params[1]);
                let (tpr, tnr) = (tpr()?, tnr()?);
                let gmean = (tpr * tnr).sqrt();
                let base = if exponent == one { gmean } else { gmean.powf(exponent) };
                Some((one + alpha * (tpr - tnr)) * base)
            }
            ClassBalanceAccuracy => {
                let pos: T = ratio(tp, (tp + fn_).max(tp + fp))?;
                let neg: T = ratio(tn, (tn + fp).max(tn + fn_))?;
                Some((pos + neg) * half)
            }
            Markedness => Some(ppv()? + npv()? - one),
            PredictiveGMean => Some((ppv()? * npv()?).sqrt()),
            WeightedAccuracy => {
                let w = self.params[0];
                Some(w * tpr()? + (one - w) * tnr()?)
            }
        }
    }
}

/// Evaluates a measure by id on one confusion matrix.
pub fn evaluate<T: Scalar>(measure_id: &str, params: &Params<T>, cm: &ConfusionMatrix) -> Result<MeasureValue<T>> {
    let bound = lookup(measure_id)?.bind(params)?;
    if cm.total() == 0 {
        return Err(Error::InvalidArgument("confusion matrix total must be at least 1".into()));
    }
    Ok(bound.eval(cm))
}

/// Extremes of the defined values over a grid plus the number of
/// undefined points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Gamut<T> {
    pub min: T,
    pub max: T,
    pub undefined: usize,
}

impl<T: Scalar> Gamut<T> {
    /// Folds a sequence of values into a gamut; `None` when nothing is defined.
    pub fn from_values<'a, I>(values: I) -> Option<Self>
    where
        I: IntoIterator<Item = &'a MeasureValue<T>>,
    {
        let mut undefined = 0;
        let mut extremes: Option<(T, T)> = None;
        for v in values {
            match *v {
                MeasureValue::Defined(x) => {
                    extremes = Some(match extremes {
                        Some((lo, hi)) => (lo.min(x), hi.max(x)),
                        None => (x, x),
                    });
                }
                MeasureValue::Undefined => undefined += 1,
            }
        }
        extremes.map(|(min, max)| Gamut { min, max, undefined })
    }
}

pub fn gamut<T: Scalar>(measure_id: &str, params: &Params<T>, n: u64) -> Result<Gamut<T>> {
    let bound = lookup(measure_id)?.bind(params)?;
    let values: Vec<MeasureValue<T>> = enumerate_grid(n)?
        .collect::<Vec<_>>()
        .par_iter()
        .map(|cm| bound.eval(cm))
        .collect();
    Gamut::from_values(&values).ok_or_else(|| Error::EmptyGamut(bound.id().to_string()))
}
