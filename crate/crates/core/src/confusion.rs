use std::fmt;

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

/// Counts of a binary confusion matrix.
///
/// The four counts double as unnormalized barycentric coordinates of the
/// point on the tetrahedron whose vertices are TP, FN, FP and TN.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub fp: u64,
    pub tn: u64,
}

pub(crate) fn ratio<T: Scalar>(num: u64, den: u64) -> Option<T> {
    (den != 0).then(|| T::from_count(num) / T::from_count(den))
}

impl ConfusionMatrix {
    pub const fn new(tp: u64, fn_: u64, fp: u64, tn: u64) -> Self {
        Self { tp, fn_, fp, tn }
    }

    pub const fn total(&self) -> u64 {
        self.tp + self.fn_ + self.fp + self.tn
    }

    /// Actual positives, TP + FN.
    pub const fn positives(&self) -> u64 {
        self.tp + self.fn_
    }

    /// Actual negatives, TN + FP.
    pub const fn negatives(&self) -> u64 {
        self.tn + self.fp
    }

    pub const fn predicted_positives(&self) -> u64 {
        self.tp + self.fp
    }

    pub const fn predicted_negatives(&self) -> u64 {
        self.tn + self.fn_
    }

    pub fn tpr<T: Scalar>(&self) -> Option<T> {
        ratio(self.tp, self.positives())
    }

    pub fn tnr<T: Scalar>(&self) -> Option<T> {
        ratio(self.tn, self.negatives())
    }

    pub fn ppv<T: Scalar>(&self) -> Option<T> {
        ratio(self.tp, self.predicted_positives())
    }

    pub fn npv<T: Scalar>(&self) -> Option<T> {
        ratio(self.tn, self.predicted_negatives())
    }

    pub const fn as_array(&self) -> [u64; 4] {
        [self.tp, self.fn_, self.fp, self.tn]
    }

    /// Relabels the positive and negative classes: (TP,FN,FP,TN) -> (TN,FP,FN,TP).
    pub const fn class_swapped(&self) -> Self {
        Self::new(self.tn, self.fp, self.fn_, self.tp)
    }

    /// Exchanges the two error types: (TP,FN,FP,TN) -> (TP,FP,FN,TN).
    pub const fn error_swapped(&self) -> Self {
        Self::new(self.tp, self.fp, self.fn_, self.tn)
    }

    pub const fn scaled(&self, k: u64) -> Self {
        Self::new(self.tp * k, self.fn_ * k, self.fp * k, self.tn * k)
    }

    /// Moves one false negative to the true positives, if there is one.
    pub fn fn_to_tp(&self) -> Option<Self> {
        (self.fn_ > 0).then(|| Self::new(self.tp + 1, self.fn_ - 1, self.fp, self.tn))
    }

    /// Moves one false positive to the true negatives, if there is one.
    pub fn fp_to_tn(&self) -> Option<Self> {
        (self.fp > 0).then(|| Self::new(self.tp, self.fn_, self.fp - 1, self.tn + 1))
    }

    pub fn zero_count(&self) -> usize {
        self.as_array().iter().filter(|&&c| c == 0).count()
    }
}

impl fmt::Display for ConfusionMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "cm({},{},{},{})", self.tp, self.fn_, self.fp, self.tn)
    }
}

impl From<[u64; 4]> for ConfusionMatrix {
    fn from(c: [u64; 4]) -> Self {
        Self::new(c[0], c[1], c[2], c[3])
    }
}

/// Result of evaluating a measure: a number, or `Undefined` where the
/// formula divides by zero.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(from = "Option<T>")]
pub enum MeasureValue<T> {
    Defined(T),
    Undefined,
}

impl<T: Copy> MeasureValue<T> {
    pub fn is_defined(&self) -> bool {
        matches!(self, MeasureValue::Defined(_))
    }

    pub fn is_undefined(&self) -> bool {
        !self.is_defined()
    }

    pub fn value(&self) -> Option<T> {
        match *self {
            MeasureValue::Defined(v) => Some(v),
            MeasureValue::Undefined => None,
        }
    }
}

impl<T: Serialize> Serialize for MeasureValue<T> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            MeasureValue::Defined(v) => s.serialize_some(v),
            MeasureValue::Undefined => s.serialize_none(),
        }
    }
}

impl<T> From<Option<T>> for MeasureValue<T> {
    fn from(v: Option<T>) -> Self {
        match v {
            Some(v) => MeasureValue::Defined(v),
            None => MeasureValue::Undefined,
        }
    }
}

impl<T> From<MeasureValue<T>> for Option<T> {
    fn from(v: MeasureValue<T>) -> Self {
        match v {
            MeasureValue::Defined(v) => Some(v),
            MeasureValue::Undefined => None,
        }
    }
}

impl<T: fmt::Display> fmt::Display for MeasureValue<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MeasureValue::Defined(v) => write!(f, "{v}"),
            MeasureValue::Undefined => f.write_str("undefined"),
        }
    }
}
