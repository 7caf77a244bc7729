//! JSON response bodies. Field order is fixed by declaration order, and
//! undefined values are encoded as `null`.

use serde::Serialize;
use tetrascope_core::measures::MeasureDescriptor;
use tetrascope_core::{CrossSection, FieldSample, Gamut, TetraVertexSet};

#[derive(Debug, Serialize)]
pub struct IntervalJson {
    pub lo: f64,
    /// `null` for an unbounded interval.
    pub hi: Option<f64>,
    pub lo_open: bool,
    pub hi_open: bool,
}

#[derive(Debug, Serialize)]
pub struct ParamJson {
    pub name: &'static str,
    pub default: f64,
    pub interval: IntervalJson,
}

#[derive(Debug, Serialize)]
pub struct MeasureJson {
    pub id: &'static str,
    pub name: &'static str,
    pub params: Vec<ParamJson>,
    pub range: [f64; 2],
}

impl MeasureJson {
    pub fn from_descriptor(d: &'static MeasureDescriptor) -> Self {
        let (lo, hi) = d.bind::<f64>(&Default::default()).expect("defaults are valid").range();
        Self {
            id: d.id,
            name: d.display_name,
            params: d
                .params
                .iter()
                .map(|p| ParamJson {
                    name: p.name,
                    default: p.default,
                    interval: IntervalJson {
                        lo: p.interval.lo,
                        hi: p.interval.hi.is_finite().then_some(p.interval.hi),
                        lo_open: p.interval.lo_open,
                        hi_open: p.interval.hi_open,
                    },
                })
                .collect(),
            range: [lo, hi],
        }
    }
}

#[derive(Debug, Serialize)]
pub struct GamutJson {
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub undefined: usize,
}

impl GamutJson {
    pub fn of(samples: &[FieldSample]) -> Self {
        let values: Vec<_> = samples.iter().map(|s| s.value).collect();
        match Gamut::from_values(&values) {
            Some(g) => GamutJson { min: Some(g.min), max: Some(g.max), undefined: g.undefined },
            None => GamutJson { min: None, max: None, undefined: values.len() },
        }
    }
}

#[derive(Debug, Serialize)]
pub struct FieldJson {
    pub measure: &'static str,
    pub n: u64,
    pub vertices: TetraVertexSet,
    pub points: Vec<[u64; 4]>,
    pub xyz: Vec<f64>,
    pub values: Vec<Option<f64>>,
    pub gamut: GamutJson,
}

impl FieldJson {
    pub fn new(measure: &'static str, n: u64, samples: &[FieldSample]) -> Self {
        Self {
            measure,
            n,
            vertices: TetraVertexSet::canonical(),
            points: samples.iter().map(|s| s.cm.as_array()).collect(),
            xyz: samples.iter().flat_map(|s| s.xyz.0).collect(),
            values: samples.iter().map(|s| s.value.value()).collect(),
            gamut: GamutJson::of(samples),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct SliceJson {
    pub measure: &'static str,
    pub n: u64,
    pub pos_fraction: f64,
    pub positives: u64,
    pub tpr_steps: usize,
    pub tnr_steps: usize,
    pub tpr_axis: Vec<Option<f64>>,
    pub tnr_axis: Vec<Option<f64>>,
    /// Row-major, rows by ascending TNR, columns by ascending TPR.
    pub values: Vec<Option<f64>>,
    pub gamut: GamutJson,
}

impl SliceJson {
    pub fn new(measure: &'static str, section: &CrossSection) -> Self {
        Self {
            measure,
            n: section.n,
            pos_fraction: section.positives as f64 / section.n as f64,
            positives: section.positives,
            tpr_steps: section.tpr_steps(),
            tnr_steps: section.tnr_steps(),
            tpr_axis: section.tpr_axis(),
            tnr_axis: section.tnr_axis(),
            values: section.samples.iter().map(|s| s.value.value()).collect(),
            gamut: GamutJson::of(&section.samples),
        }
    }
}
