//! Byte-deterministic file formats for fields, point clouds and slices.

use std::io::{self, Write};

use crate::color::{colorize, Colormap, Rgb};
use crate::confusion::{ConfusionMatrix, MeasureValue};
use crate::error::{Error, Result};
use crate::measures::Gamut;
use crate::scalar::Scalar;
use crate::simplex::{CrossSection, FieldSample};

/// Formats like C's `%.9g`: nine significant digits, trailing zeros trimmed.
pub fn format_sig9(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("integer exponent");
    let trim = |s: String| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    };
    if (-4..9).contains(&exp) {
        trim(format!("{x:.*}", (8 - exp) as usize))
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim(mantissa.to_string()), exp.abs())
    }
}

fn fmt_value<T: Scalar>(v: &MeasureValue<T>) -> String {
    match v.value() {
        Some(x) => format_sig9(x.to_f64_lossy()),
        None => String::new(),
    }
}

fn fmt_opt<T: Scalar>(v: Option<T>) -> String {
    v.map(|x| format_sig9(x.to_f64_lossy())).unwrap_or_default()
}

pub const FIELD_CSV_HEADER: &str = "tp,fn,fp,tn,x,y,z,value";

pub fn write_field_csv<T: Scalar, W: Write>(samples: &[FieldSample<T>], mut w: W) -> io::Result<()> {
    writeln!(w, "{FIELD_CSV_HEADER}")?;
    for s in samples {
        let [x, y, z] = s.xyz.0.map(|c| format_sig9(c.to_f64_lossy()));
        let cm = s.cm;
        writeln!(w, "{},{},{},{},{x},{y},{z},{}", cm.tp, cm.fn_, cm.fp, cm.tn, fmt_value(&s.value))?;
    }
    w.flush()
}

/// One parsed row of a field CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldRow {
    pub cm: ConfusionMatrix,
    pub xyz: [f64; 3],
    pub value: Option<f64>,
}

pub fn parse_field_csv(text: &str) -> Result<Vec<FieldRow>> {
    let mut lines = text.lines();
    if lines.next() != Some(FIELD_CSV_HEADER) {
        return Err(Error::InvalidArgument("missing field CSV header".into()));
    }
    let bad = |line: &str| Error::InvalidArgument(format!("malformed field CSV row `{line}`"));
    lines
        .map(|line| {
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 8 {
                return Err(bad(line));
            }
            let count = |s: &str| s.parse::<u64>().map_err(|_| bad(line));
            let real = |s: &str| s.parse::<f64>().map_err(|_| bad(line));
            Ok(FieldRow {
                cm: ConfusionMatrix::new(count(cols[0])?, count(cols[1])?, count(cols[2])?, count(cols[3])?),
                xyz: [real(cols[4])?, real(cols[5])?, real(cols[6])?],
                value: if cols[7].is_empty() { None } else { Some(real(cols[7])?) },
            })
        })
        .collect()
}

/// Gamut for coloring: the observed extremes, widened to the fallback range
/// when every defined value is equal or nothing is defined.
pub fn display_gamut<T: Scalar>(values: &[MeasureValue<T>], fallback: (T, T)) -> Gamut<T> {
    match Gamut::from_values(values) {
        Some(g) if g.min < g.max => g,
        Some(g) => Gamut { min: fallback.0.min(g.min), max: fallback.1.max(g.max), undefined: g.undefined },
        None => Gamut { min: fallback.0, max: fallback.1, undefined: values.len() },
    }
}

pub fn write_ply<T: Scalar, W: Write>(
    samples: &[FieldSample<T>],
    colormap: &Colormap,
    gamut: &Gamut<T>,
    mut w: W,
) -> Result<()> {
    let values: Vec<_> = samples.iter().map(|s| s.value).collect();
    let colors = colorize(&values, colormap, gamut)?;
    writeln!(w, "ply")?;
    writeln!(w, "format ascii 1.0")?;
    writeln!(w, "element vertex {}", samples.len())?;
    for axis in ["x", "y", "z"] {
        writeln!(w, "property float {axis}")?;
    }
    for channel in ["red", "green", "blue"] {
        writeln!(w, "property uchar {channel}")?;
    }
    writeln!(w, "end_header")?;
    for (s, Rgb([r, g, b])) in samples.iter().zip(colors) {
        let [x, y, z] = s.xyz.0.map(|c| format_sig9(c.to_f64_lossy()));
        writeln!(w, "{x} {y} {z} {r} {g} {b}")?;
    }
    w.flush()?;
    Ok(())
}

/// Binary PPM of a cross-section. Image rows run top to bottom, so the first
/// row written is the highest TNR.
pub fn write_slice_ppm<T: Scalar, W: Write>(
    section: &CrossSection<T>,
    colormap: &Colormap,
    gamut: &Gamut<T>,
    mut w: W,
) -> Result<()> {
    let values: Vec<_> = section.samples.iter().map(|s| s.value).collect();
    let colors = colorize(&values, colormap, gamut)?;
    let (width, height) = (section.tpr_steps(), section.tnr_steps());
    write!(w, "P6\n{width} {height}\n255\n")?;
    for row in (0..height).rev() {
        for Rgb(px) in &colors[row * width..(row + 1) * width] {
            w.write_all(px)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Sidecar CSV of a cross-section, bottom row (TNR = 0) first.
pub fn write_slice_csv<T: Scalar, W: Write>(section: &CrossSection<T>, mut w: W) -> io::Result<()> {
    writeln!(w, "tpr,tnr,tp,fn,fp,tn,value")?;
    for s in &section.samples {
        let cm = s.cm;
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            fmt_opt(cm.tpr::<T>()),
            fmt_opt(cm.tnr::<T>()),
            cm.tp,
            cm.fn_,
            cm.fp,
            cm.tn,
            fmt_value(&s.value)
        )?;
    }
    w.flush()
}
