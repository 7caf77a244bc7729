use serde::{Deserialize, Serialize};

use crate::confusion::MeasureValue;
use crate::error::{Error, Result};
use crate::measures::Gamut;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Rgb(pub [u8; 3]);

impl Rgb {
    pub const SENTINEL_GRAY: Rgb = Rgb([128, 128, 128]);
}

/// Piecewise-linear color scale over [0, 1] plus a color for undefined
/// values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Colormap {
    pub stops: Vec<(f64, Rgb)>,
    #[serde(default = "sentinel")]
    pub undefined: Rgb,
}

fn sentinel() -> Rgb {
    Rgb::SENTINEL_GRAY
}

impl Default for Colormap {
    /// Diverging blue, white, red.
    fn default() -> Self {
        Self {
            stops: vec![
                (0.0, Rgb([0, 0, 255])),
                (0.5, Rgb([255, 255, 255])),
                (1.0, Rgb([255, 0, 0])),
            ],
            undefined: Rgb::SENTINEL_GRAY,
        }
    }
}

impl Colormap {
    pub fn validate(&self) -> Result<()> {
        let stops = &self.stops;
        if stops.len() < 2 {
            return Err(Error::InvalidColormap("at least two stops are required".into()));
        }
        if stops[0].0 != 0.0 || stops[stops.len() - 1].0 != 1.0 {
            return Err(Error::InvalidColormap("first stop must be at 0 and last at 1".into()));
        }
        if stops.windows(2).any(|w| !(w[0].0 < w[1].0)) {
            return Err(Error::InvalidColormap("stop positions must be strictly increasing".into()));
        }
        Ok(())
    }

    /// Color at normalized position `t`, clamped to [0, 1].
    pub fn at(&self, t: f64) -> Rgb {
        let t = if t.is_nan() { 0.0 } else { t.clamp(0.0, 1.0) };
        let last = self.stops[self.stops.len() - 1];
        if t >= last.0 {
            return last.1;
        }
        let i = self.stops.partition_point(|s| s.0 <= t) - 1;
        let (p0, c0) = self.stops[i];
        let (p1, c1) = self.stops[i + 1];
        let u = (t - p0) / (p1 - p0);
        let mix = |a: u8, b: u8| (a as f64 + (b as f64 - a as f64) * u).round() as u8;
        Rgb([mix(c0.0[0], c1.0[0]), mix(c0.0[1], c1.0[1]), mix(c0.0[2], c1.0[2])])
    }
}

/// Linear position of `v` within the gamut.
pub fn normalize<T: Scalar>(v: T, gamut: &Gamut<T>) -> f64 {
    let (lo, hi) = (gamut.min.to_f64_lossy(), gamut.max.to_f64_lossy());
    (v.to_f64_lossy() - lo) / (hi - lo)
}

pub fn colorize<'a, T, I>(values: I, colormap: &Colormap, gamut: &Gamut<T>) -> Result<Vec<Rgb>>
where
    T: Scalar,
    I: IntoIterator<Item = &'a MeasureValue<T>>,
{
    colormap.validate()?;
    if !(gamut.min < gamut.max) {
        return Err(Error::InvalidGamut { min: gamut.min.to_f64_lossy(), max: gamut.max.to_f64_lossy() });
    }
    Ok(values
        .into_iter()
        .map(|v| match *v {
            MeasureValue::Defined(x) => colormap.at(normalize(x, gamut)),
            MeasureValue::Undefined => colormap.undefined,
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn gamut(min: f64, max: f64) -> Gamut<f64> {
        Gamut { min, max, undefined: 0 }
    }

    #[test]
    fn endpoints_and_sentinel() {
        let cmap = Colormap::default();
        let g = gamut(-1.0, 1.0);
        let values = [MeasureValue::Defined(-1.0), MeasureValue::Defined(1.0), MeasureValue::Undefined];
        let colors = colorize(&values, &cmap, &g).unwrap();
        assert_eq!(colors, vec![Rgb([0, 0, 255]), Rgb([255, 0, 0]), Rgb([128, 128, 128])]);
        let mid = colorize(&[MeasureValue::Defined(0.0)], &cmap, &g).unwrap();
        assert_eq!(mid, vec![Rgb([255, 255, 255])]);
    }

    #[test]
    fn malformed_colormaps_rejected() {
        let g = gamut(0.0, 1.0);
        let v = [MeasureValue::Defined(0.5)];
        let bad = |stops: Vec<(f64, Rgb)>| Colormap { stops, undefined: Rgb::SENTINEL_GRAY };
        let black = Rgb([0, 0, 0]);
        assert!(colorize(&v, &bad(vec![(0.0, black)]), &g).is_err());
        assert!(colorize(&v, &bad(vec![(0.1, black), (1.0, black)]), &g).is_err());
        assert!(colorize(&v, &bad(vec![(0.0, black), (0.9, black)]), &g).is_err());
        assert!(colorize(&v, &bad(vec![(0.0, black), (0.5, black), (0.5, black), (1.0, black)]), &g).is_err());
        assert!(colorize(&v, &Colormap::default(), &gamut(1.0, 1.0)).is_err());
    }

    #[test]
    fn colormap_round_trips_through_json() {
        let json = r#"{"stops":[[0.0,[0,0,0]],[1.0,[255,255,255]]]}"#;
        let cmap: Colormap = serde_json::from_str(json).unwrap();
        assert_eq!(cmap.undefined, Rgb::SENTINEL_GRAY);
        assert_eq!(cmap.at(0.5), Rgb([128, 128, 128]));
    }

    proptest! {
        #[test]
        fn normalization_preserves_order(a in -1.0f64..1.0, b in -1.0f64..1.0) {
            let g = gamut(-1.0, 1.0);
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(normalize(lo, &g) <= normalize(hi, &g));
        }
    }
}
