//! Classification performance measures evaluated over the complete space of
//! binary confusion matrices.
//!
//! All confusion matrices with a fixed total `n` form an integer 3-simplex,
//! drawn as a regular tetrahedron whose vertices are the pure TP, FN, FP and
//! TN matrices. This crate enumerates that grid, evaluates the 22 built-in
//! measures on it, checks measure properties exhaustively, and bisects on
//! those checks to find parameter values where a property switches.
//!
//! The math is generic over [`Scalar`] (`f32` or `f64`); the aliases below
//! fix it to `f64`, which is what the command line and HTTP front ends use.

pub mod color;
pub mod confusion;
pub mod error;
pub mod export;
pub mod measures;
pub mod properties;
pub mod scalar;
pub mod simplex;
pub mod threshold;

pub use color::{colorize, Colormap, Rgb};
pub use confusion::ConfusionMatrix;
pub use error::{Error, ErrorClass, Result};
pub use measures::{evaluate, gamut, list_measures, lookup, MeasureDescriptor, MeasureKind};
pub use properties::{PropertyId, Verdict, WitnessKind};
pub use scalar::Scalar;
pub use simplex::{enumerate_grid, grid_size, to_cartesian};

pub type MeasureValue = confusion::MeasureValue<f64>;
pub type Params = measures::Params<f64>;
pub type BoundMeasure = measures::BoundMeasure<f64>;
pub type Gamut = measures::Gamut<f64>;
pub type Point3 = simplex::Point3<f64>;
pub type BarycentricPoint = simplex::BarycentricPoint<f64>;
pub type TetraVertexSet = simplex::TetraVertexSet<f64>;
pub type FieldSample = simplex::FieldSample<f64>;
pub type CrossSection = simplex::CrossSection<f64>;
pub type PropertyReport = properties::PropertyReport<f64>;
pub type Witness = properties::Witness<f64>;
pub type ImbalanceProfile = properties::ImbalanceProfile<f64>;
pub type PropertyMatrix = properties::PropertyMatrix<f64>;
pub type ThresholdResult = threshold::ThresholdResult<f64>;
pub type RankFlip = threshold::RankFlip<f64>;

/// Version string reported by the front ends.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
