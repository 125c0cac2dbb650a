//! Exact-rational engine for curve-counting generating functions on
//! surface geometries: truncated even Laurent series in a genus parameter,
//! Novikov-graded series over effective curve classes, the closed-form
//! vertex kernels of the degeneration formula, BPS/GW resummation, and
//! end-to-end identity checkers with a CLI front end.
//!
//! Everything is computed over arbitrary-precision rationals; there is no
//! floating point anywhere in the crate.

pub mod correspond;
pub mod degeneration;
pub mod error;
pub mod genus_series;
pub mod invariant_store;
pub mod loglocal;
pub mod surface_lattice;
pub mod transforms;

pub use error::Error;
pub use genus_series::{GenusSeries, Rational};
pub use invariant_store::{Dataset, InvariantKind, InvariantTable, NovikovSeries, StationaryOracle};
pub use surface_lattice::{CurveClass, SurfacePreset};
