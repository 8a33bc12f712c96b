//! Böttcher coordinates, local transseries at repelling periodic points, and
//! dimension estimates for the quadratic family `P(x) = lambda x (1 - x)`.
//!
//! The entry points mirror the pipeline: [`polymap`] for the map and its
//! periodic points, [`boettcher`] for the series `phi` with `J = phi(∂D)`,
//! [`transseries`] for the local model `phi = L + g(s^b omega(ln s))`,
//! [`geometry`] for curves and images, and [`analysis`] for exponents and
//! dimension.

// NaN must fail the tolerance checks, hence `!(x <= tol)` rather than `x > tol`.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod boettcher;
pub mod error;
pub mod geometry;
pub mod polymap;
pub mod series;
pub mod transseries;

pub use num_complex::Complex64;

/// Complex double used throughout.
pub type C64 = Complex64;

pub use error::{Error, Result};
pub use geometry::{PointCloud, Polyline, RasterImage};
pub use polymap::{ExternalAngle, PeriodicOrbit, PolyMap, QuadParam};
pub use series::{Kernel, TruncatedSeries};
