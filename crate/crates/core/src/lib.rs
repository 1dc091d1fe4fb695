//! Diamond ensemble point sets on the unit sphere.
//!
//! The crate builds the ensemble from its integer parameters, constructs the
//! matching equal-area partition, and measures the configurations: cap
//! discrepancy (sup and L²), Riesz and logarithmic energies, separation and
//! covering radius.
//!
//! ```
//! use diamond_core::{ensemble, metrics};
//!
//! let model = ensemble::validate(&ensemble::simple_model(3)).unwrap();
//! let points = ensemble::generate(&model);
//! assert_eq!(points.len(), 38);
//! let profile = metrics::polar_cap_profile(&model);
//! assert_eq!(profile.max_exact, num_rational::Ratio::new(3, 19));
//! ```

pub mod ensemble;
pub mod error;
pub mod geometry;
pub mod metrics;
pub mod partition;
pub(crate) mod sum;

/// Exact rational used for counts and heights.
pub type Rational = num_rational::Ratio<i128>;

pub use ensemble::{DiamondModel, ModelConstants, ModelSpec, ThetaPolicy};
pub use error::{GeometryError, MetricsError, ModelError, PartitionError};
pub use geometry::{Boundary, PointSet, Provenance, SphericalCap, UnitVec};
pub use partition::{Partition, Region, RegionKind};
