//! Quality measures of point sets on the sphere.

mod discrepancy;
mod distance;
mod l2;

pub use discrepancy::{
    cap_deviation, equatorial_discrepancy, polar_cap_profile, random_direction,
    sup_discrepancy_estimate, sup_discrepancy_exact, CapDiscrepancy, EquatorialDiscrepancy,
    PolarEntry, PolarProfile, Witness, EXACT_LIMIT,
};
pub use distance::{
    covering_estimate, covering_radius, covering_upper_bound, log_energy, mesh_ratio, riesz_energy,
    separation, separation_brute, sum_distances, CoveringRadius, SpatialGrid,
};
pub use l2::{
    calibrate_stolarsky, l2_discrepancy_quadrature, l2_discrepancy_stolarsky,
    mean_pair_distance_mc, random_point_set, Calibration, QuadratureGrid, MEAN_PAIR_DISTANCE,
    STOLARSKY_CONSTANT,
};

use serde::{Deserialize, Serialize};

use crate::ensemble::{model_constants, DiamondModel, ModelConstants};
use crate::error::MetricsError;
use crate::geometry::PointSet;
use crate::partition::build_partition;

/// Which optional measures [`analyze`] computes and at what resolution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsOptions {
    pub riesz_exponents: Vec<f64>,
    /// Exact sup discrepancy is computed when `N <= exact_limit`.
    pub exact_limit: usize,
    pub estimate_samples: usize,
    pub seed: u64,
    /// Spiral directions for the covering estimate; defaults to `max(10N, 10^4)`.
    pub covering_directions: Option<usize>,
    pub quadrature: Option<QuadratureGrid>,
}

impl Default for MetricsOptions {
    fn default() -> Self {
        MetricsOptions {
            riesz_exponents: vec![1.0, 2.0],
            exact_limit: EXACT_LIMIT,
            estimate_samples: 10_000,
            seed: 0,
            covering_directions: None,
            quadrature: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RieszEntry {
    pub s: f64,
    pub energy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub n: usize,
    pub separation: f64,
    pub covering: CoveringRadius,
    pub mesh_ratio: f64,
    pub riesz: Vec<RieszEntry>,
    pub log_energy: f64,
    pub sum_distances: f64,
    pub d_sup_exact: Option<CapDiscrepancy>,
    pub d_sup_estimate: CapDiscrepancy,
    pub d_polar_max: Option<f64>,
    pub d_equatorial: Option<f64>,
    pub d_l2_stolarsky: f64,
    pub d_l2_quadrature: Option<f64>,
    pub constants: Option<ModelConstants>,
}

/// Computes every measure for `points`. With a model, the partition gives a
/// certified covering bound and the polar, equatorial and theorem constants
/// are included.
pub fn analyze(
    points: &PointSet,
    model: Option<&DiamondModel>,
    opts: &MetricsOptions,
) -> Result<MetricsReport, MetricsError> {
    let n = points.len();
    let sep = separation(points)?;
    let partition = model.map(build_partition);
    let directions = opts.covering_directions.unwrap_or((10 * n).max(10_000));
    let covering = covering_radius(points, partition.as_ref(), directions)?;
    let riesz = opts
        .riesz_exponents
        .iter()
        .map(|&s| {
            Ok(RieszEntry {
                s,
                energy: riesz_energy(points, s)?,
            })
        })
        .collect::<Result<Vec<_>, MetricsError>>()?;
    let d_sup_exact = if n <= opts.exact_limit {
        Some(sup_discrepancy_exact(points, opts.exact_limit)?)
    } else {
        None
    };
    let d_l2_quadrature = opts
        .quadrature
        .map(|g| l2_discrepancy_quadrature(points, g))
        .transpose()?;
    Ok(MetricsReport {
        n,
        separation: sep,
        mesh_ratio: mesh_ratio(&covering, sep),
        covering,
        riesz,
        log_energy: log_energy(points)?,
        sum_distances: sum_distances(points)?,
        d_sup_exact,
        d_sup_estimate: sup_discrepancy_estimate(points, opts.estimate_samples, opts.seed)?,
        d_polar_max: model.map(|m| polar_cap_profile(m).max),
        d_equatorial: model.map(|m| equatorial_discrepancy(m).value),
        d_l2_stolarsky: l2_discrepancy_stolarsky(points)?,
        d_l2_quadrature,
        constants: model.map(model_constants),
    })
}
