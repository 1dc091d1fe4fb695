//! Pairwise-distance quantities: separation, covering radius, energies.
//!
//! The O(N²) kernels are row-parallel. Every row is summed sequentially and
//! the row totals are combined with a compensated sum in index order, so the
//! result does not depend on the number of worker threads.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{MetricsError, PartitionError};
use crate::geometry::{chord_distance, fibonacci_sphere, PointSet, UnitVec};
use crate::partition::{verify_matching, Partition};
use crate::sum::{compensated_sum, Compensated};

/// Uniform cubic bucketing of points in `[-1, 1]³` for exact nearest
/// neighbour queries.
pub struct SpatialGrid<'a> {
    points: &'a [UnitVec],
    cell: f64,
    buckets: HashMap<(i32, i32, i32), Vec<usize>>,
    max_ring: i32,
}

impl<'a> SpatialGrid<'a> {
    pub fn new(points: &'a [UnitVec]) -> Self {
        // About one point per occupied cell.
        let cell = (4.0 / points.len().max(1) as f64).sqrt().clamp(1e-4, 2.0);
        let mut buckets: HashMap<(i32, i32, i32), Vec<usize>> = HashMap::new();
        for (i, p) in points.iter().enumerate() {
            buckets.entry(Self::key(cell, p)).or_default().push(i);
        }
        let max_ring = (2.0 / cell).ceil() as i32 + 1;
        SpatialGrid {
            points,
            cell,
            buckets,
            max_ring,
        }
    }

    fn key(cell: f64, p: &UnitVec) -> (i32, i32, i32) {
        (
            ((p.x + 1.0) / cell).floor() as i32,
            ((p.y + 1.0) / cell).floor() as i32,
            ((p.z + 1.0) / cell).floor() as i32,
        )
    }

    /// Nearest point to `q` other than index `skip`: `(index, distance)`.
    pub fn nearest(&self, q: &UnitVec, skip: Option<usize>) -> Option<(usize, f64)> {
        self.k_nearest(q, 1, skip).first().copied()
    }

    /// The `k` nearest points to `q` (excluding `skip`), ordered by distance
    /// then index.
    pub fn k_nearest(&self, q: &UnitVec, k: usize, skip: Option<usize>) -> Vec<(usize, f64)> {
        let (cx, cy, cz) = Self::key(self.cell, q);
        let mut best: Vec<(usize, f64)> = Vec::with_capacity(k + 1);
        let closer = |a: &(usize, f64), b: &(usize, f64)| a.1 < b.1 || (a.1 == b.1 && a.0 < b.0);
        for ring in 0..=self.max_ring {
            for dx in -ring..=ring {
                for dy in -ring..=ring {
                    let edge = dx.abs() == ring || dy.abs() == ring;
                    let step = if edge { 1 } else { (2 * ring).max(1) as usize };
                    for dz in (-ring..=ring).step_by(step) {
                        let Some(bucket) = self.buckets.get(&(cx + dx, cy + dy, cz + dz)) else {
                            continue;
                        };
                        for &j in bucket {
                            if Some(j) == skip {
                                continue;
                            }
                            let cand = (j, chord_distance(q, &self.points[j]));
                            if best.len() == k && !closer(&cand, &best[k - 1]) {
                                continue;
                            }
                            let at = best.partition_point(|b| closer(b, &cand));
                            best.insert(at, cand);
                            best.truncate(k);
                        }
                    }
                }
            }
            // Cells outside ring `ring` are farther than ring * cell.
            if best.len() == k && best[k - 1].1 <= ring as f64 * self.cell {
                break;
            }
        }
        best
    }
}

fn check_len(points: &PointSet, needed: usize) -> Result<(), MetricsError> {
    if points.len() < needed {
        Err(MetricsError::TooFewPoints {
            needed,
            got: points.len(),
        })
    } else {
        Ok(())
    }
}

/// Minimum pairwise chord distance by checking all pairs.
pub fn separation_brute(points: &PointSet) -> Result<f64, MetricsError> {
    check_len(points, 2)?;
    let pts = points.points();
    let mut best = (f64::INFINITY, 0, 0);
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            let d = chord_distance(&pts[i], &pts[j]);
            if d < best.0 {
                best = (d, i, j);
            }
        }
    }
    if best.0 == 0.0 {
        return Err(MetricsError::DuplicatePoints(best.1, best.2));
    }
    Ok(best.0)
}

/// Minimum pairwise chord distance, via nearest-neighbour queries on a
/// [`SpatialGrid`]. Agrees bit-for-bit with [`separation_brute`].
pub fn separation(points: &PointSet) -> Result<f64, MetricsError> {
    check_len(points, 2)?;
    let pts = points.points();
    let grid = SpatialGrid::new(pts);
    let (d, i, j) = (0..pts.len())
        .into_par_iter()
        .map(|i| {
            let (j, d) = grid.nearest(&pts[i], Some(i)).expect("at least two points");
            (d, i, j)
        })
        .reduce(
            || (f64::INFINITY, usize::MAX, usize::MAX),
            |a, b| {
                if b.0 < a.0 || (b.0 == a.0 && b.1 < a.1) {
                    b
                } else {
                    a
                }
            },
        );
    if d == 0.0 {
        return Err(MetricsError::DuplicatePoints(i.min(j), i.max(j)));
    }
    Ok(d)
}

/// Covering radius bracket: `estimate <= rho <= upper_bound`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoveringRadius {
    /// Largest nearest-point distance over a spiral grid of test directions.
    pub estimate: f64,
    /// Certified bound from the equal-area partition, when one applies;
    /// otherwise the trivial bound 2.
    pub upper_bound: f64,
    pub certified: bool,
}

/// Lower estimate of the covering radius from `k` spiral test directions.
/// Each direction is also refined to the point equidistant from its three
/// nearest set points, where the distance function peaks.
pub fn covering_estimate(points: &PointSet, k: usize) -> Result<f64, MetricsError> {
    check_len(points, 1)?;
    let needed = 10 * points.len();
    if k < needed {
        return Err(MetricsError::GridTooSmall { needed, got: k });
    }
    let pts = points.points();
    let grid = SpatialGrid::new(pts);
    let dirs = fibonacci_sphere(k);
    let worst = dirs
        .par_iter()
        .map(|q| {
            let near = grid.k_nearest(q, 3, None);
            let mut worst = near[0].1;
            if let [(a, _), (b, _), (c, _)] = near[..] {
                let (a, b, c) = (pts[a].raw(), pts[b].raw(), pts[c].raw());
                if let Some(v) = (b - a).cross(c - a).unit() {
                    let v = if v.dot(q) < 0.0 { -v } else { v };
                    worst = worst.max(grid.nearest(&v, None).map_or(0.0, |(_, d)| d));
                }
            }
            worst
        })
        .reduce(|| 0.0, f64::max);
    Ok(worst)
}

/// Certified covering bound: every point of a region is within the
/// region's farthest-point distance of the point matched to it.
pub fn covering_upper_bound(
    partition: &Partition,
    points: &PointSet,
) -> Result<f64, PartitionError> {
    let matching = verify_matching(partition, points)?;
    let pts = points.points();
    Ok(partition
        .regions()
        .iter()
        .zip(&matching.point_of_region)
        .map(|(region, &pi)| partition.farthest_distance(region, &pts[pi]))
        .fold(0.0, f64::max))
}

pub fn covering_radius(
    points: &PointSet,
    partition: Option<&Partition>,
    k: usize,
) -> Result<CoveringRadius, MetricsError> {
    let estimate = covering_estimate(points, k)?;
    let certified = partition.and_then(|p| covering_upper_bound(p, points).ok());
    Ok(CoveringRadius {
        estimate,
        upper_bound: certified.unwrap_or(2.0),
        certified: certified.is_some(),
    })
}

/// `rho / delta`, using the covering upper bound (conservative).
pub fn mesh_ratio(covering: &CoveringRadius, separation: f64) -> f64 {
    covering.upper_bound / separation
}

/// `sum_{i != j} f(|x_i - x_j|)`, evaluated over `i < j` and doubled.
fn pair_sum(points: &PointSet, f: impl Fn(f64) -> f64 + Sync) -> Result<f64, MetricsError> {
    let pts = points.points();
    let rows: Vec<Result<f64, MetricsError>> = (0..pts.len())
        .into_par_iter()
        .map(|i| {
            let mut acc = Compensated::default();
            for j in i + 1..pts.len() {
                let d = chord_distance(&pts[i], &pts[j]);
                if d == 0.0 {
                    return Err(MetricsError::DuplicatePoints(i, j));
                }
                acc.add(f(d));
            }
            Ok(acc.value())
        })
        .collect();
    let rows: Vec<f64> = rows.into_iter().collect::<Result<_, _>>()?;
    Ok(2.0 * compensated_sum(rows))
}

/// Riesz `s`-energy `sum_{i != j} |x_i - x_j|^{-s}`.
pub fn riesz_energy(points: &PointSet, s: f64) -> Result<f64, MetricsError> {
    if s.is_nan() || s <= 0.0 {
        return Err(MetricsError::InvalidExponent(s));
    }
    pair_sum(points, |d| d.powf(-s))
}

/// Logarithmic energy `sum_{i != j} log(1 / |x_i - x_j|)`.
pub fn log_energy(points: &PointSet) -> Result<f64, MetricsError> {
    pair_sum(points, |d| -d.ln())
}

/// `sum_{i != j} |x_i - x_j|` (both orderings).
pub fn sum_distances(points: &PointSet) -> Result<f64, MetricsError> {
    pair_sum(points, |d| d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::{generate, simple_model, validate};
    use crate::partition::build_partition;
    use std::f64::consts::SQRT_2;

    fn ensemble(m: u32) -> (PointSet, Partition) {
        let model = validate(&simple_model(m)).unwrap();
        (generate(&model), build_partition(&model))
    }

    #[test]
    fn octahedron_distances() {
        let (pts, part) = ensemble(1);
        assert!((separation_brute(&pts).unwrap() - SQRT_2).abs() < 1e-15);
        assert_eq!(separation(&pts).unwrap(), separation_brute(&pts).unwrap());
        assert!((log_energy(&pts).unwrap() + 18.0 * 2f64.ln()).abs() < 1e-12);
        assert!((sum_distances(&pts).unwrap() - (24.0 * SQRT_2 + 12.0)).abs() < 1e-12);

        let rho = (2.0 - 2.0 / 3f64.sqrt()).sqrt();
        let cov = covering_radius(&pts, Some(&part), 20_000).unwrap();
        assert!(cov.certified);
        assert!(
            cov.estimate <= rho + 1e-12 && cov.estimate > rho - 1e-3,
            "{cov:?}"
        );
        assert!(cov.upper_bound >= rho);
        let gamma = mesh_ratio(&cov, SQRT_2);
        assert!(gamma >= rho / SQRT_2 - 1e-12);
    }

    #[test]
    fn small_sets() {
        let pair = PointSet::new(vec![UnitVec::NORTH, UnitVec::SOUTH]);
        assert_eq!(separation(&pair).unwrap(), 2.0);
        assert!((riesz_energy(&pair, 1.0).unwrap() - 1.0).abs() < 1e-15);
        let cov = covering_estimate(&pair, 1000).unwrap();
        assert!(cov <= SQRT_2 + 1e-12 && cov > SQRT_2 - 1e-3);

        let single = PointSet::new(vec![UnitVec::NORTH]);
        assert!((covering_estimate(&single, 10_000).unwrap() - 2.0).abs() < 1e-3);
        assert!(matches!(
            separation(&single),
            Err(MetricsError::TooFewPoints { .. })
        ));
        assert!(matches!(
            covering_estimate(&single, 5),
            Err(MetricsError::GridTooSmall { .. })
        ));
    }

    #[test]
    fn duplicates_are_rejected() {
        let dup = PointSet::new(vec![UnitVec::NORTH, UnitVec::SOUTH, UnitVec::NORTH]);
        assert_eq!(
            separation_brute(&dup),
            Err(MetricsError::DuplicatePoints(0, 2))
        );
        assert_eq!(separation(&dup), Err(MetricsError::DuplicatePoints(0, 2)));
        assert_eq!(log_energy(&dup), Err(MetricsError::DuplicatePoints(0, 2)));
        assert!(riesz_energy(&dup, 0.0).is_err());
    }

    #[test]
    fn accelerated_separation_matches_brute_force() {
        for m in [2, 3, 9, 17] {
            let (pts, _) = ensemble(m);
            assert_eq!(separation(&pts).unwrap(), separation_brute(&pts).unwrap());
        }
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let pts: Vec<UnitVec> = (0..500)
            .map(|_| {
                UnitVec::from_height_longitude(rng.gen_range(-1.0..1.0), rng.gen_range(0.0..6.3))
            })
            .collect();
        let set = PointSet::new(pts);
        assert_eq!(separation(&set).unwrap(), separation_brute(&set).unwrap());
    }

    #[test]
    fn covering_bracket_on_ensembles() {
        for m in [2, 5, 12] {
            let (pts, part) = ensemble(m);
            let cov = covering_radius(&pts, Some(&part), 10 * pts.len() + 5000).unwrap();
            assert!(cov.certified);
            assert!(cov.estimate <= cov.upper_bound);
        }
    }

    #[test]
    fn worker_count_does_not_change_sums() {
        let (pts, _) = ensemble(8);
        let run = |threads| {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap();
            pool.install(|| {
                (
                    riesz_energy(&pts, 1.0).unwrap(),
                    log_energy(&pts).unwrap(),
                    sum_distances(&pts).unwrap(),
                    separation(&pts).unwrap(),
                )
            })
        };
        let one = run(1);
        let four = run(4);
        assert_eq!(one.0.to_bits(), four.0.to_bits());
        assert_eq!(one.1.to_bits(), four.1.to_bits());
        assert_eq!(one.2.to_bits(), four.2.to_bits());
        assert_eq!(one.3.to_bits(), four.3.to_bits());
    }
}
