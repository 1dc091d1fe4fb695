//! The area-regular partition attached to a Diamond ensemble.
//!
//! Two polar caps of height `h_1 = 1 - 2/N` plus, for every parallel, a collar
//! cut into `r_j` longitude sectors. Collar boundaries follow
//! `h_{j+1} = h_j - 2 r_j / N` (so `h_j = 1 - 2 N_j / N`), the southern half
//! mirrors the northern one, and the equatorial collar spans `[-h_M, h_M]`.
//! Sector `i` of parallel `j` covers longitudes
//! `[2πi/r_j + π/r_j + θ_j, 2π(i+1)/r_j + π/r_j + θ_j)`, which centers point
//! `i + 1` (mod `r_j`) of that parallel inside it.
//!
//! Boundary ownership: longitudes are half-open `[lo, hi)`, heights are
//! half-open downward `(lo, hi]`, and both caps are closed at their pole.

use std::f64::consts::{PI, SQRT_2};

use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::ensemble::{model_constants, rational_to_f64, DiamondModel};
use crate::error::PartitionError;
use crate::geometry::{chord_distance, geodesic_distance, PointSet, Provenance, UnitVec};
use crate::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Hemisphere {
    North,
    South,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum RegionKind {
    NorthCap,
    SouthCap,
    /// Sector `i` of collar `j < M` in one hemisphere.
    Rectangle {
        j: usize,
        i: usize,
        hemisphere: Hemisphere,
    },
    /// Sector `i` of the collar containing the equator.
    Equatorial {
        i: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub id: usize,
    #[serde(flatten)]
    pub kind: RegionKind,
    /// Parallel whose points this region's collar holds (0 and `p + 1` for
    /// the caps).
    pub parallel: usize,
    pub phi_lo: f64,
    pub phi_hi: f64,
    pub h_lo: f64,
    pub h_hi: f64,
    #[serde(skip)]
    pub h_lo_exact: Rational,
    #[serde(skip)]
    pub h_hi_exact: Rational,
}

impl Region {
    pub fn is_cap(&self) -> bool {
        matches!(self.kind, RegionKind::NorthCap | RegionKind::SouthCap)
    }

    /// Exact area as a fraction of the sphere.
    pub fn area_fraction_exact(&self) -> Rational {
        let height = self.h_hi_exact - self.h_lo_exact;
        if self.is_cap() {
            height / 2
        } else {
            let sectors = (2.0 * PI / (self.phi_hi - self.phi_lo)).round() as i128;
            height / (2 * sectors)
        }
    }

    /// Corners of a rectangle (empty for caps), as unit vectors.
    pub fn corners(&self) -> Vec<UnitVec> {
        if self.is_cap() {
            return Vec::new();
        }
        let mut out = Vec::with_capacity(4);
        for h in [self.h_lo, self.h_hi] {
            for phi in [self.phi_lo, self.phi_hi] {
                out.push(UnitVec::from_height_longitude(h, phi));
            }
        }
        out
    }
}

/// Area of a region computed from its own bounds, in steradians. The height
/// difference is taken in exact arithmetic; subtracting the rounded heights
/// loses up to `N · ε` relative accuracy near the poles.
pub fn region_area(region: &Region) -> f64 {
    (region.phi_hi - region.phi_lo) * rational_to_f64(&(region.h_hi_exact - region.h_lo_exact))
}

#[derive(Debug, Clone)]
pub struct Partition {
    model: DiamondModel,
    h: Vec<Rational>,
    /// Collar boundaries top to bottom: `h_1 > … > h_M > -h_M > … > -h_1`.
    bands: Vec<f64>,
    regions: Vec<Region>,
    /// First region id of each parallel (1-based parallel index).
    offsets: Vec<usize>,
}

pub fn build_partition(model: &DiamondModel) -> Partition {
    let m = model.m();
    let p = model.num_parallels();
    let n = model.num_points() as i128;
    let h: Vec<Rational> = (1..=m)
        .map(|j| Rational::one() - Rational::new(2 * model.partial_count(j).unwrap() as i128, n))
        .collect();

    let exact_bands: Vec<Rational> = (0..2 * m)
        .map(|k| if k < m { h[k] } else { -h[2 * m - k - 1] })
        .collect();
    let bands: Vec<f64> = exact_bands.iter().map(rational_to_f64).collect();

    let mut regions = Vec::with_capacity(model.num_points() as usize);
    let mut offsets = vec![0; p + 2];
    let cap = |id, kind, parallel, lo: Rational, hi: Rational| Region {
        id,
        kind,
        parallel,
        phi_lo: 0.0,
        phi_hi: 2.0 * PI,
        h_lo: rational_to_f64(&lo),
        h_hi: rational_to_f64(&hi),
        h_lo_exact: lo,
        h_hi_exact: hi,
    };
    regions.push(cap(0, RegionKind::NorthCap, 0, h[0], Rational::one()));

    for q in 1..=p {
        offsets[q] = regions.len();
        let r = model.r()[q - 1] as usize;
        let theta = model.theta(q);
        let (hi, lo) = (exact_bands[q - 1], exact_bands[q]);
        for i in 0..r {
            let kind = if q < m {
                RegionKind::Rectangle {
                    j: q,
                    i,
                    hemisphere: Hemisphere::North,
                }
            } else if q == m {
                RegionKind::Equatorial { i }
            } else {
                RegionKind::Rectangle {
                    j: 2 * m - q,
                    i,
                    hemisphere: Hemisphere::South,
                }
            };
            let phi_lo = 2.0 * PI * i as f64 / r as f64 + PI / r as f64 + theta;
            let phi_hi = 2.0 * PI * (i + 1) as f64 / r as f64 + PI / r as f64 + theta;
            regions.push(Region {
                id: regions.len(),
                kind,
                parallel: q,
                phi_lo,
                phi_hi,
                h_lo: rational_to_f64(&lo),
                h_hi: rational_to_f64(&hi),
                h_lo_exact: lo,
                h_hi_exact: hi,
            });
        }
    }
    offsets[p + 1] = regions.len();
    let id = regions.len();
    regions.push(cap(
        id,
        RegionKind::SouthCap,
        p + 1,
        -Rational::one(),
        -h[0],
    ));

    Partition {
        model: model.clone(),
        h,
        bands,
        regions,
        offsets,
    }
}

/// Sides of the rectangles in collar `j` (`1 <= j <= M`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SideLengths {
    /// Parallel arc on the pole side, `2π sqrt(1 - h_j²) / r_j`.
    pub pole_side: f64,
    /// Parallel arc on the equator side (equal to `pole_side` for `j = M`).
    pub equator_side: f64,
    /// Meridian arc, the difference of colatitudes.
    pub vertical: f64,
    /// Largest corner-to-corner chord.
    pub diameter_chord: f64,
    /// Largest corner-to-corner great-circle distance.
    pub diameter_geodesic: f64,
}

impl Partition {
    pub fn model(&self) -> &DiamondModel {
        &self.model
    }

    pub fn regions(&self) -> &[Region] {
        &self.regions
    }

    pub fn len(&self) -> usize {
        self.regions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.regions.is_empty()
    }

    /// Exact collar heights `h_1, …, h_M`.
    pub fn heights(&self) -> &[Rational] {
        &self.h
    }

    pub fn h(&self, j: usize) -> Result<Rational, PartitionError> {
        self.check_collar(j)?;
        Ok(self.h[j - 1])
    }

    /// Geodesic radius of the polar caps, `arccos(h_1)`.
    pub fn cap_radius(&self) -> f64 {
        rational_to_f64(&self.h[0]).acos()
    }

    /// The region containing `point`.
    pub fn locate(&self, point: &UnitVec) -> usize {
        let z = point.z;
        // First boundary strictly below z; parallel q owns (b_q, b_{q-1}].
        let k = self.bands.partition_point(|&b| z <= b);
        if k == 0 {
            return 0;
        }
        let p = self.model.num_parallels();
        if k > p {
            return self.regions.len() - 1;
        }
        let q = k;
        let r = self.model.r()[q - 1] as usize;
        let rf = r as f64;
        let u = (point.longitude() - self.model.theta(q) - PI / rf) * rf / (2.0 * PI);
        let i = (u.floor() as i64).rem_euclid(r as i64) as usize;
        self.offsets[q] + i
    }

    /// The region expected to hold an ensemble point, from its provenance.
    pub fn region_for(&self, tag: &Provenance) -> Option<usize> {
        match *tag {
            Provenance::NorthPole => Some(0),
            Provenance::SouthPole => Some(self.regions.len() - 1),
            Provenance::Parallel { j, i } => {
                let r = *self.model.r().get(j.checked_sub(1)?)? as usize;
                Some(self.offsets[j] + (i + r - 1) % r)
            }
            Provenance::Free => None,
        }
    }

    pub fn side_lengths(&self, j: usize) -> Result<SideLengths, PartitionError> {
        self.check_collar(j)?;
        let m = self.model.m();
        let r = self.model.r()[j - 1] as f64;
        let top = rational_to_f64(&self.h[j - 1]);
        let bottom = if j < m {
            rational_to_f64(&self.h[j])
        } else {
            -top
        };
        let arc = |h: f64| 2.0 * PI * (1.0 - h * h).sqrt() / r;
        let region = &self.regions[self.offsets[j]];
        let corners = region.corners();
        let mut chord: f64 = 0.0;
        let mut geo: f64 = 0.0;
        for (a, ca) in corners.iter().enumerate() {
            for cb in &corners[a + 1..] {
                chord = chord.max(chord_distance(ca, cb));
                geo = geo.max(geodesic_distance(ca, cb));
            }
        }
        Ok(SideLengths {
            pole_side: arc(top),
            equator_side: arc(bottom),
            vertical: bottom.acos() - top.acos(),
            diameter_chord: chord,
            diameter_geodesic: geo,
        })
    }

    /// Largest chord from `matched` to any point of `region`.
    ///
    /// For a cap the farthest point lies on the rim opposite `matched`. For a
    /// sector it lies on the longitude edge farthest from `matched`, at a
    /// corner or at the colatitude where `<y, matched>` along that edge is
    /// minimal.
    pub fn farthest_distance(&self, region: &Region, matched: &UnitVec) -> f64 {
        if region.is_cap() {
            // Reflect the south cap onto the north one.
            let (h, xz) = match region.kind {
                RegionKind::NorthCap => (region.h_lo, matched.z),
                _ => (-region.h_hi, -matched.z),
            };
            let worst = if -xz >= h {
                -1.0
            } else {
                h * xz - (1.0 - h * h).max(0.0).sqrt() * (1.0 - xz * xz).max(0.0).sqrt()
            };
            return (2.0 - 2.0 * worst).max(0.0).sqrt();
        }
        let phi = matched.longitude();
        let wrap = |d: f64| {
            let d = d.rem_euclid(2.0 * PI);
            d.min(2.0 * PI - d)
        };
        let half = wrap(phi - region.phi_lo).max(wrap(region.phi_hi - phi));
        let b = matched.z.clamp(-1.0, 1.0).acos();
        let (a_lo, a_hi) = (
            region.h_hi.clamp(-1.0, 1.0).acos(),
            region.h_lo.clamp(-1.0, 1.0).acos(),
        );
        let f = |a: f64| a.cos() * b.cos() + a.sin() * b.sin() * half.cos();
        let mut worst = f(a_lo).min(f(a_hi));
        let a0 = (b.sin() * half.cos()).atan2(b.cos());
        for cand in [a0 + PI, a0 - PI] {
            if cand > a_lo && cand < a_hi {
                worst = worst.min(f(cand));
            }
        }
        (2.0 - 2.0 * worst).max(0.0).sqrt()
    }

    fn check_collar(&self, j: usize) -> Result<(), PartitionError> {
        let m = self.model.m();
        if j == 0 || j > m {
            Err(PartitionError::IndexOutOfRange { j, max: m })
        } else {
            Ok(())
        }
    }
}

/// Check of the scaled pole-side horizontal sides against the applicable
/// interval: `(π/√2, π√2)` (strict) for the simple model, `[d1, d2]` from
/// the model constants otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SideBoundCheck {
    pub lower: f64,
    pub upper: f64,
    pub strict: bool,
    pub observed_min: f64,
    pub observed_max: f64,
    pub holds: bool,
}

pub fn check_side_bounds(partition: &Partition) -> SideBoundCheck {
    let g = scaled_geometry(partition);
    let model = partition.model();
    let (lower, upper, strict) = if model.spec().is_simple() {
        (PI / SQRT_2, PI * SQRT_2, true)
    } else {
        let k = model_constants(model);
        (k.d1, k.d2, false)
    };
    let holds = if strict {
        lower < g.pole_side_min && g.pole_side_max < upper
    } else {
        lower <= g.pole_side_min && g.pole_side_max <= upper
    };
    SideBoundCheck {
        lower,
        upper,
        strict,
        observed_min: g.pole_side_min,
        observed_max: g.pole_side_max,
        holds,
    }
}

/// Point-to-region bijection certified by [`verify_matching`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matching {
    pub region_of_point: Vec<usize>,
    pub point_of_region: Vec<usize>,
}

/// Certifies `h_{j+1} < z_j < h_j` (`j < M`), `-h_M < z_M < h_M` and
/// `h_M > 0` in exact arithmetic, then checks that [`Partition::locate`]
/// sends the ensemble points bijectively onto the regions.
pub fn verify_matching(
    partition: &Partition,
    points: &PointSet,
) -> Result<Matching, PartitionError> {
    let model = &partition.model;
    let n = partition.regions.len();
    if points.len() != n {
        return Err(PartitionError::SizeMismatch {
            expected: n,
            got: points.len(),
        });
    }
    let m = model.m();
    let h = &partition.h;
    if h[0] >= Rational::one() {
        return Err(PartitionError::Interleaving {
            j: 0,
            detail: format!("h_1 = {} is not below the pole", h[0]),
        });
    }
    for j in 1..=m {
        let z = model.height_z(j).expect("j <= p");
        let upper = h[j - 1];
        let lower = if j < m { h[j] } else { -h[m - 1] };
        if j == m && h[m - 1] <= Rational::from_integer(0) {
            return Err(PartitionError::Interleaving {
                j,
                detail: format!("h_M = {} is not positive", h[m - 1]),
            });
        }
        if !(lower < z && z < upper) {
            return Err(PartitionError::Interleaving {
                j,
                detail: format!("z_j = {z} not in ({lower}, {upper})"),
            });
        }
    }

    let mut region_of_point = Vec::with_capacity(n);
    let mut hits = vec![Vec::new(); n];
    for (idx, (p, tag)) in points.iter().enumerate() {
        let found = partition.locate(p);
        let expected = partition
            .region_for(tag)
            .ok_or(PartitionError::MissingProvenance(idx))?;
        if found != expected {
            return Err(PartitionError::Misplaced {
                point: idx,
                found,
                expected,
            });
        }
        region_of_point.push(found);
        hits[found].push(idx);
    }
    let mut point_of_region = Vec::with_capacity(n);
    for (region, pts) in hits.iter().enumerate() {
        if pts.len() != 1 {
            return Err(PartitionError::NotBijective {
                region,
                count: pts.len(),
            });
        }
        point_of_region.push(pts[0]);
    }
    Ok(Matching {
        region_of_point,
        point_of_region,
    })
}

/// `sqrt(N)`-scaled extremes of the region geometry over all collars.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScaledGeometry {
    pub pole_side_min: f64,
    pub pole_side_max: f64,
    pub equator_side_min: f64,
    pub equator_side_max: f64,
    pub vertical_min: f64,
    pub vertical_max: f64,
    pub diameter_max: f64,
}

pub fn scaled_geometry(partition: &Partition) -> ScaledGeometry {
    let sqrt_n = (partition.len() as f64).sqrt();
    let mut g = ScaledGeometry {
        pole_side_min: f64::INFINITY,
        pole_side_max: 0.0,
        equator_side_min: f64::INFINITY,
        equator_side_max: 0.0,
        vertical_min: f64::INFINITY,
        vertical_max: 0.0,
        diameter_max: 4.0 * (1.0 / sqrt_n).asin() * sqrt_n,
    };
    for j in 1..=partition.model.m() {
        let s = partition.side_lengths(j).expect("collar in range");
        g.pole_side_min = g.pole_side_min.min(s.pole_side * sqrt_n);
        g.pole_side_max = g.pole_side_max.max(s.pole_side * sqrt_n);
        g.equator_side_min = g.equator_side_min.min(s.equator_side * sqrt_n);
        g.equator_side_max = g.equator_side_max.max(s.equator_side * sqrt_n);
        g.vertical_min = g.vertical_min.min(s.vertical * sqrt_n);
        g.vertical_max = g.vertical_max.max(s.vertical * sqrt_n);
        g.diameter_max = g.diameter_max.max(s.diameter_geodesic * sqrt_n);
    }
    g
}
