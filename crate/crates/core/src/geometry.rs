//! Spherical primitives shared by the rest of the crate: unit vectors, caps,
//! chord distances, cap membership counting and the two boundary-defined cap
//! constructions used by the exact discrepancy search.
//!
//! Heights (`t`, `z`, `h`) are always cosines of the colatitude, angles are in
//! radians.

use std::f64::consts::PI;
use std::ops::{Add, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::GeometryError;

/// Half-width of the band in which a point counts as lying on a cap boundary.
///
/// The ensemble puts many points exactly on tested circles (its parallels), so
/// ties are the normal case and are resolved inside this band.
pub const BOUNDARY_TOL: f64 = 1e-10;

/// Norm below which a cross product is treated as zero.
pub const DEGENERATE_TOL: f64 = 1e-12;

/// A point on the unit sphere S².
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitVec {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl UnitVec {
    pub const NORTH: UnitVec = UnitVec {
        x: 0.0,
        y: 0.0,
        z: 1.0,
    };
    pub const SOUTH: UnitVec = UnitVec {
        x: 0.0,
        y: 0.0,
        z: -1.0,
    };

    /// Normalizes `(x, y, z)` onto the sphere.
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self, GeometryError> {
        let norm = (x * x + y * y + z * z).sqrt();
        if !norm.is_finite() || norm < DEGENERATE_TOL {
            return Err(GeometryError::ZeroVector);
        }
        Ok(UnitVec {
            x: x / norm,
            y: y / norm,
            z: z / norm,
        })
    }

    /// Point at height `z` and longitude `phi`.
    pub fn from_height_longitude(z: f64, phi: f64) -> Self {
        let z = z.clamp(-1.0, 1.0);
        let rho = (1.0 - z * z).sqrt();
        UnitVec {
            x: rho * phi.cos(),
            y: rho * phi.sin(),
            z,
        }
    }

    pub fn dot(&self, other: &UnitVec) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    /// Longitude in `[0, 2π)`.
    pub fn longitude(&self) -> f64 {
        let phi = self.y.atan2(self.x);
        if phi < 0.0 {
            phi + 2.0 * PI
        } else {
            phi
        }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub(crate) fn raw(self) -> Vec3 {
        Vec3(self.x, self.y, self.z)
    }
}

impl Neg for UnitVec {
    type Output = UnitVec;
    fn neg(self) -> UnitVec {
        UnitVec {
            x: -self.x,
            y: -self.y,
            z: -self.z,
        }
    }
}

/// Unnormalized helper vector for the cap constructions.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Vec3(pub f64, pub f64, pub f64);

impl Vec3 {
    pub fn cross(self, o: Vec3) -> Vec3 {
        Vec3(
            self.1 * o.2 - self.2 * o.1,
            self.2 * o.0 - self.0 * o.2,
            self.0 * o.1 - self.1 * o.0,
        )
    }

    pub fn norm(self) -> f64 {
        (self.0 * self.0 + self.1 * self.1 + self.2 * self.2).sqrt()
    }

    pub fn unit(self) -> Option<UnitVec> {
        let n = self.norm();
        if n < DEGENERATE_TOL {
            None
        } else {
            Some(UnitVec {
                x: self.0 / n,
                y: self.1 / n,
                z: self.2 / n,
            })
        }
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3(self.0 + o.0, self.1 + o.1, self.2 + o.2)
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3(self.0 - o.0, self.1 - o.1, self.2 - o.2)
    }
}

/// The closed cap `{x : <x, center> >= t}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SphericalCap {
    center: UnitVec,
    t: f64,
}

impl SphericalCap {
    pub fn new(center: UnitVec, t: f64) -> Result<Self, GeometryError> {
        if !(-1.0..=1.0).contains(&t) {
            return Err(GeometryError::HeightOutOfRange(t));
        }
        Ok(SphericalCap { center, t })
    }

    /// Builds a cap, clamping `t` into `[-1, 1]` (for heights produced by dot
    /// products that can overshoot by an ulp).
    pub fn clamped(center: UnitVec, t: f64) -> Self {
        SphericalCap {
            center,
            t: t.clamp(-1.0, 1.0),
        }
    }

    pub fn center(&self) -> UnitVec {
        self.center
    }

    pub fn height(&self) -> f64 {
        self.t
    }

    /// The complementary cap's closure: center `-c`, height `-t`.
    pub fn complement(&self) -> SphericalCap {
        SphericalCap {
            center: -self.center,
            t: -self.t,
        }
    }

    /// Area in steradians, `2π(1 - t)`.
    pub fn area(&self) -> f64 {
        cap_area(self)
    }

    /// Area as a fraction of the sphere, `(1 - t) / 2`.
    pub fn area_fraction(&self) -> f64 {
        (1.0 - self.t) / 2.0
    }

    pub fn contains(&self, p: &UnitVec, mode: Boundary) -> bool {
        let s = p.dot(&self.center);
        match mode {
            Boundary::Closed => s >= self.t - BOUNDARY_TOL,
            Boundary::Open => s > self.t + BOUNDARY_TOL,
        }
    }

    /// Whether `p` lies in the boundary band of this cap.
    pub fn on_boundary(&self, p: &UnitVec) -> bool {
        (p.dot(&self.center) - self.t).abs() <= BOUNDARY_TOL
    }
}

/// Whether the boundary band counts as inside (closed) or outside (open).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Closed,
    Open,
}

pub fn cap_area(cap: &SphericalCap) -> f64 {
    2.0 * PI * (1.0 - cap.t)
}

pub fn chord_distance(a: &UnitVec, b: &UnitVec) -> f64 {
    let (dx, dy, dz) = (a.x - b.x, a.y - b.y, a.z - b.z);
    (dx * dx + dy * dy + dz * dz).sqrt()
}

/// Great-circle distance.
pub fn geodesic_distance(a: &UnitVec, b: &UnitVec) -> f64 {
    2.0 * (chord_distance(a, b) / 2.0).min(1.0).asin()
}

/// Where a point came from: a pole or point `i` of parallel `j` (1-based `j`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    NorthPole,
    SouthPole,
    Parallel { j: usize, i: usize },
    Free,
}

/// A finite configuration of points on the sphere.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    points: Vec<UnitVec>,
    tags: Vec<Provenance>,
}

impl PointSet {
    /// Wraps untagged points.
    pub fn new(points: Vec<UnitVec>) -> Self {
        let tags = vec![Provenance::Free; points.len()];
        PointSet { points, tags }
    }

    pub fn with_provenance(points: Vec<UnitVec>, tags: Vec<Provenance>) -> Self {
        assert_eq!(points.len(), tags.len(), "one provenance tag per point");
        PointSet { points, tags }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[UnitVec] {
        &self.points
    }

    pub fn provenance(&self) -> &[Provenance] {
        &self.tags
    }

    pub fn iter(&self) -> impl Iterator<Item = (&UnitVec, &Provenance)> {
        self.points.iter().zip(self.tags.iter())
    }

    /// Applies `f` to every point, keeping the provenance tags.
    pub fn map_points(&self, f: impl Fn(&UnitVec) -> UnitVec) -> PointSet {
        PointSet {
            points: self.points.iter().map(f).collect(),
            tags: self.tags.clone(),
        }
    }
}

pub fn count_in_cap(points: &PointSet, cap: &SphericalCap, mode: Boundary) -> usize {
    points
        .points()
        .iter()
        .filter(|p| cap.contains(p, mode))
        .count()
}

/// The cap whose boundary circle passes through `a`, `b` and `c`.
///
/// The center is the normalized normal of the plane through the three
/// points; the antipodal center gives the complementary cap.
pub fn circumcap(a: &UnitVec, b: &UnitVec, c: &UnitVec) -> Result<SphericalCap, GeometryError> {
    let (a, b, c) = (a.raw(), b.raw(), c.raw());
    let normal = (b - a).cross(c - a);
    let center = normal.unit().ok_or(GeometryError::Degenerate)?;
    let t = center.x * a.0 + center.y * a.1 + center.z * a.2;
    Ok(SphericalCap::clamped(center, t))
}

/// The cap whose boundary has `a` and `b` as diametrically opposite points.
pub fn pair_diametral_cap(a: &UnitVec, b: &UnitVec) -> Result<SphericalCap, GeometryError> {
    if chord_distance(a, b) < DEGENERATE_TOL {
        return Err(GeometryError::Degenerate);
    }
    let center = (a.raw() + b.raw()).unit().ok_or(GeometryError::Antipodal)?;
    Ok(SphericalCap::clamped(center, center.dot(a)))
}

/// `k` points of the spherical Fibonacci spiral: a deterministic, nearly
/// equal-area node set.
pub fn fibonacci_sphere(k: usize) -> Vec<UnitVec> {
    let golden_angle = PI * (3.0 - 5.0f64.sqrt());
    (0..k)
        .map(|i| {
            let z = 1.0 - (2.0 * i as f64 + 1.0) / k as f64;
            UnitVec::from_height_longitude(z, golden_angle * i as f64)
        })
        .collect()
}
