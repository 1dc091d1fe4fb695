//! Spherical cap discrepancy: polar and equatorial caps of the ensemble,
//! exhaustive search over a finite candidate family, and random sampling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ensemble::{generate, rational_to_f64, DiamondModel};
use crate::error::MetricsError;
use crate::geometry::{
    count_in_cap, Boundary, PointSet, SphericalCap, UnitVec, BOUNDARY_TOL, DEGENERATE_TOL,
};
use crate::Rational;

/// Default point-count limit for [`sup_discrepancy_exact`].
pub const EXACT_LIMIT: usize = 150;

/// Cap on which a discrepancy value is attained. `boundary` is `Closed` when
/// the cap holds too many points and `Open` when it holds too few.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub center: [f64; 3],
    pub t: f64,
    pub boundary: Boundary,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapDiscrepancy {
    pub value: f64,
    pub witness: Witness,
}

/// One polar cap `{z >= z_j}` through parallel `j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolarEntry {
    pub j: usize,
    /// `|N_{j+1}/N - (1 - z_j)/2|` in exact arithmetic.
    #[serde(with = "rational_string")]
    pub exact: Rational,
    /// Same quantity from counting the generated points (closed cap).
    pub counted: f64,
    /// Closed form, available for the simple model only.
    pub closed_form: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolarProfile {
    pub entries: Vec<PolarEntry>,
    #[serde(with = "rational_string")]
    pub max_exact: Rational,
    pub max: f64,
    pub argmax: usize,
    pub max_counted: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquatorialDiscrepancy {
    /// `r_M / (2N)`.
    #[serde(with = "rational_string")]
    pub exact: Rational,
    pub value: f64,
    /// Closed upper hemisphere counted directly.
    pub counted: f64,
}

mod rational_string {
    use crate::Rational;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(q: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&q.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let text = String::deserialize(d)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

fn abs(q: Rational) -> Rational {
    if q < Rational::from_integer(0) {
        -q
    } else {
        q
    }
}

/// Simple-model value `(N - 2 - 4j^2 + 4(N-1)j) / (2N(N-1))` for `j <= M`,
/// mirrored as `r_{j'}/N - D_{j'}` for southern parallels `j' = 2M - j`.
fn simple_closed_form(m: usize, j: usize) -> f64 {
    let n = (4 * m * m + 2) as f64;
    let north = |j: usize| {
        let j = j as f64;
        (n - 2.0 - 4.0 * j * j + 4.0 * (n - 1.0) * j) / (2.0 * n * (n - 1.0))
    };
    if j <= m {
        north(j)
    } else {
        let jm = 2 * m - j;
        4.0 * jm as f64 / n - north(jm)
    }
}

/// Discrepancy of the closed caps centred at the north pole whose boundary is
/// a parallel of the ensemble.
pub fn polar_cap_profile(model: &DiamondModel) -> PolarProfile {
    let points = &generate(model);
    let n = model.num_points();
    let nq = Rational::from_integer(n as i128);
    let half = Rational::new(1, 2);
    let one = Rational::from_integer(1);
    let simple = model.spec().is_simple();
    let entries: Vec<PolarEntry> = (1..=model.num_parallels())
        .map(|j| {
            let z = model.height_z(j).expect("parallel in range");
            let inside = model.partial_count(j + 1).expect("parallel in range");
            let exact = abs(Rational::from_integer(inside as i128) / nq - (one - z) * half);
            let cap = SphericalCap::clamped(UnitVec::NORTH, model.z_f64(j));
            let count = count_in_cap(points, &cap, Boundary::Closed);
            let counted = (count as f64 / n as f64 - cap.area_fraction()).abs();
            let closed_form = simple.then(|| simple_closed_form(model.m(), j));
            PolarEntry {
                j,
                exact,
                counted,
                closed_form,
            }
        })
        .collect();
    let mut best = 0;
    for (k, e) in entries.iter().enumerate() {
        if e.exact > entries[best].exact {
            best = k;
        }
    }
    let max_exact = entries[best].exact;
    PolarProfile {
        max: rational_to_f64(&max_exact),
        argmax: entries[best].j,
        max_counted: entries.iter().map(|e| e.counted).fold(0.0, f64::max),
        max_exact,
        entries,
    }
}

/// Discrepancy of the closed upper hemisphere, which contains the equator.
pub fn equatorial_discrepancy(model: &DiamondModel) -> EquatorialDiscrepancy {
    let points = &generate(model);
    let n = model.num_points();
    let r_eq = model.r_at(model.m()).expect("equator exists");
    let exact = Rational::new(r_eq as i128, 2 * n as i128);
    let cap = SphericalCap::clamped(UnitVec::NORTH, 0.0);
    let count = count_in_cap(points, &cap, Boundary::Closed);
    EquatorialDiscrepancy {
        value: rational_to_f64(&exact),
        counted: (count as f64 / n as f64 - 0.5).abs(),
        exact,
    }
}

/// Best deviation over every cap centred at `c`, sweeping the break heights
/// `t = <c, x_i>` with closed counts (excess) and open counts (deficit).
/// The deficit at `c` equals the excess at `-c`, so both orientations are
/// covered. `buf` is scratch space.
fn sweep(points: &[UnitVec], c: &UnitVec, buf: &mut Vec<f64>) -> CapDiscrepancy {
    buf.clear();
    buf.extend(points.iter().map(|p| p.dot(c)));
    buf.sort_unstable_by(|a, b| b.total_cmp(a));
    let n = points.len() as f64;
    let mut best = CapDiscrepancy {
        value: f64::NEG_INFINITY,
        witness: Witness {
            center: c.as_array(),
            t: 1.0,
            boundary: Boundary::Closed,
        },
    };
    let mut consider = |value: f64, t: f64, boundary| {
        if value > best.value {
            best = CapDiscrepancy {
                value,
                witness: Witness {
                    center: c.as_array(),
                    t,
                    boundary,
                },
            };
        }
    };
    let (mut closed, mut open) = (0usize, 0usize);
    for k in 0..buf.len() {
        let t = buf[k].clamp(-1.0, 1.0);
        while closed < buf.len() && buf[closed] >= t - BOUNDARY_TOL {
            closed += 1;
        }
        while open < buf.len() && buf[open] > t + BOUNDARY_TOL {
            open += 1;
        }
        let area = (1.0 - t) / 2.0;
        consider(closed as f64 / n - area, t, Boundary::Closed);
        consider(area - open as f64 / n, t, Boundary::Open);
    }
    let below = buf.iter().filter(|&&s| s > -1.0 + BOUNDARY_TOL).count();
    consider(1.0 - below as f64 / n, -1.0, Boundary::Open);
    best
}

/// Larger value wins; ties go to the earlier candidate.
fn better(a: (CapDiscrepancy, usize), b: (CapDiscrepancy, usize)) -> (CapDiscrepancy, usize) {
    if b.0.value > a.0.value || (b.0.value == a.0.value && b.1 < a.1) {
        b
    } else {
        a
    }
}

fn empty() -> (CapDiscrepancy, usize) {
    let w = Witness {
        center: UnitVec::NORTH.as_array(),
        t: 1.0,
        boundary: Boundary::Closed,
    };
    (
        CapDiscrepancy {
            value: f64::NEG_INFINITY,
            witness: w,
        },
        usize::MAX,
    )
}

/// Exact sup cap discrepancy by enumeration.
///
/// A maximizing cap can be shrunk or grown until its boundary meets the
/// point set in three points, in two diametral points, or is centred on a
/// point. Every such center is swept over all break heights, so the result
/// is the supremum up to rounding. Cost is O(N^4 log N).
pub fn sup_discrepancy_exact(
    points: &PointSet,
    limit: usize,
) -> Result<CapDiscrepancy, MetricsError> {
    let n = points.len();
    if n == 0 {
        return Err(MetricsError::TooFewPoints { needed: 1, got: 0 });
    }
    if n > limit {
        return Err(MetricsError::SizeLimit { n, limit });
    }
    let pts = points.points();
    let raw: Vec<_> = pts.iter().map(|p| p.raw()).collect();

    // Candidate indices: points first, then pairs, then triples, each in
    // lexicographic order of their smallest index.
    let singles = (0..n)
        .into_par_iter()
        .map_init(Vec::new, |buf, i| (sweep(pts, &pts[i], buf), i))
        .reduce(empty, better);

    let pairs_and_triples = (0..n)
        .into_par_iter()
        .map_init(Vec::new, |buf, i| {
            let mut best = empty();
            let mut idx = n + i * n * n;
            for j in i + 1..n {
                if let Some(c) = (raw[i] + raw[j]).unit() {
                    best = better(best, (sweep(pts, &c, buf), idx));
                }
                idx += 1;
                for k in j + 1..n {
                    let normal = (raw[j] - raw[i]).cross(raw[k] - raw[i]);
                    if normal.norm() > DEGENERATE_TOL {
                        if let Some(c) = normal.unit() {
                            best = better(best, (sweep(pts, &c, buf), idx));
                        }
                    }
                    idx += 1;
                }
            }
            best
        })
        .reduce(empty, better);

    Ok(better(singles, pairs_and_triples).0)
}

/// Uniform random direction from a seeded generator.
pub fn random_direction<R: Rng + ?Sized>(rng: &mut R) -> UnitVec {
    let z: f64 = rng.gen_range(-1.0..=1.0);
    let phi: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    UnitVec::from_height_longitude(z, phi)
}

/// Lower estimate of the sup discrepancy: `n_samples` uniform random
/// centers plus the north pole, each swept over all break heights. The pole
/// contributes every polar and equatorial cap of an ensemble.
pub fn sup_discrepancy_estimate(
    points: &PointSet,
    n_samples: usize,
    seed: u64,
) -> Result<CapDiscrepancy, MetricsError> {
    if points.is_empty() {
        return Err(MetricsError::TooFewPoints { needed: 1, got: 0 });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centers = vec![UnitVec::NORTH];
    centers.extend((0..n_samples).map(|_| random_direction(&mut rng)));
    let pts = points.points();
    let best = centers
        .par_iter()
        .enumerate()
        .map_init(Vec::new, |buf, (i, c)| (sweep(pts, c, buf), i))
        .reduce(empty, better);
    Ok(best.0)
}

/// Deviation of one cap, `max(closed/N - area, area - open/N)`.
pub fn cap_deviation(points: &PointSet, cap: &SphericalCap) -> f64 {
    let n = points.len() as f64;
    let area = cap.area_fraction();
    let closed = count_in_cap(points, cap, Boundary::Closed) as f64 / n;
    let open = count_in_cap(points, cap, Boundary::Open) as f64 / n;
    (closed - area).max(area - open)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::{simple_model, validate, ModelSpec, ThetaPolicy};
    use crate::geometry::circumcap;
    use proptest::prelude::*;

    fn simple(m: u32) -> (DiamondModel, PointSet) {
        let model = validate(&simple_model(m)).unwrap();
        let pts = generate(&model);
        (model, pts)
    }

    #[test]
    fn polar_profile_small_models() {
        let (model, _) = simple(1);
        let prof = polar_cap_profile(&model);
        assert_eq!(prof.max_exact, Rational::new(1, 3));
        assert_eq!(prof.argmax, 1);
        assert!((prof.max_counted - 1.0 / 3.0).abs() < 1e-15);

        let (model, _) = simple(3);
        let prof = polar_cap_profile(&model);
        assert_eq!(prof.max_exact, Rational::new(3, 19));
        assert_eq!(prof.argmax, 3);
        for e in &prof.entries {
            assert!((e.counted - rational_to_f64(&e.exact)).abs() < 1e-12);
            assert!((e.closed_form.unwrap() - e.counted).abs() < 1e-12);
        }
    }

    #[test]
    fn polar_profile_general_model_matches_brute_count() {
        let spec = ModelSpec {
            m: 6,
            n: 2,
            t: vec![0, 3, 6],
            alpha: vec![0, 6],
            beta: vec![2, 0],
            theta_policy: ThetaPolicy::Seeded(3),
        };
        let model = validate(&spec).unwrap();
        let pts = generate(&model);
        let prof = polar_cap_profile(&model);
        for e in &prof.entries {
            assert!(e.closed_form.is_none());
            let cap = SphericalCap::clamped(UnitVec::NORTH, model.z_f64(e.j));
            let brute = pts
                .points()
                .iter()
                .filter(|p| p.z >= model.z_f64(e.j) - BOUNDARY_TOL)
                .count();
            let dev = (brute as f64 / pts.len() as f64 - cap.area_fraction()).abs();
            assert_eq!(dev, e.counted);
            assert!((dev - rational_to_f64(&e.exact)).abs() < 1e-12);
        }
    }

    #[test]
    fn equatorial_values() {
        let (model, _) = simple(1);
        let eq = equatorial_discrepancy(&model);
        assert_eq!(eq.exact, Rational::new(1, 3));
        assert!((eq.counted - 1.0 / 3.0).abs() < 1e-15);
        let (model, _) = simple(3);
        let eq = equatorial_discrepancy(&model);
        assert_eq!(eq.exact, Rational::new(3, 19));
        assert_eq!(eq.exact, polar_cap_profile(&model).max_exact);
    }

    #[test]
    fn exact_sup_small_cases() {
        // A single point: the closed cap {x} has excess 1.
        let one = PointSet::new(vec![UnitVec::NORTH]);
        let d = sup_discrepancy_exact(&one, EXACT_LIMIT).unwrap();
        assert!((d.value - 1.0).abs() < 1e-15);

        // Two antipodal points: a cap holding one pole and nearly half the sphere.
        let pair = PointSet::new(vec![UnitVec::NORTH, UnitVec::SOUTH]);
        let d = sup_discrepancy_exact(&pair, EXACT_LIMIT).unwrap();
        assert!((d.value - 0.5).abs() < 1e-15);

        let (model, pts) = simple(1);
        let d = sup_discrepancy_exact(&pts, EXACT_LIMIT).unwrap();
        let polar = polar_cap_profile(&model).max;
        assert!(d.value >= polar - 1e-12);
        let n = pts.len() as f64;
        assert!(d.value <= (4.0 + 2.0 * 2f64.sqrt()) / n.sqrt());

        let cap = SphericalCap::clamped(
            UnitVec::new(
                d.witness.center[0],
                d.witness.center[1],
                d.witness.center[2],
            )
            .unwrap(),
            d.witness.t,
        );
        assert!((cap_deviation(&pts, &cap) - d.value).abs() < 1e-12);
    }

    #[test]
    fn size_limit() {
        let (_, pts) = simple(7);
        assert_eq!(
            sup_discrepancy_exact(&pts, EXACT_LIMIT),
            Err(MetricsError::SizeLimit { n: 198, limit: 150 })
        );
    }

    #[test]
    fn estimate_is_seeded_and_bounded_by_exact() {
        let (model, pts) = simple(2);
        let a = sup_discrepancy_estimate(&pts, 2000, 9).unwrap();
        let b = sup_discrepancy_estimate(&pts, 2000, 9).unwrap();
        assert_eq!(a, b);
        let exact = sup_discrepancy_exact(&pts, EXACT_LIMIT).unwrap();
        assert!(a.value <= exact.value + 1e-12);
        // Zero samples still sweeps the pole, reaching the polar caps.
        let pole_only = sup_discrepancy_estimate(&pts, 0, 0).unwrap();
        assert!(pole_only.value >= polar_cap_profile(&model).max - 1e-15);
    }

    #[test]
    fn exact_sup_is_rotation_invariant() {
        let (_, pts) = simple(2);
        let (s, c) = (0.3f64.sin(), 0.3f64.cos());
        let rotated =
            pts.map_points(|p| UnitVec::new(c * p.x - s * p.z, p.y, s * p.x + c * p.z).unwrap());
        let a = sup_discrepancy_exact(&pts, EXACT_LIMIT).unwrap().value;
        let b = sup_discrepancy_exact(&rotated, EXACT_LIMIT).unwrap().value;
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn worker_count_does_not_change_exact_sup() {
        let (_, pts) = simple(2);
        let run = |threads| {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap();
            pool.install(|| sup_discrepancy_exact(&pts, EXACT_LIMIT).unwrap())
        };
        assert_eq!(run(1), run(3));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn random_caps_never_beat_enumeration(
            seed in any::<u64>(),
            n in 3usize..12,
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let set = PointSet::new((0..n).map(|_| random_direction(&mut rng)).collect());
            let exact = sup_discrepancy_exact(&set, EXACT_LIMIT).unwrap().value;
            for _ in 0..200 {
                let cap = SphericalCap::clamped(random_direction(&mut rng), rand::Rng::gen_range(&mut rng, -1.0..1.0));
                prop_assert!(cap_deviation(&set, &cap) <= exact + 1e-12);
            }
            // Circumcaps of any triple are in the family.
            let p = set.points();
            if let Ok(cap) = circumcap(&p[0], &p[1], &p[2]) {
                prop_assert!(cap_deviation(&set, &cap) <= exact + 1e-12);
            }
        }
    }
}
