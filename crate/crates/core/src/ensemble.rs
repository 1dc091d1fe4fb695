//! Diamond ensemble models.
//!
//! A model is a continuous, piecewise linear, integer-valued rule `r(j)`
//! for the number of points on each of the `p = 2M - 1` parallels, mirrored
//! about the equator. Heights `z_j` are the ones that minimize the expected
//! logarithmic energy over independent rotations of each parallel; together
//! with the two poles they give an `N`-point configuration.
//!
//! All counts and heights are exact rationals; floating point only enters
//! for the trigonometry in [`generate`].

use std::f64::consts::PI;

use num_traits::{One, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::ModelError;
use crate::geometry::{PointSet, Provenance, UnitVec};
use crate::Rational;

/// Rotation phases of the parallels.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ThetaPolicy {
    #[default]
    Zeros,
    /// One phase per parallel, in `[0, 2π]`.
    Fixed(Vec<f64>),
    /// Phases drawn uniformly from `[0, 2π)` by a ChaCha8 stream with this seed.
    Seeded(u64),
}

/// Parameters of a Diamond ensemble model, as read from a model file.
///
/// `t` holds all `n + 1` breakpoints `0 = t_0 < … < t_n = M`; `alpha` and
/// `beta` hold the `n` piece coefficients, so that `r(x) = alpha[l] + beta[l] x`
/// on `[t_l, t_{l+1}]` (0-based `l`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    #[serde(rename = "M")]
    pub m: i64,
    pub n: usize,
    pub t: Vec<i64>,
    pub alpha: Vec<i64>,
    pub beta: Vec<i64>,
    #[serde(default)]
    pub theta_policy: ThetaPolicy,
}

/// The model with `n = 1` and `r_j = 4j`, giving `N = 4M² + 2`.
pub fn simple_model(m: u32) -> ModelSpec {
    ModelSpec {
        m: m as i64,
        n: 1,
        t: vec![0, m as i64],
        alpha: vec![0],
        beta: vec![4],
        theta_policy: ThetaPolicy::Zeros,
    }
}

impl ModelSpec {
    pub fn with_theta(mut self, policy: ThetaPolicy) -> Self {
        self.theta_policy = policy;
        self
    }

    /// Whether this is the `r_j = 4j` model.
    pub fn is_simple(&self) -> bool {
        self.n == 1 && self.alpha == [0] && self.beta == [4] && self.t == [0, self.m]
    }

    /// A random spec satisfying all model assumptions, with `M` in
    /// `2..=max_m` and up to four linear pieces.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, max_m: i64) -> ModelSpec {
        let m = rng.gen_range(2..=max_m.max(2));
        let n = rng.gen_range(1..=m.min(4)) as usize;
        let mut cuts: Vec<i64> = Vec::new();
        while cuts.len() < n - 1 {
            let c = rng.gen_range(1..m);
            if !cuts.contains(&c) {
                cuts.push(c);
            }
        }
        cuts.sort_unstable();
        let mut t = vec![0];
        t.extend(cuts);
        t.push(m);

        let mut alpha = vec![0i64];
        let mut beta = vec![rng.gen_range(1..=6i64)];
        for l in 1..n {
            let at = t[l];
            // alpha stays non-negative iff beta_{l+1} <= beta_l + alpha_l / t_l.
            let max_beta = beta[l - 1] + alpha[l - 1] / at;
            let b = rng.gen_range(0..=max_beta);
            alpha.push(alpha[l - 1] + (beta[l - 1] - b) * at);
            beta.push(b);
        }
        ModelSpec {
            m,
            n,
            t,
            alpha,
            beta,
            theta_policy: ThetaPolicy::Zeros,
        }
    }

    fn check(&self) -> Result<(), ModelError> {
        if self.m < 1 {
            return Err(ModelError::MTooSmall(self.m));
        }
        let n = self.n;
        if n == 0 || self.t.len() != n + 1 || self.alpha.len() != n || self.beta.len() != n {
            return Err(ModelError::ArityMismatch {
                n,
                t: self.t.len(),
                alpha: self.alpha.len(),
                beta: self.beta.len(),
            });
        }
        let (first, last) = (self.t[0], self.t[n]);
        if first != 0 || last != self.m {
            return Err(ModelError::BreakpointEnds {
                m: self.m,
                first,
                last,
            });
        }
        for (index, w) in self.t.windows(2).enumerate() {
            if w[1] <= w[0] {
                return Err(ModelError::NonMonotoneBreakpoints {
                    index: index + 1,
                    value: w[1],
                });
            }
        }
        if self.alpha[0] != 0 {
            return Err(ModelError::AlphaOneNonzero(self.alpha[0]));
        }
        if self.beta[0] <= 0 {
            return Err(ModelError::BetaOneNonPositive(self.beta[0]));
        }
        for (name, values) in [("alpha", &self.alpha), ("beta", &self.beta)] {
            if let Some((piece, &value)) = values.iter().enumerate().find(|(_, &v)| v < 0) {
                return Err(ModelError::NegativeCoefficient {
                    name,
                    piece: piece + 1,
                    value,
                });
            }
        }
        for l in 1..n {
            let at = self.t[l];
            let left = self.alpha[l - 1] + self.beta[l - 1] * at;
            let right = self.alpha[l] + self.beta[l] * at;
            if left != right {
                return Err(ModelError::Discontinuity {
                    index: l,
                    at,
                    left,
                    right,
                });
            }
        }
        Ok(())
    }

    /// `r(x)` at an integer `1 <= x <= M`.
    fn r_at(&self, x: i64) -> i64 {
        let piece = self.t[1..]
            .iter()
            .position(|&tl| x <= tl)
            .unwrap_or(self.n - 1);
        self.alpha[piece] + self.beta[piece] * x
    }
}

/// A validated model with all derived sequences.
#[derive(Debug, Clone, PartialEq)]
pub struct DiamondModel {
    spec: ModelSpec,
    m: usize,
    r: Vec<u64>,
    n_points: u64,
    partial: Vec<u64>,
    z: Vec<Rational>,
    theta: Vec<f64>,
}

pub fn validate(spec: &ModelSpec) -> Result<DiamondModel, ModelError> {
    spec.check()?;
    let m = spec.m as usize;
    let p = 2 * m - 1;

    let upper: Vec<u64> = (1..=spec.m).map(|j| spec.r_at(j) as u64).collect();
    let r: Vec<u64> = (1..=p).map(|j| upper[j.min(2 * m - j) - 1]).collect();

    let total: u128 = 2 + r.iter().map(|&v| v as u128).sum::<u128>();
    if total > (1u128 << 53) {
        return Err(ModelError::TooLarge);
    }
    let n_points = total as u64;

    // N_j = 1 + sum_{k<j} r_k, for j = 1..=p+1.
    let mut partial = Vec::with_capacity(p + 1);
    let mut acc = 1u64;
    partial.push(acc);
    for &rj in &r {
        acc += rj;
        partial.push(acc);
    }

    let denom = n_points as i128 - 1;
    let z = (0..p)
        .map(|k| {
            let num = 1 + r[k] as i128 + 2 * (partial[k] as i128 - 1);
            Rational::one() - Rational::new(num, denom)
        })
        .collect();

    let theta = match &spec.theta_policy {
        ThetaPolicy::Zeros => vec![0.0; p],
        ThetaPolicy::Fixed(list) => {
            if list.len() != p {
                return Err(ModelError::ThetaLength {
                    expected: p,
                    got: list.len(),
                });
            }
            if let Some(&bad) = list.iter().find(|v| !(0.0..=2.0 * PI).contains(*v)) {
                return Err(ModelError::ThetaOutOfRange(bad));
            }
            list.clone()
        }
        ThetaPolicy::Seeded(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            (0..p).map(|_| rng.gen_range(0.0..2.0 * PI)).collect()
        }
    };

    Ok(DiamondModel {
        spec: spec.clone(),
        m,
        r,
        n_points,
        partial,
        z,
        theta,
    })
}

impl DiamondModel {
    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Number of parallels, `2M - 1`.
    pub fn num_parallels(&self) -> usize {
        self.r.len()
    }

    /// Total number of points `N`.
    pub fn num_points(&self) -> u64 {
        self.n_points
    }

    /// `r_1, …, r_p`.
    pub fn r(&self) -> &[u64] {
        &self.r
    }

    /// `r_j` for 1-based `j`.
    pub fn r_at(&self, j: usize) -> Result<u64, ModelError> {
        self.check_index(j, self.num_parallels())?;
        Ok(self.r[j - 1])
    }

    /// `N_j = 1 + sum_{k<j} r_k`. Valid for `1 <= j <= p + 1` (with
    /// `N_{p+1} = N - 1`).
    pub fn partial_count(&self, j: usize) -> Result<u64, ModelError> {
        self.check_index(j, self.num_parallels() + 1)?;
        Ok(self.partial[j - 1])
    }

    /// Exact height `z_j = 1 - (1 + r_j + 2 sum_{k<j} r_k) / (N - 1)`.
    pub fn height_z(&self, j: usize) -> Result<Rational, ModelError> {
        self.check_index(j, self.num_parallels())?;
        Ok(self.z[j - 1])
    }

    /// `z_j` through the partial-count form `1 - 2N_j/(N-1) - (r_j - 1)/(N-1)`.
    pub fn height_z_from_partial(&self, j: usize) -> Result<Rational, ModelError> {
        let nj = self.partial_count(j)? as i128;
        let rj = self.r_at(j)? as i128;
        let d = self.n_points as i128 - 1;
        Ok(Rational::one() - Rational::new(2 * nj, d) - Rational::new(rj - 1, d))
    }

    pub fn heights(&self) -> &[Rational] {
        &self.z
    }

    pub fn z_f64(&self, j: usize) -> f64 {
        rational_to_f64(&self.z[j - 1])
    }

    /// Rotation phase of parallel `j`.
    pub fn theta(&self, j: usize) -> f64 {
        self.theta[j - 1]
    }

    pub fn thetas(&self) -> &[f64] {
        &self.theta
    }

    /// Longitude of point `i` (0-based) on parallel `j`.
    pub fn longitude(&self, j: usize, i: usize) -> f64 {
        2.0 * PI * i as f64 / self.r[j - 1] as f64 + self.theta[j - 1]
    }

    fn check_index(&self, j: usize, max: usize) -> Result<(), ModelError> {
        if j == 0 || j > max {
            Err(ModelError::IndexOutOfRange { j, max })
        } else {
            Ok(())
        }
    }
}

pub fn rational_to_f64(q: &Rational) -> f64 {
    // Numerators and denominators stay below 2^53 for every accepted model,
    // so both conversions are exact and the quotient is correctly rounded.
    q.numer().to_f64().unwrap_or(f64::NAN) / q.denom().to_f64().unwrap_or(f64::NAN)
}

/// The `N` points: north pole, then parallels `1..=p` top to bottom with
/// `i = 0..r_j`, then the south pole.
pub fn generate(model: &DiamondModel) -> PointSet {
    let n = model.num_points() as usize;
    let mut points = Vec::with_capacity(n);
    let mut tags = Vec::with_capacity(n);
    points.push(UnitVec::NORTH);
    tags.push(Provenance::NorthPole);
    for j in 1..=model.num_parallels() {
        let z = model.z_f64(j);
        for i in 0..model.r[j - 1] as usize {
            points.push(UnitVec::from_height_longitude(z, model.longitude(j, i)));
            tags.push(Provenance::Parallel { j, i });
        }
    }
    points.push(UnitVec::SOUTH);
    tags.push(Provenance::SouthPole);
    PointSet::with_provenance(points, tags)
}

/// Constants of the model-dependent bounds, computed by the recipes of the
/// growth lemmas and the partition side-length estimates.
///
/// `a1_proof = (c² - c)/2` is kept for reference; it is never positive
/// because `c = t_1 / M <= 1`. The constants actually used are the sharp
/// values `a1 = N / M²` (for `N >= a1 M²`) and `a1_tail = N_{t_1} / M²` (for
/// `N_j >= a1_tail M²` past the first breakpoint).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConstants {
    #[serde(rename = "A")]
    pub big_a: f64,
    pub c: f64,
    pub a1_proof: f64,
    pub a1: f64,
    pub a1_tail: f64,
    pub a2: f64,
    pub k1_dot: f64,
    pub k2_dot: f64,
    pub k1_tilde: f64,
    pub k2_tilde: f64,
    pub k1: f64,
    pub k2: f64,
    pub d1: f64,
    pub d2: f64,
    pub e1: f64,
    pub e2: f64,
    pub g1: f64,
    pub g2: f64,
    pub c1: f64,
    pub c2: f64,
}

pub fn model_constants(model: &DiamondModel) -> ModelConstants {
    let spec = model.spec();
    let m = model.m() as f64;
    let big_a = spec
        .beta
        .iter()
        .map(|&b| b as f64)
        .chain(spec.alpha.iter().map(|&a| a as f64 / m))
        .fold(2.0, f64::max);
    let c = spec.t[1] as f64 / m;
    let n = model.num_points() as f64;

    let a1_proof = (c * c - c) / 2.0;
    let a1 = if a1_proof > 0.0 {
        a1_proof
    } else {
        n / (m * m)
    };
    let n_t1 = model.partial[spec.t[1] as usize - 1] as f64;
    let a1_tail = if a1_proof > 0.0 {
        a1_proof
    } else {
        n_t1 / (m * m)
    };
    let a2 = 4.0 * big_a;

    let (alpha1, beta1) = (spec.alpha[0] as f64, spec.beta[0] as f64);
    let k1_dot = 1.0 / (2.0 * (beta1 * beta1 + 2.0 * alpha1 * beta1 + alpha1 * alpha1));
    let k2_dot = 1.0;
    let k1_tilde = a1_tail / (4.0 * big_a * big_a);
    let k2_tilde = a2 / (c * c);
    let k1 = k1_tilde.min(k1_dot);
    let k2 = k2_tilde.max(k2_dot);

    let d1 = 2.0 * 2f64.sqrt() * PI * k1.sqrt();
    let d2 = 4.0 * PI * k2.sqrt();
    // Vertical sides: the mean value theorem against the horizontal bounds.
    let e1 = 1.0 / (k2 + 1.0).sqrt();
    let e2 = 4.0 * PI / d1;
    // Diameters: widest parallel arc in a region plus its vertical side; the
    // polar caps have geodesic diameter 4 arcsin(1/sqrt N) < 2π/sqrt N.
    let g1 = e1;
    let g2 = (4.0 * PI * (k2 + 1.0).sqrt() + e2).max(2.0 * PI);

    let c1 = c / (2.0 * a2.sqrt());
    let c2 = 8.0 / a1.sqrt() + 2.0 * PI / d1;

    ModelConstants {
        big_a,
        c,
        a1_proof,
        a1,
        a1_tail,
        a2,
        k1_dot,
        k2_dot,
        k1_tilde,
        k2_tilde,
        k1,
        k2,
        d1,
        d2,
        e1,
        e2,
        g1,
        g2,
        c1,
        c2,
    }
}

/// Sharp growth constants `(min N/M², max N/M²)` over a family of models.
pub fn growth_constants<'a>(models: impl IntoIterator<Item = &'a DiamondModel>) -> (f64, f64) {
    models
        .into_iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), model| {
            let m = model.m() as f64;
            let ratio = model.num_points() as f64 / (m * m);
            (lo.min(ratio), hi.max(ratio))
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Zero;
    use proptest::prelude::*;

    fn q(n: i128, d: i128) -> Rational {
        Rational::new(n, d)
    }

    #[test]
    fn simple_three() {
        let model = validate(&simple_model(3)).unwrap();
        assert_eq!(model.num_points(), 38);
        assert_eq!(model.r(), &[4, 8, 12, 8, 4]);
        let z: Vec<Rational> = (1..=5).map(|j| model.height_z(j).unwrap()).collect();
        assert_eq!(
            z,
            vec![q(32, 37), q(20, 37), q(0, 1), q(-20, 37), q(-32, 37)]
        );
        assert_eq!(model.partial_count(2).unwrap(), 5);
        assert_eq!(model.partial_count(3).unwrap(), 13);
    }

    #[test]
    fn simple_small_models() {
        let m1 = validate(&simple_model(1)).unwrap();
        assert_eq!(m1.num_points(), 6);
        assert_eq!(m1.r(), &[4]);
        assert!(m1.height_z(1).unwrap().is_zero());

        let m2 = validate(&simple_model(2)).unwrap();
        assert_eq!(m2.num_points(), 18);
        assert_eq!(m2.r(), &[4, 8, 4]);
        assert_eq!(m2.heights(), &[q(12, 17), q(0, 1), q(-12, 17)]);

        assert_eq!(validate(&simple_model(10)).unwrap().num_points(), 402);
    }

    #[test]
    fn rejects_bad_specs() {
        let mut s = simple_model(3);
        s.alpha[0] = 1;
        assert_eq!(validate(&s).unwrap_err(), ModelError::AlphaOneNonzero(1));

        let mut s = simple_model(3);
        s.beta[0] = 0;
        assert_eq!(validate(&s).unwrap_err(), ModelError::BetaOneNonPositive(0));

        let s = ModelSpec {
            m: 4,
            n: 2,
            t: vec![0, 2, 4],
            alpha: vec![0, 1],
            beta: vec![2, 2],
            theta_policy: ThetaPolicy::Zeros,
        };
        assert!(matches!(
            validate(&s),
            Err(ModelError::Discontinuity { index: 1, .. })
        ));

        let s = ModelSpec {
            m: 4,
            n: 2,
            t: vec![0, 2, 4],
            alpha: vec![0, 6],
            beta: vec![3, 0],
            theta_policy: ThetaPolicy::Zeros,
        };
        assert!(validate(&s).is_ok());
        let mut bad = s.clone();
        bad.beta[1] = -1;
        bad.alpha[1] = 8;
        assert!(matches!(
            validate(&bad),
            Err(ModelError::NegativeCoefficient {
                name: "beta",
                piece: 2,
                ..
            })
        ));

        let mut s = simple_model(3);
        s.t = vec![0, 0, 3];
        s.n = 2;
        s.alpha = vec![0, 0];
        s.beta = vec![4, 4];
        assert!(matches!(
            validate(&s),
            Err(ModelError::NonMonotoneBreakpoints { .. })
        ));

        let mut s = simple_model(1);
        s.m = 0;
        s.t = vec![0, 0];
        assert_eq!(validate(&s).unwrap_err(), ModelError::MTooSmall(0));

        let s = simple_model(2).with_theta(ThetaPolicy::Fixed(vec![0.0, 1.0]));
        assert_eq!(
            validate(&s).unwrap_err(),
            ModelError::ThetaLength {
                expected: 3,
                got: 2
            }
        );
    }

    #[test]
    fn index_errors() {
        let model = validate(&simple_model(2)).unwrap();
        assert!(model.height_z(0).is_err());
        assert!(model.height_z(4).is_err());
        assert_eq!(model.partial_count(4).unwrap(), 17);
        assert!(model.partial_count(5).is_err());
    }

    #[test]
    fn octahedron_points() {
        let pts = generate(&validate(&simple_model(1)).unwrap());
        let expected = [
            [0.0, 0.0, 1.0],
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [-1.0, 0.0, 0.0],
            [0.0, -1.0, 0.0],
            [0.0, 0.0, -1.0],
        ];
        for (p, e) in pts.points().iter().zip(expected) {
            for (a, b) in p.as_array().iter().zip(e) {
                assert!((a - b).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn equator_of_m2() {
        let model = validate(&simple_model(2)).unwrap();
        let pts = generate(&model);
        let eq: Vec<_> = pts
            .iter()
            .filter(|(_, tag)| matches!(tag, Provenance::Parallel { j: 2, .. }))
            .map(|(p, _)| *p)
            .collect();
        assert_eq!(eq.len(), 8);
        for (k, p) in eq.iter().enumerate() {
            let phi = k as f64 * PI / 4.0;
            assert!(p.z.abs() < 1e-15);
            assert!((p.x - phi.cos()).abs() < 1e-15 && (p.y - phi.sin()).abs() < 1e-15);
        }
    }

    #[test]
    fn seeded_theta_is_reproducible() {
        let spec = simple_model(4).with_theta(ThetaPolicy::Seeded(42));
        let a = generate(&validate(&spec).unwrap());
        let b = generate(&validate(&spec).unwrap());
        assert_eq!(a, b);
        let c = generate(&validate(&simple_model(4).with_theta(ThetaPolicy::Seeded(43))).unwrap());
        assert_ne!(a, c);
    }

    #[test]
    fn simple_model_constants() {
        let model = validate(&simple_model(5)).unwrap();
        let k = model_constants(&model);
        assert_eq!(k.big_a, 4.0);
        assert_eq!(k.c, 1.0);
        assert_eq!(k.a2, 16.0);
        assert_eq!(k.k1_dot, 1.0 / 32.0);
        assert_eq!(k.a1_proof, 0.0);
        assert_eq!(k.a1, 102.0 / 25.0);
        assert!((k.d1 - 2.0 * 2f64.sqrt() * PI * k.k1.sqrt()).abs() < 1e-15);
        assert!((k.d2 - 4.0 * PI * k.k2.sqrt()).abs() < 1e-15);
        assert!((k.c2 - (8.0 / k.a1.sqrt() + 2.0 * PI / k.d1)).abs() < 1e-15);
        assert!((k.c1 - 1.0 / 8.0).abs() < 1e-15);
    }

    #[test]
    fn growth_lemma_over_simple_family() {
        let models: Vec<_> = (1..=1000)
            .map(|m| validate(&simple_model(m)).unwrap())
            .collect();
        let (lo, hi) = growth_constants(&models);
        assert!((lo - (4.0 + 2.0 / 1e6)).abs() < 1e-12);
        assert_eq!(hi, 6.0);
        for model in &models {
            let k = model_constants(model);
            let m2 = (model.m() * model.m()) as f64;
            let n = model.num_points() as f64;
            assert!(k.a1 * m2 <= n * (1.0 + 1e-12) && n <= k.a2 * m2);
            assert!(lo * m2 <= n * (1.0 + 1e-12));
        }
    }

    fn spec_strategy() -> impl Strategy<Value = ModelSpec> {
        any::<u64>().prop_map(|seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            ModelSpec::random(&mut rng, 80)
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn derived_sequences(spec in spec_strategy()) {
            let model = validate(&spec).unwrap();
            let m = model.m();
            let p = model.num_parallels();
            prop_assert_eq!(p, 2 * m - 1);
            let r = model.r();
            for j in 1..m {
                prop_assert!(r[j - 1] <= r[j]);
            }
            for j in 1..=p {
                prop_assert_eq!(r[j - 1], r[2 * m - j - 1]);
                prop_assert_eq!(model.partial_count(j + 1).unwrap() - model.partial_count(j).unwrap(), r[j - 1]);
                prop_assert_eq!(model.height_z(j).unwrap(), model.height_z_from_partial(j).unwrap());
                prop_assert_eq!(model.height_z(j).unwrap(), -model.height_z(2 * m - j).unwrap());
            }
            prop_assert_eq!(model.num_points(), 2 + r.iter().sum::<u64>());
            prop_assert_eq!(model.partial_count(1).unwrap(), 1);
            let z = model.heights();
            prop_assert!(z[0] < Rational::one());
            prop_assert!(z[p - 1] > -Rational::one());
            for w in z.windows(2) {
                prop_assert!(w[0] > w[1]);
            }
            let pts = generate(&model);
            prop_assert_eq!(pts.len() as u64, model.num_points());
            for p in pts.points() {
                prop_assert!((p.dot(p) - 1.0).abs() < 1e-12);
            }
        }

        #[test]
        fn partial_count_lemma(spec in spec_strategy()) {
            let model = validate(&spec).unwrap();
            let k = model_constants(&model);
            prop_assert!(k.big_a >= 2.0 && k.c > 0.0 && k.c <= 1.0);
            for j in 1..=model.m() {
                let rj = model.r_at(j).unwrap() as f64;
                let nj = model.partial_count(j).unwrap() as f64;
                prop_assert!(k.k1 * rj * rj <= nj, "k1 fails at j={} for {:?}", j, spec);
                prop_assert!(nj <= k.k2 * rj * rj, "k2 fails at j={} for {:?}", j, spec);
            }
            let m2 = (model.m() * model.m()) as f64;
            let n = model.num_points() as f64;
            prop_assert!(k.a1 * m2 <= n * (1.0 + 1e-12) && n <= k.a2 * m2);
        }
    }
}
