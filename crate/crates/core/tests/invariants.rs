use std::f64::consts::SQRT_2;

use diamond_core::ensemble::{
    generate, model_constants, simple_model, validate, ModelSpec, ThetaPolicy,
};
use diamond_core::metrics::{
    covering_upper_bound, equatorial_discrepancy, l2_discrepancy_quadrature,
    l2_discrepancy_stolarsky, polar_cap_profile, sup_discrepancy_exact, QuadratureGrid,
    EXACT_LIMIT,
};
use diamond_core::partition::{build_partition, verify_matching};
use diamond_core::Rational;

#[test]
fn ordering_chain_for_small_simple_models() {
    for m in 1..=6u32 {
        let model = validate(&simple_model(m)).unwrap();
        let pts = generate(&model);
        let n = pts.len() as f64;
        let polar = polar_cap_profile(&model);
        let equator = equatorial_discrepancy(&model);
        let exact = sup_discrepancy_exact(&pts, EXACT_LIMIT).unwrap().value;

        assert!((polar.max - (n - 2.0).sqrt() / n).abs() < 1e-15);
        assert_eq!(
            equator.exact,
            Rational::new(2 * m as i128, pts.len() as i128)
        );
        assert_eq!(equator.exact, polar.max_exact);
        assert!(polar.max <= exact + 1e-12, "M={m}");
        assert!(equator.value <= exact + 1e-12, "M={m}");
        assert!(exact <= (4.0 + 2.0 * SQRT_2) / n.sqrt(), "M={m}");

        let l2 = l2_discrepancy_quadrature(
            &pts,
            QuadratureGrid {
                centers: 2000,
                heights: 256,
            },
        )
        .unwrap();
        assert!(l2 <= exact, "M={m}: L2 {l2} above sup {exact}");
        assert!(l2_discrepancy_stolarsky(&pts).unwrap() <= exact);
    }
}

#[test]
fn covering_bound_scales_with_sqrt_n() {
    for m in 1..=100u32 {
        let model = validate(&simple_model(m)).unwrap();
        let pts = generate(&model);
        let bound = covering_upper_bound(&build_partition(&model), &pts).unwrap();
        let scaled = bound * (pts.len() as f64).sqrt();
        assert!(scaled <= model_constants(&model).g2, "M={m}: {scaled}");
        assert!(scaled < 3.3, "M={m}: {scaled}");
    }
}

#[test]
fn general_model_pipeline() {
    let spec = ModelSpec {
        m: 9,
        n: 3,
        t: vec![0, 2, 5, 9],
        alpha: vec![0, 2, 7],
        beta: vec![3, 2, 1],
        theta_policy: ThetaPolicy::Seeded(11),
    };
    let model = validate(&spec).unwrap();
    let pts = generate(&model);
    let part = build_partition(&model);
    verify_matching(&part, &pts).unwrap();
    let polar = polar_cap_profile(&model);
    for e in &polar.entries {
        assert!(e.closed_form.is_none());
        assert!((e.counted - diamond_core::ensemble::rational_to_f64(&e.exact)).abs() < 1e-12);
    }
    let eq = equatorial_discrepancy(&model);
    assert!((eq.counted - eq.value).abs() < 1e-15);
}
