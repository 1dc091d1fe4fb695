//! Estimates the invariance constant relating the L2 cap discrepancy to the
//! pairwise distance sum, and checks the mean pair distance by Monte Carlo.
//!
//!     cargo run --release -p diamond-core --example calibrate_stolarsky

use diamond_core::ensemble::{generate, simple_model, validate};
use diamond_core::metrics::{
    calibrate_stolarsky, mean_pair_distance_mc, random_point_set, QuadratureGrid,
    MEAN_PAIR_DISTANCE, STOLARSKY_CONSTANT,
};
use diamond_core::PointSet;

fn main() {
    let grid = QuadratureGrid::default();
    let mut sets: Vec<(String, PointSet)> = (1..=4)
        .map(|m| {
            (
                format!("simple M={m}"),
                generate(&validate(&simple_model(m)).unwrap()),
            )
        })
        .collect();
    sets.extend((0..10).map(|seed| {
        (
            format!("random N=20 seed={seed}"),
            random_point_set(20, seed),
        )
    }));

    let only_sets: Vec<PointSet> = sets.iter().map(|(_, s)| s.clone()).collect();
    let cal = calibrate_stolarsky(&only_sets, grid).expect("calibration");
    for ((name, _), ratio) in sets.iter().zip(&cal.ratios) {
        println!("{name:<24} ratio {ratio:.6}");
    }
    println!("median          {:.6}", cal.median);
    println!("pinned constant {STOLARSKY_CONSTANT}");
    println!(
        "relative gap    {:.2e}",
        (cal.median - STOLARSKY_CONSTANT).abs() / STOLARSKY_CONSTANT
    );

    let mc = mean_pair_distance_mc(4_000_000, 1);
    println!("mean pair distance: Monte Carlo {mc:.6}, pinned {MEAN_PAIR_DISTANCE:.6}");
}
