#![allow(dead_code)]

use lentlab_core::levy_sim::{JumpConfiguration, JumpPoint, LevyMeasureSpec};
use nalgebra::DVector;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngSeed};

pub const GAP: f64 = 0.01;

/// ψ/k ≡ 1 and ξ = x² on (−1, 1) \ (−GAP, GAP).
pub fn unit_spec() -> LevyMeasureSpec<f64> {
    LevyMeasureSpec::compound_poisson_uniform(1.0, -1.0, 1.0, GAP).unwrap()
}

pub fn axes_spec() -> LevyMeasureSpec<f64> {
    LevyMeasureSpec::independent_axes(vec![unit_spec(), unit_spec()]).unwrap()
}

pub fn config(cases: u32, seed: u64) -> Config {
    Config { cases, rng_seed: RngSeed::Fixed(seed), failure_persistence: None, ..Config::default() }
}

/// A mark in (−0.9, 0.9) away from the gap.
pub fn mark() -> impl Strategy<Value = f64> {
    (0.02f64..0.9, any::<bool>()).prop_map(|(m, neg)| if neg { -m } else { m })
}

fn distinct_sorted(mut pts: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    pts.dedup_by(|a, b| (a.0 - b.0).abs() < 1e-6);
    pts
}

/// Pure-jump scalar configurations on [0, 1] with `lo..=hi` jumps.
pub fn scalar_config(lo: usize, hi: usize) -> impl Strategy<Value = JumpConfiguration<f64>> {
    prop::collection::vec((0.001f64..0.999, mark()), lo..=hi)
        .prop_map(distinct_sorted)
        .prop_filter("enough distinct times", move |v| v.len() >= lo)
        .prop_map(|v| JumpConfiguration::scalar_jumps(1.0, &v).unwrap())
}

/// Marks on the coordinate axes of ℝ².
pub fn axes_config(lo: usize, hi: usize) -> impl Strategy<Value = JumpConfiguration<f64>> {
    prop::collection::vec((0.001f64..0.999, mark(), any::<bool>()), lo..=hi)
        .prop_map(|v| {
            let mut v = v;
            v.sort_by(|a, b| a.0.total_cmp(&b.0));
            v.dedup_by(|a, b| (a.0 - b.0).abs() < 1e-6);
            v
        })
        .prop_filter("enough distinct times", move |v| v.len() >= lo)
        .prop_map(|v| {
            let pts = v
                .into_iter()
                .map(|(t, m, second)| {
                    let u = if second { vec![0.0, m] } else { vec![m, 0.0] };
                    JumpPoint::new(t, DVector::from_vec(u))
                })
                .collect();
            JumpConfiguration::pure_jump(1.0, 2, pts).unwrap()
        })
}

pub fn marks(c: &JumpConfiguration<f64>) -> Vec<(f64, f64)> {
    c.points().iter().map(|p| (p.time, p.mark[0])).collect()
}
