//! Monte Carlo checks of the Poisson sampler and path reconstruction.

use lentlab_core::levy_sim::*;
use nalgebra::DVector;

const SEEDS: u64 = 100_000;

fn counts(spec: &LevyMeasureSpec<f64>, horizon: f64) -> Vec<f64> {
    (0..SEEDS).map(|s| sample_configuration(spec, horizon, s).unwrap().len() as f64).collect()
}

fn mean_var(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    (m, x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0))
}

#[test]
fn unit_mass_mean_count() {
    let spec = LevyMeasureSpec::compound_poisson_uniform(1.0, 1.0, 2.0, 0.0).unwrap();
    let (m, _) = mean_var(&counts(&spec, 1.0));
    assert!((m - 1.0).abs() <= 4.0 * (1.0 / SEEDS as f64).sqrt(), "{m}");
}

#[test]
fn poisson_variance_equals_mean() {
    let spec = LevyMeasureSpec::compound_poisson_uniform(2.0, 1.0, 2.0, 0.0).unwrap();
    let (m, v) = mean_var(&counts(&spec, 3.0));
    assert!((m - 6.0).abs() <= 4.0 * (6.0 / SEEDS as f64).sqrt(), "{m}");
    // sd of the sample variance of Poisson(6): sqrt((μ(1+3μ) − μ²)/n)
    let sd = ((6.0 * 19.0 - 36.0) / SEEDS as f64).sqrt();
    assert!((v - 6.0).abs() <= 4.0 * sd, "{v}");
}

#[test]
fn truncated_power_marks_in_band_and_count() {
    let (beta, cut): (f64, f64) = (0.5, 0.01);
    let spec = LevyMeasureSpec::truncated_power(beta, cut).unwrap();
    let mass = 2.0 * (cut.powf(-beta) - 1.0) / beta;
    let mut total = 0usize;
    let n = 20_000u64;
    for s in 0..n {
        let c = sample_configuration(&spec, 1.0, s).unwrap();
        total += c.len();
        for p in c.points() {
            let a = p.mark[0].abs();
            assert!(a > cut && a < 1.0);
        }
    }
    let mean = total as f64 / n as f64;
    assert!((mean - mass).abs() <= 4.0 * (mass / n as f64).sqrt(), "{mean} vs {mass}");
}

#[test]
fn sampling_is_bit_reproducible() {
    let spec = LevyMeasureSpec::truncated_power(1.2, 0.05).unwrap();
    for s in [0, 1, 99, u64::MAX] {
        assert_eq!(sample_configuration(&spec, 2.0, s).unwrap(), sample_configuration(&spec, 2.0, s).unwrap());
    }
    let a = sample_configuration_for_path(&spec, 1.0, 5, 3).unwrap();
    let b = sample_configuration_for_path(&spec, 1.0, 5, 4).unwrap();
    assert_ne!(a, b);
}

#[test]
fn path_recovers_configuration() {
    let spec = LevyMeasureSpec::compound_poisson_uniform(8.0, -1.0, 1.0, 0.05).unwrap();
    for s in 0..50 {
        let c = sample_configuration(&spec, 1.0, s).unwrap();
        let p = build_path(&c, DVector::zeros(1)).unwrap();
        let jumps: Vec<(f64, f64)> = p.jumps().map(|(t, u)| (t, u[0])).collect();
        let orig: Vec<(f64, f64)> = c.points().iter().map(|q| (q.time, q.mark[0])).collect();
        assert_eq!(jumps, orig);
        for q in c.points() {
            let d = p.value(q.time)[0] - p.left_limit(q.time)[0];
            assert!((d - q.mark[0]).abs() < 1e-14);
        }
        let v = stochastic_integral_scalar(|_| -1.5, &p, 1.0).unwrap();
        assert!((v + 1.5 * (p.value(1.0)[0] - p.value(0.0)[0])).abs() < 1e-10);
    }
}
