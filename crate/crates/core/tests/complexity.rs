//! Cost of the kurtosis-gated variance algorithm as `n` doubles. Kept in its
//! own test binary so no other test competes for the CPU while timing.

use std::time::{Duration, Instant};

use bagcheck::bagging::{algorithm1_variance, IterationCap};
use bagcheck::Dataset;

/// Repeats a six-point block with kurtosis 3, so the sample moments and hence
/// `N / n` barely move between sizes.
fn heavy_tailed(n: usize) -> Dataset<f64> {
    let block = [-2.0, 0.0, 0.0, 0.0, 0.0, 2.0];
    Dataset::new((0..n).map(|i| block[i % 6]).collect()).unwrap()
}

fn median_time(n: usize) -> (Duration, u64) {
    let data = heavy_tailed(n);
    let mut bags = 0;
    let mut times: Vec<Duration> = (0..7)
        .map(|seed| {
            let start = Instant::now();
            let r = algorithm1_variance(&data, 2, seed, IterationCap::Unbounded).unwrap();
            bags = r.iterations;
            start.elapsed()
        })
        .collect();
    times.sort();
    (times[3], bags)
}

/// One test function so the timings never overlap with another test thread.
#[test]
fn cost_is_quadratic_on_doubling() {
    median_time(300);
    let (t_small, small) = median_time(1200);
    let (t_large, large) = median_time(2400);
    let bag_ratio = large as f64 / small as f64;
    assert!((1.9..=2.1).contains(&bag_ratio), "{small} -> {large} bags");
    let ratio = t_large.as_secs_f64() / t_small.as_secs_f64();
    assert!(
        (2.0..=8.0).contains(&ratio),
        "{t_small:?} -> {t_large:?} (ratio {ratio:.2})"
    );
}
