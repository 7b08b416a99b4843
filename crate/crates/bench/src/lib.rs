//! Fixtures shared by the benchmark targets.

use tbf_core::channel::{ArrayGeometry, MultipathSet, OfdmConfig, PathParams};

/// Desk-scale configuration used by most benchmarks.
pub fn desk() -> (ArrayGeometry, OfdmConfig) {
    (ArrayGeometry::default(), OfdmConfig::default())
}

/// `n` deterministic off-grid paths spread over the admissible ranges.
pub fn paths(n: usize, cfg: &OfdmConfig) -> MultipathSet {
    let (lo, hi) = cfg.doppler_range();
    let paths = (0..n)
        .map(|i| {
            let x = (i as f64 + 0.37) / n as f64;
            PathParams {
                gain_variance: 1.0 / n as f64,
                elevation: 0.2 + 2.7 * x,
                azimuth: 3.0 * (1.0 - x),
                delay: 0.9 * x * cfg.max_delay(),
                doppler: lo + (hi - lo) * (0.1 + 0.8 * x),
            }
        })
        .collect();
    MultipathSet::new(paths)
}
