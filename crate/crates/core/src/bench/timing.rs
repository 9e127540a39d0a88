//! Clock characterization and harness self-measurement. Glue code is never
//! assumed to take negligible time; it is measured and reported.

use std::hint::black_box;
use std::time::Instant;

use crate::imaging::{ColorMode, Image};
use crate::pipeline::TraceBuilder;

/// Minimum positive delta observed over at least 10⁶ back-to-back monotonic
/// clock reads, in nanoseconds.
pub fn timer_resolution() -> u64 {
    const READS: usize = 1_000_000;
    let mut min_delta = u64::MAX;
    let mut prev = Instant::now();
    for _ in 0..READS {
        let now = Instant::now();
        let delta = now.duration_since(prev).as_nanos() as u64;
        if delta > 0 && delta < min_delta {
            min_delta = delta;
        }
        prev = now;
    }
    if min_delta == u64::MAX {
        1
    } else {
        min_delta
    }
}

/// Mean wall time, in ns/call, of pushing a no-op stage through the same
/// dispatch path real pipeline stages use (timing, summary, trace record).
pub fn harness_overhead(iters: u32) -> f64 {
    assert!(iters >= 1000, "need at least 1000 iterations, got {iters}");
    let probe = Image::from_samples(1, 1, vec![0, 0, 0], ColorMode::Rgb, "noop").unwrap();
    let start = Instant::now();
    for _ in 0..iters {
        let mut tb = TraceBuilder::new();
        let out = tb.run_ok("noop", || black_box(&probe).clone());
        black_box(out);
        black_box(tb.finish());
    }
    start.elapsed().as_nanos() as f64 / iters as f64
}
