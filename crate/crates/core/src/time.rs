//! Simulation time base: integer nanoseconds, so that event ordering and all
//! reported statistics are exactly reproducible for a given seed.

/// Simulation timestamp / duration in nanoseconds.
pub type Nanos = u64;

pub const NANOS_PER_US: u64 = 1_000;
pub const NANOS_PER_MS: u64 = 1_000_000;
pub const NANOS_PER_SEC: u64 = 1_000_000_000;

/// Convert a (non-negative) duration in microseconds to nanoseconds, rounding
/// to the nearest integer. PHY airtime arithmetic is done in f64 microseconds
/// and quantized once, here, when it enters the event clock.
pub fn us_f64_to_ns(us: f64) -> Nanos {
    debug_assert!(us >= 0.0 && us.is_finite());
    (us * NANOS_PER_US as f64).round() as Nanos
}

pub fn ms_f64_to_ns(ms: f64) -> Nanos {
    debug_assert!(ms >= 0.0 && ms.is_finite());
    (ms * NANOS_PER_MS as f64).round() as Nanos
}

pub fn secs_f64_to_ns(secs: f64) -> Nanos {
    debug_assert!(secs >= 0.0 && secs.is_finite());
    (secs * NANOS_PER_SEC as f64).round() as Nanos
}

pub fn ns_to_us_f64(ns: Nanos) -> f64 {
    ns as f64 / NANOS_PER_US as f64
}

pub fn ns_to_ms_f64(ns: Nanos) -> f64 {
    ns as f64 / NANOS_PER_MS as f64
}

pub fn ns_to_secs_f64(ns: Nanos) -> f64 {
    ns as f64 / NANOS_PER_SEC as f64
}
