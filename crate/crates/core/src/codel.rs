//! CoDel queue management: sojourn-time based head dropping with the
//! inverse-square-root control law, plus the per-station parameter adaptation
//! used for slow links.
//!
//! The dequeue routine operates on any `VecDeque<Packet>` plus a `CodelState`,
//! so the flow-queueing layer can embed one state per flow queue.
//!
//! Control law: once the head sojourn time has stayed at or above `target`
//! for one full `interval`, the head packet is dropped and a dropping episode
//! begins. After the k-th drop of an episode the next drop is scheduled
//! `interval / sqrt(k + 1)` later, i.e. drops fall at
//! `t1 = first_above + interval`, `t_k = t_{k-1} + interval/sqrt(k)` for
//! k = 2, 3, … The episode ends as soon as a head packet is seen below
//! target (or the queue empties). An episode that restarts within
//! 16 intervals of the last scheduled drop resumes at a reduced count
//! instead of starting over, preserving the drop rate across short lulls.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::packet::Packet;
use crate::time::{ms_f64_to_ns, Nanos};

/// Sojourn target and control interval, both in nanoseconds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodelParams {
    pub target: Nanos,
    pub interval: Nanos,
}

impl CodelParams {
    pub const fn new(target: Nanos, interval: Nanos) -> Self {
        CodelParams { target, interval }
    }

    /// Stock parameters: 5 ms target, 100 ms interval.
    pub const fn normal() -> Self {
        CodelParams::new(5_000_000, 100_000_000)
    }

    /// Slow-link parameters: 50 ms target, 300 ms interval.
    pub const fn low_rate() -> Self {
        CodelParams::new(50_000_000, 300_000_000)
    }
}

impl Default for CodelParams {
    fn default() -> Self {
        CodelParams::normal()
    }
}

/// Per-queue controller state.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CodelState {
    /// When the head sojourn, having gone above target, will have been above
    /// for a full interval (None while below target).
    pub first_above_time: Option<Nanos>,
    /// Next scheduled drop while in the dropping state.
    pub drop_next: Nanos,
    /// Drops so far in the current episode (reduced, not reset, on quick
    /// re-entry).
    pub drop_count: u32,
    pub dropping: bool,
}

fn spacing(interval: Nanos, k: u32) -> Nanos {
    (interval as f64 / (k as f64).sqrt()).round() as Nanos
}

/// Head check: is this packet's sojourn at-or-above target, and has the queue
/// been above continuously for an interval? Updates `first_above_time`.
fn should_drop(pkt: &Packet, state: &mut CodelState, now: Nanos, params: &CodelParams) -> bool {
    let sojourn = now.saturating_sub(pkt.enqueued);
    if sojourn < params.target {
        state.first_above_time = None;
        return false;
    }
    match state.first_above_time {
        None => {
            state.first_above_time = Some(now + params.interval);
            false
        }
        Some(first_above) => now >= first_above,
    }
}

fn reset_on_empty(state: &mut CodelState) {
    state.first_above_time = None;
    state.dropping = false;
}

/// Dequeue the head packet under CoDel control. Packets dropped by the
/// control law are appended to `dropped` (callers account them); the returned
/// packet, if any, is the first head that survived.
pub fn codel_dequeue(
    packets: &mut VecDeque<Packet>,
    state: &mut CodelState,
    now: Nanos,
    params: &CodelParams,
    dropped: &mut Vec<Packet>,
) -> Option<Packet> {
    let Some(mut cur) = packets.pop_front() else {
        reset_on_empty(state);
        return None;
    };
    let mut ok = should_drop(&cur, state, now, params);

    if state.dropping {
        if !ok {
            state.dropping = false;
            return Some(cur);
        }
        while now >= state.drop_next {
            state.drop_count += 1;
            dropped.push(cur);
            let Some(next) = packets.pop_front() else {
                reset_on_empty(state);
                return None;
            };
            cur = next;
            ok = should_drop(&cur, state, now, params);
            if !ok {
                state.dropping = false;
                return Some(cur);
            }
            state.drop_next += spacing(params.interval, state.drop_count + 1);
        }
        Some(cur)
    } else if ok {
        // Enter a dropping episode; `cur` is its first drop. A quick restart
        // resumes near the previous drop rate instead of relearning it.
        let recent = now.saturating_sub(state.drop_next) < 16 * params.interval;
        state.drop_count = if recent && state.drop_count > 2 {
            state.drop_count - 2
        } else {
            1
        };
        dropped.push(cur);
        state.dropping = true;
        state.drop_next = now + spacing(params.interval, state.drop_count + 1);
        let next = packets.pop_front();
        if next.is_none() {
            reset_on_empty(state);
        }
        next
    } else {
        Some(cur)
    }
}

/// Parameter-adaptation policy: slow stations get a relaxed target/interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdaptConfig {
    /// Stations with an estimated effective rate strictly below this (bits/s)
    /// use `low_rate` parameters.
    pub low_rate_threshold: f64,
    pub normal: CodelParams,
    pub low_rate: CodelParams,
    /// Minimum spacing between applied parameter changes.
    pub hysteresis: Nanos,
}

impl Default for AdaptConfig {
    fn default() -> Self {
        AdaptConfig {
            low_rate_threshold: 12e6,
            normal: CodelParams::normal(),
            low_rate: CodelParams::low_rate(),
            hysteresis: ms_f64_to_ns(2_000.0),
        }
    }
}

/// Per-station adaptation state: the live parameters shared by all of the
/// station's TIDs, and when they last changed. Starts at the normal-rate
/// parameters (the `CodelParams` default).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ParamAdaptState {
    pub params: CodelParams,
    pub last_change: Option<Nanos>,
}

/// Steer a station's CoDel parameters from its estimated effective rate.
/// A pending change is applied only if at least `hysteresis` has elapsed
/// since the station's last applied change; the returned value is whatever
/// is in force after the call.
pub fn adapt_params(
    state: &mut ParamAdaptState,
    estimated_rate: f64,
    now: Nanos,
    cfg: &AdaptConfig,
) -> CodelParams {
    let wanted = if estimated_rate < cfg.low_rate_threshold {
        cfg.low_rate
    } else {
        cfg.normal
    };
    if wanted != state.params {
        let allowed = match state.last_change {
            None => true,
            Some(at) => now.saturating_sub(at) >= cfg.hysteresis,
        };
        if allowed {
            state.params = wanted;
            state.last_change = Some(now);
        }
    }
    state.params
}
