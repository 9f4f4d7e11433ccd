//! Deficit-based airtime-fair scheduling of stations, plus the A-MPDU
//! aggregate builder.
//!
//! Each station carries one signed airtime deficit per QoS level. Per level
//! the scheduler keeps a new-stations list (freshly active, served once with
//! priority) and an old-stations list rotated deficit-round-robin: a station
//! at the head with non-positive deficit is granted one quantum and moved to
//! the tail, a backlogged station with positive deficit is served. Airtime is
//! charged when transmissions complete — and also for received frames, so a
//! station busy on the uplink is scheduled less often on the downlink.
//! Levels are arbitrated by strict priority (VO > VI > BE > BK).
//!
//! Deficits, quanta and durations are all integer nanoseconds internally.

use std::collections::VecDeque;

use crate::codel::{adapt_params, AdaptConfig, CodelParams, ParamAdaptState};
use crate::fq_mac::FqMac;
use crate::packet::{tid_for, Packet, QosLevel, StationId, TidId, QOS_LEVELS, QOS_PRIORITY_ORDER};
use crate::phy_model::{mpdu_length, t_data_for_bytes, t_overhead, PhyConstants};
use crate::time::{ms_f64_to_ns, us_f64_to_ns, Nanos};

/// Caps on one A-MPDU.
#[derive(Debug, Clone, Copy)]
pub struct AggregateLimits {
    /// Maximum MPDUs per aggregate.
    pub max_ampdu_count: usize,
    /// Maximum on-air A-MPDU bytes.
    pub max_ampdu_bytes: u64,
    /// Maximum transmission duration including fixed overhead. The first
    /// packet is always taken — a minimal frame must remain sendable — so a
    /// slow station can exceed this with a single-MPDU aggregate.
    pub max_txop: Nanos,
}

impl Default for AggregateLimits {
    fn default() -> Self {
        AggregateLimits {
            max_ampdu_count: 64,
            max_ampdu_bytes: 65_535,
            max_txop: ms_f64_to_ns(4.0),
        }
    }
}

/// One A-MPDU headed to (or from) a station: every packet shares the
/// destination station and TID. `size` counts on-air bytes (MPDU framing
/// included); `duration` is the full transmission time with overhead.
#[derive(Debug, Clone, PartialEq)]
pub struct Aggregate {
    pub station: StationId,
    pub tid: TidId,
    pub packets: Vec<Packet>,
    pub duration: Nanos,
    pub size: u64,
}

impl Aggregate {
    pub fn payload_bytes(&self) -> u64 {
        self.packets.iter().map(|p| p.len as u64).sum()
    }
}

/// Everything the builder needs besides the queue itself.
pub struct BuildCtx<'a> {
    pub phy_rate: f64,
    pub limits: &'a AggregateLimits,
    pub codel: &'a CodelParams,
    pub consts: &'a PhyConstants,
}

/// Full on-air duration (preamble, payload, fixed overhead) of `on_air_bytes`
/// at `rate`, in nanoseconds.
pub fn aggregate_duration(on_air_bytes: f64, rate: f64, consts: &PhyConstants) -> Nanos {
    let data_us = t_data_for_bytes(on_air_bytes, rate, consts);
    let overhead_us = t_overhead(rate, consts).expect("rate validated by configuration");
    us_f64_to_ns(data_us + overhead_us)
}

/// Pull packets for one TID out of the flow-queueing structure until the
/// aggregate is full: stop at `max_ampdu_count` packets, or when adding the
/// next packet would exceed `max_ampdu_bytes` or `max_txop`, or when the TID
/// drains. A packet that did not fit waits in `carry` and leads the next
/// aggregate, preserving order. Returns None when there is nothing to send.
#[allow(clippy::too_many_arguments)]
pub fn build_aggregate(
    fq: &mut FqMac,
    carry: &mut Option<Packet>,
    station: StationId,
    tid: TidId,
    now: Nanos,
    ctx: &BuildCtx,
    dropped: &mut Vec<Packet>,
) -> Option<Aggregate> {
    let first = carry
        .take()
        .or_else(|| fq.dequeue(tid, now, ctx.codel, dropped))?;
    let mut on_air = mpdu_length(first.len as f64, ctx.consts);
    let mut packets = vec![first];

    while packets.len() < ctx.limits.max_ampdu_count {
        let Some(next) = fq.dequeue(tid, now, ctx.codel, dropped) else {
            break;
        };
        let grown = on_air + mpdu_length(next.len as f64, ctx.consts);
        if grown > ctx.limits.max_ampdu_bytes as f64
            || aggregate_duration(grown, ctx.phy_rate, ctx.consts) > ctx.limits.max_txop
        {
            *carry = Some(next);
            break;
        }
        on_air = grown;
        packets.push(next);
    }

    Some(Aggregate {
        station,
        tid,
        duration: aggregate_duration(on_air, ctx.phy_rate, ctx.consts),
        size: on_air.round() as u64,
        packets,
    })
}

/// Build an aggregate from a plain FIFO of packets (driver and station uplink
/// queues) under the same caps as `build_aggregate`: first packet
/// unconditional, stop before the byte or duration cap would be exceeded.
/// Peek-based, so no carry slot is needed and order is preserved.
pub fn build_from_deque(
    queue: &mut VecDeque<Packet>,
    station: StationId,
    tid: TidId,
    phy_rate: f64,
    limits: &AggregateLimits,
    consts: &PhyConstants,
) -> Option<Aggregate> {
    let first = queue.pop_front()?;
    let mut on_air = mpdu_length(first.len as f64, consts);
    let mut packets = vec![first];

    while packets.len() < limits.max_ampdu_count {
        let Some(next) = queue.front() else {
            break;
        };
        let grown = on_air + mpdu_length(next.len as f64, consts);
        if grown > limits.max_ampdu_bytes as f64
            || aggregate_duration(grown, phy_rate, consts) > limits.max_txop
        {
            break;
        }
        on_air = grown;
        packets.push(queue.pop_front().expect("peeked non-empty"));
    }

    Some(Aggregate {
        station,
        tid,
        duration: aggregate_duration(on_air, phy_rate, consts),
        size: on_air.round() as u64,
        packets,
    })
}

/// Which side of the air interface a charged duration came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AirtimeDirection {
    Tx,
    Rx,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ListMembership {
    None,
    New,
    Old,
}

/// Per-station scheduling state: four signed airtime deficits (one per QoS
/// level, nanoseconds), the station's live CoDel parameters, and counters.
#[derive(Debug)]
pub struct StationState {
    pub station_id: StationId,
    pub phy_rate: f64,
    deficits: [i64; QOS_LEVELS],
    /// Cumulative quanta granted (activation resets included), per level.
    granted: [i64; QOS_LEVELS],
    /// Cumulative airtime charged (tx + rx), per level.
    charged: [i64; QOS_LEVELS],
    membership: [ListMembership; QOS_LEVELS],
    pub adapt: ParamAdaptState,
    /// Times this station was served straight off the new list.
    pub sparse_rounds_used: u64,
    pub tx_airtime: Nanos,
    pub rx_airtime: Nanos,
}

impl StationState {
    fn new(station_id: StationId, phy_rate: f64) -> Self {
        StationState {
            station_id,
            phy_rate,
            deficits: [0; QOS_LEVELS],
            granted: [0; QOS_LEVELS],
            charged: [0; QOS_LEVELS],
            membership: [ListMembership::None; QOS_LEVELS],
            adapt: ParamAdaptState::default(),
            sparse_rounds_used: 0,
            tx_airtime: 0,
            rx_airtime: 0,
        }
    }

    pub fn deficit(&self, qos: QosLevel) -> i64 {
        self.deficits[qos.index()]
    }

    pub fn granted_ns(&self, qos: QosLevel) -> i64 {
        self.granted[qos.index()]
    }

    pub fn charged_ns(&self, qos: QosLevel) -> i64 {
        self.charged[qos.index()]
    }

    pub fn codel_params(&self) -> CodelParams {
        self.adapt.params
    }
}

#[derive(Debug, Default)]
struct ListPair {
    new: VecDeque<StationId>,
    old: VecDeque<StationId>,
}

#[derive(Debug, Clone, Copy)]
pub struct SchedulerConfig {
    /// Airtime quantum granted per round, nanoseconds.
    pub quantum: Nanos,
    /// Aggregates the hardware queue holds at once.
    pub hw_queue_limit: usize,
    /// Serve freshly active stations once with priority (new list). When
    /// off, activation goes straight to the old-list tail.
    pub sparse_optimization: bool,
}

impl Default for SchedulerConfig {
    fn default() -> Self {
        SchedulerConfig {
            quantum: us_f64_to_ns(1_000.0),
            hw_queue_limit: 2,
            sparse_optimization: true,
        }
    }
}

/// Backlog inspection and aggregate production, supplied by the caller so
/// the scheduler stays independent of how queues are organized.
pub trait AggregateSource {
    fn backlogged(&self, station: StationId, qos: QosLevel) -> bool;
    fn build(&mut self, station: StationId, qos: QosLevel, now: Nanos) -> Option<Aggregate>;
}

/// The per-access-point scheduler: station rotations per QoS level and the
/// hardware queue they feed.
#[derive(Debug)]
pub struct AirtimeScheduler {
    cfg: SchedulerConfig,
    stations: Vec<StationState>,
    lists: [ListPair; QOS_LEVELS],
    hardware_queue: VecDeque<Aggregate>,
}

impl AirtimeScheduler {
    pub fn new(cfg: SchedulerConfig, phy_rates: &[f64]) -> Self {
        assert!(cfg.quantum > 0, "quantum must be positive");
        assert!(cfg.hw_queue_limit >= 1, "hardware queue needs capacity");
        let stations = phy_rates
            .iter()
            .enumerate()
            .map(|(id, &rate)| StationState::new(id as StationId, rate))
            .collect();
        AirtimeScheduler {
            cfg,
            stations,
            lists: Default::default(),
            hardware_queue: VecDeque::new(),
        }
    }

    pub fn config(&self) -> &SchedulerConfig {
        &self.cfg
    }

    pub fn station(&self, station: StationId) -> &StationState {
        &self.stations[station as usize]
    }

    pub fn num_stations(&self) -> usize {
        self.stations.len()
    }

    /// Make a station schedulable on a level. Joining from fully inactive
    /// grants a fresh quantum and (with the sparse optimisation) a one-round
    /// priority slot on the new list; listed stations are left alone.
    pub fn activate(&mut self, station: StationId, qos: QosLevel) {
        let li = qos.index();
        let st = &mut self.stations[station as usize];
        if st.membership[li] != ListMembership::None {
            return;
        }
        let quantum = self.cfg.quantum as i64;
        st.granted[li] += quantum - st.deficits[li];
        st.deficits[li] = quantum;
        if self.cfg.sparse_optimization {
            st.membership[li] = ListMembership::New;
            self.lists[li].new.push_back(station);
        } else {
            st.membership[li] = ListMembership::Old;
            self.lists[li].old.push_back(station);
        }
    }

    /// Charge airtime against a station's per-level deficit. Transmitted and
    /// received frames count alike; the deficit may go arbitrarily negative
    /// and is recovered through quantum grants during scheduling.
    pub fn account_airtime(
        &mut self,
        station: StationId,
        qos: QosLevel,
        duration: Nanos,
        direction: AirtimeDirection,
    ) {
        let li = qos.index();
        let st = &mut self.stations[station as usize];
        st.deficits[li] -= duration as i64;
        st.charged[li] += duration as i64;
        match direction {
            AirtimeDirection::Tx => st.tx_airtime += duration,
            AirtimeDirection::Rx => st.rx_airtime += duration,
        }
    }

    /// Update a station's CoDel parameters from an estimated effective rate,
    /// through the shared hysteresis rule.
    pub fn adapt_station_params(
        &mut self,
        station: StationId,
        estimated_rate: f64,
        now: Nanos,
        cfg: &AdaptConfig,
    ) -> CodelParams {
        adapt_params(
            &mut self.stations[station as usize].adapt,
            estimated_rate,
            now,
            cfg,
        )
    }

    pub fn hardware_len(&self) -> usize {
        self.hardware_queue.len()
    }

    /// Take the next aggregate for transmission.
    pub fn pop_hardware(&mut self) -> Option<Aggregate> {
        self.hardware_queue.pop_front()
    }

    /// Aggregates committed to the hardware queue but not yet transmitted.
    pub fn iter_hardware(&self) -> impl Iterator<Item = &Aggregate> {
        self.hardware_queue.iter()
    }

    /// Fill the hardware queue: called when packets arrive and when a
    /// transmission completes. Returns how many aggregates were submitted.
    /// The hardware queue is left full whenever any station is schedulable.
    pub fn schedule(&mut self, source: &mut dyn AggregateSource, now: Nanos) -> usize {
        let mut submitted = 0;
        while self.hardware_queue.len() < self.cfg.hw_queue_limit {
            match self.schedule_one(source, now) {
                Some(agg) => {
                    self.hardware_queue.push_back(agg);
                    submitted += 1;
                }
                None => break,
            }
        }
        submitted
    }

    /// One scheduling decision: pick the highest-priority level with listed
    /// stations, rotate its lists per the deficit rule, and build one
    /// aggregate for the first servable station.
    fn schedule_one(&mut self, source: &mut dyn AggregateSource, now: Nanos) -> Option<Aggregate> {
        'levels: for &qos in QOS_PRIORITY_ORDER.iter() {
            let li = qos.index();
            loop {
                let (station, from_new) = {
                    let lp = &self.lists[li];
                    if let Some(&s) = lp.new.front() {
                        (s, true)
                    } else if let Some(&s) = lp.old.front() {
                        (s, false)
                    } else {
                        continue 'levels;
                    }
                };
                let si = station as usize;

                if self.stations[si].deficits[li] <= 0 {
                    let quantum = self.cfg.quantum as i64;
                    self.stations[si].deficits[li] += quantum;
                    self.stations[si].granted[li] += quantum;
                    self.rotate_to_old(li, station, from_new);
                    continue;
                }

                if !source.backlogged(station, qos) {
                    self.delist(li, station, from_new);
                    continue;
                }

                match source.build(station, qos, now) {
                    Some(agg) => {
                        if from_new {
                            // sparse priority is one round only
                            self.rotate_to_old(li, station, true);
                            self.stations[si].sparse_rounds_used += 1;
                        }
                        return Some(agg);
                    }
                    // claimed backlogged but produced nothing: treat as drained
                    None => self.delist(li, station, from_new),
                }
            }
        }
        None
    }

    /// Move the head station of a level to the old-list tail.
    fn rotate_to_old(&mut self, li: usize, station: StationId, from_new: bool) {
        let lp = &mut self.lists[li];
        if from_new {
            lp.new.pop_front();
        } else {
            lp.old.pop_front();
        }
        lp.old.push_back(station);
        self.stations[station as usize].membership[li] = ListMembership::Old;
    }

    /// A drained station leaves the rotation: straight out from old, via the
    /// old-list tail from new (so a one-packet burst cannot re-enter the new
    /// list immediately and monopolize priority).
    fn delist(&mut self, li: usize, station: StationId, from_new: bool) {
        let lp = &mut self.lists[li];
        if from_new {
            lp.new.pop_front();
            lp.old.push_back(station);
            self.stations[station as usize].membership[li] = ListMembership::Old;
        } else {
            lp.old.pop_front();
            self.stations[station as usize].membership[li] = ListMembership::None;
        }
    }

    /// Convenience for the simulator: the TID a (station, level) pair maps to.
    pub fn tid_of(&self, station: StationId, qos: QosLevel) -> TidId {
        tid_for(station, qos)
    }
}
