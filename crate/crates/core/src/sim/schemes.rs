//! The four access-point queueing schemes under comparison.
//!
//! `fifo` and `fq_codel` sit above small per-TID driver queues that the upper
//! queue drains into, reproducing the driver lockout: the fifo drain blocks
//! head-of-line when the head packet's driver queue is full, and the fq_codel
//! drain stops entirely while any driver queue is full (the driver signals
//! "stop" without saying which destination is short of space). A slow station
//! therefore occupies the driver space while fast stations starve, which is
//! exactly the dynamic the per-TID schemes eliminate.
//!
//! `fq_mac` queues per TID with flow queueing and CoDel directly at the
//! aggregation layer. `airtime_fair_fq` adds the deficit-based airtime
//! scheduler and a two-deep hardware queue.

use std::collections::VecDeque;

use crate::airtime::{
    build_aggregate, build_from_deque, Aggregate, AggregateLimits, AggregateSource,
    AirtimeDirection, AirtimeScheduler, BuildCtx,
};
use crate::codel::{adapt_params, CodelParams, ParamAdaptState};
use crate::fq_mac::FqMac;
use crate::packet::{qos_of_tid, tid_for, Packet, QosLevel, StationId, QOS_LEVELS};
use crate::phy_model::{base_rate, PhyConstants};
use crate::scenario::{Scenario, Scheme};
use crate::time::Nanos;

use super::{DropKind, EffectSink};

/// Per-station CoDel parameters: adapted once from the static PHY rate when
/// adaptation is enabled (the estimate is the one-packet effective rate),
/// otherwise the configured baseline everywhere.
fn station_codel_params(scenario: &Scenario, consts: &PhyConstants) -> Vec<CodelParams> {
    let adapt_cfg = scenario.adapt_config();
    scenario
        .stations
        .iter()
        .map(|st| {
            if scenario.codel.adaptation {
                let estimate = base_rate(1.0, 1500.0, st.phy_rate_mbps * 1e6, consts)
                    .expect("phy rate validated positive");
                let mut state = ParamAdaptState::default();
                adapt_params(&mut state, estimate, 0, &adapt_cfg)
            } else {
                scenario.codel_params()
            }
        })
        .collect()
}

// One instance exists per run and lives for the whole run, so the size
// spread between variants is irrelevant; boxing would only add indirection.
#[allow(clippy::large_enum_variant)]
pub(crate) enum SchemeImpl {
    Fifo(FifoScheme),
    FqCodel(FqCodelScheme),
    FqMac(FqMacScheme),
    Airtime(AirtimeScheme),
}

impl SchemeImpl {
    pub fn new(scenario: &Scenario, consts: PhyConstants) -> SchemeImpl {
        match scenario.scheme {
            Scheme::Fifo => SchemeImpl::Fifo(FifoScheme::new(scenario, consts)),
            Scheme::FqCodel => SchemeImpl::FqCodel(FqCodelScheme::new(scenario, consts)),
            Scheme::FqMac => SchemeImpl::FqMac(FqMacScheme::new(scenario, consts)),
            Scheme::AirtimeFairFq => SchemeImpl::Airtime(AirtimeScheme::new(scenario, consts)),
        }
    }

    /// Accept a downlink packet (queue or drop into the sink).
    pub fn enqueue(&mut self, pkt: Packet, now: Nanos, sink: &mut EffectSink) {
        match self {
            SchemeImpl::Fifo(s) => s.enqueue(pkt, now, sink),
            SchemeImpl::FqCodel(s) => s.enqueue(pkt, now, sink),
            SchemeImpl::FqMac(s) => s.enqueue(pkt, now, sink),
            SchemeImpl::Airtime(s) => s.enqueue(pkt, now, sink),
        }
    }

    /// Produce the next downlink transmission, if any.
    pub fn next_txop(&mut self, now: Nanos, sink: &mut EffectSink) -> Option<Aggregate> {
        match self {
            SchemeImpl::Fifo(s) => s.next_txop(now, sink),
            SchemeImpl::FqCodel(s) => s.next_txop(now, sink),
            SchemeImpl::FqMac(s) => s.next_txop(now, sink),
            SchemeImpl::Airtime(s) => s.next_txop(now, sink),
        }
    }

    /// A downlink transmission finished occupying the medium.
    pub fn on_complete(&mut self, agg: &Aggregate, now: Nanos, sink: &mut EffectSink) {
        match self {
            SchemeImpl::Airtime(s) => s.on_complete(agg, now, sink),
            SchemeImpl::Fifo(_) | SchemeImpl::FqCodel(_) | SchemeImpl::FqMac(_) => {}
        }
    }

    /// An uplink transmission from `station` finished occupying the medium.
    pub fn on_rx(&mut self, station: StationId, duration: Nanos) {
        if let SchemeImpl::Airtime(s) = self {
            s.on_rx(station, duration);
        }
    }

    /// Every packet still held by the scheme (for end-of-run accounting).
    pub fn residual(&self, out: &mut Vec<Packet>) {
        match self {
            SchemeImpl::Fifo(s) => s.residual(out),
            SchemeImpl::FqCodel(s) => s.residual(out),
            SchemeImpl::FqMac(s) => s.residual(out),
            SchemeImpl::Airtime(s) => s.residual(out),
        }
    }
}

/// Shared tail-drop FIFO above per-TID driver queues.
pub(crate) struct FifoScheme {
    shared: VecDeque<Packet>,
    cap: usize,
    driver: Vec<VecDeque<Packet>>,
    driver_cap: usize,
    cursor: usize,
    rates: Vec<f64>,
    limits: AggregateLimits,
    consts: PhyConstants,
}

impl FifoScheme {
    fn new(scenario: &Scenario, consts: PhyConstants) -> Self {
        let n = scenario.stations.len();
        FifoScheme {
            shared: VecDeque::new(),
            cap: scenario.queues.fifo_cap,
            driver: (0..n).map(|_| VecDeque::new()).collect(),
            driver_cap: scenario.queues.driver_queue_cap,
            cursor: 0,
            rates: scenario.phy_rates(),
            limits: scenario.aggregate_limits(),
            consts,
        }
    }

    /// Move packets to the driver in arrival order; block head-of-line when
    /// the head's destination queue is full.
    fn drain(&mut self) {
        while let Some(head) = self.shared.front() {
            let q = &mut self.driver[head.station as usize];
            if q.len() >= self.driver_cap {
                break;
            }
            q.push_back(self.shared.pop_front().expect("peeked non-empty"));
        }
    }

    fn enqueue(&mut self, mut pkt: Packet, now: Nanos, sink: &mut EffectSink) {
        if self.shared.len() >= self.cap {
            sink.drop(pkt, DropKind::Overflow);
            return;
        }
        pkt.enqueued = now;
        self.shared.push_back(pkt);
        self.drain();
    }

    fn next_txop(&mut self, _now: Nanos, _sink: &mut EffectSink) -> Option<Aggregate> {
        self.drain();
        let n = self.driver.len();
        for k in 0..n {
            let s = (self.cursor + k) % n;
            if self.driver[s].is_empty() {
                continue;
            }
            let agg = build_from_deque(
                &mut self.driver[s],
                s as StationId,
                tid_for(s as StationId, QosLevel::BestEffort),
                self.rates[s],
                &self.limits,
                &self.consts,
            );
            self.cursor = (s + 1) % n;
            self.drain();
            return agg;
        }
        None
    }

    fn residual(&self, out: &mut Vec<Packet>) {
        out.extend(self.shared.iter().copied());
        for q in &self.driver {
            out.extend(q.iter().copied());
        }
    }
}

/// One flow-queueing + CoDel instance (qdisc style) above the same driver
/// queues as `fifo`.
pub(crate) struct FqCodelScheme {
    qdisc: FqMac,
    params: CodelParams,
    driver: Vec<VecDeque<Packet>>,
    driver_cap: usize,
    cursor: usize,
    rates: Vec<f64>,
    limits: AggregateLimits,
    consts: PhyConstants,
    codel_scratch: Vec<Packet>,
}

impl FqCodelScheme {
    fn new(scenario: &Scenario, consts: PhyConstants) -> Self {
        let n = scenario.stations.len();
        FqCodelScheme {
            qdisc: FqMac::new(scenario.qdisc_config(), 1),
            params: scenario.codel_params(),
            driver: (0..n).map(|_| VecDeque::new()).collect(),
            driver_cap: scenario.queues.driver_queue_cap,
            cursor: 0,
            rates: scenario.phy_rates(),
            limits: scenario.aggregate_limits(),
            consts,
        codel_scratch: Vec::new(),
        }
    }

    fn any_driver_full(&self) -> bool {
        self.driver.iter().any(|q| q.len() >= self.driver_cap)
    }

    /// Work-conserving drain, stopped entirely while any driver queue is
    /// full — the stop signal is device-wide, not per destination.
    fn drain(&mut self, now: Nanos, sink: &mut EffectSink) {
        loop {
            if self.any_driver_full() {
                break;
            }
            self.codel_scratch.clear();
            let got = self.qdisc.dequeue(0, now, &self.params, &mut self.codel_scratch);
            for p in self.codel_scratch.drain(..) {
                sink.drop(p, DropKind::Codel);
            }
            match got {
                Some(p) => self.driver[p.station as usize].push_back(p),
                None => break,
            }
        }
    }

    fn enqueue(&mut self, pkt: Packet, now: Nanos, sink: &mut EffectSink) {
        let report = self.qdisc.enqueue(pkt, 0, now);
        if let Some(victim) = report.dropped {
            sink.drop(victim, DropKind::Overflow);
        }
        self.drain(now, sink);
    }

    fn next_txop(&mut self, now: Nanos, sink: &mut EffectSink) -> Option<Aggregate> {
        self.drain(now, sink);
        let n = self.driver.len();
        for k in 0..n {
            let s = (self.cursor + k) % n;
            if self.driver[s].is_empty() {
                continue;
            }
            let agg = build_from_deque(
                &mut self.driver[s],
                s as StationId,
                tid_for(s as StationId, QosLevel::BestEffort),
                self.rates[s],
                &self.limits,
                &self.consts,
            );
            self.cursor = (s + 1) % n;
            self.drain(now, sink);
            return agg;
        }
        None
    }

    fn residual(&self, out: &mut Vec<Packet>) {
        out.extend(self.qdisc.iter_packets().copied());
        for q in &self.driver {
            out.extend(q.iter().copied());
        }
    }
}

/// Per-TID flow queueing with CoDel at the aggregation layer; aggregates are
/// built straight from the flow queues, station by station.
pub(crate) struct FqMacScheme {
    fq: FqMac,
    carries: Vec<Option<Packet>>,
    params: Vec<CodelParams>,
    cursor: usize,
    rates: Vec<f64>,
    limits: AggregateLimits,
    consts: PhyConstants,
    codel_scratch: Vec<Packet>,
}

impl FqMacScheme {
    fn new(scenario: &Scenario, consts: PhyConstants) -> Self {
        let n = scenario.stations.len();
        let num_tids = n * QOS_LEVELS;
        FqMacScheme {
            fq: FqMac::new(scenario.fq_config(), num_tids),
            carries: vec![None; num_tids],
            params: station_codel_params(scenario, &consts),
            cursor: 0,
            rates: scenario.phy_rates(),
            limits: scenario.aggregate_limits(),
            consts,
            codel_scratch: Vec::new(),
        }
    }

    fn enqueue(&mut self, pkt: Packet, now: Nanos, sink: &mut EffectSink) {
        let report = self.fq.enqueue(pkt, pkt.tid, now);
        if let Some(victim) = report.dropped {
            sink.drop(victim, DropKind::Overflow);
        }
    }

    fn next_txop(&mut self, now: Nanos, sink: &mut EffectSink) -> Option<Aggregate> {
        let n = self.rates.len();
        for k in 0..n {
            let s = (self.cursor + k) % n;
            let tid = tid_for(s as StationId, QosLevel::BestEffort);
            if self.fq.tid_backlog(tid) == 0 && self.carries[tid as usize].is_none() {
                continue;
            }
            let ctx = BuildCtx {
                phy_rate: self.rates[s],
                limits: &self.limits,
                codel: &self.params[s],
                consts: &self.consts,
            };
            self.codel_scratch.clear();
            let agg = build_aggregate(
                &mut self.fq,
                &mut self.carries[tid as usize],
                s as StationId,
                tid,
                now,
                &ctx,
                &mut self.codel_scratch,
            );
            for p in self.codel_scratch.drain(..) {
                sink.drop(p, DropKind::Codel);
            }
            if let Some(agg) = agg {
                self.cursor = (s + 1) % n;
                return Some(agg);
            }
        }
        None
    }

    fn residual(&self, out: &mut Vec<Packet>) {
        out.extend(self.fq.iter_packets().copied());
        out.extend(self.carries.iter().flatten().copied());
    }
}

/// The flow-queue pool plus per-TID carry slots, exposed to the airtime
/// scheduler as its aggregate source.
pub(crate) struct FqSource {
    fq: FqMac,
    carries: Vec<Option<Packet>>,
    params: Vec<CodelParams>,
    rates: Vec<f64>,
    limits: AggregateLimits,
    consts: PhyConstants,
    codel_dropped: Vec<Packet>,
}

impl AggregateSource for FqSource {
    fn backlogged(&self, station: StationId, qos: QosLevel) -> bool {
        let tid = tid_for(station, qos);
        self.fq.tid_backlog(tid) > 0 || self.carries[tid as usize].is_some()
    }

    fn build(&mut self, station: StationId, qos: QosLevel, now: Nanos) -> Option<Aggregate> {
        let tid = tid_for(station, qos);
        let ctx = BuildCtx {
            phy_rate: self.rates[station as usize],
            limits: &self.limits,
            codel: &self.params[station as usize],
            consts: &self.consts,
        };
        build_aggregate(
            &mut self.fq,
            &mut self.carries[tid as usize],
            station,
            tid,
            now,
            &ctx,
            &mut self.codel_dropped,
        )
    }
}

/// Flow queueing plus the deficit-based airtime scheduler and its two-deep
/// hardware queue; uplink receptions are charged to the sending station.
pub(crate) struct AirtimeScheme {
    sched: AirtimeScheduler,
    src: FqSource,
}

impl AirtimeScheme {
    fn new(scenario: &Scenario, consts: PhyConstants) -> Self {
        let rates = scenario.phy_rates();
        let n = rates.len();
        let num_tids = n * QOS_LEVELS;
        let mut sched = AirtimeScheduler::new(scenario.scheduler_config(), &rates);
        let adapt_cfg = scenario.adapt_config();
        let params: Vec<CodelParams> = (0..n)
            .map(|s| {
                if scenario.codel.adaptation {
                    let estimate = base_rate(1.0, 1500.0, rates[s], &consts)
                        .expect("phy rate validated positive");
                    sched.adapt_station_params(s as StationId, estimate, 0, &adapt_cfg)
                } else {
                    scenario.codel_params()
                }
            })
            .collect();
        AirtimeScheme {
            sched,
            src: FqSource {
                fq: FqMac::new(scenario.fq_config(), num_tids),
                carries: vec![None; num_tids],
                params,
                rates,
                limits: scenario.aggregate_limits(),
                consts,
                codel_dropped: Vec::new(),
            },
        }
    }

    fn flush_codel_drops(&mut self, sink: &mut EffectSink) {
        for p in self.src.codel_dropped.drain(..) {
            sink.drop(p, DropKind::Codel);
        }
    }

    fn enqueue(&mut self, pkt: Packet, now: Nanos, sink: &mut EffectSink) {
        let station = pkt.station;
        let qos = qos_of_tid(pkt.tid);
        let was_empty = !self.src.backlogged(station, qos);
        let report = self.src.fq.enqueue(pkt, pkt.tid, now);
        if let Some(victim) = report.dropped {
            sink.drop(victim, DropKind::Overflow);
        }
        if was_empty && self.src.backlogged(station, qos) {
            self.sched.activate(station, qos);
        }
        self.sched.schedule(&mut self.src, now);
        self.flush_codel_drops(sink);
    }

    fn next_txop(&mut self, now: Nanos, sink: &mut EffectSink) -> Option<Aggregate> {
        self.sched.schedule(&mut self.src, now);
        let agg = self.sched.pop_hardware();
        // Keep the hardware queue full while this aggregate is in the air.
        self.sched.schedule(&mut self.src, now);
        self.flush_codel_drops(sink);
        agg
    }

    fn on_complete(&mut self, agg: &Aggregate, now: Nanos, sink: &mut EffectSink) {
        self.sched
            .account_airtime(agg.station, qos_of_tid(agg.tid), agg.duration, AirtimeDirection::Tx);
        self.sched.schedule(&mut self.src, now);
        self.flush_codel_drops(sink);
    }

    fn on_rx(&mut self, station: StationId, duration: Nanos) {
        self.sched
            .account_airtime(station, QosLevel::BestEffort, duration, AirtimeDirection::Rx);
    }

    fn residual(&self, out: &mut Vec<Packet>) {
        out.extend(self.src.fq.iter_packets().copied());
        out.extend(self.src.carries.iter().flatten().copied());
        for agg in self.sched.iter_hardware() {
            out.extend(agg.packets.iter().copied());
        }
    }
}
