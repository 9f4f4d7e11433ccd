//! Discrete-event simulation of one access point and its stations.
//!
//! The medium is a single shared resource: at most one transmission — downlink
//! or uplink — is in the air at a time. When it frees, the ready transmitters
//! (the access point plus every station with uplink backlog) are offered the
//! next transmit opportunity round-robin. Downlink queueing goes through the
//! configured scheme; uplink queueing is a plain FIFO per station, aggregated
//! under the same caps as downlink.
//!
//! Everything is deterministic for a fixed scenario (seed included): time is
//! integer nanoseconds, ties are broken by event creation order, and all
//! randomness comes from per-flow counter-seeded generators.

mod schemes;
mod traffic;

pub mod metrics;
pub mod trace;

use std::cmp::Reverse;
use std::collections::{BinaryHeap, VecDeque};

use crate::airtime::{build_from_deque, Aggregate, AggregateLimits};
use crate::packet::{tid_for, Packet, QosLevel, StationId};
use crate::phy_model::{PhyConstants, DEFAULT_CONSTANTS};
use crate::scenario::{Direction, FlowKind, Scenario, ScenarioError};
use crate::time::{ms_f64_to_ns, Nanos};

use metrics::{Collector, MetricsReport};
use schemes::SchemeImpl;
use trace::{TraceEvent, TraceSink};
use traffic::FlowRuntime;

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("trace write failed: {0}")]
    Trace(#[from] std::io::Error),
}

impl SimError {
    /// Stable machine-parsable category for exit reporting.
    pub fn category(&self) -> &'static str {
        match self {
            SimError::Scenario(e) => e.category(),
            SimError::Trace(_) => "io",
        }
    }
}

/// Why a packet was dropped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DropKind {
    /// Queue or pool at capacity (shared FIFO tail, global flow-queue limit,
    /// uplink FIFO tail).
    Overflow,
    /// Dropped by CoDel at dequeue.
    Codel,
}

impl DropKind {
    pub fn name(self) -> &'static str {
        match self {
            DropKind::Overflow => "overflow",
            DropKind::Codel => "codel",
        }
    }
}

/// Drops surfaced by the queueing structures, collected by the engine after
/// every call into a scheme (for counting, tracing, and window recycling).
#[derive(Debug, Default)]
pub(crate) struct EffectSink {
    drops: Vec<(Packet, DropKind)>,
}

impl EffectSink {
    fn drop(&mut self, pkt: Packet, kind: DropKind) {
        self.drops.push((pkt, kind));
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum EvKind {
    /// An open-loop generator emits its next packet.
    Arrival { flow: u32 },
    /// A closed-loop window slot frees: the flow may emit one packet.
    Token { flow: u32 },
    /// The transmission in the air completes.
    TxDone,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct Ev {
    t: Nanos,
    /// Creation order, breaking ties at equal timestamps deterministically.
    seq: u64,
    kind: EvKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum TxDir {
    Down,
    Up,
}

#[derive(Debug)]
struct InFlight {
    agg: Aggregate,
    dir: TxDir,
    started: Nanos,
}

/// Run a scenario to completion and report its metrics.
pub fn run(scenario: &Scenario) -> Result<MetricsReport, SimError> {
    run_inner(scenario, None)
}

/// As [`run`], also writing one trace record per packet event.
pub fn run_with_trace(
    scenario: &Scenario,
    sink: &mut dyn TraceSink,
) -> Result<MetricsReport, SimError> {
    run_inner(scenario, Some(sink))
}

fn run_inner<'a>(
    scenario: &'a Scenario,
    trace: Option<&'a mut dyn TraceSink>,
) -> Result<MetricsReport, SimError> {
    scenario.validate()?;
    let consts = DEFAULT_CONSTANTS;
    let duration = scenario.duration();

    let mut flows = Vec::new();
    for station in &scenario.stations {
        for flow_cfg in &station.flows {
            let idx = flows.len() as u32;
            flows.push(FlowRuntime::new(
                idx,
                station.id,
                flow_cfg,
                scenario.seed,
                duration,
            ));
        }
    }

    let num_stations = scenario.stations.len();
    let engine = Engine {
        scenario,
        collect: Collector::new(num_stations, flows.len()),
        flows,
        ap: SchemeImpl::new(scenario, consts),
        uplinks: (0..num_stations).map(|_| VecDeque::new()).collect(),
        uplink_cap: scenario.queues.fifo_cap,
        rates: scenario.phy_rates(),
        limits: scenario.aggregate_limits(),
        consts,
        base_rtt: ms_f64_to_ns(scenario.tcp.base_rtt_ms),
        ack_bytes: scenario.tcp.ack_bytes,
        duration,
        inflight: None,
        rr_cursor: 0,
        sink: EffectSink::default(),
        heap: BinaryHeap::new(),
        ev_seq: 0,
        trace,
    };
    engine.run()
}

struct Engine<'a> {
    scenario: &'a Scenario,
    flows: Vec<FlowRuntime>,
    ap: SchemeImpl,
    /// Per-station uplink FIFO (packets waiting at the station side).
    uplinks: Vec<VecDeque<Packet>>,
    uplink_cap: usize,
    rates: Vec<f64>,
    limits: AggregateLimits,
    consts: PhyConstants,
    base_rtt: Nanos,
    ack_bytes: u32,
    duration: Nanos,
    inflight: Option<InFlight>,
    /// Round-robin cursor over transmitters: 0 is the access point,
    /// 1 + s is station s.
    rr_cursor: usize,
    sink: EffectSink,
    collect: Collector,
    heap: BinaryHeap<Reverse<Ev>>,
    ev_seq: u64,
    trace: Option<&'a mut dyn TraceSink>,
}

impl Engine<'_> {
    fn run(mut self) -> Result<MetricsReport, SimError> {
        self.init_events();
        while let Some(&Reverse(ev)) = self.heap.peek() {
            if ev.t > self.duration {
                break;
            }
            self.heap.pop();
            match ev.kind {
                EvKind::Arrival { flow } => self.on_arrival(flow as usize, ev.t)?,
                EvKind::Token { flow } => self.on_token(flow as usize, ev.t)?,
                EvKind::TxDone => self.on_tx_done(ev.t)?,
            }
            self.process_sink(ev.t)?;
            self.try_start(ev.t)?;
        }
        self.finish()
    }

    fn push(&mut self, t: Nanos, kind: EvKind) {
        self.ev_seq += 1;
        self.heap.push(Reverse(Ev {
            t,
            seq: self.ev_seq,
            kind,
        }));
    }

    fn init_events(&mut self) {
        for i in 0..self.flows.len() {
            let flow = i as u32;
            match self.flows[i].kind {
                FlowKind::UdpCbr | FlowKind::Ping => {
                    let t = self.flows[i].initial_arrival();
                    if t <= self.flows[i].stop {
                        self.push(t, EvKind::Arrival { flow });
                    }
                }
                FlowKind::TcpLike => {
                    for t in self.flows[i].initial_tokens() {
                        if t <= self.flows[i].stop {
                            self.push(t, EvKind::Token { flow });
                        }
                    }
                }
            }
        }
    }

    fn trace_ev(
        &mut self,
        t: Nanos,
        event: &str,
        pkt: &Packet,
        detail: Option<&str>,
    ) -> Result<(), SimError> {
        if let Some(tr) = self.trace.as_deref_mut() {
            tr.record(&TraceEvent {
                t_ns: t,
                event,
                station: pkt.station,
                flow: pkt.flow_idx,
                seq: pkt.seq,
                len: pkt.len,
                detail,
            })?;
        }
        Ok(())
    }

    // --- packet sources ---------------------------------------------------

    fn on_arrival(&mut self, flow: usize, now: Nanos) -> Result<(), SimError> {
        let next = self.flows[flow].next_arrival(now);
        if next <= self.flows[flow].stop {
            self.push(next, EvKind::Arrival { flow: flow as u32 });
        }
        let pkt = self.flows[flow].make_data_packet(now);
        self.route_new(pkt, now)
    }

    fn on_token(&mut self, flow: usize, now: Nanos) -> Result<(), SimError> {
        if now > self.flows[flow].stop {
            return Ok(());
        }
        let pkt = self.flows[flow].make_data_packet(now);
        self.route_new(pkt, now)
    }

    /// A freshly generated data packet enters its source-side queue.
    fn route_new(&mut self, pkt: Packet, now: Nanos) -> Result<(), SimError> {
        match self.flows[pkt.flow_idx as usize].direction {
            Direction::Down => self.inject_at_ap(pkt, now),
            Direction::Up => self.inject_uplink(pkt, now),
        }
    }

    fn inject_at_ap(&mut self, pkt: Packet, now: Nanos) -> Result<(), SimError> {
        self.collect.generated(&pkt);
        self.trace_ev(now, "enqueue", &pkt, None)?;
        self.ap.enqueue(pkt, now, &mut self.sink);
        Ok(())
    }

    fn inject_uplink(&mut self, pkt: Packet, now: Nanos) -> Result<(), SimError> {
        self.collect.generated(&pkt);
        self.trace_ev(now, "enqueue", &pkt, None)?;
        let q = &mut self.uplinks[pkt.station as usize];
        if q.len() >= self.uplink_cap {
            self.sink.drop(pkt, DropKind::Overflow);
        } else {
            q.push_back(pkt);
        }
        Ok(())
    }

    /// Count, trace, and (for closed-loop flows) recycle the window slot of
    /// every drop the queueing structures surfaced.
    fn process_sink(&mut self, now: Nanos) -> Result<(), SimError> {
        if self.sink.drops.is_empty() {
            return Ok(());
        }
        let drops = std::mem::take(&mut self.sink.drops);
        for (pkt, kind) in drops {
            self.collect.dropped(&pkt, kind);
            self.trace_ev(now, "drop", &pkt, Some(kind.name()))?;
            if self.flows[pkt.flow_idx as usize].kind == FlowKind::TcpLike {
                self.push(now + self.base_rtt, EvKind::Token { flow: pkt.flow_idx });
            }
        }
        Ok(())
    }

    // --- the medium ---------------------------------------------------------

    /// If the medium is idle, offer the next transmit opportunity round-robin
    /// over the access point and the stations with uplink backlog.
    fn try_start(&mut self, now: Nanos) -> Result<(), SimError> {
        if self.inflight.is_some() {
            return Ok(());
        }
        let total = self.uplinks.len() + 1;
        for k in 0..total {
            let cand = (self.rr_cursor + k) % total;
            if cand == 0 {
                let agg = self.ap.next_txop(now, &mut self.sink);
                self.process_sink(now)?;
                if let Some(agg) = agg {
                    self.rr_cursor = 1 % total;
                    return self.begin(agg, TxDir::Down, now);
                }
            } else {
                let s = cand - 1;
                if self.uplinks[s].is_empty() {
                    continue;
                }
                let agg = build_from_deque(
                    &mut self.uplinks[s],
                    s as StationId,
                    tid_for(s as StationId, QosLevel::BestEffort),
                    self.rates[s],
                    &self.limits,
                    &self.consts,
                )
                .expect("uplink queue checked non-empty");
                self.rr_cursor = (cand + 1) % total;
                return self.begin(agg, TxDir::Up, now);
            }
        }
        Ok(())
    }

    fn begin(&mut self, agg: Aggregate, dir: TxDir, now: Nanos) -> Result<(), SimError> {
        for pkt in &agg.packets {
            let ev = TraceEvent {
                t_ns: now,
                event: "dequeue",
                station: pkt.station,
                flow: pkt.flow_idx,
                seq: pkt.seq,
                len: pkt.len,
                detail: None,
            };
            if let Some(tr) = self.trace.as_deref_mut() {
                tr.record(&ev)?;
            }
        }
        self.push(now + agg.duration, EvKind::TxDone);
        self.inflight = Some(InFlight { agg, dir, started: now });
        Ok(())
    }

    fn on_tx_done(&mut self, now: Nanos) -> Result<(), SimError> {
        let InFlight { agg, dir, started } = self
            .inflight
            .take()
            .expect("transmission completion without a transmission in the air");
        debug_assert_eq!(started + agg.duration, now);
        self.collect.busy(agg.station, agg.duration);
        match dir {
            TxDir::Down => {
                self.collect.down_aggregate(agg.station, agg.packets.len());
                self.ap.on_complete(&agg, now, &mut self.sink);
                for pkt in &agg.packets {
                    self.trace_ev(now, "deliver", pkt, None)?;
                    self.deliver_down(*pkt, now)?;
                }
            }
            TxDir::Up => {
                self.ap.on_rx(agg.station, agg.duration);
                for pkt in &agg.packets {
                    self.trace_ev(now, "deliver", pkt, None)?;
                    self.arrive_up(*pkt, now)?;
                }
            }
        }
        Ok(())
    }

    // --- delivery ----------------------------------------------------------

    /// A downlink packet reached its station.
    fn deliver_down(&mut self, pkt: Packet, now: Nanos) -> Result<(), SimError> {
        let idx = pkt.flow_idx as usize;
        let (kind, flow_dir) = (self.flows[idx].kind, self.flows[idx].direction);
        match (kind, flow_dir) {
            (FlowKind::UdpCbr, Direction::Down) => self.collect.data_delivered(&pkt, now),
            (FlowKind::TcpLike, Direction::Down) => {
                self.collect.data_delivered(&pkt, now);
                let ack = self.flows[idx].make_packet(now, self.ack_bytes, now);
                self.inject_uplink(ack, now)?;
            }
            (FlowKind::TcpLike, Direction::Up) => {
                // Ack back at the sending station: one window slot frees after
                // the remaining path delay.
                self.collect.delivered_plain(&pkt);
                self.push(now + self.base_rtt, EvKind::Token { flow: pkt.flow_idx });
            }
            (FlowKind::Ping, Direction::Down) => {
                self.collect.delivered_plain(&pkt);
                let reply = self.flows[idx].make_packet(now, pkt.len, pkt.created);
                self.inject_uplink(reply, now)?;
            }
            (FlowKind::UdpCbr | FlowKind::Ping, Direction::Up) => {
                unreachable!("uplink-flow data delivered downlink")
            }
        }
        Ok(())
    }

    /// An uplink packet reached the access point.
    fn arrive_up(&mut self, pkt: Packet, now: Nanos) -> Result<(), SimError> {
        let idx = pkt.flow_idx as usize;
        let (kind, flow_dir) = (self.flows[idx].kind, self.flows[idx].direction);
        match (kind, flow_dir) {
            (FlowKind::UdpCbr, Direction::Up) => self.collect.data_delivered(&pkt, now),
            (FlowKind::TcpLike, Direction::Up) => {
                self.collect.data_delivered(&pkt, now);
                let ack = self.flows[idx].make_packet(now, self.ack_bytes, now);
                self.inject_at_ap(ack, now)?;
            }
            (FlowKind::TcpLike, Direction::Down) => {
                // Ack back at the access point: one window slot frees after
                // the remaining path delay.
                self.collect.delivered_plain(&pkt);
                self.push(now + self.base_rtt, EvKind::Token { flow: pkt.flow_idx });
            }
            (FlowKind::Ping, Direction::Down) => {
                self.collect.delivered_plain(&pkt);
                self.collect
                    .ping_sample(pkt.station, now.saturating_sub(pkt.created));
            }
            (FlowKind::UdpCbr | FlowKind::Ping, _) => {
                unreachable!("downlink-flow data arrived uplink")
            }
        }
        Ok(())
    }

    // --- end of run ----------------------------------------------------------

    fn finish(mut self) -> Result<MetricsReport, SimError> {
        let mut residual: Vec<Packet> = Vec::new();
        if let Some(fl) = self.inflight.take() {
            // The run ends mid-transmission: the medium was busy from the
            // start of the transmission to the end of the run, and the
            // packets never arrived.
            let partial = self.duration.saturating_sub(fl.started);
            if partial > 0 {
                self.collect.busy(fl.agg.station, partial);
            }
            residual.extend(fl.agg.packets.iter().copied());
        }
        self.ap.residual(&mut residual);
        for q in &self.uplinks {
            residual.extend(q.iter().copied());
        }
        Ok(self.collect.finish(self.scenario, &residual))
    }
}
