//! Run metrics: per-station throughput, airtime shares, aggregation and
//! latency statistics, Jain's fairness index, and the packet-conservation
//! bookkeeping behind them.

use serde::{Deserialize, Serialize};

use crate::packet::Packet;
use crate::scenario::{Scenario, Scheme};
use crate::time::{ns_to_ms_f64, ns_to_secs_f64, Nanos};

use super::DropKind;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum MetricsError {
    #[error("fairness index requires at least one value")]
    Empty,
    #[error("fairness index requires finite non-negative values")]
    Invalid,
    #[error("fairness index is undefined for all-zero values")]
    AllZero,
}

/// Jain's fairness index: (Σx)² / (n·Σx²). 1.0 means perfectly equal.
pub fn jain_index(values: &[f64]) -> Result<f64, MetricsError> {
    if values.is_empty() {
        return Err(MetricsError::Empty);
    }
    if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(MetricsError::Invalid);
    }
    let sum: f64 = values.iter().sum();
    let sum_sq: f64 = values.iter().map(|v| v * v).sum();
    if sum_sq == 0.0 {
        return Err(MetricsError::AllZero);
    }
    Ok(sum * sum / (values.len() as f64 * sum_sq))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Percentiles {
    pub p50_ms: f64,
    pub p90_ms: f64,
    pub p99_ms: f64,
}

/// Nearest-rank percentiles over nanosecond samples, reported in ms.
/// Sorts in place; None for an empty sample set.
pub fn latency_percentiles(samples: &mut [Nanos]) -> Option<Percentiles> {
    if samples.is_empty() {
        return None;
    }
    samples.sort_unstable();
    let pick = |p: f64| {
        let rank = (p / 100.0 * samples.len() as f64).ceil() as usize;
        ns_to_ms_f64(samples[rank.max(1) - 1])
    };
    Some(Percentiles {
        p50_ms: pick(50.0),
        p90_ms: pick(90.0),
        p99_ms: pick(99.0),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct DropCounts {
    /// Tail or overload drops (full shared queue, global flow-queue limit,
    /// full uplink queue).
    pub overflow: u64,
    /// CoDel drops.
    pub codel: u64,
}

impl DropCounts {
    pub fn total(&self) -> u64 {
        self.overflow + self.codel
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationMetrics {
    pub station_id: u16,
    pub phy_rate_mbps: f64,
    /// Delivered data payload (udp_cbr and tcp_like packets, both
    /// directions); acks and pings are excluded.
    pub throughput_bps: f64,
    /// Medium time spent on this station (both directions, all overheads
    /// included), as a fraction of the run duration.
    pub airtime_share: f64,
    /// Mean MPDUs per downlink aggregate to this station (0 if none).
    pub mean_aggregation: f64,
    pub generated: u64,
    pub delivered: u64,
    pub drops: DropCounts,
    /// One-way data latency (source queue entry to delivery).
    pub latency: Option<Percentiles>,
    /// Ping round-trip times.
    pub ping_rtt: Option<Percentiles>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Totals {
    pub throughput_bps: f64,
    /// Fraction of the run during which the medium was busy.
    pub airtime_busy_share: f64,
    pub generated: u64,
    pub delivered: u64,
    pub dropped: u64,
    /// Packets still queued or in flight when the run ended.
    pub residual: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub schema_version: u32,
    pub scheme: Scheme,
    pub seed: u64,
    pub duration_s: f64,
    /// Jain's index over the stations' airtime shares (None when the medium
    /// stayed idle).
    pub jain_airtime: Option<f64>,
    pub totals: Totals,
    pub stations: Vec<StationMetrics>,
}

#[derive(Debug, Default)]
struct StationBucket {
    goodput_bits: u64,
    busy: Nanos,
    agg_count: u64,
    agg_mpdus: u64,
    latency: Vec<Nanos>,
    ping: Vec<Nanos>,
    drops: DropCounts,
    generated: u64,
    delivered: u64,
}

#[derive(Debug, Default, Clone, Copy)]
struct FlowBucket {
    generated: u64,
    delivered: u64,
    dropped: u64,
}

/// Accumulates raw simulation events and turns them into a `MetricsReport`,
/// enforcing packet conservation per flow along the way.
#[derive(Debug)]
pub(crate) struct Collector {
    stations: Vec<StationBucket>,
    flows: Vec<FlowBucket>,
    busy_total: Nanos,
}

impl Collector {
    pub fn new(num_stations: usize, num_flows: usize) -> Self {
        Collector {
            stations: (0..num_stations).map(|_| StationBucket::default()).collect(),
            flows: vec![FlowBucket::default(); num_flows],
            busy_total: 0,
        }
    }

    pub fn generated(&mut self, pkt: &Packet) {
        self.flows[pkt.flow_idx as usize].generated += 1;
        self.stations[pkt.station as usize].generated += 1;
    }

    pub fn dropped(&mut self, pkt: &Packet, _kind: DropKind) {
        self.flows[pkt.flow_idx as usize].dropped += 1;
        let b = &mut self.stations[pkt.station as usize];
        match _kind {
            DropKind::Overflow => b.drops.overflow += 1,
            DropKind::Codel => b.drops.codel += 1,
        }
    }

    /// A data packet reached its destination: count goodput and latency.
    pub fn data_delivered(&mut self, pkt: &Packet, now: Nanos) {
        self.delivered_plain(pkt);
        let b = &mut self.stations[pkt.station as usize];
        b.goodput_bits += pkt.len as u64 * 8;
        b.latency.push(now.saturating_sub(pkt.created));
    }

    /// A non-data packet (ack, ping leg) reached its destination.
    pub fn delivered_plain(&mut self, pkt: &Packet) {
        self.flows[pkt.flow_idx as usize].delivered += 1;
        self.stations[pkt.station as usize].delivered += 1;
    }

    pub fn ping_sample(&mut self, station: u16, rtt: Nanos) {
        self.stations[station as usize].ping.push(rtt);
    }

    pub fn busy(&mut self, station: u16, duration: Nanos) {
        self.stations[station as usize].busy += duration;
        self.busy_total += duration;
    }

    pub fn down_aggregate(&mut self, station: u16, mpdus: usize) {
        let b = &mut self.stations[station as usize];
        b.agg_count += 1;
        b.agg_mpdus += mpdus as u64;
    }

    /// Close the books: conservation check per flow, then the report.
    pub fn finish(mut self, scenario: &Scenario, residual: &[Packet]) -> MetricsReport {
        let mut flow_residual = vec![0u64; self.flows.len()];
        for pkt in residual {
            flow_residual[pkt.flow_idx as usize] += 1;
        }
        for (idx, f) in self.flows.iter().enumerate() {
            let accounted = f.delivered + f.dropped + flow_residual[idx];
            assert_eq!(
                f.generated, accounted,
                "packet conservation violated for flow {idx}: generated {} != delivered {} + dropped {} + residual {}",
                f.generated, f.delivered, f.dropped, flow_residual[idx]
            );
        }

        let duration = scenario.duration();
        assert!(
            self.busy_total <= duration,
            "medium busy {} ns exceeds run duration {} ns",
            self.busy_total,
            duration
        );
        let duration_s = ns_to_secs_f64(duration);

        let stations: Vec<StationMetrics> = self
            .stations
            .iter_mut()
            .zip(&scenario.stations)
            .map(|(b, cfg)| StationMetrics {
                station_id: cfg.id,
                phy_rate_mbps: cfg.phy_rate_mbps,
                throughput_bps: b.goodput_bits as f64 / duration_s,
                airtime_share: ns_to_secs_f64(b.busy) / duration_s,
                mean_aggregation: if b.agg_count == 0 {
                    0.0
                } else {
                    b.agg_mpdus as f64 / b.agg_count as f64
                },
                generated: b.generated,
                delivered: b.delivered,
                drops: b.drops,
                latency: latency_percentiles(&mut b.latency),
                ping_rtt: latency_percentiles(&mut b.ping),
            })
            .collect();

        let shares: Vec<f64> = stations.iter().map(|s| s.airtime_share).collect();
        let totals = Totals {
            throughput_bps: stations.iter().map(|s| s.throughput_bps).sum(),
            airtime_busy_share: ns_to_secs_f64(self.busy_total) / duration_s,
            generated: self.flows.iter().map(|f| f.generated).sum(),
            delivered: self.flows.iter().map(|f| f.delivered).sum(),
            dropped: self.flows.iter().map(|f| f.dropped).sum(),
            residual: flow_residual.iter().sum(),
        };

        MetricsReport {
            schema_version: REPORT_SCHEMA_VERSION,
            scheme: scenario.scheme,
            seed: scenario.seed,
            duration_s: scenario.duration_s,
            jain_airtime: jain_index(&shares).ok(),
            totals,
            stations,
        }
    }
}
