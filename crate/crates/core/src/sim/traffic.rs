//! Traffic generation: open-loop constant-bitrate and ping schedules, plus
//! the fixed-window closed loop. Each flow owns a seeded RNG so repetitions
//! with different seeds de-phase the generators while a fixed seed stays
//! bit-reproducible regardless of event interleaving.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::fq_mac::splitmix64;
use crate::packet::{tid_for, Packet, QosLevel, StationId};
use crate::scenario::{Direction, FlowConfig, FlowKind};
use crate::time::{ms_f64_to_ns, secs_f64_to_ns, us_f64_to_ns, Nanos};

/// Runtime state of one configured flow.
#[derive(Debug)]
pub(crate) struct FlowRuntime {
    pub idx: u32,
    pub station: StationId,
    pub kind: FlowKind,
    pub direction: Direction,
    pub packet_size: u32,
    pub start: Nanos,
    pub stop: Nanos,
    /// Packet spacing for the open-loop kinds (udp_cbr, ping); 0 for tcp_like.
    pub interval: Nanos,
    /// Window size in packets for tcp_like; 0 otherwise.
    pub window: u32,
    rng: ChaCha8Rng,
    next_seq: u64,
}

impl FlowRuntime {
    pub fn new(idx: u32, station: StationId, cfg: &FlowConfig, seed: u64, duration: Nanos) -> Self {
        let packet_size = cfg.effective_packet_size();
        let interval = match cfg.kind {
            FlowKind::UdpCbr => {
                let rate_bps = cfg.rate_mbps.expect("validated: udp_cbr has rate_mbps") * 1e6;
                secs_f64_to_ns(packet_size as f64 * 8.0 / rate_bps)
            }
            FlowKind::Ping => ms_f64_to_ns(cfg.interval_ms.expect("validated: ping has interval_ms")),
            FlowKind::TcpLike => 0,
        };
        FlowRuntime {
            idx,
            station,
            kind: cfg.kind,
            direction: cfg.direction,
            packet_size,
            start: cfg.start(),
            stop: cfg.stop(duration),
            interval,
            window: cfg.window_packets.unwrap_or(0),
            rng: ChaCha8Rng::seed_from_u64(splitmix64(seed, idx as u64 + 1)),
            next_seq: 0,
        }
    }

    /// First arrival: flow start plus a random phase within one interval.
    pub fn initial_arrival(&mut self) -> Nanos {
        self.start + self.rng.random_range(0..self.interval.max(1))
    }

    /// Next arrival after `now`: one interval with ±1% jitter, so the mean
    /// rate is preserved but different seeds de-synchronize. The step is at
    /// least one tick so time always advances.
    pub fn next_arrival(&mut self, now: Nanos) -> Nanos {
        let factor = self.rng.random_range(0.99..=1.01);
        now + ((self.interval as f64 * factor).round() as Nanos).max(1)
    }

    /// Staggered release times for the initial window of a closed-loop flow.
    pub fn initial_tokens(&mut self) -> Vec<Nanos> {
        (0..self.window as u64)
            .map(|i| self.start + i * us_f64_to_ns(100.0) + self.rng.random_range(0..=ms_f64_to_ns(1.0)))
            .collect()
    }

    /// A payload-sized packet created (and entering its source queue) now.
    pub fn make_data_packet(&mut self, now: Nanos) -> Packet {
        self.make_packet(now, self.packet_size, now)
    }

    /// A packet of arbitrary size carrying an explicit creation timestamp
    /// (ping replies keep the request's creation time so the echo measures a
    /// full round trip).
    pub fn make_packet(&mut self, now: Nanos, len: u32, created: Nanos) -> Packet {
        let seq = self.next_seq;
        self.next_seq += 1;
        Packet {
            flow_key: self.idx as u64,
            flow_idx: self.idx,
            seq,
            len,
            station: self.station,
            tid: tid_for(self.station, QosLevel::BestEffort),
            created,
            enqueued: now,
        }
    }
}
