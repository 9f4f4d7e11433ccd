//! The unit of work moving through every queue in the crate.

use crate::time::Nanos;

/// Index of a station in the run's station table.
pub type StationId = u16;

/// Traffic identifier: one queueing context per (station, QoS level) pair.
pub type TidId = u16;

/// QoS levels, highest priority first when arbitrating across levels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[repr(u8)]
pub enum QosLevel {
    Voice = 0,
    Video = 1,
    BestEffort = 2,
    Background = 3,
}

pub const QOS_LEVELS: usize = 4;

/// All QoS levels in strict service-priority order.
pub const QOS_PRIORITY_ORDER: [QosLevel; QOS_LEVELS] = [
    QosLevel::Voice,
    QosLevel::Video,
    QosLevel::BestEffort,
    QosLevel::Background,
];

impl QosLevel {
    pub fn index(self) -> usize {
        self as usize
    }
}

/// TIDs are laid out densely as station * QOS_LEVELS + qos so that the queue
/// structure can be sized up front and lookups stay branch-free.
pub fn tid_for(station: StationId, qos: QosLevel) -> TidId {
    station * QOS_LEVELS as TidId + qos.index() as TidId
}

pub fn station_of_tid(tid: TidId) -> StationId {
    tid / QOS_LEVELS as TidId
}

pub fn qos_of_tid(tid: TidId) -> QosLevel {
    QOS_PRIORITY_ORDER[(tid as usize) % QOS_LEVELS]
}

/// A single MAC-layer data unit (one MPDU payload before MAC framing).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Packet {
    /// Flow identity used for hashing into flow queues.
    pub flow_key: u64,
    /// Index of the generating flow in the run's flow table (metrics plumbing).
    pub flow_idx: u32,
    /// Per-flow sequence number, assigned at creation in generation order.
    pub seq: u64,
    /// Payload length in bytes (MAC framing overhead is added by the PHY math).
    pub len: u32,
    /// Destination station for downlink, source station for uplink.
    pub station: StationId,
    pub tid: TidId,
    /// When the packet was created by its generator.
    pub created: Nanos,
    /// When the packet entered the AP queueing structure (set by enqueue).
    pub enqueued: Nanos,
}

impl Packet {
    /// A minimal packet for queue-level tests; timestamps start at `created`.
    pub fn test(flow_key: u64, len: u32, created: Nanos) -> Self {
        Packet {
            flow_key,
            flow_idx: 0,
            seq: 0,
            len,
            station: 0,
            tid: 0,
            created,
            enqueued: created,
        }
    }
}
