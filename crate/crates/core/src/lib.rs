//! Core library for an 802.11n access-point queueing study: an analytical
//! throughput/airtime model, the per-TID flow-queueing structure with CoDel,
//! a deficit-based airtime scheduler, and a deterministic discrete-event
//! simulator that drives four AP queueing schemes over shared PHY arithmetic.

pub mod airtime;
pub mod codel;
pub mod fq_mac;
pub mod packet;
pub mod phy_model;
pub mod scenario;
pub mod sim;
pub mod time;

pub use packet::{Packet, StationId, TidId};
pub use sim::metrics::MetricsReport;
pub use time::Nanos;
