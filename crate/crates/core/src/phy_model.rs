//! Analytical throughput/airtime model for an 802.11n access point serving
//! aggregated (A-MPDU) traffic.
//!
//! All durations are in microseconds, rates in bits/second, lengths in bytes.
//! Aggregation levels `n` are allowed to be fractional so that measured mean
//! aggregation sizes can be fed straight back into the model.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Fixed PHY/MAC timing and framing constants for the modelled HT link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhyConstants {
    /// Per-MPDU delimiter bytes inside an A-MPDU.
    pub delimiter_bytes: f64,
    /// MAC header bytes per MPDU.
    pub mac_header_bytes: f64,
    /// Frame check sequence bytes per MPDU.
    pub fcs_bytes: f64,
    /// PHY preamble + signalling duration, µs.
    pub t_phy_us: f64,
    /// DIFS duration, µs.
    pub t_difs_us: f64,
    /// SIFS duration, µs.
    pub t_sifs_us: f64,
    /// Mean backoff duration, µs.
    pub t_backoff_us: f64,
    /// Block-ack frame length, bytes.
    pub block_ack_bytes: f64,
}

pub const DEFAULT_CONSTANTS: PhyConstants = PhyConstants {
    delimiter_bytes: 4.0,
    mac_header_bytes: 34.0,
    fcs_bytes: 4.0,
    t_phy_us: 32.0,
    t_difs_us: 34.0,
    t_sifs_us: 16.0,
    t_backoff_us: 68.0,
    block_ack_bytes: 58.0,
};

impl Default for PhyConstants {
    fn default() -> Self {
        DEFAULT_CONSTANTS
    }
}

/// Per-MPDU framing overhead excluding padding: delimiter + MAC header + FCS.
pub fn mpdu_overhead_bytes(c: &PhyConstants) -> f64 {
    c.delimiter_bytes + c.mac_header_bytes + c.fcs_bytes
}

/// Padded on-air length of one MPDU carrying an `l`-byte payload: the payload
/// plus framing, rounded up to the next 4-byte boundary (the delimiter is not
/// part of the padded unit, so padding is computed over `l` + header + FCS).
pub fn mpdu_length(l: f64, c: &PhyConstants) -> f64 {
    let framed = l + c.mac_header_bytes + c.fcs_bytes;
    let pad = (4.0 - framed.rem_euclid(4.0)).rem_euclid(4.0);
    framed + pad + c.delimiter_bytes
}

/// Total on-air length in bytes of an A-MPDU of `n` MPDUs of `l`-byte payload.
/// `n` may be fractional (mean aggregation level).
pub fn ampdu_length(n: f64, l: f64, c: &PhyConstants) -> f64 {
    n * mpdu_length(l, c)
}

/// Inputs outside the model's domain.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("aggregation level must be positive and finite, got {0}")]
    BadAggregation(f64),
    #[error("payload length must be positive and finite, got {0}")]
    BadPayload(f64),
    #[error("PHY rate must be positive and finite, got {0}")]
    BadRate(f64),
    #[error("station list must be non-empty")]
    NoStations,
}

fn check_inputs(n: f64, l: f64, r: f64) -> Result<(), ModelError> {
    if !(n.is_finite() && n > 0.0) {
        return Err(ModelError::BadAggregation(n));
    }
    if !(l.is_finite() && l > 0.0) {
        return Err(ModelError::BadPayload(l));
    }
    check_rate(r)
}

fn check_rate(r: f64) -> Result<(), ModelError> {
    if !(r.is_finite() && r > 0.0) {
        return Err(ModelError::BadRate(r));
    }
    Ok(())
}

/// Transmission duration in µs of an A-MPDU of `n` MPDUs of `l` bytes at PHY
/// rate `r` bits/s: preamble plus serialized aggregate.
pub fn t_data(n: f64, l: f64, r: f64, c: &PhyConstants) -> Result<f64, ModelError> {
    check_inputs(n, l, r)?;
    Ok(t_data_for_bytes(ampdu_length(n, l, c), r, c))
}

/// Duration in µs to serialize `bytes` on-air bytes at `r` bits/s, preamble
/// included. Shared by the model and the simulator's aggregate builder.
pub fn t_data_for_bytes(bytes: f64, r: f64, c: &PhyConstants) -> f64 {
    c.t_phy_us + 8.0 * bytes / r * 1e6
}

/// Fixed per-transmission overhead in µs at PHY rate `r` bits/s: DIFS + SIFS
/// + block-ack + mean backoff, where the block-ack is returned at `r`.
pub fn t_overhead(r: f64, c: &PhyConstants) -> Result<f64, ModelError> {
    check_rate(r)?;
    let t_ack = c.t_sifs_us + 8.0 * c.block_ack_bytes / r * 1e6;
    Ok(c.t_difs_us + c.t_sifs_us + t_ack + c.t_backoff_us)
}

/// Effective MAC throughput in bits/s for a station transmitting A-MPDUs of
/// `n` MPDUs of `l` payload bytes at PHY rate `r` bits/s, overheads included.
pub fn base_rate(n: f64, l: f64, r: f64, c: &PhyConstants) -> Result<f64, ModelError> {
    let td = t_data(n, l, r, c)?;
    let to = t_overhead(r, c)?;
    Ok(8.0 * n * l / ((td + to) * 1e-6))
}

/// One station's traffic profile as seen by the model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StationModelInput {
    /// Mean aggregation level (MPDUs per A-MPDU), may be fractional.
    pub aggregation: f64,
    /// Payload bytes per MPDU.
    pub payload_bytes: f64,
    /// PHY rate, bits/s.
    pub phy_rate: f64,
}

/// Model output for one station.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelPrediction {
    /// Share of busy airtime given to this station, in [0, 1]; shares sum to 1.
    pub airtime_share: f64,
    /// The station's standalone effective rate, bits/s.
    pub base_rate: f64,
    /// airtime_share × base_rate, bits/s.
    pub effective_rate: f64,
}

/// Predict per-station throughput for stations that are all backlogged.
///
/// With `airtime_fairness` every station gets an equal share of airtime; the
/// throughput anomaly case instead gives every station an airtime share
/// proportional to its own per-aggregate transmission duration (equal access
/// opportunities, unequal time), which is what a FIFO queue produces.
pub fn predict(
    stations: &[StationModelInput],
    airtime_fairness: bool,
    c: &PhyConstants,
) -> Result<Vec<ModelPrediction>, ModelError> {
    if stations.is_empty() {
        return Err(ModelError::NoStations);
    }
    let mut t_datas = Vec::with_capacity(stations.len());
    let mut rates = Vec::with_capacity(stations.len());
    for s in stations {
        t_datas.push(t_data(s.aggregation, s.payload_bytes, s.phy_rate, c)?);
        rates.push(base_rate(s.aggregation, s.payload_bytes, s.phy_rate, c)?);
    }
    let shares: Vec<f64> = if airtime_fairness {
        vec![1.0 / stations.len() as f64; stations.len()]
    } else {
        let total: f64 = t_datas.iter().sum();
        t_datas.iter().map(|t| t / total).collect()
    };
    Ok(shares
        .iter()
        .zip(&rates)
        .map(|(&share, &base)| ModelPrediction {
            airtime_share: share,
            base_rate: base,
            effective_rate: share * base,
        })
        .collect())
}
