//! The analytical calculator: per-station airtime shares, standalone rates,
//! and effective throughput, with or without airtime fairness.

use airfair_core::phy_model::{predict, PhyConstants, StationModelInput};
use serde::Serialize;

use crate::error::CliError;
use crate::OUTPUT_SCHEMA_VERSION;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ModelRow {
    pub station: usize,
    pub aggregation: f64,
    pub payload_bytes: f64,
    pub phy_rate_mbps: f64,
    /// Share of busy airtime, in [0, 1].
    pub airtime_share: f64,
    /// Standalone effective MAC rate, bits/s.
    pub base_rate_bps: f64,
    /// airtime_share × base rate, bits/s.
    pub effective_rate_bps: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ModelTable {
    pub schema_version: u32,
    pub airtime_fairness: bool,
    pub stations: Vec<ModelRow>,
    pub total_effective_rate_bps: f64,
}

/// Evaluate the model for a list of (aggregation, payload, rate) stations.
pub fn model_table(
    inputs: &[StationModelInput],
    airtime_fairness: bool,
) -> Result<ModelTable, CliError> {
    let consts = PhyConstants::default();
    let predictions = predict(inputs, airtime_fairness, &consts)?;
    let stations: Vec<ModelRow> = predictions
        .iter()
        .zip(inputs)
        .enumerate()
        .map(|(i, (p, input))| ModelRow {
            station: i,
            aggregation: input.aggregation,
            payload_bytes: input.payload_bytes,
            phy_rate_mbps: input.phy_rate / 1e6,
            airtime_share: p.airtime_share,
            base_rate_bps: p.base_rate,
            effective_rate_bps: p.effective_rate,
        })
        .collect();
    let total = stations.iter().map(|r| r.effective_rate_bps).sum();
    Ok(ModelTable {
        schema_version: OUTPUT_SCHEMA_VERSION,
        airtime_fairness,
        stations,
        total_effective_rate_bps: total,
    })
}

/// Parse one `--station` argument: `aggregation,payload_bytes,rate_mbps`.
pub fn parse_station_arg(position: usize, text: &str) -> Result<StationModelInput, CliError> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 3 {
        return Err(CliError::usage(format!(
            "--station[{position}]: expected `aggregation,payload_bytes,rate_mbps`, got `{text}`"
        )));
    }
    let field = |i: usize, name: &str| -> Result<f64, CliError> {
        parts[i].trim().parse::<f64>().map_err(|_| {
            CliError::usage(format!(
                "--station[{position}].{name}: `{}` is not a number",
                parts[i].trim()
            ))
        })
    };
    Ok(StationModelInput {
        aggregation: field(0, "aggregation")?,
        payload_bytes: field(1, "payload_bytes")?,
        phy_rate: field(2, "rate_mbps")? * 1e6,
    })
}
