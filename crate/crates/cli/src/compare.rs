//! The `compare` subcommand: run the simulator once, feed the measured mean
//! aggregation sizes back into the analytical model, and report per-station
//! deviation between simulated and predicted throughput.

use airfair_core::phy_model::{predict, PhyConstants, StationModelInput};
use airfair_core::scenario::{Direction, FlowKind, Scenario, Scheme};
use airfair_core::sim;
use airfair_core::sim::metrics::MetricsReport;
use serde::Serialize;

use crate::error::CliError;
use crate::{CompareArgs, OUTPUT_SCHEMA_VERSION};

/// Busy share below which the saturation-based model is a poor reference.
const SATURATION_THRESHOLD: f64 = 0.95;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct CompareRow {
    pub station: u16,
    pub phy_rate_mbps: f64,
    /// Measured mean A-MPDU size, fed into the model.
    pub mean_aggregation: f64,
    /// Payload size assumed by the model: the station's first downlink data
    /// flow's packet size.
    pub payload_bytes: f64,
    pub model_airtime_share: f64,
    /// Measured share of the whole run the station's traffic occupied the
    /// medium. Matches the model share only when the medium is saturated.
    pub sim_airtime_share: f64,
    pub model_throughput_bps: f64,
    pub sim_throughput_bps: f64,
    /// (simulated - model) / model, in percent.
    pub deviation_pct: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CompareOutput {
    pub schema_version: u32,
    pub scheme: Scheme,
    pub seed: u64,
    pub duration_s: f64,
    pub airtime_busy_share: f64,
    pub saturated: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
    pub stations: Vec<CompareRow>,
    pub total_model_throughput_bps: f64,
    pub total_sim_throughput_bps: f64,
    pub total_deviation_pct: f64,
}

fn deviation_pct(sim: f64, model: f64) -> f64 {
    (sim - model) / model * 100.0
}

/// Build the side-by-side table from a finished run. Stations enter the model
/// with their measured mean aggregation; stations that carried no downlink
/// data (ping-only, uplink-only, or simply never scheduled) are left out, and
/// airtime fairness is assumed exactly when the scheme enforces it.
pub fn compare_report(
    scenario: &Scenario,
    report: &MetricsReport,
) -> Result<CompareOutput, CliError> {
    let mut included: Vec<(usize, f64)> = Vec::new();
    for (i, station) in scenario.stations.iter().enumerate() {
        let payload = station.flows.iter().find_map(|f| {
            (f.direction == Direction::Down
                && matches!(f.kind, FlowKind::UdpCbr | FlowKind::TcpLike))
            .then(|| f64::from(f.effective_packet_size()))
        });
        let Some(payload) = payload else { continue };
        if report.stations[i].mean_aggregation > 0.0 {
            included.push((i, payload));
        }
    }
    if included.is_empty() {
        return Err(CliError::new(
            "config",
            "no station carried downlink data, so there is nothing to compare against the model",
        ));
    }

    let fairness = scenario.scheme == Scheme::AirtimeFairFq;
    let inputs: Vec<StationModelInput> = included
        .iter()
        .map(|&(i, payload)| StationModelInput {
            aggregation: report.stations[i].mean_aggregation,
            payload_bytes: payload,
            phy_rate: scenario.stations[i].phy_rate_mbps * 1e6,
        })
        .collect();
    let predictions = predict(&inputs, fairness, &PhyConstants::default())?;

    let stations: Vec<CompareRow> = included
        .iter()
        .zip(&predictions)
        .map(|(&(i, payload), prediction)| {
            let measured = &report.stations[i];
            CompareRow {
                station: measured.station_id,
                phy_rate_mbps: measured.phy_rate_mbps,
                mean_aggregation: measured.mean_aggregation,
                payload_bytes: payload,
                model_airtime_share: prediction.airtime_share,
                sim_airtime_share: measured.airtime_share,
                model_throughput_bps: prediction.effective_rate,
                sim_throughput_bps: measured.throughput_bps,
                deviation_pct: deviation_pct(measured.throughput_bps, prediction.effective_rate),
            }
        })
        .collect();

    let total_model: f64 = stations.iter().map(|r| r.model_throughput_bps).sum();
    let total_sim: f64 = stations.iter().map(|r| r.sim_throughput_bps).sum();
    let saturated = report.totals.airtime_busy_share >= SATURATION_THRESHOLD;
    let warning = (!saturated).then(|| {
        format!(
            "medium busy only {:.1}% of the run; the model assumes saturated downlink, so deviations are expected",
            report.totals.airtime_busy_share * 100.0
        )
    });
    Ok(CompareOutput {
        schema_version: OUTPUT_SCHEMA_VERSION,
        scheme: report.scheme,
        seed: report.seed,
        duration_s: report.duration_s,
        airtime_busy_share: report.totals.airtime_busy_share,
        saturated,
        warning,
        stations,
        total_model_throughput_bps: total_model,
        total_sim_throughput_bps: total_sim,
        total_deviation_pct: deviation_pct(total_sim, total_model),
    })
}

pub fn run_compare(args: &CompareArgs) -> Result<CompareOutput, CliError> {
    let mut scenario = Scenario::load(&args.scenario)?;
    if let Some(scheme) = args.scheme {
        scenario.scheme = scheme;
    }
    if let Some(seed) = args.seed {
        scenario.seed = seed;
    }
    let report = sim::run(&scenario)?;
    compare_report(&scenario, &report)
}
