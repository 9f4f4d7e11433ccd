//! Scenario files: the TOML schema describing one simulation run — stations,
//! their flows, the queueing scheme, and tuning overrides — plus validation
//! that reports the offending field before any event runs.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::airtime::{AggregateLimits, SchedulerConfig};
use crate::codel::{AdaptConfig, CodelParams};
use crate::fq_mac::FqMacConfig;
use crate::time::{ms_f64_to_ns, secs_f64_to_ns, us_f64_to_ns, Nanos};

pub const SCHEMA_VERSION: u32 = 1;

/// The four queueing schemes under study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Fifo,
    FqCodel,
    FqMac,
    AirtimeFairFq,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [
        Scheme::Fifo,
        Scheme::FqCodel,
        Scheme::FqMac,
        Scheme::AirtimeFairFq,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Fifo => "fifo",
            Scheme::FqCodel => "fq_codel",
            Scheme::FqMac => "fq_mac",
            Scheme::AirtimeFairFq => "airtime_fair_fq",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Scheme {
    type Err = ScenarioError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "fifo" => Ok(Scheme::Fifo),
            "fq_codel" => Ok(Scheme::FqCodel),
            "fq_mac" => Ok(Scheme::FqMac),
            "airtime_fair_fq" => Ok(Scheme::AirtimeFairFq),
            other => Err(ScenarioError::invalid(
                "scheme",
                format!("unknown scheme `{other}`; valid schemes: fifo, fq_codel, fq_mac, airtime_fair_fq"),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlowKind {
    UdpCbr,
    TcpLike,
    Ping,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Down,
    Up,
}

/// Queue-structure sizing shared by the schemes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QueueConfig {
    /// Hash queues in the shared flow-queue pool.
    pub num_flow_queues: usize,
    /// Global packet limit across the pool.
    pub global_limit: usize,
    /// DRR quantum in bytes for per-TID flow queueing.
    pub quantum_bytes: u32,
    /// DRR quantum in bytes for the single qdisc-style instance (fq_codel
    /// scheme), conventionally one MTU-sized frame.
    pub qdisc_quantum_bytes: u32,
    /// Shared FIFO capacity in packets (fifo scheme).
    pub fifo_cap: usize,
    /// Per-TID driver queue capacity in packets (fifo and fq_codel schemes).
    pub driver_queue_cap: usize,
}

impl Default for QueueConfig {
    fn default() -> Self {
        QueueConfig {
            num_flow_queues: 1024,
            global_limit: 8192,
            quantum_bytes: 300,
            qdisc_quantum_bytes: 1514,
            fifo_cap: 1000,
            driver_queue_cap: 128,
        }
    }
}

/// Airtime scheduler tuning (airtime_fair_fq scheme).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SchedulerTuning {
    pub quantum_us: f64,
    pub hw_queue_limit: usize,
    pub sparse_optimization: bool,
}

impl Default for SchedulerTuning {
    fn default() -> Self {
        SchedulerTuning {
            quantum_us: 1000.0,
            hw_queue_limit: 2,
            sparse_optimization: true,
        }
    }
}

/// CoDel tuning, including the slow-station parameter adaptation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CodelTuning {
    pub target_ms: f64,
    pub interval_ms: f64,
    /// Adapt per-station parameters from the estimated station rate
    /// (airtime_fair_fq scheme only).
    pub adaptation: bool,
    pub low_rate_target_ms: f64,
    pub low_rate_interval_ms: f64,
    pub low_rate_threshold_mbps: f64,
    pub hysteresis_s: f64,
}

impl Default for CodelTuning {
    fn default() -> Self {
        CodelTuning {
            target_ms: 5.0,
            interval_ms: 100.0,
            adaptation: true,
            low_rate_target_ms: 50.0,
            low_rate_interval_ms: 300.0,
            low_rate_threshold_mbps: 12.0,
            hysteresis_s: 2.0,
        }
    }
}

/// A-MPDU caps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AggregationTuning {
    pub max_ampdu_count: usize,
    pub max_ampdu_bytes: u64,
    pub max_txop_ms: f64,
}

impl Default for AggregationTuning {
    fn default() -> Self {
        AggregationTuning {
            max_ampdu_count: 64,
            max_ampdu_bytes: 65_535,
            max_txop_ms: 4.0,
        }
    }
}

/// Closed-loop traffic tuning.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TcpTuning {
    /// Fixed feedback delay between delivery and the ack releasing the next
    /// window slot.
    pub base_rtt_ms: f64,
    /// Uplink ack frame size in bytes.
    pub ack_bytes: u32,
}

impl Default for TcpTuning {
    fn default() -> Self {
        TcpTuning {
            base_rtt_ms: 20.0,
            ack_bytes: 64,
        }
    }
}

/// One traffic flow attached to a station. Which parameters apply depends on
/// `kind`: udp_cbr needs `rate_mbps`, tcp_like needs `window_packets`, ping
/// needs `interval_ms`. `packet_size` defaults to 1500 B (64 B for ping).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowConfig {
    pub kind: FlowKind,
    pub direction: Direction,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate_mbps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window_packets: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interval_ms: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub packet_size: Option<u32>,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub start_s: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop_s: Option<f64>,
}

fn is_zero(v: &f64) -> bool {
    *v == 0.0
}

impl FlowConfig {
    /// Effective payload size: explicit, else 1500 B (64 B for ping).
    pub fn effective_packet_size(&self) -> u32 {
        self.packet_size.unwrap_or(match self.kind {
            FlowKind::Ping => 64,
            _ => 1500,
        })
    }

    pub fn start(&self) -> Nanos {
        secs_f64_to_ns(self.start_s)
    }

    /// Stop time, clamped to the scenario duration when absent.
    pub fn stop(&self, duration: Nanos) -> Nanos {
        self.stop_s.map(secs_f64_to_ns).unwrap_or(duration)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StationConfig {
    pub id: u16,
    pub phy_rate_mbps: f64,
    #[serde(default)]
    pub flows: Vec<FlowConfig>,
}

/// One full simulation scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema_version: u32,
    pub duration_s: f64,
    pub seed: u64,
    pub scheme: Scheme,
    #[serde(default)]
    pub queues: QueueConfig,
    #[serde(default)]
    pub scheduler: SchedulerTuning,
    #[serde(default)]
    pub codel: CodelTuning,
    #[serde(default)]
    pub aggregation: AggregationTuning,
    #[serde(default)]
    pub tcp: TcpTuning,
    pub stations: Vec<StationConfig>,
}

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("config error at `{field}`: {message}")]
    Invalid { field: String, message: String },
    #[error("could not parse scenario: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("could not read `{path}`: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl ScenarioError {
    pub fn invalid(field: impl Into<String>, message: impl Into<String>) -> Self {
        ScenarioError::Invalid {
            field: field.into(),
            message: message.into(),
        }
    }

    /// Stable machine-parsable category for exit reporting.
    pub fn category(&self) -> &'static str {
        match self {
            ScenarioError::Invalid { .. } | ScenarioError::Parse(_) => "config",
            ScenarioError::Io { .. } => "io",
        }
    }
}

fn ensure(cond: bool, field: &str, message: impl Into<String>) -> Result<(), ScenarioError> {
    if cond {
        Ok(())
    } else {
        Err(ScenarioError::invalid(field, message))
    }
}

fn positive_finite(value: f64, field: &str) -> Result<(), ScenarioError> {
    ensure(
        value.is_finite() && value > 0.0,
        field,
        format!("must be a positive finite number, got {value}"),
    )
}

impl Scenario {
    pub fn from_toml_str(text: &str) -> Result<Self, ScenarioError> {
        let scenario: Scenario = toml::from_str(text)?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn load(path: &Path) -> Result<Self, ScenarioError> {
        let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Scenario::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        ensure(
            self.schema_version == SCHEMA_VERSION,
            "schema_version",
            format!("expected {SCHEMA_VERSION}, got {}", self.schema_version),
        )?;
        positive_finite(self.duration_s, "duration_s")?;
        ensure(!self.stations.is_empty(), "stations", "at least one station required")?;
        ensure(
            self.stations.len() <= 4096,
            "stations",
            format!("at most 4096 stations supported, got {}", self.stations.len()),
        )?;

        ensure(
            self.queues.num_flow_queues >= 1,
            "queues.num_flow_queues",
            "must be at least 1",
        )?;
        ensure(
            self.queues.global_limit >= 1,
            "queues.global_limit",
            "must be at least 1",
        )?;
        ensure(
            self.queues.quantum_bytes >= 1,
            "queues.quantum_bytes",
            "must be at least 1",
        )?;
        ensure(
            self.queues.qdisc_quantum_bytes >= 1,
            "queues.qdisc_quantum_bytes",
            "must be at least 1",
        )?;
        ensure(self.queues.fifo_cap >= 1, "queues.fifo_cap", "must be at least 1")?;
        ensure(
            self.queues.driver_queue_cap >= 1,
            "queues.driver_queue_cap",
            "must be at least 1",
        )?;

        positive_finite(self.scheduler.quantum_us, "scheduler.quantum_us")?;
        ensure(
            self.scheduler.hw_queue_limit >= 1,
            "scheduler.hw_queue_limit",
            "must be at least 1",
        )?;

        positive_finite(self.codel.target_ms, "codel.target_ms")?;
        positive_finite(self.codel.interval_ms, "codel.interval_ms")?;
        positive_finite(self.codel.low_rate_target_ms, "codel.low_rate_target_ms")?;
        positive_finite(self.codel.low_rate_interval_ms, "codel.low_rate_interval_ms")?;
        ensure(
            self.codel.low_rate_threshold_mbps.is_finite() && self.codel.low_rate_threshold_mbps >= 0.0,
            "codel.low_rate_threshold_mbps",
            "must be a non-negative finite number",
        )?;
        ensure(
            self.codel.hysteresis_s.is_finite() && self.codel.hysteresis_s >= 0.0,
            "codel.hysteresis_s",
            "must be a non-negative finite number",
        )?;

        ensure(
            self.aggregation.max_ampdu_count >= 1,
            "aggregation.max_ampdu_count",
            "must be at least 1",
        )?;
        ensure(
            self.aggregation.max_ampdu_bytes >= 1,
            "aggregation.max_ampdu_bytes",
            "must be at least 1",
        )?;
        positive_finite(self.aggregation.max_txop_ms, "aggregation.max_txop_ms")?;

        ensure(
            self.tcp.base_rtt_ms.is_finite() && self.tcp.base_rtt_ms >= 0.0,
            "tcp.base_rtt_ms",
            "must be a non-negative finite number",
        )?;
        ensure(
            (1..=2304).contains(&self.tcp.ack_bytes),
            "tcp.ack_bytes",
            "must be in 1..=2304",
        )?;

        for (si, station) in self.stations.iter().enumerate() {
            let sf = |tail: &str| format!("stations[{si}].{tail}");
            ensure(
                station.id as usize == si,
                &sf("id"),
                format!(
                    "station ids must be contiguous from 0 in file order; expected {si}, got {}",
                    station.id
                ),
            )?;
            positive_finite(station.phy_rate_mbps, &sf("phy_rate_mbps"))?;
            for (fi, flow) in station.flows.iter().enumerate() {
                let ff = |tail: &str| format!("stations[{si}].flows[{fi}].{tail}");
                match flow.kind {
                    FlowKind::UdpCbr => {
                        let rate = flow
                            .rate_mbps
                            .ok_or_else(|| ScenarioError::invalid(ff("rate_mbps"), "required for udp_cbr flows"))?;
                        positive_finite(rate, &ff("rate_mbps"))?;
                        ensure(
                            flow.window_packets.is_none(),
                            &ff("window_packets"),
                            "only valid for tcp_like flows",
                        )?;
                        ensure(
                            flow.interval_ms.is_none(),
                            &ff("interval_ms"),
                            "only valid for ping flows",
                        )?;
                    }
                    FlowKind::TcpLike => {
                        let window = flow.window_packets.ok_or_else(|| {
                            ScenarioError::invalid(ff("window_packets"), "required for tcp_like flows")
                        })?;
                        ensure(window >= 1, &ff("window_packets"), "must be at least 1")?;
                        ensure(
                            flow.rate_mbps.is_none(),
                            &ff("rate_mbps"),
                            "only valid for udp_cbr flows",
                        )?;
                        ensure(
                            flow.interval_ms.is_none(),
                            &ff("interval_ms"),
                            "only valid for ping flows",
                        )?;
                    }
                    FlowKind::Ping => {
                        let interval = flow.interval_ms.ok_or_else(|| {
                            ScenarioError::invalid(ff("interval_ms"), "required for ping flows")
                        })?;
                        positive_finite(interval, &ff("interval_ms"))?;
                        ensure(
                            flow.direction == Direction::Down,
                            &ff("direction"),
                            "ping flows originate at the access point; use direction = \"down\"",
                        )?;
                        ensure(
                            flow.rate_mbps.is_none(),
                            &ff("rate_mbps"),
                            "only valid for udp_cbr flows",
                        )?;
                        ensure(
                            flow.window_packets.is_none(),
                            &ff("window_packets"),
                            "only valid for tcp_like flows",
                        )?;
                    }
                }
                if let Some(size) = flow.packet_size {
                    ensure(
                        (1..=2304).contains(&size),
                        &ff("packet_size"),
                        "must be in 1..=2304",
                    )?;
                }
                ensure(
                    flow.start_s.is_finite() && flow.start_s >= 0.0,
                    &ff("start_s"),
                    "must be a non-negative finite number",
                )?;
                if let Some(stop) = flow.stop_s {
                    ensure(
                        stop.is_finite() && stop > flow.start_s,
                        &ff("stop_s"),
                        format!("must be after start_s ({})", flow.start_s),
                    )?;
                }
            }
        }
        Ok(())
    }

    pub fn duration(&self) -> Nanos {
        secs_f64_to_ns(self.duration_s)
    }

    pub fn phy_rates(&self) -> Vec<f64> {
        self.stations.iter().map(|s| s.phy_rate_mbps * 1e6).collect()
    }

    /// Flow-queue pool config for per-TID queueing (fq_mac / airtime_fair_fq).
    pub fn fq_config(&self) -> FqMacConfig {
        FqMacConfig {
            num_flow_queues: self.queues.num_flow_queues,
            global_limit: self.queues.global_limit,
            quantum: self.queues.quantum_bytes,
            hash_seed: self.seed,
        }
    }

    /// Flow-queue config for the single qdisc-style instance (fq_codel).
    pub fn qdisc_config(&self) -> FqMacConfig {
        FqMacConfig {
            quantum: self.queues.qdisc_quantum_bytes,
            ..self.fq_config()
        }
    }

    pub fn scheduler_config(&self) -> SchedulerConfig {
        SchedulerConfig {
            quantum: us_f64_to_ns(self.scheduler.quantum_us),
            hw_queue_limit: self.scheduler.hw_queue_limit,
            sparse_optimization: self.scheduler.sparse_optimization,
        }
    }

    pub fn aggregate_limits(&self) -> AggregateLimits {
        AggregateLimits {
            max_ampdu_count: self.aggregation.max_ampdu_count,
            max_ampdu_bytes: self.aggregation.max_ampdu_bytes,
            max_txop: ms_f64_to_ns(self.aggregation.max_txop_ms),
        }
    }

    pub fn codel_params(&self) -> CodelParams {
        CodelParams::new(
            ms_f64_to_ns(self.codel.target_ms),
            ms_f64_to_ns(self.codel.interval_ms),
        )
    }

    pub fn adapt_config(&self) -> AdaptConfig {
        AdaptConfig {
            low_rate_threshold: self.codel.low_rate_threshold_mbps * 1e6,
            normal: self.codel_params(),
            low_rate: CodelParams::new(
                ms_f64_to_ns(self.codel.low_rate_target_ms),
                ms_f64_to_ns(self.codel.low_rate_interval_ms),
            ),
            hysteresis: secs_f64_to_ns(self.codel.hysteresis_s),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
schema_version = 1
duration_s = 5.0
seed = 42
scheme = "airtime_fair_fq"

[[stations]]
id = 0
phy_rate_mbps = 144.4

[[stations.flows]]
kind = "udp_cbr"
direction = "down"
rate_mbps = 50.0
"#;

    #[test]
    fn minimal_scenario_loads_with_defaults() {
        let s = Scenario::from_toml_str(MINIMAL).unwrap();
        assert_eq!(s.scheme, Scheme::AirtimeFairFq);
        assert_eq!(s.queues, QueueConfig::default());
        assert_eq!(s.scheduler, SchedulerTuning::default());
        assert_eq!(s.stations[0].flows[0].effective_packet_size(), 1500);
        assert_eq!(s.duration(), 5_000_000_000);
        assert_eq!(s.phy_rates(), vec![144.4e6]);
        let fq = s.fq_config();
        assert_eq!(fq.num_flow_queues, 1024);
        assert_eq!(fq.global_limit, 8192);
        assert_eq!(fq.quantum, 300);
        assert_eq!(s.qdisc_config().quantum, 1514);
        assert_eq!(s.scheduler_config().quantum, 1_000_000);
        assert_eq!(s.aggregate_limits().max_txop, 4_000_000);
        assert_eq!(s.codel_params(), CodelParams::normal());
        assert_eq!(s.adapt_config().hysteresis, 2_000_000_000);
    }

    #[test]
    fn round_trip_is_bit_identical() {
        let s = Scenario::from_toml_str(MINIMAL).unwrap();
        let written = s.to_toml_string();
        let reloaded = Scenario::from_toml_str(&written).unwrap();
        assert_eq!(s, reloaded);
        assert_eq!(written, reloaded.to_toml_string());
    }

    #[test]
    fn ping_defaults_to_64_bytes() {
        let text = MINIMAL.replace(
            "kind = \"udp_cbr\"\ndirection = \"down\"\nrate_mbps = 50.0",
            "kind = \"ping\"\ndirection = \"down\"\ninterval_ms = 100.0",
        );
        let s = Scenario::from_toml_str(&text).unwrap();
        assert_eq!(s.stations[0].flows[0].effective_packet_size(), 64);
    }

    fn expect_err(text: &str, field_fragment: &str) {
        let err = Scenario::from_toml_str(text).unwrap_err();
        let msg = err.to_string();
        assert!(
            msg.contains(field_fragment),
            "error `{msg}` should mention `{field_fragment}`"
        );
        assert_eq!(err.category(), "config");
    }

    #[test]
    fn zero_duration_is_rejected() {
        expect_err(&MINIMAL.replace("duration_s = 5.0", "duration_s = 0.0"), "duration_s");
    }

    #[test]
    fn unknown_scheme_lists_the_valid_names() {
        let err = Scenario::from_toml_str(&MINIMAL.replace("airtime_fair_fq", "wrr"))
            .unwrap_err()
            .to_string();
        for name in ["fifo", "fq_codel", "fq_mac", "airtime_fair_fq"] {
            assert!(err.contains(name), "`{err}` should list `{name}`");
        }
    }

    #[test]
    fn scheme_from_str_rejects_unknown_names() {
        let err = "wrr".parse::<Scheme>().unwrap_err().to_string();
        assert!(err.contains("airtime_fair_fq"));
        assert_eq!("fq_mac".parse::<Scheme>().unwrap(), Scheme::FqMac);
    }

    #[test]
    fn missing_flow_parameter_is_named() {
        expect_err(
            &MINIMAL.replace("rate_mbps = 50.0", ""),
            "stations[0].flows[0].rate_mbps",
        );
    }

    #[test]
    fn cross_kind_parameters_are_rejected() {
        expect_err(
            &MINIMAL.replace("rate_mbps = 50.0", "rate_mbps = 50.0\nwindow_packets = 10"),
            "stations[0].flows[0].window_packets",
        );
    }

    #[test]
    fn non_contiguous_station_ids_are_rejected() {
        expect_err(&MINIMAL.replace("id = 0", "id = 3"), "stations[0].id");
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let err = Scenario::from_toml_str(&format!("{MINIMAL}\nbogus_key = 1"))
            .unwrap_err()
            .to_string();
        assert!(err.contains("bogus_key") || err.contains("unknown field"), "{err}");
    }

    #[test]
    fn stop_before_start_is_rejected() {
        expect_err(
            &MINIMAL.replace("rate_mbps = 50.0", "rate_mbps = 50.0\nstart_s = 2.0\nstop_s = 1.0"),
            "stations[0].flows[0].stop_s",
        );
    }

    #[test]
    fn upstream_ping_is_rejected() {
        let text = MINIMAL.replace(
            "kind = \"udp_cbr\"\ndirection = \"down\"\nrate_mbps = 50.0",
            "kind = \"ping\"\ndirection = \"up\"\ninterval_ms = 100.0",
        );
        expect_err(&text, "stations[0].flows[0].direction");
    }

    #[test]
    fn load_reports_missing_file_as_io_error() {
        let err = Scenario::load(Path::new("/nonexistent/scenario.toml")).unwrap_err();
        assert_eq!(err.category(), "io");
        assert!(err.to_string().contains("/nonexistent/scenario.toml"));
    }
}
