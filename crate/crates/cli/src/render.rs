//! Output rendering: pretty JSON, flat CSV with a `record` discriminator
//! column, and human-readable tables. CSV rows carry exactly the same values
//! as the JSON documents (full float precision); the human format rounds for
//! the eye.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use airfair_core::sim::metrics::{Percentiles, StationMetrics, Totals};
use serde::Serialize;

use crate::error::CliError;
use crate::sim::{SummaryStation, SummaryTotals};
use crate::{CompareOutput, ModelTable, OutputFormat, SimOutput, SweepOutput};

/// Run `render` against `--out` (file) or stdout.
pub fn emit(
    out: &Option<PathBuf>,
    render: impl FnOnce(&mut dyn Write) -> Result<(), CliError>,
) -> Result<(), CliError> {
    match out {
        Some(path) => {
            let file = File::create(path).map_err(|e| {
                CliError::new("io", format!("could not create `{}`: {e}", path.display()))
            })?;
            let mut writer = BufWriter::new(file);
            render(&mut writer)?;
            writer.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            render(&mut lock)?;
            lock.flush()?;
        }
    }
    Ok(())
}

fn json_out<T: Serialize>(w: &mut dyn Write, value: &T) -> Result<(), CliError> {
    serde_json::to_writer_pretty(&mut *w, value)?;
    writeln!(w)?;
    Ok(())
}

/// Shortest decimal form that parses back to the same bits — the same
/// representation serde_json emits, so CSV and JSON agree exactly.
fn num(v: f64) -> String {
    format!("{v}")
}

fn opt_num(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

fn p_field(p: Option<Percentiles>, pick: impl Fn(Percentiles) -> f64) -> String {
    opt_num(p.map(pick))
}

/// `p50/p90/p99` in milliseconds, or `-` when no samples exist.
fn p3(p: Option<Percentiles>) -> String {
    match p {
        Some(p) => format!("{:.1}/{:.1}/{:.1}", p.p50_ms, p.p90_ms, p.p99_ms),
        None => "-".to_string(),
    }
}

fn fmt_count(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v:.1}")
    }
}

// ---------------------------------------------------------------------------
// model

pub fn model_out(w: &mut dyn Write, format: OutputFormat, table: &ModelTable) -> Result<(), CliError> {
    match format {
        OutputFormat::Json => json_out(w, table),
        OutputFormat::Csv => {
            let mut csv = csv::Writer::from_writer(w);
            csv.write_record([
                "record",
                "station",
                "aggregation",
                "payload_bytes",
                "phy_rate_mbps",
                "airtime_share",
                "base_rate_bps",
                "effective_rate_bps",
            ])?;
            for r in &table.stations {
                csv.write_record([
                    "station".to_string(),
                    r.station.to_string(),
                    num(r.aggregation),
                    num(r.payload_bytes),
                    num(r.phy_rate_mbps),
                    num(r.airtime_share),
                    num(r.base_rate_bps),
                    num(r.effective_rate_bps),
                ])?;
            }
            csv.write_record([
                "total".to_string(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                num(table.total_effective_rate_bps),
            ])?;
            csv.flush()?;
            Ok(())
        }
        OutputFormat::Human => {
            writeln!(
                w,
                "analytical airtime model (fairness: {})",
                if table.airtime_fairness { "on" } else { "off" }
            )?;
            writeln!(w)?;
            writeln!(
                w,
                "  {:>7}  {:>11}  {:>9}  {:>9}  {:>13}  {:>9}  {:>14}",
                "station", "aggregation", "payload_B", "rate_Mb/s", "airtime_share", "base_Mb/s", "effective_Mb/s"
            )?;
            for r in &table.stations {
                writeln!(
                    w,
                    "  {:>7}  {:>11.2}  {:>9}  {:>9.1}  {:>13.4}  {:>9.2}  {:>14.2}",
                    r.station,
                    r.aggregation,
                    r.payload_bytes,
                    r.phy_rate_mbps,
                    r.airtime_share,
                    r.base_rate_bps / 1e6,
                    r.effective_rate_bps / 1e6,
                )?;
            }
            writeln!(w)?;
            writeln!(
                w,
                "total effective rate: {:.2} Mb/s",
                table.total_effective_rate_bps / 1e6
            )?;
            Ok(())
        }
    }
}

// ---------------------------------------------------------------------------
// sim

const SIM_CSV_HEADER: [&str; 22] = [
    "record",
    "run",
    "seed",
    "scheme",
    "station",
    "phy_rate_mbps",
    "throughput_bps",
    "airtime_share",
    "mean_aggregation",
    "generated",
    "delivered",
    "drop_overflow",
    "drop_codel",
    "dropped",
    "residual",
    "latency_p50_ms",
    "latency_p90_ms",
    "latency_p99_ms",
    "ping_p50_ms",
    "ping_p90_ms",
    "ping_p99_ms",
    "jain_airtime",
];

fn sim_station_record(run: Option<usize>, report_seed: Option<u64>, scheme: &str, s: &StationMetrics) -> Vec<String> {
    vec![
        if run.is_some() { "station" } else { "median_station" }.to_string(),
        run.map(|r| r.to_string()).unwrap_or_default(),
        report_seed.map(|s| s.to_string()).unwrap_or_default(),
        scheme.to_string(),
        s.station_id.to_string(),
        num(s.phy_rate_mbps),
        num(s.throughput_bps),
        num(s.airtime_share),
        num(s.mean_aggregation),
        s.generated.to_string(),
        s.delivered.to_string(),
        s.drops.overflow.to_string(),
        s.drops.codel.to_string(),
        s.drops.total().to_string(),
        String::new(),
        p_field(s.latency, |p| p.p50_ms),
        p_field(s.latency, |p| p.p90_ms),
        p_field(s.latency, |p| p.p99_ms),
        p_field(s.ping_rtt, |p| p.p50_ms),
        p_field(s.ping_rtt, |p| p.p90_ms),
        p_field(s.ping_rtt, |p| p.p99_ms),
        String::new(),
    ]
}

fn sim_totals_record(
    run: Option<usize>,
    report_seed: Option<u64>,
    scheme: &str,
    t: &Totals,
    jain: Option<f64>,
) -> Vec<String> {
    vec![
        if run.is_some() { "totals" } else { "median_totals" }.to_string(),
        run.map(|r| r.to_string()).unwrap_or_default(),
        report_seed.map(|s| s.to_string()).unwrap_or_default(),
        scheme.to_string(),
        String::new(),
        String::new(),
        num(t.throughput_bps),
        num(t.airtime_busy_share),
        String::new(),
        t.generated.to_string(),
        t.delivered.to_string(),
        String::new(),
        String::new(),
        t.dropped.to_string(),
        t.residual.to_string(),
        String::new(),
        String::new(),
        String::new(),
        String::new(),
        String::new(),
        String::new(),
        opt_num(jain),
    ]
}

fn summary_station_record(scheme: &str, s: &SummaryStation) -> Vec<String> {
    vec![
        "median_station".to_string(),
        String::new(),
        String::new(),
        scheme.to_string(),
        s.station_id.to_string(),
        num(s.phy_rate_mbps),
        num(s.throughput_bps),
        num(s.airtime_share),
        num(s.mean_aggregation),
        num(s.generated),
        num(s.delivered),
        String::new(),
        String::new(),
        num(s.dropped),
        String::new(),
        p_field(s.latency, |p| p.p50_ms),
        p_field(s.latency, |p| p.p90_ms),
        p_field(s.latency, |p| p.p99_ms),
        p_field(s.ping_rtt, |p| p.p50_ms),
        p_field(s.ping_rtt, |p| p.p90_ms),
        p_field(s.ping_rtt, |p| p.p99_ms),
        String::new(),
    ]
}

fn summary_totals_record(scheme: &str, t: &SummaryTotals) -> Vec<String> {
    vec![
        "median_totals".to_string(),
        String::new(),
        String::new(),
        scheme.to_string(),
        String::new(),
        String::new(),
        num(t.throughput_bps),
        num(t.airtime_busy_share),
        String::new(),
        num(t.generated),
        num(t.delivered),
        String::new(),
        String::new(),
        num(t.dropped),
        num(t.residual),
        String::new(),
        String::new(),
        String::new(),
        String::new(),
        String::new(),
        String::new(),
        opt_num(t.jain_airtime),
    ]
}

fn human_station_table(w: &mut dyn Write, rows: &[StationMetrics]) -> io::Result<()> {
    human_station_header(w)?;
    for s in rows {
        human_station_row(
            w,
            s.station_id,
            s.phy_rate_mbps,
            s.throughput_bps,
            s.airtime_share,
            s.mean_aggregation,
            s.generated as f64,
            s.delivered as f64,
            s.drops.total() as f64,
            s.latency,
            s.ping_rtt,
        )?;
    }
    Ok(())
}

fn human_station_header(w: &mut dyn Write) -> io::Result<()> {
    writeln!(
        w,
        "  {:>7}  {:>9}  {:>9}  {:>7}  {:>6}  {:>9}  {:>9}  {:>6}  {:<16}  {:<16}",
        "station",
        "rate_Mb/s",
        "tput_Mb/s",
        "airtime",
        "aggr",
        "generated",
        "delivered",
        "drops",
        "lat p50/90/99 ms",
        "ping p50/90/99 ms"
    )
}

#[allow(clippy::too_many_arguments)]
fn human_station_row(
    w: &mut dyn Write,
    station: u16,
    rate_mbps: f64,
    tput_bps: f64,
    share: f64,
    aggr: f64,
    generated: f64,
    delivered: f64,
    dropped: f64,
    latency: Option<Percentiles>,
    ping: Option<Percentiles>,
) -> io::Result<()> {
    writeln!(
        w,
        "  {:>7}  {:>9.2}  {:>9.2}  {:>7.4}  {:>6.2}  {:>9}  {:>9}  {:>6}  {:<16}  {:<16}",
        station,
        rate_mbps,
        tput_bps / 1e6,
        share,
        aggr,
        fmt_count(generated),
        fmt_count(delivered),
        fmt_count(dropped),
        p3(latency),
        p3(ping),
    )
}

struct TotalsLine {
    tput_bps: f64,
    busy: f64,
    jain: Option<f64>,
    generated: f64,
    delivered: f64,
    dropped: f64,
    residual: f64,
}

fn human_totals_line(w: &mut dyn Write, t: &TotalsLine) -> io::Result<()> {
    let jain = t
        .jain
        .map(|j| format!("{j:.4}"))
        .unwrap_or_else(|| "-".to_string());
    writeln!(
        w,
        "  total {:.2} Mb/s  busy {:.1}%  jain(airtime) {}  generated {}  delivered {}  dropped {}  residual {}",
        t.tput_bps / 1e6,
        t.busy * 100.0,
        jain,
        fmt_count(t.generated),
        fmt_count(t.delivered),
        fmt_count(t.dropped),
        fmt_count(t.residual),
    )
}

pub fn sim_out(w: &mut dyn Write, format: OutputFormat, output: &SimOutput) -> Result<(), CliError> {
    match format {
        OutputFormat::Json => json_out(w, output),
        OutputFormat::Csv => {
            let mut csv = csv::Writer::from_writer(w);
            csv.write_record(SIM_CSV_HEADER)?;
            let scheme = output.scheme.name();
            for (k, report) in output.runs.iter().enumerate() {
                for s in &report.stations {
                    csv.write_record(sim_station_record(Some(k), Some(report.seed), scheme, s))?;
                }
                csv.write_record(sim_totals_record(
                    Some(k),
                    Some(report.seed),
                    scheme,
                    &report.totals,
                    report.jain_airtime,
                ))?;
            }
            for s in &output.summary.stations {
                csv.write_record(summary_station_record(scheme, s))?;
            }
            csv.write_record(summary_totals_record(scheme, &output.summary.totals))?;
            csv.flush()?;
            Ok(())
        }
        OutputFormat::Human => {
            writeln!(
                w,
                "simulation: {}  scheme={}  reps={}",
                output.scenario, output.scheme, output.reps
            )?;
            for (k, report) in output.runs.iter().enumerate() {
                writeln!(w)?;
                writeln!(
                    w,
                    "run {k}  seed={}  duration={}s",
                    report.seed, report.duration_s
                )?;
                human_totals_line(
                    w,
                    &TotalsLine {
                        tput_bps: report.totals.throughput_bps,
                        busy: report.totals.airtime_busy_share,
                        jain: report.jain_airtime,
                        generated: report.totals.generated as f64,
                        delivered: report.totals.delivered as f64,
                        dropped: report.totals.dropped as f64,
                        residual: report.totals.residual as f64,
                    },
                )?;
                human_station_table(w, &report.stations)?;
            }
            writeln!(w)?;
            writeln!(w, "median over {} runs", output.runs.len())?;
            let t = &output.summary.totals;
            human_totals_line(
                w,
                &TotalsLine {
                    tput_bps: t.throughput_bps,
                    busy: t.airtime_busy_share,
                    jain: t.jain_airtime,
                    generated: t.generated,
                    delivered: t.delivered,
                    dropped: t.dropped,
                    residual: t.residual,
                },
            )?;
            human_station_header(w)?;
            for s in &output.summary.stations {
                human_station_row(
                    w,
                    s.station_id,
                    s.phy_rate_mbps,
                    s.throughput_bps,
                    s.airtime_share,
                    s.mean_aggregation,
                    s.generated,
                    s.delivered,
                    s.dropped,
                    s.latency,
                    s.ping_rtt,
                )?;
            }
            Ok(())
        }
    }
}

// ---------------------------------------------------------------------------
// compare

pub fn compare_out(
    w: &mut dyn Write,
    format: OutputFormat,
    output: &CompareOutput,
) -> Result<(), CliError> {
    match format {
        OutputFormat::Json => json_out(w, output),
        OutputFormat::Csv => {
            let mut csv = csv::Writer::from_writer(w);
            csv.write_record([
                "record",
                "scheme",
                "seed",
                "station",
                "phy_rate_mbps",
                "mean_aggregation",
                "payload_bytes",
                "model_airtime_share",
                "sim_airtime_share",
                "model_throughput_bps",
                "sim_throughput_bps",
                "deviation_pct",
                "airtime_busy_share",
            ])?;
            let scheme = output.scheme.name();
            for r in &output.stations {
                csv.write_record([
                    "station".to_string(),
                    scheme.to_string(),
                    output.seed.to_string(),
                    r.station.to_string(),
                    num(r.phy_rate_mbps),
                    num(r.mean_aggregation),
                    num(r.payload_bytes),
                    num(r.model_airtime_share),
                    num(r.sim_airtime_share),
                    num(r.model_throughput_bps),
                    num(r.sim_throughput_bps),
                    num(r.deviation_pct),
                    String::new(),
                ])?;
            }
            csv.write_record([
                "totals".to_string(),
                scheme.to_string(),
                output.seed.to_string(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                num(output.total_model_throughput_bps),
                num(output.total_sim_throughput_bps),
                num(output.total_deviation_pct),
                num(output.airtime_busy_share),
            ])?;
            csv.flush()?;
            Ok(())
        }
        OutputFormat::Human => {
            writeln!(
                w,
                "model vs simulation  scheme={}  seed={}  duration={}s  busy={:.1}%",
                output.scheme,
                output.seed,
                output.duration_s,
                output.airtime_busy_share * 100.0
            )?;
            if let Some(warning) = &output.warning {
                writeln!(w, "warning: {warning}")?;
            }
            writeln!(w)?;
            writeln!(
                w,
                "  {:>7}  {:>9}  {:>6}  {:>9}  {:>11}  {:>9}  {:>10}  {:>8}  {:>9}",
                "station",
                "rate_Mb/s",
                "aggr",
                "payload_B",
                "model_share",
                "sim_share",
                "model_Mb/s",
                "sim_Mb/s",
                "deviation"
            )?;
            for r in &output.stations {
                writeln!(
                    w,
                    "  {:>7}  {:>9.1}  {:>6.2}  {:>9}  {:>11.4}  {:>9.4}  {:>10.2}  {:>8.2}  {:>+8.2}%",
                    r.station,
                    r.phy_rate_mbps,
                    r.mean_aggregation,
                    r.payload_bytes,
                    r.model_airtime_share,
                    r.sim_airtime_share,
                    r.model_throughput_bps / 1e6,
                    r.sim_throughput_bps / 1e6,
                    r.deviation_pct,
                )?;
            }
            writeln!(w)?;
            writeln!(
                w,
                "totals: model {:.2} Mb/s  sim {:.2} Mb/s  deviation {:+.2}%",
                output.total_model_throughput_bps / 1e6,
                output.total_sim_throughput_bps / 1e6,
                output.total_deviation_pct,
            )?;
            Ok(())
        }
    }
}

// ---------------------------------------------------------------------------
// sweep

pub fn sweep_out(w: &mut dyn Write, format: OutputFormat, output: &SweepOutput) -> Result<(), CliError> {
    match format {
        OutputFormat::Json => json_out(w, output),
        OutputFormat::Csv => {
            let mut csv = csv::Writer::from_writer(w);
            csv.write_record([
                "record",
                "file",
                "scheme",
                "seed",
                "report",
                "total_throughput_bps",
                "airtime_busy_share",
                "jain_airtime",
            ])?;
            for r in &output.variants {
                csv.write_record([
                    "variant".to_string(),
                    r.file.clone(),
                    r.scheme.name().to_string(),
                    r.seed.to_string(),
                    r.report.clone().unwrap_or_default(),
                    opt_num(r.total_throughput_bps),
                    opt_num(r.airtime_busy_share),
                    opt_num(r.jain_airtime),
                ])?;
            }
            csv.flush()?;
            Ok(())
        }
        OutputFormat::Human => {
            writeln!(
                w,
                "sweep of {} -> {} ({} variants{})",
                output.scenario,
                output.out_dir,
                output.variants.len(),
                if output.ran { ", ran" } else { "" }
            )?;
            writeln!(w)?;
            let file_width = output
                .variants
                .iter()
                .map(|r| r.file.len())
                .max()
                .unwrap_or(4)
                .max(4);
            writeln!(
                w,
                "  {:<file_width$}  {:<15}  {:>6}  {:>9}  {:>6}  {:>6}",
                "file", "scheme", "seed", "tput_Mb/s", "busy", "jain"
            )?;
            for r in &output.variants {
                let tput = r
                    .total_throughput_bps
                    .map(|v| format!("{:.2}", v / 1e6))
                    .unwrap_or_else(|| "-".to_string());
                let busy = r
                    .airtime_busy_share
                    .map(|v| format!("{v:.3}"))
                    .unwrap_or_else(|| "-".to_string());
                let jain = r
                    .jain_airtime
                    .map(|v| format!("{v:.4}"))
                    .unwrap_or_else(|| "-".to_string());
                writeln!(
                    w,
                    "  {:<file_width$}  {:<15}  {:>6}  {:>9}  {:>6}  {:>6}",
                    r.file,
                    r.scheme.name(),
                    r.seed,
                    tput,
                    busy,
                    jain
                )?;
            }
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::model_table;
    use crate::sim::{run_reps, summarize};
    use airfair_core::phy_model::StationModelInput;
    use airfair_core::scenario::Scenario;

    fn render_to_string(
        f: impl FnOnce(&mut dyn Write) -> Result<(), CliError>,
    ) -> String {
        let mut buf: Vec<u8> = Vec::new();
        f(&mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    fn small_sim_output() -> SimOutput {
        let scenario = Scenario::from_toml_str(
            r#"
schema_version = 1
duration_s = 0.2
seed = 11
scheme = "fq_mac"

[[stations]]
id = 0
phy_rate_mbps = 144.4

[[stations.flows]]
kind = "udp_cbr"
direction = "down"
rate_mbps = 40.0

[[stations.flows]]
kind = "ping"
direction = "down"
interval_ms = 20.0
"#,
        )
        .unwrap();
        let runs = run_reps(&scenario, 2, None).unwrap();
        let summary = summarize(&runs);
        SimOutput {
            schema_version: crate::OUTPUT_SCHEMA_VERSION,
            scenario: "test.toml".to_string(),
            scheme: scenario.scheme,
            reps: 2,
            seeds: runs.iter().map(|r| r.seed).collect(),
            runs,
            summary,
        }
    }

    #[test]
    fn csv_and_json_sim_outputs_carry_identical_values() {
        let output = small_sim_output();
        let json = render_to_string(|w| sim_out(w, OutputFormat::Json, &output));
        let csv_text = render_to_string(|w| sim_out(w, OutputFormat::Csv, &output));
        let parsed: serde_json::Value = serde_json::from_str(&json).unwrap();

        let mut reader = csv::Reader::from_reader(csv_text.as_bytes());
        let headers = reader.headers().unwrap().clone();
        let col = |name: &str| headers.iter().position(|h| h == name).unwrap();
        let mut station_rows = 0;
        let mut checked_median = false;
        for row in reader.records() {
            let row = row.unwrap();
            match &row[col("record")] {
                "station" => {
                    let run: usize = row[col("run")].parse().unwrap();
                    let sid: usize = row[col("station")].parse().unwrap();
                    let from_json = parsed["runs"][run]["stations"][sid]["throughput_bps"]
                        .as_f64()
                        .unwrap();
                    let from_csv: f64 = row[col("throughput_bps")].parse().unwrap();
                    assert_eq!(from_csv, from_json, "run {run} station {sid}");
                    let ping_json = parsed["runs"][run]["stations"][sid]["ping_rtt"]["p50_ms"]
                        .as_f64()
                        .unwrap();
                    let ping_csv: f64 = row[col("ping_p50_ms")].parse().unwrap();
                    assert_eq!(ping_csv, ping_json);
                    station_rows += 1;
                }
                "totals" => {
                    let run: usize = row[col("run")].parse().unwrap();
                    let from_json = parsed["runs"][run]["totals"]["airtime_busy_share"]
                        .as_f64()
                        .unwrap();
                    let from_csv: f64 = row[col("airtime_share")].parse().unwrap();
                    assert_eq!(from_csv, from_json);
                }
                "median_totals" => {
                    let from_json = parsed["summary"]["totals"]["throughput_bps"]
                        .as_f64()
                        .unwrap();
                    let from_csv: f64 = row[col("throughput_bps")].parse().unwrap();
                    assert_eq!(from_csv, from_json);
                    checked_median = true;
                }
                _ => {}
            }
        }
        assert_eq!(station_rows, 2);
        assert!(checked_median);
    }

    #[test]
    fn csv_and_json_model_outputs_carry_identical_values() {
        let table = model_table(
            &[
                StationModelInput {
                    aggregation: 18.44,
                    payload_bytes: 1500.0,
                    phy_rate: 144.4e6,
                },
                StationModelInput {
                    aggregation: 1.89,
                    payload_bytes: 1500.0,
                    phy_rate: 7.2e6,
                },
            ],
            true,
        )
        .unwrap();
        let json = render_to_string(|w| model_out(w, OutputFormat::Json, &table));
        let csv_text = render_to_string(|w| model_out(w, OutputFormat::Csv, &table));
        let parsed: serde_json::Value = serde_json::from_str(&json).unwrap();

        let mut reader = csv::Reader::from_reader(csv_text.as_bytes());
        for (i, row) in reader.records().enumerate() {
            let row = row.unwrap();
            if &row[0] == "station" {
                let from_json = parsed["stations"][i]["effective_rate_bps"].as_f64().unwrap();
                let from_csv: f64 = row[7].parse().unwrap();
                assert_eq!(from_csv, from_json);
            } else {
                let from_json = parsed["total_effective_rate_bps"].as_f64().unwrap();
                let from_csv: f64 = row[7].parse().unwrap();
                assert_eq!(from_csv, from_json);
            }
        }
    }

    #[test]
    fn human_output_renders_every_section() {
        let output = small_sim_output();
        let text = render_to_string(|w| sim_out(w, OutputFormat::Human, &output));
        assert!(text.contains("run 0  seed=11"), "{text}");
        assert!(text.contains("run 1  seed=12"), "{text}");
        assert!(text.contains("median over 2 runs"), "{text}");
        assert!(text.contains("ping p50/90/99 ms"), "{text}");
    }

    #[test]
    fn schema_version_is_stamped_on_every_json_document() {
        let output = small_sim_output();
        for json in [
            render_to_string(|w| sim_out(w, OutputFormat::Json, &output)),
            render_to_string(|w| {
                model_out(
                    w,
                    OutputFormat::Json,
                    &model_table(
                        &[StationModelInput {
                            aggregation: 2.0,
                            payload_bytes: 1500.0,
                            phy_rate: 144.4e6,
                        }],
                        false,
                    )
                    .unwrap(),
                )
            }),
        ] {
            let parsed: serde_json::Value = serde_json::from_str(&json).unwrap();
            assert_eq!(parsed["schema_version"], 1);
        }
    }
}
