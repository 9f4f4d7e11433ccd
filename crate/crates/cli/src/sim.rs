//! The `sim` subcommand: seeded repetitions of one scenario, fanned out
//! across threads, with per-run reports and a median summary.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};

use airfair_core::scenario::{Scenario, Scheme};
use airfair_core::sim::metrics::{MetricsReport, Percentiles};
use airfair_core::sim::trace::JsonlTrace;
use airfair_core::sim::{self, SimError};
use serde::Serialize;

use crate::error::CliError;
use crate::{SimArgs, OUTPUT_SCHEMA_VERSION};

#[derive(Debug, Clone, Serialize)]
pub struct SimOutput {
    pub schema_version: u32,
    pub scenario: String,
    pub scheme: Scheme,
    pub reps: u32,
    pub seeds: Vec<u64>,
    pub runs: Vec<MetricsReport>,
    pub summary: SimSummary,
}

/// Medians across repetitions, the summary statistic for every field.
#[derive(Debug, Clone, Serialize)]
pub struct SimSummary {
    pub stations: Vec<SummaryStation>,
    pub totals: SummaryTotals,
}

#[derive(Debug, Clone, Serialize)]
pub struct SummaryStation {
    pub station_id: u16,
    pub phy_rate_mbps: f64,
    pub throughput_bps: f64,
    pub airtime_share: f64,
    pub mean_aggregation: f64,
    pub generated: f64,
    pub delivered: f64,
    pub dropped: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub latency: Option<Percentiles>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ping_rtt: Option<Percentiles>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SummaryTotals {
    pub throughput_bps: f64,
    pub airtime_busy_share: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub jain_airtime: Option<f64>,
    pub generated: f64,
    pub delivered: f64,
    pub dropped: f64,
    pub residual: f64,
}

/// Median of a non-empty slice; even counts average the two middle values.
fn median(values: &mut [f64]) -> f64 {
    assert!(!values.is_empty(), "median of no values");
    values.sort_by(|a, b| a.total_cmp(b));
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    }
}

fn median_of<T>(items: &[T], f: impl Fn(&T) -> f64) -> f64 {
    let mut values: Vec<f64> = items.iter().map(f).collect();
    median(&mut values)
}

/// Median over the values that are present; `None` when none are.
fn median_opt<T>(items: &[T], f: impl Fn(&T) -> Option<f64>) -> Option<f64> {
    let mut values: Vec<f64> = items.iter().filter_map(f).collect();
    if values.is_empty() {
        None
    } else {
        Some(median(&mut values))
    }
}

fn median_percentiles<T>(items: &[T], f: impl Fn(&T) -> Option<Percentiles>) -> Option<Percentiles> {
    Some(Percentiles {
        p50_ms: median_opt(items, |x| f(x).map(|p| p.p50_ms))?,
        p90_ms: median_opt(items, |x| f(x).map(|p| p.p90_ms))?,
        p99_ms: median_opt(items, |x| f(x).map(|p| p.p99_ms))?,
    })
}

pub fn summarize(runs: &[MetricsReport]) -> SimSummary {
    let stations = (0..runs[0].stations.len())
        .map(|i| {
            let first = &runs[0].stations[i];
            SummaryStation {
                station_id: first.station_id,
                phy_rate_mbps: first.phy_rate_mbps,
                throughput_bps: median_of(runs, |r| r.stations[i].throughput_bps),
                airtime_share: median_of(runs, |r| r.stations[i].airtime_share),
                mean_aggregation: median_of(runs, |r| r.stations[i].mean_aggregation),
                generated: median_of(runs, |r| r.stations[i].generated as f64),
                delivered: median_of(runs, |r| r.stations[i].delivered as f64),
                dropped: median_of(runs, |r| r.stations[i].drops.total() as f64),
                latency: median_percentiles(runs, |r| r.stations[i].latency),
                ping_rtt: median_percentiles(runs, |r| r.stations[i].ping_rtt),
            }
        })
        .collect();
    SimSummary {
        stations,
        totals: SummaryTotals {
            throughput_bps: median_of(runs, |r| r.totals.throughput_bps),
            airtime_busy_share: median_of(runs, |r| r.totals.airtime_busy_share),
            jain_airtime: median_opt(runs, |r| r.jain_airtime),
            generated: median_of(runs, |r| r.totals.generated as f64),
            delivered: median_of(runs, |r| r.totals.delivered as f64),
            dropped: median_of(runs, |r| r.totals.dropped as f64),
            residual: median_of(runs, |r| r.totals.residual as f64),
        },
    }
}

/// Run `reps` seeded copies of `base` (seed, seed+1, ...). The first
/// repetition optionally records a packet trace; the rest fan out across
/// threads, and reports are reassembled in seed order.
pub fn run_reps(
    base: &Scenario,
    reps: u32,
    trace: Option<&Path>,
) -> Result<Vec<MetricsReport>, CliError> {
    let scenarios: Vec<Scenario> = (0..reps)
        .map(|k| {
            let mut s = base.clone();
            s.seed = base.seed.wrapping_add(u64::from(k));
            s
        })
        .collect();

    let mut slots: Vec<Option<Result<MetricsReport, SimError>>> =
        scenarios.iter().map(|_| None).collect();
    let start = if let Some(path) = trace {
        let file = File::create(path).map_err(|e| {
            CliError::new("io", format!("could not create trace file `{}`: {e}", path.display()))
        })?;
        let mut sink = JsonlTrace::new(BufWriter::new(file));
        let report = sim::run_with_trace(&scenarios[0], &mut sink);
        sink.into_inner().flush().map_err(|e| {
            CliError::new("io", format!("could not write trace file `{}`: {e}", path.display()))
        })?;
        slots[0] = Some(report);
        1
    } else {
        0
    };

    if start < scenarios.len() {
        let next = AtomicUsize::new(start);
        let workers = std::thread::available_parallelism()
            .map(std::num::NonZeroUsize::get)
            .unwrap_or(1)
            .min(scenarios.len() - start);
        std::thread::scope(|scope| {
            let mut handles = Vec::with_capacity(workers);
            for _ in 0..workers {
                let next = &next;
                let scenarios = &scenarios;
                handles.push(scope.spawn(move || {
                    let mut local = Vec::new();
                    loop {
                        let i = next.fetch_add(1, Ordering::Relaxed);
                        if i >= scenarios.len() {
                            break;
                        }
                        local.push((i, sim::run(&scenarios[i])));
                    }
                    local
                }));
            }
            for handle in handles {
                for (i, report) in handle.join().expect("simulation worker panicked") {
                    slots[i] = Some(report);
                }
            }
        });
    }

    slots
        .into_iter()
        .map(|slot| slot.expect("every repetition ran"))
        .collect::<Result<Vec<_>, _>>()
        .map_err(CliError::from)
}

pub fn run_sim(args: &SimArgs) -> Result<SimOutput, CliError> {
    let mut scenario = Scenario::load(&args.scenario)?;
    if let Some(scheme) = args.scheme {
        scenario.scheme = scheme;
    }
    if let Some(seed) = args.seed {
        scenario.seed = seed;
    }
    let runs = run_reps(&scenario, args.reps, args.trace.as_deref())?;
    let summary = summarize(&runs);
    Ok(SimOutput {
        schema_version: OUTPUT_SCHEMA_VERSION,
        scenario: args.scenario.display().to_string(),
        scheme: scenario.scheme,
        reps: args.reps,
        seeds: runs.iter().map(|r| r.seed).collect(),
        runs,
        summary,
    })
}
