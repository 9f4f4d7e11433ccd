//! The `sweep` subcommand: expand one base scenario into a scheme x seed
//! grid of scenario files (each reloadable bit-identically), optionally run
//! them all, and emit a manifest of what was produced.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};

use airfair_core::scenario::{Scenario, Scheme};
use airfair_core::sim::{self, SimError};
use airfair_core::MetricsReport;
use serde::Serialize;

use crate::error::CliError;
use crate::{SweepArgs, OUTPUT_SCHEMA_VERSION};

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    /// Path of the generated scenario file.
    pub file: String,
    pub scheme: Scheme,
    pub seed: u64,
    /// Path of the run report, when `--run` was given.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub total_throughput_bps: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub airtime_busy_share: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub jain_airtime: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepOutput {
    pub schema_version: u32,
    pub scenario: String,
    pub out_dir: String,
    pub ran: bool,
    pub variants: Vec<SweepRow>,
}

fn io_err(what: &str, path: &Path, err: std::io::Error) -> CliError {
    CliError::new("io", format!("could not {what} `{}`: {err}", path.display()))
}

fn run_all(scenarios: &[Scenario]) -> Vec<Result<MetricsReport, SimError>> {
    let mut slots: Vec<Option<Result<MetricsReport, SimError>>> =
        scenarios.iter().map(|_| None).collect();
    let next = AtomicUsize::new(0);
    let workers = std::thread::available_parallelism()
        .map(std::num::NonZeroUsize::get)
        .unwrap_or(1)
        .min(scenarios.len());
    std::thread::scope(|scope| {
        let mut handles = Vec::with_capacity(workers);
        for _ in 0..workers {
            let next = &next;
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
    slots
        .into_iter()
        .map(|slot| slot.expect("every variant ran"))
        .collect()
}

pub fn run_sweep(args: &SweepArgs) -> Result<SweepOutput, CliError> {
    let mut base = Scenario::load(&args.scenario)?;
    if let Some(seed) = args.seed {
        base.seed = seed;
    }
    let schemes: Vec<Scheme> = if args.schemes.is_empty() {
        Scheme::ALL.to_vec()
    } else {
        args.schemes.clone()
    };
    std::fs::create_dir_all(&args.out).map_err(|e| io_err("create directory", &args.out, e))?;
    let stem = args
        .scenario
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("scenario");

    let mut paths: Vec<PathBuf> = Vec::new();
    let mut variants: Vec<Scenario> = Vec::new();
    for &scheme in &schemes {
        for k in 0..args.seeds {
            let mut v = base.clone();
            v.scheme = scheme;
            v.seed = base.seed.wrapping_add(u64::from(k));
            let path = args
                .out
                .join(format!("{stem}_{}_s{}.toml", scheme.name(), v.seed));
            std::fs::write(&path, v.to_toml_string()).map_err(|e| io_err("write", &path, e))?;
            paths.push(path);
            variants.push(v);
        }
    }

    let mut rows: Vec<SweepRow> = paths
        .iter()
        .zip(&variants)
        .map(|(path, v)| SweepRow {
            file: path.display().to_string(),
            scheme: v.scheme,
            seed: v.seed,
            report: None,
            total_throughput_bps: None,
            airtime_busy_share: None,
            jain_airtime: None,
        })
        .collect();

    if args.run {
        let results = run_all(&variants);
        for ((row, path), result) in rows.iter_mut().zip(&paths).zip(results) {
            let report = result.map_err(CliError::from)?;
            let report_path = path.with_extension("report.json");
            let json = serde_json::to_string_pretty(&report)?;
            std::fs::write(&report_path, json.as_bytes())
                .map_err(|e| io_err("write", &report_path, e))?;
            row.report = Some(report_path.display().to_string());
            row.total_throughput_bps = Some(report.totals.throughput_bps);
            row.airtime_busy_share = Some(report.totals.airtime_busy_share);
            row.jain_airtime = report.jain_airtime;
        }
    }

    Ok(SweepOutput {
        schema_version: OUTPUT_SCHEMA_VERSION,
        scenario: args.scenario.display().to_string(),
        out_dir: args.out.display().to_string(),
        ran: args.run,
        variants: rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{Cli, Command};
    use clap::Parser;

    const BASE: &str = r#"
schema_version = 1
duration_s = 0.2
seed = 5
scheme = "fifo"

[[stations]]
id = 0
phy_rate_mbps = 144.4

[[stations.flows]]
kind = "udp_cbr"
direction = "down"
rate_mbps = 40.0
"#;

    fn sweep_args(dir: &Path, scenario: &Path, extra: &[&str]) -> SweepArgs {
        let mut argv = vec![
            "airfair".to_string(),
            "sweep".to_string(),
            "--scenario".to_string(),
            scenario.display().to_string(),
            "--out".to_string(),
            dir.display().to_string(),
        ];
        argv.extend(extra.iter().map(|s| s.to_string()));
        match Cli::parse_from(argv).command {
            Command::Sweep(args) => args,
            _ => unreachable!(),
        }
    }

    #[test]
    fn sweep_writes_reloadable_variants_for_every_scheme_and_seed() {
        let tmp = tempfile::tempdir().unwrap();
        let scenario_path = tmp.path().join("base.toml");
        std::fs::write(&scenario_path, BASE).unwrap();
        let out_dir = tmp.path().join("grid");

        let args = sweep_args(&out_dir, &scenario_path, &["--seeds", "2"]);
        let output = run_sweep(&args).unwrap();
        assert_eq!(output.variants.len(), 8); // 4 schemes x 2 seeds
        assert!(!output.ran);

        for row in &output.variants {
            let written = std::fs::read_to_string(&row.file).unwrap();
            let reloaded = Scenario::from_toml_str(&written).unwrap();
            assert_eq!(reloaded.scheme, row.scheme);
            assert_eq!(reloaded.seed, row.seed);
            // Round trip is bit-identical.
            assert_eq!(reloaded.to_toml_string(), written);
        }
        let names: Vec<&str> = output
            .variants
            .iter()
            .map(|r| Path::new(&r.file).file_name().unwrap().to_str().unwrap())
            .collect();
        assert!(names.contains(&"base_fifo_s5.toml"));
        assert!(names.contains(&"base_airtime_fair_fq_s6.toml"));
    }

    #[test]
    fn sweep_run_attaches_reports_matching_a_direct_run() {
        let tmp = tempfile::tempdir().unwrap();
        let scenario_path = tmp.path().join("base.toml");
        std::fs::write(&scenario_path, BASE).unwrap();
        let out_dir = tmp.path().join("grid");

        let args = sweep_args(
            &out_dir,
            &scenario_path,
            &["--schemes", "fifo,fq_mac", "--seeds", "1", "--run"],
        );
        let output = run_sweep(&args).unwrap();
        assert_eq!(output.variants.len(), 2);
        for row in &output.variants {
            let report_text = std::fs::read_to_string(row.report.as_ref().unwrap()).unwrap();
            let report: MetricsReport = serde_json::from_str(&report_text).unwrap();
            let rerun = sim::run(&Scenario::load(Path::new(&row.file)).unwrap()).unwrap();
            assert_eq!(report, rerun);
            assert_eq!(row.total_throughput_bps, Some(rerun.totals.throughput_bps));
        }
    }
}
