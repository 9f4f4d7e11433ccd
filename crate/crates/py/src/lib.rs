//! Python bindings for the airfair analytical model and simulator.
//!
//! The module mirrors the CLI's core operations: the closed-form
//! throughput/airtime model, Jain's fairness index, and full scenario
//! simulation returning the metrics report as JSON.

use std::path::PathBuf;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use airfair_core::phy_model::{self, PhyConstants, StationModelInput};
use airfair_core::scenario::{Scenario, Scheme};
use airfair_core::sim;
use airfair_core::sim::metrics::jain_index;

/// On-air bytes for one MPDU carrying `payload_bytes` of data (MAC header,
/// FCS, 4-byte alignment padding, and A-MPDU delimiter included).
#[pyfunction]
fn mpdu_bytes(payload_bytes: f64) -> f64 {
    phy_model::mpdu_length(payload_bytes, &PhyConstants::default())
}

/// Standalone effective MAC throughput in bits/s for a station sending
/// A-MPDUs of `aggregation` MPDUs of `payload_bytes` each at
/// `phy_rate_mbps` Mb/s, with all framing and per-transmission overheads.
#[pyfunction]
fn base_rate(aggregation: f64, payload_bytes: f64, phy_rate_mbps: f64) -> PyResult<f64> {
    phy_model::base_rate(
        aggregation,
        payload_bytes,
        phy_rate_mbps * 1e6,
        &PhyConstants::default(),
    )
    .map_err(|e| PyValueError::new_err(e.to_string()))
}

/// Predict per-station airtime shares and throughput for saturated stations.
///
/// `stations` is a list of `(aggregation, payload_bytes, phy_rate_mbps)`
/// tuples. With `fairness=True` every station receives an equal airtime
/// share (the airtime-fair scheduler); with `fairness=False` shares are
/// proportional to each station's own transmission duration (what a FIFO
/// queue produces, i.e. the rate anomaly).
///
/// Returns a list of dicts with keys `airtime_share`, `base_rate_bps`, and
/// `effective_rate_bps`.
#[pyfunction]
#[pyo3(signature = (stations, fairness = true))]
fn predict(
    py: Python<'_>,
    stations: Vec<(f64, f64, f64)>,
    fairness: bool,
) -> PyResult<Vec<Py<PyDict>>> {
    let inputs: Vec<StationModelInput> = stations
        .iter()
        .map(|&(n, l, r)| StationModelInput {
            aggregation: n,
            payload_bytes: l,
            phy_rate: r * 1e6,
        })
        .collect();
    let rows = phy_model::predict(&inputs, fairness, &PhyConstants::default())
        .map_err(|e| PyValueError::new_err(e.to_string()))?;
    rows.into_iter()
        .map(|p| {
            let d = PyDict::new(py);
            d.set_item("airtime_share", p.airtime_share)?;
            d.set_item("base_rate_bps", p.base_rate)?;
            d.set_item("effective_rate_bps", p.effective_rate)?;
            Ok(d.unbind())
        })
        .collect()
}

/// Jain's fairness index over the given values: 1.0 means perfectly equal,
/// 1/len(values) means one value holds everything.
#[pyfunction]
fn jain(values: Vec<f64>) -> PyResult<f64> {
    jain_index(&values).map_err(|e| PyValueError::new_err(e.to_string()))
}

/// The queueing schemes the simulator implements, in canonical order.
#[pyfunction]
fn schemes() -> Vec<&'static str> {
    Scheme::ALL.iter().map(|s| s.name()).collect()
}

/// Run a scenario file and return the metrics report as a JSON string.
///
/// Optional overrides replace the file's queueing scheme (one of
/// `schemes()`), RNG seed, or duration in seconds before the run.
#[pyfunction]
#[pyo3(signature = (path, scheme = None, seed = None, duration_s = None))]
fn run_scenario(
    path: PathBuf,
    scheme: Option<&str>,
    seed: Option<u64>,
    duration_s: Option<f64>,
) -> PyResult<String> {
    let mut scenario =
        Scenario::load(&path).map_err(|e| PyValueError::new_err(e.to_string()))?;
    if let Some(name) = scheme {
        scenario.scheme = name
            .parse::<Scheme>()
            .map_err(|e| PyValueError::new_err(e.to_string()))?;
    }
    if let Some(seed) = seed {
        scenario.seed = seed;
    }
    if let Some(d) = duration_s {
        scenario.duration_s = d;
        scenario
            .validate()
            .map_err(|e| PyValueError::new_err(e.to_string()))?;
    }
    let report = sim::run(&scenario).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    serde_json::to_string_pretty(&report).map_err(|e| PyRuntimeError::new_err(e.to_string()))
}

#[pymodule]
fn airfair_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(mpdu_bytes, m)?)?;
    m.add_function(wrap_pyfunction!(base_rate, m)?)?;
    m.add_function(wrap_pyfunction!(predict, m)?)?;
    m.add_function(wrap_pyfunction!(jain, m)?)?;
    m.add_function(wrap_pyfunction!(schemes, m)?)?;
    m.add_function(wrap_pyfunction!(run_scenario, m)?)?;
    Ok(())
}
