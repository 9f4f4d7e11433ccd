#!/usr/bin/env python3
"""Smoke test for the airfair_py extension module.

Loads the cdylib straight out of the cargo target directory (no packaging
step needed), then exercises every exported function against known values.

Usage:
    cargo build -p airfair-py --release
    python3 python/smoke_test.py
"""

import importlib.util
import json
import sys
from importlib.machinery import ExtensionFileLoader
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent


def load_module():
    candidates = [
        REPO / "target" / profile / name
        for profile in ("release", "debug")
        for name in ("libairfair_py.so", "airfair_py.so", "libairfair_py.dylib")
    ]
    for so in candidates:
        if so.exists():
            loader = ExtensionFileLoader("airfair_py", str(so))
            spec = importlib.util.spec_from_loader("airfair_py", loader, origin=str(so))
            mod = importlib.util.module_from_spec(spec)
            loader.exec_module(mod)
            print(f"loaded {so.relative_to(REPO)}")
            return mod
    sys.exit(
        "airfair_py cdylib not found; build it first:\n"
        "    cargo build -p airfair-py --release"
    )


def approx(value, expected, rel=0.02, what=""):
    assert abs(value / expected - 1.0) <= rel, f"{what}: {value} not within {rel:%} of {expected}"


def main():
    af = load_module()

    # Framing: a 1500-byte payload occupies 1544 bytes on air, 64 bytes -> 108.
    assert af.mpdu_bytes(1500.0) == 1544.0, af.mpdu_bytes(1500.0)
    assert af.mpdu_bytes(64.0) == 108.0, af.mpdu_bytes(64.0)

    # Standalone effective rates for saturated aggregation levels.
    approx(af.base_rate(18.44, 1500, 144.4), 126.7e6, what="base_rate fast")
    approx(af.base_rate(1.89, 1500, 7.2), 6.5e6, what="base_rate slow")

    # Equal-airtime prediction: three stations, shares 1/3 each.
    fair = af.predict([(18.44, 1500, 144.4), (18.52, 1500, 144.4), (1.89, 1500, 7.2)])
    assert len(fair) == 3
    for row in fair:
        approx(row["airtime_share"], 1 / 3, rel=1e-9, what="fair share")
    approx(fair[0]["effective_rate_bps"], 42.2e6, what="fair R0")
    approx(fair[2]["effective_rate_bps"], 2.2e6, what="fair R2")

    # FIFO (anomaly) prediction: the slow station hogs the air.
    fifo = af.predict([(4.47, 1500, 144.4), (5.08, 1500, 144.4), (1.89, 1500, 7.2)], fairness=False)
    assert fifo[2]["airtime_share"] > 0.75, fifo[2]["airtime_share"]
    total = sum(r["effective_rate_bps"] for r in fifo)
    approx(total, 26.4e6, what="fifo total")

    # Jain's index: perfectly equal -> 1, fully skewed -> 1/n.
    assert af.jain([5.0, 5.0, 5.0]) == 1.0
    approx(af.jain([1.0, 0.0, 0.0, 0.0]), 0.25, rel=1e-9, what="jain skewed")

    assert af.schemes() == ["fifo", "fq_codel", "fq_mac", "airtime_fair_fq"]

    # Full simulation round-trip, with the scheme/seed/duration overrides.
    scenario = REPO / "scenarios" / "three_station_udp.toml"
    report = json.loads(af.run_scenario(str(scenario), duration_s=5.0))
    assert report["scheme"] == "airtime_fair_fq"
    assert report["duration_s"] == 5.0
    shares = [s["airtime_share"] for s in report["stations"]]
    for share in shares:
        assert abs(share - 1 / 3) < 0.02, shares
    assert report["jain_airtime"] > 0.99

    fifo_report = json.loads(af.run_scenario(str(scenario), scheme="fifo", seed=7, duration_s=5.0))
    assert fifo_report["scheme"] == "fifo"
    assert fifo_report["seed"] == 7
    assert fifo_report["stations"][2]["airtime_share"] > 0.70, "rate anomaly expected under fifo"
    assert report["totals"]["throughput_bps"] > 3 * fifo_report["totals"]["throughput_bps"]

    # Bad inputs surface as ValueError, not a crash.
    for bad in (
        lambda: af.base_rate(-1, 1500, 144.4),
        lambda: af.run_scenario(str(scenario), scheme="nonsense"),
        lambda: af.jain([]),
    ):
        try:
            bad()
        except ValueError:
            pass
        else:
            raise AssertionError("expected ValueError")

    print("smoke test passed: model, fairness index, schemes, and simulation all behave")


if __name__ == "__main__":
    main()
