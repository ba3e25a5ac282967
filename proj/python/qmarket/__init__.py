"""Quantum binomial market pricing."""

import json

from ._qmarket import (
    REPORT_SCHEMA,
    SCENARIO_SCHEMA,
    ConsistencyError,
    QubitMarketSpec,
    RiskNeutralDisk,
    ValidationError,
    binomial_tree_price,
    canonical_scenario,
    complementary_binomial,
    crr_price,
    euro_call_price,
    euro_call_replication,
    risk_neutral_disk,
    run_command,
    sample_disk_points,
)

__all__ = [
    "REPORT_SCHEMA",
    "SCENARIO_SCHEMA",
    "ConsistencyError",
    "QubitMarketSpec",
    "RiskNeutralDisk",
    "ValidationError",
    "binomial_tree_price",
    "canonical_scenario",
    "complementary_binomial",
    "crr_price",
    "euro_call_price",
    "euro_call_replication",
    "risk_neutral_disk",
    "run",
    "run_command",
    "sample_disk_points",
]


def run(command, scenario, seed=None):
    """Run a driver command. `scenario` is a dict or JSON text; returns (report dict, exit code)."""
    text = scenario if isinstance(scenario, str) else json.dumps(scenario)
    out = run_command(command, text, seed)
    return json.loads(out["report"]), out["exit_code"]
