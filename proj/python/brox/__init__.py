# SPDX-License-Identifier: Apache-2.0
"""Simulation of diffusions in a drifted Brownian potential."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

from ._brox import (
    ConvergenceError,
    InvalidArgument,
    IoError,
    RangeError,
    besq_samples,
    c1,
    experiment_names,
    hitting_samples,
    stable_laplace,
    stable_samples,
)
from ._brox import run_experiment as _run_experiment

__all__ = [
    "ConvergenceError",
    "InvalidArgument",
    "IoError",
    "RangeError",
    "Result",
    "besq_samples",
    "c1",
    "experiment_names",
    "hitting_samples",
    "run",
    "stable_laplace",
    "stable_samples",
]


@dataclass
class Result:
    csv_text: str
    summary: dict
    rows: list[dict] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return bool(self.summary["all_pass"])


def _row(rec: dict) -> dict:
    return {
        "replica": int(rec["replica"]),
        "kappa": float(rec["kappa"]),
        "r_or_t": float(rec["r_or_t"]),
        "value": float(rec["value"]),
        "normalized_value": float(rec["normalized_value"]),
        "truncated_flag": rec["truncated_flag"] == "1",
        "seed": int(rec["seed"]),
    }


def run(experiment: str, **options) -> Result:
    """Run an experiment. Keyword options use the config-file keys
    (kappa, r, replicas, seed, env_step, space_step, dt, quenched, ...)."""
    config = {"experiment": experiment, **options}
    csv_text, summary_json = _run_experiment(json.dumps(config))
    rows = [_row(r) for r in csv.DictReader(io.StringIO(csv_text))]
    return Result(csv_text=csv_text, summary=json.loads(summary_json), rows=rows)
