"""Experiment reports: deterministic JSON and verdicts recomputable from records."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Callable, Dict, List, Optional

import numpy as np

from ..errors import InputError

SCHEMA_VERSION = 1

# name -> verdict(trials, params, tolerances) -> {"pass": bool, "checks": {...}}
VERDICTS: Dict[str, Callable[[list, dict, dict], dict]] = {}


def register_verdict(name: str):
    def wrap(fn):
        VERDICTS[name] = fn
        return fn

    return wrap


def jsonable(obj):
    """Plain JSON types; numpy scalars/arrays unwrapped, infinities spelled out."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    return obj


def dumps(obj) -> str:
    return json.dumps(jsonable(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


@dataclass
class ExperimentReport:
    experiment: str
    seed: int
    params: dict
    trials: List[dict]
    summary: dict
    verdict: dict = field(default_factory=dict)
    envelope: Optional[dict] = None

    def to_dict(self, include_envelope: bool = False) -> dict:
        out = {
            "schema_version": SCHEMA_VERSION,
            "experiment": self.experiment,
            "seed": self.seed,
            "params": self.params,
            "trials": self.trials,
            "summary": self.summary,
            "verdict": self.verdict,
        }
        if include_envelope and self.envelope is not None:
            out["envelope"] = self.envelope
        return jsonable(out)

    def to_json(self, include_envelope: bool = False) -> str:
        return dumps(self.to_dict(include_envelope))

    def stamp(self) -> "ExperimentReport":
        from .. import __version__

        self.envelope = {
            "created": datetime.now(timezone.utc).isoformat(timespec="seconds"),
            "package_version": __version__,
        }
        return self

    @property
    def passed(self) -> bool:
        return bool(self.verdict.get("pass", False))

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentReport":
        if d.get("schema_version") != SCHEMA_VERSION:
            raise InputError(f"unsupported report schema_version {d.get('schema_version')!r}")
        return cls(
            experiment=d["experiment"],
            seed=d["seed"],
            params=d["params"],
            trials=d["trials"],
            summary=d["summary"],
            verdict=d["verdict"],
            envelope=d.get("envelope"),
        )


def judge(report: ExperimentReport, tolerances: dict) -> ExperimentReport:
    """Attach the registered verdict for ``report.experiment``."""
    fn = VERDICTS[report.experiment]
    out = fn(jsonable(report.trials), jsonable(report.params), tolerances)
    report.verdict = jsonable({"pass": out["pass"], "tolerances": tolerances, "checks": out["checks"]})
    return report


def recompute_verdict(report: ExperimentReport) -> dict:
    """Verdict rebuilt from the stored per-trial records alone."""
    if report.experiment not in VERDICTS:
        raise InputError(f"no verdict registered for experiment {report.experiment!r}")
    d = report.to_dict()
    tol = d["verdict"].get("tolerances", {})
    out = VERDICTS[report.experiment](d["trials"], d["params"], tol)
    return jsonable({"pass": out["pass"], "tolerances": tol, "checks": out["checks"]})
