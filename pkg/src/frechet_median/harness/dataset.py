"""Loading point clouds with optional weights and concentration data."""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .. import geometry as geo
from ..bounds import ConcentrationSpec
from ..errors import InputError
from ..geometry import ModelSpace
from ..solver import WEIGHT_SUM_TOL, DiscreteMeasure

PROJECTION_TOL = 1e-6
FORMATS = ("json", "csv")


@dataclass
class Dataset:
    space: ModelSpace
    points: np.ndarray
    weights: np.ndarray
    concentration: Optional[ConcentrationSpec] = None

    def measure(self) -> DiscreteMeasure:
        return DiscreteMeasure(self.space, self.points, self.weights)

    def to_dict(self) -> dict:
        out = {
            "schema_version": 1,
            "space": {"curvature": self.space.curvature, "dim": self.space.dim},
            "points": self.points.tolist(),
            "weights": self.weights.tolist(),
        }
        c = self.concentration
        if c is not None:
            out["concentration"] = {"alpha": c.alpha, "rho": c.rho}
            if c.center is not None:
                out["concentration"]["center"] = np.asarray(c.center).tolist()
        return out


def _onto_manifold(space: ModelSpace, pts: np.ndarray, what: str) -> np.ndarray:
    defect = geo.point_defect(space, pts)
    bad = np.flatnonzero(~(defect <= PROJECTION_TOL))
    if bad.size:
        i = int(bad[0])
        raise InputError(
            f"{what} {i} is off the {space.kind} model by {defect[i]:.3g} (tolerance {PROJECTION_TOL})"
        )
    return geo.project(space, pts)


def _validated_weights(w, n: int) -> np.ndarray:
    if w is None:
        return np.full(n, 1.0 / n)
    w = np.asarray(w, dtype=float)
    if w.shape != (n,):
        raise InputError(f"expected {n} weights, got {w.shape[0] if w.ndim else 'a scalar'}")
    if not np.all(np.isfinite(w)) or np.any(w < 0):
        raise InputError("weights must be finite and nonnegative")
    if abs(w.sum() - 1.0) > WEIGHT_SUM_TOL:
        raise InputError(f"weights sum to {w.sum():.12g}, not 1 (tolerance {WEIGHT_SUM_TOL})")
    return w / w.sum()


def dataset_from_dict(d: dict) -> Dataset:
    try:
        space_d = d["space"]
        space = ModelSpace(float(space_d["curvature"]), int(space_d.get("dim", 2)))
        raw = np.asarray(d["points"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed dataset: {exc}") from exc
    if raw.ndim != 2 or raw.shape[0] == 0:
        raise InputError("points must be a non-empty list of coordinate lists")
    if raw.shape[1] != space.ambient_dim:
        raise InputError(
            f"points have {raw.shape[1]} coordinates, {space.kind} dim {space.dim} needs {space.ambient_dim}"
        )
    if not np.all(np.isfinite(raw)):
        raise InputError("non-finite coordinates")
    pts = _onto_manifold(space, raw, "point")
    weights = _validated_weights(d.get("weights"), len(pts))
    conc = None
    if d.get("concentration") is not None:
        c = d["concentration"]
        center = c.get("center")
        if center is not None:
            center = _onto_manifold(space, np.asarray([center], dtype=float), "center")[0]
        try:
            conc = ConcentrationSpec(float(c["alpha"]), float(c["rho"]), center)
        except KeyError as exc:
            raise InputError(f"concentration needs alpha and rho: missing {exc}") from exc
    return Dataset(space, pts, weights, conc)


def _read_csv(path: Path, curvature: Optional[float], dim: Optional[int]) -> dict:
    # columns: coordinates (any names) plus an optional trailing "weight" column
    if curvature is None:
        raise InputError("CSV datasets need the curvature to be given explicitly")
    with path.open(newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
    if not rows:
        raise InputError(f"{path}: empty CSV")
    header, body = rows[0], rows[1:]
    try:
        float(header[0])
        body, header = rows, None
    except ValueError:
        pass
    try:
        table = np.array([[float(v) for v in r] for r in body], dtype=float)
    except ValueError as exc:
        raise InputError(f"{path}: non-numeric CSV entry ({exc})") from exc
    if table.ndim != 2 or table.shape[0] == 0:
        raise InputError(f"{path}: ragged or empty CSV body")
    weights = None
    if header is not None and header[-1].strip().lower() in ("w", "weight", "weights"):
        weights, table = table[:, -1].tolist(), table[:, :-1]
    if dim is None:
        dim = table.shape[1] - (0 if curvature == 0 else 1)
    return {"space": {"curvature": curvature, "dim": dim}, "points": table.tolist(), "weights": weights}


def load_dataset(path, fmt: Optional[str] = None, curvature: Optional[float] = None,
                 dim: Optional[int] = None) -> Dataset:
    path = Path(path)
    fmt = fmt or path.suffix.lstrip(".").lower()
    if fmt not in FORMATS:
        raise InputError(f"unknown dataset format {fmt!r}; expected one of {FORMATS}")
    if not path.is_file():
        raise InputError(f"dataset file not found: {path}")
    if fmt == "csv":
        return dataset_from_dict(_read_csv(path, curvature, dim))
    try:
        d = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc})") from exc
    if not isinstance(d, dict):
        raise InputError(f"{path}: top-level JSON must be an object")
    if d.get("schema_version", 1) != 1:
        raise InputError(f"unsupported dataset schema_version {d.get('schema_version')!r}")
    if curvature is not None and not math.isclose(float(d["space"]["curvature"]), curvature):
        raise InputError("curvature flag disagrees with the dataset")
    return dataset_from_dict(d)
