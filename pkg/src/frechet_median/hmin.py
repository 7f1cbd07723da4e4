"""Minimum of h(p) = d(x, p) - d(z, p) over a closed ball B(a, rho).

The configuration is collinear: x sits at distance rho + t from the center
a, and z at distance u from a on the segment from a to x.  Closed forms are
given for the unit sphere, the Euclidean plane and the hyperbolic plane; a
brute-force search over the boundary circle serves as an independent check
(every minimizer of h lies on the boundary).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from . import geometry as geo
from .errors import InputError

GEOMETRIES = ("sphere", "flat", "hyperbolic")
_CURVATURE = {"sphere": 1.0, "flat": 0.0, "hyperbolic": -1.0}
CLAMP_TOL = 1e-9


@dataclass(frozen=True)
class HminInstance:
    geometry: str
    rho: float
    t: float
    u: float

    def __post_init__(self):
        if self.geometry not in GEOMETRIES:
            raise InputError(f"geometry must be one of {GEOMETRIES}, got {self.geometry!r}")
        if not (self.rho > 0 and math.isfinite(self.rho)):
            raise InputError("rho must be positive and finite")
        if not (self.t >= 0 and self.u >= 0):
            raise InputError("t and u must be nonnegative")
        if not self.u < self.rho + self.t:
            raise InputError("z must lie strictly between a and x (u < rho + t)")
        if self.geometry == "sphere" and not self.rho + self.t + self.u < math.pi:
            raise InputError("sphere instances need rho + t + u < pi")

    @property
    def space(self) -> geo.ModelSpace:
        return geo.ModelSpace(_CURVATURE[self.geometry], 2)

    def _on_axis(self, r: float) -> np.ndarray:
        if self.geometry == "sphere":
            return np.array([math.sin(r), 0.0, math.cos(r)])
        if self.geometry == "hyperbolic":
            return np.array([math.sinh(r), 0.0, math.cosh(r)])
        return np.array([r, 0.0])

    def points(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Embedded (a, x, z)."""
        return self._on_axis(0.0), self._on_axis(self.rho + self.t), self._on_axis(self.u)

    def boundary_point(self, theta) -> np.ndarray:
        """Point(s) of the boundary circle at angle ``theta`` from the a-x axis."""
        th = np.asarray(theta, dtype=float)
        r = self.rho
        if self.geometry == "sphere":
            s, c = math.sin(r), math.cos(r)
        elif self.geometry == "hyperbolic":
            s, c = math.sinh(r), math.cosh(r)
        else:
            s, c = r, None
        cols = [s * np.cos(th), s * np.sin(th)]
        if c is not None:
            cols.append(np.full_like(th, c))
        return np.stack(cols, axis=-1)

    def h(self, theta) -> np.ndarray:
        _, x, z = self.points()
        p = self.boundary_point(theta)
        return geo.dist(self.space, x, p) - geo.dist(self.space, z, p)

    def dh(self, theta: float) -> float:
        """Derivative of h along the boundary circle."""
        _, x, z = self.points()
        p = self.boundary_point(theta)
        s = self.rho if self.geometry == "flat" else (
            math.sin(self.rho) if self.geometry == "sphere" else math.sinh(self.rho))
        v = np.zeros_like(p)
        v[0], v[1] = -s * math.sin(theta), s * math.cos(theta)
        out = 0.0
        for q, sign in ((x, -1.0), (z, 1.0)):
            w = geo.log_array(self.space, p, q)
            out += sign * float(geo.inner(self.space, w, v)) / geo.tangent_norm(self.space, w)
        return out

    def h_coarse(self, theta: np.ndarray) -> np.ndarray:
        """h from raw arccos/arccosh of ambient products; cheap, ~1e-8 accurate."""
        _, x, z = self.points()
        p = self.boundary_point(theta)
        if self.geometry == "flat":
            return np.hypot(*(p - x).T) - np.hypot(*(p - z).T)
        if self.geometry == "sphere":
            return np.arccos(np.clip(p @ x, -1, 1)) - np.arccos(np.clip(p @ z, -1, 1))
        sign = np.array([1.0, 1.0, -1.0])
        return (np.arccosh(np.maximum(-(p * sign) @ x, 1.0))
                - np.arccosh(np.maximum(-(p * sign) @ z, 1.0)))


def branch(inst: HminInstance) -> int:
    """1 when the minimum sits at the entry point y of the segment x-a, else 2."""
    rho, t, u = inst.rho, inst.t, inst.u
    if inst.geometry == "flat":
        return 1 if u <= (rho + t) * rho / (rho + 2 * t) else 2
    if u == 0:
        return 1
    if inst.geometry == "sphere":
        lhs = 1.0 / math.tan(u)
        rhs = 2.0 / math.tan(rho) - 1.0 / math.tan(rho + t)
    else:
        lhs = 1.0 / math.tanh(u)
        rhs = 2.0 / math.tanh(rho) - 1.0 / math.tanh(rho + t)
    return 1 if lhs >= rhs else 2


def _clamp(v: float, lo: float, hi: float) -> float:
    if v < lo - CLAMP_TOL or v > hi + CLAMP_TOL:
        raise InputError(f"inverse-trig argument {v} outside [{lo}, {hi}]")
    return min(max(v, lo), hi)


def second_branch_value(inst: HminInstance) -> float:
    rho, t, u = inst.rho, inst.t, inst.u
    gap = rho + t - u
    # half-angle form: q = 1 - cos(value) (resp. cosh(value) - 1) without cancellation
    # against 1, so the value stays accurate near zero
    if inst.geometry == "sphere":
        q = 2 * math.sin(gap / 2) ** 2 - math.sin(rho) ** 2 * math.sin(gap) ** 2 / (
            2 * math.sin(u) * math.sin(rho + t))
        return 2 * math.asin(math.sqrt(_clamp(q, 0.0, 2.0) / 2))
    if inst.geometry == "hyperbolic":
        q = 2 * math.sinh(gap / 2) ** 2 - math.sinh(rho) ** 2 * math.sinh(gap) ** 2 / (
            2 * math.sinh(u) * math.sinh(rho + t))
        return 2 * math.asinh(math.sqrt(_clamp(q, 0.0, math.inf) / 2))
    return gap * math.sqrt(max(0.0, 1.0 - rho ** 2 / (u * (rho + t))))


def hmin_closed_form(inst: HminInstance) -> float:
    if branch(inst) == 1:
        return inst.t - inst.rho + inst.u
    return second_branch_value(inst)


def hmin_scaled(kappa: float, rho: float, t: float, u: float) -> float:
    """Closed form on the model space of curvature ``kappa`` by rescaling to |kappa| = 1."""
    if kappa == 0:
        return hmin_closed_form(HminInstance("flat", rho, t, u))
    s = math.sqrt(abs(kappa))
    geometry = "sphere" if kappa > 0 else "hyperbolic"
    return hmin_closed_form(HminInstance(geometry, rho * s, t * s, u * s)) / s


def hmin_bruteforce_argmin(inst: HminInstance, grid: int = 100_000, n_refine: int = 3) -> Tuple[float, float]:
    """(min value, minimizing angle) from a theta-grid over the circle plus bounded Brent polish."""
    if grid < 1000:
        raise InputError("grid must have at least 1000 points")
    thetas = np.linspace(-math.pi, math.pi, grid, endpoint=False)
    vals = inst.h_coarse(thetas)
    step = thetas[1] - thetas[0]
    is_local = (vals <= np.roll(vals, 1)) & (vals <= np.roll(vals, -1))
    idx = np.flatnonzero(is_local)
    idx = idx[np.argsort(vals[idx])][:n_refine]
    best_val, best_theta = math.inf, 0.0

    def f(th):
        return float(inst.h(th))

    for i in idx:
        th0 = float(thetas[i])
        lo, hi = th0 - 2 * step, th0 + 2 * step
        res = minimize_scalar(f, bounds=(lo, hi), method="bounded", options={"xatol": 1e-12})
        val, theta = min((float(res.fun), float(res.x)), (f(th0), th0))
        # the value is flat near the minimizer; locate the angle through dh = 0
        try:
            if inst.dh(lo) < 0 < inst.dh(hi):
                th = brentq(inst.dh, lo, hi, xtol=1e-15)
                if f(th) <= val + 1e-13:
                    val, theta = min(val, f(th)), th
        except (ValueError, InputError):
            pass
        if val < best_val:
            best_val, best_theta = val, theta
    return best_val, best_theta


def hmin_bruteforce(inst: HminInstance, grid: int = 100_000) -> float:
    return hmin_bruteforce_argmin(inst, grid)[0]


def argmin_angle(inst: HminInstance) -> float:
    """Nonnegative angle of a minimizer on the sphere (0 means the entry point y)."""
    if inst.geometry != "sphere":
        raise InputError("argmin_angle is implemented for the sphere only")
    if branch(inst) == 1:
        return 0.0
    rho, t, u = inst.rho, inst.t, inst.u
    c = math.tan(rho) / 2 * (1 / math.tan(u) + 1 / math.tan(rho + t))
    return math.acos(_clamp(c, -1.0, 1.0))


def argmin_condition_check(inst: HminInstance, theta: float, tol: float = 1e-8) -> bool:
    """Does the boundary point at ``theta`` satisfy the sine-ratio stationarity identity?"""
    if inst.geometry != "sphere":
        raise InputError("the sine-ratio identity is stated for the sphere")
    if branch(inst) == 1:
        raise InputError("first branch: the minimizer is theta = 0 (the entry point y)")
    rho, t, u = inst.rho, inst.t, inst.u
    c = math.cos(theta)
    cos_dx = math.sin(rho + t) * math.sin(rho) * c + math.cos(rho + t) * math.cos(rho)
    cos_dz = math.sin(u) * math.sin(rho) * c + math.cos(u) * math.cos(rho)
    sin_dx = math.sqrt(max(0.0, 1 - cos_dx ** 2))
    sin_dz = math.sqrt(max(0.0, 1 - cos_dz ** 2))
    return abs(math.sin(rho + t) / sin_dx - math.sin(u) / sin_dz) <= tol


def hmin_sign_check(inst: HminInstance, grid: int = 100_000) -> bool:
    """Is the minimum strictly between 0 and pi?"""
    v = hmin_bruteforce(inst, grid)
    return 0.0 < v < math.pi


def sample_instances(geometry: str, n: int, seed, rho_range=(0.05, 1.2), t_max: float = 1.0):
    """Seeded valid instances; parameters always satisfy the sphere constraint so the
    same (rho, t, u) can be compared across geometries."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < n:
        rho = rng.uniform(*rho_range)
        t = rng.uniform(0.0, t_max)
        u = rng.uniform(0.0, rho + t)
        if rho + t + u < math.pi:
            out.append(HminInstance(geometry, rho, t, u))
    return out
