"""Closed-form containment radii for the median set of a concentrated measure.

Setting: a measure puts mass ``alpha > 1/2`` on the closed ball B(a, rho) of
a space whose curvature is at most ``kappa``.  Every median then lies in
B(a, 2 alpha rho / (2 alpha - 1)), and (under the working-radius condition)
in a smaller ball whose radius depends on the sign of the curvature.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import InputError
from .geometry import ModelSpace, dist, s_kappa

INF = math.inf

CASE_POSITIVE_A = "positive_a"
CASE_POSITIVE_B = "positive_b"
CASE_POSITIVE_UNVERIFIED = "positive_unverified"
CASE_FLAT = "flat"
CASE_NEGATIVE = "negative"


@dataclass(frozen=True)
class ConcentrationSpec:
    """Mass ``alpha`` inside the closed ball of radius ``rho`` around ``center``."""

    alpha: float
    rho: float
    center: Optional[np.ndarray] = None

    def __post_init__(self):
        if not (0.5 < self.alpha <= 1.0):
            raise InputError(f"alpha must lie in (1/2, 1], got {self.alpha}")
        if not (self.rho > 0 and math.isfinite(self.rho)):
            raise InputError(f"rho must be positive and finite, got {self.rho}")


@dataclass(frozen=True)
class BoundReport:
    r_basic: float
    r_star: float
    assumption_ok: bool
    refined_radius: Optional[float]
    case_tag: str
    t_root: Optional[float]

    @property
    def certified_radius(self) -> float:
        """Smallest radius the theory certifies for this configuration."""
        return self.refined_radius if self.refined_radius is not None else self.r_basic

    def to_dict(self) -> dict:
        def num(v):
            if v is None:
                return None
            return "inf" if v == INF else float(v)

        return {
            "r_basic": num(self.r_basic),
            "r_star": num(self.r_star),
            "assumption_ok": self.assumption_ok,
            "refined_radius": num(self.refined_radius),
            "case_tag": self.case_tag,
            "t_root": num(self.t_root),
        }


def basic_bound_radius(spec: ConcentrationSpec) -> float:
    """2 alpha rho / (2 alpha - 1)."""
    a = spec.alpha
    if a <= 0.5:
        raise InputError("alpha must exceed 1/2 for a finite bound")
    return 2.0 * a * spec.rho / (2.0 * a - 1.0)


def r_star(space: ModelSpace) -> float:
    """min(pi/sqrt(kappa), inj); infinite for non-positive curvature."""
    if space.curvature > 0:
        return math.pi / math.sqrt(space.curvature)
    return INF


def assumption_check(space: ModelSpace, spec: ConcentrationSpec) -> bool:
    return basic_bound_radius(spec) < r_star(space)


def s_delta(space: ModelSpace, t: float) -> float:
    if t < 0:
        raise InputError("t must be nonnegative")
    return s_kappa(space.curvature, t)


def _cot(x: float) -> float:
    return math.cos(x) / math.sin(x)


def _coth(x: float) -> float:
    return 1.0 / math.tanh(x)


def F_eval(alpha: float, rho: float, kappa: float, t: float) -> float:
    """The auxiliary function whose sign decides the second sphere condition.

    kappa > 0: cot(s(2a-1)t) - cot(s t) - 2 cot(s rho), s = sqrt(kappa)
    kappa = 0: (1 - a) rho - (2a - 1) t
    kappa < 0: the same as kappa > 0 with coth, s = sqrt(-kappa)
    """
    if not (0.5 < alpha <= 1.0):
        raise InputError(f"alpha must lie in (1/2, 1], got {alpha}")
    if not rho > 0:
        raise InputError("rho must be positive")
    if not t > 0:
        raise InputError("t must be positive")
    k = 2.0 * alpha - 1.0
    if kappa > 0:
        s = math.sqrt(kappa)
        args = (s * k * t, s * t, s * rho)
        if any(not (0.0 < x < math.pi) for x in args):
            raise InputError("cotangent argument outside (0, pi)")
        return _cot(args[0]) - _cot(args[1]) - 2.0 * _cot(args[2])
    if kappa < 0:
        s = math.sqrt(-kappa)
        return _coth(s * k * t) - _coth(s * t) - 2.0 * _coth(s * rho)
    return (1.0 - alpha) * rho - k * t


def F_scale(alpha, rho, kappa, t) -> float:
    # magnitude of the individual terms, for a relative residual check
    k = 2.0 * alpha - 1.0
    if kappa == 0:
        return abs((1 - alpha) * rho) + abs(k * t)
    s = math.sqrt(abs(kappa))
    f = _cot if kappa > 0 else _coth
    return abs(f(s * k * t)) + abs(f(s * t)) + 2 * abs(f(s * rho))


def F_root(alpha: float, rho: float, kappa: float, max_iter: int = 200) -> float:
    """The unique zero of F on (0, rho/(2 alpha - 1)); F >= 0 exactly left of it."""
    if not (0.5 < alpha < 1.0):
        raise InputError("a root exists only for 1/2 < alpha < 1")
    if kappa > 0 and not 2 * alpha * rho / (2 * alpha - 1) < math.pi / math.sqrt(kappa):
        raise InputError("rho violates the working-radius condition for this curvature")
    k = 2.0 * alpha - 1.0
    if kappa == 0:
        return (1.0 - alpha) * rho / k
    eps = 1e-12 * rho
    lo, hi = eps, rho / k - eps
    f_lo, f_hi = F_eval(alpha, rho, kappa, lo), F_eval(alpha, rho, kappa, hi)
    if not (f_lo > 0 > f_hi):
        raise InputError("F does not change sign on the search interval")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if F_eval(alpha, rho, kappa, mid) > 0:
            lo = mid
        else:
            hi = mid
    # return whichever endpoint has the smaller |F|
    return lo if abs(F_eval(alpha, rho, kappa, lo)) <= abs(F_eval(alpha, rho, kappa, hi)) else hi


def _refined_formula(kappa: float, alpha: float, rho: float) -> float:
    q = alpha / math.sqrt(2.0 * alpha - 1.0)
    if kappa > 0:
        s = math.sqrt(kappa)
        arg = q * math.sin(s * rho)
        if arg > 1.0:
            raise InputError("arcsin argument exceeds 1")
        return math.asin(arg) / s
    if kappa < 0:
        s = math.sqrt(-kappa)
        return math.asinh(q * math.sinh(s * rho)) / s
    return q * rho


def refined_bound_radius(space: ModelSpace, spec: ConcentrationSpec) -> BoundReport:
    """Sharper containment radius for the median set, with the case that certifies it."""
    kappa = space.curvature
    alpha, rho = spec.alpha, spec.rho
    r_b = basic_bound_radius(spec)
    rs = r_star(space)
    if not r_b < rs:
        raise InputError(
            f"working-radius condition fails: 2*alpha*rho/(2*alpha-1) = {r_b} >= r_* = {rs}"
        )
    t_root = F_root(alpha, rho, kappa) if alpha < 1.0 else None
    if kappa > 0:
        if r_b <= rs / 2:
            tag = CASE_POSITIVE_A
        elif F_eval(alpha, rho, kappa, rs / 2 - rho) <= 0:
            tag = CASE_POSITIVE_B
        else:
            return BoundReport(r_b, rs, True, None, CASE_POSITIVE_UNVERIFIED, t_root)
    else:
        tag = CASE_FLAT if kappa == 0 else CASE_NEGATIVE
    radius = _refined_formula(kappa, alpha, rho)
    if alpha == 1.0:
        radius = rho
    return BoundReport(r_b, rs, True, radius, tag, t_root)


def exclusion_test(space: ModelSpace, spec: ConcentrationSpec, x, z, hmin_value: float) -> bool:
    """True when x is certified not to be a median of any measure matching ``spec``.

    ``hmin_value`` is a certified lower bound for min over the ball of
    d(x, p) - d(z, p).
    """
    return hmin_value > (1.0 - spec.alpha) / spec.alpha * dist(space, x, z)
