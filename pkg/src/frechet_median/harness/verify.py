"""Invariant suite run by ``fml verify``: kernel identities plus quick solver/bound/hmin checks."""
from __future__ import annotations

import math

import numpy as np

from .. import geometry as geo
from ..bounds import ConcentrationSpec, assumption_check, refined_bound_radius
from ..geometry import ModelSpace
from ..hmin import GEOMETRIES, hmin_bruteforce, hmin_closed_form, sample_instances
from ..solver import DiscreteMeasure, SolverConfig, lipschitz_certificate, median_solve
from .experiments import branch_continuity_gaps, trial_rng
from .report import ExperimentReport, judge, register_verdict

KERNEL_TOLERANCES = {
    "symmetry": 1e-12,
    "identity": 1e-12,
    "triangle": 1e-10,
    "log_norm": 1e-10,
    "exp_log": 1e-9,
    "law_of_cosines": 1e-10,
    "arclength": 1e-10,
    "branch_continuity": 1e-10,
}
SPACES = (ModelSpace(1.0), ModelSpace(0.0), ModelSpace(-1.0))


def _draw(space, n, rng):
    if space.compact:
        return geo.sample_uniform(space, n, rng)
    return geo.sample_uniform(space, n, rng, (space.origin(), 2.0))


def kernel_residuals(space: ModelSpace, n: int, seed) -> dict:
    """Worst residual of each geometry identity over ``n`` seeded triples."""
    rng = np.random.default_rng(seed)
    x, y, z = (_draw(space, n, rng) for _ in range(3))
    dxy, dyz, dxz = geo.dist(space, x, y), geo.dist(space, y, z), geo.dist(space, x, z)
    out = {
        "symmetry": float(np.max(np.abs(dxy - geo.dist(space, y, x)))),
        "identity": float(np.max(geo.dist(space, x, x))),
        "triangle": float(max(0.0, -np.min(dxy + dyz - dxz))),
    }
    keep = dxy < 0.9 * space.cut_distance
    v = geo.log_array(space, x[keep], y[keep])
    out["log_norm"] = float(np.max(np.abs(geo.tangent_norm(space, v) - dxy[keep])))
    out["exp_log"] = float(np.max(geo.dist(space, geo.exp_array(space, x[keep], v), y[keep])))
    # law of cosines at z, in the model's own trigonometry
    a, b = geo.dist(space, z, y), geo.dist(space, z, x)
    ok = (a > 1e-3) & (b > 1e-3) & (a < 0.9 * space.cut_distance) & (b < 0.9 * space.cut_distance)
    u = geo.log_array(space, z[ok], y[ok])
    w = geo.log_array(space, z[ok], x[ok])
    cos_g = geo.inner(space, u, w) / (a[ok] * b[ok])
    a, b, c = a[ok] * space.scale, b[ok] * space.scale, dxy[ok] * space.scale
    if space.curvature > 0:
        res = np.cos(c) - (np.cos(a) * np.cos(b) + np.sin(a) * np.sin(b) * cos_g)
    elif space.curvature < 0:
        res = (np.cosh(c) - (np.cosh(a) * np.cosh(b) - np.sinh(a) * np.sinh(b) * cos_g)) / np.cosh(c)
    else:
        res = c ** 2 - (a ** 2 + b ** 2 - 2 * a * b * cos_g)
    out["law_of_cosines"] = float(np.max(np.abs(res)))
    worst = 0.0
    for i in np.flatnonzero(keep)[:200]:
        s, t = sorted(rng.random(2))
        g1 = geo.geodesic_point(space, x[i], y[i], s)
        g2 = geo.geodesic_point(space, x[i], y[i], t)
        worst = max(worst, abs(geo.dist(space, g1, g2) - (t - s) * dxy[i]))
    out["arclength"] = float(worst)
    return out


def geometry_kernel_suite(n: int = 1000, seed: int = 0) -> ExperimentReport:
    records = []
    for k, space in enumerate(SPACES):
        rec = {"space": space.kind, "curvature": space.curvature, "n": n}
        rec.update(kernel_residuals(space, n, [seed, k]))
        records.append(rec)
    for k, g in enumerate(GEOMETRIES):
        gaps = branch_continuity_gaps(g, n, [seed, 100 + k])
        records.append({"space": g, "n": n, "branch_continuity": max(gaps)})
    report = ExperimentReport("geometry_kernels", seed, {"n": n}, records, {})
    return judge(report, dict(KERNEL_TOLERANCES))


@register_verdict("geometry_kernels")
def _kernel_verdict(trials, params, tol):
    checks = {}
    for name, limit in tol.items():
        vals = [r[name] for r in trials if name in r]
        checks[name] = {"max": max(vals), "ok": max(vals) <= limit}
    return {"pass": all(c["ok"] for c in checks.values()), "checks": checks}


def verify_suite(seed: int = 0, trials: int = 10) -> ExperimentReport:
    """Quick pass over every module's invariants."""
    kernels = geometry_kernel_suite(1000, seed)
    records = [{"check": "geometry_kernels", "pass": kernels.passed}]

    # solver: stationarity, point-mass dominance, Lipschitz certificate
    worst_res, dominance, lip = 0.0, True, True
    for i, space in enumerate(SPACES):
        for j in range(trials):
            rng = trial_rng(seed, i, j)
            pts = _draw(space, 5, rng)
            w = rng.dirichlet(np.ones(5))
            res = median_solve(DiscreteMeasure(space, pts, w), SolverConfig(seed=seed))
            worst_res = max(worst_res, res.residual)
            ok, _ = lipschitz_certificate(DiscreteMeasure(space, pts, w), res.median, 50, seed)
            lip = lip and ok
            w2 = 0.45 * w
            w2[0] += 0.55
            dom = median_solve(DiscreteMeasure(space, pts, w2), SolverConfig(seed=seed))
            dominance = dominance and geo.dist(space, dom.median, pts[0]) < 1e-10
    records.append({"check": "solver_stationarity", "pass": worst_res < 1e-8, "value": worst_res})
    records.append({"check": "point_mass_dominance", "pass": dominance})
    records.append({"check": "lipschitz_certificate", "pass": lip})

    # bounds: report invariants on a (kappa, alpha, rho) grid
    bad = 0
    for kappa in (1.0, 0.0, -1.0):
        for alpha in np.linspace(0.55, 1.0, 10):
            for rho in np.linspace(0.05, 1.0, 10):
                space, spec = ModelSpace(kappa), ConcentrationSpec(float(alpha), float(rho))
                if not assumption_check(space, spec):
                    continue
                r = refined_bound_radius(space, spec).refined_radius
                if r is None:
                    continue
                eq = abs(r - rho) <= 1e-12
                bad += not (rho - 1e-12 <= r <= 2 * alpha * rho / (2 * alpha - 1)
                            and eq == (alpha == 1.0) and r < space.cut_distance / 2)
    records.append({"check": "bound_invariants", "pass": bad == 0, "value": bad})

    # hmin: closed form vs boundary search on a few instances
    err = max(abs(hmin_closed_form(s) - hmin_bruteforce(s))
              for g in GEOMETRIES for s in sample_instances(g, trials, seed))
    records.append({"check": "hmin_closed_form", "pass": err < 1e-7, "value": err})
    report = ExperimentReport("verify", seed, {"trials": trials}, records,
                              {"kernels": kernels.verdict["checks"]})
    return judge(report, {})


@register_verdict("verify")
def _verify_verdict(trials, params, tol):
    checks = {r["check"]: r["pass"] for r in trials}
    return {"pass": all(checks.values()), "checks": checks}
