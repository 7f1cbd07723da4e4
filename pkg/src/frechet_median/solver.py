"""Fréchet (geometric) medians of weighted point sets on model spaces.

The local solver is a Riemannian Weiszfeld iteration with a safeguarded
Newton polish.  When an iterate reaches a data point the non-smooth
first-order test decides whether to stop there or to leave along the
steepest-descent direction.  Global search is by multistart from every data
point plus random draws; the outputs that tie in cost approximate the
median set.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from . import geometry as geo
from .errors import InputError, SingularityError
from .geometry import ModelSpace

COINCIDENCE_TOL = 1e-8
WEIGHT_SUM_TOL = 1e-9


@dataclass
class DiscreteMeasure:
    """Weighted atoms x_k with weights w_k summing to one."""

    space: ModelSpace
    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        pts = geo.check_point(self.space, np.atleast_2d(np.asarray(self.points, dtype=float)))
        w = np.asarray(self.weights, dtype=float).reshape(-1)
        if pts.ndim != 2 or len(pts) == 0:
            raise InputError("a measure needs at least one point")
        if len(w) != len(pts):
            raise InputError(f"{len(pts)} points but {len(w)} weights")
        if np.any(~np.isfinite(w)) or np.any(w < 0):
            raise InputError("weights must be finite and nonnegative")
        total = w.sum()
        if abs(total - 1.0) > WEIGHT_SUM_TOL:
            raise InputError(f"weights sum to {total!r}, expected 1")
        self.points = pts
        self.weights = w / total

    @classmethod
    def uniform(cls, space: ModelSpace, points) -> "DiscreteMeasure":
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return cls(space, pts, np.full(len(pts), 1.0 / len(pts)))

    def __len__(self) -> int:
        return len(self.points)

    def replace_point(self, k: int, new_point) -> "DiscreteMeasure":
        pts = self.points.copy()
        pts[k] = new_point
        return DiscreteMeasure(self.space, pts, self.weights.copy())

    def canonical(self) -> "DiscreteMeasure":
        """Same measure with atoms sorted lexicographically by coordinates."""
        order = np.lexsort(self.points.T[::-1])
        return DiscreteMeasure(self.space, self.points[order], self.weights[order])


@dataclass
class SolverConfig:
    tol: float = 1e-9
    max_iters: int = 10_000
    multistarts: int = 16
    seed: int = 0
    step_rule: str = "weiszfeld"
    cost_tol: float = 1e-9
    uniqueness_tol: float = 1e-6

    def __post_init__(self):
        if not self.tol > 0:
            raise InputError("tol must be positive")
        if self.max_iters < 1:
            raise InputError("max_iters must be >= 1")
        if self.multistarts < 1:
            raise InputError("multistarts must be >= 1")
        if self.step_rule not in ("weiszfeld", "fixed_subgradient"):
            raise InputError(f"unknown step_rule {self.step_rule!r}")


@dataclass
class LocalResult:
    point: np.ndarray
    cost: float
    residual: float
    iterations: int
    converged: bool


@dataclass
class SolverResult:
    median: np.ndarray
    cost: float
    residual: float
    iterations: int
    cluster_diameter: float
    unique_flag: bool
    converged: bool = True
    cluster: List[np.ndarray] = field(default_factory=list, repr=False)

    def to_dict(self) -> dict:
        return {
            "median": [float(c) for c in self.median],
            "cost": float(self.cost),
            "residual": float(self.residual),
            "iterations": int(self.iterations),
            "cluster_diameter": float(self.cluster_diameter),
            "unique_flag": bool(self.unique_flag),
            "converged": bool(self.converged),
        }


def frechet_cost(mu: DiscreteMeasure, x) -> float:
    """f_mu(x) = sum_k w_k d(x, x_k)."""
    x = geo.check_point(mu.space, x)
    return float(mu.weights @ geo.dist(mu.space, x, mu.points))


def _cost(mu: DiscreteMeasure, x: np.ndarray) -> float:
    return float(mu.weights @ geo.dist(mu.space, x, mu.points))


def _directions(space: ModelSpace, x: np.ndarray, pts: np.ndarray):
    """Distances d_k, a tangent frame at x and unit directions toward x_k in it.

    Directions are zero for atoms coinciding with x and for antipodes of x
    (the distance to an antipode decreases in every direction, so it
    contributes no preferred direction).
    """
    d = geo.dist(space, x, pts)
    basis = geo.tangent_basis(space, x)
    comp = geo.frame_components(space, x, basis, pts)
    wn = np.linalg.norm(comp, axis=-1)
    ok = (d > COINCIDENCE_TOL) & (wn > 1e-14)
    u = np.zeros_like(comp)
    u[ok] = comp[ok] / wn[ok, None]
    return d, basis, u, ok


def _hess_coef(space: ModelSpace, d: np.ndarray) -> np.ndarray:
    # Hess d(., p) = c(d) * (I - e e^T) on a model space
    if space.curvature > 0:
        s = space.scale
        return s / np.tan(s * d)
    if space.curvature < 0:
        s = space.scale
        return s / np.tanh(s * d)
    return 1.0 / d


def _coincident(d: np.ndarray) -> np.ndarray:
    return d <= COINCIDENCE_TOL


def _pull_residual(w: np.ndarray, d: np.ndarray, u: np.ndarray) -> float:
    at = _coincident(d)
    pull = float(np.linalg.norm(w @ u))
    return max(0.0, pull - float(w[at].sum())) if at.any() else pull


def first_order_residual(mu: DiscreteMeasure, m) -> float:
    """Violation of the first-order optimality condition at ``m``.

    Away from the data this is |sum_k w_k u_k|.  At a data point it is the
    excess of the pull of the other atoms over the mass sitting at ``m``,
    clipped at zero.
    """
    space = mu.space
    m = geo.check_point(space, m)
    d, _, u, _ = _directions(space, m, mu.points)
    if space.curvature > 0 and np.any(d * space.scale > math.pi - 1e-9):
        raise SingularityError("candidate lies at the cut point of a data point")
    return _pull_residual(mu.weights, d, u)


def _newton_step(space, d, u, w) -> Optional[np.ndarray]:
    c = w * _hess_coef(space, d)
    hess = c.sum() * np.eye(u.shape[1]) - (u * c[:, None]).T @ u
    g = w @ u
    try:
        chol = np.linalg.cholesky(hess)
    except np.linalg.LinAlgError:
        return None
    return np.linalg.solve(chol.T, np.linalg.solve(chol, g))


def _atom_residual(mu: DiscreteMeasure, x: np.ndarray) -> float:
    d, _, u, _ = _directions(mu.space, x, mu.points)
    return _pull_residual(mu.weights, d, u)


def _newton_polish(mu: DiscreteMeasure, x, fx, residual, steps: int = 3):
    """A few extra Newton steps past the tolerance; kept only while the residual drops."""
    space, pts, w = mu.space, mu.points, mu.weights
    for _ in range(steps):
        d, basis, u, ok = _directions(space, x, pts)
        if not ok.all():
            break
        step = _newton_step(space, d, u, w)
        if step is None or float(np.linalg.norm(step)) >= 0.25 * float(d.min()):
            break
        xn = geo.exp_frame(space, x, basis, step)
        dn, _, un, okn = _directions(space, xn, pts)
        if not okn.all():
            break
        rn = float(np.linalg.norm(w @ un))
        fn = _cost(mu, xn)
        if rn >= residual or fn > fx + 1e-15 * max(1.0, fx):
            break
        x, fx, residual = xn, fn, rn
    return x, fx, residual


def _step_cap(space: ModelSpace) -> float:
    return 0.5 * space.cut_distance if space.compact else math.inf


def _capped(space, v):
    n = float(np.linalg.norm(v))
    cap = _step_cap(space)
    return v * (cap / n) if n > cap else v


def local_solve(mu: DiscreteMeasure, x0, cfg: SolverConfig) -> LocalResult:
    """Descend from ``x0`` to a stationary point of f_mu."""
    space, pts, w = mu.space, mu.points, mu.weights
    x = geo.project(space, np.asarray(x0, dtype=float))
    fx = _cost(mu, x)
    residual = math.inf
    it = 0
    for it in range(1, cfg.max_iters + 1):
        d, basis, u, ok = _directions(space, x, pts)
        at = _coincident(d)
        if at.any():
            j = int(np.argmin(d))
            x = pts[j].copy()
            fx = _cost(mu, x)
            d, basis, u, ok = _directions(space, x, pts)
            at = _coincident(d)
            g = w @ u
            gn = float(np.linalg.norm(g))
            residual = max(0.0, gn - float(w[at].sum()))
            if residual <= cfg.tol:
                return LocalResult(x, fx, residual, it, True)
            # leave the atom along the steepest-descent direction
            denom = float((w[ok] / d[ok]).sum())
            v = _capped(space, (g / gn) * (residual / denom))
        else:
            g = w @ u
            residual = float(np.linalg.norm(g))
            if residual <= cfg.tol:
                x, fx, residual = _newton_polish(mu, x, fx, residual)
                return LocalResult(x, fx, residual, it, True)
            # Weiszfeld crawls toward an optimal atom; test the nearest one directly
            j = int(np.argmin(d))
            fj = _cost(mu, pts[j])
            if fj < fx and _atom_residual(mu, pts[j]) <= cfg.tol:
                x, fx = pts[j].copy(), fj
                continue
            if cfg.step_rule == "weiszfeld" and ok.all():
                step = _newton_step(space, d, u, w)
                if step is not None and float(np.linalg.norm(step)) < 0.25 * float(d.min()):
                    xn = geo.exp_frame(space, x, basis, step)
                    fn = _cost(mu, xn)
                    if fn <= fx + 1e-15 * max(1.0, fx):
                        dn, _, un, okn = _directions(space, xn, pts)
                        if not _coincident(dn).any():
                            rn = float(np.linalg.norm(w @ un))
                            if rn < residual:
                                x, fx = xn, fn
                                continue
            if cfg.step_rule == "weiszfeld":
                denom = float((w[ok] / d[ok]).sum())
                v = _capped(space, g / denom)
            else:
                v = _capped(space, g * (0.1 / math.sqrt(it)))
        # backtracking on the cost keeps every iteration a descent step
        s = 1.0
        moved = False
        for _ in range(60):
            xn = geo.exp_frame(space, x, basis, s * v)
            fn = _cost(mu, xn)
            if fn < fx:
                x, fx = xn, fn
                moved = True
                break
            s *= 0.5
        if not moved:
            # no representable decrease: we sit at the precision floor
            residual = _atom_residual(mu, x)
            return LocalResult(x, fx, residual, it, residual <= cfg.tol)
    return LocalResult(x, fx, residual, it, residual <= cfg.tol)


def _random_starts(mu: DiscreteMeasure, n: int, rng: np.random.Generator) -> np.ndarray:
    space = mu.space
    if n <= 0:
        return np.empty((0, space.ambient_dim))
    if space.compact:
        return geo.sample_uniform(space, n, rng)
    costs = [_cost(mu, p) for p in mu.points]
    center = mu.points[int(np.argmin(costs))]
    # every median y has d(y, center) <= f(y) + f(center) <= 2 f(center)
    radius = min(float(np.max(geo.dist(space, center, mu.points))), 2.0 * min(costs))
    if radius <= 0:
        return np.repeat(center[None, :], n, axis=0)
    return geo.sample_uniform(space, n, rng, (center, radius))


def _data_starts(mu: DiscreteMeasure, tol: float) -> np.ndarray:
    """Data points to start from.

    For kappa <= 0 the cost is convex, so an atom failing the first-order
    test is no better a start than any other point; dropping those keeps
    the search away from far outliers, whose neighbourhoods are poorly
    resolved in floating point.  The cheapest atom is always kept.
    """
    if mu.space.compact:
        return mu.points
    best = int(np.argmin([_cost(mu, p) for p in mu.points]))
    keep = [k for k in range(len(mu)) if k == best or _atom_residual(mu, mu.points[k]) <= tol]
    return mu.points[keep]


def _order_key(cost: float, x: np.ndarray) -> Tuple:
    return (round(cost, 12),) + tuple(np.round(x, 12))


def multistart_solve(mu: DiscreteMeasure, cfg: SolverConfig) -> Tuple[SolverResult, List[LocalResult]]:
    mu = mu.canonical()
    rng = np.random.default_rng(cfg.seed)
    starts = np.concatenate([_data_starts(mu, cfg.tol), _random_starts(mu, cfg.multistarts - len(mu), rng)])
    runs = [local_solve(mu, s, cfg) for s in starts]
    runs.sort(key=lambda r: _order_key(r.cost, r.point))
    best = runs[0]
    cluster = [r.point for r in runs if r.cost <= best.cost + cfg.cost_tol]
    diam = 0.0
    for i in range(len(cluster)):
        for k in range(i + 1, len(cluster)):
            diam = max(diam, geo.dist(mu.space, cluster[i], cluster[k]))
    residual = first_order_residual(mu, best.point)
    result = SolverResult(
        median=best.point,
        cost=best.cost,
        residual=residual,
        iterations=best.iterations,
        cluster_diameter=diam,
        unique_flag=diam < cfg.uniqueness_tol,
        converged=best.converged,
        cluster=cluster,
    )
    return result, runs


def median_solve(mu: DiscreteMeasure, cfg: Optional[SolverConfig] = None) -> SolverResult:
    """Global Fréchet median by multistart; see module docstring."""
    return multistart_solve(mu, cfg or SolverConfig())[0]


def lipschitz_certificate(
    mu: DiscreteMeasure,
    m,
    trials: int = 200,
    seed: int = 0,
    f_star: Optional[float] = None,
    slack_tol: float = 1e-8,
) -> Tuple[bool, float]:
    """Check phi(m) <= f* + sum_k w_k phi(x_k) on random 1-Lipschitz phi.

    Each phi is a lower envelope of cones min_j (c_j + d(., q_j)).  Returns
    whether every trial passed (within ``slack_tol``) and the smallest slack.
    """
    space = mu.space
    m = geo.check_point(space, m)
    if f_star is None:
        f_star = frechet_cost(mu, m)
    rng = np.random.default_rng(seed)
    spread = float(np.max(geo.dist(space, m, mu.points))) if len(mu) else 0.0
    radius = max(spread, 1e-3)
    if space.compact:
        radius = min(radius * 1.5, 0.99 * space.cut_distance)
    else:
        radius *= 1.5
    min_slack = math.inf
    for _ in range(trials):
        n_anchor = int(rng.integers(1, 5))
        anchors = geo.sample_uniform(space, n_anchor, rng, (m, radius))
        offsets = rng.uniform(0.0, radius, n_anchor)

        def phi(y):
            return np.min(offsets + geo.dist(space, np.asarray(y)[..., None, :], anchors), axis=-1)

        slack = f_star + float(mu.weights @ phi(mu.points)) - float(phi(m))
        min_slack = min(min_slack, slack)
    return bool(min_slack >= -slack_tol), float(min_slack)


def move_toward_median_check(
    mu: DiscreteMeasure,
    m,
    k: int,
    t: float,
    cfg: Optional[SolverConfig] = None,
    cost_tol: float = 1e-8,
) -> bool:
    """Move atom k a fraction t of the way to ``m``; is ``m`` still optimal?"""
    m = geo.check_point(mu.space, m)
    moved = mu.replace_point(k, geo.geodesic_point(mu.space, mu.points[k], m, t))
    best = median_solve(moved, cfg)
    return frechet_cost(moved, m) <= best.cost + cost_tol
