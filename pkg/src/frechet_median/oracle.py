"""Brute-force reference minimizer of f_mu for two-dimensional model spaces.

Deliberately shares nothing with the Weiszfeld solver except the distance
kernel: a dense grid locates the basin, then Nelder-Mead in an exponential
chart polishes the best grid cells and every data point.
"""
from __future__ import annotations

import math
from functools import lru_cache
from typing import Tuple

import numpy as np
from scipy.optimize import minimize

from . import geometry as geo
from .errors import InputError


@lru_cache(maxsize=8)
def _sphere_grid(step: float) -> np.ndarray:
    polar = np.arange(0.0, math.pi + step / 2, step)
    azim = np.arange(0.0, 2 * math.pi, step)
    P, A = np.meshgrid(polar, azim, indexing="ij")
    grid = np.stack([np.sin(P) * np.cos(A), np.sin(P) * np.sin(A), np.cos(P)], axis=-1)
    return grid.reshape(-1, 3)


def _grid(mu, step: float) -> np.ndarray:
    space = mu.space
    if space.compact:
        return _sphere_grid(step * space.scale)
    costs = [float(mu.weights @ geo.dist(space, p, mu.points)) for p in mu.points]
    center = mu.points[int(np.argmin(costs))]
    radius = float(np.max(geo.dist(space, center, mu.points))) + step
    ticks = np.arange(-radius, radius + step / 2, step)
    X, Y = np.meshgrid(ticks, ticks, indexing="ij")
    coords = np.stack([X.ravel(), Y.ravel()], axis=-1)
    coords = coords[np.hypot(coords[:, 0], coords[:, 1]) <= radius]
    basis = geo.tangent_basis(space, center)
    v = coords @ basis
    return geo.exp_array(space, np.broadcast_to(center, v.shape), v)


def _coarse_dist(space, pts: np.ndarray, others: np.ndarray) -> np.ndarray:
    # textbook formulas, (len(pts), len(others)); only used to rank grid cells
    if space.curvature > 0:
        return np.arccos(np.clip(pts @ others.T, -1.0, 1.0)) / space.scale
    if space.curvature < 0:
        g = pts[:, :-1] @ others[:, :-1].T - np.outer(pts[:, -1], others[:, -1])
        return np.arccosh(np.maximum(-g, 1.0)) / space.scale
    sq = (pts ** 2).sum(1)[:, None] + (others ** 2).sum(1)[None, :] - 2 * pts @ others.T
    return np.sqrt(np.maximum(sq, 0.0))


def _costs(mu, pts: np.ndarray) -> np.ndarray:
    return _coarse_dist(mu.space, pts, mu.points) @ mu.weights


def _nelder_mead(mu, base: np.ndarray, scale: float) -> Tuple[np.ndarray, float]:
    space = mu.space
    basis = geo.tangent_basis(space, base)

    def chart(c):
        return geo.exp_array(space, base, np.asarray(c) @ basis)

    def f(c):
        return float(mu.weights @ geo.dist(space, chart(c), mu.points))

    simplex = np.array([[0.0, 0.0], [scale, 0.0], [0.0, scale]])
    res = minimize(
        f, np.zeros(2), method="Nelder-Mead",
        options={"initial_simplex": simplex, "xatol": 1e-14, "fatol": 1e-17,
                 "maxiter": 4000, "maxfev": 8000},
    )
    return chart(res.x), float(res.fun)


def _polish(mu, x0: np.ndarray, scale: float) -> Tuple[np.ndarray, float]:
    x, fx = _nelder_mead(mu, x0, scale)
    # restart from the optimum with a fresh small simplex: Nelder-Mead can stall on kinks
    return _nelder_mead(mu, x, scale * 1e-4)


def grid_minimize(mu, step: float = 0.005, n_polish: int = 4) -> Tuple[np.ndarray, float]:
    """Global minimizer of f_mu by dense grid + local polish (dim 2 only)."""
    if mu.space.dim != 2:
        raise InputError("the grid oracle supports two-dimensional spaces only")
    grid = _grid(mu, step)
    costs = _costs(mu, grid)
    seeds = []
    for _ in range(n_polish):
        idx = int(np.argmin(costs))
        if not np.isfinite(costs[idx]):
            break
        seeds.append(grid[idx])
        # exclude the neighbourhood so the next seed comes from another basin
        near = _coarse_dist(mu.space, grid, grid[idx][None, :])[:, 0] <= 5 * step
        costs = np.where(near, np.inf, costs)
    candidates = [(p, float(mu.weights @ geo.dist(mu.space, p, mu.points))) for p in mu.points]
    for s in seeds:
        candidates.append(_polish(mu, s, 2 * step))
    return min(candidates, key=lambda pc: pc[1])
