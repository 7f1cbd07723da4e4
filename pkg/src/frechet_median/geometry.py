"""Exact kernels for the constant-curvature model spaces M^l_k.

Points of a positively curved space are stored on the unit sphere of
R^{l+1}; points of a negatively curved space on the upper sheet of the unit
hyperboloid of Minkowski space R^{l,1}, with the time coordinate *last*
(so the origin of H^2 is (0, 0, 1)).  Curvature only rescales lengths by
1/sqrt|k|.  Tangent vectors are kept in ambient coordinates, scaled so that
their ambient (Euclidean or Minkowski) norm is their Riemannian length.

All functions are pure; array arguments broadcast over leading axes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple, Union

import numpy as np

from .errors import InputError, SingularityError

CLAMP_TOL = 1e-9
POINT_EQ_TOL = 1e-9
_POINT_TOL = 1e-10
_TANGENT_TOL = 1e-10

SeedLike = Union[int, np.random.Generator, np.random.SeedSequence, None]


@dataclass(frozen=True)
class ModelSpace:
    """Simply connected space of constant curvature ``curvature`` and dimension ``dim``."""

    curvature: float
    dim: int = 2

    def __post_init__(self):
        if not math.isfinite(self.curvature):
            raise InputError(f"curvature must be finite, got {self.curvature}")
        if int(self.dim) != self.dim or self.dim < 2:
            raise InputError(f"dim must be an integer >= 2, got {self.dim}")
        object.__setattr__(self, "curvature", float(self.curvature))
        object.__setattr__(self, "dim", int(self.dim))

    @property
    def kind(self) -> str:
        if self.curvature > 0:
            return "sphere"
        if self.curvature < 0:
            return "hyperbolic"
        return "flat"

    @property
    def scale(self) -> float:
        """sqrt(|k|), the factor converting Riemannian lengths to unit-model angles."""
        return math.sqrt(abs(self.curvature))

    @property
    def ambient_dim(self) -> int:
        return self.dim if self.curvature == 0 else self.dim + 1

    @property
    def cut_distance(self) -> float:
        """Distance to the cut point along any geodesic; ``math.inf`` if there is none."""
        if self.curvature > 0:
            return math.pi / self.scale
        return math.inf

    @property
    def compact(self) -> bool:
        return self.curvature > 0

    def origin(self) -> np.ndarray:
        o = np.zeros(self.ambient_dim)
        if self.curvature != 0:
            o[-1] = 1.0
        return o


@dataclass(frozen=True)
class TangentVector:
    base: np.ndarray
    vec: np.ndarray

    @property
    def norm_sq(self) -> float:
        return float(self.vec @ self.vec)


def inner(space: ModelSpace, u, v) -> np.ndarray:
    """Ambient bilinear form: Euclidean, or Minkowski with signature (+, ..., +, -)."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    prod = np.sum(u * v, axis=-1)
    if space.curvature < 0:
        prod = prod - 2.0 * u[..., -1] * v[..., -1]
    return prod


def tangent_norm(space: ModelSpace, v) -> np.ndarray:
    return np.sqrt(np.maximum(inner(space, v, v), 0.0))


def _as_points(space: ModelSpace, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape[-1:] != (space.ambient_dim,):
        raise InputError(
            f"expected coordinates of length {space.ambient_dim} for {space}, got shape {x.shape}"
        )
    if not np.all(np.isfinite(x)):
        raise InputError("non-finite coordinates")
    return x


def point_defect(space: ModelSpace, x) -> np.ndarray:
    """Relative violation of the embedding equation (0 for flat space)."""
    x = _as_points(space, x)
    if space.curvature > 0:
        return np.abs(np.sum(x * x, axis=-1) - 1.0)
    if space.curvature < 0:
        sq = np.sum(x * x, axis=-1)
        defect = np.abs(inner(space, x, x) + 1.0) / (1.0 + sq)
        return np.where(x[..., -1] > 0, defect, np.inf)
    return np.zeros(x.shape[:-1])


def check_point(space: ModelSpace, x, tol: float = _POINT_TOL) -> np.ndarray:
    x = _as_points(space, x)
    if np.any(point_defect(space, x) > tol):
        raise InputError(f"point(s) not on {space.kind} model (tolerance {tol})")
    return x


def project(space: ModelSpace, x) -> np.ndarray:
    """Nearest-ish point of the model: normalize on the sphere, lift the time coordinate on H^l."""
    x = _as_points(space, x)
    if space.curvature > 0:
        n = np.linalg.norm(x, axis=-1, keepdims=True)
        if np.any(n == 0):
            raise InputError("cannot project the zero vector onto the sphere")
        return x / n
    if space.curvature < 0:
        out = x.copy()
        out[..., -1] = np.sqrt(1.0 + np.sum(x[..., :-1] ** 2, axis=-1))
        return out
    return x.copy()


def same_point(space: ModelSpace, x, y, tol: float = POINT_EQ_TOL) -> bool:
    return bool(np.max(np.abs(np.asarray(x, float) - np.asarray(y, float))) <= tol)


def _guarded(value, lo, hi, what, magnitude=1.0):
    # rounding in a product of large coordinates grows with their size
    tol = CLAMP_TOL * np.maximum(magnitude, 1.0)
    if np.any(value < lo - tol) or np.any(value > hi + tol):
        raise InputError(f"{what} argument outside its domain by more than {CLAMP_TOL} (relative)")
    return np.clip(value, lo, hi)


def _angle(space: ModelSpace, x, y) -> np.ndarray:
    """Unit-model distance (the angle / hyperbolic length before rescaling)."""
    if space.curvature > 0:
        c = _guarded(np.sum(x * y, axis=-1), -1.0, 1.0, "arccos")
        # atan2 keeps full relative precision for nearby and nearly antipodal points
        s = np.linalg.norm(y - c[..., None] * x, axis=-1)
        return np.arctan2(s, c)
    if space.curvature < 0:
        c = _guarded(-inner(space, x, y), 1.0, np.inf, "arccosh", np.sum(np.abs(x * y), axis=-1))
        diff = x - y
        chord_sq = np.maximum(inner(space, diff, diff), 0.0)
        # <x-y, x-y> = 4 sinh^2(d/2) is accurate for nearby points, arccosh for distant ones
        near = 2.0 * np.arcsinh(0.5 * np.sqrt(chord_sq))
        return np.where(c > 2.0, np.arccosh(np.maximum(c, 1.0)), near)
    return np.linalg.norm(x - y, axis=-1)


def dist(space: ModelSpace, x, y):
    """Geodesic distance; broadcasts over leading axes."""
    x = _as_points(space, x)
    y = _as_points(space, y)
    d = _angle(space, x, y)
    if space.curvature != 0:
        d = d / space.scale
    return float(d) if np.ndim(d) == 0 else d


def exp_array(space: ModelSpace, x: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Exponential map on raw arrays (no validation)."""
    if space.curvature == 0:
        return x + v
    n = tangent_norm(space, v)[..., None]
    theta = space.scale * n
    safe_n = np.where(n > 0, n, 1.0)
    if space.curvature > 0:
        y = np.cos(theta) * x + np.where(n > 0, np.sin(theta) / safe_n, 0.0) * v
    else:
        y = np.cosh(theta) * x + np.where(n > 0, np.sinh(theta) / safe_n, 0.0) * v
    return project(space, y)


def log_array(space: ModelSpace, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Logarithm map on raw arrays; raises SingularityError at antipodes."""
    if space.curvature == 0:
        return y - x
    d = dist(space, x, y)
    d = np.asarray(d)[..., None]
    if space.curvature > 0:
        w = y - np.sum(x * y, axis=-1, keepdims=True) * x
    else:
        w = y + inner(space, x, y)[..., None] * x
    if space.curvature < 0:
        # |w| = sinh of the unit-model distance; the Minkowski norm of w cancels far out
        wn = np.sinh(space.scale * d)
    else:
        wn = tangent_norm(space, w)[..., None]
    if space.curvature > 0 and np.any((wn < 1e-12) & (d * space.scale > 0.5 * math.pi)):
        raise SingularityError("log map undefined: points are antipodal (cut point)")
    return np.where(wn > 0, w * (d / np.where(wn > 0, wn, 1.0)), 0.0)


def exp_map(space: ModelSpace, v: TangentVector) -> np.ndarray:
    base = check_point(space, v.base)
    vec = _as_points(space, v.vec)
    return exp_array(space, base, vec)


def log_map(space: ModelSpace, x, y) -> TangentVector:
    x = check_point(space, x)
    y = check_point(space, y)
    return TangentVector(base=x, vec=log_array(space, x, y))


def geodesic_point(space: ModelSpace, x, y, t: float) -> np.ndarray:
    """Point at fraction ``t`` of the minimal geodesic from x to y."""
    if not 0.0 <= t <= 1.0:
        raise InputError(f"t must lie in [0, 1], got {t}")
    x = check_point(space, x)
    y = check_point(space, y)
    if t == 1.0:
        return y.copy()
    return exp_array(space, x, t * log_array(space, x, y))


def tangent_basis(space: ModelSpace, x) -> np.ndarray:
    """Orthonormal basis of T_x M as the rows of a (dim, ambient_dim) array."""
    x = np.asarray(x, dtype=float)
    if space.curvature == 0:
        return np.eye(space.dim)
    if space.curvature < 0:
        # frame at the origin transported along the geodesic to x; exact even far out
        origin = space.origin()
        spatial = np.eye(space.ambient_dim)[: space.dim]
        return spatial + (x[: space.dim] / (1.0 + x[-1]))[:, None] * (origin + x)[None, :]
    # frame transported from the nearer pole +-e_last; exact and orthonormal
    pole = space.origin() if x[-1] >= 0 else -space.origin()
    spatial = np.eye(space.ambient_dim)[: space.dim]
    return spatial - (x[: space.dim] / (1.0 + abs(x[-1])))[:, None] * (pole + x)[None, :]


def frame_components(space: ModelSpace, x: np.ndarray, basis: np.ndarray, pts: np.ndarray) -> np.ndarray:
    """Tangent components at x of the directions to ``pts``, in the frame ``basis``.

    Row k has norm sin, 1 or sinh of the (unit-model) distance times the
    direction to pts[k].  On the hyperboloid the coordinates come from the
    transported frame formula, which avoids cancelling huge ambient terms.
    """
    if space.curvature > 0:
        return (pts - (pts @ x)[:, None] * x) @ basis.T
    if space.curvature < 0:
        c = np.maximum(-inner(space, pts, x), 1.0)
        return pts[:, : space.dim] - np.outer((pts[:, -1] + c) / (1.0 + x[-1]), x[: space.dim])
    return (pts - x) @ basis.T


def exp_frame(space: ModelSpace, x: np.ndarray, basis: np.ndarray, coords: np.ndarray) -> np.ndarray:
    """exp_x of the tangent vector with frame coordinates ``coords`` (Riemannian lengths)."""
    n = float(np.linalg.norm(coords))
    if n == 0.0:
        return x.copy()
    direction = (coords / n) @ basis
    if space.curvature == 0:
        return x + n * direction
    theta = space.scale * n
    if space.curvature > 0:
        y = math.cos(theta) * x + math.sin(theta) * direction
    else:
        y = math.cosh(theta) * x + math.sinh(theta) * direction
    return project(space, y)


def s_kappa(curvature: float, t):
    """Generalized sine: sin(sqrt(k) t), t, or sinh(sqrt(-k) t) (unnormalized)."""
    t = np.asarray(t, dtype=float)
    if curvature > 0:
        out = np.sin(math.sqrt(curvature) * t)
    elif curvature < 0:
        out = np.sinh(math.sqrt(-curvature) * t)
    else:
        out = t
    return float(out) if np.ndim(out) == 0 else out


def _rng(seed: SeedLike) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def _ball_radii(space: ModelSpace, radius: float, n: int, rng: np.random.Generator) -> np.ndarray:
    # inverse CDF of the radial density S_k(r)^(dim-1) on [0, radius]
    grid = np.linspace(0.0, radius, 4097)
    dens = np.abs(s_kappa(space.curvature, grid)) ** (space.dim - 1)
    cdf = np.concatenate([[0.0], np.cumsum(0.5 * (dens[1:] + dens[:-1]) * np.diff(grid))])
    cdf /= cdf[-1]
    return np.interp(rng.random(n), cdf, grid)


def sample_uniform(
    space: ModelSpace,
    n: int,
    seed: SeedLike = None,
    constraint: Optional[Tuple[np.ndarray, float]] = None,
) -> np.ndarray:
    """Draw ``n`` points uniformly from the space (sphere only) or from a geodesic ball.

    ``constraint`` is ``(center, radius)``.  Non-compact spaces require it.
    """
    rng = _rng(seed)
    if constraint is None:
        if not space.compact:
            raise InputError("uniform sampling on a non-compact space needs a constraint ball")
        g = rng.standard_normal((n, space.ambient_dim))
        return g / np.linalg.norm(g, axis=1, keepdims=True)
    center, radius = constraint
    center = check_point(space, center)
    if not radius > 0:
        raise InputError(f"constraint radius must be positive, got {radius}")
    if radius >= space.cut_distance:
        raise InputError("constraint radius must be below the cut distance")
    basis = tangent_basis(space, center)
    dirs = rng.standard_normal((n, space.dim))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    r = _ball_radii(space, radius, n, rng)
    v = (dirs * r[:, None]) @ basis
    pts = exp_array(space, np.broadcast_to(center, v.shape), v)
    return pts


def uniform_random_point(
    space: ModelSpace,
    rng_seed: SeedLike,
    constraint: Optional[Tuple[np.ndarray, float]] = None,
) -> np.ndarray:
    return sample_uniform(space, 1, rng_seed, constraint)[0]
