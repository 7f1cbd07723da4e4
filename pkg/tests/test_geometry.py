import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from frechet_median import geometry as geo
from frechet_median.errors import InputError, SingularityError
from frechet_median.geometry import ModelSpace, TangentVector

from conftest import SPACES, random_points

S2, E2, H2 = ModelSpace(1.0), ModelSpace(0.0), ModelSpace(-1.0)


def test_model_space_validation():
    with pytest.raises(InputError):
        ModelSpace(1.0, dim=1)
    with pytest.raises(InputError):
        ModelSpace(float("nan"))
    assert S2.cut_distance == pytest.approx(math.pi)
    assert ModelSpace(4.0).cut_distance == pytest.approx(math.pi / 2)
    assert E2.cut_distance == math.inf and H2.cut_distance == math.inf


@pytest.mark.parametrize(
    "space, x, y, expected",
    [
        (S2, [1, 0, 0], [0, 1, 0], math.pi / 2),
        (E2, [0, 0], [3, 4], 5.0),
        (H2, [0, 0, 1], [math.sinh(1), 0, math.cosh(1)], 1.0),
        (ModelSpace(4.0), [1, 0, 0], [0, 1, 0], math.pi / 4),
    ],
)
def test_dist_examples(space, x, y, expected):
    assert geo.dist(space, x, y) == pytest.approx(expected, abs=1e-15)


def test_dist_dimension_mismatch():
    with pytest.raises(InputError):
        geo.dist(S2, [1, 0], [0, 1, 0])


def test_dist_rejects_far_off_sphere_argument():
    with pytest.raises(InputError):
        geo.dist(S2, [1.1, 0, 0], [1.1, 0, 0])


def test_exp_examples():
    x = np.array([1.0, 0, 0])
    assert np.allclose(geo.exp_map(S2, TangentVector(x, np.zeros(3))), x)
    y = geo.exp_map(S2, TangentVector(x, np.array([0, math.pi / 2, 0])))
    assert np.allclose(y, [0, 1, 0], atol=1e-15)
    h = geo.exp_map(H2, TangentVector(np.array([0.0, 0, 1]), np.array([1.0, 0, 0])))
    assert np.allclose(h, [math.sinh(1), 0, math.cosh(1)], atol=1e-15)


def test_exp_rejects_nonfinite():
    with pytest.raises(InputError):
        geo.exp_map(S2, TangentVector(np.array([1.0, 0, 0]), np.array([0, np.inf, 0])))


def test_log_examples():
    x = np.array([1.0, 0, 0])
    assert np.allclose(geo.log_map(S2, x, x).vec, 0)
    assert np.allclose(geo.log_map(E2, [1, 2], [4, 6]).vec, [3, 4])
    assert np.allclose(geo.log_map(S2, x, [0, 1, 0]).vec, [0, math.pi / 2, 0], atol=1e-15)


def test_log_antipodal_raises():
    with pytest.raises(SingularityError):
        geo.log_map(S2, [1, 0, 0], [-1, 0, 0])


def test_geodesic_point_examples():
    x, y = [1.0, 0, 0], [0, 1.0, 0]
    assert np.allclose(geo.geodesic_point(S2, x, y, 0.0), x)
    assert np.allclose(geo.geodesic_point(S2, x, y, 1.0), y)
    assert np.allclose(geo.geodesic_point(E2, [0, 0], [2, 0], 0.25), [0.5, 0])
    s = math.sqrt(2) / 2
    assert np.allclose(geo.geodesic_point(S2, x, y, 0.5), [s, s, 0], atol=1e-15)
    with pytest.raises(InputError):
        geo.geodesic_point(S2, x, y, 1.5)


def test_uniform_random_point_deterministic(space):
    c = None if space.compact else (space.origin(), 1.0)
    a = geo.uniform_random_point(space, 123, c)
    b = geo.uniform_random_point(space, 123, c)
    assert np.array_equal(a, b)
    geo.check_point(space, a)


def test_uniform_sphere_mean_small():
    pts = geo.sample_uniform(S2, 10_000, 7)
    assert np.linalg.norm(pts.mean(axis=0)) < 0.05


@pytest.mark.parametrize("space", SPACES, ids=lambda s: s.kind)
def test_constraint_ball_respected(space):
    center = geo.uniform_random_point(space, 3, None if space.compact else (space.origin(), 1.0))
    pts = geo.sample_uniform(space, 2000, 11, (center, 0.3))
    assert np.max(geo.dist(space, center, pts)) <= 0.3 + 1e-12


def test_constraint_radius_must_be_positive():
    with pytest.raises(InputError):
        geo.uniform_random_point(S2, 0, (np.array([1.0, 0, 0]), 0.0))


def test_noncompact_sampling_needs_constraint():
    with pytest.raises(InputError):
        geo.uniform_random_point(H2, 0)


def test_constraint_ball_radial_law_flat():
    # uniform in a disc: P(r <= R/2) = 1/4
    pts = geo.sample_uniform(E2, 40_000, 5, (np.zeros(2), 1.0))
    frac = np.mean(np.linalg.norm(pts, axis=1) <= 0.5)
    assert frac == pytest.approx(0.25, abs=0.01)


# --- invariants on 1000 seeded triples per space -------------------------------------------


@pytest.fixture(scope="module", params=SPACES, ids=lambda s: s.kind)
def triples(request):
    space = request.param
    rng = np.random.default_rng(20240)
    return space, [random_points(space, 1000, rng) for _ in range(3)]


def test_metric_axioms(triples):
    space, (x, y, z) = triples
    dxy, dyx = geo.dist(space, x, y), geo.dist(space, y, x)
    assert np.max(np.abs(dxy - dyx)) <= 1e-12
    assert np.all(geo.dist(space, x, x) <= 1e-12)
    assert np.all(dxy > 0)
    slack = geo.dist(space, x, y) + geo.dist(space, y, z) - geo.dist(space, x, z)
    assert slack.min() >= -1e-10
    if space.compact:
        assert dxy.max() <= space.cut_distance


def test_exp_log_inverse(triples):
    space, (x, y, _) = triples
    d = geo.dist(space, x, y)
    keep = d < 0.9 * space.cut_distance
    v = geo.log_array(space, x[keep], y[keep])
    assert np.max(np.abs(geo.tangent_norm(space, v) - d[keep])) < 1e-10
    back = geo.exp_array(space, x[keep], v)
    assert np.max(geo.dist(space, back, y[keep])) < 1e-9


def test_log_is_tangent(triples):
    space, (x, y, _) = triples
    d = geo.dist(space, x, y)
    keep = d < 0.9 * space.cut_distance
    v = geo.log_array(space, x[keep], y[keep])
    if space.curvature != 0:
        assert np.max(np.abs(geo.inner(space, v, x[keep]))) < 1e-10


def test_law_of_cosines(triples):
    space, (x, y, z) = triples
    a, b, c = geo.dist(space, z, y), geo.dist(space, z, x), geo.dist(space, x, y)
    ok = (a > 1e-3) & (b > 1e-3)
    if space.compact:
        ok &= (a < math.pi - 1e-3) & (b < math.pi - 1e-3)
    u = geo.log_array(space, z[ok], y[ok])
    v = geo.log_array(space, z[ok], x[ok])
    a, b, c = a[ok], b[ok], c[ok]
    cos_angle = geo.inner(space, u, v) / (a * b)
    if space.curvature > 0:
        resid = np.cos(c) - (np.cos(a) * np.cos(b) + np.sin(a) * np.sin(b) * cos_angle)
    elif space.curvature < 0:
        resid = (np.cosh(c) - (np.cosh(a) * np.cosh(b) - np.sinh(a) * np.sinh(b) * cos_angle)) / np.cosh(c)
    else:
        resid = c**2 - (a**2 + b**2 - 2 * a * b * cos_angle)
    assert np.max(np.abs(resid)) < 1e-10


def test_geodesic_arclength_additivity(triples):
    space, (x, y, _) = triples
    rng = np.random.default_rng(3)
    d = geo.dist(space, x, y)
    for i in np.flatnonzero(d < 0.9 * space.cut_distance)[:200]:
        t1, t2 = sorted(rng.random(2))
        g1 = geo.geodesic_point(space, x[i], y[i], t1)
        g2 = geo.geodesic_point(space, x[i], y[i], t2)
        assert abs(geo.dist(space, g1, g2) - (t2 - t1) * d[i]) < 1e-10
        assert abs(geo.dist(space, x[i], g1) - t1 * d[i]) < 1e-10


@settings(max_examples=60, deadline=None)
@given(
    curvature=st.sampled_from([4.0, 1.0, 0.25, -0.25, -1.0, -4.0]),
    dim=st.sampled_from([2, 3]),
    seed=st.integers(0, 2**32 - 1),
)
def test_scaled_spaces_exp_log(curvature, dim, seed):
    space = ModelSpace(curvature, dim)
    rng = np.random.default_rng(seed)
    # same unit-model radius in every curvature
    radius = 0.45 * space.cut_distance if space.compact else 2.0 / space.scale
    center = space.origin()
    x, y = geo.sample_uniform(space, 2, rng, (center, radius))
    v = geo.log_map(space, x, y)
    assert abs(math.sqrt(max(float(geo.inner(space, v.vec, v.vec)), 0)) - geo.dist(space, x, y)) < 1e-10
    assert geo.dist(space, geo.exp_map(space, v), y) < 1e-9
    basis = geo.tangent_basis(space, x)
    gram = geo.inner(space, basis[:, None, :], basis[None, :, :])
    assert np.allclose(gram, np.eye(dim), atol=1e-10)


def test_projection_and_defect():
    x = np.array([1 + 1e-7, 0, 0])
    assert geo.point_defect(S2, x) > 1e-8
    assert geo.point_defect(S2, geo.project(S2, x)) < 1e-15
    h = geo.project(H2, [0.3, -0.2, 5.0])
    assert abs(geo.inner(H2, h, h) + 1) < 1e-14
