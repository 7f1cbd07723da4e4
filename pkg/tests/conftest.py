import numpy as np
import pytest

from frechet_median.geometry import ModelSpace, sample_uniform

SPACES = [ModelSpace(1.0), ModelSpace(0.0), ModelSpace(-1.0)]


def random_points(space, n, rng, radius=2.0):
    """Uniform draws: whole sphere, or a ball around the origin otherwise."""
    if space.compact:
        return sample_uniform(space, n, rng)
    return sample_uniform(space, n, rng, (space.origin(), radius))


@pytest.fixture(params=SPACES, ids=lambda s: s.kind)
def space(request):
    return request.param
