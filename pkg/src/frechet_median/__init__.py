"""Fréchet medians on constant-curvature model spaces, with robustness bounds."""
from .errors import InputError, SingularityError
from .geometry import ModelSpace, TangentVector, dist, exp_map, geodesic_point, log_map

__version__ = "0.1.0"
