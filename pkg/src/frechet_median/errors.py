class InputError(ValueError):
    """Invalid arguments: bad shapes, off-manifold points, violated preconditions."""


class SingularityError(InputError):
    """A map is undefined at the given configuration (e.g. log of an antipode)."""
