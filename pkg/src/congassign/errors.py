"""Exception types shared across the package."""


class ResourceGuardError(RuntimeError):
    """A size or step guard tripped before the computation could finish."""


class SolverInvariantError(RuntimeError):
    """An internal solver invariant was violated; this signals a bug."""
