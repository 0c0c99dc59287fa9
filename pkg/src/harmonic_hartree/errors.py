"""Exception types shared across the package."""


class BasisMismatchError(ValueError):
    """Two vectors or grids with incompatible cutoff/dimension were combined."""


class NormalizationError(ValueError):
    """An operation required a unit-norm (or nonzero) state and did not get one."""


class TruncationError(RuntimeError):
    """A ladder application lost amplitude past the degree cutoff where the
    result was actually needed.  Increase the cutoff K."""


class NotCenteredError(ValueError):
    """The state does not lie in any centered subspace of its component span."""


class IntegrationError(RuntimeError):
    """The adaptive integrator failed (step underflow or norm-drift breach)."""
