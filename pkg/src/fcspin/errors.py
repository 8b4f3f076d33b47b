"""Exception types shared across the package."""


class NumericalError(RuntimeError):
    """A numerical procedure failed to converge or left its validity domain."""


class BreakdownError(NumericalError):
    """Static-path quadrature hit the low-temperature validity boundary."""


class DivergenceError(NumericalError):
    """A Gaussian-fluctuation factor diverged (critical point or degenerate valley)."""


class SymmetryViolationError(NumericalError):
    """An exact symmetry of the model was violated beyond tolerance; construction bug."""


class InvalidStateError(ValueError):
    """Correlators do not correspond to a physical two-spin density matrix."""
