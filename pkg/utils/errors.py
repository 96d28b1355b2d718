"""Exceptions raised by the heralding toolkit."""


class HeraldError(Exception):
    """Base class for all toolkit errors."""


class DomainError(HeraldError, ValueError):
    """A parameter or precondition is outside the supported domain."""


class ZeroState(HeraldError):
    """The heralded branch was annihilated; E_N is undefined."""

    def __init__(self, norm_squared, message=None):
        self.norm_squared = norm_squared
        super().__init__(message or f"Heralded branch annihilated (norm² = {norm_squared:.3e})")


class TruncationUnsafe(HeraldError):
    """Too much probability mass sits at the top of the Fock cutoff."""

    def __init__(self, tail_mass, k_max, message=None):
        self.tail_mass = tail_mass
        self.k_max = k_max
        super().__init__(message or f"Tail mass {tail_mass:.3e} too large for k_max = {k_max}")


class ConvergenceFailure(HeraldError):
    """A decomposition did not meet its accuracy contract."""


class NoFeasiblePoint(HeraldError):
    """No grid point satisfies the success-probability constraint."""
