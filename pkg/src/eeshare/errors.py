"""Exception hierarchy shared by all eeshare modules."""


class EeshareError(Exception):
    """Base class for all errors raised by this package."""


class DimensionMismatch(EeshareError, ValueError):
    """Channel / covariance / parameter dimensions are inconsistent."""


class ConfigError(EeshareError, ValueError):
    """Invalid experiment configuration (bad key, value, or combination)."""


# ---------------------------------------------------------------------------
# Fractional-programming engine
# ---------------------------------------------------------------------------

class SubproblemFailed(EeshareError):
    """An inner solver did not return a usable subproblem solution."""


class MaxIterExceeded(EeshareError):
    """Iteration budget exhausted before reaching the requested tolerance."""


class NonMonotoneObjective(EeshareError):
    """The ascent loop observed a decreasing objective, which signals a
    broken surrogate (value or tangency condition violated)."""


# ---------------------------------------------------------------------------
# Barrier solver
# ---------------------------------------------------------------------------

class Infeasible(EeshareError):
    """The constraint set has no (strictly) feasible point."""


class NumericalFailure(EeshareError):
    """The solver stalled (line search failed or factorization broke down)."""


# ---------------------------------------------------------------------------
# Underlay allocation
# ---------------------------------------------------------------------------

class R1StarExceedsDirectCapacity(EeshareError):
    """The primary rate target is above the interference-free capacity of
    the primary link, so the underlay mode cannot be used."""


class R2StarInfeasible(EeshareError):
    """The secondary rate target cannot be met under the remaining
    constraints; the caller must accept a lower target."""


class GammaBracketFailure(EeshareError):
    """The split-fraction bisection could not bracket the target rate."""


# ---------------------------------------------------------------------------
# Overlay allocation
# ---------------------------------------------------------------------------

class DegenerateChannel(EeshareError):
    """A channel norm required by the relay construction is zero."""


class Rank1Infeasible(EeshareError):
    """The rank-one relay parametrization has an unbounded minimum gain
    requirement for this instance."""


class InitInfeasible(EeshareError):
    """No strictly feasible starting point was found for the ascent loop."""
