"""Error types raised by the simulation library.

All subclass ValueError so generic argument-validation handling still
catches them; the distinct classes let callers tell a physically
meaningful failure (a non-invertible reversal, a dead channel branch)
apart from a plain bad argument.
"""


class SingularReversalError(ValueError):
    """Reversal requested at measurement strength p = 1, where no inverse exists."""


class NotPositiveSemidefiniteError(ValueError):
    """Matrix has a negative eigenvalue beyond the numerical clipping floor."""


class IncompleteDataError(ValueError):
    """Measurement settings do not span an informationally complete set."""


class DegenerateChannelError(ValueError):
    """A channel probe returned zero success probability, so no posterior exists."""
