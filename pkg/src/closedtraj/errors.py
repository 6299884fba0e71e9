"""Exception hierarchy.

Every error raised on purpose by the package derives from
:class:`ClosedTrajError`, so callers (notably the CLI) can separate
analysis failures from programming errors.
"""


class ClosedTrajError(Exception):
    """Base class for all package errors."""


# model / closed forms

class DivisionDegenerate(ClosedTrajError, ZeroDivisionError):
    """Sliding-field denominator X-h - X+h vanishes (double tangency)."""


class DegenerateA(ClosedTrajError, ValueError):
    """The damping coefficient a is zero."""


class NoRealIntersection(ClosedTrajError, ValueError):
    """|eps| >= |a|: the invariant planes miss the unit sphere."""


class LogDomain(ClosedTrajError, ValueError):
    """The logarithm defining the inner transit time has a non-positive argument."""


class ArctanDegenerate(ClosedTrajError, ValueError):
    """eps = 0: the outer transit time is undefined."""


class ExistenceViolated(ClosedTrajError, ValueError):
    """Parameters lie outside the bands where a pseudo-orbit exists."""


# integration

class StepSizeUnderflow(ClosedTrajError, RuntimeError):
    """Adaptive step-size control stalled."""


class NonFinite(ClosedTrajError, FloatingPointError):
    """The integrated state overflowed or became NaN."""


class DoubleTangency(ClosedTrajError, RuntimeError):
    """Both fields are tangent to the switching manifold at the same point."""


class NoSignChange(ClosedTrajError, ValueError):
    """The event function neither changes sign nor grazes zero on the segment."""


class ThetaNonMonotone(ClosedTrajError, RuntimeError):
    """The angular variable stopped being monotone along the orbit."""


class NoConvergence(ClosedTrajError, RuntimeError):
    """An iterative solver exhausted its iteration budget."""


# averaging

class IdenticallyZero(ClosedTrajError, ValueError):
    """The averaged function vanishes identically."""


class QuadratureNoConvergence(ClosedTrajError, RuntimeError):
    """Adaptive quadrature reported failure."""


# cli

class ConfigInvalid(ClosedTrajError, ValueError):
    """A run configuration failed validation."""
