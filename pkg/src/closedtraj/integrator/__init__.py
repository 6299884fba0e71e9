"""Numerical integration: smooth flows, Filippov trajectories, return maps.

The angular-flow kernel behind the return map comes from the compiled
extension when it was built, and from the pure-Python twin otherwise.
Set ``CLOSEDTRAJ_PURE_PYTHON=1`` to force the fallback.
"""

import os

if os.environ.get("CLOSEDTRAJ_PURE_PYTHON"):
    from . import _kernels_py as kernels
else:
    try:
        from . import _kernels as kernels
    except ImportError:
        from . import _kernels_py as kernels

BACKEND = "cython" if kernels.__name__.endswith("._kernels") else "python"

from .trajectory import CrossingEvent, IntegrationConfig, Trajectory  # noqa: E402
from .ode import EventLocation, Segment, integrate, locate_event  # noqa: E402

__all__ = [
    "BACKEND",
    "CrossingEvent",
    "EventLocation",
    "IntegrationConfig",
    "Segment",
    "Trajectory",
    "integrate",
    "integrate_piecewise",
    "locate_event",
    "return_map",
    "find_periodic_orbit",
    "PeriodicOrbit",
]


def __getattr__(name):
    # piecewise and shooting import model/averaging, which import this package
    if name == "integrate_piecewise":
        from .piecewise import integrate_piecewise
        return integrate_piecewise
    if name in ("return_map", "find_periodic_orbit", "PeriodicOrbit"):
        from . import shooting
        return getattr(shooting, name)
    raise AttributeError(name)
