from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..model import RegionLabel


@dataclass(frozen=True)
class IntegrationConfig:
    """Tolerances shared by every integration routine.

    ``max_step=None`` lets each caller pick a twentieth of the natural
    period of the flow it integrates.
    """

    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_step: float | None = None
    event_tol: float = 1e-11

    def __post_init__(self):
        for name in ("rel_tol", "abs_tol", "event_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.max_step is not None and not self.max_step > 0:
            raise ValueError("max_step must be positive")

    def step_limit(self, period: float) -> float:
        return self.max_step if self.max_step is not None else period / 20.0


@dataclass
class CrossingEvent:
    t: float
    p: np.ndarray
    label: RegionLabel


@dataclass
class Trajectory:
    """Time-stamped states, optionally tagged per sample.

    ``modes`` holds one tag per sample (``"inner"``, ``"outer"`` or
    ``"sliding"`` for piecewise runs).  ``dense`` is a callable ``t -> state``
    valid on ``[times[0], times[-1]]`` when the integrator provides one.
    """

    times: np.ndarray
    states: np.ndarray
    events: list[CrossingEvent] = field(default_factory=list)
    modes: np.ndarray | None = None
    dense: Callable | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.states = np.asarray(self.states, dtype=float).reshape(-1, 3)
        if self.times.ndim != 1 or len(self.times) != len(self.states):
            raise ValueError("times and states must have matching length")
        if len(self.times) > 1:
            dt = np.diff(self.times)
            if not (np.all(dt > 0) or np.all(dt < 0)):
                raise ValueError("times must be strictly monotone")
        if not np.all(np.isfinite(self.states)):
            raise ValueError("states must be finite")
        if self.modes is not None:
            self.modes = np.asarray(self.modes)
            if len(self.modes) != len(self.times):
                raise ValueError("modes must have one entry per sample")
        lo, hi = sorted((self.times[0], self.times[-1])) if len(self.times) else (0.0, 0.0)
        span = max(abs(lo), abs(hi), 1.0)
        for ev in self.events:
            if not lo - 1e-12 * span <= ev.t <= hi + 1e-12 * span:
                raise ValueError(f"event at t={ev.t} outside [{lo}, {hi}]")

    def __len__(self) -> int:
        return len(self.times)

    @property
    def t_final(self) -> float:
        return float(self.times[-1])

    @property
    def final(self) -> np.ndarray:
        return self.states[-1].copy()

    def __call__(self, t):
        if self.dense is None:
            raise ValueError("trajectory carries no dense output")
        return self.dense(t)
