"""Component lifetime laws and per-phase conditional survival.

Every law is handled through its cumulative hazard H, so a conditional
survival over an interval is ``exp(-(H(b) - H(a)))`` and the matching CDF is
``-expm1(-(H(b) - H(a)))``. This keeps tiny failure probabilities accurate
where ``1 - F`` would cancel.

A component only accrues exposure while it is present in a phase. ``age`` is
the exposure accumulated before the phase in question; for a component that
is present in every phase it equals the phase start ``tau_i``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .errors import UndefinedConditionalError


@dataclass(frozen=True)
class Exponential:
    rate: float

    def __post_init__(self):
        if not self.rate >= 0:
            raise ValueError(f"exponential rate must be >= 0, got {self.rate}")

    def cumhaz(self, x):
        return self.rate * x

    def inv_cumhaz(self, h):
        if self.rate == 0:
            return np.inf * np.ones_like(h) if isinstance(h, np.ndarray) else math.inf
        return h / self.rate

    @property
    def memoryless(self) -> bool:
        return True

    def __str__(self) -> str:
        return f"exponential({self.rate!r})"


@dataclass(frozen=True)
class Weibull:
    scale: float
    shape: float

    def __post_init__(self):
        if not self.scale > 0:
            raise ValueError(f"Weibull scale must be > 0, got {self.scale}")
        if not self.shape > 0:
            raise ValueError(f"Weibull shape must be > 0, got {self.shape}")

    def cumhaz(self, x):
        return (x / self.scale) ** self.shape

    def inv_cumhaz(self, h):
        return self.scale * h ** (1.0 / self.shape)

    @property
    def memoryless(self) -> bool:
        return self.shape == 1

    def __str__(self) -> str:
        return f"weibull({self.scale!r}, {self.shape!r})"


Distribution = Union[Exponential, Weibull]


@dataclass(frozen=True)
class GlobalCDF:
    """One lifetime law over the component's whole exposure."""

    dist: Distribution

    history_independent = property(lambda self: self.dist.memoryless)

    def problems(self, n_phases: int) -> list[str]:
        return []

    def hazard_increment(self, i: int, elapsed, age):
        return self.dist.cumhaz(age + elapsed) - self.dist.cumhaz(age)

    def elapsed_for(self, i: int, r, age):
        return self.dist.inv_cumhaz(self.dist.cumhaz(age) + r) - age

    def start_hazard(self, age):
        return self.dist.cumhaz(age)


@dataclass(frozen=True)
class PhaseConditional:
    """Phase ``i`` law applied to local time ``t - tau_i`` for units alive at ``tau_i``."""

    laws: tuple[Distribution, ...]

    def __post_init__(self):
        object.__setattr__(self, "laws", tuple(self.laws))

    history_independent = True

    def problems(self, n_phases: int) -> list[str]:
        if len(self.laws) != n_phases:
            return [f"{len(self.laws)} per-phase laws for {n_phases} phases"]
        return []

    def hazard_increment(self, i: int, elapsed, age):
        return self.laws[i - 1].cumhaz(elapsed)

    def elapsed_for(self, i: int, r, age):
        return self.laws[i - 1].inv_cumhaz(r)

    def start_hazard(self, age):
        return 0.0


@dataclass(frozen=True)
class PhaseHazard:
    """Constant hazard ``rates[i-1]`` throughout phase ``i``; zero means dormant."""

    rates: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "rates", tuple(float(r) for r in self.rates))
        for r in self.rates:
            if not r >= 0:
                raise ValueError(f"hazard rates must be >= 0, got {r}")

    history_independent = True

    def problems(self, n_phases: int) -> list[str]:
        if len(self.rates) != n_phases:
            return [f"{len(self.rates)} per-phase rates for {n_phases} phases"]
        return []

    def hazard_increment(self, i: int, elapsed, age):
        return self.rates[i - 1] * elapsed

    def elapsed_for(self, i: int, r, age):
        rate = self.rates[i - 1]
        if rate == 0:
            return np.full_like(r, np.inf, dtype=float) if isinstance(r, np.ndarray) else math.inf
        return r / rate

    def start_hazard(self, age):
        return 0.0


LifetimeModel = Union[GlobalCDF, PhaseConditional, PhaseHazard]


def _phase_window(i: int, tau: Sequence[float], t: float) -> float:
    start, end = tau[i - 1], tau[i]
    if t < start:
        raise ValueError(f"t={t} precedes the start of phase {i} (tau_{i}={start})")
    return min(t, end) - start


def _increment(lm: LifetimeModel, i: int, tau: Sequence[float], t: float, age: float | None) -> float:
    elapsed = _phase_window(i, tau, t)
    a = tau[i - 1] if age is None else age
    if math.isinf(lm.start_hazard(a)):
        raise UndefinedConditionalError(f"lifetime law has F=1 at the start of phase {i}")
    return lm.hazard_increment(i, elapsed, a)


def conditional_cdf(lm: LifetimeModel, i: int, tau: Sequence[float], t: float,
                    age: float | None = None) -> float:
    """P(fail by min(t, tau_{i+1}) | alive at tau_i) for phase ``i`` (1-based)."""
    return -math.expm1(-_increment(lm, i, tau, t, age))


def phase_reliability(lm: LifetimeModel, i: int, tau: Sequence[float], t: float,
                      age: float | None = None) -> float:
    return math.exp(-_increment(lm, i, tau, t, age))


def sample_lifetime(lm: LifetimeModel, tau: Sequence[float], rng: np.random.Generator,
                    size=None, phases: Sequence[int] | None = None):
    """Draw failure times on the mission clock.

    Exposure accrues only during ``phases`` (default: all). A unit exposed
    through its last present phase without failing gets ``inf``.
    """
    n_phases = len(tau) - 1
    present = range(1, n_phases + 1) if phases is None else sorted(phases)
    scalar = size is None
    r = np.atleast_1d(rng.standard_exponential(size)).astype(float)
    out = np.full(r.shape, np.inf)
    alive = np.ones(r.shape, dtype=bool)
    age = 0.0
    for i in present:
        start, duration = tau[i - 1], tau[i] - tau[i - 1]
        full = lm.hazard_increment(i, duration, age)
        hit = alive & (r < full)
        if hit.any():
            out[hit] = start + np.minimum(lm.elapsed_for(i, r[hit], age), duration)
        alive &= ~hit
        r = np.where(alive, r - full, r)
        age += duration
    return float(out[0]) if scalar else out
