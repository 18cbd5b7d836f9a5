"""Mission survival function R(t) from a signature family and lifetime laws."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, Sequence, Union

import numpy as np

from .errors import OutOfMissionError
from .lifetime import LifetimeModel, conditional_cdf, phase_reliability
from .model import MetaTypeAssignment, PhasedSystem
from .signature import SignatureFamily, capacities, feasible_levels


class Side(Enum):
    LEFT = "left"
    INTERIOR = "interior"
    RIGHT = "right"

    @property
    def rank(self) -> int:
        return {"left": -1, "interior": 0, "right": 1}[self.value]


@dataclass(frozen=True)
class EvalPoint:
    t: float
    side: Side = Side.INTERIOR

    @property
    def key(self) -> tuple[float, int]:
        return (self.t, self.side.rank)

    def label(self) -> str:
        suffix = {Side.LEFT: "-", Side.RIGHT: "+", Side.INTERIOR: ""}[self.side]
        return f"{self.t:g}{suffix}"


Point = Union[EvalPoint, float, int]


def as_point(pt: Point) -> EvalPoint:
    return pt if isinstance(pt, EvalPoint) else EvalPoint(float(pt))


def current_phase(tau: Sequence[float], t: float, side: Side = Side.INTERIOR) -> int:
    """Index of the phase in force at ``t``; boundaries need an explicit side."""
    n = len(tau) - 1
    if not tau[0] <= t <= tau[-1]:
        raise OutOfMissionError(f"t={t} outside the mission window [{tau[0]}, {tau[-1]}]")
    if t == tau[0]:
        if side is Side.LEFT:
            raise OutOfMissionError("no left limit at mission start")
        return 1
    if t == tau[-1]:
        if side is Side.RIGHT:
            raise OutOfMissionError("no right limit at mission end")
        return n
    for i in range(2, n + 1):
        if t == tau[i - 1]:
            if side is Side.LEFT:
                return i - 1
            if side is Side.RIGHT:
                return i
            raise OutOfMissionError(f"t={t} is the start of phase {i}; choose a left or right limit")
    if side is not Side.INTERIOR:
        raise OutOfMissionError(f"t={t} is not a phase boundary; one-sided limits do not apply")
    return max(i for i in range(1, n + 1) if tau[i - 1] < t)


def _lifetimes(mta: MetaTypeAssignment, lifetimes) -> list[LifetimeModel]:
    if lifetimes is None:
        return [mt.physical.lifetime for mt in mta.metatypes]
    if isinstance(lifetimes, Mapping):
        return [lifetimes.get(mt.id, mt.physical.lifetime) for mt in mta.metatypes]
    out = list(lifetimes)
    if len(out) != mta.K:
        raise ValueError(f"need {mta.K} lifetime models, got {len(out)}")
    return out


def _exposure(mta: MetaTypeAssignment, tau: Sequence[float], k: int, i: int) -> float:
    mt = mta.metatypes[k - 1]
    return sum(tau[j] - tau[j - 1] for j in mt.appearance if j < i)


def component_survival(sys: PhasedSystem, mta: MetaTypeAssignment, pt: Point, lifetimes=None):
    """(R_ik, F_ik) for every phase up to rho(t) and meta-type present there."""
    pt = as_point(pt)
    tau = sys.boundaries
    rho = current_phase(tau, pt.t, pt.side)
    models = _lifetimes(mta, lifetimes)
    out: dict[tuple[int, int], tuple[float, float]] = {}
    for i in range(1, rho + 1):
        for k in mta.present(i):
            age = _exposure(mta, tau, k, i)
            lm = models[k - 1]
            out[(i, k)] = (phase_reliability(lm, i, tau, pt.t, age), conditional_cdf(lm, i, tau, pt.t, age))
    return rho, out


class _Weights:
    """prod_ik C(m_ik, l_ik) R^l (1-R)^(m-l), with per-factor caching."""

    def __init__(self, mta: MetaTypeAssignment, probs):
        self.mta = mta
        self.probs = probs
        self.cache: dict[tuple[int, int, int, int], float] = {}

    def factor(self, i, k, m, l) -> float:
        key = (i, k, m, l)
        val = self.cache.get(key)
        if val is None:
            r, f = self.probs[(i, k)]
            val = math.comb(m, l) * r ** l * f ** (m - l)
            self.cache[key] = val
        return val

    def __call__(self, levels) -> float:
        m = capacities(self.mta, levels)
        w = 1.0
        for i, (mrow, lrow) in enumerate(zip(m, levels), start=1):
            for k, (mik, lik) in enumerate(zip(mrow, lrow), start=1):
                if mik:
                    w *= self.factor(i, k, mik, lik)
        return w


def system_reliability(sys: PhasedSystem, fam: SignatureFamily, pt: Point, lifetimes=None) -> float:
    """R(t): sum of Phi_rho(l) times the probability of the level vector l."""
    rho, probs = component_survival(sys, fam.mta, pt, lifetimes)
    weight = _Weights(fam.mta, probs)
    table = fam.table(rho)
    return math.fsum(float(phi) * weight(lv) for lv, phi in table.entries.items())


def level_weight_total(sys: PhasedSystem, mta: MetaTypeAssignment, pt: Point, lifetimes=None) -> float:
    """Total probability over every feasible level vector; 1 up to rounding."""
    rho, probs = component_survival(sys, mta, pt, lifetimes)
    weight = _Weights(mta, probs)
    return math.fsum(weight(lv) for lv in feasible_levels(mta, rho))


def single_type_reliability(sys: PhasedSystem, fam: SignatureFamily, pt: Point,
                            lifetime: LifetimeModel | None = None) -> float:
    """Sequential single-type form with m_i = l_{i-1}, l_0 = n.

    Only for one meta-type present in every phase with no late entrants.
    """
    mta = fam.mta
    if mta.K != 1:
        raise ValueError("single-type evaluation needs exactly one meta-type")
    mt = mta.metatypes[0]
    if mt.appearance != frozenset(range(1, sys.n_phases + 1)) or any(
            mt.members_in(i) != frozenset(mt.members) for i in mt.appearance):
        raise ValueError("single-type evaluation needs every component in every phase")
    pt = as_point(pt)
    tau = sys.boundaries
    rho = current_phase(tau, pt.t, pt.side)
    lm = lifetime or mt.physical.lifetime
    rel = [phase_reliability(lm, i, tau, pt.t) for i in range(1, rho + 1)]
    unrel = [conditional_cdf(lm, i, tau, pt.t) for i in range(1, rho + 1)]
    n = len(mt.members)
    terms = []
    for lv, phi in fam.table(rho).entries.items():
        prev, w = n, 1.0
        for i, (row, r, f) in enumerate(zip(lv, rel, unrel)):
            l = row[0]
            w *= math.comb(prev, l) * r ** l * f ** (prev - l)
            prev = l
        terms.append(float(phi) * w)
    return math.fsum(terms)


# -- curves -------------------------------------------------------------------

@dataclass(frozen=True)
class SurvivalCurve:
    samples: tuple[tuple[EvalPoint, float], ...]
    jumps: Mapping[float, float] = field(default_factory=dict)

    @property
    def points(self) -> list[EvalPoint]:
        return [p for p, _ in self.samples]

    @property
    def values(self) -> list[float]:
        return [r for _, r in self.samples]

    def value(self, t: float, side: Side = Side.INTERIOR) -> float:
        for p, r in self.samples:
            if p.t == t and p.side is side:
                return r
        raise KeyError((t, side))

    def is_monotone(self, tol: float = 0.0) -> bool:
        vals = self.values
        return all(b <= a + tol for a, b in zip(vals, vals[1:]))

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["t", "side", "R", "jump"])
        for p, r in self.samples:
            jump = self.jumps.get(p.t) if p.side is not Side.INTERIOR else None
            writer.writerow([repr(float(p.t)), p.side.value, repr(float(r)), "" if jump is None else repr(jump)])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "SurvivalCurve":
        rows = list(csv.DictReader(io.StringIO(text)))
        samples = tuple((EvalPoint(float(r["t"]), Side(r["side"])), float(r["R"])) for r in rows)
        jumps = {float(r["t"]): float(r["jump"]) for r in rows if r["jump"]}
        return cls(samples, jumps)


def curve_points(sys: PhasedSystem, grid=None) -> list[EvalPoint]:
    """Grid points plus both one-sided limits at each interior boundary.

    ``grid`` is an int (evenly spaced count over the mission) or a sequence of
    times; grid times landing on a boundary are replaced by its two limits.
    """
    tau = sys.boundaries
    inner = set(tau[1:-1])
    times: list[float] = []
    if grid is not None:
        if isinstance(grid, (int, np.integer)):
            times = list(np.linspace(tau[0], tau[-1], int(grid))) if grid > 0 else []
        else:
            times = [float(t) for t in grid]
    for t in times:
        if not tau[0] <= t <= tau[-1]:
            raise OutOfMissionError(f"grid time {t} outside the mission window")
    points = {EvalPoint(float(tau[0])), EvalPoint(float(tau[-1]))}
    for t in times:
        if t not in inner:
            points.add(EvalPoint(float(t)))
    for b in inner:
        points.add(EvalPoint(float(b), Side.LEFT))
        points.add(EvalPoint(float(b), Side.RIGHT))
    return sorted(points, key=lambda p: p.key)


def reliability_curve(sys: PhasedSystem, fam: SignatureFamily, grid=None, lifetimes=None) -> SurvivalCurve:
    pts = curve_points(sys, grid)
    samples = tuple((p, system_reliability(sys, fam, p, lifetimes)) for p in pts)
    lookup = {(p.t, p.side): r for p, r in samples}
    jumps = {float(b): lookup[(b, Side.LEFT)] - lookup[(b, Side.RIGHT)] for b in sys.boundaries[1:-1]}
    return SurvivalCurve(samples, jumps)
