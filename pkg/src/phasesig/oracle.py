"""Monte Carlo mission simulator, independent of the signature route."""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from statistics import NormalDist
from typing import Mapping, Sequence

import numpy as np

from .lifetime import sample_lifetime
from .model import And, Comp, KOutOfN, Or, PhasedSystem, ensure_valid
from .reliability import EvalPoint, Point, as_point, current_phase
from .structure import eval_phase

CONFIDENCE = 0.99
BLOCK_SIZE = 1 << 16


@dataclass(frozen=True)
class SimResult:
    point: EvalPoint
    survivors: int
    trials: int
    confidence: float = CONFIDENCE

    @property
    def estimate(self) -> float:
        return self.survivors / self.trials

    def _wilson(self) -> tuple[float, float]:
        n, p = self.trials, self.estimate
        z = NormalDist().inv_cdf(0.5 + self.confidence / 2)
        denom = 1 + z * z / n
        center = (p + z * z / (2 * n)) / denom
        half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
        return center, half

    @property
    def half_width(self) -> float:
        return self._wilson()[1]

    @property
    def lower(self) -> float:
        if self.survivors == 0:
            return 0.0
        center, half = self._wilson()
        return max(0.0, center - half)

    @property
    def upper(self) -> float:
        if self.survivors == self.trials:
            return 1.0  # exact at the boundary; rounding would land just below
        center, half = self._wilson()
        return min(1.0, center + half)

    def contains(self, value: float) -> bool:
        return self.lower <= value <= self.upper


@dataclass(frozen=True)
class MissionFailure:
    time: float
    instantaneous: bool  # failed at time+ when a phase starts

    @property
    def key(self) -> tuple[float, int]:
        return (self.time, 1 if self.instantaneous else 0)


@dataclass(frozen=True)
class MissionDraw:
    failure_times: Mapping[str, float]
    failure: MissionFailure | None

    def survives(self, pt: Point) -> bool:
        pt = as_point(pt)
        return self.failure is None or pt.key < self.failure.key


def _models(sys: PhasedSystem, lifetimes):
    lifetimes = lifetimes or {}
    return {name: lifetimes.get(name, ptype.lifetime) for name, ptype in sys.components.items()}


def first_failure(sys: PhasedSystem, times: Mapping[str, float]) -> MissionFailure | None:
    """Scan phase starts and in-phase component failures for the first system failure."""
    for phase in sys.phases:
        comps = phase.components
        if not eval_phase(phase.structure, {c: times[c] > phase.start for c in comps}):
            return MissionFailure(phase.start, True)
        events = sorted(times[c] for c in comps if phase.start < times[c] <= phase.end)
        for u in events:
            if not eval_phase(phase.structure, {c: times[c] > u for c in comps}):
                return MissionFailure(u, False)
    return None


def simulate_mission(sys: PhasedSystem, rng: np.random.Generator, lifetimes=None) -> MissionDraw:
    """One non-repairable mission draw. ``lifetimes`` optionally overrides per component."""
    ensure_valid(sys)
    tau = sys.boundaries
    models = _models(sys, lifetimes)
    times = {name: sample_lifetime(models[name], tau, rng, phases=sys.presence(name))
             for name in sorted(sys.components)}
    return MissionDraw(times, first_failure(sys, times))


def structure_lifetime(expr, times: Mapping[str, np.ndarray]) -> np.ndarray:
    """Time until a coherent structure stops working, given component failure times."""
    if isinstance(expr, Comp):
        return times[expr.name]
    parts = [structure_lifetime(c, times) for c in expr.children]
    if isinstance(expr, And):
        return np.minimum.reduce(parts)
    if isinstance(expr, Or):
        return np.maximum.reduce(parts)
    if isinstance(expr, KOutOfN):
        stacked = np.sort(np.stack(parts), axis=0)
        return stacked[len(parts) - expr.k]
    raise TypeError(f"not a structure expression: {expr!r}")


def mission_failures(sys: PhasedSystem, times: Mapping[str, np.ndarray]):
    """Vectorised first failure: (time, instantaneous) arrays, time=inf on success."""
    shape = next(iter(times.values())).shape
    when = np.full(shape, np.inf)
    inst = np.zeros(shape, dtype=bool)
    open_ = np.ones(shape, dtype=bool)
    for phase in sys.phases:
        life = structure_lifetime(phase.structure, times)
        at_start = open_ & (life <= phase.start)
        during = open_ & ~at_start & (life <= phase.end)
        when[at_start] = phase.start
        inst[at_start] = True
        when[during] = life[during]
        open_ &= ~(at_start | during)
    return when, inst


def _block(sys, models, names, points, n, seed_seq):
    rng = np.random.Generator(np.random.Philox(seed_seq))
    tau = sys.boundaries
    times = {name: sample_lifetime(models[name], tau, rng, size=n, phases=sys.presence(name))
             for name in names}
    when, inst = mission_failures(sys, times)
    rank = inst.astype(np.int8)
    counts = []
    for pt in points:
        alive = (when > pt.t) | ((when == pt.t) & (rank > pt.side.rank))
        counts.append(int(alive.sum()))
    return counts


def estimate_curve(sys: PhasedSystem, points: Sequence[Point], trials: int, seed: int,
                   lifetimes=None, threads: int = 1, block_size: int = BLOCK_SIZE) -> list[SimResult]:
    """Survival frequency at each point; one trajectory serves all points."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    ensure_valid(sys)
    pts = [as_point(p) for p in points]
    tau = sys.boundaries
    for p in pts:
        current_phase(tau, p.t, p.side)
    models = _models(sys, lifetimes)
    names = sorted(sys.components)
    n_blocks = -(-trials // block_size)
    seeds = np.random.SeedSequence(seed).spawn(n_blocks)
    sizes = [block_size] * (n_blocks - 1) + [trials - block_size * (n_blocks - 1)]
    jobs = list(zip(sizes, seeds))

    def run(job):
        return _block(sys, models, names, pts, job[0], job[1])

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            partial = list(pool.map(run, jobs))
    else:
        partial = [run(job) for job in jobs]
    totals = [sum(col) for col in zip(*partial)]
    return [SimResult(p, s, trials) for p, s in zip(pts, totals)]


def results_to_csv(results: Sequence[SimResult], analytic: Sequence[float] | None = None) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    head = ["t", "side", "survivors", "trials", "estimate", "lower", "upper", "half_width"]
    if analytic is not None:
        head += ["analytic", "contained"]
    writer.writerow(head)
    for idx, r in enumerate(results):
        row = [repr(float(r.point.t)), r.point.side.value, r.survivors, r.trials,
               repr(r.estimate), repr(r.lower), repr(r.upper), repr(r.half_width)]
        if analytic is not None:
            row += [repr(float(analytic[idx])), int(r.contains(analytic[idx]))]
        writer.writerow(row)
    return buf.getvalue()
