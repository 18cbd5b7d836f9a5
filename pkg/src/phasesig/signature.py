"""Exact phase-indexed survival signatures.

A level vector is stored nested, ``levels[i-1][k-1]`` being the number of
meta-type ``k`` components that work throughout phase ``i``; meta-types
absent from a phase carry a 0 there.
"""

from __future__ import annotations

import csv
import io
import itertools
import math
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Mapping, Sequence

from .errors import InfeasibleLevelError, TooLargeError
from .model import MetaTypeAssignment, PhasedSystem, ensure_valid
from .structure import _eval

LevelVector = tuple[tuple[int, ...], ...]

BRUTE_FORCE_MAX_SLOTS = 24


@dataclass(frozen=True)
class SignatureTable:
    p: int
    entries: Mapping[LevelVector, Fraction]
    axes: tuple[tuple[int, int], ...]

    def flat(self, levels: LevelVector) -> tuple[int, ...]:
        """Compact form: only the (phase, meta-type) pairs listed in ``axes``."""
        return tuple(levels[i - 1][k - 1] for i, k in self.axes)

    def __len__(self) -> int:
        return len(self.entries)


@dataclass(frozen=True)
class SignatureFamily:
    system: PhasedSystem
    mta: MetaTypeAssignment
    tables: tuple[SignatureTable, ...]

    def table(self, p: int) -> SignatureTable:
        return self.tables[p - 1]


# -- level-vector bookkeeping -------------------------------------------------

def axes_for(mta: MetaTypeAssignment, p: int) -> tuple[tuple[int, int], ...]:
    return tuple((i, k) for i in range(1, p + 1) for k in mta.present(i))


def capacities(mta: MetaTypeAssignment, levels: Sequence[Sequence[int]]) -> list[list[int]]:
    """m_ik for every phase of ``levels``; raises if any l_ik is out of range."""
    out = []
    for i, row in enumerate(levels, start=1):
        if len(row) != mta.K:
            raise InfeasibleLevelError(f"phase {i} needs {mta.K} counts, got {len(row)}")
        m_row = []
        for mt, l in zip(mta.metatypes, row):
            if i not in mt.appearance:
                m = 0
            else:
                j = mt.previous_appearance(i)
                carried = levels[j - 1][mt.id - 1] if j is not None else 0
                m = carried + len(mt.entrants(i))
            if not 0 <= l <= m:
                raise InfeasibleLevelError(
                    f"l[{i},{mt.id}]={l} outside 0..m={m} (meta-type {mt.id} in phase {i})")
            m_row.append(m)
        out.append(m_row)
    return out


def denominator(mta: MetaTypeAssignment, levels: LevelVector) -> int:
    m = capacities(mta, levels)
    return math.prod(math.comb(mik, lik) for mrow, lrow in zip(m, levels) for mik, lik in zip(mrow, lrow))


def feasible_levels(mta: MetaTypeAssignment, p: int) -> Iterator[LevelVector]:
    """Every level vector over phases 1..p allowed by the m_ik recursion."""

    def extend(prefix: list[tuple[int, ...]]):
        i = len(prefix) + 1
        if i > p:
            yield tuple(prefix)
            return
        ranges = []
        for mt in mta.metatypes:
            if i not in mt.appearance:
                ranges.append(range(1))
                continue
            j = mt.previous_appearance(i)
            carried = prefix[j - 1][mt.id - 1] if j is not None else 0
            ranges.append(range(carried + len(mt.entrants(i)) + 1))
        for row in itertools.product(*ranges):
            prefix.append(row)
            yield from extend(prefix)
            prefix.pop()

    yield from extend([])


def normalize_levels(mta: MetaTypeAssignment, p: int, levels) -> LevelVector:
    """Accept nested, flat full (p*K) or flat compact (present pairs only) forms."""
    levels = tuple(levels)
    if levels and all(isinstance(x, (tuple, list)) for x in levels):
        if len(levels) != p:
            raise InfeasibleLevelError(f"expected {p} phase rows, got {len(levels)}")
        return tuple(tuple(int(v) for v in row) for row in levels)
    K = mta.K
    if len(levels) == p * K:
        return tuple(tuple(int(v) for v in levels[i * K:(i + 1) * K]) for i in range(p))
    axes = axes_for(mta, p)
    if len(levels) != len(axes):
        raise InfeasibleLevelError(
            f"level vector of length {len(levels)} matches neither {p * K} nor {len(axes)} entries")
    nested = [[0] * K for _ in range(p)]
    for (i, k), v in zip(axes, levels):
        nested[i - 1][k - 1] = int(v)
    return tuple(tuple(row) for row in nested)


def _check_assignment(sys: PhasedSystem, mta: MetaTypeAssignment) -> None:
    if set(mta.index) != set(sys.components):
        raise ValueError("meta-type assignment does not cover exactly the system's components")
    for mt in mta.metatypes:
        for i in range(1, sys.n_phases + 1):
            here = frozenset(m for m in mt.members if m in sys.phase(i).components)
            if here != mt.members_in(i):
                raise ValueError(f"meta-type {mt.id} membership disagrees with phase {i}")


# -- chain enumeration --------------------------------------------------------

def compute_signature_family(sys: PhasedSystem, mta: MetaTypeAssignment) -> SignatureFamily:
    """Count working nested subset chains per meta-type, phase by phase.

    A chain prefix whose phase fails is pruned: with coherent phases it
    contributes 0 to every deeper table. Sub-results depend only on the
    phase and the surviving member sets, so they are memoised on that pair.
    """
    ensure_valid(sys)
    _check_assignment(sys, mta)
    N, K = sys.n_phases, mta.K

    plan = []
    for phase in sys.phases:
        kinds = [(mt.id - 1, tuple(sorted(mt.entrants(phase.index))))
                 for mt in mta.metatypes if phase.index in mt.appearance]
        plan.append((kinds, tuple(sorted(phase.components)), phase.structure))

    memo: dict = {}

    def suffix(i: int, alive: tuple[frozenset, ...]):
        key = (i, alive)
        hit = memo.get(key)
        if hit is not None:
            return hit
        kinds, comps, expr = plan[i]
        options = []
        for k, entrants in kinds:
            pool = sorted(alive[k].union(entrants))
            options.append([(k, frozenset(sub)) for r in range(len(pool) + 1)
                            for sub in itertools.combinations(pool, r)])
        res = [defaultdict(int) for _ in range(N - i)]
        for combo in itertools.product(*options):
            working = frozenset().union(*(sub for _, sub in combo))
            if not _eval(expr, {c: c in working for c in comps}):
                continue
            row = [0] * K
            nxt = list(alive)
            for k, sub in combo:
                row[k] = len(sub)
                nxt[k] = sub
            head = (tuple(row),)
            res[0][head] += 1
            if i + 1 < N:
                for d, table in enumerate(suffix(i + 1, tuple(nxt)), start=1):
                    target = res[d]
                    for tail, count in table.items():
                        target[head + tail] += count
        memo[key] = res
        return res

    counts = suffix(0, tuple(frozenset() for _ in range(K)))
    tables = []
    for p in range(1, N + 1):
        entries = {lv: Fraction(c, denominator(mta, lv)) for lv, c in sorted(counts[p - 1].items())}
        tables.append(SignatureTable(p, entries, axes_for(mta, p)))
    return SignatureFamily(sys, mta, tuple(tables))


def signature_at(fam: SignatureFamily, p: int, levels) -> Fraction:
    if not 1 <= p <= fam.system.n_phases:
        raise ValueError(f"phase depth p={p} outside 1..{fam.system.n_phases}")
    lv = normalize_levels(fam.mta, p, levels)
    capacities(fam.mta, lv)
    return fam.table(p).entries.get(lv, Fraction(0))


# -- brute-force oracle -------------------------------------------------------

def _trajectories(sys: PhasedSystem, p: int):
    """Every non-repairable assignment over phases 1..p, as per-phase working sets."""
    names = sorted(sys.components)
    patterns = []
    for name in names:
        slots = [i for i in sys.presence(name) if i <= p]
        # working through the first d present phases, failed afterwards
        patterns.append([(name, frozenset(slots[:d])) for d in range(len(slots) + 1)])
    for combo in itertools.product(*patterns):
        working = [set() for _ in range(p)]
        for name, phases in combo:
            for i in phases:
                working[i - 1].add(name)
        yield working


def brute_force_table(sys: PhasedSystem, mta: MetaTypeAssignment, p: int) -> dict[LevelVector, Fraction]:
    """Average of prod_{i<=p} phi_i over all consistent trajectories, grouped by level vector."""
    ensure_valid(sys)
    slots = sum(len(sys.phase(i).components) for i in range(1, p + 1))
    if slots > BRUTE_FORCE_MAX_SLOTS:
        raise TooLargeError(f"{slots} component-phase slots exceed the brute-force guard of "
                            f"{BRUTE_FORCE_MAX_SLOTS}")
    hits: dict[LevelVector, int] = defaultdict(int)
    total: dict[LevelVector, int] = defaultdict(int)
    for working in _trajectories(sys, p):
        levels = []
        ok = True
        for i in range(1, p + 1):
            phase = sys.phase(i)
            row = [0] * mta.K
            for name in working[i - 1]:
                row[mta.index[name] - 1] += 1
            levels.append(tuple(row))
            if ok:
                state = {c: (c in working[i - 1]) for c in phase.components}
                ok = _eval(phase.structure, state)
        key = tuple(levels)
        total[key] += 1
        hits[key] += ok
    return {key: Fraction(hits[key], total[key]) for key in sorted(total)}


def brute_force_signature(sys: PhasedSystem, mta: MetaTypeAssignment, p: int, levels) -> Fraction:
    lv = normalize_levels(mta, p, levels)
    table = brute_force_table(sys, mta, p)
    if lv not in table:
        raise InfeasibleLevelError(f"no consistent trajectory has level vector {lv}")
    return table[lv]


# -- export -------------------------------------------------------------------

def _axis_names(table: SignatureTable) -> list[str]:
    return [f"l_{i}{k}" if max(i, k) < 10 else f"l_{i}_{k}" for i, k in table.axes]


def table_to_csv(table: SignatureTable) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(_axis_names(table) + ["numerator", "denominator", "decimal"])
    for lv, value in table.entries.items():
        writer.writerow(list(table.flat(lv)) + [value.numerator, value.denominator, f"{float(value):.12g}"])
    return buf.getvalue()


def format_table(table: SignatureTable) -> str:
    """Aligned text rendering of one table, zero rows omitted."""
    head = _axis_names(table) + [f"Phi_{table.p}"]
    rows = [[str(v) for v in table.flat(lv)] + [str(val)] for lv, val in table.entries.items()]
    widths = [max(len(h), *(len(r[c]) for r in rows)) if rows else len(h) for c, h in enumerate(head)]
    lines = ["  ".join(h.rjust(w) for h, w in zip(head, widths))]
    lines.append("  ".join("-" * w for w in widths))
    lines += ["  ".join(v.rjust(w) for v, w in zip(r, widths)) for r in rows]
    return "\n".join(lines)
