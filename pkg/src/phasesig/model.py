"""Domain types for phased mission systems and structural validation."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Mapping, Union

from .errors import InvalidSystemError
from .lifetime import LifetimeModel


# -- structure expressions ---------------------------------------------------

@dataclass(frozen=True)
class Comp:
    """Atom: the state of a single component."""

    name: str

    def atoms(self) -> Iterator[str]:
        yield self.name

    def __str__(self) -> str:
        return f"comp {self.name}"


@dataclass(frozen=True)
class And:
    children: tuple["StructureExpr", ...]

    def __init__(self, *children: "StructureExpr"):
        object.__setattr__(self, "children", tuple(children))

    def atoms(self) -> Iterator[str]:
        for child in self.children:
            yield from child.atoms()

    def __str__(self) -> str:
        return "and(" + ", ".join(str(c) for c in self.children) + ")"


@dataclass(frozen=True)
class Or:
    children: tuple["StructureExpr", ...]

    def __init__(self, *children: "StructureExpr"):
        object.__setattr__(self, "children", tuple(children))

    def atoms(self) -> Iterator[str]:
        for child in self.children:
            yield from child.atoms()

    def __str__(self) -> str:
        return "or(" + ", ".join(str(c) for c in self.children) + ")"


@dataclass(frozen=True)
class KOutOfN:
    """Works when at least ``k`` children work."""

    k: int
    children: tuple["StructureExpr", ...]

    def __init__(self, k: int, *children: "StructureExpr"):
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "children", tuple(children))

    def atoms(self) -> Iterator[str]:
        for child in self.children:
            yield from child.atoms()

    def __str__(self) -> str:
        inner = ", ".join(str(c) for c in self.children)
        return f"koutofn({self.k}, {inner})"


StructureExpr = Union[Comp, And, Or, KOutOfN]


def series(*names: str) -> And:
    return And(*(Comp(n) for n in names))


def parallel(*names: str) -> Or:
    return Or(*(Comp(n) for n in names))


def k_out_of_n(k: int, *names: str) -> KOutOfN:
    return KOutOfN(k, *(Comp(n) for n in names))


# -- mission model -----------------------------------------------------------

@dataclass(frozen=True)
class PhysicalType:
    name: str
    lifetime: LifetimeModel


@dataclass(frozen=True)
class PhaseSpec:
    """Phase ``index`` runs over [start, end) with the listed components present."""

    index: int
    start: float
    end: float
    components: frozenset[str]
    structure: StructureExpr

    @property
    def duration(self) -> float:
        return self.end - self.start


@dataclass(frozen=True)
class PhasedSystem:
    phases: tuple[PhaseSpec, ...]
    components: Mapping[str, PhysicalType]

    def __post_init__(self):
        object.__setattr__(self, "phases", tuple(self.phases))
        object.__setattr__(self, "components", dict(self.components))

    @property
    def n_phases(self) -> int:
        return len(self.phases)

    @property
    def mission_end(self) -> float:
        return self.phases[-1].end

    @property
    def boundaries(self) -> tuple[float, ...]:
        """tau_1 .. tau_{N+1}."""
        return tuple(p.start for p in self.phases) + (self.mission_end,)

    @property
    def physical_types(self) -> dict[str, PhysicalType]:
        out: dict[str, PhysicalType] = {}
        for ptype in self.components.values():
            out.setdefault(ptype.name, ptype)
        return out

    def phase(self, i: int) -> PhaseSpec:
        return self.phases[i - 1]

    def presence(self, name: str) -> tuple[int, ...]:
        """Phase indices (1-based) in which component ``name`` is present."""
        return tuple(p.index for p in self.phases if name in p.components)

    @classmethod
    def build(
        cls,
        boundaries,
        components: Mapping[str, PhysicalType],
        phases,
    ) -> "PhasedSystem":
        """Convenience constructor from boundaries and (components, structure) pairs."""
        specs = []
        for i, (present, expr) in enumerate(phases, start=1):
            specs.append(
                PhaseSpec(i, float(boundaries[i - 1]), float(boundaries[i]), frozenset(present), expr)
            )
        return cls(tuple(specs), components)


@dataclass(frozen=True)
class MetaType:
    """Components sharing a physical type and (relaxed) phase-appearance pattern.

    ``present`` maps every phase in ``appearance`` to the members present there;
    for a strict meta-type this is always the full member set.
    """

    id: int
    physical: PhysicalType
    members: tuple[str, ...]
    appearance: frozenset[int]
    exponential_relaxed: bool = False
    present: Mapping[int, frozenset[str]] = field(default_factory=dict)

    def __post_init__(self):
        if not self.present:
            full = frozenset(self.members)
            object.__setattr__(self, "present", {i: full for i in self.appearance})

    def members_in(self, phase: int) -> frozenset[str]:
        return self.present.get(phase, frozenset())

    def previous_appearance(self, phase: int) -> int | None:
        earlier = [j for j in self.appearance if j < phase]
        return max(earlier) if earlier else None

    def entrants(self, phase: int) -> frozenset[str]:
        """Members present in ``phase`` that were not present at the previous appearance."""
        here = self.members_in(phase)
        j = self.previous_appearance(phase)
        return here if j is None else here - self.members_in(j)


@dataclass(frozen=True)
class MetaTypeAssignment:
    metatypes: tuple[MetaType, ...]
    index: Mapping[str, int]

    @property
    def K(self) -> int:
        return len(self.metatypes)

    def of(self, component: str) -> MetaType:
        return self.metatypes[self.index[component] - 1]

    def present(self, phase: int) -> tuple[int, ...]:
        """Meta-type ids present in ``phase``."""
        return tuple(mt.id for mt in self.metatypes if phase in mt.appearance)


# -- validation ---------------------------------------------------------------

@dataclass(frozen=True)
class Violation:
    code: str
    message: str
    phase: int | None = None
    component: str | None = None

    def __str__(self) -> str:
        where = []
        if self.phase is not None:
            where.append(f"phase {self.phase}")
        if self.component is not None:
            where.append(f"component {self.component}")
        ctx = f" [{', '.join(where)}]" if where else ""
        return f"{self.code}: {self.message}{ctx}"


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)
    warnings: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def _check_expr(expr, phase: PhaseSpec, out: list[Violation]) -> None:
    if isinstance(expr, Comp):
        if expr.name not in phase.components:
            out.append(Violation("unknown atom", f"atom {expr.name!r} is not present in the phase",
                                 phase.index, expr.name))
        return
    if not isinstance(expr, (And, Or, KOutOfN)):
        out.append(Violation("bad node", f"unsupported structure node {expr!r}", phase.index))
        return
    if not expr.children:
        out.append(Violation("empty gate", f"{type(expr).__name__} node has no children", phase.index))
    if isinstance(expr, KOutOfN):
        if not isinstance(expr.k, int) or expr.k < 1 or expr.k > len(expr.children):
            out.append(Violation("k-of-n threshold",
                                 f"k={expr.k} must satisfy 1 <= k <= {len(expr.children)}", phase.index))
    for child in expr.children:
        _check_expr(child, phase, out)


def validate_system(sys: PhasedSystem) -> ValidationReport:
    """Check every structural invariant; never raises for a malformed system."""
    report = ValidationReport()
    bad = report.violations
    phases = sys.phases
    if len(phases) < 2:
        bad.append(Violation("too few phases", f"a phased mission needs N >= 2 phases, got {len(phases)}"))
    for pos, phase in enumerate(phases, start=1):
        if phase.index != pos:
            bad.append(Violation("phase index", f"expected index {pos}, got {phase.index}", phase.index))
        if not phase.end > phase.start:
            bad.append(Violation("non-increasing boundary",
                                 f"phase end {phase.end} must exceed start {phase.start}", phase.index))
        if pos == 1 and phase.start != 0:
            bad.append(Violation("mission start", f"tau_1 must be 0, got {phase.start}", phase.index))
        if pos > 1 and phase.start != phases[pos - 2].end:
            bad.append(Violation("non-contiguous boundary",
                                 f"phase starts at {phase.start} but previous phase ends at {phases[pos - 2].end}",
                                 phase.index))
        for name in sorted(phase.components):
            if name not in sys.components:
                bad.append(Violation("undeclared component", f"{name!r} has no physical type",
                                     phase.index, name))
        _check_expr(phase.structure, phase, bad)
        used = set(phase.structure.atoms()) if isinstance(phase.structure, (Comp, And, Or, KOutOfN)) else set()
        for name in sorted(phase.components - used):
            report.warnings.append(Violation("irrelevant component",
                                             "present in phase but never referenced by its structure",
                                             phase.index, name))
    for name in sorted(sys.components):
        if not name:
            bad.append(Violation("empty name", "component names must be non-empty"))
        if not any(name in p.components for p in phases):
            bad.append(Violation("unused component", "component appears in no phase", component=name))
    seen: dict[str, PhysicalType] = {}
    for ptype in sys.components.values():
        if ptype.name in seen:
            if seen[ptype.name] != ptype:
                bad.append(Violation("physical type clash", f"two different definitions named {ptype.name!r}"))
            continue
        seen[ptype.name] = ptype
        for problem in ptype.lifetime.problems(len(phases)):
            bad.append(Violation("lifetime", f"type {ptype.name!r}: {problem}"))
    return report


def ensure_valid(sys: PhasedSystem) -> None:
    report = validate_system(sys)
    if not report.ok:
        raise InvalidSystemError(report)
