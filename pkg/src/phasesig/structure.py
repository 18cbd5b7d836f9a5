"""Structure-function evaluation and meta-type derivation."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from .errors import InconsistentTrajectoryError, MissingAtomError, RelaxationError
from .model import (
    And,
    Comp,
    KOutOfN,
    MetaType,
    MetaTypeAssignment,
    Or,
    PhasedSystem,
    StructureExpr,
    ensure_valid,
)


@dataclass(frozen=True)
class PhaseState:
    phase: int
    assignment: Mapping[str, int]


@dataclass(frozen=True)
class MissionTrajectory:
    states: tuple[PhaseState, ...]

    def __init__(self, states: Sequence[PhaseState]):
        object.__setattr__(self, "states", tuple(states))


def eval_phase(expr: StructureExpr, state: PhaseState | Mapping[str, int]) -> int:
    assignment = state.assignment if isinstance(state, PhaseState) else state
    return int(_eval(expr, assignment))


def _eval(expr, assignment) -> bool:
    if isinstance(expr, Comp):
        try:
            return bool(assignment[expr.name])
        except KeyError:
            raise MissingAtomError(f"no state for component {expr.name!r}") from None
    if isinstance(expr, And):
        return all(_eval(c, assignment) for c in expr.children)
    if isinstance(expr, Or):
        return any(_eval(c, assignment) for c in expr.children)
    if isinstance(expr, KOutOfN):
        need = expr.k
        for c in expr.children:
            if _eval(c, assignment):
                need -= 1
                if need <= 0:
                    return True
        return False
    raise TypeError(f"not a structure expression: {expr!r}")


def check_trajectory(sys: PhasedSystem, traj: MissionTrajectory) -> None:
    """Raise unless ``traj`` covers each phase exactly and never revives a component."""
    if len(traj.states) != sys.n_phases:
        raise InconsistentTrajectoryError(
            f"trajectory has {len(traj.states)} phase states for {sys.n_phases} phases")
    last: dict[str, tuple[int, int]] = {}
    for phase, state in zip(sys.phases, traj.states):
        if state.phase != phase.index:
            raise InconsistentTrajectoryError(f"state for phase {state.phase} found at position {phase.index}")
        if set(state.assignment) != set(phase.components):
            raise InconsistentTrajectoryError(
                f"phase {phase.index} state must cover exactly {sorted(phase.components)}")
        for name, value in state.assignment.items():
            if value not in (0, 1, True, False):
                raise InconsistentTrajectoryError(f"state of {name!r} must be 0 or 1, got {value!r}")
            prev = last.get(name)
            if prev is not None and prev[1] == 0 and value:
                raise InconsistentTrajectoryError(
                    f"component {name!r} failed in phase {prev[0]} but works in phase {phase.index}")
            last[name] = (phase.index, int(value))


def eval_mission(sys: PhasedSystem, traj: MissionTrajectory) -> int:
    check_trajectory(sys, traj)
    for phase, state in zip(sys.phases, traj.states):
        if not eval_phase(phase.structure, state):
            return 0
    return 1


# -- meta-types ---------------------------------------------------------------

def _group_valid(presence: Mapping[str, frozenset[int]]) -> bool:
    """True when every member, once present, is present wherever the group appears later."""
    appearance = set().union(*presence.values())
    for phases in presence.values():
        first = min(phases)
        if any(i not in phases for i in appearance if i >= first):
            return False
    return True


def derive_meta_types(sys: PhasedSystem, relax_exponential: bool = False) -> MetaTypeAssignment:
    """Partition components into meta-types.

    Strict groups share a physical type and exactly the same phases. With
    ``relax_exponential`` set, strict groups of a history-independent type are
    merged when later-arriving members join a group that stays present.
    Ordering is by earliest phase, then smallest member name.
    """
    ensure_valid(sys)
    presence = {name: frozenset(sys.presence(name)) for name in sys.components}

    strict: dict[tuple[str, frozenset[int]], list[str]] = {}
    for name in sorted(sys.components):
        key = (sys.components[name].name, presence[name])
        strict.setdefault(key, []).append(name)

    def order(members):
        return (min(min(presence[m]) for m in members), min(members))

    groups = sorted((sorted(m) for m in strict.values()), key=order)
    relaxed_flags = [False] * len(groups)

    if relax_exponential:
        merged: list[list[str]] = []
        flags: list[bool] = []
        for members in groups:
            ptype = sys.components[members[0]]
            target = None
            for gi, existing in enumerate(merged):
                if sys.components[existing[0]].name != ptype.name:
                    continue
                candidate = {m: presence[m] for m in existing + members}
                if _group_valid(candidate):
                    target = gi
                    break
            if target is None:
                merged.append(list(members))
                flags.append(False)
                continue
            if not ptype.lifetime.history_independent:
                raise RelaxationError(
                    f"physical type {ptype.name!r} has a history-dependent lifetime law; "
                    f"members {members} cannot join {merged[target]} as an exponential meta-type")
            merged[target].extend(members)
            flags[target] = True
        groups = [sorted(g) for g in merged]
        relaxed_flags = flags
        both = sorted(zip(groups, relaxed_flags), key=lambda gf: order(gf[0]))
        groups = [g for g, _ in both]
        relaxed_flags = [f for _, f in both]

    metatypes = []
    index: dict[str, int] = {}
    for k, (members, relaxed) in enumerate(zip(groups, relaxed_flags), start=1):
        appearance = frozenset().union(*(presence[m] for m in members))
        present = {i: frozenset(m for m in members if i in presence[m]) for i in appearance}
        metatypes.append(MetaType(
            id=k,
            physical=sys.components[members[0]],
            members=tuple(members),
            appearance=appearance,
            exponential_relaxed=relaxed,
            present=present,
        ))
        for m in members:
            index[m] = k
    return MetaTypeAssignment(tuple(metatypes), index)
