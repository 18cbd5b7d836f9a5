"""Survival signatures and reliability for phased mission systems."""

from .errors import (
    InconsistentTrajectoryError,
    InfeasibleLevelError,
    InvalidSystemError,
    MissingAtomError,
    OutOfMissionError,
    PhaseSigError,
    RelaxationError,
    SpecSemanticError,
    SpecSyntaxError,
    TooLargeError,
    UndefinedConditionalError,
)
from .lifetime import (
    Exponential,
    GlobalCDF,
    PhaseConditional,
    PhaseHazard,
    Weibull,
    conditional_cdf,
    phase_reliability,
    sample_lifetime,
)
from .model import (
    And,
    Comp,
    KOutOfN,
    MetaType,
    MetaTypeAssignment,
    Or,
    PhasedSystem,
    PhaseSpec,
    PhysicalType,
    k_out_of_n,
    parallel,
    series,
    validate_system,
)
from .oracle import SimResult, estimate_curve, simulate_mission
from .reliability import (
    EvalPoint,
    Side,
    SurvivalCurve,
    current_phase,
    reliability_curve,
    single_type_reliability,
    system_reliability,
)
from .signature import (
    SignatureFamily,
    SignatureTable,
    brute_force_signature,
    brute_force_table,
    compute_signature_family,
    signature_at,
)
from .specfile import SpecOptions, dump_spec, load_fixture, parse_spec, parse_spec_text
from .structure import MissionTrajectory, PhaseState, derive_meta_types, eval_mission, eval_phase

__all__ = [name for name in dir() if not name.startswith("_")]
