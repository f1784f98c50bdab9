"""Pre- and post-selected quantum systems in beamsplitter networks.

Forward state evolution, backward-evolved postselection functionals and the
conditional (ABL) probability rule, certainty reporting, impulsive pointer
measurements in both time directions, and rule-based pilot-wave
trajectories, with a deterministic CLI front end.
"""
from .hilbert import (
    Bra,
    Ket,
    LinearOp,
    Projector,
    adjoint,
    apply,
    apply_dual,
    basis_bra,
    basis_ket,
    check_unitary,
    compose,
    identity,
    make_projector,
)
from .network import (
    Element,
    Network,
    build_network,
    evolve,
    preset_double_mz,
    stage_unitary,
)
from .pilot import (
    EnsembleStats,
    ParticleState,
    RuleTable,
    TrajectoryRecord,
    element_transfer,
    run_ensemble,
    run_trajectory,
)
from .pointer import (
    MeasurementRecord,
    MeasurementSetup,
    decode_reading,
    measure_backward,
    measure_forward,
)
from .twotime import (
    ProjectorSet,
    TwoStateVector,
    abl_probability,
    certainty_report,
    spin_observable,
    two_state_at_cut,
)

__version__ = "0.1.0"

__all__ = [
    "Bra",
    "Element",
    "EnsembleStats",
    "Ket",
    "LinearOp",
    "MeasurementRecord",
    "MeasurementSetup",
    "Network",
    "ParticleState",
    "Projector",
    "ProjectorSet",
    "RuleTable",
    "TrajectoryRecord",
    "TwoStateVector",
    "abl_probability",
    "adjoint",
    "apply",
    "apply_dual",
    "basis_bra",
    "basis_ket",
    "build_network",
    "certainty_report",
    "check_unitary",
    "compose",
    "decode_reading",
    "element_transfer",
    "evolve",
    "identity",
    "make_projector",
    "measure_backward",
    "measure_forward",
    "preset_double_mz",
    "run_ensemble",
    "run_trajectory",
    "spin_observable",
    "stage_unitary",
    "two_state_at_cut",
]
