"""Weak-measurement distillation of free entanglement from bound-entangled qutrit pairs."""

from .linalg import CANONICAL, DimSignature
from .measurement import (
    MeasurementParams,
    MeasurementSet,
    OutcomeRecord,
    apply_protocol,
    make_measurement_set,
    make_projectors,
    strong_channel,
    weakness_profile,
)
from .measures import (
    Bipartition,
    CostBreakdown,
    average_negativity,
    is_ppt,
    measurement_cost,
    negativity,
    realignment_witness,
    tripartite_entanglement,
)
from .protocol import ScenarioConfig, SweepResult, alpha_scan, bipartition_scan, run_scenario, sweep
from .states import DensityMatrix, Ket, StateSpec, make_ancilla, make_chi1, make_chi2, make_chi3

__version__ = "0.1.0"

__all__ = [
    "CANONICAL",
    "DimSignature",
    "DensityMatrix",
    "Ket",
    "StateSpec",
    "make_chi1",
    "make_chi2",
    "make_chi3",
    "make_ancilla",
    "MeasurementParams",
    "MeasurementSet",
    "OutcomeRecord",
    "make_projectors",
    "make_measurement_set",
    "strong_channel",
    "weakness_profile",
    "apply_protocol",
    "Bipartition",
    "CostBreakdown",
    "negativity",
    "is_ppt",
    "realignment_witness",
    "average_negativity",
    "measurement_cost",
    "tripartite_entanglement",
    "ScenarioConfig",
    "SweepResult",
    "run_scenario",
    "sweep",
    "alpha_scan",
    "bipartition_scan",
]
