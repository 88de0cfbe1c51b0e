"""Stabilizer simulation of the entanglement transition induced by
noisy quantum transduction, with a brute-force oracle and
finite-size-scaling analysis tools."""

from .analysis import (
    AggregatePoint,
    CollapseFit,
    EnsembleSpec,
    aggregate,
    estimate_crossing,
    fit_collapse,
    run_ensemble,
)
from .circuit import (
    CircuitConfig,
    TrajectoryRecord,
    run_trajectory,
    sample_two_qubit_clifford,
)
from .oracle import FullTableau, check_complement_symmetry, check_ie_symmetry, evolve_full
from .stabilizer import InitialStateKind, TrackedTableau

__all__ = [
    "AggregatePoint",
    "CircuitConfig",
    "CollapseFit",
    "EnsembleSpec",
    "FullTableau",
    "InitialStateKind",
    "TrackedTableau",
    "TrajectoryRecord",
    "aggregate",
    "check_complement_symmetry",
    "check_ie_symmetry",
    "estimate_crossing",
    "evolve_full",
    "fit_collapse",
    "run_ensemble",
    "run_trajectory",
    "sample_two_qubit_clifford",
]
