"""Picard and Magnus expansions for the semiclassical and quantum Rabi models
and the Mathieu equation, with an RK4 reference and spectral analysis."""

from .linalg import ContractViolation, StateVector, TimeGrid, Trajectory
from .models import (
    CouplingWindow,
    Mathieu,
    MathieuParams,
    ModelFlags,
    QuantumParams,
    QuantumRabi,
    SemiclassicalParams,
    SemiclassicalRabi,
    TruncationWarning,
)

__version__ = "0.1.0"

__all__ = [
    "ContractViolation",
    "CouplingWindow",
    "Mathieu",
    "MathieuParams",
    "ModelFlags",
    "QuantumParams",
    "QuantumRabi",
    "SemiclassicalParams",
    "SemiclassicalRabi",
    "StateVector",
    "TimeGrid",
    "Trajectory",
    "TruncationWarning",
]
