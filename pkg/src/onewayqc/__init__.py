"""Simulation of one-way quantum computation on a four-qubit two-photon cluster."""

from .cluster import build_c4, equivalence_fidelity, ordering, stabilizer_group
from .noise import WhiteNoiseModel, calibrate_white_noise
from .protocols import CnotJob, OChoice, RotationJob, run_cnot, run_rotation
from .qstate import DensityMatrix, StateVector

__version__ = "0.1.0"

__all__ = [
    "CnotJob",
    "DensityMatrix",
    "OChoice",
    "RotationJob",
    "StateVector",
    "WhiteNoiseModel",
    "build_c4",
    "calibrate_white_noise",
    "equivalence_fidelity",
    "ordering",
    "run_cnot",
    "run_rotation",
    "stabilizer_group",
]
