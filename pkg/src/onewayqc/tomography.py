"""Bloch vectors and stabilizer-based cluster fidelity."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cluster import build_c4, stabilizer_group
from .qstate import I2, X, Y, Z, DensityMatrix, State, StateVector, as_density, fidelity_pure


@dataclass(frozen=True)
class BlochVector:
    x: float
    y: float
    z: float

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])

    def norm(self) -> float:
        return float(np.linalg.norm(self.as_array()))

    def dot(self, other: "BlochVector") -> float:
        return float(self.as_array() @ other.as_array())

    def to_density(self) -> DensityMatrix:
        return DensityMatrix((I2 + self.x * X + self.y * Y + self.z * Z) / 2)

    def as_list(self) -> list[float]:
        return [self.x, self.y, self.z]


def bloch_from_state(rho: State) -> BlochVector:
    """Stokes-style reconstruction ``(tr rho X, tr rho Y, tr rho Z)`` of one qubit."""
    if rho.dim != 2:
        raise ValueError(f"expected a single-qubit state, got dimension {rho.dim}")
    m = as_density(rho).elems
    return BlochVector(*(float(np.trace(m @ p).real) for p in (X, Y, Z)))


def bloch_projection(simulated: State, theory: StateVector) -> float:
    """Component of the simulated Bloch vector along the (pure) theory direction."""
    return bloch_from_state(simulated).dot(bloch_from_state(theory))


def stabilizer_fidelity(rho: State) -> float:
    """Group average ``(1/16) sum_S tr(rho S)`` over the cluster stabilizer group."""
    if rho.n_qubits != 4:
        raise ValueError("stabilizer fidelity needs a four-qubit state")
    m = as_density(rho).elems
    total = sum(np.trace(m @ s.matrix()).real for s in stabilizer_group())
    return float(total / 16)


def stabilizer_expectations(rho: State) -> dict[str, float]:
    m = as_density(rho).elems
    return {str(s): float(np.trace(m @ s.matrix()).real) for s in stabilizer_group()}


def cluster_overlap(rho: State) -> float:
    """Projector overlap ``<C4|rho|C4>``."""
    return fidelity_pure(build_c4(), rho)
