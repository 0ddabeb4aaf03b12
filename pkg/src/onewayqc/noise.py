"""White-noise model for the four-qubit cluster."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cluster import build_c4
from .qstate import DensityMatrix, State, as_density

_DIM = 16
_FLOOR = 1 / _DIM


@dataclass(frozen=True)
class WhiteNoiseModel:
    """``p |C4><C4| + (1 - p) I/16``; ``p`` is the weight of the ideal cluster."""

    p: float

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"cluster weight p must lie in [0, 1], got {self.p}")

    def apply(self, state: State) -> DensityMatrix:
        rho = as_density(state)
        d = rho.dim
        return DensityMatrix(self.p * rho.elems + (1 - self.p) * np.eye(d) / d)

    def cluster(self) -> DensityMatrix:
        return self.apply(build_c4())

    @property
    def cluster_fidelity(self) -> float:
        return self.p + (1 - self.p) / _DIM


def calibrate_white_noise(target_f: float) -> WhiteNoiseModel:
    """Cluster weight that gives stabilizer fidelity ``target_f``."""
    if not _FLOOR <= target_f <= 1.0:
        raise ValueError(f"target fidelity must lie in [1/16, 1], got {target_f}")
    return WhiteNoiseModel((target_f - _FLOOR) / (1 - _FLOOR))
