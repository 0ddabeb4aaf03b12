"""Single-qubit measurements, outcome modes and Pauli-frame bookkeeping.

Equatorial bases follow ``|phi_+-> = (|0> +- e^{-i phi}|1>)/sqrt2`` with
outcome ``s = 0`` for ``|phi_+>`` and ``s = 1`` for ``|phi_->``. Measured
qubits are removed from the register.

Random outcomes come from :class:`numpy.random.Generator` seeded through
``numpy.random.default_rng`` (PCG64), which is bit-reproducible across
platforms. A draw ``u = rng.random()`` selects outcome 0 iff ``u < p0``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence, Union

import numpy as np

from .qstate import SQRT2, DensityMatrix, State, StateVector, X, Z, apply_1q

PROB_FLOOR = 1e-12


class ImpossibleOutcome(ValueError):
    """A postselected outcome has (numerically) zero probability."""


@dataclass(frozen=True)
class EquatorialBasis:
    phi: float

    def vector(self, outcome: int) -> np.ndarray:
        sign = 1 if outcome == 0 else -1
        return np.array([1, sign * np.exp(-1j * self.phi)], dtype=complex) / SQRT2

    def vectors(self) -> tuple[np.ndarray, np.ndarray]:
        return self.vector(0), self.vector(1)


@dataclass(frozen=True)
class ComputationalBasis:
    def vector(self, outcome: int) -> np.ndarray:
        return np.eye(2, dtype=complex)[outcome]

    def vectors(self) -> tuple[np.ndarray, np.ndarray]:
        return self.vector(0), self.vector(1)


Basis = Union[EquatorialBasis, ComputationalBasis]


@dataclass(frozen=True)
class Postselect:
    outcome: int

    def __post_init__(self):
        if self.outcome not in (0, 1):
            raise ValueError("postselected outcome must be 0 or 1")


@dataclass(frozen=True, eq=False)
class Sample:
    """Born-rule sampling from a shared generator."""

    rng: np.random.Generator

    @classmethod
    def seeded(cls, seed: int) -> "Sample":
        return cls(np.random.default_rng(seed))


OutcomeMode = Union[Postselect, Sample]


@dataclass(frozen=True)
class MeasurementRecord:
    qubit: int
    basis: Basis
    outcome: int
    probability: float

    @property
    def phi(self) -> float | None:
        return self.basis.phi if isinstance(self.basis, EquatorialBasis) else None


def _project(state: State, qubit: int, bra: np.ndarray) -> tuple[State | None, float]:
    """Contract ``<bra|`` into ``qubit``; returns (unnormalized remainder, probability)."""
    n = state.n_qubits
    if not 1 <= qubit <= n:
        raise IndexError(f"qubit {qubit} outside 1..{n}")
    if n == 1:
        raise ValueError("cannot measure the last remaining qubit")
    ax = qubit - 1
    b = bra.conj()
    if isinstance(state, StateVector):
        rest = np.tensordot(b, state.amps.reshape((2,) * n), axes=([0], [ax])).reshape(-1)
        return rest, float(np.vdot(rest, rest).real)
    t = state.elems.reshape((2,) * (2 * n))
    t = np.tensordot(b, t, axes=([0], [ax]))
    t = np.tensordot(bra, t, axes=([0], [n - 1 + ax]))
    d = 2 ** (n - 1)
    rest = t.reshape(d, d)
    return rest, float(np.trace(rest).real)


def branch_probabilities(state: State, qubit: int, basis: Basis) -> tuple[float, float]:
    return tuple(_project(state, qubit, v)[1] for v in basis.vectors())


def measure(state: State, qubit: int, basis: Basis, mode: OutcomeMode) -> tuple[int, float, State]:
    """Measure ``qubit`` and remove it; returns (outcome, probability, collapsed state)."""
    if isinstance(mode, Postselect):
        outcome = mode.outcome
        rest, p = _project(state, qubit, basis.vector(outcome))
    elif isinstance(mode, Sample):
        rest0, p0 = _project(state, qubit, basis.vector(0))
        if mode.rng.random() < p0:
            outcome, rest, p = 0, rest0, p0
        else:
            outcome = 1
            rest, p = _project(state, qubit, basis.vector(1))
    else:
        raise TypeError(f"unsupported outcome mode {mode!r}")
    if p < PROB_FLOOR:
        raise ImpossibleOutcome(f"outcome {outcome} on qubit {qubit} has probability {p:.3g}")
    if isinstance(state, StateVector):
        collapsed = StateVector(rest / np.sqrt(p))
    else:
        collapsed = DensityMatrix(rest / p)
    return outcome, p, collapsed


def measure_equatorial(state: State, qubit: int, basis: EquatorialBasis | float, mode: OutcomeMode):
    if not isinstance(basis, EquatorialBasis):
        basis = EquatorialBasis(float(basis))
    return measure(state, qubit, basis, mode)


def measure_computational(state: State, qubit: int, mode: OutcomeMode):
    return measure(state, qubit, ComputationalBasis(), mode)


def adaptive_beta_basis(beta: float, s2: int) -> EquatorialBasis:
    """Basis for the third rotation measurement: ``beta`` or ``-beta`` depending on ``s2``."""
    return EquatorialBasis(beta if s2 == 0 else -beta)


@dataclass(frozen=True)
class PauliFrame:
    """Byproduct ``X^x Z^z`` on one output qubit."""

    x: int = 0
    z: int = 0

    def __post_init__(self):
        if self.x not in (0, 1) or self.z not in (0, 1):
            raise ValueError("frame powers must be bits")

    def compose(self, other: "PauliFrame") -> "PauliFrame":
        return PauliFrame(self.x ^ other.x, self.z ^ other.z)

    def matrix(self) -> np.ndarray:
        return np.linalg.matrix_power(X, self.x) @ np.linalg.matrix_power(Z, self.z)

    @property
    def is_identity(self) -> bool:
        return self.x == 0 and self.z == 0


def frame_update(frame: PauliFrame, step: str, outcome: int) -> PauliFrame:
    """Fold a measurement outcome into the ``"x"`` or ``"z"`` byproduct power."""
    if outcome not in (0, 1):
        raise ValueError("outcome must be a bit")
    if step == "x":
        return PauliFrame(frame.x ^ outcome, frame.z)
    if step == "z":
        return PauliFrame(frame.x, frame.z ^ outcome)
    raise ValueError(f"step must be 'x' or 'z', got {step!r}")


def frame_correct(state: State, frame: PauliFrame, position: int = 1) -> State:
    """Undo ``X^x Z^z`` on ``position`` by applying ``Z^z X^x``."""
    if frame.x:
        state = apply_1q(state, X, position)
    if frame.z:
        state = apply_1q(state, Z, position)
    return state


# measurement label -> [(output label, frame component)]
ByproductRule = dict[int, Sequence[tuple[int, str]]]


@dataclass
class Engine:
    """One pattern run over a shrinking register with stable qubit labels."""

    state: State
    labels: list[int] = field(default_factory=list)
    byproducts: ByproductRule = field(default_factory=dict)
    records: list[MeasurementRecord] = field(default_factory=list)
    frames: dict[int, PauliFrame] = field(default_factory=dict)

    def __post_init__(self):
        if not self.labels:
            self.labels = list(range(1, self.state.n_qubits + 1))
        if len(self.labels) != self.state.n_qubits:
            raise ValueError("one label per qubit required")
        for lbl in self.labels:
            self.frames.setdefault(lbl, PauliFrame())

    def position(self, label: int) -> int:
        try:
            return self.labels.index(label) + 1
        except ValueError:
            raise KeyError(f"qubit {label} is not in the register") from None

    def measure(self, label: int, basis: Basis, mode: OutcomeMode) -> int:
        outcome, p, self.state = measure(self.state, self.position(label), basis, mode)
        self.labels.remove(label)
        self.frames.pop(label, None)
        self.records.append(MeasurementRecord(label, basis, outcome, p))
        for target, component in self.byproducts.get(label, ()):
            self.frames[target] = frame_update(self.frames[target], component, outcome)
        return outcome

    @property
    def probability(self) -> float:
        return float(np.prod([r.probability for r in self.records])) if self.records else 1.0

    def corrected(self) -> State:
        state = self.state
        for label in self.labels:
            state = frame_correct(state, self.frames[label], self.position(label))
        return state


# (label, basis chooser given the outcomes so far)
PatternStep = tuple[int, Callable[[Sequence[int]], Basis]]


def run_pattern(engine: Engine, pattern: Sequence[PatternStep], modes: Sequence[OutcomeMode]) -> list[int]:
    if len(modes) != len(pattern):
        raise ValueError("need one outcome mode per pattern step")
    outcomes: list[int] = []
    for (label, choose), mode in zip(pattern, modes):
        outcomes.append(engine.measure(label, choose(outcomes), mode))
    return outcomes


def sample_pattern(state: State, pattern: Sequence[PatternStep], shots: int, seed: int) -> list[tuple[int, ...]]:
    """Draw ``shots`` outcome tuples by walking the branch tree.

    Consumes the generator exactly like running the pattern ``shots`` times
    with a shared ``Sample`` mode, but each branch prefix is collapsed once.
    """
    if shots < 0:
        raise ValueError("shots must be non-negative")
    rng = np.random.default_rng(seed)
    labels = list(range(1, state.n_qubits + 1))
    cache: dict[tuple[int, ...], tuple[State, list[int], float]] = {}

    def node(prefix: tuple[int, ...]):
        if prefix not in cache:
            if prefix:
                parent, plabels, _ = node(prefix[:-1])
                label, choose = pattern[len(prefix) - 1]
                _, _, st = measure(parent, plabels.index(label) + 1, choose(prefix[:-1]), Postselect(prefix[-1]))
                plabels = [l for l in plabels if l != label]
            else:
                st, plabels = state, labels
            p0 = 1.0
            if len(prefix) < len(pattern):
                label, choose = pattern[len(prefix)]
                p0 = _project(st, plabels.index(label) + 1, choose(prefix).vector(0))[1]
            cache[prefix] = (st, plabels, p0)
        return cache[prefix]

    draws = []
    for _ in range(shots):
        prefix: tuple[int, ...] = ()
        for _step in pattern:
            p0 = node(prefix)[2]
            prefix += (0,) if rng.random() < p0 else (1,)
        draws.append(prefix)
    return draws
