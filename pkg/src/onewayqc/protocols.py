"""Single-qubit rotations and the equatorial C-NOT on the two-photon cluster.

Both protocols take the laboratory-frame cluster (physical order), rotate it
into the computational frame with the ordering's local unitaries, run the
measurement pattern there, and map the surviving qubits back to the
laboratory frame. Theory states are the closed-form laboratory outputs:

* ordering a: ``Z^s3 X^s2 H Rx(beta) Rz(alpha) |chi_in>``
* ordering b: ``Z^s3 X^s2 Z H Rx(beta) Rz(alpha) |chi_in>``
* C-NOT (ordering c): ``(Z x Z)^s4 (X x 1) CNOT(O Z^s1 |+> x Rz(alpha) |+>)``
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import reduce
from typing import Iterator, Sequence

import numpy as np

from . import cluster
from .mbqc import (
    ComputationalBasis,
    EquatorialBasis,
    Engine,
    MeasurementRecord,
    OutcomeMode,
    PauliFrame,
    Postselect,
    Sample,
    ImpossibleOutcome,
    PatternStep,
    adaptive_beta_basis,
    measure_computational,
    run_pattern,
    sample_pattern,
)
from .qstate import (
    H,
    I2,
    X,
    Z,
    State,
    StateVector,
    apply_1q,
    fidelity_pure,
    gate_rx,
    gate_rz,
    partial_trace,
)

PLUS = StateVector.from_label("+")
MINUS = StateVector.from_label("-")

CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)

# measured logical qubit -> byproduct contributions on output qubits
ROTATION_BYPRODUCTS = {2: [(4, "z")], 3: [(4, "x")]}
CNOT_BYPRODUCTS = {4: [(2, "z"), (3, "x")]}


class OChoice(str, enum.Enum):
    """Basis of the first C-NOT measurement: ``I`` -> {|0>,|1>}, ``H`` -> {|+>,|->}."""

    I = "I"
    H = "H"

    @property
    def gate(self) -> np.ndarray:
        return I2 if self is OChoice.I else H


def _pow(m: np.ndarray, k: int) -> np.ndarray:
    return m if k else I2


def _modes(branch: Sequence[int] | None, seed: int | None, count: int) -> list[OutcomeMode]:
    if branch is not None and seed is not None:
        raise ValueError("give either a postselected branch or a sampling seed, not both")
    if seed is not None:
        sampler = Sample.seeded(seed)
        return [sampler] * count
    branch = tuple(branch) if branch is not None else (0,) * count
    if len(branch) != count or any(b not in (0, 1) for b in branch):
        raise ValueError(f"branch must be {count} bits, got {branch!r}")
    return [Postselect(b) for b in branch]


@dataclass(frozen=True)
class RotationJob:
    """Rotation ``Rx(beta) Rz(alpha)`` with output on piB (ordering a) or kB (b).

    ``modes`` gives the outcome mode for logical qubits 1, 2, 3. The first
    outcome fixes the input: 0 -> ``|+>``, 1 -> ``|->``.
    """

    ordering: str
    alpha: float
    beta: float
    modes: tuple[OutcomeMode, OutcomeMode, OutcomeMode] = (Postselect(0), Postselect(0), Postselect(0))

    def __post_init__(self):
        if self.ordering not in ("a", "b"):
            raise ValueError("rotations use ordering 'a' (piB output) or 'b' (kB output)")
        if len(self.modes) != 3:
            raise ValueError("need one outcome mode per measured qubit (1, 2, 3)")

    @classmethod
    def postselected(cls, ordering, alpha, beta, s2=0, s3=0, s1=0) -> "RotationJob":
        return cls(ordering, alpha, beta, tuple(_modes((s1, s2, s3), None, 3)))

    @classmethod
    def sampled(cls, ordering, alpha, beta, seed: int) -> "RotationJob":
        return cls(ordering, alpha, beta, tuple(_modes(None, seed, 3)))

    @property
    def output_qubit(self) -> cluster.PhysicalQubit:
        return cluster.ordering(self.ordering).physical(4)


@dataclass(frozen=True)
class CnotJob:
    """Equatorial C-NOT on ordering c; ``modes`` for logical qubits 1 and 4."""

    o_choice: OChoice
    alpha: float
    modes: tuple[OutcomeMode, OutcomeMode] = (Postselect(0), Postselect(0))

    def __post_init__(self):
        object.__setattr__(self, "o_choice", OChoice(self.o_choice))
        if len(self.modes) != 2:
            raise ValueError("need one outcome mode per measured qubit (1, 4)")

    @classmethod
    def postselected(cls, o_choice, alpha, s1=0, s4=0) -> "CnotJob":
        return cls(o_choice, alpha, tuple(_modes((s1, s4), None, 2)))

    @classmethod
    def sampled(cls, o_choice, alpha, seed: int) -> "CnotJob":
        return cls(o_choice, alpha, tuple(_modes(None, seed, 2)))


@dataclass(frozen=True, eq=False)
class ProtocolResult:
    """Outcome of one protocol run; states are in the laboratory frame."""

    records: tuple[MeasurementRecord, ...]
    frames: dict[int, PauliFrame]
    output_state: State
    theory_state: StateVector
    corrected_state: State
    ideal_state: StateVector
    computational_output: State = field(repr=False)
    job: RotationJob | CnotJob | None = None

    @property
    def outcomes(self) -> dict[int, int]:
        return {r.qubit: r.outcome for r in self.records}

    @property
    def probability(self) -> float:
        return float(np.prod([r.probability for r in self.records]))

    @property
    def fidelity(self) -> float:
        """Output vs the branch-dependent closed form."""
        return fidelity_pure(self.theory_state, self.output_state)

    @property
    def corrected_fidelity(self) -> float:
        """Byproduct-corrected output vs the byproduct-free closed form."""
        return fidelity_pure(self.ideal_state, self.corrected_state)

    @property
    def frame(self) -> PauliFrame:
        """Frame of the single output qubit (rotations only)."""
        if len(self.frames) != 1:
            raise AttributeError("result has more than one output qubit; use .frames")
        return next(iter(self.frames.values()))


def _prepare(input_cluster: State | None, order: cluster.Ordering) -> State:
    if input_cluster is None:
        input_cluster = cluster.build_c4()
    if input_cluster.n_qubits != 4:
        raise ValueError("input cluster must have four qubits")
    return order.to_computational(input_cluster)


def rotation_theory(ordering: str, alpha: float, beta: float, s2: int, s3: int, chi_in: StateVector) -> StateVector:
    """Closed-form laboratory output of the rotation pattern."""
    if ordering not in ("a", "b"):
        raise ValueError("rotation theory exists for orderings 'a' and 'b'")
    ops = [_pow(Z, s3), _pow(X, s2)]
    if ordering == "b":
        ops.append(Z)
    ops += [H, gate_rx(beta), gate_rz(alpha)]
    return StateVector(reduce(np.matmul, ops) @ chi_in.amps)


def rotation_pattern(alpha: float, beta: float) -> list[PatternStep]:
    return [
        (1, lambda prior: ComputationalBasis()),
        (2, lambda prior: EquatorialBasis(alpha)),
        (3, lambda prior: adaptive_beta_basis(beta, prior[1])),
    ]


def run_rotation(job: RotationJob, input_cluster: State | None = None) -> ProtocolResult:
    order = cluster.ordering(job.ordering)
    engine = Engine(_prepare(input_cluster, order), byproducts=ROTATION_BYPRODUCTS)
    s1, s2, s3 = run_pattern(engine, rotation_pattern(job.alpha, job.beta), job.modes)
    chi_in = PLUS if s1 == 0 else MINUS

    u4 = order.unitary(4)
    return ProtocolResult(
        records=tuple(engine.records),
        frames=dict(engine.frames),
        output_state=apply_1q(engine.state, u4, 1),
        theory_state=rotation_theory(job.ordering, job.alpha, job.beta, s2, s3, chi_in),
        corrected_state=apply_1q(engine.corrected(), u4, 1),
        ideal_state=rotation_theory(job.ordering, job.alpha, job.beta, 0, 0, chi_in),
        computational_output=engine.state,
        job=job,
    )


def cnot_theory(o_choice, alpha: float, s1: int, s4: int) -> StateVector:
    """Closed-form laboratory output (control, target) of the C-NOT pattern."""
    o = OChoice(o_choice).gate
    control = o @ _pow(Z, s1) @ PLUS.amps
    target = gate_rz(alpha) @ PLUS.amps
    sigma = np.kron(Z, Z) if s4 else np.eye(4)
    return StateVector(sigma @ np.kron(X, I2) @ CNOT @ np.kron(control, target))


# laboratory map for the (control, target) outputs: U_2 = X on kB, U_3 = 1 on
# piB, then the H_c/H_d plates on photon B undo the trailing target Hadamard
CNOT_OUTPUT_MAP = (X, H)


def cnot_pattern(o_choice, alpha: float) -> list[PatternStep]:
    first = ComputationalBasis() if OChoice(o_choice) is OChoice.I else EquatorialBasis(0.0)
    return [(1, lambda prior: first), (4, lambda prior: EquatorialBasis(alpha))]


def run_cnot(job: CnotJob, input_cluster: State | None = None) -> ProtocolResult:
    order = cluster.ordering("c")
    engine = Engine(_prepare(input_cluster, order), byproducts=CNOT_BYPRODUCTS)
    s1, s4 = run_pattern(engine, cnot_pattern(job.o_choice, job.alpha), job.modes)

    def to_lab(state):
        for pos, g in enumerate(CNOT_OUTPUT_MAP, start=1):
            state = apply_1q(state, g, pos)
        return state

    return ProtocolResult(
        records=tuple(engine.records),
        frames=dict(engine.frames),
        output_state=to_lab(engine.state),
        theory_state=cnot_theory(job.o_choice, job.alpha, s1, s4),
        corrected_state=to_lab(engine.corrected()),
        ideal_state=cnot_theory(job.o_choice, job.alpha, s1, 0),
        computational_output=engine.state,
        job=job,
    )


def control_populations(result_or_state) -> tuple[float, float]:
    """Probabilities of finding the C-NOT control output in |0>, |1>."""
    state = getattr(result_or_state, "output_state", result_or_state)
    rho_c = partial_trace(state, [1]).elems
    return float(rho_c[0, 0].real), float(rho_c[1, 1].real)


def conditional_target(state: State, control: int) -> State | None:
    """Target state after finding the control in ``|control>``; None if impossible."""
    try:
        _, _, target = measure_computational(state, 1, Postselect(control))
    except ImpossibleOutcome:
        return None
    return target


def target_fidelity(result: ProtocolResult, control: int | None = None) -> float:
    """Fidelity of the target output with its theory, optionally conditioned on the control."""
    if control is None:
        theory_t = partial_trace(result.theory_state, [2])
        vals, vecs = np.linalg.eigh(theory_t.elems)
        if vals[-1] < 1 - 1e-9:
            raise ValueError("theory target is entangled; condition on the control outcome")
        return fidelity_pure(StateVector(vecs[:, -1]), partial_trace(result.output_state, [2]))
    theory = conditional_target(result.theory_state, control)
    sim = conditional_target(result.output_state, control)
    if theory is None or sim is None:
        raise ValueError(f"control outcome {control} does not occur in this branch")
    return fidelity_pure(theory, sim)


def rotation_branches(ordering, alpha, beta, s1: int = 0) -> Iterator[RotationJob]:
    for s2 in (0, 1):
        for s3 in (0, 1):
            yield RotationJob.postselected(ordering, alpha, beta, s2, s3, s1)


def cnot_branches(o_choice, alpha) -> Iterator[CnotJob]:
    for s1 in (0, 1):
        for s4 in (0, 1):
            yield CnotJob.postselected(o_choice, alpha, s1, s4)


def sample_rotation(ordering, alpha, beta, shots: int, seed: int, input_cluster: State | None = None):
    """``shots`` sampled runs as (outcomes, result) pairs; results are shared per branch."""
    prepared = _prepare(input_cluster, cluster.ordering(ordering))
    draws = sample_pattern(prepared, rotation_pattern(alpha, beta), shots, seed)
    results = {}
    out = []
    for s1, s2, s3 in draws:
        key = (s1, s2, s3)
        if key not in results:
            results[key] = run_rotation(RotationJob.postselected(ordering, alpha, beta, s2, s3, s1), input_cluster)
        out.append((key, results[key]))
    return out


def sample_cnot(o_choice, alpha, shots: int, seed: int, input_cluster: State | None = None):
    prepared = _prepare(input_cluster, cluster.ordering("c"))
    draws = sample_pattern(prepared, cnot_pattern(o_choice, alpha), shots, seed)
    results = {}
    out = []
    for key in draws:
        if key not in results:
            results[key] = run_cnot(CnotJob.postselected(o_choice, alpha, *key), input_cluster)
        out.append((key, results[key]))
    return out
