"""Dense state-vector and density-matrix kernel for small qubit registers.

Qubits are addressed with 1-based positions and qubit 1 is the most
significant bit of the amplitude index, so ``|01>`` is amplitude 1.
All values are immutable: every operation returns a new object.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Union

import numpy as np

MAX_QUBITS = 4
NORM_TOL = 1e-10

SQRT2 = np.sqrt(2.0)

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
H = (X + Z) / SQRT2

for _m in (I2, X, Y, Z, H):
    _m.flags.writeable = False


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.flags.writeable = False
    return a


def _n_from_dim(dim: int) -> int:
    n = int(round(np.log2(dim)))
    if n < 1 or 2**n != dim:
        raise ValueError(f"dimension {dim} is not a power of two")
    if n > MAX_QUBITS:
        raise ValueError(f"{n} qubits exceeds the supported maximum of {MAX_QUBITS}")
    return n


@dataclass(frozen=True, eq=False)
class StateVector:
    """Pure state of 1 to 4 qubits."""

    amps: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amps, dtype=complex).reshape(-1)
        _n_from_dim(amps.size)
        if not np.all(np.isfinite(amps)):
            raise ValueError("amplitudes must be finite")
        object.__setattr__(self, "amps", _frozen(amps))

    @property
    def n_qubits(self) -> int:
        return _n_from_dim(self.amps.size)

    @property
    def dim(self) -> int:
        return self.amps.size

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def normalize(self) -> "StateVector":
        nrm = self.norm()
        if nrm == 0.0:
            raise ValueError("cannot normalize the zero vector")
        return StateVector(self.amps / nrm)

    def tensor(self, other: "StateVector") -> "StateVector":
        return StateVector(np.kron(self.amps, other.amps))

    def to_density(self) -> "DensityMatrix":
        return DensityMatrix(np.outer(self.amps, self.amps.conj()))

    def __repr__(self):
        return f"StateVector(n_qubits={self.n_qubits}, amps={np.round(self.amps, 6).tolist()})"

    @classmethod
    def from_label(cls, label: str) -> "StateVector":
        """Product state from a label such as ``"0+1-"``.

        Characters: ``0``, ``1``, ``+``, ``-``, ``r`` (``|+i>``), ``l`` (``|-i>``).
        """
        vecs = {
            "0": [1, 0],
            "1": [0, 1],
            "+": [1 / SQRT2, 1 / SQRT2],
            "-": [1 / SQRT2, -1 / SQRT2],
            "r": [1 / SQRT2, 1j / SQRT2],
            "l": [1 / SQRT2, -1j / SQRT2],
        }
        try:
            parts = [np.array(vecs[c], dtype=complex) for c in label]
        except KeyError as exc:
            raise ValueError(f"unknown state label character {exc.args[0]!r}") from None
        amps = parts[0]
        for p in parts[1:]:
            amps = np.kron(amps, p)
        return cls(amps)


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Mixed state of 1 to 4 qubits."""

    elems: np.ndarray

    def __post_init__(self):
        elems = np.asarray(self.elems, dtype=complex)
        if elems.ndim != 2 or elems.shape[0] != elems.shape[1]:
            raise ValueError("density matrix must be square")
        _n_from_dim(elems.shape[0])
        if not np.all(np.isfinite(elems)):
            raise ValueError("density matrix entries must be finite")
        object.__setattr__(self, "elems", _frozen(elems))

    @property
    def n_qubits(self) -> int:
        return _n_from_dim(self.elems.shape[0])

    @property
    def dim(self) -> int:
        return self.elems.shape[0]

    def trace(self) -> float:
        return float(np.trace(self.elems).real)

    def is_valid(self, tol: float = NORM_TOL) -> bool:
        """Hermitian, unit trace and positive semidefinite within ``tol``."""
        m = self.elems
        if not np.allclose(m, m.conj().T, atol=tol, rtol=0):
            return False
        if abs(np.trace(m) - 1) > tol:
            return False
        return bool(np.linalg.eigvalsh((m + m.conj().T) / 2).min() >= -1e-9)

    def purity(self) -> float:
        return float(np.trace(self.elems @ self.elems).real)

    @classmethod
    def maximally_mixed(cls, n_qubits: int) -> "DensityMatrix":
        d = 2**n_qubits
        return cls(np.eye(d, dtype=complex) / d)

    def __repr__(self):
        return f"DensityMatrix(n_qubits={self.n_qubits})"


State = Union[StateVector, DensityMatrix]


def as_density(state: State) -> DensityMatrix:
    if isinstance(state, DensityMatrix):
        return state
    return state.to_density()


def is_unitary(u: np.ndarray, tol: float = NORM_TOL) -> bool:
    u = np.asarray(u)
    return bool(np.allclose(u.conj().T @ u, np.eye(u.shape[0]), atol=tol, rtol=0))


def gate_rz(alpha: float) -> np.ndarray:
    """``exp(-i alpha Z / 2)`` = diag(e^{-i alpha/2}, e^{+i alpha/2})."""
    if not np.isfinite(alpha):
        raise ValueError("rotation angle must be finite")
    return _frozen(np.diag([np.exp(-0.5j * alpha), np.exp(0.5j * alpha)]))


def gate_rx(beta: float) -> np.ndarray:
    """``exp(-i beta X / 2)``."""
    if not np.isfinite(beta):
        raise ValueError("rotation angle must be finite")
    c, s = np.cos(beta / 2), np.sin(beta / 2)
    return _frozen([[c, -1j * s], [-1j * s, c]])


def _check_position(n: int, position: int) -> int:
    if not 1 <= position <= n:
        raise IndexError(f"qubit position {position} outside 1..{n}")
    return position - 1


def apply_1q(state: State, gate: np.ndarray, position: int) -> State:
    """Apply a 2x2 ``gate`` on qubit ``position`` (1-based)."""
    gate = np.asarray(gate, dtype=complex)
    if gate.shape != (2, 2):
        raise ValueError("single-qubit gate must be 2x2")
    n = state.n_qubits
    ax = _check_position(n, position)
    if isinstance(state, StateVector):
        t = state.amps.reshape((2,) * n)
        t = np.moveaxis(np.tensordot(gate, t, axes=([1], [ax])), 0, ax)
        return StateVector(t.reshape(-1))
    t = state.elems.reshape((2,) * (2 * n))
    t = np.moveaxis(np.tensordot(gate, t, axes=([1], [ax])), 0, ax)
    t = np.moveaxis(np.tensordot(gate.conj(), t, axes=([1], [n + ax])), 0, n + ax)
    return DensityMatrix(t.reshape(state.dim, state.dim))


def apply_local(state: State, gates: Iterable[np.ndarray]) -> State:
    """Apply one gate per qubit, ``gates[0]`` on qubit 1."""
    gates = list(gates)
    if len(gates) != state.n_qubits:
        raise ValueError("need exactly one gate per qubit")
    for pos, g in enumerate(gates, start=1):
        state = apply_1q(state, g, pos)
    return state


def _cp_signs(n: int, control: int, target: int) -> np.ndarray:
    if control == target:
        raise ValueError("control and target must differ")
    c = _check_position(n, control)
    t = _check_position(n, target)
    idx = np.arange(2**n)
    both = ((idx >> (n - 1 - c)) & 1) & ((idx >> (n - 1 - t)) & 1)
    return np.where(both == 1, -1.0, 1.0)


def apply_cp(state: State, control: int, target: int) -> State:
    """Controlled phase ``|0><0| x 1 + |1><1| x Z``; symmetric in its qubits."""
    signs = _cp_signs(state.n_qubits, control, target)
    if isinstance(state, StateVector):
        return StateVector(state.amps * signs)
    return DensityMatrix(state.elems * np.outer(signs, signs))


def permute_qubits(state: State, order: Iterable[int]) -> State:
    """Reorder qubits: new qubit ``k`` is old qubit ``order[k-1]``."""
    order = [o - 1 for o in order]
    n = state.n_qubits
    if sorted(order) != list(range(n)):
        raise ValueError(f"{order} is not a permutation of the {n} qubits")
    if isinstance(state, StateVector):
        return StateVector(np.transpose(state.amps.reshape((2,) * n), order).reshape(-1))
    t = state.elems.reshape((2,) * (2 * n))
    t = np.transpose(t, order + [n + o for o in order])
    return DensityMatrix(t.reshape(state.dim, state.dim))


def inner(a: StateVector, b: StateVector) -> complex:
    if a.dim != b.dim:
        raise ValueError("dimension mismatch")
    return complex(np.vdot(a.amps, b.amps))


def fidelity_pure(psi: StateVector, rho: State) -> float:
    """``<psi|rho|psi>``, or ``|<psi|phi>|^2`` when ``rho`` is a pure state."""
    if psi.dim != rho.dim:
        raise ValueError(f"dimension mismatch: {psi.dim} vs {rho.dim}")
    rho_norm = rho.norm() ** 2 if isinstance(rho, StateVector) else rho.trace()
    if abs(psi.norm() - 1) > 1e-8 or abs(rho_norm - 1) > 1e-8:
        raise ValueError("fidelity needs normalized states")
    # clip rounding only
    if isinstance(rho, StateVector):
        f = abs(np.vdot(psi.amps, rho.amps)) ** 2
    else:
        f = np.vdot(psi.amps, rho.elems @ psi.amps).real
    return float(min(max(f, 0.0), 1.0))


def partial_trace(rho: State, keep: Iterable[int]) -> DensityMatrix:
    """Reduced state on the 1-based qubits in ``keep`` (kept in ascending order)."""
    keep = sorted(set(keep))
    if not keep:
        raise ValueError("keep set must be nonempty")
    rho = as_density(rho)
    n = rho.n_qubits
    for k in keep:
        _check_position(n, k)
    t = rho.elems.reshape((2,) * (2 * n))
    kept = [k - 1 for k in keep]
    traced = [q for q in range(n) if q not in kept]
    t = np.transpose(t, kept + traced + [n + k for k in kept] + [n + q for q in traced])
    dk, dt = 2 ** len(kept), 2 ** len(traced)
    t = t.reshape(dk, dt, dk, dt)
    return DensityMatrix(np.einsum("ajbj->ab", t))


def expectation(rho: State, op: np.ndarray) -> float:
    """Real part of ``tr(rho op)``."""
    if isinstance(rho, StateVector):
        return float(np.vdot(rho.amps, op @ rho.amps).real)
    return float(np.trace(rho.elems @ op).real)
