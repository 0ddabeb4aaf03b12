"""Two-photon four-qubit cluster states and their qubit orderings.

Physical register order is ``(kA, kB, piA, piB)``: the momentum (path) qubits
of photons A and B followed by their polarization qubits. The encoding is
``|H>, |l> -> |0>`` and ``|V>, |r> -> |1>``.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from functools import lru_cache, reduce

import numpy as np

from .qstate import (
    H,
    I2,
    X,
    Y,
    Z,
    StateVector,
    apply_cp,
    apply_local,
    fidelity_pure,
    is_unitary,
    permute_qubits,
)


class PhysicalQubit(str, enum.Enum):
    kA = "kA"
    kB = "kB"
    piA = "piA"
    piB = "piB"

    @property
    def photon(self) -> str:
        return self.value[-1]

    @property
    def is_momentum(self) -> bool:
        return self.value.startswith("k")

    @property
    def position(self) -> int:
        """1-based slot in the physical register."""
        return PHYSICAL_ORDER.index(self) + 1


PHYSICAL_ORDER = (PhysicalQubit.kA, PhysicalQubit.kB, PhysicalQubit.piA, PhysicalQubit.piB)


@dataclass(frozen=True, eq=False)
class Ordering:
    """Assignment of logical cluster qubits 1-4 to physical qubits.

    ``local_unitaries[j-1]`` is the ``U_j`` that maps the computational-basis
    linear cluster to the laboratory state on logical qubit ``j``.
    """

    name: str
    logical_to_physical: tuple[PhysicalQubit, PhysicalQubit, PhysicalQubit, PhysicalQubit]
    local_unitaries: tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]

    def __post_init__(self):
        if sorted(q.value for q in self.logical_to_physical) != sorted(q.value for q in PHYSICAL_ORDER):
            raise ValueError("logical_to_physical must be a bijection onto the four physical qubits")
        if len(self.local_unitaries) != 4 or not all(is_unitary(u) for u in self.local_unitaries):
            raise ValueError("need four unitary local gates")

    @property
    def physical_to_logical(self) -> dict[PhysicalQubit, int]:
        return {q: j for j, q in enumerate(self.logical_to_physical, start=1)}

    def physical(self, logical: int) -> PhysicalQubit:
        return self.logical_to_physical[logical - 1]

    def logical(self, physical: PhysicalQubit | str) -> int:
        return self.physical_to_logical[PhysicalQubit(physical)]

    def unitary(self, logical: int) -> np.ndarray:
        return self.local_unitaries[logical - 1]

    def to_physical_order(self, state):
        """Logical-order register -> physical-order register."""
        p2l = self.physical_to_logical
        return permute_qubits(state, [p2l[q] for q in PHYSICAL_ORDER])

    def to_logical_order(self, state):
        """Physical-order register -> logical-order register."""
        return permute_qubits(state, [q.position for q in self.logical_to_physical])

    def to_laboratory(self, computational):
        """``U_1 x ... x U_4`` applied, then placed in physical order."""
        return self.to_physical_order(apply_local(computational, self.local_unitaries))

    def to_computational(self, laboratory):
        """Inverse of :meth:`to_laboratory`."""
        logical = self.to_logical_order(laboratory)
        return apply_local(logical, [u.conj().T for u in self.local_unitaries])


def _ordering_table() -> dict[str, Ordering]:
    kA, kB, piA, piB = PHYSICAL_ORDER
    return {
        "a": Ordering("a", (kB, kA, piA, piB), (X @ H, Z, I2, H)),
        "b": Ordering("b", (piB, piA, kA, kB), (H, Z, X, Z @ H)),
        "c": Ordering("c", (kA, kB, piB, piA), (Z @ H, X, I2, H)),
    }


_ORDERINGS = _ordering_table()


def ordering(name: str) -> Ordering:
    try:
        return _ORDERINGS[name]
    except KeyError:
        raise ValueError(f"unknown ordering {name!r}; expected one of a, b, c") from None


def _amplitudes(terms: dict[tuple[int, ...], float]) -> np.ndarray:
    amps = np.zeros(16, dtype=complex)
    for bits, amp in terms.items():
        amps[int("".join(map(str, bits)), 2)] += amp
    return amps


def build_hyperentangled() -> StateVector:
    """``|Phi+>_pi x |psi->_k`` in physical order (kA, kB, piA, piB)."""
    # |psi-> = (|l r> - |r l>)/sqrt2 on (kA, kB); |Phi+> = (|HH> + |VV>)/sqrt2 on (piA, piB)
    terms = {}
    for (ka, kb), ks in (((0, 1), 1.0), ((1, 0), -1.0)):
        for pol in (0, 1):
            terms[(ka, kb, pol, pol)] = 0.5 * ks
    return StateVector(_amplitudes(terms))


def build_c4() -> StateVector:
    """The four-term two-photon cluster state, in physical order."""
    # ket |P k>_A |P k>_B  ->  bits (kA, kB, piA, piB)
    return StateVector(
        _amplitudes(
            {
                (0, 1, 0, 0): 0.5,  # |H l>_A |H r>_B
                (1, 0, 0, 0): -0.5,  # |H r>_A |H l>_B
                (1, 0, 1, 1): 0.5,  # |V r>_A |V l>_B
                (0, 1, 1, 1): 0.5,  # |V l>_A |V r>_B
            }
        )
    )


def build_c4_from_phase_plate() -> StateVector:
    """Cluster state made by a controlled phase from ``kA`` onto ``piA``.

    This models the half-wave plate on the ``r_A`` mode. With the encoding
    used here no extra local correction is required: the result equals
    :func:`build_c4` exactly.
    """
    return apply_cp(build_hyperentangled(), PhysicalQubit.kA.position, PhysicalQubit.piA.position)


def build_linear_cluster() -> StateVector:
    """Four-qubit linear cluster ``CP(1,2) CP(2,3) CP(3,4) |++++>``."""
    state = StateVector.from_label("++++")
    for a in (1, 2, 3):
        state = apply_cp(state, a, a + 1)
    return state


def linear_cluster_expansion() -> StateVector:
    """The same state from its four-term expansion in the mixed X/Z basis."""
    terms = [("+00+", 1), ("+01-", 1), ("-10+", 1), ("-11-", -1)]
    amps = sum(sign * StateVector.from_label(lbl).amps for lbl, sign in terms) / 2
    return StateVector(amps)


def equivalence_fidelity(name: str) -> float:
    """Fidelity between the lab cluster and ``U |linear cluster>`` for an ordering."""
    return fidelity_pure(build_c4(), ordering(name).to_laboratory(build_linear_cluster()))


# --- stabilizers -----------------------------------------------------------

PAULIS = {"I": I2, "X": X, "Y": Y, "Z": Z}

# single-qubit Pauli product: (a, b) -> (phase, c) with a.b = phase * c
_PAULI_MUL = {}
for _a, _b in itertools.product("IXYZ", repeat=2):
    _m = PAULIS[_a] @ PAULIS[_b]
    for _c, _pc in PAULIS.items():
        _ph = np.trace(_pc.conj().T @ _m) / 2
        if abs(abs(_ph) - 1) < 1e-12:
            _PAULI_MUL[(_a, _b)] = (complex(np.round(_ph)), _c)
            break


@dataclass(frozen=True, order=True)
class StabilizerElement:
    """Signed four-qubit Pauli string, letters in physical order."""

    paulis: str
    sign: int = 1

    def __post_init__(self):
        if len(self.paulis) != 4 or set(self.paulis) - set("IXYZ"):
            raise ValueError(f"bad Pauli string {self.paulis!r}")
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")

    def matrix(self) -> np.ndarray:
        return self.sign * reduce(np.kron, (PAULIS[p] for p in self.paulis))

    def __mul__(self, other: "StabilizerElement") -> "StabilizerElement":
        phase = complex(self.sign * other.sign)
        letters = []
        for a, b in zip(self.paulis, other.paulis):
            ph, c = _PAULI_MUL[(a, b)]
            phase *= ph
            letters.append(c)
        if abs(phase.imag) > 1e-12:
            raise ValueError("product of non-commuting elements is not Hermitian")
        return StabilizerElement("".join(letters), int(round(phase.real)))

    def commutes_with(self, other: "StabilizerElement") -> bool:
        anti = sum(a != "I" and b != "I" and a != b for a, b in zip(self.paulis, other.paulis))
        return anti % 2 == 0

    def __str__(self):
        return ("+" if self.sign > 0 else "-") + self.paulis


def _identify_pauli(m: np.ndarray) -> tuple[int, str]:
    for name, p in PAULIS.items():
        c = np.trace(p.conj().T @ m) / 2
        if abs(abs(c) - 1) < 1e-10:
            if abs(c.imag) > 1e-10:
                raise ValueError("conjugated Pauli is not Hermitian")
            return int(round(c.real)), name
    raise ValueError("matrix is not a signed Pauli operator")


def linear_cluster_generators() -> list[tuple[str, ...]]:
    """Graph-state generators ``X_j Z_{j-1} Z_{j+1}`` in logical order."""
    gens = []
    for j in range(4):
        g = ["I"] * 4
        g[j] = "X"
        for nb in (j - 1, j + 1):
            if 0 <= nb < 4:
                g[nb] = "Z"
        gens.append(tuple(g))
    return gens


def lab_generators(name: str = "a") -> list[StabilizerElement]:
    """Linear-cluster generators conjugated by ``U`` and written in physical order."""
    order = ordering(name)
    out = []
    for gen in linear_cluster_generators():
        sign = 1
        letters = {}
        for j, p in enumerate(gen, start=1):
            u = order.unitary(j)
            s, q = _identify_pauli(u @ PAULIS[p] @ u.conj().T)
            sign *= s
            letters[order.physical(j)] = q
        out.append(StabilizerElement("".join(letters[q] for q in PHYSICAL_ORDER), sign))
    return out


@lru_cache(maxsize=None)
def _group(name: str) -> tuple[StabilizerElement, ...]:
    gens = lab_generators(name)
    elems = []
    for mask in itertools.product((0, 1), repeat=4):
        e = StabilizerElement("IIII", 1)
        for bit, g in zip(mask, gens):
            if bit:
                e = e * g
        elems.append(e)
    return tuple(sorted(elems))


def stabilizer_group() -> list[StabilizerElement]:
    """All 16 elements of the stabilizer group of the lab cluster state."""
    return list(_group("a"))
