"""Brute-force reference for the measurement patterns.

Works entirely in the laboratory frame on the 16-amplitude cluster vector:
each measured physical qubit gets an explicit projector ``|v><v|`` with
``v = U_j |b_s>``, the full 16x16 operator is built with ``kron`` and applied
once. Nothing here is imported from the engine, the cluster constructors or
the ordering tables; those are re-entered by hand so the two routes can be
compared.
"""

from __future__ import annotations

from functools import reduce

import numpy as np

_S = 1 / np.sqrt(2)
_I = np.eye(2, dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)
_H = _S * np.array([[1, 1], [1, -1]], dtype=complex)

_PHYS = ("kA", "kB", "piA", "piB")

# logical qubits 1..4 -> (physical qubit, U_j)
_ORDER = {
    "a": (("kB", _X @ _H), ("kA", _Z), ("piA", _I), ("piB", _H)),
    "b": (("piB", _H), ("piA", _Z), ("kA", _X), ("kB", _Z @ _H)),
    "c": (("kA", _Z @ _H), ("kB", _X), ("piB", _I), ("piA", _H)),
}


def cluster_amplitudes() -> np.ndarray:
    """The four printed cluster terms, qubit order (kA, kB, piA, piB)."""
    psi = np.zeros(16, dtype=complex)
    # (photon A polarization, path), (photon B polarization, path), amplitude
    for (pa, ka), (pb, kb), amp in (
        (("H", "l"), ("H", "r"), 0.5),
        (("H", "r"), ("H", "l"), -0.5),
        (("V", "r"), ("V", "l"), 0.5),
        (("V", "l"), ("V", "r"), 0.5),
    ):
        bits = {"kA": ka == "r", "kB": kb == "r", "piA": pa == "V", "piB": pb == "V"}
        idx = sum(int(bits[q]) << (3 - i) for i, q in enumerate(_PHYS))
        psi[idx] = amp
    return psi


def _equatorial(phi: float, s: int) -> np.ndarray:
    return _S * np.array([1, (-1) ** s * np.exp(-1j * phi)], dtype=complex)


def _computational(s: int) -> np.ndarray:
    return _I[:, s].copy()


def _project(psi: np.ndarray, ordering: str, kets: dict[int, np.ndarray]):
    """Apply lab projectors for the measured logical qubits; return (prob, outputs)."""
    table = _ORDER[ordering]
    lab = {}
    for logical, ket in kets.items():
        phys, u = table[logical - 1]
        lab[phys] = u @ ket
    op = reduce(np.kron, [np.outer(lab[q], lab[q].conj()) if q in lab else _I for q in _PHYS])
    projected = op @ psi
    prob = float(np.vdot(projected, projected).real)
    # strip the measured factors: contract each with its bra
    t = projected.reshape((2,) * 4)
    keep = [q for q in _PHYS if q not in lab]
    for q in reversed(_PHYS):
        if q in lab:
            t = np.tensordot(t, lab[q].conj(), axes=([_PHYS.index(q)], [0]))
    out = t.reshape(-1)
    return prob, out / np.linalg.norm(out), keep


def rotation_branch(ordering: str, alpha: float, beta: float, s1: int, s2: int, s3: int, psi=None):
    """(probability, normalized lab output) of one rotation branch."""
    if psi is None:
        psi = cluster_amplitudes()
    kets = {
        1: _computational(s1),
        2: _equatorial(alpha, s2),
        3: _equatorial(beta if s2 == 0 else -beta, s3),
    }
    prob, out, keep = _project(psi, ordering, kets)
    assert keep == [_ORDER[ordering][3][0]]
    return prob, out


def cnot_branch(o_choice: str, alpha: float, s1: int, s4: int, psi=None):
    """(probability, normalized lab output on (kB, piB)) with the target Hadamard undone."""
    if psi is None:
        psi = cluster_amplitudes()
    first = _computational(s1) if o_choice == "I" else _equatorial(0.0, s1)
    prob, out, keep = _project(psi, "c", {1: first, 4: _equatorial(alpha, s4)})
    assert keep == ["kB", "piB"]
    return prob, np.kron(_I, _H) @ out


def overlap(a: np.ndarray, b: np.ndarray) -> float:
    """``|<a|b>|^2`` for normalized vectors."""
    return float(abs(np.vdot(a, b)) ** 2)
