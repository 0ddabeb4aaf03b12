"""Translation between logical measurements and the two-photon analysis setup.

Momentum qubits are analysed on a common 50:50 beam splitter: with the BS in
place a glass-plate phase ``phi`` selects the equatorial basis
``(|l> +- e^{-i phi}|r>)/sqrt2``; with the BS moved out of the beam the
path itself is detected (``Z``). Polarization qubits go through an optional
pair of Hadamard half-wave plates at 22.5 deg (``H_a, H_b`` on photon A,
``H_c, H_d`` on photon B), a quarter-wave plate, a half-wave plate and a PBS
whose transmitted port (``H``) is outcome 0.

Waveplate Jones matrices use the fast-axis angle ``t`` measured from ``H``:
``M(t) = R(-t) M0 R(t)`` with ``R(t) = [[cos t, sin t], [-sin t, cos t]]``,
``M0 = diag(1, -1)`` for the HWP and ``diag(1, i)`` for the QWP, global
phases dropped.

A :class:`LogicalMeasurement` names a physical qubit and the laboratory
basis in which it is read out; outcome 0 is the ``+axis`` eigenstate.
:func:`laboratory_measurement` maps an ordering-relative computational
measurement to that form through the ordering's local unitary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace
from typing import Iterable

import numpy as np

from .cluster import PhysicalQubit, ordering as get_ordering
from .mbqc import ComputationalBasis, EquatorialBasis
from .qstate import I2

TOL = 1e-9

ROTATION_PLATES = frozenset({"H_a", "H_b"})
CNOT_PLATES = frozenset({"H_c", "H_d"})
PHOTON_PLATES = {"A": ROTATION_PLATES, "B": CNOT_PLATES}
CONTEXTS = {"rotation": ROTATION_PLATES, "cnot": CNOT_PLATES}


class UnrealizableMeasurement(ValueError):
    pass


class AmbiguousSetting(ValueError):
    pass


def _rot(t: float) -> np.ndarray:
    c, s = math.cos(t), math.sin(t)
    return np.array([[c, s], [-s, c]], dtype=complex)


def hwp(deg: float) -> np.ndarray:
    t = math.radians(deg)
    return _rot(-t) @ np.diag([1, -1]).astype(complex) @ _rot(t)


def qwp(deg: float) -> np.ndarray:
    t = math.radians(deg)
    return _rot(-t) @ np.diag([1, 1j]) @ _rot(t)


def hadamard_plate() -> np.ndarray:
    return hwp(22.5)


def _norm_deg(deg: float) -> float:
    d = round(deg % 180.0, 12)
    return 0.0 if d >= 180.0 else d + 0.0


def _wrap(phi: float) -> float:
    """Wrap to (-pi, pi]."""
    w = math.remainder(phi, 2 * math.pi)
    return math.pi if abs(w + math.pi) < 1e-12 else w + 0.0


def _bloch(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    v = v / np.linalg.norm(v)
    a, b = v
    return np.array([2 * (np.conj(a) * b).real, 2 * (np.conj(a) * b).imag, abs(a) ** 2 - abs(b) ** 2])


@dataclass(frozen=True, eq=False)
class LabBasis:
    """Measurement basis given by the Bloch axis of its outcome-0 state."""

    axis: tuple[float, float, float]

    def __post_init__(self):
        a = np.asarray(self.axis, dtype=float)
        n = np.linalg.norm(a)
        if not np.isfinite(n) or n < TOL:
            raise ValueError("basis axis must be a nonzero finite vector")
        a = a / n
        a[np.abs(a) < 1e-13] = 0.0
        object.__setattr__(self, "axis", tuple(float(x) for x in a))

    @classmethod
    def pauli(cls, name: str) -> "LabBasis":
        axes = {"X": (1, 0, 0), "Y": (0, 1, 0), "Z": (0, 0, 1)}
        try:
            return cls(axes[name.upper()])
        except KeyError:
            raise ValueError(f"unknown Pauli basis {name!r}") from None

    @classmethod
    def computational(cls) -> "LabBasis":
        return cls.pauli("Z")

    @classmethod
    def equatorial(cls, phi: float) -> "LabBasis":
        """``(|0> +- e^{-i phi}|1>)/sqrt2``."""
        return cls((math.cos(phi), -math.sin(phi), 0.0))

    @classmethod
    def from_vector(cls, v) -> "LabBasis":
        return cls(tuple(_bloch(v)))

    def vector(self, outcome: int = 0) -> np.ndarray:
        x, y, z = self.axis if outcome == 0 else tuple(-c for c in self.axis)
        theta = math.acos(max(-1.0, min(1.0, z)))
        az = math.atan2(y, x)
        return np.array([math.cos(theta / 2), np.exp(1j * az) * math.sin(theta / 2)], dtype=complex)

    @property
    def kind(self) -> str:
        for name in "XYZ":
            if self == LabBasis.pauli(name):
                return "pauli"
        if abs(self.axis[2]) < TOL:
            return "equatorial"
        return "axis"

    @property
    def pauli_name(self) -> str | None:
        for name in "XYZ":
            if self == LabBasis.pauli(name):
                return name
        return None

    @property
    def phi(self) -> float | None:
        if abs(self.axis[2]) >= TOL:
            return None
        return _wrap(math.atan2(-self.axis[1], self.axis[0]))

    def __eq__(self, other):
        if not isinstance(other, LabBasis):
            return NotImplemented
        return bool(np.allclose(self.axis, other.axis, atol=TOL, rtol=0))

    def __hash__(self):
        return hash(tuple(round(c, 6) for c in self.axis))

    def __str__(self):
        if self.pauli_name:
            return self.pauli_name
        if self.kind == "equatorial":
            return f"eq({self.phi:.6f})"
        return "axis(" + ", ".join(f"{c:.6f}" for c in self.axis) + ")"


@dataclass(frozen=True)
class LogicalMeasurement:
    qubit: PhysicalQubit
    basis: LabBasis

    def __post_init__(self):
        object.__setattr__(self, "qubit", PhysicalQubit(self.qubit))

    def to_dict(self) -> dict:
        d = {"qubit": self.qubit.value, "kind": self.basis.kind, "basis": str(self.basis)}
        d["axis"] = list(self.basis.axis)
        return d


@dataclass(frozen=True)
class LabSetting:
    """Settings of the analysis stage; ``None`` marks an unused element."""

    hwp_angle_A: float | None = None
    qwp_angle_A: float | None = None
    hwp_angle_B: float | None = None
    qwp_angle_B: float | None = None
    phi_A: float | None = None
    phi_B: float | None = None
    bs_present_A: bool | None = None
    bs_present_B: bool | None = None
    h_plates: frozenset[str] = field(default_factory=frozenset)

    def __post_init__(self):
        for name in ("hwp_angle_A", "qwp_angle_A", "hwp_angle_B", "qwp_angle_B"):
            val = getattr(self, name)
            if val is not None:
                object.__setattr__(self, name, _norm_deg(val))
        for name in ("phi_A", "phi_B"):
            val = getattr(self, name)
            if val is not None:
                object.__setattr__(self, name, _wrap(val))
        plates = frozenset(self.h_plates)
        if plates - ROTATION_PLATES - CNOT_PLATES:
            raise ValueError(f"unknown Hadamard plates {sorted(plates - ROTATION_PLATES - CNOT_PLATES)}")
        object.__setattr__(self, "h_plates", plates)

    def to_dict(self) -> dict:
        d = {f.name: getattr(self, f.name) for f in fields(self)}
        d["h_plates"] = sorted(self.h_plates)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "LabSetting":
        d = dict(d)
        d["h_plates"] = frozenset(d.get("h_plates", ()))
        return cls(**d)

    def merge(self, other: "LabSetting") -> "LabSetting":
        updates = {}
        for f in fields(self):
            if f.name == "h_plates":
                continue
            a, b = getattr(self, f.name), getattr(other, f.name)
            if a is not None and b is not None and a != b:
                raise ValueError(f"conflicting values for {f.name}: {a} vs {b}")
            updates[f.name] = a if a is not None else b
        if self.h_plates and other.h_plates and self.h_plates != other.h_plates:
            raise ValueError("conflicting Hadamard plate configurations")
        updates["h_plates"] = self.h_plates or other.h_plates
        return replace(self, **updates)


def _pre_chain(photon: str, plates: frozenset[str]) -> np.ndarray:
    own = PHOTON_PLATES[photon]
    present = plates & own
    if present and present != own:
        raise AmbiguousSetting(f"Hadamard plates on photon {photon} must be inserted as a pair")
    return hadamard_plate() if present else I2


def analyzer_chain(photon: str, qwp_deg: float, hwp_deg: float, plates: Iterable[str]) -> np.ndarray:
    """Jones matrix from the photon's polarization to the PBS."""
    return hwp(hwp_deg) @ qwp(qwp_deg) @ _pre_chain(photon, frozenset(plates))


def analyzer_state(photon: str, qwp_deg: float, hwp_deg: float, plates: Iterable[str]) -> np.ndarray:
    """Polarization state sent to the transmitted (outcome 0) PBS port."""
    return analyzer_chain(photon, qwp_deg, hwp_deg, plates).conj().T @ np.array([1, 0], dtype=complex)


def solve_waveplates(target: np.ndarray, pre: np.ndarray = I2) -> tuple[float, float]:
    """(QWP, HWP) angles in degrees that send ``pre @ target`` to ``|H>``.

    The QWP is aligned with the major axis of the polarization ellipse,
    which leaves the light linearly polarized; the HWP then rotates that
    linear polarization onto ``H``.
    """
    v = pre @ np.asarray(target, dtype=complex)
    x, _, z = _bloch(v)
    # circular light has no major axis; any QWP angle works, take 0
    q = 0.0 if math.hypot(x, z) < 1e-9 else math.degrees(0.5 * math.atan2(x, z))
    w = qwp(q) @ v
    x2, y2, z2 = _bloch(w)
    if abs(y2) > 1e-9:
        raise RuntimeError("quarter-wave plate failed to linearize the polarization")
    h = math.degrees(0.5 * math.atan2(x2, z2)) / 2
    out = hwp(h) @ w
    if abs(abs(out[0]) ** 2 / np.vdot(out, out).real - 1) > 1e-10:
        raise RuntimeError("waveplate solution does not reach the H port")
    return _norm_deg(q), _norm_deg(h)


def to_lab(m: LogicalMeasurement, context: str) -> LabSetting:
    """Settings that realize ``m`` within the given protocol context."""
    try:
        plates = CONTEXTS[context]
    except KeyError:
        raise ValueError(f"unknown context {context!r}; expected one of {sorted(CONTEXTS)}") from None
    photon = m.qubit.photon
    basis = m.basis
    if m.qubit.is_momentum:
        if basis == LabBasis.computational():
            return LabSetting(h_plates=plates, **{f"bs_present_{photon}": False})
        if basis.kind != "axis" and basis.phi is not None:
            return LabSetting(h_plates=plates, **{f"bs_present_{photon}": True, f"phi_{photon}": basis.phi})
        raise UnrealizableMeasurement(f"momentum basis {basis} is neither equatorial nor the path basis")
    q, h = solve_waveplates(basis.vector(0), _pre_chain(photon, plates))
    return LabSetting(h_plates=plates, **{f"qwp_angle_{photon}": q, f"hwp_angle_{photon}": h})


def to_lab_many(measurements: Iterable[LogicalMeasurement], context: str) -> LabSetting:
    setting = LabSetting(h_plates=CONTEXTS.get(context, frozenset()))
    seen = set()
    for m in measurements:
        if m.qubit in seen:
            raise ValueError(f"qubit {m.qubit.value} measured twice")
        seen.add(m.qubit)
        setting = setting.merge(to_lab(m, context))
    return setting


def from_lab(s: LabSetting) -> list[LogicalMeasurement]:
    """Measurements realized by ``s``, in physical-qubit order."""
    out = []
    for photon in "AB":
        bs, phi = getattr(s, f"bs_present_{photon}"), getattr(s, f"phi_{photon}")
        qubit = PhysicalQubit(f"k{photon}")
        if bs is False:
            if phi is not None:
                raise AmbiguousSetting(f"phase set on photon {photon} with the BS removed")
            out.append(LogicalMeasurement(qubit, LabBasis.computational()))
        elif bs is True:
            if phi is None:
                raise AmbiguousSetting(f"BS present for photon {photon} but no phase set")
            out.append(LogicalMeasurement(qubit, LabBasis.equatorial(phi)))
        elif phi is not None:
            raise AmbiguousSetting(f"phase set on photon {photon} without BS information")
    for photon in "AB":
        q, h = getattr(s, f"qwp_angle_{photon}"), getattr(s, f"hwp_angle_{photon}")
        if q is None and h is None:
            continue
        if q is None or h is None:
            raise AmbiguousSetting(f"photon {photon} polarization analysis needs both waveplates")
        vec = analyzer_state(photon, q, h, s.h_plates)
        out.append(LogicalMeasurement(PhysicalQubit(f"pi{photon}"), LabBasis.from_vector(vec)))
    order = {q: i for i, q in enumerate(PhysicalQubit)}
    return sorted(out, key=lambda m: order[m.qubit])


def realized_projector(m: LogicalMeasurement, s: LabSetting, outcome: int = 0) -> np.ndarray:
    """Projector the apparatus applies to qubit ``m.qubit`` for ``outcome``."""
    photon = m.qubit.photon
    if m.qubit.is_momentum:
        if getattr(s, f"bs_present_{photon}"):
            v = LabBasis.equatorial(getattr(s, f"phi_{photon}")).vector(outcome)
        else:
            v = np.eye(2, dtype=complex)[outcome]
        return np.outer(v, v.conj())
    chain = analyzer_chain(photon, getattr(s, f"qwp_angle_{photon}"), getattr(s, f"hwp_angle_{photon}"), s.h_plates)
    port = np.zeros((2, 2), dtype=complex)
    port[outcome, outcome] = 1
    return chain.conj().T @ port @ chain


# --- ordering-relative translation ---------------------------------------------


def laboratory_measurement(ordering_name: str, logical: int, basis) -> LogicalMeasurement:
    """Physical qubit and lab basis for a computational-frame measurement.

    The lab outcome-0 state is ``U_j |b_0>``. For ordering a this turns the
    first measurement into ``|+->`` on kB and the ``alpha`` measurement on
    kA into the label-swapped basis ``|alpha_-+>``.
    """
    order = get_ordering(ordering_name)
    if isinstance(basis, (ComputationalBasis, EquatorialBasis)):
        vec = basis.vector(0)
    else:
        vec = np.asarray(basis, dtype=complex)
    return LogicalMeasurement(order.physical(logical), LabBasis.from_vector(order.unitary(logical) @ vec))


def result_measurements(result) -> list[LogicalMeasurement]:
    """Lab-frame measurements performed in a protocol run."""
    name = getattr(result.job, "ordering", "c")
    return [laboratory_measurement(name, r.qubit, r.basis) for r in result.records]


def result_context(result) -> str:
    return "rotation" if hasattr(result.job, "ordering") else "cnot"


def result_setting(result) -> LabSetting:
    return to_lab_many(result_measurements(result), result_context(result))


def tomography_measurements(qubit: PhysicalQubit | str, frame_gate: np.ndarray = I2) -> dict[str, LogicalMeasurement]:
    """Pauli X, Y, Z readouts of an output qubit.

    ``frame_gate`` maps the physical qubit to the frame the output is
    reported in (``H`` for the C-NOT target behind ``H_c, H_d``).
    """
    qubit = PhysicalQubit(qubit)
    out = {}
    for name in "XYZ":
        vec = frame_gate.conj().T @ LabBasis.pauli(name).vector(0)
        out[name] = LogicalMeasurement(qubit, LabBasis.from_vector(vec))
    return out


def translation_table() -> list[dict]:
    """Lab bases of every measured qubit in the three orderings, for documentation."""
    rows = []
    patterns = {
        "a": [(1, "Z"), (2, "alpha"), (3, "beta")],
        "b": [(1, "Z"), (2, "alpha"), (3, "beta")],
        "c": [(1, "Z"), (1, "X"), (4, "alpha")],
    }
    for name, steps in patterns.items():
        order = get_ordering(name)
        for logical, what in steps:
            u = order.unitary(logical)
            if what == "Z":
                comp = "computational"
                lab = LabBasis.from_vector(u @ ComputationalBasis().vector(0))
            elif what == "X":
                comp = "equatorial(0)"
                lab = LabBasis.from_vector(u @ EquatorialBasis(0.0).vector(0))
            else:
                comp = f"equatorial({what})"
                probe = 0.3
                lab = LabBasis.from_vector(u @ EquatorialBasis(probe).vector(0))
                if lab.kind == "equatorial":
                    offset = _wrap(lab.phi - probe)
                    mirrored = _wrap(lab.phi + probe)
                    if abs(offset) < TOL:
                        desc = f"equatorial({what})"
                    elif abs(abs(offset) - math.pi) < TOL:
                        desc = f"equatorial({what}+pi)  (outcome labels swapped)"
                    elif abs(mirrored) < TOL:
                        desc = f"equatorial(-{what})"
                    else:
                        desc = f"equatorial(-{what}+pi)"
                else:
                    desc = f"H-rotated equatorial({what}) (meridian basis)"
                rows.append({"ordering": name, "logical": logical, "physical": order.physical(logical).value,
                             "computational": comp, "laboratory": desc})
                continue
            rows.append({"ordering": name, "logical": logical, "physical": order.physical(logical).value,
                         "computational": comp, "laboratory": str(lab)})
    return rows
