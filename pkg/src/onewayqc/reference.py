"""Measured fidelities shipped with the package and comparison against simulation.

The CSV holds one row per published fidelity. ``branch`` lists the outcome
bits that define the row (``s2=1;s3=0``); C-NOT rows with ``O = I`` carry
an extra ``c`` entry for the control output found in {|0>, |1>}. The quoted
uncertainties are kept as metadata only.
"""

from __future__ import annotations

import csv
import math
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

from .protocols import (
    CnotJob,
    OChoice,
    ProtocolResult,
    RotationJob,
    run_cnot,
    run_rotation,
    target_fidelity,
)
from .qstate import State
from .tomography import bloch_projection

REFERENCE_FILE = "reference_fidelities_v1.csv"
COLUMNS = ("protocol", "ordering", "output", "alpha", "beta_or_O", "branch", "fidelity", "sigma", "colour")
ANGLE_MATCH_TOL = 1e-3

_ANGLE_RE = re.compile(r"^\s*(-)?\s*(\d*)\s*(pi)?\s*(?:/\s*(\d+))?\s*$")


def parse_angle(text: str) -> float:
    """Parse ``0``, ``pi``, ``-pi/4``, ``3pi/2`` or a plain float."""
    m = _ANGLE_RE.match(text)
    if m and m.group(3):
        sign = -1.0 if m.group(1) else 1.0
        num = float(m.group(2)) if m.group(2) else 1.0
        den = float(m.group(4)) if m.group(4) else 1.0
        return sign * num * math.pi / den
    try:
        return float(text)
    except ValueError:
        raise ValueError(f"cannot parse angle {text!r}") from None


def parse_branch(text: str) -> dict[str, int]:
    out = {}
    for part in text.split(";"):
        key, _, val = part.partition("=")
        if val not in ("0", "1"):
            raise ValueError(f"bad branch entry {part!r}")
        out[key.strip()] = int(val)
    return out


@dataclass(frozen=True)
class ReferenceRow:
    protocol: str
    ordering: str
    output: str
    alpha_text: str
    beta_or_o: str
    branch_text: str
    fidelity: float
    sigma: float
    colour: str = ""

    def __post_init__(self):
        if self.protocol not in ("rotation", "cnot"):
            raise ValueError(f"unknown protocol {self.protocol!r}")
        # parse eagerly so a corrupt file fails at load time
        self.alpha, self.branch
        if self.protocol == "rotation":
            self.beta
        else:
            self.o_choice

    @property
    def alpha(self) -> float:
        return parse_angle(self.alpha_text)

    @property
    def beta(self) -> float | None:
        return parse_angle(self.beta_or_o) if self.protocol == "rotation" else None

    @property
    def o_choice(self) -> OChoice | None:
        return OChoice(self.beta_or_o) if self.protocol == "cnot" else None

    @property
    def branch(self) -> dict[str, int]:
        return parse_branch(self.branch_text)

    @property
    def label(self) -> str:
        second = f"beta={self.beta_or_o}" if self.protocol == "rotation" else f"O={self.beta_or_o}"
        return f"{self.output} alpha={self.alpha_text} {second} [{self.branch_text}]"

    def job(self) -> RotationJob | CnotJob:
        b = self.branch
        if self.protocol == "rotation":
            return RotationJob.postselected(self.ordering, self.alpha, self.beta, b["s2"], b["s3"], b.get("s1", 0))
        return CnotJob.postselected(self.o_choice, self.alpha, b["s1"], b["s4"])

    def matches(self, result: ProtocolResult) -> bool:
        job, out = result.job, result.outcomes
        if self.protocol == "rotation":
            if not isinstance(job, RotationJob) or job.ordering != self.ordering:
                return False
            angles = (job.alpha, job.beta)
            wanted = (self.alpha, self.beta)
        else:
            if not isinstance(job, CnotJob) or job.o_choice is not self.o_choice:
                return False
            angles, wanted = (job.alpha,), (self.alpha,)
        if any(abs(a - w) > ANGLE_MATCH_TOL for a, w in zip(angles, wanted)):
            return False
        bits = {k: v for k, v in self.branch.items() if k != "c"}
        bits.setdefault("s1", 0)
        return all(out.get(int(k[1:])) == v for k, v in bits.items())

    def simulated_fidelity(self, result: ProtocolResult) -> float:
        if self.protocol == "rotation":
            return result.fidelity
        return target_fidelity(result, self.branch.get("c"))


@dataclass(frozen=True)
class ReferenceTable:
    rows: tuple[ReferenceRow, ...]

    def __post_init__(self):
        for r in self.rows:
            if not 0.0 <= r.fidelity <= 1.0 or r.sigma <= 0:
                raise ValueError(f"invalid reference row {r}")

    def __len__(self):
        return len(self.rows)

    def __iter__(self):
        return iter(self.rows)

    def select(self, protocol: str | None = None) -> list[ReferenceRow]:
        return [r for r in self.rows if protocol is None or r.protocol == protocol]

    def lookup(self, result: ProtocolResult) -> list[ReferenceRow]:
        return [r for r in self.rows if r.matches(result)]

    def find(self, output: str, alpha: float, beta_or_o: str | float, branch: dict[str, int]) -> ReferenceRow:
        for r in self.rows:
            if r.output != output or abs(r.alpha - alpha) > ANGLE_MATCH_TOL or r.branch != branch:
                continue
            if r.protocol == "rotation" and abs(r.beta - float(beta_or_o)) <= ANGLE_MATCH_TOL:
                return r
            if r.protocol == "cnot" and r.beta_or_o == str(beta_or_o):
                return r
        raise KeyError(f"no reference row for {output} alpha={alpha} {beta_or_o} {branch}")


def load_reference_table(path: str | Path | None = None) -> ReferenceTable:
    if path is None:
        text = resources.files("onewayqc").joinpath("data").joinpath(REFERENCE_FILE).read_text(encoding="utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    reader = csv.DictReader(text.splitlines())
    if tuple(reader.fieldnames or ()) != COLUMNS:
        raise ValueError(f"reference file header must be {','.join(COLUMNS)}")
    rows = []
    for line in reader:
        try:
            row = ReferenceRow(
                protocol=line["protocol"],
                ordering=line["ordering"],
                output=line["output"],
                alpha_text=line["alpha"],
                beta_or_o=line["beta_or_O"],
                branch_text=line["branch"],
                fidelity=float(line["fidelity"]),
                sigma=float(line["sigma"]),
                colour=line["colour"] or "",
            )
        except (TypeError, ValueError, KeyError) as exc:
            raise ValueError(f"corrupt reference row {line!r}: {exc}") from None
        rows.append(row)
    return ReferenceTable(tuple(rows))


@dataclass(frozen=True)
class Comparison:
    row: ReferenceRow
    simulated: float
    projection: float | None

    @property
    def measured(self) -> float:
        return self.row.fidelity

    @property
    def delta(self) -> float:
        return self.simulated - self.row.fidelity


def compare_to_reference(results: Iterable[ProtocolResult], table: ReferenceTable) -> list[Comparison]:
    """Pair each result with its published row(s); no pass/fail judgement is made."""
    out = []
    for res in results:
        rows = table.lookup(res)
        if not rows:
            raise KeyError(f"no reference row matches result of {res.job!r} with outcomes {res.outcomes}")
        for row in rows:
            proj = bloch_projection(res.output_state, res.theory_state) if row.protocol == "rotation" else None
            out.append(Comparison(row, row.simulated_fidelity(res), proj))
    return out


def simulate_table(table: ReferenceTable, input_cluster: State | None = None, rows: Sequence[ReferenceRow] | None = None) -> list[Comparison]:
    """Run every reference row's configuration and compare, in table order."""
    out = []
    cache: dict[tuple, ProtocolResult] = {}
    for row in rows if rows is not None else table.rows:
        job = row.job()
        key = (type(job).__name__, row.ordering, row.alpha_text, row.beta_or_o, tuple(sorted(job_outcomes(job).items())))
        if key not in cache:
            cache[key] = run_rotation(job, input_cluster) if isinstance(job, RotationJob) else run_cnot(job, input_cluster)
        res = cache[key]
        proj = bloch_projection(res.output_state, res.theory_state) if row.protocol == "rotation" else None
        out.append(Comparison(row, row.simulated_fidelity(res), proj))
    return out


def job_outcomes(job: RotationJob | CnotJob) -> dict[int, int]:
    labels = (1, 2, 3) if isinstance(job, RotationJob) else (1, 4)
    return {lbl: m.outcome for lbl, m in zip(labels, job.modes)}
