"""Command-line interface.

Every command emits schema-versioned records. Human-readable tables go to
standard output; ``--format json`` writes JSON lines and ``--format csv``
writes CSV, either to ``--out`` or to standard output.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence


from . import cluster, lab
from .noise import WhiteNoiseModel, calibrate_white_noise
from .protocols import (
    CnotJob,
    ProtocolResult,
    RotationJob,
    cnot_branches,
    control_populations,
    rotation_branches,
    run_cnot,
    run_rotation,
    sample_cnot,
    sample_rotation,
    target_fidelity,
)
from .qstate import X, Y, Z, expectation
from .reference import ReferenceTable, load_reference_table, simulate_table
from .tomography import (
    bloch_from_state,
    bloch_projection,
    cluster_overlap,
    stabilizer_expectations,
    stabilizer_fidelity,
)

SCHEMA = "onewayqc.record/1"
SCHEMA_FILE = "record_schema_v1.json"
EQUIVALENCE_TOL = 1e-10
STABILIZER_TOL = 1e-10


def load_schema() -> dict:
    text = resources.files("onewayqc").joinpath("data").joinpath(SCHEMA_FILE).read_text(encoding="utf-8")
    return json.loads(text)


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str
    ordering: str | None = None
    alpha: float | None = None
    beta: float | None = None
    o_choice: str | None = None
    branch: tuple[int, ...] | None = None
    input_bit: int = 0
    samples: int | None = None
    seed: int | None = None
    noise_fidelity: float | None = None
    out: Path | None = None
    fmt: str = "table"

    def validate(self) -> "RunConfig":
        if self.command == "cnot" and self.beta is not None:
            raise ConfigError("cnot takes only --alpha; the C-NOT has no beta angle")
        if self.samples is not None:
            if self.seed is None:
                raise ConfigError("--seed is required whenever --sample is used")
            if self.branch is not None:
                raise ConfigError("--branch postselects outcomes; drop it when sampling with --sample")
            if self.samples <= 0:
                raise ConfigError("--sample must be a positive number of shots")
        if self.noise_fidelity is not None and not 1 / 16 <= self.noise_fidelity <= 1:
            raise ConfigError("--noise-fidelity must lie in [0.0625, 1]")
        for name in ("alpha", "beta", "noise_fidelity"):
            val = getattr(self, name)
            if val is not None and not math.isfinite(val):
                raise ConfigError(f"--{name.replace('_', '-')} must be finite")
        return self

    def noise_model(self) -> WhiteNoiseModel | None:
        return None if self.noise_fidelity is None else calibrate_white_noise(self.noise_fidelity)

    def input_cluster(self):
        model = self.noise_model()
        return None if model is None else model.cluster()


# --- record helpers -------------------------------------------------------------


def _num(x) -> float:
    x = float(x)
    if not math.isfinite(x):
        raise ValueError("records must contain finite numbers only")
    return x


def _vec(b) -> list[float]:
    return [_num(c) for c in b.as_list()]


def _noise_block(model: WhiteNoiseModel | None) -> dict | None:
    if model is None:
        return None
    return {"model": "white", "p": _num(model.p), "cluster_fidelity": _num(model.cluster_fidelity)}


def _lab_block(res: ProtocolResult) -> dict:
    return {
        "context": lab.result_context(res),
        "measurements": [m.to_dict() for m in lab.result_measurements(res)],
        "setting": lab.result_setting(res).to_dict(),
    }


def _reference_block(res: ProtocolResult, table: ReferenceTable | None) -> list[dict]:
    if table is None:
        return []
    out = []
    for row in table.lookup(res):
        sim = row.simulated_fidelity(res)
        out.append(
            {
                "row": row.label,
                "measured_fidelity": row.fidelity,
                "measured_sigma": row.sigma,
                "simulated": _num(sim),
                "delta": _num(sim - row.fidelity),
            }
        )
    return out


def rotation_record(res: ProtocolResult, command: str, table=None, model=None, shot=None) -> dict:
    job: RotationJob = res.job
    o = res.outcomes
    rec = {"schema": SCHEMA, "command": command}
    if shot is not None:
        rec["shot"] = shot
    rec.update(
        {
            "protocol": "rotation",
            "ordering": job.ordering,
            "output_qubit": job.output_qubit.value,
            "alpha": _num(job.alpha),
            "beta": _num(job.beta),
            "branch": {"s1": o[1], "s2": o[2], "s3": o[3]},
            "probability": _num(res.probability),
            "fidelity": _num(res.fidelity),
            "corrected_fidelity": _num(res.corrected_fidelity),
            "frame": {"x": res.frame.x, "z": res.frame.z},
            "bloch": _vec(bloch_from_state(res.output_state)),
            "theory_bloch": _vec(bloch_from_state(res.theory_state)),
            "projection": _num(bloch_projection(res.output_state, res.theory_state)),
            "noise": _noise_block(model),
            "reference": _reference_block(res, table),
            "lab": _lab_block(res),
        }
    )
    return rec


def cnot_record(res: ProtocolResult, command: str, table=None, model=None, shot=None) -> dict:
    job: CnotJob = res.job
    o = res.outcomes
    p0, p1 = control_populations(res)
    if max(p0, p1) > 1 - 1e-9:
        control_output = "|0>" if p0 > p1 else "|1>"
        tfid = _num(target_fidelity(res))
    else:
        control_output = "superposition"
        tfid = None
    rec = {"schema": SCHEMA, "command": command}
    if shot is not None:
        rec["shot"] = shot
    rec.update(
        {
            "protocol": "cnot",
            "ordering": "c",
            "o": job.o_choice.value,
            "alpha": _num(job.alpha),
            "branch": {"s1": o[1], "s4": o[4]},
            "probability": _num(res.probability),
            "fidelity": _num(res.fidelity),
            "corrected_fidelity": _num(res.corrected_fidelity),
            "control_output": control_output,
            "control_populations": [_num(p0), _num(p1)],
            "target_fidelity": tfid,
            "conditional_target_fidelity": {
                str(c): _num(target_fidelity(res, c)) for c, p in ((0, p0), (1, p1)) if p > 1e-9
            },
            "frames": {str(k): {"x": f.x, "z": f.z} for k, f in sorted(res.frames.items())},
            "noise": _noise_block(model),
            "reference": _reference_block(res, table),
            "lab": _lab_block(res),
        }
    )
    return rec


# --- output --------------------------------------------------------------------


def _flatten(d: dict, prefix: str = "") -> dict:
    flat = {}
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            flat.update(_flatten(v, key + "."))
        elif isinstance(v, list) and v and isinstance(v[0], dict):
            flat[key] = json.dumps(v, sort_keys=True)
        elif isinstance(v, list):
            flat[key] = " ".join(str(x) for x in v)
        elif v is None:
            flat[key] = ""
        else:
            flat[key] = v
    return flat


def format_json(records: Sequence[dict]) -> str:
    return "".join(json.dumps(r, sort_keys=True, allow_nan=False) + "\n" for r in records)


def format_csv(records: Sequence[dict]) -> str:
    flat = [_flatten(r) for r in records]
    columns: list[str] = []
    for r in flat:
        for k in r:
            if k not in columns:
                columns.append(k)
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n")
    writer.writeheader()
    for r in flat:
        writer.writerow(r)
    return buf.getvalue()


def _cell(v) -> str:
    if isinstance(v, float):
        return f"{v + 0.0:.6f}".replace("-0.000000", "0.000000")
    if isinstance(v, list):
        return "(" + ", ".join(_cell(x) for x in v) + ")"
    if isinstance(v, dict):
        return "".join(str(x) for x in v.values())
    return "" if v is None else str(v)


def format_table(rows: Sequence[dict], columns: Sequence[str], title: str | None = None) -> str:
    cells = [[_cell(r.get(c)) for c in columns] for r in rows]
    widths = [max([len(c)] + [len(row[i]) for row in cells]) for i, c in enumerate(columns)]
    lines = []
    if title:
        lines.append(title)
    lines.append("  ".join(c.ljust(w) for c, w in zip(columns, widths)).rstrip())
    lines.append("  ".join("-" * w for w in widths))
    for row in cells:
        lines.append("  ".join(v.ljust(w) for v, w in zip(row, widths)).rstrip())
    return "\n".join(lines) + "\n"


def _measured_column(rows: Iterable[dict]) -> None:
    for r in rows:
        refs = r.get("reference") or []
        r["measured"] = "; ".join(f"{x['measured_fidelity']:.3f}+-{x['measured_sigma']:.3f}" for x in refs)


def emit(records: list[dict], cfg: RunConfig, table_text: str, stdout) -> None:
    fmt = cfg.fmt
    if cfg.out is not None:
        if fmt == "table":
            fmt = "csv" if cfg.out.suffix.lower() == ".csv" else "json"
        text = format_json(records) if fmt == "json" else format_csv(records)
        cfg.out.write_text(text, encoding="utf-8")
        stdout.write(table_text)
        return
    if fmt == "json":
        stdout.write(format_json(records))
    elif fmt == "csv":
        stdout.write(format_csv(records))
    else:
        stdout.write(table_text)


# --- commands ------------------------------------------------------------------


def cmd_verify_cluster(cfg: RunConfig, stdout) -> int:
    model = cfg.noise_model()
    rho = model.cluster() if model else cluster.build_c4().to_density()
    expected = model.cluster_fidelity if model else 1.0
    records = []
    ok = True
    for name in "abc":
        f = cluster.equivalence_fidelity(name)
        passed = abs(f - 1) <= EQUIVALENCE_TOL
        ok &= passed
        records.append({"schema": SCHEMA, "command": "verify-cluster", "protocol": "cluster", "check": f"equivalence-{name}",
                        "ordering": name, "value": _num(f), "expected": 1.0, "pass": passed})
    for label, val in stabilizer_expectations(rho).items():
        records.append({"schema": SCHEMA, "command": "verify-cluster", "protocol": "cluster", "check": "stabilizer",
                        "element": label, "value": _num(val)})
    avg = stabilizer_fidelity(rho)
    overlap = cluster_overlap(rho)
    passed = abs(avg - expected) <= STABILIZER_TOL and abs(avg - overlap) <= STABILIZER_TOL
    ok &= passed
    records.append({"schema": SCHEMA, "command": "verify-cluster", "protocol": "cluster", "check": "stabilizer-average",
                    "value": _num(avg), "expected": _num(expected), "projector_overlap": _num(overlap), "pass": passed,
                    "noise": _noise_block(model)})
    text = format_table(records, ["check", "ordering", "element", "value", "expected", "pass"], "cluster verification")
    text += f"overall: {'PASS' if ok else 'FAIL'}\n"
    emit(records, cfg, text, stdout)
    return 0 if ok else 1


def _rotation_results(cfg: RunConfig):
    rho = cfg.input_cluster()
    if cfg.samples is not None:
        return [(i, res) for i, (_, res) in enumerate(sample_rotation(cfg.ordering, cfg.alpha, cfg.beta, cfg.samples, cfg.seed, rho))]
    if cfg.branch is not None:
        s2, s3 = cfg.branch
        jobs = [RotationJob.postselected(cfg.ordering, cfg.alpha, cfg.beta, s2, s3, cfg.input_bit)]
    else:
        jobs = list(rotation_branches(cfg.ordering, cfg.alpha, cfg.beta, cfg.input_bit))
    return [(None, run_rotation(j, rho)) for j in jobs]


def cmd_rotate(cfg: RunConfig, stdout, table: ReferenceTable | None = None) -> int:
    table = table if table is not None else load_reference_table()
    model = cfg.noise_model()
    records = [rotation_record(res, "rotate", table, model, shot) for shot, res in _rotation_results(cfg)]
    _measured_column(records)
    cols = (["shot"] if cfg.samples else []) + ["branch", "probability", "fidelity", "corrected_fidelity", "bloch", "measured"]
    title = f"rotation ordering={cfg.ordering} alpha={cfg.alpha:.6f} beta={cfg.beta:.6f}"
    text = format_table(records, cols, title)
    for r in records:
        r.pop("measured")
    emit(records, cfg, text, stdout)
    return 0


def _cnot_results(cfg: RunConfig):
    rho = cfg.input_cluster()
    if cfg.samples is not None:
        return [(i, res) for i, (_, res) in enumerate(sample_cnot(cfg.o_choice, cfg.alpha, cfg.samples, cfg.seed, rho))]
    if cfg.branch is not None:
        jobs = [CnotJob.postselected(cfg.o_choice, cfg.alpha, *cfg.branch)]
    else:
        jobs = list(cnot_branches(cfg.o_choice, cfg.alpha))
    return [(None, run_cnot(j, rho)) for j in jobs]


def cmd_cnot(cfg: RunConfig, stdout, table: ReferenceTable | None = None) -> int:
    table = table if table is not None else load_reference_table()
    model = cfg.noise_model()
    records = [cnot_record(res, "cnot", table, model, shot) for shot, res in _cnot_results(cfg)]
    _measured_column(records)
    cols = (["shot"] if cfg.samples else []) + ["branch", "probability", "fidelity", "control_output", "target_fidelity", "measured"]
    text = format_table(records, cols, f"C-NOT O={cfg.o_choice} alpha={cfg.alpha:.6f}")
    for r in records:
        r.pop("measured")
    emit(records, cfg, text, stdout)
    return 0


def _grid(steps: int) -> list[float]:
    return [-math.pi + 2 * math.pi * k / steps for k in range(steps)]


def cmd_sweep(cfg: RunConfig, stdout, alpha_steps: int, beta_steps: int, weights: Sequence[float] | None) -> int:
    models: list[WhiteNoiseModel | None]
    if weights:
        models = [WhiteNoiseModel(p) for p in weights]
    else:
        models = [cfg.noise_model()]
    records = []
    for model in models:
        rho = None if model is None else model.cluster()
        for alpha in _grid(alpha_steps):
            if cfg.ordering == "c":
                for job in cnot_branches(cfg.o_choice, alpha):
                    records.append(cnot_record(run_cnot(job, rho), "sweep", None, model))
                continue
            for beta in _grid(beta_steps):
                for job in rotation_branches(cfg.ordering, alpha, beta, cfg.input_bit):
                    records.append(rotation_record(run_rotation(job, rho), "sweep", None, model))
    for r in records:
        r["p"] = r["noise"]["p"] if r["noise"] else 1.0
    cols = ["p", "alpha"] + (["beta"] if cfg.ordering != "c" else ["o"]) + ["branch", "fidelity", "corrected_fidelity"]
    text = format_table(records, cols, f"sweep ordering={cfg.ordering}")
    for r in records:
        r.pop("p")
    emit(records, cfg, text, stdout)
    return 0


def reproduce_records(table: ReferenceTable, model: WhiteNoiseModel | None) -> list[dict]:
    rho = None if model is None else model.cluster()
    records = []
    for comp in simulate_table(table, rho):
        row = comp.row
        records.append(
            {
                "schema": SCHEMA,
                "command": "reproduce-tables",
                "protocol": row.protocol,
                "ordering": row.ordering,
                "output": row.output,
                "alpha_text": row.alpha_text,
                "beta_or_O": row.beta_or_o,
                "branch": row.branch,
                "colour": row.colour,
                "simulated": _num(comp.simulated),
                "projection": None if comp.projection is None else _num(comp.projection),
                "measured_fidelity": row.fidelity,
                "measured_sigma": row.sigma,
                "delta": _num(comp.delta),
                "noise": _noise_block(model),
            }
        )
    return records


def cmd_reproduce_tables(cfg: RunConfig, stdout, reference: Path | None = None) -> int:
    try:
        table = load_reference_table(reference)
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot read reference data: {exc}") from None
    records = reproduce_records(table, cfg.noise_model())
    for r, row in zip(records, table):
        r["measured"] = f"{r['measured_fidelity']:.3f}+-{r['measured_sigma']:.3f}"
        r["outcomes"] = row.branch_text
    text = format_table([r for r in records if r["protocol"] == "rotation"],
                        ["output", "alpha_text", "beta_or_O", "outcomes", "colour", "simulated", "measured", "delta"],
                        "single-qubit rotations: simulated vs measured output fidelity")
    text += "\n" + format_table([r for r in records if r["protocol"] == "cnot"],
                                ["beta_or_O", "alpha_text", "outcomes", "simulated", "measured", "delta"],
                                "C-NOT target: simulated vs measured output fidelity")
    for r in records:
        r.pop("measured")
        r.pop("outcomes")
    emit(records, cfg, text, stdout)
    return 0


def cmd_tomography(cfg: RunConfig, stdout) -> int:
    model = cfg.noise_model()
    rho = None if model is None else model.cluster()
    if cfg.ordering is not None and cfg.alpha is not None:
        s2, s3 = cfg.branch if cfg.branch is not None else (0, 0)
        jobs = [RotationJob.postselected(cfg.ordering, cfg.alpha, cfg.beta or 0.0, s2, s3, cfg.input_bit)]
    else:
        seen, jobs = set(), []
        for row in load_reference_table().select("rotation"):
            key = (row.ordering, row.alpha_text, row.beta_or_o, row.branch_text)
            if key not in seen:
                seen.add(key)
                jobs.append(row.job())
    records = []
    for job in jobs:
        res = run_rotation(job, rho)
        rec = rotation_record(res, "tomography", load_reference_table(), model)
        paulis = {"X": X, "Y": Y, "Z": Z}
        rec["stokes"] = {
            name: {
                "expectation": _num(expectation(res.output_state, paulis[name])),
                "setting": lab.to_lab(m, "rotation").to_dict(),
            }
            for name, m in lab.tomography_measurements(job.output_qubit).items()
        }
        records.append(rec)
    text = format_table(records, ["output_qubit", "alpha", "beta", "branch", "bloch", "theory_bloch", "projection", "fidelity"],
                        "output Bloch vectors")
    emit(records, cfg, text, stdout)
    return 0


# --- argument parsing ----------------------------------------------------------


def _bits(n: int):
    def parse(text: str) -> tuple[int, ...]:
        if len(text) != n or set(text) - {"0", "1"}:
            raise argparse.ArgumentTypeError(f"expected {n} bits such as {'0' * n}, got {text!r}")
        return tuple(int(c) for c in text)

    return parse


def _u64(text: str) -> int:
    v = int(text)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", dest="fmt", choices=["table", "json", "csv"], default="table")
    common.add_argument("--out", type=Path, help="write machine-readable records to this file")
    common.add_argument("--noise-fidelity", type=float, help="mix the cluster with white noise to this stabilizer fidelity")
    common.add_argument("--degrees", action="store_true", help="angles are given in degrees")

    p = argparse.ArgumentParser(prog="onewayqc", description="One-way quantum computation on two-photon cluster states")
    sub = p.add_subparsers(dest="command", required=True)

    sub.add_parser("verify-cluster", parents=[common], help="check the cluster equivalences and stabilizers")

    rot = sub.add_parser("rotate", parents=[common], help="single-qubit rotation")
    rot.add_argument("--ordering", choices=["a", "b"], default="a")
    rot.add_argument("--alpha", type=float, default=0.0)
    rot.add_argument("--beta", type=float, default=0.0)
    rot.add_argument("--branch", type=_bits(2), help="postselect outcomes s2 s3, e.g. 01")
    rot.add_argument("--input", choices=["plus", "minus"], default="plus", help="input from the first outcome")
    rot.add_argument("--sample", type=int, help="number of sampled runs")
    rot.add_argument("--seed", type=_u64)

    cn = sub.add_parser("cnot", parents=[common], help="equatorial C-NOT")
    cn.add_argument("--o", dest="o_choice", choices=["I", "H"], required=True)
    cn.add_argument("--alpha", type=float, required=True)
    cn.add_argument("--branch", type=_bits(2), help="postselect outcomes s1 s4, e.g. 01")
    cn.add_argument("--sample", type=int)
    cn.add_argument("--seed", type=_u64)

    sw = sub.add_parser("sweep", parents=[common], help="grid over angles (and optionally noise)")
    sw.add_argument("--ordering", choices=["a", "b", "c"], default="a")
    sw.add_argument("--o", dest="o_choice", choices=["I", "H"], default="H")
    sw.add_argument("--alpha-steps", type=int, default=8)
    sw.add_argument("--beta-steps", type=int, default=8)
    sw.add_argument("--noise-weights", help="comma-separated cluster weights p to sweep")

    rt = sub.add_parser("reproduce-tables", parents=[common], help="simulate every row of the reference data")
    rt.add_argument("--reference", type=Path, help="alternative reference CSV")

    tm = sub.add_parser("tomography", parents=[common], help="output Bloch vectors for plotting")
    tm.add_argument("--ordering", choices=["a", "b"])
    tm.add_argument("--alpha", type=float)
    tm.add_argument("--beta", type=float)
    tm.add_argument("--branch", type=_bits(2))
    return p


def _config(args) -> RunConfig:
    scale = math.pi / 180 if args.degrees else 1.0
    alpha = getattr(args, "alpha", None)
    beta = getattr(args, "beta", None)
    return RunConfig(
        command=args.command,
        ordering=getattr(args, "ordering", None),
        alpha=None if alpha is None else alpha * scale,
        beta=None if beta is None else beta * scale,
        o_choice=getattr(args, "o_choice", None),
        branch=getattr(args, "branch", None),
        input_bit=1 if getattr(args, "input", "plus") == "minus" else 0,
        samples=getattr(args, "sample", None),
        seed=getattr(args, "seed", None),
        noise_fidelity=args.noise_fidelity,
        out=args.out,
        fmt=args.fmt,
    ).validate()


def main(argv: Sequence[str] | None = None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _config(args)
        if args.command == "verify-cluster":
            return cmd_verify_cluster(cfg, stdout)
        if args.command == "rotate":
            return cmd_rotate(cfg, stdout)
        if args.command == "cnot":
            return cmd_cnot(cfg, stdout)
        if args.command == "sweep":
            weights = None
            if args.noise_weights:
                weights = [float(x) for x in args.noise_weights.split(",")]
            if args.alpha_steps <= 0 or args.beta_steps <= 0:
                raise ConfigError("--alpha-steps and --beta-steps must be positive")
            return cmd_sweep(cfg, stdout, args.alpha_steps, args.beta_steps, weights)
        if args.command == "reproduce-tables":
            return cmd_reproduce_tables(cfg, stdout, args.reference)
        if args.command == "tomography":
            return cmd_tomography(cfg, stdout)
    except ConfigError as exc:
        parser.error(str(exc))
    except ValueError as exc:
        parser.error(str(exc))
    return 2


if __name__ == "__main__":
    sys.exit(main())
