"""JSON formats: complex matrices, circuits, problem files and plans.

Complex numbers are ``[re, im]`` pairs; matrices are flat row-major lists of
pairs (a nested list of rows is accepted on input).
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

import numpy as np

from .circuit import Ancilla, Circuit, Control, CostModel, GateKind, GateOp, RegisterLayout, h
from .linalg import H, X, Z, haar_unitary, kron, random_state
from .planner import (
    DQLPlan,
    DQLProblem,
    GatherBlock,
    MultiplyBlock,
    Operand,
    ProblemError,
    accounting,
)
from .synthesis import SynthesisMode

PLAN_FORMAT = "dql-plan/1"


class InputError(ValueError):
    """Malformed input file; the message names the offending field."""

    def __init__(self, message: str, field: str | None = None):
        self.field = field
        super().__init__(f"{field}: {message}" if field else message)


def complex_to_json(z: complex) -> list[float]:
    z = complex(z)
    return [z.real, z.imag]


def complex_from_json(x: Any, field: str = "value") -> complex:
    if isinstance(x, (int, float)):
        return complex(x)
    if isinstance(x, (list, tuple)) and len(x) == 2 and all(isinstance(t, (int, float)) for t in x):
        return complex(x[0], x[1])
    raise InputError(f"expected a number or [re, im], got {x!r}", field)


def matrix_to_json(m: np.ndarray) -> list[list[float]]:
    return [complex_to_json(z) for z in np.asarray(m).reshape(-1)]


def matrix_from_json(data: Any, field: str = "matrix") -> np.ndarray:
    if not isinstance(data, list) or not data:
        raise InputError("expected a non-empty list", field)
    if all(isinstance(r, list) and r and isinstance(r[0], list) for r in data):
        rows = [[complex_from_json(z, f"{field}[{i}][{j}]") for j, z in enumerate(r)] for i, r in enumerate(data)]
        if len({len(r) for r in rows}) != 1:
            raise InputError("ragged rows", field)
        return np.array(rows, dtype=complex)
    flat = [complex_from_json(z, f"{field}[{i}]") for i, z in enumerate(data)]
    dim = int(round(np.sqrt(len(flat))))
    if dim * dim != len(flat):
        raise InputError(f"{len(flat)} entries do not form a square matrix", field)
    return np.array(flat, dtype=complex).reshape(dim, dim)


def vector_to_json(v: np.ndarray) -> list[list[float]]:
    return [complex_to_json(z) for z in np.asarray(v).reshape(-1)]


def layout_to_json(lay: RegisterLayout) -> dict:
    regs: Any = len(lay.registers) if lay.is_standard else [list(r) for r in lay.registers]
    return {"n": lay.n, "registers": regs, "ancillas": [{"qubit": a.qubit, "tag": a.tag} for a in lay.ancillas]}


def layout_from_json(d: dict, field: str = "layout") -> RegisterLayout:
    try:
        n = int(d["n"])
        regs = d["registers"]
        ancs = d.get("ancillas", [])
        if isinstance(regs, int):
            return RegisterLayout.standard(n, regs, [a["tag"] for a in ancs])
        return RegisterLayout(n, tuple(tuple(r) for r in regs), tuple(Ancilla(a["qubit"], a["tag"]) for a in ancs))
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(str(exc), field) from exc


def op_to_json(op: GateOp) -> dict:
    out: dict = {
        "kind": op.kind.value,
        "targets": list(op.targets),
        "controls": [{"qubit": c.qubit, "polarity": c.polarity} for c in op.controls],
    }
    if op.matrix is not None:
        out["matrix"] = matrix_to_json(op.matrix)
    return out


def op_from_json(d: dict, field: str = "op") -> GateOp:
    try:
        ctrls = tuple(Control(int(c["qubit"]), int(c.get("polarity", 1))) for c in d.get("controls", []))
        mat = matrix_from_json(d["matrix"], f"{field}.matrix") if "matrix" in d else None
        return GateOp(GateKind(d["kind"]), tuple(d["targets"]), ctrls, mat)
    except InputError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(str(exc), field) from exc


def _expand_mcz(op: GateOp) -> list[GateOp]:
    if op.kind is GateKind.MCZ and len(op.controls) == 2:
        (t,) = op.targets
        c1, c2 = op.controls
        return [h(t), GateOp(GateKind.CCX, (t,), (c1, c2)), h(t)]
    return [op]


def circuit_to_json(c: Circuit, expand_ccz: bool = False) -> dict:
    """Circuit schema.  ``expand_ccz`` writes two-control MCZ as ``H CCX H``."""
    ops = [e for op in c.ops for e in (_expand_mcz(op) if expand_ccz else [op])]
    d = layout_to_json(c.layout)
    d.update({"ops": [op_to_json(op) for op in ops], "scale": complex_to_json(c.scale)})
    return d


def circuit_from_json(d: dict, field: str = "circuit") -> Circuit:
    if not isinstance(d, dict):
        raise InputError("expected an object", field)
    lay = layout_from_json(d, field)
    ops = [op_from_json(o, f"{field}.ops[{i}]") for i, o in enumerate(d.get("ops", []))]
    return Circuit(lay, ops, complex_from_json(d.get("scale", [1.0, 0.0]), f"{field}.scale"))


# problem files

def builtin_operator(spec: dict | str, n: int, rng: np.random.Generator, field: str) -> np.ndarray:
    """Named operators: ``H``/``X``/``Z``/``I`` on every qubit, ``CX`` on
    qubits 0->1, a Pauli label such as ``"XIX"``, or ``random`` (Haar)."""
    if isinstance(spec, str):
        spec = {"builtin": spec}
    name = spec.get("builtin")
    N = 2**n
    single = {"H": H, "X": X, "Z": Z, "I": np.eye(2, dtype=complex)}
    if name in single:
        return kron(*([single[name]] * n))
    if name == "CX":
        if n < 2:
            raise InputError("CX builtin needs n >= 2", field)
        cxm = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)
        return kron(cxm, np.eye(N // 4))
    if name == "random":
        seed = spec.get("seed")
        return haar_unitary(N, np.random.default_rng(seed) if seed is not None else rng)
    if name == "pauli":
        label = spec.get("label", "")
        if len(label) != n or set(label) - set("IXZ"):
            raise InputError(f"Pauli label must be {n} characters from I, X, Z", field)
        return kron(*[single[ch] for ch in label])
    raise InputError(f"unknown builtin {name!r}", field)


def problem_from_json(d: dict, seed: int | None = None) -> DQLProblem:
    if not isinstance(d, dict):
        raise InputError("problem file must hold a JSON object")
    if "n" not in d:
        raise InputError("missing", "n")
    n = d["n"]
    if not isinstance(n, int) or n < 1:
        raise InputError("must be a positive integer", "n")
    rng = np.random.default_rng(d.get("seed", seed))
    if "random" in d:
        r = d["random"]
        ops_data = [{"builtin": "random"}] * int(r.get("M", 2))
    else:
        ops_data = d.get("ops")
    if not isinstance(ops_data, list) or not ops_data:
        raise InputError("need a non-empty list of operators", "ops")
    ops = []
    for j, od in enumerate(ops_data):
        field = f"ops[{j}]"
        if isinstance(od, (str, dict)):
            ops.append(builtin_operator(od, n, rng, field))
        else:
            ops.append(matrix_from_json(od, field))
    N = 2**n
    vd = d.get("v", "zero")
    if vd == "zero":
        v = np.eye(N, dtype=complex)[0]
    elif vd == "uniform":
        v = np.ones(N, dtype=complex) / np.sqrt(N)
    elif vd in ("random", "random-real"):
        v = random_state(N, rng, real=vd == "random-real")
    elif isinstance(vd, list):
        v = np.array([complex_from_json(z, f"v[{i}]") for i, z in enumerate(vd)])
    else:
        raise InputError(f"unsupported value {vd!r}", "v")
    for j, u in enumerate(ops):
        if u.shape != (N, N):
            raise InputError(f"shape {u.shape}, expected {(N, N)}", f"ops[{j}]")
        if not np.allclose(u @ u.conj().T, np.eye(N), atol=1e-8, rtol=0):
            raise InputError("not unitary to 1e-8", f"ops[{j}]")
    if v.size != N:
        raise InputError(f"length {v.size}, expected {N}", "v")
    try:
        return DQLProblem(n, tuple(ops), v)
    except ProblemError as exc:
        raise InputError(str(exc), "problem") from exc


def load_json(path: str | Path) -> Any:
    text = Path(path).read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}", str(path)) from exc


def problem_to_json(p: DQLProblem) -> dict:
    return {"n": p.n, "ops": [matrix_to_json(u) for u in p.ops], "v": vector_to_json(p.v)}


# plans

def _operand_json(o: Operand) -> dict:
    return {"col": o.col, "row": o.row, "lo": o.lo, "hi": o.hi}


def _operand_from(d: dict) -> Operand:
    return Operand(d["col"], d["row"], d["lo"], d["hi"])


def plan_to_json(p: DQLPlan, decoding_budget: int = 256) -> dict:
    dec = p.decoding
    entries = []
    if dec.available:
        for e in dec.entries(decoding_budget):
            entries.append({
                "bits": e.bits,
                "insertions": [{"position": pos, "pauli": ps.label()} for pos, ps in e.insertions],
                "effective": e.descriptor,
            })
    return {
        "format": PLAN_FORMAT,
        "problem": problem_to_json(p.problem),
        "M_original": p.M_original,
        "mode": p.mode.value,
        "swaps": p.swaps,
        "layout": layout_to_json(p.layout),
        "stages": {
            "prep": circuit_to_json(p.prep),
            "vectorization": circuit_to_json(p.vectorization),
            "gathering": [circuit_to_json(c) for c in p.gathering],
            "multiplication": circuit_to_json(p.multiplication),
        },
        "blocks": [
            {
                "index": b.index, "layer": b.layer, "group": b.group,
                "left": _operand_json(b.left), "right": _operand_json(b.right), "result": _operand_json(b.result),
                "gu_registers": list(b.gu_registers), "spent": list(b.spent), "ancilla": b.ancilla,
                "split": b.split,
            }
            for b in p.blocks
        ],
        "multiplication_block": {
            "operand": _operand_json(p.vblock.operand), "register": p.vblock.register, "ancilla": p.vblock.ancilla,
        },
        "target_scale": complex_to_json(p.target_scale),
        "ledger": p.ledger.as_dict(),
        "postselection": {
            "output_register": p.output_register,
            "output_qubits": list(p.output_qubits),
            "qubits": list(p.postselect_qubits),
            "outcome": "all-zero",
        },
        "cost_model": {k: v for k, v in p.cost_model.__dict__.items()},
        "decoding": {
            "available": dec.available,
            "total": dec.size if dec.available else 0,
            "truncated": dec.available and dec.size > len(entries),
            "entries": entries,
        },
    }


def plan_from_json(d: dict) -> DQLPlan:
    if d.get("format") != PLAN_FORMAT:
        raise InputError(f"expected format {PLAN_FORMAT!r}", "format")
    try:
        pd = d["problem"]
        problem = DQLProblem(
            pd["n"],
            tuple(matrix_from_json(u, f"problem.ops[{i}]") for i, u in enumerate(pd["ops"])),
            np.array([complex_from_json(z) for z in pd["v"]]),
        )
        st = d["stages"]
        blocks = tuple(
            GatherBlock(
                b["index"], b["layer"], b["group"],
                _operand_from(b["left"]), _operand_from(b["right"]), _operand_from(b["result"]),
                tuple(b["gu_registers"]), tuple(b["spent"]), b["ancilla"],
            )
            for b in d["blocks"]
        )
        mb = d["multiplication_block"]
        plan = DQLPlan(
            problem=problem,
            mode=SynthesisMode(d["mode"]),
            swaps=bool(d["swaps"]),
            layout=layout_from_json(d["layout"]),
            prep=circuit_from_json(st["prep"], "stages.prep"),
            vectorization=circuit_from_json(st["vectorization"], "stages.vectorization"),
            gathering=tuple(circuit_from_json(c, f"stages.gathering[{i}]") for i, c in enumerate(st["gathering"])),
            multiplication=circuit_from_json(st["multiplication"], "stages.multiplication"),
            blocks=blocks,
            vblock=MultiplyBlock(_operand_from(mb["operand"]), mb["register"], mb["ancilla"]),
            target_scale=complex_from_json(d["target_scale"]),
            M_original=d["M_original"],
            cost_model=CostModel(**d.get("cost_model", {})),
        )
    except InputError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed plan: {exc}") from exc
    return DQLPlan(**{**plan.__dict__, "ledger": accounting(plan)})


def dumps(obj: Any) -> str:
    return json.dumps(obj, indent=1, sort_keys=True)
