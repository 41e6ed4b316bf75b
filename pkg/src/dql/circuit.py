"""Gate-level circuit IR: register layouts, gate ops, layering depth.

Qubit 0 is the leftmost tensor factor (most significant bit of a flat
amplitude index).  Registers are blocks of ``n`` qubits; ancillas carry a
purpose tag.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

from .linalg import ATOL_UNITARY, H, X, Z, is_unitary

UNITARY_CAP = 12
SIM_CAP = 22


class CapacityError(RuntimeError):
    """A requested dense object exceeds the configured qubit cap."""


class LayoutError(ValueError):
    pass


class GateKind(str, Enum):
    H = "Hadamard"
    X = "X"
    Z = "Z"
    CX = "CX"
    CZ = "CZ"
    CH = "ControlledHadamard"
    CCX = "CCX"
    MCZ = "MultiControlledZ0"
    DIAGONAL = "DiagonalUnitary"
    UNITARY = "GenericUnitary"
    SWAP = "Swap"
    REGISTER_SWAP = "RegisterSwap"


# number of controls each kind requires (None: any number)
_CONTROL_COUNT = {
    GateKind.H: 0, GateKind.X: 0, GateKind.Z: 0,
    GateKind.CX: 1, GateKind.CZ: 1, GateKind.CH: 1, GateKind.CCX: 2,
    GateKind.MCZ: None, GateKind.DIAGONAL: None, GateKind.UNITARY: None,
    GateKind.SWAP: 0, GateKind.REGISTER_SWAP: 0,
}
_MATRIX_KINDS = (GateKind.DIAGONAL, GateKind.UNITARY)


@dataclass(frozen=True)
class Control:
    qubit: int
    polarity: int = 1


@dataclass(frozen=True, eq=False)
class GateOp:
    kind: GateKind
    targets: tuple[int, ...]
    controls: tuple[Control, ...] = ()
    matrix: np.ndarray | None = None

    def __post_init__(self):
        kind = GateKind(self.kind)
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "targets", tuple(int(t) for t in self.targets))
        ctrls = tuple(c if isinstance(c, Control) else Control(*c) for c in self.controls)
        object.__setattr__(self, "controls", ctrls)
        tq = set(self.targets)
        cq = {c.qubit for c in ctrls}
        if len(tq) != len(self.targets) or len(cq) != len(ctrls):
            raise ValueError(f"{kind.value}: repeated qubit")
        if tq & cq:
            raise ValueError(f"{kind.value}: targets and controls overlap")
        if any(c.polarity not in (0, 1) for c in ctrls):
            raise ValueError(f"{kind.value}: control polarity must be 0 or 1")
        need = _CONTROL_COUNT[kind]
        if need is not None and len(ctrls) != need:
            raise ValueError(f"{kind.value} needs {need} controls, got {len(ctrls)}")
        ntarg = {GateKind.SWAP: 2}.get(kind, None)
        if kind is GateKind.REGISTER_SWAP:
            if not self.targets or len(self.targets) % 2:
                raise ValueError("RegisterSwap needs an even, nonzero number of targets")
        elif kind in _MATRIX_KINDS:
            if self.matrix is None:
                raise ValueError(f"{kind.value} requires a matrix")
            m = np.asarray(self.matrix, dtype=complex)
            dim = 2 ** len(self.targets)
            if m.shape != (dim, dim):
                raise ValueError(f"{kind.value}: matrix shape {m.shape} does not match {len(self.targets)} targets")
            if not is_unitary(m, ATOL_UNITARY):
                raise ValueError(f"{kind.value}: matrix is not unitary")
            if kind is GateKind.DIAGONAL and not np.allclose(m, np.diag(np.diagonal(m)), atol=0, rtol=0):
                raise ValueError("DiagonalUnitary matrix has off-diagonal entries")
            m = m.copy()
            m.setflags(write=False)
            object.__setattr__(self, "matrix", m)
        elif len(self.targets) != (ntarg or 1):
            raise ValueError(f"{kind.value} takes {ntarg or 1} target(s)")
        if kind not in _MATRIX_KINDS and self.matrix is not None:
            raise ValueError(f"{kind.value} does not take a matrix")

    @property
    def qubits(self) -> tuple[int, ...]:
        return tuple(c.qubit for c in self.controls) + self.targets

    def remap(self, mapping) -> GateOp:
        return GateOp(
            self.kind,
            tuple(mapping[t] for t in self.targets),
            tuple(Control(mapping[c.qubit], c.polarity) for c in self.controls),
            self.matrix,
        )

    def same_as(self, other: GateOp) -> bool:
        if (self.kind, self.targets, self.controls) != (other.kind, other.targets, other.controls):
            return False
        if self.matrix is None or other.matrix is None:
            return self.matrix is other.matrix
        return bool(np.array_equal(self.matrix, other.matrix))

    def __repr__(self) -> str:
        ctrl = ",".join(f"{c.qubit}{'' if c.polarity else 'o'}" for c in self.controls)
        return f"{self.kind.value}({ctrl + '->' if ctrl else ''}{','.join(map(str, self.targets))})"


def base_matrix(op: GateOp) -> np.ndarray:
    """Matrix applied to the targets when all controls are satisfied."""
    kind = op.kind
    if kind in (GateKind.H, GateKind.CH):
        return H
    if kind in (GateKind.X, GateKind.CX, GateKind.CCX):
        return X
    if kind in (GateKind.Z, GateKind.CZ, GateKind.MCZ):
        return Z
    if kind in _MATRIX_KINDS:
        return op.matrix
    if kind is GateKind.SWAP:
        return np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex)
    raise ValueError(f"no base matrix for {kind.value}")


# gate constructors

def h(q: int) -> GateOp:
    return GateOp(GateKind.H, (q,))


def x(q: int) -> GateOp:
    return GateOp(GateKind.X, (q,))


def z(q: int) -> GateOp:
    return GateOp(GateKind.Z, (q,))


def cx(c: int, t: int, polarity: int = 1) -> GateOp:
    return GateOp(GateKind.CX, (t,), (Control(c, polarity),))


def cz(c: int, t: int) -> GateOp:
    return GateOp(GateKind.CZ, (t,), (Control(c),))


def ch(c: int, t: int) -> GateOp:
    return GateOp(GateKind.CH, (t,), (Control(c),))


def ccx(c1: int, c2: int, t: int, polarities: tuple[int, int] = (1, 1)) -> GateOp:
    return GateOp(GateKind.CCX, (t,), (Control(c1, polarities[0]), Control(c2, polarities[1])))


def mcz(target: int, controls: Iterable, polarity: int = 0) -> GateOp:
    """Z on ``target`` controlled on ``controls``.

    Bare qubit ids get ``polarity`` (controls-on-zero by default); pass
    ``(qubit, polarity)`` pairs or ``Control`` objects to mix polarities.
    """
    ctrls = []
    for c in controls:
        if isinstance(c, Control):
            ctrls.append(c)
        elif isinstance(c, tuple):
            ctrls.append(Control(*c))
        else:
            ctrls.append(Control(int(c), polarity))
    return GateOp(GateKind.MCZ, (target,), tuple(ctrls))


def diagonal(targets: Sequence[int], diag, controls: Sequence = ()) -> GateOp:
    return GateOp(GateKind.DIAGONAL, tuple(targets), tuple(controls), np.diag(np.asarray(diag, dtype=complex)))


def unitary_gate(targets: Sequence[int], matrix, controls: Sequence = ()) -> GateOp:
    return GateOp(GateKind.UNITARY, tuple(targets), tuple(controls), np.asarray(matrix, dtype=complex))


def swap(a: int, b: int) -> GateOp:
    return GateOp(GateKind.SWAP, (a, b))


def add_control(op: GateOp, qubit: int, polarity: int = 1) -> GateOp:
    """The same gate with one more control, promoting the kind where needed."""
    c = Control(qubit, polarity)
    promote = {GateKind.H: GateKind.CH, GateKind.X: GateKind.CX, GateKind.Z: GateKind.CZ,
               GateKind.CX: GateKind.CCX, GateKind.CZ: GateKind.MCZ}
    kind = op.kind
    if kind in promote:
        return GateOp(promote[kind], op.targets, op.controls + (c,))
    if kind in (GateKind.MCZ, GateKind.DIAGONAL, GateKind.UNITARY):
        return GateOp(kind, op.targets, op.controls + (c,), op.matrix)
    if kind is GateKind.SWAP:
        return GateOp(GateKind.UNITARY, op.targets, op.controls + (c,), base_matrix(op))
    if kind is GateKind.CH:
        return GateOp(GateKind.UNITARY, op.targets, op.controls + (c,), H)
    raise ValueError(f"cannot add a control to {kind.value}")


def ry(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def expand_controlled_hadamard(op: GateOp) -> list[GateOp]:
    """CH as ``Ry(-pi/4)`` on the target, then CZ, then ``Ry(pi/4)``."""
    if op.kind is not GateKind.CH:
        raise ValueError("not a ControlledHadamard")
    (c,) = op.controls
    (t,) = op.targets
    if c.polarity != 1:
        raise ValueError("expansion assumes a positive control")
    return [unitary_gate((t,), ry(-np.pi / 4)), cz(c.qubit, t), unitary_gate((t,), ry(np.pi / 4))]


@dataclass(frozen=True)
class Ancilla:
    qubit: int
    tag: str


@dataclass(frozen=True)
class RegisterLayout:
    """Qubit allocation: ``registers[r]`` lists the qubit ids of register ``r``."""

    n: int
    registers: tuple[tuple[int, ...], ...]
    ancillas: tuple[Ancilla, ...] = ()

    def __post_init__(self):
        regs = tuple(tuple(int(q) for q in r) for r in self.registers)
        object.__setattr__(self, "registers", regs)
        object.__setattr__(self, "ancillas", tuple(self.ancillas))
        if any(len(r) != self.n for r in regs):
            raise LayoutError(f"every register must hold {self.n} qubits")
        ids = [q for r in regs for q in r] + [a.qubit for a in self.ancillas]
        if sorted(ids) != list(range(len(ids))):
            raise LayoutError("qubit ids must cover 0..q-1 exactly once")

    @classmethod
    def standard(cls, n: int, registers: int, ancilla_tags: Sequence[str] = ()) -> RegisterLayout:
        regs = tuple(tuple(range(r * n, (r + 1) * n)) for r in range(registers))
        base = n * registers
        return cls(n, regs, tuple(Ancilla(base + i, tag) for i, tag in enumerate(ancilla_tags)))

    @property
    def num_qubits(self) -> int:
        return self.n * len(self.registers) + len(self.ancillas)

    @property
    def is_standard(self) -> bool:
        return self == RegisterLayout.standard(self.n, len(self.registers), [a.tag for a in self.ancillas])

    def register(self, r: int) -> tuple[int, ...]:
        if not 0 <= r < len(self.registers):
            raise LayoutError(f"register {r} does not exist")
        return self.registers[r]

    def ancilla_qubits(self, tag: str | None = None) -> tuple[int, ...]:
        return tuple(a.qubit for a in self.ancillas if tag is None or a.tag == tag)


@dataclass(frozen=True, eq=False)
class Circuit:
    layout: RegisterLayout
    ops: tuple[GateOp, ...] = ()
    scale: complex = 1.0

    def __post_init__(self):
        object.__setattr__(self, "ops", tuple(self.ops))
        object.__setattr__(self, "scale", complex(self.scale))
        nq = self.layout.num_qubits
        for op in self.ops:
            if any(not 0 <= q < nq for q in op.qubits):
                raise LayoutError(f"{op!r} addresses a qubit outside the {nq}-qubit layout")

    @property
    def num_qubits(self) -> int:
        return self.layout.num_qubits

    def with_ops(self, ops: Iterable[GateOp]) -> Circuit:
        return Circuit(self.layout, tuple(ops), self.scale)

    def gate_counts(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for op in self.ops:
            counts[op.kind.value] = counts.get(op.kind.value, 0) + 1
        return counts

    def same_as(self, other: Circuit) -> bool:
        return (
            self.layout == other.layout
            and self.scale == other.scale
            and len(self.ops) == len(other.ops)
            and all(a.same_as(b) for a, b in zip(self.ops, other.ops))
        )


def layers(c: Circuit) -> list[list[GateOp]]:
    """Greedy ASAP layering; overlapping ops keep their relative order."""
    ready: dict[int, int] = {}
    out: list[list[GateOp]] = []
    for op in c.ops:
        layer = max((ready.get(q, 0) for q in op.qubits), default=0)
        if layer == len(out):
            out.append([])
        out[layer].append(op)
        for q in op.qubits:
            ready[q] = layer + 1
    return out


def depth(c: Circuit) -> int:
    return len(layers(c))


def unitary(c: Circuit, cap: int = UNITARY_CAP) -> np.ndarray:
    """Full ``2^q x 2^q`` matrix of the circuit, including ``scale``."""
    from .kernels import apply_op

    q = c.num_qubits
    if q > cap:
        raise CapacityError(f"unitary extraction of {q} qubits exceeds cap {cap}")
    dim = 2**q
    psi = np.eye(dim, dtype=complex).reshape((2,) * q + (dim,))
    for op in c.ops:
        psi = apply_op(psi, op)
    return psi.reshape(dim, dim) * c.scale


def compose(a: Circuit, b: Circuit) -> Circuit:
    """``a`` followed by ``b`` on the same layout."""
    if a.layout != b.layout:
        raise LayoutError("compose needs identical layouts")
    return Circuit(a.layout, a.ops + b.ops, a.scale * b.scale)


def tensor(a: Circuit, b: Circuit) -> Circuit:
    """``a`` on the leading qubits, ``b`` on the following ones."""
    if a.layout.n != b.layout.n:
        raise LayoutError("tensor needs equal register width")
    off = a.num_qubits
    regs = tuple(tuple(q + off for q in r) for r in b.layout.registers)
    ancs = tuple(Ancilla(x.qubit + off, x.tag) for x in b.layout.ancillas)
    layout = RegisterLayout(a.layout.n, a.layout.registers + regs, a.layout.ancillas + ancs)
    shift = {q: q + off for q in range(b.num_qubits)}
    return Circuit(layout, a.ops + tuple(op.remap(shift) for op in b.ops), a.scale * b.scale)


def register_swap(layout: RegisterLayout, i: int, j: int) -> Circuit:
    """Exchange registers ``i`` and ``j`` with ``n`` parallel qubit swaps."""
    if i == j:
        raise LayoutError("register_swap needs two distinct registers")
    ra, rb = layout.register(i), layout.register(j)
    return Circuit(layout, tuple(swap(a, b) for a, b in zip(ra, rb)))


def swap_ops(ra: Sequence[int], rb: Sequence[int]) -> list[GateOp]:
    return [swap(a, b) for a, b in zip(ra, rb)]


@dataclass(frozen=True)
class CostModel:
    """Elementary-gate cost per IR primitive (used for depth and count estimates).

    ``mcz_coeff * k**2`` for a multi-controlled Z on ``k`` qubits with
    ``mcz_helpers`` helper ancillas; diagonal unitaries cost ``2**k``;
    generic unitaries ``generic_base**k``.
    """

    single: int = 1
    two_qubit: int = 1
    swap: int = 3
    controlled_hadamard: int = 3
    ccx: int = 6
    mcz_coeff: int = 1
    mcz_helpers: int = 1
    diagonal_base: int = 2
    generic_base: int = 4
    overrides: dict = field(default_factory=dict)

    def cost(self, op: GateOp) -> int:
        kind = op.kind
        if kind.value in self.overrides:
            return int(self.overrides[kind.value])
        k = len(op.qubits)
        if kind in (GateKind.H, GateKind.X, GateKind.Z):
            return self.single
        if kind in (GateKind.CX, GateKind.CZ):
            return self.two_qubit
        if kind is GateKind.CH:
            return self.controlled_hadamard
        if kind is GateKind.CCX:
            return self.ccx
        if kind is GateKind.SWAP:
            return self.swap
        if kind is GateKind.REGISTER_SWAP:
            return self.swap
        if kind is GateKind.MCZ:
            return 1 if k == 1 else (self.two_qubit if k == 2 else self.mcz_coeff * k * k)
        if kind is GateKind.DIAGONAL:
            return self.diagonal_base**k
        return self.generic_base**k


def cost_depth(c: Circuit, model: CostModel | None = None) -> int:
    """Critical-path length with each op weighted by its elementary cost."""
    model = model or CostModel()
    t: dict[int, int] = {}
    end = 0
    for op in c.ops:
        start = max((t.get(q, 0) for q in op.qubits), default=0)
        finish = start + model.cost(op)
        for q in op.qubits:
            t[q] = finish
        end = max(end, finish)
    return end


def cost_count(c: Circuit, model: CostModel | None = None) -> int:
    model = model or CostModel()
    return sum(model.cost(op) for op in c.ops)


def mcz_helper_count(c: Circuit, model: CostModel | None = None) -> int:
    """Helper ancillas the cost model charges for MCZ gates with 3+ qubits."""
    model = model or CostModel()
    return model.mcz_helpers * sum(1 for op in c.ops if op.kind is GateKind.MCZ and len(op.qubits) > 2)
