"""Rewrite a sequential product ``U_1 ... U_M v`` into the parallel circuit.

Layout (canonical): registers ``0..M-1`` of ``n`` qubits, then ancillas.
Pair ``p`` occupies registers ``(2p, 2p+1)``; the first register of a pair
holds the column index of the vectorized operand, the second the row index.
The output always ends up in register 0.

Stages: prep (``|vec(I)>`` per pair), vectorization (``U_{2p+1} (x)
U_{2p+2}^T``), gathering (tree of G~ blocks, grouped by layer), and
multiplication (``I (x) V_u`` on the final operand).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .circuit import (
    Circuit,
    CostModel,
    GateOp,
    RegisterLayout,
    compose,
    cost_depth,
    depth,
    mcz_helper_count,
    swap_ops,
    unitary_gate,
)
from .linalg import ATOL_UNITARY, is_unitary
from .synthesis import (
    G_TAG,
    V_TAG,
    GuSpec,
    SynthesisMode,
    VuSpec,
    gu_dense,
    gu_lcu_ops,
    prep_vec_identity_ops,
    vu_dense,
    vu_lcu_ops,
)


class ProblemError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class DQLProblem:
    """``ops[0] @ ops[1] @ ... @ ops[-1] @ v`` on ``n`` qubits."""

    n: int
    ops: tuple[np.ndarray, ...]
    v: np.ndarray

    def __post_init__(self):
        if self.n < 1:
            raise ProblemError("n must be >= 1")
        N = 2**self.n
        ops = tuple(np.asarray(u, dtype=complex) for u in self.ops)
        if not ops:
            raise ProblemError("need at least one operator (M >= 1)")
        for j, u in enumerate(ops):
            if u.shape != (N, N):
                raise ProblemError(f"ops[{j}] has shape {u.shape}, expected {(N, N)}")
            if not is_unitary(u, ATOL_UNITARY):
                raise ProblemError(f"ops[{j}] is not unitary")
        v = np.asarray(self.v, dtype=complex).reshape(-1)
        if v.size != N:
            raise ProblemError(f"v has length {v.size}, expected {N}")
        if np.linalg.norm(v) == 0:
            raise ProblemError("v must be nonzero")
        object.__setattr__(self, "ops", ops)
        object.__setattr__(self, "v", v)

    @property
    def N(self) -> int:
        return 2**self.n

    @property
    def M(self) -> int:
        return len(self.ops)

    def padded(self) -> DQLProblem:
        if self.M % 2 == 0:
            return self
        return DQLProblem(self.n, self.ops + (np.eye(self.N, dtype=complex),), self.v)

    def product(self) -> np.ndarray:
        out = np.eye(self.N, dtype=complex)
        for u in self.ops:
            out = out @ u
        return out

    def target_state(self) -> np.ndarray:
        return self.product() @ self.v


@dataclass(frozen=True)
class Operand:
    """A vectorized partial product ``vec((U_lo ... U_hi)^T)`` on two registers."""

    col: int
    row: int
    lo: int
    hi: int


@dataclass(frozen=True)
class GatherBlock:
    index: int
    layer: int
    group: str
    left: Operand
    right: Operand
    result: Operand
    gu_registers: tuple[int, int]
    spent: tuple[int, int]
    ancilla: int | None

    @property
    def split(self) -> int:
        """Insertion position: after ``U_split`` in the product."""
        return self.left.hi


@dataclass(frozen=True)
class MultiplyBlock:
    operand: Operand
    register: int
    ancilla: int | None


@dataclass(frozen=True)
class Ledger:
    n: int
    M: int
    M_original: int
    padded: bool
    d_U: int
    d_G: int
    d_V: int
    prep_depth: int
    gathering_layers: int
    block_depth: int
    gu_count: int
    vu_count: int
    qubit_count: int
    ancilla_count: int
    mcz_helper_ancillas: int
    total_qubits: int
    extra_g_from_binary_decomposition: int
    circuit_depth: int
    cost_depth: int
    sequential_depth: int
    sequential_cost_depth: int

    def as_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass(frozen=True, eq=False)
class DQLPlan:
    problem: DQLProblem
    mode: SynthesisMode
    swaps: bool
    layout: RegisterLayout
    prep: Circuit
    vectorization: Circuit
    gathering: tuple[Circuit, ...]
    multiplication: Circuit
    blocks: tuple[GatherBlock, ...]
    vblock: MultiplyBlock
    target_scale: complex
    M_original: int
    cost_model: CostModel = field(default_factory=CostModel)
    ledger: Ledger | None = None

    @property
    def n(self) -> int:
        return self.problem.n

    @property
    def M(self) -> int:
        return self.problem.M

    @property
    def output_register(self) -> int:
        return self.vblock.operand.col

    @property
    def output_qubits(self) -> tuple[int, ...]:
        return self.layout.register(self.output_register)

    @property
    def postselect_registers(self) -> tuple[int, ...]:
        return tuple(r for r in range(len(self.layout.registers)) if r != self.output_register)

    @property
    def postselect_qubits(self) -> tuple[int, ...]:
        """Every qubit outside the output register; all must read 0."""
        out = set(self.output_qubits)
        return tuple(q for q in range(self.layout.num_qubits) if q not in out)

    def circuit(self) -> Circuit:
        c = compose(self.prep, self.vectorization)
        for layer in self.gathering:
            c = compose(c, layer)
        return compose(c, self.multiplication)

    def without_prep(self) -> Circuit:
        c = self.vectorization
        for layer in self.gathering:
            c = compose(c, layer)
        return compose(c, self.multiplication)

    @property
    def decoding(self):
        from .decoding import OutcomeDecoding

        return OutcomeDecoding(self)


def gathering_schedule(M: int, swaps: bool = True) -> list[GatherBlock]:
    """Block list for an even ``M`` (``M/2`` pairs).

    ``M`` is split into its binary powers, largest first (lowest registers).
    Each power ``2^k`` with ``k >= 2`` gets a balanced tree.  The component
    results are then folded from the right, each combining block placed one
    layer after the later of its two inputs, which keeps the layer count at
    ``ceil(log2 M) - 1``.
    """
    if M < 2 or M % 2:
        raise ProblemError("gathering needs an even M >= 2")
    pairs = [Operand(2 * p, 2 * p + 1, 2 * p + 1, 2 * p + 2) for p in range(M // 2)]
    blocks: list[GatherBlock] = []
    done: dict[Operand, int] = {p: 0 for p in pairs}

    def combine(a: Operand, b: Operand, group: str) -> Operand:
        if swaps:
            res = Operand(a.col, a.row, a.lo, b.hi)
            spent = (b.col, b.row)
        else:
            res = Operand(a.col, b.row, a.lo, b.hi)
            spent = (a.row, b.col)
        layer = max(done[a], done[b]) + 1
        blocks.append(GatherBlock(len(blocks), layer, group, a, b, res, (a.row, b.col), spent, None))
        done[res] = layer
        return res

    powers = [1 << k for k in range(M.bit_length() - 1, -1, -1) if M & (1 << k)]
    components: list[Operand] = []
    start = 0
    for size in powers:
        level = pairs[start:start + size // 2]
        start += size // 2
        while len(level) > 1:
            level = [combine(level[i], level[i + 1], f"G{size}") for i in range(0, len(level), 2)]
        components.append(level[0])
    acc = components[-1]
    for comp in reversed(components[:-1]):
        acc = combine(comp, acc, "combine")
    return blocks


def plan(
    problem: DQLProblem,
    mode: SynthesisMode | str = SynthesisMode.EXACT,
    swaps: bool = True,
    full_control: bool = True,
    cost_model: CostModel | None = None,
) -> DQLPlan:
    mode = SynthesisMode(mode)
    cost_model = cost_model or CostModel()
    m_original = problem.M
    p = problem.padded()
    n, M, N = p.n, p.M, p.N
    vspec = VuSpec(p.v, mode)
    sched = gathering_schedule(M, swaps)

    tags = [G_TAG] * len(sched) + [V_TAG] if mode is SynthesisMode.LCU else []
    layout = RegisterLayout.standard(n, M, tags)
    regs = layout.registers
    anc = layout.ancilla_qubits()
    if mode is SynthesisMode.LCU:
        sched = [GatherBlock(b.index, b.layer, b.group, b.left, b.right, b.result, b.gu_registers, b.spent, anc[i])
                 for i, b in enumerate(sched)]

    prep_ops: list[GateOp] = []
    vec_ops: list[GateOp] = []
    for k in range(M // 2):
        prep_ops += prep_vec_identity_ops(regs[2 * k], regs[2 * k + 1])
        vec_ops.append(unitary_gate(regs[2 * k], p.ops[2 * k]))
        vec_ops.append(unitary_gate(regs[2 * k + 1], p.ops[2 * k + 1].T))

    gu_exact = gu_dense(n, SynthesisMode.EXACT) if mode is SynthesisMode.EXACT and sched else None
    n_layers = max((b.layer for b in sched), default=0)
    layer_ops: list[list[GateOp]] = [[] for _ in range(n_layers)]
    for b in sched:
        ra, rb = regs[b.gu_registers[0]], regs[b.gu_registers[1]]
        if mode is SynthesisMode.EXACT:
            ops = [unitary_gate(ra + rb, gu_exact)]
        else:
            ops = gu_lcu_ops(ra, rb, b.ancilla, full_control)
        if swaps:
            ops += swap_ops(regs[b.left.row], regs[b.right.row])
        layer_ops[b.layer - 1] += ops

    final = sched[-1].result if sched else Operand(0, 1, 1, 2)
    vreg = regs[final.row]
    if mode is SynthesisMode.EXACT:
        v_ops = [unitary_gate(vreg, vu_dense(p.v, SynthesisMode.EXACT))]
        vblock = MultiplyBlock(final, final.row, None)
    else:
        v_ops = vu_lcu_ops(vreg, anc[-1], vspec)
        vblock = MultiplyBlock(final, final.row, anc[-1])

    gspec = GuSpec(n, mode)
    scale = (1 / np.sqrt(N)) ** (M // 2) * gspec.branch_scale ** len(sched) * vspec.branch_scale

    result = DQLPlan(
        problem=p,
        mode=mode,
        swaps=swaps,
        layout=layout,
        prep=Circuit(layout, prep_ops),
        vectorization=Circuit(layout, vec_ops),
        gathering=tuple(Circuit(layout, ops) for ops in layer_ops),
        multiplication=Circuit(layout, v_ops),
        blocks=tuple(sched),
        vblock=vblock,
        target_scale=complex(scale),
        M_original=m_original,
        cost_model=cost_model,
    )
    return _with_ledger(result)


def _with_ledger(p: DQLPlan) -> DQLPlan:
    return DQLPlan(**{**p.__dict__, "ledger": accounting(p)})


def accounting(p: DQLPlan) -> Ledger:
    """Depth, gate and qubit bookkeeping derived from the built stages.

    ``d_U`` is the vectorization-stage depth (the ``|vec(I)>`` preparation is
    reported separately as ``prep_depth``), ``d_G`` the depth of one
    gathering layer and ``d_V`` the multiplication depth.
    """
    model = p.cost_model
    d_U = depth(p.vectorization)
    d_G = max((depth(layer) for layer in p.gathering), default=0)
    d_V = depth(p.multiplication)
    L = len(p.gathering)
    full = p.circuit()
    seq_layout = RegisterLayout.standard(p.n, 1)
    seq = Circuit(seq_layout, [unitary_gate(seq_layout.register(0), u) for u in reversed(p.problem.ops[: p.M_original])])
    combining = sum(1 for b in p.blocks if b.group == "combine")
    return Ledger(
        n=p.n,
        M=p.M,
        M_original=p.M_original,
        padded=p.M != p.M_original,
        d_U=d_U,
        d_G=d_G,
        d_V=d_V,
        prep_depth=depth(p.prep),
        gathering_layers=L,
        block_depth=d_U + L * d_G + d_V,
        gu_count=len(p.blocks),
        vu_count=1,
        qubit_count=p.n * len(p.layout.registers),
        ancilla_count=len(p.layout.ancillas),
        mcz_helper_ancillas=mcz_helper_count(full, model),
        total_qubits=p.layout.num_qubits,
        extra_g_from_binary_decomposition=combining,
        circuit_depth=depth(full),
        cost_depth=cost_depth(full, model),
        sequential_depth=depth(seq),
        sequential_cost_depth=cost_depth(seq, model),
    )


def formula_block_depth(M: int, d_U: int, d_G: int, d_V: int) -> int:
    """``d_U + (ceil(log2 M) - 1) d_G + d_V``."""
    return d_U + (ceil_log2(M) - 1) * d_G + d_V


def ceil_log2(M: int) -> int:
    return (M - 1).bit_length()


def block_level_depth(p: DQLPlan) -> int:
    """Depth counted over whole blocks: each U, G~ and V block is one opaque
    node with weight ``d_U``/``d_G``/``d_V`` on the registers it touches."""
    led = p.ledger or accounting(p)
    ready: dict[int, int] = {}

    def place(regs: Sequence[int], w: int):
        start = max((ready.get(r, 0) for r in regs), default=0)
        for r in regs:
            ready[r] = start + w

    for r in range(p.M):
        place([r], led.d_U)
    for layer in range(1, len(p.gathering) + 1):
        for b in p.blocks:
            if b.layer == layer:
                place([b.left.col, b.left.row, b.right.col, b.right.row], led.d_G)
    place([p.vblock.operand.col, p.vblock.operand.row], led.d_V)
    return max(ready.values())


def random_problem(n: int, M: int, seed: int | None = None, real_v: bool = False) -> DQLProblem:
    from .linalg import haar_unitary, random_state

    rng = np.random.default_rng(seed)
    ops = tuple(haar_unitary(2**n, rng) for _ in range(M))
    return DQLProblem(n, ops, random_state(2**n, rng, real=real_v))
