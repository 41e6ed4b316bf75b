"""Map ancilla/garbage measurement outcomes of a Pauli-sum plan to the
operator product they actually applied, and undo the inserted strings
when the operators allow it.

For a gathering block joining ``vec(A)`` and ``vec(B)``, outcomes ``k`` and
``l`` on its two spent registers leave ``vec(B X^(k^l) A)``; for the
multiplication block, outcome ``j`` leaves ``A X^(j) v``.  In terms of the
product ``U_1 ... U_M v`` this inserts an X string right after
``U_split`` (gathering) or right before ``v`` (multiplication).
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .linalg import ATOL_UNITARY, PauliString
from .simulator import StateVector
from .synthesis import SynthesisMode

log = logging.getLogger(__name__)


class DecodingError(ValueError):
    """Outcome pattern outside the decoding table (wrong width or an LCU failure)."""


class ModeError(DecodingError):
    """Decoding requested for a plan whose residual branches have no Pauli form."""


class NotCorrectable(RuntimeError):
    def __init__(self, op_index: int, pauli: PauliString):
        self.op_index = op_index
        self.pauli = pauli
        super().__init__(f"U_{op_index} does not commute with inserted Pauli string {pauli.label()}")


@dataclass(frozen=True)
class DecodedOutcome:
    bits: str
    insertions: tuple[tuple[int, PauliString], ...]
    descriptor: str

    @property
    def is_target(self) -> bool:
        return not self.insertions


def _reg_value(bits: dict[int, int], qubits) -> int:
    val = 0
    for q in qubits:
        val = (val << 1) | bits[q]
    return val


class OutcomeDecoding:
    """Decoder bound to one plan; outcome strings follow ``plan.postselect_qubits``."""

    def __init__(self, plan):
        self.plan = plan
        self.qubits = plan.postselect_qubits
        self.anc = set(plan.layout.ancilla_qubits())

    @property
    def available(self) -> bool:
        return self.plan.mode is SynthesisMode.LCU

    def _require(self):
        if not self.available:
            raise ModeError("exact-unitary plans have no Pauli interpretation of residual branches")

    @property
    def size(self) -> int:
        """Number of LCU-success outcome patterns."""
        n_regs = len(self.plan.postselect_registers)
        return self.plan.problem.N ** n_regs

    def decode(self, bits: str) -> DecodedOutcome:
        self._require()
        if len(bits) != len(self.qubits) or set(bits) - {"0", "1"}:
            raise DecodingError(f"expected {len(self.qubits)} outcome bits, got {bits!r}")
        vals = dict(zip(self.qubits, (int(b) for b in bits)))
        failed = [q for q in self.anc if vals[q]]
        if failed:
            raise DecodingError(f"LCU ancilla(s) {sorted(failed)} read 1: not in the decoding table")
        p = self.plan
        regs = p.layout.registers
        n = p.n
        ins: list[tuple[int, PauliString]] = []
        for b in p.blocks:
            k = _reg_value(vals, regs[b.spent[0]])
            l = _reg_value(vals, regs[b.spent[1]])
            if k ^ l:
                ins.append((b.split, PauliString.from_basis_index(k ^ l, n)))
        j = _reg_value(vals, regs[p.vblock.register])
        if j:
            ins.append((p.M, PauliString.from_basis_index(j, n)))
        ins.sort(key=lambda t: t[0])
        return DecodedOutcome(bits, tuple(ins), describe(p.M, ins))

    def entries(self, budget: int | None = None) -> Iterator[DecodedOutcome]:
        """Walk the table in lexicographic bit order (ancillas fixed to 0)."""
        self._require()
        free = [i for i, q in enumerate(self.qubits) if q not in self.anc]
        count = 0
        for combo in itertools.product("01", repeat=len(free)):
            if budget is not None and count >= budget:
                return
            bits = ["0"] * len(self.qubits)
            for i, b in zip(free, combo):
                bits[i] = b
            yield self.decode("".join(bits))
            count += 1


def describe(M: int, insertions) -> str:
    at: dict[int, list[str]] = {}
    for pos, pauli in insertions:
        at.setdefault(pos, []).append(f"X[{pauli.label()}]")
    parts = []
    for pos in range(M + 1):
        if pos:
            parts.append(f"U{pos}")
        parts += at.get(pos, [])
    return " ".join(parts + ["v"])


def inserted_product(problem, insertions) -> np.ndarray:
    """``U_1 ... U_M v`` with each Pauli applied right after its position."""
    by_pos: dict[int, list[PauliString]] = {}
    for pos, pauli in insertions:
        by_pos.setdefault(pos, []).append(pauli)
    out = problem.v.copy()
    for pos in range(problem.M, -1, -1):
        for pauli in by_pos.get(pos, []):
            out = pauli.as_matrix() @ out
        if pos:
            out = problem.ops[pos - 1] @ out
    return out


def check_correctable(problem, decoded: DecodedOutcome, tol: float = ATOL_UNITARY):
    for pos, pauli in decoded.insertions:
        pm = pauli.as_matrix()
        for j in range(pos, 0, -1):
            u = problem.ops[j - 1]
            if not np.allclose(u @ pm, pm @ u, atol=tol, rtol=0):
                raise NotCorrectable(j, pauli)


def correct(state, decoded: DecodedOutcome, problem, tol: float = ATOL_UNITARY) -> StateVector:
    """Undo the inserted strings on an output-register state.

    Every operator applied after an insertion must commute with it; then the
    whole insertion product moves to the front and is cancelled by applying
    it once more.  All-or-nothing: any non-commuting pair raises.
    """
    amps = state.amplitudes if isinstance(state, StateVector) else np.asarray(state, dtype=complex)
    try:
        check_correctable(problem, decoded, tol)
    except NotCorrectable:
        if len(decoded.insertions) > 1:
            log.info("partial correction not attempted for %s", decoded.descriptor)
        raise
    total = PauliString(problem.n)
    for _, pauli in decoded.insertions:
        total = total * pauli
    return StateVector(total.as_matrix() @ amps)
