"""Realizations of the gathering and multiplication gates.

Two synthesis modes:

``EXACT``
    Dense unitaries completed by Gram-Schmidt from their defining first row.
``LCU``
    Pauli sums ``G_u = sum_j P_j (x) P_j`` and ``V_u = sum_i v_i X^(i)``,
    realized by a linear combination of two unitaries with one ancilla.

Here ``X^(i)`` is the X string with ``X^(i)|0> = |i>``, so the first row of
``V_u`` is ``v^T`` entry by entry.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from .circuit import (
    Circuit,
    Control,
    GateKind,
    GateOp,
    RegisterLayout,
    add_control,
    cx,
    diagonal,
    h,
    mcz,
    x,
    z,
)
from .linalg import H, PauliString, complete_unitary, kron, pauli_x_string, vec_identity

DENSE_CAP = 6
G_TAG = "LCU-G"
V_TAG = "LCU-V"


class SynthesisMode(str, Enum):
    EXACT = "exact"
    LCU = "lcu"


class SynthesisError(ValueError):
    pass


@dataclass(frozen=True)
class GuSpec:
    n: int
    mode: SynthesisMode

    @property
    def N(self) -> int:
        return 2**self.n

    @property
    def branch_scale(self) -> float:
        """Amplitude factor on the kept component: ``1/sqrt(N)`` exact, ``1/N`` LCU."""
        return 1 / np.sqrt(self.N) if self.mode is SynthesisMode.EXACT else 1 / self.N

    @property
    def exponent(self) -> float:
        return np.pi / self.N


@dataclass(frozen=True, eq=False)
class VuSpec:
    v: np.ndarray
    mode: SynthesisMode

    def __post_init__(self):
        v = np.asarray(self.v, dtype=complex).reshape(-1)
        if v.size == 0 or v.size & (v.size - 1):
            raise SynthesisError(f"v has length {v.size}, not a power of two")
        if np.linalg.norm(v) == 0:
            raise SynthesisError("V_u is undefined for the zero vector")
        if self.mode is SynthesisMode.LCU and np.max(np.abs(v.imag)) > 0:
            raise SynthesisError("the Pauli-sum V_u needs a real vector v (arccos of real eigenvalues)")
        object.__setattr__(self, "v", v)

    @property
    def n(self) -> int:
        return self.v.size.bit_length() - 1

    @property
    def lambda_max(self) -> float:
        return float(np.sum(np.abs(self.v)))

    @property
    def eigenvalues(self) -> np.ndarray:
        """``lambda_j = sum_k v_k (-1)^{popcount(j & k)}`` (diagonal of ``H V_u H``)."""
        return walsh_hadamard(self.v.real)

    @property
    def arccos_angles(self) -> np.ndarray:
        ratio = np.clip(self.eigenvalues / self.lambda_max, -1.0, 1.0)
        return np.arccos(ratio)

    @property
    def branch_scale(self) -> float:
        if self.mode is SynthesisMode.EXACT:
            return 1 / float(np.linalg.norm(self.v))
        return 1 / self.lambda_max


def walsh_hadamard(v: np.ndarray) -> np.ndarray:
    """Unnormalized Walsh-Hadamard transform: ``out_j = sum_k v_k (-1)^{j.k}``."""
    out = np.asarray(v, dtype=float).copy()
    step = 1
    while step < out.size:
        blocks = out.reshape(-1, 2, step)
        a, b = blocks[:, 0, :].copy(), blocks[:, 1, :].copy()
        blocks[:, 0, :], blocks[:, 1, :] = a + b, a - b
        step *= 2
    return out


def _check_dense(n: int):
    if n > DENSE_CAP:
        raise SynthesisError(f"dense synthesis for n={n} exceeds cap {DENSE_CAP}")


def gu_dense(n: int, mode: SynthesisMode = SynthesisMode.LCU) -> np.ndarray:
    _check_dense(n)
    mode = SynthesisMode(mode)
    if mode is SynthesisMode.EXACT:
        return complete_unitary(vec_identity(n))
    N = 2**n
    out = np.zeros((N * N, N * N), dtype=complex)
    for j in range(N):
        p = pauli_x_string(j, n).as_matrix()
        out += np.kron(p, p)
    return out


def vu_dense(v, mode: SynthesisMode = SynthesisMode.LCU) -> np.ndarray:
    spec = VuSpec(v, SynthesisMode(mode))
    _check_dense(spec.n)
    if spec.mode is SynthesisMode.EXACT:
        return complete_unitary(spec.v)
    out = np.zeros((spec.v.size, spec.v.size), dtype=complex)
    for i, vi in enumerate(spec.v):
        out += vi * PauliString.from_basis_index(i, spec.n).as_matrix()
    return out


# circuit builders on explicit qubit lists

def prep_vec_identity_ops(first: Sequence[int], second: Sequence[int]) -> list[GateOp]:
    """``S (H^n (x) I)``: maps ``|0..0>`` to ``vec(I_N)/sqrt(N)``."""
    return [h(q) for q in first] + s_ladder_ops(first, second)


def s_ladder_ops(first: Sequence[int], second: Sequence[int]) -> list[GateOp]:
    return [cx(a, b) for a, b in zip(first, second)]


def gu_exponential_ops(first: Sequence[int], second: Sequence[int]) -> list[GateOp]:
    """``exp(i pi/N G_u) = H^2n S (I (x) X_n C0Z X_n) S H^2n``."""
    both = list(first) + list(second)
    last = second[-1]
    middle = [x(last), mcz(last, second[:-1], polarity=0), x(last)]
    return (
        [h(q) for q in both]
        + s_ladder_ops(first, second)
        + middle
        + s_ladder_ops(first, second)
        + [h(q) for q in both]
    )


def gu_lcu_ops(first: Sequence[int], second: Sequence[int], anc: int, full_control: bool = True) -> list[GateOp]:
    """Ancilla-0 branch applies ``(1/2)(I - exp(i pi/N G_u)) = G_u/N``.

    With ``full_control`` every gate of the exponential is controlled on the
    ancilla (4n CH, 2n CCX, 2 CX, one MCZ).  Otherwise only the middle MCZ
    is controlled; the gates around it cancel when the ancilla is 0.
    """
    inner = gu_exponential_ops(first, second)
    if full_control:
        controlled = [add_control(op, anc) for op in inner]
    else:
        controlled = [add_control(op, anc) if op.kind is GateKind.MCZ else op for op in inner]
    return [h(anc), z(anc)] + controlled + [h(anc)]


def vu_lcu_ops(reg: Sequence[int], anc: int, spec: VuSpec) -> list[GateOp]:
    """Ancilla-0 branch applies ``H^n (1/2)(e^{iL} + e^{-iL}) H^n = V_u/lambda_max``."""
    ang = spec.arccos_angles
    return (
        [h(q) for q in reg]
        + [h(anc)]
        + [diagonal(reg, np.exp(1j * ang), (Control(anc, 0),)),
           diagonal(reg, np.exp(-1j * ang), (Control(anc, 1),))]
        + [h(anc)]
        + [h(q) for q in reg]
    )


# standalone circuits on local layouts

def prep_vec_identity(n: int) -> Circuit:
    lay = RegisterLayout.standard(n, 2)
    return Circuit(lay, prep_vec_identity_ops(lay.register(0), lay.register(1)))


def s_ladder(n: int) -> Circuit:
    lay = RegisterLayout.standard(n, 2)
    return Circuit(lay, s_ladder_ops(lay.register(0), lay.register(1)))


def gu_exponential_circuit(n: int) -> Circuit:
    lay = RegisterLayout.standard(n, 2)
    return Circuit(lay, gu_exponential_ops(lay.register(0), lay.register(1)))


def gu_lcu_block(n: int, full_control: bool = True) -> Circuit:
    """LCU block on two registers plus one ancilla (last qubit)."""
    lay = RegisterLayout.standard(n, 2, [G_TAG])
    (anc,) = lay.ancilla_qubits()
    return Circuit(lay, gu_lcu_ops(lay.register(0), lay.register(1), anc, full_control))


def vu_lcu_block(v) -> Circuit:
    spec = VuSpec(v, SynthesisMode.LCU)
    lay = RegisterLayout.standard(spec.n, 1, [V_TAG])
    (anc,) = lay.ancilla_qubits()
    return Circuit(lay, vu_lcu_ops(lay.register(0), anc, spec))


def lcu_success_probability(block: Circuit, input_state, cap: int = 22) -> float:
    """Exact probability that the block's LCU ancilla reads 0 on ``|0>_anc |input>``."""
    from .simulator import PostSelection, branch_amplitudes, run

    anc = block.layout.ancilla_qubits()
    if len(anc) != 1 or anc[0] != block.num_qubits - 1:
        raise SynthesisError("expected a block with a single trailing LCU ancilla")
    psi = np.asarray(input_state, dtype=complex).reshape(-1)
    full = np.kron(psi, np.array([1, 0], dtype=complex))
    out = run(block, full, cap=cap)
    amps = branch_amplitudes(out, PostSelection(anc, (0,)))
    return float(np.vdot(amps, amps).real)


def gu_lcu_probability(psi, n: int) -> float:
    """Closed form for the G-block success probability: ``sum_j |<vec P_j|psi>|^2 / N``.

    The Pauli strings satisfy ``vec(P_j)`` orthogonal with norm ``sqrt(N)``,
    and ``G_u / N`` is the projector onto their span.
    """
    N = 2**n
    psi = np.asarray(psi, dtype=complex).reshape(N, N)
    total = 0.0
    rows = np.arange(N)
    for m in range(N):
        # <vec(X^m)|psi> = sum_a psi[a, a ^ m]
        total += abs(psi[rows, rows ^ m].sum()) ** 2
    return total / N


def gu_lcu_probability_diag(w) -> float:
    """``|W|^2 / N`` with ``W = sum_j w_j``, for inputs ``vec(diag(w))``."""
    w = np.asarray(w, dtype=complex).reshape(-1)
    return float(abs(w.sum()) ** 2 / w.size)


def vu_lcu_probability(v, w) -> float:
    """``(1/lambda_max^2) sum_j (X^(j) v, w)^2`` with the bilinear pairing."""
    spec = VuSpec(v, SynthesisMode.LCU)
    w = np.asarray(w, dtype=complex).reshape(-1)
    idx = np.arange(spec.v.size)
    total = sum(abs(np.dot(spec.v[idx ^ j], w)) ** 2 for j in range(spec.v.size))
    return float(total / spec.lambda_max**2)


def hadamard_power(n: int) -> np.ndarray:
    return kron(*([H] * n))
