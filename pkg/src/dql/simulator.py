"""Exact dense state-vector simulation, post-selection and sampling."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .circuit import SIM_CAP, CapacityError, Circuit
from .kernels import apply_op


class ZeroProbabilityError(RuntimeError):
    """Post-selection onto a branch that carries no amplitude."""


@dataclass(frozen=True, eq=False)
class StateVector:
    """Flat amplitudes over ``num_qubits`` qubits, qubit 0 most significant."""

    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if amps.size & (amps.size - 1):
            raise ValueError(f"state length {amps.size} is not a power of two")
        amps = amps.copy()
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def zeros(cls, num_qubits: int) -> StateVector:
        amps = np.zeros(2**num_qubits, dtype=complex)
        amps[0] = 1.0
        return cls(amps)

    @classmethod
    def basis(cls, bits: str) -> StateVector:
        amps = np.zeros(2 ** len(bits), dtype=complex)
        amps[int(bits, 2) if bits else 0] = 1.0
        return cls(amps)

    @property
    def num_qubits(self) -> int:
        return self.amplitudes.size.bit_length() - 1

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> StateVector:
        nrm = self.norm()
        if nrm == 0:
            raise ZeroProbabilityError("cannot normalize the zero vector")
        return StateVector(self.amplitudes / nrm)

    def tensor(self) -> np.ndarray:
        return self.amplitudes.reshape((2,) * self.num_qubits)


@dataclass(frozen=True)
class PostSelection:
    """Required outcome per qubit (``outcomes[i]`` for ``qubits[i]``)."""

    qubits: tuple[int, ...]
    outcomes: tuple[int, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "qubits", tuple(self.qubits))
        outs = tuple(self.outcomes) if self.outcomes is not None else (0,) * len(self.qubits)
        if len(outs) != len(self.qubits):
            raise ValueError("one outcome per selected qubit")
        object.__setattr__(self, "outcomes", outs)

    @classmethod
    def from_bits(cls, qubits: Sequence[int], bits: str) -> PostSelection:
        return cls(tuple(qubits), tuple(int(b) for b in bits))


def run(c: Circuit, initial: StateVector | np.ndarray | None = None, cap: int = SIM_CAP) -> StateVector:
    q = c.num_qubits
    if q > cap:
        raise CapacityError(f"simulating {q} qubits exceeds cap {cap}")
    if initial is None:
        psi = np.zeros(2**q, dtype=complex)
        psi[0] = 1.0
    else:
        amps = initial.amplitudes if isinstance(initial, StateVector) else np.asarray(initial, dtype=complex)
        if amps.size != 2**q:
            raise ValueError(f"initial state has {amps.size} amplitudes, circuit needs {2**q}")
        psi = amps.astype(complex).copy()
    psi = psi.reshape((2,) * q) if q else psi
    for op in c.ops:
        psi = apply_op(psi, op)
    return StateVector(psi.reshape(-1) * c.scale)


def branch_amplitudes(s: StateVector, sel: PostSelection) -> np.ndarray:
    """Unnormalized amplitudes of the unselected qubits (ascending order) in the selected branch."""
    q = s.num_qubits
    idx = [slice(None)] * q
    for qb, o in zip(sel.qubits, sel.outcomes):
        if not 0 <= qb < q:
            raise ValueError(f"qubit {qb} not in a {q}-qubit state")
        idx[qb] = o
    return np.array(s.tensor()[tuple(idx)]).reshape(-1)


def postselect(s: StateVector, sel: PostSelection) -> tuple[StateVector, float]:
    """Project onto ``sel``; returns the renormalized full state and the branch probability."""
    q = s.num_qubits
    mask = np.zeros((2,) * q, dtype=bool)
    idx = [slice(None)] * q
    for qb, o in zip(sel.qubits, sel.outcomes):
        if not 0 <= qb < q:
            raise ValueError(f"qubit {qb} not in a {q}-qubit state")
        idx[qb] = o
    mask[tuple(idx)] = True
    projected = np.where(mask, s.tensor(), 0).reshape(-1)
    prob = float(np.vdot(projected, projected).real)
    if prob == 0.0:
        raise ZeroProbabilityError(f"branch {sel.outcomes} on qubits {sel.qubits} has probability 0")
    return StateVector(projected / np.sqrt(prob)), prob


def marginal_probabilities(s: StateVector, qubits: Sequence[int]) -> np.ndarray:
    """Outcome distribution over ``qubits``, indexed with ``qubits[0]`` most significant."""
    q = s.num_qubits
    p = np.abs(s.tensor()) ** 2
    others = tuple(i for i in range(q) if i not in qubits)
    p = p.sum(axis=others) if others else p
    # remaining axes are in ascending qubit order; reorder to the requested order
    remaining = sorted(qubits)
    p = np.transpose(p, [remaining.index(qb) for qb in qubits]) if len(qubits) > 1 else p
    return np.asarray(p).reshape(-1)


def sample(s: StateVector, qubits: Sequence[int], shots: int, seed: int | None = None) -> dict[str, int]:
    """Multinomial outcome histogram over ``qubits``; bit strings follow ``qubits`` order."""
    if shots < 1:
        raise ValueError("shots must be >= 1")
    qubits = list(qubits)
    p = marginal_probabilities(s, qubits)
    p = p / p.sum()
    rng = np.random.default_rng(seed)
    counts = rng.multinomial(shots, p)
    width = len(qubits)
    return {format(i, f"0{width}b") if width else "": int(c) for i, c in enumerate(counts) if c}


def dump_state(s: StateVector, layout=None) -> dict:
    out: dict = {"num_qubits": s.num_qubits, "amplitudes": [[a.real, a.imag] for a in s.amplitudes]}
    if layout is not None:
        out["layout"] = {
            "n": layout.n,
            "registers": [list(r) for r in layout.registers],
            "ancillas": [{"qubit": a.qubit, "tag": a.tag} for a in layout.ancillas],
        }
    return out


def histogram_csv(hist: Mapping[str, int]) -> str:
    lines = ["outcome,count"]
    lines += [f"{k},{v}" for k, v in sorted(hist.items())]
    return "\n".join(lines) + "\n"
