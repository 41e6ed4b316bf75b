import numpy as np
import pytest

from dql.circuit import GateKind, base_matrix


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def lift_gate(op, q):
    """Full 2^q matrix of one gate, built entry by entry over basis states.

    Independent of the tensor kernels: walks every input basis index, checks
    the controls bitwise and scatters the target-block column.
    """
    dim = 2**q
    out = np.zeros((dim, dim), dtype=complex)
    if op.kind is GateKind.REGISTER_SWAP:
        half = len(op.targets) // 2
        pairs = list(zip(op.targets[:half], op.targets[half:]))
        for i in range(dim):
            bits = [(i >> (q - 1 - k)) & 1 for k in range(q)]
            for a, b in pairs:
                bits[a], bits[b] = bits[b], bits[a]
            out[int("".join(map(str, bits)), 2), i] = 1
        return out
    m = base_matrix(op)
    t = op.targets
    for i in range(dim):
        bits = [(i >> (q - 1 - k)) & 1 for k in range(q)]
        if any(bits[c.qubit] != c.polarity for c in op.controls):
            out[i, i] = 1
            continue
        col = int("".join(str(bits[x]) for x in t), 2) if t else 0
        for row in range(2 ** len(t)):
            amp = m[row, col]
            if amp == 0:
                continue
            nb = list(bits)
            for k, x in enumerate(t):
                nb[x] = (row >> (len(t) - 1 - k)) & 1
            out[int("".join(map(str, nb)), 2), i] += amp
    return out


def dense_circuit(c):
    dim = 2**c.num_qubits
    u = np.eye(dim, dtype=complex)
    for op in c.ops:
        u = lift_gate(op, c.num_qubits) @ u
    return u * c.scale


_ACCEPTANCE: list[str] = []


@pytest.fixture
def acceptance_report():
    def record(number: int, title: str, ok: bool, detail: str = "") -> None:
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {title}" + (f"  ({detail})" if detail else "")
        print(line)
        _ACCEPTANCE.append(line)

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
