"""Dense complex linear algebra and the operator-vectorization calculus.

Conventions
-----------
* ``vectorize`` stacks columns (Fortran order): ``vec(M)[i + rows*j] = M[i, j]``.
  Read as a two-register state, the first (leftmost) tensor factor carries the
  column index and the second carries the row index.
* Pauli strings are labelled with reverse encoding: bit ``k`` of the label
  (least significant bit first) selects ``X`` on tensor factor ``k``, factor 0
  being the leftmost one.  Basis-state indices use the usual big-endian
  reading (factor 0 is the most significant bit), so ``P_j |0> = |rev(j)>``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

import numpy as np

ATOL_EXACT = 1e-12
ATOL_SIM = 1e-9
ATOL_UNITARY = 1e-10

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)


def as_vector(v) -> np.ndarray:
    arr = np.asarray(v, dtype=complex).reshape(-1)
    if arr.size == 0 or arr.size & (arr.size - 1):
        raise ValueError(f"vector length {arr.size} is not a power of two")
    return arr


def num_qubits_for(dim: int) -> int:
    if dim <= 0 or dim & (dim - 1):
        raise ValueError(f"dimension {dim} is not a power of two")
    return dim.bit_length() - 1


def is_unitary(m: np.ndarray, tol: float = ATOL_UNITARY) -> bool:
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        return False
    return bool(np.allclose(m @ m.conj().T, np.eye(m.shape[0]), atol=tol, rtol=0))


def kron(*mats) -> np.ndarray:
    """Kronecker product of one or more matrices, left to right."""
    if not mats:
        return np.ones((1, 1), dtype=complex)
    return reduce(np.kron, (np.asarray(m, dtype=complex) for m in mats))


def kron_power(m: np.ndarray, k: int) -> np.ndarray:
    return kron(*([m] * k))


def vectorize(m) -> np.ndarray:
    """Stack the columns of ``m`` top to bottom."""
    return np.asarray(m, dtype=complex).reshape(-1, order="F")


def devectorize(v, rows: int, cols: int) -> np.ndarray:
    v = np.asarray(v, dtype=complex).reshape(-1)
    if rows * cols != v.size:
        raise ValueError(f"cannot reshape length {v.size} into {rows}x{cols}")
    return v.reshape(rows, cols, order="F")


def vec_identity(n: int, normalized: bool = False) -> np.ndarray:
    """``vec(I_N)``; with ``normalized`` the unit vector ``vec(I_N)/sqrt(N)``."""
    N = 2**n
    v = vectorize(np.eye(N))
    return v / np.sqrt(N) if normalized else v


def gather_matrix(n: int) -> np.ndarray:
    """Materialized rectangular gathering map ``I_N (x) vec(I_N)^T (x) I_N``."""
    N = 2**n
    return kron(np.eye(N), vec_identity(n)[None, :], np.eye(N))


def multiply_matrix(v) -> np.ndarray:
    """Materialized rectangular multiplication map ``I_N (x) v^T``."""
    v = as_vector(v)
    return kron(np.eye(v.size), v[None, :])


def gather_exact(vec_a, vec_b, n: int) -> np.ndarray:
    """Apply the gathering map to ``vec_a (x) vec_b``; returns ``vec(B A)``.

    The contraction runs over the two middle registers, so it is a plain
    matrix product of the register-major reshapes of the two inputs.
    """
    N = 2**n
    a = np.asarray(vec_a, dtype=complex).reshape(-1)
    b = np.asarray(vec_b, dtype=complex).reshape(-1)
    if a.size != N * N or b.size != N * N:
        raise ValueError(f"gather_exact expects two vectors of length {N * N}")
    return (a.reshape(N, N) @ b.reshape(N, N)).reshape(-1)


def multiply_exact(vec_at, v, n: int) -> np.ndarray:
    """Apply ``I_N (x) v^T`` to ``vec(A^T)``; returns ``A v``."""
    N = 2**n
    a = np.asarray(vec_at, dtype=complex).reshape(-1)
    v = np.asarray(v, dtype=complex).reshape(-1)
    if a.size != N * N or v.size != N:
        raise ValueError(f"multiply_exact expects lengths {N * N} and {N}")
    return a.reshape(N, N) @ v


def bit_reverse(i: int, n: int) -> int:
    out = 0
    for _ in range(n):
        out = (out << 1) | (i & 1)
        i >>= 1
    return out


@dataclass(frozen=True)
class PauliString:
    """Phase-free tensor product of I, X and Z factors, stored as bitmasks.

    Bit ``k`` of ``x_mask`` / ``z_mask`` refers to tensor factor ``k``
    (factor 0 leftmost).  A qubit may carry X or Z but not both.
    """

    n: int
    x_mask: int = 0
    z_mask: int = 0

    def __post_init__(self):
        full = (1 << self.n) - 1
        if self.n < 0 or self.x_mask & ~full or self.z_mask & ~full:
            raise ValueError(f"masks out of range for {self.n} qubits")
        if self.x_mask & self.z_mask:
            raise ValueError("X and Z on the same qubit would introduce a phase")

    @classmethod
    def from_basis_index(cls, index: int, n: int) -> PauliString:
        """The X string mapping ``|0...0>`` to basis state ``|index>``."""
        if not 0 <= index < 2**n:
            raise ValueError(f"basis index {index} out of range for {n} qubits")
        return cls(n, bit_reverse(index, n))

    @property
    def basis_index(self) -> int:
        """Index flip applied to computational basis states (X part)."""
        return bit_reverse(self.x_mask, self.n)

    @property
    def is_identity(self) -> bool:
        return self.x_mask == 0 and self.z_mask == 0

    def label(self) -> str:
        out = []
        for k in range(self.n):
            if (self.x_mask >> k) & 1:
                out.append("X")
            elif (self.z_mask >> k) & 1:
                out.append("Z")
            else:
                out.append("I")
        return "".join(out)

    def hadamard_conjugate(self) -> PauliString:
        return PauliString(self.n, self.z_mask, self.x_mask)

    def __mul__(self, other: PauliString) -> PauliString:
        if self.n != other.n:
            raise ValueError("Pauli strings act on different qubit counts")
        if (self.x_mask and other.z_mask) or (self.z_mask and other.x_mask):
            raise ValueError("mixed X/Z products carry phases; not supported")
        return PauliString(self.n, self.x_mask ^ other.x_mask, self.z_mask ^ other.z_mask)

    def as_matrix(self) -> np.ndarray:
        factors = []
        for k in range(self.n):
            if (self.x_mask >> k) & 1:
                factors.append(X)
            elif (self.z_mask >> k) & 1:
                factors.append(Z)
            else:
                factors.append(I2)
        return kron(*factors)


def pauli_x_string(j: int, n: int) -> PauliString:
    """``P_j``: X on every factor ``k`` whose bit ``k`` of ``j`` is set."""
    if not 0 <= j < 2**n:
        raise ValueError(f"Pauli index {j} out of range for {n} qubits")
    return PauliString(n, j)


def complete_unitary(first_row, threshold: float = 1e-8) -> np.ndarray:
    """Unitary matrix whose first row is ``first_row / ||first_row||``.

    Modified Gram-Schmidt over the rows: the defining row first, then the
    computational basis rows in order, skipping candidates whose residual
    norm falls below ``threshold``.  Every candidate is orthogonalized twice.
    """
    r0 = np.asarray(first_row, dtype=complex).reshape(-1)
    dim = r0.size
    nrm = np.linalg.norm(r0)
    if nrm < threshold:
        raise ValueError("cannot complete a basis from a zero row")
    rows = [r0 / nrm]
    for i in range(dim):
        if len(rows) == dim:
            break
        w = np.zeros(dim, dtype=complex)
        w[i] = 1.0
        for _ in range(2):
            for b in rows:
                w = w - np.vdot(b, w) * b
        wn = np.linalg.norm(w)
        if wn < threshold:
            continue
        rows.append(w / wn)
    if len(rows) != dim:
        raise RuntimeError("Gram-Schmidt completion did not reach a full basis")
    return np.array(rows)


def fidelity(a, b) -> float:
    """``|<a|b>|^2 / (||a||^2 ||b||^2)``."""
    a = np.asarray(a, dtype=complex).reshape(-1)
    b = np.asarray(b, dtype=complex).reshape(-1)
    den = np.vdot(a, a).real * np.vdot(b, b).real
    if den == 0:
        raise ValueError("fidelity undefined for a zero vector")
    return float(abs(np.vdot(a, b)) ** 2 / den)


def haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    from scipy.stats import unitary_group

    return unitary_group.rvs(dim, random_state=rng)


def random_state(dim: int, rng: np.random.Generator, real: bool = False) -> np.ndarray:
    v = rng.standard_normal(dim)
    if not real:
        v = v + 1j * rng.standard_normal(dim)
    v = np.asarray(v, dtype=complex)
    return v / np.linalg.norm(v)
