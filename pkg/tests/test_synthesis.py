import numpy as np
import pytest
from scipy.linalg import expm

from dql.circuit import GateKind, depth, unitary
from dql.linalg import PauliString, is_unitary, random_state, vec_identity
from dql.simulator import run
from dql.synthesis import (
    DENSE_CAP,
    SynthesisError,
    SynthesisMode,
    VuSpec,
    gu_dense,
    gu_exponential_circuit,
    gu_lcu_block,
    gu_lcu_probability,
    gu_lcu_probability_diag,
    hadamard_power,
    lcu_success_probability,
    prep_vec_identity,
    s_ladder,
    vu_dense,
    vu_lcu_block,
    vu_lcu_probability,
    walsh_hadamard,
)

EXACT, LCU = SynthesisMode.EXACT, SynthesisMode.LCU


def rand_state(rng, dim):
    return random_state(dim, rng)


# preparation and S ladder

def test_prep_bell_state():
    out = run(prep_vec_identity(1)).amplitudes
    assert np.allclose(out, np.array([1, 0, 0, 1]) / np.sqrt(2))


@pytest.mark.parametrize("n", [1, 2, 3])
def test_prep_gives_normalized_vec_identity(n):
    assert np.allclose(run(prep_vec_identity(n)).amplitudes, vec_identity(n, normalized=True))
    assert depth(prep_vec_identity(n)) == 2


def test_s_ladder():
    u = unitary(s_ladder(1))
    assert np.array_equal(u, [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]])
    for n in (1, 2, 3):
        u = unitary(s_ladder(n))
        assert np.allclose(u @ u, np.eye(4**n))
    assert all(depth(s_ladder(n)) == 1 for n in range(1, 7))


# G_u

def test_gu_dense_n1():
    g = gu_dense(1, LCU)
    xx = np.fliplr(np.eye(4))
    assert np.array_equal(g, np.eye(4) + xx)
    assert np.array_equal(g[0], [1, 0, 0, 1])


@pytest.mark.parametrize("n", [1, 2, 3])
def test_gu_dense_projector_identity(n):
    N = 2**n
    g = gu_dense(n, LCU)
    assert np.allclose(g @ g, N * g, atol=1e-10)
    assert np.allclose(g[0], vec_identity(n), atol=0)
    ev = np.sort(np.linalg.eigvalsh(g))
    assert np.allclose(ev[: N * N - N], 0, atol=1e-10)
    assert np.allclose(ev[N * N - N:], N, atol=1e-10)
    assert np.allclose(N / 2 * (np.eye(N * N) - expm(1j * np.pi / N * g)), g, atol=1e-10)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_gu_dense_exact_unitary(n):
    g = gu_dense(n, EXACT)
    assert is_unitary(g, 1e-10)
    assert np.allclose(g[0], vec_identity(n, normalized=True), atol=1e-15)


def test_gu_dense_cap():
    with pytest.raises(SynthesisError):
        gu_dense(DENSE_CAP + 1)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_gu_exponential_circuit_matches_expm(n):
    N = 2**n
    g = gu_dense(n, LCU)
    u = unitary(gu_exponential_circuit(n))
    assert np.max(np.abs(u - expm(1j * np.pi / N * g))) <= 1e-9
    assert np.allclose(N / 2 * (np.eye(N * N) - u), g, atol=1e-9)


def test_gu_exponential_eigenvalues_n1():
    u = unitary(gu_exponential_circuit(1))
    ev = np.sort_complex(np.round(np.linalg.eigvals(u), 12))
    assert np.allclose(sorted(ev.real), [-1, -1, 1, 1])
    w = vec_identity(1, normalized=True)
    assert np.allclose(u @ w, -w)


def _lcu_branches(block, psi):
    full = np.kron(psi, [1, 0])
    out = run(block, full).amplitudes.reshape(-1, 2)
    return out[:, 0], out[:, 1]


@pytest.mark.parametrize("n", [1, 2])
@pytest.mark.parametrize("full_control", [True, False])
def test_gu_lcu_block_both_branches(rng, n, full_control):
    N = 2**n
    e = expm(1j * np.pi / N * gu_dense(n, LCU))
    block = gu_lcu_block(n, full_control)
    for _ in range(20):
        psi = rand_state(rng, N * N)
        b0, b1 = _lcu_branches(block, psi)
        assert np.allclose(b0, 0.5 * (psi - e @ psi), atol=1e-10)
        assert np.allclose(b1, 0.5 * (psi + e @ psi), atol=1e-10)
        assert np.allclose(b0, gu_dense(n, LCU) @ psi / N, atol=1e-10)


def test_gu_lcu_full_control_gate_counts():
    for n in (1, 2, 3):
        counts = gu_lcu_block(n, True).gate_counts()
        assert counts["ControlledHadamard"] == 4 * n
        assert counts["CCX"] == 2 * n
        assert counts["CX"] == 2
        assert counts["Hadamard"] == 2
        assert counts["Z"] == 1
        assert counts["MultiControlledZ0"] == 1
        mcz_op = [op for op in gu_lcu_block(n, True).ops if op.kind is GateKind.MCZ][0]
        assert len(mcz_op.qubits) == n + 1


def test_gu_lcu_probability_cases(rng):
    for n in (1, 2):
        N = 2**n
        block = gu_lcu_block(n)
        assert lcu_success_probability(block, vec_identity(n, normalized=True)) == pytest.approx(1, abs=1e-12)
        # diagonal input with zero sum
        w = rng.standard_normal(N)
        w -= w.mean()
        psi = np.diag(w).reshape(-1, order="F") / np.linalg.norm(w)
        assert lcu_success_probability(block, psi) == pytest.approx(0, abs=1e-12)
        for _ in range(10):
            w = rand_state(rng, N)
            psi = np.diag(w).reshape(-1, order="F")
            p = lcu_success_probability(block, psi)
            assert abs(p - gu_lcu_probability_diag(w)) <= 1e-12
            g = rand_state(rng, N * N)
            assert abs(lcu_success_probability(block, g) - gu_lcu_probability(g, n)) <= 1e-12


def test_lcu_success_probability_rejects_wrong_block():
    with pytest.raises(SynthesisError):
        lcu_success_probability(prep_vec_identity(1), np.ones(4) / 2)


# V_u

def test_walsh_hadamard_matches_dense(rng):
    for n in (1, 2, 3):
        v = rng.standard_normal(2**n)
        hn = hadamard_power(n) * np.sqrt(2**n)
        assert np.allclose(walsh_hadamard(v), hn @ v)


def test_vu_spec_validation():
    with pytest.raises(SynthesisError):
        VuSpec(np.zeros(2), LCU)
    with pytest.raises(SynthesisError):
        VuSpec(np.array([1, 1j]), LCU)
    with pytest.raises(SynthesisError):
        VuSpec(np.ones(3), EXACT)
    assert VuSpec(np.array([1, 1j]), EXACT).branch_scale == pytest.approx(1 / np.sqrt(2))


def test_vu_dense_basis_vector_is_identity():
    v = np.eye(4)[0]
    assert np.array_equal(vu_dense(v, LCU), np.eye(4))


@pytest.mark.parametrize("n", [1, 2, 3])
def test_vu_dense_first_row_and_diagonalization(rng, n):
    for _ in range(5):
        v = rng.standard_normal(2**n)
        vu = vu_dense(v, LCU)
        assert np.array_equal(vu[0].real, v)
        hn = hadamard_power(n)
        d = hn @ vu @ hn
        assert np.allclose(d, np.diag(np.diagonal(d)), atol=1e-12)
        assert np.allclose(np.diagonal(d), VuSpec(v, LCU).eigenvalues, atol=1e-12)
        # the Pauli sum with X^(i)|0> = |i> is a sum of commuting X strings
        ref = sum(v[i] * PauliString.from_basis_index(i, n).as_matrix() for i in range(2**n))
        assert np.allclose(vu, ref)
        ex = vu_dense(v + 1j * rng.standard_normal(2**n), EXACT)
        assert is_unitary(ex, 1e-10)


def test_vu_eigenvalue_bound(rng):
    for _ in range(20):
        s = VuSpec(rng.standard_normal(8), LCU)
        assert np.all(np.abs(s.eigenvalues) <= s.lambda_max + 1e-12)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_vu_lcu_block_ancilla_zero_branch(rng, n):
    for _ in range(5):
        v = rng.standard_normal(2**n)
        s = VuSpec(v, LCU)
        block = vu_lcu_block(v)
        u = unitary(block)
        # rows/cols where the ancilla (last qubit) is 0
        branch = u[0::2, 0::2]
        assert np.allclose(branch * s.lambda_max, vu_dense(v, LCU), atol=1e-10)
        for _ in range(3):
            w = rand_state(rng, 2**n)
            assert abs(lcu_success_probability(block, w) - vu_lcu_probability(v, w)) <= 1e-10


def test_vu_lcu_extreme_eigenvalue():
    v = np.array([1.0, 0, 0, 0])
    s = VuSpec(v, LCU)
    assert np.allclose(s.arccos_angles, 0)
    assert np.allclose(unitary(vu_lcu_block(v))[0::2, 0::2], np.eye(4))
