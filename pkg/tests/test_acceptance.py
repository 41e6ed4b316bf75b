"""Acceptance gate: eight criteria at their stated tolerances.

Each test records a single PASS/FAIL line (shown in the pytest terminal
summary).  Run ``python3 tests/test_acceptance.py`` for the lines alone.
"""

import itertools
import time

import numpy as np
from scipy.linalg import expm

from dql.circuit import unitary
from dql.linalg import (
    PauliString,
    devectorize,
    fidelity,
    gather_exact,
    gather_matrix,
    haar_unitary,
    multiply_exact,
    multiply_matrix,
    pauli_x_string,
    random_state,
    vec_identity,
    vectorize,
)
from dql.planner import DQLProblem, ceil_log2, formula_block_depth, plan, random_problem
from dql.simulator import PostSelection, branch_amplitudes, run
from dql.synthesis import (
    SynthesisMode,
    VuSpec,
    gu_dense,
    gu_exponential_circuit,
    gu_lcu_block,
    gu_lcu_probability_diag,
    hadamard_power,
    lcu_success_probability,
    vu_dense,
    vu_lcu_block,
    vu_lcu_probability,
)

CONFIGS = [(1, 2), (1, 4), (1, 6), (1, 8), (1, 14), (2, 2), (2, 4), (2, 8), (3, 2), (3, 4)]


def _kept_output(p):
    s = run(p.circuit())
    return branch_amplitudes(s, PostSelection(p.postselect_qubits))


# 1. end-to-end equivalence

def check_end_to_end():
    t0 = time.perf_counter()
    worst = {"exact": 1.0, "lcu": 1.0}
    count = 0
    for mode, tol in (("exact", 1e-9), ("lcu", 1e-8)):
        for (n, M), rep in itertools.product(CONFIGS, range(5)):
            seed = 1000 * n + 10 * M + rep
            p = plan(random_problem(n, M, seed=seed, real_v=mode == "lcu"), mode)
            f = fidelity(_kept_output(p), p.problem.target_state())
            worst[mode] = min(worst[mode], f)
            count += 1
    elapsed = time.perf_counter() - t0
    ok = worst["exact"] >= 1 - 1e-9 and worst["lcu"] >= 1 - 1e-8 and elapsed <= 60
    detail = (f"{count} instances, worst 1-F exact {1 - worst['exact']:.1e}, "
              f"lcu {1 - worst['lcu']:.1e}, {elapsed:.1f}s")
    return ok, detail


# 2. accounting exactness

def check_accounting():
    failures = []
    for n, mode, M in itertools.product((1, 2), ("exact", "lcu"), range(2, 17, 2)):
        p = plan(random_problem(n, M, seed=M, real_v=True), mode)
        led = p.ledger
        combining = sum(b.group == "combine" for b in p.blocks)
        checks = {
            "gu_count": led.gu_count == M // 2 - 1,
            "vu_count": led.vu_count == 1,
            "qubits": led.qubit_count == n * M,
            "layers": led.gathering_layers == ceil_log2(M) - 1,
            "block_depth": led.block_depth == formula_block_depth(M, led.d_U, led.d_G, led.d_V),
        }
        if M & (M - 1):
            checks["combining"] = combining == bin(M).count("1") - 1
        else:
            checks["combining"] = combining == 0
        failures += [f"n={n} {mode} M={M} {k}" for k, ok in checks.items() if not ok]
    return not failures, "; ".join(failures[:5]) or "even M in 2..16, n in {1,2}, both modes"


# 3. G_u identities

def check_gu(rng):
    worst = 0.0
    for n in (1, 2, 3):
        N = 2**n
        g = gu_dense(n, SynthesisMode.LCU)
        e = expm(1j * np.pi / N * g)
        worst = max(worst, np.max(np.abs(g @ g - N * g)), np.max(np.abs(N / 2 * (np.eye(N * N) - e) - g)))
        circ = np.max(np.abs(unitary(gu_exponential_circuit(n)) - e))
        if circ > 1e-9 or worst > 1e-10:
            return False, f"n={n}: identity error {worst:.1e}, circuit error {circ:.1e}"
        block = gu_lcu_block(n)
        for _ in range(20):
            psi = random_state(N * N, rng)
            out = run(block, np.kron(psi, [1, 0])).amplitudes.reshape(-1, 2)
            b0, b1 = out[:, 0], out[:, 1]
            err = max(np.max(np.abs(b0 - 0.5 * (psi - e @ psi))), np.max(np.abs(b1 - 0.5 * (psi + e @ psi))))
            if err > 1e-10:
                return False, f"n={n}: LCU branch error {err:.1e}"
    return True, f"n=1..3, worst identity error {worst:.1e}"


# 4. V_u identities

def check_vu(rng):
    worst = 0.0
    for n in (1, 2, 3):
        hn = hadamard_power(n)
        for _ in range(20):
            v = rng.standard_normal(2**n)
            s = VuSpec(v, SynthesisMode.LCU)
            ang = s.arccos_angles
            lam = 0.5 * (np.diag(np.exp(1j * ang)) + np.diag(np.exp(-1j * ang)))
            rebuilt = s.lambda_max * hn @ lam @ hn
            pauli_sum = sum(v[j] * PauliString.from_basis_index(j, n).as_matrix() for j in range(2**n))
            worst = max(worst, np.max(np.abs(rebuilt - pauli_sum)))
            if not np.array_equal(vu_dense(v, SynthesisMode.LCU)[0], v.astype(complex)):
                return False, f"n={n}: first row differs from v"
            if np.max(np.abs(rebuilt[0] - v)) > 1e-10:
                return False, f"n={n}: rebuilt first row differs from v"
            branch = unitary(vu_lcu_block(v))[0::2, 0::2] * s.lambda_max
            worst = max(worst, np.max(np.abs(branch - pauli_sum)))
    return worst <= 1e-10, f"60 vectors, worst error {worst:.1e}"


# 5. probability formulas

def check_probabilities(rng):
    worst_g = worst_v = 0.0
    for i in range(50):
        n = 1 + i % 2
        N = 2**n
        w = random_state(N, rng)
        psi = vectorize(np.diag(w))
        p = lcu_success_probability(gu_lcu_block(n), psi)
        worst_g = max(worst_g, abs(p - gu_lcu_probability_diag(w)))
    uniform = min(lcu_success_probability(gu_lcu_block(n), vec_identity(n, normalized=True)) for n in (1, 2, 3))
    for i in range(50):
        n = 1 + i % 3
        v = rng.standard_normal(2**n)
        w = random_state(2**n, rng)
        worst_v = max(worst_v, abs(lcu_success_probability(vu_lcu_block(v), w) - vu_lcu_probability(v, w)))
    ok = worst_g <= 1e-12 and abs(uniform - 1) <= 1e-12 and worst_v <= 1e-10
    return ok, f"W^2/N error {worst_g:.1e}, uniform {uniform:.15f}, V_u error {worst_v:.1e}"


# 6. decoding soundness

def _outcomes(p):
    s = run(p.circuit())
    q = p.postselect_qubits
    anc = set(p.layout.ancilla_qubits())
    for combo in itertools.product("01", repeat=len(q)):
        bits = "".join(combo)
        failed = any(b == "1" for qb, b in zip(q, bits) if qb in anc)
        yield bits, failed, branch_amplitudes(s, PostSelection.from_bits(q, bits))


def check_decoding(rng):
    from dql.decoding import correct, inserted_product
    from dql.linalg import X, kron

    worst_res = 0.0
    worst_total = 0.0
    for M in (1, 2, 3, 4):
        for rep in range(3):
            p = plan(random_problem(1, M, seed=500 + 10 * M + rep, real_v=True), "lcu")
            total = 0.0
            for bits, failed, amps in _outcomes(p):
                total += float(np.vdot(amps, amps).real)
                if failed:
                    continue
                d = p.decoding.decode(bits)
                expect = p.target_scale * inserted_product(p.problem, d.insertions)
                worst_res = max(worst_res, np.max(np.abs(amps - expect)))
            worst_total = max(worst_total, abs(total - 1))
    worst_fid = 1.0
    for n in (1, 2):
        strings = [kron(*[X if b else np.eye(2) for b in bits]) for bits in itertools.product((0, 1), repeat=n)]
        for M in (1, 2, 3, 4):
            ops = tuple(strings[rng.integers(len(strings))] for _ in range(M))
            p = plan(DQLProblem(n, ops, rng.standard_normal(2**n) + 0j), "lcu")
            target = p.problem.target_state()
            for bits, failed, amps in _outcomes(p):
                if failed or np.vdot(amps, amps).real < 1e-24:
                    continue
                fixed = correct(amps / np.linalg.norm(amps), p.decoding.decode(bits), p.problem)
                worst_fid = min(worst_fid, fidelity(fixed.amplitudes, target))
    ok = worst_res <= 1e-9 and worst_total <= 1e-9 and worst_fid >= 1 - 1e-9
    return ok, f"residual error {worst_res:.1e}, |sum p - 1| {worst_total:.1e}, worst corrected 1-F {1 - worst_fid:.1e}"


# 7. M=14 structure

def check_m14():
    p = plan(random_problem(1, 14, seed=0, real_v=True), "lcu")
    groups = [b.group for b in p.blocks]
    counts = {g: groups.count(g) for g in ("G8", "G4", "combine")}
    g8 = [b for b in p.blocks if b.group == "G8"]
    g4 = [b for b in p.blocks if b.group == "G4"]
    ok = (
        counts == {"G8": 3, "G4": 1, "combine": 2}
        and len(p.blocks) == 6
        and (g8[-1].result.lo, g8[-1].result.hi) == (1, 8)
        and (g4[0].result.lo, g4[0].result.hi) == (9, 12)
        and (p.blocks[-1].result.lo, p.blocks[-1].result.hi) == (1, 14)
    )
    return ok, f"{counts}, {len(p.gathering)} gathering layers"


# 8. vectorization calculus

def check_calculus(trials=1000):
    rng = np.random.default_rng(8)
    worst = {}

    def c(shape):
        return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)

    def note(key, err):
        worst[key] = max(worst.get(key, 0.0), err)

    G = {n: gather_matrix(n) for n in (1, 2)}
    for t in range(trials):
        N = (2, 4, 8)[t % 3]
        a, b = c((N, N)), c((N, N))
        note("vec", np.max(np.abs(vectorize(a @ b) - np.kron(b.T, a) @ vectorize(np.eye(N)))))
        n = 1 + t % 2
        x, y = c(4**n), c(4**n)
        note("gather", np.max(np.abs(gather_exact(x, y, n) - G[n] @ np.kron(x, y))))
        n3 = 1 + t % 3
        at, v = c(4**n3), c(2**n3)
        note("multiply", np.max(np.abs(multiply_exact(at, v, n3) - multiply_matrix(v) @ at)))
        r, k = rng.integers(1, 9, size=2)
        m = c((r, k))
        note("devec", np.max(np.abs(devectorize(vectorize(m), r, k) - m)))
        np_ = 1 + t % 3
        j, l = rng.integers(0, 2**np_, size=2)
        pj, pl = pauli_x_string(int(j), np_), pauli_x_string(int(l), np_)
        note("pauli", np.max(np.abs(pj.as_matrix() @ pl.as_matrix() - (pj * pl).as_matrix())))
    ok = all(e <= 1e-12 for e in worst.values())
    return ok, ", ".join(f"{k} {e:.1e}" for k, e in worst.items()) + f" over {trials} trials each"


# pytest entry points

def test_criterion_1_end_to_end(acceptance_report):
    ok, detail = check_end_to_end()
    acceptance_report(1, "end-to-end equivalence", ok, detail)
    assert ok, detail


def test_criterion_2_accounting(acceptance_report):
    ok, detail = check_accounting()
    acceptance_report(2, "accounting exactness", ok, detail)
    assert ok, detail


def test_criterion_3_gu_identities(rng, acceptance_report):
    ok, detail = check_gu(rng)
    acceptance_report(3, "G_u identities", ok, detail)
    assert ok, detail


def test_criterion_4_vu_identities(rng, acceptance_report):
    ok, detail = check_vu(rng)
    acceptance_report(4, "V_u identities", ok, detail)
    assert ok, detail


def test_criterion_5_probabilities(rng, acceptance_report):
    ok, detail = check_probabilities(rng)
    acceptance_report(5, "probability formulas", ok, detail)
    assert ok, detail


def test_criterion_6_decoding(rng, acceptance_report):
    ok, detail = check_decoding(rng)
    acceptance_report(6, "decoding soundness", ok, detail)
    assert ok, detail


def test_criterion_7_m14_structure(acceptance_report):
    ok, detail = check_m14()
    acceptance_report(7, "M=14 gathering structure", ok, detail)
    assert ok, detail


def test_criterion_8_calculus(acceptance_report):
    ok, detail = check_calculus()
    acceptance_report(8, "vectorization calculus", ok, detail)
    assert ok, detail


if __name__ == "__main__":
    gen = np.random.default_rng(20240611)
    checks = [
        (1, "end-to-end equivalence", check_end_to_end),
        (2, "accounting exactness", check_accounting),
        (3, "G_u identities", lambda: check_gu(gen)),
        (4, "V_u identities", lambda: check_vu(gen)),
        (5, "probability formulas", lambda: check_probabilities(gen)),
        (6, "decoding soundness", lambda: check_decoding(gen)),
        (7, "M=14 gathering structure", check_m14),
        (8, "vectorization calculus", check_calculus),
    ]
    failed = 0
    for number, title, fn in checks:
        ok, detail = fn()
        failed += not ok
        print(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {title}  ({detail})")
    raise SystemExit(1 if failed else 0)
