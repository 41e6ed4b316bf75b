"""Compare a plan against the sequential product and report the numbers."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .circuit import SIM_CAP, CapacityError
from .decoding import NotCorrectable, correct, inserted_product
from .linalg import ATOL_SIM, fidelity, gather_exact, multiply_exact, vec_identity
from .planner import DQLPlan
from .simulator import PostSelection, branch_amplitudes, run, sample
from .synthesis import GuSpec, SynthesisMode, VuSpec


@dataclass
class Report:
    method: str
    fidelity: float
    probability: float
    expected_probability: float
    ledger: dict
    depth_comparison: dict
    runtime: float
    tol: float = ATOL_SIM
    decoding: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.fidelity >= 1 - self.tol

    def as_dict(self) -> dict:
        d = dict(self.__dict__)
        d["passed"] = self.passed
        return d


def _depths(p: DQLPlan) -> dict:
    led = p.ledger
    return {
        "sequential_blocks": led.sequential_depth,
        "dql_blocks": led.block_depth,
        "sequential_cost": led.sequential_cost_depth,
        "dql_cost": led.cost_depth,
        "dql_circuit_depth": led.circuit_depth,
    }


def simulate_plan(p: DQLPlan, cap: int = SIM_CAP):
    """Returns the final state and the unnormalized output-register branch."""
    state = run(p.circuit(), cap=cap)
    amps = branch_amplitudes(state, PostSelection(p.postselect_qubits))
    return state, amps


def verify_plan(p: DQLPlan, tol: float = ATOL_SIM, cap: int = SIM_CAP) -> Report:
    if p.layout.num_qubits > cap:
        raise CapacityError(
            f"plan needs {p.layout.num_qubits} qubits (cap {cap}); "
            "use the dense fast path (--fast-path) to check the algebra without full simulation"
        )
    t0 = time.perf_counter()
    _, amps = simulate_plan(p, cap)
    target = p.problem.target_state()
    prob = float(np.vdot(amps, amps).real)
    fid = fidelity(amps, target) if prob > 0 else 0.0
    expected = abs(p.target_scale) ** 2 * float(np.vdot(target, target).real)
    return Report("simulation", fid, prob, expected, p.ledger.as_dict(), _depths(p), time.perf_counter() - t0, tol)


def fast_path_vector(p: DQLPlan) -> np.ndarray:
    """Dense fast path (verification only, no ancillas simulated).

    Builds each pair vector through ``vec(AB) = (B^T (x) A) vec(I)``, runs
    the plan's gathering schedule through the rectangular gathering map and
    finishes with the rectangular multiplication map, carrying the same
    per-block scale factors as the circuit's kept branch.
    """
    prob = p.problem
    n, N = prob.n, prob.N
    vecs = {}
    base = vec_identity(n, normalized=True)
    for k in range(prob.M // 2):
        u1, u2 = prob.ops[2 * k], prob.ops[2 * k + 1]
        vecs[(2 * k + 1, 2 * k + 2)] = np.kron(u1, u2.T) @ base
    g = GuSpec(n, p.mode).branch_scale
    for b in p.blocks:
        a = vecs.pop((b.left.lo, b.left.hi))
        c = vecs.pop((b.right.lo, b.right.hi))
        vecs[(b.result.lo, b.result.hi)] = g * gather_exact(a, c, n)
    (final,) = vecs.values()
    vs = VuSpec(prob.v, p.mode)
    return vs.branch_scale * multiply_exact(final, prob.v, n)


def verify_fast_path(p: DQLPlan, tol: float = ATOL_SIM) -> Report:
    t0 = time.perf_counter()
    out = fast_path_vector(p)
    target = p.problem.target_state()
    prob = float(np.vdot(out, out).real)
    expected = abs(p.target_scale) ** 2 * float(np.vdot(target, target).real)
    return Report("dense-fast-path", fidelity(out, target), prob, expected, p.ledger.as_dict(), _depths(p),
                  time.perf_counter() - t0, tol)


def simulate_outcomes(p: DQLPlan, shots: int, seed: int | None, cap: int = SIM_CAP) -> dict:
    """Sample post-selection outcomes, decode each and try to correct it."""
    state = run(p.circuit(), cap=cap)
    qubits = p.postselect_qubits
    hist = sample(state, qubits, shots, seed)
    summary = {"histogram": hist, "shots": shots, "seed": seed, "decoding_available": p.mode is SynthesisMode.LCU}
    if p.mode is not SynthesisMode.LCU:
        summary["notice"] = "decoding unavailable for exact-unitary plans"
        return summary
    dec = p.decoding
    target = p.problem.target_state()
    anc = set(p.layout.ancilla_qubits())
    lcu_fail = correctable = 0
    outcomes = []
    for bits, count in sorted(hist.items()):
        entry: dict = {"bits": bits, "count": count}
        if any(b == "1" for q, b in zip(qubits, bits) if q in anc):
            entry["status"] = "lcu-failure"
            lcu_fail += count
        else:
            d = dec.decode(bits)
            entry["effective"] = d.descriptor
            amps = branch_amplitudes(state, PostSelection.from_bits(qubits, bits))
            try:
                fixed = correct(amps / np.linalg.norm(amps), d, p.problem)
                entry["status"] = "correctable"
                entry["fidelity"] = fidelity(fixed.amplitudes, target)
                correctable += count
            except NotCorrectable as exc:
                entry["status"] = "not-correctable"
                entry["reason"] = str(exc)
                entry["fidelity_uncorrected"] = fidelity(amps, inserted_product(p.problem, d.insertions))
        outcomes.append(entry)
    summary.update({
        "outcomes": outcomes,
        "correctable_fraction": correctable / shots,
        "lcu_failure_fraction": lcu_fail / shots,
    })
    return summary
