"""Command-line front end.

Subcommands: ``plan``, ``verify``, ``simulate``, ``bench``, ``decode``.
Exit codes: 0 success, 1 verification failure, 2 input error, 3 capacity error.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import io as _io
import json
import logging
import sys
import time
from dataclasses import fields
from pathlib import Path

import numpy as np

from . import io
from .circuit import SIM_CAP, CapacityError, CostModel
from .decoding import DecodingError
from .linalg import ATOL_SIM
from .planner import DQLPlan, ProblemError, plan, random_problem
from .synthesis import SynthesisError, SynthesisMode
from .verify import simulate_outcomes, verify_fast_path, verify_plan

log = logging.getLogger("dql")

EXIT_OK, EXIT_VERIFY, EXIT_INPUT, EXIT_CAPACITY = 0, 1, 2, 3

DEFAULTS = {"mode": "exact", "seed": 0, "shots": 1024, "tol": ATOL_SIM, "cap": SIM_CAP}
BENCH_FIELDS = [
    "n", "M", "mode", "block_depth", "cost_depth", "gu_count", "qubits", "total_qubits",
    "sequential_depth", "fidelity", "probability", "wall_time", "method",
]


def load_config(path: str | None) -> tuple[dict, CostModel]:
    """INI file with a ``[dql]`` section (mode, seed, shots, tol, cap) and an
    optional ``[cost]`` section holding cost-model constants."""
    settings = dict(DEFAULTS)
    if path is None:
        return settings, CostModel()
    cp = configparser.ConfigParser()
    try:
        if not cp.read(path):
            raise io.InputError("cannot read config file", path)
    except configparser.Error as exc:
        raise io.InputError(str(exc), path) from exc
    casts = {"mode": str, "seed": int, "shots": int, "tol": float, "cap": int}
    if cp.has_section("dql"):
        for key, value in cp.items("dql"):
            if key not in casts:
                raise io.InputError(f"unknown key {key!r}", f"{path}[dql]")
            try:
                settings[key] = casts[key](value)
            except ValueError as exc:
                raise io.InputError(str(exc), f"{path}[dql].{key}") from exc
    cost_kwargs = {}
    if cp.has_section("cost"):
        known = {f.name for f in fields(CostModel)} - {"overrides"}
        for key, value in cp.items("cost"):
            if key not in known:
                raise io.InputError(f"unknown cost constant {key!r}", f"{path}[cost]")
            try:
                cost_kwargs[key] = int(value)
            except ValueError as exc:
                raise io.InputError(str(exc), f"{path}[cost].{key}") from exc
    return settings, CostModel(**cost_kwargs)


def resolve(args: argparse.Namespace) -> tuple[dict, CostModel]:
    settings, cost = load_config(args.config)
    for key in DEFAULTS:
        val = getattr(args, key, None)
        if val is not None:
            settings[key] = val
    return settings, cost


def _load_problem(args, settings):
    if args.random is not None:
        n, M = args.random
        return random_problem(n, M, settings["seed"], real_v=settings["mode"] == SynthesisMode.LCU.value)
    if not args.input:
        raise io.InputError("give a problem file or --random N M")
    return io.problem_from_json(io.load_json(args.input), seed=settings["seed"])


def _load_plan_or_problem(args, settings, cost) -> DQLPlan:
    if args.input and args.random is None:
        data = io.load_json(args.input)
        if isinstance(data, dict) and data.get("format") == io.PLAN_FORMAT:
            return io.plan_from_json(data)
        problem = io.problem_from_json(data, seed=settings["seed"])
    else:
        problem = _load_problem(args, settings)
    return plan(problem, settings["mode"], swaps=not args.no_swaps,
                full_control=not args.minimal_control, cost_model=cost)


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def ledger_table(p: DQLPlan) -> str:
    led = p.ledger
    rows = [
        ("n", led.n), ("M", f"{led.M} (input {led.M_original})" if led.padded else led.M),
        ("d_U", led.d_U), ("d_G", led.d_G), ("d_V", led.d_V),
        ("gathering layers", led.gathering_layers), ("block depth", led.block_depth),
        ("sequential depth", led.sequential_depth), ("gu_count", led.gu_count), ("vu_count", led.vu_count),
        ("qubits", led.qubit_count), ("ancillas", led.ancilla_count),
        ("total qubits", led.total_qubits), ("circuit depth", led.circuit_depth),
        ("cost depth", led.cost_depth), ("sequential cost depth", led.sequential_cost_depth),
    ]
    width = max(len(k) for k, _ in rows)
    return "".join(f"{k:<{width}}  {v}\n" for k, v in rows)


def cmd_plan(args) -> int:
    settings, cost = resolve(args)
    p = _load_plan_or_problem(args, settings, cost)
    text = io.dumps(io.plan_to_json(p, args.budget)) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    if args.json and not args.out:
        sys.stdout.write(text)
    else:
        sys.stdout.write(ledger_table(p))
    return EXIT_OK


def cmd_verify(args) -> int:
    settings, cost = resolve(args)
    p = _load_plan_or_problem(args, settings, cost)
    if args.fast_path:
        report = verify_fast_path(p, settings["tol"])
    else:
        try:
            report = verify_plan(p, settings["tol"], settings["cap"])
        except CapacityError as exc:
            print(f"capacity error: {exc}", file=sys.stderr)
            return EXIT_CAPACITY
    d = report.as_dict()
    if args.json or args.out:
        _emit(io.dumps(d) + "\n", args.out)
    if not args.json:
        print(f"method       {report.method}")
        print(f"fidelity     {report.fidelity:.15f}")
        print(f"probability  {report.probability:.6e} (predicted {report.expected_probability:.6e})")
        dc = report.depth_comparison
        print(f"depth        sequential {dc['sequential_blocks']} blocks / {dc['sequential_cost']} cost, "
              f"dql {dc['dql_blocks']} blocks / {dc['dql_cost']} cost")
        print(f"runtime      {report.runtime:.3f}s")
        print("PASS" if report.passed else f"FAIL (fidelity below 1 - {settings['tol']:g})")
    return EXIT_OK if report.passed else EXIT_VERIFY


def cmd_simulate(args) -> int:
    settings, cost = resolve(args)
    p = _load_plan_or_problem(args, settings, cost)
    if p.layout.num_qubits > settings["cap"]:
        print(f"capacity error: plan needs {p.layout.num_qubits} qubits (cap {settings['cap']})", file=sys.stderr)
        return EXIT_CAPACITY
    summary = simulate_outcomes(p, settings["shots"], settings["seed"], settings["cap"])
    if args.json or args.out:
        _emit(io.dumps(summary) + "\n", args.out)
    if not args.json:
        for bits, count in sorted(summary["histogram"].items(), key=lambda kv: (-kv[1], kv[0])):
            print(f"{bits}  {count}")
        if not summary["decoding_available"]:
            print(summary["notice"])
        else:
            print(f"correctable fraction   {summary['correctable_fraction']:.4f}")
            print(f"LCU failure fraction   {summary['lcu_failure_fraction']:.4f}")
            fids = [e["fidelity"] for e in summary["outcomes"] if "fidelity" in e]
            if fids:
                print(f"min corrected fidelity {min(fids):.12f}")
    return EXIT_OK


def cmd_decode(args) -> int:
    settings, cost = resolve(args)
    p = _load_plan_or_problem(args, settings, cost)
    dec = p.decoding
    if not dec.available:
        print("decoding unavailable: exact-unitary plans have no Pauli form for residual branches", file=sys.stderr)
        return EXIT_INPUT
    print("qubits " + " ".join(map(str, dec.qubits)))
    entries = [dec.decode(b) for b in args.bits] if args.bits else list(dec.entries(args.budget))
    for e in entries:
        print(f"{e.bits}  {e.descriptor}")
    if not args.bits and dec.size > len(entries):
        print(f"... {dec.size - len(entries)} more entries (raise --budget)")
    return EXIT_OK


def instance_seed(seed: int, n: int, M: int) -> int:
    return int(np.random.SeedSequence([seed, n, M]).generate_state(1)[0])


def bench_row(n: int, M: int, mode: str, seed: int, cap: int, tol: float, cost: CostModel) -> dict:
    t0 = time.perf_counter()
    problem = random_problem(n, M, instance_seed(seed, n, M), real_v=mode == SynthesisMode.LCU.value)
    p = plan(problem, mode, cost_model=cost)
    if p.layout.num_qubits <= cap:
        report = verify_plan(p, tol, cap)
    else:
        report = verify_fast_path(p, tol)
    led = p.ledger
    return {
        "n": n, "M": M, "mode": mode, "block_depth": led.block_depth, "cost_depth": led.cost_depth,
        "gu_count": led.gu_count, "qubits": led.qubit_count, "total_qubits": led.total_qubits,
        "sequential_depth": led.sequential_depth, "fidelity": f"{report.fidelity:.15f}",
        "probability": f"{report.probability:.9e}", "wall_time": f"{time.perf_counter() - t0:.4f}",
        "method": report.method,
    }


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc


def cmd_bench(args) -> int:
    settings, cost = resolve(args)
    buf = _io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=BENCH_FIELDS, lineterminator="\n")
    writer.writeheader()
    for n in args.n:
        for M in args.m:
            row = bench_row(n, M, settings["mode"], settings["seed"], settings["cap"], settings["tol"], cost)
            writer.writerow(row)
            log.info("n=%d M=%d done in %ss", n, M, row["wall_time"])
    _emit(buf.getvalue(), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--mode", choices=[m.value for m in SynthesisMode], default=None)
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--tol", type=float, default=None, help="verification tolerance on 1 - fidelity")
    common.add_argument("--cap", type=int, default=None, help="simulation qubit cap")
    common.add_argument("--out", default=None, help="write the JSON/CSV result here")
    common.add_argument("--config", default=None, help="INI file with [dql] and [cost] sections")
    common.add_argument("--json", action="store_true", help="print JSON instead of a table")
    common.add_argument("-v", "--verbose", action="store_true")

    source = argparse.ArgumentParser(add_help=False)
    source.add_argument("input", nargs="?", help="problem JSON (or a plan JSON)")
    source.add_argument("--random", nargs=2, type=int, metavar=("N", "M"), help="random Haar instance")
    source.add_argument("--no-swaps", action="store_true", help="swap-free gathering layout")
    source.add_argument("--minimal-control", action="store_true",
                        help="control only the MCZ inside each G_u LCU block")

    ap = argparse.ArgumentParser(prog="dql", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("plan", parents=[common, source], help="build a plan and print its ledger")
    sp.add_argument("--budget", type=int, default=256, help="max decoding-table entries written")
    sp.set_defaults(func=cmd_plan)

    sp = sub.add_parser("verify", parents=[common, source], help="compare the circuit against the product")
    sp.add_argument("--fast-path", action="store_true",
                    help="verification mode: apply the gathering/multiplication maps densely, no ancillas")
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("simulate", parents=[common, source], help="sample and decode outcomes")
    sp.add_argument("--shots", type=int, default=None)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("decode", parents=[common, source], help="print the decoding table")
    sp.add_argument("--bits", nargs="+", default=None, help="decode only these outcome strings")
    sp.add_argument("--budget", type=int, default=64)
    sp.set_defaults(func=cmd_decode)

    sp = sub.add_parser("bench", parents=[common], help="sweep n and M, write CSV")
    sp.add_argument("--n", type=_int_list, default=[1], help="comma-separated n values")
    sp.add_argument("--m", type=_int_list, default=[2, 4, 8, 16], help="comma-separated M values")
    sp.set_defaults(func=cmd_bench)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (io.InputError, ProblemError, SynthesisError, DecodingError, json.JSONDecodeError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except CapacityError as exc:
        print(f"capacity error: {exc}; try --fast-path", file=sys.stderr)
        return EXIT_CAPACITY


if __name__ == "__main__":
    sys.exit(main())
