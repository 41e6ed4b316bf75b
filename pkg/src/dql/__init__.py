"""Divide-and-conquer quantum circuits for products of unitaries.

A product ``U_1 ... U_M v`` is evaluated with logarithmic block depth by
vectorizing operator pairs, gathering them in a binary tree and finishing
with one multiplication gate.
"""

from .circuit import CapacityError, Circuit, CostModel, GateKind, GateOp, RegisterLayout
from .decoding import DecodingError, ModeError, NotCorrectable, OutcomeDecoding, correct
from .planner import DQLPlan, DQLProblem, Ledger, ProblemError, accounting, gathering_schedule, plan, random_problem
from .simulator import PostSelection, StateVector, postselect, run, sample
from .synthesis import SynthesisMode

__all__ = [
    "CapacityError",
    "Circuit",
    "CostModel",
    "DQLPlan",
    "DQLProblem",
    "DecodingError",
    "GateKind",
    "GateOp",
    "Ledger",
    "ModeError",
    "NotCorrectable",
    "OutcomeDecoding",
    "PostSelection",
    "ProblemError",
    "RegisterLayout",
    "StateVector",
    "SynthesisMode",
    "accounting",
    "correct",
    "gathering_schedule",
    "plan",
    "postselect",
    "random_problem",
    "run",
    "sample",
]
