"""Interpreter and verifier for the CQP process calculus over d-level qudits."""

from cqpd.qudit import (
    GateKind,
    GateSpec,
    MeasurementOutcome,
    QuantumState,
    bell_state,
    discard,
    fidelity,
    join,
    make_state,
    measure,
    apply_gate,
    omega,
)
from cqpd.syntax import Program, parse, pretty, typecheck

__all__ = [
    "GateKind",
    "GateSpec",
    "MeasurementOutcome",
    "Program",
    "QuantumState",
    "apply_gate",
    "bell_state",
    "discard",
    "fidelity",
    "join",
    "make_state",
    "measure",
    "omega",
    "parse",
    "pretty",
    "typecheck",
]

__version__ = "0.1.0"
