"""Run corpus protocols, enumerate interleavings and verify outcomes."""

from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources
from typing import Any, Mapping, Optional, Sequence, Union

import numpy as np

from cqpd import oracles
from cqpd.qudit import NonSeparableError, QuantumState, discard, fidelity
from cqpd.semantics import (
    Configuration,
    InputLabel,
    Inputs,
    MixedConfiguration,
    OutputLabel,
    ProbBranch,
    ProbDistribution,
    Tau,
    TransitionLabel,
    choose_branch,
    describe,
    digest,
    initial_configuration,
    is_terminated,
    transitions,
)
from cqpd.syntax import Program, parse
from cqpd.syntax.pretty import pretty_process

TOL = 1e-9
BUILTINS = ("teleport", "sdc")


def load_builtin(name: str) -> Program:
    if name not in BUILTINS:
        raise KeyError(f"unknown builtin protocol {name!r}; choose from {', '.join(BUILTINS)}")
    text = resources.files("cqpd.corpus").joinpath(f"{name}.cqp").read_text(encoding="utf-8")
    return parse(text)


# --------------------------------------------------------------------------
# schedules and traces


@dataclass(frozen=True)
class Schedule:
    """How ``run`` resolves nondeterminism.

    ``exhaustive`` takes the first enabled transition (``enumerate_traces``
    explores all of them), ``seeded`` chooses uniformly with a seeded RNG and
    samples probabilistic branches by weight, ``scripted`` follows the given
    transition indices.
    """

    policy: str = "exhaustive"
    depth: int = 1000
    seed: Optional[int] = None
    script: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if self.policy not in ("exhaustive", "seeded", "scripted"):
            raise ValueError(f"unknown schedule policy {self.policy!r}")
        if self.depth < 1:
            raise ValueError("depth limit must be >= 1")

    @classmethod
    def exhaustive(cls, depth: int = 1000) -> Schedule:
        return cls("exhaustive", depth)

    @classmethod
    def seeded(cls, seed: int, depth: int = 1000) -> Schedule:
        return cls("seeded", depth, seed=seed)

    @classmethod
    def scripted(cls, script: Sequence[int], depth: int = 1000) -> Schedule:
        return cls("scripted", depth, script=tuple(script))


@dataclass(frozen=True)
class TraceStep:
    label: TransitionLabel
    digest: str
    config: Union[Configuration, ProbDistribution] = field(compare=False, repr=False)

    @property
    def weights(self) -> list[float]:
        if isinstance(self.config, ProbDistribution):
            return self.config.probabilities
        return [c.weight for c in self.config.lift().components]


@dataclass(frozen=True)
class Trace:
    """``status`` is terminated, deadlock, depth-exceeded or script-end."""

    dimension: int
    initial: Configuration
    steps: tuple[TraceStep, ...]
    final: Union[Configuration, ProbDistribution]
    status: str

    @property
    def labels(self) -> tuple[TransitionLabel, ...]:
        return tuple(s.label for s in self.steps)

    @property
    def residual(self) -> Optional[str]:
        if self.status == "deadlock":
            return pretty_process(self.final.term)
        return None


def _inputs(inputs) -> Inputs:
    if inputs is None:
        return Inputs()
    if isinstance(inputs, Inputs):
        return inputs
    return Inputs(dict(inputs))


def run(
    program: Program,
    d: int,
    inputs: Union[Mapping[str, Any], Inputs, None] = None,
    schedule: Optional[Schedule] = None,
) -> Trace:
    """Execute ``program`` at dimension ``d`` until it stops."""
    schedule = schedule or Schedule()
    env = _inputs(inputs)
    rng = np.random.default_rng(schedule.seed) if schedule.policy == "seeded" else None
    init = initial_configuration(program, d)
    config: Union[Configuration, ProbDistribution] = init
    steps: list[TraceStep] = []
    script = list(schedule.script)
    status = "terminated"
    while True:
        options = transitions(config, env)
        if not options:
            status = "terminated" if is_terminated(config) else "deadlock"
            break
        if len(steps) >= schedule.depth:
            status = "depth-exceeded"
            break
        if schedule.policy == "scripted":
            if not script:
                status = "script-end"
                break
            k = script.pop(0)
            if not 0 <= k < len(options):
                raise IndexError(f"scripted choice {k} out of range at step {len(steps)} ({len(options)} enabled)")
        elif schedule.policy == "seeded":
            if isinstance(config, ProbDistribution):
                k = choose_branch(config, rng)
            else:
                k = int(rng.integers(len(options))) if len(options) > 1 else 0
        else:
            k = 0
        label, config = options[k]
        steps.append(TraceStep(label, digest(config), config))
    return Trace(d, init, tuple(steps), config, status)


def enumerate_traces(
    program: Program,
    d: int,
    inputs: Union[Mapping[str, Any], Inputs, None] = None,
    depth: int = 1000,
) -> list[Trace]:
    """All maximal traces up to ``depth`` steps, one per distinct label sequence.

    Probabilistic branches are explored as separate traces.
    """
    env = _inputs(inputs)
    init = initial_configuration(program, d)
    seen: set = set()
    out: list[Trace] = []
    stack: list[tuple[Any, tuple[TraceStep, ...]]] = [(init, ())]
    while stack:
        config, steps = stack.pop()
        options = transitions(config, env)
        if not options or len(steps) >= depth:
            if not options:
                status = "terminated" if is_terminated(config) else "deadlock"
            else:
                status = "depth-exceeded"
            key = tuple(s.label for s in steps)
            if key not in seen:
                seen.add(key)
                out.append(Trace(d, init, steps, config, status))
            continue
        for label, nxt in reversed(options):
            stack.append((nxt, steps + (TraceStep(label, digest(nxt), nxt),)))
    return out


# --------------------------------------------------------------------------
# reports


@dataclass(frozen=True)
class BranchResult:
    branch: str
    expected: Any
    observed: Any
    weight: float
    fidelity: Optional[float]
    passed: bool


@dataclass(frozen=True)
class VerificationReport:
    protocol: str
    dimension: int
    branches: tuple[BranchResult, ...]
    details: Mapping[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(b.passed for b in self.branches)

    def failures(self) -> list[BranchResult]:
        return [b for b in self.branches if not b.passed]


@dataclass(frozen=True)
class Checkpoint:
    """Expected state after trace step ``index`` on the qudits of ``expected``."""

    index: int
    expected: QuantumState
    name: str = ""


def _restrict(sigma: QuantumState, names: Sequence[str]) -> QuantumState:
    extra = [q for q in sigma.names if q not in names]
    return discard(sigma, extra).reorder(names) if extra else sigma.reorder(names)


def trace_to_report(
    trace: Trace, checkpoints: Sequence[Checkpoint], protocol: str = "trace", tol: float = TOL
) -> VerificationReport:
    """Compare trace states against checkpoints, ignoring global phase.

    Every component of a mixed configuration must match; the reported
    fidelity is the worst one.
    """
    results = []
    for cp in checkpoints:
        if not -1 <= cp.index < len(trace.steps):
            raise IndexError(f"checkpoint {cp.name or cp.index} points past the trace ({len(trace.steps)} steps)")
        config = trace.initial if cp.index == -1 else trace.steps[cp.index].config
        if isinstance(config, ProbDistribution):
            raise IndexError(f"checkpoint {cp.name or cp.index} lands on a probability distribution")
        worst, observed, total = 1.0, None, 0.0
        for comp in config.lift().components:
            total += comp.weight
            try:
                got = _restrict(comp.sigma, cp.expected.names)
                f = fidelity(got, cp.expected)
            except (NonSeparableError, ValueError):
                got, f = None, 0.0
            if observed is None or f < worst:
                worst, observed = f, got
        results.append(
            BranchResult(
                branch=cp.name or f"step {cp.index}",
                expected=cp.expected,
                observed=observed,
                weight=total,
                fidelity=worst,
                passed=worst >= 1 - tol,
            )
        )
    return VerificationReport(protocol, trace.dimension, tuple(results), {"max_deviation": max(
        (1 - r.fidelity for r in results), default=0.0)})


def _released_qudit(trace: Trace, chan: str) -> Optional[str]:
    for step in trace.steps:
        if isinstance(step.label, OutputLabel) and step.label.chan == chan and len(step.label.alternatives) == 1:
            vals = step.label.alternatives[0]
            if len(vals) == 1 and isinstance(vals[0], str):
                return vals[0]
    return None


def verify_teleport_trace(trace: Trace, psi: QuantumState, tol: float = TOL) -> VerificationReport:
    """Check a finished Teleport trace: d^2 branches of weight 1/d^2 carrying psi.

    Each branch is additionally compared with the dense-matrix oracle.
    """
    d = trace.dimension
    psi_vec = psi.amplitudes
    details: dict[str, Any] = {"status": trace.status, "steps": len(trace.steps)}
    final = trace.final
    bob = _released_qudit(trace, "d")
    problems = []
    if trace.status != "terminated":
        problems.append(f"trace ended with status {trace.status}")
    if bob is None:
        problems.append("no qudit was released on d")
    if isinstance(final, ProbDistribution) or bob is None:
        details["problems"] = problems
        return VerificationReport("teleport", d, (BranchResult("trace", "terminated", trace.status, 1.0, None, False),), details)
    mixed = final.lift()
    oracle = oracles.teleport_oracle(d, psi_vec)
    input_name = next(
        (s.label.values[0] for s in trace.steps if isinstance(s.label, InputLabel) and s.label.chan == "c"), "x"
    )
    results = []
    for comp in mixed.components:
        key = tuple(int(v) for v in comp.values[-2:])
        try:
            got = discard(comp.sigma, [q for q in comp.sigma.names if q != bob])
            f = fidelity(QuantumState(d, (bob,), psi_vec), got)
        except NonSeparableError:
            got, f = None, 0.0
        ok = f >= 1 - tol and abs(comp.weight - 1 / d**2) <= tol
        g_ref, v_ref = oracle.get(key, (None, None))
        if v_ref is None:
            ok = False
            agree = 0.0
        else:
            # oracle register order is x, z, y
            order = [input_name, _partner(comp.sigma.names, bob, input_name), bob]
            full = comp.sigma.reorder(order).amplitudes
            agree = float(abs(np.vdot(v_ref, full)) ** 2)
            ok = ok and agree >= 1 - tol and abs(g_ref - comp.weight) <= tol
        results.append(
            BranchResult(
                branch=f"M1={key[0]},M2={key[1]}",
                expected=psi,
                observed=got,
                weight=comp.weight,
                fidelity=f,
                passed=ok,
            )
        )
    if len(results) != d * d:
        problems.append(f"expected {d * d} branches, found {len(results)}")
        results.append(BranchResult("branch-count", d * d, len(results), 1.0, None, False))
    details["problems"] = problems
    return VerificationReport("teleport", d, tuple(results), details)


def _partner(names: Sequence[str], bob: str, received: str) -> str:
    rest = [q for q in names if q not in (bob, received)]
    if len(rest) != 1:
        raise ValueError(f"unexpected teleport store {names}")
    return rest[0]


def verify_teleport(d: int, psi: QuantumState, schedule: Optional[Schedule] = None) -> VerificationReport:
    """Teleport ``psi`` at dimension ``d`` and check every measurement branch."""
    if psi.n != 1 or psi.d != d:
        raise ValueError(f"psi must be a single qudit of dimension {d}")
    trace = run(load_builtin("teleport"), d, {"x": psi}, schedule or Schedule())
    return verify_teleport_trace(trace, psi)


def _sdc_checkpoints(trace: Trace, d: int, a: int, b: int) -> list[Checkpoint]:
    states = oracles.sdc_paper_states(d, a, b)
    idx: dict[str, int] = {}
    actions_after_input: list[int] = []
    for i, step in enumerate(trace.steps):
        lab = step.label
        if isinstance(lab, Tau) and lab.kind == "action" and "Rc" in lab.detail and "psi1" not in idx:
            idx["psi1"] = i
        elif isinstance(lab, InputLabel):
            idx["input"] = i
        elif isinstance(lab, Tau) and lab.kind == "action" and "input" in idx:
            actions_after_input.append(i)
        elif isinstance(lab, Tau) and lab.kind == "comm" and "send" not in idx:
            idx["send"] = i
    for name, i in zip(("psi2", "psi3", "psi4", "psi5"), actions_after_input):
        idx[name] = i
    names = ("q1", "q2")

    def cp(key, state_key):
        return Checkpoint(idx[key], QuantumState(d, names, states[state_key]), f"{state_key}@{key}")

    plan = [("psi1", "psi1"), ("input", "psi1"), ("psi2", "psi2"), ("psi3", "psi3"), ("send", "psi3"),
            ("psi4", "psi4"), ("psi5", "psi5")]
    out = [cp(k, s) for k, s in plan if k in idx]
    if trace.steps:
        out.append(Checkpoint(len(trace.steps) - 1, QuantumState(d, names, states["psi6"]), "psi6@final"))
    return out


def verify_sdc(d: int, a: int, b: int, schedule: Optional[Schedule] = None) -> VerificationReport:
    """Superdense coding of ``(a, b)``: checkpoints, certainty and decoding."""
    if not (0 <= a < d and 0 <= b < d):
        raise ValueError(f"(a, b) = ({a}, {b}) out of range for d={d}")
    trace = run(load_builtin("sdc"), d, {"a": a, "b": b}, schedule or Schedule())
    cps = _sdc_checkpoints(trace, d, a, b)
    report = trace_to_report(trace, cps, "sdc")
    results = list(report.branches)
    out_steps = [i for i, s in enumerate(trace.steps) if isinstance(s.label, OutputLabel) and s.label.chan == "d"]
    expected_raw = (a, (d - b) % d)
    details: dict[str, Any] = {"paper_label": [a, b], "status": trace.status}
    if len(out_steps) != 1:
        results.append(BranchResult("outcome", list(expected_raw), None, 0.0, None, False))
        return VerificationReport("sdc", d, tuple(results), details)
    k = out_steps[0]
    label = trace.steps[k].label
    deterministic = len(label.alternatives) == 1
    prob = None
    if k + 1 < len(trace.steps) and isinstance(trace.steps[k + 1].label, ProbBranch):
        prob = trace.steps[k + 1].label.probability
    certain = deterministic and prob is not None and abs(prob - 1.0) <= TOL
    # every measurement step must leave a single component of weight 1
    for s in trace.steps[:k]:
        if isinstance(s.label, Tau) and s.label.kind == "measure":
            comps = s.config.lift().components
            certain = certain and len(comps) == 1 and abs(comps[0].weight - 1.0) <= TOL
    raw = tuple(int(v) for v in label.alternatives[0])
    decoded = (raw[0], (d - raw[1]) % d)
    details.update(raw=list(raw), decoded=list(decoded), alternatives=[list(t) for t in label.alternatives])
    results.append(BranchResult("outcome", list(expected_raw), list(raw), prob or 0.0, None,
                                certain and raw == expected_raw))
    results.append(BranchResult("decoded", [a, b], list(decoded), prob or 0.0, None, decoded == (a, b)))
    return VerificationReport("sdc", d, tuple(results), details)


# --------------------------------------------------------------------------
# JSON


def num(x: float) -> float:
    """Canonical float: 12 significant digits, no negative zero."""
    v = float(f"{float(x):.12g}")
    return 0.0 if v == 0 else v


def state_json(s: Optional[QuantumState]):
    if s is None:
        return None
    if not isinstance(s, QuantumState):
        return s
    return {"names": list(s.names), "amplitudes": [[num(a.real), num(a.imag)] for a in s.amplitudes]}


def label_json(label: TransitionLabel) -> dict:
    if isinstance(label, InputLabel):
        return {"kind": "input", "chan": label.chan, "values": list(label.values)}
    if isinstance(label, OutputLabel):
        return {"kind": "output", "chan": label.chan, "alternatives": [list(t) for t in label.alternatives]}
    if isinstance(label, Tau):
        return {"kind": "tau", "action": label.kind, "detail": label.detail}
    if isinstance(label, ProbBranch):
        return {"kind": "prob", "probability": num(label.probability), "index": label.index}
    raise TypeError(label)


def config_json(config) -> dict:
    if isinstance(config, ProbDistribution):
        return {
            "type": "distribution",
            "branches": [
                {"probability": num(p), "outcome": list(o), "config": config_json(b)}
                for (p, b), o in zip(config.branches, config.outcomes or [()] * len(config.branches))
            ],
        }
    mixed = config.lift()
    return {
        "type": "mixed" if isinstance(config, MixedConfiguration) else "pure",
        "term": pretty_process(mixed.term),
        "omega": list(mixed.omega),
        "variables": list(mixed.variables),
        "components": [
            {"weight": num(c.weight), "values": list(c.values), "state": state_json(c.sigma)}
            for c in mixed.components
        ],
    }


def trace_json(trace: Trace) -> dict:
    return {
        "dimension": trace.dimension,
        "status": trace.status,
        "steps": [
            {"label": label_json(s.label), "weights": [num(w) for w in s.weights], "digest": s.digest}
            for s in trace.steps
        ],
        "final": config_json(trace.final),
    }


def report_json(report: VerificationReport) -> dict:
    return {
        "protocol": report.protocol,
        "dimension": report.dimension,
        "pass": report.passed,
        "details": _plain(report.details),
        "branches": [
            {
                "branch": b.branch,
                "expected": _plain(b.expected),
                "observed": _plain(b.observed),
                "weight": num(b.weight),
                "fidelity": None if b.fidelity is None else num(b.fidelity),
                "pass": b.passed,
            }
            for b in report.branches
        ],
    }


def _plain(v):
    if isinstance(v, QuantumState):
        return state_json(v)
    if isinstance(v, float):
        return num(v)
    if isinstance(v, Mapping):
        return {str(k): _plain(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    if isinstance(v, np.integer):
        return int(v)
    return v


def trace_text(trace: Trace) -> str:
    lines = [f"# d={trace.dimension} status={trace.status}", f"   {describe(trace.initial)}"]
    for i, s in enumerate(trace.steps):
        lines.append(f"{i:3d} --{s.label}--> {describe(s.config)}")
    if trace.residual:
        lines.append(f"deadlock: {trace.residual}")
    return "\n".join(lines)


def report_text(report: VerificationReport) -> str:
    lines = [f"{report.protocol} d={report.dimension}: {'PASS' if report.passed else 'FAIL'}"]
    for b in report.branches:
        fid = "" if b.fidelity is None else f" fidelity={b.fidelity:.12f}"
        extra = "" if isinstance(b.expected, QuantumState) else f" expected={b.expected} observed={b.observed}"
        lines.append(f"  [{'ok' if b.passed else 'FAIL'}] {b.branch} weight={b.weight:.12f}{fid}{extra}")
    for k, v in report.details.items():
        lines.append(f"  {k}: {v}")
    return "\n".join(lines)


def haar_psi(d: int, seed: Optional[int], name: str = "x") -> QuantumState:
    from cqpd.qudit import haar_random_state

    return haar_random_state(d, [name], np.random.default_rng(seed))


__all__ = [
    "BUILTINS",
    "BranchResult",
    "Checkpoint",
    "Schedule",
    "Trace",
    "TraceStep",
    "VerificationReport",
    "enumerate_traces",
    "load_builtin",
    "report_json",
    "run",
    "trace_json",
    "trace_to_report",
    "verify_sdc",
    "verify_teleport",
    "verify_teleport_trace",
]
