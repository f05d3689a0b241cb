"""Acceptance criteria, one test each. Every test prints a PASS/FAIL line."""

import itertools
import time
from pathlib import Path

import numpy as np
import pytest

from cqpd import oracles
from cqpd.harness import (
    enumerate_traces,
    haar_psi,
    load_builtin,
    verify_sdc,
    verify_teleport,
    verify_teleport_trace,
)
from cqpd.qudit import GateSpec, QuantumState, apply_gate, basis_state, bell_state, haar_random_state, omega
from cqpd.qudit import reduced_density_matrix
from cqpd.semantics import (
    Component,
    MixedConfiguration,
    OutputLabel,
    ProbBranch,
    ProbDistribution,
    PureConfiguration,
    Tau,
    transitions,
    value_step,
)
from cqpd.syntax import DiagnosticKind, parse, pretty, typecheck
from cqpd.syntax.ast import (
    QDIT,
    VAL,
    Action,
    Call,
    ChanType,
    Definition,
    GateApp,
    Input,
    Lit,
    Measure,
    Neg,
    NewChan,
    Nil,
    Output,
    Parallel,
    Plus,
    Program,
    QditAlloc,
    Var,
    parallel,
)

CORPUS = Path(__file__).resolve().parents[1] / "src" / "cqpd" / "corpus"


@pytest.fixture
def report(capsys):
    """Print a criterion line to the terminal whether or not pytest captures output."""

    def emit(n, title, ok, elapsed, limit, detail=""):
        status = "PASS" if ok and elapsed < limit else "FAIL"
        with capsys.disabled():
            print(f"\n[{status}] criterion {n}: {title} ({elapsed:.2f}s < {limit}s) {detail}".rstrip())
        return status == "PASS"

    return emit


def test_criterion_1_gate_algebra(report):
    t0 = time.perf_counter()
    failures = []
    for d in (2, 3, 4, 5, 7):
        for j in range(d):
            for k in range(d):
                x, z = GateSpec.shift_x(j).matrix(d), GateSpec.phase_z(k).matrix(d)
                if np.max(np.abs(z @ x - omega(d, j * k) * (x @ z))) > 1e-12:
                    failures.append(("ZX", d, j, k))
        # X^d and Z^d as index arithmetic: the exponent reduces to 0, giving the identity exactly
        if not (np.array_equal(GateSpec.shift_x(d).matrix(d), np.eye(d))
                and np.array_equal(GateSpec.phase_z(d).matrix(d), np.eye(d))):
            failures.append(("Xd/Zd", d))
        x1 = GateSpec.shift_x(1).matrix(d)
        if not np.array_equal(np.linalg.matrix_power(x1.real.astype(int), d), np.eye(d, dtype=int)):
            failures.append(("X^d power", d))
        names = ["a", "b"]
        for m, n in itertools.product(range(d), repeat=2):
            s = basis_state(d, names, [m, n])
            back = apply_gate(apply_gate(s, names, GateSpec.cnot_right()), names, GateSpec.cnot_left())
            if not np.array_equal(back.amplitudes, s.amplitudes):
                failures.append(("LcRc", d, m, n))
        h = GateSpec.hadamard().matrix(d)
        if np.max(np.abs(h @ h.conj().T - np.eye(d))) > 1e-12 or np.max(np.abs(h - h.T)) > 1e-12:
            failures.append(("H", d))
        if d >= 3 and np.max(np.abs(h - h.conj().T)) <= 0.1:
            failures.append(("H hermitian", d))
    elapsed = time.perf_counter() - t0
    assert report(1, "gate algebra", not failures, elapsed, 5, f"failures={failures[:3]}")
    assert not failures and elapsed < 5


def test_criterion_2_bell_states(report):
    t0 = time.perf_counter()
    worst = {"gram": 0.0, "rho": 0.0, "construction": 0.0}
    for d in (2, 3, 5):
        states = [bell_state(d, n, m, ["a", "b"]) for n in range(d) for m in range(d)]
        mat = np.array([s.amplitudes for s in states])
        worst["gram"] = max(worst["gram"], float(np.max(np.abs(mat.conj() @ mat.T - np.eye(d * d)))))
        for s in states:
            for half in ("a", "b"):
                rho = reduced_density_matrix(s, [half])
                worst["rho"] = max(worst["rho"], float(np.max(np.abs(rho - np.eye(d) / d))))
        for n in range(d):
            for m in range(d):
                v = basis_state(d, ["a", "b"], [n, m])
                v = apply_gate(v, ["a"], GateSpec.hadamard())
                v = apply_gate(v, ["a", "b"], GateSpec.cnot_right())
                dev = float(np.max(np.abs(v.amplitudes - bell_state(d, n, m, ["a", "b"]).amplitudes)))
                worst["construction"] = max(worst["construction"], dev)
    elapsed = time.perf_counter() - t0
    ok = worst["gram"] <= 1e-9 and worst["rho"] <= 1e-9 and worst["construction"] <= 1e-12
    assert report(2, "Bell states", ok, elapsed, 5, f"max deviations {worst}")
    assert ok and elapsed < 5


def test_criterion_3_measurement_rule(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(3)
    worst_w, worst_f, cases = 0.0, 0.0, 0
    for d, n in itertools.product((2, 3), (1, 2, 3)):
        names = [f"q{i}" for i in range(n)]
        for r in range(1, n + 1):
            for _ in range(100):
                s = haar_random_state(d, names, rng)
                positions = sorted(rng.choice(n, size=r, replace=False).tolist())
                if rng.random() < 0.5:
                    positions = positions[::-1]
                targets = tuple(names[p] for p in positions)
                ec = value_step(s, names, Measure(targets))
                want = oracles.projector_measure(s.amplitudes, d, n, positions)
                got = {c.values[0]: c for c in ec.components}
                for m, (g, v) in want.items():
                    if g <= 1e-14:
                        continue
                    c = got[m]
                    worst_w = max(worst_w, abs(c.weight - g))
                    worst_f = max(worst_f, 1 - abs(np.vdot(v, c.sigma.amplitudes)))
                cases += 1
    elapsed = time.perf_counter() - t0
    ok = worst_w <= 1e-12 and worst_f <= 1e-12
    assert report(3, "measurement rule vs projectors", ok, elapsed, 30,
                  f"{cases} states, max weight dev {worst_w:.2e}, max state dev {worst_f:.2e}")
    assert ok and elapsed < 30


def test_criterion_4_teleportation(report):
    t0 = time.perf_counter()
    bad = []
    min_fid, max_wdev = 1.0, 0.0
    for d in (2, 3, 4, 5):
        rng = np.random.default_rng(1000 + d)
        for i in range(50):
            psi = haar_random_state(d, ["x"], rng)
            r = verify_teleport(d, psi)
            if not r.passed or len(r.branches) != d * d:
                bad.append((d, i))
            for b in r.branches:
                if b.fidelity is not None:
                    min_fid = min(min_fid, b.fidelity)
                max_wdev = max(max_wdev, abs(b.weight - 1 / d**2))
    verdicts = set()
    for d in (2, 3):
        for seed in range(5):
            psi = haar_psi(d, seed)
            for t in enumerate_traces(load_builtin("teleport"), d, {"x": psi}):
                verdicts.add(verify_teleport_trace(t, psi).passed)
    elapsed = time.perf_counter() - t0
    ok = not bad and verdicts == {True} and min_fid >= 1 - 1e-9 and max_wdev <= 1e-9
    assert report(4, "teleportation", ok, elapsed, 60,
                  f"min fidelity {min_fid:.15f}, max weight dev {max_wdev:.1e}, interleaving verdicts {verdicts}")
    assert ok and elapsed < 60


def test_criterion_5_superdense_coding(report):
    t0 = time.perf_counter()
    bad = []
    for d in (2, 3, 5):
        for a, b in itertools.product(range(d), repeat=2):
            r = verify_sdc(d, a, b)
            checkpoints = [x for x in r.branches if x.branch.startswith("psi")]
            names = {x.branch.split("@")[0] for x in checkpoints}
            if not (r.passed and {"psi1", "psi2", "psi3", "psi4", "psi5"} <= names):
                bad.append((d, a, b))
            if tuple(r.details.get("raw", ())) != (a, (d - b) % d) or tuple(r.details.get("decoded", ())) != (a, b):
                bad.append((d, a, b, "values"))
            if len(r.details.get("alternatives", [])) != 1:
                bad.append((d, a, b, "nondeterministic"))
    elapsed = time.perf_counter() - t0
    assert report(5, "superdense coding", not bad, elapsed, 30, f"failures={bad[:3]}")
    assert not bad and elapsed < 30


def _random_program(rng) -> Program:
    names = ["a", "b", "c", "q", "x", "y", "m1"]

    def pick(xs):
        return xs[int(rng.integers(len(xs)))]

    def expr(depth=0):
        k = int(rng.integers(4 if depth < 2 else 2))
        if k == 0:
            return Lit(int(rng.integers(0, 20)))
        if k == 1:
            return Var(pick(names))
        if k == 2:
            return Plus(expr(depth + 1), expr(depth + 1))
        return Neg(expr(depth + 1))

    def typ(depth=0):
        if depth < 2 and rng.random() < 0.3:
            return ChanType(tuple(typ(depth + 1) for _ in range(int(rng.integers(1, 3)))))
        return pick([QDIT, VAL])

    def proc(depth=0):
        k = int(rng.integers(8)) if depth < 4 else int(rng.integers(2))
        if k == 0:
            return Nil()
        if k == 1:
            return Call(pick(["P", "Q"]), tuple(expr() for _ in range(int(rng.integers(3)))))
        if k == 2:
            ps = tuple((n, typ()) for n in dict.fromkeys(pick(names) for _ in range(int(rng.integers(1, 3)))))
            return Input(pick(names), ps, proc(depth + 1))
        if k == 3:
            args = tuple(expr() if rng.random() < 0.6 else Measure((pick(names),)) for _ in range(int(rng.integers(1, 3))))
            return Output(pick(names), args, proc(depth + 1))
        if k == 4:
            g = pick([("H", 1, 0), ("Rc", 2, 0), ("X", 1, 1), ("Z", 1, 1), ("U", 1, 2), ("Lc", 2, 0)])
            targets = tuple(rng.choice(names, size=g[1], replace=False).tolist())
            return Action(targets, GateApp(g[0], tuple(expr() for _ in range(g[2]))), proc(depth + 1))
        if k == 5:
            return QditAlloc(tuple(dict.fromkeys([pick(names), pick(names)])), proc(depth + 1))
        if k == 6:
            return NewChan(pick(names), ChanType((typ(),)), proc(depth + 1))
        return Parallel(proc(depth + 1), proc(depth + 1))

    defs = (Definition("P", (("c", ChanType((VAL,))),), proc()), Definition("Q", (), proc()))
    return Program(defs, Call("P", (Var("c"),)))


def test_criterion_6_language(report):
    t0 = time.perf_counter()
    problems = []
    for name in ("teleport", "sdc"):
        prog = parse((CORPUS / f"{name}.cqp").read_text())
        if typecheck(prog):
            problems.append(f"{name} diagnostics")
        if parse(pretty(prog)) != prog:
            problems.append(f"{name} roundtrip")
    rng = np.random.default_rng(6)
    for i in range(200):
        prog = _random_program(rng)
        if parse(pretty(prog)) != prog:
            problems.append(f"random AST {i}")
    cloning = [d.kind for d in typecheck(parse("P(c:^[Qdit]) = c![q].{q *= H}.0"))]
    arity = [d.kind for d in typecheck(parse("P(c:^[Val]) = c![v, w].0"))]
    if cloning != [DiagnosticKind.CLONING_VIOLATION]:
        problems.append(f"cloning fixture gave {cloning}")
    if arity != [DiagnosticKind.ARITY_MISMATCH]:
        problems.append(f"arity fixture gave {arity}")
    elapsed = time.perf_counter() - t0
    assert report(6, "language suite", not problems, elapsed, 10, f"problems={problems[:3]}")
    assert not problems and elapsed < 10


def test_criterion_7_semantics_examples(report):
    t0 = time.perf_counter()
    problems = []
    d = 3
    alphas = haar_random_state(d, ["q"], np.random.default_rng(7)).amplitudes
    expected = [abs(a) ** 2 for a in alphas]
    P = Output("e", (Lit(0),), Nil())

    # measurement of (q = sum alpha_l |l>; q; c![measure q].P)
    cfg = PureConfiguration(QuantumState(d, ("q",), alphas), ("q",), Output("c", (Measure(("q",)),), P))
    (lab, mixed), = transitions(cfg)
    if not (lab == Tau("measure", "measure q") and isinstance(mixed, MixedConfiguration)):
        problems.append("measurement did not give a mixture")
    elif not np.allclose(mixed.weights, expected, atol=1e-12, rtol=0):
        problems.append("mixture weights differ from |alpha_i|^2")

    # output of the abstracted result
    (lab, dist), = transitions(mixed)
    if not (isinstance(lab, OutputLabel) and lab.slots == (frozenset(range(d)),)):
        problems.append(f"output label {lab} does not carry the set of outcomes")
    if not (isinstance(dist, ProbDistribution) and np.allclose(dist.probabilities, expected, atol=1e-12, rtol=0)):
        problems.append("distribution probabilities differ from |alpha_i|^2")
    branches = transitions(dist)
    if [type(b[0]) for b in branches] != [ProbBranch] * d:
        problems.append("no probabilistic branch steps")

    # communication inside a mixture
    g = [0.2, 0.5, 0.3]
    comps = tuple(Component(g[i], basis_state(d, ["q"], [i]), (i,)) for i in range(d))
    Q = Output("f", (Var("y"),), Nil())
    term = parallel(Output("c", (Var("%0"),), P), Input("c", (("y", VAL),), Q))
    mix = MixedConfiguration(comps, ("%0",), term, ("q",), frozenset({"c"}), 1)
    (lab, after), = transitions(mix)
    if lab.kind != "comm" or after.weights != g:
        problems.append("communication changed the weights")
    if after.term != parallel(P, Output("f", (Var("%0"),), Nil())):
        problems.append("receiver not brought into the abstraction")
    elapsed = time.perf_counter() - t0
    assert report(7, "semantics examples", not problems, elapsed, 5, f"problems={problems}")
    assert not problems and elapsed < 5
