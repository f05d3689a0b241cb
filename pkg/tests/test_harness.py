import json

import numpy as np
import pytest

from cqpd import oracles
from cqpd.harness import (
    Checkpoint,
    Schedule,
    enumerate_traces,
    haar_psi,
    load_builtin,
    report_json,
    run,
    trace_json,
    trace_to_report,
    verify_sdc,
    verify_teleport,
    verify_teleport_trace,
)
from cqpd.qudit import QuantumState, basis_state
from cqpd.semantics import InputLabel, OutputLabel, Tau
from cqpd.syntax import parse


def kinds(trace):
    out = []
    for lab in trace.labels:
        if isinstance(lab, Tau):
            out.append(lab.kind)
        elif isinstance(lab, InputLabel):
            out.append("in")
        elif isinstance(lab, OutputLabel):
            out.append("out")
        else:
            out.append("prob")
    return out


def test_sdc_trace_shape():
    trace = run(load_builtin("sdc"), 3, {"a": 1, "b": 2})
    assert trace.status == "terminated"
    assert kinds(trace) == [
        "alloc", "action", "action", "new", "in", "action", "action", "comm",
        "action", "action", "measure", "measure", "out", "prob",
    ]
    assert trace.labels[4] == InputLabel("c", (1, 2))
    assert trace.labels[12] == OutputLabel("d", ((1, 1),))


def test_teleport_basis_input_d2():
    psi = basis_state(2, ["x"], [0])
    report = verify_teleport(2, psi)
    assert report.passed and len(report.branches) == 4
    assert all(b.weight == pytest.approx(0.25) for b in report.branches)


def test_empty_program():
    trace = run(parse("P() = 0\nmain = P()"), 2)
    assert trace.steps == () and trace.status == "terminated"
    traces = enumerate_traces(parse("P() = 0\nmain = P()"), 2)
    assert len(traces) == 1 and traces[0].steps == ()


def test_deadlock_reports_residual():
    trace = run(parse("P(c:^[Val]) = (new e:^[Val])e?[v:Val].0\nmain = P(c)"), 2)
    assert trace.status == "deadlock"
    assert trace.residual == "e?[v:Val].0"


def test_depth_limit():
    trace = run(load_builtin("sdc"), 2, {"a": 0, "b": 0}, Schedule.exhaustive(depth=3))
    assert trace.status == "depth-exceeded" and len(trace.steps) == 3
    traces = enumerate_traces(load_builtin("sdc"), 2, {"a": 0, "b": 0}, depth=3)
    assert [t.status for t in traces] == ["depth-exceeded"]


def test_schedule_validation():
    with pytest.raises(ValueError):
        Schedule.exhaustive(0)
    with pytest.raises(IndexError):
        run(load_builtin("sdc"), 2, {"a": 0, "b": 0}, Schedule.scripted([5]))
    t = run(load_builtin("sdc"), 2, {"a": 0, "b": 0}, Schedule.scripted([0, 0]))
    assert t.status == "script-end" and len(t.steps) == 2


def test_seeded_runs_repeat():
    prog = parse("""\
P(c:^[Val], d:^[Val]) = (qdit p, q)({p *= H}.c![measure p].0 | {q *= H}.d![measure q].0)
""")
    a = run(prog, 3, schedule=Schedule.seeded(5))
    b = run(prog, 3, schedule=Schedule.seeded(5))
    assert a.labels == b.labels and [s.digest for s in a.steps] == [s.digest for s in b.steps]
    traces = enumerate_traces(prog, 3)
    assert len({t.labels for t in traces}) == len(traces) > 1
    assert any(t.labels == a.labels for t in traces)


def test_enumerate_interleavings_agree_on_outcome():
    prog = parse("""\
P(c:^[Val], d:^[Val]) = (qdit p, q)({p *= X^1}.c![measure p].0 | {q *= X^2}.d![measure q].0)
""")
    traces = enumerate_traces(prog, 3)
    assert len(traces) > 1
    for t in traces:
        outs = {lab.chan: lab.values for lab in t.labels if isinstance(lab, OutputLabel)}
        assert outs == {"c": (1,), "d": (2,)}


@pytest.mark.parametrize("d", [2, 3])
def test_teleport_every_interleaving_passes(d):
    psi = haar_psi(d, 17)
    traces = enumerate_traces(load_builtin("teleport"), d, {"x": psi})
    assert traces and all(verify_teleport_trace(t, psi).passed for t in traces)


def test_sdc_zero_message_all_interleavings():
    for t in enumerate_traces(load_builtin("sdc"), 3, {"a": 0, "b": 0}):
        outs = [lab for lab in t.labels if isinstance(lab, OutputLabel)]
        assert outs == [OutputLabel("d", ((0, 0),))]


@pytest.mark.parametrize("d, a, b, raw", [(3, 1, 2, (1, 1)), (2, 1, 1, (1, 1)), (4, 0, 0, (0, 0)), (5, 3, 1, (3, 4))])
def test_verify_sdc(d, a, b, raw):
    r = verify_sdc(d, a, b)
    assert r.passed
    assert tuple(r.details["raw"]) == raw
    assert tuple(r.details["decoded"]) == (a, b)
    assert r.details["paper_label"] == [a, b]


def test_verify_sdc_range():
    with pytest.raises(ValueError):
        verify_sdc(3, 3, 0)


def test_sdc_paper_states_agree_with_dense_products():
    for d in (2, 3, 4):
        for a in range(d):
            for b in range(d):
                closed, dense = oracles.sdc_paper_states(d, a, b), oracles.sdc_dense_states(d, a, b)
                for k in closed:
                    assert abs(abs(np.vdot(closed[k], dense[k])) - 1) < 1e-12, (d, a, b, k)


def test_teleport_oracle_is_faithful():
    d = 3
    psi = haar_psi(d, 2).amplitudes
    out = oracles.teleport_oracle(d, psi)
    assert len(out) == d * d
    for (m1, m2), (g, v) in out.items():
        assert g == pytest.approx(1 / d**2)
        y = v.reshape(d, d, d)[m2, m1, :]
        assert abs(abs(np.vdot(y, psi)) - 1) < 1e-12


def test_trace_to_report():
    d = 3
    trace = run(load_builtin("sdc"), d, {"a": 1, "b": 2})
    states = oracles.sdc_paper_states(d, 1, 2)
    cps = [Checkpoint(2, QuantumState(d, ("q1", "q2"), states["psi1"]))]
    assert trace_to_report(trace, cps).passed
    bad = [Checkpoint(2, QuantumState(d, ("q1", "q2"), states["psi5"]))]
    rep = trace_to_report(trace, bad)
    assert not rep.passed and rep.details["max_deviation"] > 0.5
    assert trace_to_report(trace, []).passed
    with pytest.raises(IndexError):
        trace_to_report(trace, [Checkpoint(99, cps[0].expected)])


def test_teleport_failure_is_reported():
    psi = haar_psi(3, 1)
    trace = run(load_builtin("teleport"), 3, {"x": psi})
    other = haar_psi(3, 2)
    rep = verify_teleport_trace(trace, other)
    assert not rep.passed
    assert all(b.branch.startswith("M1=") for b in rep.failures())


def test_json_is_canonical():
    trace = run(load_builtin("teleport"), 2, {"x": haar_psi(2, 3)})
    a = json.dumps(trace_json(trace), sort_keys=True)
    b = json.dumps(trace_json(run(load_builtin("teleport"), 2, {"x": haar_psi(2, 3)})), sort_keys=True)
    assert a == b
    data = json.loads(a)
    assert set(data) >= {"dimension", "steps", "final"}
    assert set(data["steps"][0]) == {"label", "weights", "digest"}
    rep = report_json(verify_sdc(3, 1, 2))
    assert rep["pass"] is True and rep["details"]["raw"] == [1, 1]


def test_builtins():
    with pytest.raises(KeyError):
        load_builtin("grover")
    assert load_builtin("teleport").entry == "Teleport"
