"""Render ASTs back to concrete ``.cqp`` syntax (re-parsable)."""

from __future__ import annotations

from cqpd.syntax.ast import (
    Action,
    Call,
    Definition,
    Expr,
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
    Process,
    Program,
    QditAlloc,
    TypeExpr,
    Var,
)


def pretty_type(t: TypeExpr) -> str:
    return str(t)


def _params(params) -> str:
    return ", ".join(f"{name}:{pretty_type(t)}" for name, t in params)


def pretty_expr(e: Expr) -> str:
    if isinstance(e, Lit):
        return str(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Plus):
        right = pretty_expr(e.right)
        if isinstance(e.right, Plus):
            right = f"({right})"
        return f"{pretty_expr(e.left)} + {right}"
    if isinstance(e, Neg):
        inner = pretty_expr(e.operand)
        if isinstance(e.operand, Plus):
            inner = f"({inner})"
        return f"-{inner}"
    if isinstance(e, Measure):
        if len(e.qudits) == 1:
            return f"measure {e.qudits[0]}"
        return f"measure({', '.join(e.qudits)})"
    raise TypeError(f"not an expression: {e!r}")


def _exponent(e: Expr) -> str:
    if isinstance(e, (Lit, Var)):
        return pretty_expr(e)
    if isinstance(e, Neg):
        return "-" + _exponent(e.operand)
    return f"({pretty_expr(e)})"


def pretty_gate(g: GateApp) -> str:
    if g.name in ("X", "Z"):
        return f"{g.name}^{_exponent(g.exponents[0])}"
    if g.name == "U":
        return f"U({pretty_expr(g.exponents[0])}, {pretty_expr(g.exponents[1])})"
    return g.name


def _cont(p: Process) -> str:
    text = pretty_process(p)
    return f"({text})" if isinstance(p, Parallel) else text


def pretty_process(p: Process) -> str:
    if isinstance(p, Nil):
        return "0"
    if isinstance(p, Input):
        return f"{p.chan}?[{_params(p.params)}].{_cont(p.cont)}"
    if isinstance(p, Output):
        args = ", ".join(pretty_expr(a) for a in p.args)
        return f"{p.chan}![{args}].{_cont(p.cont)}"
    if isinstance(p, Action):
        return f"{{{','.join(p.targets)} *= {pretty_gate(p.gate)}}}.{_cont(p.cont)}"
    if isinstance(p, QditAlloc):
        return f"(qdit {','.join(p.names)}){_cont(p.cont)}"
    if isinstance(p, NewChan):
        return f"(new {p.name}:{pretty_type(p.type)}){_cont(p.cont)}"
    if isinstance(p, Parallel):
        right = pretty_process(p.right)
        if isinstance(p.right, Parallel):
            right = f"({right})"
        return f"{pretty_process(p.left)} | {right}"
    if isinstance(p, Call):
        return f"{p.name}({', '.join(pretty_expr(a) for a in p.args)})"
    raise TypeError(f"not a process: {p!r}")


def pretty_definition(d: Definition) -> str:
    return f"{d.name}({_params(d.params)}) = {pretty_process(d.body)}"


def pretty(p: Program | Process) -> str:
    if not isinstance(p, Program):
        return pretty_process(p)
    lines = [pretty_definition(d) for d in p.definitions]
    lines.append(f"main = {p.main.name}({', '.join(pretty_expr(a) for a in p.main.args)})")
    return "\n".join(lines) + "\n"
