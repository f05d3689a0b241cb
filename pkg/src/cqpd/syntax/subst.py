"""Free names and capture-avoiding substitution over process terms."""

from __future__ import annotations

import itertools
from typing import Mapping

from cqpd.syntax.ast import (
    Action,
    Call,
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
    QditAlloc,
    Var,
)


class SubstitutionError(TypeError):
    """A value was substituted into a position that needs a name."""


def expr_names(e: Expr) -> set[str]:
    if isinstance(e, Var):
        return {e.name}
    if isinstance(e, Plus):
        return expr_names(e.left) | expr_names(e.right)
    if isinstance(e, Neg):
        return expr_names(e.operand)
    if isinstance(e, Measure):
        return set(e.qudits)
    return set()


def _gate_names(g: GateApp) -> set[str]:
    out: set[str] = set()
    for e in g.exponents:
        out |= expr_names(e)
    return out


def binders(p: Process) -> tuple[str, ...]:
    if isinstance(p, Input):
        return tuple(name for name, _ in p.params)
    if isinstance(p, QditAlloc):
        return p.names
    if isinstance(p, NewChan):
        return (p.name,)
    return ()


def free_names(p: Process) -> set[str]:
    if isinstance(p, Nil):
        return set()
    if isinstance(p, Input):
        return {p.chan} | (free_names(p.cont) - set(binders(p)))
    if isinstance(p, Output):
        out = {p.chan}
        for a in p.args:
            out |= expr_names(a)
        return out | free_names(p.cont)
    if isinstance(p, Action):
        return set(p.targets) | _gate_names(p.gate) | free_names(p.cont)
    if isinstance(p, (QditAlloc, NewChan)):
        return free_names(p.cont) - set(binders(p))
    if isinstance(p, Parallel):
        return free_names(p.left) | free_names(p.right)
    if isinstance(p, Call):
        out: set[str] = set()
        for a in p.args:
            out |= expr_names(a)
        return out
    raise TypeError(f"not a process: {p!r}")


def subst_expr(e: Expr, mapping: Mapping[str, Expr]) -> Expr:
    if isinstance(e, Var):
        return mapping.get(e.name, e)
    if isinstance(e, Plus):
        return Plus(subst_expr(e.left, mapping), subst_expr(e.right, mapping), loc=e.loc)
    if isinstance(e, Neg):
        return Neg(subst_expr(e.operand, mapping), loc=e.loc)
    if isinstance(e, Measure):
        return Measure(tuple(_name(q, mapping) for q in e.qudits), loc=e.loc)
    return e


def _name(name: str, mapping: Mapping[str, Expr]) -> str:
    repl = mapping.get(name)
    if repl is None:
        return name
    if not isinstance(repl, Var):
        raise SubstitutionError(f"cannot use value {repl!r} where a name is expected (for {name!r})")
    return repl.name


def _fresh(base: str, avoid: set[str]) -> str:
    root = base.split("'")[0]
    for k in itertools.count(1):
        cand = f"{root}'{k}"
        if cand not in avoid:
            return cand
    raise AssertionError  # pragma: no cover


def _under_binders(names, cont: Process, mapping: Mapping[str, Expr]):
    """Drop shadowed keys and rename binders that would capture a replacement."""
    inner = {k: v for k, v in mapping.items() if k not in names}
    if not inner:
        return tuple(names), cont, inner
    live = free_names(cont)
    incoming: set[str] = set()
    for k, v in inner.items():
        if k in live:
            incoming |= expr_names(v)
    renamed = []
    rename: dict[str, Expr] = {}
    avoid = incoming | live | set(inner) | set(names)
    for b in names:
        if b in incoming:
            nb = _fresh(b, avoid)
            avoid.add(nb)
            rename[b] = Var(nb)
            renamed.append(nb)
        else:
            renamed.append(b)
    if rename:
        cont = substitute(cont, rename)
    return tuple(renamed), cont, inner


def substitute(p: Process, mapping: Mapping[str, Expr]) -> Process:
    """Replace free occurrences of ``mapping`` keys in ``p``."""
    if not mapping or isinstance(p, Nil):
        return p
    if isinstance(p, Input):
        names, cont, inner = _under_binders([n for n, _ in p.params], p.cont, mapping)
        params = tuple((n, t) for n, (_, t) in zip(names, p.params))
        return Input(_name(p.chan, mapping), params, substitute(cont, inner), loc=p.loc)
    if isinstance(p, Output):
        args = tuple(subst_expr(a, mapping) for a in p.args)
        return Output(_name(p.chan, mapping), args, substitute(p.cont, mapping), loc=p.loc)
    if isinstance(p, Action):
        gate = GateApp(p.gate.name, tuple(subst_expr(e, mapping) for e in p.gate.exponents))
        targets = tuple(_name(q, mapping) for q in p.targets)
        return Action(targets, gate, substitute(p.cont, mapping), loc=p.loc)
    if isinstance(p, QditAlloc):
        names, cont, inner = _under_binders(p.names, p.cont, mapping)
        return QditAlloc(names, substitute(cont, inner), loc=p.loc)
    if isinstance(p, NewChan):
        (name,), cont, inner = _under_binders([p.name], p.cont, mapping)
        return NewChan(name, p.type, substitute(cont, inner), loc=p.loc)
    if isinstance(p, Parallel):
        return Parallel(substitute(p.left, mapping), substitute(p.right, mapping), loc=p.loc)
    if isinstance(p, Call):
        return Call(p.name, tuple(subst_expr(a, mapping) for a in p.args), loc=p.loc)
    raise TypeError(f"not a process: {p!r}")


def is_value(e: Expr) -> bool:
    return isinstance(e, (Lit, Var))
