"""Macro-expansion of process calls into a single closed term.

Programs are finite (no recursion), so the entry call can be expanded
once before execution. Parameters are substituted capture-free; implicit
qudit names in a callee body stay free and are captured by the binders
at the call site.
"""

from __future__ import annotations

from cqpd.syntax.ast import (
    Action,
    Call,
    Input,
    NewChan,
    Nil,
    Output,
    Parallel,
    Process,
    Program,
    QditAlloc,
)
from cqpd.syntax.subst import substitute


class InlineError(ValueError):
    pass


def _expand(p: Process, program: Program, stack: tuple[str, ...]) -> Process:
    if isinstance(p, Nil):
        return p
    if isinstance(p, Call):
        if p.name in stack:
            raise InlineError(f"recursive process {' -> '.join(stack + (p.name,))}")
        try:
            defn = program.definition(p.name)
        except KeyError:
            raise InlineError(f"undefined process {p.name!r}") from None
        if len(defn.params) != len(p.args):
            raise InlineError(f"{p.name} takes {len(defn.params)} argument(s), given {len(p.args)}")
        body = _expand(defn.body, program, stack + (p.name,))
        return substitute(body, {name: arg for (name, _), arg in zip(defn.params, p.args)})
    if isinstance(p, Parallel):
        return Parallel(_expand(p.left, program, stack), _expand(p.right, program, stack), loc=p.loc)
    if isinstance(p, Input):
        return Input(p.chan, p.params, _expand(p.cont, program, stack), loc=p.loc)
    if isinstance(p, Output):
        return Output(p.chan, p.args, _expand(p.cont, program, stack), loc=p.loc)
    if isinstance(p, Action):
        return Action(p.targets, p.gate, _expand(p.cont, program, stack), loc=p.loc)
    if isinstance(p, QditAlloc):
        return QditAlloc(p.names, _expand(p.cont, program, stack), loc=p.loc)
    if isinstance(p, NewChan):
        return NewChan(p.name, p.type, _expand(p.cont, program, stack), loc=p.loc)
    raise TypeError(p)


def inline(program: Program) -> Process:
    """Expand ``program.main`` into a call-free process term."""
    return _expand(program.main, program, ())
