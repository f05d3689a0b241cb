"""Practical typechecker: channel payloads, gate arities and qudit linearity.

Names used as qudits inside a definition but bound by none of its binders
or parameters are *implicit* qudit parameters: they are resolved at each
call site, where the caller must own them. This is how ``Alice`` refers to
the ``z`` allocated by ``Teleport``.

Only the first diagnostic per name and definition is reported, so one
misuse does not cascade into a list of follow-on errors.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

from cqpd.syntax.ast import (
    QDIT,
    VAL,
    Action,
    Call,
    ChanType,
    Expr,
    Input,
    Lit,
    Loc,
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


class DiagnosticKind(str, enum.Enum):
    ARITY_MISMATCH = "ArityMismatch"
    TYPE_MISMATCH = "TypeMismatch"
    CLONING_VIOLATION = "CloningViolation"
    UNKNOWN_NAME = "UnknownName"
    RECURSION = "Recursion"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class Diagnostic:
    kind: DiagnosticKind
    message: str
    loc: Optional[Loc] = None
    definition: Optional[str] = None

    def __str__(self) -> str:
        where = f"{self.loc}: " if self.loc else ""
        return f"{where}{self.kind}: {self.message}"


def _calls(p: Process) -> list[Call]:
    if isinstance(p, Call):
        return [p]
    if isinstance(p, Parallel):
        return _calls(p.left) + _calls(p.right)
    if isinstance(p, (Input, Output, Action, QditAlloc, NewChan)):
        return _calls(p.cont)
    return []


class _Checker:
    def __init__(self, program: Program):
        self.program = program
        self.defs = {d.name: d for d in program.definitions}
        self.diags: list[Diagnostic] = []
        self.seen: set[tuple[Optional[str], str]] = set()
        self.implicit: dict[str, list[str]] = {}
        self.scope: Optional[str] = None
        self.cur_implicit: list[str] = []
        self.cyclic: set[tuple[str, str]] = set()

    # -- reporting

    def report(self, kind, message, loc, name=None):
        if name is not None:
            key = (self.scope, name)
            if key in self.seen:
                return
            self.seen.add(key)
        self.diags.append(Diagnostic(kind, message, loc, self.scope))

    # -- ordering

    def order(self) -> list[str]:
        done: list[str] = []
        state: dict[str, int] = {}

        def visit(name: str) -> None:
            state[name] = 1
            for call in _calls(self.defs[name].body):
                if call.name not in self.defs:
                    continue
                st = state.get(call.name, 0)
                if st == 1:
                    self.cyclic.add((name, call.name))
                    self.scope = name
                    self.report(
                        DiagnosticKind.RECURSION,
                        f"recursive call {name} -> {call.name} is not supported",
                        call.loc,
                    )
                elif st == 0:
                    visit(call.name)
            state[name] = 2
            done.append(name)

        for d in self.program.definitions:
            if state.get(d.name, 0) == 0:
                visit(d.name)
        return done

    # -- lookups

    def lookup(self, name: str, gamma: dict) -> Optional[TypeExpr]:
        if name in gamma:
            return gamma[name]
        if name in self.cur_implicit:
            return QDIT
        return None

    def qudit(self, name: str, loc, gamma: dict, sent: frozenset, used: set) -> None:
        t = self.lookup(name, gamma)
        if t is None:
            if self.scope is None:
                self.report(DiagnosticKind.UNKNOWN_NAME, f"unbound qudit {name!r}", loc, name)
                return
            self.cur_implicit.append(name)
            t = QDIT
        if t != QDIT:
            self.report(DiagnosticKind.TYPE_MISMATCH, f"{name!r} has type {t}, expected Qdit", loc, name)
            return
        if name in sent:
            self.report(
                DiagnosticKind.CLONING_VIOLATION,
                f"qudit {name!r} is used after it was sent",
                loc,
                name,
            )
        used.add(name)

    def expr(self, e: Expr, expected, gamma, sent, used, loc) -> Optional[TypeExpr]:
        loc = getattr(e, "loc", None) or loc
        if isinstance(e, Lit):
            return VAL
        if isinstance(e, Var):
            if expected == QDIT:
                self.qudit(e.name, loc, gamma, sent, used)
                return QDIT
            t = self.lookup(e.name, gamma)
            if t is None:
                self.report(DiagnosticKind.UNKNOWN_NAME, f"unbound name {e.name!r}", loc, e.name)
                return None
            if t == QDIT:
                self.qudit(e.name, loc, gamma, sent, used)
            return t
        if isinstance(e, (Plus, Neg)):
            for sub in (e.left, e.right) if isinstance(e, Plus) else (e.operand,):
                t = self.expr(sub, VAL, gamma, sent, used, loc)
                if t is not None and t != VAL:
                    self.report(DiagnosticKind.TYPE_MISMATCH, f"arithmetic on a value of type {t}", loc)
            return VAL
        if isinstance(e, Measure):
            for q in e.qudits:
                self.qudit(q, loc, gamma, sent, used)
            return VAL
        raise TypeError(e)

    def channel(self, name: str, loc, gamma) -> Optional[ChanType]:
        t = self.lookup(name, gamma)
        if t is None:
            self.report(DiagnosticKind.UNKNOWN_NAME, f"unbound channel {name!r}", loc, name)
            return None
        if not isinstance(t, ChanType):
            self.report(DiagnosticKind.TYPE_MISMATCH, f"{name!r} has type {t}, expected a channel", loc, name)
            return None
        return t

    # -- processes

    def process(self, p: Process, gamma: dict, sent: frozenset) -> set:
        used: set = set()
        if isinstance(p, Nil):
            return used
        if isinstance(p, Output):
            ct = self.channel(p.chan, p.loc, gamma)
            if ct is not None and len(ct.payload) != len(p.args):
                self.report(
                    DiagnosticKind.ARITY_MISMATCH,
                    f"channel {p.chan!r} carries {len(ct.payload)} value(s), output sends {len(p.args)}",
                    p.loc,
                )
                return used | self.process(p.cont, gamma, sent)
            expected = ct.payload if ct is not None else (None,) * len(p.args)
            shipped: list[str] = []
            for arg, want in zip(p.args, expected):
                got = self.expr(arg, want, gamma, sent, used, p.loc)
                if want is not None and got is not None and got != want:
                    self.report(DiagnosticKind.TYPE_MISMATCH, f"output sends {got} where {want} is expected", p.loc)
                if got == QDIT and isinstance(arg, Var):
                    if arg.name in shipped:
                        self.report(
                            DiagnosticKind.CLONING_VIOLATION,
                            f"qudit {arg.name!r} sent twice in one message",
                            p.loc,
                            arg.name,
                        )
                    shipped.append(arg.name)
            return used | self.process(p.cont, gamma, sent | frozenset(shipped))
        if isinstance(p, Input):
            ct = self.channel(p.chan, p.loc, gamma)
            if ct is not None:
                if len(ct.payload) != len(p.params):
                    self.report(
                        DiagnosticKind.ARITY_MISMATCH,
                        f"channel {p.chan!r} carries {len(ct.payload)} value(s), input binds {len(p.params)}",
                        p.loc,
                    )
                else:
                    for (name, t), want in zip(p.params, ct.payload):
                        if t != want:
                            self.report(
                                DiagnosticKind.TYPE_MISMATCH,
                                f"input binds {name!r} as {t}, channel carries {want}",
                                p.loc,
                            )
            return self._bind(p.params, p.cont, gamma, sent)
        if isinstance(p, Action):
            if len(p.targets) != p.gate.arity:
                self.report(
                    DiagnosticKind.ARITY_MISMATCH,
                    f"gate {p.gate.name} acts on {p.gate.arity} qudit(s), given {len(p.targets)}",
                    p.loc,
                )
            for q in p.targets:
                self.qudit(q, p.loc, gamma, sent, used)
            for e in p.gate.exponents:
                if _has_measure(e):
                    self.report(DiagnosticKind.TYPE_MISMATCH, "measurement inside a gate exponent", p.loc)
                    continue
                t = self.expr(e, VAL, gamma, sent, used, p.loc)
                if t is not None and t != VAL:
                    self.report(DiagnosticKind.TYPE_MISMATCH, f"gate exponent has type {t}", p.loc)
            return used | self.process(p.cont, gamma, sent)
        if isinstance(p, QditAlloc):
            return self._bind([(q, QDIT) for q in p.names], p.cont, gamma, sent)
        if isinstance(p, NewChan):
            return self._bind([(p.name, p.type)], p.cont, gamma, sent)
        if isinstance(p, Parallel):
            left = self.process(p.left, gamma, sent)
            right = self.process(p.right, gamma, sent)
            for q in sorted(left & right):
                self.report(
                    DiagnosticKind.CLONING_VIOLATION,
                    f"qudit {q!r} is used on both sides of a parallel composition",
                    p.loc,
                    q,
                )
            return left | right
        if isinstance(p, Call):
            return self.call(p, gamma, sent)
        raise TypeError(p)

    def _bind(self, params, cont, gamma, sent) -> set:
        names = {n for n, _ in params}
        inner = dict(gamma)
        inner.update(params)
        used = self.process(cont, inner, sent - names)
        return used - names

    def call(self, p: Call, gamma, sent) -> set:
        used: set = set()
        defn = self.defs.get(p.name)
        if defn is None:
            self.report(DiagnosticKind.UNKNOWN_NAME, f"undefined process {p.name!r}", p.loc, p.name)
            return used
        if len(defn.params) != len(p.args):
            self.report(
                DiagnosticKind.ARITY_MISMATCH,
                f"{p.name} takes {len(defn.params)} argument(s), given {len(p.args)}",
                p.loc,
            )
            return used
        passed: list[str] = []
        for arg, (pname, want) in zip(p.args, defn.params):
            got = self.expr(arg, want, gamma, sent, used, p.loc)
            if got is not None and got != want:
                self.report(
                    DiagnosticKind.TYPE_MISMATCH,
                    f"argument for {p.name}.{pname} has type {got}, expected {want}",
                    p.loc,
                )
            if want == QDIT and isinstance(arg, Var):
                passed.append(arg.name)
        for q in self.implicit.get(p.name, []):
            self.qudit(q, p.loc, gamma, sent, used)
            passed.append(q)
        for q in {q for q in passed if passed.count(q) > 1}:
            self.report(DiagnosticKind.CLONING_VIOLATION, f"qudit {q!r} passed twice to {p.name}", p.loc, q)
        return used

    # -- driver

    def run(self) -> list[Diagnostic]:
        for name in self.order():
            defn = self.defs[name]
            self.scope = name
            self.cur_implicit = []
            gamma = dict(defn.params)
            self.process(defn.body, gamma, frozenset())
            self.implicit[name] = list(self.cur_implicit)
        self.scope = None
        self.cur_implicit = []
        main = self.program.main
        entry = self.defs.get(main.name)
        gamma: dict = {}
        if entry is not None and len(entry.params) == len(main.args):
            # free names of the entry call are external channels of the environment
            for arg, (_, t) in zip(main.args, entry.params):
                if isinstance(arg, Var) and t != QDIT:
                    gamma.setdefault(arg.name, t)
        already = {name for _, name in self.seen}
        self.seen |= {(None, name) for name in already}
        self.call(main, gamma, frozenset())
        return self.diags


def _has_measure(e: Expr) -> bool:
    if isinstance(e, Measure):
        return True
    if isinstance(e, Plus):
        return _has_measure(e.left) or _has_measure(e.right)
    if isinstance(e, Neg):
        return _has_measure(e.operand)
    return False


def typecheck(program: Program) -> list[Diagnostic]:
    """Return diagnostics for ``program``; an empty list means well-typed."""
    return _Checker(program).run()


def implicit_qudits(program: Program) -> dict[str, list[str]]:
    """Implicit qudit parameters of every definition (see module docstring)."""
    checker = _Checker(program)
    checker.run()
    return checker.implicit
