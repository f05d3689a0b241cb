"""Immutable AST for CQP programs.

Source locations are carried on nodes but excluded from equality, so two
programs compare equal when they have the same structure.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union


@dataclass(frozen=True)
class Loc:
    line: int
    col: int

    def __str__(self) -> str:
        return f"{self.line}:{self.col}"


def _loc():
    return field(default=None, compare=False, repr=False, kw_only=True)


# -- types ------------------------------------------------------------------


@dataclass(frozen=True)
class QditType:
    def __str__(self) -> str:
        return "Qdit"


@dataclass(frozen=True)
class ValType:
    def __str__(self) -> str:
        return "Val"


@dataclass(frozen=True)
class ChanType:
    payload: tuple[TypeExpr, ...]

    def __post_init__(self) -> None:
        if not self.payload:
            raise ValueError("channel payload must be non-empty")

    def __str__(self) -> str:
        return "^[" + ",".join(str(t) for t in self.payload) + "]"


TypeExpr = Union[QditType, ValType, ChanType]
QDIT = QditType()
VAL = ValType()


# -- expressions --------------------------------------------------------------


@dataclass(frozen=True)
class Lit:
    value: int
    loc: Optional[Loc] = _loc()


@dataclass(frozen=True)
class Var:
    name: str
    loc: Optional[Loc] = _loc()


@dataclass(frozen=True)
class Plus:
    left: Expr
    right: Expr
    loc: Optional[Loc] = _loc()


@dataclass(frozen=True)
class Neg:
    operand: Expr
    loc: Optional[Loc] = _loc()


@dataclass(frozen=True)
class Measure:
    qudits: tuple[str, ...]
    loc: Optional[Loc] = _loc()

    def __post_init__(self) -> None:
        if not self.qudits:
            raise ValueError("measure needs at least one qudit")
        if len(set(self.qudits)) != len(self.qudits):
            raise ValueError(f"measure arguments repeat: {self.qudits}")


Expr = Union[Lit, Var, Plus, Neg, Measure]


# -- gates ------------------------------------------------------------------

GATE_NAMES = ("H", "Hinv", "X", "Z", "U", "Rc", "Lc")
GATE_ARITY = {"H": 1, "Hinv": 1, "X": 1, "Z": 1, "U": 1, "Rc": 2, "Lc": 2}
# number of integer exponents each gate takes in source
GATE_PARAMS = {"H": 0, "Hinv": 0, "X": 1, "Z": 1, "U": 2, "Rc": 0, "Lc": 0}


@dataclass(frozen=True)
class GateApp:
    """A gate as written in source; exponents are evaluated at run time."""

    name: str
    exponents: tuple[Expr, ...] = ()

    def __post_init__(self) -> None:
        if self.name not in GATE_ARITY:
            raise ValueError(f"unknown gate {self.name!r}")
        if len(self.exponents) != GATE_PARAMS[self.name]:
            raise ValueError(f"gate {self.name} takes {GATE_PARAMS[self.name]} exponent(s)")

    @property
    def arity(self) -> int:
        return GATE_ARITY[self.name]


# -- processes ----------------------------------------------------------------


@dataclass(frozen=True)
class Nil:
    loc: Optional[Loc] = _loc()


@dataclass(frozen=True)
class Input:
    chan: str
    params: tuple[tuple[str, TypeExpr], ...]
    cont: Process
    loc: Optional[Loc] = _loc()


@dataclass(frozen=True)
class Output:
    chan: str
    args: tuple[Expr, ...]
    cont: Process
    loc: Optional[Loc] = _loc()


@dataclass(frozen=True)
class Action:
    targets: tuple[str, ...]
    gate: GateApp
    cont: Process
    loc: Optional[Loc] = _loc()


@dataclass(frozen=True)
class QditAlloc:
    names: tuple[str, ...]
    cont: Process
    loc: Optional[Loc] = _loc()


@dataclass(frozen=True)
class NewChan:
    name: str
    type: TypeExpr
    cont: Process
    loc: Optional[Loc] = _loc()


@dataclass(frozen=True)
class Parallel:
    left: Process
    right: Process
    loc: Optional[Loc] = _loc()


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple[Expr, ...]
    loc: Optional[Loc] = _loc()


Process = Union[Nil, Input, Output, Action, QditAlloc, NewChan, Parallel, Call]
PREFIXES = (Input, Output, Action, QditAlloc, NewChan)


@dataclass(frozen=True)
class Definition:
    name: str
    params: tuple[tuple[str, TypeExpr], ...]
    body: Process
    loc: Optional[Loc] = _loc()


@dataclass(frozen=True)
class Program:
    definitions: tuple[Definition, ...]
    main: Call

    @property
    def entry(self) -> str:
        return self.main.name

    def definition(self, name: str) -> Definition:
        for defn in self.definitions:
            if defn.name == name:
                return defn
        raise KeyError(name)

    @property
    def names(self) -> list[str]:
        return [defn.name for defn in self.definitions]


def parallel(*procs: Process) -> Process:
    """Left-nested parallel composition of ``procs`` with ``Nil`` dropped."""
    procs = [p for p in procs if not isinstance(p, Nil)]
    if not procs:
        return Nil()
    out = procs[0]
    for p in procs[1:]:
        out = Parallel(out, p)
    return out


def threads(p: Process) -> list[Process]:
    """Flatten nested ``Parallel`` nodes into their non-nil components."""
    if isinstance(p, Parallel):
        return threads(p.left) + threads(p.right)
    if isinstance(p, Nil):
        return []
    return [p]
