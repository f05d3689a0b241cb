"""Labelled transition system over CQP configurations.

A configuration pairs a process term with the quantum store. Measurement
results that have not been observed yet keep the configuration *mixed*: a
weighted list of components that share one term skeleton and differ in
their quantum state and in the values of the abstracted variables. When
such a value leaves the system on an external channel the mixture is
resolved into a probability distribution over branches.

Variables are substituted into terms eagerly; abstracted variables are
named ``%0``, ``%1``, ... so they can never clash with source names.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Mapping, Optional, Protocol, Sequence, Union

import numpy as np

from cqpd.qudit import (
    GateKind,
    GateSpec,
    QuantumState,
    apply_gate,
    join,
    make_state,
    measure,
)
from cqpd.syntax.ast import (
    QDIT,
    VAL,
    Action,
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
    parallel,
    threads,
)
from cqpd.syntax.inline import inline
from cqpd.syntax.pretty import pretty_expr, pretty_gate, pretty_process
from cqpd.syntax.subst import free_names, subst_expr, substitute

WEIGHT_TOL = 1e-9

Value = Union[int, str]


class SemanticsError(RuntimeError):
    pass


class OwnershipError(SemanticsError):
    """A term touched a qudit it does not own."""


class NotReadyError(SemanticsError):
    """The focused expression still has non-value operands."""


class StuckError(SemanticsError):
    def __init__(self, message: str, component: Optional[int] = None):
        super().__init__(message if component is None else f"component {component}: {message}")
        self.component = component


class RuntimeTypeError(SemanticsError):
    pass


# --------------------------------------------------------------------------
# configurations


@dataclass(frozen=True)
class Component:
    weight: float
    sigma: QuantumState
    values: tuple[int, ...] = ()


def _check_weights(weights: Sequence[float], what: str) -> None:
    if not weights:
        raise SemanticsError(f"{what} must be non-empty")
    total = math.fsum(weights)
    if abs(total - 1.0) > WEIGHT_TOL:
        raise SemanticsError(f"{what} weights sum to {total!r}, expected 1")
    if any(not (0.0 < w <= 1.0 + WEIGHT_TOL) for w in weights):
        raise SemanticsError(f"{what} weights must lie in (0, 1]: {list(weights)}")


@dataclass(frozen=True)
class PureConfiguration:
    sigma: QuantumState
    omega: tuple[str, ...]
    term: Process
    private: frozenset[str] = frozenset()
    fresh: int = 0

    def __post_init__(self) -> None:
        missing = set(self.omega) - set(self.sigma.names)
        if missing:
            raise OwnershipError(f"owned qudits {sorted(missing)} are not in the quantum store")

    @property
    def d(self) -> int:
        return self.sigma.d

    def lift(self) -> MixedConfiguration:
        return MixedConfiguration(
            (Component(1.0, self.sigma, ()),), (), self.term, self.omega, self.private, self.fresh
        )


@dataclass(frozen=True)
class MixedConfiguration:
    components: tuple[Component, ...]
    variables: tuple[str, ...]
    term: Process
    omega: tuple[str, ...]
    private: frozenset[str] = frozenset()
    fresh: int = 0

    def __post_init__(self) -> None:
        _check_weights([c.weight for c in self.components], "mixture")
        names = self.components[0].sigma.names
        for i, c in enumerate(self.components):
            if len(c.values) != len(self.variables):
                raise SemanticsError(
                    f"component {i} has {len(c.values)} values for {len(self.variables)} variables"
                )
            if c.sigma.names != names:
                raise SemanticsError(f"component {i} store {c.sigma.names} differs from {names}")
        missing = set(self.omega) - set(names)
        if missing:
            raise OwnershipError(f"owned qudits {sorted(missing)} are not in the quantum store")

    @property
    def d(self) -> int:
        return self.components[0].sigma.d

    @property
    def weights(self) -> list[float]:
        return [c.weight for c in self.components]

    def lift(self) -> MixedConfiguration:
        return self

    def instantiate(self, i: int) -> PureConfiguration:
        """Component ``i`` as a pure configuration with its values substituted."""
        c = self.components[i]
        mapping = {v: Lit(x) for v, x in zip(self.variables, c.values)}
        return PureConfiguration(c.sigma, self.omega, substitute(self.term, mapping), self.private, self.fresh)


@dataclass(frozen=True)
class ProbDistribution:
    """Observable probabilistic branching; ``outcomes[i]`` is what branch i emitted."""

    branches: tuple[tuple[float, Configuration], ...]
    outcomes: tuple[tuple[Value, ...], ...] = ()

    def __post_init__(self) -> None:
        _check_weights([p for p, _ in self.branches], "distribution")

    @property
    def probabilities(self) -> list[float]:
        return [p for p, _ in self.branches]


Configuration = Union[PureConfiguration, MixedConfiguration]


@dataclass(frozen=True)
class ExprConfiguration:
    """Result of a value step: ``sum_i g_i (sigma_i; omega; lambda x. e; v_i)``."""

    components: tuple[Component, ...]
    variables: tuple[str, ...]
    expr: Optional[Expr]  # None stands for ``unit``
    omega: tuple[str, ...]


# --------------------------------------------------------------------------
# labels


@dataclass(frozen=True)
class InputLabel:
    chan: str
    values: tuple[Value, ...]

    def __str__(self) -> str:
        return f"{self.chan}?[{', '.join(map(str, self.values))}]"


@dataclass(frozen=True)
class OutputLabel:
    """``alternatives`` lists every value tuple the output may carry."""

    chan: str
    alternatives: tuple[tuple[Value, ...], ...]

    @property
    def slots(self) -> tuple[frozenset, ...]:
        return tuple(frozenset(col) for col in zip(*self.alternatives))

    @property
    def values(self) -> tuple[Value, ...]:
        if len(self.alternatives) != 1:
            raise ValueError("output carries a set of alternatives")
        return self.alternatives[0]

    def __str__(self) -> str:
        if len(self.alternatives) == 1:
            return f"{self.chan}![{', '.join(map(str, self.alternatives[0]))}]"
        slots = ", ".join("{" + ",".join(map(str, sorted(s, key=_sort_key))) + "}" for s in self.slots)
        return f"{self.chan}![{slots}]"


@dataclass(frozen=True)
class Tau:
    kind: str  # action | alloc | new | measure | plus | neg | comm
    detail: str = ""

    def __str__(self) -> str:
        return f"tau<{self.kind}{': ' + self.detail if self.detail else ''}>"


@dataclass(frozen=True)
class ProbBranch:
    probability: float
    index: int

    def __str__(self) -> str:
        return f"~{self.probability:.6g}~>[{self.index}]"


TransitionLabel = Union[InputLabel, OutputLabel, Tau, ProbBranch]


def _sort_key(v: Value):
    return (0, v, "") if isinstance(v, int) else (1, 0, str(v))


# --------------------------------------------------------------------------
# environment


class Environment(Protocol):
    def supply(self, chan: str, params: Sequence[tuple[str, TypeExpr]]) -> Optional[tuple]:
        """Payload for an external input on ``chan``, or None if not offered."""


@dataclass(frozen=True)
class Inputs:
    """Environment keyed by the receiving parameter name (``x``) or ``chan.x``.

    Qdit parameters take single-qudit :class:`QuantumState` values, Val
    parameters take integers.
    """

    bindings: Mapping[str, object] = field(default_factory=dict)

    def supply(self, chan, params):
        out = []
        for name, t in params:
            key = name.split("'")[0]
            v = self.bindings.get(f"{chan}.{key}", self.bindings.get(key))
            if v is None:
                return None
            if t == QDIT and not (isinstance(v, QuantumState) and v.n == 1):
                return None
            if t == VAL and not isinstance(v, (int, np.integer)):
                return None
            out.append(v if t == QDIT else int(v))
        return tuple(out)


NO_INPUTS = Inputs()


# --------------------------------------------------------------------------
# expression evaluation


@dataclass(frozen=True)
class Trans:
    """The unitary-application expression ``targets *= gate``."""

    targets: tuple[str, ...]
    gate: GateApp


def _is_abstract(name: str) -> bool:
    return name.startswith("%")


def _int_value(e: Expr) -> int:
    if isinstance(e, Lit):
        return e.value
    if isinstance(e, Plus):
        return _int_value(e.left) + _int_value(e.right)
    if isinstance(e, Neg):
        return -_int_value(e.operand)
    if isinstance(e, Var):
        raise RuntimeTypeError(f"{e.name!r} is not an integer value")
    raise NotReadyError(f"{pretty_expr(e)} is not evaluated")


def gate_spec(gate: GateApp) -> GateSpec:
    """Turn a source gate with evaluated exponents into a :class:`GateSpec`."""
    exps = [_int_value(e) for e in gate.exponents]
    if gate.name == "X":
        return GateSpec.shift_x(exps[0])
    if gate.name == "Z":
        return GateSpec.phase_z(exps[0])
    if gate.name == "U":
        return GateSpec.pauli(exps[0], exps[1])
    return GateSpec(
        {"H": GateKind.HADAMARD, "Hinv": GateKind.HADAMARD_INV, "Rc": GateKind.CNOT_RIGHT, "Lc": GateKind.CNOT_LEFT}[
            gate.name
        ]
    )


def _require_owned(qudits: Sequence[str], omega: Sequence[str]) -> None:
    stray = [q for q in qudits if q not in omega]
    if stray:
        raise OwnershipError(f"qudit(s) {stray} are not owned by the term (owned: {list(omega)})")


def value_step(
    sigma: QuantumState, omega: Sequence[str], expr: Union[Expr, Trans], var: str = "%0"
) -> ExprConfiguration:
    """One ``->_v`` step on a redex whose operands are already values.

    ``u + v`` and ``-u`` bind the result to the fresh placeholder ``var``;
    ``measure`` yields one component per possible outcome; ``q *= U``
    updates the store and evaluates to unit without a new variable.
    """
    omega = tuple(omega)
    if isinstance(expr, (Plus, Neg)):
        parts = (expr.left, expr.right) if isinstance(expr, Plus) else (expr.operand,)
        if not all(isinstance(p, Lit) for p in parts):
            raise NotReadyError(f"{pretty_expr(expr)} has unevaluated operands")
        w = _int_value(expr)
        return ExprConfiguration((Component(1.0, sigma, (w,)),), (var,), Var(var), omega)
    if isinstance(expr, Measure):
        _require_owned(expr.qudits, omega)
        comps = tuple(Component(o.weight, o.post_state, (o.outcome,)) for o in measure(sigma, expr.qudits))
        return ExprConfiguration(comps, (var,), Var(var), omega)
    if isinstance(expr, Trans):
        _require_owned(expr.targets, omega)
        new = apply_gate(sigma, expr.targets, gate_spec(expr.gate))
        return ExprConfiguration((Component(1.0, new, ()),), (), None, omega)
    raise NotReadyError(f"{expr!r} is not a redex")


def _redex(e: Expr) -> Optional[tuple[Expr, Callable[[Expr], Expr]]]:
    """Leftmost-innermost redex of ``e`` and a function plugging its replacement back."""
    if isinstance(e, (Lit, Var)):
        return None
    if isinstance(e, Measure):
        return e, lambda x: x
    if isinstance(e, Plus):
        found = _redex(e.left)
        if found:
            r, plug = found
            return r, lambda x: Plus(plug(x), e.right)
        found = _redex(e.right)
        if found:
            r, plug = found
            return r, lambda x: Plus(e.left, plug(x))
        return e, lambda x: x
    if isinstance(e, Neg):
        found = _redex(e.operand)
        if found:
            r, plug = found
            return r, lambda x: Neg(plug(x))
        return e, lambda x: x
    raise TypeError(e)


def _focus(thread: Process):
    """The redex a thread would evaluate next and a function rebuilding the thread."""
    if isinstance(thread, Action):
        return Trans(thread.targets, thread.gate), lambda _: thread.cont
    if isinstance(thread, Output):
        for k, arg in enumerate(thread.args):
            found = _redex(arg)
            if found:
                r, plug = found

                def rebuild(x, k=k, plug=plug):
                    args = list(thread.args)
                    args[k] = plug(x)
                    return Output(thread.chan, tuple(args), thread.cont, loc=thread.loc)

                return r, rebuild
    return None


def _inst(redex, mapping):
    if isinstance(redex, Trans):
        gate = GateApp(redex.gate.name, tuple(subst_expr(e, mapping) for e in redex.gate.exponents))
        return Trans(redex.targets, gate)
    return subst_expr(redex, mapping)


def _rebuild_term(ths: list[Process], i: int, new: Process) -> Process:
    return parallel(*(new if k == i else t for k, t in enumerate(ths)))


def _ready_threads(term: Process) -> list[int]:
    return [i for i, t in enumerate(threads(term)) if _focus(t) is not None]


def expr_step(config: Configuration, thread: Optional[int] = None) -> MixedConfiguration:
    """Evaluate one redex in every component (context rule).

    ``thread`` indexes the flattened parallel components of the term; by
    default the first thread with a pending redex is used. Weights multiply
    and new abstracted variables are appended after the existing ones.
    """
    mixed = config.lift()
    ths = threads(mixed.term)
    if thread is None:
        ready = _ready_threads(mixed.term)
        if not ready:
            raise NotReadyError("no thread has an expression to evaluate")
        thread = ready[0]
    focus = _focus(ths[thread])
    if focus is None:
        raise NotReadyError(f"thread {thread} has nothing to evaluate: {pretty_process(ths[thread])}")
    redex, rebuild = focus
    var = f"%{mixed.fresh}"
    comps: list[Component] = []
    new_vars: Optional[tuple[str, ...]] = None
    result_expr = None
    for i, c in enumerate(mixed.components):
        mapping = {v: Lit(x) for v, x in zip(mixed.variables, c.values)}
        try:
            ec = value_step(c.sigma, mixed.omega, _inst(redex, mapping), var)
        except NotReadyError as exc:
            raise StuckError(str(exc), i) from exc
        new_vars = ec.variables
        result_expr = ec.expr
        for sub in ec.components:
            comps.append(Component(c.weight * sub.weight, sub.sigma, c.values + sub.values))
    term = _rebuild_term(ths, thread, rebuild(result_expr))
    fresh = mixed.fresh + (1 if new_vars else 0)
    return MixedConfiguration(tuple(comps), mixed.variables + new_vars, term, mixed.omega, mixed.private, fresh)


# --------------------------------------------------------------------------
# transitions


def _names_in_use(mixed: MixedConfiguration) -> set[str]:
    return set(mixed.components[0].sigma.names) | free_names(mixed.term) | set(mixed.private)


def _fresh_name(base: str, used: set[str], counter: int) -> tuple[str, int]:
    root = base.split("'")[0]
    if root not in used:
        return root, counter
    while True:
        counter += 1
        cand = f"{root}'{counter}"
        if cand not in used:
            return cand, counter


def _emitted(args: Sequence[Expr], mixed: MixedConfiguration, comp: Component) -> tuple[Value, ...]:
    index = {v: k for k, v in enumerate(mixed.variables)}
    out: list[Value] = []
    for a in args:
        if isinstance(a, Lit):
            out.append(a.value)
        elif isinstance(a, Var) and a.name in index:
            out.append(comp.values[index[a.name]])
        elif isinstance(a, Var):
            out.append(a.name)
        else:
            raise NotReadyError(f"{pretty_expr(a)} is not a value")
    return tuple(out)


def _sent_qudits(args: Sequence[Expr], mixed: MixedConfiguration) -> list[str]:
    store = set(mixed.components[0].sigma.names)
    return [a.name for a in args if isinstance(a, Var) and a.name in store]


def finish(mixed: MixedConfiguration) -> Configuration:
    """Present a trivial mixture (one component, no variables) as a pure configuration."""
    if len(mixed.components) == 1 and not mixed.variables:
        c = mixed.components[0]
        return PureConfiguration(c.sigma, mixed.omega, mixed.term, mixed.private, mixed.fresh)
    return mixed


def output_resolve(config: Configuration, thread: Optional[int] = None) -> tuple[OutputLabel, ProbDistribution]:
    """Fire an external output whose payload may depend on measurement results.

    Components emitting the same value tuple are merged into one branch whose
    probability is their total weight; inside a branch the components keep
    their relative weights. A pure configuration gives a single branch.
    """
    mixed = config.lift()
    ths = threads(mixed.term)
    if thread is None:
        thread = next((i for i, t in enumerate(ths) if isinstance(t, Output) and _focus(t) is None), None)
        if thread is None:
            raise NotReadyError("no output is ready to fire")
    out = ths[thread]
    if not isinstance(out, Output) or _focus(out) is not None:
        raise NotReadyError(f"thread {thread} is not a ready output")
    sent = _sent_qudits(out.args, mixed)
    _require_owned(sent, mixed.omega)
    omega = tuple(q for q in mixed.omega if q not in sent)
    term = _rebuild_term(ths, thread, out.cont)
    groups: dict[tuple, list[Component]] = {}
    for c in mixed.components:
        groups.setdefault(_emitted(out.args, mixed, c), []).append(c)
    alternatives = tuple(sorted(groups, key=lambda t: tuple(_sort_key(v) for v in t)))
    branches = []
    for alt in alternatives:
        members = groups[alt]
        p = math.fsum(c.weight for c in members)
        comps = tuple(replace(c, weight=c.weight / p) for c in members)
        branch = MixedConfiguration(comps, mixed.variables, term, omega, mixed.private, mixed.fresh)
        branches.append((p, finish(branch)))
    total = math.fsum(p for p, _ in branches)
    branches = [(p / total, b) for p, b in branches]
    return OutputLabel(out.chan, alternatives), ProbDistribution(tuple(branches), alternatives)


def _alloc(mixed, ths, i, th: QditAlloc):
    used = _names_in_use(mixed)
    counter = mixed.fresh
    fresh = []
    for q in th.names:
        name, counter = _fresh_name(q, used, counter)
        used.add(name)
        fresh.append(name)
    block = make_state(mixed.d, fresh)
    comps = tuple(replace(c, sigma=join(c.sigma, block)) for c in mixed.components)
    cont = substitute(th.cont, {q: Var(n) for q, n in zip(th.names, fresh)})
    term = _rebuild_term(ths, i, cont)
    new = MixedConfiguration(comps, mixed.variables, term, mixed.omega + tuple(fresh), mixed.private, counter)
    return Tau("alloc", ",".join(fresh)), finish(new)


def _new(mixed, ths, i, th: NewChan):
    name, counter = _fresh_name(th.name, _names_in_use(mixed), mixed.fresh)
    cont = substitute(th.cont, {th.name: Var(name)})
    new = replace(mixed, term=_rebuild_term(ths, i, cont), private=mixed.private | {name}, fresh=counter)
    return Tau("new", name), finish(new)


def _communicate(mixed, ths, i, j):
    out, inp = ths[i], ths[j]
    mapping = {name: arg for (name, _), arg in zip(inp.params, out.args)}
    new_threads = list(ths)
    new_threads[i] = out.cont
    new_threads[j] = substitute(inp.cont, mapping)
    new = replace(mixed, term=parallel(*new_threads))
    detail = f"{out.chan}: {', '.join(pretty_expr(a) for a in out.args)}"
    return Tau("comm", detail), finish(new)


def _external_input(mixed, ths, i, th: Input, payload):
    used = _names_in_use(mixed)
    counter = mixed.fresh
    comps = list(mixed.components)
    omega = list(mixed.omega)
    mapping: dict[str, Expr] = {}
    shown: list[Value] = []
    for (name, t), v in zip(th.params, payload):
        if t == QDIT:
            if v.d != mixed.d:
                raise RuntimeTypeError(f"input qudit has dimension {v.d}, system uses {mixed.d}")
            qname, counter = _fresh_name(name, used, counter)
            used.add(qname)
            incoming = QuantumState(v.d, (qname,), v.amplitudes)
            comps = [replace(c, sigma=join(c.sigma, incoming)) for c in comps]
            omega.append(qname)
            mapping[name] = Var(qname)
            shown.append(qname)
        else:
            mapping[name] = Lit(int(v))
            shown.append(int(v))
    cont = substitute(th.cont, mapping)
    new = MixedConfiguration(
        tuple(comps), mixed.variables, _rebuild_term(ths, i, cont), tuple(omega), mixed.private, counter
    )
    return InputLabel(th.chan, tuple(shown)), finish(new)


def _plain_output(mixed, ths, i, th: Output):
    sent = _sent_qudits(th.args, mixed)
    _require_owned(sent, mixed.omega)
    values = _emitted(th.args, mixed, mixed.components[0])
    omega = tuple(q for q in mixed.omega if q not in sent)
    new = replace(mixed, term=_rebuild_term(ths, i, th.cont), omega=omega)
    return OutputLabel(th.chan, (values,)), finish(new)


def _redex_kind(redex) -> str:
    return {Measure: "measure", Plus: "plus", Neg: "neg", Trans: "action"}[type(redex)]


def _redex_detail(redex) -> str:
    if isinstance(redex, Trans):
        return f"{','.join(redex.targets)} *= {pretty_gate(redex.gate)}"
    return pretty_expr(redex)


def transitions(
    config: Union[Configuration, ProbDistribution], env: Optional[Environment] = None
) -> list[tuple[TransitionLabel, Union[Configuration, ProbDistribution]]]:
    """Every enabled one-step transition, in thread order.

    A :class:`ProbDistribution` offers one probabilistic step per branch.
    External inputs are enabled only when ``env`` supplies a payload.
    """
    if isinstance(config, ProbDistribution):
        return [(ProbBranch(p, k), b) for k, (p, b) in enumerate(config.branches)]
    mixed = config.lift()
    ths = threads(mixed.term)
    result: list = []
    for i, th in enumerate(ths):
        if isinstance(th, Action):
            redex, _ = _focus(th)
            result.append((Tau("action", _redex_detail(redex)), finish(expr_step(mixed, i))))
        elif isinstance(th, QditAlloc):
            result.append(_alloc(mixed, ths, i, th))
        elif isinstance(th, NewChan):
            result.append(_new(mixed, ths, i, th))
        elif isinstance(th, Output):
            focus = _focus(th)
            if focus is not None:
                redex = focus[0]
                result.append((Tau(_redex_kind(redex), _redex_detail(redex)), finish(expr_step(mixed, i))))
                continue
            for j, other in enumerate(ths):
                if j != i and isinstance(other, Input) and other.chan == th.chan and len(other.params) == len(th.args):
                    result.append(_communicate(mixed, ths, i, j))
            if th.chan not in mixed.private:
                abstract = any(isinstance(a, Var) and a.name in mixed.variables for a in th.args)
                if abstract:
                    result.append(output_resolve(mixed, i))
                else:
                    result.append(_plain_output(mixed, ths, i, th))
        elif isinstance(th, Input):
            if th.chan in mixed.private or env is None:
                continue
            payload = env.supply(th.chan, th.params)
            if payload is not None:
                result.append(_external_input(mixed, ths, i, th, payload))
        elif isinstance(th, Parallel):  # pragma: no cover - threads() flattens
            raise AssertionError
        else:
            raise SemanticsError(f"cannot execute {pretty_process(th)}")
    return result


def sample_branch(dist: ProbDistribution, rng: Union[np.random.Generator, int, None] = None) -> Configuration:
    """Pick a branch with its probability; deterministic for a fixed seed."""
    return dist.branches[choose_branch(dist, rng)][1]


def choose_branch(dist: ProbDistribution, rng: Union[np.random.Generator, int, None] = None) -> int:
    if len(dist.branches) == 1:
        return 0
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    probs = np.array(dist.probabilities)
    return int(rng.choice(len(probs), p=probs / probs.sum()))


# --------------------------------------------------------------------------
# helpers


def initial_configuration(program: Program, d: int) -> PureConfiguration:
    """Empty quantum store, nothing owned, entry call expanded."""
    return PureConfiguration(QuantumState(d, (), np.ones(1)), (), inline(program))


def is_terminated(config) -> bool:
    if isinstance(config, ProbDistribution):
        return False
    return isinstance(config.term, Nil)


def components(config: Configuration) -> tuple[Component, ...]:
    return config.lift().components


def describe(config) -> str:
    if isinstance(config, ProbDistribution):
        parts = [f"{p:.6g}: {describe(b)}" for p, b in config.branches]
        return "[+] " + " [+] ".join(parts)
    mixed = config.lift()
    lam = f"\\{','.join(mixed.variables)}." if mixed.variables else ""
    head = f"omega={{{','.join(mixed.omega)}}}; {lam}{pretty_process(mixed.term)}"
    if len(mixed.components) == 1 and not mixed.variables:
        return f"({head})"
    return f"(+) {len(mixed.components)} components: {head}"


def _fmt(x: float) -> str:
    s = f"{x + 0.0:.10f}"
    return "0.0000000000" if s == "-0.0000000000" else s


def digest(config) -> str:
    """Stable hex digest of a configuration (amplitudes rounded to 1e-10)."""
    h = hashlib.sha256()
    if isinstance(config, ProbDistribution):
        h.update(b"dist")
        for p, b in config.branches:
            h.update(_fmt(p).encode())
            h.update(digest(b).encode())
        return h.hexdigest()
    mixed = config.lift()
    h.update(pretty_process(mixed.term).encode())
    h.update(("|".join(mixed.omega) + ";" + "|".join(sorted(mixed.private))).encode())
    h.update(",".join(mixed.variables).encode())
    for c in mixed.components:
        h.update(_fmt(c.weight).encode())
        h.update(repr(c.values).encode())
        h.update("|".join(c.sigma.names).encode())
        for a in c.sigma.amplitudes:
            h.update(f"{_fmt(a.real)},{_fmt(a.imag)};".encode())
    return h.hexdigest()
