from pathlib import Path

import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from cqpd.syntax import CqpSyntaxError, DiagnosticKind, LexError, ParseError, parse, pretty, typecheck
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
)
from cqpd.syntax.typecheck import implicit_qudits

CORPUS = Path(__file__).resolve().parents[1] / "src" / "cqpd" / "corpus"

TELEPORT = """\
Alice(c:^[Qdit], e:^[Val,Val]) = c?[x:Qdit].{x,z *= Lc}.{x *= H}.e![measure z, measure x].0
Bob(d:^[Qdit], e:^[Val,Val])   = e?[m1:Val, m2:Val].{y *= X^-m1}.{y *= Z^m2}.d![y].0
Teleport(c:^[Qdit], d:^[Qdit]) = (qdit y,z)({z *= H}.{z,y *= Rc}.(new e:^[Val,Val])(Alice(c,e) | Bob(d,e)))
main = Teleport(c,d)
"""


def kinds(src):
    return [d.kind for d in typecheck(parse(src))]


# -- parser


def test_parse_teleport():
    prog = parse(TELEPORT)
    assert list(prog.names) == ["Alice", "Bob", "Teleport"]
    assert prog.entry == "Teleport"
    bob = prog.definition("Bob").body
    assert isinstance(bob, Input) and bob.params == (("m1", VAL), ("m2", VAL))
    act = bob.cont
    assert act.gate == GateApp("X", (Neg(Var("m1")),))


def test_corpus_files_match_normative_text():
    body = [ln for ln in (CORPUS / "teleport.cqp").read_text().splitlines() if ln and not ln.startswith("#")]
    assert parse("\n".join(body)) == parse(TELEPORT)


def test_nil_definition():
    prog = parse("P() = 0\nmain = P()")
    assert prog.definition("P").body == Nil()
    assert pretty(Nil()) == "0"


def test_entry_defaults_to_last_definition():
    prog = parse("Q(c:^[Val]) = 0\nP(c:^[Val]) = Q(c)")
    assert prog.main == Call("P", (Var("c"),))


def test_unclosed_bracket_is_reported_at_the_bracket():
    with pytest.raises(ParseError) as err:
        parse("P() = c![x")
    assert (err.value.line, err.value.col) == (1, 9)


@pytest.mark.parametrize(
    "src, cls",
    [
        ("P() = $", LexError),
        ("P() = 0\nP() = 0", ParseError),
        ("P() = c?[x].0", ParseError),
        ("P() = {q *= Y}.0", ParseError),
        ("main = P()", ParseError),
        ("P(c:^[]) = 0", ParseError),
        (b"P() = \xff", LexError),
    ],
)
def test_syntax_errors(src, cls):
    with pytest.raises(cls) as err:
        parse(src)
    assert err.value.line >= 1 and err.value.col >= 1


def test_bit_reads_as_val():
    prog = parse("P(d:^[bit,bit]) = 0")
    assert prog.definition("P").params == (("d", ChanType((VAL, VAL))),)


def test_pretty_output_of_measures():
    p = Output("c", (Measure(("z",)), Measure(("x",))), Nil())
    assert pretty(p) == "c![measure z, measure x].0"
    assert pretty(Output("c", (Measure(("a", "b")),), Nil())) == "c![measure(a, b)].0"


@pytest.mark.parametrize("name", ["teleport", "sdc"])
def test_corpus_roundtrip(name):
    prog = parse((CORPUS / f"{name}.cqp").read_text())
    assert parse(pretty(prog)) == prog


# -- typechecker


@pytest.mark.parametrize("name", ["teleport", "sdc"])
def test_corpus_typechecks(name):
    assert typecheck(parse((CORPUS / f"{name}.cqp").read_text())) == []


def test_use_after_send():
    diags = typecheck(parse("P(c:^[Qdit]) = c![q].{q *= H}.0"))
    assert [d.kind for d in diags] == [DiagnosticKind.CLONING_VIOLATION]
    assert "'q'" in diags[0].message and diags[0].loc is not None


def test_output_arity():
    assert kinds("P(c:^[Val]) = c![v, w].0") == [DiagnosticKind.ARITY_MISMATCH]


@pytest.mark.parametrize(
    "src, kind",
    [
        ("P(c:^[Val]) = c?[x:Val, y:Val].0", DiagnosticKind.ARITY_MISMATCH),
        ("P(c:^[Qdit]) = c?[x:Val].0", DiagnosticKind.TYPE_MISMATCH),
        ("P(c:^[Val]) = (qdit q){q *= Rc}.0", DiagnosticKind.ARITY_MISMATCH),
        ("P(c:^[Val]) = {c *= H}.0", DiagnosticKind.TYPE_MISMATCH),
        ("P(c:^[Val]) = k![1].0", DiagnosticKind.UNKNOWN_NAME),
        ("P(c:^[Val]) = Q(c)", DiagnosticKind.UNKNOWN_NAME),
        ("P(c:^[Val]) = (qdit q)({q *= H}.0 | {q *= X}.0)", DiagnosticKind.CLONING_VIOLATION),
        ("P(c:^[Qdit,Qdit]) = (qdit q)c![q, q].0", DiagnosticKind.CLONING_VIOLATION),
        ("P(c:^[Val]) = P(c)", DiagnosticKind.RECURSION),
        ("Q(a:Val) = 0\nP(c:^[Val]) = Q(c, c)", DiagnosticKind.ARITY_MISMATCH),
    ],
)
def test_diagnostic_kinds(src, kind):
    assert kinds(src) == [kind]


def test_receiving_rebinds_a_sent_name():
    src = "P(c:^[Qdit]) = (qdit q)c![q].c?[q:Qdit].{q *= H}.0"
    assert typecheck(parse(src)) == []


def test_implicit_qudits_of_teleport():
    assert implicit_qudits(parse(TELEPORT)) == {"Alice": ["z"], "Bob": ["y"], "Teleport": []}


def test_implicit_qudit_shared_by_parallel_callers():
    src = """\
A(c:^[Val]) = {z *= H}.0
T(c:^[Val]) = (qdit z)(A(c) | A(c))
"""
    assert kinds(src) == [DiagnosticKind.CLONING_VIOLATION]


# -- random ASTs

NAMES = ["a", "b", "c", "q", "x", "y", "m1", "z2"]
names = st.sampled_from(NAMES)


def exprs():
    leaf = st.one_of(st.integers(0, 40).map(Lit), names.map(Var))
    return st.recursive(
        leaf,
        lambda sub: st.one_of(
            st.builds(Plus, sub, sub),
            sub.map(Neg),
        ),
        max_leaves=5,
    )


measures = st.lists(names, min_size=1, max_size=3, unique=True).map(lambda xs: Measure(tuple(xs)))
out_args = st.lists(st.one_of(exprs(), measures), min_size=1, max_size=3).map(tuple)
types = st.recursive(
    st.sampled_from([QDIT, VAL]),
    lambda sub: st.lists(sub, min_size=1, max_size=3).map(lambda ts: ChanType(tuple(ts))),
    max_leaves=4,
)
params = st.lists(st.tuples(names, types), min_size=1, max_size=3, unique_by=lambda p: p[0]).map(tuple)


def gates():
    one = st.sampled_from(["H", "Hinv"]).map(lambda n: (GateApp(n), 1))
    two = st.sampled_from(["Rc", "Lc"]).map(lambda n: (GateApp(n), 2))
    xz = st.builds(lambda n, e: (GateApp(n, (e,)), 1), st.sampled_from(["X", "Z"]), exprs())
    u = st.builds(lambda a, b: (GateApp("U", (a, b)), 1), exprs(), exprs())
    return st.one_of(one, two, xz, u)


@st.composite
def actions(draw, cont):
    gate, arity = draw(gates())
    targets = tuple(draw(st.lists(names, min_size=arity, max_size=arity, unique=True)))
    return Action(targets, gate, cont)


def processes():
    base = st.one_of(
        st.just(Nil()),
        st.builds(lambda n, args: Call(n.upper(), args), names, st.lists(exprs(), max_size=3).map(tuple)),
    )

    def extend(sub):
        return st.one_of(
            st.builds(Input, names, params, sub),
            st.builds(Output, names, out_args, sub),
            sub.flatmap(lambda c: actions(c)),
            st.builds(QditAlloc, st.lists(names, min_size=1, max_size=3, unique=True).map(tuple), sub),
            st.builds(NewChan, names, types.filter(lambda t: isinstance(t, ChanType)), sub),
            st.builds(Parallel, sub, sub),
        )

    return st.recursive(base, extend, max_leaves=8)


@st.composite
def programs(draw):
    defs = draw(
        st.lists(
            st.builds(Definition, st.sampled_from(["P", "Q", "Alice", "Bob", "R2"]), st.lists(
                st.tuples(names, types), max_size=3, unique_by=lambda p: p[0]).map(tuple), processes()),
            min_size=1,
            max_size=3,
            unique_by=lambda d: d.name,
        )
    )
    entry = draw(st.sampled_from(defs))
    main = Call(entry.name, tuple(draw(st.lists(exprs(), max_size=3))))
    return Program(tuple(defs), main)


@settings(max_examples=200, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(programs())
def test_random_ast_roundtrip(prog):
    text = pretty(prog)
    assert parse(text) == prog, text


@settings(max_examples=300, deadline=None)
@given(st.binary(max_size=200))
def test_parser_is_total_on_bytes(data):
    try:
        parse(data)
    except CqpSyntaxError:
        pass


TOKENS = ["P", "(", ")", "=", "0", "c", "?", "!", "[", "]", ".", "{", "}", "*=", "H", "X", "^", "-",
          "qdit", "new", "measure", ",", ":", "Qdit", "Val", "|", "main", "+", "1", "\n"]


@settings(max_examples=300, deadline=None)
@given(st.lists(st.sampled_from(TOKENS), max_size=40))
def test_parser_is_total_on_token_soup(toks):
    try:
        parse(" ".join(toks))
    except CqpSyntaxError:
        pass
