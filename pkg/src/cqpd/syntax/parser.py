"""Lexer and recursive-descent parser for ``.cqp`` source.

Grammar (``#`` starts a line comment)::

    program   := { definition | 'main' '=' NAME '(' [expr {',' expr}] ')' }
    definition:= NAME '(' [param {',' param}] ')' '=' process
    param     := NAME ':' type
    type      := 'Qdit' | 'Val' | 'bit' | '^' '[' type {',' type} ']'
    process   := prefixed { '|' prefixed }
    prefixed  := '0'
               | NAME '?' '[' [param {',' param}] ']' '.' prefixed
               | NAME '!' '[' [expr {',' expr}] ']' '.' prefixed
               | '{' NAME {',' NAME} '*=' gate '}' '.' prefixed
               | '(' 'qdit' NAME {',' NAME} ')' prefixed
               | '(' 'new' NAME ':' type ')' prefixed
               | '(' process ')'
               | NAME '(' [expr {',' expr}] ')'
    gate      := 'H' | 'Hinv' | 'Rc' | 'Lc' | ('X' | 'Z') ['^' exponent]
               | 'U' '(' expr ',' expr ')'
    exponent  := INT | NAME | '-' exponent | '(' expr ')'
    expr      := term { '+' term }
    term      := INT | NAME | '-' term | '(' expr ')'
               | 'measure' NAME | 'measure' '(' NAME {',' NAME} ')'
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from cqpd.syntax.ast import (
    QDIT,
    VAL,
    Action,
    Call,
    ChanType,
    Definition,
    Expr,
    GateApp,
    Input,
    Lit,
    Loc,
    Measure,
    Neg,
    NewChan,
    Nil,
    Output,
    Parallel,
    Process,
    Program,
    Plus,
    QditAlloc,
    TypeExpr,
    Var,
)

KEYWORDS = {"qdit", "new", "measure", "main", "Qdit", "Val", "bit"}


class CqpSyntaxError(Exception):
    """Lexical or syntactic error with a 1-based source position."""

    kind = "SyntaxError"

    def __init__(self, message: str, line: int = 0, col: int = 0):
        super().__init__(f"{line}:{col}: {message}")
        self.message = message
        self.line = line
        self.col = col


class LexError(CqpSyntaxError):
    kind = "LexError"


class ParseError(CqpSyntaxError):
    kind = "ParseError"


@dataclass(frozen=True)
class Token:
    kind: str  # NAME, INT, EOF or the punctuation text itself
    text: str
    line: int
    col: int

    @property
    def loc(self) -> Loc:
        return Loc(self.line, self.col)


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\f\v]+)
  | (?P<nl>\n)
  | (?P<comment>\#[^\n]*)
  | (?P<INT>[0-9]+)
  | (?P<NAME>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<punct>\*=|[()\[\]{},.:?!|=+\-^])
    """,
    re.VERBOSE,
)


def tokenize(source: str) -> list[Token]:
    tokens = []
    pos, line, line_start = 0, 1, 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            raise LexError(f"unexpected character {source[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        col = pos - line_start + 1
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind == "INT" or kind == "NAME":
            tokens.append(Token(kind, m.group(), line, col))
        elif kind == "punct":
            tokens.append(Token(m.group(), m.group(), line, col))
        pos = m.end()
    tokens.append(Token("EOF", "", line, pos - line_start + 1))
    return tokens


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.i = 0

    # -- helpers

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.tokens[min(self.i + k, len(self.tokens) - 1)]

    def error(self, message: str, tok: Token | None = None) -> ParseError:
        tok = tok or self.tok
        found = "end of input" if tok.kind == "EOF" else repr(tok.text)
        return ParseError(f"{message}, found {found}", tok.line, tok.col)

    def at(self, kind: str, text: str | None = None) -> bool:
        return self.tok.kind == kind and (text is None or self.tok.text == text)

    def accept(self, kind: str) -> Token | None:
        if self.tok.kind == kind:
            tok = self.tok
            self.i += 1
            return tok
        return None

    def expect(self, kind: str, what: str | None = None) -> Token:
        tok = self.accept(kind)
        if tok is None:
            raise self.error(f"expected {what or repr(kind)}")
        return tok

    def name(self, what: str = "a name") -> Token:
        tok = self.expect("NAME", what)
        if tok.text in KEYWORDS:
            raise ParseError(f"keyword {tok.text!r} cannot be used as {what}", tok.line, tok.col)
        return tok

    def keyword(self, word: str) -> bool:
        if self.tok.kind == "NAME" and self.tok.text == word:
            self.i += 1
            return True
        return False

    def comma_list(self, item, close: str) -> list:
        opener = self.tokens[self.i - 1]
        items = []
        if self.tok.kind != close:
            items.append(item())
            while self.accept(","):
                items.append(item())
        if not self.accept(close):
            if self.tok.kind == "EOF":
                raise ParseError(f"unclosed {opener.text!r}: expected {close!r}", opener.line, opener.col)
            raise self.error(f"expected {close!r}")
        return items

    # -- program

    def program(self) -> Program:
        defs: list[Definition] = []
        seen: dict[str, Definition] = {}
        main = None
        while not self.at("EOF"):
            if self.tok.kind == "NAME" and self.tok.text == "main":
                start = self.tok
                self.i += 1
                if main is not None:
                    raise ParseError("duplicate main declaration", start.line, start.col)
                self.expect("=", "'='")
                target = self.name("a process name")
                self.expect("(", "'('")
                args = self.comma_list(self.expr, ")")
                main = Call(target.text, tuple(args), loc=start.loc)
                continue
            defn = self.definition()
            if defn.name in seen:
                raise ParseError(
                    f"duplicate definition of {defn.name!r} (first at {seen[defn.name].loc})",
                    defn.loc.line,
                    defn.loc.col,
                )
            seen[defn.name] = defn
            defs.append(defn)
        if main is None:
            if not defs:
                raise self.error("expected at least one process definition")
            last = defs[-1]
            main = Call(last.name, tuple(Var(p) for p, _ in last.params), loc=last.loc)
        if main.name not in seen:
            raise ParseError(f"main refers to undefined process {main.name!r}", main.loc.line, main.loc.col)
        return Program(tuple(defs), main)

    def definition(self) -> Definition:
        head = self.name("a process name")
        self.expect("(", "'('")
        params = self.comma_list(self.param, ")")
        self.expect("=", "'='")
        body = self.process()
        return Definition(head.text, tuple(params), body, loc=head.loc)

    def param(self) -> tuple[str, TypeExpr]:
        name = self.name("a parameter name")
        self.expect(":", "':'")
        return name.text, self.type_expr()

    def type_expr(self) -> TypeExpr:
        if self.keyword("Qdit"):
            return QDIT
        if self.keyword("Val") or self.keyword("bit"):
            return VAL
        if self.accept("^"):
            self.expect("[", "'['")
            payload = self.comma_list(self.type_expr, "]")
            if not payload:
                raise self.error("channel type needs at least one payload type", self.tokens[self.i - 1])
            return ChanType(tuple(payload))
        raise self.error("expected a type")

    # -- processes

    def process(self) -> Process:
        left = self.prefixed()
        while self.at("|"):
            bar = self.expect("|")
            left = Parallel(left, self.prefixed(), loc=bar.loc)
        return left

    def prefixed(self) -> Process:
        tok = self.tok
        if tok.kind == "INT":
            if tok.text.lstrip("0") != "" or len(tok.text) != 1:
                raise self.error("expected a process")
            self.i += 1
            return Nil(loc=tok.loc)
        if tok.kind == "{":
            return self.action()
        if tok.kind == "(":
            nxt = self.peek()
            if nxt.kind == "NAME" and nxt.text == "qdit":
                self.i += 2
                names = [self.name("a qudit name").text]
                while self.accept(","):
                    names.append(self.name("a qudit name").text)
                self.expect(")", "')'")
                if len(set(names)) != len(names):
                    raise ParseError(f"repeated qudit name in allocation {names}", tok.line, tok.col)
                return QditAlloc(tuple(names), self.prefixed(), loc=tok.loc)
            if nxt.kind == "NAME" and nxt.text == "new":
                self.i += 2
                name = self.name("a channel name")
                self.expect(":", "':'")
                ty = self.type_expr()
                if not isinstance(ty, ChanType):
                    raise ParseError("new requires a channel type", name.line, name.col)
                self.expect(")", "')'")
                return NewChan(name.text, ty, self.prefixed(), loc=tok.loc)
            self.i += 1
            inner = self.process()
            self.expect(")", "')'")
            return inner
        if tok.kind == "NAME":
            head = self.name("a channel or process name")
            if self.accept("?"):
                self.expect("[", "'['")
                params = self.comma_list(self.param, "]")
                if len({p for p, _ in params}) != len(params):
                    raise ParseError("repeated name in input binder", head.line, head.col)
                self.expect(".", "'.'")
                return Input(head.text, tuple(params), self.prefixed(), loc=head.loc)
            if self.accept("!"):
                self.expect("[", "'['")
                args = self.comma_list(self.expr, "]")
                self.expect(".", "'.'")
                return Output(head.text, tuple(args), self.prefixed(), loc=head.loc)
            if self.accept("("):
                args = self.comma_list(self.expr, ")")
                return Call(head.text, tuple(args), loc=head.loc)
            raise self.error("expected '?', '!' or '(' after a name")
        raise self.error("expected a process")

    def action(self) -> Action:
        brace = self.expect("{")
        targets = [self.name("a qudit name").text]
        while self.accept(","):
            targets.append(self.name("a qudit name").text)
        self.expect("*=", "'*='")
        gate = self.gate()
        self.expect("}", "'}'")
        self.expect(".", "'.'")
        if len(set(targets)) != len(targets):
            raise ParseError(f"repeated target in {targets}", brace.line, brace.col)
        return Action(tuple(targets), gate, self.prefixed(), loc=brace.loc)

    def gate(self) -> GateApp:
        tok = self.expect("NAME", "a gate name")
        name = tok.text
        if name in ("H", "Hinv", "Rc", "Lc"):
            return GateApp(name)
        if name in ("X", "Z"):
            if self.accept("^"):
                return GateApp(name, (self.exponent(),))
            return GateApp(name, (Lit(1),))
        if name == "U":
            self.expect("(", "'('")
            j = self.expr()
            self.expect(",", "','")
            k = self.expr()
            self.expect(")", "')'")
            return GateApp(name, (j, k))
        raise ParseError(f"unknown gate {name!r}", tok.line, tok.col)

    def exponent(self) -> Expr:
        tok = self.tok
        if self.accept("-"):
            return Neg(self.exponent(), loc=tok.loc)
        if self.accept("("):
            e = self.expr()
            self.expect(")", "')'")
            return e
        if tok.kind == "INT":
            self.i += 1
            return Lit(int(tok.text), loc=tok.loc)
        if tok.kind == "NAME":
            return Var(self.name("an exponent").text, loc=tok.loc)
        raise self.error("expected a gate exponent")

    # -- expressions

    def expr(self) -> Expr:
        left = self.term()
        while self.at("+"):
            plus = self.expect("+")
            left = Plus(left, self.term(), loc=plus.loc)
        return left

    def term(self) -> Expr:
        tok = self.tok
        if tok.kind == "INT":
            self.i += 1
            return Lit(int(tok.text), loc=tok.loc)
        if self.accept("-"):
            return Neg(self.term(), loc=tok.loc)
        if self.accept("("):
            e = self.expr()
            self.expect(")", "')'")
            return e
        if tok.kind == "NAME" and tok.text == "measure":
            self.i += 1
            if self.accept("("):
                names = self.comma_list(lambda: self.name("a qudit name").text, ")")
                if not names:
                    raise self.error("measure needs at least one qudit", self.tokens[self.i - 1])
            else:
                names = [self.name("a qudit name").text]
            if len(set(names)) != len(names):
                raise ParseError(f"repeated qudit in measure {names}", tok.line, tok.col)
            return Measure(tuple(names), loc=tok.loc)
        if tok.kind == "NAME":
            return Var(self.name("a variable").text, loc=tok.loc)
        raise self.error("expected an expression")


def parse(source: str | bytes) -> Program:
    """Parse ``.cqp`` source text into a :class:`Program`.

    Without a ``main`` line the last definition is the entry, applied to its
    own parameter names. Every failure surfaces as :class:`CqpSyntaxError`.
    """
    if isinstance(source, (bytes, bytearray)):
        try:
            source = bytes(source).decode("utf-8")
        except UnicodeDecodeError as exc:
            raise LexError(f"input is not valid UTF-8 ({exc.reason})", 1, exc.start + 1) from None
    try:
        return _Parser(tokenize(source)).program()
    except RecursionError:
        raise ParseError("input nested too deeply", 0, 0) from None


def parse_file(path) -> Program:
    with open(path, "rb") as fh:
        return parse(fh.read())
