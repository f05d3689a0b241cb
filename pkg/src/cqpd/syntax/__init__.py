from cqpd.syntax.ast import Program
from cqpd.syntax.inline import InlineError, inline
from cqpd.syntax.parser import CqpSyntaxError, LexError, ParseError, parse, parse_file
from cqpd.syntax.pretty import pretty
from cqpd.syntax.typecheck import Diagnostic, DiagnosticKind, typecheck

__all__ = [
    "CqpSyntaxError",
    "Diagnostic",
    "DiagnosticKind",
    "InlineError",
    "LexError",
    "ParseError",
    "Program",
    "inline",
    "parse",
    "parse_file",
    "pretty",
    "typecheck",
]
