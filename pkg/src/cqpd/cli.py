"""Command-line entry point: ``cqpd check|run|trace|enumerate|verify``."""

from __future__ import annotations

import argparse
import json
import re
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from cqpd.harness import (
    BUILTINS,
    Schedule,
    enumerate_traces,
    haar_psi,
    load_builtin,
    report_json,
    report_text,
    run,
    trace_json,
    trace_text,
    verify_sdc,
    verify_teleport,
)
from cqpd.qudit import QuantumState
from cqpd.syntax import CqpSyntaxError, InlineError, parse, typecheck

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
# loose enough for four-digit amplitudes such as 0.7071
STATE_TOL = 1e-4

_COMPLEX = re.compile(
    r"""^\s*(?:
        (?P<re>[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
        (?:(?P<sign>[+-])(?P<im>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)?[ij])?
      | (?P<pim>[+-]?(?:\d+\.?\d*|\.\d+)?(?:[eE][+-]?\d+)?)[ij]
    )\s*$""",
    re.VERBOSE,
)


class UsageError(Exception):
    pass


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def parse_complex(text: str) -> complex:
    """``0.5``, ``-1e-3``, ``0.6+0.8i``, ``0.3-0.1j``, ``-i``."""
    m = _COMPLEX.match(text)
    if not m:
        raise ValueError(f"malformed amplitude {text!r}")
    if m.group("re") is not None:
        real = float(m.group("re"))
        if m.group("sign") is None:
            return complex(real, 0.0)
        imag = float(m.group("im") or 1.0)
        return complex(real, imag if m.group("sign") == "+" else -imag)
    p = m.group("pim")
    imag = float(p + "1") if p in ("", "+", "-") else float(p)
    return complex(0.0, imag)


def parse_state_literal(text: str, d: int, name: str = "x") -> QuantumState:
    """Single-qudit state from ``amp:index,...`` or a ket ``|k>``.

    The norm must be 1 within ``STATE_TOL``; the result is renormalized exactly.
    """
    text = text.strip()
    ket = re.fullmatch(r"\|\s*(\d+)\s*>", text)
    vec = np.zeros(d, dtype=complex)
    if ket:
        k = int(ket.group(1))
        if k >= d:
            raise ValueError(f"basis index {k} out of range for d={d}")
        vec[k] = 1.0
    else:
        if not text:
            raise ValueError("empty state literal")
        for part in text.split(","):
            amp, sep, idx = part.rpartition(":")
            if not sep or not idx.strip().isdigit():
                raise ValueError(f"malformed state term {part!r}; expected amplitude:index")
            k = int(idx)
            if k >= d:
                raise ValueError(f"basis index {k} out of range for d={d}")
            vec[k] += parse_complex(amp)
    norm = float(np.linalg.norm(vec))
    if abs(norm - 1.0) > STATE_TOL:
        raise ValueError(f"state is not normalized (norm {norm:.9g})")
    return QuantumState(d, (name,), vec / norm)


def _bindings(items: Sequence[str], d: int) -> dict:
    out: dict = {}
    for item in items:
        name, sep, value = item.partition("=")
        name = name.strip()
        if not sep or not re.fullmatch(r"[A-Za-z_][\w.]*", name):
            raise UsageError(f"malformed --in binding {item!r}; expected name=value")
        value = value.strip()
        if re.fullmatch(r"[+-]?\d+", value):
            out[name] = int(value)
        else:
            try:
                out[name] = parse_state_literal(value, d, name.split(".")[-1])
            except ValueError as exc:
                raise UsageError(f"--in {name}: {exc}") from None
    return out


def _load(source: str):
    if source in BUILTINS and not Path(source).exists():
        return load_builtin(source)
    try:
        text = Path(source).read_bytes()
    except OSError as exc:
        raise UsageError(f"cannot read {source}: {exc.strerror or exc}") from None
    return parse(text)


def _build_parser() -> argparse.ArgumentParser:
    common = _ArgumentParser(add_help=False)
    common.add_argument("-d", "--dimension", type=int, default=2)
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--in", dest="inputs", action="append", default=[], metavar="NAME=VALUE")
    common.add_argument("--format", choices=("text", "json"), default=None, help="default: json for verify, text otherwise")
    common.add_argument("--depth", type=int, default=1000)

    p = _ArgumentParser(prog="cqpd", description="Qudit process calculus interpreter and verifier.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_ArgumentParser)
    sub.add_parser("check", parents=[common], help="parse and typecheck a file").add_argument("file")
    for cmd, helptext in (
        ("run", "execute once and print the final configuration"),
        ("trace", "execute once and print every transition"),
        ("enumerate", "explore all interleavings"),
    ):
        sub.add_parser(cmd, parents=[common], help=helptext).add_argument("source", metavar="file|builtin")
    sub.add_parser("verify", parents=[common], help="verify a builtin protocol").add_argument(
        "protocol", choices=BUILTINS
    )
    return p


def _emit(data, text: str, fmt: str) -> None:
    if fmt == "json":
        sys.stdout.write(json.dumps(data, sort_keys=True, indent=2) + "\n")
    else:
        sys.stdout.write(text + "\n")


def _schedule(args) -> Schedule:
    if args.seed is not None:
        return Schedule.seeded(args.seed, args.depth)
    return Schedule.exhaustive(args.depth)


def _trace_status_code(status: str) -> int:
    return EXIT_OK if status in ("terminated", "script-end") else EXIT_FAIL


def _dispatch(args) -> int:
    d = args.dimension
    if d < 2:
        raise UsageError(f"dimension must be >= 2, got {d}")
    if args.depth < 1:
        raise UsageError("depth must be >= 1")
    if args.format is None:
        args.format = "json" if args.command == "verify" else "text"
    inputs = _bindings(args.inputs, d)

    if args.command == "check":
        program = _load(args.file)
        diags = typecheck(program)
        for diag in diags:
            print(diag, file=sys.stderr)
        _emit(
            {"diagnostics": [{"kind": str(x.kind), "message": x.message, "definition": x.definition} for x in diags]},
            f"{len(diags)} diagnostics",
            args.format,
        )
        return EXIT_USAGE if diags else EXIT_OK

    if args.command == "verify":
        if args.protocol == "teleport":
            psi = inputs.get("x")
            if psi is None:
                psi = haar_psi(d, args.seed)
            elif not isinstance(psi, QuantumState):
                raise UsageError("--in x must be a state literal for teleport")
            report = verify_teleport(d, psi)
        else:
            a, b = inputs.get("a", 0), inputs.get("b", 0)
            if not (isinstance(a, int) and isinstance(b, int)):
                raise UsageError("--in a and --in b must be integers for sdc")
            if not (0 <= a < d and 0 <= b < d):
                raise UsageError(f"(a, b) = ({a}, {b}) out of range for d={d}")
            report = verify_sdc(d, a, b)
        _emit(report_json(report), report_text(report), args.format)
        return EXIT_OK if report.passed else EXIT_FAIL

    program = _load(args.source)
    diags = typecheck(program)
    if diags:
        for diag in diags:
            print(diag, file=sys.stderr)
        return EXIT_USAGE

    if args.command == "enumerate":
        traces = enumerate_traces(program, d, inputs, args.depth)
        text = "\n\n".join(f"## trace {i}\n{trace_text(t)}" for i, t in enumerate(traces))
        _emit({"dimension": d, "traces": [trace_json(t) for t in traces]}, text, args.format)
        return max((_trace_status_code(t.status) for t in traces), default=EXIT_OK)

    trace = run(program, d, inputs, _schedule(args))
    if trace.status == "deadlock":
        print(f"deadlock: {trace.residual}", file=sys.stderr)
    elif trace.status == "depth-exceeded":
        print(f"depth limit {args.depth} exceeded", file=sys.stderr)
    data = trace_json(trace)
    if args.command == "run":
        data = {"dimension": d, "status": trace.status, "steps": len(trace.steps), "final": data["final"]}
        text = f"status={trace.status} steps={len(trace.steps)}\n" + trace_text(trace).splitlines()[-1]
    else:
        text = trace_text(trace)
    _emit(data, text, args.format)
    return _trace_status_code(trace.status)


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = _build_parser().parse_args(argv)
    except UsageError as exc:
        print(f"cqpd: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    try:
        return _dispatch(args)
    except UsageError as exc:
        print(f"cqpd: error: {exc}", file=sys.stderr)
    except CqpSyntaxError as exc:
        print(f"cqpd: syntax error: {exc}", file=sys.stderr)
    except InlineError as exc:
        print(f"cqpd: error: {exc}", file=sys.stderr)
    except (ValueError, IndexError, KeyError) as exc:
        print(f"cqpd: error: {exc}", file=sys.stderr)
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
