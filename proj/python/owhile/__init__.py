"""Python bindings for the owhile interpreter and analyses."""

from ._core import (
    FixpointError,
    ParseError,
    analyze,
    check,
    flows,
    generate,
    parse,
    run,
    trace,
)

__all__ = [
    "FixpointError",
    "ParseError",
    "analyze",
    "check",
    "flows",
    "generate",
    "parse",
    "run",
    "trace",
]
