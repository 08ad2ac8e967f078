"""Python access to the EVA compiler core."""

from ._core import (
    CompileError,
    Error,
    ExecutionError,
    InternalError,
    ParseError,
    Program,
    ProgramError,
    UnsupportedOpcode,
    ValidationError,
    compile,
    dumps,
    execute,
    load,
    loads,
    params,
    save,
    validate,
)

__all__ = [
    "CompileError",
    "Error",
    "ExecutionError",
    "InternalError",
    "ParseError",
    "Program",
    "ProgramError",
    "UnsupportedOpcode",
    "ValidationError",
    "compile",
    "dumps",
    "execute",
    "load",
    "loads",
    "params",
    "save",
    "validate",
]
