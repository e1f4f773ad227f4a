"""
Exception hierarchy for the gfextract toolkit.

Every error raised on purpose by the library derives from GfError, so the
command line front end can turn them into exit codes without catching
unrelated bugs.
"""

from __future__ import annotations


class GfError(Exception):
    """
    Base class for all toolkit errors.

    ``stage`` is filled in by multi-step drivers (reverse engineering) to
    tell the user which step failed.
    """

    stage: str | None = None

    def __str__(self) -> str:
        msg = super().__str__()
        if self.stage:
            return f"[{self.stage}] {msg}"
        return msg


# Polynomial algebra


class UnsupportedGate(GfError):
    def __init__(self, cell: str):
        super().__init__(f"Unsupported gate type: {cell!r}")
        self.cell = cell


class CyclicSubstitution(GfError):
    pass


class UnboundVariable(GfError):
    def __init__(self, var: int, name: str | None = None):
        label = name if name is not None else f"#{var}"
        super().__init__(f"No value assigned to variable {label}")
        self.var = var


# Netlists


class NetlistError(GfError):
    pass


class NetlistSyntaxError(NetlistError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class MultipleDrivers(NetlistError):
    pass


class UndeclaredWire(NetlistError):
    pass


class CombinationalCycle(NetlistError):
    def __init__(self, cycle: list[str]):
        super().__init__("Combinational cycle: " + " -> ".join(cycle + cycle[:1]))
        self.cycle = cycle


class UnsupportedVerilog(NetlistError):
    def __init__(self, token: str, line: int | None = None):
        where = f" (line {line})" if line is not None else ""
        super().__init__(f"Unsupported Verilog construct {token!r}{where}")
        self.token = token
        self.line = line


class NotAnOutput(NetlistError):
    pass


# Specifications


class InvalidExponent(GfError):
    pass


class InvalidPolynomial(GfError, ValueError):
    pass


class SpecFormatError(GfError):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


# Extraction and verification


class UndrivenSignal(GfError):
    pass


class TermCeilingExceeded(GfError):
    pass


class InvalidOutputOrder(GfError):
    pass


class MappingError(GfError):
    pass


class ExtractionError(GfError):
    def __init__(self, output: str, cause: Exception):
        super().__init__(f"Extraction of output {output} failed: {cause}")
        self.output = output
        self.cause = cause


# Reverse engineering


class RevengError(GfError):
    pass


class NoValidEncoding(RevengError):
    pass


class InconsistentEncoding(RevengError):
    pass


class EmptySm(RevengError):
    pass


class NotReducible(RevengError):
    pass
