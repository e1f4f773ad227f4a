"""
Function extraction by backward rewriting.

Each primary output is rewritten on its own logic cone: starting from the
output variable, every gate of the cone is visited in reverse topological
order and its output variable is replaced by the gate polynomial, with
monomials cancelling mod 2 as they go. Cones are independent, so outputs
are extracted in parallel from a pool of workers.
"""

from __future__ import annotations

import json
import logging
import time
from collections.abc import Callable, Sequence
from concurrent.futures import Executor, ProcessPoolExecutor, ThreadPoolExecutor
from dataclasses import dataclass, field

from gfextract import settings
from gfextract.errors import (
    ExtractionError,
    GfError,
    InvalidOutputOrder,
    MappingError,
    TermCeilingExceeded,
    UndrivenSignal,
)
from gfextract.gfpoly import Expression, Polynomial, VarId, Variables, gate_polynomial
from gfextract.netlist import Cone, Gate, Netlist
from gfextract.rendering import render_template
from gfextract.specgen import GfSpec, IoMap, IrreduciblePoly, SpecRows, build_spec
from gfextract.utils import iter_bits

logger = logging.getLogger(__name__)

StepHook = Callable[[Gate, Expression, int], None]


@dataclass
class OutputStats:
    output: str
    gate_count: int
    substitutions: int = 0
    peak_terms: int = 0
    eliminated: int = 0
    time_ms: float = 0.0


@dataclass(frozen=True)
class OutputSignature:
    """
    The output signature split into one slice per output, seeded with z_i.
    """

    slices: tuple[tuple[VarId, Polynomial], ...]

    @classmethod
    def of(cls, netlist: Netlist) -> OutputSignature:
        return cls(tuple((out, Polynomial.variable(out)) for out in netlist.primary_outputs))

    def __len__(self) -> int:
        return len(self.slices)


@dataclass
class ExtractionResult:
    variables: Variables
    per_output: list[tuple[VarId, Polynomial]]
    stats: list[OutputStats]
    threads: int = 1
    wall_time_ms: float = 0.0
    name: str = "top"

    @property
    def outputs(self) -> list[VarId]:
        return [out for out, _ in self.per_output]

    @property
    def polynomials(self) -> list[Polynomial]:
        return [poly for _, poly in self.per_output]

    @property
    def peak_terms(self) -> int:
        return max((s.peak_terms for s in self.stats), default=0)

    @property
    def substitutions(self) -> int:
        return sum(s.substitutions for s in self.stats)

    @property
    def eliminated(self) -> int:
        return sum(s.eliminated for s in self.stats)

    def polynomial(self, out: VarId) -> Polynomial:
        for var, poly in self.per_output:
            if var == out:
                return poly
        raise KeyError(out)

    def by_name(self) -> dict[str, Polynomial]:
        return {self.variables.name(out): poly for out, poly in self.per_output}

    def format_output(self, out: VarId) -> str:
        return self.polynomial(out).format(self.variables)


@dataclass(frozen=True)
class Verdict:
    equal: bool
    residuals: tuple[Polynomial, ...]
    outputs: tuple[str, ...] = field(default=())

    def mismatched(self) -> list[str]:
        return [name for name, residual in zip(self.outputs, self.residuals) if residual]


def _check_ceiling(expr: Expression, ceiling: int, name: str) -> None:
    if len(expr) > ceiling:
        raise TermCeilingExceeded(
            f"Expression for {name} grew to {len(expr):,} terms, above the ceiling of {ceiling:,}"
        )


def rewrite_cone(
    cone: Cone,
    seed: Polynomial | None = None,
    *,
    primary_inputs: frozenset[VarId] | None = None,
    term_ceiling: int | None = None,
    on_step: StepHook | None = None,
    stats: OutputStats | None = None,
    name: str | None = None,
) -> Polynomial:
    """
    Backward-rewrite ``seed`` (the cone output by default) down to the cone inputs.

    Gates whose output variable is not present in the current expression are
    skipped. ``on_step`` is called after every substitution with the gate,
    the expression and the number of monomials cancelled by that step.
    """
    if seed is None:
        seed = Polynomial.variable(cone.output)
    if primary_inputs is None:
        primary_inputs = cone.support
    if term_ceiling is None:
        term_ceiling = settings.term_ceiling
    label = name or f"#{cone.output}"

    expr = Expression(seed)
    peak = len(expr)
    substitutions = 0
    start = time.perf_counter()

    for gate in reversed(cone.gates):
        if gate.output not in expr:
            continue

        replacement = gate_polynomial(gate.gtype, [Polynomial.variable(v) for v in gate.inputs])
        cancelled = expr.substitute(gate.output, replacement)
        substitutions += 1
        peak = max(peak, len(expr))
        _check_ceiling(expr, term_ceiling, label)

        if logger.isEnabledFor(logging.DEBUG):
            logger.debug(
                "%s: %s #%d, %d terms, %d cancelled",
                label,
                gate.gtype.value,
                gate.output,
                len(expr),
                cancelled,
            )
        if on_step is not None:
            on_step(gate, expr, cancelled)

    leftover = 0
    for var in expr.index:
        if var not in primary_inputs:
            leftover |= 1 << var
    if leftover:
        missing = ", ".join(f"#{var}" for var in iter_bits(leftover))
        raise UndrivenSignal(f"{label} depends on undriven signals {missing}")

    if stats is not None:
        stats.substitutions = substitutions
        stats.peak_terms = peak
        stats.eliminated = expr.eliminated
        stats.time_ms = (time.perf_counter() - start) * 1000
    return expr.freeze()


def _extract_task(
    cone: Cone, name: str, primary_inputs: frozenset[VarId], term_ceiling: int
) -> tuple[Polynomial, OutputStats]:
    stats = OutputStats(name, len(cone.gates))
    poly = rewrite_cone(
        cone,
        primary_inputs=primary_inputs,
        term_ceiling=term_ceiling,
        stats=stats,
        name=name,
    )
    return poly, stats


def _make_executor(kind: str, workers: int) -> Executor:
    if kind == "process":
        return ProcessPoolExecutor(max_workers=workers)
    if kind == "thread":
        return ThreadPoolExecutor(max_workers=workers, thread_name_prefix="extract")
    raise ValueError(f"Unknown executor {kind!r}, expected 'process' or 'thread'")


def extract_all(
    netlist: Netlist,
    threads: int | None = None,
    *,
    term_ceiling: int | None = None,
    executor: str | None = None,
) -> ExtractionResult:
    """
    Extract the polynomial of every primary output.

    Outputs are submitted LSB first, in declaration order, to a pool of at
    most ``threads`` workers; a new output starts as soon as any worker is
    free. The result does not depend on the number of workers.
    """
    if threads is None:
        threads = settings.threads
    if threads < 1:
        raise ValueError(f"Thread count must be at least 1, got {threads}")
    if term_ceiling is None:
        term_ceiling = settings.term_ceiling
    if executor is None:
        executor = settings.executor

    primary_inputs = frozenset(netlist.primary_inputs)
    cones = netlist.cones()
    names = [netlist.wire(cone.output) for cone in cones]
    logger.info(
        "Extracting %d outputs of %s (%d gates) with T=%d",
        len(cones),
        netlist.name,
        len(netlist),
        threads,
    )

    start = time.perf_counter()
    outcomes: list[tuple[Polynomial, OutputStats]] = []
    if threads == 1 or len(cones) <= 1:
        for cone, name in zip(cones, names):
            try:
                outcomes.append(_extract_task(cone, name, primary_inputs, term_ceiling))
            except GfError as e:
                raise ExtractionError(name, e) from e
    else:
        with _make_executor(executor, min(threads, len(cones))) as pool:
            futures = [
                pool.submit(_extract_task, cone, name, primary_inputs, term_ceiling)
                for cone, name in zip(cones, names)
            ]
            for future, name in zip(futures, names):
                try:
                    outcomes.append(future.result())
                except GfError as e:
                    for pending in futures:
                        pending.cancel()
                    raise ExtractionError(name, e) from e

    wall_time_ms = (time.perf_counter() - start) * 1000
    for poly, stats in outcomes:
        logger.info(
            "%s: %d gates, %d substitutions, peak %d terms, %.1f ms",
            stats.output,
            stats.gate_count,
            stats.substitutions,
            stats.peak_terms,
            stats.time_ms,
        )

    return ExtractionResult(
        variables=netlist.variables,
        per_output=[(cone.output, poly) for cone, (poly, _) in zip(cones, outcomes)],
        stats=[stats for _, stats in outcomes],
        threads=threads,
        wall_time_ms=wall_time_ms,
        name=netlist.name,
    )


def rewrite_signature(
    netlist: Netlist,
    *,
    term_ceiling: int | None = None,
    on_step: StepHook | None = None,
) -> ExtractionResult:
    """
    Sequential rewriting of the whole output signature sum(z_i * x^i).

    Each power of x is carried by a fresh marker variable, so after
    rewriting the expression splits back into one coefficient per output.
    """
    if term_ceiling is None:
        term_ceiling = settings.term_ceiling

    variables = netlist.variables.copy()
    markers = {out: variables.fresh("__x") for out in netlist.primary_outputs}
    marker_mask = 0
    for tag in markers.values():
        marker_mask |= 1 << tag

    seed = Polynomial.zero()
    for out, tag in markers.items():
        seed = seed + Polynomial.product(out, tag)

    expr = Expression(seed)
    stats = OutputStats("signature", len(netlist))
    peak = len(expr)
    start = time.perf_counter()
    for gate in reversed(netlist.topo_order):
        if gate.output not in expr:
            continue
        replacement = gate_polynomial(gate.gtype, [Polynomial.variable(v) for v in gate.inputs])
        cancelled = expr.substitute(gate.output, replacement)
        stats.substitutions += 1
        peak = max(peak, len(expr))
        _check_ceiling(expr, term_ceiling, "signature")
        if on_step is not None:
            on_step(gate, expr, cancelled)

    stats.peak_terms = peak
    stats.eliminated = expr.eliminated
    stats.time_ms = (time.perf_counter() - start) * 1000

    by_marker: dict[VarId, list[int]] = {tag: [] for tag in markers.values()}
    inputs = set(netlist.primary_inputs)
    for mono in expr.terms:
        tags = list(iter_bits(mono & marker_mask))
        rest = mono & ~marker_mask
        if len(tags) != 1 or any(v not in inputs for v in iter_bits(rest)):
            raise UndrivenSignal(f"Signature term over undriven signals: {mono:#x}")
        by_marker[tags[0]].append(rest)

    per_output = [(out, Polynomial(by_marker[tag])) for out, tag in markers.items()]
    return ExtractionResult(
        variables=netlist.variables,
        per_output=per_output,
        stats=[stats],
        threads=1,
        wall_time_ms=stats.time_ms,
        name=netlist.name,
    )


def assemble_signature(result: ExtractionResult, output_order: Sequence[VarId]) -> list[Polynomial]:
    """
    Coefficients of x^0, x^1, ... in the order given by ``output_order``.
    """
    order = list(output_order)
    if len(set(order)) != len(order) or sorted(order) != sorted(result.outputs):
        raise InvalidOutputOrder(
            "Output order must list every primary output exactly once, got "
            + ", ".join(str(out) for out in output_order)
        )
    return [result.polynomial(out) for out in output_order]


def format_signature(coefficients: Sequence[Polynomial], variables: Variables) -> str:
    parts = []
    for i, poly in enumerate(coefficients):
        if not poly:
            continue
        body = poly.format(variables)
        if i == 0:
            parts.append(f"({body})")
        elif i == 1:
            parts.append(f"({body})*x")
        else:
            parts.append(f"({body})*x^{i}")
    return "+".join(parts) or "0"


def _check_io_map(netlist: Netlist, m: int, io_map: IoMap) -> None:
    if not (len(io_map.a) == len(io_map.b) == len(io_map.z) == m):
        raise MappingError(
            f"IO map sizes a={len(io_map.a)} b={len(io_map.b)} z={len(io_map.z)} do not match m={m}"
        )

    words = [*io_map.a, *io_map.b]
    if len(set(words)) != len(words):
        raise MappingError("IO map assigns a wire to more than one input bit")
    if set(words) != set(netlist.input_names):
        missing = sorted(set(netlist.input_names) ^ set(words))
        raise MappingError(f"IO map does not match the primary inputs: {', '.join(missing)}")
    if len(set(io_map.z)) != m or set(io_map.z) != set(netlist.output_names):
        missing = sorted(set(netlist.output_names) ^ set(io_map.z))
        raise MappingError(f"IO map does not match the primary outputs: {', '.join(missing)}")


def verify(
    netlist: Netlist,
    m: int,
    p: IrreduciblePoly,
    io_map: IoMap | None,
    *,
    result: ExtractionResult | None = None,
    threads: int | None = None,
    spec: GfSpec | SpecRows | None = None,
) -> Verdict:
    """
    Compare the extracted output polynomials with the GF(2^m) specification.

    Equality of the canonical GF(2) forms is exact: each residual is the sum
    of the extracted and the expected polynomial, zero when they agree.
    ``spec`` replaces the product A*B mod P(x) with other expected outputs.
    """
    if io_map is None:
        raise MappingError("No IO map given; bit positions of the inputs and outputs are unknown")
    _check_io_map(netlist, m, io_map)

    if spec is None:
        spec = build_spec(m, p)
    elif spec.m != m:
        raise MappingError(f"Expected outputs cover {spec.m} bits, the field has {m}")
    mapping = {}
    for i in range(m):
        mapping[spec.variables.id(spec.io_map.a[i])] = netlist.var(io_map.a[i])
        mapping[spec.variables.id(spec.io_map.b[i])] = netlist.var(io_map.b[i])

    if result is None:
        result = extract_all(netlist, threads)

    residuals = []
    for i, wire in enumerate(io_map.z):
        expected = spec.outputs[i].remap(mapping)
        residuals.append(result.polynomial(netlist.var(wire)) + expected)

    verdict = Verdict(not any(residuals), tuple(residuals), tuple(io_map.z))
    if verdict.equal and isinstance(spec, SpecRows):
        logger.info("%s matches the expected outputs", netlist.name)
    elif verdict.equal:
        logger.info("%s implements GF(2^%d) multiplication modulo %s", netlist.name, m, p)
    else:
        logger.info("%s differs at %s", netlist.name, ", ".join(verdict.mismatched()))
    return verdict


def build_report(result: ExtractionResult, verdict: Verdict | None = None) -> dict:
    report: dict = {
        "netlist": result.name,
        "threads": result.threads,
        "wall_time_ms": round(result.wall_time_ms, 3),
        "outputs": [
            {
                "name": result.variables.name(out),
                "polynomial": poly.format(result.variables),
                "gate_count": stats.gate_count,
                "peak_terms": stats.peak_terms,
                "substitutions": stats.substitutions,
                "eliminated": stats.eliminated,
                "time_ms": round(stats.time_ms, 3),
            }
            for (out, poly), stats in _paired_stats(result)
        ],
    }
    if verdict is not None:
        report["verdict"] = "equal" if verdict.equal else "mismatch"
        report["residuals"] = {
            name: residual.format(result.variables)
            for name, residual in zip(verdict.outputs, verdict.residuals)
        }
    return report


def _paired_stats(result: ExtractionResult):
    if len(result.stats) == len(result.per_output):
        return zip(result.per_output, result.stats)
    # Sequential signature rewriting keeps one stats record for the whole run.
    blank = [OutputStats(result.variables.name(out), 0) for out, _ in result.per_output]
    return zip(result.per_output, blank)


def render_report(
    result: ExtractionResult, verdict: Verdict | None = None, fmt: str = "text"
) -> str:
    report = build_report(result, verdict)
    if fmt == "json":
        return json.dumps(report, indent=2) + "\n"
    return render_template("extract_report.txt", report=report)
