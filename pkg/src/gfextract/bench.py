"""
Extraction benchmark over generated Mastrovito multipliers.
"""

from __future__ import annotations

import csv
import io
import logging
from collections.abc import Iterable, Iterator, Sequence
from dataclasses import dataclass

from gfextract.errors import GfError
from gfextract.extract import extract_all, verify
from gfextract.models import BenchRun
from gfextract.specgen import IrreduciblePoly, generate_mastrovito, wire_names

logger = logging.getLogger(__name__)

CSV_HEADER = ["m", "p", "gates", "T", "wall_time_ms", "peak_terms"]


@dataclass
class BenchRow:
    m: int
    polynomial: str
    gates: int
    threads: int
    wall_time_ms: float | None = None
    peak_terms: int | None = None
    verdict: bool | None = None
    note: str = ""

    @classmethod
    def from_model(cls, run: BenchRun) -> BenchRow:
        return cls(
            m=run.m,
            polynomial=run.polynomial,
            gates=run.gates,
            threads=run.threads,
            wall_time_ms=run.wall_time_ms,
            peak_terms=run.peak_terms,
            verdict=run.verdict,
        )

    def save(self) -> BenchRun | None:
        if self.wall_time_ms is None:
            return None
        return BenchRun.create(
            m=self.m,
            polynomial=self.polynomial,
            gates=self.gates,
            threads=self.threads,
            wall_time_ms=self.wall_time_ms,
            peak_terms=self.peak_terms,
            verdict=self.verdict,
        )


class Benchmark:
    """
    Generate each (m, P) multiplier once and extract it with every thread count.

    All thread counts must produce identical polynomials; a row whose result
    differs from the first one is reported with a false verdict.
    """

    def __init__(
        self,
        cases: Sequence[tuple[int, IrreduciblePoly]],
        threads: Sequence[int],
        term_ceiling: int | None = None,
        executor: str | None = None,
    ) -> None:
        self.cases = cases
        self.threads = threads
        self.term_ceiling = term_ceiling
        self.executor = executor

    def run(self) -> Iterator[BenchRow]:
        for m, p in self.cases:
            yield from self.run_case(m, p)

    def run_case(self, m: int, p: IrreduciblePoly) -> Iterator[BenchRow]:
        netlist = generate_mastrovito(m, p)
        io_map = wire_names(m)
        reference = None
        timings: dict[int, float] = {}

        for threads in self.threads:
            row = BenchRow(m, str(p), len(netlist), threads)
            try:
                result = extract_all(
                    netlist, threads, term_ceiling=self.term_ceiling, executor=self.executor
                )
            except GfError as e:
                row.note = str(e)
                logger.warning("m=%d T=%d aborted: %s", m, threads, e)
                yield row
                continue

            if reference is None:
                reference = result.polynomials
                row.verdict = verify(netlist, m, p, io_map, result=result).equal
            elif result.polynomials != reference:
                row.verdict = False
                row.note = "result differs from the first thread count"
                logger.error("m=%d T=%d: %s", m, threads, row.note)
            else:
                row.verdict = True

            row.wall_time_ms = result.wall_time_ms
            row.peak_terms = result.peak_terms
            timings[threads] = result.wall_time_ms
            yield row

        if m >= 32 and 1 in timings and 4 in timings and timings[4] >= timings[1]:
            logger.warning(
                "m=%d: no speedup at T=4 (%.1f ms) over T=1 (%.1f ms)", m, timings[4], timings[1]
            )


def render_csv(rows: Iterable[BenchRow]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in rows:
        wall_time = "" if row.wall_time_ms is None else f"{row.wall_time_ms:.3f}"
        peak = "" if row.peak_terms is None else str(row.peak_terms)
        writer.writerow(
            [str(row.m), row.polynomial, str(row.gates), str(row.threads), wall_time, peak]
        )
    return buffer.getvalue()


def render_table(rows: Iterable[BenchRow], width: int = 72) -> str:
    title = "Extraction benchmark"
    table = [
        "╔" + "═" * (width - 2) + "╗",
        "║" + title.center(width - 2) + "║",
        "╠" + "═" * 25 + "╤" + "═" * (width - 28) + "╣",
    ]

    for row in rows:
        case = f"m={row.m} T={row.threads}"
        if row.wall_time_ms is None:
            detail = f"aborted: {row.note}"
        else:
            status = {True: "ok", False: "MISMATCH", None: "-"}[row.verdict]
            detail = f"{row.wall_time_ms:>10.1f} ms  peak {row.peak_terms:,}  {status}"
        table.append(f"║ {case[:23]:<23} │ {detail[: width - 30]:<{width - 30}} ║")

    table.append("╚" + "═" * 25 + "╧" + "═" * (width - 28) + "╝")
    return "\n".join(table)
