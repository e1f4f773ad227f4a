from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from collections.abc import Callable
from dataclasses import dataclass

from gfextract import __version__, settings
from gfextract.bench import Benchmark, BenchRow, render_csv, render_table
from gfextract.errors import GfError, InvalidPolynomial, MappingError, RevengError
from gfextract.extract import extract_all, render_report, rewrite_signature, verify
from gfextract.models import BenchRun, init_db
from gfextract.netlist import format_equations, format_verilog, load_netlist
from gfextract.reveng import reverse_engineer
from gfextract.scramble import scramble
from gfextract.specgen import (
    IrreduciblePoly,
    build_spec,
    default_polynomial,
    generate_mastrovito,
    ground_truth,
    load_io_map,
    load_spec_rows,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_MISMATCH = 1
EXIT_ERROR = 2

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


@dataclass(frozen=True)
class RunConfig:
    command: str
    netlist: str | None = None
    fmt: str | None = None
    m: int | None = None
    p: str | None = None
    threads: int = settings.threads
    output: str | None = None
    report: str = "text"
    term_ceiling: int = settings.term_ceiling
    executor: str = settings.executor
    scramble_seed: int | None = None
    io_map: str | None = None
    spec: str | None = None
    name: str | None = None
    bus_names: bool = False
    sequential: bool = False
    m_list: tuple[int, ...] = ()
    thread_list: tuple[int, ...] = ()
    db: str | None = None
    history: bool = False
    table: bool = False

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> RunConfig:
        fields = cls.__dataclass_fields__
        values = {key: value for key, value in vars(args).items() if key in fields}
        return cls(**values)

    def polynomial(self, m: int | None = None) -> IrreduciblePoly:
        if self.p is None:
            if m is None:
                raise InvalidPolynomial("No irreducible polynomial given, use -p")
            return default_polynomial(m)

        p = IrreduciblePoly.parse(self.p)
        if m is not None and p.m != m:
            raise InvalidPolynomial(f"P(x) = {p} has degree {p.m}, but -m is {m}")
        return p


def positive_int(value: str) -> int:
    number = int(value)
    if number < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return number


def int_list(value: str) -> tuple[int, ...]:
    try:
        numbers = tuple(positive_int(part) for part in value.split(",") if part.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {value}")
    if not numbers:
        raise argparse.ArgumentTypeError("expected at least one integer")
    return numbers


def build_argument_parser():
    parser = argparse.ArgumentParser(
        prog="gfextract",
        description="Extract, verify and reverse engineer GF(2^m) multiplier netlists",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    parser.add_argument(
        "-V",
        "--version",
        action="version",
        version="gfextract " + __version__,
    )
    parser.add_argument(
        "--log-level",
        help="Logging level for messages written to stderr",
        default=settings.log_level,
    )

    netlist_args = argparse.ArgumentParser(add_help=False)
    netlist_args.add_argument("netlist", help="Netlist file (equations, or Verilog for *.v)")
    netlist_args.add_argument(
        "--format",
        dest="fmt",
        choices=["equations", "verilog"],
        help="Netlist format, detected from the file suffix by default",
    )

    run_args = argparse.ArgumentParser(add_help=False)
    run_args.add_argument(
        "-T",
        "--threads",
        help="Number of outputs extracted concurrently",
        type=positive_int,
        default=settings.threads,
    )
    run_args.add_argument(
        "--term-ceiling",
        help="Abort an output whose expression grows beyond this many terms",
        type=positive_int,
        default=settings.term_ceiling,
    )
    run_args.add_argument(
        "--executor",
        help="Worker pool kind",
        choices=["process", "thread"],
        default=settings.executor,
    )

    report_args = argparse.ArgumentParser(add_help=False)
    report_args.add_argument(
        "--report",
        help="Report format",
        choices=["text", "json"],
        default="text",
    )
    report_args.add_argument("-o", "--output", help="Write the report to this file")

    subparsers = parser.add_subparsers(dest="command", required=True)
    formatter = argparse.ArgumentDefaultsHelpFormatter

    generate_parser = subparsers.add_parser(
        "generate", help="Generate a Mastrovito multiplier", formatter_class=formatter
    )
    generate_parser.add_argument("-m", type=positive_int, required=True, help="Field degree")
    generate_parser.add_argument("-p", help="Exponents of P(x), e.g. 4,1,0 (catalog default)")
    generate_parser.add_argument("-o", "--output", default=".", help="Output directory")
    generate_parser.add_argument("--name", help="File stem, gf{m}_{exponents} by default")
    generate_parser.add_argument(
        "--bus-names", action="store_true", help="Name wires a[0], b[0], z[0]"
    )

    extract_parser = subparsers.add_parser(
        "extract",
        help="Extract the polynomial of every output",
        parents=[netlist_args, run_args, report_args],
        formatter_class=formatter,
    )
    extract_parser.add_argument(
        "--sequential",
        action="store_true",
        help="Rewrite the whole output signature in one expression",
    )

    verify_parser = subparsers.add_parser(
        "verify",
        help="Check a netlist against GF(2^m) multiplication",
        parents=[netlist_args, run_args, report_args],
        formatter_class=formatter,
    )
    verify_parser.add_argument("-p", required=True, help="Exponents of P(x), e.g. 4,1,0")
    verify_parser.add_argument("-m", type=positive_int, help="Field degree, taken from -p")
    verify_parser.add_argument("--io-map", help="Ground truth JSON naming the a, b and z wires")
    verify_parser.add_argument(
        "--spec",
        help="Expected output rows (the .spec.txt format) to check instead of A*B mod P(x)",
    )

    reveng_parser = subparsers.add_parser(
        "reveng",
        help="Recover bit positions and P(x) from a netlist",
        parents=[netlist_args, run_args, report_args],
        formatter_class=formatter,
    )
    reveng_parser.add_argument(
        "--scramble-seed",
        type=int,
        help="Scramble wire names and line order with this seed first",
    )

    bench_parser = subparsers.add_parser(
        "bench",
        help="Time extraction of generated multipliers",
        formatter_class=formatter,
    )
    bench_parser.add_argument(
        "-m", dest="m_list", type=int_list, default=(8, 16, 32), help="Degrees"
    )
    bench_parser.add_argument("-p", help="Exponents of P(x), for a single degree")
    bench_parser.add_argument(
        "-T", dest="thread_list", type=int_list, default=(1, 2, 4, 8), help="Thread counts"
    )
    bench_parser.add_argument("-o", "--output", help="Write the CSV to this file")
    bench_parser.add_argument("--db", help="Filepath for sqlite database recording every row")
    bench_parser.add_argument("--history", action="store_true", help="Print recorded rows instead")
    bench_parser.add_argument("--table", action="store_true", help="Print a table instead of CSV")
    bench_parser.add_argument(
        "--term-ceiling",
        type=positive_int,
        default=settings.term_ceiling,
        help="Abort an output whose expression grows beyond this many terms",
    )
    bench_parser.add_argument(
        "--executor",
        choices=["process", "thread"],
        default=settings.executor,
        help="Worker pool kind",
    )
    return parser


def emit(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    with open(path, "w") as fp:
        fp.write(text)
    logger.info("Wrote %s", path)


def cmd_generate(cfg: RunConfig) -> int:
    m = cfg.m
    assert m is not None
    p = cfg.polynomial(m)
    netlist = generate_mastrovito(m, p, bus=cfg.bus_names)
    stem = cfg.name or f"gf{m}_{'-'.join(str(e) for e in p.exponents)}"

    directory = cfg.output or "."
    os.makedirs(directory, exist_ok=True)
    base = os.path.join(directory, stem)

    spec = build_spec(m, p, bus=cfg.bus_names)
    files = {
        base + ".eqn": format_equations(netlist),
        base + ".v": format_verilog(netlist),
        base + ".truth.json": json.dumps(ground_truth(m, p, bus=cfg.bus_names), indent=2) + "\n",
        base + ".spec.txt": "\n".join(spec.rows()) + "\n",
    }
    for path, text in files.items():
        with open(path, "w") as fp:
            fp.write(text)
        print(path)

    logger.info("Generated GF(2^%d) multiplier mod %s with %d gates", m, p, len(netlist))
    return EXIT_OK


def cmd_extract(cfg: RunConfig) -> int:
    netlist = load_netlist(cfg.netlist, cfg.fmt)
    if cfg.sequential:
        result = rewrite_signature(netlist, term_ceiling=cfg.term_ceiling)
    else:
        result = extract_all(
            netlist, cfg.threads, term_ceiling=cfg.term_ceiling, executor=cfg.executor
        )
    emit(render_report(result, fmt=cfg.report), cfg.output)
    return EXIT_OK


def cmd_verify(cfg: RunConfig) -> int:
    p = cfg.polynomial(cfg.m)
    if cfg.io_map is None:
        raise MappingError("No IO map given, use --io-map with a ground truth JSON file")
    io_map = load_io_map(cfg.io_map)
    spec = load_spec_rows(cfg.spec, io_map) if cfg.spec else None

    netlist = load_netlist(cfg.netlist, cfg.fmt)
    result = extract_all(netlist, cfg.threads, term_ceiling=cfg.term_ceiling, executor=cfg.executor)
    verdict = verify(netlist, p.m, p, io_map, result=result, spec=spec)
    emit(render_report(result, verdict, fmt=cfg.report), cfg.output)
    return EXIT_OK if verdict.equal else EXIT_MISMATCH


def cmd_reveng(cfg: RunConfig) -> int:
    netlist = load_netlist(cfg.netlist, cfg.fmt)
    if cfg.scramble_seed is not None:
        netlist, _ = scramble(netlist, cfg.scramble_seed)

    report = reverse_engineer(
        netlist, cfg.threads, term_ceiling=cfg.term_ceiling, executor=cfg.executor
    )
    if cfg.report == "json":
        emit(json.dumps(report.to_json(), indent=2) + "\n", cfg.output)
    else:
        emit(report.render(), cfg.output)
    return EXIT_OK if report.spec_check.equal else EXIT_MISMATCH


def _open_db(path: str) -> None:
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    init_db(path)


def cmd_bench(cfg: RunConfig) -> int:
    if cfg.history:
        _open_db(cfg.db or settings.db)
        rows = [
            BenchRow.from_model(run)
            for m in cfg.m_list
            for run in BenchRun.history(m)
        ]
    else:
        if cfg.p is not None and len(cfg.m_list) != 1:
            raise InvalidPolynomial("-p applies to a single degree, give exactly one -m")
        cases = [(m, cfg.polynomial(m)) for m in cfg.m_list]
        benchmark = Benchmark(
            cases, cfg.thread_list, term_ceiling=cfg.term_ceiling, executor=cfg.executor
        )
        if cfg.db:
            _open_db(cfg.db)
        rows = []
        for row in benchmark.run():
            if cfg.db:
                row.save()
            rows.append(row)

    text = render_table(rows) + "\n" if cfg.table else render_csv(rows)
    emit(text, cfg.output)

    failed = [row for row in rows if row.verdict is False]
    if failed and not cfg.history:
        for row in failed:
            note = row.note or "extracted polynomials do not match the field specification"
            print(f"gfextract: m={row.m} T={row.threads}: {note}", file=sys.stderr)
        return EXIT_MISMATCH
    return EXIT_OK


COMMANDS: dict[str, Callable[[RunConfig], int]] = {
    "generate": cmd_generate,
    "extract": cmd_extract,
    "verify": cmd_verify,
    "reveng": cmd_reveng,
    "bench": cmd_bench,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_argument_parser()
    args = parser.parse_args(argv)

    logging.basicConfig(level=args.log_level.upper(), format=LOG_FORMAT, stream=sys.stderr)
    cfg = RunConfig.from_args(args)

    try:
        return COMMANDS[cfg.command](cfg)
    except RevengError as e:
        logger.debug("%s failed", cfg.command, exc_info=True)
        print(f"gfextract: {e}", file=sys.stderr)
        return EXIT_MISMATCH
    except (GfError, OSError, json.JSONDecodeError, UnicodeDecodeError) as e:
        logger.debug("%s failed", cfg.command, exc_info=True)
        print(f"gfextract: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
