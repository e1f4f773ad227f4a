import pytest

from gfextract.bench import CSV_HEADER, Benchmark, BenchRow, render_csv, render_table
from gfextract.extract import verify
from gfextract.models import BenchRun
from gfextract.netlist import format_equations, parse_equations
from gfextract.scramble import differs, inject_bug, scramble
from gfextract.specgen import generate_mastrovito, lookup, wire_names


def row_factory(**kwargs):
    kwargs.setdefault("m", 2)
    kwargs.setdefault("polynomial", "x^2+x+1")
    kwargs.setdefault("gates", 8)
    kwargs.setdefault("threads", 1)
    return BenchRow(**kwargs)


def test_scramble_is_deterministic(nand2):
    first, mapping = scramble(nand2, 5)
    second, _ = scramble(nand2, 5)
    assert first.named_gates() == second.named_gates()
    assert first.input_names == second.input_names
    assert first.name == "nand2_s5"
    assert len(set(mapping.values())) == len(mapping)
    assert not set(mapping.values()) & set(mapping)


def test_scramble_preserves_function(nand2):
    scrambled, mapping = scramble(nand2, 11)
    renamed = nand2.renamed(mapping)
    assert not differs(renamed, scrambled)


def test_scramble_seeds_differ(nand2):
    first, _ = scramble(nand2, 1)
    second, _ = scramble(nand2, 2)
    assert first.input_names != second.input_names


@pytest.mark.parametrize("seed", range(12))
def test_inject_bug_agrees_with_simulation(nand2, seed: int):
    mutant, description = inject_bug(nand2, seed)
    assert description
    assert mutant.output_names == nand2.output_names
    verdict = verify(mutant, 2, lookup(2), wire_names(2))
    assert verdict.equal == (not differs(nand2, mutant))


def test_inject_bug_needs_a_candidate():
    netlist = parse_equations("inputs a\noutputs z\nz = NOT(a)\n")
    with pytest.raises(ValueError):
        inject_bug(netlist, 0)


def test_inject_bug_survives_round_trip():
    netlist = generate_mastrovito(4, lookup(4))
    mutant, _ = inject_bug(netlist, 3)
    assert parse_equations(format_equations(mutant), name=netlist.name) == mutant


def test_differs_on_random_patterns():
    netlist = generate_mastrovito(16, lookup(16))
    assert not differs(netlist, netlist, patterns=256)


def test_benchmark_rows():
    rows = list(Benchmark([(2, lookup(2)), (3, lookup(3))], [1, 2], executor="thread").run())
    assert [(row.m, row.threads) for row in rows] == [(2, 1), (2, 2), (3, 1), (3, 2)]
    assert all(row.verdict for row in rows)
    assert rows[0].polynomial == "x^2+x+1"
    assert rows[0].gates == len(generate_mastrovito(2, lookup(2)))


def test_benchmark_aborted_row():
    rows = list(Benchmark([(8, lookup(8))], [1], term_ceiling=4).run())
    assert rows[0].wall_time_ms is None
    assert rows[0].note
    assert rows[0].save() is None


def test_render_csv():
    rows = [
        row_factory(wall_time_ms=1.5, peak_terms=6, verdict=True),
        row_factory(threads=2, note="aborted"),
    ]
    lines = render_csv(rows).splitlines()
    assert lines[0] == ",".join(CSV_HEADER) == "m,p,gates,T,wall_time_ms,peak_terms"
    assert lines[1] == "2,x^2+x+1,8,1,1.500,6"
    assert lines[2] == "2,x^2+x+1,8,2,,"


def test_render_table():
    rows = [row_factory(wall_time_ms=12.25, peak_terms=1200, verdict=True), row_factory()]
    table = render_table(rows)
    assert "Extraction benchmark" in table
    assert "m=2 T=1" in table
    assert "peak 1,200  ok" in table
    assert len({len(line) for line in table.splitlines()}) == 1


def test_bench_row_save():
    row_factory(m=4, wall_time_ms=3.0, peak_terms=10, verdict=True).save()
    row_factory(m=4, threads=2, wall_time_ms=2.0, peak_terms=10, verdict=True).save()
    row_factory(m=5, wall_time_ms=9.0, peak_terms=20, verdict=False).save()

    history = list(BenchRun.history(4))
    assert [run.threads for run in history] == [2, 1]
    assert BenchRow.from_model(history[0]).wall_time_ms == 2.0
    assert BenchRun.history().count() == 3
