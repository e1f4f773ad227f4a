import json
from functools import lru_cache

import pytest

from gfextract.errors import (
    ExtractionError,
    InvalidOutputOrder,
    MappingError,
    TermCeilingExceeded,
    UndrivenSignal,
)
from gfextract.extract import (
    OutputSignature,
    assemble_signature,
    extract_all,
    format_signature,
    render_report,
    rewrite_cone,
    rewrite_signature,
    verify,
)
from gfextract.gates import GateType
from gfextract.gfpoly import Polynomial
from gfextract.netlist import Gate, format_equations, parse_equations
from gfextract.scramble import differs, inject_bug
from gfextract.specgen import (
    IoMap,
    build_spec,
    generate_mastrovito,
    lookup,
    parse_spec_rows,
    wire_names,
)
from gfextract.utils import exhaustive_vectors


def multiplier_factory(m: int = 4, name: str | None = None, bus: bool = False):
    return generate_mastrovito(m, lookup(m, name), bus=bus)


def test_extract_nand2(nand2):
    result = extract_all(nand2, 1)
    assert result.format_output(nand2.var("z0")) == "a0*b0+a1*b1"
    assert result.format_output(nand2.var("z1")) == "a0*b1+a1*b0+a1*b1"
    assert result.outputs == nand2.primary_outputs


def test_extract_nand2_stats(nand2):
    result = extract_all(nand2, 1)
    z0, z1 = result.stats
    assert (z0.output, z0.gate_count, z0.substitutions) == ("z0", 3, 3)
    # the two NAND constants cancel
    assert z0.eliminated == 1
    assert z1.gate_count == 6
    assert result.peak_terms >= 3


def test_extract_buffer():
    netlist = parse_equations("inputs a\noutputs z\nt = BUF(a)\nz = NOT(t)\n")
    result = extract_all(netlist, 1)
    assert result.format_output(netlist.var("z")) == "1+a"


def test_extract_constant_output():
    netlist = parse_equations("inputs a\noutputs z\nt = NOT(a)\nz = XNOR(a, t)\n")
    assert extract_all(netlist, 1).polynomials == [Polynomial.zero()]


def test_extract_rejects_zero_threads(nand2):
    with pytest.raises(ValueError):
        extract_all(nand2, 0)


@pytest.mark.parametrize("threads", [2, 3, 4, 8])
def test_result_does_not_depend_on_threads(threads: int):
    netlist = multiplier_factory(8)
    reference = extract_all(netlist, 1)
    result = extract_all(netlist, threads, executor="thread")
    assert result.per_output == reference.per_output
    assert result.threads == threads


def test_process_pool_matches_sequential():
    netlist = multiplier_factory(6)
    reference = extract_all(netlist, 1)
    result = extract_all(netlist, 2, executor="process")
    assert result.per_output == reference.per_output


def test_unknown_executor():
    with pytest.raises(ValueError):
        extract_all(multiplier_factory(2), 2, executor="fiber")


@pytest.mark.parametrize("m", [1, 2, 3, 4, 5, 6, 8, 16])
def test_extract_matches_spec(m: int):
    p = lookup(m)
    netlist = generate_mastrovito(m, p)
    spec = build_spec(m, p)
    result = extract_all(netlist, 4, executor="thread")
    for i, wire in enumerate(spec.io_map.z):
        assert result.format_output(netlist.var(wire)) == spec.format_output(i)


@pytest.mark.slow
@pytest.mark.parametrize("m", [32, 64])
def test_extract_matches_spec_large(m: int):
    p = lookup(m)
    netlist = generate_mastrovito(m, p)
    assert verify(netlist, m, p, wire_names(m), threads=4).equal


def test_term_ceiling_aborts_output():
    netlist = multiplier_factory(8)
    with pytest.raises(ExtractionError) as excinfo:
        extract_all(netlist, 1, term_ceiling=4)
    assert isinstance(excinfo.value.cause, TermCeilingExceeded)
    assert excinfo.value.output == "z0"


def test_term_ceiling_in_worker():
    netlist = multiplier_factory(8)
    with pytest.raises(ExtractionError) as excinfo:
        extract_all(netlist, 4, term_ceiling=4, executor="thread")
    assert isinstance(excinfo.value.cause, TermCeilingExceeded)


def test_rewrite_cone_undriven(nand2):
    cone = nand2.extract_cone(nand2.var("z0"))
    with pytest.raises(UndrivenSignal):
        rewrite_cone(cone, primary_inputs=frozenset({nand2.var("a0")}))


def test_rewrite_cone_on_step(nand2):
    steps = []
    cone = nand2.extract_cone(nand2.var("z1"))
    poly = rewrite_cone(cone, on_step=lambda gate, expr, cancelled: steps.append(cancelled))
    assert len(steps) == len(cone.gates)
    assert sum(steps) >= 1
    assert poly.format(nand2.variables) == "a0*b1+a1*b0+a1*b1"


def test_rewrite_cone_skips_absent_gates():
    # u = t + t vanishes, so t never appears in the expression
    text = "inputs a b\noutputs z\nt = AND(a, b)\nu = XOR(t, t)\nz = OR(u, a)\n"
    netlist = parse_equations(text)
    cone = netlist.extract_cone(netlist.var("z"))
    steps = []
    poly = rewrite_cone(cone, on_step=lambda gate, expr, cancelled: steps.append(gate))
    assert [netlist.wire(g.output) for g in steps] == ["z", "u"]
    assert poly.format(netlist.variables) == "a"


@pytest.mark.parametrize("m", [2, 4])
def test_rewrite_signature_matches_per_cone(m: int):
    netlist = multiplier_factory(m)
    sequential = rewrite_signature(netlist)
    assert sequential.per_output == extract_all(netlist, 1).per_output
    assert sequential.stats[0].substitutions == len(netlist)


def test_assemble_signature(nand2):
    result = extract_all(nand2, 1)
    order = [nand2.var("z0"), nand2.var("z1")]
    coefficients = assemble_signature(result, order)
    assert format_signature(coefficients, nand2.variables) == (
        "(a0*b0+a1*b1)+(a0*b1+a1*b0+a1*b1)*x"
    )

    reversed_coefficients = assemble_signature(result, list(reversed(order)))
    assert reversed_coefficients == list(reversed(coefficients))


@pytest.mark.parametrize("order", [["z0"], ["z0", "z0"], ["z0", "i1"]])
def test_assemble_signature_invalid_order(nand2, order):
    result = extract_all(nand2, 1)
    with pytest.raises(InvalidOutputOrder):
        assemble_signature(result, [nand2.var(name) for name in order])


def test_output_signature(nand2):
    signature = OutputSignature.of(nand2)
    assert len(signature) == 2
    assert signature.slices[0] == (nand2.var("z0"), Polynomial.variable(nand2.var("z0")))


def test_verify_nand2(nand2):
    verdict = verify(nand2, 2, lookup(2), wire_names(2))
    assert verdict.equal
    assert not any(verdict.residuals)


@pytest.mark.parametrize("name", ["p1", "p2"])
def test_verify_generated(name: str):
    p = lookup(4, name)
    assert verify(generate_mastrovito(4, p), 4, p, wire_names(4)).equal


def test_verify_wrong_polynomial():
    netlist = multiplier_factory(4, "p1")
    verdict = verify(netlist, 4, lookup(4, "p2"), wire_names(4))
    assert not verdict.equal
    assert verdict.mismatched()


def test_verify_swapped_words():
    netlist = multiplier_factory(4)
    assert verify(netlist, 4, lookup(4), wire_names(4).swapped()).equal


def test_verify_reversed_outputs():
    io_map = wire_names(4)
    reversed_map = IoMap(io_map.a, io_map.b, tuple(reversed(io_map.z)))
    assert not verify(multiplier_factory(4), 4, lookup(4), reversed_map).equal


def test_verify_detects_mutation(nand2):
    index = [g.output for g in nand2.gates].index(nand2.var("z0"))
    gate = nand2.gates[index]
    mutant = nand2.replace_gate(index, Gate(gate.output, GateType.OR, gate.inputs))
    verdict = verify(mutant, 2, lookup(2), wire_names(2))
    assert not verdict.equal
    assert verdict.mismatched() == ["z0"]


def test_verify_requires_io_map(nand2):
    with pytest.raises(MappingError):
        verify(nand2, 2, lookup(2), None)


@pytest.mark.parametrize(
    "io_map",
    [
        IoMap(("a0",), ("b0",), ("z0",)),
        IoMap(("a0", "a1"), ("a0", "b1"), ("z0", "z1")),
        IoMap(("a0", "a1"), ("b0", "b1"), ("z0", "i1")),
    ],
)
def test_verify_bad_io_map(nand2, io_map):
    with pytest.raises(MappingError):
        verify(nand2, 2, lookup(2), io_map)


def test_json_report(nand2):
    result = extract_all(nand2, 1)
    verdict = verify(nand2, 2, lookup(2), wire_names(2), result=result)
    report = json.loads(render_report(result, verdict, fmt="json"))
    assert report["netlist"] == "nand2"
    assert report["verdict"] == "equal"
    assert [out["name"] for out in report["outputs"]] == ["z0", "z1"]
    assert report["outputs"][0]["polynomial"] == "a0*b0+a1*b1"
    assert report["residuals"] == {"z0": "0", "z1": "0"}


def test_text_report(nand2):
    result = extract_all(nand2, 1)
    text = render_report(result)
    assert text.startswith("Netlist nand2: 2 outputs, T=1")
    assert "  a0*b0+a1*b1\n" in text
    assert "Verdict" not in text

    verdict = verify(nand2, 2, lookup(2), wire_names(2), result=result)
    assert "Verdict: EQUAL" in render_report(result, verdict)


def scaled_multiplier_factory():
    """
    GF(2^4) multiplier over x^4+x+1 whose outputs are A*B*x, a scaled product
    in the manner of a Montgomery design.
    """
    netlist = multiplier_factory(4, "p2").renamed({f"z{i}": f"c{i}" for i in range(4)})
    lines = format_equations(netlist).replace("outputs c0 c1 c2 c3", "outputs z0 z1 z2 z3")
    lines += "z0 = BUF(c3)\nz1 = XOR(c0, c3)\nz2 = BUF(c1)\nz3 = BUF(c2)\n"
    return parse_equations(lines, name="scaled4")


def scaled_rows():
    spec = build_spec(4, lookup(4, "p2"))
    c = [spec.format_output(i) for i in range(4)]
    return f"z0 = {c[3]}\nz1 = {c[0]}+{c[3]}\nz2 = {c[1]}\nz3 = {c[2]}\n"


def test_verify_against_expected_rows():
    netlist = scaled_multiplier_factory()
    p = lookup(4, "p2")
    io_map = wire_names(4)
    assert not verify(netlist, 4, p, io_map).equal

    spec = parse_spec_rows(scaled_rows(), io_map)
    assert verify(netlist, 4, p, io_map, spec=spec).equal
    assert not verify(multiplier_factory(4, "p2"), 4, p, io_map, spec=spec).equal


def test_verify_expected_rows_degree(nand2):
    spec = parse_spec_rows("z0 = a0*b0\n", IoMap(("a0",), ("b0",), ("z0",)))
    with pytest.raises(MappingError):
        verify(nand2, 2, lookup(2), wire_names(2), spec=spec)


@lru_cache(maxsize=None)
def reference_multiplier(m: int):
    netlist = multiplier_factory(m)
    return netlist, extract_all(netlist, 1)


@pytest.mark.parametrize("m", [4, 8, pytest.param(16, marks=pytest.mark.slow)])
@pytest.mark.parametrize("seed", range(50))
def test_mutants_are_detected(m: int, seed: int):
    netlist, _ = reference_multiplier(m)
    mutant, description = inject_bug(netlist, seed)
    verdict = verify(mutant, m, lookup(m), wire_names(m), threads=1)
    assert verdict.equal == (not differs(netlist, mutant, seed=seed)), description


@pytest.mark.parametrize(
    "m",
    [
        16,
        pytest.param(32, marks=pytest.mark.slow),
        pytest.param(64, marks=pytest.mark.slow),
    ],
)
@pytest.mark.parametrize("threads", [2, 4, 8, 16])
def test_process_pool_is_deterministic(m: int, threads: int):
    netlist, reference = reference_multiplier(m)
    result = extract_all(netlist, threads, executor="process")
    assert result.per_output == reference.per_output
    assert [s.substitutions for s in result.stats] == [s.substitutions for s in reference.stats]


@pytest.mark.parametrize("m", [1, 2, 3, 4])
def test_every_rewriting_step_matches_simulation(m: int):
    netlist = multiplier_factory(m)
    vectors, mask = exhaustive_vectors(2 * m)
    values = netlist.simulate(dict(zip(netlist.primary_inputs, vectors)), mask)

    for cone in netlist.cones():
        expected = values[cone.output]
        checked = []

        def check(gate, expr, cancelled):
            assert expr.freeze().evaluate_packed(values, mask) == expected
            checked.append(gate)

        rewrite_cone(cone, on_step=check)
        assert checked
