import pytest

from gfextract.errors import InvalidExponent, InvalidPolynomial, MappingError, SpecFormatError
from gfextract.gates import GateType
from gfextract.specgen import (
    IoMap,
    IrreduciblePoly,
    build_spec,
    catalog_polynomials,
    default_polynomial,
    field_multiply,
    generate_mastrovito,
    ground_truth,
    lookup,
    nist_polynomials,
    parse_spec_rows,
    reduce_exponent,
    wire_names,
    xor_cost,
)
from gfextract.utils import exhaustive_vectors

P1 = IrreduciblePoly.from_exponents([4, 3, 0])
P2 = IrreduciblePoly.from_exponents([4, 1, 0])

GF16_ROWS = [
    "z0 = a0*b0+a1*b3+a2*b2+a3*b1",
    "z1 = a0*b1+a1*b0+a1*b3+a2*b2+a2*b3+a3*b1+a3*b2",
    "z2 = a0*b2+a1*b1+a2*b0+a2*b3+a3*b2+a3*b3",
    "z3 = a0*b3+a1*b2+a2*b1+a3*b0+a3*b3",
]

# At least one trinomial or pentanomial for every small degree.
SMALL_FIELDS = [(m, p) for m in range(1, 7) for p in catalog_polynomials(m)]


def poly_factory(text: str) -> IrreduciblePoly:
    return IrreduciblePoly.parse(text)


def test_irreducible_poly_forms():
    p = poly_factory("233,74,0")
    assert p.m == 233
    assert p.tail_exponents == {74, 0}
    assert p.exponents == (233, 74, 0)
    assert str(p) == "x^233+x^74+1"
    assert p.csv() == "233,74,0"
    assert p.is_trinomial
    assert str(P2) == "x^4+x+1"
    assert P2.bits == 0b10011


@pytest.mark.parametrize("text", ["", "4,x,0", "4,4,0", "4,1", "0"])
def test_irreducible_poly_invalid(text: str):
    with pytest.raises(InvalidPolynomial):
        IrreduciblePoly.parse(text)


def test_invalid_polynomial_is_value_error():
    with pytest.raises(ValueError):
        IrreduciblePoly.parse("4,2")


def test_unknown_polynomial_warns(caplog):
    IrreduciblePoly.parse("4,2,1,0")
    assert "assumed to be irreducible" in caplog.text


def test_catalog_polynomial_is_named(caplog):
    p = IrreduciblePoly.parse("4,1,0")
    assert p.name == "trinomial-1"
    assert not caplog.text


def test_efficient_trinomial_convention():
    assert lookup(233, "trinomial-74").efficient_trinomial
    assert not lookup(233, "trinomial-159").efficient_trinomial


@pytest.mark.parametrize(
    "k, p, expected",
    [
        (5, P1, {3, 1, 0}),
        (6, P1, {3, 2, 1, 0}),
        (2, P1, {2}),
        (2, P2, {2}),
        (4, P2, {1, 0}),
        (6, P2, {3, 2}),
    ],
)
def test_reduce_exponent(k: int, p: IrreduciblePoly, expected: set):
    assert reduce_exponent(k, p) == expected


@pytest.mark.parametrize("k", [-1, 7])
def test_reduce_exponent_out_of_range(k: int):
    with pytest.raises(InvalidExponent):
        reduce_exponent(k, P1)


def test_build_spec_rows():
    spec = build_spec(4, P2)
    assert spec.rows() == GF16_ROWS


def test_build_spec_p1_table():
    spec = build_spec(4, P1)
    assert spec.assignment_table == {4: (3, 0), 5: (3, 1, 0), 6: (3, 2, 1, 0)}
    assert spec.columns() == [[0, 4, 5, 6], [1, 5, 6], [2, 6], [3, 4, 5, 6]]


def test_build_spec_single_bit():
    spec = build_spec(1, lookup(1))
    assert spec.rows() == ["z0 = a0*b0"]


def test_build_spec_degree_mismatch():
    with pytest.raises(InvalidPolynomial):
        build_spec(5, P2)


def test_product_set_sizes():
    m = 6
    spec = build_spec(m, default_polynomial(m))
    for pset in spec.product_sets:
        k = pset.index
        assert len(pset.products) == min(k, 2 * m - 2 - k, m - 1) + 1
        assert pset.in_field(m) == (k <= m - 1)


@pytest.mark.parametrize("m, p", SMALL_FIELDS + [(8, lookup(8)), (8, lookup(8, "aes"))])
def test_product_set_multiplicity(m, p):
    spec = build_spec(m, p)
    for pset in spec.product_sets:
        owners = [i for i, out in enumerate(spec.outputs) if pset.products.terms <= out.terms]
        if pset.in_field(m):
            assert owners == [pset.index]
        else:
            assert set(owners) == reduce_exponent(pset.index, p)
            if m >= 2:
                assert len(owners) >= 2


@pytest.mark.parametrize(
    "m, p, expected",
    [
        (4, P1, 9),
        (4, P2, 6),
        (2, IrreduciblePoly.from_exponents([2, 1, 0]), 2),
    ],
)
def test_xor_cost(m, p, expected):
    assert xor_cost(m, p) == expected


@pytest.mark.parametrize("p", [P1, P2])
def test_xor_cost_counts_reduction_stage(p):
    netlist = generate_mastrovito(4, p)
    reduction = [
        g for g in netlist.gates if g.gtype is GateType.XOR and netlist.wire(g.output)[0] in "rz"
    ]
    product = [g for g in netlist.gates if g.gtype is GateType.XOR and g not in reduction]
    assert len(reduction) == xor_cost(4, p)
    assert len(product) == 4 * 4 - (2 * 4 - 1)


def test_generate_gate_counts():
    netlist = generate_mastrovito(4, P2)
    ands = [g for g in netlist.gates if g.gtype is GateType.AND]
    assert len(ands) == 16
    assert netlist.input_names == ["a0", "a1", "a2", "a3", "b0", "b1", "b2", "b3"]
    assert netlist.output_names == ["z0", "z1", "z2", "z3"]


def test_generate_single_bit():
    netlist = generate_mastrovito(1, lookup(1))
    assert netlist.named_gates() == [("z0", "AND", ("a0", "b0"))]


def test_generate_bus_names():
    netlist = generate_mastrovito(2, lookup(2), bus=True)
    assert netlist.input_names == ["a[0]", "a[1]", "b[0]", "b[1]"]
    assert netlist.output_names == ["z[0]", "z[1]"]


@pytest.mark.parametrize("m, p", SMALL_FIELDS)
def test_spec_matches_field_oracle(m, p):
    spec = build_spec(m, p)
    for a in range(1 << m):
        for b in range(1 << m):
            assert spec.evaluate(a, b) == field_multiply(a, b, p)


@pytest.mark.parametrize("m, p", SMALL_FIELDS)
def test_generated_netlist_matches_field_oracle(m, p):
    netlist = generate_mastrovito(m, p)
    vectors, mask = exhaustive_vectors(2 * m)
    outputs = netlist.simulate_outputs(dict(zip(netlist.primary_inputs, vectors)), mask)
    for pattern in range(1 << (2 * m)):
        a, b = pattern & ((1 << m) - 1), pattern >> m
        product = sum(((out >> pattern) & 1) << i for i, out in enumerate(outputs))
        assert product == field_multiply(a, b, p)


def test_field_multiply_aes():
    # {57} * {83} = {c1} in the AES field
    assert field_multiply(0x57, 0x83, lookup(8, "aes")) == 0xC1


def test_catalog_contents():
    catalog = nist_polynomials()
    assert lookup(233, "trinomial-74").tail_exponents == {74, 0}
    assert lookup(64).tail_exponents == {21, 19, 4, 0}
    assert lookup(4, "p2").tail_exponents == {1, 0}
    assert lookup(4, "p1") == P1
    assert lookup(163).exponents == (163, 80, 47, 9, 0)
    assert lookup(409).exponents == (409, 87, 0)
    assert lookup(233, "trinomial-159").exponents == (233, 159, 0)
    assert all(p.m == m for (m, _), p in catalog.items())


@pytest.mark.parametrize("m", [6, 8, 16, 32, 64])
def test_catalog_has_two_polynomials(m: int):
    assert len(catalog_polynomials(m)) >= 2


def test_lookup_unknown():
    with pytest.raises(InvalidPolynomial):
        lookup(4, "nope")
    with pytest.raises(InvalidPolynomial):
        default_polynomial(9)


def test_ground_truth():
    truth = ground_truth(2, lookup(2))
    assert truth["irreducible"] == [2, 1, 0]
    assert truth["io_map"] == {"a": ["a0", "a1"], "b": ["b0", "b1"], "z": ["z0", "z1"]}
    assert truth["outputs"][1] == {"wire": "z1", "position": 1}


def test_io_map_from_dict():
    io_map = IoMap.from_dict(wire_names(2).to_dict())
    assert io_map == wire_names(2)


@pytest.mark.parametrize(
    "data",
    [
        ["a0", "b0", "z0"],
        {"a": ["a0"], "b": ["b0"]},
        {"a": "a0", "b": ["b0"], "z": ["z0"]},
        {"a": ["a0"], "b": [0], "z": ["z0"]},
    ],
)
def test_io_map_from_dict_rejects(data):
    with pytest.raises(MappingError):
        IoMap.from_dict(data)


def test_parse_spec_rows():
    text = "# expected outputs\n" + "\n".join(reversed(GF16_ROWS)) + "\n"
    spec = parse_spec_rows(text, wire_names(4))
    assert spec.m == 4
    assert spec.rows() == GF16_ROWS
    assert spec.outputs == build_spec(4, P2).outputs


@pytest.mark.parametrize(
    "text",
    [
        "z0 a0*b0\n",
        "z0 = \n",
        "y0 = a0*b0\n",
        "z0 = a0*b0\nz0 = a1*b1\n",
        "z0 = a0*c0\n",
        "z0 = a0*b0++a1*b1\n",
    ],
)
def test_parse_spec_rows_rejects(text: str):
    with pytest.raises(SpecFormatError) as excinfo:
        parse_spec_rows(text, wire_names(2))
    assert excinfo.value.line == text.count("\n")


def test_parse_spec_rows_missing_output():
    with pytest.raises(MappingError):
        parse_spec_rows("z0 = a0*b0+a1*b1\n", wire_names(2))
