"""
Golden GF(2^m) multiplication specifications and Mastrovito netlists.

A field element is A(x) = a_0 + a_1 x + ... + a_{m-1} x^{m-1} with a_0 the
least significant bit. The product A(x)B(x) has 2m-1 coefficients, the
product sets s_k = sum of a_i b_j over i + j = k. Sets with k < m land on
output z_k directly; the others are reduced with x^m = P'(x), the tail of
the irreducible polynomial, and spread over several outputs.
"""

from __future__ import annotations

import json
import logging
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from functools import lru_cache

from gfextract.errors import InvalidExponent, InvalidPolynomial, MappingError, SpecFormatError
from gfextract.gates import GateType
from gfextract.gfpoly import Polynomial, Variables, monomial
from gfextract.netlist import Gate, Netlist
from gfextract.utils import format_exponents, iter_bits

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class IrreduciblePoly:
    """
    P(x) = x^m + P'(x), stored as the degree and the exponents of P'(x).

    Irreducibility itself is assumed, never checked.
    """

    m: int
    tail_exponents: frozenset[int]
    name: str = field(default="", compare=False)

    def __post_init__(self):
        if self.m < 1:
            raise InvalidPolynomial(f"Degree must be positive, got {self.m}")
        if not self.tail_exponents:
            raise InvalidPolynomial("The tail of P(x) is empty")
        if self.m in self.tail_exponents:
            raise InvalidPolynomial(f"x^{self.m} cannot appear in the tail of P(x)")
        if any(e < 0 or e > self.m for e in self.tail_exponents):
            raise InvalidPolynomial(f"Tail exponents must lie in [0, {self.m - 1}]")
        if 0 not in self.tail_exponents:
            raise InvalidPolynomial("P(x) must have a constant term")

    @classmethod
    def from_exponents(cls, exponents: Iterable[int], name: str = "") -> IrreduciblePoly:
        exponents = list(exponents)
        if not exponents:
            raise InvalidPolynomial("No exponents given")
        if len(set(exponents)) != len(exponents):
            raise InvalidPolynomial(f"Repeated exponent in {exponents}")
        m = max(exponents)
        return cls(m, frozenset(e for e in exponents if e != m), name=name)

    @classmethod
    def parse(cls, text: str) -> IrreduciblePoly:
        """
        Read a comma-separated exponent list such as "233,74,0".
        """
        try:
            exponents = [int(part) for part in text.split(",") if part.strip()]
        except ValueError:
            raise InvalidPolynomial(f"Malformed exponent list {text!r}") from None

        poly = cls.from_exponents(exponents)
        known = catalog_name(poly)
        if known is None:
            logger.warning(
                "P(x) = %s is not in the built-in catalog; it is assumed to be irreducible", poly
            )
            return poly
        return cls(poly.m, poly.tail_exponents, name=known)

    @property
    def exponents(self) -> tuple[int, ...]:
        return tuple(sorted(self.tail_exponents | {self.m}, reverse=True))

    @property
    def bits(self) -> int:
        value = 0
        for e in self.exponents:
            value |= 1 << e
        return value

    @property
    def is_trinomial(self) -> bool:
        return len(self.tail_exponents) == 2

    @property
    def is_pentanomial(self) -> bool:
        return len(self.tail_exponents) == 4

    @property
    def efficient_trinomial(self) -> bool:
        """
        The m - a >= m/2 convention for trinomials x^m + x^a + 1.
        """
        if not self.is_trinomial:
            return False
        a = max(self.tail_exponents)
        return 2 * (self.m - a) >= self.m

    def csv(self) -> str:
        return format_exponents(self.exponents)

    def __str__(self) -> str:
        terms = []
        for e in self.exponents:
            if e == 0:
                terms.append("1")
            elif e == 1:
                terms.append("x")
            else:
                terms.append(f"x^{e}")
        return "+".join(terms)


@dataclass(frozen=True)
class ProductSet:
    index: int
    products: Polynomial

    def in_field(self, m: int) -> bool:
        return self.index <= m - 1


@dataclass(frozen=True)
class IoMap:
    """
    Bit-level encoding of a multiplier: wire names of A, B and Z, LSB first.
    """

    a: tuple[str, ...]
    b: tuple[str, ...]
    z: tuple[str, ...]

    @property
    def m(self) -> int:
        return len(self.z)

    def swapped(self) -> IoMap:
        return IoMap(self.b, self.a, self.z)

    def to_dict(self) -> dict:
        return {"a": list(self.a), "b": list(self.b), "z": list(self.z)}

    @classmethod
    def from_dict(cls, data: object) -> IoMap:
        if not isinstance(data, dict):
            raise MappingError(f"IO map must be an object, not {type(data).__name__}")
        words = []
        for key in ("a", "b", "z"):
            wires = data.get(key)
            if not isinstance(wires, list) or not all(isinstance(w, str) for w in wires):
                raise MappingError(f"IO map entry {key!r} must be a list of wire names")
            words.append(tuple(wires))
        return cls(*words)


def wire_names(m: int, bus: bool = False) -> IoMap:
    def label(word: str, i: int) -> str:
        return f"{word}[{i}]" if bus else f"{word}{i}"

    return IoMap(
        tuple(label("a", i) for i in range(m)),
        tuple(label("b", i) for i in range(m)),
        tuple(label("z", i) for i in range(m)),
    )


@dataclass(frozen=True)
class GfSpec:
    m: int
    p: IrreduciblePoly
    variables: Variables
    io_map: IoMap
    outputs: tuple[Polynomial, ...]
    product_sets: tuple[ProductSet, ...]
    assignment_table: dict[int, tuple[int, ...]]

    def columns(self) -> list[list[int]]:
        """
        For each output, the product set indices it sums (the reduction table).
        """
        columns: list[list[int]] = [[i] for i in range(self.m)]
        for k, targets in sorted(self.assignment_table.items()):
            for i in targets:
                columns[i].append(k)
        return columns

    def format_output(self, i: int) -> str:
        return self.outputs[i].format(self.variables)

    def rows(self) -> list[str]:
        return [f"{self.io_map.z[i]} = {self.format_output(i)}" for i in range(self.m)]

    def evaluate(self, a: int, b: int) -> int:
        """
        Field product of two m-bit words, computed from the spec polynomials.
        """
        assignment = {}
        for i in range(self.m):
            assignment[self.variables.id(self.io_map.a[i])] = (a >> i) & 1
            assignment[self.variables.id(self.io_map.b[i])] = (b >> i) & 1
        return sum(out.evaluate(assignment) << i for i, out in enumerate(self.outputs))


@lru_cache(maxsize=4096)
def reduce_exponent(k: int, p: IrreduciblePoly) -> frozenset[int]:
    """
    Exponents of x^k mod P(x), for 0 <= k <= 2m - 2.
    """
    m = p.m
    if k < 0 or k > 2 * m - 2:
        raise InvalidExponent(f"Exponent {k} outside [0, {2 * m - 2}] for m = {m}")

    value = 1 << k
    modulus = p.bits
    while value.bit_length() > m:
        value ^= modulus << (value.bit_length() - 1 - m)
    return frozenset(iter_bits(value))


def product_set(k: int, m: int, variables: Variables, io_map: IoMap) -> Polynomial:
    terms = []
    for i in range(max(0, k - m + 1), min(k, m - 1) + 1):
        terms.append(monomial(variables.id(io_map.a[i]), variables.id(io_map.b[k - i])))
    return Polynomial(terms)


def build_spec(m: int, p: IrreduciblePoly, bus: bool = False) -> GfSpec:
    if p.m != m:
        raise InvalidPolynomial(f"P(x) = {p} has degree {p.m}, expected {m}")

    io_map = wire_names(m, bus)
    variables = Variables([*io_map.a, *io_map.b])

    sets = tuple(ProductSet(k, product_set(k, m, variables, io_map)) for k in range(2 * m - 1))
    outputs = [Polynomial.zero() for _ in range(m)]
    table: dict[int, tuple[int, ...]] = {}
    for k, pset in enumerate(sets):
        targets = tuple(sorted(reduce_exponent(k, p), reverse=True))
        if k >= m:
            table[k] = targets
        for i in targets:
            outputs[i] = outputs[i] + pset.products

    return GfSpec(m, p, variables, io_map, tuple(outputs), sets, table)


def xor_cost(m: int, p: IrreduciblePoly) -> int:
    """
    Two-input XORs needed by the reduction stage: column terms minus one, summed.
    """
    if p.m != m:
        raise InvalidPolynomial(f"P(x) = {p} has degree {p.m}, expected {m}")

    columns = [1] * m
    for k in range(m, 2 * m - 1):
        for i in reduce_exponent(k, p):
            columns[i] += 1
    return sum(count - 1 for count in columns)


def field_multiply(a: int, b: int, p: IrreduciblePoly) -> int:
    """
    Reference multiplication on bit vectors: carry-less product, then reduction.
    """
    product = 0
    while b:
        if b & 1:
            product ^= a
        a <<= 1
        b >>= 1

    modulus = p.bits
    while product.bit_length() > p.m:
        product ^= modulus << (product.bit_length() - 1 - p.m)
    return product


class _Builder:
    def __init__(self, io_map: IoMap):
        self.variables = Variables([*io_map.a, *io_map.b, *io_map.z])
        self.gates: list[Gate] = []

    def emit(self, name: str, gtype: GateType, *inputs: str) -> str:
        var = self.variables.intern(name)
        self.gates.append(Gate(var, gtype, tuple(self.variables.id(i) for i in inputs)))
        return name

    def xor_tree(self, leaves: Sequence[str], root: str, prefix: str) -> str:
        """
        Balanced XOR tree over ``leaves``, pairing neighbours level by level.
        """
        if len(leaves) == 1:
            return leaves[0]

        level = list(leaves)
        n = 0
        while len(level) > 2:
            paired = []
            for j in range(0, len(level) - 1, 2):
                paired.append(self.emit(f"{prefix}_{n}", GateType.XOR, level[j], level[j + 1]))
                n += 1
            if len(level) % 2:
                paired.append(level[-1])
            level = paired
        return self.emit(root, GateType.XOR, level[0], level[1])


def generate_mastrovito(m: int, p: IrreduciblePoly, bus: bool = False) -> Netlist:
    """
    AND array of all partial products, one XOR tree per product set, then one
    XOR tree per output summing the product sets of its reduction column.
    """
    if m < 1:
        raise ValueError(f"m must be positive, got {m}")

    spec = build_spec(m, p, bus=bus)
    io_map = spec.io_map
    columns = spec.columns()
    builder = _Builder(io_map)

    # An output whose column holds only its own in-field set is driven by that set's tree.
    direct = {i for i, column in enumerate(columns) if len(column) == 1}

    def partial_name(i: int, j: int) -> str:
        k = i + j
        if k in direct and min(k, 2 * m - 2 - k) == 0:
            return io_map.z[k]
        return f"pp{i}_{j}"

    for i in range(m):
        for j in range(m):
            builder.emit(partial_name(i, j), GateType.AND, io_map.a[i], io_map.b[j])

    signals = []
    for k in range(2 * m - 1):
        leaves = [partial_name(i, k - i) for i in range(max(0, k - m + 1), min(k, m - 1) + 1)]
        root = io_map.z[k] if k in direct else f"s{k}"
        signals.append(builder.xor_tree(leaves, root, f"s{k}"))

    for i, column in enumerate(columns):
        if i in direct:
            continue
        builder.xor_tree([signals[k] for k in column], io_map.z[i], f"r{i}")

    name = f"gf{m}_{'-'.join(str(e) for e in p.exponents)}"
    inputs = [builder.variables.id(w) for w in (*io_map.a, *io_map.b)]
    outputs = [builder.variables.id(w) for w in io_map.z]
    return Netlist(builder.variables, inputs, outputs, builder.gates, name=name)


def ground_truth(m: int, p: IrreduciblePoly, bus: bool = False) -> dict:
    """
    Sidecar document recorded next to generated netlists.
    """
    io_map = wire_names(m, bus)
    return {
        "m": m,
        "irreducible": list(p.exponents),
        "io_map": io_map.to_dict(),
        "outputs": [{"wire": wire, "position": i} for i, wire in enumerate(io_map.z)],
        "inputs": [
            {"wire": wire, "position": i, "word": word}
            for word, wires in (("a", io_map.a), ("b", io_map.b))
            for i, wire in enumerate(wires)
        ],
    }


def load_io_map(path: str) -> IoMap:
    with open(path) as fp:
        data = json.load(fp)
    if isinstance(data, dict) and "io_map" in data:
        data = data["io_map"]
    return IoMap.from_dict(data)


@dataclass(frozen=True)
class SpecRows:
    """
    Expected output polynomials written out one row per output wire.

    Rows use the netlist's own wire names, ``z0 = a0*b0+a1*b1``, so any
    relation between A, B and Z can be checked, not only A*B mod P(x).
    A Montgomery multiplier is verified against rows for A*B*R^-1 mod P(x).
    """

    variables: Variables
    io_map: IoMap
    outputs: tuple[Polynomial, ...]

    @property
    def m(self) -> int:
        return len(self.outputs)

    def format_output(self, i: int) -> str:
        return self.outputs[i].format(self.variables)

    def rows(self) -> list[str]:
        return [f"{self.io_map.z[i]} = {self.format_output(i)}" for i in range(self.m)]


def parse_spec_rows(text: str, io_map: IoMap) -> SpecRows:
    variables = Variables([*io_map.a, *io_map.b])
    known = len(variables)
    found: dict[str, Polynomial] = {}

    for line, row in enumerate(text.splitlines(), start=1):
        row = row.split("#", 1)[0].strip()
        if not row:
            continue
        wire, sep, rhs = row.partition("=")
        wire = wire.strip()
        if not sep or not wire or not rhs.strip():
            raise SpecFormatError(f"expected 'wire = polynomial', got {row!r}", line)
        if wire not in io_map.z:
            raise SpecFormatError(f"{wire} is not an output of the IO map", line)
        if wire in found:
            raise SpecFormatError(f"output {wire} is given twice", line)
        try:
            found[wire] = Polynomial.parse(rhs, variables)
        except ValueError as e:
            raise SpecFormatError(str(e), line) from e
        if len(variables) != known:
            unknown = ", ".join(variables.names[known:])
            raise SpecFormatError(f"{unknown} are not inputs of the IO map", line)

    missing = [wire for wire in io_map.z if wire not in found]
    if missing:
        raise MappingError(f"No expected polynomial for {', '.join(missing)}")
    return SpecRows(variables, io_map, tuple(found[wire] for wire in io_map.z))


def load_spec_rows(path: str, io_map: IoMap) -> SpecRows:
    with open(path) as fp:
        return parse_spec_rows(fp.read(), io_map)


# Catalog of irreducible polynomials. The first entry for a degree is its default.
_CATALOG: list[tuple[int, tuple[int, ...], tuple[str, ...]]] = [
    (1, (1, 0), ()),
    (2, (2, 1, 0), ()),
    (3, (3, 1, 0), ()),
    (4, (4, 1, 0), ("p2",)),
    (4, (4, 3, 0), ("p1",)),
    (5, (5, 2, 0), ()),
    (6, (6, 1, 0), ()),
    (6, (6, 5, 0), ()),
    (7, (7, 1, 0), ()),
    (8, (8, 4, 3, 1, 0), ("aes",)),
    (8, (8, 7, 5, 4, 0), ()),
    (16, (16, 5, 3, 2, 0), ()),
    (16, (16, 15, 13, 4, 0), ()),
    (32, (32, 7, 3, 2, 0), ()),
    (32, (32, 22, 2, 1, 0), ()),
    (64, (64, 21, 19, 4, 0), ()),
    (64, (64, 4, 3, 1, 0), ()),
    (128, (128, 7, 2, 1, 0), ("gcm",)),
    (163, (163, 80, 47, 9, 0), ()),
    (163, (163, 7, 6, 3, 0), ("nist",)),
    (233, (233, 74, 0), ("nist",)),
    (233, (233, 159, 0), ()),
    (283, (283, 12, 7, 5, 0), ("nist",)),
    (409, (409, 87, 0), ("nist",)),
    (571, (571, 10, 5, 2, 0), ("nist",)),
]


def _shape_name(exponents: Sequence[int]) -> str:
    tail = [e for e in exponents[1:] if e != 0]
    kind = {0: "binomial", 1: "trinomial", 3: "pentanomial"}.get(len(tail), "polynomial")
    return "-".join([kind, *(str(e) for e in tail)])


@lru_cache(maxsize=1)
def nist_polynomials() -> dict[tuple[int, str], IrreduciblePoly]:
    """
    Built-in catalog keyed by (degree, name); every entry is also keyed "default"
    for the first polynomial listed for its degree.
    """
    catalog: dict[tuple[int, str], IrreduciblePoly] = {}
    for m, exponents, aliases in _CATALOG:
        shape = _shape_name(exponents)
        poly = IrreduciblePoly.from_exponents(exponents, name=shape)
        catalog.setdefault((m, "default"), poly)
        for name in (shape, *aliases):
            catalog[(m, name)] = poly
    return catalog


def lookup(m: int, name: str | None = None) -> IrreduciblePoly:
    try:
        return nist_polynomials()[(m, name or "default")]
    except KeyError:
        raise InvalidPolynomial(f"No catalog polynomial {name or 'default'!r} of degree {m}")


def default_polynomial(m: int) -> IrreduciblePoly:
    return lookup(m)


def catalog_polynomials(m: int) -> list[IrreduciblePoly]:
    seen: list[IrreduciblePoly] = []
    for (degree, _), poly in nist_polynomials().items():
        if degree == m and poly not in seen:
            seen.append(poly)
    return seen


def catalog_name(poly: IrreduciblePoly) -> str | None:
    for (_, name), known in nist_polynomials().items():
        if known == poly and name != "default":
            return known.name
    return None
