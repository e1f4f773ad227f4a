"""
Reverse engineering of bit-blasted GF(2^m) multipliers.

Nothing about the circuit is assumed beyond its netlist. Output bit
positions come from the unique products of each output expression, input
bit positions from walking the in-field product sets, and the irreducible
polynomial from the outputs that contain every product of s_m.
"""

from __future__ import annotations

import logging
from collections import Counter
from collections.abc import Iterator
from contextlib import contextmanager
from dataclasses import dataclass
from itertools import combinations

from gfextract.errors import (
    EmptySm,
    GfError,
    InconsistentEncoding,
    NoValidEncoding,
    NotReducible,
)
from gfextract.extract import ExtractionResult, Verdict, extract_all, verify
from gfextract.gfpoly import Monomial, Polynomial, VarId, Variables, monomial, monomial_degree
from gfextract.netlist import Netlist
from gfextract.rendering import render_template
from gfextract.specgen import IoMap, IrreduciblePoly, catalog_name
from gfextract.utils import iter_bits

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class InFieldAssignment:
    """
    Output bit positions, each with the in-field product set s_i found in it.
    """

    entries: tuple[tuple[int, VarId, Polynomial], ...]

    @property
    def m(self) -> int:
        return len(self.entries)

    @property
    def order(self) -> list[VarId]:
        return [out for _, out, _ in self.entries]

    def output(self, position: int) -> VarId:
        return self.entries[position][1]

    def product_set(self, position: int) -> Polynomial:
        return self.entries[position][2]


@dataclass(frozen=True)
class InputPositionMap:
    """
    Bit position of every primary input, plus the word pairing chosen for
    each position: ``pairs[i]`` is the (word A, word B) variable pair at bit i.
    """

    positions: dict[VarId, int]
    pairs: tuple[tuple[VarId, VarId], ...]

    @property
    def m(self) -> int:
        return len(self.pairs)

    def position(self, var: VarId) -> int:
        return self.positions[var]

    def word(self, var: VarId) -> str:
        a, _ = self.pairs[self.positions[var]]
        return "a" if var == a else "b"

    @property
    def word_a(self) -> list[VarId]:
        return [a for a, _ in self.pairs]

    @property
    def word_b(self) -> list[VarId]:
        return [b for _, b in self.pairs]

    def swapped(self) -> InputPositionMap:
        return InputPositionMap(self.positions, tuple((b, a) for a, b in self.pairs))


@dataclass(frozen=True)
class RevengReport:
    name: str
    variables: Variables
    output_order: InFieldAssignment
    input_map: InputPositionMap
    p: IrreduciblePoly
    spec_check: Verdict
    word_ambiguity_note: int

    @property
    def m(self) -> int:
        return self.p.m

    @property
    def io_map(self) -> IoMap:
        return _io_map(self.variables, self.output_order, self.input_map)

    def to_json(self) -> dict:
        names = self.variables
        return {
            "m": self.m,
            "irreducible": list(self.p.exponents),
            "outputs": [
                {"wire": names.name(out), "position": i}
                for i, out, _ in self.output_order.entries
            ],
            "inputs": [
                {"wire": names.name(var), "position": i, "word": word}
                for i, pair in enumerate(self.input_map.pairs)
                for var, word in zip(pair, ("a", "b"))
            ],
            "verified": self.spec_check.equal,
            "ambiguity": str(self.word_ambiguity_note),
        }

    def render(self) -> str:
        names = self.variables
        report = {
            "netlist": self.name,
            "m": self.m,
            "polynomial": str(self.p),
            "outputs": [
                {"wire": names.name(out), "position": i} for i, out, _ in self.output_order.entries
            ],
            "pairs": [
                {"position": i, "a": names.name(a), "b": names.name(b)}
                for i, (a, b) in enumerate(self.input_map.pairs)
            ],
            "ambiguity": self.word_ambiguity_note,
            "verified": self.spec_check.equal,
        }
        return render_template("reveng_report.txt", report=report)


def _io_map(variables: Variables, assign: InFieldAssignment, inputs: InputPositionMap) -> IoMap:
    return IoMap(
        tuple(variables.name(v) for v in inputs.word_a),
        tuple(variables.name(v) for v in inputs.word_b),
        tuple(variables.name(v) for v in assign.order),
    )


def find_output_encoding(result: ExtractionResult) -> InFieldAssignment:
    """
    Assign each output the bit position given by the size of its unique-product core.

    Products of an in-field set s_i occur in output z_i only, while products
    of out-of-field sets always occur in two or more outputs. The output
    whose unique products number i + 1 is therefore bit i.
    """
    m = len(result.per_output)
    if m == 0:
        raise NoValidEncoding("The netlist has no outputs")

    counts: Counter[Monomial] = Counter()
    for out, poly in result.per_output:
        for mono in poly:
            if monomial_degree(mono) != 2:
                raise NoValidEncoding(
                    f"Output {result.variables.name(out)} has a term of degree "
                    f"{monomial_degree(mono)}; only products of two inputs are expected"
                )
        counts.update(poly.terms)

    by_size: dict[int, tuple[VarId, Polynomial]] = {}
    for out, poly in result.per_output:
        core = Polynomial(mono for mono in poly if counts[mono] == 1)
        size = len(core)
        if size in by_size or not 1 <= size <= m:
            raise NoValidEncoding(
                f"Unique-product set of size {size} at output {result.variables.name(out)} "
                f"does not fit a GF(2^{m}) multiplier"
            )
        by_size[size] = (out, core)

    entries = tuple((size - 1, *by_size[size]) for size in range(1, m + 1))
    logger.info(
        "Output order (LSB first): %s",
        " ".join(result.variables.name(out) for _, out, _ in entries),
    )
    return InFieldAssignment(entries)


def find_input_encoding(
    assign: InFieldAssignment, variables: Variables | None = None
) -> InputPositionMap:
    """
    Walk s_0, s_1, ... and give every variable first seen in s_i position i.

    Within a position the two variables belong to different words. The
    pair at position 0 is ordered by name; every later variable joins the
    word opposite to its partner at position 0.
    """

    def label(var: VarId) -> str:
        return variables.name(var) if variables is not None else f"#{var}"

    positions: dict[VarId, int] = {}
    words: dict[VarId, int] = {}
    pairs: list[tuple[VarId, VarId]] = []

    for i in range(assign.m):
        s_i = assign.product_set(i)
        support = set()
        for mono in s_i:
            support.update(iter_bits(mono))
        new = sorted(v for v in support if v not in positions)
        if len(new) != 2:
            raise InconsistentEncoding(
                f"s_{i} introduces {len(new)} new variables, expected 2"
            )
        for var in new:
            positions[var] = i

        for mono in s_i:
            u, v = iter_bits(mono)
            if positions[u] + positions[v] != i:
                raise InconsistentEncoding(
                    f"Product {label(u)}*{label(v)} in s_{i} joins positions "
                    f"{positions[u]} and {positions[v]}"
                )

        if i == 0:
            first, second = sorted(new, key=label)
            words[first], words[second] = 0, 1
        else:
            a0, b0 = pairs[0]
            for var in new:
                if monomial(var, a0) in s_i:
                    words[var] = 1
                elif monomial(var, b0) in s_i:
                    words[var] = 0
                else:
                    raise InconsistentEncoding(
                        f"{label(var)} has no partner at position 0 in s_{i}"
                    )
            if words[new[0]] == words[new[1]]:
                raise InconsistentEncoding(f"Both variables introduced by s_{i} belong to one word")

        a, b = sorted(new, key=lambda var: words[var])
        pairs.append((a, b))

    for i in range(assign.m):
        for mono in assign.product_set(i):
            u, v = iter_bits(mono)
            if words[u] == words[v]:
                raise InconsistentEncoding(
                    f"Product {label(u)}*{label(v)} in s_{i} multiplies two bits of the same word"
                )

    return InputPositionMap(positions, tuple(pairs))


def sm_candidates(
    result: ExtractionResult, inputs: InputPositionMap
) -> tuple[list[Monomial], list[Monomial]]:
    """
    Candidate products of s_m split into (present, dummy).

    Candidates are all products of two distinct inputs whose positions sum
    to m, same-word pairs included; dummies are those found in no output.
    """
    m = inputs.m
    present: set[Monomial] = set()
    for poly in result.polynomials:
        present.update(poly.terms)

    found, dummies = [], []
    for u, v in combinations(sorted(inputs.positions), 2):
        if inputs.positions[u] + inputs.positions[v] != m:
            continue
        mono = monomial(u, v)
        (found if mono in present else dummies).append(mono)
    return found, dummies


def _named(p: IrreduciblePoly) -> IrreduciblePoly:
    return IrreduciblePoly(p.m, p.tail_exponents, name=catalog_name(p) or "")


def recover_irreducible(
    result: ExtractionResult, assign: InFieldAssignment, inputs: InputPositionMap
) -> IrreduciblePoly:
    """
    P(x) = x^m + sum of x^i over the outputs z_i holding every product of s_m.
    """
    m = assign.m
    if m == 1:
        return _named(IrreduciblePoly(1, frozenset({0})))

    s_m, dummies = sm_candidates(result, inputs)
    names = result.variables
    if dummies:
        logger.info(
            "Dummy products: %s",
            ", ".join(Polynomial([mono]).format(names) for mono in dummies),
        )
    if not s_m:
        raise EmptySm(f"Every candidate product of s_{m} is absent from the outputs")
    if len(s_m) != m - 1:
        raise InconsistentEncoding(f"s_{m} has {len(s_m)} products, expected {m - 1}")

    tail = set()
    for i, out, _ in assign.entries:
        terms = result.polynomial(out).terms
        if all(mono in terms for mono in s_m):
            tail.add(i)

    if not tail:
        raise NotReducible(f"No output contains all of s_{m}")
    if 0 not in tail:
        raise NotReducible(
            f"s_{m} is missing from the LSB output, so P(x) would have no constant term"
        )

    p = _named(IrreduciblePoly(m, frozenset(tail)))
    logger.info("Recovered P(x) = %s", p)
    return p


def product_set_multiplicity(
    result: ExtractionResult, assign: InFieldAssignment, inputs: InputPositionMap, k: int
) -> int:
    """
    Number of outputs containing every product of the recovered s_k.
    """
    m = inputs.m
    if not 0 <= k <= 2 * m - 2:
        raise ValueError(f"k must lie in [0, {2 * m - 2}], got {k}")

    a, b = inputs.word_a, inputs.word_b
    s_k = [monomial(a[i], b[k - i]) for i in range(max(0, k - m + 1), min(k, m - 1) + 1)]
    count = 0
    for out in assign.order:
        terms = result.polynomial(out).terms
        if all(mono in terms for mono in s_k):
            count += 1
    return count


@contextmanager
def _stage(name: str) -> Iterator[None]:
    try:
        yield
    except GfError as e:
        if e.stage is None:
            e.stage = name
        raise


def reverse_engineer(
    netlist: Netlist,
    threads: int | None = None,
    *,
    term_ceiling: int | None = None,
    executor: str | None = None,
) -> RevengReport:
    with _stage("extraction"):
        result = extract_all(netlist, threads, term_ceiling=term_ceiling, executor=executor)
    with _stage("output-encoding"):
        assign = find_output_encoding(result)
    with _stage("input-encoding"):
        inputs = find_input_encoding(assign, netlist.variables)
        if len(inputs.positions) != len(netlist.primary_inputs):
            raise InconsistentEncoding(
                f"{len(netlist.primary_inputs) - len(inputs.positions)} primary inputs "
                "do not take part in any in-field product"
            )
    with _stage("irreducible"):
        p = recover_irreducible(result, assign, inputs)
    with _stage("verification"):
        io_map = _io_map(netlist.variables, assign, inputs)
        verdict = verify(netlist, assign.m, p, io_map, result=result)

    return RevengReport(
        name=netlist.name,
        variables=netlist.variables,
        output_order=assign,
        input_map=inputs,
        p=p,
        spec_check=verdict,
        word_ambiguity_note=2 ** (assign.m - 1),
    )
