"""
Polynomials over GF(2) in Boolean variables.

A monomial is a bitset over variable ids (bit ``v`` set means the variable
with id ``v`` occurs in the product). Because x*x = x for Boolean variables,
multiplying two monomials is a bitwise OR, and because coefficients live in
GF(2), adding two polynomials is the symmetric difference of their term sets.
The integer 0 is the constant monomial 1.
"""

from __future__ import annotations

from collections.abc import Callable, Iterable, Iterator, Mapping, Sequence

from gfextract.errors import CyclicSubstitution, UnboundVariable, UnsupportedGate
from gfextract.gates import GateType
from gfextract.utils import iter_bits, natural_key

VarId = int
Monomial = int

ONE: Monomial = 0


def monomial(*var_ids: VarId) -> Monomial:
    mask = 0
    for v in var_ids:
        if v < 0:
            raise ValueError(f"Variable ids are non-negative, got {v}")
        mask |= 1 << v
    return mask


def monomial_vars(mono: Monomial) -> list[VarId]:
    return list(iter_bits(mono))


def monomial_degree(mono: Monomial) -> int:
    return bin(mono).count("1")


class Variables:
    """
    Bijection between wire names and dense integer variable ids.

    Ids are handed out in first-seen order.
    """

    def __init__(self, names: Iterable[str] = ()):
        self._names: list[str] = []
        self._ids: dict[str, VarId] = {}
        for name in names:
            self.add(name)

    def add(self, name: str) -> VarId:
        if name in self._ids:
            raise ValueError(f"Variable {name!r} is already defined")
        return self.intern(name)

    def intern(self, name: str) -> VarId:
        var = self._ids.get(name)
        if var is None:
            var = len(self._names)
            self._names.append(name)
            self._ids[name] = var
        return var

    def fresh(self, prefix: str) -> VarId:
        """
        Create a variable whose name does not clash with any existing one.
        """
        n = 0
        while f"{prefix}{n}" in self._ids:
            n += 1
        return self.add(f"{prefix}{n}")

    def id(self, name: str) -> VarId:
        return self._ids[name]

    def name(self, var: VarId) -> str:
        return self._names[var]

    @property
    def names(self) -> Sequence[str]:
        return self._names

    def copy(self) -> Variables:
        return Variables(self._names)

    def __contains__(self, name: object) -> bool:
        return name in self._ids

    def __len__(self) -> int:
        return len(self._names)

    def __iter__(self) -> Iterator[str]:
        return iter(self._names)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Variables):
            return NotImplemented
        return self._names == other._names

    def __repr__(self) -> str:
        return f"<Variables {len(self)} names>"


def _xor_into(terms: set[Monomial], mono: Monomial) -> None:
    if mono in terms:
        terms.remove(mono)
    else:
        terms.add(mono)


class Polynomial:
    """
    An immutable GF(2) polynomial: a set of monomials, each with coefficient 1.
    """

    __slots__ = ("terms",)

    terms: frozenset[Monomial]

    def __init__(self, terms: Iterable[Monomial] = ()):
        reduced: set[Monomial] = set()
        for mono in terms:
            _xor_into(reduced, mono)
        object.__setattr__(self, "terms", frozenset(reduced))

    @classmethod
    def _wrap(cls, terms: frozenset[Monomial]) -> Polynomial:
        poly = cls.__new__(cls)
        object.__setattr__(poly, "terms", terms)
        return poly

    @classmethod
    def zero(cls) -> Polynomial:
        return cls._wrap(frozenset())

    @classmethod
    def one(cls) -> Polynomial:
        return cls._wrap(frozenset([ONE]))

    @classmethod
    def variable(cls, var: VarId) -> Polynomial:
        return cls._wrap(frozenset([monomial(var)]))

    @classmethod
    def product(cls, *var_ids: VarId) -> Polynomial:
        return cls._wrap(frozenset([monomial(*var_ids)]))

    def __setattr__(self, key, value):
        raise AttributeError("Polynomial is immutable")

    def __add__(self, other: Polynomial) -> Polynomial:
        return Polynomial._wrap(self.terms ^ other.terms)

    __sub__ = __add__

    def __mul__(self, other: Polynomial) -> Polynomial:
        result: set[Monomial] = set()
        for a in self.terms:
            for b in other.terms:
                _xor_into(result, a | b)
        return Polynomial._wrap(frozenset(result))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self) -> int:
        return hash(self.terms)

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __len__(self) -> int:
        return len(self.terms)

    def __iter__(self) -> Iterator[Monomial]:
        return iter(self.terms)

    def __contains__(self, mono: object) -> bool:
        return mono in self.terms

    def __reduce__(self):
        return (Polynomial, (tuple(self.terms),))

    def __repr__(self) -> str:
        return f"<Polynomial {len(self.terms)} terms>"

    def variables(self) -> int:
        """
        Bitset of every variable occurring in the polynomial.
        """
        mask = 0
        for mono in self.terms:
            mask |= mono
        return mask

    def degree(self) -> int:
        return max((monomial_degree(mono) for mono in self.terms), default=0)

    def substitute(self, var: VarId, replacement: Polynomial) -> Polynomial:
        expr = Expression(self)
        expr.substitute(var, replacement)
        return expr.freeze()

    def evaluate(self, assignment: Mapping[VarId, int]) -> int:
        ones = 0
        known = 0
        for var, value in assignment.items():
            known |= 1 << var
            if value:
                ones |= 1 << var

        missing = self.variables() & ~known
        if missing:
            raise UnboundVariable(next(iter_bits(missing)))

        result = 0
        for mono in self.terms:
            if mono & ones == mono:
                result ^= 1
        return result

    def evaluate_packed(self, vectors: Mapping[VarId, int], mask: int) -> int:
        """
        Evaluate over many assignments at once.

        ``vectors[v]`` packs the values of variable ``v`` for every pattern,
        one bit per pattern; ``mask`` has a bit set for each pattern.
        """
        result = 0
        for mono in self.terms:
            acc = mask
            for var in iter_bits(mono):
                try:
                    acc &= vectors[var]
                except KeyError:
                    raise UnboundVariable(var) from None
            result ^= acc
        return result

    def remap(self, mapping: Mapping[VarId, VarId]) -> Polynomial:
        """
        Rename variables; every variable of the polynomial must be mapped.
        """
        terms = []
        for mono in self.terms:
            new = 0
            for var in iter_bits(mono):
                try:
                    new |= 1 << mapping[var]
                except KeyError:
                    raise UnboundVariable(var) from None
            terms.append(new)
        return Polynomial(terms)

    def sorted_terms(self, names: Sequence[str]) -> list[Monomial]:
        def key(mono: Monomial) -> tuple:
            labels = sorted((names[v] for v in iter_bits(mono)), key=natural_key)
            return monomial_degree(mono), [natural_key(label) for label in labels]

        return sorted(self.terms, key=key)

    def format(self, names: Sequence[str] | Variables) -> str:
        """
        Canonical text form, e.g. "a0*b0+a1*b1".

        Terms are ordered by degree, then by their variable names.
        """
        if isinstance(names, Variables):
            names = names.names
        if not self.terms:
            return "0"

        parts = []
        for mono in self.sorted_terms(names):
            if mono == ONE:
                parts.append("1")
            else:
                labels = sorted((names[v] for v in iter_bits(mono)), key=natural_key)
                parts.append("*".join(labels))
        return "+".join(parts)

    @classmethod
    def parse(cls, text: str, variables: Variables) -> Polynomial:
        """
        Read the canonical text form back, interning unknown names.
        """
        text = "".join(text.split())
        if text == "0":
            return cls.zero()

        terms = []
        for term in text.split("+"):
            if not term:
                raise ValueError(f"Empty term in polynomial {text!r}")
            if term == "1":
                terms.append(ONE)
            else:
                terms.append(monomial(*(variables.intern(name) for name in term.split("*"))))
        return cls(terms)


class Expression:
    """
    Mutable polynomial used while rewriting.

    Besides the term set it keeps a substitution index: for each variable,
    the monomials that contain it. Substituting a variable then touches only
    the monomials that actually contain it.
    """

    def __init__(self, poly: Polynomial | None = None):
        self.terms: set[Monomial] = set()
        self.index: dict[VarId, set[Monomial]] = {}
        self.eliminated = 0
        if poly is not None:
            self.add(poly)

    def __len__(self) -> int:
        return len(self.terms)

    def __contains__(self, var: object) -> bool:
        return var in self.index

    def toggle(self, mono: Monomial) -> bool:
        """
        Add a monomial mod 2. Returns False when it cancelled an existing one.
        """
        if mono in self.terms:
            self.terms.remove(mono)
            for var in iter_bits(mono):
                self._unindex(var, mono)
            return False

        self.terms.add(mono)
        for var in iter_bits(mono):
            self.index.setdefault(var, set()).add(mono)
        return True

    def _unindex(self, var: VarId, mono: Monomial) -> None:
        bucket = self.index[var]
        bucket.discard(mono)
        if not bucket:
            del self.index[var]

    def add(self, poly: Polynomial) -> None:
        for mono in poly.terms:
            if not self.toggle(mono):
                self.eliminated += 1

    def substitute(self, var: VarId, replacement: Polynomial) -> int:
        """
        Replace ``var`` by ``replacement`` in place.

        Returns the number of monomials cancelled mod 2 by this step.
        """
        bit = 1 << var
        if replacement.variables() & bit:
            raise CyclicSubstitution(f"Variable #{var} occurs in its own replacement")

        affected = self.index.pop(var, None)
        if not affected:
            return 0

        for mono in affected:
            self.terms.remove(mono)
            for other in iter_bits(mono ^ bit):
                self._unindex(other, mono)

        cancelled = 0
        for mono in affected:
            base = mono ^ bit
            for term in replacement.terms:
                if not self.toggle(base | term):
                    cancelled += 1

        self.eliminated += cancelled
        return cancelled

    def freeze(self) -> Polynomial:
        return Polynomial._wrap(frozenset(self.terms))

    def rebuild_index(self) -> dict[VarId, set[Monomial]]:
        index: dict[VarId, set[Monomial]] = {}
        for mono in self.terms:
            for var in iter_bits(mono):
                index.setdefault(var, set()).add(mono)
        return index

    def index_is_consistent(self) -> bool:
        return self.index == self.rebuild_index()


def poly_add(p: Polynomial, q: Polynomial) -> Polynomial:
    return p + q


def poly_mul(p: Polynomial, q: Polynomial) -> Polynomial:
    return p * q


def substitute(f: Polynomial, var: VarId, g: Polynomial) -> Polynomial:
    return f.substitute(var, g)


def evaluate(f: Polynomial, assignment: Mapping[VarId, int]) -> int:
    return f.evaluate(assignment)


def _not(a: Polynomial) -> Polynomial:
    return Polynomial.one() + a


def _and(a: Polynomial, b: Polynomial) -> Polynomial:
    return a * b


def _or(a: Polynomial, b: Polynomial) -> Polynomial:
    return a + b + a * b


def _xor(a: Polynomial, b: Polynomial) -> Polynomial:
    return a + b


GATE_MODELS: dict[GateType, Callable[..., Polynomial]] = {
    GateType.CONST0: lambda: Polynomial.zero(),
    GateType.CONST1: lambda: Polynomial.one(),
    GateType.BUF: lambda a: a,
    GateType.NOT: _not,
    GateType.AND: _and,
    GateType.OR: _or,
    GateType.XOR: _xor,
    GateType.XNOR: lambda a, b: _not(_xor(a, b)),
    GateType.NAND: lambda a, b: _not(_and(a, b)),
    GateType.NOR: lambda a, b: _not(_or(a, b)),
    GateType.AOI21: lambda a, b, c: _not(_or(_and(a, b), c)),
    GateType.OAI21: lambda a, b, c: _not(_and(_or(a, b), c)),
}


def gate_polynomial(gate_type: GateType | str, inputs: Sequence[Polynomial]) -> Polynomial:
    """
    The GF(2) polynomial of a gate output in terms of its input polynomials.
    """
    if not isinstance(gate_type, GateType):
        gate_type = GateType.lookup(gate_type)

    model = GATE_MODELS.get(gate_type)
    if model is None:
        raise UnsupportedGate(gate_type.value)

    if len(inputs) != gate_type.arity:
        raise ValueError(
            f"{gate_type.value} expects {gate_type.arity} inputs, got {len(inputs)}"
        )
    return model(*inputs)
