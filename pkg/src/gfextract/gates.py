"""
Gate types understood by the toolkit and their Boolean semantics.
"""

from __future__ import annotations

import enum

from gfextract.errors import UnsupportedGate


class GateType(enum.Enum):
    AND = "AND"
    OR = "OR"
    XOR = "XOR"
    XNOR = "XNOR"
    NAND = "NAND"
    NOR = "NOR"
    NOT = "NOT"
    BUF = "BUF"
    AOI21 = "AOI21"
    OAI21 = "OAI21"
    CONST0 = "CONST0"
    CONST1 = "CONST1"

    @property
    def arity(self) -> int:
        return _ARITY.get(self, 2)

    @classmethod
    def lookup(cls, name: str) -> GateType:
        """
        Resolve a cell name, case-insensitively, raising UnsupportedGate.
        """
        key = name.upper()
        key = _ALIASES.get(key, key)
        try:
            return cls(key)
        except ValueError:
            raise UnsupportedGate(name) from None

    def simulate(self, inputs: list[int], mask: int) -> int:
        """
        Evaluate the gate bit-parallel over packed input vectors.

        Each input is an integer whose bits are independent input patterns;
        ``mask`` has one set bit per pattern.
        """
        if len(inputs) != self.arity:
            raise ValueError(f"{self.value} expects {self.arity} inputs, got {len(inputs)}")

        if self is GateType.CONST0:
            return 0
        if self is GateType.CONST1:
            return mask
        if self is GateType.BUF:
            return inputs[0]
        if self is GateType.NOT:
            return inputs[0] ^ mask
        if self is GateType.AOI21:
            a, b, c = inputs
            return ((a & b) | c) ^ mask
        if self is GateType.OAI21:
            a, b, c = inputs
            return ((a | b) & c) ^ mask

        a, b = inputs
        if self is GateType.AND:
            return a & b
        if self is GateType.OR:
            return a | b
        if self is GateType.XOR:
            return a ^ b
        if self is GateType.XNOR:
            return a ^ b ^ mask
        if self is GateType.NAND:
            return (a & b) ^ mask
        if self is GateType.NOR:
            return (a | b) ^ mask
        raise UnsupportedGate(self.value)


_ARITY = {
    GateType.NOT: 1,
    GateType.BUF: 1,
    GateType.AOI21: 3,
    GateType.OAI21: 3,
    GateType.CONST0: 0,
    GateType.CONST1: 0,
}

_ALIASES = {
    "INV": "NOT",
    "BUFF": "BUF",
}
