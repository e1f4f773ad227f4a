"""
Name scrambling and single-gate mutations for the test harnesses.
"""

from __future__ import annotations

import logging
import random
import string

from faker import Faker

from gfextract.gates import GateType
from gfextract.gfpoly import Variables
from gfextract.netlist import Gate, Netlist
from gfextract.utils import exhaustive_vectors

logger = logging.getLogger(__name__)

# Replacement gate types for a type-swap mutation.
SWAPS = {
    GateType.XOR: (GateType.OR, GateType.AND),
    GateType.OR: (GateType.XOR,),
    GateType.AND: (GateType.XOR, GateType.OR),
    GateType.XNOR: (GateType.NOR,),
    GateType.NAND: (GateType.NOR, GateType.XOR),
    GateType.NOR: (GateType.NAND, GateType.XNOR),
}


def scramble(netlist: Netlist, seed: int) -> tuple[Netlist, dict[str, str]]:
    """
    Rename every wire to a random identifier and shuffle gates and ports.

    Returns the scrambled netlist and the old -> new name map. The same
    seed always produces the same netlist.
    """
    fake = Faker()
    fake.seed_instance(seed)
    rng = random.Random(seed)

    mapping = {}
    for name in netlist.variables:
        mapping[name] = fake.unique.lexify("??????", letters=string.ascii_lowercase)

    variables = Variables(mapping[name] for name in netlist.variables)
    inputs = list(netlist.primary_inputs)
    outputs = list(netlist.primary_outputs)
    gates = list(netlist.gates)
    rng.shuffle(inputs)
    rng.shuffle(outputs)
    rng.shuffle(gates)

    logger.debug("Scrambled %s with seed %d", netlist.name, seed)
    scrambled = Netlist(variables, inputs, outputs, gates, name=f"{netlist.name}_s{seed}")
    return scrambled, mapping


def inject_bug(netlist: Netlist, seed: int) -> tuple[Netlist, str]:
    """
    Apply one random mutation: swap a gate type, or rewire one gate input
    to a different primary input. Returns the mutant and a description.
    """
    rng = random.Random(seed)
    candidates = [i for i, gate in enumerate(netlist.gates) if gate.gtype in SWAPS]
    if not candidates:
        raise ValueError(f"{netlist.name} has no gate that can be mutated")

    index = rng.choice(candidates)
    gate = netlist.gates[index]
    label = netlist.wire(gate.output)

    others = [v for v in netlist.primary_inputs if v not in gate.inputs]
    if others and rng.random() < 0.5:
        slot = rng.randrange(len(gate.inputs))
        new_input = rng.choice(others)
        inputs = list(gate.inputs)
        old_input = inputs[slot]
        inputs[slot] = new_input
        mutant = Gate(gate.output, gate.gtype, tuple(inputs))
        description = (
            f"{label}: input {netlist.wire(old_input)} replaced by {netlist.wire(new_input)}"
        )
    else:
        gtype = rng.choice(SWAPS[gate.gtype])
        mutant = Gate(gate.output, gtype, gate.inputs)
        description = f"{label}: {gate.gtype.value} replaced by {gtype.value}"

    return netlist.replace_gate(index, mutant), description


def differs(first: Netlist, second: Netlist, seed: int = 0, patterns: int = 4096) -> bool:
    """
    Whether two netlists over the same ports compute different outputs.

    Small circuits are simulated exhaustively, larger ones on random patterns.
    """
    count = len(first.primary_inputs)
    if count <= 16:
        packed, mask = exhaustive_vectors(count)
    else:
        rng = random.Random(seed)
        mask = (1 << patterns) - 1
        packed = [rng.getrandbits(patterns) for _ in range(count)]

    vectors_a = dict(zip(first.primary_inputs, packed))
    vectors_b = {second.var(first.wire(var)): vec for var, vec in vectors_a.items()}
    outputs_a = dict(zip(first.output_names, first.simulate_outputs(vectors_a, mask)))
    outputs_b = dict(zip(second.output_names, second.simulate_outputs(vectors_b, mask)))
    return outputs_a != outputs_b
