"""
Gate-level netlists: parsing, validation, ordering and logic cones.

Two input formats are understood. The equation format is line oriented::

    # GF(2^2) multiplier
    inputs a0 a1 b0 b1
    outputs z0 z1
    i1 = NAND(a0, b0)
    z0 = XOR(i1, i2)

The Verilog subset is a single flattened module made of gate primitives
(and, or, xor, xnor, nand, nor, not, buf), the aoi21/oai21 cells, and
``assign`` statements that copy a wire or tie it to 1'b0/1'b1.
"""

from __future__ import annotations

import logging
import os
import re
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass

import networkx as nx

from gfextract.errors import (
    CombinationalCycle,
    MultipleDrivers,
    NetlistSyntaxError,
    NotAnOutput,
    UnboundVariable,
    UndeclaredWire,
    UnsupportedGate,
    UnsupportedVerilog,
)
from gfextract.gates import GateType
from gfextract.gfpoly import VarId, Variables
from gfextract.rendering import render_template

logger = logging.getLogger(__name__)

IDENTIFIER = r"[A-Za-z_][A-Za-z0-9_$]*(?:\[\d+\])?"


@dataclass(frozen=True)
class Gate:
    output: VarId
    gtype: GateType
    inputs: tuple[VarId, ...]


@dataclass(frozen=True)
class Cone:
    """
    The transitive fan-in of one output, in topological order.
    """

    output: VarId
    gates: tuple[Gate, ...]
    support: frozenset[VarId]

    def simulate(self, vectors: Mapping[VarId, int], mask: int) -> int:
        values = dict(vectors)
        for gate in self.gates:
            values[gate.output] = gate.gtype.simulate([values[v] for v in gate.inputs], mask)
        try:
            return values[self.output]
        except KeyError:
            raise UnboundVariable(self.output) from None


class Netlist:
    """
    A validated combinational circuit.

    Gates are kept in file order; ``topo_order`` lists them so that every
    gate comes after the gates driving its inputs.
    """

    def __init__(
        self,
        variables: Variables,
        primary_inputs: Sequence[VarId],
        primary_outputs: Sequence[VarId],
        gates: Sequence[Gate],
        name: str = "top",
        lines: Mapping[VarId, int] | None = None,
    ):
        self.variables = variables
        self.primary_inputs = tuple(primary_inputs)
        self.primary_outputs = tuple(primary_outputs)
        self.gates = tuple(gates)
        self.name = name

        lines = lines or {}
        inputs = set(self.primary_inputs)
        self.drivers: dict[VarId, Gate] = {}
        for gate in self.gates:
            if gate.output in self.drivers or gate.output in inputs:
                raise MultipleDrivers(
                    f"Wire {self.wire(gate.output)} has more than one driver"
                    + self._where(lines, gate.output)
                )
            self.drivers[gate.output] = gate

        if len(set(self.primary_inputs)) != len(self.primary_inputs):
            raise MultipleDrivers("Duplicate primary input declaration")
        if len(set(self.primary_outputs)) != len(self.primary_outputs):
            raise MultipleDrivers("Duplicate primary output declaration")

        for gate in self.gates:
            for var in gate.inputs:
                if var not in inputs and var not in self.drivers:
                    raise UndeclaredWire(
                        f"Wire {self.wire(var)} is used by {self.wire(gate.output)} "
                        f"but is neither a primary input nor driven by a gate"
                        + self._where(lines, gate.output)
                    )
        for var in self.primary_outputs:
            if var not in inputs and var not in self.drivers:
                raise UndeclaredWire(f"Primary output {self.wire(var)} is not driven")

        self.graph = nx.DiGraph()
        self.graph.add_nodes_from(self.primary_inputs)
        for gate in self.gates:
            self.graph.add_node(gate.output)
            for var in gate.inputs:
                self.graph.add_edge(var, gate.output)

        self.topo_order = topological_sort(self)
        self.topo_index = {gate.output: i for i, gate in enumerate(self.topo_order)}

        unreachable = self.unreachable_gates()
        if unreachable:
            logger.warning(
                "%d gate(s) do not reach any primary output and are excluded from extraction: %s",
                len(unreachable),
                ", ".join(self.wire(gate.output) for gate in unreachable[:10]),
            )

    @staticmethod
    def _where(lines: Mapping[VarId, int], var: VarId) -> str:
        line = lines.get(var)
        return f" (line {line})" if line is not None else ""

    def wire(self, var: VarId) -> str:
        return self.variables.name(var)

    def var(self, name: str) -> VarId:
        return self.variables.id(name)

    @property
    def input_names(self) -> list[str]:
        return [self.wire(v) for v in self.primary_inputs]

    @property
    def output_names(self) -> list[str]:
        return [self.wire(v) for v in self.primary_outputs]

    def __len__(self) -> int:
        return len(self.gates)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Netlist):
            return NotImplemented
        return (
            self.input_names == other.input_names
            and self.output_names == other.output_names
            and self.named_gates() == other.named_gates()
        )

    def __repr__(self) -> str:
        return (
            f"<Netlist {self.name}: {len(self.primary_inputs)} inputs, "
            f"{len(self.primary_outputs)} outputs, {len(self.gates)} gates>"
        )

    def named_gates(self) -> list[tuple[str, str, tuple[str, ...]]]:
        return [
            (self.wire(g.output), g.gtype.value, tuple(self.wire(v) for v in g.inputs))
            for g in self.gates
        ]

    def extract_cone(self, out: VarId) -> Cone:
        if out not in self.primary_outputs:
            raise NotAnOutput(f"{self.wire(out)} is not a primary output")

        fanin = nx.ancestors(self.graph, out)
        fanin.add(out)
        gates = sorted(
            (self.drivers[v] for v in fanin if v in self.drivers),
            key=lambda gate: self.topo_index[gate.output],
        )
        support = frozenset(v for v in fanin if v not in self.drivers)
        return Cone(out, tuple(gates), support)

    def cones(self) -> list[Cone]:
        return [self.extract_cone(out) for out in self.primary_outputs]

    def unreachable_gates(self) -> list[Gate]:
        reachable: set[VarId] = set(self.primary_outputs)
        for out in self.primary_outputs:
            reachable |= nx.ancestors(self.graph, out)
        return [gate for gate in self.gates if gate.output not in reachable]

    def simulate(self, vectors: Mapping[VarId, int], mask: int) -> dict[VarId, int]:
        """
        Bit-parallel simulation; returns the packed value of every wire.
        """
        values: dict[VarId, int] = {}
        for var in self.primary_inputs:
            try:
                values[var] = vectors[var] & mask
            except KeyError:
                raise UnboundVariable(var, self.wire(var)) from None
        for gate in self.topo_order:
            values[gate.output] = gate.gtype.simulate([values[v] for v in gate.inputs], mask)
        return values

    def simulate_outputs(self, vectors: Mapping[VarId, int], mask: int) -> list[int]:
        values = self.simulate(vectors, mask)
        return [values[out] for out in self.primary_outputs]

    def renamed(self, mapping: Mapping[str, str], order: Sequence[int] | None = None) -> Netlist:
        """
        Copy of the netlist with wires renamed and gate lines optionally reordered.
        """
        variables = Variables()
        for name in self.variables:
            variables.add(mapping.get(name, name))

        gates = self.gates if order is None else [self.gates[i] for i in order]
        return Netlist(variables, self.primary_inputs, self.primary_outputs, gates, self.name)

    def replace_gate(self, index: int, gate: Gate) -> Netlist:
        gates = list(self.gates)
        gates[index] = gate
        return Netlist(self.variables, self.primary_inputs, self.primary_outputs, gates, self.name)


def topological_sort(netlist: Netlist) -> list[Gate]:
    """
    Kahn ordering of the gates, ties broken by ascending output id.
    """
    graph = nx.DiGraph()
    graph.add_nodes_from(netlist.drivers)
    for gate in netlist.gates:
        for var in gate.inputs:
            if var in netlist.drivers:
                graph.add_edge(var, gate.output)

    try:
        order = list(nx.lexicographical_topological_sort(graph))
    except nx.NetworkXUnfeasible:
        edges = nx.find_cycle(graph)
        raise CombinationalCycle([netlist.wire(u) for u, _ in edges]) from None

    return [netlist.drivers[v] for v in order]


def extract_cone(netlist: Netlist, out: VarId) -> Cone:
    return netlist.extract_cone(out)


# Equation format

_token_re = re.compile(rf"\s*(?:(?P<id>{IDENTIFIER})|(?P<op>[=(),])|(?P<bad>\S))")


def _tokenize(text: str, lineno: int) -> list[tuple[str, str, int]]:
    tokens = []
    for match in _token_re.finditer(text):
        kind = match.lastgroup
        if kind is None:
            continue
        value = match.group(kind)
        column = match.start(kind) + 1
        if kind == "bad":
            raise NetlistSyntaxError(f"unexpected character {value!r}", lineno, column)
        tokens.append((kind, value, column))
    return tokens


def parse_equations(text: str, name: str = "top") -> Netlist:
    variables = Variables()
    inputs: list[VarId] = []
    outputs: list[VarId] = []
    gates: list[Gate] = []
    lines: dict[VarId, int] = {}

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue

        tokens = _tokenize(line, lineno)
        kind, value, column = tokens[0]
        if kind == "id" and value in ("inputs", "outputs"):
            target = inputs if value == "inputs" else outputs
            for kind, wire, column in tokens[1:]:
                if kind != "id":
                    raise NetlistSyntaxError(f"expected a wire name, got {wire!r}", lineno, column)
                target.append(variables.intern(wire))
            continue

        gates.append(_parse_gate_line(tokens, lineno, len(line), variables, lines))

    return Netlist(variables, inputs, outputs, gates, name=name, lines=lines)


def _parse_gate_line(
    tokens: list[tuple[str, str, int]],
    lineno: int,
    length: int,
    variables: Variables,
    lines: dict[VarId, int],
) -> Gate:
    def expect(pos: int, kind: str, value: str | None = None) -> str:
        if pos >= len(tokens):
            raise NetlistSyntaxError("unexpected end of line", lineno, length + 1)
        tkind, tvalue, tcolumn = tokens[pos]
        if tkind != kind or (value is not None and tvalue != value):
            wanted = repr(value) if value else "a name"
            raise NetlistSyntaxError(f"expected {wanted}, got {tvalue!r}", lineno, tcolumn)
        return tvalue

    out_name = expect(0, "id")
    expect(1, "op", "=")
    cell = expect(2, "id")
    expect(3, "op", "(")

    args: list[str] = []
    pos = 4
    if pos < len(tokens) and tokens[pos][1] == ")":
        pos += 1
    else:
        while True:
            args.append(expect(pos, "id"))
            if pos + 1 < len(tokens) and tokens[pos + 1][1] == ",":
                pos += 2
                continue
            expect(pos + 1, "op", ")")
            pos += 2
            break

    if pos != len(tokens):
        raise NetlistSyntaxError(f"trailing input {tokens[pos][1]!r}", lineno, tokens[pos][2])

    try:
        gtype = GateType.lookup(cell)
    except UnsupportedGate:
        raise NetlistSyntaxError(f"unsupported gate type {cell!r}", lineno, tokens[2][2]) from None
    if len(args) != gtype.arity:
        raise NetlistSyntaxError(
            f"{gtype.value} expects {gtype.arity} inputs, got {len(args)}", lineno, tokens[3][2]
        )

    output = variables.intern(out_name)
    if output in lines:
        raise MultipleDrivers(
            f"Wire {out_name} is driven on line {lines[output]} and again on line {lineno}"
        )
    lines[output] = lineno
    return Gate(output, gtype, tuple(variables.intern(arg) for arg in args))


def format_equations(netlist: Netlist) -> str:
    return render_template("netlist.eqn", netlist=netlist, gates=netlist.named_gates())


# Verilog subset

VERILOG_PRIMITIVES = {
    "and": GateType.AND,
    "or": GateType.OR,
    "xor": GateType.XOR,
    "xnor": GateType.XNOR,
    "nand": GateType.NAND,
    "nor": GateType.NOR,
    "not": GateType.NOT,
    "buf": GateType.BUF,
    "aoi21": GateType.AOI21,
    "oai21": GateType.OAI21,
}

_comment_re = re.compile(r"//[^\n]*|/\*.*?\*/", re.DOTALL)
_module_re = re.compile(r"\bmodule\s+(\w+)\s*(?:\((.*?)\))?\s*;", re.DOTALL)
_decl_re = re.compile(
    r"^(input|output|wire)\b\s*(?:\[\s*(\d+)\s*:\s*(\d+)\s*\])?\s*(.*)$", re.DOTALL
)
_instance_re = re.compile(r"^(\w+)\s*(?:([A-Za-z_][\w$]*)\s*)?\((.*)\)$", re.DOTALL)
_assign_re = re.compile(rf"^assign\s+({IDENTIFIER})\s*=\s*(1'b[01]|{IDENTIFIER})$")
_name_re = re.compile(rf"^{IDENTIFIER}$")
_keyword_re = re.compile(r"^\s*(\w+)")

_UNSUPPORTED_KEYWORDS = (
    "always",
    "initial",
    "reg",
    "parameter",
    "localparam",
    "generate",
    "function",
    "task",
    "inout",
    "bufif0",
    "bufif1",
    "notif0",
    "notif1",
    "supply0",
    "supply1",
    "tri",
)


class _VerilogModule:
    def __init__(self, text: str):
        self.text = text
        self.variables = Variables()
        self.inputs: list[VarId] = []
        self.outputs: list[VarId] = []
        self.declared: set[str] = set()
        self.buses: dict[str, tuple[int, int]] = {}
        self.gates: list[Gate] = []
        self.name = "top"

    def line_of(self, offset: int) -> int:
        return self.text.count("\n", 0, offset) + 1

    def declare(self, direction: str, msb: str | None, lsb: str | None, names: str, line: int):
        for raw in names.split(","):
            base = raw.strip()
            if not base:
                continue
            if not re.fullmatch(r"[A-Za-z_][\w$]*", base):
                raise NetlistSyntaxError(f"bad declaration {base!r}", line, 1)

            if msb is None:
                wires = [base]
            else:
                hi, lo = int(msb), int(lsb or 0)
                lo, hi = min(lo, hi), max(lo, hi)
                self.buses[base] = (lo, hi)
                wires = [f"{base}[{i}]" for i in range(lo, hi + 1)]

            for wire in wires:
                var = self.variables.intern(wire)
                self.declared.add(wire)
                if direction == "input":
                    self.inputs.append(var)
                elif direction == "output":
                    self.outputs.append(var)

    def reference(self, name: str, line: int) -> VarId:
        name = name.strip()
        if not _name_re.match(name):
            raise UnsupportedVerilog(name, line)
        if name in self.buses:
            raise UnsupportedVerilog(f"{name} (whole-bus connection)", line)
        if name not in self.declared:
            raise UndeclaredWire(f"Wire {name} is used on line {line} but never declared")
        return self.variables.id(name)

    def parse(self) -> Netlist:
        text = _comment_re.sub(lambda m: "\n" * m.group(0).count("\n"), self.text)
        self.text = text

        modules = list(_module_re.finditer(text))
        if not modules:
            raise NetlistSyntaxError("no module declaration found", 1, 1)
        if len(modules) > 1:
            raise UnsupportedVerilog("module", self.line_of(modules[1].start()))

        header = modules[0]
        self.name = header.group(1)
        end = text.find("endmodule", header.end())
        if end < 0:
            raise NetlistSyntaxError("missing endmodule", self.line_of(len(text)), 1)

        ports = header.group(2) or ""
        if re.search(r"\b(input|output)\b", ports):
            self.parse_ansi_ports(ports, self.line_of(header.start()))

        body_start = header.end()
        for match in re.finditer(r"[^;]*;", text[body_start:end]):
            statement = " ".join(match.group(0)[:-1].split())
            if statement:
                self.parse_statement(statement, self.line_of(body_start + match.start()))

        return Netlist(self.variables, self.inputs, self.outputs, self.gates, name=self.name)

    def parse_ansi_ports(self, ports: str, line: int) -> None:
        direction = None
        rng: tuple[str | None, str | None] = (None, None)
        for item in ports.split(","):
            match = _decl_re.match(item.strip())
            if match:
                direction = match.group(1)
                rng = (match.group(2), match.group(3))
                self.declare(direction, rng[0], rng[1], match.group(4), line)
            elif direction is not None:
                self.declare(direction, rng[0], rng[1], item, line)
            else:
                raise UnsupportedVerilog(item.strip(), line)

    def parse_statement(self, statement: str, line: int) -> None:
        match = _keyword_re.match(statement)
        keyword = match.group(1) if match else ""

        if keyword in _UNSUPPORTED_KEYWORDS:
            raise UnsupportedVerilog(keyword, line)

        match = _decl_re.match(statement)
        if match:
            self.declare(match.group(1), match.group(2), match.group(3), match.group(4), line)
            return

        if keyword == "assign":
            match = _assign_re.match(statement)
            if not match:
                raise UnsupportedVerilog(statement, line)
            lhs, rhs = match.groups()
            output = self.reference(lhs, line)
            if rhs.startswith("1'b"):
                gtype = GateType.CONST1 if rhs.endswith("1") else GateType.CONST0
                self.gates.append(Gate(output, gtype, ()))
            else:
                self.gates.append(Gate(output, GateType.BUF, (self.reference(rhs, line),)))
            return

        match = _instance_re.match(statement)
        if not match:
            raise NetlistSyntaxError(f"cannot parse statement {statement!r}", line, 1)

        cell, _, args = match.groups()
        gtype = VERILOG_PRIMITIVES.get(cell)
        if gtype is None:
            raise UnsupportedVerilog(cell, line)

        ports = [arg.strip() for arg in args.split(",")]
        if any(port.startswith(".") for port in ports):
            raise UnsupportedVerilog("named port connection", line)
        if len(ports) != gtype.arity + 1:
            raise UnsupportedVerilog(f"{cell} with {len(ports) - 1} inputs", line)

        output = self.reference(ports[0], line)
        inputs = tuple(self.reference(port, line) for port in ports[1:])
        self.gates.append(Gate(output, gtype, inputs))


def parse_structural_verilog(text: str) -> Netlist:
    return _VerilogModule(text).parse()


_bus_re = re.compile(r"^(.+)\[(\d+)\]$")


def _declarations(names: Iterable[str]) -> list[tuple[str, str]]:
    """
    Group ``name[i]`` wires into ranged declarations, keeping first-seen order.
    """
    decls: list[tuple[str, str]] = []
    buses: dict[str, list[int]] = {}
    for name in names:
        match = _bus_re.match(name)
        if match is None:
            decls.append(("", name))
            continue
        base, index = match.group(1), int(match.group(2))
        if base not in buses:
            buses[base] = []
            decls.append(("bus", base))
        buses[base].append(index)

    result = []
    for kind, name in decls:
        if kind == "bus":
            indices = buses[name]
            lo, hi = min(indices), max(indices)
            if sorted(indices) != list(range(lo, hi + 1)):
                raise ValueError(f"Bus {name} has non-contiguous bits {sorted(indices)}")
            result.append((f"[{hi}:{lo}] ", name))
        else:
            result.append(("", name))
    return result


def _module_name(name: str) -> str:
    name = re.sub(r"\W", "_", name)
    if not name or name[0].isdigit():
        name = "m_" + name
    return name


def format_verilog(netlist: Netlist) -> str:
    ports = set(netlist.primary_inputs) | set(netlist.primary_outputs)
    wires = [netlist.wire(g.output) for g in netlist.gates if g.output not in ports]

    instances = []
    primitive_names = {gtype: cell for cell, gtype in VERILOG_PRIMITIVES.items()}
    for n, (out, gtype, ins) in enumerate(netlist.named_gates()):
        if gtype in ("CONST0", "CONST1"):
            instances.append(("assign", out, "1'b1" if gtype == "CONST1" else "1'b0"))
        else:
            cell = primitive_names[GateType(gtype)]
            instances.append((cell, f"g{n}", ", ".join((out, *ins))))

    port_names = []
    for _, name in _declarations(netlist.input_names + netlist.output_names):
        if name not in port_names:
            port_names.append(name)

    return render_template(
        "netlist.v",
        netlist=netlist,
        module_name=_module_name(netlist.name),
        ports=port_names,
        inputs=_declarations(netlist.input_names),
        outputs=_declarations(netlist.output_names),
        wires=_declarations(wires),
        instances=instances,
    )


def load_netlist(path: str, fmt: str | None = None) -> Netlist:
    """
    Read a netlist file, choosing the parser from ``fmt`` or the file suffix.
    """
    with open(path, "rb") as fp:
        data = fp.read()
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as e:
        line = data.count(b"\n", 0, e.start) + 1
        column = e.start - data.rfind(b"\n", 0, e.start)
        raise NetlistSyntaxError("netlist is not valid UTF-8", line, column) from e

    if fmt is None:
        fmt = "verilog" if path.endswith(".v") else "equations"

    name = os.path.splitext(os.path.basename(path))[0]
    if fmt == "verilog":
        netlist = parse_structural_verilog(text)
    elif fmt == "equations":
        netlist = parse_equations(text, name=name)
    else:
        raise ValueError(f"Unknown netlist format {fmt!r}")

    logger.info("Parsed %s: %r", path, netlist)
    return netlist
