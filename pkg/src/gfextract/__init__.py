from gfextract.gfpoly import Polynomial, Variables  # noqa
from gfextract.models import init_db  # noqa
from gfextract.netlist import Netlist, parse_equations, parse_structural_verilog  # noqa
from gfextract.specgen import IrreduciblePoly  # noqa

__version__ = "0.1.0"
