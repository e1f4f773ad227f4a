import pytest

from gfextract import init_db
from gfextract.netlist import parse_equations

# Two-bit multiplier built from NAND gates, modulo x^2 + x + 1.
NAND2_NETLIST = """\
inputs a0 a1 b0 b1
outputs z0 z1
i1 = NAND(a0, b0)
i2 = NAND(a1, b1)
i3 = NAND(a1, b0)
i4 = NAND(a0, b1)
i5 = NOT(i2)
i6 = XOR(i3, i4)
z0 = XOR(i1, i2)
z1 = XOR(i5, i6)
"""


@pytest.fixture(autouse=True)
def db():
    return init_db(":memory:")


@pytest.fixture()
def nand2_text():
    return NAND2_NETLIST


@pytest.fixture()
def nand2(nand2_text):
    return parse_equations(nand2_text, name="nand2")


@pytest.fixture()
def netlist_dir(tmp_path):
    path = tmp_path / "netlists"
    path.mkdir()
    return path
