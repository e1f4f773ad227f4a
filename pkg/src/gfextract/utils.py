import re
from collections.abc import Iterator

_chunk_re = re.compile(r"(\d+)")


def natural_key(name: str) -> tuple:
    """
    Sort key that orders wire names the way a designer reads them.

    "a2" sorts before "a10", and "z[3]" before "z[12]".
    """
    parts = _chunk_re.split(name)
    return tuple(int(part) if part.isdigit() else part for part in parts)


def iter_bits(mask: int) -> Iterator[int]:
    """
    Yield the positions of the set bits of ``mask``, lowest first.
    """
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def format_exponents(exponents) -> str:
    return ",".join(str(e) for e in sorted(exponents, reverse=True))


def ordinal_format(value) -> str:
    # https://stackoverflow.com/a/50992575
    n = int(value)
    suffix = ["th", "st", "nd", "rd", "th"][min(n % 10, 4)]
    if 11 <= (n % 100) <= 13:
        suffix = "th"
    return str(n) + suffix


def exhaustive_vectors(count: int) -> tuple[list[int], int]:
    """
    Packed input vectors enumerating all 2^count patterns.

    Bit p of vector j is bit j of the pattern number p. Returns the vectors
    and the mask with one bit per pattern.
    """
    size = 1 << count
    vectors = []
    for j in range(count):
        half = 1 << j
        vector = ((1 << half) - 1) << half
        width = half << 1
        while width < size:
            vector |= vector << width
            width <<= 1
        vectors.append(vector)
    return vectors, (1 << size) - 1
