#!/usr/bin/env python3
"""
Inject single-gate bugs into a generated multiplier and check that
verification flags exactly the mutants that simulation tells apart.
"""
import argparse

from gfextract.extract import verify
from gfextract.scramble import differs, inject_bug
from gfextract.specgen import generate_mastrovito, lookup, wire_names

parser = argparse.ArgumentParser()
parser.add_argument("m", type=int)
parser.add_argument("--polynomial")
parser.add_argument("--count", type=int, default=100)
parser.add_argument("--threads", type=int, default=1)
args = parser.parse_args()

p = lookup(args.m, args.polynomial)
netlist = generate_mastrovito(args.m, p)
io_map = wire_names(args.m)

caught = silent = 0
for seed in range(args.count):
    mutant, description = inject_bug(netlist, seed)
    verdict = verify(mutant, args.m, p, io_map, threads=args.threads)
    if verdict.equal == differs(netlist, mutant, seed=seed):
        raise RuntimeError(f"Seed {seed}: verification disagrees with simulation ({description})")

    if verdict.equal:
        silent += 1
    else:
        caught += 1
        print(f"{seed:>4} {description}: {', '.join(verdict.mismatched())}")

print(f"{caught} mutants detected, {silent} functionally equivalent")
