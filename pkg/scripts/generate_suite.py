#!/usr/bin/env python3
"""
Write scrambled Mastrovito multipliers with their ground truth, for every
catalog polynomial of the requested degrees.
"""
import argparse
import json
import os

from gfextract.netlist import format_verilog
from gfextract.scramble import scramble
from gfextract.specgen import catalog_polynomials, generate_mastrovito, ground_truth

parser = argparse.ArgumentParser()
parser.add_argument("degrees", type=int, nargs="+")
parser.add_argument("--seeds", type=int, default=3)
parser.add_argument("--output", default="data/suite")
args = parser.parse_args()

os.makedirs(args.output, exist_ok=True)

for m in args.degrees:
    for p in catalog_polynomials(m):
        netlist = generate_mastrovito(m, p)
        for seed in range(args.seeds):
            scrambled, mapping = scramble(netlist, seed)
            stem = os.path.join(args.output, scrambled.name)
            with open(stem + ".v", "w") as fp:
                fp.write(format_verilog(scrambled))

            # Ground truth in terms of the scrambled wire names
            truth = ground_truth(m, p)
            truth["io_map"] = {
                word: [mapping[wire] for wire in wires] for word, wires in truth["io_map"].items()
            }
            for entry in truth["outputs"] + truth["inputs"]:
                entry["wire"] = mapping[entry["wire"]]
            with open(stem + ".truth.json", "w") as fp:
                json.dump(truth, fp, indent=2)

            print(f"Generated {stem}.v ({len(scrambled)} gates, P(x) = {p})")
