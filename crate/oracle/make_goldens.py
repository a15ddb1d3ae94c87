#!/usr/bin/env python3
"""Writes golden traces for corpus programs using the reference runtime.

usage: make_goldens.py PROGRAMS.jsonl INPUTS.jsonl OUT.jsonl

INPUTS holds {"id", "inputs": [literal, ...]} lines (for example from
`semtrace expand-inputs`); programs without a line use their own corpus.
"""

import json
import sys

from ref_oracle import oracle_trace


def main(programs, inputs, out):
    extra = {}
    with open(inputs) as f:
        for line in f:
            if line.strip():
                d = json.loads(line)
                extra[d["id"]] = d["inputs"]
    with open(programs) as f, open(out, "w") as o:
        for line in f:
            p = json.loads(line)
            for inp in extra.get(p["id"], p["corpus"]):
                t = oracle_trace({"program_id": p["id"], "source": p["source"], "entry": p.get("entry") or entry_of(p), "input": inp})
                golden = {
                    "program_id": p["id"],
                    "input": inp,
                    "outcome": t["outcome"],
                    "events": [[e["line"], list(e["changed"])] for e in t["events"]],
                    "stdout": t["stdout"],
                }
                o.write(json.dumps(golden) + "\n")


def entry_of(p):
    import ast
    for node in ast.parse(p["source"]).body:
        if isinstance(node, ast.FunctionDef):
            return node.name
    raise ValueError(p["id"])


if __name__ == "__main__":
    main(*sys.argv[1:4])
