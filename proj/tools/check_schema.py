#!/usr/bin/env python3
"""Run the CLI on small inputs and validate every JSON report against the schema."""
import json
import pathlib
import subprocess
import sys

import jsonschema

binary, root = sys.argv[1], pathlib.Path(sys.argv[2])
schema = json.loads((root / "schema" / "reports.schema.json").read_text())
pqr = '{"family":"pqr"}'
qd = '{"family":"qd","qbar":2.0}'
wide = ["--f-lo", "0.5", "--f-hi", "1.5"]

runs = [
    ("verdict", ["classify", "--rule", pqr, "--eta", "2"]),
    ("verdict", ["classify", "--rule", qd, *wide]),
    ("breakeven", ["breakeven", "--rule", qd, "--eta", "2", "--m", "1", "--f", "1"]),
    ("pseudotype", ["pseudotype", "--rule", pqr, "--m", "1.5", "--f", "0.3"]),
    ("regularity", ["regularity", "--rule", qd, *wide]),
    ("solver_report", ["solve", "--rule", pqr, "--grid", "10"]),
    ("solver_report", ["solve-br", "--rule", qd, *wide, "--grid", "12", "--max-iter", "3"]),
    ("simulation", ["simulate", "--rule", pqr, "--grid", "10", "--probes", "3"]),
    ("simulation", ["simulate", "--rule", pqr, "--grid", "10", "--probes", "3", "--format", "second-score",
                    "--method", "mc", "--draws", "500"]),
    ("equivalence", ["equiv", "--rule", pqr, "--grid", "10", "--probes", "3"]),
    ("invariance_scan", ["scan", "--rule", pqr, "--grid", "10", "--probes", "2"]),
    ("learn_demo", ["learn-demo", "--rule", pqr, "--g-cells", "16"]),
]

failed = 0
for name, args in runs:
    proc = subprocess.run([binary, *args], capture_output=True, text=True)
    if proc.returncode not in (0, 3):
        print(f"FAIL {' '.join(args[:1])}: exit {proc.returncode}: {proc.stderr.strip()}")
        failed += 1
        continue
    target = {"$ref": f"#/$defs/{name}", "$defs": schema["$defs"]}
    try:
        jsonschema.validate(json.loads(proc.stdout), target)
        print(f"ok   {args[0]} -> {name}")
    except jsonschema.ValidationError as e:
        print(f"FAIL {args[0]} -> {name}: {e.message}")
        failed += 1

for cfg in sorted((root / "configs").glob("*.json")):
    doc = json.loads(cfg.read_text())
    name = "config" if "rule" in doc or "grid" in doc else ("rule" if "family" in doc else "distribution")
    try:
        jsonschema.validate(doc, {"$ref": f"#/$defs/{name}", "$defs": schema["$defs"]})
        print(f"ok   {cfg.name} -> {name}")
    except jsonschema.ValidationError as e:
        print(f"FAIL {cfg.name} -> {name}: {e.message}")
        failed += 1

sys.exit(1 if failed else 0)
