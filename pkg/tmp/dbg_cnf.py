"""Reproduce the retimed+bypassed netlist and trace the sensitization CNF."""

import pathlib
import sys

sys.path.insert(0, "/root/pkg/src")

from wavecamo.netlist import parse_bench
from wavecamo.delaylib import DelayLibrary
from wavecamo.timing import TimingConfig, Path
from wavecamo.falsepath import (build_condition, is_true_path, solve_cnf,
                                UNSAT)
from wavecamo.retiming import RetimingAssignment, apply_retiming

ROOT = pathlib.Path("/root/pkg/benchmarks")

lib = DelayLibrary.from_json((ROOT / "delays.json").read_text())
net = parse_bench((ROOT / "conflict_pair.bench").read_text(), lib,
                  "conflict_pair")
cfg = TimingConfig.from_json((ROOT / "conflict_pair.config.json").read_text())

lags = {"cp_y0": -1, "cp_y1": -1, "cp_y2": -1}
retimed, renames = apply_retiming(net, RetimingAssignment(lags),
                                  return_renames=True)
print("renames:", renames)
print("ffs:", sorted(retimed.flipflops))
for fid, ff in sorted(retimed.flipflops.items()):
    print("  ", fid, "D =", ff.d_input)

# find the register on y2 -> y3 and bypass it
g3 = retimed.gates["cp_y3"]
print("y3 inputs:", g3.inputs)
comb_src, chain = retimed.collapse_ffs(g3.inputs[0])
print("collapse:", comb_src, chain)
removed = chain[0]
del retimed.flipflops[removed]
g3.inputs[0] = comb_src
retimed.validate()

steps = ([("cp_b1", 0), ("cp_j1", 0)] +
         [(f"cp_x{i}", 0) for i in range(8)] +
         [(f"cp_y{i}", 0) for i in range(10)] +
         [("cp_k1", 0), ("cp_z", 0)])
path = Path(launch="cp_lf", steps=steps, capture="cp_cap")

cond = build_condition(retimed, path)
print("trivially_false:", cond.trivially_false)
print("side_requirements:", cond.side_requirements)
print("n_vars:", max(cond.var_of.values(), default=0),
      "clauses:", len(cond.clauses))
print("var_of keys:", sorted(cond.var_of))
status, model = solve_cnf(cond.clauses,
                          max(cond.var_of.values(), default=0), 10 ** 6)
print("status:", status)
if status != UNSAT and model:
    inv = {v: s for s, v in cond.var_of.items()}
    assign = {inv[abs(l)]: (l > 0) for l in model if abs(l) in inv}
    for s in ("cp_vf", "cp_vb", "cp_vn", "cp_lf", "cp_b1"):
        print("  ", s, assign.get(s))
print("is_true_path:", is_true_path(retimed, path))
