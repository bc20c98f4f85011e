"""Count simplex pivots on the two_wave removal root LP."""

import pathlib
import sys
import time

sys.path.insert(0, "/root/pkg/src")

import numpy as np

from wavecamo.netlist import parse_bench
from wavecamo.delaylib import DelayLibrary
from wavecamo.timing import TimingConfig
from wavecamo.falsepath import check_wp_true_paths
from wavecamo import wp_removal as wr
from wavecamo import milp

ROOT = pathlib.Path("/root/pkg/benchmarks")

lib = DelayLibrary.from_json((ROOT / "delays.json").read_text())
net = parse_bench((ROOT / "two_wave.bench").read_text(), lib, "two_wave")
cfg = TimingConfig.from_json((ROOT / "two_wave.config.json").read_text())

chk = check_wp_true_paths(net, "tw_f2", cfg, 0)
region = wr.build_region(net, chk, cfg)
model, H = wr.build_removal_model(region, cfg)

c = np.array([v.obj for v in model.vars])
rows = [(r, s, b) for (r, s, b, _l) in model.rows]
lo = np.array([v.lo for v in model.vars])
hi = np.array([v.hi for v in model.vars])

counter = {"n": 0, "shapes": set()}
orig_outer = np.outer


def outer_counting(a, b, out=None):
    counter["n"] += 1
    counter["shapes"].add((len(a), len(b)))
    return orig_outer(a, b, out=out)


milp.np.outer = outer_counting
t0 = time.perf_counter()
st, x, ob = milp._lp_solve(c, rows, lo, hi)
t1 = time.perf_counter()
milp.np.outer = orig_outer
print(f"root LP: {st} obj {ob:.4f} in {t1 - t0:.3f}s, "
      f"pivots {counter['n']}, tableau {counter['shapes']}")
print(f"per-pivot: {(t1 - t0) / max(counter['n'], 1) * 1e3:.3f} ms")
