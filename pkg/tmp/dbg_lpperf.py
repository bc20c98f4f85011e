"""Profile the simplex on the two_wave removal root LP."""

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

n_ge = sum(1 for _r, s, _b in rows if s == ">=")
n_eq = sum(1 for _r, s, _b in rows if s == "==")
n_le = sum(1 for _r, s, _b in rows if s == "<=")
print(f"rows: {len(rows)} (le {n_le} ge {n_ge} eq {n_eq}), vars {len(c)}")

# count pivots by patching pivot_loop's inner loop indirectly: wrap
# _lp_solve with a pivot counter via sys.settrace is too slow; instead
# time solves and infer.
t0 = time.perf_counter()
st, x, ob = milp._lp_solve(c, rows, lo, hi)
t1 = time.perf_counter()
print(f"root LP: {st} obj {ob:.4f} in {t1 - t0:.3f}s")

# branched child: fix one binary, resolve
int_idx = [i for i, v in enumerate(model.vars)
           if v.kind in ("integer", "binary")]
fr = [(i, x[i]) for i in int_idx if min(x[i] % 1, 1 - x[i] % 1) > 1e-6]
print(f"fractional ints at root: {len(fr)} of {len(int_idx)}")

lo2, hi2 = lo.copy(), hi.copy()
if fr:
    i0 = fr[0][0]
    lo2[i0] = hi2[i0] = round(fr[0][1])
t0 = time.perf_counter()
st2, x2, ob2 = milp._lp_solve(c, rows, lo2, hi2)
t1 = time.perf_counter()
print(f"child LP: {st2} obj {ob2} in {t1 - t0:.3f}s")
