"""Evaluate the two_wave removal model at the intended trivial solution."""

import pathlib
import sys

sys.path.insert(0, "/root/pkg/src")

from wavecamo.netlist import parse_bench
from wavecamo.delaylib import DelayLibrary
from wavecamo.timing import TimingConfig
from wavecamo.falsepath import check_wp_true_paths
from wavecamo import wp_removal as wr

ROOT = pathlib.Path("/root/pkg/benchmarks")

lib = DelayLibrary.from_json((ROOT / "delays.json").read_text())
net = parse_bench((ROOT / "two_wave.bench").read_text(), lib, "two_wave")
cfg = TimingConfig.from_json((ROOT / "two_wave.config.json").read_text())

chk = check_wp_true_paths(net, "tw_f2", cfg, 0)
region = wr.build_region(net, chk, cfg)
model, H = wr.build_removal_model(region, cfg)
base = region.base

# intended: remove the register on the crossing edge, nothing else moves
cross = None
for k in region.y_edges:
    e = region.edges[k]
    if "tw_f2" in e.ffs:
        cross = k
        break
print("crossing edge idx:", cross, region.edges[cross].source, "->",
      region.edges[cross].sink)

val = {}
for gid, v in H.r.items():
    val[v] = 0.0
for gid, (sv, rows) in H.sel.items():
    if sv is not None:
        for lvl, var in sv.items():
            val[var] = 1.0 if lvl == base.gates[gid].size_level else 0.0
for gid, v in H.xi.items():
    val[v] = 0.0
for k, v in H.y.items():
    val[v] = 1.0 if k == cross else 0.0

# per-cycle (fresh) arrivals on the bypassed view; wave arrivals from the
# removed pin
work = base.copy()
ce = region.edges[cross]
gsink = work.gates[ce.sink]
src, chain = work.collapse_ffs(gsink.inputs[ce.sink_pin])
del work.flipflops[chain[0]]
gsink.inputs[ce.sink_pin] = src
fl, fe = wr.masked_fresh_arrivals(work, [(ce.sink, ce.sink_pin)], cfg)
wl, we, caps, pos = wr.wave_cone_arrivals(work, [(ce.sink, ce.sink_pin)],
                                          cfg, (fl, fe))
print("captures:", caps)
print("pos:", pos)

for gid, v in H.p_late.items():
    val[v] = fl.get(gid, 0.0)
    val[H.p_early[gid]] = fe.get(gid, 0.0)
for gid, v in H.w_late.items():
    val[v] = wl.get(gid, 0.0)
    val[H.w_early[gid]] = we.get(gid, 0.0)

# register-presence indicators
for k, (tag, tv) in H.ffp.items():
    if tag != "var":
        continue
    e = region.edges[k]
    w = len(e.ffs)
    if k == cross:
        w -= 1
    val[tv] = 1.0 if w >= 1 else 0.0

viol = []
for row, sense, rhs, label in model.rows:
    lhs = 0.0
    ok_vars = True
    for var, coef in row.items():
        if var not in val:
            ok_vars = False
            break
        lhs += coef * val[var]
    if not ok_vars:
        viol.append((label, "UNSET VAR"))
        continue
    bad = ((sense == "<=" and lhs > rhs + 1e-6)
           or (sense == ">=" and lhs < rhs - 1e-6)
           or (sense == "==" and abs(lhs - rhs) > 1e-6))
    if bad:
        viol.append((label, f"{lhs:.3f} {sense} {rhs:.3f}"))
print("violated rows:", len(viol))
names = {i: v.name for i, v in enumerate(model.vars)}
bad_labels = {label for label, _ in viol}
for row, sense, rhs, label in model.rows:
    if label not in bad_labels:
        continue
    parts = [f"{coef:+g}*{names[var]}[{val.get(var, '?')}]"
             for var, coef in row.items()]
    print(f"{label}: {' '.join(parts)} {sense} {rhs}")
    bad_labels.discard(label)

# context: which edges are 2..10 and 22
for k in (2, 3, 9, 10, 21, 22):
    if k < len(region.edges):
        e = region.edges[k]
        print(f"edge {k}: {e.source} -> {e.sink}.{e.sink_pin} ffs={e.ffs}")
