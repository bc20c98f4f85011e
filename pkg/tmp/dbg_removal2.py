"""Replicate apply_removal's record loop with full visibility."""

import pathlib
import sys

sys.path.insert(0, "/root/pkg/src")

from wavecamo.netlist import parse_bench, NetlistError
from wavecamo.delaylib import DelayLibrary
from wavecamo.timing import TimingConfig, Path, propagate_arrivals
from wavecamo.falsepath import check_wp_false_paths, is_true_path
from wavecamo.retiming import RetimingAssignment, apply_retiming
from wavecamo import wp_removal as wr

ROOT = pathlib.Path("/root/pkg/benchmarks")

lib = DelayLibrary.from_json((ROOT / "delays.json").read_text())
net = parse_bench((ROOT / "conflict_pair.bench").read_text(), lib,
                  "conflict_pair")
cfg = TimingConfig.from_json((ROOT / "conflict_pair.config.json").read_text())

chk = check_wp_false_paths(net, "cp_mid", cfg, 0)
region = wr.build_region(net, chk, cfg)
sol, H = wr.solve_removal(region, cfg)
print("status-ish: sol is None?", sol is None)

base = region.base
lags = {gid: int(round(sol[var])) for gid, var in H.r.items()
        if abs(sol[var]) > 0.5}
print("lags:", lags)
chosen = next(k for k, var in H.y.items() if sol[var] > 0.5)
ce = region.edges[chosen]
print("chosen edge:", ce.source, "->", ce.sink, "pin", ce.sink_pin,
      "ffs", ce.ffs)
resel = {gid: max(sv, key=lambda l: sol[sv[l]])
         for gid, (sv, rows) in H.sel.items() if sv is not None}
print("resized (non-default):",
      {g: l for g, l in resel.items() if l != base.gates[g].size_level})
xi = {g: round(float(sol[H.xi[g]]), 6) for g in H.xi
      if sol[H.xi[g]] > 1e-9}
print("xi:", xi)

work = base.copy()
for gid in sorted(region.relevant):
    g = work.gates[gid]
    sv, rows = H.sel[gid]
    if sv is not None:
        lvl = max(sv, key=lambda l: sol[sv[l]])
        g.size_level = lvl
        g.pin_delays = [float(d) for d in rows[lvl]]
    g.xi = round(float(sol[H.xi[gid]]), 9)

retimed, renames = apply_retiming(work, RetimingAssignment(lags),
                                  return_renames=True)
nm = lambda s: renames.get(s, s)
sink = nm(ce.sink)
gsink = retimed.gates[sink]
comb_src, chain = retimed.collapse_ffs(gsink.inputs[ce.sink_pin])
print("bypass:", comb_src, "chain", chain)
removed_ff = chain[0]
del retimed.flipflops[removed_ff]
gsink.inputs[ce.sink_pin] = comb_src
retimed.validate()

fl, fe = wr.masked_fresh_arrivals(retimed, [(sink, ce.sink_pin)], cfg)
bad = wr._violations_from(retimed, cfg, fl, fe) - region.baseline_bad
print("fresh regressions:", bad)
late, early, captures, pos = wr.wave_cone_arrivals(
    retimed, [(sink, ce.sink_pin)], cfg, (fl, fe))
print("pos:", pos, " captures:", {f: (round(a, 4), round(b, 4))
                                  for f, (a, b) in captures.items()})
for fid, (dmin, dmax) in captures.items():
    print("  window_ok", fid, wr.window_and_gray_ok(dmin, dmax, cfg))

for p in region.pairs:
    steps = [(nm(g), pin) for g, pin in p.steps]
    missing = [g for g, _ in steps if g not in retimed.gates]
    print("pair capture", p.capture, "missing", missing)
    if missing:
        continue
    cap = p.capture
    print("  cap in ffs", cap in retimed.flipflops, "in captures",
          cap in captures)
    launch = wr._record_launch(retimed, steps)
    print("  launch:", launch)
    if launch is None:
        continue
    path = Path(launch=launch, steps=steps, capture=cap)
    sens = is_true_path(retimed, path)
    print("  sensitizable:", sens, "(kind", region.kind + ")")
