"""Trace two_wave's removal and solver budget sensitivity."""

import pathlib
import sys
import time

sys.path.insert(0, "/root/pkg/src")

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
print("candidates:", len(chk.candidates))
region = wr.build_region(net, chk, cfg)
print("region:", "None" if region is None else
      f"cone {len(region.cone)} modeled {len(region.modeled)} "
      f"r_gates {len(region.r_gates)} relevant {len(region.relevant)} "
      f"y_edges {len(region.y_edges)}")

built = wr.build_removal_model(region, cfg)
model, H = built
print("model: vars", len(model.vars), "rows", len(model.rows),
      "ints", sum(1 for v in model.vars if v.kind != "continuous"))

for nb in (150, 400, 1000, None):
    t0 = time.perf_counter()
    sol = milp.solve(model, budget=nb, time_budget=30.0, rel_gap=0.02)
    dt = time.perf_counter() - t0
    print(f"budget {nb}: status {sol.status} obj "
          f"{None if not sol.values else round(sol.objective, 3)} "
          f"nodes {sol.n_nodes} in {dt:.1f}s")
    if sol.values:
        res = wr.apply_removal(region, sol, H, cfg)
        print("   apply:", "ok" if res is not None else "REJECTED",
              "" if res is None else
              [(r.kind, r.launch, r.capture) for r in res.records])
