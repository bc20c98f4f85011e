"""Why does construct_removal refuse the snippet sites?"""

import logging
import pathlib
import sys
import time

sys.path.insert(0, "/root/pkg/src")
logging.basicConfig(level=logging.DEBUG, format="%(name)s %(message)s")
for noisy in ("wavecamo.milp",):
    logging.getLogger(noisy).setLevel(logging.INFO)

from wavecamo.netlist import parse_bench
from wavecamo.delaylib import DelayLibrary
from wavecamo.timing import TimingConfig
from wavecamo.falsepath import check_wp_false_paths
from wavecamo import wp_removal

ROOT = pathlib.Path("/root/pkg/benchmarks")

lib = DelayLibrary.from_json((ROOT / "delays.json").read_text())
net = parse_bench((ROOT / "conflict_pair.bench").read_text(), lib,
                  "conflict_pair")
cfg = TimingConfig.from_json((ROOT / "conflict_pair.config.json").read_text())

chk = check_wp_false_paths(net, "cp_mid", cfg, 0)
print("candidates:", len(chk.candidates))
for p in chk.candidates:
    print("  pair:", p.launch, "->", p.capture, "steps", len(p.steps))

region = wp_removal.build_region(net, chk, cfg)
print("region:", "None" if region is None else
      f"cone {len(region.cone)} modeled {len(region.modeled)} "
      f"r_gates {len(region.r_gates)} relevant {len(region.relevant)} "
      f"y_edges {len(region.y_edges)}")

if region is not None:
    t0 = time.perf_counter()
    sol, H = wp_removal.solve_removal(region, cfg)
    t1 = time.perf_counter()
    print(f"solve: {'feasible' if sol is not None else 'INFEASIBLE/timeout'} "
          f"in {t1-t0:.1f}s")
    if sol is not None:
        res = wp_removal.apply_removal(region, sol, H, cfg)
        print("apply:", "ok" if res is not None else "None (exact check)")
        if res is not None:
            for r in res.records:
                print("  record:", r.kind, r.launch, "->", r.capture)
