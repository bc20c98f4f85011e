"""Capture and analyze the stalling child LP from the two_wave B&B."""

import pathlib
import pickle
import sys

sys.path.insert(0, "/root/pkg/src")

import numpy as np

from wavecamo.netlist import parse_bench
from wavecamo.delaylib import DelayLibrary
from wavecamo.timing import TimingConfig
from wavecamo.falsepath import check_wp_true_paths
from wavecamo import wp_removal as wr
from wavecamo import milp

ROOT = pathlib.Path("/root/pkg/benchmarks")
DUMP = pathlib.Path("/root/pkg/tmp/stall_lp.pkl")

lib = DelayLibrary.from_json((ROOT / "delays.json").read_text())
net = parse_bench((ROOT / "two_wave.bench").read_text(), lib, "two_wave")
cfg = TimingConfig.from_json((ROOT / "two_wave.config.json").read_text())

chk = check_wp_true_paths(net, "tw_f2", cfg, 0)
region = wr.build_region(net, chk, cfg)
model, H = wr.build_removal_model(region, cfg)

orig = milp._lp_solve


def capturing(c, rows, lo, hi, max_pivots=20000):
    try:
        return orig(c, rows, lo, hi, max_pivots)
    except RuntimeError:
        with DUMP.open("wb") as fh:
            pickle.dump({"c": np.asarray(c), "rows": rows,
                         "lo": np.asarray(lo), "hi": np.asarray(hi)}, fh)
        print("captured stalling LP ->", DUMP)
        raise


milp._lp_solve = capturing
try:
    sol = milp.solve(model, budget=150, time_budget=60.0, rel_gap=0.02)
    print("no stall:", sol.status, sol.objective, sol.n_nodes)
except RuntimeError as exc:
    print("stalled:", exc)
