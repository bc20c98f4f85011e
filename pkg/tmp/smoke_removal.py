import logging
import sys

sys.path.insert(0, "/root/pkg/src")
logging.basicConfig(level=logging.DEBUG, format="%(name)s %(message)s")

from wavecamo.netlist import Netlist, Gate, FlipFlop
from wavecamo.timing import TimingConfig, propagate_arrivals
from wavecamo.falsepath import check_wp_true_paths
from wavecamo.wp_removal import construct_removal, build_region, solve_removal
from wavecamo.simulate import equivalence_check, simulate
import numpy as np

n = Netlist("rm_smoke")
n.add_input("a")
n.add_gate(Gate("g0", "BUF", ["a"], [2.0]))
n.add_flipflop(FlipFlop("lf", "g0"))
prev = "lf"
for i in range(1, 7):
    n.add_gate(Gate(f"g{i}", "BUF", [prev], [2.0]))
    prev = f"g{i}"
n.add_flipflop(FlipFlop("f", "g6"))
prev = "f"
for i in range(1, 7):
    n.add_gate(Gate(f"h{i}", "BUF", [prev], [2.0]))
    prev = f"h{i}"
n.add_flipflop(FlipFlop("cap", "h6"))
n.add_gate(Gate("z", "BUF", ["cap"], [2.0]))
n.add_output("z")
n.validate()

cfg = TimingConfig(T=20.0)
chk = check_wp_true_paths(n, "f", cfg, seed=0)
print("screen:", chk.n_left, chk.n_right, chk.n_pairs, len(chk.candidates))
assert len(chk.candidates) == 1

region = build_region(n, chk, cfg)
assert region is not None, "region rejected"
print("region: modeled=%d cone=%d r=%d edges=%d y=%d" % (
    len(region.modeled), len(region.cone), len(region.r_gates),
    len(region.edges), len(region.y_edges)))

sol, H = solve_removal(region, cfg)
assert sol is not None, "solver failed"
print("solve:", sol.status, "obj=%.4f nodes=%d" % (sol.objective, sol.n_nodes))

res = construct_removal(n, chk, cfg)
assert res is not None, "construction refused"
print("removed:", res.removed_ff, "edge:", res.removed_edge)
print("records:", [(r.kind, r.launch, r.capture, round(r.dmin, 3),
                    round(r.dmax, 3), r.gray) for r in res.records])
print("captures:", res.wave_captures)

rep = equivalence_check(n, res.netlist, cfg, cycles=100, trials=4, seed=7)
print("equiv:", rep.ok, rep.first_mismatch)
assert rep.ok

rng = np.random.default_rng(3)
ins = {"a": rng.integers(0, 2, 60).astype(np.int8)}
tr = simulate(res.netlist, ins, cfg)
print("sim violations: setup=%d hold=%d" % (len(tr.setup_violations),
                                            len(tr.hold_violations)))
assert not tr.setup_violations and not tr.hold_violations
print("SMOKE OK")
