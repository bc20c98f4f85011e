"""Smoke: attacker screening + sizing attack on a two-site construction."""
from wavecamo.netlist import Netlist, Gate, FlipFlop
from wavecamo.timing import TimingConfig
from wavecamo.workflow import construct, report
from wavecamo.attacks import screen, sizing_attack, run_attacks, never_single


def build():
    n = Netlist("smoke2")
    for pi in ("a1", "a2", "v1"):
        n.primary_inputs.append(pi)
    n.gates["a1b"] = Gate("a1b", "BUF", ["a1"])
    n.gates["a2b"] = Gate("a2b", "BUF", ["a2"])
    n.flipflops["lf1"] = FlipFlop("lf1", "a1b")
    n.flipflops["lf2"] = FlipFlop("lf2", "a2b")
    # site A: false pair via vb/vn reconvergence
    n.gates["vb"] = Gate("vb", "BUF", ["v1"], [2.3])
    n.gates["vn"] = Gate("vn", "NOT", ["v1"])
    n.gates["p1"] = Gate("p1", "BUF", ["lf1"])
    n.gates["p2"] = Gate("p2", "AND", ["p1", "vb"])
    prev = "p2"
    for i in range(3, 7):
        n.gates[f"p{i}"] = Gate(f"p{i}", "BUF", [prev])
        prev = f"p{i}"
    n.flipflops["f1"] = FlipFlop("f1", prev)
    n.gates["q1"] = Gate("q1", "BUF", ["f1"])
    n.gates["q2"] = Gate("q2", "AND", ["q1", "vn"])
    prev = "q2"
    for i in range(3, 7):
        n.gates[f"q{i}"] = Gate(f"q{i}", "BUF", [prev])
        prev = f"q{i}"
    n.flipflops["cap1"] = FlipFlop("cap1", prev)
    n.gates["z1g"] = Gate("z1g", "BUF", ["cap1"])
    n.primary_outputs.append("z1g")
    # site B: plain true chain
    n.gates["c1"] = Gate("c1", "BUF", ["lf2"])
    prev = "c1"
    for i in range(2, 7):
        n.gates[f"c{i}"] = Gate(f"c{i}", "BUF", [prev])
        prev = f"c{i}"
    n.flipflops["f2"] = FlipFlop("f2", prev)
    n.gates["d1"] = Gate("d1", "BUF", ["f2"])
    prev = "d1"
    for i in range(2, 7):
        n.gates[f"d{i}"] = Gate(f"d{i}", "BUF", [prev])
        prev = f"d{i}"
    n.flipflops["cap2"] = FlipFlop("cap2", prev)
    n.gates["z2g"] = Gate("z2g", "BUF", ["cap2"])
    n.primary_outputs.append("z2g")
    for g in n.gates.values():
        if not g.pin_delays:
            g.pin_delays = [2.0] * g.n_inputs
    return n


cfg = TimingConfig(T=20.0, n_wpf=1, n_wpt=1)
base = build()
out, state = construct(base, cfg, seed=0)
assert state.n_wpf_left == 0 and state.n_wpt_left == 0
rep = report(state, base, out, cfg, seed=0)
print("report n_t,n_f:", rep["n_t_suspicious"], rep["n_f_suspicious"],
      "primes:", rep["n_t_prime"], rep["n_f_prime"])
assert rep["n_wpt"] == 1 and rep["n_wpf"] == 1

scr = screen(out, cfg, noise_seed=0, records=state.records)
print("estimated:", scr["estimated"])
print("suspicious_true:", scr["suspicious_true"],
      "suspicious_false:", scr["suspicious_false"],
      "mode:", scr["counts_mode"])
print("wp_verdicts:", scr["wp_verdicts"],
      "never_single:", scr["wp_never_single"])
# one constructed true record + the PI-launched sibling through site A's cone
assert scr["suspicious_true"] == 2 and scr["suspicious_false"] == 1
assert rep["n_t_prime"] == scr["suspicious_true"]
assert rep["n_f_prime"] == scr["suspicious_false"]
assert scr["wp_never_single"] is True
assert all(v != "definitely_single" for v in scr["wp_verdicts"])

dmin = min(r.dmin for r in state.records)
assert never_single(dmin, cfg)

siz = sizing_attack(out, None, cfg, seed=0)
print("sizing:", {k: siz[k] for k in ("attempted", "sized", "failed",
                                      "corrupted")})
print("blocking:", siz["blocking_true_paths"])
assert siz["attempted"] == 1 and siz["failed"] == 1 and siz["sized"] == 0

ar = run_attacks(out, cfg, records=state.records, seed=0)
doc = ar.to_doc()
print("budgets:", doc["budgets"])
assert doc["budgets"]["test_vectors"] == scr["suspicious_true"]
assert doc["budgets"]["simulation_exponent"] == scr["suspicious_false"]
print("ATTACKS SMOKE OK")
