"""End-to-end smoke over the generated benchmarks."""

import json
import pathlib
import sys
import time

sys.path.insert(0, "/root/pkg/src")

from wavecamo.netlist import parse_bench
from wavecamo.delaylib import DelayLibrary
from wavecamo.timing import TimingConfig
from wavecamo.workflow import construct, report
from wavecamo.simulate import equivalence_check
from wavecamo.attacks import run_attacks

ROOT = pathlib.Path("/root/pkg/benchmarks")


def run(name):
    t0 = time.perf_counter()
    lib = DelayLibrary.from_json((ROOT / "delays.json").read_text())
    net = parse_bench((ROOT / f"{name}.bench").read_text(), lib, name)
    cfg = TimingConfig.from_json((ROOT / f"{name}.config.json").read_text())
    out, state = construct(net, cfg, seed=0)
    t1 = time.perf_counter()
    rep = report(state, net, out, cfg, seed=0)
    t2 = time.perf_counter()
    eq = equivalence_check(net, out, cfg, cycles=200, trials=4, seed=0)
    t3 = time.perf_counter()
    atk = run_attacks(out, cfg, records=state.records, seed=0)
    t4 = time.perf_counter()

    print(f"== {name}  ffs {rep['n_ff_before']}->{rep['n_ff_after']} "
          f"gates {rep['n_gate_before']}->{rep['n_gate_after']}")
    print(f"   sites: {[(s['ff'], s['kind'], s['method'], s['records']) for s in state.sites]}")
    print(f"   wpf {rep['n_wpf']} wpt {rep['n_wpt']} shortfall {rep['shortfall']} "
          f"n_p {rep['n_p']} n_d {rep['n_d']} n_r {rep['n_r']}")
    print(f"   suspicious: t {rep['n_t_suspicious']} f {rep['n_f_suspicious']} "
          f"primes t' {rep['n_t_prime']} f' {rep['n_f_prime']} mode {rep['counts_mode']}")
    scr = atk.screened
    print(f"   attack screen: est {scr['estimated']} "
          f"susp_true {scr['suspicious_true']} susp_false {scr['suspicious_false']}")
    print(f"   verdicts: {scr.get('wp_verdicts')} never_single {scr.get('wp_never_single')}")
    print(f"   sizing: {{k: atk.sizing[k] for k in ('attempted','sized','failed','corrupted')}}"
          .replace("{k: atk.sizing[k] for k in ('attempted','sized','failed','corrupted')}",
                   str({k: atk.sizing[k] for k in ("attempted", "sized", "failed", "corrupted")})))
    print(f"   equal {eq.equal}  times: construct {t1-t0:.1f}s report {t2-t1:.1f}s "
          f"equiv {t3-t2:.1f}s attacks {t4-t3:.1f}s")

    ok = True
    if scr["suspicious_true"] != rep["n_t_prime"]:
        ok = False
        print(f"   !! invariant: susp_true {scr['suspicious_true']} != n_t' {rep['n_t_prime']}")
    if scr["suspicious_false"] != rep["n_f_prime"]:
        ok = False
        print(f"   !! invariant: susp_false {scr['suspicious_false']} != n_f' {rep['n_f_prime']}")
    if not eq.equal:
        ok = False
        print("   !! equivalence FAILED")
    if scr.get("wp_never_single") is not True and state.records:
        ok = False
        print("   !! never_single guarantee FAILED")
    return ok


if __name__ == "__main__":
    names = sys.argv[1:] or ["two_wave", "conflict_pair", "synth_a",
                             "synth_b", "synth_c", "synth_d"]
    bad = [n for n in names if not run(n)]
    print("BENCH SMOKE", "OK" if not bad else f"FAILED: {bad}")
