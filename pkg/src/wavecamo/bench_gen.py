"""Generator for the bundled benchmark circuits.

Every circuit is produced as a Netlist object and serialized through
write_bench, so round-tripping is guaranteed by construction.  The
generator works in units of the default library's typical rows (BUF/NOT
1.0, two-input gates 2.0, XOR/XNOR 2.4, t_cq 0.3) and targets the wave
band for T=20: a register-launched chain of 24.0 total gate delay
arrives at 24.3, inside the feasible window-and-gray band.

Site patterns
-------------
true site
    launch FF, a 12.0-delay chain, the removable middle FF, another
    12.0-delay chain, capture FF.  The "sides" variant joins registered
    side signals into the capture half late enough that their own
    register-free tails stay far below the suspicious band after the
    middle register is gone.
false site
    the same skeleton, but a side register vf drives vb = BUF(vf) into
    an early AND and vn = NOT(vf) into a late AND.  Sensitizing the
    merged path needs vf = 1 and vf = 0 at once, so it is statically
    false; the vf-launched sibling through vb shares the whole cone and
    is balanced to the same 24.3 arrival, so it becomes a legal second
    wave (and stays sensitizable).
sizing bait
    a structural false path (17.3, suspicious but not a wave) whose
    delay expression equals, row for row, that of a sensitizable twin
    launched from the other input of its first gate.  Any sizing that
    lifts the false path into the wave window lifts the twin past
    T - t_su, so the sizing attack provably fails on it.
duplication site
    a true-site skeleton whose middle register Q also drives a primary
    output.  Removing the register would leave a register-free wave on
    an output pin, which the removal flow rejects, so construction
    falls back to duplicating the fan-in cone; the merged arrival is
    already in the band, keeping the duplication model feasible at
    every extra-delay budget.
filler
    short register pipelines (worst arrival well under the gray band)
    that add gates, eligible flip-flops, and definitely-single-period
    paths.
"""

from __future__ import annotations

import json
import random

from .netlist import Netlist, Gate, FlipFlop

# typical-row delays the chain arithmetic below is counted in; they
# mirror the default library and are asserted against it in the tests
UNIT_1 = ("BUF", "NOT")
UNIT_2 = ("AND", "OR", "NAND", "NOR")


class _Builder:
    """Incremental netlist builder tracking nominal arrivals."""

    def __init__(self, name: str):
        self.n = Netlist(name)
        self.arr = {}

    # -- primitives -----------------------------------------------------

    def pi(self, name: str) -> str:
        if name not in self.n.primary_inputs:
            self.n.add_input(name)
            self.arr[name] = 0.0
        return name

    def po(self, signal: str, name: str) -> str:
        g = self.gate(name, "BUF", [signal])
        self.n.add_output(g)
        return g

    def gate(self, name: str, kind: str, inputs: list) -> str:
        delay = 1.0 if kind in UNIT_1 else (2.4 if kind in ("XOR", "XNOR")
                                            else 2.0)
        self.n.add_gate(Gate(name, kind, list(inputs)))
        self.arr[name] = max(self.arr[i] for i in inputs) + delay
        return name

    def ff(self, name: str, d_input: str) -> str:
        self.n.add_flipflop(FlipFlop(name, d_input))
        self.arr[name] = 0.3
        return name

    def chain(self, prefix: str, start: str, n: int, rng=None) -> str:
        """Append n single-input gates (1.0 each) after `start`.

        Kinds alternate NOT/BUF for logic variety, or are drawn from
        rng when one is given; either way the chain delay is n * 1.0.
        """
        sig = start
        for i in range(n):
            if rng is not None:
                kind = rng.choice(("NOT", "BUF"))
            else:
                kind = "NOT" if i % 2 == 0 else "BUF"
            sig = self.gate(f"{prefix}{i}", kind, [sig])
        return sig


def _feeder(b: _Builder, prefix: str, pi_name: str, ff_name: str) -> str:
    """PI -> buffer -> flip-flop D; keeps hold paths off raw inputs."""
    g = b.gate(f"{prefix}fd", "BUF", [b.pi(pi_name)])
    return b.ff(ff_name, g)


def _late_side(b: _Builder, p: str, k: int, pi_name: str) -> str:
    """Registered side input for a mid-chain two-input gate."""
    sf = _feeder(b, f"{p}w{k}", pi_name, f"{p}wf{k}")
    return b.gate(f"{p}wb{k}", "BUF", [sf])


def true_site(b: _Builder, p: str, pi_name: str, sides: bool = False,
              rng=None) -> dict:
    """Removable-register true site with a 24.3 merged arrival.

    Returns a dict naming the site's flip-flops for bookkeeping.
    """
    lf = _feeder(b, p, pi_name, f"{p}lf")
    left = b.chain(f"{p}l", lf, 12, rng)
    mid = b.ff(f"{p}mid", left)
    if not sides:
        right = b.chain(f"{p}r", mid, 12, rng)
    else:
        # capture half 12.0 with registered sides joining late; each
        # side's register-free tail tops out at 12.3, far below the
        # gray band, once the middle register is gone
        side_ffs = [_late_side(b, f"{p}s", k, pi_name) for k in range(4)]
        r1 = b.gate(f"{p}r1", "BUF", [mid])
        r2 = b.gate(f"{p}r2", "AND", [r1, side_ffs[0]])
        r3 = b.gate(f"{p}r3", "NOT", [r2])
        r4 = b.gate(f"{p}r4", "AND", [r3, side_ffs[1]])
        r5 = b.gate(f"{p}r5", "OR", [r4, side_ffs[2]])
        r6 = b.gate(f"{p}r6", "BUF", [r5])
        r7 = b.gate(f"{p}r7", "AND", [r6, side_ffs[3]])
        right = b.gate(f"{p}r8", "NOT", [r7])
    cap = b.ff(f"{p}cap", right)
    b.po(cap, f"{p}po")
    return {"launch": lf, "mid": f"{p}mid", "cap": cap}


def false_site(b: _Builder, p: str, pi_name: str, side_pi: str,
               lean: bool = False) -> dict:
    """Removable-register site whose merged path is statically false.

    vb = BUF(vf) joins an early AND (side must be 1, so vf = 1) and
    vn = NOT(vf) joins a late AND (side must be 1, so vf = 0); the
    merged path is unsensitizable while each half stays true.  The
    vf-launched sibling through vb runs 0.3 + 24.0 = 24.3 like the
    merged path, so the whole cone shares one wave window.  The lean
    variant keeps the capture half single-input; the full variant
    decorates it with registered late sides.
    """
    lf = _feeder(b, p, pi_name, f"{p}lf")
    vf = _feeder(b, f"{p}v", side_pi, f"{p}vf")
    vb = b.gate(f"{p}vb", "BUF", [vf])
    vn = b.gate(f"{p}vn", "NOT", [vf])
    b1 = b.gate(f"{p}b1", "BUF", [lf])
    j1 = b.gate(f"{p}j1", "AND", [b1, vb])
    # launch half after the join is single-input only: any two-input
    # gate here would hand its side a register-free tail landing
    # between the single-period limit and the wave band
    sig = b.chain(f"{p}x", j1, 8)
    mid = b.ff(f"{p}mid", sig)
    if lean:
        sig = b.chain(f"{p}y", mid, 10)
    else:
        sig = mid
        for i in range(5):
            sig = b.gate(f"{p}y{i}", "OR" if i % 2 == 0 else "AND",
                         [sig, _late_side(b, p, i, pi_name)])
    k1 = b.gate(f"{p}k1", "AND", [sig, vn])
    last = b.gate(f"{p}z", "BUF", [k1])
    cap = b.ff(f"{p}cap", last)
    b.po(cap, f"{p}po")
    return {"launch": lf, "mid": f"{p}mid", "cap": cap, "side": vf}


def sizing_bait(b: _Builder, p: str, pi_name: str) -> dict:
    """Structural false path that no gate sizing can turn into a wave.

    The false path (launch lf) and its sensitizable twin (launch vf)
    run through the same gates pin for pin, so their arrivals agree
    under every size assignment; pushing one above T + t_h while
    holding the other below T - t_su is infeasible.
    """
    lf = _feeder(b, p, pi_name, f"{p}lf")
    vf = _feeder(b, f"{p}v", pi_name, f"{p}vf")
    j = b.gate(f"{p}j", "OR", [lf, vf])
    sig = b.chain(f"{p}m", j, 2)
    for i in range(5):
        kind = "AND" if i % 2 == 0 else "OR"
        sig = b.gate(f"{p}n{i}", kind,
                     [sig, _late_side(b, f"{p}u", i, pi_name)])
    sig = b.gate(f"{p}m6", "BUF", [sig])
    k = b.gate(f"{p}k", "AND", [sig, vf])
    cap = b.ff(f"{p}cap", k)
    b.po(cap, f"{p}po")
    return {"launch": lf, "twin": vf, "cap": cap}


def dup_site(b: _Builder, p: str, pi_name: str) -> dict:
    """True site whose middle register cannot be removed.

    The middle Q drives a primary output as well as the capture half;
    bypassing it would put a register-free wave on an output pin, so
    the removal flow rejects the site and construction falls back to
    duplicating the 11-gate fan-in cone.
    """
    lf = _feeder(b, p, pi_name, f"{p}lf")
    left = b.chain(f"{p}l", lf, 11)
    mid = b.ff(f"{p}mid", left)
    b.n.add_output(mid)
    sides = [_late_side(b, f"{p}d", k, pi_name) for k in range(4)]
    w1 = b.gate(f"{p}w1", "BUF", [mid])
    w2 = b.gate(f"{p}w2", "AND", [w1, sides[0]])
    w3 = b.gate(f"{p}w3", "BUF", [w2])
    w4 = b.gate(f"{p}w4", "AND", [w3, sides[1]])
    w5 = b.gate(f"{p}w5", "NOT", [w4])
    w6 = b.gate(f"{p}w6", "OR", [w5, sides[2]])
    w7 = b.gate(f"{p}w7", "AND", [w6, sides[3]])
    w8 = b.gate(f"{p}w8", "AND", [w7, sides[0]])
    cap = b.ff(f"{p}cap", w8)
    b.po(cap, f"{p}po")
    return {"launch": lf, "mid": f"{p}mid", "cap": cap}


def filler(b: _Builder, p: str, pi_name: str, rng=None) -> None:
    """Short pipeline: every path is definitely single-period."""
    f1 = _feeder(b, p, pi_name, f"{p}f1")
    sig = b.chain(f"{p}c", f1, 8, rng)
    sig = b.gate(f"{p}mix", "AND", [sig, f1])
    f2 = b.ff(f"{p}f2", sig)
    b.po(f2, f"{p}po")


# -- circuits -----------------------------------------------------------------


def two_wave() -> Netlist:
    """Three-register chain whose middle register can become a wave.

    The second block runs through an inverter and an OR gate; removing
    the middle register turns the 24.3 merged path into two waves in
    flight.
    """
    b = _Builder("two_wave")
    f1 = _feeder(b, "tw_", "x0", "tw_f1")
    left = b.chain("tw_a", f1, 11)
    f2 = b.ff("tw_f2", left)
    inv = b.gate("tw_inv", "NOT", [f2])
    sf = _feeder(b, "tw_s", "x1", "tw_sf")
    sb = b.gate("tw_sb", "BUF", [sf])
    orj = b.gate("tw_or", "OR", [inv, sb])
    right = b.chain("tw_b", orj, 10)
    f3 = b.ff("tw_f3", right)
    b.po(f3, "tw_po")
    return b.n


def conflict_pair() -> Netlist:
    """Snippet-sized circuit holding one constructible false pair."""
    b = _Builder("conflict_pair")
    false_site(b, "cp_", "x0", "x1", lean=True)
    return b.n


def synth(name: str, seed: int, n_false: int, n_true: int,
          n_true_sides: int, n_bait: int, n_filler: int,
          with_dup: bool = False) -> Netlist:
    """Assemble a synthetic benchmark from the site patterns."""
    b = _Builder(name)
    rng = random.Random(seed)
    pis = [f"x{i}" for i in range(6)]
    for pin in pis:
        b.pi(pin)
    k = 0
    for i in range(n_false):
        false_site(b, f"f{i}_", pis[k % 6], pis[(k + 3) % 6])
        k += 1
    for i in range(n_true):
        true_site(b, f"t{i}_", pis[k % 6], sides=False, rng=rng)
        k += 1
    for i in range(n_true_sides):
        true_site(b, f"s{i}_", pis[k % 6], sides=True, rng=rng)
        k += 1
    for i in range(n_bait):
        sizing_bait(b, f"b{i}_", pis[k % 6])
        k += 1
    if with_dup:
        dup_site(b, "d0_", pis[k % 6])
        k += 1
    for i in range(n_filler):
        filler(b, f"p{i}_", pis[k % 6], rng)
        k += 1
    return b.n


def default_config(n_wpf: int, n_wpt: int) -> dict:
    """Construction knobs mirroring TimingConfig field names."""
    return {
        "T": 20.0,
        "tau": 0.2,
        "delta": 0.15,
        "n_wpf": n_wpf,
        "n_wpt": n_wpt,
        "dis_t": 2.0,
        "path_sample_limit": 500,
        "xi_max": 4.0,
    }


BENCHES = {
    "two_wave": (two_wave, {"n_wpf": 0, "n_wpt": 1}),
    "conflict_pair": (conflict_pair, {"n_wpf": 1, "n_wpt": 0}),
    "synth_a": (lambda: synth("synth_a", 11, 3, 2, 1, 1, 2),
                {"n_wpf": 3, "n_wpt": 3}),
    "synth_b": (lambda: synth("synth_b", 22, 3, 1, 2, 2, 3),
                {"n_wpf": 3, "n_wpt": 3}),
    "synth_c": (lambda: synth("synth_c", 33, 3, 2, 1, 1, 3,
                              with_dup=True),
                {"n_wpf": 3, "n_wpt": 3}),
    "synth_d": (lambda: synth("synth_d", 44, 4, 3, 2, 2, 6,
                              with_dup=True),
                {"n_wpf": 3, "n_wpt": 3}),
}


def generate(out_dir) -> list:
    """Write all bundled circuits, their configs and the delay sidecar."""
    from pathlib import Path
    from .netlist import write_bench
    from .delaylib import default_library

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "delays.json").write_text(default_library().to_json() + "\n")
    written = []
    for name, (build, targets) in BENCHES.items():
        net = build()
        (out / f"{name}.bench").write_text(write_bench(net))
        cfg = default_config(**targets)
        (out / f"{name}.config.json").write_text(
            json.dumps(cfg, indent=1, sort_keys=True) + "\n")
        written.append(name)
    return written
