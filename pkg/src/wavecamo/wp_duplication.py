"""Wave path construction by cone duplication.

The fallback when removing a register in place is impossible (its Q
fans out, or bypassing it breaks single-period timing somewhere else).
Instead of touching the original logic, the launch-to-capture cone is
copied with the candidate register elided inside the copy: the copy's
left part replays the register's whole fan-in cone from the original
launch registers, its right part replays the path on to the capture
with side pins wired to the original (per-cycle) signals, and the
capture flip-flop's D is rewired to the copy.  Values then take two
periods to cross the copy, while every side input re-stamps its own
fresh value within one period, which keeps the captured word identical
to the original circuit's.  Original gates are never rewired; gates
left without readers afterwards (often the whole old path into the
capture, sometimes the register itself) are pruned.

A small MILP sizes the copied gates and places per-gate delay adders so
that every boundary-to-capture arrival lands inside the derated
two-period window and the tightened gray band, while every side-input
path stays single-period.  The copy is register-free with a fixed
structure, so the model needs no big-M case split at all.

When the cone is too large to copy wholesale, the candidate register is
first walked toward the inputs (cloning it onto each fan-in pin of the
crossed gates, a legal retiming), which moves logic from the copied
left part into the shared right part.  Only multi-input crossings shed
cone gates, and registering a side input frees it in the sensitization
view; a FALSE pair whose conflict involved that side becomes
sensitizable and is refused by the final re-check, so the walk mainly
rescues oversized TRUE sites.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

from .netlist import Netlist, NetlistError, Gate, FlipFlop
from .timing import (TimingConfig, Path, WpRecord, propagate_arrivals,
                     classify_gray, path_arrival)
from .falsepath import is_true_path
from . import milp
from .wp_removal import (masked_fresh_arrivals, wave_cone_arrivals,
                         window_and_gray_ok, _violations_from,
                         _violation_set, _VAR_HI_PERIODS)

log = logging.getLogger(__name__)


def left_cone(netlist, signal):
    """Gate fan-in cone of a signal, stopping at registers and inputs.

    Returns the cone's gate ids in topological order; `signal` itself is
    included when it is a gate output.
    """
    cone = set()
    stack = [signal]
    while stack:
        s = stack.pop()
        if s in cone or s not in netlist.gates:
            continue
        cone.add(s)
        stack.extend(netlist.gates[s].inputs)
    return [g.id for g in netlist.topo_gates() if g.id in cone]


def split_pair(netlist, path: Path, ff_id: str):
    """Index of the first step whose entry pin reads the candidate's Q.

    Screened pairs are merged launch-to-capture paths; the candidate
    register sits between two consecutive steps (or before the first).
    Returns None when the path does not cross `ff_id`.
    """
    for j, (gid, pin) in enumerate(path.steps):
        src = netlist.gates[gid].inputs[pin]
        comb, chain = netlist.collapse_ffs(src)
        if ff_id in chain:
            return j
    return None


@dataclass
class DuplicationRegion:
    """Model scope for one duplication candidate."""

    base: Netlist
    ff_id: str
    kind: str
    pairs: list                  # screened pairs kept for this capture
    capture: str
    split: int                   # right part of pairs[0] starts here
    cone: list                   # left cone gate ids, topo order
    right: list                  # right spine [(gate, entry pin)]
    boundary: set                # register/input signals feeding the cone
    sta: object = None
    baseline_bad: set = field(default_factory=set)
    n_new_regs: int = 0          # registers added by the leftward walk

    @property
    def dup_gates(self):
        return list(self.cone) + [g for g, _pin in self.right]


def build_dup_region(netlist, ff_id, kind, pairs, cfg: TimingConfig):
    """Extract the duplication scope, or None when rejected.

    Rejection reasons: no pair crossing the candidate, a capture that is
    not a register, or a copy larger than cfg.region_gate_cap.
    """
    base = netlist.copy()
    if ff_id not in base.flipflops:
        return None
    usable = []
    for p in pairs:
        j = split_pair(base, p, ff_id)
        if j is not None:
            usable.append((p, j))
    if not usable:
        return None
    primary, split = usable[0]
    capture = primary.capture
    if capture not in base.flipflops:
        return None
    kept = [(p, j) for p, j in usable if p.capture == capture
            and p.steps[j:] == primary.steps[split:]]

    cone = left_cone(base, base.flipflops[ff_id].d_input)
    right = list(primary.steps[split:])
    if len(cone) + len(right) > cfg.region_gate_cap:
        log.debug("duplication %s: %d gates over cap", ff_id,
                  len(cone) + len(right))
        return None
    cone_set = set(cone)
    boundary = set()
    for gid in cone:
        for src in base.gates[gid].inputs:
            if src not in cone_set:
                boundary.add(src)

    sta = propagate_arrivals(base, cfg)
    return DuplicationRegion(base=base, ff_id=ff_id, kind=kind,
                             pairs=[p for p, _j in kept], capture=capture,
                             split=split, cone=cone, right=right,
                             boundary=boundary, sta=sta,
                             baseline_bad=_violation_set(base, cfg, sta))


class _DupHandles:
    """Variable bookkeeping for one duplication model."""

    def __init__(self):
        self.w_late = {}
        self.w_early = {}
        self.f_late = {}       # only gates a side input can reach
        self.f_early = {}
        self.sel = {}
        self.xi = {}
        self.out = None        # gate id driving the capture


def build_duplication_model(region: DuplicationRegion, cfg: TimingConfig):
    """Encode sizing and delay padding of the copy as a MilpModel.

    All structure is fixed, so every row is unconditional: wave arrivals
    sweep the copy from boundary constants, fresh arrivals sweep the
    right part from side-input constants, and the capture rows pin both
    into their bands.
    """
    base = region.base
    lib = base.lib
    xi_hi = cfg.xi_max * (lib.buffer_delay if lib is not None else 1.0)
    m = milp.MilpModel(f"duplication_{region.ff_id}")
    H = _DupHandles()

    def delay_rows(gid):
        g = base.gates[gid]
        if lib is None:
            return [list(g.pin_delays)]
        n = lib.n_levels(gid, g.kind)
        return [lib.pin_delays(gid, g.kind, lvl, g.n_inputs)
                for lvl in range(n)]

    dup = region.dup_gates
    for gid in dup:
        g = base.gates[gid]
        H.w_late[gid] = m.add_var(f"wL::{gid}", 0.0,
                                  _VAR_HI_PERIODS * cfg.T)
        H.w_early[gid] = m.add_var(f"wE::{gid}", 0.0,
                                   _VAR_HI_PERIODS * cfg.T)
        rows = delay_rows(gid)
        if len(rows) > 1:
            sel_vars = {}
            for lvl, row in enumerate(rows):
                sel_vars[lvl] = m.add_var(
                    f"sel::{gid}::{lvl}", 0, 1, kind="binary",
                    obj=-cfg.beta * sum(row))
            m.add_constraint({v: 1.0 for v in sel_vars.values()}, "==", 1,
                             label=f"one_size::{gid}")
            H.sel[gid] = (sel_vars, rows)
        else:
            H.sel[gid] = (None, rows)
        H.xi[gid] = m.add_var(f"xi::{gid}", 0.0, xi_hi,
                              obj=cfg.alpha - cfg.beta * g.n_inputs)

    def delay_expr(gid, pin):
        sel_vars, rows = H.sel[gid]
        terms = {H.xi[gid]: 1.0}
        if sel_vars is None:
            return terms, float(rows[0][pin])
        for lvl, var in sel_vars.items():
            terms[var] = float(rows[lvl][pin])
        return terms, 0.0

    def bound(row_terms, sense, rhs, label):
        m.add_constraint(dict(row_terms), sense, float(rhs), label=label)

    def arr_const(sig):
        if sig in base.primary_inputs:
            return cfg.pi_arrival, cfg.pi_arrival
        if sig in base.flipflops:
            return cfg.t_cq, cfg.t_cq
        return region.sta.late[sig], region.sta.early[sig]

    cone_set = set(region.cone)
    fresh_gates = set()

    # wave sweep over the left part: every pin is boundary or internal
    for gid in region.cone:
        g = base.gates[gid]
        for pin, src in enumerate(g.inputs):
            dt, dc = delay_expr(gid, pin)
            if src in cone_set:
                row = {H.w_late[gid]: 1.0, H.w_late[src]: -1.0}
                for t, c in dt.items():
                    row[t] = row.get(t, 0.0) - c
                bound(row, ">=", dc, f"wave_L::{gid}::{pin}")
                row = {H.w_early[gid]: 1.0, H.w_early[src]: -1.0}
                for t, c in dt.items():
                    row[t] = row.get(t, 0.0) - c
                bound(row, "<=", dc, f"wave_E::{gid}::{pin}")
            else:
                al, ae = arr_const(src)
                row = {H.w_late[gid]: 1.0}
                for t, c in dt.items():
                    row[t] = row.get(t, 0.0) - c
                bound(row, ">=", al + dc, f"wave_L::{gid}::{pin}")
                row = {H.w_early[gid]: 1.0}
                for t, c in dt.items():
                    row[t] = row.get(t, 0.0) - c
                bound(row, "<=", ae + dc, f"wave_E::{gid}::{pin}")

    # right spine: the entry pin carries the wave, side pins carry fresh
    prev = None
    d_root = base.flipflops[region.ff_id].d_input
    for idx, (gid, pin) in enumerate(region.right):
        g = base.gates[gid]
        dt, dc = delay_expr(gid, pin)
        if idx == 0:
            up_wave = d_root if d_root in cone_set else None
        else:
            up_wave = prev
        row_l = {H.w_late[gid]: 1.0}
        row_e = {H.w_early[gid]: 1.0}
        for t, c in dt.items():
            row_l[t] = row_l.get(t, 0.0) - c
            row_e[t] = row_e.get(t, 0.0) - c
        if up_wave is not None:
            row_l[H.w_late[up_wave]] = row_l.get(H.w_late[up_wave], 0.0) - 1.0
            row_e[H.w_early[up_wave]] = (
                row_e.get(H.w_early[up_wave], 0.0) - 1.0)
            bound(row_l, ">=", dc, f"wave_L::{gid}::{pin}")
            bound(row_e, "<=", dc, f"wave_E::{gid}::{pin}")
        else:
            # the copy reads the candidate's D source directly: another
            # register's Q or a primary input
            al, ae = arr_const(d_root)
            bound(row_l, ">=", al + dc, f"wave_L::{gid}::{pin}")
            bound(row_e, "<=", ae + dc, f"wave_E::{gid}::{pin}")

        has_fresh = prev in fresh_gates if idx > 0 else False
        side_fresh = g.n_inputs > 1
        if side_fresh or has_fresh:
            fresh_gates.add(gid)
            H.f_late[gid] = m.add_var(f"fL::{gid}", 0.0,
                                      _VAR_HI_PERIODS * cfg.T)
            H.f_early[gid] = m.add_var(f"fE::{gid}", 0.0,
                                       _VAR_HI_PERIODS * cfg.T)
            for spin, src in enumerate(g.inputs):
                if spin == pin:
                    if has_fresh:
                        sdt, sdc = delay_expr(gid, spin)
                        row = {H.f_late[gid]: 1.0, H.f_late[prev]: -1.0}
                        for t, c in sdt.items():
                            row[t] = row.get(t, 0.0) - c
                        bound(row, ">=", sdc, f"fresh_L::{gid}::{spin}")
                        row = {H.f_early[gid]: 1.0, H.f_early[prev]: -1.0}
                        for t, c in sdt.items():
                            row[t] = row.get(t, 0.0) - c
                        bound(row, "<=", sdc, f"fresh_E::{gid}::{spin}")
                    continue
                sdt, sdc = delay_expr(gid, spin)
                al = region.sta.late.get(src, cfg.pi_arrival)
                ae = region.sta.early.get(src, cfg.pi_arrival)
                row = {H.f_late[gid]: 1.0}
                for t, c in sdt.items():
                    row[t] = row.get(t, 0.0) - c
                bound(row, ">=", al + sdc, f"fresh_L::{gid}::{spin}")
                row = {H.f_early[gid]: 1.0}
                for t, c in sdt.items():
                    row[t] = row.get(t, 0.0) - c
                bound(row, "<=", ae + sdc, f"fresh_E::{gid}::{spin}")
        prev = gid

    H.out = prev if prev is not None else (
        d_root if d_root in cone_set else None)
    if H.out is None:
        return None
    wl, we = H.w_late[H.out], H.w_early[H.out]
    bound({wl: 1.0 + cfg.delta}, "<=", 2 * cfg.T - cfg.t_su, "wave_setup")
    bound({we: 1.0 - cfg.delta}, ">=", cfg.T + cfg.t_h, "wave_hold")
    bound({wl: 1.0 - cfg.tau}, "<=", cfg.T - (1 - cfg.tau) * cfg.t_su,
          "gray_hi")
    bound({we: 1.0 + cfg.tau}, ">=", cfg.T, "gray_lo")
    if H.out in fresh_gates:
        bound({H.f_late[H.out]: 1.0}, "<=", cfg.T - cfg.t_su, "cap_setup")
        bound({H.f_early[H.out]: 1.0}, ">=", cfg.t_h, "cap_hold")
    return m, H


def solve_duplication(region, cfg: TimingConfig, backend=None):
    built = build_duplication_model(region, cfg)
    if built is None:
        return None, None
    model, H = built
    sol = milp.solve(model, budget=cfg.milp_node_budget,
                     time_budget=cfg.milp_time_budget,
                     rel_gap=cfg.milp_rel_gap, backend=backend)
    if sol.status not in ("optimal", "timed_out") or not sol.values:
        log.debug("duplication %s: solver %s after %d nodes",
                  region.ff_id, sol.status, sol.n_nodes)
        return None, None
    return sol, H


@dataclass
class DuplicationResult:
    """A verified duplication move."""

    netlist: Netlist
    records: list
    site: str
    capture: str
    dup_map: dict                # original gate -> copy id
    pruned: list                 # gate/register ids removed as dead
    resized: dict
    xi_added: dict
    wave_captures: dict
    renames: dict = field(default_factory=dict)   # old ff id -> new id
    n_new_regs: int = 0
    n_nodes: int = 0
    runtime: float = 0.0


def prune_dead(netlist, protect=()):
    """Drop gates and registers no reader can observe.

    Iterates until a fixed point; primary outputs and `protect` ids stay.
    Returns the removed ids.
    """
    protect = set(protect) | set(netlist.primary_outputs)
    removed = []
    while True:
        readers = netlist.readers()
        dead = [gid for gid in netlist.gates
                if gid not in protect and not readers.get(gid)]
        dead += [fid for fid in netlist.flipflops
                 if fid not in protect and not readers.get(fid)]
        if not dead:
            return removed
        for sid in dead:
            netlist.gates.pop(sid, None)
            netlist.flipflops.pop(sid, None)
            removed.append(sid)


def _dup_suffix(netlist):
    k = 0
    taken = set(netlist.gates) | set(netlist.flipflops)
    taken.update(netlist.primary_inputs)
    while any(f"{t}__dup{k}" in taken for t in list(taken)):
        k += 1
    return f"__dup{k}"


def apply_duplication(region: DuplicationRegion, sol, H: _DupHandles,
                      cfg: TimingConfig):
    """Materialize a solved duplication and verify it exactly.

    Returns a DuplicationResult, or None when any exact check disagrees
    with the model.
    """
    base = region.base
    out = base.copy()
    suffix = _dup_suffix(out)
    dup_map = {gid: gid + suffix for gid in region.dup_gates}

    resized = {}
    xi_added = {}

    def make_copy(gid, inputs):
        g = base.gates[gid]
        ng = Gate(dup_map[gid], g.kind, inputs,
                  [float(d) for d in g.pin_delays], g.size_level, 0.0)
        sel_vars, rows = H.sel[gid]
        if sel_vars is not None:
            lvl = max(sel_vars, key=lambda l: sol[sel_vars[l]])
            ng.size_level = lvl
            ng.pin_delays = [float(d) for d in rows[lvl]]
            if lvl != g.size_level:
                resized[ng.id] = lvl
        ng.xi = round(float(sol[H.xi[gid]]), 9)
        if ng.xi > 1e-9:
            xi_added[ng.id] = ng.xi
        out.add_gate(ng)

    cone_set = set(region.cone)
    for gid in region.cone:
        g = base.gates[gid]
        inputs = [dup_map[s] if s in cone_set else s for s in g.inputs]
        make_copy(gid, inputs)

    d_root = base.flipflops[region.ff_id].d_input
    prev_sig = dup_map.get(d_root, d_root)
    for idx, (gid, pin) in enumerate(region.right):
        g = base.gates[gid]
        inputs = list(g.inputs)
        inputs[pin] = prev_sig
        make_copy(gid, inputs)
        prev_sig = dup_map[gid]

    cap_ff = out.flipflops[region.capture]
    cap_ff.d_input = prev_sig
    pruned = prune_dead(out)
    try:
        out.validate()
    except NetlistError as exc:
        log.debug("duplication %s: invalid: %s", region.ff_id, exc)
        return None

    # exact verification mirrors the model's fresh/wave split: boundary
    # reads of the copy are wave entries, side pins stay per-cycle
    entries = []
    for gid in region.cone:
        for pin, src in enumerate(base.gates[gid].inputs):
            if src not in cone_set:
                entries.append((dup_map[gid], pin))
    if region.right and d_root not in cone_set:
        g0, p0 = region.right[0]
        entries.append((dup_map[g0], p0))
    if not entries:
        return None

    fl, fe = masked_fresh_arrivals(out, entries, cfg)
    bad = _violations_from(out, cfg, fl, fe) - region.baseline_bad
    if bad:
        log.debug("duplication %s: fresh regressions %s",
                  region.ff_id, bad)
        return None
    late, early, captures, pos = wave_cone_arrivals(out, entries, cfg,
                                                    (fl, fe))
    if pos:
        log.debug("duplication %s: wave surfaces at outputs %s",
                  region.ff_id, pos)
        return None
    if region.capture not in captures:
        return None
    for fid, (dmin, dmax) in captures.items():
        if not window_and_gray_ok(dmin, dmax, cfg):
            log.debug("duplication %s: window fails at %s (%.3f, %.3f)",
                      region.ff_id, fid, dmin, dmax)
            return None

    records = []
    seen = set()
    right_tail = region.right
    for p in region.pairs:
        j = split_pair(base, p, region.ff_id)
        if j is None or p.steps[j:] != right_tail:
            continue
        steps = []
        ok = True
        for gid, pin in p.steps:
            did = dup_map.get(gid)
            if did is None or did not in out.gates:
                ok = False
                break
            steps.append((did, pin))
        if not ok:
            continue
        g0, p0 = steps[0]
        src = out.gates[g0].inputs[p0]
        comb, chain = out.collapse_ffs(src)
        launch = chain[-1] if chain else (
            comb if comb in out.primary_inputs else None)
        if launch is None:
            continue
        path = Path(launch=launch, steps=steps, capture=region.capture)
        if path.key() in seen:
            continue
        seen.add(path.key())
        sensitizable = is_true_path(out, path)
        if (region.kind == "false") == sensitizable:
            continue
        dmin, dmax = captures[region.capture]
        has_xor = any(out.gates[g].kind in ("XOR", "XNOR")
                      for g, _pin in steps)
        records.append(WpRecord(
            kind=region.kind, method="duplication", site=region.ff_id,
            launch=launch, capture=region.capture, steps=steps,
            dmin=dmin, dmax=dmax,
            gray=classify_gray(dmax + cfg.t_su, cfg),
            has_xor=has_xor,
            duplicated=sorted(dup_map.values())))
    if not records:
        log.debug("duplication %s: no record survived verification",
                  region.ff_id)
        return None

    return DuplicationResult(netlist=out, records=records,
                             site=region.ff_id, capture=region.capture,
                             dup_map=dup_map, pruned=pruned,
                             resized=resized, xi_added=xi_added,
                             wave_captures=captures,
                             n_new_regs=region.n_new_regs,
                             n_nodes=sol.n_nodes, runtime=sol.runtime)


def leftward_retime(netlist, ff_id, pair: Path, cfg: TimingConfig,
                    max_moves: int = 32):
    """Walk a register toward the inputs to shrink its fan-in cone.

    Each step moves the register back across its D driver, cloning it
    onto every fan-in pin of that gate (a legal retiming move when the
    gate's output has no other reader and every new position meets
    setup/hold).  The screened pair's merged path is position-invariant,
    so only the candidate id changes.

    Returns (netlist, ff_id, n_added) with n_added counting extra
    registers; the inputs are returned unchanged when no move is legal.
    """
    work = netlist.copy()
    cur = ff_id
    added = 0
    counter = 0
    step_pins = {gid: pin for gid, pin in pair.steps}
    for _ in range(max_moves):
        drv = work.flipflops[cur].d_input
        if drv not in work.gates:
            break
        g = work.gates[drv]
        readers = work.readers()
        cons = readers.get(drv, [])
        if len(cons) != 1 or cons[0][:2] != ("ff", cur):
            break
        if drv not in step_pins:
            break
        arr = propagate_arrivals(work, cfg)
        if any(arr.late[s] + cfg.t_su > cfg.T or arr.early[s] < cfg.t_h
               for s in g.inputs):
            break
        trial = work.copy()
        init = trial.flipflops[cur].init
        del trial.flipflops[cur]
        new_ids = []
        tg = trial.gates[drv]
        for pin, src in enumerate(tg.inputs):
            nid = f"{ff_id}__lw{counter}"
            counter += 1
            trial.add_flipflop(FlipFlop(nid, src, is_retimed=True,
                                        init=init))
            tg.inputs[pin] = nid
            new_ids.append(nid)
        for kind, cid, pin in readers.get(cur, []):
            if kind == "gate":
                trial.gates[cid].inputs[pin] = drv
            elif kind == "ff":
                trial.flipflops[cid].d_input = drv
        if any(name == cur for name in trial.primary_outputs):
            break  # the register drives an output directly; leave it
        try:
            trial.validate()
        except NetlistError:
            break
        if _violation_set(trial, cfg) - _violation_set(work, cfg):
            break
        work = trial
        cur = new_ids[step_pins[drv]]
        added += len(new_ids) - 1
    return work, cur, added


def construct_duplication(netlist, check, cfg: TimingConfig,
                          max_pairs: int = 4, backend=None):
    """Full duplication flow for one screened candidate.

    Tries the candidate in place first; when the fan-in cone is too
    large to copy, walks the register toward the inputs and retries.
    Returns DuplicationResult or None.
    """
    pairs = list(check.candidates[:max_pairs])
    if not pairs:
        return None
    region = build_dup_region(netlist, check.ff, check.kind, pairs, cfg)
    if region is None and check.ff in netlist.flipflops:
        # NOTE: the walk follows the given pair's merged path, so a
        # different pair can open a different (legal) direction.
        for pair in pairs:
            moved, new_ff, added = leftward_retime(netlist, check.ff,
                                                   pair, cfg)
            if new_ff == check.ff:
                continue
            region = build_dup_region(moved, new_ff, check.kind, pairs,
                                      cfg)
            if region is not None:
                region.n_new_regs = added
                break
    if region is None:
        return None
    sol, H = solve_duplication(region, cfg, backend=backend)
    if sol is None:
        return None
    res = apply_duplication(region, sol, H, cfg)
    if res is not None and region.ff_id != check.ff:
        res.renames = {check.ff: region.ff_id}
    return res


# -- signoff re-verification ---------------------------------------------------


def _wave_band(cfg: TimingConfig):
    """Feasible arrival band for a merged wave path (window + gray)."""
    lo = max((cfg.T + cfg.t_h) / (1.0 - cfg.delta),
             cfg.T / (1.0 + cfg.tau) - cfg.t_su)
    hi = min((2.0 * cfg.T - cfg.t_su) / (1.0 + cfg.delta),
             cfg.T / (1.0 - cfg.tau) - cfg.t_su)
    return lo, hi


def _lookup_arrival(netlist, rec: WpRecord, cfg: TimingConfig) -> float:
    path = Path(launch=rec.launch, steps=list(rec.steps),
                capture=rec.capture)
    return path_arrival(netlist, path, cfg, mode="lookup")


def _sim_clean(netlist, cfg: TimingConfig) -> bool:
    """Short self-simulation probe: no setup/hold flags after warm-up."""
    from .simulate import equivalence_check
    rep = equivalence_check(netlist, netlist, cfg, cycles=120, trials=2,
                            seed=20240229)
    return rep.n_setup == 0 and rep.n_hold == 0


def verify_and_repair(netlist, records, cfg: TimingConfig):
    """Re-verify record windows against the library lookup tables.

    Construction sizes and pads delays in typical mode; signoff re-reads
    every gate delay from the slew/load tables, which can drift a merged
    wave path out of its window or gray band.  Each drifted record is
    repaired by re-distributing camouflage delay adders over its own
    gates (buffer insertion/removal within xi_max) and, when adders run
    out, stepping a path gate one size row; every touch is validated by
    re-checking all live records and probing the netlist with a short
    simulation.  A record that cannot be brought back within
    cfg.repair_max_iters is abandoned and its touches rolled back; the
    caller decides what to do with the site.

    Parameters
    ----------
    netlist : Netlist
        Post-construction netlist (left unmodified).
    records : list of WpRecord
        Records whose merged paths live on `netlist`.
    cfg : TimingConfig

    Returns
    -------
    (netlist, statuses) : (Netlist, list of str)
        Working copy plus one status per record: "ok" (already inside
        the band), "repaired", or "abandoned".
    """
    work = netlist.copy()
    lib = work.lib
    if lib is None or not lib.has_lookup():
        # NOTE: without tables, typical mode is the signoff.
        return work, ["ok"] * len(records)

    lo, hi = _wave_band(cfg)
    margin = 0.02 * (hi - lo)

    def in_band(d):
        return window_and_gray_ok(d, d, cfg) and lo - 1e-9 <= d <= hi + 1e-9

    statuses = ["ok"] * len(records)
    settled = []                 # indices already verified in-band

    def settled_ok(nl):
        return all(in_band(_lookup_arrival(nl, records[i], cfg))
                   for i in settled)

    for idx, rec in enumerate(records):
        d = _lookup_arrival(work, rec, cfg)
        if in_band(d):
            settled.append(idx)
            continue
        snap = work.copy()
        repaired = False
        for _ in range(max(1, cfg.repair_max_iters)):
            d = _lookup_arrival(work, rec, cfg)
            target = min(max(d, lo + margin), hi - margin)
            delta = target - d
            if abs(delta) <= 1e-9:
                break
            moved = 0.0
            for gid, _pin in rec.steps:
                g = work.gates[gid]
                if delta > 0:
                    step = min(delta - moved, cfg.xi_max - g.xi)
                else:
                    step = -min(-delta - moved if delta < 0 else 0.0, g.xi)
                if abs(step) <= 1e-12:
                    continue
                g.xi = round(g.xi + step, 9)
                moved += abs(step)
                if moved >= abs(delta) - 1e-12:
                    break
            if moved < abs(delta) - 1e-9:
                # adders exhausted: step one path gate a size row
                stepped = False
                for gid, _pin in rec.steps:
                    g = work.gates[gid]
                    try:
                        n_rows = lib.n_levels(gid, g.kind)
                    except KeyError:
                        continue
                    nxt = g.size_level + (1 if delta > 0 else -1)
                    if 0 <= nxt < n_rows:
                        g.size_level = nxt
                        g.pin_delays = lib.pin_delays(gid, g.kind, nxt,
                                                      len(g.inputs))
                        stepped = True
                        break
                if not stepped and moved <= 1e-12:
                    break
            d = _lookup_arrival(work, rec, cfg)
            if in_band(d) and settled_ok(work) and _sim_clean(work, cfg):
                repaired = True
                break
        if repaired:
            statuses[idx] = "repaired"
            settled.append(idx)
        else:
            work = snap
            statuses[idx] = "abandoned"
            log.debug("signoff: record %d at %s abandoned", idx, rec.site)
    return work, statuses
