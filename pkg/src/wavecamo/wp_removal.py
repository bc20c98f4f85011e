"""Wave path construction by flip-flop removal.

A screened candidate flip-flop is taken out of the circuit so the value
it used to hold keeps flying through the downstream cone and is captured
one period later than single-cycle timing would allow.  Around the
candidate, a small mixed-integer model picks gate sizes, per-gate delay
adders, local register moves and the exact register to drop, subject to:

* every remaining capture keeps ordinary single-period setup/hold on the
  per-cycle (fresh) arrival system;
* every flip-flop the wave can reach sees it inside the two-period
  window under PVT derating, and inside the tightened gray band so an
  attacker with bounded delay error cannot classify it;
* exactly one register is removed, located on the sampled
  launch-to-capture pair.

Arrivals are modeled as two interval systems per signal: the fresh pair
(late lower-bounded, early upper-bounded by propagation) anchors to each
clock edge and covers all single-period activity; the wave pair is
anchored to the launch edge and only propagates through register-free
connections.  Constraints on an inactive system are vacuous because its
variables float free of propagation, which keeps the big-M case split
sound without indicator variables per system.

After solving, the move is re-applied to a copy of the netlist and every
claim is re-checked by exact propagation; the move is refused when any
check disagrees with the model.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

from .netlist import Netlist, NetlistError, normalize_ff_branches
from .timing import (TimingConfig, Path, WpRecord, propagate_arrivals,
                     classify_gray)
from .falsepath import is_true_path
from .retiming import RetimingAssignment, apply_retiming
from . import milp

log = logging.getLogger(__name__)

_VAR_HI_PERIODS = 3.0  # arrival variable ceiling, in clock periods


@dataclass
class RemovalRegion:
    """Model scope extracted around one removal candidate."""

    base: Netlist                  # normalized working copy
    ff_id: str
    kind: str                      # "true" | "false"
    pairs: list                    # merged candidate Paths (capped)
    edges: list                    # Net records with a modeled endpoint
    r_gates: set = field(default_factory=set)
    relevant: set = field(default_factory=set)   # sizing/adder gates
    modeled: set = field(default_factory=set)    # gates with fresh vars
    cone: set = field(default_factory=set)       # gates with wave vars
    y_edges: list = field(default_factory=list)  # indices into edges
    pair_internal: list = field(default_factory=list)  # per pair: edge idx
    sta: object = None             # original arrivals on base
    baseline_bad: set = field(default_factory=set)


def _hop_distances(base, start_gates, limit):
    """Undirected gate-hop distance from a seed set, FFs transparent."""
    nbr = {}
    for e in base.branch_nets():
        if e.sink.startswith("po::") or e.source not in base.gates:
            continue
        nbr.setdefault(e.source, set()).add(e.sink)
        nbr.setdefault(e.sink, set()).add(e.source)
    dist = {g: 0 for g in start_gates}
    frontier = list(start_gates)
    d = 0
    while frontier and d < limit:
        d += 1
        nxt = []
        for g in frontier:
            for h in nbr.get(g, ()):
                if h not in dist:
                    dist[h] = d
                    nxt.append(h)
        frontier = nxt
    return dist


def _min_max_wr(e, r_gates):
    """Bounds of the retimed weight given the movable gate set."""
    lo = hi = e.weight
    if e.sink in r_gates:
        lo -= 1
        hi += 1
    if e.source in r_gates:
        lo -= 1
        hi += 1
    return lo, hi


def _violations_from(netlist, cfg, late, early):
    """Captures failing single-period setup or hold at typical delays.

    `late`/`early` may be partial: a missing signal has no per-cycle
    activity (e.g. it only sees a wave) and is skipped here; wave timing
    is checked separately against the two-period window.
    """
    bad = set()
    tol = 1e-9
    for fid, ff in netlist.flipflops.items():
        d = ff.d_input
        if d not in late:
            continue
        if late[d] + cfg.t_su > cfg.T + tol:
            bad.add(("setup", fid))
        if early[d] < cfg.t_h - tol:
            bad.add(("hold", fid))
    for name in netlist.primary_outputs:
        src, _chain = netlist.collapse_ffs(name)
        if src in netlist.flipflops or src in netlist.primary_inputs:
            continue
        if src not in late:
            continue
        if late[src] + cfg.t_su > cfg.T + tol:
            bad.add(("setup", "po::" + name))
        if early[src] < cfg.t_h - tol:
            bad.add(("hold", "po::" + name))
    return bad


def _violation_set(netlist, cfg, arr=None):
    """Full-netlist single-period setup/hold failures."""
    if arr is None:
        arr = propagate_arrivals(netlist, cfg)
    return _violations_from(netlist, cfg, arr.late, arr.early)


def masked_fresh_arrivals(netlist, excluded, cfg):
    """Per-cycle arrivals with a set of gate input pins severed.

    `excluded` is an iterable of (gate_id, pin) pairs: the pins a wave
    enters through (a bypassed register's old fanout, or a duplicated
    block's boundary reads).  Events crossing them belong to the wave
    system, not to any single period, so per-cycle timing is computed as
    if those pins never toggled.  Signals whose every contribution
    crosses an excluded pin get no entry.
    """
    excluded = set(excluded)
    late, early = {}, {}
    for name in netlist.primary_inputs:
        late[name] = early[name] = cfg.pi_arrival
    for fid in netlist.flipflops:
        late[fid] = early[fid] = cfg.t_cq
    for g in netlist.topo_gates():
        ll = ee = None
        for pin, src in enumerate(g.inputs):
            if (g.id, pin) in excluded:
                continue
            if src not in late:
                continue
            d = g.pin_delay(pin)
            ll = late[src] + d if ll is None else max(ll, late[src] + d)
            ee = early[src] + d if ee is None else min(ee, early[src] + d)
        if ll is not None:
            late[g.id] = ll
            early[g.id] = ee
    return late, early


def build_region(netlist, check, cfg: TimingConfig, max_pairs: int = 4):
    """Extract the model scope for one candidate, or None when rejected.

    Rejection reasons: no screened pairs, the candidate feeding a
    primary output on the bypassed branch, the wave cone reaching a
    primary output, or the closure exceeding cfg.region_gate_cap.
    """
    if not check.candidates:
        return None
    # split only the candidate's own Q: the bypass must take exactly one
    # branch while the others keep their register; registers elsewhere
    # keep their fanout sharing (the sensitization structure depends on
    # it)
    base = normalize_ff_branches(netlist, only={check.ff})
    ff_id = check.ff
    if ff_id not in base.flipflops:
        log.debug("removal: %s lost in normalization, skip", ff_id)
        return None
    pairs = list(check.candidates[:max_pairs])

    nets = base.branch_nets()
    by_sink = {(e.sink, e.sink_pin): i for i, e in enumerate(nets)}
    by_source = {}
    for i, e in enumerate(nets):
        by_source.setdefault(e.source, []).append(i)

    cand_idx = None
    for i, e in enumerate(nets):
        if ff_id in e.ffs:
            cand_idx = i
            break
    if cand_idx is None:
        return None
    cand = nets[cand_idx]
    if cand.sink.startswith("po::"):
        return None

    # pair-internal edges (between consecutive path gates)
    pair_internal = []
    for p in pairs:
        idxs = []
        for i in range(1, len(p.steps)):
            gid, pin = p.steps[i]
            j = by_sink.get((gid, pin))
            if j is None or nets[j].source != p.steps[i - 1][0]:
                return None  # stale path
            idxs.append(j)
        if not idxs:
            return None  # single-gate merged path cannot hold the site
        pair_internal.append(idxs)
    y_set = sorted({j for idxs in pair_internal for j in idxs})

    # retiming scope: gates near the candidate edge, minus the gates that
    # anchor record launch and capture points
    seeds = [g for g in (cand.source, cand.sink) if g in base.gates]
    dist = _hop_distances(base, seeds, cfg.retime_radius)
    pinned = set()
    for p in pairs:
        first_g, first_pin = p.steps[0]
        last_g = p.steps[-1][0]
        pinned.add(first_g)
        pinned.add(last_g)
        launch_edge = by_sink.get((first_g, first_pin))
        if launch_edge is not None and nets[launch_edge].source in base.gates:
            pinned.add(nets[launch_edge].source)
        for j in by_source.get(last_g, ()):
            if nets[j].sink in base.gates:
                pinned.add(nets[j].sink)
    r_gates = {g for g in dist if g in base.gates} - pinned

    def min_after(i):
        lo, _ = _min_max_wr(nets[i], r_gates)
        return lo - (1 if i in y_set else 0)

    # wave cone: forward closure over connections that can end up
    # register-free, from every possible removal sink
    cone = set()
    stack = []
    for j in y_set:
        if nets[j].sink not in cone:
            cone.add(nets[j].sink)
            stack.append(nets[j].sink)
    while stack:
        g = stack.pop()
        for j in by_source.get(g, ()):
            e = nets[j]
            if min_after(j) >= 1:
                continue
            if e.sink.startswith("po::"):
                log.debug("removal %s: wave reaches %s", ff_id, e.sink)
                return None
            if e.sink not in cone:
                cone.add(e.sink)
                stack.append(e.sink)
    if len(cone) > cfg.region_gate_cap:
        log.debug("removal %s: cone %d over cap", ff_id, len(cone))
        return None

    relevant = set()
    for p in pairs:
        relevant.update(g for g, _pin in p.steps)

    # fresh closure: everything whose per-cycle arrival can change
    changed = set(relevant) | set(cone)
    for i, e in enumerate(nets):
        lo, hi = _min_max_wr(e, r_gates)
        if (lo != hi or i in y_set) and e.sink in base.gates:
            changed.add(e.sink)
    modeled = set()
    stack = [g for g in changed if g in base.gates]
    while stack:
        g = stack.pop()
        if g in modeled:
            continue
        modeled.add(g)
        if len(modeled) > cfg.region_gate_cap:
            log.debug("removal %s: region over cap", ff_id)
            return None
        for j in by_source.get(g, ()):
            e = nets[j]
            if e.sink.startswith("po::"):
                continue
            if min_after(j) <= 0 and e.sink not in modeled:
                stack.append(e.sink)

    edge_idx = []
    for i, e in enumerate(nets):
        if e.sink in modeled or e.source in modeled:
            edge_idx.append(i)
    edges = [nets[i] for i in edge_idx]
    back = {i: k for k, i in enumerate(edge_idx)}
    y_edges = [back[i] for i in y_set]
    pair_internal = [[back[i] for i in idxs] for idxs in pair_internal]

    sta = propagate_arrivals(base, cfg)
    baseline_bad = _violation_set(base, cfg, sta)
    return RemovalRegion(base=base, ff_id=ff_id, kind=check.kind,
                         pairs=pairs, edges=edges, r_gates=r_gates,
                         relevant=relevant, modeled=modeled, cone=cone,
                         y_edges=y_edges, pair_internal=pair_internal,
                         sta=sta, baseline_bad=baseline_bad)


class _ModelHandles:
    """Variable bookkeeping for one construction model."""

    def __init__(self):
        self.p_late = {}
        self.p_early = {}
        self.w_late = {}
        self.w_early = {}
        self.sel = {}          # gate -> (level vars | None, rows)
        self.xi = {}
        self.r = {}
        self.y = {}            # edge idx -> binary
        self.ffp = {}          # edge idx -> ("const", 0|1) | ("var", idx)


def _delay_levels(base, gid):
    """Per-level pin delay rows for a gate and its current level."""
    g = base.gates[gid]
    if base.lib is None:
        return [list(g.pin_delays)], 0
    n = base.lib.n_levels(gid, g.kind)
    rows = [base.lib.pin_delays(gid, g.kind, lvl, g.n_inputs)
            for lvl in range(n)]
    return rows, g.size_level


def build_removal_model(region: RemovalRegion, cfg: TimingConfig):
    """Encode the removal decision problem as a MilpModel.

    Returns (model, handles), or None when a constant capture check is
    already impossible.  Every conditional row uses an explicit big-M
    verified to dominate its worst violation given the variable boxes.
    """
    base = region.base
    M = cfg.big_m
    var_hi = _VAR_HI_PERIODS * cfg.T
    lib = base.lib
    xi_hi = cfg.xi_max * (lib.buffer_delay if lib is not None else 1.0)

    max_pin = 0.0
    pin_gates = set(region.modeled)
    pin_gates.update(e.source for e in region.edges
                     if e.source in base.gates)
    for gid in pin_gates:
        g = base.gates[gid]
        if gid in region.relevant:
            rows, _cur = _delay_levels(base, gid)
            max_pin = max(max_pin, max(max(r) for r in rows) + xi_hi)
        else:
            max_pin = max(max_pin,
                          max(g.pin_delay(p) for p in range(g.n_inputs)))
    if M < var_hi + max_pin:
        raise ValueError(
            f"big-M {M} cannot dominate arrival bound {var_hi} plus "
            f"pin delay {max_pin}; raise cfg.M or the clock period")

    m = milp.MilpModel(f"removal_{region.ff_id}")
    H = _ModelHandles()

    for gid in sorted(region.modeled):
        H.p_late[gid] = m.add_var(f"pL::{gid}", 0.0, var_hi)
        H.p_early[gid] = m.add_var(f"pE::{gid}", 0.0, var_hi)
    for gid in sorted(region.cone):
        H.w_late[gid] = m.add_var(f"wL::{gid}", 0.0, var_hi)
        H.w_early[gid] = m.add_var(f"wE::{gid}", 0.0, var_hi)

    n_branch = {}
    for e in base.branch_nets():
        n_branch[e.source] = n_branch.get(e.source, 0) + 1
    for gid in sorted(region.r_gates):
        g = base.gates[gid]
        cost = cfg.gamma * (g.n_inputs - n_branch.get(gid, 0))
        H.r[gid] = m.add_var(f"r::{gid}", -1, 1, kind="integer", obj=cost)

    for gid in sorted(region.relevant):
        g = base.gates[gid]
        rows, _cur = _delay_levels(base, gid)
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

    for k in region.y_edges:
        e = region.edges[k]
        H.y[k] = m.add_var(f"y::{e.sink}::{e.sink_pin}", 0, 1,
                           kind="binary")

    def wr_terms(e):
        terms = {}
        if e.sink in H.r:
            terms[H.r[e.sink]] = terms.get(H.r[e.sink], 0.0) + 1.0
        if e.source in H.r:
            terms[H.r[e.source]] = terms.get(H.r[e.source], 0.0) - 1.0
        return terms, float(e.weight)

    # register-presence indicator per edge: 1 iff any FF remains on it
    for k, e in enumerate(region.edges):
        terms, const = wr_terms(e)
        yv = H.y.get(k)
        lo, hi_w = _min_max_wr(e, region.r_gates)
        q_lo = lo - (1 if yv is not None else 0)
        if terms:
            m.add_constraint(dict(terms), ">=", -const,
                             label=f"wr_nonneg::{k}")
        if yv is not None:
            row = dict(terms)
            row[yv] = row.get(yv, 0.0) - 1.0
            m.add_constraint(row, ">=", -const, label=f"q_nonneg::{k}")
            # removal needs exactly one register on the edge
            row2 = dict(terms)
            row2[yv] = row2.get(yv, 0.0) + float(max(hi_w, 1))
            m.add_constraint(row2, "<=", 1.0 + max(hi_w, 1) - const,
                             label=f"remove_single::{k}")
        if q_lo >= 1:
            H.ffp[k] = ("const", 1)
        elif hi_w <= 0:
            H.ffp[k] = ("const", 0)
        elif not terms and yv is None:
            H.ffp[k] = ("const", 1 if e.weight >= 1 else 0)
        else:
            b = m.add_var(f"ffp::{e.sink}::{e.sink_pin}", 0, 1,
                          kind="binary")
            H.ffp[k] = ("var", b)
            row = dict(terms)
            if yv is not None:
                row[yv] = row.get(yv, 0.0) - 1.0
            rowb = dict(row)
            rowb[b] = rowb.get(b, 0.0) - float(max(hi_w, 1))
            m.add_constraint(rowb, "<=", -const, label=f"ffp_up::{k}")
            rowc = dict(row)
            rowc[b] = rowc.get(b, 0.0) - 1.0
            m.add_constraint(rowc, ">=", -const, label=f"ffp_low::{k}")

    m.add_constraint({v: 1.0 for v in H.y.values()}, "==", 1,
                     label="one_removal")
    for pi, idxs in enumerate(region.pair_internal):
        m.add_constraint({H.y[k]: 1.0 for k in idxs}, "==", 1,
                         label=f"pair_demand::{pi}")

    def guards_no_ff(k):
        """Active only when edge k keeps no register and is not removed."""
        tag, v = H.ffp[k]
        gs = []
        if tag == "const":
            if v == 1:
                return None
        else:
            gs.append((v, 0))
        yv = H.y.get(k)
        if yv is not None:
            gs.append((yv, 0))
        return gs

    def guards_ff(k):
        """Active only when a register remains on edge k."""
        tag, v = H.ffp[k]
        if tag == "const":
            return None if v == 0 else []
        return [(v, 1)]

    def guards_removed(k):
        yv = H.y.get(k)
        return None if yv is None else [(yv, 1)]

    def conditional(row_terms, sense, rhs, guards, label):
        """row sense rhs, enforced only when every (var, val) guard holds;
        inactive guards contribute big-M slack.

        Each row gets the smallest M that provably frees it over the
        variable boxes: one inactive guard must fully relax the row, and
        anything larger only loosens the LP bound.
        """
        row = dict(row_terms)
        rhs = float(rhs)
        if sense == "<=":
            worst = m._extreme(
                {m.var_index(k): float(v) for k, v in row.items()},
                maximize=True) - rhs
        else:
            worst = rhs - m._extreme(
                {m.var_index(k): float(v) for k, v in row.items()},
                maximize=False)
        mrow = max(worst, 0.0)
        for var, val in guards:
            if sense == "<=":
                if val == 1:
                    row[var] = row.get(var, 0.0) + mrow
                    rhs += mrow
                else:
                    row[var] = row.get(var, 0.0) - mrow
            else:
                if val == 1:
                    row[var] = row.get(var, 0.0) - mrow
                    rhs -= mrow
                else:
                    row[var] = row.get(var, 0.0) + mrow
        m.add_constraint(row, sense, rhs, label=label)

    def src_arrival(e):
        """(late, early) of an edge's combinational source as
        ((terms, const), (terms, const))."""
        s = e.source
        if s in region.modeled:
            return ({H.p_late[s]: 1.0}, 0.0), ({H.p_early[s]: 1.0}, 0.0)
        if s in base.primary_inputs:
            return ({}, cfg.pi_arrival), ({}, cfg.pi_arrival)
        return ({}, region.sta.late[s]), ({}, region.sta.early[s])

    def delay_expr(e):
        """Pin delay into the sink gate as (terms, const)."""
        gid, pin = e.sink, e.sink_pin
        g = base.gates[gid]
        if gid in H.xi:
            sel_vars, rows = H.sel[gid]
            terms = {H.xi[gid]: 1.0}
            if sel_vars is None:
                return terms, float(rows[0][pin])
            for lvl, var in sel_vars.items():
                terms[var] = float(rows[lvl][pin])
            return terms, 0.0
        return {}, float(g.pin_delay(pin))

    def minus(row, terms):
        for t, c in terms.items():
            row[t] = row.get(t, 0.0) - c
        return row

    for k, e in enumerate(region.edges):
        is_po = e.sink.startswith("po::")
        (sl_t, sl_c), (se_t, se_c) = src_arrival(e)
        u = e.source
        u_wave = u in region.cone
        tag, tv = H.ffp[k]

        if not is_po and e.sink in region.modeled:
            dl_t, dl_c = delay_expr(e)
            v = e.sink
            pL, pE = H.p_late[v], H.p_early[v]

            gs = guards_no_ff(k)
            if gs is not None:
                row = minus(minus({pL: 1.0}, sl_t), dl_t)
                conditional(row, ">=", sl_c + dl_c, gs,
                            f"fresh_pass_L::{k}")
                row = minus(minus({pE: 1.0}, se_t), dl_t)
                conditional(row, "<=", se_c + dl_c, gs,
                            f"fresh_pass_E::{k}")

            gs = guards_ff(k)
            if gs is not None:
                row = minus({pL: 1.0}, dl_t)
                conditional(row, ">=", cfg.t_cq + dl_c, gs,
                            f"fresh_seed_L::{k}")
                row = minus({pE: 1.0}, dl_t)
                conditional(row, "<=", cfg.t_cq + dl_c, gs,
                            f"fresh_seed_E::{k}")

            if u_wave and v in region.cone:
                gs = guards_no_ff(k)
                if gs is not None:
                    row = minus({H.w_late[v]: 1.0, H.w_late[u]: -1.0},
                                dl_t)
                    conditional(row, ">=", dl_c, gs, f"wave_pass_L::{k}")
                    row = minus({H.w_early[v]: 1.0, H.w_early[u]: -1.0},
                                dl_t)
                    conditional(row, "<=", dl_c, gs, f"wave_pass_E::{k}")

            gs = guards_removed(k)
            if gs is not None and v in region.cone:
                row = minus(minus({H.w_late[v]: 1.0}, sl_t), dl_t)
                conditional(row, ">=", sl_c + dl_c, gs,
                            f"wave_seed_L::{k}")
                row = minus(minus({H.w_early[v]: 1.0}, se_t), dl_t)
                conditional(row, "<=", se_c + dl_c, gs,
                            f"wave_seed_E::{k}")

        # capture checks at the source of any edge keeping a register
        gs = guards_ff(k)
        if gs is not None:
            if sl_t:
                conditional(dict(sl_t), "<=", cfg.T - cfg.t_su - sl_c,
                            gs, f"cap_setup::{k}")
                conditional(dict(se_t), ">=", cfg.t_h - se_c, gs,
                            f"cap_hold::{k}")
            elif tag == "var":
                # constant source: a violating arrival forbids the
                # register from settling here
                if sl_c + cfg.t_su > cfg.T or se_c < cfg.t_h:
                    m.add_constraint({tv: 1.0}, "==", 0,
                                     label=f"cap_const::{k}")
            if u_wave:
                wl, we = H.w_late[u], H.w_early[u]
                conditional({wl: 1.0 + cfg.delta}, "<=",
                            2 * cfg.T - cfg.t_su, gs, f"wave_setup::{k}")
                conditional({we: 1.0 - cfg.delta}, ">=",
                            cfg.T + cfg.t_h, gs, f"wave_hold::{k}")
                conditional({wl: 1.0 - cfg.tau}, "<=",
                            cfg.T - (1 - cfg.tau) * cfg.t_su, gs,
                            f"gray_hi::{k}")
                conditional({we: 1.0 + cfg.tau}, ">=", cfg.T, gs,
                            f"gray_lo::{k}")

        if is_po:
            if tag == "const" and tv == 1:
                continue  # register shields the output
            if u_wave:
                if tag == "var":
                    m.add_constraint({tv: 1.0}, "==", 1,
                                     label=f"po_shield::{k}")
                    continue
                log.debug("naked wave output %s in model", e.sink)
                return None
            gs = [] if tag == "const" else [(tv, 0)]
            if sl_t:
                conditional(dict(sl_t), "<=", cfg.T - cfg.t_su - sl_c,
                            gs, f"po_setup::{k}")
                conditional(dict(se_t), ">=", cfg.t_h - se_c, gs,
                            f"po_hold::{k}")

    return m, H


def solve_removal(region: RemovalRegion, cfg: TimingConfig, backend=None):
    built = build_removal_model(region, cfg)
    if built is None:
        return None, None
    model, H = built
    sol = milp.solve(model, budget=cfg.milp_node_budget,
                     time_budget=cfg.milp_time_budget,
                     rel_gap=cfg.milp_rel_gap, backend=backend)
    if sol.status not in ("optimal", "timed_out") or not sol.values:
        log.debug("removal %s: solver %s after %d nodes", region.ff_id,
                  sol.status, sol.n_nodes)
        return None, None
    return sol, H


@dataclass
class RemovalResult:
    """A verified removal move."""

    netlist: Netlist
    records: list
    removed_ff: str
    removed_edge: tuple           # (source, sink gate, pin) after apply
    lags: dict
    resized: dict                 # gate -> chosen level
    xi_added: dict                # gate -> delay adder
    wave_captures: dict           # ff -> (dmin, dmax)
    renames: dict = field(default_factory=dict)   # old ff id -> new id
    n_nodes: int = 0
    runtime: float = 0.0


def wave_cone_arrivals(netlist, entries, cfg, fresh=None):
    """Exact launch-relative wave arrivals downstream of wave entries.

    `entries` is an iterable of (gate_id, pin) pairs where waves enter
    the combinational network (each seeded with the per-cycle arrival of
    the pin's source plus the pin delay); arrivals then propagate
    through register-free connections only.  `fresh` is an optional
    (late, early) pair of per-cycle arrival dicts used for the seeds.
    Returns (late, early, captures, pos): per-signal arrival dicts, wave
    intervals at each flip-flop reached, and any primary outputs
    reached.
    """
    if fresh is None:
        arr = propagate_arrivals(netlist, cfg)
        fresh = (arr.late, arr.early)
    fresh_late, fresh_early = fresh
    seeds = {}
    for sink, pin in entries:
        g0 = netlist.gates[sink]
        src = g0.inputs[pin]
        sl = fresh_late[src] + g0.pin_delay(pin)
        se = fresh_early[src] + g0.pin_delay(pin)
        cur = seeds.get(sink)
        if cur is None:
            seeds[sink] = (sl, se)
        else:
            seeds[sink] = (max(cur[0], sl), min(cur[1], se))
    late, early = {}, {}
    for g in netlist.topo_gates():
        ll = ee = None
        if g.id in seeds:
            ll, ee = seeds[g.id]
        for pin, s in enumerate(g.inputs):
            if s in late:
                dl = g.pin_delay(pin)
                nl, ne = late[s] + dl, early[s] + dl
                ll = nl if ll is None else max(ll, nl)
                ee = ne if ee is None else min(ee, ne)
        if ll is not None:
            late[g.id] = ll
            early[g.id] = ee
    captures = {}
    for fid, ff in netlist.flipflops.items():
        if ff.d_input in late:
            captures[fid] = (early[ff.d_input], late[ff.d_input])
    pos = [name for name in netlist.primary_outputs if name in late]
    return late, early, captures, pos


def window_and_gray_ok(dmin, dmax, cfg, tol=1e-9):
    """Exact wave window plus the tightened suspicious band."""
    if (1 - cfg.delta) * dmin < cfg.T + cfg.t_h - tol:
        return False
    if (1 + cfg.delta) * dmax > 2 * cfg.T - cfg.t_su + tol:
        return False
    if (1 - cfg.tau) * (dmax + cfg.t_su) > cfg.T + tol:
        return False
    if (1 + cfg.tau) * dmin < cfg.T - tol:
        return False
    return True


def _record_launch(netlist, steps):
    """Launch point of a path on the final netlist: the register (or PI)
    driving the first step's pin."""
    g0, pin0 = steps[0]
    src = netlist.gates[g0].inputs[pin0]
    comb, chain = netlist.collapse_ffs(src)
    if chain:
        return chain[-1]
    return comb if comb in netlist.primary_inputs else None


def apply_removal(region: RemovalRegion, sol, H: _ModelHandles,
                  cfg: TimingConfig):
    """Materialize a solved removal and verify it exactly.

    Returns a RemovalResult, or None when any exact check disagrees with
    the model (the caller falls back to another construction).
    """
    base = region.base
    work = base.copy()

    resized = {}
    xi_added = {}
    for gid in sorted(region.relevant):
        g = work.gates[gid]
        sel_vars, rows = H.sel[gid]
        if sel_vars is not None:
            lvl = max(sel_vars, key=lambda l: sol[sel_vars[l]])
            g.size_level = lvl
            g.pin_delays = [float(d) for d in rows[lvl]]
            resized[gid] = lvl
        g.xi = round(float(sol[H.xi[gid]]), 9)
        if g.xi > 1e-9:
            xi_added[gid] = g.xi

    lags = {gid: int(round(sol[var])) for gid, var in H.r.items()
            if abs(sol[var]) > 0.5}
    chosen = None
    for k, var in H.y.items():
        if sol[var] > 0.5:
            chosen = k
            break
    if chosen is None:
        return None
    ce = region.edges[chosen]

    try:
        retimed, renames = apply_retiming(work, RetimingAssignment(lags),
                                          return_renames=True)
    except NetlistError as exc:
        log.debug("removal %s: retime failed: %s", region.ff_id, exc)
        return None

    def nm(s):
        return renames.get(s, s)

    sink = nm(ce.sink)
    if sink not in retimed.gates:
        return None
    gsink = retimed.gates[sink]
    comb_src, chain = retimed.collapse_ffs(gsink.inputs[ce.sink_pin])
    if len(chain) != 1 or comb_src != nm(ce.source):
        log.debug("removal %s: edge mismatch after retime", region.ff_id)
        return None
    removed_ff = chain[0]
    del retimed.flipflops[removed_ff]
    gsink.inputs[ce.sink_pin] = comb_src
    try:
        retimed.validate()
    except NetlistError as exc:
        log.debug("removal %s: invalid after bypass: %s",
                  region.ff_id, exc)
        return None

    # exact verification: single-period legality must not regress, with
    # the bypassed pin severed from the per-cycle system exactly like the
    # model's fresh variables never seed across the removal
    fl, fe = masked_fresh_arrivals(retimed, [(sink, ce.sink_pin)], cfg)
    bad = _violations_from(retimed, cfg, fl, fe) - region.baseline_bad
    if bad:
        log.debug("removal %s: fresh regressions %s", region.ff_id, bad)
        return None

    late, early, captures, pos = wave_cone_arrivals(
        retimed, [(sink, ce.sink_pin)], cfg, (fl, fe))
    if pos:
        log.debug("removal %s: wave surfaces at outputs %s",
                  region.ff_id, pos)
        return None
    if not captures:
        return None
    for fid, (dmin, dmax) in captures.items():
        if not window_and_gray_ok(dmin, dmax, cfg):
            log.debug("removal %s: window fails at %s (%.3f, %.3f)",
                      region.ff_id, fid, dmin, dmax)
            return None

    records = []
    seen = set()
    for p in region.pairs:
        steps = [(nm(g), pin) for g, pin in p.steps]
        if any(g not in retimed.gates for g, _pin in steps):
            continue
        cap = p.capture
        if cap not in retimed.flipflops or cap not in captures:
            continue
        launch = _record_launch(retimed, steps)
        if launch is None:
            continue
        path = Path(launch=launch, steps=steps, capture=cap)
        if path.key() in seen:
            continue
        seen.add(path.key())
        sensitizable = is_true_path(retimed, path)
        if (region.kind == "false") == sensitizable:
            continue
        dmin, dmax = captures[cap]
        has_xor = any(retimed.gates[g].kind in ("XOR", "XNOR")
                      for g, _pin in steps)
        records.append(WpRecord(
            kind=region.kind, method="removal", site=region.ff_id,
            launch=launch, capture=cap, steps=steps,
            dmin=dmin, dmax=dmax,
            gray=classify_gray(dmax + cfg.t_su, cfg),
            has_xor=has_xor, removed=removed_ff))
    if not records:
        log.debug("removal %s: no record survived verification",
                  region.ff_id)
        return None

    live_renames = {old: new for old, new in renames.items()
                    if new in retimed.flipflops}
    return RemovalResult(netlist=retimed, records=records,
                         removed_ff=removed_ff,
                         removed_edge=(comb_src, sink, ce.sink_pin),
                         lags=lags, resized=resized, xi_added=xi_added,
                         wave_captures=captures, renames=live_renames,
                         n_nodes=sol.n_nodes, runtime=sol.runtime)


def construct_removal(netlist, check, cfg: TimingConfig, max_pairs=4,
                      backend=None):
    """Full removal flow for one screened candidate.

    build_region -> model -> solve -> apply with exact re-verification.
    Returns RemovalResult or None.
    """
    region = build_region(netlist, check, cfg, max_pairs)
    if region is None:
        return None
    sol, H = solve_removal(region, cfg, backend=backend)
    if sol is None:
        return None
    return apply_removal(region, sol, H, cfg)
