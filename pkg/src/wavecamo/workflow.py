"""Top-level construction loop and report metrics.

Runs the whole camouflage pass over a sequential netlist.  Flip-flops
are ranked by how much combinational delay converges on them and
filtered by sequential fan-in/fan-out; the survivors are visited in two
phases, false-kind paths first, then true-kind.  Each visited candidate
is screened for mergeable path pairs, constructed by register removal
with cone duplication as the fallback, signed off against the delay
library, cross-checked against every previously committed record, and
finally committed.  A committed site blocks its sequential neighborhood
so later constructions cannot disturb it.

The report summarizes the pass with the attacker-facing counts: how
many wave paths of each kind were built, how many ordinary
single-period paths already sit in the indistinguishable gray band, and
the overhead spent (delay adders, duplicated gates, extra registers).
"""

from __future__ import annotations

import logging
import math
import random
import time
from collections import Counter
from dataclasses import dataclass, field

from .netlist import sequential_adjacency
from .timing import (TimingConfig, Path, propagate_arrivals,
                     downstream_delay, classify_gray, path_arrival,
                     enumerate_left_paths)
from .falsepath import (is_true_path, check_wp_false_paths,
                        check_wp_true_paths)
from .wp_removal import construct_removal, window_and_gray_ok, _record_launch
from .wp_duplication import construct_duplication, verify_and_repair

log = logging.getLogger(__name__)


# -- candidate ordering --------------------------------------------------------


def sort_candidates(netlist, cfg: TimingConfig) -> list:
    """Rank flip-flops by converging path delay, largest first.

    The key of a flip-flop is the latest arrival at its D input plus the
    longest combinational delay leaving its Q, both from one global STA
    pass.  Ties break on id so the order is total and reproducible.
    """
    arr = propagate_arrivals(netlist, cfg)
    down = downstream_delay(netlist)
    key = {}
    for fid, ff in netlist.flipflops.items():
        key[fid] = arr.late.get(ff.d_input, 0.0) + down.get(fid, 0.0)
    return sorted(netlist.flipflops, key=lambda f: (-key[f], f))


def filter_candidates(order, netlist, cfg: TimingConfig) -> list:
    """Drop hub flip-flops with too many sequential sources or sinks.

    A flip-flop whose in-degree or out-degree in the sequential
    adjacency exceeds cfg.fanio_threshold converges too many paths for
    a clean wave construction and is skipped up front.
    """
    adj = sequential_adjacency(netlist)
    n_src = Counter()
    for fid, succs in adj.items():
        for s in succs:
            n_src[s] += 1
    thr = cfg.fanio_threshold
    return [f for f in order
            if len(adj.get(f, ())) <= thr and n_src[f] <= thr]


def resolve_dis_t(netlist, cfg: TimingConfig, adjacency=None) -> float:
    """Blocking radius between construction sites, in FF hops.

    cfg.dis_t when set; otherwise 10x the minimum pairwise flip-flop
    distance.  Under the hop metric that minimum is 1 whenever any two
    flip-flops are sequentially adjacent, so the default degenerates to
    10 hops (and to no blocking radius at all on netlists whose
    flip-flops never feed each other).
    """
    if cfg.dis_t is not None:
        return float(cfg.dis_t)
    if adjacency is None:
        adjacency = sequential_adjacency(netlist)
    has_edge = any(s != fid for fid, succs in adjacency.items()
                   for s in succs)
    return 10.0 if has_edge else math.inf


def _site_block(netlist, ff: str, dis_t: float, adjacency=None) -> set:
    """Flip-flops blocked by committing a site.

    The site itself, its sequential fan-in and fan-out, and every
    flip-flop strictly closer than dis_t hops on the undirected
    adjacency.
    """
    if adjacency is None:
        adjacency = sequential_adjacency(netlist)
    undirected = {f: set(s) for f, s in adjacency.items()}
    for f, succs in adjacency.items():
        for s in succs:
            undirected.setdefault(s, set()).add(f)
    blocked = {ff} | undirected.get(ff, set())
    dist = {ff: 0}
    frontier = [ff]
    while frontier:
        nxt = []
        for f in frontier:
            if dist[f] + 1 >= dis_t:
                continue
            for g in sorted(undirected.get(f, ())):
                if g not in dist:
                    dist[g] = dist[f] + 1
                    blocked.add(g)
                    nxt.append(g)
        frontier = nxt
    return blocked


# -- construction state --------------------------------------------------------


@dataclass
class ConstructionState:
    """Bookkeeping for one construction pass.

    Attributes
    ----------
    blocked : set
        Flip-flops excluded from candidacy (committed sites and their
        neighborhoods), tracked under current ids.
    order : list
        Filtered candidate order on the input netlist.
    n_wpf_left, n_wpt_left : int
        Remaining targets per kind; may go negative when one site
        yields several records (reports clamp at zero).
    records : list of WpRecord
        Committed, signoff-verified records.
    n_d : int
        Gates added by duplication (copies surviving pruning).
    n_r : int
        Extra registers introduced by retiming moves.
    n_pairs_screened : Counter
        Merged pairs surviving the screens, per kind, over all visited
        candidates (the construction-side candidate count).
    sites : list of dict
        One entry per committed site: ff, kind, method, record count,
        signoff statuses.
    dis_t : float
        Resolved blocking radius.
    runtime : float
        Wall-clock seconds of construct(); kept in memory only so that
        serialized artifacts stay byte-reproducible.
    """

    blocked: set = field(default_factory=set)
    order: list = field(default_factory=list)
    n_wpf_left: int = 0
    n_wpt_left: int = 0
    records: list = field(default_factory=list)
    n_d: int = 0
    n_r: int = 0
    n_pairs_screened: Counter = field(default_factory=Counter)
    sites: list = field(default_factory=list)
    dis_t: float = 0.0
    runtime: float = 0.0


def _records_hold(netlist, records, cfg: TimingConfig) -> bool:
    """Re-check that every committed record still holds on `netlist`.

    Guards against cross-site interference: a later construction could
    retime or prune logic under an earlier record.  Checks structure
    (steps wired consecutively, launch and capture intact), the window
    and gray band of the merged-path arrival, and the sensitization
    kind.
    """
    for rec in records:
        if rec.capture not in netlist.flipflops:
            return False
        if any(g not in netlist.gates for g, _pin in rec.steps):
            return False
        if _record_launch(netlist, rec.steps) != rec.launch:
            return False
        for (gid, pin), (prev, _p) in zip(rec.steps[1:], rec.steps[:-1]):
            if netlist.gates[gid].inputs[pin] != prev:
                return False
        if netlist.flipflops[rec.capture].d_input != rec.steps[-1][0]:
            return False
        path = Path(launch=rec.launch, steps=list(rec.steps),
                    capture=rec.capture)
        d = path_arrival(netlist, path, cfg)
        if not window_and_gray_ok(d, d, cfg):
            return False
        if is_true_path(netlist, path) != (rec.kind == "true"):
            return False
    return True


def construct(netlist, cfg: TimingConfig, seed: int = 0):
    """Run the two-phase construction pass over a netlist.

    The input netlist is not modified.  Candidates are visited at most
    once per phase in ranked order; each successful construction is
    signed off (verify_and_repair), cross-checked against all earlier
    records, committed, and its neighborhood blocked.  A phase stops
    when its target is met or candidates run out; shortfalls are
    reported, never forced.

    Parameters
    ----------
    netlist : Netlist
    cfg : TimingConfig
        cfg.n_wpf / cfg.n_wpt are the per-kind record targets.
    seed : int
        Drives path sampling inside the screens; fixed seed makes the
        whole pass deterministic.

    Returns
    -------
    (Netlist, ConstructionState)
    """
    t0 = time.perf_counter()
    cur = netlist.copy()
    adjacency = sequential_adjacency(cur)
    order = filter_candidates(sort_candidates(cur, cfg), cur, cfg)
    state = ConstructionState(order=list(order), n_wpf_left=cfg.n_wpf,
                              n_wpt_left=cfg.n_wpt,
                              dis_t=resolve_dis_t(cur, cfg, adjacency))
    phases = (("false", check_wp_false_paths),
              ("true", check_wp_true_paths))
    for kind, screen in phases:
        left = state.n_wpf_left if kind == "false" else state.n_wpt_left
        for i in range(len(order)):
            if left <= 0:
                break
            ff = order[i]
            if ff in state.blocked or ff not in cur.flipflops:
                continue
            chk = screen(cur, ff, cfg, seed)
            if chk is None or not chk.candidates:
                continue
            state.n_pairs_screened[kind] += len(chk.candidates)
            res = construct_removal(cur, chk, cfg)
            if res is None:
                res = construct_duplication(cur, chk, cfg)
            if res is None:
                log.debug("site %s (%s): construction refused", ff, kind)
                continue
            signed, statuses = verify_and_repair(res.netlist, res.records,
                                                 cfg)
            kept = [r for r, s in zip(res.records, statuses)
                    if s != "abandoned"]
            if not kept:
                log.debug("site %s (%s): signoff abandoned all records",
                          ff, kind)
                continue
            if not _records_hold(signed, state.records + kept, cfg):
                log.debug("site %s (%s): cross-site interference, "
                          "rolled back", ff, kind)
                continue
            # commit: neighborhood blocking uses the pre-construction
            # netlist (the candidate still exists there), then every
            # tracked id is mapped through the retiming renames
            block = _site_block(cur, ff, state.dis_t, adjacency)
            renames = res.renames
            prev_n_ffs = len(cur.flipflops)
            cur = signed
            state.records.extend(kept)
            method = kept[0].method
            if method == "duplication":
                state.n_d += len(res.dup_map)
                state.n_r += res.n_new_regs
            else:
                state.n_r += max(0, len(cur.flipflops) - prev_n_ffs + 1)
            state.blocked = {renames.get(b, b) for b in state.blocked}
            state.blocked |= {renames.get(b, b) for b in block}
            order = [renames.get(o, o) for o in order]
            adjacency = sequential_adjacency(cur)
            state.sites.append({
                "ff": ff, "kind": kind, "method": method,
                "records": len(kept), "statuses": list(statuses),
            })
            left -= len(kept)
            log.info("committed %s site %s via %s (%d records)",
                     kind, ff, method, len(kept))
        if kind == "false":
            state.n_wpf_left = left
        else:
            state.n_wpt_left = left
    state.runtime = time.perf_counter() - t0
    return cur, state


# -- reporting -----------------------------------------------------------------


def count_suspicious_paths(netlist, cfg: TimingConfig, seed: int = 0,
                           exclude=()):
    """Count single-period register-to-register paths in the gray band.

    Enumerates launch-to-D paths per flip-flop (falling back to seeded
    sampling past cfg.path_sample_limit), keeps those whose arrival
    classifies suspicious, and splits them by static sensitization.
    exclude is an iterable of (launch, steps) keys to skip, used to
    subtract constructed wave paths from the tally.

    Returns
    -------
    (n_true, n_false, exact) : (int, int, bool)
        Suspicious sensitizable / unsensitizable counts; exact is False
        when any flip-flop overflowed the enumeration cap and the
        counts are sample-based.
    """
    limit = cfg.path_sample_limit
    excl = {(launch, tuple(map(tuple, steps))) for launch, steps in exclude}
    n_t = n_f = 0
    exact = True
    for fid in sorted(netlist.flipflops):
        flop = netlist.flipflops[fid]
        paths = enumerate_left_paths(netlist, flop.d_input, limit)
        if len(paths) > limit:
            exact = False
            rng = random.Random(f"{seed}:{fid}")
            picked = sorted(rng.sample(range(len(paths)), limit))
            paths = [paths[j] for j in picked]
        for p in paths:
            p.capture = fid
            if (p.launch, tuple(map(tuple, p.steps))) in excl:
                continue
            d = path_arrival(netlist, p, cfg)
            if classify_gray(d + cfg.t_su, cfg) != "suspicious":
                continue
            if is_true_path(netlist, p):
                n_t += 1
            else:
                n_f += 1
    return n_t, n_f, exact


def report(state: ConstructionState, n_before, n_after,
           cfg: TimingConfig, seed: int = 0) -> dict:
    """Summarize a construction pass as a flat metrics document.

    Suspicious-path counts are measured on the delivered netlist with
    the constructed record paths excluded, so the attacker-facing
    totals decompose exactly as constructed + everything else: n'_x =
    n_wpx + n_x matches what the delay-estimation screen counts on the
    same netlist.  Inserted delay is reported in units of the library
    buffer delay (1.0 without a library), counting whole buffers per
    padded gate.  runtime_seconds is carried in the dict but writers
    drop it so serialized reports stay byte-reproducible.
    """
    unit = n_after.lib.buffer_delay if n_after.lib is not None else 1.0
    n_p = 0
    for g in n_after.gates.values():
        if g.xi > 1e-9:
            n_p += int(math.ceil(g.xi / unit - 1e-9))
    by_kind = Counter(r.kind for r in state.records)
    n_wpt = by_kind.get("true", 0)
    n_wpf = by_kind.get("false", 0)
    excl = {(r.launch, tuple(r.steps)) for r in state.records}
    n_t, n_f, exact = count_suspicious_paths(n_after, cfg, seed,
                                             exclude=excl)
    return {
        "n_ff_before": len(n_before.flipflops),
        "n_gate_before": len(n_before.gates),
        "n_ff_after": len(n_after.flipflops),
        "n_gate_after": len(n_after.gates),
        "n_wpt": n_wpt,
        "n_wpf": n_wpf,
        "n_t_suspicious": n_t,
        "n_f_suspicious": n_f,
        "n_t_prime": n_wpt + n_t,
        "n_f_prime": n_wpf + n_f,
        "n_t_candidates": state.n_pairs_screened.get("true", 0),
        "n_f_candidates": state.n_pairs_screened.get("false", 0),
        "n_p": n_p,
        "n_d": state.n_d,
        "n_r": state.n_r,
        "counts_mode": "exact" if exact else "sampled",
        "targets": {"n_wpf": cfg.n_wpf, "n_wpt": cfg.n_wpt},
        "shortfall": {"false": max(0, state.n_wpf_left),
                      "true": max(0, state.n_wpt_left)},
        "dis_t": state.dis_t,
        "sites": list(state.sites),
        "runtime_seconds": state.runtime,
    }


def ground_truth_doc(state: ConstructionState, cfg: TimingConfig,
                     seed: int = 0) -> dict:
    """Secret sidecar: the constructed records with their windows.

    In deployment this never leaves the design house; tests and the
    attack simulations read it as the oracle of which suspicious paths
    are real waves.
    """
    return {
        "seed": seed,
        "T": cfg.T,
        "tau": cfg.tau,
        "delta": cfg.delta,
        "records": [r.to_doc() for r in state.records],
    }
