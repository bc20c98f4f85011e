"""False-path analysis: static sensitization conditions and a small SAT core.

A path is statically sensitizable when some input assignment drives every
side input of every on-path gate to its non-controlling value.  XOR/XNOR
gates impose no side-input requirement (any side value propagates); paths
through them are flagged so reports can qualify the claim.

Wave-pair screening evaluates merged launch-to-capture paths on a bypass
view of the netlist in which the candidate flip-flop's Q is identified with
its D driver, i.e. the single-period circuit an attacker would analyze after
the flip-flop is removed.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .netlist import NONCONTROLLING_VALUE
from .timing import (Path, classify_gray, check_wp_window, path_arrival,
                     sample_paths)

SAT, UNSAT, UNKNOWN = "sat", "unsat", "unknown"


# -- SAT core -----------------------------------------------------------------


def solve_cnf(clauses, n_vars, decision_budget=10 ** 6):
    """DPLL with watched literals and chronological backtracking.

    Decisions pick the lowest-index unassigned variable, positive phase
    first, so results are deterministic.  Returns (status, model) where
    model maps var index -> 0/1 for SAT, else None.
    """
    for c in clauses:
        if not c:
            return UNSAT, None
    # literal index: positive var v -> 2v, negative -> 2v+1
    watches = [[] for _ in range(2 * n_vars + 2)]
    cl = [list(c) for c in clauses]
    assign = [-1] * (n_vars + 1)
    trail = []  # (var, was_decision)
    prop_queue = []

    def lit_idx(lit):
        return 2 * lit if lit > 0 else -2 * lit + 1

    def lit_val(lit):
        v = assign[abs(lit)]
        if v < 0:
            return -1
        return v if lit > 0 else 1 - v

    for ci, c in enumerate(cl):
        if len(c) == 1:
            prop_queue.append((c[0], False))
        else:
            watches[lit_idx(c[0])].append(ci)
            watches[lit_idx(c[1])].append(ci)

    def enqueue(lit, decision):
        v, val = abs(lit), (1 if lit > 0 else 0)
        if assign[v] >= 0:
            return assign[v] == val
        assign[v] = val
        trail.append((v, decision))
        pending.append(lit)
        return True

    decisions = 0
    pending = []
    # seed initial units
    for lit, _ in prop_queue:
        if lit_val(lit) == 0:
            return UNSAT, None
        if not enqueue(lit, False):
            return UNSAT, None

    def propagate():
        """Return a conflicting clause index or -1."""
        while pending:
            lit = pending.pop()
            falsified = lit_idx(-lit)
            wl = watches[falsified]
            i = 0
            while i < len(wl):
                ci = wl[i]
                c = cl[ci]
                # ensure the falsified literal sits at position 1
                if c[0] == -lit:
                    c[0], c[1] = c[1], c[0]
                if lit_val(c[0]) == 1:
                    i += 1
                    continue
                moved = False
                for j in range(2, len(c)):
                    if lit_val(c[j]) != 0:
                        c[1], c[j] = c[j], c[1]
                        watches[lit_idx(c[1])].append(ci)
                        wl[i] = wl[-1]
                        wl.pop()
                        moved = True
                        break
                if moved:
                    continue
                # clause is unit or conflicting on c[0]
                if lit_val(c[0]) == 0:
                    return ci
                if not enqueue(c[0], False):
                    return ci
                i += 1
        return -1

    while True:
        conflict = propagate()
        if conflict >= 0:
            # chronological backtrack to the last unflipped decision
            pending.clear()
            flipped = None
            while trail:
                v, was_decision = trail.pop()
                val = assign[v]
                assign[v] = -1
                if was_decision:
                    if val == 1:  # positive phase tried first; flip to 0
                        flipped = -v
                        break
            if flipped is None:
                return UNSAT, None
            # re-assign flipped value as a derived (non-decision) fact
            if not enqueue(flipped, False):
                return UNSAT, None
            continue
        v = next((i for i in range(1, n_vars + 1) if assign[i] < 0), None)
        if v is None:
            return SAT, {i: assign[i] for i in range(1, n_vars + 1)}
        decisions += 1
        if decisions > decision_budget:
            return UNKNOWN, None
        enqueue(v, True)


# -- sensitization conditions ---------------------------------------------------


@dataclass
class SensitizationCondition:
    """CNF encoding of "every side input is non-controlling".

    Attributes
    ----------
    clauses : list of list of int
        DIMACS-style clauses over 1-based variable indices.
    var_of : dict
        signal name -> variable index (bypass aliases already resolved).
    side_requirements : list of (signal, value)
        The unit requirements imposed on side inputs.
    has_xor : bool
        True when the path traverses an XOR/XNOR (no side requirement).
    trivially_false : bool
        True when a side requirement contradicts another on the same
        signal, making the path false without search.
    """

    clauses: list = field(default_factory=list)
    var_of: dict = field(default_factory=dict)
    side_requirements: list = field(default_factory=list)
    has_xor: bool = False
    trivially_false: bool = False

    @property
    def n_vars(self) -> int:
        return len(self.var_of)

    def to_dimacs(self) -> str:
        lines = [f"p cnf {self.n_vars} {len(self.clauses)}"]
        for c in self.clauses:
            lines.append(" ".join(str(l) for l in c) + " 0")
        return "\n".join(lines) + "\n"


def _gate_clauses(gate, out, ins):
    """Consistency clauses for one gate (output var, input vars)."""
    k = gate.kind
    if k in ("AND", "NAND"):
        o = out if k == "AND" else -out
        cl = [[-o, i] for i in ins]
        cl.append([o] + [-i for i in ins])
        return cl
    if k in ("OR", "NOR"):
        o = out if k == "OR" else -out
        cl = [[o, -i] for i in ins]
        cl.append([-o] + list(ins))
        return cl
    if k in ("NOT",):
        return [[out, ins[0]], [-out, -ins[0]]]
    if k in ("BUF",):
        return [[out, -ins[0]], [-out, ins[0]]]
    # XOR / XNOR: fold pairwise; caller provides fresh aux vars via closure
    raise AssertionError("xor handled separately")


def ff_equivalence(netlist) -> dict:
    """Map cloned flip-flops onto one canonical id per value stream.

    Two flip-flops with the same D driver and the same init value carry
    identical Q streams forever, so sensitization must treat their Qs as
    one signal: branch normalization and retiming clone registers, and
    leaving the clones independent would dissolve the reconvergent
    conflicts that make a path false.  Runs a fixpoint so chains of
    clones collapse too.  Returns {clone id: canonical id}.
    """
    canon = {}
    while True:
        groups = {}
        changed = False
        for fid in sorted(netlist.flipflops):
            ff = netlist.flipflops[fid]
            d = ff.d_input
            key = (canon.get(d, d), ff.init)
            rep = groups.setdefault(key, fid)
            if rep != fid and canon.get(fid) != rep:
                canon[fid] = rep
                changed = True
        if not changed:
            return canon


def build_condition(netlist, path: Path, alias: dict = None) -> SensitizationCondition:
    """Build the static sensitization CNF for a path.

    Parameters
    ----------
    alias : dict, optional
        Signal identification map (e.g. removed flip-flop Q -> its D
        driver) applied before variable allocation; used for merged-pair
        analysis on the bypass view.

    Notes
    -----
    Variables exist for every signal in the fan-in cones of the side
    inputs and of the on-path gates; flip-flop Qs and primary inputs are
    free.  Gate consistency clauses are emitted for all cone gates, so
    reconvergent conflicts (the classic false-path shape) become
    unsatisfiable cores.  Cloned flip-flops (same D, same init) share
    one variable for the same reason.
    """
    merged = ff_equivalence(netlist)
    if alias:
        merged.update(alias)
    alias = merged
    cond = SensitizationCondition()
    counter = [0]

    def resolve(sig):
        seen = set()
        while sig in alias:
            if sig in seen:
                raise ValueError("alias cycle")
            seen.add(sig)
            sig = alias[sig]
        return sig

    def var(sig):
        sig = resolve(sig)
        v = cond.var_of.get(sig)
        if v is None:
            counter[0] += 1
            v = counter[0]
            cond.var_of[sig] = v
        return v

    def fresh():
        counter[0] += 1
        return counter[0]

    def xor_clauses(out, ins, invert):
        cur = ins[0]
        for nxt in ins[1:-1]:
            aux = fresh()
            cond.clauses += [[-aux, cur, nxt], [-aux, -cur, -nxt],
                             [aux, -cur, nxt], [aux, cur, -nxt]]
            cur = aux
        last = ins[-1] if len(ins) > 1 else None
        if last is None:
            # single-input xor degenerates to buf/not
            a, b = out, cur
            if invert:
                cond.clauses += [[a, b], [-a, -b]]
            else:
                cond.clauses += [[a, -b], [-a, b]]
            return
        o = -out if invert else out
        cond.clauses += [[-o, cur, last], [-o, -cur, -last],
                         [o, -cur, last], [o, cur, -last]]

    # 1. side-input requirements
    requirements = {}
    on_path_gates = []
    for gid, pin in path.steps:
        gate = netlist.gates[gid]
        on_path_gates.append(gid)
        if gate.kind in ("XOR", "XNOR"):
            cond.has_xor = True
            continue
        if gate.kind in ("NOT", "BUF"):
            continue
        need = NONCONTROLLING_VALUE[gate.kind]
        for j, src in enumerate(gate.inputs):
            if j == pin:
                continue
            rsig = resolve(src)
            prev = requirements.get(rsig)
            if prev is not None and prev != need:
                cond.trivially_false = True
            requirements.setdefault(rsig, need)
            cond.side_requirements.append((rsig, need))

    # one unit per distinct (signal, value); a conflicting pair makes the
    # CNF unsatisfiable even without the trivially_false shortcut
    for sig, val in sorted(set(cond.side_requirements)):
        v = var(sig)
        cond.clauses.append([v if val == 1 else -v])

    # 2. consistency clauses over the side cones and the path itself
    cone = []
    seen = set()
    frontier = [resolve(s) for s, _ in cond.side_requirements]
    frontier += [resolve(g) for g in on_path_gates]
    while frontier:
        sig = frontier.pop()
        if sig in seen:
            continue
        seen.add(sig)
        if sig in netlist.gates:
            cone.append(sig)
            for src in netlist.gates[sig].inputs:
                frontier.append(resolve(src))
    for gid in sorted(cone):
        gate = netlist.gates[gid]
        out = var(gid)
        ins = [var(s) for s in gate.inputs]
        if gate.kind in ("XOR", "XNOR"):
            xor_clauses(out, ins, invert=(gate.kind == "XNOR"))
        else:
            cond.clauses += _gate_clauses(gate, out, ins)
    return cond


def is_true_path(netlist, path: Path, alias: dict = None,
                 decision_budget: int = 10 ** 6) -> bool:
    """True iff the path is statically sensitizable.

    A solver budget exhaustion counts as sensitizable: treating undecided
    paths as true keeps screening counts conservative for the defender.
    """
    cond = build_condition(netlist, path, alias)
    if cond.trivially_false:
        return False
    status, _model = solve_cnf(cond.clauses, cond.n_vars, decision_budget)
    return status != UNSAT


# -- wave-pair screening ----------------------------------------------------------


@dataclass
class WpPairCheck:
    """Result of screening a flip-flop for wave-pipelining pairs.

    Attributes
    ----------
    ff : str
        Candidate flip-flop id.
    kind : str
        "false" or "true": the record kind the candidates would yield.
    candidates : list of Path
        Merged launch-to-capture paths that pass the sensitization and
        window screens (capture set to the right-side capture FF).
    n_left, n_right : int
        Individually-true path counts per side after sampling.
    n_pairs : int
        Merged pairs examined.
    has_xor : bool
        True when any candidate traverses an XOR/XNOR.
    """

    ff: str
    kind: str
    candidates: list = field(default_factory=list)
    n_left: int = 0
    n_right: int = 0
    n_pairs: int = 0
    has_xor: bool = False


def bypass_alias(netlist, ff_id: str) -> dict:
    """Alias map identifying a flip-flop's Q with its D driver."""
    return {ff_id: netlist.flipflops[ff_id].d_input}


def _screen_pairs(netlist, ff_id, cfg, seed, want_false):
    flop = netlist.flipflops[ff_id]
    limit = cfg.path_sample_limit
    left = sample_paths(netlist, ff_id, "left", limit, seed)
    right = [p for p in sample_paths(netlist, ff_id, "right", limit, seed + 1)
             if p.capture and not p.capture.startswith("po::")
             and p.capture != ff_id]
    # individually false paths cannot carry a functional wave either way
    left = [p for p in left if is_true_path(netlist, p)]
    right = [p for p in right if is_true_path(netlist, p)]
    alias = bypass_alias(netlist, ff_id)
    check = WpPairCheck(ff=ff_id, kind="false" if want_false else "true",
                        n_left=len(left), n_right=len(right))
    seed_rng = random.Random(seed + 2)
    pairs = [(l, r) for l in left for r in right]
    if len(pairs) > limit:
        idx = sorted(seed_rng.sample(range(len(pairs)), limit))
        pairs = [pairs[i] for i in idx]
    for l, r in pairs:
        check.n_pairs += 1
        merged = Path(l.launch, l.steps + r.steps, r.capture)
        sensitizable = is_true_path(netlist, merged, alias)
        keep = (not sensitizable) if want_false else sensitizable
        if not keep:
            continue
        d = path_arrival(netlist, merged, cfg)
        if not check_wp_window(d, d, cfg):
            continue
        if classify_gray(d + cfg.t_su, cfg) != "suspicious":
            continue
        cond = build_condition(netlist, merged, alias)
        check.has_xor = check.has_xor or cond.has_xor
        check.candidates.append(merged)
    return check


def check_wp_false_paths(netlist, ff_id: str, cfg, seed: int = 0) -> WpPairCheck:
    """Screen a flip-flop for wave-pipelining FALSE path pairs.

    Pairs of individually-true left/right paths are merged on the bypass
    view; a candidate must be statically false there, sit inside the wave
    window at typical delays, and classify suspicious.
    """
    return _screen_pairs(netlist, ff_id, cfg, seed, want_false=True)


def check_wp_true_paths(netlist, ff_id: str, cfg, seed: int = 0) -> WpPairCheck:
    """Screen a flip-flop for wave-pipelining TRUE path pairs.

    Same screens as the false variant, except the merged path must remain
    statically sensitizable on the bypass view.
    """
    return _screen_pairs(netlist, ff_id, cfg, seed, want_false=False)
