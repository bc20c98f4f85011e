"""Retiming algebra: weight arithmetic, legality, netlist materialization.

The weighted view assigns every consumer pin one edge whose weight is the
number of flip-flops collapsed onto it.  A retiming assignment maps gates to
integer lag values (ports are pinned to zero); the retimed weight of an edge
is w(e) + r(sink) - r(source).  Legality demands non-negative retimed
weights everywhere and that every combinational path longer than the clock
period keeps at least one flip-flop.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .netlist import FlipFlop, Netlist, NetlistError, normalize_ff_branches


@dataclass
class RetimingAssignment:
    """Gate lag values; ports and unlisted gates are implicitly zero."""

    lags: dict = field(default_factory=dict)

    def r(self, node: str) -> int:
        # port pseudo-nodes ("po::x") and PIs never appear in lags
        return self.lags.get(node, 0)

    def items(self):
        return sorted(self.lags.items())


def retimed_weight(net, assignment: RetimingAssignment) -> int:
    """Retimed edge weight w(e) + r(sink) - r(source)."""
    return net.weight + assignment.r(net.sink) - assignment.r(net.source)


def path_weight(nets, assignment: RetimingAssignment) -> int:
    """Total retimed weight along consecutive edges of a path.

    Interior lag terms telescope: the result equals the original path
    weight plus r(last sink) - r(first source).
    """
    return sum(retimed_weight(e, assignment) for e in nets)


@dataclass
class LegalityReport:
    ok: bool
    negative_edges: list = field(default_factory=list)
    zero_weight_cycle: bool = False
    longest_zero_weight_delay: float = 0.0
    period_violations: list = field(default_factory=list)


def is_legal(netlist: Netlist, assignment: RetimingAssignment, cfg) -> LegalityReport:
    """Check retiming legality against a clock period.

    Non-negativity must hold on every branch edge, the zero-weight subgraph
    must stay acyclic, and no zero-weight path may have combinational delay
    exceeding cfg.T.  Returns a report with the violations found.
    """
    rep = LegalityReport(ok=True)
    nets = netlist.branch_nets()
    zero_edges = []
    for e in nets:
        wr = retimed_weight(e, assignment)
        if wr < 0:
            rep.negative_edges.append((e.source, e.sink, e.sink_pin, wr))
        elif wr == 0 and e.sink in netlist.gates:
            zero_edges.append(e)
    if rep.negative_edges:
        rep.ok = False

    # longest zero-weight path delay by DP over the zero-weight subgraph
    indeg = {}
    succ = {}
    nodes = set()
    for e in zero_edges:
        nodes.add(e.source)
        nodes.add(e.sink)
        succ.setdefault(e.source, []).append(e)
        indeg[e.sink] = indeg.get(e.sink, 0) + 1
    ready = sorted(n for n in nodes if indeg.get(n, 0) == 0)
    longest = {n: 0.0 for n in ready}
    order = []
    while ready:
        u = ready.pop(0)
        order.append(u)
        for e in sorted(succ.get(u, ()), key=lambda e: (e.sink, e.sink_pin)):
            gate = netlist.gates[e.sink]
            cand = longest.get(u, 0.0) + gate.pin_delay(e.sink_pin)
            if cand > longest.get(e.sink, 0.0):
                longest[e.sink] = cand
            indeg[e.sink] -= 1
            if indeg[e.sink] == 0:
                ready.append(e.sink)
    if len(order) != len(nodes):
        rep.zero_weight_cycle = True
        rep.ok = False
    if longest:
        rep.longest_zero_weight_delay = max(longest.values())
        for node, d in sorted(longest.items()):
            if d > cfg.T:
                rep.period_violations.append((node, d))
    if rep.period_violations:
        rep.ok = False
    return rep


def ff_count_delta(netlist: Netlist, assignment: RetimingAssignment) -> int:
    """Predicted flip-flop count change: sum of r(g) * (fan-in - fan-out).

    Fan-out counts branch edges (one per ultimate consumer pin).  Exact for
    per-branch materialization on a branch-normalized netlist.
    """
    out_branches = {}
    for e in netlist.branch_nets():
        out_branches[e.source] = out_branches.get(e.source, 0) + 1
    delta = 0
    for gid, r in assignment.lags.items():
        gate = netlist.gates.get(gid)
        if gate is None or r == 0:
            continue
        delta += r * (gate.n_inputs - out_branches.get(gid, 0))
    return delta


def apply_retiming(netlist: Netlist, assignment: RetimingAssignment,
                   return_renames: bool = False):
    """Materialize a retiming assignment into a new netlist.

    Per-branch semantics: every consumer pin's edge gets its own flip-flop
    chain of length w_r(e); chains are never shared between branches.  Edges
    whose weight is unchanged keep their original flip-flop records (ids,
    init values, flags); changed edges get fresh flip-flops marked
    is_retimed with init 0.  Raises NetlistError on negative retimed
    weights.

    Primary outputs reference signals by name, so a PO edge whose weight
    changes renames the affected gate: a PO edge gaining its first
    flip-flop renames the driving gate (the chain's last flop takes the PO
    name); a PO edge dropping to weight 0 renames the driving gate to the
    PO name.  PI-sourced PO edges cannot change weight.

    Notes
    -----
    Retimed flip-flops start at init 0, so the retimed circuit matches the
    original only after a warm-up prefix; equivalence checking skips
    warm-up cycles for exactly this reason.

    With return_renames=True the result is (netlist, renames) where
    renames maps original gate ids to their post-retiming names.
    """
    # split only the flip-flops the moves actually touch: cloning a
    # shared register that no move reaches would needlessly blur its
    # fanout reconvergence on the final netlist
    readers = netlist.readers()
    split = set()
    for e in netlist.branch_nets():
        if retimed_weight(e, assignment) != e.weight:
            for fid in e.ffs:
                if len(readers.get(fid, ())) > 1:
                    split.add(fid)
    base = normalize_ff_branches(netlist, only=split)
    nets = base.branch_nets()
    wr_of = {}
    for e in nets:
        wr = retimed_weight(e, assignment)
        if wr < 0:
            raise NetlistError(
                f"negative retimed weight on {e.source}->{e.sink}")
        wr_of[id(e)] = wr

    # gate renames forced by PO edges whose weight changes
    rename: dict = {}
    taken = (set(base.gates) | set(base.flipflops)
             | set(base.primary_inputs) | set(base.primary_outputs))
    for e in nets:
        if not e.sink.startswith("po::"):
            continue
        po = e.sink[4:]
        wr = wr_of[id(e)]
        if wr == e.weight:
            continue
        if e.source in base.primary_inputs:
            raise NetlistError(
                f"retiming would change weight on PI-to-PO edge {po!r}")
        if e.source in rename:
            raise NetlistError(
                f"gate {e.source!r} needs two conflicting renames; "
                "retime fewer PO-adjacent gates")
        if e.weight == 0 and wr > 0:
            new = po + "__g"
            while new in taken:
                new += "_"
            taken.add(new)
            rename[e.source] = new
        elif wr == 0:
            rename[e.source] = po

    def nm(sig):
        return rename.get(sig, sig)

    out = Netlist(base.name, base.lib)
    out.primary_inputs = list(base.primary_inputs)
    out.primary_outputs = list(base.primary_outputs)
    for g in base.gates.values():
        c = g.copy()
        c.id = nm(c.id)
        c.inputs = [nm(s) for s in c.inputs]
        out.add_gate(c)

    counter = [0]

    def fresh_chain(src, length, final_name=None):
        sig = src
        for k in range(length):
            if final_name is not None and k == length - 1:
                fid = final_name
            else:
                counter[0] += 1
                fid = f"rt{counter[0]}"
                while fid in taken:
                    counter[0] += 1
                    fid = f"rt{counter[0]}"
                taken.add(fid)
            out.add_flipflop(FlipFlop(fid, sig, is_retimed=True))
            sig = fid
        return sig

    for e in nets:
        wr = wr_of[id(e)]
        if wr == e.weight:
            for fid in e.ffs:
                if fid in out.flipflops:
                    continue  # register shared by an earlier branch
                ff = base.flipflops[fid].copy()
                ff.d_input = nm(ff.d_input)
                out.add_flipflop(ff)
            continue
        if e.sink.startswith("po::"):
            po = e.sink[4:]
            if wr > 0:
                fresh_chain(nm(e.source), wr, final_name=po)
            # wr == 0: the source gate was renamed to the PO name
            continue
        last = fresh_chain(nm(e.source), wr)
        out.gates[nm(e.sink)].inputs[e.sink_pin] = last
    out.validate()
    if return_renames:
        return out, dict(rename)
    return out
