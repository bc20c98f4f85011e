"""Gate-level netlist core: data model, ISCAS89-style parsing, graph views.

The netlist model is deliberately small: gates and flip-flops keyed by the
signal they drive, primary inputs and outputs as ordered name lists.  Every
signal has exactly one driver (a PI, a gate output, or a flip-flop Q).  All
container iteration happens in insertion or sorted order so that every
downstream algorithm is deterministic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

# Supported gate kinds.  Controlling value c: a single input at c fixes the
# output regardless of the others; XOR/XNOR have none.
GATE_KINDS = ("AND", "NAND", "OR", "NOR", "NOT", "BUF", "XOR", "XNOR")

CONTROLLING_VALUE = {"AND": 0, "NAND": 0, "OR": 1, "NOR": 1}

# Output value when a controlling input is present.
CONTROLLED_OUTPUT = {"AND": 0, "NAND": 1, "OR": 1, "NOR": 0}

# Non-controlling value for side inputs (complement of the controlling one).
NONCONTROLLING_VALUE = {k: 1 - v for k, v in CONTROLLING_VALUE.items()}


def eval_gate(kind: str, values) -> int:
    """Evaluate a gate of `kind` on a sequence of 0/1 input values."""
    if kind == "AND":
        return int(all(values))
    if kind == "NAND":
        return int(not all(values))
    if kind == "OR":
        return int(any(values))
    if kind == "NOR":
        return int(not any(values))
    if kind == "NOT":
        return 1 - values[0]
    if kind == "BUF":
        return int(values[0])
    if kind == "XOR":
        return int(sum(values) % 2)
    if kind == "XNOR":
        return int(1 - (sum(values) % 2))
    raise ValueError(f"unknown gate kind {kind!r}")


@dataclass
class Gate:
    """A combinational gate.

    Attributes
    ----------
    id : str
        Output signal name; unique across the netlist.
    kind : str
        One of GATE_KINDS.
    inputs : list of str
        Driving signal per pin, in pin order.
    pin_delays : list of float
        Propagation delay per pin (library row entry), all > 0.
    size_level : int
        Index of the selected size row in the delay library.
    xi : float
        Extra camouflage delay added to every pin of this gate.
    """

    id: str
    kind: str
    inputs: list
    pin_delays: list = field(default_factory=list)
    size_level: int = 0
    xi: float = 0.0

    @property
    def n_inputs(self) -> int:
        return len(self.inputs)

    def pin_delay(self, pin: int) -> float:
        """Total per-pin delay including the camouflage adder."""
        return self.pin_delays[pin] + self.xi

    def copy(self) -> "Gate":
        return Gate(self.id, self.kind, list(self.inputs),
                    list(self.pin_delays), self.size_level, self.xi)


@dataclass
class FlipFlop:
    """A D flip-flop; `id` is the Q output signal name."""

    id: str
    d_input: str
    is_retimed: bool = False
    init: int = 0

    @property
    def q_output(self) -> str:
        return self.id

    def copy(self) -> "FlipFlop":
        return FlipFlop(self.id, self.d_input, self.is_retimed, self.init)


@dataclass
class Net:
    """A weighted connection in the retiming graph view.

    One Net per consumer pin, with the flip-flops between the combinational
    source and the sink collapsed into `ffs` (source-to-sink order).  `weight`
    equals len(ffs).  `sink` is a gate id or a `"po::name"` pseudo-node.
    """

    source: str
    sink: str
    sink_pin: int
    ffs: list

    @property
    def weight(self) -> int:
        return len(self.ffs)


class NetlistError(ValueError):
    pass


class Netlist:
    """A sequential gate-level circuit.

    Parameters
    ----------
    name : str
        Circuit name, used in reports and serialized files.
    lib : DelayLibrary or None
        Delay annotation attached at parse time; shared, not copied.
    """

    def __init__(self, name: str = "", lib=None):
        self.name = name
        self.lib = lib
        self.gates: dict = {}
        self.flipflops: dict = {}
        self.primary_inputs: list = []
        self.primary_outputs: list = []

    # -- construction ----------------------------------------------------

    def add_input(self, name: str) -> None:
        self.primary_inputs.append(name)

    def add_output(self, name: str) -> None:
        self.primary_outputs.append(name)

    def add_gate(self, gate: Gate) -> Gate:
        if gate.id in self.gates or gate.id in self.flipflops:
            raise NetlistError(f"duplicate driver for signal {gate.id!r}")
        if not gate.pin_delays:
            gate.pin_delays = [1.0] * len(gate.inputs)
        self.gates[gate.id] = gate
        return gate

    def add_flipflop(self, ff: FlipFlop) -> FlipFlop:
        if ff.id in self.gates or ff.id in self.flipflops:
            raise NetlistError(f"duplicate driver for signal {ff.id!r}")
        self.flipflops[ff.id] = ff
        return ff

    # -- lookups ---------------------------------------------------------

    def driver_of(self, signal: str):
        """Return ("gate", Gate) | ("ff", FlipFlop) | ("pi", name)."""
        g = self.gates.get(signal)
        if g is not None:
            return ("gate", g)
        f = self.flipflops.get(signal)
        if f is not None:
            return ("ff", f)
        if signal in self._pi_set():
            return ("pi", signal)
        raise NetlistError(f"signal {signal!r} has no driver")

    def _pi_set(self):
        pis = getattr(self, "_pis_cache", None)
        if pis is None or len(pis) != len(self.primary_inputs):
            pis = set(self.primary_inputs)
            self._pis_cache = pis
        return pis

    def readers(self) -> dict:
        """Map signal -> list of consumers.

        Consumers are ("gate", gate_id, pin), ("ff", ff_id, 0) and
        ("po", name, 0), in deterministic enumeration order.
        """
        out: dict = {}
        for g in self.gates.values():
            for pin, src in enumerate(g.inputs):
                out.setdefault(src, []).append(("gate", g.id, pin))
        for f in self.flipflops.values():
            out.setdefault(f.d_input, []).append(("ff", f.id, 0))
        for name in self.primary_outputs:
            out.setdefault(name, []).append(("po", name, 0))
        return out

    def topo_gates(self) -> list:
        """Gates in combinational topological order (inputs before users)."""
        indeg = {}
        users = {}
        for g in self.gates.values():
            cnt = 0
            for src in g.inputs:
                if src in self.gates:
                    cnt += 1
                    users.setdefault(src, []).append(g.id)
            indeg[g.id] = cnt
        ready = [gid for gid, d in indeg.items() if d == 0]
        order = []
        while ready:
            gid = ready.pop(0)
            order.append(self.gates[gid])
            for uid in users.get(gid, ()):
                indeg[uid] -= 1
                if indeg[uid] == 0:
                    ready.append(uid)
        if len(order) != len(self.gates):
            raise NetlistError("combinational cycle detected")
        return order

    def validate(self) -> None:
        """Check structural invariants; raise NetlistError on violation."""
        seen = set()
        for name in self.primary_inputs:
            if name in seen or name in self.gates or name in self.flipflops:
                raise NetlistError(f"duplicate driver for signal {name!r}")
            seen.add(name)
        for g in self.gates.values():
            if g.kind not in GATE_KINDS:
                raise NetlistError(f"gate {g.id!r}: unknown kind {g.kind!r}")
            if g.kind in ("NOT", "BUF") and g.n_inputs != 1:
                raise NetlistError(f"gate {g.id!r}: {g.kind} needs 1 input")
            if g.kind not in ("NOT", "BUF") and g.n_inputs < 1:
                raise NetlistError(f"gate {g.id!r}: no inputs")
            if len(g.pin_delays) != g.n_inputs:
                raise NetlistError(f"gate {g.id!r}: pin_delays length mismatch")
            if any(d <= 0 for d in g.pin_delays):
                raise NetlistError(f"gate {g.id!r}: non-positive pin delay")
            if g.xi < 0:
                raise NetlistError(f"gate {g.id!r}: negative xi")
            for src in g.inputs:
                self.driver_of(src)
        for f in self.flipflops.values():
            self.driver_of(f.d_input)
        for name in self.primary_outputs:
            self.driver_of(name)
        self.topo_gates()  # raises on combinational cycles

    def copy(self) -> "Netlist":
        n = Netlist(self.name, self.lib)
        n.primary_inputs = list(self.primary_inputs)
        n.primary_outputs = list(self.primary_outputs)
        n.gates = {gid: g.copy() for gid, g in self.gates.items()}
        n.flipflops = {fid: f.copy() for fid, f in self.flipflops.items()}
        return n

    # -- weighted graph view ----------------------------------------------

    def collapse_ffs(self, signal: str):
        """Walk back through flip-flops from `signal`.

        Returns (combinational_source, ffs) with ffs in source-to-sink
        order; combinational_source is a gate id or PI name.
        """
        chain = []
        src = signal
        while src in self.flipflops:
            ff = self.flipflops[src]
            chain.append(ff.id)
            src = ff.d_input
        chain.reverse()
        return src, chain

    def branch_nets(self) -> list:
        """Weighted retiming-view edges, one per consumer pin.

        Flip-flop chains collapse onto the edge; a flip-flop whose Q fans out
        to several consumers appears on each of those edges.
        """
        nets = []
        for g in self.gates.values():
            for pin, src in enumerate(g.inputs):
                comb_src, chain = self.collapse_ffs(src)
                nets.append(Net(comb_src, g.id, pin, chain))
        for name in self.primary_outputs:
            comb_src, chain = self.collapse_ffs(name)
            nets.append(Net(comb_src, "po::" + name, 0, chain))
        return nets

    def total_weight(self) -> int:
        return sum(n.weight for n in self.branch_nets())


def normalize_ff_branches(netlist: Netlist, only=None) -> Netlist:
    """Split flip-flops whose Q fans out, so every FF Q has one consumer.

    Function-preserving: each extra consumer gets a clone with the same D
    driver and init value.  Retiming requires per-branch independence; on
    netlists that are already single-sink this is the identity (same ids).

    Parameters
    ----------
    only : set of str, optional
        When given, split just these flip-flops; cloning registers the
        construction never moves would only blur their fanout sharing.
    """
    n = netlist.copy()
    readers = n.readers()
    # NOTE: iterate over a snapshot; clones never need splitting again
    # because each is created with exactly one consumer.  POs reference
    # signals by name, so when a PO reads the Q the original keeps its id
    # and the other consumers get the clones.
    for fid in list(n.flipflops.keys()):
        if only is not None and fid not in only:
            continue
        ff = n.flipflops[fid]
        cons = readers.get(fid, [])
        if len(cons) <= 1:
            continue
        cons = sorted(cons, key=lambda c: 0 if c[0] == "po" else 1)
        for k, (ckind, cid, pin) in enumerate(cons[1:], start=1):
            if ckind == "po":
                raise NetlistError(
                    f"flip-flop {fid!r} feeds more than one primary output")
            clone = FlipFlop(f"{fid}__b{k}", ff.d_input, ff.is_retimed, ff.init)
            n.add_flipflop(clone)
            if ckind == "gate":
                n.gates[cid].inputs[pin] = clone.id
            else:
                n.flipflops[cid].d_input = clone.id
    return n


# -- ISCAS89-style bench format ------------------------------------------


def parse_bench(text: str, delays=None, name: str = "") -> Netlist:
    """Parse an ISCAS89-style .bench netlist.

    Parameters
    ----------
    text : str
        File content: INPUT(x) / OUTPUT(y) declarations, `z = KIND(a, b)`
        assignments, `#` comments.  DFF assignments become flip-flops.
    delays : DelayLibrary, optional
        When given, every gate gets its kind's (or instance override's)
        default size row resolved into pin_delays.
    name : str
        Circuit name stored on the netlist.

    Returns
    -------
    Netlist
        Validated netlist with the library attached.
    """
    n = Netlist(name, delays)
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        up = line.upper()
        if up.startswith("INPUT(") and line.endswith(")"):
            n.add_input(line[line.index("(") + 1:-1].strip())
            continue
        if up.startswith("OUTPUT(") and line.endswith(")"):
            n.add_output(line[line.index("(") + 1:-1].strip())
            continue
        if "=" not in line:
            raise NetlistError(f"unparseable line: {raw!r}")
        lhs, rhs = (s.strip() for s in line.split("=", 1))
        if "(" not in rhs or not rhs.endswith(")"):
            raise NetlistError(f"unparseable assignment: {raw!r}")
        kind = rhs[:rhs.index("(")].strip().upper()
        args = [a.strip() for a in rhs[rhs.index("(") + 1:-1].split(",")
                if a.strip()]
        if kind == "DFF":
            if len(args) != 1:
                raise NetlistError(f"DFF {lhs!r} needs exactly one input")
            n.add_flipflop(FlipFlop(lhs, args[0]))
            continue
        if kind == "BUFF":
            kind = "BUF"
        if kind not in GATE_KINDS:
            raise NetlistError(f"unknown gate kind {kind!r} in {raw!r}")
        gate = Gate(lhs, kind, args)
        if delays is not None:
            gate.size_level = delays.default_level(lhs, kind)
            gate.pin_delays = delays.pin_delays(lhs, kind, gate.size_level,
                                                len(args))
        n.add_gate(gate)
    n.validate()
    return n


def write_bench(netlist: Netlist) -> str:
    """Serialize a netlist to .bench text (deterministic ordering)."""
    lines = []
    if netlist.name:
        lines.append(f"# {netlist.name}")
    for name in netlist.primary_inputs:
        lines.append(f"INPUT({name})")
    for name in netlist.primary_outputs:
        lines.append(f"OUTPUT({name})")
    for fid in sorted(netlist.flipflops):
        ff = netlist.flipflops[fid]
        lines.append(f"{ff.id} = DFF({ff.d_input})")
    for gid in sorted(netlist.gates):
        g = netlist.gates[gid]
        lines.append(f"{g.id} = {g.kind}({', '.join(g.inputs)})")
    return "\n".join(lines) + "\n"


# -- sequential structure ------------------------------------------------


def sequential_adjacency(netlist: Netlist) -> dict:
    """Directed FF-to-FF adjacency through combinational logic.

    Returns
    -------
    dict
        ff_id -> sorted list of successor ff_ids.  A successor is any FF
        whose D cone consumes this FF's Q through zero or more gates.
    """
    readers = netlist.readers()
    adj = {}
    for fid in netlist.flipflops:
        succ = set()
        seen = set()
        frontier = [fid]
        while frontier:
            sig = frontier.pop()
            for kind, cid, _pin in readers.get(sig, ()):
                if kind == "ff":
                    succ.add(cid)
                elif kind == "gate" and cid not in seen:
                    seen.add(cid)
                    frontier.append(cid)
        adj[fid] = sorted(succ)
    return adj


def ff_distance(netlist: Netlist, a: str, b: str, adjacency: dict = None):
    """Hop distance between two FFs on the undirected sequential adjacency.

    Returns math.inf when disconnected.  The undirected metric is used for
    blocking radii: proximity should not depend on signal direction.
    """
    if a == b:
        return 0
    if adjacency is None:
        adjacency = sequential_adjacency(netlist)
    undirected = {f: set(s) for f, s in adjacency.items()}
    for f, succs in adjacency.items():
        for s in succs:
            undirected.setdefault(s, set()).add(f)
    dist = {a: 0}
    frontier = [a]
    while frontier:
        nxt = []
        for f in frontier:
            for g in sorted(undirected.get(f, ())):
                if g not in dist:
                    dist[g] = dist[f] + 1
                    if g == b:
                        return dist[g]
                    nxt.append(g)
        frontier = nxt
    return math.inf
