"""Static timing: arrival propagation, path objects, gray-region math.

Arrival convention: flip-flop Q outputs launch at t_cq after the clock edge,
primary inputs at pi_arrival (0 by default).  A Path's `delay` is the plain
sum of per-pin gate delays (camouflage adders included); `path_arrival` adds
the launch seed and is the quantity all window checks and records use,
because it is what the capture flip-flop physically sees.
"""

from __future__ import annotations

import json
import logging
import random
from dataclasses import dataclass, field, asdict

log = logging.getLogger(__name__)


@dataclass
class TimingConfig:
    """Clocking, margins, targets and solver knobs.

    Parameters
    ----------
    T : float
        Clock period.
    tau : float
        Attacker delay-estimation error bound (fraction of delay).
    delta : float
        PVT derate applied to wave-path bounds (fraction of delay).
    t_su, t_h, t_cq : float
        Flip-flop setup, hold and clock-to-Q.
    n_wpf, n_wpt : int
        Construction targets: wave-pipelined false / true path records.
    dis_t : float or None
        Blocking radius between construction sites in FF hops; None picks
        10x the minimum pairwise FF distance of the netlist.
    path_sample_limit : int
        Cap on enumerated/sampled paths per flip-flop side.
    fanio_threshold : int
        Candidate FFs with more fan-in or fan-out nets are skipped.
    xi_max : float
        Upper bound of the camouflage delay per gate, in buffer-delay units.
    alpha, beta, gamma : float
        Objective weights (delay adders, gate downsizing reward, retiming
        register cost); alpha >= gamma >= beta > 0.
    warmup_cycles : int
        Cycles excluded from equivalence comparison.
    M : float or None
        Big-M for conditional constraints; None picks 4*T.
    """

    T: float
    tau: float = 0.2
    delta: float = 0.15
    t_su: float = 0.2
    t_h: float = 0.1
    t_cq: float = 0.3
    n_wpf: int = 0
    n_wpt: int = 0
    dis_t: float = None
    path_sample_limit: int = 500
    fanio_threshold: int = 30
    xi_max: float = 4.0
    alpha: float = 100.0
    beta: float = 0.01
    gamma: float = 10.0
    warmup_cycles: int = 2
    M: float = None
    # engineering knobs (not part of the core contract)
    pi_arrival: float = 0.0
    region_gate_cap: int = 60
    retime_radius: int = 2
    milp_node_budget: int = 4000
    milp_time_budget: float = 30.0
    milp_rel_gap: float = 0.02
    repair_max_iters: int = 8
    screen_path_cap: int = 4000

    def __post_init__(self):
        if self.T <= 0:
            raise ValueError("T must be positive")
        if not 0 < self.tau < 1:
            raise ValueError("tau must be in (0, 1)")
        if not 0 <= self.delta < 1:
            raise ValueError("delta must be in [0, 1)")
        if min(self.t_su, self.t_h, self.t_cq) < 0:
            raise ValueError("flip-flop timing must be non-negative")
        if not (self.alpha >= self.gamma >= self.beta > 0):
            raise ValueError("objective weights need alpha >= gamma >= beta > 0")
        if self.M is not None and self.M < 4 * self.T:
            raise ValueError("M must be at least 4*T")
        if self.n_wpf < 0 or self.n_wpt < 0:
            raise ValueError("targets must be non-negative")

    @property
    def big_m(self) -> float:
        return 4 * self.T if self.M is None else self.M

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=1, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "TimingConfig":
        return cls(**json.loads(text))

    def replace(self, **kw) -> "TimingConfig":
        doc = asdict(self)
        doc.update(kw)
        return TimingConfig(**doc)


@dataclass
class ArrivalTimes:
    """Late/early arrival per signal, launch seeds included."""

    late: dict = field(default_factory=dict)
    early: dict = field(default_factory=dict)

    def late_of(self, signal: str) -> float:
        return self.late[signal]

    def early_of(self, signal: str) -> float:
        return self.early[signal]


def propagate_arrivals(netlist, cfg: TimingConfig) -> ArrivalTimes:
    """Forward static timing over one clock period.

    Flip-flop Qs seed at t_cq, primary inputs at pi_arrival; every gate
    output gets late (max) and early (min) arrivals over its pins.
    """
    arr = ArrivalTimes()
    for name in netlist.primary_inputs:
        arr.late[name] = arr.early[name] = cfg.pi_arrival
    for fid in netlist.flipflops:
        arr.late[fid] = arr.early[fid] = cfg.t_cq
    for gate in netlist.topo_gates():
        late = max(arr.late[src] + gate.pin_delay(pin)
                   for pin, src in enumerate(gate.inputs))
        early = min(arr.early[src] + gate.pin_delay(pin)
                    for pin, src in enumerate(gate.inputs))
        arr.late[gate.id] = late
        arr.early[gate.id] = early
    return arr


@dataclass
class Path:
    """A combinational path from a launch point to a capture point.

    Attributes
    ----------
    launch : str
        Launching signal: a flip-flop Q or a primary input name.
    steps : list of (gate_id, pin)
        Gates traversed in order, with the input pin used at each.
    capture : str or None
        Capturing flip-flop id, a "po::name" pseudo-node, or None for a
        path fragment that ends at the last step's output.
    """

    launch: str
    steps: list
    capture: str = None

    @property
    def gate_ids(self) -> list:
        return [gid for gid, _pin in self.steps]

    def delay(self, netlist) -> float:
        """Sum of per-pin delays along the path (xi adders included)."""
        total = 0.0
        for gid, pin in self.steps:
            total += netlist.gates[gid].pin_delay(pin)
        return total

    def end_signal(self, netlist) -> str:
        return self.steps[-1][0] if self.steps else self.launch

    def key(self) -> tuple:
        return (self.launch, tuple(self.steps), self.capture)


def launch_seed(netlist, cfg: TimingConfig, signal: str) -> float:
    """Arrival seed of a launch point: t_cq for FFs, pi_arrival for PIs."""
    return cfg.t_cq if signal in netlist.flipflops else cfg.pi_arrival


def path_delay(netlist, path: Path, cfg: TimingConfig = None,
               mode: str = "typical") -> float:
    """Path delay in typical or lookup mode (launch seed excluded).

    Lookup mode chains slew through the library tables: each gate's delay
    is interpolated at (input slew, output load) for its selected size row;
    camouflage adders are applied unchanged.  Out-of-table points clamp to
    the table edge and log a warning.
    """
    if mode == "typical":
        return path.delay(netlist)
    if mode != "lookup":
        raise ValueError(f"unknown path_delay mode {mode!r}")
    lib = netlist.lib
    if lib is None or not lib.has_lookup():
        raise ValueError("lookup mode needs a library with tables")
    readers = netlist.readers()
    slew = lib.launch_slew
    total = 0.0
    for gid, _pin in path.steps:
        gate = netlist.gates[gid]
        load = lib.load_of(len(readers.get(gid, ())) or 1)
        d, slew, clamped = lib.lookup_delay(gate.kind, gate.size_level,
                                            slew, load)
        if clamped:
            log.warning("lookup table clamped for gate %s (slew=%.4g load=%.4g)",
                        gid, slew, load)
        total += d + gate.xi
    return total


def path_arrival(netlist, path: Path, cfg: TimingConfig,
                 mode: str = "typical") -> float:
    """Launch-to-capture arrival: launch seed plus path delay."""
    return launch_seed(netlist, cfg, path.launch) + path_delay(
        netlist, path, cfg, mode)


# -- path enumeration and sampling -------------------------------------------


def _left_expansions(netlist, signal):
    """Predecessor steps of `signal`: [] when it is a launch point."""
    kind, obj = netlist.driver_of(signal)
    if kind != "gate":
        return None  # launch point (FF Q or PI)
    return [(obj.id, pin, src) for pin, src in enumerate(obj.inputs)]


def enumerate_left_paths(netlist, end_signal, limit):
    """All launch-to-`end_signal` paths, depth-first, up to limit+1."""
    paths = []

    def walk(sig, suffix):
        if len(paths) > limit:
            return
        exp = _left_expansions(netlist, sig)
        if exp is None:
            paths.append(Path(sig, list(suffix)))
            return
        for gid, pin, src in exp:
            walk(src, [(gid, pin)] + suffix)

    walk(end_signal, [])
    return paths


def enumerate_right_paths(netlist, start_signal, limit, readers=None):
    """All `start_signal`-to-capture paths (FF D or PO), up to limit+1."""
    if readers is None:
        readers = netlist.readers()
    paths = []

    def walk(sig, prefix):
        if len(paths) > limit:
            return
        for kind, cid, pin in readers.get(sig, ()):
            if kind == "gate":
                walk(cid, prefix + [(cid, pin)])
            elif kind == "ff":
                paths.append(Path(start_signal, list(prefix), cid))
            else:
                paths.append(Path(start_signal, list(prefix), "po::" + cid))

    walk(start_signal, [])
    return paths


def sample_paths(netlist, ff, side: str, limit: int, seed: int) -> list:
    """Sample combinational paths on one side of a flip-flop.

    Parameters
    ----------
    ff : str
        Flip-flop id.
    side : str
        "left" for launch-to-D paths, "right" for Q-to-capture paths.
    limit : int
        Maximum number of paths returned.
    seed : int
        Sampling seed, used only when enumeration exceeds the limit.

    Returns
    -------
    list of Path
        Complete enumeration when it fits the limit (deterministic DFS
        order), otherwise a uniform random subset of a capped enumeration.
    """
    flop = netlist.flipflops[ff]
    if side == "left":
        paths = enumerate_left_paths(netlist, flop.d_input, 4 * limit)
        for p in paths:
            p.capture = ff
    elif side == "right":
        paths = enumerate_right_paths(netlist, flop.q_output, 4 * limit)
    else:
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")
    if len(paths) <= limit:
        return paths
    rng = random.Random(seed)
    picked = rng.sample(range(len(paths)), limit)
    return [paths[i] for i in sorted(picked)]


def downstream_delay(netlist) -> dict:
    """Longest combinational delay from each signal to any capture point.

    Capture points are flip-flop D pins and primary outputs (both at
    distance 0 from themselves).  Used for candidate ordering.
    """
    readers = netlist.readers()
    down: dict = {}
    for gate in reversed(netlist.topo_gates()):
        down[gate.id] = _down_of(netlist, gate.id, readers, down)
    out = dict(down)
    for name in netlist.primary_inputs:
        out[name] = _down_of(netlist, name, readers, down)
    for fid in netlist.flipflops:
        out[fid] = _down_of(netlist, fid, readers, down)
    return out


def _down_of(netlist, sig, readers, down):
    best = 0.0
    for kind, cid, pin in readers.get(sig, ()):
        if kind == "gate":
            gate = netlist.gates[cid]
            best = max(best, gate.pin_delay(pin) + down.get(cid, 0.0))
    return best


# -- classification ------------------------------------------------------------


def classify_gray(d: float, cfg: TimingConfig) -> str:
    """Three-way delay classification against the clock period.

    A delay is "definitely_single" when even the attacker's overestimate
    stays under T, "definitely_wp" when even the underestimate exceeds T,
    and "suspicious" in the closed band between the two.
    """
    if (1 + cfg.tau) * d < cfg.T:
        return "definitely_single"
    if (1 - cfg.tau) * d > cfg.T:
        return "definitely_wp"
    return "suspicious"


def check_wp_window(dmin: float, dmax: float, cfg: TimingConfig) -> bool:
    """True iff [dmin, dmax] is a valid wave window under PVT derating.

    The derated earliest arrival must clear the next edge's hold window and
    the derated latest arrival must make setup at the edge after it:
    (1-delta)*dmin >= T + t_h and (1+delta)*dmax <= 2T - t_su.
    """
    return ((1 - cfg.delta) * dmin >= cfg.T + cfg.t_h
            and (1 + cfg.delta) * dmax <= 2 * cfg.T - cfg.t_su)


def setup_slack(netlist, cfg: TimingConfig, arrivals: ArrivalTimes = None) -> dict:
    """Per-capture setup slack (T - t_su - late arrival at D / PO)."""
    if arrivals is None:
        arrivals = propagate_arrivals(netlist, cfg)
    slacks = {}
    for fid, ff in netlist.flipflops.items():
        slacks[fid] = cfg.T - cfg.t_su - arrivals.late[ff.d_input]
    for name in netlist.primary_outputs:
        slacks["po::" + name] = cfg.T - cfg.t_su - arrivals.late[name]
    return slacks


@dataclass
class WpRecord:
    """Ground-truth entry for one constructed wave path.

    Attributes
    ----------
    kind : str
        "true" for a functional wave, "false" for an unsensitizable one.
    method : str
        "removal" or "duplication".
    site : str
        Candidate flip-flop id in the input netlist.
    launch, capture : str
        Launch signal (FF Q or PI) and capturing FF id on the final netlist.
    steps : list of (gate_id, pin)
        Merged launch-to-capture path on the final netlist.
    dmin, dmax : float
        Exact earliest/latest wave arrival at the capture D, measured from
        the launch edge on the final netlist at typical delays.
    gray : str
        classify_gray(dmax + t_su) on the final netlist.
    has_xor : bool
        Whether the path traverses an XOR/XNOR (no side-input requirement
        there, so static sensitization is conservative).
    removed : str or None
        Flip-flop instance taken out (removal only).
    duplicated : list
        Gate ids added for the duplicated block (duplication only).
    """

    kind: str
    method: str
    site: str
    launch: str
    capture: str
    steps: list
    dmin: float
    dmax: float
    gray: str = "suspicious"
    has_xor: bool = False
    removed: str = None
    duplicated: list = field(default_factory=list)

    def to_doc(self) -> dict:
        return {
            "kind": self.kind, "method": self.method, "site": self.site,
            "launch": self.launch, "capture": self.capture,
            "steps": [[g, p] for g, p in self.steps],
            "dmin": round(self.dmin, 9), "dmax": round(self.dmax, 9),
            "gray": self.gray, "has_xor": self.has_xor,
            "removed": self.removed, "duplicated": list(self.duplicated),
        }

    @classmethod
    def from_doc(cls, doc: dict) -> "WpRecord":
        return cls(kind=doc["kind"], method=doc["method"], site=doc["site"],
                   launch=doc["launch"], capture=doc["capture"],
                   steps=[(g, p) for g, p in doc["steps"]],
                   dmin=doc["dmin"], dmax=doc["dmax"], gray=doc["gray"],
                   has_xor=doc["has_xor"], removed=doc.get("removed"),
                   duplicated=list(doc.get("duplicated", [])))
