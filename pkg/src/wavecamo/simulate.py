"""Event-driven timing simulation and cycle-accurate reference evaluation.

The event core models inertial per-pin delays: a gate owns at most one
pending output event, and any re-evaluation before that event matures
supersedes it (glitches shorter than the gate delay vanish).  Flip-flops
sample D at rising edges k*T, flag setup violations for D changes within
t_su before an edge and hold violations within t_h after, and drive Q
t_cq later.  Primary inputs switch at edges; primary outputs are sampled
just before each edge.

The core is written against plain numpy arrays so numba can compile it;
without numba the same function runs as pure Python (slower, same
results).  A synchronous zero-delay evaluator doubles as the reference
side of equivalence checking and as the initializer that settles signal
values before the event loop starts.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f

_KIND_CODE = {"AND": 0, "NAND": 1, "OR": 2, "NOR": 3,
              "NOT": 4, "BUF": 5, "XOR": 6, "XNOR": 7}


class CompiledNetlist:
    """Array form of a netlist shared by the simulation cores.

    Signal indices are assigned primary inputs first, then flip-flop Q
    outputs, then gate outputs in topological order, so the sync core
    can evaluate gates by walking the arrays front to back.
    """

    def __init__(self, netlist):
        self.netlist = netlist
        sigs = list(netlist.primary_inputs)
        sigs += list(netlist.flipflops.keys())
        order = netlist.topo_gates()
        sigs += [g.id for g in order]
        self.sig_index = {s: i for i, s in enumerate(sigs)}
        self.signals = sigs
        n_sig = len(sigs)

        self.gate_kind = np.array([_KIND_CODE[g.kind] for g in order],
                                  dtype=np.int8)
        self.gate_out = np.array([self.sig_index[g.id] for g in order],
                                 dtype=np.int32)
        in_ptr = [0]
        in_sig = []
        in_delay = []
        for g in order:
            for pin, src in enumerate(g.inputs):
                in_sig.append(self.sig_index[src])
                in_delay.append(g.pin_delay(pin))
            in_ptr.append(len(in_sig))
        self.in_ptr = np.array(in_ptr, dtype=np.int32)
        self.in_sig = np.array(in_sig, dtype=np.int32)
        self.in_delay = np.array(in_delay, dtype=np.float64)

        gate_of_sig = np.full(n_sig, -1, dtype=np.int32)
        for gi in range(len(order)):
            gate_of_sig[self.gate_out[gi]] = gi
        self.gate_of_sig = gate_of_sig

        cons = [[] for _ in range(n_sig)]
        for gi, g in enumerate(order):
            for pin, src in enumerate(g.inputs):
                cons[self.sig_index[src]].append((gi, pin))
        cons_ptr = [0]
        cons_gate = []
        cons_pin = []
        for lst in cons:
            for gi, pin in lst:
                cons_gate.append(gi)
                cons_pin.append(pin)
            cons_ptr.append(len(cons_gate))
        self.cons_ptr = np.array(cons_ptr, dtype=np.int32)
        self.cons_gate = np.array(cons_gate, dtype=np.int32)
        self.cons_pin = np.array(cons_pin, dtype=np.int32)

        ffs = list(netlist.flipflops.values())
        self.ff_ids = [f.id for f in ffs]
        self.ff_q = np.array([self.sig_index[f.id] for f in ffs],
                             dtype=np.int32) if ffs else np.zeros(0, np.int32)
        self.ff_d = np.array([self.sig_index[f.d_input] for f in ffs],
                             dtype=np.int32) if ffs else np.zeros(0, np.int32)
        self.ff_init = np.array([f.init for f in ffs],
                                dtype=np.int8) if ffs else np.zeros(0, np.int8)

        dwatch = [[] for _ in range(n_sig)]
        for fi in range(len(ffs)):
            dwatch[self.ff_d[fi]].append(fi)
        dw_ptr = [0]
        dw_ff = []
        for lst in dwatch:
            dw_ff.extend(lst)
            dw_ptr.append(len(dw_ff))
        self.dw_ptr = np.array(dw_ptr, dtype=np.int32)
        self.dw_ff = np.array(dw_ff, dtype=np.int32)

        self.po_sig = np.array([self.sig_index[p]
                                for p in netlist.primary_outputs],
                               dtype=np.int32)
        self.pi_sig = np.array([self.sig_index[p]
                                for p in netlist.primary_inputs],
                               dtype=np.int32)
        self.n_sig = n_sig
        self.order = order

    def settle(self, pi_values, state):
        """Zero-delay evaluation of every signal for given PIs and state."""
        vals = np.zeros(self.n_sig, dtype=np.int8)
        vals[self.pi_sig] = pi_values
        if len(self.ff_q):
            vals[self.ff_q] = state
        _eval_all(self.gate_kind, self.gate_out, self.in_ptr, self.in_sig,
                  vals)
        return vals


@njit(cache=False)
def _eval_gate_code(kind, vals, in_sig, lo, hi):
    if kind <= 1:
        v = 1
        for i in range(lo, hi):
            v = v & vals[in_sig[i]]
        if kind == 1:
            v = v ^ 1
    elif kind <= 3:
        v = 0
        for i in range(lo, hi):
            v = v | vals[in_sig[i]]
        if kind == 3:
            v = v ^ 1
    elif kind == 4:
        v = vals[in_sig[lo]] ^ 1
    elif kind == 5:
        v = vals[in_sig[lo]]
    else:
        v = 0
        for i in range(lo, hi):
            v = v ^ vals[in_sig[i]]
        if kind == 7:
            v = v ^ 1
    return v


@njit(cache=False)
def _eval_all(gate_kind, gate_out, in_ptr, in_sig, vals):
    for g in range(len(gate_kind)):
        vals[gate_out[g]] = _eval_gate_code(gate_kind[g], vals, in_sig,
                                            in_ptr[g], in_ptr[g + 1])


@njit(cache=False)
def _sync_core(gate_kind, gate_out, in_ptr, in_sig, ff_q, ff_d, po_sig,
               pi_sig, pi_vals, init_state, n_sig):
    n_cycles = pi_vals.shape[0]
    vals = np.zeros(n_sig, dtype=np.int8)
    state = init_state.copy()
    outputs = np.zeros((n_cycles, len(po_sig)), dtype=np.int8)
    for c in range(n_cycles):
        for j in range(len(pi_sig)):
            vals[pi_sig[j]] = pi_vals[c, j]
        for j in range(len(ff_q)):
            vals[ff_q[j]] = state[j]
        _eval_all(gate_kind, gate_out, in_ptr, in_sig, vals)
        for j in range(len(po_sig)):
            outputs[c, j] = vals[po_sig[j]]
        for j in range(len(ff_d)):
            state[j] = vals[ff_d[j]]
    return outputs, state


@njit(cache=False)
def _sift_up(ht, hs, hg, hv, i):
    while i > 0:
        p = (i - 1) // 2
        if ht[i] < ht[p] or (ht[i] == ht[p] and hs[i] < hs[p]):
            ht[i], ht[p] = ht[p], ht[i]
            hs[i], hs[p] = hs[p], hs[i]
            hg[i], hg[p] = hg[p], hg[i]
            hv[i], hv[p] = hv[p], hv[i]
            i = p
        else:
            break


@njit(cache=False)
def _sift_down(ht, hs, hg, hv, size):
    i = 0
    while True:
        l = 2 * i + 1
        r = l + 1
        best = i
        if l < size and (ht[l] < ht[best]
                         or (ht[l] == ht[best] and hs[l] < hs[best])):
            best = l
        if r < size and (ht[r] < ht[best]
                         or (ht[r] == ht[best] and hs[r] < hs[best])):
            best = r
        if best == i:
            break
        ht[i], ht[best] = ht[best], ht[i]
        hs[i], hs[best] = hs[best], hs[i]
        hg[i], hg[best] = hg[best], hg[i]
        hv[i], hv[best] = hv[best], hv[i]
        i = best


@njit(cache=False)
def _event_core(gate_kind, gate_out, in_ptr, in_sig, in_delay,
                cons_ptr, cons_gate, cons_pin, gate_of_sig,
                ff_q, ff_d, dw_ptr, dw_ff, po_sig, pi_sig, pi_vals,
                settled, T, t_su, t_h, t_cq, viol_cap):
    n_cycles = pi_vals.shape[0]
    n_sig = len(settled)
    n_gates = len(gate_kind)
    n_ff = len(ff_q)

    vals = settled.copy()
    last_change = np.full(n_sig, -1.0e18)
    pending = np.full(n_gates, -1, dtype=np.int64)
    next_q = np.zeros(n_ff, dtype=np.int8)

    cap = 16 * n_gates + 8 * n_ff + 1024
    ht = np.zeros(cap, dtype=np.float64)
    hs = np.zeros(cap, dtype=np.int64)
    hg = np.zeros(cap, dtype=np.int32)  # target signal
    hv = np.zeros(cap, dtype=np.int8)
    heap_size = 0
    seq_counter = np.int64(0)

    outputs = np.zeros((n_cycles, len(po_sig)), dtype=np.int8)
    setup_log = np.zeros((viol_cap, 2), dtype=np.int64)
    hold_log = np.zeros((viol_cap, 2), dtype=np.int64)
    n_setup = 0
    n_hold = 0
    last_edge = 0.0
    eps = 1e-9

    for k in range(1, n_cycles + 1):
        edge = k * T
        # drain events strictly before this edge
        while heap_size > 0 and ht[0] < edge - eps:
            t = ht[0]
            sq = hs[0]
            sig = hg[0]
            v = hv[0]
            heap_size -= 1
            ht[0] = ht[heap_size]
            hs[0] = hs[heap_size]
            hg[0] = hg[heap_size]
            hv[0] = hv[heap_size]
            _sift_down(ht, hs, hg, hv, heap_size)
            src_gate = gate_of_sig[sig]
            if src_gate >= 0 and pending[src_gate] != sq:
                continue  # superseded
            if src_gate >= 0:
                pending[src_gate] = -1
            if vals[sig] == v:
                continue
            vals[sig] = v
            if t - last_edge < t_h - eps:
                for w in range(dw_ptr[sig], dw_ptr[sig + 1]):
                    if n_hold < viol_cap:
                        hold_log[n_hold, 0] = k - 1
                        hold_log[n_hold, 1] = dw_ff[w]
                    n_hold += 1
            last_change[sig] = t
            for ci in range(cons_ptr[sig], cons_ptr[sig + 1]):
                g = cons_gate[ci]
                pin = cons_pin[ci]
                nv = _eval_gate_code(gate_kind[g], vals, in_sig,
                                     in_ptr[g], in_ptr[g + 1])
                out = gate_out[g]
                if nv == vals[out]:
                    pending[g] = -1
                else:
                    seq_counter += 1
                    pending[g] = seq_counter
                    if heap_size >= cap:
                        ncap = cap * 2
                        nt = np.zeros(ncap, dtype=np.float64)
                        ns = np.zeros(ncap, dtype=np.int64)
                        ng = np.zeros(ncap, dtype=np.int32)
                        nv8 = np.zeros(ncap, dtype=np.int8)
                        nt[:cap] = ht
                        ns[:cap] = hs
                        ng[:cap] = hg
                        nv8[:cap] = hv
                        ht = nt
                        hs = ns
                        hg = ng
                        hv = nv8
                        cap = ncap
                    ht[heap_size] = t + in_delay[in_ptr[g] + pin]
                    hs[heap_size] = seq_counter
                    hg[heap_size] = out
                    hv[heap_size] = nv
                    heap_size += 1
                    _sift_up(ht, hs, hg, hv, heap_size - 1)

        # primary outputs: value just before the edge
        for j in range(len(po_sig)):
            outputs[k - 1, j] = vals[po_sig[j]]

        # flip-flops sample D at the edge
        for j in range(n_ff):
            d = ff_d[j]
            if edge - last_change[d] < t_su - eps:
                if n_setup < viol_cap:
                    setup_log[n_setup, 0] = k
                    setup_log[n_setup, 1] = j
                n_setup += 1
            next_q[j] = vals[d]
        last_edge = edge

        # primary inputs for the next cycle switch at the edge
        if k < n_cycles:
            for j in range(len(pi_sig)):
                sig = pi_sig[j]
                v = pi_vals[k, j]
                if vals[sig] == v:
                    continue
                vals[sig] = v
                for w in range(dw_ptr[sig], dw_ptr[sig + 1]):
                    if n_hold < viol_cap:
                        hold_log[n_hold, 0] = k
                        hold_log[n_hold, 1] = dw_ff[w]
                    n_hold += 1
                last_change[sig] = edge
                for ci in range(cons_ptr[sig], cons_ptr[sig + 1]):
                    g = cons_gate[ci]
                    pin = cons_pin[ci]
                    nv = _eval_gate_code(gate_kind[g], vals, in_sig,
                                         in_ptr[g], in_ptr[g + 1])
                    out = gate_out[g]
                    if nv == vals[out]:
                        pending[g] = -1
                    else:
                        seq_counter += 1
                        pending[g] = seq_counter
                        if heap_size >= cap:
                            ncap = cap * 2
                            nt = np.zeros(ncap, dtype=np.float64)
                            ns = np.zeros(ncap, dtype=np.int64)
                            ng = np.zeros(ncap, dtype=np.int32)
                            nv8 = np.zeros(ncap, dtype=np.int8)
                            nt[:cap] = ht
                            ns[:cap] = hs
                            ng[:cap] = hg
                            nv8[:cap] = hv
                            ht = nt
                            hs = ns
                            hg = ng
                            hv = nv8
                            cap = ncap
                        ht[heap_size] = edge + in_delay[in_ptr[g] + pin]
                        hs[heap_size] = seq_counter
                        hg[heap_size] = out
                        hv[heap_size] = nv
                        heap_size += 1
                        _sift_up(ht, hs, hg, hv, heap_size - 1)

        # Q outputs move t_cq after the edge
        for j in range(n_ff):
            qs = ff_q[j]
            if next_q[j] != vals[qs]:
                seq_counter += 1
                if heap_size >= cap:
                    ncap = cap * 2
                    nt = np.zeros(ncap, dtype=np.float64)
                    ns = np.zeros(ncap, dtype=np.int64)
                    ng = np.zeros(ncap, dtype=np.int32)
                    nv8 = np.zeros(ncap, dtype=np.int8)
                    nt[:cap] = ht
                    ns[:cap] = hs
                    ng[:cap] = hg
                    nv8[:cap] = hv
                    ht = nt
                    hs = ns
                    hg = ng
                    hv = nv8
                    cap = ncap
                ht[heap_size] = edge + t_cq
                hs[heap_size] = seq_counter
                hg[heap_size] = qs
                hv[heap_size] = next_q[j]
                heap_size += 1
                _sift_up(ht, hs, hg, hv, heap_size - 1)

    final_q = np.zeros(n_ff, dtype=np.int8)
    for j in range(n_ff):
        final_q[j] = next_q[j]
    return outputs, setup_log, n_setup, hold_log, n_hold, final_q


@dataclass
class SimTrace:
    """Result of an event-driven simulation run."""

    outputs: np.ndarray
    po_names: list[str]
    setup_violations: list[tuple[int, str]]
    hold_violations: list[tuple[int, str]]
    n_setup: int
    n_hold: int
    final_state: dict[str, int] = field(default_factory=dict)

    @property
    def clean(self):
        return self.n_setup == 0 and self.n_hold == 0


def _input_matrix(netlist, inputs):
    pis = netlist.primary_inputs
    if isinstance(inputs, dict):
        n_cycles = len(next(iter(inputs.values()))) if inputs else 0
        mat = np.zeros((n_cycles, len(pis)), dtype=np.int8)
        for j, name in enumerate(pis):
            mat[:, j] = np.asarray(inputs[name], dtype=np.int8)
        return mat
    mat = np.asarray(inputs, dtype=np.int8)
    if mat.ndim != 2 or mat.shape[1] != len(pis):
        raise ValueError(
            "input matrix must be (n_cycles, %d)" % len(pis))
    return mat


def _state_vector(compiled, initial_state):
    if initial_state is None:
        return compiled.ff_init.copy()
    state = compiled.ff_init.copy()
    for i, fid in enumerate(compiled.ff_ids):
        if fid in initial_state:
            state[i] = int(initial_state[fid]) & 1
    return state


def simulate(netlist, inputs, cfg, initial_state=None, viol_cap=4096):
    """Run the inertial-delay event simulation.

    Parameters
    ----------
    netlist : Netlist
    inputs : array (n_cycles, n_pi) or dict name -> bit sequence
        Values applied at each clock edge, cycle 0 before time zero.
    cfg : TimingConfig
        Supplies the clock period and flip-flop timing constants.
    initial_state : dict, optional
        Flip-flop name to initial bit; defaults to each FF's init value.

    Returns
    -------
    SimTrace
        Output samples taken just before each edge, violation logs and
        the latched state after the last edge.
    """
    comp = CompiledNetlist(netlist)
    mat = _input_matrix(netlist, inputs)
    state = _state_vector(comp, initial_state)
    if mat.shape[0] == 0:
        return SimTrace(np.zeros((0, len(comp.po_sig)), np.int8),
                        list(netlist.primary_outputs), [], [], 0, 0,
                        {fid: int(state[i])
                         for i, fid in enumerate(comp.ff_ids)})
    settled = comp.settle(mat[0], state)
    outputs, setup_log, n_setup, hold_log, n_hold, final_q = _event_core(
        comp.gate_kind, comp.gate_out, comp.in_ptr, comp.in_sig,
        comp.in_delay, comp.cons_ptr, comp.cons_gate, comp.cons_pin,
        comp.gate_of_sig, comp.ff_q, comp.ff_d, comp.dw_ptr, comp.dw_ff,
        comp.po_sig, comp.pi_sig, mat, settled,
        float(cfg.T), float(cfg.t_su), float(cfg.t_h), float(cfg.t_cq),
        int(viol_cap))
    setup = [(int(setup_log[i, 0]), comp.ff_ids[int(setup_log[i, 1])])
             for i in range(min(n_setup, viol_cap))]
    hold = [(int(hold_log[i, 0]), comp.ff_ids[int(hold_log[i, 1])])
            for i in range(min(n_hold, viol_cap))]
    final = {fid: int(final_q[i]) for i, fid in enumerate(comp.ff_ids)}
    return SimTrace(outputs, list(netlist.primary_outputs), setup, hold,
                    int(n_setup), int(n_hold), final)


def sync_outputs(netlist, inputs, initial_state=None):
    """Zero-delay cycle-accurate evaluation (the functional reference).

    Cycle c output row is f(X_c, S_c); the next state is latched from
    the same evaluation.  Equivalent to the event simulation whenever
    all paths fit in one period and no violations occur.
    """
    comp = CompiledNetlist(netlist)
    mat = _input_matrix(netlist, inputs)
    state = _state_vector(comp, initial_state)
    outputs, final = _sync_core(comp.gate_kind, comp.gate_out, comp.in_ptr,
                                comp.in_sig, comp.ff_q, comp.ff_d,
                                comp.po_sig, comp.pi_sig, mat, state,
                                comp.n_sig)
    return outputs, {fid: int(final[i])
                     for i, fid in enumerate(comp.ff_ids)}


@dataclass
class EquivalenceReport:
    equal: bool
    trials: int
    cycles: int
    warmup: int
    n_mismatch: int
    first_mismatch: tuple | None
    n_setup: int
    n_hold: int

    def __bool__(self):
        return self.equal


def equivalence_check(original, modified, cfg, cycles=200, trials=8,
                      seed=0, warmup=None):
    """Compare PO traces of a reference netlist and a timed rebuild.

    The reference side runs the synchronous evaluator; the modified side
    runs the event simulation under cfg, so multi-period paths take
    effect.  The first ``warmup`` cycles are excluded while retimed or
    wave state pipelines fill.  Both netlists must expose the same
    primary inputs and outputs.

    Returns
    -------
    EquivalenceReport
        equal is True when every compared sample matches in every trial.
    """
    if warmup is None:
        warmup = cfg.warmup_cycles
    a_pi = list(original.primary_inputs)
    b_pi = list(modified.primary_inputs)
    if set(a_pi) != set(b_pi):
        raise ValueError("primary input sets differ")
    if set(original.primary_outputs) != set(modified.primary_outputs):
        raise ValueError("primary output sets differ")
    po_a = list(original.primary_outputs)
    po_b = list(modified.primary_outputs)
    b_po_col = {name: j for j, name in enumerate(po_b)}
    po_map = np.array([b_po_col[name] for name in po_a], dtype=np.int64)

    n_mismatch = 0
    first = None
    tot_setup = 0
    tot_hold = 0
    for trial in range(trials):
        rng = np.random.Generator(np.random.PCG64(seed * 100003 + trial))
        mat_a = rng.integers(0, 2, size=(cycles, len(a_pi)),
                             dtype=np.int8)
        mat_b = np.zeros_like(mat_a)
        for j, name in enumerate(b_pi):
            mat_b[:, j] = mat_a[:, a_pi.index(name)]
        ref, _ = sync_outputs(original, mat_a)
        trace = simulate(modified, mat_b, cfg)
        tot_setup += trace.n_setup
        tot_hold += trace.n_hold
        got = trace.outputs[:, po_map]
        diff = ref[warmup:] != got[warmup:]
        if diff.any():
            n_mismatch += int(diff.sum())
            if first is None:
                c, j = np.argwhere(diff)[0]
                first = (trial, int(c) + warmup, po_a[int(j)])
    return EquivalenceReport(n_mismatch == 0, trials, cycles, warmup,
                             n_mismatch, first, tot_setup, tot_hold)
