"""Executable attacker models against a camouflaged netlist.

Two attacks run for real.  The delay-estimation screen mimics an
attacker who measures every register-to-register path with a bounded
relative error and throws away paths that are definitely single-period
or definitely two-period; construction guarantees that every built wave
path lands in the unclassifiable band, so the screen never shrinks the
attacker's search space below the constructed paths.  The gate-sizing
attack then tries to force sampled unsensitizable paths into the wave
window by re-selecting size rows, under the constraint that every
sensitizable path sharing a sized gate stays single-period; failures
come with a blocking-path certificate, and "successes" are re-simulated
to expose the functional corruption they cause.

The remaining attack classes are summarized as costs: exhaustive delay
test needs one vector per suspicious sensitizable path, and exhaustive
simulation needs two to the power of the suspicious unsensitizable
count, reported as the exponent.
"""

from __future__ import annotations

import logging
import random
from dataclasses import dataclass, field

import numpy as np

from .timing import (TimingConfig, Path, classify_gray, path_arrival,
                     launch_seed, enumerate_left_paths)
from .falsepath import is_true_path
from .milp import MilpModel, solve
from .simulate import simulate

log = logging.getLogger(__name__)


# -- delay-estimation screen ---------------------------------------------------


def _screen_paths(netlist, cfg: TimingConfig, seed: int = 0):
    """Enumerate single-period register-to-register paths with arrivals.

    Returns (entries, exact) where each entry is (path, arrival,
    sensitizable).  Enumeration falls back to seeded sampling past
    cfg.path_sample_limit per flip-flop, flipping `exact` to False.
    """
    limit = cfg.path_sample_limit
    entries = []
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
            d = path_arrival(netlist, p, cfg)
            entries.append((p, d, is_true_path(netlist, p)))
    return entries, exact


def never_single(dmin: float, cfg: TimingConfig) -> bool:
    """Interval guarantee: no tau-bounded view can prove the path single.

    The attacker knows a path's arrival only up to relative error tau,
    so a path with earliest arrival dmin looks like anything in
    [(1-tau)dmin, (1+tau)dmin].  When that band reaches the period,
    (1+tau)*dmin >= T, a single-period arrival is still consistent with
    everything the attacker can observe; this is exactly the lower
    gray-band row the construction enforces on every committed site.
    """
    return (1.0 + cfg.tau) * dmin >= cfg.T - 1e-9


def screen(netlist, cfg: TimingConfig, noise_seed: int = 0,
           records=None) -> dict:
    """Delay-estimation screen over all register-to-register paths.

    Each enumerated path is classified with the gray-band rule on its
    setup-inclusive arrival: the band [(1-tau)d, (1+tau)d] is the whole
    of the attacker's knowledge, so a path is discarded only when every
    delay in the band stays on one side of the period.  Suspicious
    counts split by sensitization feed the brute-force budgets; when
    the constructed records are supplied, their own verdicts and the
    interval never-single guarantee are reported alongside.

    Returns
    -------
    dict
        estimated {definitely_single, definitely_wp, suspicious},
        suspicious_true / suspicious_false, counts_mode, budgets, and
        per-record verdict data when records were given.
    """
    entries, exact = _screen_paths(netlist, cfg, noise_seed)
    est_counts = {"definitely_single": 0, "definitely_wp": 0,
                  "suspicious": 0}
    n_t = n_f = 0
    for p, d, sens in entries:
        verdict = classify_gray(d + cfg.t_su, cfg)
        est_counts[verdict] += 1
        if verdict == "suspicious":
            if sens:
                n_t += 1
            else:
                n_f += 1
    out = {
        "estimated": est_counts,
        "suspicious_true": n_t,
        "suspicious_false": n_f,
        "counts_mode": "exact" if exact else "sampled",
        "budgets": {"test_vectors": n_t, "simulation_exponent": n_f},
    }
    if records is not None:
        out["wp_verdicts"] = [classify_gray(rec.dmax + cfg.t_su, cfg)
                              for rec in records]
        out["wp_never_single"] = all(never_single(r.dmin, cfg)
                                     for r in records)
    return out


# -- gate-sizing attack ---------------------------------------------------------


def _arrival_terms(netlist, path: Path, sel: dict, cfg: TimingConfig):
    """Split a path arrival into (coeffs over row binaries, constant)."""
    lib = netlist.lib
    const = launch_seed(netlist, cfg, path.launch)
    coeffs = {}
    for gid, pin in path.steps:
        g = netlist.gates[gid]
        if gid in sel:
            for lvl, var in sel[gid].items():
                row = lib.pin_delays(gid, g.kind, lvl, len(g.inputs))
                coeffs[var] = coeffs.get(var, 0.0) + row[pin] + g.xi
        else:
            const += g.pin_delay(pin)
    return coeffs, const


def _protected_paths(netlist, cfg: TimingConfig, shared_gates: set,
                     seed: int = 0):
    """Sensitizable paths sharing a gate with the attacked path.

    The attacker treats every sensitizable path as a functional
    single-period path, so each one touching the attacked gates turns
    into a <= T - t_su row.  Paths through gates with no size freedom
    still contribute: their rows are constant, and a constant row that
    already violates the bound (a sensitizable path that is secretly a
    wave) makes the whole attempt infeasible.
    """
    entries, _exact = _screen_paths(netlist, cfg, seed)
    out = []
    for p, _d, sens in entries:
        if not sens:
            continue
        if any(g in shared_gates for g, _pin in p.steps):
            out.append(p)
    return out


def _path_doc(path: Path) -> dict:
    return {"launch": path.launch, "steps": [[g, p] for g, p in path.steps],
            "capture": path.capture}


def _corruption_probe(netlist, sized, cfg: TimingConfig, seed: int,
                      cycles: int = 400, trials: int = 4) -> bool:
    """Event-simulate both netlists on shared stimuli and compare.

    The camouflaged netlist is its own reference here: its synchronous
    semantics differ from the wave-timed behavior by design, so only an
    event-vs-event comparison isolates what the sizing changed.  Reports
    corruption on any post-warm-up output divergence or on new timing
    flags beyond the baseline's.
    """
    warm = cfg.warmup_cycles
    for t in range(trials):
        rng = np.random.default_rng(seed + 1009 * t)
        mat = rng.integers(0, 2, size=(cycles, len(netlist.primary_inputs)),
                           dtype=np.int8)
        base = simulate(netlist, mat, cfg)
        atk = simulate(sized, mat, cfg)
        if not np.array_equal(base.outputs[warm:], atk.outputs[warm:]):
            return True
        if atk.n_setup > base.n_setup or atk.n_hold > base.n_hold:
            return True
    return False


def sizing_attack(netlist, sample, cfg: TimingConfig, seed: int = 0,
                  backend=None) -> dict:
    """Try to size sampled unsensitizable paths into the wave window.

    For each sampled path a small MILP re-selects library size rows on
    its gates so the path arrival lands in [T+t_h, 2T-t_su] while every
    sensitizable path through any re-sized gate keeps its single-period
    arrival at most T-t_su.  An infeasible attempt is reported failed
    together with one blocking sensitizable path found by a deletion
    filter; a feasible sizing is applied to a copy and simulated against
    the unmodified netlist, which exposes the corruption a "successful"
    sizing causes on a circuit that actually uses wave timing.

    Parameters
    ----------
    netlist : Netlist
        The attacked (camouflaged) netlist; needs a delay library for
        size rows.
    sample : list of Path or None
        Unsensitizable suspicious paths to attack; None screens for
        them.
    cfg : TimingConfig
    seed : int
        Drives screening enumeration fallbacks.
    backend : callable or None
        Alternative MILP solver, as in the construction flows.

    Returns
    -------
    dict
        attempted, sized, failed, corrupted counts plus per-path
        outcomes and blocking-path certificates.
    """
    lib = netlist.lib
    if sample is None:
        entries, _exact = _screen_paths(netlist, cfg, seed)
        sample = [p for p, d, sens in entries
                  if not sens
                  and classify_gray(d + cfg.t_su, cfg) == "suspicious"]
    per_path = []
    n_sized = n_failed = n_corrupt = 0
    blocking = []
    for path in sample:
        sized_gates = {g for g, _pin in path.steps}
        model = MilpModel("sizing-attack")
        sel = {}
        for gid in sorted(sized_gates):
            g = netlist.gates[gid]
            n_rows = 0
            if lib is not None:
                try:
                    n_rows = lib.n_levels(gid, g.kind)
                except KeyError:
                    n_rows = 0
            if n_rows <= 1:
                continue
            vs = {lvl: model.add_var(f"sel_{gid}_{lvl}", 0, 1, "binary",
                                     obj=float(lvl))
                  for lvl in range(n_rows)}
            model.add_constraint({v: 1.0 for v in vs.values()}, "==", 1.0,
                                 label=f"onehot_{gid}")
            sel[gid] = vs

        coeffs, const = _arrival_terms(netlist, path, sel, cfg)
        model.add_constraint(dict(coeffs), ">=",
                             cfg.T + cfg.t_h - const, label="wave_low")
        model.add_constraint(dict(coeffs), "<=",
                             2.0 * cfg.T - cfg.t_su - const,
                             label="wave_high")
        protected = _protected_paths(netlist, cfg, sized_gates, seed)
        guard_rows = []
        for q in protected:
            qc, qconst = _arrival_terms(netlist, q, sel, cfg)
            model.add_constraint(dict(qc), "<=",
                                 cfg.T - cfg.t_su - qconst,
                                 label="single_period")
            guard_rows.append((q, qc, qconst))

        sol = solve(model, budget=cfg.milp_node_budget,
                    time_budget=cfg.milp_time_budget) \
            if backend is None else backend(model)
        if sol.status == "optimal":
            sized = netlist.copy()
            for gid, vs in sel.items():
                lvl = max(vs, key=lambda l: sol[vs[l]])
                g = sized.gates[gid]
                g.size_level = lvl
                g.pin_delays = lib.pin_delays(gid, g.kind, lvl,
                                              len(g.inputs))
            corrupted = _corruption_probe(netlist, sized, cfg, seed + 17)
            n_sized += 1
            n_corrupt += int(corrupted)
            per_path.append({"path": _path_doc(path), "status": "sized",
                             "corrupted": corrupted})
        else:
            n_failed += 1
            witness = _blocking_witness(model, guard_rows, cfg, backend)
            if witness is not None:
                blocking.append(_path_doc(witness))
            per_path.append({"path": _path_doc(path), "status": "failed",
                             "blocking": (_path_doc(witness)
                                          if witness else None)})
    return {
        "attempted": len(sample),
        "sized": n_sized,
        "failed": n_failed,
        "corrupted": n_corrupt,
        "blocking_true_paths": blocking,
        "per_path": per_path,
    }


def _blocking_witness(model: MilpModel, guard_rows, cfg: TimingConfig,
                      backend=None):
    """Deletion filter: one protected path whose constraint blocks.

    Re-solves the model with each single-period row dropped in turn;
    the first drop that restores feasibility names the witness.  None
    when infeasibility does not hinge on any single protected path.
    """
    idxs = [j for j, (_row, _sense, _rhs, label) in enumerate(model.rows)
            if label == "single_period"]
    for k, (q, _qc, _qconst) in enumerate(guard_rows):
        trial = MilpModel(model.name + "-filter")
        trial.vars = list(model.vars)
        trial._by_name = dict(model._by_name)
        trial.rows = [r for j, r in enumerate(model.rows) if j != idxs[k]]
        sol = solve(trial, budget=cfg.milp_node_budget,
                    time_budget=cfg.milp_time_budget) \
            if backend is None else backend(trial)
        if sol.status == "optimal":
            return q
    return None


# -- assembled report ------------------------------------------------------------


@dataclass
class AttackReport:
    """Outcome of the attack suite on one netlist.

    Attributes
    ----------
    screened : dict
        Output of screen(): noisy verdict tallies, noiseless suspicious
        counts, per-record verdicts.
    sizing : dict
        Output of sizing_attack(): attempted/sized/failed/corrupted
        plus certificates.
    budgets : dict
        Brute-force costs: test_vectors (one per suspicious
        sensitizable path) and simulation_exponent (suspicious
        unsensitizable count n, for the 2**n simulation bound).
    """

    screened: dict = field(default_factory=dict)
    sizing: dict = field(default_factory=dict)
    budgets: dict = field(default_factory=dict)

    def to_doc(self) -> dict:
        return {"screened": self.screened, "sizing": self.sizing,
                "budgets": self.budgets}


def run_attacks(netlist, cfg: TimingConfig, records=None, seed: int = 0,
                backend=None) -> AttackReport:
    """Run the full attack suite: screen, then sizing on the survivors."""
    scr = screen(netlist, cfg, noise_seed=seed, records=records)
    siz = sizing_attack(netlist, None, cfg, seed=seed, backend=backend)
    return AttackReport(screened=scr, sizing=siz,
                        budgets=dict(scr["budgets"]))
