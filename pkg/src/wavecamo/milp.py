"""Self-contained mixed-integer linear programming.

A dense two-phase tableau simplex under a best-bound branch-and-bound
loop with most-fractional branching.  Pricing uses Dantzig's rule
(lowest index on ties) and falls back to Bland's rule permanently after
a long degenerate streak, so pivoting is deterministic and cannot
cycle.  A nearest-integer diving pass supplies early incumbents, which
lets budget-limited solves return usable assignments.  Everything is
plain numpy; no external solver is involved, although `solve` accepts
an injectable backend for experiments.

All variables must carry finite bounds.  Conditional (indicator-style)
constraints are added through `add_conditional`, which validates that the
big-M constant dominates the worst-case violation over the declared bounds,
so a relaxed constraint can never cut a feasible point.
"""

from __future__ import annotations

import heapq
import time
from dataclasses import dataclass, field

import numpy as np

INT_TOL = 1e-6
FEAS_TOL = 1e-7
PIVOT_EPS = 1e-8  # smallest tableau element accepted as a pivot


@dataclass
class _Var:
    name: str
    lo: float
    hi: float
    kind: str  # "continuous" | "integer" | "binary"
    obj: float


class MilpModel:
    """A minimization MILP built incrementally.

    Variables are referred to by index (returned from add_var) or by name.
    Constraints are linear rows with sense "<=", ">=" or "==".
    """

    def __init__(self, name: str = "model"):
        self.name = name
        self.vars: list = []
        self._by_name: dict = {}
        self.rows: list = []  # (coeffs dict, sense, rhs, label)

    # -- variables -----------------------------------------------------------

    def add_var(self, name, lo, hi, kind="continuous", obj=0.0) -> int:
        if name in self._by_name:
            raise ValueError(f"duplicate variable {name!r}")
        if kind == "binary":
            lo, hi = max(lo, 0.0), min(hi, 1.0)
        if not (np.isfinite(lo) and np.isfinite(hi)):
            raise ValueError(f"variable {name!r} needs finite bounds")
        if lo > hi + FEAS_TOL:
            raise ValueError(f"variable {name!r} has empty bounds")
        if kind not in ("continuous", "integer", "binary"):
            raise ValueError(f"unknown kind {kind!r}")
        idx = len(self.vars)
        self.vars.append(_Var(name, float(lo), float(hi), kind, float(obj)))
        self._by_name[name] = idx
        return idx

    def var_index(self, ref) -> int:
        if isinstance(ref, int):
            return ref
        return self._by_name[ref]

    def set_objective(self, coeffs: dict) -> None:
        for v in self.vars:
            v.obj = 0.0
        for ref, c in coeffs.items():
            self.vars[self.var_index(ref)].obj = float(c)

    def add_objective_term(self, ref, c) -> None:
        self.vars[self.var_index(ref)].obj += float(c)

    # -- constraints -----------------------------------------------------------

    def add_constraint(self, coeffs: dict, sense: str, rhs: float,
                       label: str = "") -> None:
        if sense not in ("<=", ">=", "=="):
            raise ValueError(f"bad sense {sense!r}")
        row = {self.var_index(k): float(v) for k, v in coeffs.items()
               if abs(v) > 0.0}
        self.rows.append((row, sense, float(rhs), label))

    def _extreme(self, row: dict, maximize: bool) -> float:
        total = 0.0
        for idx, c in row.items():
            v = self.vars[idx]
            if (c > 0) == maximize:
                total += c * v.hi
            else:
                total += c * v.lo
        return total

    def add_conditional(self, guard, coeffs: dict, sense: str, rhs: float,
                        M: float = None, when: int = 1, label: str = "") -> float:
        """Add a constraint enforced only when `guard` equals `when`.

        The constraint is relaxed through a big-M term on the guard binary.
        M defaults to (and is always validated against) the worst-case
        violation of the constraint over the variable bounds, so relaxation
        provably frees the constraint.  Returns the M actually used.
        """
        gi = self.var_index(guard)
        g = self.vars[gi]
        if g.kind not in ("binary", "integer") or g.lo < -FEAS_TOL or g.hi > 1 + FEAS_TOL:
            raise ValueError(f"guard {g.name!r} must be a 0/1 variable")
        if sense == "==":
            m1 = self.add_conditional(guard, coeffs, "<=", rhs, M, when,
                                      label + ".le")
            m2 = self.add_conditional(guard, coeffs, ">=", rhs, M, when,
                                      label + ".ge")
            return max(m1, m2)
        row = {self.var_index(k): float(v) for k, v in coeffs.items()}
        if sense == "<=":
            worst = self._extreme(row, maximize=True) - rhs
        else:
            worst = rhs - self._extreme(row, maximize=False)
        need = max(worst, 0.0)
        if M is None:
            M = need
        elif M + FEAS_TOL < need:
            raise ValueError(
                f"big-M {M} does not dominate worst-case violation {need:.6g}")
        # guard==when enforces; otherwise the M term frees the row
        if sense == "<=":
            if when == 1:
                # a.x <= rhs + M(1-g)  <=>  a.x + M g <= rhs + M
                row2 = dict(row)
                row2[gi] = row2.get(gi, 0.0) + M
                self.add_constraint(row2, "<=", rhs + M, label)
            else:
                row2 = dict(row)
                row2[gi] = row2.get(gi, 0.0) - M
                self.add_constraint(row2, "<=", rhs, label)
        else:
            if when == 1:
                row2 = dict(row)
                row2[gi] = row2.get(gi, 0.0) - M
                self.add_constraint(row2, ">=", rhs - M, label)
            else:
                row2 = dict(row)
                row2[gi] = row2.get(gi, 0.0) + M
                self.add_constraint(row2, ">=", rhs, label)
        return M

    # -- export ------------------------------------------------------------------

    def to_lp_format(self) -> str:
        """Serialize to CPLEX-style LP text (minimization)."""
        def term(c, name, first):
            s = f"{c:+.12g} {name}"
            return s if not first else (f"{c:.12g} {name}" if c >= 0
                                        else f"- {abs(c):.12g} {name}")

        lines = ["\\ " + self.name, "Minimize", " obj:"]
        parts = []
        for v in self.vars:
            if v.obj:
                parts.append(f"{v.obj:+.12g} {v.name}")
        lines[-1] += " " + (" ".join(parts) if parts else "0 " + self.vars[0].name
                            if self.vars else "0")
        lines.append("Subject To")
        for i, (row, sense, rhs, label) in enumerate(self.rows):
            name = label or f"c{i}"
            body = " ".join(f"{c:+.12g} {self.vars[j].name}"
                            for j, c in sorted(row.items()))
            op = {"<=": "<=", ">=": ">=", "==": "="}[sense]
            lines.append(f" {name}: {body} {op} {rhs:.12g}")
        lines.append("Bounds")
        for v in self.vars:
            lines.append(f" {v.lo:.12g} <= {v.name} <= {v.hi:.12g}")
        ints = [v.name for v in self.vars if v.kind == "integer"]
        bins = [v.name for v in self.vars if v.kind == "binary"]
        if ints:
            lines.append("Generals")
            lines.append(" " + " ".join(ints))
        if bins:
            lines.append("Binaries")
            lines.append(" " + " ".join(bins))
        lines.append("End")
        return "\n".join(lines) + "\n"


@dataclass
class MilpSolution:
    status: str  # "optimal" | "infeasible" | "timed_out" | "unbounded"
    objective: float = None
    values: dict = field(default_factory=dict)
    best_bound: float = None
    n_nodes: int = 0
    runtime: float = 0.0
    names: list = field(default_factory=list)

    def __getitem__(self, ref):
        if isinstance(ref, (int, np.integer)):
            ref = self.names[ref]
        return self.values[ref]


# -- LP core -------------------------------------------------------------------


def _lp_point_ok(x, rows, lo, hi):
    """Replay a claimed optimum against rows and bounds."""
    if np.any(x < lo - 1e-6) or np.any(x > hi + 1e-6):
        return False
    for coeffs, sense, rhs in rows:
        lhs = 0.0
        for j, a in coeffs.items():
            lhs += a * x[j]
        tol = 1e-6 * (1.0 + abs(rhs))
        if sense == "<=" and lhs > rhs + tol:
            return False
        if sense == ">=" and lhs < rhs - tol:
            return False
        if sense == "==" and abs(lhs - rhs) > tol:
            return False
    return True


def _lp_solve(c, rows, lo, hi, max_pivots=20000, _bland=False):
    """Two-phase dense simplex with implicit variable bounds.

    Variables are shifted to y = x - lo >= 0; upper bounds are handled by
    the bounded-variable rule (a nonbasic variable rests at either of its
    bounds and may flip between them), so only model rows enter the
    tableau.  Returns (status, x, objective) with status "optimal",
    "infeasible" or "unbounded".
    """
    lo = np.asarray(lo, float)
    hi = np.asarray(hi, float)
    c = np.asarray(c, float)

    fixed = hi - lo <= FEAS_TOL
    free_idx = np.where(~fixed)[0]
    nf = len(free_idx)
    # fixed vars and the lower-bound shift contribute constants
    base = lo.copy()

    arows = []
    for coeffs, sense, rhs in rows:
        vec = np.zeros(nf)
        shift = 0.0
        for j, a in coeffs.items():
            shift += a * base[j]
            if not fixed[j]:
                vec[np.searchsorted(free_idx, j)] += a
        arows.append((vec, sense, rhs - shift))

    m = len(arows)
    if m == 0:
        x = base.copy()
        # minimize freely within bounds
        for k in range(nf):
            j = free_idx[k]
            x[j] = hi[j] if c[j] < 0 else lo[j]
        return "optimal", x, float(c @ x)

    # normalize rhs >= 0
    A = np.zeros((m, nf))
    b = np.zeros(m)
    senses = []
    for i, (vec, sense, rhs) in enumerate(arows):
        if rhs < 0:
            vec = -vec
            rhs = -rhs
            sense = {"<=": ">=", ">=": "<=", "==": "=="}[sense]
        A[i] = vec
        b[i] = rhs
        senses.append(sense)

    n_slack = sum(1 for s in senses if s == "<=")
    n_surp = sum(1 for s in senses if s == ">=")
    n_art = sum(1 for s in senses if s in (">=", "=="))
    N = nf + n_slack + n_surp + n_art
    T = np.zeros((m, N))
    T[:, :nf] = A
    xB = b.copy()                      # current basic values, kept separate
    u = np.full(N, np.inf)             # shifted upper bounds; inf on slacks
    u[:nf] = (hi - lo)[free_idx]
    state = np.zeros(N, dtype=np.int8)  # 0 at lower, 1 at upper, 2 basic
    basis = np.empty(m, dtype=int)
    si = nf
    ui = nf + n_slack
    ai = nf + n_slack + n_surp
    art_cols = []
    for i, s in enumerate(senses):
        if s == "<=":
            T[i, si] = 1.0
            basis[i] = si
            si += 1
        elif s == ">=":
            T[i, ui] = -1.0
            T[i, ai] = 1.0
            basis[i] = ai
            art_cols.append(ai)
            ui += 1
            ai += 1
        else:
            T[i, ai] = 1.0
            basis[i] = ai
            art_cols.append(ai)
            ai += 1
    state[basis] = 2

    def pivot_loop(cost, allow, bland):
        """Dantzig pricing with a Bland's-rule anti-cycling fallback."""
        nonlocal T, xB, basis
        streak = 0
        for _ in range(max_pivots):
            lam = cost[basis]
            red = cost - lam @ T
            # entering from the lower bound wants a negative reduced
            # cost, from the upper bound a positive one
            score = np.where(state == 1, -red, red)
            score[state == 2] = 0.0
            score[~allow] = 0.0
            if bland:
                neg = np.where(score < -1e-9)[0]
                if neg.size == 0:
                    return "optimal"
                enter = int(neg[0])
            else:
                enter = int(np.argmin(score))
                if score[enter] >= -1e-9:
                    return "optimal"
            sigma = 1.0 if state[enter] == 0 else -1.0
            col = sigma * T[:, enter]
            # ratio test: basic vars dropping to 0, basic vars rising to
            # their bound, and the entering var crossing to its far
            # bound.  Numerators are clamped at 0 so round-off drift in
            # xB yields a degenerate step, never a negative one.
            lim = np.full(m, np.inf)
            np.divide(np.maximum(xB, 0.0), col, out=lim,
                      where=col > PIVOT_EPS)
            ub = u[basis]
            finite = (col < -PIVOT_EPS) & np.isfinite(ub)
            if finite.any():
                with np.errstate(divide="ignore", invalid="ignore"):
                    lim2 = np.where(finite,
                                    np.maximum(ub - xB, 0.0) / (-col),
                                    np.inf)
                lim = np.minimum(lim, lim2)
            tstar = lim.min()
            t_enter = u[enter]
            if t_enter < tstar - 1e-12:
                # bound flip: no basis change, the point still moves
                xB -= t_enter * col
                state[enter] = 1 - state[enter]
                streak = 0
                continue
            if not np.isfinite(tstar):
                return "unbounded"
            cand = np.where(lim <= tstar + 1e-12)[0]
            r = int(cand[np.argmin(basis[cand])])
            # a zero-step pivot makes no progress; a long streak of them
            # risks cycling, so drop to Bland's rule for the remainder
            if tstar <= 1e-12:
                streak += 1
                if streak > 2 * m + 50:
                    bland = True
            else:
                streak = 0
            leaving = basis[r]
            xB -= tstar * col
            xB[r] = tstar if sigma > 0 else t_enter - tstar
            state[leaving] = 0 if col[r] > 0 else 1
            state[enter] = 2
            basis[r] = enter
            T[r] = T[r] / T[r, enter]
            colv = T[:, enter].copy()
            colv[r] = 0.0
            T -= np.outer(colv, T[r])
        raise RuntimeError("simplex pivot budget exhausted")

    allow = np.ones(N, dtype=bool)
    if art_cols:
        art_set = set(art_cols)
        cost1 = np.zeros(N)
        cost1[art_cols] = 1.0
        status = pivot_loop(cost1, allow, _bland)
        if status != "optimal":
            return "infeasible", None, None
        phase1 = float(cost1[basis] @ xB)
        if phase1 > 1e-7:
            return "infeasible", None, None
        # drive remaining artificials out of the basis where possible;
        # rows where none will leave are redundant and get dropped
        nonart = np.ones(N, dtype=bool)
        nonart[art_cols] = False
        drop = []
        for i in range(m):
            if basis[i] in art_set:
                js = np.where(nonart & (state != 2)
                              & (np.abs(T[i]) > 1e-7))[0]
                if js.size:
                    enter = int(js[0])
                    # zero-step pivot: the point is unchanged, the
                    # entering variable becomes basic at its rest value
                    T[i] = T[i] / T[i, enter]
                    colv = T[:, enter].copy()
                    colv[i] = 0.0
                    T -= np.outer(colv, T[i])
                    old = basis[i]
                    basis[i] = enter
                    xB[i] = 0.0 if state[enter] == 0 else u[enter]
                    state[enter] = 2
                    state[old] = 0
                else:
                    drop.append(i)
        if drop:
            keep = np.array([i for i in range(m) if i not in set(drop)])
            T = T[keep]
            xB = xB[keep]
            basis = basis[keep]
            m = len(keep)
        allow = np.ones(N, dtype=bool)
        allow[art_cols] = False

    cost2 = np.zeros(N)
    cost2[:nf] = c[free_idx]
    status = pivot_loop(cost2, allow, _bland)
    if status == "unbounded":
        return "unbounded", None, None
    x = base.copy()
    at_up = np.where(state[:nf] == 1)[0]
    x[free_idx[at_up]] = base[free_idx[at_up]] + u[at_up]
    for i in range(m):
        if basis[i] < nf:
            j = free_idx[basis[i]]
            x[j] = base[j] + xB[i]
    # replay the claimed optimum; on numerical failure retry once under
    # Bland's rule from the start (slower, but stable), then give up
    # loudly rather than hand back a corrupt point
    if not _lp_point_ok(x, rows, lo, hi):
        if not _bland:
            return _lp_solve(c, rows, lo, hi, max_pivots, _bland=True)
        raise RuntimeError("simplex numerical failure")
    return "optimal", x, float(c @ x)


# -- branch and bound -------------------------------------------------------------


def solve(model: MilpModel, budget: int = None, time_budget: float = None,
          rel_gap: float = 0.0, abs_gap: float = 1e-9,
          backend=None) -> MilpSolution:
    """Solve a MilpModel to optimality or budget exhaustion.

    Parameters
    ----------
    budget : int, optional
        Branch-and-bound node budget; None means unlimited.
    time_budget : float, optional
        Wall-clock cap in seconds; None means unlimited.
    rel_gap, abs_gap : float
        Early-stop tolerances on (incumbent - best bound); the defaults
        solve to (numerical) optimality.
    backend : callable, optional
        Alternative solver taking (model, budget) and returning a
        MilpSolution; when given it fully replaces the builtin.

    Returns
    -------
    MilpSolution
        status "optimal" (gap closed), "timed_out" (budget hit; best
        incumbent reported when one exists), "infeasible" or "unbounded".
    """
    if backend is not None:
        return backend(model, budget)
    t0 = time.perf_counter()
    n = len(model.vars)
    c = np.array([v.obj for v in model.vars])
    rows = [(r, s, b) for (r, s, b, _l) in model.rows]
    lo0 = np.array([v.lo for v in model.vars])
    hi0 = np.array([v.hi for v in model.vars])
    int_idx = [i for i, v in enumerate(model.vars)
               if v.kind in ("integer", "binary")]

    best_x, best_obj = None, np.inf
    heap = []
    seq = 0
    status0, x0, ob0 = _lp_solve(c, rows, lo0, hi0)
    n_nodes = 1
    if status0 == "infeasible":
        return MilpSolution("infeasible", n_nodes=1,
                            runtime=time.perf_counter() - t0)
    if status0 == "unbounded":
        return MilpSolution("unbounded", n_nodes=1,
                            runtime=time.perf_counter() - t0)
    heapq.heappush(heap, (ob0, seq, lo0, hi0, x0, ob0))
    timed_out = False

    def frac_var(x):
        pick, dist = -1, 2.0
        for i in int_idx:
            f = x[i] - np.floor(x[i])
            fr = min(f, 1 - f)
            if fr <= INT_TOL:
                continue
            d = abs(f - 0.5)
            if d < dist - 1e-12:
                pick, dist = i, d
        return pick

    def try_rounding(x, lo, hi):
        # cheap incumbent heuristic: snap integers, keep if feasible
        nonlocal best_x, best_obj
        xr = x.copy()
        for i in int_idx:
            xr[i] = min(max(round(xr[i]), lo[i]), hi[i])
        for row, sense, rhs in rows:
            lhs = sum(coef * xr[j] for j, coef in row.items())
            if sense == "<=" and lhs > rhs + 1e-6:
                return
            if sense == ">=" and lhs < rhs - 1e-6:
                return
            if sense == "==" and abs(lhs - rhs) > 1e-6:
                return
        obj_r = float(c @ xr)
        if obj_r < best_obj:
            best_obj, best_x = obj_r, xr

    def dive(lo, hi, x):
        # nearest-integer dive: fix fractional variables one at a time,
        # flipping to the far rounding when the near one goes infeasible.
        # Deterministic, and a reliable source of early incumbents that
        # naive snapping misses on big-M models.
        nonlocal best_x, best_obj, n_nodes
        lo_d, hi_d = lo.copy(), hi.copy()
        xd = x
        for _ in range(2 * len(int_idx) + 4):
            v = frac_var(xd)
            if v < 0:
                xi = xd.copy()
                for i in int_idx:
                    xi[i] = round(xi[i])
                obj_i = float(c @ xi)
                if obj_i < best_obj:
                    best_obj, best_x = obj_i, xi
                return
            f = np.floor(xd[v])
            near, far = (f, f + 1) if xd[v] - f < 0.5 else (f + 1, f)
            placed = False
            for val in (near, far):
                if val < lo_d[v] - FEAS_TOL or val > hi_d[v] + FEAS_TOL:
                    continue
                lo_t, hi_t = lo_d.copy(), hi_d.copy()
                lo_t[v] = hi_t[v] = val
                st, xt, _obt = _lp_solve(c, rows, lo_t, hi_t)
                n_nodes += 1
                if st == "optimal":
                    lo_d, hi_d, xd = lo_t, hi_t, xt
                    placed = True
                    break
            if not placed:
                return

    try_rounding(x0, lo0, hi0)
    if best_x is None:
        dive(lo0, hi0, x0)
    last_dive = n_nodes

    while heap:
        bound = heap[0][0]
        if best_x is not None:
            gap = best_obj - bound
            if gap <= abs_gap or gap <= rel_gap * max(1.0, abs(best_obj)):
                break
        if budget is not None and n_nodes >= budget:
            timed_out = True
            break
        if time_budget is not None and time.perf_counter() - t0 > time_budget:
            timed_out = True
            break
        _, _, lo, hi, x, ob = heapq.heappop(heap)
        if ob >= best_obj - abs_gap:
            continue
        if best_x is None and n_nodes - last_dive >= 60:
            dive(lo, hi, x)
            last_dive = n_nodes
        v = frac_var(x)
        if v < 0:
            xi = x.copy()
            for i in int_idx:
                xi[i] = round(xi[i])
            obj_i = float(c @ xi)
            if obj_i < best_obj:
                best_obj, best_x = obj_i, xi
            continue
        f = x[v] - np.floor(x[v])
        children = []
        lo_c, hi_c = lo.copy(), hi.copy()
        hi_c[v] = np.floor(x[v])
        children.append((lo_c, hi_c))
        lo_c2, hi_c2 = lo.copy(), hi.copy()
        lo_c2[v] = np.ceil(x[v])
        children.append((lo_c2, hi_c2))
        if f >= 0.5:  # explore the nearest rounding first
            children.reverse()
        for lo_c, hi_c in children:
            if lo_c[v] > hi_c[v] + FEAS_TOL:
                continue
            st, xc, obc = _lp_solve(c, rows, lo_c, hi_c)
            n_nodes += 1
            if st != "optimal":
                continue
            try_rounding(xc, lo_c, hi_c)
            if obc >= best_obj - abs_gap:
                continue
            seq += 1
            heapq.heappush(heap, (obc, seq, lo_c, hi_c, xc, obc))

    runtime = time.perf_counter() - t0
    if best_x is None:
        status = "timed_out" if timed_out else "infeasible"
        bb = min((h[0] for h in heap), default=None)
        return MilpSolution(status, n_nodes=n_nodes, best_bound=bb,
                            runtime=runtime,
                            names=[v.name for v in model.vars])
    bb = min((h[0] for h in heap), default=best_obj)
    status = "timed_out" if timed_out else "optimal"
    vals = {}
    for i, v in enumerate(model.vars):
        val = float(best_x[i])
        if v.kind in ("integer", "binary"):
            val = float(round(val))
        vals[v.name] = val
    return MilpSolution(status, objective=float(best_obj), values=vals,
                        best_bound=float(min(bb, best_obj)), n_nodes=n_nodes,
                        runtime=runtime,
                        names=[v.name for v in model.vars])
