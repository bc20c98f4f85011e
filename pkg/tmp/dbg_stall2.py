"""Analyze the captured stalling LP: trace objective progress and
pivot/flip behavior with an instrumented copy of the pivot rules."""

import pickle
import sys

sys.path.insert(0, "/root/pkg/src")

import numpy as np
from scipy.optimize import linprog

with open("/root/pkg/tmp/stall_lp.pkl", "rb") as fh:
    d = pickle.load(fh)
c, rows, lo, hi = d["c"], d["rows"], d["lo"], d["hi"]
print(f"vars {len(c)}, rows {len(rows)}, "
      f"fixed {(hi - lo <= 1e-7).sum()}")

A_ub, b_ub, A_eq, b_eq = [], [], [], []
n = len(c)
for coefs, sense, rhs in rows:
    vec = np.zeros(n)
    for j, a in coefs.items():
        vec[j] = a
    if sense == "<=":
        A_ub.append(vec)
        b_ub.append(rhs)
    elif sense == ">=":
        A_ub.append(-vec)
        b_ub.append(-rhs)
    else:
        A_eq.append(vec)
        b_eq.append(rhs)
ref = linprog(c, A_ub=np.array(A_ub), b_ub=np.array(b_ub),
              A_eq=np.array(A_eq) if A_eq else None,
              b_eq=np.array(b_eq) if b_eq else None,
              bounds=list(zip(lo, hi)), method="highs")
print("scipy:", ref.status, ref.fun)

# instrumented replay of milp._lp_solve's internals
FEAS_TOL = 1e-7
lo = np.asarray(lo, float)
hi = np.asarray(hi, float)
c = np.asarray(c, float)
fixed = hi - lo <= FEAS_TOL
free_idx = np.where(~fixed)[0]
nf = len(free_idx)
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
A = np.zeros((m, nf))
b = np.zeros(m)
senses = []
for i, (vec, sense, rhs) in enumerate(arows):
    if rhs < 0:
        vec, rhs = -vec, -rhs
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
xB = b.copy()
u = np.full(N, np.inf)
u[:nf] = (hi - lo)[free_idx]
state = np.zeros(N, dtype=np.int8)
basis = np.empty(m, dtype=int)
si, ui, ai = nf, nf + n_slack, nf + n_slack + n_surp
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

cost = np.zeros(N)
cost[art_cols] = 1.0
allow = np.ones(N, dtype=bool)

n_flip = n_piv = n_deg = 0
bland = False
streak = 0
last_objs = []
for it in range(20000):
    lam = cost[basis]
    red = cost - lam @ T
    score = np.where(state == 1, -red, red)
    score[state == 2] = 0.0
    score[~allow] = 0.0
    if bland:
        neg = np.where(score < -1e-9)[0]
        if neg.size == 0:
            print(f"phase1 optimal at iter {it}")
            break
        enter = int(neg[0])
    else:
        enter = int(np.argmin(score))
        if score[enter] >= -1e-9:
            print(f"phase1 optimal at iter {it}")
            break
    sigma = 1.0 if state[enter] == 0 else -1.0
    col = sigma * T[:, enter]
    lim = np.full(m, np.inf)
    np.divide(xB, col, out=lim, where=col > 1e-10)
    ub = u[basis]
    down = col < -1e-10
    finite = down & np.isfinite(ub)
    if finite.any():
        with np.errstate(divide="ignore", invalid="ignore"):
            lim2 = np.where(finite, (ub - xB) / (-col), np.inf)
        lim = np.minimum(lim, lim2)
    tstar = lim.min()
    t_enter = u[enter]
    obj = float(cost[basis] @ xB)
    if it % 2000 == 0 or it > 19980:
        print(f"it {it}: obj {obj:.9f} enter {enter} "
              f"score {score[enter]:.3e} tstar {tstar:.3e} "
              f"t_enter {t_enter:.3e} xB_min {xB.min():.3e} "
              f"flips {n_flip} pivs {n_piv} deg {n_deg} bland {bland}")
    if t_enter < tstar - 1e-12:
        xB -= t_enter * col
        state[enter] = 1 - state[enter]
        streak = 0
        n_flip += 1
        continue
    if not np.isfinite(tstar):
        print("unbounded")
        break
    cand = np.where(lim <= tstar + 1e-12)[0]
    r = int(cand[np.argmin(basis[cand])])
    if tstar <= 1e-12:
        n_deg += 1
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
    n_piv += 1
print(f"final: flips {n_flip} pivots {n_piv} degenerate {n_deg}")
