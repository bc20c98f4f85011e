"""Cross-check _lp_solve against scipy HiGHS and solve() against
brute-force enumeration on random small models."""

import itertools
import sys

sys.path.insert(0, "/root/pkg/src")

import numpy as np
from scipy.optimize import linprog

from wavecamo import milp

rng = np.random.default_rng(7)

n_lp_bad = 0
for trial in range(400):
    n = rng.integers(2, 9)
    m = rng.integers(1, 10)
    c = rng.normal(size=n).round(3)
    lo = rng.uniform(-4, 0, n).round(3)
    hi = lo + rng.uniform(0.0, 6, n).round(3)
    # some fixed vars
    for j in range(n):
        if rng.random() < 0.15:
            hi[j] = lo[j]
    rows = []
    A_ub, b_ub, A_eq, b_eq = [], [], [], []
    for _ in range(m):
        nnz = rng.integers(1, min(4, n) + 1)
        js = rng.choice(n, nnz, replace=False)
        coefs = {int(j): round(float(rng.normal()), 2) for j in js}
        sense = rng.choice(["<=", ">=", "=="], p=[0.45, 0.45, 0.1])
        rhs = round(float(rng.normal(scale=3)), 2)
        rows.append((coefs, sense, rhs))
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
    st, x, ob = milp._lp_solve(c, rows, lo, hi)
    ref = linprog(c, A_ub=np.array(A_ub) if A_ub else None,
                  b_ub=np.array(b_ub) if b_ub else None,
                  A_eq=np.array(A_eq) if A_eq else None,
                  b_eq=np.array(b_eq) if b_eq else None,
                  bounds=list(zip(lo, hi)), method="highs")
    ref_st = "optimal" if ref.status == 0 else (
        "infeasible" if ref.status == 2 else "unbounded")
    if st != ref_st:
        n_lp_bad += 1
        print(f"trial {trial}: status {st} vs {ref_st}")
        continue
    if st == "optimal":
        if abs(ob - ref.fun) > 1e-5 * max(1.0, abs(ref.fun)):
            n_lp_bad += 1
            print(f"trial {trial}: obj {ob:.6f} vs {ref.fun:.6f}")
        # replay feasibility of our point
        for coefs, sense, rhs in rows:
            lhs = sum(a * x[j] for j, a in coefs.items())
            bad = ((sense == "<=" and lhs > rhs + 1e-6)
                   or (sense == ">=" and lhs < rhs - 1e-6)
                   or (sense == "==" and abs(lhs - rhs) > 1e-6))
            if bad:
                n_lp_bad += 1
                print(f"trial {trial}: point violates {coefs} {sense} {rhs}")
                break
        if np.any(x < lo - 1e-7) or np.any(x > hi + 1e-7):
            n_lp_bad += 1
            print(f"trial {trial}: point outside bounds")
print(f"LP fuzz: {400 - n_lp_bad}/400 ok")

n_mip_bad = 0
for trial in range(150):
    n = int(rng.integers(3, 11))
    mdl = milp.MilpModel(f"fuzz{trial}")
    for j in range(n):
        mdl.add_var(f"b{j}", 0, 1, kind="binary",
                    obj=round(float(rng.normal()), 3))
    for _ in range(int(rng.integers(1, 7))):
        nnz = rng.integers(1, min(4, n) + 1)
        js = rng.choice(n, nnz, replace=False)
        coefs = {f"b{j}": float(rng.integers(-3, 4)) for j in js}
        sense = str(rng.choice(["<=", ">="]))
        rhs = float(rng.integers(-2, 5))
        mdl.add_constraint(coefs, sense, rhs)
    sol = milp.solve(mdl)
    # brute force
    best = None
    c = np.array([v.obj for v in mdl.vars])
    for bits in itertools.product((0, 1), repeat=n):
        ok = True
        for row, sense, rhs, _l in mdl.rows:
            lhs = sum(coef * bits[j] for j, coef in row.items())
            if sense == "<=" and lhs > rhs + 1e-9:
                ok = False
                break
            if sense == ">=" and lhs < rhs - 1e-9:
                ok = False
                break
        if ok:
            val = float(c @ np.array(bits))
            if best is None or val < best:
                best = val
    if best is None:
        if sol.status != "infeasible":
            n_mip_bad += 1
            print(f"mip {trial}: {sol.status} but enumeration infeasible")
    else:
        if sol.status != "optimal" or abs(sol.objective - best) > 1e-6:
            n_mip_bad += 1
            print(f"mip {trial}: {sol.status} obj "
                  f"{sol.objective} vs {best}")
print(f"MIP fuzz: {150 - n_mip_bad}/150 ok")
