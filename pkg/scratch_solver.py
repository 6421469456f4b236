"""Scratch validation of the barrier solver (not part of the package)."""
import time

import numpy as np

from eeshare.logdet_solver import (ConcaveExpr, LinearExpr, LogDetProgram,
                                   LogDetTerm, _Space, _psi_eval, expr_value,
                                   find_feasible, solve, solve_fractional)

rng = np.random.default_rng(0)


def cn(rng, r, c):
    return (rng.standard_normal((r, c)) + 1j * rng.standard_normal((r, c))) / np.sqrt(2)


def waterfill_value(h, budget):
    # capacity of log2|I + H K H^H| under tr(K) <= budget, unit noise
    s = np.linalg.svd(h, compute_uv=False)
    g = s ** 2
    g = g[g > 1e-15]
    # bisection on water level
    lo, hi = 0.0, budget + np.max(1 / g)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        p = np.clip(mid - 1 / g, 0, None)
        if p.sum() > budget:
            hi = mid
        else:
            lo = mid
    p = np.clip(lo - 1 / g, 0, None)
    return float(np.sum(np.log2(1 + g * p)))


# --- FD check of psi gradient/hessian ---
n = 2
h = cn(rng, 2, 2)
d_psd = cn(rng, 2, 1)
d_psd = (d_psd @ d_psd.conj().T).real.astype(complex) + 0.1 * np.eye(2)
prog = LogDetProgram(
    matrix_dims={"k": 2, "b": 2},
    scalar_names=("a",),
    objective=ConcaveExpr(
        terms=(LogDetTerm(base=np.eye(2), mats={"k": h, "b": 0.5 * h},
                          scalars={"a": d_psd}),),
        linear=LinearExpr(const=0.3, mats={"k": -0.1 * np.eye(2)}, scalars={"a": -0.2})),
    ineq_le=(LinearExpr(const=-1.0, mats={"k": np.eye(2), "b": np.eye(2)},
                        scalars={"a": 0.5}),),
    concave_ge=((ConcaveExpr(terms=(
        LogDetTerm(base=np.eye(2), mats={"k": h}),
        LogDetTerm(base=2 * np.eye(2), mats={"k": h}, coef=-0.5)),
        linear=LinearExpr(scalars={"a": 0.05})), -2.0),),
)
space = _Space(prog)
x0 = space.pack({"k": 0.05 * np.eye(2), "b": 0.04 * np.eye(2), "a": 0.1})
psi, g, hss, f = _psi_eval(prog, space, x0, 3.0, 2)
eps = 1e-6
g_fd = np.zeros_like(g)
h_fd = np.zeros((space.size, space.size))
for i in range(space.size):
    e = np.zeros(space.size)
    e[i] = eps
    pp, gp, _, _ = _psi_eval(prog, space, x0 + e, 3.0, 1)
    pm, gm, _, _ = _psi_eval(prog, space, x0 - e, 3.0, 1)
    g_fd[i] = (pp - pm) / (2 * eps)
    h_fd[i] = (gp - gm) / (2 * eps)
print("grad err:", np.max(np.abs(g - g_fd)) / max(1, np.max(np.abs(g))))
print("hess err:", np.max(np.abs(hss - h_fd)) / max(1, np.max(np.abs(hss))))

# --- water-filling comparison, 20 instances ---
t0 = time.perf_counter()
errs = []
steps = []
for trial in range(20):
    h = cn(rng, 2, 2)
    budget = float(rng.uniform(0.5, 5.0))
    prog = LogDetProgram(
        matrix_dims={"k": 2},
        objective=ConcaveExpr(terms=(LogDetTerm(base=np.eye(2), mats={"k": h}),)),
        ineq_le=(LinearExpr(const=-budget, mats={"k": np.eye(2)}),),
    )
    res = solve(prog, tol=1e-9)
    ref = waterfill_value(h, budget)
    errs.append(abs(res.value - ref) / abs(ref))
    steps.append(res.newton_steps)
print(f"waterfill rel err max: {max(errs):.2e}, newton steps avg {np.mean(steps):.1f}")
print(f"time per solve: {(time.perf_counter()-t0)/20*1000:.1f} ms")

# --- degenerate budget ---
prog0 = LogDetProgram(
    matrix_dims={"k": 2},
    objective=ConcaveExpr(terms=(LogDetTerm(base=np.eye(2), mats={"k": h}),)),
    ineq_le=(LinearExpr(const=0.0, mats={"k": np.eye(2)}),),
)
res0 = solve(prog0)
print("degenerate:", res0.degenerate, res0.value, np.max(np.abs(res0.point["k"])))

# --- infeasible ---
progI = LogDetProgram(
    matrix_dims={"k": 2},
    objective=ConcaveExpr(terms=(LogDetTerm(base=np.eye(2), mats={"k": h}),)),
    ineq_le=(LinearExpr(const=-1.0, mats={"k": np.eye(2)}),
             LinearExpr(const=2.0, mats={"k": -np.eye(2)}),),
)
try:
    solve(progI)
    print("infeasible: NOT RAISED (bug)")
except Exception as e:
    print("infeasible:", type(e).__name__)

# --- fractional: scalar log2(1+p)/(p+1) as 1x1 program on [0,10] ---
prog_s = LogDetProgram(
    matrix_dims={"p": 1},
    objective=ConcaveExpr(terms=(LogDetTerm(base=np.eye(1), mats={"p": np.eye(1)}),)),
    ineq_le=(LinearExpr(const=-10.0, mats={"p": np.eye(1)}),),
)
num = ConcaveExpr(terms=(LogDetTerm(base=np.eye(1), mats={"p": np.eye(1)}),))
den = LinearExpr(const=1.0, mats={"p": np.eye(1)})
pt, lam, tr = solve_fractional(prog_s, num, den, eps=1e-9)
p_opt = float(pt["p"][0, 0].real)
print(f"dinkelbach scalar: p*={p_opt:.8f} (e-1={np.e-1:.8f}), lam={lam:.8f} "
      f"(ref {np.log2(np.e)/np.e:.8f}), iters={len(tr.lambdas)}")
