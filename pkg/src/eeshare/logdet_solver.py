"""Dense interior-point solver for small concave log-det programs.

Canonical form
--------------
Maximize a concave expression built from

* log-det terms ``coef * log2|S + sum_i G_i K_i G_i^H + sum_j a_j D_j|``
  with constant Hermitian ``S`` (kept positive definite on the feasible
  set), constant maps ``G_i`` and PSD coefficients ``D_j``;
* real-linear functionals ``Re tr(A_i K_i)`` and linear scalar terms,

over Hermitian PSD matrix slots ``K_i`` and nonnegative scalar slots
``a_j``, subject to affine inequality constraints in traces / quadratic
forms / scalars and optional concave inequality constraints
``expr(x) >= bound`` built from the same term machinery (used for minimum
rate constraints; signed log-det coefficients are allowed there as long as
the caller guarantees the total expression is concave).

Method: logarithmic barrier with damped Newton centering. Hermitian slots
are parameterized by their real vectorization (n^2 real coordinates per
n x n slot) over an orthonormal Hermitian basis; positive semidefiniteness
is enforced through a ``log det(K + delta I)`` barrier with a small
regularizer delta. Dimensions here never exceed a handful, so dense Newton
steps are cheap and no external conic solver is needed. Gradients and
Hessians of all terms are analytic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np

from .errors import Infeasible, NumericalFailure
from .fractional import FractionalProblem, dinkelbach_solve
from .model import hermitize

LN2 = math.log(2.0)
LOG2E = 1.0 / LN2
PSD_DELTA = 1e-12          # regularizer inside the PSD barrier
_CLIP_ABS = 10.0 * PSD_DELTA


class _NotInterior(Exception):
    """Internal: trial point left the strictly feasible region."""


@lru_cache(maxsize=16)
def hermitian_basis(n: int) -> np.ndarray:
    """Orthonormal basis of n x n Hermitian matrices under Re tr(A^H B).

    Order: n diagonal units, then for each i<j the symmetric and the
    antisymmetric-imaginary pair, each scaled by 1/sqrt(2).
    """
    mats = []
    for i in range(n):
        e = np.zeros((n, n), dtype=complex)
        e[i, i] = 1.0
        mats.append(e)
    inv_sqrt2 = 1.0 / math.sqrt(2.0)
    for i in range(n):
        for j in range(i + 1, n):
            e = np.zeros((n, n), dtype=complex)
            e[i, j] = inv_sqrt2
            e[j, i] = inv_sqrt2
            mats.append(e)
            e = np.zeros((n, n), dtype=complex)
            e[i, j] = 1j * inv_sqrt2
            e[j, i] = -1j * inv_sqrt2
            mats.append(e)
    out = np.stack(mats)
    out.setflags(write=False)
    return out


def mat_to_vec(mat: np.ndarray) -> np.ndarray:
    basis = hermitian_basis(mat.shape[0])
    return np.einsum("kij,ji->k", basis, mat).real


def vec_to_mat(vec: np.ndarray, n: int) -> np.ndarray:
    basis = hermitian_basis(n)
    return np.einsum("k,kij->ij", vec, basis)


# ---------------------------------------------------------------------------
# Program description
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LogDetTerm:
    """``coef * log2|base + sum_i G_i K_i G_i^H + sum_j a_j D_j|``."""

    base: np.ndarray
    mats: dict[str, np.ndarray] = field(default_factory=dict)
    scalars: dict[str, np.ndarray] = field(default_factory=dict)
    coef: float = 1.0


@dataclass(frozen=True)
class LinearExpr:
    """``const + sum_i Re tr(A_i K_i) + sum_j c_j a_j`` with Hermitian A_i."""

    const: float = 0.0
    mats: dict[str, np.ndarray] = field(default_factory=dict)
    scalars: dict[str, float] = field(default_factory=dict)


@dataclass(frozen=True)
class ConcaveExpr:
    terms: tuple[LogDetTerm, ...] = ()
    linear: LinearExpr = field(default_factory=LinearExpr)


@dataclass(frozen=True)
class LogDetProgram:
    """Concave maximization over PSD matrix and nonnegative scalar slots.

    ``ineq_le`` entries are affine expressions constrained to be <= 0;
    ``concave_ge`` entries are (expr, bound) pairs constrained to
    expr(x) >= bound.
    """

    matrix_dims: dict[str, int]
    objective: ConcaveExpr
    scalar_names: tuple[str, ...] = ()
    ineq_le: tuple[LinearExpr, ...] = ()
    concave_ge: tuple[tuple[ConcaveExpr, float], ...] = ()

    def replace_objective(self, objective: ConcaveExpr) -> "LogDetProgram":
        return LogDetProgram(matrix_dims=self.matrix_dims, objective=objective,
                             scalar_names=self.scalar_names, ineq_le=self.ineq_le,
                             concave_ge=self.concave_ge)


@dataclass(frozen=True)
class SolveResult:
    point: dict
    value: float
    gap: float              # barrier certificate: optimum <= value + gap
    newton_steps: int
    degenerate: bool = False
    t_final: float = 0.0    # last barrier parameter, usable for warm starts


def scale_linear(expr: LinearExpr, c: float) -> LinearExpr:
    return LinearExpr(const=c * expr.const,
                      mats={k: c * v for k, v in expr.mats.items()},
                      scalars={k: c * v for k, v in expr.scalars.items()})


def add_linear(a: LinearExpr, b: LinearExpr) -> LinearExpr:
    mats = dict(a.mats)
    for k, v in b.mats.items():
        mats[k] = mats[k] + v if k in mats else v
    scalars = dict(a.scalars)
    for k, v in b.scalars.items():
        scalars[k] = scalars.get(k, 0.0) + v
    return LinearExpr(const=a.const + b.const, mats=mats, scalars=scalars)


# ---------------------------------------------------------------------------
# Flattened coordinate space
# ---------------------------------------------------------------------------

class _Space:
    def __init__(self, program: LogDetProgram):
        self.mslots = list(program.matrix_dims.items())
        self.scalars = list(program.scalar_names)
        self.offsets: dict[str, tuple[int, int]] = {}
        pos = 0
        for name, dim in self.mslots:
            self.offsets[name] = (pos, dim)
            pos += dim * dim
        self.scalar_index: dict[str, int] = {}
        for name in self.scalars:
            self.scalar_index[name] = pos
            pos += 1
        self.size = pos
        # PSD barrier terms ln det(K + delta I), built once
        self.psd_terms = tuple(
            LogDetTerm(base=PSD_DELTA * np.eye(dim), mats={name: np.eye(dim)},
                       coef=LN2)
            for name, dim in self.mslots)

    def pack(self, point: dict) -> np.ndarray:
        x = np.zeros(self.size)
        for name, (start, dim) in self.offsets.items():
            x[start:start + dim * dim] = mat_to_vec(np.asarray(point[name], dtype=complex))
        for name, idx in self.scalar_index.items():
            x[idx] = float(point[name])
        return x

    def unpack(self, x: np.ndarray) -> dict:
        point = {}
        for name, (start, dim) in self.offsets.items():
            point[name] = vec_to_mat(x[start:start + dim * dim], dim)
        for name, idx in self.scalar_index.items():
            point[name] = float(x[idx])
        return point

    def slot_slice(self, name: str) -> slice:
        start, dim = self.offsets[name]
        return slice(start, start + dim * dim)


# ---------------------------------------------------------------------------
# Expression evaluation with analytic derivatives
# ---------------------------------------------------------------------------

def _cholesky_or_raise(mat: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.cholesky(hermitize(mat))
    except np.linalg.LinAlgError as exc:
        raise _NotInterior from exc


def _linear_eval(expr: LinearExpr, point: dict, space: _Space | None,
                 want_grad: bool):
    val = expr.const
    for name, a in expr.mats.items():
        val += float(np.einsum("ij,ji->", a, point[name]).real)
    for name, c in expr.scalars.items():
        val += c * point[name]
    if not want_grad:
        return val, None
    grad = np.zeros(space.size)
    for name, a in expr.mats.items():
        grad[space.slot_slice(name)] = mat_to_vec(a)
    for name, c in expr.scalars.items():
        grad[space.scalar_index[name]] = c
    return val, grad


def _term_eval(term: LogDetTerm, point: dict, space: _Space | None,
               order: int):
    """Value / gradient / Hessian of one log-det term. Natural-log ln|arg|
    is computed and scaled by ``coef * LOG2E`` so the value is in bits."""
    arg = np.array(term.base, dtype=complex)
    for name, g in term.mats.items():
        k = point[name]
        arg += g @ k @ g.conj().T
    for name, d in term.scalars.items():
        arg += point[name] * d
    chol = _cholesky_or_raise(arg)
    val = 2.0 * float(np.sum(np.log(np.diag(chol).real)))
    coef = term.coef * LOG2E
    if order == 0:
        return coef * val, None, None

    linv = np.linalg.inv(chol)
    w = linv.conj().T @ linv          # arg^{-1}
    grad = np.zeros(space.size)
    pmats: dict[str, np.ndarray] = {}
    for name, g in term.mats.items():
        p = g.conj().T @ w @ g
        pmats[name] = p
        grad[space.slot_slice(name)] = coef * mat_to_vec(hermitize(p))
    wd: dict[str, np.ndarray] = {}
    for name, d in term.scalars.items():
        wd[name] = w @ d
        grad[space.scalar_index[name]] = coef * float(np.trace(wd[name]).real)
    if order == 1:
        return coef * val, grad, None

    hess = np.zeros((space.size, space.size))
    names = list(term.mats)
    cross: dict[tuple[str, str], np.ndarray] = {}
    for a in names:
        for b in names:
            cross[(a, b)] = term.mats[a].conj().T @ w @ term.mats[b]
    for ia, a in enumerate(names):
        ea = hermitian_basis(point[a].shape[0])
        sla = space.slot_slice(a)
        for b in names[ia:]:
            eb = hermitian_basis(point[b].shape[0])
            slb = space.slot_slice(b)
            # d^2 ln|arg| along (Da, Db) = -tr(P_ba Da P_ab Db)
            tmp = np.einsum("ab,kbc,cd->kad", cross[(b, a)], ea, cross[(a, b)])
            block = -coef * np.einsum("kad,lda->kl", tmp, eb).real
            hess[sla, slb] += block
            if a != b:
                hess[slb, sla] += block.T
        for sname, d in term.scalars.items():
            g = term.mats[a]
            m = hermitize(g.conj().T @ (w @ d @ w) @ g)
            vec = -coef * mat_to_vec(m)
            idx = space.scalar_index[sname]
            hess[sla, idx] += vec
            hess[idx, sla] += vec
    snames = list(term.scalars)
    for i, a in enumerate(snames):
        for b in snames[i:]:
            v = -coef * float(np.trace(wd[a] @ wd[b]).real)
            ia_, ib_ = space.scalar_index[a], space.scalar_index[b]
            hess[ia_, ib_] += v
            if a != b:
                hess[ib_, ia_] += v
    return coef * val, grad, hess


def _concave_eval(expr: ConcaveExpr, point: dict, space: _Space | None,
                  order: int):
    val, grad, hess = 0.0, None, None
    if order >= 1:
        grad = np.zeros(space.size)
        if order >= 2:
            hess = np.zeros((space.size, space.size))
    for term in expr.terms:
        v, g, h = _term_eval(term, point, space, order)
        val += v
        if order >= 1:
            grad += g
        if order >= 2:
            hess += h
    lv, lg = _linear_eval(expr.linear, point, space, order >= 1)
    val += lv
    if order >= 1:
        grad += lg
    return val, grad, hess


def expr_value(expr: ConcaveExpr, point: dict) -> float:
    """Evaluate a concave expression at a point (matrices + scalars by slot
    name); raises if a log-det argument is not positive definite."""
    val, _, _ = _concave_eval(expr, point, None, 0)
    return val


def linear_value(expr: LinearExpr, point: dict) -> float:
    val, _ = _linear_eval(expr, point, None, False)
    return val


# ---------------------------------------------------------------------------
# Barrier machinery
# ---------------------------------------------------------------------------

def _barrier_complexity(program: LogDetProgram) -> float:
    nu = float(sum(dim for _, dim in program.matrix_dims.items()))
    nu += len(program.scalar_names)
    nu += len(program.ineq_le)
    nu += len(program.concave_ge)
    return max(nu, 1.0)


def _psi_eval(program: LogDetProgram, space: _Space, x: np.ndarray, t: float,
              order: int):
    """t * objective + sum of barrier terms; raises _NotInterior outside
    the strictly feasible region."""
    point = space.unpack(x)
    f, g_f, h_f = _concave_eval(program.objective, point, space, order)
    psi = t * f
    grad = t * g_f if order >= 1 else None
    hess = t * h_f if order >= 2 else None

    for barrier in space.psd_terms:
        v, g, h = _term_eval(barrier, point, space, order)
        psi += v
        if order >= 1:
            grad += g
        if order >= 2:
            hess += h

    for name in program.scalar_names:
        a = point[name] + PSD_DELTA
        if a <= 0.0:
            raise _NotInterior
        psi += math.log(a)
        idx = space.scalar_index[name]
        if order >= 1:
            grad[idx] += 1.0 / a
        if order >= 2:
            hess[idx, idx] += -1.0 / (a * a)

    for expr in program.ineq_le:
        val, g = _linear_eval(expr, point, space, order >= 1)
        slack = -val
        if slack <= 0.0:
            raise _NotInterior
        psi += math.log(slack)
        if order >= 1:
            grad += -g / slack
        if order >= 2:
            hess += -np.outer(g, g) / (slack * slack)

    for expr, bound in program.concave_ge:
        val, g, h = _concave_eval(expr, point, space, order)
        u = val - bound
        if u <= 0.0:
            raise _NotInterior
        psi += math.log(u)
        if order >= 1:
            grad += g / u
        if order >= 2:
            hess += h / u - np.outer(g, g) / (u * u)

    return psi, grad, hess, f


def _newton_center(program: LogDetProgram, space: _Space, x: np.ndarray,
                   t: float, ctol: float = 1e-9, max_steps: int = 80):
    steps = 0
    psi, grad, hess, f = _psi_eval(program, space, x, t, 2)
    dec = math.inf
    for _ in range(max_steps):
        neg_h = -0.5 * (hess + hess.T)
        ridge = 0.0
        scale = max(float(np.max(np.abs(neg_h))), 1.0)
        for _ in range(60):
            try:
                chol = np.linalg.cholesky(neg_h + ridge * np.eye(space.size))
                break
            except np.linalg.LinAlgError:
                ridge = max(2.0 * ridge, 1e-14 * scale)
        else:
            raise NumericalFailure("Newton system not positive definite")
        d = np.linalg.solve(chol.conj().T, np.linalg.solve(chol, grad)).real
        dec = float(grad @ d)
        if dec < 0.0:
            dec = 0.0
        # a centering residual of dec/2 costs at most dec/(2t) in objective
        # value, so ill-conditioned final stages may stop once that error
        # is negligible even if dec itself stalls above ctol
        if 0.5 * dec <= max(ctol, 1e-12 * t * (1.0 + abs(f))):
            return x, psi, f, steps
        slack = 1e-12 * (1.0 + abs(psi))
        # full step first, with derivatives computed on the fly so an
        # accepted step costs a single evaluation
        accepted = False
        try:
            out = _psi_eval(program, space, x + d, t, 2)
            if out[0] >= psi + 0.25 * dec - slack:
                x = x + d
                psi, grad, hess, f = out
                accepted = True
        except _NotInterior:
            pass
        if not accepted:
            alpha = 0.5
            while alpha > 1e-13:
                x_try = x + alpha * d
                try:
                    psi_try, _, _, _ = _psi_eval(program, space, x_try, t, 0)
                except _NotInterior:
                    alpha *= 0.5
                    continue
                if psi_try >= psi + 0.25 * alpha * dec - slack:
                    x = x_try
                    accepted = True
                    break
                alpha *= 0.5
            if accepted:
                psi, grad, hess, f = _psi_eval(program, space, x, t, 2)
        steps += 1
        if not accepted:
            if 0.5 * dec <= max(1e-5, 1e-10 * t * (1.0 + abs(f))):
                return x, psi, f, steps
            raise NumericalFailure(
                f"line search stalled (decrement {dec:.3e}, t={t:.3e})")
    if 0.5 * dec <= max(1e-4, 1e-10 * t * (1.0 + abs(f))):
        return x, psi, f, steps
    raise NumericalFailure(f"centering did not converge (decrement {dec:.3e})")


def _strictness_margin(program: LogDetProgram, point: dict) -> float:
    """Smallest normalized slack across all inequality-type constraints;
    positive means strictly feasible. PSD slot positivity is not included
    (the barrier regularizer handles exact zeros)."""
    margin = math.inf
    for name in program.scalar_names:
        margin = min(margin, point[name])
    for expr in program.ineq_le:
        scale = max(abs(expr.const),
                    max((float(np.linalg.norm(a)) for a in expr.mats.values()), default=0.0),
                    max((abs(c) for c in expr.scalars.values()), default=0.0), 1e-300)
        margin = min(margin, -linear_value(expr, point) / scale)
    for expr, bound in program.concave_ge:
        try:
            val = expr_value(expr, point)
        except _NotInterior:
            return -math.inf
        margin = min(margin, (val - bound) / max(1.0, abs(bound)))
    return margin


def _clip_psd(mat: np.ndarray, name: str) -> np.ndarray:
    m = hermitize(mat)
    w, v = np.linalg.eigh(m)
    if w[0] >= 0.0:
        return m
    tr = max(float(np.sum(w)), 0.0)
    tol = max(1e-8 * tr, _CLIP_ABS)
    if w[0] < -tol:
        raise NumericalFailure(
            f"slot {name}: negative eigenvalue {w[0]:.3e} beyond clip tolerance")
    return hermitize((v * np.clip(w, 0.0, None)) @ v.conj().T)


def _inflate_start(program: LogDetProgram, space: _Space, x0: dict) -> dict:
    """Nudge slots sitting exactly on the PSD/nonnegativity boundary a
    little into the interior (when that stays strictly feasible); Newton
    escapes the delta-regularized barrier very slowly from exact zeros."""
    needs = any(
        float(np.linalg.eigvalsh(hermitize(np.asarray(x0[n], dtype=complex)))[0]) < 1e-9
        for n, _ in space.mslots) or any(x0[n] < 1e-9 for n in space.scalars)
    if not needs:
        return x0
    for c in (1e-2, 1e-4, 1e-6, 1e-8):
        trial = dict(x0)
        for name, dim in space.mslots:
            trial[name] = np.asarray(x0[name], dtype=complex) + (c / dim) * np.eye(dim)
        for name in space.scalars:
            trial[name] = float(x0[name]) + c
        try:
            _psi_eval(program, space, space.pack(trial), 1.0, 0)
            return trial
        except _NotInterior:
            continue
    return x0


def solve(program: LogDetProgram, x0: dict | None = None, tol: float = 1e-8,
          t0: float = 1.0, mu: float = 20.0, max_stages: int = 60,
          stop_when: Callable[[dict], bool] | None = None) -> SolveResult:
    """Maximize the program objective to within ``tol*(1+|value|)``.

    ``x0`` must be strictly feasible when given; otherwise
    :func:`find_feasible` is called first. ``stop_when`` is checked after
    every centering stage and ends the solve early when it returns True
    (used by the feasibility phase).

    Raises :class:`Infeasible` when no strictly feasible point exists and
    :class:`NumericalFailure` when Newton centering stalls.
    """
    space = _Space(program)
    degenerate = False
    if x0 is None:
        x0, strict = find_feasible(program)
        if not strict:
            value = expr_value(program.objective, x0)
            return SolveResult(point=x0, value=value, gap=0.0, newton_steps=0,
                               degenerate=True)
    x0 = _inflate_start(program, space, x0)
    x = space.pack(x0)
    try:
        _psi_eval(program, space, x, t0, 0)
    except _NotInterior as exc:
        raise Infeasible("starting point is not strictly feasible") from exc

    nu = _barrier_complexity(program)
    t = t0
    total_steps = 0
    value = -math.inf
    for _ in range(max_stages):
        # loose centering along the path, tight only at the final stage
        x, _, value, steps = _newton_center(program, space, x, t, ctol=0.05)
        total_steps += steps
        gap = nu / t
        if stop_when is not None and stop_when(space.unpack(x)):
            break
        if gap <= tol * (1.0 + abs(value)):
            x, _, value, steps = _newton_center(program, space, x, t, ctol=1e-10)
            total_steps += steps
            break
        t *= mu
    else:
        raise NumericalFailure("barrier stage budget exhausted")

    point = space.unpack(x)
    for name in program.matrix_dims:
        point[name] = _clip_psd(point[name], name)
    for name in program.scalar_names:
        point[name] = max(point[name], 0.0)
    return SolveResult(point=point, value=value, gap=nu / t,
                       newton_steps=total_steps, degenerate=degenerate,
                       t_final=t)


# ---------------------------------------------------------------------------
# Feasibility
# ---------------------------------------------------------------------------

def _zeros_point(program: LogDetProgram) -> dict:
    point = {name: np.zeros((dim, dim), dtype=complex)
             for name, dim in program.matrix_dims.items()}
    for name in program.scalar_names:
        point[name] = 0.0
    return point


_PHASE_SLOT = "_phase_shift"


def find_feasible(program: LogDetProgram, margin: float = 1e-9,
                  ) -> tuple[dict, bool]:
    """Find a strictly feasible point for all inequality-type constraints.

    Returns ``(point, strict)``. A simple scaled-identity sweep is tried
    first; otherwise a phase-I program minimizes the worst normalized
    constraint violation. ``strict=False`` is returned when the feasible
    set has an empty interior but the zero point is feasible up to
    roundoff (degenerate budgets).

    Raises :class:`Infeasible` when even the phase-I optimum violates a
    constraint.
    """
    # cheap candidates: scaled identities / scalars, zeros last (zeros sit
    # on the PSD barrier boundary and make poor Newton starting points)
    zeros = _zeros_point(program)
    candidates = []
    for c in (1e-1, 1e-2, 1e-3, 1e-5, 1e-7):
        point = {name: c / dim * np.eye(dim, dtype=complex)
                 for name, dim in program.matrix_dims.items()}
        for name in program.scalar_names:
            point[name] = c
        candidates.append(point)
    candidates.append(zeros)
    for point in candidates:
        try:
            m = _strictness_margin(program, point)
        except _NotInterior:
            continue
        if m > margin:
            return point, True
    zeros_margin = None
    try:
        zeros_margin = _strictness_margin(program, zeros)
    except _NotInterior:
        pass

    # phase-I: minimize the worst violation through a shifted slack scalar
    base = _zeros_point(program)
    viol = 0.0
    for expr in program.ineq_le:
        scale = max(abs(expr.const),
                    max((float(np.linalg.norm(a)) for a in expr.mats.values()), default=0.0),
                    max((abs(c) for c in expr.scalars.values()), default=0.0), 1e-300)
        viol = max(viol, linear_value(expr, base) / scale)
    for expr, bound in program.concave_ge:
        val = expr_value(expr, base)
        viol = max(viol, (bound - val) / max(1.0, abs(bound)))
    shift = viol + 1.0

    ineq = []
    for expr in program.ineq_le:
        scale = max(abs(expr.const),
                    max((float(np.linalg.norm(a)) for a in expr.mats.values()), default=0.0),
                    max((abs(c) for c in expr.scalars.values()), default=0.0), 1e-300)
        scaled = scale_linear(expr, 1.0 / scale)
        ineq.append(add_linear(scaled, LinearExpr(const=shift,
                                                  scalars={_PHASE_SLOT: -1.0})))
    cge = []
    for expr, bound in program.concave_ge:
        scale = max(1.0, abs(bound))
        shifted = ConcaveExpr(
            terms=tuple(LogDetTerm(base=t.base, mats=t.mats, scalars=t.scalars,
                                   coef=t.coef / scale) for t in expr.terms),
            linear=add_linear(scale_linear(expr.linear, 1.0 / scale),
                              LinearExpr(scalars={_PHASE_SLOT: 1.0})))
        cge.append((shifted, bound / scale + shift))
    phase = LogDetProgram(
        matrix_dims=program.matrix_dims,
        objective=ConcaveExpr(linear=LinearExpr(scalars={_PHASE_SLOT: -1.0})),
        scalar_names=tuple(program.scalar_names) + (_PHASE_SLOT,),
        ineq_le=tuple(ineq),
        concave_ge=tuple(cge),
    )
    start = dict(base)
    start[_PHASE_SLOT] = 2.0 * shift
    target = shift - 10.0 * margin

    result = solve(phase, x0=start, tol=1e-6,
                   stop_when=lambda p: p[_PHASE_SLOT] < target)
    s = result.point[_PHASE_SLOT] - shift
    point = {k: v for k, v in result.point.items() if k != _PHASE_SLOT}
    if s < -margin:
        return point, True
    if zeros_margin is not None and zeros_margin >= -1e-12:
        return zeros, False
    if s <= margin:
        # boundary-only feasibility without a usable degenerate point
        raise Infeasible("constraint set has empty interior")
    raise Infeasible(f"phase-I violation {s:.3e} remains positive")


# ---------------------------------------------------------------------------
# Ratio maximization over log-det programs
# ---------------------------------------------------------------------------

def fractional_problem(template: LogDetProgram, numerator: ConcaveExpr,
                       denominator: LinearExpr, x0: dict | None = None,
                       inner_tol: float = 1e-8) -> FractionalProblem:
    """Package numerator/denominator over the template's feasible set as a
    ratio problem for the parametric solver.

    The parametric subproblem for each ratio value folds
    ``-lambda * denominator`` into the linear part of the objective and is
    solved by the barrier method, warm-started at the previous maximizer
    (the feasible set is unchanged across ratio parameters, so later
    subproblems also start further along the barrier path).
    """
    state = {"x": x0, "t0": 1.0}

    def subproblem(lam: float):
        objective = ConcaveExpr(terms=numerator.terms,
                                linear=add_linear(numerator.linear,
                                                  scale_linear(denominator, -lam)))
        prog = template.replace_objective(objective)
        try:
            result = solve(prog, x0=state["x"], tol=inner_tol, t0=state["t0"])
        except Infeasible:
            if state["x"] is None:
                raise
            # warm start too close to the boundary for the barrier; restart
            # from a fresh interior point of the unchanged feasible set
            result = solve(prog, x0=None, tol=inner_tol)
        state["x"] = result.point
        state["t0"] = max(1.0, result.t_final / 1e4)
        return result.point, result.value

    return FractionalProblem(
        numerator=lambda p: expr_value(numerator, p),
        denominator=lambda p: linear_value(denominator, p),
        subproblem_solver=subproblem,
    )


def solve_fractional(template: LogDetProgram, numerator: ConcaveExpr,
                     denominator: LinearExpr, x0: dict | None = None,
                     eps: float = 1e-6, inner_tol: float = 1e-8,
                     max_iter: int = 100):
    """Maximize numerator/denominator over the template's feasible set.

    Returns ``(point, ratio, trace)``.
    """
    problem = fractional_problem(template, numerator, denominator, x0,
                                 inner_tol)
    return dinkelbach_solve(problem, 0.0, eps=eps, max_iter=max_iter)
