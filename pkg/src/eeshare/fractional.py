"""Generic ratio-maximization machinery.

Two engines live here:

* :func:`dinkelbach_solve` maximizes f(x)/g(x) over a fixed feasible set by
  driving the parametric value F(lambda) = max_x {f(x) - lambda g(x)} to
  zero; the lambda update is a Newton step on F, so convergence is
  super-linear.
* :func:`surrogate_loop` maximizes a hard ratio by repeatedly maximizing
  concave-fractional lower bounds built around the current iterate. When
  every surrogate matches the true objective in value and gradient at its
  expansion point and lower-bounds it elsewhere, the true objective is
  nondecreasing across iterations and converges to a first-order optimal
  value.

Both engines treat points as opaque objects; all problem structure enters
through callbacks, which must be pure.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Callable

from .errors import MaxIterExceeded, NonMonotoneObjective, SubproblemFailed
from .model import FractionalTrace


@dataclass(frozen=True)
class FractionalProblem:
    """A ratio f/g together with a solver for the parametric subproblem.

    Attributes
    ----------
    numerator, denominator : callables point -> float
        f must be nonnegative on the feasible set when ``lambda0=0`` is
        used; g must be strictly positive everywhere feasible.
    subproblem_solver : callable lambda -> (point, value)
        Returns a maximizer and the maximum of f - lambda*g over the
        feasible set.
    """

    numerator: Callable[[Any], float]
    denominator: Callable[[Any], float]
    subproblem_solver: Callable[[float], tuple[Any, float]]


def dinkelbach_solve(problem: FractionalProblem, lambda0: float = 0.0,
                     eps: float = 1e-6, max_iter: int = 100,
                     ) -> tuple[Any, float, FractionalTrace]:
    """Maximize a ratio via the parametric (Newton-on-F) iteration.

    Parameters
    ----------
    lambda0 : float
        Starting ratio parameter; must satisfy F(lambda0) >= 0 (zero is
        always valid for nonnegative numerators).
    eps : float
        Termination threshold on F(lambda).

    Returns
    -------
    (point, lambda_final, trace) where ``lambda_final`` is the achieved
    ratio f(x)/g(x) at the returned point.

    Raises
    ------
    SubproblemFailed
        If the inner solver errors out or the lambda sequence stops
        increasing while F is still far from zero.
    MaxIterExceeded
        If ``max_iter`` outer iterations do not reach the tolerance.
    """
    lambdas: list[float] = []
    f_values: list[float] = []
    objectives: list[float] = []
    lam = float(lambda0)
    for _ in range(max_iter):
        try:
            x, f_val = problem.subproblem_solver(lam)
        except Exception as exc:  # noqa: BLE001 - wrap any inner failure
            if isinstance(exc, (SubproblemFailed, KeyboardInterrupt)):
                raise
            raise SubproblemFailed(f"inner solver failed at lambda={lam:.6g}") from exc
        num = problem.numerator(x)
        den = problem.denominator(x)
        if not den > 0.0:
            raise SubproblemFailed("denominator not strictly positive at iterate")
        ratio = num / den
        lambdas.append(lam)
        f_values.append(f_val)
        objectives.append(ratio)
        if f_val <= eps:
            trace = FractionalTrace(tuple(lambdas), tuple(f_values), tuple(objectives))
            return x, ratio, trace
        if ratio <= lam:
            # theory guarantees strict increase while F > 0; a stall means
            # the inner solution is only accurate to our tolerance
            if f_val <= 10.0 * eps * (1.0 + abs(lam)):
                trace = FractionalTrace(tuple(lambdas), tuple(f_values), tuple(objectives))
                return x, ratio, trace
            raise SubproblemFailed(
                f"ratio parameter stalled at {lam:.6g} with F={f_val:.3e}")
        lam = ratio
    raise MaxIterExceeded(f"no convergence in {max_iter} iterations (F={f_values[-1]:.3e})")


def surrogate_loop(initial: Any,
                   build_surrogate: Callable[[Any], FractionalProblem],
                   objective: Callable[[Any], float],
                   eps: float = 1e-3,
                   max_iter: int = 50,
                   inner_eps: float = 1e-6,
                   inner_max_iter: int = 100,
                   debug_check: Callable[[FractionalProblem, Any], None] | None = None,
                   extrapolate: Callable[[Any, Any, float], Any | None] | None = None,
                   ) -> tuple[Any, FractionalTrace]:
    """Ascent over successive concave-fractional lower bounds.

    Parameters
    ----------
    initial : point
        Feasible starting point.
    build_surrogate : callable point -> FractionalProblem
        Constructs the lower-bound ratio problem expanded at the given
        point. The surrogate must match ``objective`` in value at the
        expansion point; this is verified every iteration and a mismatch
        raises :class:`NonMonotoneObjective` (broken surrogate).
    objective : callable point -> float
        The true ratio being maximized; used for the monotonicity check
        and the relative-change termination test.
    eps : float
        Terminate when the relative objective change drops to ``eps``.
    debug_check : optional callable (problem, point) -> None
        Extra caller-supplied contract verification (e.g. bound and
        gradient checks) run before each inner solve.
    extrapolate : optional callable (x_prev, x_new, theta) -> point or None
        Over-relaxation hook: returns the point stretched by ``theta``
        along the last step when it is feasible, else None. Stretched
        points are adopted only when they strictly improve the true
        objective, so monotonicity, iterate feasibility and the fixed
        points of the ascent are unchanged; this cuts through the slow
        crawl the plain expansion-point update exhibits when iterates
        slide along an active constraint manifold.

    Returns
    -------
    (point, trace) with ``trace.objectives`` holding the true objective
    after each outer iteration, starting point included. If the iteration
    cap is reached, the current (feasible, monotone) iterate is returned.
    """
    x = initial
    obj = float(objective(x))
    objectives = [obj]
    lambdas: list[float] = []
    f_values: list[float] = []
    slack = lambda v: 1e-9 * max(1.0, abs(v))  # noqa: E731
    for _ in range(max_iter):
        prob = build_surrogate(x)
        num0 = prob.numerator(x)
        den0 = prob.denominator(x)
        if not den0 > 0.0:
            raise NonMonotoneObjective("surrogate denominator not positive at expansion point")
        if abs(num0 / den0 - obj) > 1e-7 * max(1.0, abs(obj)):
            raise NonMonotoneObjective(
                f"surrogate value {num0 / den0!r} does not match objective {obj!r} "
                "at the expansion point")
        if debug_check is not None:
            debug_check(prob, x)
        x_new, lam, _ = dinkelbach_solve(prob, 0.0, eps=inner_eps, max_iter=inner_max_iter)
        obj_new = float(objective(x_new))
        if obj_new < obj - slack(obj):
            raise NonMonotoneObjective(
                f"objective decreased from {obj!r} to {obj_new!r}")
        if extrapolate is not None:
            for theta in (8.0, 4.0, 2.0):
                stretched = extrapolate(x, x_new, theta)
                if stretched is None:
                    continue
                obj_str = float(objective(stretched))
                if obj_str > obj_new + slack(obj_new):
                    x_new, obj_new = stretched, obj_str
                    break
        lambdas.append(lam)
        f_values.append(0.0)
        objectives.append(obj_new)
        x, prev = x_new, obj
        obj = obj_new
        if abs(obj - prev) <= eps * max(1.0, abs(prev)):
            break
    trace = FractionalTrace(tuple(lambdas), tuple(f_values), tuple(objectives))
    return x, trace
