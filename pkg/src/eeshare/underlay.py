"""Globally optimal secondary covariances for the underlay mode.

The secondary link maximizes its energy efficiency subject to the primary
rate guarantee (an affine interference budget at the primary receiver), a
consumed-power budget, a secondary rate target, and decodability of the
primary message at the secondary receiver for whatever part of the
secondary message is decoded after interference cancellation.

The allocation splits into three regimes selected by the primary rate
target:

* NO_SIC: the target exceeds what the secondary receiver could ever
  decode, so the whole secondary message is decoded under interference
  (after-cancellation covariance forced to zero);
* FULL_SIC: the unconstrained-optimal covariance already leaves the
  primary message decodable, so everything is decoded interference-free;
* RATE_SPLIT: in between, the optimizer works on the covariance sum and a
  split fraction gamma moves just enough power into the
  before-cancellation part to make the primary message exactly decodable.

Each regime reduces to one or two concave-fractional programs handled by
the parametric ratio solver over the dense barrier method.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (GammaBracketFailure, NumericalFailure,
                     R1StarExceedsDirectCapacity, R2StarInfeasible)
from .logdet_solver import (ConcaveExpr, LinearExpr, LogDetProgram,
                            LogDetTerm, solve, solve_fractional)
from .model import (CaseTag, ChannelSet, HermitianPSD, SystemParams,
                    UnderlaySolution, as_matrix, hermitize)
from .rates import (ee_underlay, log2det, primary_interference_covariance,
                    primary_rate_underlay, r12_rate, secondary_rate_underlay)

NULLSPACE_P_INT_RTOL = 1e-12    # below this (relative to sigma^2) the
                                # interference budget is treated as exactly 0
DINKELBACH_EPS = 1e-6           # on F, per-Hz rate units
GAMMA_RTOL = 1e-9
GAMMA_MAX_STEPS = 200


@dataclass(frozen=True)
class CaseThresholds:
    """Decision quantities of the regime selection.

    ``case2_threshold`` is NaN when the NO_SIC test already decided (the
    full-SIC benchmark covariance is then never computed).
    """

    r12_at_zero: float       # bit/s
    case2_threshold: float   # bit/s
    p_int: float             # Watts


def compute_p_int(params: SystemParams, ch: ChannelSet) -> float:
    """Maximum total interference power tolerable at the primary receiver.

    Returns ``p1 ||h11||^2 / (2^(r1_star/B) - 1) - sigma^2`` (infinite for
    a zero target). Raises :class:`R1StarExceedsDirectCapacity` when the
    target is above the interference-free primary capacity, in which case
    the underlay mode is inapplicable and the caller should use the relay
    mode instead.
    """
    ch.check_against(params)
    sigma2 = params.noise_power
    snr = params.p1 * float(np.vdot(ch.h11, ch.h11).real) / sigma2
    r1s = params.r1_star / params.bandwidth
    cap = math.log1p(snr) / math.log(2.0)
    if r1s > cap * (1.0 + 1e-12):
        raise R1StarExceedsDirectCapacity(
            f"r1_star is {r1s:.6g} b/s/Hz but the direct link supports only "
            f"{cap:.6g} b/s/Hz")
    if r1s == 0.0:
        return math.inf
    return max(sigma2 * (snr / (2.0 ** r1s - 1.0) - 1.0), 0.0)


class _Normalized:
    """Problem data rescaled so traces are <= 1 and noise is unit."""

    def __init__(self, params: SystemParams, ch: ChannelSet, mode: str):
        if params.alpha <= 0.0:
            raise ValueError("allocation requires alpha > 0 (power budget)")
        if mode not in ("ee", "rate"):
            raise ValueError(f"unknown mode {mode!r}")
        sigma2 = params.noise_power
        self.params = params
        self.ch = ch
        self.scale_p = params.p2 / params.alpha
        sc = math.sqrt(self.scale_p / sigma2)
        self.n = params.n_t2
        self.h_full = ch.h22_mat * sc
        self.hv_full = ch.h21 * sc
        self.q1 = hermitize(primary_interference_covariance(params, ch) / sigma2)
        self.r1s = params.r1_star / params.bandwidth
        self.r2s = params.r2_star / params.bandwidth
        if mode == "rate":
            self.obj_alpha, self.obj_pc = 0.0, 1.0
        else:
            self.obj_alpha, self.obj_pc = params.alpha, params.p_c
        p_int = compute_p_int(params, ch)
        self.p_int_norm = p_int / sigma2

        # exact-zero interference budget: restrict the covariances to the
        # orthogonal complement of the cross channel instead of letting the
        # barrier chase an empty interior
        hv_norm = float(np.linalg.norm(self.hv_full))
        self.reduced = (math.isfinite(self.p_int_norm)
                        and self.p_int_norm < NULLSPACE_P_INT_RTOL
                        and hv_norm > 0.0)
        if self.reduced:
            u = self.hv_full / hv_norm
            full = np.eye(self.n, dtype=complex) - np.outer(u, u.conj())
            w, v = np.linalg.eigh(hermitize(full))
            self.basis = v[:, w > 0.5]      # n x (n-1), orthonormal
            self.dim = self.n - 1
        else:
            self.basis = np.eye(self.n, dtype=complex)
            self.dim = self.n
        self.g = self.h_full @ self.basis
        self.hv = self.basis.conj().T @ self.hv_full

    def lift(self, k_reduced: np.ndarray) -> np.ndarray:
        return hermitize(self.basis @ k_reduced @ self.basis.conj().T)

    def project(self, k_full: np.ndarray) -> np.ndarray:
        return hermitize(self.basis.conj().T @ k_full @ self.basis)

    def to_watts(self, k_reduced: np.ndarray) -> np.ndarray:
        return self.scale_p * self.lift(k_reduced)

    def denominator(self, slots: tuple[str, ...]) -> LinearExpr:
        coef = self.obj_alpha * self.scale_p
        eye = np.eye(self.dim, dtype=complex)
        return LinearExpr(const=self.obj_pc, mats={s: coef * eye for s in slots})

    def affine_constraints(self, slots: tuple[str, ...]) -> tuple[LinearExpr, ...]:
        eye = np.eye(self.dim, dtype=complex)
        cons = [LinearExpr(const=-1.0, mats={s: eye for s in slots})]
        if not self.reduced and math.isfinite(self.p_int_norm):
            quad = np.outer(self.hv, self.hv.conj())
            cons.append(LinearExpr(const=-self.p_int_norm,
                                   mats={s: quad for s in slots}))
        return tuple(cons)

    @property
    def rate_tol(self) -> float:
        return 1e-6 * (1.0 + self.r1s)


def _maximize_ratio(norm: _Normalized, base: LogDetProgram,
                    numerator: ConcaveExpr, slots: tuple[str, ...],
                    x0: dict | None, eps: float):
    """Rate-target feasibility check plus parametric ratio maximization.

    ``base`` carries every constraint except the secondary rate target.
    When a target is present, the rate itself is maximized first under the
    remaining constraints; that both certifies feasibility of the target
    and provides a strictly feasible interior starting point.
    """
    template = base
    if norm.r2s > 0.0:
        best = solve(base.replace_objective(numerator), x0=x0)
        if best.value <= norm.r2s:
            raise R2StarInfeasible(
                f"max achievable secondary rate {best.value:.6g} b/s/Hz is "
                f"below the target {norm.r2s:.6g}")
        x0 = best.point
        template = LogDetProgram(
            matrix_dims=base.matrix_dims, objective=numerator,
            scalar_names=base.scalar_names, ineq_le=base.ineq_le,
            concave_ge=base.concave_ge + ((numerator, norm.r2s),))
    den = norm.denominator(slots)
    point, ratio, trace = solve_fractional(template, numerator, den,
                                           x0=x0, eps=eps)
    return point, ratio, trace


def _no_sic_program(norm: _Normalized):
    s_mat = hermitize(np.eye(norm.q1.shape[0]) + norm.q1)
    numerator = ConcaveExpr(
        terms=(LogDetTerm(base=s_mat, mats={"k21": norm.g}),),
        linear=LinearExpr(const=-log2det(s_mat)))
    base = LogDetProgram(matrix_dims={"k21": norm.dim},
                         objective=numerator,
                         ineq_le=norm.affine_constraints(("k21",)))
    return base, numerator


def _full_sic_program(norm: _Normalized):
    eye = np.eye(norm.g.shape[0])
    numerator = ConcaveExpr(terms=(LogDetTerm(base=eye, mats={"k22": norm.g}),))
    base = LogDetProgram(matrix_dims={"k22": norm.dim},
                         objective=numerator,
                         ineq_le=norm.affine_constraints(("k22",)))
    return base, numerator


def _rate_split_program(norm: _Normalized):
    eye = np.eye(norm.g.shape[0])
    s_mat = hermitize(eye + norm.q1)
    numerator = ConcaveExpr(
        terms=(LogDetTerm(base=s_mat, mats={"k1": norm.g, "k2": norm.g}),),
        linear=LinearExpr(const=-norm.r1s))
    # decodability of the primary message at the secondary receiver given
    # the after-cancellation covariance: a concave difference of log-dets
    decode = ConcaveExpr(terms=(
        LogDetTerm(base=eye, mats={"k2": norm.g}),
        LogDetTerm(base=s_mat, mats={"k2": norm.g}, coef=-1.0)))
    base = LogDetProgram(matrix_dims={"k1": norm.dim, "k2": norm.dim},
                         objective=numerator,
                         ineq_le=norm.affine_constraints(("k1", "k2")),
                         concave_ge=((decode, -norm.r1s),))
    return base, numerator


def _solve_full_sic_benchmark(norm: _Normalized, eps: float):
    """Optimal covariance ignoring the decodability constraint (all power
    in the after-cancellation part); the full-SIC regime test evaluates
    the primary rate at the secondary receiver against it."""
    template, numerator = _full_sic_program(norm)
    point, _, trace = _maximize_ratio(norm, template, numerator, ("k22",),
                                      None, eps)
    return norm.to_watts(point["k22"]), len(trace.lambdas)


def _select(params: SystemParams, ch: ChannelSet, mode: str, eps: float):
    norm = _Normalized(params, ch, mode)
    zero = np.zeros((params.n_t2, params.n_t2))
    r12_zero = r12_rate(params, ch, zero)
    p_int = compute_p_int(params, ch)
    if params.r1_star >= r12_zero:
        return (CaseTag.NO_SIC, CaseThresholds(r12_zero, math.nan, p_int),
                None, norm, 0)
    sigma_star, iters = _solve_full_sic_benchmark(norm, eps)
    threshold = r12_rate(params, ch, sigma_star)
    tag = CaseTag.FULL_SIC if params.r1_star <= threshold else CaseTag.RATE_SPLIT
    return (tag, CaseThresholds(r12_zero, threshold, p_int),
            HermitianPSD.from_matrix(sigma_star, clip_tol=1e-12 * params.p2),
            norm, iters)


def select_case(params: SystemParams, ch: ChannelSet, mode: str = "ee",
                ) -> tuple[CaseTag, CaseThresholds, HermitianPSD | None]:
    """Decide the operating regime for this instance.

    Returns the case tag, the thresholds used for the decision and, when
    it was computed, the covariance that benchmarks the full-SIC regime.
    """
    tag, thresholds, sigma_star, _, _ = _select(params, ch, mode, DINKELBACH_EPS)
    return tag, thresholds, sigma_star


def _split_fraction(params: SystemParams, ch: ChannelSet,
                    k2_hat: np.ndarray) -> float:
    """Bisect gamma in [0, 1] so the primary message is exactly decodable
    at the secondary receiver under covariance gamma * k2_hat."""
    b = params.bandwidth
    r1s = params.r1_star / b
    tol = GAMMA_RTOL * (1.0 + r1s)

    def gap(gamma: float) -> float:
        return r12_rate(params, ch, gamma * k2_hat) / b - r1s

    lo, hi = 0.0, 1.0
    g_lo, g_hi = gap(lo), gap(hi)
    if g_lo < -tol or g_hi > tol:
        raise GammaBracketFailure(
            f"split fraction not bracketed: gap(0)={g_lo:.3e}, gap(1)={g_hi:.3e}")
    if abs(g_hi) <= tol:
        return 1.0
    for _ in range(GAMMA_MAX_STEPS):
        mid = 0.5 * (lo + hi)
        g_mid = gap(mid)
        if abs(g_mid) <= tol:
            return mid
        if g_mid > 0.0:
            lo = mid
        else:
            hi = mid
    raise GammaBracketFailure("split-fraction bisection did not converge")


def _assemble(params: SystemParams, ch: ChannelSet, k21: np.ndarray,
              k22: np.ndarray, tag: CaseTag, gamma: float | None,
              iterations: int) -> UnderlaySolution:
    clip = 1e-12 * max(params.p2, 1.0)
    k21_psd = HermitianPSD.from_matrix(k21, clip_tol=clip)
    k22_psd = HermitianPSD.from_matrix(k22, clip_tol=clip)
    r1 = primary_rate_underlay(params, ch, k21_psd, k22_psd)
    if tag is CaseTag.FULL_SIC:
        r2 = params.bandwidth * log2det(
            np.eye(params.n_r)
            + ch.h22_mat @ k22_psd.entries @ ch.h22_mat.conj().T / params.noise_power)
    else:
        r2 = secondary_rate_underlay(params, ch, k21_psd, k22_psd)
    sol = UnderlaySolution(
        k21=k21_psd, k22=k22_psd, case_tag=tag,
        ee=ee_underlay(params, ch, k21_psd, k22_psd),
        r1=r1, r2=r2,
        r12=r12_rate(params, ch, k22_psd),
        tx_power=params.alpha * (k21_psd.trace + k22_psd.trace),
        gamma=gamma, iterations=iterations)
    _check_solution(params, ch, sol)
    return sol


def _check_solution(params: SystemParams, ch: ChannelSet,
                    sol: UnderlaySolution) -> None:
    b = params.bandwidth
    tol_rate = 1e-6 * (1.0 + params.r1_star / b) * b
    if sol.tx_power > params.p2 + 1e-9:
        raise NumericalFailure(f"power budget violated: {sol.tx_power!r}")
    p_int = compute_p_int(params, ch)
    if math.isfinite(p_int):
        leak = float(np.real(ch.h21.conj() @ (sol.k21.entries + sol.k22.entries)
                             @ ch.h21))
        if leak > p_int + 1e-9 * (params.noise_power + p_int):
            raise NumericalFailure("interference budget violated")
    if sol.r1 < params.r1_star - tol_rate:
        raise NumericalFailure("primary rate target violated")
    if sol.r2 < params.r2_star - tol_rate:
        raise NumericalFailure("secondary rate target violated")
    if sol.case_tag is not CaseTag.NO_SIC and sol.r12 < params.r1_star - tol_rate:
        raise NumericalFailure("primary message not decodable at the secondary receiver")


def solve_case1(params: SystemParams, ch: ChannelSet, mode: str = "ee",
                eps: float = DINKELBACH_EPS) -> UnderlaySolution:
    """NO_SIC regime: after-cancellation covariance forced to zero, the
    whole secondary message decoded with the primary signal as noise."""
    norm = _Normalized(params, ch, mode)
    template, numerator = _no_sic_program(norm)
    point, _, trace = _maximize_ratio(norm, template, numerator, ("k21",),
                                      None, eps)
    k21 = norm.to_watts(point["k21"])
    zero = np.zeros((params.n_t2, params.n_t2))
    return _assemble(params, ch, k21, zero, CaseTag.NO_SIC, None,
                     len(trace.lambdas))


def solve_case2(params: SystemParams, ch: ChannelSet, mode: str = "ee",
                eps: float = DINKELBACH_EPS,
                sigma_star: HermitianPSD | None = None,
                iterations: int = 0) -> UnderlaySolution:
    """FULL_SIC regime: the benchmark covariance is itself optimal."""
    if sigma_star is None:
        norm = _Normalized(params, ch, mode)
        mat, iterations = _solve_full_sic_benchmark(norm, eps)
        sigma_star = HermitianPSD.from_matrix(mat, clip_tol=1e-12 * params.p2)
    zero = np.zeros((params.n_t2, params.n_t2))
    return _assemble(params, ch, zero, as_matrix(sigma_star),
                     CaseTag.FULL_SIC, None, iterations)


def solve_case3(params: SystemParams, ch: ChannelSet, mode: str = "ee",
                eps: float = DINKELBACH_EPS,
                sigma_star: HermitianPSD | None = None,
                iterations: int = 0) -> UnderlaySolution:
    """RATE_SPLIT regime: optimize the covariance sum, then split it so
    the primary message is exactly decodable."""
    norm = _Normalized(params, ch, mode)
    x0 = None
    if sigma_star is not None:
        # the full-SIC benchmark satisfies every constraint of the sum
        # problem strictly (its decodability margin is what ruled case 2 out)
        x0 = {"k1": np.zeros((norm.dim, norm.dim), dtype=complex),
              "k2": norm.project(as_matrix(sigma_star)) / norm.scale_p}
    template, numerator = _rate_split_program(norm)
    point, _, trace = _maximize_ratio(norm, template, numerator,
                                      ("k1", "k2"), x0, eps)
    k1_hat = norm.to_watts(point["k1"])
    k2_hat = norm.to_watts(point["k2"])
    gamma = _split_fraction(params, ch, k2_hat)
    k21 = k1_hat + (1.0 - gamma) * k2_hat
    k22 = gamma * k2_hat
    sol = _assemble(params, ch, k21, k22, CaseTag.RATE_SPLIT, gamma,
                    iterations + len(trace.lambdas))
    total = sol.k21.entries + sol.k22.entries
    if np.linalg.norm(total - (k1_hat + k2_hat)) > 1e-9 * max(1.0, np.linalg.norm(total)):
        raise NumericalFailure("covariance sum not preserved by the split")
    return sol


def allocate_underlay(params: SystemParams, ch: ChannelSet, mode: str = "ee",
                      eps: float = DINKELBACH_EPS) -> UnderlaySolution:
    """Globally optimal underlay allocation.

    ``mode="rate"`` maximizes the secondary rate instead of its energy
    efficiency (objective denominator replaced by a constant); reported
    efficiencies always use the true hardware parameters.

    Raises :class:`R1StarExceedsDirectCapacity` when the underlay mode is
    inapplicable and :class:`R2StarInfeasible` when the secondary rate
    target cannot be met.
    """
    tag, _, sigma_star, _, iters = _select(params, ch, mode, eps)
    if tag is CaseTag.NO_SIC:
        return solve_case1(params, ch, mode, eps)
    if tag is CaseTag.FULL_SIC:
        return solve_case2(params, ch, mode, eps, sigma_star, iters)
    return solve_case3(params, ch, mode, eps, sigma_star, iters)
