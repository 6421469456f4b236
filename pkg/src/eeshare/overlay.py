"""Overlay (relay) mode: feasibility test and two ascent allocators.

The secondary transmitter forwards the primary signal with an
amplify-and-forward precoder ``A`` during its transmit phase and
superimposes its own message with covariance ``B``. The substitution
``X = A M A^H`` (with ``M`` the covariance of the signal received while
listening) turns the problem into one over two PSD matrices, with the
primary rate guarantee an affine constraint once the inner rotation of
``A`` is chosen optimally (a Cauchy-Schwarz alignment argument).

The secondary rate is a difference of log-dets, so each allocator
maximizes a sequence of concave-fractional lower bounds obtained by
linearizing the subtracted term around the current iterate (value,
gradient and bound conditions hold, so the true objective ascends to a
first-order optimal point):

* :func:`solve_overlay_full` keeps the full matrix variable ``X``;
* :func:`solve_overlay_rank1` fixes the relay direction pair to the
  rate-maximizing one and optimizes only its gain, trading a little
  optimality for fewer variables.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import (DegenerateChannel, InitInfeasible, NumericalFailure,
                     Rank1Infeasible)
from .fractional import surrogate_loop
from .logdet_solver import (ConcaveExpr, LinearExpr, LogDetProgram,
                            LogDetTerm, fractional_problem, linear_value)
from .model import (ChannelSet, FractionalTrace, HermitianPSD,
                    OverlaySolution, SystemParams, as_matrix, hermitize)
from .rates import (LN2, ee_overlay, log2det, overlay_rates,
                    primary_pointtopoint_rate, relay_input_covariance)

OUTER_EPS = 1e-3       # relative objective change per ascent iteration
OUTER_MAX_ITER = 50
INNER_EPS = 1e-6


@dataclass(frozen=True)
class OverlayConstants:
    """Channel-derived constants of the relay problem.

    ``c_star`` is the extra SNR the relay path must contribute for the
    primary target to be met; ``psi`` the relay listening gain (received
    primary power over noise, plus one); ``phi`` the self-interference
    gain of the forwarded signal at the secondary receiver.
    """

    m_mat: HermitianPSD
    c_star: float
    psi: float
    phi: float


def overlay_constants(params: SystemParams, ch: ChannelSet) -> OverlayConstants:
    ch.check_against(params)
    sigma2 = params.noise_power
    h11_sq = float(np.vdot(ch.h11, ch.h11).real)
    t = ch.ht_mat @ ch.h11
    t_sq = float(np.vdot(t, t).real)
    h21_sq = float(np.vdot(ch.h21, ch.h21).real)
    c_star = 2.0 ** (2.0 * params.r1_star / params.bandwidth) - 1.0 \
        - params.p1 * h11_sq / sigma2
    psi = params.p1 * t_sq / (sigma2 * h11_sq) + 1.0
    phi = 0.0
    if h21_sq > 0.0:
        phi = psi * float(np.vdot(ch.h22_mat @ ch.h21, ch.h22_mat @ ch.h21).real) / h21_sq
    m = relay_input_covariance(params, ch)
    return OverlayConstants(m_mat=HermitianPSD(m), c_star=c_star, psi=psi,
                            phi=phi)


def max_primary_rate(params: SystemParams, ch: ChannelSet,
                     ) -> tuple[float, np.ndarray, float]:
    """Largest primary rate any admissible relay precoder can deliver.

    The maximizer is the rank-one precoder that receives along the
    strongest listening direction and retransmits along the cross channel
    to the primary receiver, with the gain spending the whole power budget
    on relaying.

    Returns ``(r_bar, a_star, a_scale)``: the rate in bit/s, the precoder
    matrix, and its squared gain.
    """
    ch.check_against(params)
    if ch.ht_mat is None:
        raise DegenerateChannel("listening channel missing")
    sigma2 = params.noise_power
    h11_sq = float(np.vdot(ch.h11, ch.h11).real)
    t = ch.ht_mat @ ch.h11
    t_sq = float(np.vdot(t, t).real)
    h21_sq = float(np.vdot(ch.h21, ch.h21).real)
    if t_sq <= 0.0:
        raise DegenerateChannel("relay receives no primary signal")
    if h21_sq <= 0.0:
        raise DegenerateChannel("relay has no channel to the primary receiver")
    a_scale = params.p2 * h11_sq / (params.alpha * (params.p1 * t_sq + sigma2 * h11_sq))
    u = ch.h21 / math.sqrt(h21_sq)
    v = t / math.sqrt(t_sq)
    a_star = math.sqrt(a_scale) * np.outer(u, v.conj())
    zero = np.zeros((params.n_t2, params.n_t2))
    r_bar, _ = overlay_rates(params, ch, a_star, zero)
    return r_bar, a_star, a_scale


class FeasibilityStatus(enum.Enum):
    FEASIBLE = "feasible"
    INFEASIBLE_R1STAR = "infeasible_r1star"
    UNDERLAY_REGIME = "underlay_regime"


@dataclass(frozen=True)
class FeasibilityResult:
    status: FeasibilityStatus
    r_bar: float | None = None


def check_feasibility(params: SystemParams, ch: ChannelSet) -> FeasibilityResult:
    """Classify the primary rate target for the relay mode.

    Targets at or below the interference-free direct-link capacity do not
    need relaying (``UNDERLAY_REGIME``); targets above what even the
    best-possible precoder delivers are ``INFEASIBLE_R1STAR``.
    """
    if params.r1_star <= primary_pointtopoint_rate(params, ch):
        return FeasibilityResult(FeasibilityStatus.UNDERLAY_REGIME)
    try:
        r_bar, _, _ = max_primary_rate(params, ch)
    except DegenerateChannel:
        # no relay gain available at all: the target was already above the
        # direct-link capacity, so it cannot be met
        return FeasibilityResult(FeasibilityStatus.INFEASIBLE_R1STAR)
    if params.r1_star > r_bar:
        return FeasibilityResult(FeasibilityStatus.INFEASIBLE_R1STAR, r_bar)
    return FeasibilityResult(FeasibilityStatus.FEASIBLE, r_bar)


def optimal_v_constraint(params: SystemParams, ch: ChannelSet,
                         consts: OverlayConstants) -> LinearExpr:
    """Primary rate guarantee as an affine constraint on slots
    ``x``/``b`` (Watt-scale), valid for the best inner rotation of the
    relay precoder.

    Returns an expression constrained to be <= 0:
    ``sigma^2 + h21^H (B + X) h21 - coef * h21^H X h21 <= 0``.
    """
    sigma2 = params.noise_power
    h11_sq = float(np.vdot(ch.h11, ch.h11).real)
    t = ch.ht_mat @ ch.h11
    t_sq = float(np.vdot(t, t).real)
    c_star = consts.c_star
    if c_star <= 0.0:
        raise ValueError("constraint defined only for targets above the "
                         "direct-link two-phase rate (c_star > 0)")
    coef = (c_star + 1.0) * params.p1 * t_sq / (
        c_star * (sigma2 * h11_sq + params.p1 * t_sq))
    quad = np.outer(ch.h21, ch.h21.conj())
    return LinearExpr(const=sigma2,
                      mats={"x": (1.0 - coef) * quad, "b": quad})


def taylor_lower_bound(x0, params: SystemParams, ch: ChannelSet):
    """Concave lower bound of the secondary rate as a function of
    ``(X, B)``, expanded at ``x0``.

    The subtracted log-det is replaced by its tangent plane at ``x0``,
    which upper-bounds it (concavity), so the returned function
    lower-bounds the true rate, matches it in value and gradient at
    ``x0``, and is concave. Units: bit/s including the two-phase 1/2
    pre-log, matching :func:`eeshare.rates.overlay_rates`.
    """
    x0 = as_matrix(x0)
    sigma2 = params.noise_power
    h = ch.h22_mat
    eye = np.eye(params.n_r)
    s0 = hermitize(sigma2 * eye + h @ x0 @ h.conj().T)
    g0 = log2det(s0)
    m0 = hermitize(h.conj().T @ np.linalg.solve(s0, h))
    half_b = 0.5 * params.bandwidth

    def bound(x, b_cov) -> float:
        x = as_matrix(x)
        b = as_matrix(b_cov)
        total = log2det(sigma2 * eye + h @ (x + b) @ h.conj().T)
        slope = float(np.einsum("ij,ji->", m0, x - x0).real) / LN2
        return half_b * (total - g0 - slope)

    return bound


def rank1_rate_lower_bound(a0: float, params: SystemParams, ch: ChannelSet):
    """Concave lower bound of the secondary rate on the rank-one relay
    family ``(a, B)``, expanded at gain ``a0`` (bit/s, 1/2 pre-log)."""
    consts = overlay_constants(params, ch)
    sigma2 = params.noise_power
    h = ch.h22_mat
    h21_sq = float(np.vdot(ch.h21, ch.h21).real)
    if h21_sq <= 0.0:
        raise DegenerateChannel("rank-one family undefined for a null cross channel")
    u = ch.h21 / math.sqrt(h21_sq)
    phi = consts.phi
    eye = np.eye(params.n_r)
    half_b = 0.5 * params.bandwidth
    base0 = math.log1p(a0 * phi) / LN2

    def bound(a: float, b_cov) -> float:
        b = as_matrix(b_cov)
        x = a * sigma2 * consts.psi * np.outer(u, u.conj())
        total = log2det(sigma2 * eye + h @ (x + b) @ h.conj().T) \
            - params.n_r * math.log(sigma2) / LN2
        slope = phi * (a - a0) / ((1.0 + a0 * phi) * LN2)
        return half_b * (total - base0 - slope)

    return bound


# ---------------------------------------------------------------------------
# Normalized problem data and ascent loops
# ---------------------------------------------------------------------------

class _OverlayNorm:
    def __init__(self, params: SystemParams, ch: ChannelSet, mode: str):
        if params.alpha <= 0.0:
            raise ValueError("allocation requires alpha > 0 (power budget)")
        if mode not in ("ee", "rate"):
            raise ValueError(f"unknown mode {mode!r}")
        if ch.ht_mat is None:
            raise DegenerateChannel("listening channel missing")
        self.params = params
        self.ch = ch
        self.consts = overlay_constants(params, ch)
        sigma2 = params.noise_power
        self.scale_p = params.p2 / params.alpha
        sc = math.sqrt(self.scale_p / sigma2)
        self.h = ch.h22_mat * sc
        self.hv = ch.h21 * sc
        self.hv_sq = float(np.vdot(self.hv, self.hv).real)
        if self.hv_sq <= 0.0:
            raise DegenerateChannel("relay has no channel to the primary receiver")
        self.u_dir = (ch.h21 / np.linalg.norm(ch.h21)).astype(complex)
        self.n = params.n_t2
        self.r2s2 = 2.0 * params.r2_star / params.bandwidth  # bits, no 1/2
        if mode == "rate":
            self.obj_alpha, self.obj_pc = 0.0, 1.0
        else:
            self.obj_alpha, self.obj_pc = params.alpha, params.p_c
        c_star = self.consts.c_star
        psi = self.consts.psi
        # primary guarantee, normalized by sigma^2:
        #   coef * hv^H X hv >= 1 + hv^H (B + X) hv
        self.coef = (c_star + 1.0) * (psi - 1.0) / (c_star * psi) if c_star > 0 else math.inf
        quad = np.outer(self.hv, self.hv.conj())
        self.guarantee = LinearExpr(const=1.0,
                                    mats={"x": (1.0 - self.coef) * quad,
                                          "b": quad})
        self.power = LinearExpr(const=-1.0,
                                mats={"x": np.eye(self.n, dtype=complex),
                                      "b": np.eye(self.n, dtype=complex)})
        self.den = LinearExpr(const=self.obj_pc,
                              mats={"x": self.obj_alpha * self.scale_p * np.eye(self.n, dtype=complex),
                                    "b": self.obj_alpha * self.scale_p * np.eye(self.n, dtype=complex)})
        # rank-one family: scalar slot a_rel = tr(X)/scale_p
        self.phi_rel = float(np.vdot(self.h @ self.u_dir, self.h @ self.u_dir).real)
        self.rank1_amin = None
        self.rank1_gain_floor = None
        if c_star > 0.0 and psi - 1.0 - c_star > 0.0:
            self.rank1_amin = c_star * psi / (self.hv_sq * (psi - 1.0 - c_star))
            self.rank1_gain_floor = LinearExpr(
                const=self.rank1_amin,
                mats={"b": self.rank1_amin * np.outer(self.hv, self.hv.conj())},
                scalars={"a": -1.0})
        self.rank1_power = LinearExpr(const=-1.0,
                                      mats={"b": np.eye(self.n, dtype=complex)},
                                      scalars={"a": 1.0})

    def objective_full(self, point: dict) -> float:
        x, b = point["x"], point["b"]
        eye = np.eye(self.h.shape[0])
        num = log2det(eye + self.h @ (x + b) @ self.h.conj().T) \
            - log2det(eye + self.h @ x @ self.h.conj().T)
        return num / linear_value(self.den, point)

    def objective_rank1(self, point: dict) -> float:
        a, b = point["a"], point["b"]
        eye = np.eye(self.h.shape[0])
        x = a * np.outer(self.u_dir, self.u_dir.conj())
        num = log2det(eye + self.h @ (x + b) @ self.h.conj().T) \
            - math.log1p(a * self.phi_rel) / LN2
        den = self.obj_alpha * self.scale_p * (a + float(np.trace(b).real)) + self.obj_pc
        return num / den

    def full_surrogate(self, point: dict):
        """Parametric ratio problem for the full-matrix family, expanded
        at the given iterate."""
        x0 = point["x"]
        eye = np.eye(self.h.shape[0])
        s0 = hermitize(eye + self.h @ x0 @ self.h.conj().T)
        g0 = log2det(s0)
        m0 = hermitize(self.h.conj().T @ np.linalg.solve(s0, self.h))
        const = -g0 + float(np.einsum("ij,ji->", m0, x0).real) / LN2
        numerator = ConcaveExpr(
            terms=(LogDetTerm(base=eye, mats={"x": self.h, "b": self.h}),),
            linear=LinearExpr(const=const, mats={"x": -m0 / LN2}))
        cge = ((numerator, self.r2s2),) if self.r2s2 > 0.0 else ()
        template = LogDetProgram(matrix_dims={"x": self.n, "b": self.n},
                                 objective=numerator,
                                 ineq_le=(self.guarantee, self.power),
                                 concave_ge=cge)
        return fractional_problem(template, numerator, self.den, x0=dict(point),
                                  inner_tol=1e-8)

    def rank1_surrogate(self, point: dict):
        a0 = point["a"]
        eye = np.eye(self.h.shape[0])
        hu = self.h @ self.u_dir
        const = -math.log1p(a0 * self.phi_rel) / LN2 \
            + self.phi_rel * a0 / ((1.0 + a0 * self.phi_rel) * LN2)
        slope = -self.phi_rel / ((1.0 + a0 * self.phi_rel) * LN2)
        numerator = ConcaveExpr(
            terms=(LogDetTerm(base=eye, mats={"b": self.h},
                              scalars={"a": np.outer(hu, hu.conj())}),),
            linear=LinearExpr(const=const, scalars={"a": slope}))
        den = LinearExpr(const=self.obj_pc,
                         mats={"b": self.obj_alpha * self.scale_p * np.eye(self.n, dtype=complex)},
                         scalars={"a": self.obj_alpha * self.scale_p})
        cge = ((numerator, self.r2s2),) if self.r2s2 > 0.0 else ()
        template = LogDetProgram(matrix_dims={"b": self.n},
                                 scalar_names=("a",),
                                 objective=numerator,
                                 ineq_le=(self.rank1_gain_floor, self.rank1_power),
                                 concave_ge=cge)
        return fractional_problem(template, numerator, den, x0=dict(point),
                                  inner_tol=1e-8)

    def extrapolator(self, rank1: bool):
        """Over-relaxation hook for the ascent loop: stretch the last step
        by theta, project matrix slots back to PSD, and accept only when
        every constraint keeps a strict margin (scaled per constraint, so
        the stretched point survives as a barrier warm start)."""
        if rank1:
            constraints = (self.rank1_gain_floor, self.rank1_power)
        else:
            constraints = (self.guarantee, self.power)
        scales = []
        for expr in constraints:
            scale = max([abs(expr.const)]
                        + [float(np.linalg.norm(a)) for a in expr.mats.values()]
                        + [abs(c) for c in expr.scalars.values()])
            scales.append(1e-7 * scale)

        def extrap(x_prev: dict, x_new: dict, theta: float):
            pt = {}
            for key, val in x_new.items():
                if isinstance(val, np.ndarray):
                    m = hermitize(x_prev[key] + theta * (val - x_prev[key]))
                    w, v = np.linalg.eigh(m)
                    if w[0] < -1e-9 * max(1.0, float(w[-1])):
                        return None
                    pt[key] = (v * np.clip(w, 0.0, None)) @ v.conj().T
                else:
                    s = x_prev[key] + theta * (val - x_prev[key])
                    if s < 1e-9:
                        return None
                    pt[key] = s
            for expr, margin in zip(constraints, scales):
                if linear_value(expr, pt) > -margin:
                    return None
            if self.r2s2 > 0.0:
                if rank1:
                    rate = _rank1_rate_bits(self, pt)
                else:
                    rate = _true_rate_bits(self, pt["x"], pt["b"])
                if rate <= self.r2s2 * (1.0 + 1e-9):
                    return None
            return pt

        return extrap


def _initial_split(norm: _OverlayNorm):
    """Strictly feasible starting point: relay along the best rank-one
    direction with share rho of the budget, the rest spread over the own
    message inside the orthogonal complement of the cross channel (zero
    leakage toward the primary receiver, which is where the optimum sits
    whenever the primary guarantee is active; an isotropic start instead
    makes the ascent crawl along the guarantee boundary while slowly
    rotating the leakage away). The guarantee margin is increasing in rho,
    so the minimal-relay share is found by bisection and padded.

    Returns (rho, x0, b0) in normalized units, or None when only the
    boundary point (everything relaying) is feasible.
    """
    if norm.coef <= 1.0 or not math.isfinite(norm.coef):
        return None
    outer_u = np.outer(norm.u_dir, norm.u_dir.conj())
    if norm.n > 1:
        proj = np.eye(norm.n, dtype=complex) - outer_u
        b_shape = proj / (norm.n - 1)
    else:
        b_shape = np.eye(1, dtype=complex)

    def point(rho: float, safety: float) -> dict:
        x = safety * rho * outer_u
        b = safety * (1.0 - rho) * b_shape
        return {"x": x, "b": b}

    for safety in (0.999, 0.999999):
        def margin(rho: float) -> float:
            return -linear_value(norm.guarantee, point(rho, safety))

        if margin(1.0) <= 0.0:
            continue
        lo, hi = 0.0, 1.0
        if margin(0.0) <= 0.0:
            for _ in range(60):
                mid = 0.5 * (lo + hi)
                if margin(mid) > 0.0:
                    hi = mid
                else:
                    lo = mid
        rho = hi + 0.25 * (1.0 - hi)
        candidates = [rho, hi + 0.75 * (1.0 - hi), hi + 0.05 * (1.0 - hi)]
        for rho in candidates:
            pt = point(rho, safety)
            if margin(rho) <= 0.0:
                continue
            if norm.r2s2 > 0.0:
                rate = _true_rate_bits(norm, pt["x"], pt["b"])
                if rate <= norm.r2s2:
                    continue
            return rho, pt["x"], pt["b"]
    return None


def _true_rate_bits(norm: _OverlayNorm, x: np.ndarray, b: np.ndarray) -> float:
    eye = np.eye(norm.h.shape[0])
    return log2det(eye + norm.h @ (x + b) @ norm.h.conj().T) \
        - log2det(eye + norm.h @ x @ norm.h.conj().T)


def _orthonormal_with_first(v: np.ndarray) -> np.ndarray:
    """Unitary matrix whose first column is the given unit vector."""
    n = v.size
    basis = [v]
    for i in range(n):
        e = np.zeros(n, dtype=complex)
        e[i] = 1.0
        for b in basis:
            e = e - b * np.vdot(b, e)
        nrm = np.linalg.norm(e)
        if nrm > 1e-7:
            basis.append(e / nrm)
        if len(basis) == n:
            break
    return np.stack(basis, axis=1)


def relay_from_x(params: SystemParams, ch: ChannelSet, x_watts) -> np.ndarray:
    """Recover a relay precoder ``A`` with ``A M A^H = X`` whose inner
    rotation aligns the forwarded primary signal with the cross channel
    to the primary receiver (the alignment that makes the affine
    guarantee equivalent to the true primary rate constraint)."""
    x = hermitize(as_matrix(x_watts))
    m = relay_input_covariance(params, ch)
    w_m, v_m = np.linalg.eigh(m)
    m_inv_sqrt = (v_m / np.sqrt(w_m)) @ v_m.conj().T
    w_x, u_x = np.linalg.eigh(x)
    w_x = np.clip(w_x, 0.0, None)
    lam_sqrt = np.sqrt(w_x)
    w_vec = lam_sqrt * (u_x.conj().T @ ch.h21)
    t = ch.ht_mat @ ch.h11
    t_norm = float(np.linalg.norm(t))
    w_norm = float(np.linalg.norm(w_vec))
    if t_norm <= 0.0 or w_norm <= 1e-300:
        rotation = np.eye(params.n_t2, dtype=complex)
    else:
        basis_w = _orthonormal_with_first(w_vec / w_norm)
        basis_t = _orthonormal_with_first(t / t_norm)
        rotation = basis_t @ basis_w.conj().T     # maps w-hat to t-hat
    return (u_x * lam_sqrt) @ rotation.conj().T @ m_inv_sqrt


def _surrogate_debug_check(norm: _OverlayNorm, rng: np.random.Generator,
                           rank1: bool):
    """Bound / tangency verification run before each inner solve when
    debug mode is on: the surrogate numerator must not exceed the true
    rate anywhere, and must match its directional derivatives at the
    expansion point (central finite differences)."""

    def true_at(p: dict) -> float:
        if rank1:
            return _rank1_rate_bits(norm, p)
        return _true_rate_bits(norm, p["x"], p["b"])

    def check(problem, point):
        for _ in range(5):
            probe = _random_psd_probe(point, rng)
            s_val = problem.numerator(probe)
            t_val = true_at(probe)
            if s_val > t_val + 1e-9 * (1.0 + abs(t_val)):
                raise NumericalFailure("surrogate exceeds the true rate")
        for _ in range(3):
            d = _random_direction(point, rng)
            step = 1e-6 * (1.0 + _point_norm(point))
            fwd = _point_add(point, d, step)
            bwd = _point_add(point, d, -step)
            fd_true = (true_at(fwd) - true_at(bwd)) / 2.0
            fd_surr = (problem.numerator(fwd) - problem.numerator(bwd)) / 2.0
            if abs(fd_true - fd_surr) > 1e-5 * (1.0 + abs(fd_true)):
                raise NumericalFailure("surrogate gradient mismatch")

    return check


def _rank1_rate_bits(norm: _OverlayNorm, point: dict) -> float:
    a, b = point["a"], point["b"]
    x = a * np.outer(norm.u_dir, norm.u_dir.conj())
    eye = np.eye(norm.h.shape[0])
    return log2det(eye + norm.h @ (x + b) @ norm.h.conj().T) \
        - math.log1p(a * norm.phi_rel) / LN2


def _random_psd_probe(point: dict, rng) -> dict:
    out = {}
    for key, val in point.items():
        if isinstance(val, np.ndarray):
            n = val.shape[0]
            g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
            out[key] = hermitize(g @ g.conj().T) * 0.3 / n
        else:
            out[key] = float(rng.uniform(0.5, 2.0)) * max(val, 1e-3)
    return out


def _random_direction(point: dict, rng) -> dict:
    out = {}
    for key, val in point.items():
        if isinstance(val, np.ndarray):
            g = rng.standard_normal(val.shape) + 1j * rng.standard_normal(val.shape)
            out[key] = hermitize(g)
        else:
            out[key] = float(rng.standard_normal())
    return out


def _point_norm(point: dict) -> float:
    tot = 0.0
    for val in point.values():
        tot += float(np.linalg.norm(val)) ** 2 if isinstance(val, np.ndarray) \
            else float(val) ** 2
    return math.sqrt(tot)


def _point_add(point: dict, d: dict, step: float) -> dict:
    return {k: point[k] + step * d[k] for k in point}


def _boundary_solution(params: SystemParams, ch: ChannelSet,
                       norm: _OverlayNorm) -> OverlaySolution:
    """All power spent on relaying (target at the feasibility edge): the
    own-message rate is zero."""
    _, a_star, a_scale = max_primary_rate(params, ch)
    x = hermitize(a_star @ norm.consts.m_mat.entries @ a_star.conj().T)
    zero = np.zeros((params.n_t2, params.n_t2))
    r1, r2 = overlay_rates(params, ch, a_star, zero)
    trace = FractionalTrace((), (), (0.0,))
    return OverlaySolution(
        relay_x=HermitianPSD.from_matrix(x, clip_tol=1e-9 * max(params.p2, 1.0)),
        relay_scale_a=a_scale, b_cov=HermitianPSD.zeros(params.n_t2),
        ee=ee_overlay(params, ch, a_star, zero), r1=r1, r2=r2,
        iterations=0, trace=trace)


def _assemble(params: SystemParams, ch: ChannelSet, norm: _OverlayNorm,
              x_watts: np.ndarray, b_watts: np.ndarray,
              a_scale: float | None, trace: FractionalTrace,
              relay_a: np.ndarray) -> OverlaySolution:
    clip = 1e-9 * max(params.p2, 1.0)
    x_psd = HermitianPSD.from_matrix(x_watts, clip_tol=clip)
    b_psd = HermitianPSD.from_matrix(b_watts, clip_tol=clip)
    r1, r2 = overlay_rates(params, ch, relay_a, b_psd)
    b = params.bandwidth
    tol_rate = 1e-6 * (1.0 + params.r1_star / b) * b
    consumed = params.alpha * (x_psd.trace + b_psd.trace)
    if consumed > params.p2 + 1e-9:
        raise NumericalFailure(f"power budget violated: {consumed!r}")
    if r1 < params.r1_star - tol_rate:
        raise NumericalFailure(
            f"primary rate target violated: {r1!r} < {params.r1_star!r}")
    sol = OverlaySolution(
        relay_x=x_psd, relay_scale_a=a_scale, b_cov=b_psd,
        ee=r2 / (params.alpha * (x_psd.trace + b_psd.trace) + params.p_c),
        r1=r1, r2=r2, iterations=len(trace.objectives) - 1, trace=trace)
    return sol


def solve_overlay_full(params: SystemParams, ch: ChannelSet,
                       init: dict | None = None, mode: str = "ee",
                       eps: float = OUTER_EPS, debug: bool = False,
                       ) -> OverlaySolution:
    """Ascent over concave-fractional lower bounds with a full matrix
    relay variable; converges to a first-order optimal point of the
    energy-efficiency (or rate) maximization.

    ``init`` may provide normalized starting slots {"x", "b"}; by default
    a feasible split between relaying and own transmission is
    constructed. Raises :class:`InitInfeasible` when no strictly feasible
    starting pair exists.
    """
    res = check_feasibility(params, ch)
    if res.status is not FeasibilityStatus.FEASIBLE:
        raise InitInfeasible(f"feasibility check returned {res.status.value}")
    norm = _OverlayNorm(params, ch, mode)
    if init is None:
        split = _initial_split(norm)
        if split is None:
            if norm.r2s2 > 0.0:
                raise InitInfeasible("no feasible starting pair under the "
                                     "secondary rate target")
            return _boundary_solution(params, ch, norm)
        _, x0, b0 = split
        init = {"x": x0, "b": b0}
    debug_check = None
    if debug:
        debug_check = _surrogate_debug_check(norm, np.random.default_rng(0),
                                             rank1=False)
    point, trace = surrogate_loop(init, norm.full_surrogate,
                                  norm.objective_full, eps=eps,
                                  max_iter=OUTER_MAX_ITER,
                                  inner_eps=INNER_EPS,
                                  debug_check=debug_check,
                                  extrapolate=norm.extrapolator(rank1=False))
    x_watts = norm.scale_p * point["x"]
    b_watts = norm.scale_p * point["b"]
    relay_a = relay_from_x(params, ch, x_watts)
    scaled = _rescale_trace(trace, 0.5 * params.bandwidth)
    return _assemble(params, ch, norm, x_watts, b_watts, None, scaled, relay_a)


def solve_overlay_rank1(params: SystemParams, ch: ChannelSet,
                        init: dict | None = None, mode: str = "ee",
                        eps: float = OUTER_EPS, debug: bool = False,
                        ) -> OverlaySolution:
    """Ascent restricted to the rank-one relay family (gain plus own
    covariance); cheaper per iteration than the full-matrix loop.

    Raises :class:`Rank1Infeasible` when the family's minimum-gain
    requirement is unbounded for this instance.
    """
    res = check_feasibility(params, ch)
    if res.status is not FeasibilityStatus.FEASIBLE:
        raise InitInfeasible(f"feasibility check returned {res.status.value}")
    norm = _OverlayNorm(params, ch, mode)
    if norm.rank1_amin is None:
        raise Rank1Infeasible("required relay gain is unbounded "
                              "(listening gain too small for the target)")
    if init is None:
        split = _initial_split(norm)
        if split is None:
            if norm.r2s2 > 0.0:
                raise InitInfeasible("no feasible starting pair under the "
                                     "secondary rate target")
            return _boundary_solution(params, ch, norm)
        _, x0, b0 = split
        init = {"a": float(np.trace(x0).real), "b": b0}
    debug_check = None
    if debug:
        debug_check = _surrogate_debug_check(norm, np.random.default_rng(0),
                                             rank1=True)
    point, trace = surrogate_loop(init, norm.rank1_surrogate,
                                  norm.objective_rank1, eps=eps,
                                  max_iter=OUTER_MAX_ITER,
                                  inner_eps=INNER_EPS,
                                  debug_check=debug_check,
                                  extrapolate=norm.extrapolator(rank1=True))
    a_rel = point["a"]
    sigma2 = params.noise_power
    a_watts = a_rel * norm.scale_p / (sigma2 * norm.consts.psi)
    x_watts = a_rel * norm.scale_p * np.outer(norm.u_dir, norm.u_dir.conj())
    b_watts = norm.scale_p * point["b"]
    t = ch.ht_mat @ ch.h11
    v_dir = t / np.linalg.norm(t)
    relay_a = math.sqrt(a_watts) * np.outer(norm.u_dir, v_dir.conj())
    scaled = _rescale_trace(trace, 0.5 * params.bandwidth)
    return _assemble(params, ch, norm, x_watts, b_watts, a_watts, scaled,
                     relay_a)


def _rescale_trace(trace: FractionalTrace, factor: float) -> FractionalTrace:
    """Convert a normalized objective trace (bits over Watts) to reported
    units (bit/Joule)."""
    return FractionalTrace(trace.lambdas,
                           trace.f_values,
                           tuple(factor * o for o in trace.objectives))
