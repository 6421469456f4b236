"""Independent brute-force references used by tests and acceptance runs.

These oracles share the closed-form rate expressions with the rest of the
package but none of the solver machinery: the scalar underlay oracle is an
exhaustive grid search, the relay oracle sweeps a gain grid times a fixed
direction codebook, and the water-filling oracle is the classical
eigenmode solution. They bound or pin down the allocators' results.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import ChannelSet, SystemParams, hermitize
from .rates import overlay_rates

LN2 = math.log(2.0)


@dataclass(frozen=True)
class ScalarGridResult:
    p21: float
    p22: float
    ee: float          # value of the selected objective (bit/Joule or bit/s)
    feasible: bool


def grid_underlay_scalar(params: SystemParams, ch: ChannelSet,
                         grid_n: int = 400, mode: str = "ee") -> ScalarGridResult:
    """Exhaustive search over the two scalar transmit powers.

    Requires a single-antenna instance. The search grid covers
    ``[0, p2/alpha]^2``; at each point the decodability logic is applied
    pointwise: a nonzero after-cancellation power is admissible only when
    the primary message is decodable under it, and the zero row represents
    decoding everything under interference.
    """
    if (params.n_t1, params.n_t2, params.n_r) != (1, 1, 1):
        raise ValueError("scalar oracle requires 1x1x1 antennas")
    ch.check_against(params)
    sigma2 = params.noise_power
    b = params.bandwidth
    g11 = params.p1 * abs(ch.h11[0]) ** 2           # received primary power
    g22 = abs(ch.h22_mat[0, 0]) ** 2
    g21 = abs(ch.h21[0]) ** 2
    q1 = params.p1 * abs(ch.h12_mat[0, 0]) ** 2     # primary power at sec. rx

    r1s = params.r1_star / b
    cap = math.log1p(g11 / sigma2) / LN2
    if r1s > cap * (1 + 1e-12):
        raise ValueError("primary target above direct capacity")
    p_int = math.inf if r1s == 0.0 else max(g11 / (2.0 ** r1s - 1.0) - sigma2, 0.0)

    # grid only the feasible interval of each axis so the resolution is
    # spent where points can actually be selected: the interference budget
    # caps both powers, and the decodability constraint caps the
    # after-cancellation power at the point where the primary message
    # stops being decodable
    p_max = params.p2 / params.alpha
    cap21 = p_max
    cap22 = p_max
    if math.isfinite(p_int) and g21 > 0.0:
        cap21 = min(cap21, p_int / g21)
        cap22 = min(cap22, p_int / g21)
    if r1s > 0.0 and g22 > 0.0:
        decodable = (q1 / (2.0 ** r1s - 1.0) - sigma2) / g22
        cap22 = min(cap22, max(decodable, 0.0))
    p21, p22 = np.meshgrid(np.linspace(0.0, cap21, grid_n),
                           np.linspace(0.0, cap22, grid_n), indexing="ij")

    feasible = params.alpha * (p21 + p22) <= params.p2 * (1 + 1e-12)
    if math.isfinite(p_int):
        feasible &= g21 * (p21 + p22) <= p_int * (1 + 1e-12) + 1e-300
    # decodability of the primary message with p22 still interfering
    r12 = np.log1p(q1 / (sigma2 + g22 * p22)) / LN2
    feasible &= (p22 == 0.0) | (r12 >= r1s * (1 - 1e-12))

    # rate-splitting rate: interference-free part plus under-interference part
    r2 = (np.log1p(g22 * p22 / sigma2) / LN2
          + (np.log(sigma2 + g22 * (p21 + p22) + q1)
             - np.log(sigma2 + g22 * p22 + q1)) / LN2)
    feasible &= b * r2 >= params.r2_star * (1 - 1e-12)

    if mode == "rate":
        objective = b * r2
    else:
        objective = b * r2 / (params.alpha * (p21 + p22) + params.p_c)
    objective = np.where(feasible, objective, -np.inf)
    flat = int(np.argmax(objective))
    i, j = np.unravel_index(flat, objective.shape)
    if not feasible[i, j]:
        return ScalarGridResult(0.0, 0.0, 0.0, False)
    return ScalarGridResult(float(p21[i, j]), float(p22[i, j]),
                            float(objective[i, j]), True)


@dataclass(frozen=True)
class RelayGridResult:
    a: float
    b_dir_index: int
    b_power: float
    ee: float
    feasible: bool
    b_dir: np.ndarray | None = None


def _direction_codebook(n: int, count: int = 64) -> np.ndarray:
    """Fixed unit-vector codebook. For n=2: an amplitude/phase product
    grid; for n=1 the single direction."""
    if n == 1:
        return np.ones((1, 1), dtype=complex)
    if n != 2:
        raise ValueError("relay oracle supports up to two transmit antennas")
    side = int(round(math.sqrt(count)))
    thetas = np.linspace(0.0, math.pi / 2.0, side)
    phis = np.linspace(0.0, 2.0 * math.pi, side, endpoint=False)
    dirs = []
    for th in thetas:
        for ph in phis:
            dirs.append([math.cos(th), math.sin(th) * np.exp(1j * ph)])
    return np.asarray(dirs, dtype=complex)


def grid_overlay_rank1(params: SystemParams, ch: ChannelSet,
                       grid_n: int = 100, n_dirs: int = 64,
                       mode: str = "ee",
                       extra_dirs: np.ndarray | None = None) -> RelayGridResult:
    """Grid search over the rank-one relay family.

    The relay precoder is fixed to the rate-maximizing direction pair and
    its gain ``a`` swept on a grid; the own-message covariance is swept
    over rank-one matrices built from a fixed direction codebook times a
    power grid. Feasibility (primary rate target, power) is checked with
    the exact rate expressions. ``extra_dirs`` (rows of unit vectors) are
    appended to the codebook, e.g. to certify another solver's solution
    direction.
    """
    ch.check_against(params)
    if params.n_t2 > 2:
        raise ValueError("relay oracle supports up to two transmit antennas")
    sigma2 = params.noise_power
    b = params.bandwidth
    h11_sq = float(np.vdot(ch.h11, ch.h11).real)
    t = ch.ht_mat @ ch.h11
    t_sq = float(np.vdot(t, t).real)
    h21_sq = float(np.vdot(ch.h21, ch.h21).real)
    if t_sq == 0.0 or h21_sq == 0.0:
        return RelayGridResult(0.0, -1, 0.0, 0.0, False)
    u_a = ch.h21 / math.sqrt(h21_sq)
    psi = params.p1 * t_sq / (sigma2 * h11_sq) + 1.0
    relay_unit_power = sigma2 * psi          # tr(A M A^H) per unit gain a

    h = ch.h22_mat
    hu = h @ u_a
    snr_direct = params.p1 * h11_sq / sigma2
    r1s2 = 2.0 * params.r1_star / b          # threshold on log2(1 + snr1)

    a_max = params.p2 / (params.alpha * relay_unit_power)
    a_grid = np.linspace(0.0, a_max, grid_n)
    dirs = _direction_codebook(params.n_t2, n_dirs)
    if extra_dirs is not None:
        extra = np.atleast_2d(np.asarray(extra_dirs, dtype=complex))
        norms = np.linalg.norm(extra, axis=1, keepdims=True)
        dirs = np.vstack([dirs, extra / np.where(norms > 0, norms, 1.0)])
    hw = dirs @ h.T                            # row i: H @ dirs[i]

    best = RelayGridResult(0.0, -1, 0.0, -np.inf, False)
    eye = np.eye(params.n_r)
    for a in a_grid:
        x = a * relay_unit_power * np.outer(u_a, u_a.conj())
        z = hermitize(sigma2 * eye + h @ x @ h.conj().T)
        z_inv = np.linalg.inv(z)
        relay_num = params.p1 / h11_sq * a * h21_sq * t_sq
        budget = params.p2 / params.alpha - a * relay_unit_power
        if budget < 0.0:
            continue
        beta_grid = np.linspace(0.0, budget, grid_n)
        for di, w in enumerate(dirs):
            hwv = hw[di]
            gain_r2 = float(np.real(hwv.conj() @ z_inv @ hwv))
            leak = abs(np.vdot(ch.h21, w)) ** 2
            # vectorized over the own-message power
            r2_bits = np.log1p(beta_grid * gain_r2) / LN2
            den1 = sigma2 * (1.0 + a * h21_sq) + beta_grid * leak
            snr1 = snr_direct + relay_num / den1
            ok = np.log1p(snr1) / LN2 >= r1s2 * (1 - 1e-12)
            r2 = 0.5 * b * r2_bits
            ok &= r2 >= params.r2_star * (1 - 1e-12)
            if not np.any(ok):
                continue
            power = params.alpha * (a * relay_unit_power + beta_grid) + params.p_c
            val = r2 if mode == "rate" else r2 / power
            val = np.where(ok, val, -np.inf)
            k = int(np.argmax(val))
            if val[k] > best.ee:
                best = RelayGridResult(float(a), di, float(beta_grid[k]),
                                       float(val[k]), True, dirs[di].copy())
    if not best.feasible:
        return RelayGridResult(0.0, -1, 0.0, 0.0, False)
    return best


def relay_grid_point(params: SystemParams, ch: ChannelSet,
                     result: RelayGridResult):
    """Materialize the relay precoder and covariance of a grid result and
    re-evaluate the exact rates (consistency hook for tests)."""
    t = ch.ht_mat @ ch.h11
    u_a = ch.h21 / np.linalg.norm(ch.h21)
    v_a = t / np.linalg.norm(t)
    relay_a = math.sqrt(result.a) * np.outer(u_a, v_a.conj())
    w = result.b_dir if result.b_dir is not None \
        else np.zeros(params.n_t2, dtype=complex)
    b_cov = result.b_power * np.outer(w, w.conj())
    r1, r2 = overlay_rates(params, ch, relay_a, b_cov)
    return relay_a, b_cov, r1, r2


def waterfill(h_mat: np.ndarray, noise_cov: np.ndarray, budget: float,
              ) -> np.ndarray:
    """Capacity-achieving covariance for ``log2|I + N^{-1/2} H K H^H
    N^{-1/2}|`` under ``tr(K) <= budget``.

    Eigenmodes of the whitened channel receive water-filled powers; the
    water level is located by bisection.
    """
    if budget < 0.0:
        raise ValueError("budget must be nonnegative")
    h = np.asarray(h_mat, dtype=complex)
    n_t = h.shape[1]
    if budget == 0.0:
        return np.zeros((n_t, n_t), dtype=complex)
    chol = np.linalg.cholesky(hermitize(np.asarray(noise_cov, dtype=complex)))
    white = np.linalg.solve(chol, h)
    _, s, vh = np.linalg.svd(white, full_matrices=False)
    gains = s ** 2
    keep = gains > 1e-15 * max(gains.max(initial=0.0), 1.0)
    gains = gains[keep]
    v = vh.conj().T[:, keep]
    if gains.size == 0:
        return np.zeros((n_t, n_t), dtype=complex)
    lo, hi = 0.0, budget + float(np.max(1.0 / gains))
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        used = np.clip(mid - 1.0 / gains, 0.0, None).sum()
        if used > budget:
            hi = mid
        else:
            lo = mid
    powers = np.clip(lo - 1.0 / gains, 0.0, None)
    if powers.sum() > 0.0:
        powers *= budget / powers.sum()
    return hermitize((v * powers) @ v.conj().T)
