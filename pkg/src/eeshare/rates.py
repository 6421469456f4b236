"""Closed-form rate, power and energy-efficiency functionals.

All public functions are pure, take powers in Watts and return rates in
bit/s (``params.bandwidth`` times the spectral efficiency, halved for the
two-phase relay mode) or efficiencies in bit/Joule.

Log-determinants of ``I + PSD`` arguments are evaluated through a Cholesky
factorization of the Hermitian-symmetrized argument for numerical
robustness.
"""

from __future__ import annotations

import numpy as np

from .errors import DimensionMismatch
from .model import ChannelSet, SystemParams, as_matrix, hermitize

LN2 = float(np.log(2.0))


def logdet_hermitian(mat: np.ndarray) -> float:
    """Natural-log determinant of a Hermitian positive-definite matrix."""
    chol = np.linalg.cholesky(hermitize(mat))
    return 2.0 * float(np.sum(np.log(np.diag(chol).real)))


def log2det(mat: np.ndarray) -> float:
    return logdet_hermitian(mat) / LN2


def _cov(cov, dim: int, name: str) -> np.ndarray:
    mat = as_matrix(cov)
    if mat.shape != (dim, dim):
        raise DimensionMismatch(f"{name} must be {dim}x{dim}, got {mat.shape}")
    return mat


def primary_interference_covariance(params: SystemParams, ch: ChannelSet) -> np.ndarray:
    """Covariance of the beamformed primary signal at the secondary
    receiver: (p1/||h11||^2) * (H12 h11)(H12 h11)^H."""
    ch.check_against(params)
    v = ch.h12_mat @ ch.h11
    scale = params.p1 / float(np.vdot(ch.h11, ch.h11).real)
    return scale * np.outer(v, v.conj())


def primary_rate_underlay(params: SystemParams, ch: ChannelSet, k21, k22) -> float:
    """Primary achievable rate with the secondary transmission treated as
    noise at the single-antenna primary receiver."""
    ch.check_against(params)
    k1 = _cov(k21, params.n_t2, "k21")
    k2 = _cov(k22, params.n_t2, "k22")
    leak = float(np.real(ch.h21.conj() @ (k1 + k2) @ ch.h21))
    snr = params.p1 * float(np.vdot(ch.h11, ch.h11).real) / (params.noise_power + leak)
    return params.bandwidth * np.log1p(snr) / LN2


def primary_pointtopoint_rate(params: SystemParams, ch: ChannelSet) -> float:
    """Interference-free capacity of the beamformed primary link."""
    ch.check_against(params)
    snr = params.p1 * float(np.vdot(ch.h11, ch.h11).real) / params.noise_power
    return params.bandwidth * np.log1p(snr) / LN2


def r12_rate(params: SystemParams, ch: ChannelSet, k22) -> float:
    """Rate of the primary message at the secondary receiver, with only the
    after-cancellation part of the secondary signal (covariance ``k22``)
    still interfering.

    Equals ``B * log2|I + (sigma^2 I + H22 K22 H22^H)^{-1} Q1|``; evaluated
    through the rank-one identity ``log2(1 + q^H S^{-1} q)`` where
    ``Q1 = q q^H``.
    """
    ch.check_against(params)
    k2 = _cov(k22, params.n_t2, "k22")
    h11_norm = float(np.linalg.norm(ch.h11))
    q = np.sqrt(params.p1) / h11_norm * (ch.h12_mat @ ch.h11)
    s = params.noise_power * np.eye(params.n_r) + ch.h22_mat @ k2 @ ch.h22_mat.conj().T
    x = np.linalg.solve(hermitize(s), q)
    val = float(np.real(np.vdot(q, x)))
    return params.bandwidth * np.log1p(max(val, 0.0)) / LN2


def secondary_rate_underlay(params: SystemParams, ch: ChannelSet, k21, k22,
                            cross_check: bool = False) -> float:
    """Secondary achievable rate under rate splitting.

    The part with covariance ``k21`` is decoded under the primary
    interference, the part with covariance ``k22`` after the primary
    signal has been cancelled. Computed as the total log-det rate minus
    :func:`r12_rate`; with ``cross_check=True`` the equivalent two-summand
    form is evaluated as well and both are asserted to agree.
    """
    ch.check_against(params)
    k1 = _cov(k21, params.n_t2, "k21")
    k2 = _cov(k22, params.n_t2, "k22")
    sigma2 = params.noise_power
    h = ch.h22_mat
    q1 = primary_interference_covariance(params, ch)
    eye = np.eye(params.n_r)
    total = log2det(eye + (h @ (k1 + k2) @ h.conj().T + q1) / sigma2)
    rate = params.bandwidth * total - r12_rate(params, ch, k2)
    if cross_check:
        part_sic = log2det(eye + (h @ k2 @ h.conj().T) / sigma2)
        num = sigma2 * eye + h @ (k1 + k2) @ h.conj().T + q1
        den = sigma2 * eye + h @ k2 @ h.conj().T + q1
        part_int = log2det(num) - log2det(den)
        alt = params.bandwidth * (part_sic + part_int)
        if abs(alt - rate) > 1e-10 * max(1.0, abs(rate)):
            raise AssertionError(
                f"rate-splitting forms disagree: {rate!r} vs {alt!r}")
    return max(rate, 0.0)


def ee_underlay(params: SystemParams, ch: ChannelSet, k21, k22) -> float:
    """Secondary energy efficiency: rate over consumed power
    ``alpha * tr(K21 + K22) + p_c``."""
    k1 = _cov(k21, params.n_t2, "k21")
    k2 = _cov(k22, params.n_t2, "k22")
    rate = secondary_rate_underlay(params, ch, k1, k2)
    power = params.alpha * float(np.trace(k1 + k2).real) + params.p_c
    return rate / power


def relay_input_covariance(params: SystemParams, ch: ChannelSet) -> np.ndarray:
    """Covariance of the signal received at the secondary transmitter in
    the listening phase: (p1/||h11||^2) (Ht h11)(Ht h11)^H + sigma^2 I."""
    ch.check_against(params)
    if ch.ht_mat is None:
        raise DimensionMismatch("ht_mat is required for the relay mode")
    t = ch.ht_mat @ ch.h11
    scale = params.p1 / float(np.vdot(ch.h11, ch.h11).real)
    return hermitize(scale * np.outer(t, t.conj())
                     + params.noise_power * np.eye(params.n_t2))


def overlay_rates(params: SystemParams, ch: ChannelSet, relay_a: np.ndarray,
                  b_cov) -> tuple[float, float]:
    """Achievable rates of the two links in the two-phase relay mode.

    Parameters
    ----------
    relay_a : (n_t2, n_t2) complex
        Amplify-and-forward precoder applied to the received primary
        signal.
    b_cov : (n_t2, n_t2) Hermitian PSD
        Transmit covariance of the secondary's own message.

    Returns
    -------
    (r1, r2) : bit/s. Both carry the 1/2 pre-log factor of the two-phase
    protocol.
    """
    ch.check_against(params)
    a = np.asarray(relay_a, dtype=complex)
    if a.shape != (params.n_t2, params.n_t2):
        raise DimensionMismatch(f"relay_a must be {params.n_t2}x{params.n_t2}")
    b = _cov(b_cov, params.n_t2, "b_cov")
    sigma2 = params.noise_power
    h11_sq = float(np.vdot(ch.h11, ch.h11).real)

    # primary: maximum-ratio combining of the direct and relayed observations
    t = ch.ht_mat @ ch.h11
    relay_num = params.p1 / h11_sq * abs(np.vdot(ch.h21, a @ t)) ** 2
    relay_den = sigma2 + float(np.real(
        ch.h21.conj() @ (sigma2 * (a @ a.conj().T) + b) @ ch.h21))
    snr1 = params.p1 * h11_sq / sigma2 + relay_num / relay_den
    r1 = 0.5 * params.bandwidth * np.log1p(snr1) / LN2

    # secondary: own message under the forwarded-primary interference
    m = relay_input_covariance(params, ch)
    h = ch.h22_mat
    z = sigma2 * np.eye(params.n_r) + h @ (a @ m @ a.conj().T) @ h.conj().T
    r2_bits = log2det(z + h @ b @ h.conj().T) - log2det(z)
    r2 = 0.5 * params.bandwidth * max(r2_bits, 0.0)
    return r1, r2


def secondary_rate_overlay_from_x(params: SystemParams, ch: ChannelSet,
                                  relay_x, b_cov) -> float:
    """Secondary rate as a function of the substituted relay variable
    ``X = A M A^H`` (the relay precoder enters only through X)."""
    ch.check_against(params)
    x = _cov(relay_x, params.n_t2, "relay_x")
    b = _cov(b_cov, params.n_t2, "b_cov")
    sigma2 = params.noise_power
    h = ch.h22_mat
    z = sigma2 * np.eye(params.n_r) + h @ x @ h.conj().T
    bits = log2det(z + h @ b @ h.conj().T) - log2det(z)
    return 0.5 * params.bandwidth * max(bits, 0.0)


def overlay_consumed_power(params: SystemParams, ch: ChannelSet, relay_a,
                           b_cov) -> float:
    """Amplifier-consumed power ``alpha * tr(A M A^H + B)``."""
    a = np.asarray(relay_a, dtype=complex)
    b = _cov(b_cov, params.n_t2, "b_cov")
    m = relay_input_covariance(params, ch)
    relay_pow = float(np.trace(a @ m @ a.conj().T).real)
    return params.alpha * (relay_pow + float(np.trace(b).real))


def ee_overlay(params: SystemParams, ch: ChannelSet, relay_a, b_cov) -> float:
    """Secondary energy efficiency in the relay mode."""
    _, r2 = overlay_rates(params, ch, relay_a, b_cov)
    return r2 / (overlay_consumed_power(params, ch, relay_a, b_cov) + params.p_c)
