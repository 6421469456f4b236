"""Domain types for spectrum-sharing resource allocation.

Conventions used throughout the package:

* powers in Watts, bandwidth in Hz, rates in bit/s, energy efficiency in
  bit/Joule;
* column vectors are 1-D complex arrays, channel matrices are 2-D with
  shape (receive, transmit);
* transmit covariances are complex Hermitian positive semidefinite.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch

HERMITIAN_RTOL = 1e-12
PSD_EIG_RTOL = 1e-9


def hermitize(mat: np.ndarray) -> np.ndarray:
    """Project onto the Hermitian subspace: (M + M^H)/2."""
    return 0.5 * (mat + mat.conj().T)


def dbw_to_watts(x_dbw: float) -> float:
    return 10.0 ** (x_dbw / 10.0)


def watts_to_dbw(x_w: float) -> float:
    return 10.0 * math.log10(x_w)


def noise_power_watts(n0_dbm_hz: float = -174.0, noise_figure_db: float = 3.0,
                      bandwidth_hz: float = 180e3, i_out_w: float = 0.0) -> float:
    """Receiver noise power: thermal floor times noise figure plus
    out-of-system interference treated as noise."""
    n0_w_hz = 10.0 ** ((n0_dbm_hz - 30.0) / 10.0)
    f_lin = 10.0 ** (noise_figure_db / 10.0)
    return n0_w_hz * bandwidth_hz * f_lin + i_out_w


@dataclass(frozen=True)
class SystemParams:
    """Static link and hardware parameters.

    Attributes
    ----------
    n_t1, n_t2, n_r : int
        Antenna counts of the primary transmitter, secondary transmitter
        and secondary receiver. The primary receiver has one antenna.
    p1, p2 : float
        Primary transmit power and secondary maximum consumed transmit
        power, Watts.
    noise_power : float
        Noise power sigma^2 at every receiver, Watts (see
        :func:`noise_power_watts`).
    bandwidth : float
        Communication bandwidth, Hz. Set to 1.0 for normalized
        (per-Hz) rate units.
    alpha : float
        Power-amplifier inefficiency (consumed Watts per radiated Watt).
        Zero is allowed only for evaluating the rate-maximization
        objective; any power budget requires alpha > 0.
    p_c : float
        Static hardware power, Watts, strictly positive.
    r1_star, r2_star : float
        Minimum rate targets of the primary and secondary link, bit/s.
    """

    n_t1: int
    n_t2: int
    n_r: int
    p1: float
    p2: float
    noise_power: float
    bandwidth: float
    alpha: float
    p_c: float
    r1_star: float
    r2_star: float = 0.0

    def __post_init__(self):
        if min(self.n_t1, self.n_t2, self.n_r) < 1:
            raise ValueError("antenna counts must be positive")
        for name in ("p1", "p2", "noise_power", "p_c", "bandwidth"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"{name} must be strictly positive")
        if self.alpha < 0.0:
            raise ValueError("alpha must be nonnegative")
        if self.r1_star < 0.0 or self.r2_star < 0.0:
            raise ValueError("rate targets must be nonnegative")


@dataclass(frozen=True)
class ChannelSet:
    """One realization of all channels between the four terminals.

    Attributes
    ----------
    h11 : (n_t1,) complex
        Primary transmitter -> primary receiver.
    h22_mat : (n_r, n_t2) complex
        Secondary transmitter -> secondary receiver.
    h12_mat : (n_r, n_t1) complex
        Primary transmitter -> secondary receiver.
    h21 : (n_t2,) complex
        Secondary transmitter -> primary receiver.
    ht_mat : (n_t2, n_t1) complex
        Primary transmitter -> secondary transmitter (used by the relay
        mode only; may be None for pure underlay instances).
    """

    h11: np.ndarray
    h22_mat: np.ndarray
    h12_mat: np.ndarray
    h21: np.ndarray
    ht_mat: np.ndarray | None = None

    def __post_init__(self):
        h11 = np.asarray(self.h11, dtype=complex)
        h22 = np.asarray(self.h22_mat, dtype=complex)
        h12 = np.asarray(self.h12_mat, dtype=complex)
        h21 = np.asarray(self.h21, dtype=complex)
        object.__setattr__(self, "h11", h11)
        object.__setattr__(self, "h22_mat", h22)
        object.__setattr__(self, "h12_mat", h12)
        object.__setattr__(self, "h21", h21)
        if self.ht_mat is not None:
            object.__setattr__(self, "ht_mat", np.asarray(self.ht_mat, dtype=complex))
        if h11.ndim != 1 or h21.ndim != 1 or h22.ndim != 2 or h12.ndim != 2:
            raise DimensionMismatch("channel arrays have wrong rank")
        n_t1, n_t2, n_r = h11.size, h21.size, h22.shape[0]
        if h22.shape != (n_r, n_t2):
            raise DimensionMismatch("h22_mat shape inconsistent with h21")
        if h12.shape != (n_r, n_t1):
            raise DimensionMismatch("h12_mat shape inconsistent with h11/h22_mat")
        if self.ht_mat is not None and self.ht_mat.shape != (n_t2, n_t1):
            raise DimensionMismatch("ht_mat shape inconsistent with h11/h21")
        for arr in (h11, h22, h12, h21) + (() if self.ht_mat is None else (self.ht_mat,)):
            if not np.all(np.isfinite(arr.view(float))):
                raise ValueError("channel entries must be finite")

    @property
    def n_t1(self) -> int:
        return self.h11.size

    @property
    def n_t2(self) -> int:
        return self.h21.size

    @property
    def n_r(self) -> int:
        return self.h22_mat.shape[0]

    def check_against(self, params: SystemParams) -> None:
        if (self.n_t1, self.n_t2, self.n_r) != (params.n_t1, params.n_t2, params.n_r):
            raise DimensionMismatch(
                f"channel dims {(self.n_t1, self.n_t2, self.n_r)} do not match "
                f"params {(params.n_t1, params.n_t2, params.n_r)}")


@dataclass(frozen=True)
class HermitianPSD:
    """Complex Hermitian positive-semidefinite matrix value type.

    Validation accepts a small negative eigenvalue floor of
    -1e-9 * trace/dim (numerical PSD tolerance) and requires
    self-adjointness to 1e-12 relative.
    """

    entries: np.ndarray
    dim: int = field(init=False)

    def __post_init__(self):
        m = np.asarray(self.entries, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionMismatch("HermitianPSD requires a square matrix")
        scale = np.linalg.norm(m)
        if np.linalg.norm(m - m.conj().T) > HERMITIAN_RTOL * max(scale, 1e-300):
            raise ValueError("matrix is not Hermitian within tolerance")
        m = hermitize(m)
        tr = float(np.trace(m).real)
        w = np.linalg.eigvalsh(m)
        floor = -PSD_EIG_RTOL * max(tr / m.shape[0], 0.0) - 1e-300
        if w[0] < floor:
            raise ValueError(f"matrix has negative eigenvalue {w[0]:.3e}")
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)
        object.__setattr__(self, "dim", m.shape[0])

    @classmethod
    def zeros(cls, dim: int) -> "HermitianPSD":
        return cls(np.zeros((dim, dim), dtype=complex))

    @classmethod
    def from_matrix(cls, mat: np.ndarray, clip_tol: float | None = None) -> "HermitianPSD":
        """Build from a numerically-PSD matrix, optionally clipping small
        negative eigenvalues (at most `clip_tol` in magnitude) to zero."""
        m = hermitize(np.asarray(mat, dtype=complex))
        if clip_tol is not None:
            w, v = np.linalg.eigh(m)
            if w[0] < -clip_tol:
                raise ValueError(f"negative eigenvalue {w[0]:.3e} exceeds clip tolerance")
            if w[0] < 0.0:
                m = (v * np.clip(w, 0.0, None)) @ v.conj().T
                m = hermitize(m)
        return cls(m)

    @property
    def trace(self) -> float:
        return float(np.trace(self.entries).real)


def as_matrix(cov) -> np.ndarray:
    """Accept a HermitianPSD or a bare ndarray and return the ndarray."""
    if isinstance(cov, HermitianPSD):
        return cov.entries
    return np.asarray(cov, dtype=complex)


class CaseTag(enum.Enum):
    """Operating regime of the secondary receiver in the underlay mode."""

    NO_SIC = "no_sic"           # whole secondary message decoded under interference
    FULL_SIC = "full_sic"       # interference cancelled before decoding everything
    RATE_SPLIT = "rate_split"   # split message: one part after cancellation only


@dataclass(frozen=True)
class FractionalTrace:
    """Per-iteration record of a ratio-maximization run.

    For the parametric (Dinkelbach-type) solver, `lambdas` holds the
    ratio parameter per outer iteration, `f_values` the attained maxima
    of the parametric subproblem and `objectives` the achieved ratio.
    For ascent loops over surrogate problems, `objectives` holds the
    true objective after each outer iteration (including the starting
    point) while `lambdas`/`f_values` record the final inner state per
    iteration.
    """

    lambdas: tuple[float, ...]
    f_values: tuple[float, ...]
    objectives: tuple[float, ...]


@dataclass(frozen=True)
class UnderlaySolution:
    """Output of the underlay allocator."""

    k21: HermitianPSD
    k22: HermitianPSD
    case_tag: CaseTag
    ee: float           # bit/Joule
    r1: float           # bit/s
    r2: float           # bit/s
    r12: float          # bit/s, primary rate decodable at the secondary receiver
    tx_power: float     # Watts, amplifier-consumed: alpha * tr(k21 + k22)
    gamma: float | None = None   # split fraction, rate-split regime only
    iterations: int = 0          # total parametric-solver outer iterations


@dataclass(frozen=True)
class OverlaySolution:
    """Output of the overlay (relay) allocators."""

    relay_x: HermitianPSD            # substituted relay variable X = A M A^H
    relay_scale_a: float | None      # rank-one relay gain, rank-1 path only
    b_cov: HermitianPSD              # own-message transmit covariance
    ee: float                        # bit/Joule
    r1: float                        # bit/s
    r2: float                        # bit/s
    iterations: int
    trace: FractionalTrace
