"""Reproducible random network drops and channel realizations.

Geometry: the primary transmitter (access point) sits at the cell center,
the primary receiver is placed uniformly in the cell outside a minimum
radius, and the secondary pair is dropped with a uniformly random
separation. In the relay (overlay) scenario the secondary transmitter is
additionally constrained to lie in an annulus around the primary receiver
whose radii are fixed fractions of the primary link distance.

Randomness: a counter-based 64-bit generator (numpy Philox) keyed on the
config seed; drop ``index`` selects an independent substream via
``jumped(index)``, so distinct drops can be generated concurrently and
reproducibly. Within a drop the draw order is fixed: positions, then one
shadowing value per link, then small-scale fading per link, always in the
link order h11, h22, h12, h21, ht.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .model import ChannelSet, SystemParams

_MAX_REJECTIONS = 10_000

_LINK_ORDER = ("h11", "h22", "h12", "h21", "ht")

# Fixed large-scale reference gain at 1 m. The absolute level only shifts
# every link SNR by a constant; this macro-cell-like intercept keeps the
# default simulation scenarios (relay placement, power sweeps) in a regime
# where a meaningful fraction of relay drops can actually meet their
# primary rate targets.
PATHLOSS_REF_DB = -20.0


class Scenario(enum.Enum):
    UNDERLAY = "underlay"
    OVERLAY = "overlay"


@dataclass(frozen=True)
class DropConfig:
    """Placement and propagation parameters of one Monte-Carlo scenario."""

    seed: int
    scenario: Scenario = Scenario.UNDERLAY
    cell_radius_m: float = 500.0
    min_ap_distance_m: float = 10.0
    d2d_min_m: float = 10.0
    d2d_max_m: float = 100.0
    pathloss_exponent: float = 4.5
    shadowing_std_db: float = 6.0
    overlay_relay_ratio_min: float = 0.1
    overlay_relay_ratio_max: float = 0.9

    def __post_init__(self):
        if not (0 < self.min_ap_distance_m < self.cell_radius_m):
            raise ConfigError("need 0 < min_ap_distance_m < cell_radius_m")
        if not (0 < self.d2d_min_m < self.d2d_max_m):
            raise ConfigError("need 0 < d2d_min_m < d2d_max_m")
        if not (0 < self.overlay_relay_ratio_min < self.overlay_relay_ratio_max):
            raise ConfigError("relay ratio bounds must be positive and ordered")
        if self.pathloss_exponent <= 0 or self.shadowing_std_db < 0:
            raise ConfigError("bad propagation parameters")


@dataclass(frozen=True)
class Drop:
    """One placement plus channel realization."""

    primary_tx: np.ndarray       # (2,) meters
    primary_rx: np.ndarray
    secondary_tx: np.ndarray
    secondary_rx: np.ndarray
    gains: dict[str, float]      # linear large-scale gain per link
    channels: ChannelSet
    index: int = 0
    seed: int = 0


def pathloss_gain(d_m: float, eta: float, shadow_db: float = 0.0,
                  ref_db: float = PATHLOSS_REF_DB) -> float:
    """Large-scale linear gain ``C * d^(-eta) * 10^(shadow/10)`` with the
    fixed reference constant ``C = 10^(ref_db/10)`` at 1 m; distances
    below 1 m are clamped to 1 m."""
    d = max(float(d_m), 1.0)
    return 10.0 ** (ref_db / 10.0) * d ** (-eta) * 10.0 ** (shadow_db / 10.0)


def _disc_point(rng: np.random.Generator, r_max: float, r_min: float = 0.0) -> np.ndarray:
    # uniform over the annulus via inverse-CDF radius sampling
    u = rng.random()
    r = math.sqrt(r_min ** 2 + u * (r_max ** 2 - r_min ** 2))
    theta = rng.random() * 2.0 * math.pi
    return np.array([r * math.cos(theta), r * math.sin(theta)])


def _cn_matrix(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    # i.i.d. circularly-symmetric complex Gaussian, unit variance per entry
    re = rng.standard_normal((rows, cols))
    im = rng.standard_normal((rows, cols))
    return (re + 1j * im) / math.sqrt(2.0)


def _place_terminals(rng: np.random.Generator, cfg: DropConfig):
    radius = cfg.cell_radius_m
    primary_tx = np.zeros(2)
    primary_rx = _disc_point(rng, radius, cfg.min_ap_distance_m)

    if cfg.scenario is Scenario.OVERLAY:
        d_pp = float(np.linalg.norm(primary_rx - primary_tx))
        r_lo = cfg.overlay_relay_ratio_min * d_pp
        r_hi = cfg.overlay_relay_ratio_max * d_pp
        for _ in range(_MAX_REJECTIONS):
            secondary_tx = primary_rx + _disc_point(rng, r_hi, r_lo)
            if np.linalg.norm(secondary_tx) <= radius:
                break
        else:
            raise RuntimeError("relay placement rejected too many times")
    else:
        secondary_tx = _disc_point(rng, radius)

    for _ in range(_MAX_REJECTIONS):
        d = cfg.d2d_min_m + rng.random() * (cfg.d2d_max_m - cfg.d2d_min_m)
        theta = rng.random() * 2.0 * math.pi
        secondary_rx = secondary_tx + d * np.array([math.cos(theta), math.sin(theta)])
        if np.linalg.norm(secondary_rx) <= radius:
            break
    else:
        raise RuntimeError("secondary receiver placement rejected too many times")

    return primary_tx, primary_rx, secondary_tx, secondary_rx


def generate_drop(cfg: DropConfig, params: SystemParams, index: int = 0) -> Drop:
    """Generate one drop; deterministic given ``(cfg.seed, index)``."""
    rng = np.random.Generator(np.random.Philox(key=cfg.seed).jumped(index))
    p_tx, p_rx, s_tx, s_rx = _place_terminals(rng, cfg)

    dist = {
        "h11": np.linalg.norm(p_rx - p_tx),
        "h22": np.linalg.norm(s_rx - s_tx),
        "h12": np.linalg.norm(s_rx - p_tx),
        "h21": np.linalg.norm(p_rx - s_tx),
        "ht": np.linalg.norm(s_tx - p_tx),
    }
    shape = {
        "h11": (params.n_t1, 1),
        "h22": (params.n_r, params.n_t2),
        "h12": (params.n_r, params.n_t1),
        "h21": (params.n_t2, 1),
        "ht": (params.n_t2, params.n_t1),
    }
    shadows = {link: rng.normal(0.0, cfg.shadowing_std_db) for link in _LINK_ORDER}
    gains = {link: pathloss_gain(dist[link], cfg.pathloss_exponent, shadows[link])
             for link in _LINK_ORDER}
    fading = {link: _cn_matrix(rng, *shape[link]) for link in _LINK_ORDER}

    channels = ChannelSet(
        h11=math.sqrt(gains["h11"]) * fading["h11"][:, 0],
        h22_mat=math.sqrt(gains["h22"]) * fading["h22"],
        h12_mat=math.sqrt(gains["h12"]) * fading["h12"],
        h21=math.sqrt(gains["h21"]) * fading["h21"][:, 0],
        ht_mat=math.sqrt(gains["ht"]) * fading["ht"],
    )
    return Drop(primary_tx=p_tx, primary_rx=p_rx, secondary_tx=s_tx,
                secondary_rx=s_rx, gains=gains, channels=channels,
                index=index, seed=cfg.seed)


# ---------------------------------------------------------------------------
# JSON fixtures
# ---------------------------------------------------------------------------

def _complex_to_lists(arr: np.ndarray):
    a = np.asarray(arr, dtype=complex)
    return {"re": a.real.tolist(), "im": a.imag.tolist()}


def _lists_to_complex(obj) -> np.ndarray:
    return np.asarray(obj["re"], dtype=float) + 1j * np.asarray(obj["im"], dtype=float)


def drop_to_json(drop: Drop) -> str:
    """Serialize a drop for regression fixtures.

    Field names: positions (`primary_tx`, `primary_rx`, `secondary_tx`,
    `secondary_rx`; [x, y] meters), `gains` (per-link linear gains), and
    `channels` with one `{re, im}` nested-list pair per link
    (h11, h22_mat, h12_mat, h21, ht_mat).
    """
    ch = drop.channels
    payload = {
        "index": drop.index,
        "seed": drop.seed,
        "primary_tx": drop.primary_tx.tolist(),
        "primary_rx": drop.primary_rx.tolist(),
        "secondary_tx": drop.secondary_tx.tolist(),
        "secondary_rx": drop.secondary_rx.tolist(),
        "gains": drop.gains,
        "channels": {
            "h11": _complex_to_lists(ch.h11),
            "h22_mat": _complex_to_lists(ch.h22_mat),
            "h12_mat": _complex_to_lists(ch.h12_mat),
            "h21": _complex_to_lists(ch.h21),
            "ht_mat": None if ch.ht_mat is None else _complex_to_lists(ch.ht_mat),
        },
    }
    return json.dumps(payload, sort_keys=True)


def drop_from_json(text: str) -> Drop:
    payload = json.loads(text)
    chans = payload["channels"]
    channels = ChannelSet(
        h11=_lists_to_complex(chans["h11"]),
        h22_mat=_lists_to_complex(chans["h22_mat"]),
        h12_mat=_lists_to_complex(chans["h12_mat"]),
        h21=_lists_to_complex(chans["h21"]),
        ht_mat=None if chans["ht_mat"] is None else _lists_to_complex(chans["ht_mat"]),
    )
    return Drop(
        primary_tx=np.asarray(payload["primary_tx"], dtype=float),
        primary_rx=np.asarray(payload["primary_rx"], dtype=float),
        secondary_tx=np.asarray(payload["secondary_tx"], dtype=float),
        secondary_rx=np.asarray(payload["secondary_rx"], dtype=float),
        gains={k: float(v) for k, v in payload["gains"].items()},
        channels=channels,
        index=int(payload["index"]),
        seed=int(payload["seed"]),
    )
