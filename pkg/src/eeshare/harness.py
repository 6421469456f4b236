"""Seeded Monte-Carlo experiment runner with CSV output.

An experiment sweeps the secondary power budget over a list of dBW values,
generating the same set of seeded drops for every sweep point (and for
every algorithm run on the same config seed), so comparisons across
budgets, algorithms and objectives are paired per drop. Primary rate
targets are set per drop as a percentage of that drop's interference-free
primary capacity. Results are aggregated over the feasible drops of each
sweep point; infeasible drops are counted, never silently dropped.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel_gen import Drop, DropConfig, Scenario, generate_drop
from .errors import (ConfigError, InitInfeasible, R1StarExceedsDirectCapacity,
                     R2StarInfeasible, Rank1Infeasible)
from .model import SystemParams, dbw_to_watts, noise_power_watts
from .overlay import (FeasibilityStatus, check_feasibility,
                      solve_overlay_full, solve_overlay_rank1)
from .rates import primary_pointtopoint_rate
from .underlay import allocate_underlay

_MODES = ("ee", "rate")
_ALGORITHMS = ("alg1", "alg2", "alg3")
_SCENARIOS = {"underlay": Scenario.UNDERLAY, "overlay": Scenario.OVERLAY}

CSV_COLUMNS = ("p2_dbw", "mean_ee_bit_per_joule", "mean_r2_bit_per_s",
               "mean_tx_power_w", "mean_iterations", "n_feasible",
               "n_infeasible_r2star", "n_infeasible_r1star")


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything needed to reproduce one experiment.

    ``r_percent`` sets each drop's primary rate target as a percentage of
    its interference-free primary capacity (above 100 only makes sense for
    the relay scenario). ``eps`` is the outer convergence tolerance of the
    relay ascent loops (relative objective change).
    """

    scenario: str                       # "underlay" | "overlay"
    mode: str = "ee"                    # "ee" | "rate"
    algorithm: str = "alg1"             # "alg1" | "alg2" | "alg3"
    p2_sweep_dbw: tuple[float, ...] = (-30.0, -26.0, -22.0, -18.0, -14.0,
                                       -10.0, -6.0, -2.0)
    r_percent: float = 75.0
    n_drops: int = 1000
    seed: int = 1
    eps: float = 1e-3
    n_t1: int = 2
    n_t2: int = 2
    n_r: int = 2
    p1_dbw: float = -10.0
    p_c_w: float = 1.0
    alpha: float = 10.0
    bandwidth_hz: float = 180e3
    noise_figure_db: float = 3.0
    noise_psd_dbm_hz: float = -174.0
    i_out_w: float = 0.0
    r2_star_bit_s: float = 0.0
    cell_radius_m: float = 500.0
    min_ap_distance_m: float = 10.0
    d2d_min_m: float = 10.0
    d2d_max_m: float = 100.0
    pathloss_exponent: float = 4.5
    shadowing_std_db: float = 6.0
    overlay_relay_ratio_min: float = 0.1
    overlay_relay_ratio_max: float = 0.9
    output_path: str = "results.csv"

    def __post_init__(self):
        if self.scenario not in _SCENARIOS:
            raise ConfigError(f"unknown scenario {self.scenario!r}")
        if self.mode not in _MODES:
            raise ConfigError(f"unknown mode {self.mode!r}")
        if self.algorithm not in _ALGORITHMS:
            raise ConfigError(f"unknown algorithm {self.algorithm!r}")
        if self.scenario == "underlay" and self.algorithm != "alg1":
            raise ConfigError("underlay supports only alg1")
        if self.scenario == "overlay" and self.algorithm == "alg1":
            raise ConfigError("overlay supports alg2 or alg3")
        if len(self.p2_sweep_dbw) == 0:
            raise ConfigError("p2 sweep must be nonempty")
        if self.n_drops < 1:
            raise ConfigError("n_drops must be at least 1")
        if self.r_percent <= 0:
            raise ConfigError("r_percent must be positive")
        if not self.eps > 0:
            raise ConfigError("eps must be positive")

    def drop_config(self) -> DropConfig:
        return DropConfig(seed=self.seed, scenario=_SCENARIOS[self.scenario],
                          cell_radius_m=self.cell_radius_m,
                          min_ap_distance_m=self.min_ap_distance_m,
                          d2d_min_m=self.d2d_min_m, d2d_max_m=self.d2d_max_m,
                          pathloss_exponent=self.pathloss_exponent,
                          shadowing_std_db=self.shadowing_std_db,
                          overlay_relay_ratio_min=self.overlay_relay_ratio_min,
                          overlay_relay_ratio_max=self.overlay_relay_ratio_max)

    def base_params(self, p2_dbw: float, r1_star: float = 1.0) -> SystemParams:
        return SystemParams(
            n_t1=self.n_t1, n_t2=self.n_t2, n_r=self.n_r,
            p1=dbw_to_watts(self.p1_dbw), p2=dbw_to_watts(p2_dbw),
            noise_power=noise_power_watts(self.noise_psd_dbm_hz,
                                          self.noise_figure_db,
                                          self.bandwidth_hz, self.i_out_w),
            bandwidth=self.bandwidth_hz, alpha=self.alpha, p_c=self.p_c_w,
            r1_star=r1_star, r2_star=self.r2_star_bit_s)


@dataclass(frozen=True)
class ResultRow:
    p2_dbw: float
    mean_ee: float
    mean_r2: float
    mean_tx_power: float
    mean_iterations: float
    n_feasible: int
    n_infeasible_r2star: int
    n_infeasible_r1star: int


@dataclass
class DropOutcome:
    """Per-drop record collected by :func:`run_experiment`."""

    feasible: bool
    ee: float = 0.0
    r2: float = 0.0
    tx_power: float = 0.0
    iterations: int = 0
    reason: str = ""


def _solve_drop(cfg: ExperimentConfig, drop: Drop, p2_dbw: float) -> DropOutcome:
    ch = drop.channels
    ref = primary_pointtopoint_rate(cfg.base_params(p2_dbw), ch)
    params = cfg.base_params(p2_dbw, r1_star=cfg.r_percent / 100.0 * ref)
    try:
        if cfg.scenario == "underlay":
            sol = allocate_underlay(params, ch, mode=cfg.mode)
        else:
            if check_feasibility(params, ch).status is not FeasibilityStatus.FEASIBLE:
                return DropOutcome(False, reason="r1star")
            solver = solve_overlay_full if cfg.algorithm == "alg2" \
                else solve_overlay_rank1
            sol = solver(params, ch, mode=cfg.mode, eps=cfg.eps)
            return DropOutcome(True, ee=sol.ee, r2=sol.r2,
                               tx_power=params.alpha * (sol.relay_x.trace
                                                        + sol.b_cov.trace),
                               iterations=sol.iterations)
    except R2StarInfeasible:
        return DropOutcome(False, reason="r2star")
    except (R1StarExceedsDirectCapacity, Rank1Infeasible, InitInfeasible):
        return DropOutcome(False, reason="r1star")
    return DropOutcome(True, ee=sol.ee, r2=sol.r2, tx_power=sol.tx_power,
                       iterations=sol.iterations)


def run_experiment(cfg: ExperimentConfig) -> list[ResultRow]:
    """Run the configured sweep and aggregate per-sweep-point means.

    The same drops (seed substreams 0..n_drops-1) are reused at every
    sweep point. Per-drop solver failures other than the recognized
    infeasibility outcomes propagate; infeasible drops are excluded from
    the means but counted.
    """
    drop_cfg = cfg.drop_config()
    probe = cfg.base_params(cfg.p2_sweep_dbw[0])
    drops = [generate_drop(drop_cfg, probe, index=i) for i in range(cfg.n_drops)]
    rows = []
    for p2_dbw in cfg.p2_sweep_dbw:
        outcomes = [_solve_drop(cfg, drop, p2_dbw) for drop in drops]
        good = [o for o in outcomes if o.feasible]
        n_r2 = sum(1 for o in outcomes if not o.feasible and o.reason == "r2star")
        n_r1 = sum(1 for o in outcomes if not o.feasible and o.reason == "r1star")
        if good:
            row = ResultRow(
                p2_dbw=p2_dbw,
                mean_ee=float(np.mean([o.ee for o in good])),
                mean_r2=float(np.mean([o.r2 for o in good])),
                mean_tx_power=float(np.mean([o.tx_power for o in good])),
                mean_iterations=float(np.mean([o.iterations for o in good])),
                n_feasible=len(good), n_infeasible_r2star=n_r2,
                n_infeasible_r1star=n_r1)
        else:
            row = ResultRow(p2_dbw=p2_dbw, mean_ee=0.0, mean_r2=0.0,
                            mean_tx_power=0.0, mean_iterations=0.0,
                            n_feasible=0, n_infeasible_r2star=n_r2,
                            n_infeasible_r1star=n_r1)
        rows.append(row)
    return rows


def emit_csv(rows: list[ResultRow], path: str) -> None:
    """Write the result table; columns are fixed and floats carry nine
    significant digits so repeated seeded runs are byte-identical."""
    if not rows:
        raise ValueError("no rows to write")
    lines = [",".join(CSV_COLUMNS)]
    for r in rows:
        lines.append(",".join([
            f"{r.p2_dbw:.9g}", f"{r.mean_ee:.9g}", f"{r.mean_r2:.9g}",
            f"{r.mean_tx_power:.9g}", f"{r.mean_iterations:.9g}",
            str(r.n_feasible), str(r.n_infeasible_r2star),
            str(r.n_infeasible_r1star)]))
    try:
        with open(path, "w", encoding="ascii") as fh:
            fh.write("\n".join(lines) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write results to {path!r}: {exc}") from exc


def parse_csv(path: str) -> list[ResultRow]:
    with open(path, "r", encoding="ascii") as fh:
        lines = [ln for ln in fh.read().splitlines() if ln]
    if lines[0] != ",".join(CSV_COLUMNS):
        raise ValueError(f"unexpected CSV header in {path!r}")
    rows = []
    for ln in lines[1:]:
        parts = ln.split(",")
        rows.append(ResultRow(
            p2_dbw=float(parts[0]), mean_ee=float(parts[1]),
            mean_r2=float(parts[2]), mean_tx_power=float(parts[3]),
            mean_iterations=float(parts[4]), n_feasible=int(parts[5]),
            n_infeasible_r2star=int(parts[6]), n_infeasible_r1star=int(parts[7])))
    return rows


# ---------------------------------------------------------------------------
# Flat key=value config files
# ---------------------------------------------------------------------------

_FIELD_PARSERS = {
    "scenario": str, "mode": str, "algorithm": str, "output_path": str,
    "p2_sweep_dbw": lambda s: tuple(float(x) for x in s.split(",") if x.strip()),
    "n_drops": int, "seed": int, "n_t1": int, "n_t2": int, "n_r": int,
}


def config_to_text(cfg: ExperimentConfig) -> str:
    lines = ["# eeshare experiment config"]
    for name in cfg.__dataclass_fields__:
        value = getattr(cfg, name)
        if isinstance(value, tuple):
            value = ",".join(f"{v:g}" for v in value)
        lines.append(f"{name} = {value}")
    return "\n".join(lines) + "\n"


def config_from_text(text: str, overrides: dict | None = None) -> ExperimentConfig:
    """Parse a flat ``key = value`` config ('#' comments allowed)."""
    values: dict = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, _, val = line.partition("=")
        key, val = key.strip(), val.strip()
        if key not in ExperimentConfig.__dataclass_fields__:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        parser = _FIELD_PARSERS.get(key, float)
        try:
            values[key] = parser(val)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key!r}: {val!r}") from exc
    if overrides:
        values.update(overrides)
    if "scenario" not in values:
        raise ConfigError("config must set 'scenario'")
    try:
        return ExperimentConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path: str, overrides: dict | None = None) -> ExperimentConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return config_from_text(fh.read(), overrides)


# ---------------------------------------------------------------------------
# Presets mirroring the default simulation study
# ---------------------------------------------------------------------------

def preset_configs(name: str) -> dict[str, ExperimentConfig]:
    """Named experiment presets for the bundled figures/table study.

    ``fig1`` (aliases fig1a/fig1b): underlay efficiency-vs-rate comparison
    at targets 50/75/100%; ``fig2``: underlay transmit-power comparison at
    75%; ``fig3`` (fig3a/fig3b): relay-mode comparison of both ascent
    algorithms at a 200% target with the primary power lowered to -20 dBW;
    ``table1``: relay-mode iteration statistics at 125% and 200%.
    """
    key = name.lower()
    sweep = (-30.0, -26.0, -22.0, -18.0, -14.0, -10.0, -6.0, -2.0)
    out: dict[str, ExperimentConfig] = {}
    if key in ("fig1", "fig1a", "fig1b"):
        for r in (50.0, 75.0, 100.0):
            for mode in ("ee", "rate"):
                out[f"fig1_r{int(r)}_{mode}"] = ExperimentConfig(
                    scenario="underlay", mode=mode, algorithm="alg1",
                    p2_sweep_dbw=sweep, r_percent=r, p1_dbw=-10.0,
                    output_path=f"fig1_r{int(r)}_{mode}.csv")
    elif key == "fig2":
        for mode in ("ee", "rate"):
            out[f"fig2_r75_{mode}"] = ExperimentConfig(
                scenario="underlay", mode=mode, algorithm="alg1",
                p2_sweep_dbw=sweep, r_percent=75.0, p1_dbw=-10.0,
                output_path=f"fig2_r75_{mode}.csv")
    elif key in ("fig3", "fig3a", "fig3b"):
        for alg, mode in (("alg2", "ee"), ("alg3", "ee"), ("alg2", "rate")):
            out[f"fig3_r200_{alg}_{mode}"] = ExperimentConfig(
                scenario="overlay", mode=mode, algorithm=alg,
                p2_sweep_dbw=sweep, r_percent=200.0, p1_dbw=-20.0,
                output_path=f"fig3_r200_{alg}_{mode}.csv")
    elif key == "table1":
        for r in (125.0, 200.0):
            for alg in ("alg2", "alg3"):
                out[f"table1_r{int(r)}_{alg}"] = ExperimentConfig(
                    scenario="overlay", mode="ee", algorithm=alg,
                    p2_sweep_dbw=sweep, r_percent=r, p1_dbw=-20.0,
                    output_path=f"table1_r{int(r)}_{alg}.csv")
    else:
        raise ConfigError(f"unknown preset {name!r} (use fig1/fig2/fig3/table1)")
    return out
