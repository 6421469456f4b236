"""Energy-efficient resource allocation for spectrum-sharing MIMO links.

A secondary multi-antenna link shares spectrum with a beamformed primary
link either by reusing it under an interference budget (underlay) or by
relaying the primary message in exchange for access (overlay). This
package computes the transmit covariances / relay precoders that maximize
the secondary link's bit-per-Joule energy efficiency under rate and power
constraints, together with brute-force reference oracles and a seeded
Monte-Carlo experiment harness.
"""

from .channel_gen import Drop, DropConfig, Scenario, generate_drop, pathloss_gain
from .fractional import FractionalProblem, dinkelbach_solve, surrogate_loop
from .model import (CaseTag, ChannelSet, FractionalTrace, HermitianPSD,
                    OverlaySolution, SystemParams, UnderlaySolution,
                    dbw_to_watts, noise_power_watts, watts_to_dbw)
from .overlay import (check_feasibility, max_primary_rate, overlay_constants,
                      solve_overlay_full, solve_overlay_rank1,
                      taylor_lower_bound)
from .rates import (ee_overlay, ee_underlay, overlay_rates,
                    primary_pointtopoint_rate, primary_rate_underlay,
                    r12_rate, secondary_rate_underlay)
from .underlay import allocate_underlay, compute_p_int, select_case

__all__ = [
    "CaseTag", "ChannelSet", "Drop", "DropConfig", "FractionalProblem",
    "FractionalTrace", "HermitianPSD", "OverlaySolution", "Scenario",
    "SystemParams", "UnderlaySolution", "allocate_underlay",
    "check_feasibility", "compute_p_int", "dbw_to_watts", "dinkelbach_solve",
    "ee_overlay", "ee_underlay", "generate_drop", "max_primary_rate",
    "noise_power_watts", "overlay_constants", "overlay_rates",
    "pathloss_gain", "primary_pointtopoint_rate", "primary_rate_underlay",
    "r12_rate", "secondary_rate_underlay", "select_case",
    "solve_overlay_full", "solve_overlay_rank1", "surrogate_loop",
    "taylor_lower_bound", "watts_to_dbw",
]

__version__ = "0.1.0"
