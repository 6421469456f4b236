"""Scratch validation of the overlay allocators."""
import time

import numpy as np

from eeshare.channel_gen import DropConfig, Scenario, generate_drop
from eeshare.model import SystemParams, dbw_to_watts, noise_power_watts
from eeshare.oracles import grid_overlay_rank1
from eeshare.overlay import (FeasibilityStatus, check_feasibility,
                             max_primary_rate, solve_overlay_full,
                             solve_overlay_rank1)
from eeshare.rates import primary_pointtopoint_rate

B = 180e3
rng = np.random.default_rng(11)
n_ok = n_led = n_skip = 0
iters2, iters3 = [], []
t0_all = time.perf_counter()
for i in range(12):
    base = SystemParams(n_t1=2, n_t2=2, n_r=2, p1=dbw_to_watts(-20),
                        p2=dbw_to_watts(float(rng.uniform(-30, -2))),
                        noise_power=noise_power_watts(), bandwidth=B,
                        alpha=10.0, p_c=1.0, r1_star=1.0)
    cfg = DropConfig(seed=500 + i, scenario=Scenario.OVERLAY)
    drop = generate_drop(cfg, base, index=0)
    ch = drop.channels
    cap = primary_pointtopoint_rate(base, ch)
    params = SystemParams(n_t1=2, n_t2=2, n_r=2, p1=base.p1, p2=base.p2,
                          noise_power=base.noise_power, bandwidth=B,
                          alpha=10.0, p_c=1.0, r1_star=1.25 * cap)
    feas = check_feasibility(params, ch)
    if feas.status is not FeasibilityStatus.FEASIBLE:
        print(f"drop {i}: {feas.status.value} (r_bar={feas.r_bar}, R1*={params.r1_star:.3g})")
        n_skip += 1
        continue
    t0 = time.perf_counter()
    s2 = solve_overlay_full(params, ch, debug=(i < 2))
    t2 = time.perf_counter() - t0
    t0 = time.perf_counter()
    s3 = solve_overlay_rank1(params, ch, debug=(i < 2))
    t3 = time.perf_counter() - t0
    mono2 = np.all(np.diff(s2.trace.objectives) >= -1e-9 * (1 + abs(s2.ee)))
    mono3 = np.all(np.diff(s3.trace.objectives) >= -1e-9 * (1 + abs(s3.ee)))
    t0 = time.perf_counter()
    ref = grid_overlay_rank1(params, ch, grid_n=100)
    t_or = time.perf_counter() - t0
    gap_ref = (s3.ee - ref.ee) / max(ref.ee, 1e-30) if ref.feasible else float("nan")
    print(f"drop {i}: ee2={s2.ee:10.4g} ee3={s3.ee:10.4g} grid={ref.ee:10.4g} "
          f"gap3={gap_ref:+.2e} it2={s2.iterations} it3={s3.iterations} "
          f"mono={mono2 and mono3} r1ok={s2.r1 >= params.r1_star - 1e-3} "
          f"t2={t2*1e3:5.0f}ms t3={t3*1e3:5.0f}ms t_or={t_or*1e3:5.0f}ms")
    iters2.append(s2.iterations)
    iters3.append(s3.iterations)
    assert s2.ee >= s3.ee - 1e-3 * max(1.0, s3.ee), (s2.ee, s3.ee)
    n_ok += 1
print(f"feasible {n_ok}, skipped {n_skip}; iters2 mean {np.mean(iters2):.2f} "
      f"iters3 mean {np.mean(iters3):.2f}; total {time.perf_counter()-t0_all:.1f}s")
