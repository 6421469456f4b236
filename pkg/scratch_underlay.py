"""Scratch validation of the underlay allocator vs the scalar grid oracle."""
import time

import numpy as np

from eeshare.channel_gen import DropConfig, Scenario, generate_drop
from eeshare.model import SystemParams, noise_power_watts, dbw_to_watts
from eeshare.oracles import grid_underlay_scalar
from eeshare.underlay import allocate_underlay, select_case

rng = np.random.default_rng(7)

# scalar instances, normalized bandwidth
n_drop = 12
fails = 0
t_start = time.perf_counter()
for i in range(n_drop):
    params0 = SystemParams(n_t1=1, n_t2=1, n_r=1, p1=dbw_to_watts(-10),
                           p2=dbw_to_watts(float(rng.uniform(-30, -2))),
                           noise_power=noise_power_watts(),
                           bandwidth=1.0, alpha=10.0, p_c=1.0, r1_star=0.0)
    cfg = DropConfig(seed=100 + i, scenario=Scenario.UNDERLAY)
    drop = generate_drop(cfg, params0, index=0)
    ch = drop.channels
    snr = params0.p1 * abs(ch.h11[0]) ** 2 / params0.noise_power
    cap = np.log2(1 + snr)
    frac = float(rng.uniform(0.05, 1.0))
    params = SystemParams(n_t1=1, n_t2=1, n_r=1, p1=params0.p1, p2=params0.p2,
                          noise_power=params0.noise_power, bandwidth=1.0,
                          alpha=10.0, p_c=1.0, r1_star=frac * cap)
    t0 = time.perf_counter()
    sol = allocate_underlay(params, ch)
    t_alg = time.perf_counter() - t0
    t0 = time.perf_counter()
    ref = grid_underlay_scalar(params, ch, grid_n=400)
    t_orc = time.perf_counter() - t0
    rel = abs(sol.ee - ref.ee) / max(ref.ee, 1e-30)
    ok = (rel <= 1e-2 or (sol.ee < 1e-12 and ref.ee < 1e-12)) and sol.ee >= ref.ee - 1e-9
    tag = sol.case_tag.value
    print(f"drop {i}: R%={frac*100:5.1f} case={tag:10s} ee_alg={sol.ee:11.6g} "
          f"ee_grid={ref.ee:11.6g} rel={rel:8.2e} iters={sol.iterations} "
          f"t_alg={t_alg*1e3:6.1f}ms t_orc={t_orc*1e3:6.1f}ms {'OK' if ok else 'FAIL'}")
    fails += 0 if ok else 1
print(f"total time {time.perf_counter()-t_start:.1f}s, fails={fails}")

# case sweep on a 2x2 drop
params2 = SystemParams(n_t1=2, n_t2=2, n_r=2, p1=dbw_to_watts(-10),
                       p2=dbw_to_watts(-10), noise_power=noise_power_watts(),
                       bandwidth=180e3, alpha=10.0, p_c=1.0, r1_star=0.0)
cfg = DropConfig(seed=3, scenario=Scenario.UNDERLAY)
drop = generate_drop(cfg, params2, index=1)
ch = drop.channels
snr = params2.p1 * np.vdot(ch.h11, ch.h11).real / params2.noise_power
cap = 180e3 * np.log2(1 + snr)
tags = []
for frac in np.linspace(0.02, 1.0, 14):
    p = SystemParams(n_t1=2, n_t2=2, n_r=2, p1=params2.p1, p2=params2.p2,
                     noise_power=params2.noise_power, bandwidth=180e3,
                     alpha=10.0, p_c=1.0, r1_star=float(frac) * cap)
    t0 = time.perf_counter()
    sol = allocate_underlay(p, ch)
    tags.append(sol.case_tag.value)
    print(f"R%={frac*100:5.1f} case={sol.case_tag.value:10s} ee={sol.ee:12.6g} "
          f"r1={sol.r1:12.6g} r12={sol.r12:12.6g} gamma={sol.gamma} "
          f"[{(time.perf_counter()-t0)*1e3:5.0f}ms]")
print(tags)
