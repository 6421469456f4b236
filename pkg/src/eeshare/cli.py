"""Batch command-line interface.

Subcommands:

* ``run <config>...`` — execute each experiment config and write its CSV;
* ``check <config>...`` — validate configs and report a feasibility
  census (no optimization);
* ``oracle <config>`` — compare the allocators against the brute-force
  oracles on a few drops and print the largest deviation;
* ``repro <figN|table1>`` — write the preset config files reproducing the
  bundled simulation study.

Exit codes: 0 success, 1 configuration/usage error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys

import numpy as np

from .channel_gen import generate_drop
from .errors import ConfigError, EeshareError
from .harness import (config_to_text, emit_csv, load_config,
                      preset_configs, run_experiment)
from .oracles import grid_overlay_rank1, grid_underlay_scalar
from .overlay import FeasibilityStatus, check_feasibility, solve_overlay_rank1
from .rates import primary_pointtopoint_rate
from .underlay import allocate_underlay, compute_p_int


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _build_parser() -> _Parser:
    parser = _Parser(prog="eeshare",
                     description="energy-efficient spectrum sharing experiments")
    sub = parser.add_subparsers(dest="command")

    def add_overrides(p):
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--drops", type=int, default=None)
        p.add_argument("--eps", type=float, default=None)
        p.add_argument("--out", type=str, default=None)

    p_run = sub.add_parser("run", help="run experiments and write CSVs")
    p_run.add_argument("configs", nargs="+", metavar="config-file")
    add_overrides(p_run)

    p_check = sub.add_parser("check", help="validate configs, feasibility census")
    p_check.add_argument("configs", nargs="+", metavar="config-file")
    add_overrides(p_check)

    p_oracle = sub.add_parser("oracle", help="compare against brute-force oracles")
    p_oracle.add_argument("configs", nargs=1, metavar="config-file")
    add_overrides(p_oracle)

    p_repro = sub.add_parser("repro", help="emit preset configs (fig1/fig2/fig3/table1)")
    p_repro.add_argument("preset")
    p_repro.add_argument("--out", type=str, default=".")
    return parser


def _overrides(args) -> dict:
    out = {}
    if getattr(args, "seed", None) is not None:
        out["seed"] = args.seed
    if getattr(args, "drops", None) is not None:
        out["n_drops"] = args.drops
    if getattr(args, "eps", None) is not None:
        out["eps"] = args.eps
    if getattr(args, "out", None) is not None:
        out["output_path"] = args.out
    return out


def _cmd_run(args) -> int:
    for path in args.configs:
        cfg = load_config(path, _overrides(args))
        rows = run_experiment(cfg)
        emit_csv(rows, cfg.output_path)
        print(f"{path}: wrote {len(rows)} sweep points to {cfg.output_path}")
    return 0


def _cmd_check(args) -> int:
    for path in args.configs:
        cfg = load_config(path, _overrides(args))
        n = min(cfg.n_drops, 50)
        drop_cfg = cfg.drop_config()
        probe = cfg.base_params(cfg.p2_sweep_dbw[0])
        census = {"feasible": 0, "underlay_regime": 0, "infeasible_r1star": 0}
        for i in range(n):
            drop = generate_drop(drop_cfg, probe, index=i)
            ref = primary_pointtopoint_rate(probe, drop.channels)
            params = dataclasses.replace(probe,
                                         r1_star=cfg.r_percent / 100.0 * ref)
            if cfg.scenario == "underlay":
                compute_p_int(params, drop.channels)   # raises if inapplicable
                census["feasible"] += 1
            else:
                status = check_feasibility(params, drop.channels).status
                if status is FeasibilityStatus.FEASIBLE:
                    census["feasible"] += 1
                elif status is FeasibilityStatus.UNDERLAY_REGIME:
                    census["underlay_regime"] += 1
                else:
                    census["infeasible_r1star"] += 1
        print(f"{path}: scenario={cfg.scenario} mode={cfg.mode} "
              f"algorithm={cfg.algorithm} r_percent={cfg.r_percent:g} "
              f"p1_dbw={cfg.p1_dbw:g} p2_sweep={','.join(f'{v:g}' for v in cfg.p2_sweep_dbw)}")
        print(f"  census over {n} drops at p2={cfg.p2_sweep_dbw[0]:g} dBW: "
              f"{census['feasible']} feasible, "
              f"{census['underlay_regime']} underlay-regime, "
              f"{census['infeasible_r1star']} above the relay bound")
    return 0


def _cmd_oracle(args) -> int:
    cfg = load_config(args.configs[0], _overrides(args))
    n = min(cfg.n_drops, 5)
    p2_dbw = cfg.p2_sweep_dbw[len(cfg.p2_sweep_dbw) // 2]
    worst = 0.0
    compared = 0
    if cfg.scenario == "underlay":
        cfg1 = dataclasses.replace(cfg, n_t1=1, n_t2=1, n_r=1)
        print("underlay oracle comparison uses single-antenna instances")
        drop_cfg = cfg1.drop_config()
        probe = cfg1.base_params(p2_dbw)
        for i in range(n):
            drop = generate_drop(drop_cfg, probe, index=i)
            ref_rate = primary_pointtopoint_rate(probe, drop.channels)
            params = dataclasses.replace(
                probe, r1_star=min(cfg.r_percent, 100.0) / 100.0 * ref_rate)
            sol = allocate_underlay(params, drop.channels, mode=cfg.mode)
            ref = grid_underlay_scalar(params, drop.channels, grid_n=400,
                                       mode=cfg.mode)
            target = sol.ee if cfg.mode == "ee" else sol.r2
            dev = abs(target - ref.ee) / max(abs(ref.ee), 1e-30)
            worst = max(worst, dev)
            compared += 1
    else:
        drop_cfg = cfg.drop_config()
        probe = cfg.base_params(p2_dbw)
        for i in range(n * 10):
            if compared >= n:
                break
            drop = generate_drop(drop_cfg, probe, index=i)
            ref_rate = primary_pointtopoint_rate(probe, drop.channels)
            params = dataclasses.replace(probe,
                                         r1_star=cfg.r_percent / 100.0 * ref_rate)
            if check_feasibility(params, drop.channels).status \
                    is not FeasibilityStatus.FEASIBLE:
                continue
            sol = solve_overlay_rank1(params, drop.channels, mode=cfg.mode,
                                      eps=cfg.eps)
            _, eig = np.linalg.eigh(sol.b_cov.entries)
            ref = grid_overlay_rank1(params, drop.channels, grid_n=100,
                                     mode=cfg.mode, extra_dirs=eig.T)
            if not ref.feasible:
                continue
            target = sol.ee if cfg.mode == "ee" else sol.r2
            dev = abs(target - ref.ee) / max(abs(ref.ee), 1e-30)
            worst = max(worst, dev)
            compared += 1
    print(f"max relative deviation from the oracle over {compared} drops: "
          f"{worst:.3e}")
    return 0


def _cmd_repro(args) -> int:
    presets = preset_configs(args.preset)
    os.makedirs(args.out, exist_ok=True)
    for name, cfg in presets.items():
        path = os.path.join(args.out, f"{name}.cfg")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(config_to_text(cfg))
        print(path)
    return 0


def cli_main(argv: list[str] | None = None) -> int:
    """Entry point; returns the process exit code."""
    parser = _build_parser()
    if not argv:
        parser.print_usage(sys.stderr)
        return 1
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 1
    handler = {"run": _cmd_run, "check": _cmd_check, "oracle": _cmd_oracle,
               "repro": _cmd_repro}[args.command]
    try:
        return handler(args)
    except (ConfigError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (EeshareError, OSError) as exc:
        print(f"runtime failure: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(cli_main(sys.argv[1:]))


if __name__ == "__main__":
    main()
