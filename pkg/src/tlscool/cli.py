"""Command-line entry point.

Examples:
    simulate --scenario fig1a --out results/
    simulate --config run.cfg --pulses 99 --out results/
    simulate --config run.cfg --scenario fig2 --jobs 4 --out results/

Exit status is 0 only when every run finished with all quality flags green.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from .scenarios import (
    SCENARIOS,
    emit,
    execute_run,
    load_config,
    preset_config,
    run_scenario,
)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="simulate",
        description="Resonator-cooling simulations with sigma_z decoupling pulses",
    )
    parser.add_argument("--config", help="flat key=value config file")
    parser.add_argument("--scenario", choices=SCENARIOS,
                        help="run a figure-reproduction scenario grid")
    parser.add_argument("--pulses", type=int, default=None,
                        help="pulse count (single run) or grid restriction (scenario)")
    parser.add_argument("--nmax", type=int, default=None,
                        help="override the Fock truncation level")
    parser.add_argument("--out", default="out",
                        help="output directory for CSV files (default: out)")
    parser.add_argument("--approach", choices=("polariton", "simple"), default=None,
                        help="override the master-equation approach")
    parser.add_argument("--angular-convention", choices=("on", "off"), default=None,
                        help="read omega_m_hz as 2*pi*f (on, default) or rad/s (off)")
    parser.add_argument("--jobs", type=int, default=1,
                        help="parallel workers for scenario grids (default 1)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.config is None and args.scenario is None:
        build_parser().error("need --config and/or --scenario")

    angular = None if args.angular_convention is None else (
        args.angular_convention == "on")

    base = None
    if args.config is not None:
        try:
            base = load_config(args.config, angular_override=angular)
        except (ValueError, OSError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2

    overrides = {}
    if args.nmax is not None:
        overrides["nmax"] = args.nmax
    if args.approach is not None:
        overrides["approach"] = args.approach

    if args.scenario is not None:
        scenario_base = base if base is not None else preset_config(args.scenario)
        if overrides:
            scenario_base = replace(scenario_base, **overrides)
        grid = {}
        if args.pulses is not None:
            grid["pulses"] = [args.pulses]
        trajectories = run_scenario(args.scenario, base=scenario_base,
                                    jobs=args.jobs, **grid)
        emit(trajectories, args.out, scenario=args.scenario)
    else:
        cfg = base
        if args.pulses is not None:
            overrides["n_pulses"] = args.pulses
        if overrides:
            cfg = replace(cfg, **overrides)
        trajectories = [execute_run(cfg, label="run")]
        emit(trajectories, args.out, scenario=None)

    ok = all(t.quality_ok for t in trajectories)
    for t in trajectories:
        label = t.metadata.get("run_label", "run")
        flag = "ok" if t.quality_ok else "QUALITY-FAIL"
        print(f"{label}: n_osc(end) = {t.end_value:.6g} [{flag}]")
    return 0 if ok else 1


if __name__ == "__main__":
    raise SystemExit(main())
