"""Command line entry point: ``asrnlab run | oracle | plot | presets``."""
from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .asrn import AsrnConfig
from .bandit import env_preset, make_env
from .experiment import (PRESET_NAMES, SIGMA_SWEEP, load_config, preset, run_experiment,
                         sigma_sweep_configs, write_outputs)
from .metrics import standard_error, trap_duration_stats, var_delta_samples


class CliError(Exception):
    pass


def _floats(text: str) -> list[float]:
    return [float(x) for x in text.replace(",", " ").split()]


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="asrnlab", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a preset or config file and write CSVs")
    run.add_argument("--preset", help=f"one of: {', '.join(PRESET_NAMES)}")
    run.add_argument("--config", help="INI config file")
    run.add_argument("--seed", type=int, help="master seed")
    run.add_argument("--agents", type=int, help="number of agents")
    run.add_argument("--steps", type=int, help="steps per agent")
    run.add_argument("--asrn", choices=("on", "off"), help="force reward noising on or off")
    run.add_argument("--record-every", type=int, help="keep every k-th step in steps.csv")
    run.add_argument("--workers", type=int, default=1, help="worker processes (results do not change)")
    run.add_argument("--out", help="output directory (default: out/<run id>)")
    run.add_argument("--no-plots", action="store_true", help="skip the SVG charts")

    orc = sub.add_parser("oracle", help="Monte Carlo checks")
    osub = orc.add_subparsers(dest="oracle", required=True)
    vd = osub.add_parser("var-delta", help="mean squared TD error at the optimal table")
    vd.add_argument("--preset", default="broken_armed", help="bandit preset: broken_armed, fig3 or custom")
    vd.add_argument("--mus", help="custom arm means, comma separated")
    vd.add_argument("--sigmas", help="custom arm sigmas, comma separated")
    vd.add_argument("--arm", default="right", help="arm label or index")
    vd.add_argument("-n", "--samples", type=int, default=100_000)
    vd.add_argument("--gamma", type=float, default=0.95)
    vd.add_argument("--seed", type=int, default=0)

    ts = osub.add_parser("trap-sweep", help="trap durations across left-arm sigmas")
    ts.add_argument("--sigmas", default=",".join(str(s) for s in SIGMA_SWEEP))
    ts.add_argument("--agents", type=int, default=200)
    ts.add_argument("--steps", type=int, default=2000)
    ts.add_argument("--seed", type=int, default=0)
    ts.add_argument("--workers", type=int, default=1)

    pl = sub.add_parser("plot", help="re-render SVG charts from CSVs in a run directory")
    pl.add_argument("dir")

    sub.add_parser("presets", help="list experiment presets")
    return p


def _resolve_run_config(args):
    if args.preset and args.config:
        raise CliError("--preset and --config are mutually exclusive")
    if not args.preset and not args.config:
        raise CliError("give --preset NAME or --config FILE")
    if args.preset:
        try:
            cfg = preset(args.preset)
        except KeyError as exc:
            raise CliError(str(exc.args[0])) from None
    else:
        try:
            cfg = load_config(args.config)
        except (OSError, ValueError, KeyError) as exc:
            raise CliError(f"bad config {args.config}: {exc}") from None
    updates = {}
    if args.seed is not None:
        updates["master_seed"] = args.seed
    if args.agents is not None:
        updates["n_agents"] = args.agents
    if args.steps is not None:
        updates["n_steps"] = args.steps
    if args.record_every is not None:
        updates["record_every"] = args.record_every
    if args.asrn == "off":
        updates["asrn"] = None
    elif args.asrn == "on" and cfg.asrn is None:
        updates["asrn"] = AsrnConfig()
    try:
        return replace(cfg, **updates)
    except ValueError as exc:
        raise CliError(str(exc)) from None


def cmd_run(args) -> int:
    cfg = _resolve_run_config(args)
    configs = sigma_sweep_configs(cfg) if cfg.name == "sigma_sweep" else [cfg]
    root = Path(args.out) if args.out else Path("out") / cfg.run_id
    for c in configs:
        out = root / c.name if len(configs) > 1 else root
        result = run_experiment(c, workers=args.workers)
        write_outputs(result, out, plots=not args.no_plots)
        line = f"{c.run_id}: {c.n_agents} agents x {c.n_steps} steps -> {out}"
        if len(result.steps):
            line += f"  final right_fraction={result.right_fraction[-1]:.3f}"
        stats = trap_duration_stats(result.events, c.n_steps)
        line += f"  trap events={len(result.events)}"
        if stats.median_duration is not None:
            line += f" median duration={stats.median_duration:g}"
        print(line)
    return 0


def cmd_oracle(args) -> int:
    if args.oracle == "var-delta":
        if args.mus or args.sigmas or args.preset == "custom":
            if not (args.mus and args.sigmas):
                raise CliError("custom bandit needs --mus and --sigmas")
            env = make_env(_floats(args.mus), _floats(args.sigmas))
        else:
            try:
                env = env_preset(args.preset)
            except KeyError as exc:
                raise CliError(str(exc.args[0])) from None
        arm = int(args.arm) if args.arm.lstrip("-").isdigit() else args.arm
        try:
            idx = env.arm_index(arm)
            _, d2 = var_delta_samples(env, idx, args.gamma, args.samples, args.seed)
        except (KeyError, IndexError, ValueError) as exc:
            raise CliError(str(exc.args[0]) if exc.args else str(exc)) from None
        var = env.arms[idx].sigma ** 2
        print(f"E[delta^2] estimate = {d2.mean():.6g} +- {standard_error(d2):.3g} "
              f"(n={args.samples}, arm variance {var:g})")
        return 0

    sigmas = _floats(args.sigmas)
    base = replace(preset("sigma_sweep"), n_agents=args.agents, n_steps=args.steps, master_seed=args.seed)
    print("sigma_left  events  exited  never_exit_frac  median_duration")
    for cfg, s in zip(sigma_sweep_configs(base, sigmas), sigmas):
        result = run_experiment(cfg, workers=args.workers)
        stats = trap_duration_stats(result.events, cfg.n_steps)
        exited = sum(ev.exit_step is not None for ev in result.events)
        med = "nan" if stats.median_duration is None else f"{stats.median_duration:g}"
        print(f"{s:10g}  {len(result.events):6d}  {exited:6d}  {stats.never_exit_fraction:15.3f}  {med:>15}")
    return 0


def cmd_plot(args) -> int:
    from .plotting import render_all
    d = Path(args.dir)
    if not (d / "aggregate.csv").exists():
        raise CliError(f"no aggregate.csv in {d}")
    for path in render_all(d):
        print(path)
    return 0


def cmd_presets(args) -> int:
    for name in PRESET_NAMES:
        c = preset(name)
        arms = ", ".join(f"N({a.mu:g}, {a.sigma:g}^2)" for a in c.env.arms)
        print(f"{name:15s} {c.n_agents:4d} agents x {c.n_steps:6d} steps  arms [{arms}]  "
              f"alpha={c.agent.alpha:g} gamma={c.agent.gamma:g}  asrn={'on' if c.asrn else 'off'}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {"run": cmd_run, "oracle": cmd_oracle, "plot": cmd_plot, "presets": cmd_presets}
    try:
        return handlers[args.command](args)
    except CliError as exc:
        print(f"asrnlab: error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"asrnlab: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
