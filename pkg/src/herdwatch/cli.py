"""Command-line entry point.

Subcommands: validate, cvar, filter, regions, solve, simulate, replay,
reproduce.  Exit codes: 0 success, 1 validation error, 2 any other
package error (or an unusable path).
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import __version__
from .config import (
    load_config,
    read_actions_csv,
    write_csv,
    write_trajectory_csv,
)
from .detector import solve, stopping_set_analysis
from .errors import HerdwatchError, ValidationError
from .model import validate_model
from .reproduce import TARGETS, run_reproduce
from .risk import risk_adjusted_cost
from .sim import monte_carlo, replay_csv, simulate_episode
from .socialfilter import agent_decision, learning_region_sweep, partition_scan, public_update


def _belief(text: str) -> np.ndarray:
    try:
        return np.array([float(p) for p in text.split(",")], dtype=np.float64)
    except ValueError as exc:
        raise ValidationError(f"--belief must be comma-separated numbers, got {text!r}") from exc


def _alpha_list(text: str):
    try:
        return [float(p) for p in text.split(",")]
    except ValueError as exc:
        raise ValidationError(f"--alphas must be comma-separated numbers, got {text!r}") from exc


def _solve_from(cfg, grid_override=None):
    sv = cfg.solver
    return solve(
        cfg.model, cfg.require_observer(),
        grid_points=grid_override or sv.grid_points,
        tol=sv.tol, max_iter=sv.max_iter, horizon=sv.horizon,
        herding=sv.herding,
    )


def _cmd_validate(args):
    cfg = load_config(args.config)
    report = validate_model(cfg.model)
    print(report.summary())
    return 0


def _cmd_cvar(args):
    cfg = load_config(args.config)
    model = cfg.model.with_alpha(args.alpha) if args.alpha is not None else cfg.model
    pi = _belief(args.belief)
    y = args.y
    for a in range(1, model.A + 1):
        print(f"action {a}: risk-adjusted cost {risk_adjusted_cost(model, pi, y, a)!r}")
    print(f"decision: action {agent_decision(model, pi, y)}")
    return 0


def _cmd_filter(args):
    cfg = load_config(args.config)
    pi = _belief(args.belief)
    belief, sigma = public_update(cfg.model, pi, args.action)
    print("pi_next:", ",".join(repr(float(p)) for p in belief.pi))
    print(f"sigma: {sigma!r}")
    return 0


def _cmd_regions(args):
    cfg = load_config(args.config)
    if args.alphas:
        rows = learning_region_sweep(cfg.model, _alpha_list(args.alphas))
        for r in rows:
            print(f"alpha {r.alpha}: learning region [{r.pi_double_star}, {r.pi_star}) "
                  f"width {r.width}")
        if args.out:
            os.makedirs(args.out, exist_ok=True)
            write_csv(os.path.join(args.out, "region_sweep.csv"),
                      "alpha,pi_double_star,pi_star,width",
                      ((r.alpha, r.pi_double_star, r.pi_star, r.width) for r in rows))
        return 0
    table = partition_scan(cfg.model, grid_points=args.grid) if args.grid \
        else partition_scan(cfg.model)
    if table.intervals:
        print(f"{len(table.intervals)} intervals, "
              f"{len(table.distinct_profiles)} distinct profiles")
        for r in table.intervals:
            print(f"  [{r.lower:.6f}, {r.upper:.6f}) -> actions {list(r.actions)}")
        if args.out:
            os.makedirs(args.out, exist_ok=True)
            write_csv(os.path.join(args.out, "regions.csv"),
                      "lower,upper," + ",".join(f"a_y{y}" for y in range(1, cfg.model.Y + 1)),
                      ((r.lower, r.upper, *r.actions) for r in table.intervals))
    else:
        print(f"{len(table.points)} lattice points, "
              f"{len(table.distinct_profiles)} distinct profiles")
    return 0


def _cmd_solve(args):
    cfg = load_config(args.config)
    policy = _solve_from(cfg, args.grid)
    report = stopping_set_analysis(policy)
    print(f"mode: {policy.mode} (herding {policy.herding}), "
          f"iterations {policy.iterations}, residual {policy.residual!r}, "
          f"converged {policy.converged}")
    print(report.summary())
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        write_csv(os.path.join(args.out, "value_policy.csv"), "pi2,value,action",
                  ((float(t), float(v), int(a))
                   for t, v, a in zip(policy.grid, policy.values, policy.actions)))
    return 0


def _cmd_simulate(args):
    cfg = load_config(args.config)
    policy = _solve_from(cfg)
    sim = cfg.sim
    seed = sim.seed if args.seed is None else args.seed
    metrics = monte_carlo(cfg.model, cfg.require_observer(), policy,
                          replicates=sim.replicates, horizon=sim.horizon,
                          seed=seed, pi0=sim.pi0)
    print(f"pi0: {[float(p) for p in metrics.pi0]}  seed: {seed}")
    print(metrics.summary())
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        traj = simulate_episode(cfg.model, cfg.require_observer(), policy,
                                horizon=sim.horizon, seed=seed, pi0=sim.pi0)
        write_trajectory_csv(os.path.join(args.out, "trajectory.csv"), traj)
    return 0


def _cmd_replay(args):
    cfg = load_config(args.config)
    if cfg.paths.input_csv is None:
        raise ValidationError("paths.input_csv: required for replay")
    actions = read_actions_csv(cfg.paths.input_csv)
    policy = _solve_from(cfg)
    pis, tau = replay_csv(actions, cfg.model, policy, pi0=cfg.sim.pi0)
    print(f"steps: {actions.shape[0]}  tau: {tau if tau is not None else 'none'}")
    print("final belief:", ",".join(repr(float(p)) for p in pis[-1]))
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        upto = tau if tau is not None else pis.shape[0] - 1
        write_csv(os.path.join(args.out, "replay.csv"), "t,a,pi1,pi2,u",
                  ((k, int(actions[k - 1]), float(pis[k, 0]), float(pis[k, 1]),
                    1 if tau == k else 2)
                   for k in range(1, upto + 1)))
    return 0


def _cmd_reproduce(args):
    out = args.out or "reproduce-out"
    print(run_reproduce(args.target, out, grid_points=args.grid or 2001))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="herdwatch",
        description="Risk-averse social learning filters and quickest change detection.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, helptext):
        p = sub.add_parser(name, help=helptext)
        p.set_defaults(fn=fn)
        return p

    p = add("validate", _cmd_validate, "check a model and report which assumptions hold")
    p.add_argument("--config", required=True)

    p = add("cvar", _cmd_cvar, "risk-adjusted action costs at a belief and observation")
    p.add_argument("--config", required=True)
    p.add_argument("--belief", required=True)
    p.add_argument("--y", type=int, required=True)
    p.add_argument("--alpha", type=float, default=None)

    p = add("filter", _cmd_filter, "one public belief update for an observed action")
    p.add_argument("--config", required=True)
    p.add_argument("--belief", required=True)
    p.add_argument("--action", type=int, required=True)

    p = add("regions", _cmd_regions, "decision-profile partition of belief space")
    p.add_argument("--config", required=True)
    p.add_argument("--grid", type=int, default=None)
    p.add_argument("--alphas", default=None)
    p.add_argument("--out", default=None)

    p = add("solve", _cmd_solve, "value iteration and stopping-set report")
    p.add_argument("--config", required=True)
    p.add_argument("--grid", type=int, default=None)
    p.add_argument("--out", default=None)

    p = add("simulate", _cmd_simulate, "Monte Carlo detection metrics")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default=None)

    p = add("replay", _cmd_replay, "replay a recorded action sequence")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default=None)

    p = add("reproduce", _cmd_reproduce, "run a built-in experiment target")
    p.add_argument("--target", required=True, choices=TARGETS)
    p.add_argument("--out", default=None)
    p.add_argument("--grid", type=int, default=None)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except HerdwatchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
