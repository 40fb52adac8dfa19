"""Timing comparison of the pure-Python and compiled kernel backends.

Runs the three hot kernels (h_diff_grid, replay_beliefs, run_episode)
on the same inputs through every importable backend and prints per-call
times plus the speedup of the compiled extension over the fallback.

    python3 benchmarks/bench_kernels.py
    python3 benchmarks/bench_kernels.py --episodes 2000 --repeats 7
"""

import argparse
import time

import numpy as np

from herdwatch import AgentModel, ObserverModel, constant_policy, solve
from herdwatch._kernels import available_backends


def best_of(repeats, fn):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def build_case(grid_points):
    model = AgentModel(
        B=[[0.7, 0.3], [0.3, 0.7]],
        P=[[1.0, 0.0], [0.04, 0.96]],
        c=[[0.5, 1.0], [1.0, 0.5]],
        alpha=0.45,
    )
    obs = ObserverModel(f=[0.0, 2.0], d=0.8, rho=0.9)
    policy = solve(model, obs, grid_points=grid_points)
    return model, obs, policy


def episode_args(model, obs, policy, pi0, horizon, record):
    return (
        model.B,
        model.P,
        model.c,
        model.alpha,
        np.asarray(pi0, dtype=np.float64),
        np.cumsum(pi0),
        np.cumsum(model.P, axis=1),
        np.cumsum(model.B, axis=1),
        policy.grid,
        np.ascontiguousarray(policy.actions, dtype=np.int8),
        np.asarray(obs.f, dtype=np.float64),
        obs.d,
        obs.rho,
        horizon,
        record,
    )


def feasible_actions(model, obs, steps):
    # a never-stopping policy yields an episode whose realized action
    # chain is feasible for replay by construction
    never = constant_policy(model, obs, action=2)
    args = episode_args(model, obs, never, [0.5, 0.5], steps, True)
    backend = available_backends()["python"]
    out = backend.run_episode(np.random.Generator(np.random.PCG64(1)), *args)
    return out[6]


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--episodes", type=int, default=500)
    parser.add_argument("--horizon", type=int, default=400)
    parser.add_argument("--replay-steps", type=int, default=2000)
    parser.add_argument("--grid-points", type=int, default=2001)
    parser.add_argument("--repeats", type=int, default=5)
    opts = parser.parse_args()

    backends = available_backends()
    model, obs, policy = build_case(opts.grid_points)
    t = np.linspace(0.0, 1.0, opts.grid_points)
    chain = feasible_actions(model, obs, opts.replay_steps)
    ep_args = episode_args(model, obs, policy, [0.5, 0.5], opts.horizon, False)

    print(f"backends: {', '.join(backends)}")
    print(
        f"case: grid {opts.grid_points}, replay chain {len(chain)} steps, "
        f"{opts.episodes} episodes at horizon {opts.horizon}, "
        f"best of {opts.repeats}"
    )
    print()

    rows = []
    for label, run in [
        ("h_diff_grid", lambda b: b.h_diff_grid(model.B, model.P, model.c, model.alpha, t)),
        (
            "replay_beliefs",
            lambda b: b.replay_beliefs(
                model.B, model.P, model.c, model.alpha, np.array([0.5, 0.5]), chain
            ),
        ),
        (
            "run_episode",
            lambda b: [
                b.run_episode(np.random.Generator(np.random.PCG64(seed)), *ep_args)
                for seed in range(opts.episodes)
            ],
        ),
    ]:
        per_call = {}
        for name, backend in backends.items():
            calls = opts.episodes if label == "run_episode" else 1
            per_call[name] = best_of(opts.repeats, lambda: run(backend)) / calls
        rows.append((label, per_call))

    width = max(len(r[0]) for r in rows)
    for label, per_call in rows:
        cells = [f"{name} {1e6 * dt:10.1f} us" for name, dt in per_call.items()]
        if "python" in per_call and "compiled" in per_call:
            cells.append(f"speedup {per_call['python'] / per_call['compiled']:6.1f}x")
        print(f"{label:<{width}}  " + "   ".join(cells))


if __name__ == "__main__":
    main()
