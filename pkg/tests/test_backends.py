import json
import os
import subprocess
import sys

import numpy as np
import pytest

from herdwatch import KERNEL_BACKEND
from herdwatch._kernels import _pycore, available_backends

fastcore = pytest.importorskip(
    "herdwatch._kernels._fastcore", reason="compiled backend not built"
)

from conftest import make_skype


def episode_args(model, obs, policy, pi0, horizon):
    grid = policy.grid
    cum_pi0 = np.cumsum(pi0)
    cumP = np.cumsum(model.P, axis=1)
    cumB = np.cumsum(model.B, axis=1)
    acts = np.ascontiguousarray(policy.actions, dtype=np.int8)
    return (
        model.B,
        model.P,
        model.c,
        model.alpha,
        np.asarray(pi0, dtype=np.float64),
        cum_pi0,
        cumP,
        cumB,
        grid,
        acts,
        np.asarray(obs.f, dtype=np.float64),
        obs.d,
        obs.rho,
        horizon,
        True,
    )


def test_backend_registry():
    assert KERNEL_BACKEND in ("compiled", "python")
    assert set(available_backends()) >= {"python", "compiled"}
    assert _pycore.BACKEND_NAME == "python"
    assert fastcore.BACKEND_NAME == "compiled"


def test_h_diff_grid_parity():
    model, _ = make_skype()
    t = np.linspace(0.0, 1.0, 4001)
    a = _pycore.h_diff_grid(model.B, model.P, model.c, model.alpha, t)
    b = fastcore.h_diff_grid(model.B, model.P, model.c, model.alpha, t)
    assert a.shape == b.shape
    assert np.array_equal(np.isnan(a), np.isnan(b))
    assert np.nanmax(np.abs(a - b)) <= 1e-12


def test_replay_parity():
    model, _ = make_skype()
    pi0 = np.array([0.23, 0.77])
    actions = np.array([1, 1, 1, 1, 0], dtype=np.int64)
    pa, sa, bad_a = _pycore.replay_beliefs(model.B, model.P, model.c, model.alpha, pi0, actions)
    pb, sb, bad_b = fastcore.replay_beliefs(model.B, model.P, model.c, model.alpha, pi0, actions)
    assert bad_a == bad_b == 0
    assert np.max(np.abs(pa - pb)) <= 1e-12
    assert np.max(np.abs(sa - sb)) <= 1e-12


def test_replay_parity_reports_same_bad_step():
    model, _ = make_skype()
    pi0 = np.array([0.9, 0.1])
    # belief starts inside the all-buy herd, so a sell (0-based 1) is dead
    actions = np.array([0, 1], dtype=np.int64)
    _, _, bad_a = _pycore.replay_beliefs(model.B, model.P, model.c, model.alpha, pi0, actions)
    _, _, bad_b = fastcore.replay_beliefs(model.B, model.P, model.c, model.alpha, pi0, actions)
    assert bad_a == bad_b == 2


def test_run_episode_parity(skype_policy):
    model, obs = make_skype()
    args = episode_args(model, obs, skype_policy, [0.23, 0.77], 400)
    for seed in range(25):
        ra = _pycore.run_episode(np.random.Generator(np.random.PCG64(seed)), *args)
        rb = fastcore.run_episode(np.random.Generator(np.random.PCG64(seed)), *args)
        steps_a, tau_a, tau0_a, cost_a, xs_a, ys_a, acts_a, pis_a, us_a = ra
        steps_b, tau_b, tau0_b, cost_b, xs_b, ys_b, acts_b, pis_b, us_b = rb
        assert (steps_a, tau_a, tau0_a) == (steps_b, tau_b, tau0_b)
        assert np.array_equal(xs_a, xs_b)
        assert np.array_equal(ys_a, ys_b)
        assert np.array_equal(acts_a, acts_b)
        assert np.array_equal(us_a, us_b)
        assert cost_a == pytest.approx(cost_b, abs=1e-12)
        assert np.max(np.abs(pis_a - pis_b)) <= 1e-12


def test_python_backend_end_to_end(tmp_path):
    # a fresh interpreter forced onto the fallback must reproduce the
    # compiled backend's thresholds
    code = (
        "import json\n"
        "from herdwatch import AgentModel, ObserverModel, solve, stopping_set_analysis, KERNEL_BACKEND\n"
        "model = AgentModel(B=[[0.7,0.3],[0.3,0.7]], P=[[1.0,0.0],[0.04,0.96]],"
        " c=[[0.5,1.0],[1.0,0.5]], alpha=0.45)\n"
        "obs = ObserverModel(f=[0.0,2.0], d=0.8, rho=0.9)\n"
        "rep = stopping_set_analysis(solve(model, obs, grid_points=1001))\n"
        "print(json.dumps({'backend': KERNEL_BACKEND, 'intervals': rep.intervals}))\n"
    )
    env = dict(os.environ, HERDWATCH_BACKEND="python")
    proc = subprocess.run(
        [sys.executable, "-c", code], capture_output=True, text=True, env=env
    )
    assert proc.returncode == 0, proc.stderr
    got = json.loads(proc.stdout)
    assert got["backend"] == "python"

    from herdwatch import solve, stopping_set_analysis

    model, obs = make_skype()
    want = stopping_set_analysis(solve(model, obs, grid_points=1001)).intervals
    assert len(got["intervals"]) == len(want)
    for (a0, b0), (a1, b1) in zip(got["intervals"], want):
        assert a0 == pytest.approx(a1, abs=1e-9)
        assert b0 == pytest.approx(b1, abs=1e-9)
