import numpy as np
import pytest

from herdwatch import (
    ObserverModel,
    ReplayError,
    ValidationError,
    constant_policy,
    derive_seed,
    monte_carlo,
    replay_csv,
    simulate_episode,
    solve,
)

from conftest import make_fig1, make_fig3, make_skype
from oracles import deferred_value, policy_value


def test_derive_seed_frozen_vectors():
    # cross-language reproducibility contract: splitmix64 of base + index
    assert derive_seed(0, 0) == 16294208416658607535
    assert derive_seed(0, 1) == 7960286522194355700
    assert derive_seed(0, 2) == 487617019471545679
    assert derive_seed(123, 0) != derive_seed(124, 0)
    assert len({derive_seed(7, i) for i in range(1000)}) == 1000


def test_episode_deterministic(skype_policy):
    model, obs = make_skype()
    a = simulate_episode(model, obs, skype_policy, horizon=500, seed=99, pi0=[0.5, 0.5])
    b = simulate_episode(model, obs, skype_policy, horizon=500, seed=99, pi0=[0.5, 0.5])
    assert np.array_equal(a.xs, b.xs)
    assert np.array_equal(a.ys, b.ys)
    assert np.array_equal(a.actions, b.actions)
    assert np.array_equal(a.pis, b.pis)
    assert np.array_equal(a.us, b.us)
    assert a.tau == b.tau
    assert a.cost == b.cost


def test_episode_shapes_and_ranges(skype_policy):
    model, obs = make_skype()
    t = simulate_episode(model, obs, skype_policy, horizon=500, seed=4, pi0=[0.5, 0.5])
    n = t.steps
    assert t.xs.shape == (n + 1,)
    assert t.pis.shape == (n + 1, 2)
    assert t.ys.shape == t.actions.shape == t.us.shape == (n,)
    assert set(np.unique(t.xs)) <= {1, 2}
    assert set(np.unique(t.ys)) <= {1, 2}
    assert set(np.unique(t.actions)) <= {1, 2}
    assert np.allclose(t.pis.sum(axis=1), 1.0, atol=1e-12)
    assert np.allclose(t.pis[0], [0.5, 0.5])
    if t.tau is not None:
        assert t.us[-1] == 1
        assert np.all(t.us[:-1] == 2)


def test_episode_stops_immediately_at_change_state(fig3_policy):
    model, obs = make_fig3()
    for seed in range(10):
        t = simulate_episode(model, obs, fig3_policy, horizon=100, seed=seed, pi0=[1.0, 0.0])
        assert t.tau == 1
        assert t.tau0 == 0
        assert not t.censored
        assert np.allclose(t.pis[1], [1.0, 0.0])


def test_episode_cost_recomputable(skype_policy):
    model, obs = make_skype()
    stopped = censored = 0
    never = constant_policy(model, obs, action=2)
    for policy, horizon in ((skype_policy, 500), (never, 40)):
        for seed in range(8):
            t = simulate_episode(model, obs, policy, horizon=horizon, seed=seed, pi0=[0.5, 0.5])
            k = np.arange(1, t.steps + 1)
            running = obs.d * t.pis[1:, 0] * obs.rho ** (k - 1)
            if t.tau is not None:
                want = running[:-1].sum() + obs.rho ** (t.tau - 1) * float(
                    np.asarray(obs.f) @ t.pis[t.tau]
                )
                stopped += 1
            else:
                want = running.sum()
                censored += 1
            assert t.cost == pytest.approx(want, rel=1e-12)
    assert stopped and censored


def test_policy_model_mismatch_rejected(skype_policy):
    model, obs = make_fig3()
    with pytest.raises(ValidationError):
        simulate_episode(model, obs, skype_policy, horizon=10, seed=0)
    skype_model, skype_obs = make_skype()
    other_obs = ObserverModel(f=skype_obs.f, d=0.81, rho=0.9)
    with pytest.raises(ValidationError):
        simulate_episode(skype_model, other_obs, skype_policy, horizon=10, seed=0)


def test_monte_carlo_deterministic(skype_policy):
    model, obs = make_skype()
    a = monte_carlo(model, obs, skype_policy, replicates=200, horizon=300, seed=5, pi0=[0.3, 0.7])
    b = monte_carlo(model, obs, skype_policy, replicates=200, horizon=300, seed=5, pi0=[0.3, 0.7])
    assert (a.mean_cost, a.se_cost, a.false_alarm_rate, a.mean_delay) == (
        b.mean_cost,
        b.se_cost,
        b.false_alarm_rate,
        b.mean_delay,
    )
    assert (a.completed, a.censored, a.false_alarms, a.detected) == (
        b.completed,
        b.censored,
        b.false_alarms,
        b.detected,
    )
    c = monte_carlo(model, obs, skype_policy, replicates=200, horizon=300, seed=6, pi0=[0.3, 0.7])
    assert c.mean_cost != a.mean_cost


def test_monte_carlo_false_alarm_closed_form():
    # always stopping at k = 1 is a false alarm unless the change
    # happened at k <= 1, so the rate is P(tau0 > 1) = 1 - 0.04
    model, obs = make_skype()
    stopper = constant_policy(model, obs, action=1)
    m = monte_carlo(model, obs, stopper, replicates=20000, horizon=5, seed=11, pi0=[0.0, 1.0])
    assert m.censored == 0
    se = np.sqrt(0.96 * 0.04 / m.replicates)
    assert abs(m.false_alarm_rate - 0.96) <= 3.0 * se


def test_monte_carlo_never_stop_censors():
    model, obs = make_skype()
    never = constant_policy(model, obs, action=2)
    m = monte_carlo(model, obs, never, replicates=300, horizon=50, seed=2)
    assert m.censored == m.replicates
    assert m.completed == 0
    assert m.false_alarm_rate == 0.0
    assert m.detected == 0
    assert m.mean_delay is None
    text = m.summary()
    assert "censored" in text


def test_monte_carlo_counts_consistent(skype_policy):
    model, obs = make_skype()
    m = monte_carlo(model, obs, skype_policy, replicates=2000, horizon=400, seed=9, pi0=[0.5, 0.5])
    assert m.completed + m.censored == m.replicates
    assert m.false_alarms + m.detected <= m.completed
    assert 0.0 <= m.false_alarm_rate <= 1.0
    if m.mean_delay is not None:
        assert m.mean_delay >= 0.0


def test_monte_carlo_cost_matches_policy_evaluation(skype_policy):
    model, obs = make_skype()
    pi0 = np.array([0.3, 0.7])
    m = monte_carlo(model, obs, skype_policy, replicates=20000, horizon=2000, seed=17, pi0=pi0)
    assert m.censored == 0
    V_mu = policy_value(model, obs, skype_policy.grid, skype_policy.actions)
    want = deferred_value(model, obs, skype_policy.grid, V_mu, pi0)
    assert abs(m.mean_cost - want) <= 3.0 * m.se_cost + 1e-6

    # no policy can beat the optimal value under the simulated dynamics
    drift = solve(model, obs, herding="drift")
    V_star = policy_value(model, obs, drift.grid, drift.actions)
    floor = deferred_value(model, obs, drift.grid, V_star, pi0)
    assert m.mean_cost >= floor - 3.0 * m.se_cost


def test_delay_nonincreasing_in_delay_cost():
    model, obs = make_skype()
    delays = []
    ses = []
    for d in (0.2, 0.8, 1.4):
        o = ObserverModel(f=obs.f, d=d, rho=obs.rho)
        policy = solve(model, o)
        m = monte_carlo(model, o, policy, replicates=10000, horizon=3000, seed=23, pi0=[0.5, 0.5])
        assert m.detected > 100
        delays.append(m.mean_delay)
        ses.append(m.se_delay)
    assert delays[0] >= delays[1] - 3.0 * (ses[0] + ses[1])
    assert delays[1] >= delays[2] - 3.0 * (ses[1] + ses[2])


def test_replay_roundtrip_exact(skype_policy):
    # this start and seed give a five-step episode using both actions
    model, obs = make_skype()
    t = simulate_episode(model, obs, skype_policy, horizon=500, seed=3, pi0=[0.23, 0.77])
    assert t.steps >= 4
    assert set(t.actions.tolist()) == {1, 2}
    pis, tau = replay_csv(t.actions, model, skype_policy, pi0=[0.23, 0.77])
    assert pis.shape == t.pis.shape
    assert np.max(np.abs(pis - t.pis)) <= 1e-12
    assert tau == t.tau


def test_replay_frozen_regime_constant_belief():
    model = make_fig1()
    obs = ObserverModel(f=[0.0, 3.0], d=1.0, rho=0.9)
    never = constant_policy(model, obs, action=2)
    pi0 = [0.98, 0.02]
    pis, tau = replay_csv([1, 1, 1, 1], model, never, pi0=pi0)
    assert tau is None
    assert np.allclose(pis, np.tile(pi0, (5, 1)), atol=1e-15)
    stopper = constant_policy(model, obs, action=1)
    _, tau = replay_csv([1, 1, 1, 1], model, stopper, pi0=pi0)
    assert tau == 1


def test_replay_rejects_impossible_action():
    model = make_fig1()
    obs = ObserverModel(f=[0.0, 3.0], d=1.0, rho=0.9)
    never = constant_policy(model, obs, action=2)
    # belief deep in the all-buy herd: a recorded sell has probability 0
    with pytest.raises(ReplayError, match="step 2"):
        replay_csv([1, 2, 1], model, never, pi0=[0.98, 0.02])


def test_replay_rejects_bad_values(skype_policy):
    model, obs = make_skype()
    with pytest.raises(ValidationError):
        replay_csv([], model, skype_policy)
    with pytest.raises(ValidationError):
        replay_csv([1, 3], model, skype_policy)
    with pytest.raises(ValidationError):
        replay_csv([0], model, skype_policy)


def test_replay_crossing_detection_lag():
    # a sell leaving the sell-herd region, then a buy run pulling pi(2)
    # down through the stop threshold; at rho = 0.3 that threshold sits
    # near 0.358, i.e. pi(1) crosses roughly 0.646 at the stop step
    model, obs = make_skype(rho=0.3)
    policy = solve(model, obs)
    from herdwatch import stopping_set_analysis

    threshold = stopping_set_analysis(policy).intervals[0][1]
    assert threshold == pytest.approx(0.354, abs=0.02)
    pis, tau = replay_csv([2] + [1] * 6, model, policy, pi0=[0.2, 0.8])
    assert tau is not None
    assert pis[tau, 1] <= threshold
    assert np.all(pis[1:tau, 1] > threshold)
    assert pis[tau, 0] >= 1.0 - threshold
