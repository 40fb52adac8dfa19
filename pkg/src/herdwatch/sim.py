"""Agent-based market simulation, Monte Carlo metrics, and action replay.

Each episode step runs in a fixed order: state transition, observation
draw, agent action from the shared decision profile, public belief
update, observer action looked up at the updated belief.  The observer
stops at most once; the episode ends there or at the horizon.

The public belief depends on the action sequence only, so an episode's
belief path can be reproduced from its actions alone (see replay_csv).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .detector import STOP, ObserverModel, SolvedPolicy
from .errors import ReplayError, SimulationError, ValidationError
from .model import AgentModel, belief_vector

DEFAULT_PI0 = (0.1, 0.9)

_MIX_GAMMA = 0x9E3779B97F4A7C15
_MIX_M1 = 0xBF58476D1CE4E5B9
_MIX_M2 = 0x94D049BB133111EB
_MASK64 = (1 << 64) - 1


def derive_seed(base_seed: int, index: int) -> int:
    """Replicate seed: splitmix64 finalizer of base_seed + gamma*(index+1).

    The mixing constants are the standard splitmix64 ones (gamma
    0x9E3779B97F4A7C15, multipliers 0xBF58476D1CE4E5B9 and
    0x94D049BB133111EB, shifts 30/27/31), so the derivation can be
    reproduced outside Python.
    """
    z = (int(base_seed) + _MIX_GAMMA * (int(index) + 1)) & _MASK64
    z = ((z ^ (z >> 30)) * _MIX_M1) & _MASK64
    z = ((z ^ (z >> 27)) * _MIX_M2) & _MASK64
    return z ^ (z >> 31)


@dataclass(frozen=True)
class Trajectory:
    """One simulated episode.

    xs holds states 1..X for k = 0..steps; ys, actions, us hold the
    observation, agent action, and observer action for k = 1..steps;
    pis[k] is the public belief after the k-th update (pis[0] = pi0).
    tau is the stop step or None when the episode was censored at the
    horizon; tau0 is the true change step (0 when the chain starts
    changed, None if no change occurred before the episode ended).
    cost is the realized discounted observer cost.
    """

    xs: np.ndarray
    ys: np.ndarray
    actions: np.ndarray
    pis: np.ndarray
    us: np.ndarray
    tau: int | None
    tau0: int | None
    cost: float
    censored: bool
    seed: int
    pi0: np.ndarray

    @property
    def steps(self) -> int:
        return self.ys.shape[0]


def _check_match(model: AgentModel, obs: ObserverModel, policy: SolvedPolicy):
    if policy.model.key() != model.key():
        raise ValidationError("policy was solved for a different agent model")
    if policy.obs.key() != obs.key():
        raise ValidationError("policy was solved for a different observer model")


def _run(model: AgentModel, obs: ObserverModel, policy: SolvedPolicy,
         horizon: int, seed: int, pi0, record: bool):
    _check_match(model, obs, policy)
    if model.X != 2:
        raise ValidationError(f"simulation needs X = 2 (policy grid is over pi(2)), got X = {model.X}")
    horizon = int(horizon)
    if horizon < 1:
        raise ValidationError(f"horizon must be >= 1, got {horizon}")
    pi0 = belief_vector(DEFAULT_PI0 if pi0 is None else pi0, model.X)
    gen = np.random.Generator(np.random.PCG64(int(seed)))
    cum_pi0 = np.cumsum(pi0)
    cumP = np.cumsum(model.P, axis=1)
    cumB = np.cumsum(model.B, axis=1)
    policy_actions = np.ascontiguousarray(policy.actions, dtype=np.int8)
    try:
        return pi0, _kernels.run_episode(
            gen, model.B, model.P, model.c, model.alpha, pi0,
            cum_pi0, cumP, cumB, policy.grid, policy_actions,
            obs.f, obs.d, obs.rho, horizon, record,
        )
    except FloatingPointError as exc:
        raise SimulationError(str(exc)) from exc


def simulate_episode(model: AgentModel, obs: ObserverModel, policy: SolvedPolicy,
                     horizon: int, seed: int, pi0=None) -> Trajectory:
    """Run one seeded episode and record its full path.

    The same seed always yields the same trajectory on both kernel
    backends.  pi0 doubles as the chain's initial distribution and the
    initial public belief; the default is DEFAULT_PI0.
    """
    pi0, (steps, tau, tau0, cost, xs, ys, acts, pis, us) = _run(
        model, obs, policy, horizon, seed, pi0, True)
    return Trajectory(
        xs=xs + 1, ys=ys + 1, actions=acts + 1, pis=pis, us=us,
        tau=tau if tau > 0 else None,
        tau0=tau0 if tau0 >= 0 else None,
        cost=float(cost),
        censored=tau == 0,
        seed=int(seed),
        pi0=pi0,
    )


@dataclass(frozen=True)
class DetectionMetrics:
    """Monte Carlo aggregate over replicate episodes.

    false_alarm_rate is the fraction of completed (non-censored) runs
    that stopped strictly before the change; mean_delay averages
    tau - tau0 over runs that stopped at or after it.  mean_cost
    averages the realized discounted cost over all replicates, censored
    runs contributing their accrued delay cost.  Standard errors use the
    sample standard deviation.  Censored runs are counted, never
    dropped.
    """

    replicates: int
    completed: int
    censored: int
    false_alarms: int
    detected: int
    false_alarm_rate: float
    mean_delay: float | None
    se_delay: float | None
    mean_cost: float
    se_cost: float
    seed: int
    pi0: np.ndarray

    def summary(self) -> str:
        lines = [
            f"replicates: {self.replicates} (completed {self.completed}, censored {self.censored})",
            f"false alarm rate: {self.false_alarm_rate:.6f} ({self.false_alarms} runs)",
        ]
        if self.mean_delay is None:
            lines.append("mean delay: n/a (no detections after change)")
        else:
            lines.append(f"mean delay: {self.mean_delay:.6f} +/- {self.se_delay:.6f} ({self.detected} runs)")
        lines.append(f"mean cost: {self.mean_cost:.6f} +/- {self.se_cost:.6f}")
        return "\n".join(lines)


def _mean_se(values: np.ndarray):
    n = values.shape[0]
    mean = float(values.mean())
    se = float(values.std(ddof=1) / np.sqrt(n)) if n > 1 else 0.0
    return mean, se


def monte_carlo(model: AgentModel, obs: ObserverModel, policy: SolvedPolicy,
                replicates: int, horizon: int, seed: int, pi0=None) -> DetectionMetrics:
    """Aggregate simulate_episode over seeds derived from a base seed.

    Replicate i uses derive_seed(seed, i); results are accumulated in
    replicate order, so the aggregate is deterministic for a fixed seed
    regardless of how the episodes are scheduled.
    """
    replicates = int(replicates)
    if replicates < 1:
        raise ValidationError(f"replicates must be >= 1, got {replicates}")
    taus = np.zeros(replicates, dtype=np.int64)
    tau0s = np.zeros(replicates, dtype=np.int64)
    costs = np.zeros(replicates, dtype=np.float64)
    for i in range(replicates):
        _, (steps, tau, tau0, cost, *_rest) = _run(
            model, obs, policy, horizon, derive_seed(seed, i), pi0, False)
        taus[i] = tau
        tau0s[i] = tau0
        costs[i] = cost

    stopped = taus > 0
    changed = tau0s >= 0
    completed = int(stopped.sum())
    censored = replicates - completed
    false_mask = stopped & (~changed | (changed & (taus < tau0s)))
    detected_mask = stopped & changed & (taus >= tau0s)
    false_alarms = int(false_mask.sum())
    detected = int(detected_mask.sum())
    fa_rate = false_alarms / completed if completed else 0.0
    if detected:
        delays = (taus[detected_mask] - tau0s[detected_mask]).astype(np.float64)
        mean_delay, se_delay = _mean_se(delays)
    else:
        mean_delay = se_delay = None
    mean_cost, se_cost = _mean_se(costs)
    return DetectionMetrics(
        replicates=replicates, completed=completed, censored=censored,
        false_alarms=false_alarms, detected=detected, false_alarm_rate=fa_rate,
        mean_delay=mean_delay, se_delay=se_delay,
        mean_cost=mean_cost, se_cost=se_cost,
        seed=int(seed),
        pi0=belief_vector(DEFAULT_PI0 if pi0 is None else pi0, model.X),
    )


def replay_csv(actions, model: AgentModel, policy: SolvedPolicy, pi0=None):
    """Rebuild the belief path from recorded actions and apply the policy.

    actions is a time-ordered sequence in 1..A (one entry per step, as
    parsed from a `t,action` table).  No observations are drawn: the
    belief chain is driven by the supplied actions alone.  Returns
    (belief path, tau) where the path has one row per step plus the
    initial belief, and tau is the first step whose updated belief the
    policy stops at, or None.
    """
    if policy.model.key() != model.key():
        raise ValidationError("policy was solved for a different agent model")
    acts = np.asarray(list(actions), dtype=np.int64)
    if acts.ndim != 1 or acts.shape[0] == 0:
        raise ValidationError("actions must be a non-empty 1-d sequence")
    if np.any((acts < 1) | (acts > model.A)):
        bad = int(np.argmax((acts < 1) | (acts > model.A)))
        raise ValidationError(f"action out of range 1..{model.A} at step {bad + 1}: {acts[bad]}")
    pi0 = belief_vector(DEFAULT_PI0 if pi0 is None else pi0, model.X)
    pis, _sigmas, bad_step = _kernels.replay_beliefs(
        model.B, model.P, model.c, model.alpha, pi0, acts - 1)
    if bad_step:
        raise ReplayError(
            f"action {acts[bad_step - 1]} has zero probability at step {bad_step}: "
            "data inconsistent with the model's herding region")
    tau = None
    for k in range(1, pis.shape[0]):
        if policy.action_at(pis[k, 1]) == STOP:
            tau = k
            break
    return pis, tau
