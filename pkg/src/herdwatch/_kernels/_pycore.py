"""Pure-Python / numpy implementations of the hot kernels.

Semantics contract shared with the compiled backend (_fastcore):

* ``h_diff_grid(B, P, c, alpha, t)``: X = 2 only.  For each grid value
  ``t[i]`` of pi(2) and each observation index ``y`` (0-based), returns
  ``H(y, buy) - H(y, sell)`` where H is the CVaR-adjusted action cost
  under the private posterior.  NaN marks observations with zero
  probability at that belief.
* ``replay_beliefs(B, P, c, alpha, pi0, actions)``: runs the public
  filter along a 0-based action sequence; returns the belief path, the
  per-step action probabilities sigma, and the first 1-based step with
  sigma <= 0 (0 when the whole sequence is feasible).
* ``run_episode(...)``: simulates one episode, consuming draws from a
  numpy Generator in a fixed order: one draw for the initial state,
  then per step one draw for the state transition and one for the
  observation.  Inverse-CDF sampling uses the smallest index whose
  cumulative probability reaches the draw.

Both backends consume identical RNG streams, so integer outputs agree
exactly and belief paths agree to floating-point roundoff.
"""

from __future__ import annotations

import numpy as np

BACKEND_NAME = "python"


def _cvar_two_atoms(c0, c1, eta1, alpha):
    # atom scan specialized to two atoms; zero-probability atoms stay
    # in the candidate set, matching cvar_discrete
    h0 = c0 + max(c1 - c0, 0.0) * eta1 / alpha
    h1 = c1 + max(c0 - c1, 0.0) * (1.0 - eta1) / alpha
    return h0 if h0 <= h1 else h1


def _cvar_atoms(values, eta, alpha):
    if values.shape[0] == 2:
        return _cvar_two_atoms(values[0], values[1], eta[1], alpha)
    excess = np.maximum(values[np.newaxis, :] - values[:, np.newaxis], 0.0)
    return float(np.min(values + (excess @ eta) / alpha))


def h_diff_grid(B, P, c, alpha, t):
    t = np.asarray(t, dtype=np.float64)
    n = t.shape[0]
    Y = B.shape[1]
    q1 = P[0, 0] * (1.0 - t) + P[1, 0] * t
    q2 = P[0, 1] * (1.0 - t) + P[1, 1] * t
    out = np.empty((n, Y), dtype=np.float64)
    for y in range(Y):
        w1 = B[0, y] * q1
        w2 = B[1, y] * q2
        s = w1 + w2
        with np.errstate(invalid="ignore", divide="ignore"):
            e = np.where(s > 0.0, w2 / s, np.nan)
        h_buy = np.minimum(
            c[0, 0] + np.maximum(c[1, 0] - c[0, 0], 0.0) * e / alpha,
            c[1, 0] + np.maximum(c[0, 0] - c[1, 0], 0.0) * (1.0 - e) / alpha,
        )
        h_sell = np.minimum(
            c[0, 1] + np.maximum(c[1, 1] - c[0, 1], 0.0) * e / alpha,
            c[1, 1] + np.maximum(c[0, 1] - c[1, 1], 0.0) * (1.0 - e) / alpha,
        )
        out[:, y] = h_buy - h_sell
    return out


def _decision_actions(B, P, c, alpha, q):
    """0-based action per observation at predicted belief q = P' pi."""
    Y = B.shape[1]
    actions = np.zeros(Y, dtype=np.int8)
    for y in range(Y):
        w = B[:, y] * q
        s = w.sum()
        if s <= 0.0:
            actions[y] = 0  # tie-break: impossible observation maps to buy
            continue
        eta = w / s
        h_buy = _cvar_atoms(c[:, 0], eta, alpha)
        h_sell = _cvar_atoms(c[:, 1], eta, alpha)
        actions[y] = 0 if h_buy <= h_sell else 1
    return actions


def _filter_step(B, P, c, alpha, pi, a):
    """One public-filter step: returns (pi_next, sigma) for 0-based a."""
    q = P.T @ pi
    actions = _decision_actions(B, P, c, alpha, q)
    r = B[:, actions == a].sum(axis=1)
    num = r * q
    sigma = float(num.sum())
    if sigma <= 0.0:
        return None, sigma
    return num / sigma, sigma


def replay_beliefs(B, P, c, alpha, pi0, actions):
    T = len(actions)
    X = B.shape[0]
    pis = np.zeros((T + 1, X), dtype=np.float64)
    sigmas = np.zeros(T, dtype=np.float64)
    pis[0] = pi0
    pi = np.asarray(pi0, dtype=np.float64)
    for k in range(T):
        nxt, sigma = _filter_step(B, P, c, alpha, pi, int(actions[k]))
        sigmas[k] = sigma
        if nxt is None:
            return pis[: k + 1], sigmas[: k + 1], k + 1
        pi = nxt
        pis[k + 1] = pi
    return pis, sigmas, 0


def _inverse_cdf(cum, u):
    j = 0
    last = cum.shape[0] - 1
    while j < last and cum[j] < u:
        j += 1
    return j


def run_episode(gen, B, P, c, alpha, pi0, cum_pi0, cumP, cumB, grid, policy_actions,
                f, d, rho, horizon, record):
    X = B.shape[0]
    g = grid.shape[0]
    if record:
        xs = np.zeros(horizon + 1, dtype=np.int64)
        ys = np.zeros(horizon, dtype=np.int64)
        acts = np.zeros(horizon, dtype=np.int64)
        pis = np.zeros((horizon + 1, X), dtype=np.float64)
        us = np.zeros(horizon, dtype=np.int64)
    else:
        xs = ys = acts = pis = us = None

    pi = np.array(pi0, dtype=np.float64)
    x = _inverse_cdf(cum_pi0, gen.random())
    tau0 = 0 if x == 0 else -1
    tau = 0
    cost = 0.0
    disc = 1.0
    steps = 0
    if record:
        xs[0] = x
        pis[0] = pi

    for k in range(1, horizon + 1):
        x = _inverse_cdf(cumP[x], gen.random())
        if tau0 < 0 and x == 0:
            tau0 = k
        y = _inverse_cdf(cumB[x], gen.random())
        q = P.T @ pi
        actions = _decision_actions(B, P, c, alpha, q)
        a = int(actions[y])
        r = B[:, actions == a].sum(axis=1)
        num = r * q
        sigma = float(num.sum())
        if sigma <= 0.0:
            raise FloatingPointError(f"zero action probability at step {k}")
        pi = num / sigma
        j = int(pi[1] * (g - 1) + 0.5)
        if j < 0:
            j = 0
        elif j > g - 1:
            j = g - 1
        u = int(policy_actions[j])
        steps = k
        if record:
            xs[k] = x
            ys[k - 1] = y
            acts[k - 1] = a
            pis[k] = pi
            us[k - 1] = u
        if u == 1:
            tau = k
            cost += disc * float(np.dot(f, pi))
            break
        cost += disc * d * pi[0]
        disc *= rho

    if record:
        return (steps, tau, tau0, cost,
                xs[: steps + 1], ys[:steps], acts[:steps], pis[: steps + 1], us[:steps])
    return steps, tau, tau0, cost, None, None, None, None, None
