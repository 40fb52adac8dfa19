"""Change-time distribution and Markov state-path sampling.

State 1 is the absorbing post-change state.  The change time tau0 of a
chain started from pi0 follows a discrete phase-type distribution: with
Pbar the transition block among states 2..X and plow the column of
probabilities into state 1, the mass function is

    nu_0 = pi0(1),    nu_k = pibar0' Pbar^(k-1) plow   for k >= 1,

which reduces to the geometric distribution when X = 2.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DivergenceError, ValidationError
from .model import STOCHASTIC_TOL, _as_matrix, _check_stochastic, belief_vector


@dataclass(frozen=True, eq=False)
class ChangeProcess:
    """Absorbing chain (state 1) with initial belief pi0."""

    pi0: np.ndarray
    P: np.ndarray
    Pbar: np.ndarray = field(init=False, repr=False)
    plow: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        pi0 = belief_vector(self.pi0)
        P = _as_matrix(self.P, "P")
        if P.shape[0] != P.shape[1]:
            raise ValidationError(f"P must be square, got {P.shape}")
        if P.shape[0] != pi0.shape[0]:
            raise ValidationError(
                f"pi0 has {pi0.shape[0]} states but P has {P.shape[0]}"
            )
        _check_stochastic(P, "P")
        if abs(P[0, 0] - 1.0) > STOCHASTIC_TOL or np.any(
            np.abs(P[0, 1:]) > STOCHASTIC_TOL
        ):
            raise ValidationError("state 1 must be absorbing (P row 1 must be e_1)")
        for arr, name in ((pi0, "pi0"), (P, "P")):
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "Pbar", P[1:, 1:].copy())
        object.__setattr__(self, "plow", P[1:, 0].copy())
        self.Pbar.flags.writeable = False
        self.plow.flags.writeable = False

    @property
    def X(self) -> int:
        return self.P.shape[0]

    def _check_absorbing(self):
        if self.Pbar.size == 0:
            return
        radius = float(np.max(np.abs(np.linalg.eigvals(self.Pbar))))
        if radius >= 1.0 - 1e-12:
            raise DivergenceError(
                f"absorption is not certain: transient block has spectral radius "
                f"{radius:.6g}"
            )


def ph_pmf(proc: ChangeProcess, k: int) -> float:
    """P(tau0 = k) for integer k >= 0."""
    k = int(k)
    if k < 0:
        raise ValidationError(f"time index must be >= 0, got {k}")
    if k == 0:
        return float(proc.pi0[0])
    pibar = proc.pi0[1:]
    v = np.linalg.matrix_power(proc.Pbar, k - 1) @ proc.plow
    return float(pibar @ v)


def ph_pmf_sequence(proc: ChangeProcess, kmax: int) -> np.ndarray:
    """P(tau0 = k) for k = 0..kmax, propagating pibar stepwise."""
    kmax = int(kmax)
    if kmax < 0:
        raise ValidationError(f"kmax must be >= 0, got {kmax}")
    out = np.zeros(kmax + 1, dtype=np.float64)
    out[0] = proc.pi0[0]
    w = proc.pi0[1:].copy()
    for k in range(1, kmax + 1):
        out[k] = w @ proc.plow
        w = w @ proc.Pbar
    return out


def expected_change_time(proc: ChangeProcess) -> float:
    """E[tau0] in closed form via the fundamental matrix.

    The mass nu_0 at k = 0 contributes nothing, so the expectation is the
    expected number of steps to absorption from the transient part of pi0:
    pibar0' (I - Pbar)^(-1) 1.
    """
    proc._check_absorbing()
    pibar = proc.pi0[1:]
    if pibar.size == 0 or not np.any(pibar > 0.0):
        return 0.0
    n = proc.Pbar.shape[0]
    steps = np.linalg.solve(np.eye(n) - proc.Pbar, np.ones(n))
    return float(pibar @ steps)


def sample_chain(proc: ChangeProcess, horizon: int, seed: int):
    """Seeded path x_0..x_horizon (1-based labels) and tau0.

    One generator per call; states are drawn by inverse CDF on each row.
    Once state 1 is reached the path is filled without further draws
    (state 1 is absorbing).  tau0 is None when the path never reaches
    state 1 within the horizon.
    """
    horizon = int(horizon)
    if horizon < 1:
        raise ValidationError(f"horizon must be >= 1, got {horizon}")
    gen = np.random.default_rng(int(seed))
    cum_pi0 = np.cumsum(proc.pi0)
    cumP = np.cumsum(proc.P, axis=1)
    path = np.ones(horizon + 1, dtype=np.int64)
    x = int(np.searchsorted(cum_pi0, gen.random(), side="left"))
    x = min(x, proc.X - 1)
    path[0] = x + 1
    tau0 = 0 if x == 0 else None
    for k in range(1, horizon + 1):
        if x == 0:
            break
        u = gen.random()
        x = int(np.searchsorted(cumP[x], u, side="left"))
        x = min(x, proc.X - 1)
        path[k] = x + 1
        if tau0 is None and x == 0:
            tau0 = k
    if tau0 is not None:
        path[tau0:] = 1
    return path, tau0


def mc_change_times(proc: ChangeProcess, n: int, horizon: int, seed: int) -> np.ndarray:
    """tau0 for n chains drawn with one generator, vectorized over chains.

    Censored chains report horizon + 1.  Faster than n sample_chain calls
    and deterministic for a fixed seed, but consumes draws in a different
    order, so it is a separate contract.
    """
    n = int(n)
    if n < 1:
        raise ValidationError(f"n must be >= 1, got {n}")
    gen = np.random.default_rng(int(seed))
    cum_pi0 = np.cumsum(proc.pi0)
    cumP = np.cumsum(proc.P, axis=1)
    x = np.searchsorted(cum_pi0, gen.random(n), side="left").astype(np.int64)
    np.minimum(x, proc.X - 1, out=x)
    tau = np.where(x == 0, 0, horizon + 1)
    alive = x != 0
    for k in range(1, int(horizon) + 1):
        if not np.any(alive):
            break
        u = gen.random(int(alive.sum()))
        rows = cumP[x[alive]]
        nxt = (rows < u[:, None]).sum(axis=1)
        np.minimum(nxt, proc.X - 1, out=nxt)
        x[alive] = nxt
        hit = alive.copy()
        hit[alive] = nxt == 0
        tau[hit] = k
        alive &= x != 0
    return tau
