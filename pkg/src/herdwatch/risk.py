"""Discrete CVaR and the risk-adjusted cost of an action.

CVaR at level alpha of a discrete cost distribution is
min_z { z + E[max(cost - z, 0)] / alpha }, and the minimum is always
attained at one of the atom values, so the scan below is exact.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .errors import ImpossibleObservationError, ValidationError
from .model import AgentModel, belief_vector


class DiscreteCostDistribution:
    """Finite cost distribution given as (value, probability) atoms."""

    def __init__(self, atoms):
        pairs = [(float(v), float(p)) for v, p in atoms]
        if not pairs:
            raise ValidationError("distribution needs at least one atom")
        values = np.array([v for v, _ in pairs], dtype=np.float64)
        probs = np.array([p for _, p in pairs], dtype=np.float64)
        if not np.all(np.isfinite(values)):
            raise ValidationError("atom values must be finite")
        if np.any(probs < 0.0):
            raise ValidationError("atom probabilities must be nonnegative")
        if abs(probs.sum() - 1.0) > 1e-9:
            raise ValidationError(f"atom probabilities sum to {probs.sum()!r}, expected 1")
        self.values = values
        self.probs = probs

    @property
    def atoms(self):
        return list(zip(self.values.tolist(), self.probs.tolist()))


class CvarResult(NamedTuple):
    cvar: float
    z_star: float


def cvar_discrete(dist: DiscreteCostDistribution, alpha: float) -> CvarResult:
    """Exact CVaR of a discrete distribution by scanning atom values.

    Duplicate atom values are merged before the scan.  On ties, z_star
    is the smallest minimizing atom value.  alpha = 1 gives the mean.
    """
    alpha = float(alpha)
    if not 0.0 < alpha <= 1.0:
        raise ValidationError(f"alpha must be in (0, 1], got {alpha!r}")
    z, inverse = np.unique(dist.values, return_inverse=True)
    p = np.zeros_like(z)
    np.add.at(p, inverse, dist.probs)
    excess = np.maximum(dist.values[np.newaxis, :] - z[:, np.newaxis], 0.0)
    h = z + (excess @ dist.probs) / alpha
    i = int(np.argmin(h))  # first minimum: z sorted ascending, so smallest z wins ties
    return CvarResult(float(h[i]), float(z[i]))


def private_posterior(model: AgentModel, pi, y: int) -> np.ndarray:
    """Bayes update of the public belief after the agent observes y."""
    arr = belief_vector(pi, model.X)
    if not 1 <= int(y) <= model.Y:
        raise ValidationError(f"observation must be in 1..{model.Y}, got {y}")
    q = model.P.T @ arr
    w = model.B[:, int(y) - 1] * q
    s = float(w.sum())
    if s <= 0.0:
        raise ImpossibleObservationError(
            f"observation {y} has zero probability under the predicted belief"
        )
    return w / s


def risk_adjusted_cost(model: AgentModel, pi, y: int, a: int) -> float:
    """CVaR of the cost of action a under the private posterior after y.

    Atoms with zero posterior probability stay in the scan; they cannot
    change the minimum of a convex objective.
    """
    if int(a) not in (1, 2):
        raise ValidationError(f"action must be 1 or 2, got {a}")
    eta = private_posterior(model, pi, y)
    dist = DiscreteCostDistribution(zip(model.c[:, int(a) - 1], eta))
    return cvar_discrete(dist, model.alpha).cvar
