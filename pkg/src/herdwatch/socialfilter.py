"""Social learning filter: agent decisions and the public belief.

Each agent privately updates the public belief with its own
observation, picks the action with the smaller CVaR-adjusted cost, and
reveals only the action.  The public belief is then conditioned on that
action through the action-likelihood matrix R, whose column a collects
the total probability of observations mapped to a by the current
decision rule.  Because the decision rule depends on the public belief,
R changes with the belief; the scan utilities below recover the regions
of belief space on which it is constant.

Ties in the action comparison always resolve to action 1 (buy), and an
observation with zero probability under the predicted belief is mapped
to action 1 as well (flagged, since it cannot occur on-model).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import ImpossibleActionError, ImpossibleObservationError, ValidationError
from .model import AgentModel, Belief, _belief_scan, belief_vector
from .risk import private_posterior, risk_adjusted_cost

DEFAULT_GRID_POINTS = 10_000
BOUNDARY_TOL = 1e-8


def private_update(model: AgentModel, pi, y: int) -> Belief:
    """Agent's posterior after observing y from the predicted belief."""
    return Belief(private_posterior(model, pi, y))


def agent_decision(model: AgentModel, pi, y: int) -> int:
    """Action (1 or 2) minimizing the risk-adjusted cost; ties pick 1."""
    h_buy = risk_adjusted_cost(model, pi, y, 1)
    h_sell = risk_adjusted_cost(model, pi, y, 2)
    return 1 if h_buy <= h_sell else 2


@dataclass(frozen=True, eq=False)
class DecisionProfile:
    """Observation-to-action map M and action likelihoods R at one belief.

    M is Y x 2 with a single 1 per row; R = B @ M is X x 2, rows summing
    to 1.  impossible_observations lists 1-based observations that have
    zero probability at this belief (mapped to action 1 by convention).
    """

    M: np.ndarray
    R: np.ndarray
    impossible_observations: tuple[int, ...] = ()

    def __post_init__(self):
        for name in ("M", "R"):
            arr = getattr(self, name)
            arr = np.ascontiguousarray(arr)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @property
    def actions(self) -> tuple[int, ...]:
        """Chosen action (1 or 2) per observation, in observation order."""
        return tuple(int(a) + 1 for a in np.argmax(self.M, axis=1))


def decision_profile(model: AgentModel, pi) -> DecisionProfile:
    arr = belief_vector(pi, model.X)
    M = np.zeros((model.Y, 2), dtype=np.int8)
    impossible = []
    for y in range(1, model.Y + 1):
        try:
            a = agent_decision(model, arr, y)
        except ImpossibleObservationError:
            impossible.append(y)
            a = 1
        M[y - 1, a - 1] = 1
    R = model.B @ M.astype(np.float64)
    return DecisionProfile(M=M, R=R, impossible_observations=tuple(impossible))


def public_update(model: AgentModel, pi, a: int) -> tuple[Belief, float]:
    """Condition the public belief on an observed action.

    Returns the updated belief and sigma, the probability of seeing
    action a at this belief.  sigma = 0 raises: the action cannot occur
    under the current decision rule.
    """
    if int(a) not in (1, 2):
        raise ValidationError(f"action must be 1 or 2, got {a}")
    arr = belief_vector(pi, model.X)
    profile = decision_profile(model, arr)
    q = model.P.T @ arr
    num = profile.R[:, int(a) - 1] * q
    sigma = float(num.sum())
    if sigma <= 0.0:
        raise ImpossibleActionError(
            f"action {a} has zero probability at this belief"
        )
    return Belief(num / sigma), sigma


@dataclass(frozen=True)
class BeliefRegion:
    """Half-open interval [lower, upper) of pi(2) with a constant profile."""

    lower: float
    upper: float
    actions: tuple[int, ...]


@dataclass(frozen=True)
class RegionTable:
    """Decision-profile partition of belief space.

    For X = 2 the intervals tile [0, 1] in pi(2); for larger X the scan
    is reported pointwise as (belief, actions) pairs.
    """

    intervals: tuple[BeliefRegion, ...] = ()
    points: tuple = ()

    @property
    def distinct_profiles(self) -> set[tuple[int, ...]]:
        if self.intervals:
            return {r.actions for r in self.intervals}
        return {acts for _, acts in self.points}


def _grid_actions(model: AgentModel, t: np.ndarray) -> np.ndarray:
    """1-based action per (grid point, observation) for X = 2 models."""
    D = _kernels.h_diff_grid(model.B, model.P, model.c, model.alpha, t)
    return np.where(np.isnan(D) | (D <= 0.0), 1, 2).astype(np.int8)


def _bisect_boundary(change, lo: float, hi: float, tol: float = BOUNDARY_TOL) -> float:
    """Shrink [lo, hi) around the leftmost point where change(t) is True."""
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if change(mid):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def partition_scan(model: AgentModel, grid_points: int = DEFAULT_GRID_POINTS) -> RegionTable:
    """Scan belief space for the regions of constant decision profile.

    X = 2: evaluates a uniform grid over pi(2), merges equal-profile
    runs, and refines each boundary by bisection to 1e-8.  The returned
    intervals partition [0, 1].  A region narrower than the grid spacing
    can be missed; that is the stated resolution limit.
    """
    if grid_points < 2:
        raise ValidationError("grid_points must be at least 2")
    if model.X != 2:
        pts = []
        for row in _belief_scan(model.X, budget=grid_points):
            pts.append((row, decision_profile(model, row).actions))
        return RegionTable(points=tuple(pts))

    t = np.linspace(0.0, 1.0, grid_points)
    acts = _grid_actions(model, t)
    change_idx = np.nonzero(np.any(acts[1:] != acts[:-1], axis=1))[0]
    boundaries = []
    for i in change_idx:
        left = acts[i]

        def moved(mid, left=left):
            return np.any(_grid_actions(model, np.array([mid]))[0] != left)

        boundaries.append(_bisect_boundary(moved, float(t[i]), float(t[i + 1])))

    labels = [tuple(int(a) for a in acts[0])]
    for i in change_idx:
        labels.append(tuple(int(a) for a in acts[i + 1]))
    edges = [0.0] + boundaries + [1.0]
    intervals = tuple(
        BeliefRegion(lower=edges[k], upper=edges[k + 1], actions=labels[k])
        for k in range(len(labels))
    )
    return RegionTable(intervals=intervals)


@dataclass(frozen=True)
class RegionSweepRow:
    """Social-learning boundaries for one risk level.

    pi_double_star is the pi(2) value where observation 2 becomes
    indifferent between the actions, pi_star the same for observation 1;
    the social learning band is [pi_double_star, pi_star).  NaN marks a
    missing crossing; width is then 0.  When a difference curve crosses
    zero more than once, all crossings are kept and multiple_crossings
    is set instead of guessing a single boundary.
    """

    alpha: float
    pi_double_star: float
    pi_star: float
    width: float
    crossings_y1: tuple[float, ...] = field(default=(), repr=False)
    crossings_y2: tuple[float, ...] = field(default=(), repr=False)
    multiple_crossings: bool = False


def _sign_crossings(model: AgentModel, t: np.ndarray, y_idx: int) -> list[float]:
    D = _kernels.h_diff_grid(model.B, model.P, model.c, model.alpha, t)[:, y_idx]
    pos = D > 0.0  # NaN counts as the buy side, matching the tie rule
    flips = np.nonzero(pos[1:] != pos[:-1])[0]
    out = []
    for i in flips:
        left = bool(pos[i])

        def moved(mid, left=left):
            d = _kernels.h_diff_grid(
                model.B, model.P, model.c, model.alpha, np.array([mid])
            )[0, y_idx]
            return bool(d > 0.0) != left

        out.append(_bisect_boundary(moved, float(t[i]), float(t[i + 1])))
    return out


def learning_region_sweep(
    model: AgentModel,
    alphas,
    grid_points: int = DEFAULT_GRID_POINTS,
) -> list[RegionSweepRow]:
    """Locate the social-learning band for each risk level in alphas.

    Requires X = 2 and Y = 2.  The model's own alpha is ignored; each
    row re-evaluates the decision boundaries at the row's alpha.
    """
    if model.X != 2 or model.Y != 2:
        raise ValidationError("learning_region_sweep requires X = 2 and Y = 2")
    if grid_points < 2:
        raise ValidationError("grid_points must be at least 2")
    t = np.linspace(0.0, 1.0, grid_points)
    rows = []
    for alpha in alphas:
        m = model.with_alpha(float(alpha))
        cross_y1 = _sign_crossings(m, t, 0)
        cross_y2 = _sign_crossings(m, t, 1)
        lo = cross_y2[0] if cross_y2 else math.nan
        hi = cross_y1[0] if cross_y1 else math.nan
        width = hi - lo
        width = max(width, 0.0) if math.isfinite(width) else 0.0
        rows.append(
            RegionSweepRow(
                alpha=float(alpha),
                pi_double_star=lo,
                pi_star=hi,
                width=width,
                crossings_y1=tuple(cross_y1),
                crossings_y2=tuple(cross_y2),
                multiple_crossings=len(cross_y1) > 1 or len(cross_y2) > 1,
            )
        )
    return rows
