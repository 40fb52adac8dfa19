"""Market observer: costs, value iteration, and stopping-set geometry.

The observer watches the public belief produced by the action filter and
chooses stop (1) or continue (2).  Stopping at belief pi costs f'pi
(false-alarm weight on the not-yet-changed states); continuing costs
d*pi(1) (delay weight on the changed state) plus the discounted expected
value after one more agent action.

The solver discretizes pi(2) on a uniform grid (X = 2 only).  The filter
map and action probabilities are evaluated exactly at grid points;
successor values are linearly interpolated.  Value jumps at decision
region boundaries survive because sigma and the filter map are exact.

Inside a herding region every agent takes the same action regardless of
its observation, so the action carries no information.  Two continuation
dynamics are supported there:

* "frozen" (default): the public belief is held fixed while the observer
  waits, so the continue operand is d*pi(1) + rho*V(pi).  This produces
  the non-convex stopping sets and value-function jumps that motivate
  the solver.
* "drift": the belief keeps following the one-step predictor through the
  filter map of the taken action, T(pi, a) = P'pi.  The continue operand
  is the sigma-weighted successor value everywhere.

The two coincide when P = I.  Outside herding regions the backup is
identical in both modes.

Tie at the Bellman minimum resolves to stop, so policies are
deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import ValidationError
from .model import AgentModel, belief_vector
from .socialfilter import BOUNDARY_TOL

DEFAULT_GRID_POINTS = 2001
DEFAULT_TOL = 1e-9
DEFAULT_MAX_ITER = 100_000
THRESHOLD_TOL = 1e-6

STOP = 1
CONTINUE = 2


@dataclass(frozen=True, eq=False)
class ObserverModel:
    """False-alarm weights f (f[0] = 0, non-decreasing), delay cost d,
    discount rho."""

    f: np.ndarray
    d: float
    rho: float = 1.0

    def __post_init__(self):
        f = np.asarray(self.f, dtype=np.float64).copy()
        if f.ndim != 1 or f.shape[0] < 2:
            raise ValidationError(f"f must be a vector of length >= 2, got shape {f.shape}")
        if not np.all(np.isfinite(f)):
            raise ValidationError("f must be finite")
        if abs(f[0]) > 0.0:
            raise ValidationError(f"f[0] must be 0 (state 1 carries no false-alarm cost), got {f[0]}")
        if np.any(np.diff(f) < 0.0):
            raise ValidationError("f must be non-decreasing")
        if not (float(self.d) > 0.0):
            raise ValidationError(f"d must be positive, got {self.d}")
        if not (0.0 <= float(self.rho) <= 1.0):
            raise ValidationError(f"rho must be in [0, 1], got {self.rho}")
        f.flags.writeable = False
        object.__setattr__(self, "f", f)
        object.__setattr__(self, "d", float(self.d))
        object.__setattr__(self, "rho", float(self.rho))

    @property
    def X(self) -> int:
        return self.f.shape[0]

    def key(self) -> str:
        return f"f={self.f.tolist()!r},d={self.d!r},rho={self.rho!r}"


def observer_cost(obs: ObserverModel, pi, u: int) -> float:
    """Stage cost: u = 1 -> f'pi (false alarm), u = 2 -> d*pi(1) (delay)."""
    pi = belief_vector(pi, obs.X)
    u = int(u)
    if u == STOP:
        return float(obs.f @ pi)
    if u == CONTINUE:
        return float(obs.d * pi[0])
    raise ValidationError(f"observer action must be 1 or 2, got {u}")


@dataclass(frozen=True, eq=False)
class SolvedPolicy:
    """Value function and stationary policy on a pi(2) grid.

    mode is "infinite" (value iteration to a fixed point), "finite"
    (backward induction over a horizon), or "constant" (fixed action,
    values not Bellman-consistent).  herding records which continuation
    dynamics the backup used inside herding regions ("frozen" or
    "drift").  sup_diffs records the sup-norm change of each sweep for
    convergence diagnostics.
    """

    grid: np.ndarray
    values: np.ndarray
    actions: np.ndarray
    residual: float
    iterations: int
    converged: bool
    mode: str
    herding: str
    sup_diffs: np.ndarray
    model: AgentModel
    obs: ObserverModel

    def __post_init__(self):
        for name in ("grid", "values", "actions", "sup_diffs"):
            arr = getattr(self, name)
            arr = np.asarray(arr)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @property
    def grid_points(self) -> int:
        return self.grid.shape[0]

    def value_at(self, t: float) -> float:
        return float(np.interp(float(t), self.grid, self.values))

    def action_at(self, t: float) -> int:
        """Policy lookup at pi(2) = t by nearest grid point."""
        g = self.grid.shape[0]
        j = int(float(t) * (g - 1) + 0.5)
        j = min(max(j, 0), g - 1)
        return int(self.actions[j])


def _filter_tables(model: AgentModel, grid: np.ndarray):
    """Exact sigma and successor pi(2) for both actions at each grid point.

    Returns (sigma, tnext) with shape (2, g); entries with sigma = 0 carry
    tnext = nan and are skipped in the backup (herding: that action has
    zero probability).
    """
    B, P = model.B, model.P
    D = _kernels.h_diff_grid(B, P, model.c, model.alpha, grid)
    acts = np.where(np.isnan(D) | (D <= 0.0), 1, 2).astype(np.int8)
    q1 = P[0, 0] * (1.0 - grid) + P[1, 0] * grid
    q2 = P[0, 1] * (1.0 - grid) + P[1, 1] * grid
    g = grid.shape[0]
    sigma = np.zeros((2, g))
    tnext = np.full((2, g), np.nan)
    for a in (1, 2):
        sel = (acts == a).astype(np.float64)
        r1 = sel @ B[0]
        r2 = sel @ B[1]
        num1 = r1 * q1
        num2 = r2 * q2
        s = num1 + num2
        ok = s > 0.0
        sigma[a - 1] = np.where(ok, s, 0.0)
        with np.errstate(invalid="ignore", divide="ignore"):
            tn = num2 / s
        tnext[a - 1, ok] = np.clip(tn[ok], 0.0, 1.0)
    return sigma, tnext


def _interp_weights(grid: np.ndarray, t: np.ndarray):
    """Segment index and fraction for linear interpolation on a uniform grid."""
    g = grid.shape[0]
    pos = np.where(np.isnan(t), 0.0, t) * (g - 1)
    idx = np.minimum(pos.astype(np.int64), g - 2)
    idx = np.maximum(idx, 0)
    frac = pos - idx
    return idx, frac


def _backup(values, stop_cost, cont_base, rho, sigma, idx, frac, herd):
    """One Bellman sweep; herd is the frozen-cell mask or None for drift."""
    succ = np.zeros_like(values)
    for a in range(2):
        v_next = values[idx[a]] * (1.0 - frac[a]) + values[idx[a] + 1] * frac[a]
        succ += sigma[a] * v_next
    if herd is not None:
        succ = np.where(herd, values, succ)
    return stop_cost, cont_base + rho * succ


def solve(
    model: AgentModel,
    obs: ObserverModel,
    grid_points: int = DEFAULT_GRID_POINTS,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    horizon: int | None = None,
    herding: str = "frozen",
) -> SolvedPolicy:
    """Value iteration (or backward induction when horizon is given).

    herding selects the continuation dynamics inside herding regions:
    "frozen" holds the belief fixed there, "drift" applies the filter map
    of the taken action everywhere (see module docstring).

    Infinite-horizon mode needs rho < 1; rho = 1 is accepted only with a
    finite horizon.  Non-convergence within max_iter returns a result
    flagged converged=False rather than raising.
    """
    if model.X != 2:
        raise ValidationError(f"solve supports X = 2 only, got X = {model.X}")
    if obs.X != model.X:
        raise ValidationError(f"observer f has length {obs.X} but model has X = {model.X}")
    if herding not in ("frozen", "drift"):
        raise ValidationError(f"herding must be 'frozen' or 'drift', got {herding!r}")
    grid_points = int(grid_points)
    if grid_points < 2:
        raise ValidationError(f"grid_points must be >= 2, got {grid_points}")
    if horizon is None and obs.rho >= 1.0:
        raise ValidationError("rho = 1 needs a finite horizon (use horizon=...)")
    if horizon is not None and int(horizon) < 1:
        raise ValidationError(f"horizon must be >= 1, got {horizon}")

    grid = np.linspace(0.0, 1.0, grid_points)
    sigma, tnext = _filter_tables(model, grid)
    idx0, frac0 = _interp_weights(grid, tnext[0])
    idx1, frac1 = _interp_weights(grid, tnext[1])
    idx = (idx0, idx1)
    frac = (frac0, frac1)
    herd = (sigma[0] <= 0.0) | (sigma[1] <= 0.0) if herding == "frozen" else None
    stop_cost = obs.f[0] * (1.0 - grid) + obs.f[1] * grid
    cont_base = obs.d * (1.0 - grid)
    rho = obs.rho

    if horizon is not None:
        values = stop_cost.copy()
        for _ in range(int(horizon)):
            s_op, c_op = _backup(values, stop_cost, cont_base, rho, sigma, idx, frac, herd)
            values = np.minimum(s_op, c_op)
        s_op, c_op = _backup(values, stop_cost, cont_base, rho, sigma, idx, frac, herd)
        actions = np.where(s_op <= c_op, STOP, CONTINUE).astype(np.int8)
        return SolvedPolicy(
            grid=grid, values=values, actions=actions, residual=float("nan"),
            iterations=int(horizon), converged=True, mode="finite",
            herding=herding, sup_diffs=np.zeros(0), model=model, obs=obs,
        )

    values = np.zeros(grid_points)
    diffs = []
    converged = False
    for _ in range(int(max_iter)):
        s_op, c_op = _backup(values, stop_cost, cont_base, rho, sigma, idx, frac, herd)
        new_values = np.minimum(s_op, c_op)
        diff = float(np.max(np.abs(new_values - values)))
        diffs.append(diff)
        values = new_values
        if diff <= tol:
            converged = True
            break
    s_op, c_op = _backup(values, stop_cost, cont_base, rho, sigma, idx, frac, herd)
    residual = float(np.max(np.abs(np.minimum(s_op, c_op) - values)))
    actions = np.where(s_op <= c_op, STOP, CONTINUE).astype(np.int8)
    return SolvedPolicy(
        grid=grid, values=values, actions=actions, residual=residual,
        iterations=len(diffs), converged=converged, mode="infinite",
        herding=herding, sup_diffs=np.asarray(diffs), model=model, obs=obs,
    )


def constant_policy(model: AgentModel, obs: ObserverModel, action: int,
                    grid_points: int = DEFAULT_GRID_POINTS) -> SolvedPolicy:
    """Degenerate policy that always stops (1) or always continues (2).

    values are filled with nan: they are not Bellman-consistent and exist
    only so the simulator can run baseline policies.
    """
    action = int(action)
    if action not in (STOP, CONTINUE):
        raise ValidationError(f"action must be 1 or 2, got {action}")
    grid = np.linspace(0.0, 1.0, int(grid_points))
    return SolvedPolicy(
        grid=grid,
        values=np.full(grid.shape, np.nan),
        actions=np.full(grid.shape, action, dtype=np.int8),
        residual=float("nan"), iterations=0, converged=True, mode="constant",
        herding="frozen", sup_diffs=np.zeros(0), model=model, obs=obs,
    )


@dataclass(frozen=True)
class StoppingSetReport:
    """Maximal stop intervals in pi(2), refined to THRESHOLD_TOL."""

    intervals: tuple
    thresholds: tuple
    is_convex: bool

    def summary(self) -> str:
        lines = [f"stop intervals: {len(self.intervals)}"]
        for lo, hi in self.intervals:
            lines.append(f"  [{lo:.6f}, {hi:.6f}]")
        lines.append(f"convex: {self.is_convex}")
        return "\n".join(lines)


def _operands_at(policy: SolvedPolicy, t: float):
    """Exact Bellman operands at off-grid t, interpolating stored V."""
    model, obs = policy.model, policy.obs
    tt = np.array([float(t)])
    sigma, tnext = _filter_tables(model, tt)
    stop_op = float(obs.f[0] * (1.0 - t) + obs.f[1] * t)
    cont_op = float(obs.d * (1.0 - t))
    herd = sigma[0, 0] <= 0.0 or sigma[1, 0] <= 0.0
    if policy.herding == "frozen" and herd:
        cont_op += obs.rho * policy.value_at(t)
    else:
        for a in range(2):
            if sigma[a, 0] > 0.0:
                cont_op += obs.rho * sigma[a, 0] * policy.value_at(tnext[a, 0])
    return stop_op, cont_op


def _stop_wins(policy: SolvedPolicy, t: float) -> bool:
    stop_op, cont_op = _operands_at(policy, t)
    return stop_op <= cont_op


def stopping_set_analysis(policy: SolvedPolicy, tol: float = THRESHOLD_TOL) -> StoppingSetReport:
    """Extract maximal stop intervals and refine interior endpoints.

    Each boundary between adjacent grid points with different actions is
    refined by bisection on the sign of (stop operand - continue operand),
    evaluated with the exact filter map and the stored interpolated V.
    """
    acts = np.asarray(policy.actions)
    grid = policy.grid
    g = grid.shape[0]
    stops = acts == STOP
    intervals = []
    i = 0
    while i < g:
        if not stops[i]:
            i += 1
            continue
        j = i
        while j + 1 < g and stops[j + 1]:
            j += 1
        lo = grid[i]
        hi = grid[j]
        if i > 0:
            lo = _bisect(policy, grid[i - 1], grid[i], want_stop_at_hi=True, tol=tol)
        if j + 1 < g:
            hi = _bisect(policy, grid[j], grid[j + 1], want_stop_at_hi=False, tol=tol)
        intervals.append((float(lo), float(hi)))
        i = j + 1
    thresholds = tuple(x for pair in intervals for x in pair)
    return StoppingSetReport(
        intervals=tuple(intervals),
        thresholds=thresholds,
        is_convex=len(intervals) <= 1,
    )


def _bisect(policy: SolvedPolicy, lo: float, hi: float, want_stop_at_hi: bool, tol: float) -> float:
    """Boundary of the stop region inside (lo, hi).

    want_stop_at_hi: the hi side stops (entering the region); otherwise
    the lo side stops (leaving it).  Returns the first point, up to tol,
    where the stop side begins.
    """
    lo = float(lo)
    hi = float(hi)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if _stop_wins(policy, mid) == want_stop_at_hi:
            hi = mid
        else:
            lo = mid
    return hi if want_stop_at_hi else lo


def value_jumps(policy: SolvedPolicy, factor: float = 10.0, window: int = 10,
                floor_frac: float = 1e-6):
    """Grid cells whose value step dwarfs the local variation.

    A cell i is a jump when |V[i+1]-V[i]| exceeds factor times the median
    step magnitude in a window around i (the cell itself excluded) and a
    small floor tied to the overall value range.
    """
    v = np.asarray(policy.values, dtype=np.float64)
    dv = np.abs(np.diff(v))
    n = dv.shape[0]
    span = float(v.max() - v.min()) if n else 0.0
    floor = floor_frac * max(span, 1e-30)
    jumps = []
    for i in range(n):
        lo = max(0, i - window)
        hi = min(n, i + window + 1)
        neighbors = np.concatenate([dv[lo:i], dv[i + 1:hi]])
        local = float(np.median(neighbors)) if neighbors.size else 0.0
        if dv[i] > factor * max(local, floor / factor) and dv[i] > floor:
            jumps.append((float(policy.grid[i]), float(policy.grid[i + 1]),
                          float(dv[i]), local))
    return jumps
