"""Model containers and stochastic-order checks for the herding game.

Conventions used across the package:

* States are labeled ``1..X`` and state 1 is the post-change, absorbing
  state.  Belief vectors are plain float arrays indexed from zero, so
  ``pi[0]`` is the mass on state 1 and ``pi[-1]`` the mass on state X.
* Observations are labeled ``1..Y``.  Agent actions are 1 (buy) and
  2 (sell); observer actions are 1 (declare change) and 2 (continue).
* ``B``, ``P`` and ``c`` are row-indexed by state: ``B[x, y]`` is the
  probability of observation ``y+1`` in state ``x+1``, ``P[x, j]`` the
  transition probability, and ``c[x, a]`` the cost of action ``a+1``.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

ORDER_TOL = 1e-12
STOCHASTIC_TOL = 1e-9

# Return values of mlr_compare / fosd_compare.
EQUAL = "equal"
LEQ = "leq"
GEQ = "geq"
INCOMPARABLE = "incomparable"


def _as_matrix(value, name: str) -> np.ndarray:
    arr = np.array(value, dtype=np.float64)
    if arr.ndim != 2:
        raise ValidationError(f"{name} must be a 2-D matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} contains non-finite entries")
    return arr


def _check_stochastic(arr: np.ndarray, name: str) -> None:
    if np.any(arr < 0.0):
        row = int(np.argwhere(arr < 0.0)[0, 0]) + 1
        raise ValidationError(f"{name} row {row} has a negative entry")
    sums = arr.sum(axis=1)
    bad = np.abs(sums - 1.0) > STOCHASTIC_TOL
    if np.any(bad):
        row = int(np.argmax(bad)) + 1
        raise ValidationError(
            f"{name} row {row} sums to {sums[row - 1]!r}, expected 1"
        )


def belief_vector(pi, X: int | None = None) -> np.ndarray:
    """Coerce a Belief or array-like into a validated probability vector."""
    if isinstance(pi, Belief):
        arr = pi.pi
    else:
        arr = np.array(pi, dtype=np.float64)
        if arr.ndim != 1:
            raise ValidationError(f"belief must be 1-D, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValidationError("belief contains non-finite entries")
        if np.any(arr < 0.0):
            raise ValidationError("belief has a negative entry")
        if abs(arr.sum() - 1.0) > STOCHASTIC_TOL:
            raise ValidationError(f"belief sums to {arr.sum()!r}, expected 1")
    if X is not None and arr.shape[0] != X:
        raise ValidationError(f"belief has {arr.shape[0]} entries, model has X={X}")
    return arr


@dataclass(frozen=True, eq=False)
class Belief:
    """Probability vector over states; entries sum to 1 within 1e-9."""

    pi: np.ndarray

    def __post_init__(self):
        arr = belief_vector(np.asarray(self.pi))
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "pi", arr)

    @property
    def X(self) -> int:
        return self.pi.shape[0]

    def __len__(self) -> int:
        return self.pi.shape[0]

    def __getitem__(self, idx):
        return self.pi[idx]


@dataclass(frozen=True, eq=False)
class AgentModel:
    """Observation, transition and cost structure for one agent step.

    alpha is the CVaR risk level in (0, 1]; alpha = 1 recovers the
    risk-neutral agent.
    """

    B: np.ndarray
    P: np.ndarray
    c: np.ndarray
    alpha: float

    def __post_init__(self):
        B = _as_matrix(self.B, "B")
        P = _as_matrix(self.P, "P")
        c = _as_matrix(self.c, "c")
        X = B.shape[0]
        if X < 2:
            raise ValidationError(f"B must have at least 2 states, got {X}")
        if B.shape[1] < 2:
            raise ValidationError(f"B must have at least 2 observations, got {B.shape[1]}")
        if P.shape != (X, X):
            raise ValidationError(f"P has shape {P.shape}, expected ({X}, {X})")
        if c.shape != (X, 2):
            raise ValidationError(f"c has shape {c.shape}, expected ({X}, 2)")
        _check_stochastic(B, "B")
        _check_stochastic(P, "P")
        alpha = float(self.alpha)
        if not 0.0 < alpha <= 1.0:
            raise ValidationError(f"alpha must be in (0, 1], got {alpha!r}")
        for arr in (B, P, c):
            arr.flags.writeable = False
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "P", P)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "alpha", alpha)

    @property
    def X(self) -> int:
        return self.B.shape[0]

    @property
    def Y(self) -> int:
        return self.B.shape[1]

    @property
    def A(self) -> int:
        return 2

    def with_alpha(self, alpha: float) -> "AgentModel":
        return AgentModel(B=self.B, P=self.P, c=self.c, alpha=alpha)

    def key(self) -> str:
        h = hashlib.sha256()
        h.update(np.array([self.X, self.Y], dtype=np.int64).tobytes())
        for arr in (self.B, self.P, self.c):
            h.update(np.ascontiguousarray(arr).tobytes())
        h.update(np.float64(self.alpha).tobytes())
        return h.hexdigest()


def is_tp2(M, tol: float = ORDER_TOL) -> bool:
    """True when every 2x2 minor of M (all row and column pairs) is >= -tol."""
    A = np.asarray(M, dtype=np.float64)
    n, m = A.shape
    for i in range(n - 1):
        for k in range(i + 1, n):
            # minor over columns j < l: A[i,j] A[k,l] - A[i,l] A[k,j]
            outer_jl = np.outer(A[i], A[k])
            minors = outer_jl - outer_jl.T
            jj, ll = np.triu_indices(m, k=1)
            if np.any(minors[jj, ll] < -tol):
                return False
    return True


def mlr_compare(p1, p2, tol: float = ORDER_TOL) -> str:
    """Compare beliefs in the likelihood-ratio order.

    Returns "leq" when p2 dominates p1 (p2 puts relatively more mass on
    high state indices), "geq" for the reverse, "equal" when both hold,
    "incomparable" otherwise.  Orientation fixed against the FOSD check:
    mlr_compare(p, q) == "leq" implies fosd_compare(p, q) == "leq".
    """
    a = belief_vector(p1)
    b = belief_vector(p2)
    if a.shape != b.shape:
        raise ValidationError("beliefs have different lengths")
    ii, jj = np.triu_indices(a.shape[0], k=1)
    # leq: b[i] a[j] <= a[i] b[j] for all i < j
    leq = bool(np.all(b[ii] * a[jj] <= a[ii] * b[jj] + tol))
    geq = bool(np.all(a[ii] * b[jj] <= b[ii] * a[jj] + tol))
    if leq and geq:
        return EQUAL
    if leq:
        return LEQ
    if geq:
        return GEQ
    return INCOMPARABLE


def fosd_compare(p1, p2, tol: float = ORDER_TOL) -> str:
    """Compare beliefs in first-order stochastic dominance via tail sums."""
    a = belief_vector(p1)
    b = belief_vector(p2)
    if a.shape != b.shape:
        raise ValidationError("beliefs have different lengths")
    ta = np.cumsum(a[::-1])[::-1]
    tb = np.cumsum(b[::-1])[::-1]
    leq = bool(np.all(ta <= tb + tol))
    geq = bool(np.all(tb <= ta + tol))
    if leq and geq:
        return EQUAL
    if leq:
        return LEQ
    if geq:
        return GEQ
    return INCOMPARABLE


def _belief_scan(X: int, budget: int = 2500) -> np.ndarray:
    """Deterministic grid over the belief simplex used by diagnostics."""
    if X == 2:
        t = np.linspace(0.0, 1.0, 201)
        return np.column_stack([1.0 - t, t])
    # largest lattice resolution whose point count stays within budget
    from math import comb

    m = 1
    while comb(m + X, X - 1) <= budget:  # count at resolution m + 1
        m += 1
    points = []

    def compositions(total, parts, prefix):
        if parts == 1:
            points.append(prefix + [total])
            return
        for v in range(total + 1):
            compositions(total - v, parts - 1, prefix + [v])

    compositions(m, X, [])
    return np.asarray(points, dtype=np.float64) / float(m)


def _alpha_condition_min(model: AgentModel) -> float:
    """Smallest 1 - eta_y(X) over a scanned grid of (belief, y) pairs.

    eta_y is the private posterior after observing y from the predicted
    belief P' pi; pairs with zero observation probability are skipped.
    """
    scan = _belief_scan(model.X)
    q = scan @ model.P  # rows: predicted beliefs
    best = 1.0
    for y in range(model.Y):
        w = q * model.B[:, y]
        norm = w.sum(axis=1)
        ok = norm > 0.0
        if not np.any(ok):
            continue
        eta_last = w[ok, -1] / norm[ok]
        best = min(best, float(np.min(1.0 - eta_last)))
    return best


@dataclass(frozen=True)
class AssumptionReport:
    """Diagnostic flags for the structural assumptions.

    c_submodular_literal checks c(x,2)-c(x,1) non-decreasing in x;
    c_submodular_reversed checks the opposite direction.  Both are
    reported because published examples satisfy only the reversed form.
    alpha_condition_min is the smallest 1 - eta_y(X) seen on a belief
    scan; alpha below it means the tail condition holds nowhere.
    """

    b_is_tp2: bool
    p_is_tp2: bool
    c_submodular_literal: bool
    c_submodular_reversed: bool
    alpha_condition_min: float

    @property
    def a1_holds(self) -> bool:
        return self.b_is_tp2 and self.p_is_tp2

    def summary(self) -> str:
        lines = [
            f"B is TP2:                 {self.b_is_tp2}",
            f"P is TP2:                 {self.p_is_tp2}",
            f"c submodular (literal):   {self.c_submodular_literal}",
            f"c submodular (reversed):  {self.c_submodular_reversed}",
            f"alpha condition min:      {self.alpha_condition_min:.6f}",
        ]
        return "\n".join(lines)


def validate_model(model: AgentModel, tol: float = ORDER_TOL) -> AssumptionReport:
    """Re-check invariants and report assumption flags for a model."""
    _check_stochastic(model.B, "B")
    _check_stochastic(model.P, "P")
    diffs = model.c[:, 1] - model.c[:, 0]
    step = np.diff(diffs)
    return AssumptionReport(
        b_is_tp2=is_tp2(model.B, tol),
        p_is_tp2=is_tp2(model.P, tol),
        c_submodular_literal=bool(np.all(step >= -tol)),
        c_submodular_reversed=bool(np.all(step <= tol)),
        alpha_condition_min=_alpha_condition_min(model),
    )
