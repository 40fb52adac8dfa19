"""Experiment configuration (JSON) and CSV input/output.

A config document is a single JSON object with blocks:

* model (required): B, P, c, alpha, optionally X and Y as cross-checks.
* observer (optional): f, d, rho; commands that need an observer fail
  with a field-level error when the block is missing.  rho omitted
  means rho = 1.0, which the solver accepts only with a finite horizon.
* solver (optional): grid_points, tol, max_iter, horizon, herding.
* sim (optional): replicates, horizon, seed, pi0.
* paths (optional): input_csv, out_dir.

Unknown keys anywhere are rejected; every error names the offending
key's path (e.g. model.B[1]).  Matrix row indices in paths are
0-based.

All CSV output uses a comma separator, a header row, LF line endings,
and shortest round-trip decimal formatting for floats, so repeated runs
are byte-identical.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .detector import DEFAULT_GRID_POINTS, DEFAULT_MAX_ITER, DEFAULT_TOL, ObserverModel
from .errors import ValidationError
from .model import STOCHASTIC_TOL, AgentModel
from .sim import DEFAULT_PI0

ACTIONS_CSV_HEADER = "t,action"
TRAJECTORY_CSV_HEADER = "t,x,y,a,pi1,pi2,u"


@dataclass(frozen=True)
class SolverSettings:
    grid_points: int = DEFAULT_GRID_POINTS
    tol: float = DEFAULT_TOL
    max_iter: int = DEFAULT_MAX_ITER
    horizon: int | None = None
    herding: str = "frozen"


@dataclass(frozen=True)
class SimSettings:
    replicates: int = 1000
    horizon: int = 1000
    seed: int = 0
    pi0: tuple = tuple(DEFAULT_PI0)


@dataclass(frozen=True)
class Paths:
    input_csv: str | None = None
    out_dir: str | None = None


@dataclass(frozen=True)
class ExperimentConfig:
    model: AgentModel
    observer: ObserverModel | None = None
    solver: SolverSettings = field(default_factory=SolverSettings)
    sim: SimSettings = field(default_factory=SimSettings)
    paths: Paths = field(default_factory=Paths)

    def require_observer(self) -> ObserverModel:
        if self.observer is None:
            raise ValidationError("observer: block is required for this command")
        return self.observer


def _reject_unknown(block: dict, allowed, path: str):
    for key in block:
        if key not in allowed:
            raise ValidationError(f"{path}.{key}: unknown key")


def _get(block: dict, key: str, path: str, required: bool = True, default=None):
    if key not in block:
        if required:
            raise ValidationError(f"{path}.{key}: missing required field")
        return default
    return block[key]


def _as_float(value, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationError(f"{path}: expected a number, got {type(value).__name__}")
    return float(value)


def _as_int(value, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ValidationError(f"{path}: expected an integer, got {type(value).__name__}")
    return int(value)


def _as_matrix(value, path: str) -> np.ndarray:
    if not isinstance(value, list) or not value or not all(isinstance(r, list) for r in value):
        raise ValidationError(f"{path}: expected a list of rows")
    width = len(value[0])
    for i, row in enumerate(value):
        if len(row) != width:
            raise ValidationError(f"{path}[{i}]: row length {len(row)} != {width}")
        for j, cell in enumerate(row):
            if isinstance(cell, bool) or not isinstance(cell, (int, float)):
                raise ValidationError(f"{path}[{i}][{j}]: expected a number")
    return np.array(value, dtype=np.float64)


def _as_vector(value, path: str) -> np.ndarray:
    if not isinstance(value, list) or not value:
        raise ValidationError(f"{path}: expected a non-empty list")
    for j, cell in enumerate(value):
        if isinstance(cell, bool) or not isinstance(cell, (int, float)):
            raise ValidationError(f"{path}[{j}]: expected a number")
    return np.array(value, dtype=np.float64)


def _check_rows_stochastic(mat: np.ndarray, path: str):
    for i, row in enumerate(mat):
        if np.any(row < -STOCHASTIC_TOL):
            raise ValidationError(f"{path}[{i}]: negative entry")
        if abs(float(row.sum()) - 1.0) > STOCHASTIC_TOL:
            raise ValidationError(f"{path}[{i}]: row sums to {float(row.sum())!r}, not 1")


def _parse_model(block, path: str) -> AgentModel:
    if not isinstance(block, dict):
        raise ValidationError(f"{path}: expected an object")
    _reject_unknown(block, {"X", "Y", "B", "P", "c", "alpha"}, path)
    B = _as_matrix(_get(block, "B", path), f"{path}.B")
    P = _as_matrix(_get(block, "P", path), f"{path}.P")
    c = _as_matrix(_get(block, "c", path), f"{path}.c")
    alpha = _as_float(_get(block, "alpha", path), f"{path}.alpha")
    _check_rows_stochastic(B, f"{path}.B")
    _check_rows_stochastic(P, f"{path}.P")
    if "X" in block:
        x = _as_int(block["X"], f"{path}.X")
        if x != B.shape[0]:
            raise ValidationError(f"{path}.X: {x} does not match B's {B.shape[0]} rows")
    if "Y" in block:
        y = _as_int(block["Y"], f"{path}.Y")
        if y != B.shape[1]:
            raise ValidationError(f"{path}.Y: {y} does not match B's {B.shape[1]} columns")
    try:
        return AgentModel(B=B, P=P, c=c, alpha=alpha)
    except ValidationError as exc:
        raise ValidationError(f"{path}: {exc}") from exc


def _parse_observer(block, path: str) -> ObserverModel:
    if not isinstance(block, dict):
        raise ValidationError(f"{path}: expected an object")
    _reject_unknown(block, {"f", "d", "rho"}, path)
    f = _as_vector(_get(block, "f", path), f"{path}.f")
    d = _as_float(_get(block, "d", path), f"{path}.d")
    rho = _get(block, "rho", path, required=False, default=1.0)
    rho = _as_float(rho, f"{path}.rho")
    try:
        return ObserverModel(f=f, d=d, rho=rho)
    except ValidationError as exc:
        raise ValidationError(f"{path}: {exc}") from exc


def _parse_solver(block, path: str) -> SolverSettings:
    if not isinstance(block, dict):
        raise ValidationError(f"{path}: expected an object")
    _reject_unknown(block, {"grid_points", "tol", "max_iter", "horizon", "herding"}, path)
    horizon = block.get("horizon")
    if horizon is not None:
        horizon = _as_int(horizon, f"{path}.horizon")
        if horizon < 1:
            raise ValidationError(f"{path}.horizon: must be >= 1, got {horizon}")
    herding = block.get("herding", "frozen")
    if herding not in ("frozen", "drift"):
        raise ValidationError(f"{path}.herding: must be 'frozen' or 'drift', got {herding!r}")
    out = SolverSettings(
        grid_points=_as_int(block.get("grid_points", DEFAULT_GRID_POINTS), f"{path}.grid_points"),
        tol=_as_float(block.get("tol", DEFAULT_TOL), f"{path}.tol"),
        max_iter=_as_int(block.get("max_iter", DEFAULT_MAX_ITER), f"{path}.max_iter"),
        horizon=horizon,
        herding=herding,
    )
    if out.grid_points < 2:
        raise ValidationError(f"{path}.grid_points: must be >= 2, got {out.grid_points}")
    if not (out.tol > 0.0):
        raise ValidationError(f"{path}.tol: must be positive, got {out.tol}")
    if out.max_iter < 1:
        raise ValidationError(f"{path}.max_iter: must be >= 1, got {out.max_iter}")
    return out


def _parse_sim(block, path: str, X: int) -> SimSettings:
    if not isinstance(block, dict):
        raise ValidationError(f"{path}: expected an object")
    _reject_unknown(block, {"replicates", "horizon", "seed", "pi0"}, path)
    pi0 = block.get("pi0")
    if pi0 is not None:
        vec = _as_vector(pi0, f"{path}.pi0")
        if vec.shape[0] != X:
            raise ValidationError(f"{path}.pi0: length {vec.shape[0]} != X = {X}")
        if np.any(vec < -STOCHASTIC_TOL) or abs(float(vec.sum()) - 1.0) > STOCHASTIC_TOL:
            raise ValidationError(f"{path}.pi0: entries must be a probability vector")
        pi0 = tuple(float(v) for v in vec)
    else:
        pi0 = tuple(DEFAULT_PI0) if X == 2 else tuple(1.0 / X for _ in range(X))
    out = SimSettings(
        replicates=_as_int(block.get("replicates", 1000), f"{path}.replicates"),
        horizon=_as_int(block.get("horizon", 1000), f"{path}.horizon"),
        seed=_as_int(block.get("seed", 0), f"{path}.seed"),
        pi0=pi0,
    )
    if out.replicates < 1:
        raise ValidationError(f"{path}.replicates: must be >= 1, got {out.replicates}")
    if out.horizon < 1:
        raise ValidationError(f"{path}.horizon: must be >= 1, got {out.horizon}")
    return out


def _parse_paths(block, path: str) -> Paths:
    if not isinstance(block, dict):
        raise ValidationError(f"{path}: expected an object")
    _reject_unknown(block, {"input_csv", "out_dir"}, path)
    for key in ("input_csv", "out_dir"):
        value = block.get(key)
        if value is not None and not isinstance(value, str):
            raise ValidationError(f"{path}.{key}: expected a string")
    return Paths(input_csv=block.get("input_csv"), out_dir=block.get("out_dir"))


def parse_config(text: str) -> ExperimentConfig:
    """Parse and fully validate a JSON config document."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ValidationError("config root must be an object")
    _reject_unknown(doc, {"model", "observer", "solver", "sim", "paths"}, "config")
    if "model" not in doc:
        raise ValidationError("config.model: missing required block")
    model = _parse_model(doc["model"], "model")
    observer = _parse_observer(doc["observer"], "observer") if "observer" in doc else None
    if observer is not None and observer.X != model.X:
        raise ValidationError(f"observer.f: length {observer.X} != model X = {model.X}")
    solver = _parse_solver(doc.get("solver", {}), "solver")
    sim = _parse_sim(doc.get("sim", {}), "sim", model.X)
    paths = _parse_paths(doc.get("paths", {}), "paths")
    return ExperimentConfig(model=model, observer=observer, solver=solver,
                            sim=sim, paths=paths)


def serialize(config: ExperimentConfig) -> str:
    """Canonical JSON for a config; serialize(parse_config(s)) is idempotent."""
    doc = {
        "model": {
            "X": config.model.X,
            "Y": config.model.Y,
            "B": config.model.B.tolist(),
            "P": config.model.P.tolist(),
            "c": config.model.c.tolist(),
            "alpha": config.model.alpha,
        },
        "solver": {
            "grid_points": config.solver.grid_points,
            "tol": config.solver.tol,
            "max_iter": config.solver.max_iter,
            "horizon": config.solver.horizon,
            "herding": config.solver.herding,
        },
        "sim": {
            "replicates": config.sim.replicates,
            "horizon": config.sim.horizon,
            "seed": config.sim.seed,
            "pi0": list(config.sim.pi0),
        },
        "paths": {
            "input_csv": config.paths.input_csv,
            "out_dir": config.paths.out_dir,
        },
    }
    if config.observer is not None:
        doc["observer"] = {
            "f": config.observer.f.tolist(),
            "d": config.observer.d,
            "rho": config.observer.rho,
        }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def load_config(path: str) -> ExperimentConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


def format_cell(value) -> str:
    """Shortest exact decimal for floats; plain digits for integers."""
    if isinstance(value, (bool, np.bool_)):
        raise ValidationError("booleans do not belong in CSV output")
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def write_csv(path: str, header: str, rows):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(format_cell(cell) for cell in row) + "\n")


def write_trajectory_csv(path: str, traj):
    """One row per step k = 1..steps; the initial state and belief are
    metadata, not rows, since they carry no observation or action."""
    rows = (
        (k, int(traj.xs[k]), int(traj.ys[k - 1]), int(traj.actions[k - 1]),
         float(traj.pis[k, 0]), float(traj.pis[k, 1]), int(traj.us[k - 1]))
        for k in range(1, traj.steps + 1)
    )
    write_csv(path, TRAJECTORY_CSV_HEADER, rows)


def read_actions_csv(path: str) -> np.ndarray:
    """Parse a `t,action` table into a 1-d action array (t must be 1..T)."""
    with open(path, encoding="utf-8") as fh:
        lines = [line.rstrip("\n").rstrip("\r") for line in fh if line.strip()]
    if not lines:
        raise ValidationError(f"{path}: empty actions file")
    if lines[0].replace(" ", "") != ACTIONS_CSV_HEADER:
        raise ValidationError(f"{path}: expected header '{ACTIONS_CSV_HEADER}', got {lines[0]!r}")
    actions = []
    for n, line in enumerate(lines[1:], start=2):
        parts = line.split(",")
        if len(parts) != 2:
            raise ValidationError(f"{path}:{n}: expected 't,action', got {line!r}")
        try:
            t = int(parts[0])
            a = int(parts[1])
        except ValueError as exc:
            raise ValidationError(f"{path}:{n}: non-integer field in {line!r}") from exc
        if t != n - 1:
            raise ValidationError(f"{path}:{n}: t must run 1..T in order, got {t}")
        actions.append(a)
    if not actions:
        raise ValidationError(f"{path}: no action rows")
    return np.array(actions, dtype=np.int64)
