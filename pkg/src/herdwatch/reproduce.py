"""Built-in reproduction targets with embedded parameter sets.

Each target writes deterministic CSV artifacts plus a summary that
states pass/fail against the package's acceptance thresholds.  Nothing
here draws random numbers, so repeated runs emit byte-identical files.

Targets:

* fig1, fig2: learning-region sweep over alpha (fig2 swaps in a leaky
  transition matrix); emits alpha/boundary/width rows.
* fig3: solves the double-threshold example and emits the value/policy
  grid plus a stopping-set report.
* skype, ipod: solve the two case-study parameter sets at rho = 0.9,
  check the first stop interval's upper threshold against its target,
  and emit a rho-sensitivity table.
"""

from __future__ import annotations

import os

import numpy as np

from .config import write_csv
from .detector import ObserverModel, solve, stopping_set_analysis, value_jumps
from .errors import ValidationError
from .model import AgentModel
from .socialfilter import learning_region_sweep

TARGETS = ("fig1", "fig2", "fig3", "skype", "ipod")

SWEEP_ALPHAS = tuple(round(0.1 * k, 1) for k in range(1, 11))
SENSITIVITY_RHOS = (0.85, 0.9, 0.95)

_REGION_B = [[0.8, 0.2], [0.3, 0.7]]
_REGION_C = [[1.0, 2.0], [3.0, 0.5]]

_CASE_B = [[0.7, 0.3], [0.3, 0.7]]
_CASE_C = [[0.5, 1.0], [1.0, 0.5]]
_CASE_ALPHA = 0.45


def _region_model(P, alpha):
    return AgentModel(B=np.array(_REGION_B), P=np.array(P, dtype=np.float64),
                      c=np.array(_REGION_C), alpha=alpha)


def _fig3_setup():
    model = AgentModel(B=np.array(_REGION_B), P=np.array([[1.0, 0.0], [0.06, 0.94]]),
                       c=np.array([[1.0, 2.0], [2.5, 0.5]]), alpha=0.8)
    obs = ObserverModel(f=np.array([0.0, 3.0]), d=1.25, rho=0.9)
    return model, obs


def _case_setup(name: str, rho: float):
    if name == "skype":
        P = [[1.0, 0.0], [0.04, 0.96]]
        f, d = [0.0, 2.0], 0.8
    else:
        P = [[1.0, 0.0], [0.11, 0.89]]
        f, d = [0.0, 1.8], 0.95
    model = AgentModel(B=np.array(_CASE_B), P=np.array(P),
                       c=np.array(_CASE_C), alpha=_CASE_ALPHA)
    obs = ObserverModel(f=np.array(f), d=d, rho=rho)
    return model, obs


CASE_TARGETS = {"skype": 0.354, "ipod": 0.368}
THRESHOLD_TOLERANCE = 0.02


def region_sweep_rows(P, alphas=SWEEP_ALPHAS):
    """Learning-region boundaries and width per alpha, alpha descending."""
    model = _region_model(P, 1.0)
    return learning_region_sweep(model, sorted(alphas, reverse=True))


def widths_nonincreasing(rows, slack: float = 1e-9) -> bool:
    """True when width never grows as alpha decreases (rows alpha-descending)."""
    widths = [row.width for row in rows]
    return all(b <= a + slack for a, b in zip(widths, widths[1:]))


def first_threshold(report):
    """Upper endpoint of the stop interval containing pi(2) = 0, or None."""
    if report.intervals and report.intervals[0][0] == 0.0:
        return report.intervals[0][1]
    return None


def _write_region_target(name: str, P, out_dir: str) -> str:
    rows = region_sweep_rows(P)
    write_csv(
        os.path.join(out_dir, f"{name}_regions.csv"),
        "alpha,pi_double_star,pi_star,width,crossings_y1,crossings_y2",
        ((r.alpha, r.pi_double_star, r.pi_star, r.width,
          len(r.crossings_y1), len(r.crossings_y2)) for r in rows),
    )
    lines = [f"target: {name}"]
    lines.append("width by alpha (descending): "
                 + ", ".join(f"{r.alpha:.1f}:{r.width:.4f}" for r in rows))
    if name == "fig1":
        ok = widths_nonincreasing(rows)
        lines.append("check width non-increasing as alpha decreases: "
                     + ("PASS" if ok else "FAIL"))
        if not ok:
            lines.append("  width peaks at an interior alpha; see the CSV for the full column")
    else:
        zero = [r.alpha for r in rows if r.alpha <= 0.5 and r.width == 0.0]
        lines.append("check width reaches 0 for some alpha <= 0.5: "
                     + ("PASS" if zero else "FAIL"))
        if not zero:
            small = min(r.width for r in rows if r.alpha <= 0.5)
            lines.append(f"  smallest width over alpha <= 0.5 is {small:.4f}, never 0")
    return "\n".join(lines)


def _write_policy_csv(path: str, policy):
    write_csv(path, "pi2,value,action",
              ((float(t), float(v), int(a))
               for t, v, a in zip(policy.grid, policy.values, policy.actions)))


def _write_fig3(out_dir: str, grid_points: int, tol: float) -> str:
    model, obs = _fig3_setup()
    policy = solve(model, obs, grid_points=grid_points, tol=tol)
    report = stopping_set_analysis(policy)
    _write_policy_csv(os.path.join(out_dir, "fig3_value_policy.csv"), policy)
    with open(os.path.join(out_dir, "fig3_stopping.txt"), "w",
              encoding="utf-8", newline="\n") as fh:
        fh.write(report.summary() + "\n")
    jumps = value_jumps(policy)
    lines = ["target: fig3", report.summary()]
    if jumps:
        lo, hi, dv, local = max(jumps, key=lambda j: j[2])
        lines.append(f"value jumps: {len(jumps)} (largest {dv:.6f} at "
                     f"pi2 in [{lo:.6f}, {hi:.6f}], local step {local:.6f})")
    else:
        lines.append("value jumps: none detected")
    lines.append("check stop intervals >= 2: "
                 + ("PASS" if len(report.intervals) >= 2 else "FAIL"))
    lines.append("check value jump > 10x local variation: "
                 + ("PASS" if jumps else "FAIL"))
    return "\n".join(lines)


def _write_case(name: str, out_dir: str, grid_points: int, tol: float) -> str:
    target = CASE_TARGETS[name]
    thresholds = {}
    for rho in SENSITIVITY_RHOS:
        model, obs = _case_setup(name, rho)
        policy = solve(model, obs, grid_points=grid_points, tol=tol)
        report = stopping_set_analysis(policy)
        thresholds[rho] = (first_threshold(report), policy, report)
    thr, policy, report = thresholds[0.9]
    _write_policy_csv(os.path.join(out_dir, f"{name}_value_policy.csv"), policy)
    with open(os.path.join(out_dir, f"{name}_stopping.txt"), "w",
              encoding="utf-8", newline="\n") as fh:
        fh.write(report.summary() + "\n")
    write_csv(os.path.join(out_dir, f"{name}_sensitivity.csv"), "rho,threshold",
              ((rho, thresholds[rho][0]) for rho in SENSITIVITY_RHOS
               if thresholds[rho][0] is not None))
    lines = [f"target: {name}"]
    if thr is None:
        lines.append("no stop interval contains pi(2) = 0")
        ok = False
    else:
        lines.append(f"threshold (rho = 0.9): {thr:.6f}")
        ok = abs(thr - target) <= THRESHOLD_TOLERANCE
    lines.append(f"check |threshold - {target}| <= {THRESHOLD_TOLERANCE}: "
                 + ("PASS" if ok else f"FAIL (off by {abs(thr - target):.6f})" if thr is not None else "FAIL"))
    if not ok:
        sens = "; ".join(
            f"rho = {rho} -> {thresholds[rho][0]:.6f}" if thresholds[rho][0] is not None
            else f"rho = {rho} -> no interval at 0"
            for rho in SENSITIVITY_RHOS)
        lines.append("sensitivity: " + sens)
    return "\n".join(lines)


def run_reproduce(target: str, out_dir: str, grid_points: int = 2001,
                  tol: float = 1e-9) -> str:
    """Run one target, write its artifacts under out_dir, return the summary."""
    if target not in TARGETS:
        raise ValidationError(f"unknown target {target!r}; expected one of {', '.join(TARGETS)}")
    os.makedirs(out_dir, exist_ok=True)
    if target == "fig1":
        summary = _write_region_target("fig1", [[1.0, 0.0], [0.0, 1.0]], out_dir)
    elif target == "fig2":
        summary = _write_region_target("fig2", [[1.0, 0.0], [0.1, 0.9]], out_dir)
    elif target == "fig3":
        summary = _write_fig3(out_dir, grid_points, tol)
    else:
        summary = _write_case(target, out_dir, grid_points, tol)
    with open(os.path.join(out_dir, f"{target}_summary.txt"), "w",
              encoding="utf-8", newline="\n") as fh:
        fh.write(summary + "\n")
    return summary
