"""Hot-kernel backend selection.

The compiled Cython backend (_fastcore) is preferred when built; the
pure-Python backend (_pycore) is the reference implementation and the
fallback.  Set HERDWATCH_BACKEND=python or HERDWATCH_BACKEND=compiled
to force a choice at import time.  Both backends expose the same three
functions with identical semantics and consume identical RNG streams;
see _pycore for the contract.
"""

from __future__ import annotations

import os

from . import _pycore as python_backend

try:
    from . import _fastcore as compiled_backend  # type: ignore[attr-defined]
except ImportError:
    compiled_backend = None

_requested = os.environ.get("HERDWATCH_BACKEND", "auto")
if _requested == "python":
    active = python_backend
elif _requested == "compiled":
    if compiled_backend is None:
        raise ImportError(
            "HERDWATCH_BACKEND=compiled but the herdwatch._kernels._fastcore "
            "extension is not built; reinstall with a C compiler available"
        )
    active = compiled_backend
elif _requested == "auto":
    active = compiled_backend if compiled_backend is not None else python_backend
else:
    raise ImportError(f"unknown HERDWATCH_BACKEND value {_requested!r}")

BACKEND = active.BACKEND_NAME

h_diff_grid = active.h_diff_grid
replay_beliefs = active.replay_beliefs
run_episode = active.run_episode


def available_backends():
    """Name -> module map of importable kernel backends."""
    out = {"python": python_backend}
    if compiled_backend is not None:
        out["compiled"] = compiled_backend
    return out
