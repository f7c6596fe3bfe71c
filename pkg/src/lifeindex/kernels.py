"""Backend selection for the hot kernels.

The compiled extension ``lifeindex._kernels`` is used when it imports;
otherwise, or when ``LIFEINDEX_PURE_PYTHON=1`` is set, the pure-Python
fallback in ``lifeindex._pykernels`` is used. ``BACKEND`` names the choice.
"""

from __future__ import annotations

import os

from . import _pykernels as python_backend
from ._pykernels import GROUPS, N_PARAMS, STATUS_NO_CANDIDATE, STATUS_OK  # noqa: F401

compiled_backend = None
if os.environ.get("LIFEINDEX_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as compiled_backend  # type: ignore[no-redef]
    except ImportError:  # extension not built
        compiled_backend = None

_active = compiled_backend if compiled_backend is not None else python_backend
BACKEND = "cython" if compiled_backend is not None else "python"

shortage_block_sums = _active.shortage_block_sums
components_flat = _active.components_flat
objective_flat = _active.objective_flat
greedy_counts = _active.greedy_counts
grid_argmax = _active.grid_argmax


def available_backends() -> dict:
    out = {"python": python_backend}
    if compiled_backend is not None:
        out["cython"] = compiled_backend
    return out
