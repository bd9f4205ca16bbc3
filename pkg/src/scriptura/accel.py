"""Runtime selection between jitted and pure-numpy kernel paths.

The hot inner loops (geometry resampling, connected components, edit
distance) ship in two implementations: a loop form compiled with numba
and a vectorized numpy form. Set ``SCRIPTURA_NUMBA=0`` to force the
numpy path; by default the jitted path is used whenever numba imports
cleanly. ``benchmarks/bench_kernels.py`` times the two side by side.
"""

from __future__ import annotations

import os

_flag = os.environ.get("SCRIPTURA_NUMBA", "auto").strip().lower()

if _flag in {"0", "off", "false", "no"}:
    NUMBA_ENABLED = False
else:
    try:
        import numba  # noqa: F401

        NUMBA_ENABLED = True
    except ImportError:
        NUMBA_ENABLED = False


def jit(func):
    """Wrap ``func`` with numba's njit when the jitted path is active."""
    if NUMBA_ENABLED:
        from numba import njit

        return njit(cache=True)(func)
    return func
