"""Time the hot kernels on both backends and print a comparison table.

Run without arguments. The script re-executes itself once per backend
(SCRIPTURA_NUMBA=1 and =0) so each process binds its kernel path at
import time, then merges the two timing sets. Jit compilation happens
during the warmup call and is not counted.
"""

from __future__ import annotations

import json
import os
import subprocess
import sys
import time

import numpy as np

REPS = {
    "rotate_nn": 20,
    "shear_rows": 50,
    "label_components": 10,
    "levenshtein_codes": 30,
}


def _workloads():
    rng = np.random.default_rng(17)
    page = (rng.random((400, 600)) < 0.12).astype(np.uint8)
    speckle = (rng.random((512, 512)) < 0.10).astype(np.uint8)
    a = rng.integers(0, 23, size=600).astype(np.int32)
    b = rng.integers(0, 23, size=620).astype(np.int32)
    from scriptura.kernels import (
        label_components,
        levenshtein_codes,
        rotate_nn,
        shear_rows,
    )

    return {
        "rotate_nn": lambda: rotate_nn(page, 3.0),
        "shear_rows": lambda: shear_rows(page, 8.0),
        "label_components": lambda: label_components(speckle),
        "levenshtein_codes": lambda: levenshtein_codes(a, b),
    }


def _time_all() -> dict[str, float]:
    results = {}
    for name, call in _workloads().items():
        call()  # warmup; compiles the jitted path
        best = float("inf")
        for _ in range(REPS[name]):
            t0 = time.perf_counter()
            call()
            best = min(best, time.perf_counter() - t0)
        results[name] = best * 1000.0
    return results


def _child() -> None:
    from scriptura.accel import NUMBA_ENABLED

    wanted = os.environ["SCRIPTURA_NUMBA"] == "1"
    if wanted and not NUMBA_ENABLED:
        raise SystemExit("numba path requested but numba is unavailable")
    print(json.dumps(_time_all()))


def _run(flag: str) -> dict[str, float]:
    env = dict(os.environ, SCRIPTURA_NUMBA=flag)
    out = subprocess.run(
        [sys.executable, os.path.abspath(__file__), "--child"],
        env=env,
        check=True,
        capture_output=True,
        text=True,
    )
    return json.loads(out.stdout.strip().splitlines()[-1])


def main() -> None:
    jitted = _run("1")
    plain = _run("0")
    width = max(len(k) for k in REPS)
    print(f"{'kernel':<{width}}  {'numba ms':>10}  {'numpy ms':>10}  {'speedup':>8}")
    for name in REPS:
        ratio = plain[name] / jitted[name] if jitted[name] > 0 else float("inf")
        print(
            f"{name:<{width}}  {jitted[name]:>10.3f}  {plain[name]:>10.3f}  {ratio:>7.1f}x"
        )


if __name__ == "__main__":
    if "--child" in sys.argv:
        _child()
    else:
        main()
