"""Timing comparison of the compiled kernels against their pure-Python twins.

Run from the repository root:

    python3 benchmarks/bench_core.py

Each kernel is exercised through the public API in two subprocesses, one per
backend (GRAPHPOT_NO_EXT=1 selects the fallback), so the import-time backend
choice is respected. Outputs one line per (kernel, backend) with wall time
and the speedup factor.
"""

import json
import os
import subprocess
import sys

DRIVER = r"""
import json
import time
import numpy as np
from graphpot import Domain, generate, reduite
from graphpot._core import BACKEND
from graphpot.mc import mc_hitting

results = {"backend": BACKEND}

space = generate("grid2d(20)")
dom = Domain.whole_interior(space)
x = space.ids[int(dom.interior[len(dom.interior) // 2])]
t0 = time.perf_counter()
mc_hitting(dom, x, samples=50_000, seed=0)
results["mc_exit_50k_grid20"] = time.perf_counter() - t0

u = np.linspace(0.0, 1.0, space.n)
A = [space.ids[i] for i in dom.interior[::7]]
t0 = time.perf_counter()
for _ in range(20):
    reduite(u, A, space)
results["reduite_x20_grid20"] = time.perf_counter() - t0

print(json.dumps(results))
"""


def run(no_ext: bool) -> dict:
    env = dict(os.environ)
    if no_ext:
        env["GRAPHPOT_NO_EXT"] = "1"
    else:
        env.pop("GRAPHPOT_NO_EXT", None)
    out = subprocess.run([sys.executable, "-c", DRIVER], env=env,
                         capture_output=True, text=True, check=True)
    return json.loads(out.stdout)


def main() -> int:
    fast = run(no_ext=False)
    slow = run(no_ext=True)
    if fast["backend"] == slow["backend"]:
        print("compiled extension unavailable; only the python backend ran")
    for key in sorted(fast):
        if key == "backend":
            continue
        tf, ts = fast[key], slow[key]
        print(f"{key:24s}  {fast['backend']:>8s} {tf * 1e3:9.2f} ms"
              f"  python {ts * 1e3:9.2f} ms  speedup {ts / tf:6.2f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
