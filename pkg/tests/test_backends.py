"""The compiled kernels and their pure-Python twins must agree bit for bit:
both draw from the same counter-based generator and apply operations in the
same order."""

import json
import os
import subprocess
import sys

import pytest

from graphpot._core import BACKEND

DRIVER = r"""
import json
import numpy as np
from graphpot import Domain, generate, reduite
from graphpot._core import BACKEND
from graphpot.mc import mc_hitting, mc_green

s = generate("grid2d(4)")
dom = Domain.whole_interior(s)
x = s.ids[int(dom.interior[0])]
hit = mc_hitting(dom, x, samples=20000, seed=42)
g, _ = mc_green(s, x, x, samples=20000, seed=43)
u = np.linspace(0.0, 1.0, s.n)
r = reduite(u, [s.ids[i] for i in dom.interior[:4]], s)
print(json.dumps({
    "backend": BACKEND,
    "hit": [v.hex() for v in hit.weights],
    "green": float(g).hex(),
    "reduite": [float(v).hex() for v in r],
}))
"""


def _run(no_ext: bool):
    env = dict(os.environ)
    if no_ext:
        env["GRAPHPOT_NO_EXT"] = "1"
    else:
        env.pop("GRAPHPOT_NO_EXT", None)
    out = subprocess.run([sys.executable, "-c", DRIVER], env=env,
                         capture_output=True, text=True, check=True)
    return json.loads(out.stdout)


@pytest.mark.skipif(BACKEND != "compiled",
                    reason="compiled extension unavailable; nothing to compare")
def test_backends_bit_identical():
    fast = _run(no_ext=False)
    slow = _run(no_ext=True)
    assert fast["backend"] == "compiled" and slow["backend"] == "python"
    assert fast["hit"] == slow["hit"]
    assert fast["green"] == slow["green"]
    assert fast["reduite"] == slow["reduite"]
