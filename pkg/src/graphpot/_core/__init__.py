"""Backend selection for the hot kernels.

The compiled Cython extension is used when importable; the pure-Python
twin in _fallback is the drop-in replacement. Set GRAPHPOT_NO_EXT=1 to
force the fallback (used by the backend-equivalence tests and benchmark).
"""

import os

if os.environ.get("GRAPHPOT_NO_EXT"):
    from . import _fallback as _impl

    BACKEND = "python"
else:
    try:
        from . import _speedups as _impl  # type: ignore[attr-defined]

        BACKEND = "compiled"
    except ImportError:
        from . import _fallback as _impl

        BACKEND = "python"

mc_exit = _impl.mc_exit
mc_visits = _impl.mc_visits
reduite_sweep = _impl.reduite_sweep

__all__ = ["BACKEND", "mc_exit", "mc_visits", "reduite_sweep"]
