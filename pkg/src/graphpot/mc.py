"""Monte Carlo estimators: exit distributions and Green values by simulating
the killed chain. The sampling kernels live in the compiled core (with a
pure-Python twin selected at import time); both backends draw from the same
counter-based generator, so results are bit-identical across them."""

from __future__ import annotations

import numpy as np

from . import _core
from .measure import BoundaryMeasure
from .spaces import Domain, HarmonicSpace


def _csr_parts(space: HarmonicSpace):
    P = space.P.tocsr()
    return (P.indptr.astype(np.int32), P.indices.astype(np.int32),
            P.data.astype(np.float64))


def mc_hitting(domain: Domain, x, samples: int, seed: int = 0,
               max_steps: int = 10_000_000) -> BoundaryMeasure:
    """Estimate the exit distribution from `samples` independent
    trajectories started at x. Weights may sum to less than one when
    trajectories are killed in flight; per-point standard errors use the
    binomial formula sqrt(p(1-p)/N)."""
    space = domain.space
    indptr, indices, data = _csr_parts(space)
    in_interior = np.zeros(space.n, dtype=np.uint8)
    in_interior[domain.interior] = 1
    start = space._idx(x)
    if not in_interior[start]:
        raise ValueError("start vertex must lie in the domain interior")
    counts, killed = _core.mc_exit(indptr, indices, data, in_interior,
                                   start, samples, seed, max_steps)
    p = counts[domain.boundary] / samples
    stderr = np.sqrt(np.maximum(p * (1.0 - p), 0.0) / samples)
    return BoundaryMeasure([space.ids[b] for b in domain.boundary], p,
                           base=space.ids[start], stderr=stderr)


def mc_green(space: HarmonicSpace, x, y, samples: int, seed: int = 0,
             max_steps: int = 10_000_000):
    """Estimate G(x, y) as the mean number of visits to y before absorption
    or killing. Returns (mean, stderr)."""
    indptr, indices, data = _csr_parts(space)
    absorbing = space.absorbing.astype(np.uint8)
    visits = _core.mc_visits(indptr, indices, data, absorbing,
                             space._idx(x), space._idx(y),
                             samples, seed, max_steps)
    visits = np.asarray(visits, dtype=np.float64)
    mean = float(visits.mean())
    stderr = float(visits.std(ddof=1) / np.sqrt(samples)) if samples > 1 else np.inf
    return mean, stderr
