"""Pure-Python implementations of the hot kernels.

Same algorithms and the same splitmix64 stream as the compiled extension,
so both backends produce bit-identical results.
"""

import numpy as np
import scipy.sparse as sp

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_INV53 = 2.0**-53


def _stream_seed(seed, traj):
    return (seed + (traj + 1) * _GOLDEN) & _MASK


def _next_double(state):
    state = (state + _GOLDEN) & _MASK
    z = state
    z = ((z ^ (z >> 30)) * _MIX1) & _MASK
    z = ((z ^ (z >> 27)) * _MIX2) & _MASK
    z ^= z >> 31
    return state, (z >> 11) * _INV53


def mc_exit(indptr, indices, data, in_interior, start, samples, seed, max_steps):
    """Exit counts of the kernel walk from `start` until it leaves the interior.

    Returns (counts per vertex, number of killed trajectories).
    """
    n = len(indptr) - 1
    counts = np.zeros(n, dtype=np.int64)
    killed = 0
    for traj in range(samples):
        state = _stream_seed(seed, traj)
        v = start
        for _ in range(max_steps):
            state, u = _next_double(state)
            lo, hi = indptr[v], indptr[v + 1]
            nxt = -1
            acc = 0.0
            for k in range(lo, hi):
                acc += data[k]
                if u < acc:
                    nxt = indices[k]
                    break
            if nxt < 0:
                killed += 1
                break
            v = nxt
            if not in_interior[v]:
                counts[v] += 1
                break
        else:
            raise RuntimeError("trajectory exceeded max_steps")
    return counts, killed


def mc_visits(indptr, indices, data, absorbing, start, target, samples, seed, max_steps):
    """Visit counts to `target` before absorption/killing, one entry per trajectory."""
    visits = np.zeros(samples, dtype=np.int64)
    for traj in range(samples):
        state = _stream_seed(seed, traj)
        v = start
        c = 0
        for _ in range(max_steps):
            if absorbing[v]:
                break
            if v == target:
                c += 1
            state, u = _next_double(state)
            lo, hi = indptr[v], indptr[v + 1]
            nxt = -1
            acc = 0.0
            for k in range(lo, hi):
                acc += data[k]
                if u < acc:
                    nxt = indices[k]
                    break
            if nxt < 0:
                break
            v = nxt
        else:
            raise RuntimeError("trajectory exceeded max_steps")
        visits[traj] = c
    return visits


def reduite_sweep(indptr, indices, data, target, tol, max_iter):
    """Monotone fixed-point iteration v <- max(target, P v) from v0 = target.

    Returns (v, iterations, last sup-norm change).
    """
    n = len(indptr) - 1
    P = sp.csr_matrix(
        (np.asarray(data), np.asarray(indices), np.asarray(indptr)), shape=(n, n)
    )
    v = np.array(target, dtype=np.float64)
    change = np.inf
    for it in range(1, max_iter + 1):
        w = np.maximum(target, P.dot(v))
        change = float(np.max(np.abs(w - v))) if n else 0.0
        v = w
        if change < tol:
            return v, it, change
    return v, max_iter, change
