# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: Monte Carlo walks and the reduite fixed-point sweep.

Must stay algorithm- and RNG-identical to _fallback.py so both backends
produce bit-identical output.
"""

import numpy as np

cimport numpy as cnp
from libc.stdint cimport int64_t, uint8_t, uint64_t

cdef extern from *:
    pass

cdef uint64_t GOLDEN = 0x9E3779B97F4A7C15ULL
cdef uint64_t MIX1 = 0xBF58476D1CE4E5B9ULL
cdef uint64_t MIX2 = 0x94D049BB133111EBULL
cdef double INV53 = 2.0 ** -53


cdef inline double _next_double(uint64_t* state) nogil:
    cdef uint64_t z
    state[0] = state[0] + GOLDEN
    z = state[0]
    z = (z ^ (z >> 30)) * MIX1
    z = (z ^ (z >> 27)) * MIX2
    z = z ^ (z >> 31)
    return (z >> 11) * INV53


def mc_exit(indptr, indices, data, in_interior, long start, long samples,
            unsigned long long seed, long max_steps):
    """Exit counts of the kernel walk from `start` until it leaves the interior."""
    cdef cnp.int32_t[::1] ip = np.ascontiguousarray(indptr, dtype=np.int32)
    cdef cnp.int32_t[::1] ix = np.ascontiguousarray(indices, dtype=np.int32)
    cdef double[::1] dv = np.ascontiguousarray(data, dtype=np.float64)
    cdef uint8_t[::1] interior = np.ascontiguousarray(in_interior, dtype=np.uint8)
    cdef long n = ip.shape[0] - 1
    counts_arr = np.zeros(n, dtype=np.int64)
    cdef int64_t[::1] counts = counts_arr
    cdef long killed = 0
    cdef long traj, step, v, nxt, k
    cdef uint64_t state
    cdef double u, acc
    cdef bint done
    for traj in range(samples):
        state = seed + (<uint64_t> (traj + 1)) * GOLDEN
        v = start
        done = False
        for step in range(max_steps):
            u = _next_double(&state)
            nxt = -1
            acc = 0.0
            for k in range(ip[v], ip[v + 1]):
                acc += dv[k]
                if u < acc:
                    nxt = ix[k]
                    break
            if nxt < 0:
                killed += 1
                done = True
                break
            v = nxt
            if not interior[v]:
                counts[v] += 1
                done = True
                break
        if not done:
            raise RuntimeError("trajectory exceeded max_steps")
    return counts_arr, killed


def mc_visits(indptr, indices, data, absorbing, long start, long target,
              long samples, unsigned long long seed, long max_steps):
    """Visit counts to `target` before absorption/killing, per trajectory."""
    cdef cnp.int32_t[::1] ip = np.ascontiguousarray(indptr, dtype=np.int32)
    cdef cnp.int32_t[::1] ix = np.ascontiguousarray(indices, dtype=np.int32)
    cdef double[::1] dv = np.ascontiguousarray(data, dtype=np.float64)
    cdef uint8_t[::1] absorb = np.ascontiguousarray(absorbing, dtype=np.uint8)
    visits_arr = np.zeros(samples, dtype=np.int64)
    cdef int64_t[::1] visits = visits_arr
    cdef long traj, step, v, nxt, k, c
    cdef uint64_t state
    cdef double u, acc
    cdef bint done
    for traj in range(samples):
        state = seed + (<uint64_t> (traj + 1)) * GOLDEN
        v = start
        c = 0
        done = False
        for step in range(max_steps):
            if absorb[v]:
                done = True
                break
            if v == target:
                c += 1
            u = _next_double(&state)
            nxt = -1
            acc = 0.0
            for k in range(ip[v], ip[v + 1]):
                acc += dv[k]
                if u < acc:
                    nxt = ix[k]
                    break
            if nxt < 0:
                done = True
                break
            v = nxt
        if not done:
            raise RuntimeError("trajectory exceeded max_steps")
        visits[traj] = c
    return visits_arr


def reduite_sweep(indptr, indices, data, target, double tol, long max_iter):
    """Monotone fixed-point iteration v <- max(target, P v) from v0 = target."""
    cdef cnp.int32_t[::1] ip = np.ascontiguousarray(indptr, dtype=np.int32)
    cdef cnp.int32_t[::1] ix = np.ascontiguousarray(indices, dtype=np.int32)
    cdef double[::1] dv = np.ascontiguousarray(data, dtype=np.float64)
    cdef double[::1] tgt = np.ascontiguousarray(target, dtype=np.float64)
    cdef long n = ip.shape[0] - 1
    v_arr = np.array(target, dtype=np.float64)
    w_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] v = v_arr
    cdef double[::1] w = w_arr
    cdef long it, i, k
    cdef double s, change, d
    cdef long iters = 0
    change = np.inf
    for it in range(1, max_iter + 1):
        change = 0.0
        for i in range(n):
            s = 0.0
            for k in range(ip[i], ip[i + 1]):
                s += dv[k] * v[ix[k]]
            if s < tgt[i]:
                s = tgt[i]
            w[i] = s
            d = s - v[i]
            if d < 0.0:
                d = -d
            if d > change:
                change = d
        v_arr, w_arr = w_arr, v_arr
        v = v_arr
        w = w_arr
        iters = it
        if change < tol:
            break
    return v_arr, iters, change
