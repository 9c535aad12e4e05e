"""Sweeping (reduite), its linear-programming oracle, Riesz decomposition,
equilibrium potentials and capacity.

reduite(u, A) is the least nonnegative superharmonic function dominating u
on A. It is computed by the monotone fixed point v <- max(u 1_A, Pv), which
increases from u 1_A to the least element of the constraint polyhedron.
"""

from __future__ import annotations

import math
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import linprog

from . import _core
from .dirichlet import (
    DirichletOperator,
    boundary_data,
    solve_dirichlet,
    superharmonic_deficiency,
)
from .errors import (
    ConvergenceError,
    EmptySetError,
    NotInConeError,
    NotInSortError,
    SizeCapError,
)
from .spaces import Domain, ExtendedFunction, HarmonicSpace

ORACLE_CAP = 12
FP_TOL = 1e-12
FP_MAXITER = 10 ** 6


def _as_values(u, space: HarmonicSpace) -> np.ndarray:
    if isinstance(u, ExtendedFunction):
        if not u.is_finite():
            raise NotInSortError("infinite values are not accepted here")
        return u.values.copy()
    arr = np.asarray(u, dtype=np.float64)
    if arr.ndim == 0:
        return np.full(space.n, float(arr))
    if not np.isfinite(arr).all():
        raise NotInSortError("infinite values are not accepted here")
    return arr.copy()


def reduite(u, A: Iterable, space: HarmonicSpace, tol: float = FP_TOL,
            max_iter: int = FP_MAXITER, challenge=None) -> np.ndarray:
    """Least superharmonic v >= 0 with v >= u on A (the balayage of u onto A).

    `challenge`, when given, must be a superharmonic majorant of u on A; the
    result is checked against it.
    """
    uv = _as_values(u, space)
    Aidx = space.indices(A)
    if uv[Aidx].size and uv[Aidx].min() < 0:
        raise NotInConeError("u must be nonnegative on A")
    target = np.zeros(space.n)
    target[Aidx] = uv[Aidx]
    P = space.P
    v, iters, change = _core.reduite_sweep(P.indptr, P.indices, P.data,
                                           target, tol, max_iter)
    if change >= tol:
        raise ConvergenceError(change, iters)
    if challenge is not None:
        w = _as_values(challenge, space)
        d, _ = superharmonic_deficiency(w, space=space)
        if d > 100 * tol:
            raise NotInConeError("challenge is not superharmonic")
        if np.any(w[Aidx] < uv[Aidx] - 100 * tol):
            raise NotInConeError("challenge does not dominate u on A")
        if np.any(v > w + 1000 * tol):
            raise AssertionError("reduite exceeds a superharmonic majorant")
    return v


def reduite_oracle(u, A: Iterable, space: HarmonicSpace) -> np.ndarray:
    """Exact reduite on tiny spaces via the LP  min sum(v) : v >= Pv, v >= u 1_A, v >= 0.

    The feasible set is closed under pointwise minima, so the LP minimizer
    is its least element, i.e. the reduite.
    """
    if space.n > ORACLE_CAP:
        raise SizeCapError(f"oracle capped at {ORACLE_CAP} vertices")
    uv = _as_values(u, space)
    Aidx = space.indices(A)
    n = space.n
    P = space.P.toarray()
    A_ub = P - np.eye(n)
    b_ub = np.zeros(n)
    lower = np.zeros(n)
    lower[Aidx] = np.maximum(0.0, uv[Aidx])
    res = linprog(np.ones(n), A_ub=A_ub, b_ub=b_ub,
                  bounds=list(zip(lower, [None] * n)), method="highs")
    if not res.success:
        raise ConvergenceError(math.nan, 0, f"oracle LP failed: {res.message}")
    return res.x


def dirichlet_via_balayage(domain: Domain, g, extension=None,
                           tol: float = FP_TOL) -> np.ndarray:
    """Dirichlet solution realized as a sweeping onto the complement.

    Sweeps a nonnegative superharmonic extension of g onto X minus the
    interior; the restriction to the domain is the Dirichlet solution.
    The default extension is the reduite of the boundary-supported data.
    """
    space = domain.space
    gf = boundary_data(domain, g)
    gb = gf[domain.boundary]
    if gb.size and gb.min() < 0:
        raise NotInConeError("boundary data must be nonnegative")
    if extension is None:
        ext = reduite(gf, domain.boundary, space, tol=tol)
    else:
        ext = _as_values(extension, space)
        d, _ = superharmonic_deficiency(ext, space=space)
        if d > 100 * tol:
            raise NotInConeError("extension is not superharmonic")
        if np.max(np.abs(ext[domain.boundary] - gb), initial=0.0) > 100 * tol:
            raise NotInConeError("extension does not agree with g on the boundary")
    complement = np.flatnonzero(~domain.interior_mask)
    swept = reduite(ext, complement, space, tol=tol)
    out = np.full(space.n, np.nan)
    dv = domain.vertices()
    out[dv] = swept[dv]
    return out


def riesz_decompose(u, space: HarmonicSpace, tol: float = FP_TOL,
                    max_iter: int = FP_MAXITER):
    """Split a finite nonnegative superharmonic u into harmonic part + potential.

    The harmonic part is the monotone nonincreasing limit of repeated
    averaging (interior vertices updated, absorbing values held fixed); it
    is the greatest harmonic minorant. Returns (h, p) with u = h + p.
    """
    uv = _as_values(u, space)
    if uv.min() < 0:
        raise NotInConeError("u must be nonnegative")
    d, w = superharmonic_deficiency(uv, space=space)
    if d > 1e-9:
        raise NotInConeError(f"u is not superharmonic (deficiency {d:.3e} at {w})")
    na = space.non_absorbing
    h = uv.copy()
    change = math.inf
    for _ in range(max_iter):
        nh = h.copy()
        nh[na] = (space.P @ h)[na]
        change = float(np.max(np.abs(nh - h)))
        h = nh
        if change < tol:
            break
    else:
        raise ConvergenceError(change, max_iter)
    p = uv - h
    p[p < 0] = 0.0
    # potential check: repeated averaging of p must vanish
    q = p.copy()
    for _ in range(max_iter):
        if float(np.max(np.abs(q[na]), initial=0.0)) < max(tol, 1e-11):
            break
        nq = q.copy()
        nq[na] = (space.P @ q)[na]
        q = nq
    else:
        raise ConvergenceError(float(np.max(np.abs(q))), max_iter,
                               "potential part does not vanish under averaging")
    return h, p


def equilibrium_potential(A: Iterable, space: HarmonicSpace) -> np.ndarray:
    """reduite(1, A): equals 1 on A, harmonic off A, 0 at absorbing vertices.

    Computed by a direct Dirichlet solve on the complement of A, which is
    the exact fixed point of the sweeping iteration (cross-checked against
    reduite in the test suite).
    """
    Aidx = space.indices(A)
    if Aidx.size == 0:
        raise EmptySetError("A is empty")
    if space.absorbing[Aidx].any():
        raise EmptySetError("A must consist of non-absorbing vertices")
    e = np.zeros(space.n)
    e[Aidx] = 1.0
    amask = np.zeros(space.n, dtype=bool)
    amask[Aidx] = True
    rest = np.flatnonzero(~space.absorbing & ~amask)
    if rest.size:
        dom = Domain(space, rest)
        g = np.zeros(space.n)
        g[Aidx] = 1.0
        sol = DirichletOperator(dom).solve(g)
        e[rest] = sol[rest]
    return e


def capacity(A: Iterable, space: HarmonicSpace, mu: np.ndarray | None = None) -> float:
    """Total Riesz mass of the equilibrium potential of A.

    mu is a nonnegative reference measure over vertices (default counting
    measure). For a singleton {a} the capacity equals 1 / G(a, a) for any
    kernel. Monotonicity and subadditivity in A hold whenever the Green
    function is symmetric with respect to mu — in particular with counting
    measure on symmetric kernels (constant-degree lattices, and any chain
    realized from a symmetric substochastic matrix); on a general
    reversible chain pass mu = deg / (1 - killing).
    """
    Aidx = list(A) if not isinstance(A, (list, tuple, set, np.ndarray)) else A
    if len(Aidx) == 0:
        return 0.0
    e = equilibrium_potential(Aidx, space)
    na = space.non_absorbing
    riesz = e[na] - (space.P @ e)[na]
    riesz[riesz < 0] = 0.0
    if mu is None:
        return float(riesz.sum())
    mu = np.asarray(mu, dtype=np.float64)
    return float((mu[na] * riesz).sum())


def capacity_integral(A: Iterable, space: HarmonicSpace,
                      mu: np.ndarray | None = None) -> float:
    """Secondary statistic: the literal integral of the equilibrium potential.

    Differs from the Riesz-mass capacity by the mass the potential carries
    off A; reported alongside, never used in capacity laws.
    """
    Aidx = list(A) if not isinstance(A, (list, tuple, set, np.ndarray)) else A
    if len(Aidx) == 0:
        return 0.0
    e = equilibrium_potential(Aidx, space)
    na = space.non_absorbing
    if mu is None:
        return float(e[na].sum())
    mu = np.asarray(mu, dtype=np.float64)
    return float((mu[na] * e[na]).sum())
