"""Harmonicity predicates, the Dirichlet solution operator, traces and
Harnack constants.

A function h is harmonic on a domain U when (Ph)(x) = h(x) at every interior
vertex, reading h on interior and boundary alike. The solver eliminates the
interior block of (I - P) directly for up to 10^4 interior vertices and
switches to an AMG-preconditioned CG solve on the symmetrized conductance
system above that.
"""

from __future__ import annotations

import math
from typing import Mapping, Sequence

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import (
    EmptySetError,
    IrregularDomainError,
    MonotonicityError,
    NotInConeError,
    NotInSortError,
)
from .spaces import Domain, ExtendedFunction, HarmonicSpace, phi

DIRECT_LIMIT = 10_000
DIRECT_TOL = 1e-12
ITERATIVE_TOL = 1e-10


def boundary_data(domain: Domain, g) -> np.ndarray:
    """Normalize boundary data to a full-length array (values read on the boundary)."""
    space = domain.space
    if isinstance(g, ExtendedFunction):
        if not g.is_finite():
            raise NotInSortError("boundary data must be finite")
        return g.values.copy()
    if isinstance(g, Mapping):
        out = np.zeros(space.n)
        for v, val in g.items():
            out[space._idx(v)] = float(val)
        return out
    arr = np.asarray(g, dtype=np.float64)
    if arr.shape != (space.n,):
        raise ValueError("boundary data must be a mapping or a full-length array")
    return arr.copy()


class DirichletOperator:
    """Factorized interior system of a domain, reusable across right-hand sides."""

    def __init__(self, domain: Domain, tol: float | None = None):
        self.domain = domain
        space = domain.space
        I = domain.interior
        B = domain.boundary
        n_i = I.size
        P_II = space.P[I][:, I].tocsc()
        self.A = sp.identity(n_i, format="csc") - P_II
        self.P_IB = space.P[I][:, B].tocsr()
        self._symmetric = (space.W - space.W.T).nnz == 0
        self.direct = n_i <= DIRECT_LIMIT
        self.tol = tol if tol is not None else (DIRECT_TOL if self.direct else ITERATIVE_TOL)
        self._lu = None
        self._lu_t = None
        self._amg = None
        if self.direct:
            try:
                self._lu = spla.splu(self.A)
            except RuntimeError as exc:
                raise IrregularDomainError(f"singular interior system: {exc}") from None
        else:
            if not self._symmetric:
                raise IrregularDomainError(
                    "iterative solver requires symmetric conductances at this size"
                )
            import pyamg

            deg = np.asarray(space.W.sum(axis=1)).ravel()
            m = deg / (1.0 - space.killing)
            W_II = space.W[I][:, I]
            L = sp.diags(m[I]) - W_II
            self._m_I = m[I]
            self._amg = pyamg.ruge_stuben_solver(sp.csr_matrix(L))

    def solve_interior(self, b: np.ndarray) -> np.ndarray:
        """Solve (I - P)_II h = b for interior values."""
        if self._lu is not None:
            h = self._lu.solve(b)
        else:
            res = []
            h = self._amg.solve(self._m_I * b, tol=self.tol, accel="cg",
                                maxiter=400, residuals=res)
        r = self.A @ h - b
        scale = max(1.0, float(np.max(np.abs(b))) if b.size else 1.0)
        if not np.isfinite(h).all() or np.max(np.abs(r), initial=0.0) > 1e-6 * scale:
            raise IrregularDomainError("interior system solve failed")
        return h

    def solve_interior_adjoint(self, b: np.ndarray) -> np.ndarray:
        """Solve (I - P)_II^T z = b."""
        if self._lu is not None:
            return self._lu.solve(b, trans="T")
        # symmetrized system: (I-P)^T = diag(1/m) L, so L z' = m b with z' = z
        return self._amg.solve(self._m_I * b, tol=self.tol, accel="cg", maxiter=400)

    def solve(self, g) -> np.ndarray:
        """Dirichlet solution: full-length array, NaN off the domain."""
        gf = boundary_data(self.domain, g)
        b = self.P_IB @ gf[self.domain.boundary]
        h_i = self.solve_interior(b)
        out = np.full(self.domain.space.n, np.nan)
        out[self.domain.boundary] = gf[self.domain.boundary]
        out[self.domain.interior] = h_i
        return out

    def exit_matrix(self) -> np.ndarray:
        """Harmonic-measure matrix: (n_interior, n_boundary), row x sums to the
        survival-to-boundary probability from x."""
        B = self.P_IB.toarray()
        out = np.empty_like(B)
        for j in range(B.shape[1]):
            out[:, j] = self.solve_interior(B[:, j])
        return out


def solve_dirichlet(domain: Domain, g, tol: float | None = None) -> np.ndarray:
    """Solve the Dirichlet problem on `domain` with boundary data `g`.

    Returns a full-length vertex array holding g on the boundary and the
    harmonic extension on the interior; NaN elsewhere.
    """
    return DirichletOperator(domain, tol=tol).solve(g)


def harmonicity_residual(f, domain: Domain) -> float:
    """max over interior x of phi(|f(x) - (Pf)(x)|); zero iff f is harmonic."""
    space = domain.space
    if isinstance(f, ExtendedFunction):
        if f.inf_mask[domain.vertices()].any():
            raise NotInSortError("function is infinite on the domain")
        fv = f.values
    else:
        fv = np.asarray(f, dtype=np.float64)
        if not np.isfinite(fv[domain.vertices()]).all():
            raise NotInSortError("function is infinite on the domain")
    fv = np.where(np.isfinite(fv), fv, 0.0)
    Pf = space.P[domain.interior] @ fv
    diff = np.abs(fv[domain.interior] - Pf)
    return float(max((phi(d) for d in diff), default=0.0))


def trace(h, domain: Domain) -> np.ndarray:
    """Boundary restriction of h; full-length array, NaN off the boundary."""
    hv = h.as_array() if isinstance(h, ExtendedFunction) else np.asarray(h, dtype=float)
    out = np.full(domain.space.n, np.nan)
    out[domain.boundary] = hv[domain.boundary]
    return out


def superharmonic_deficiency(u, domain: Domain | None = None, space: HarmonicSpace | None = None,
                             check_subdomain_form: bool = False):
    """Worst violation of u >= Pu over interior vertices with finite value.

    Returns (deficiency, witness vertex id or None). Vertices where u is
    infinite count as satisfying. Optionally cross-checks the equivalent
    criterion u(x) >= H_V(u|dV)(x) over all radius-1 subdomains V.
    """
    if isinstance(u, ExtendedFunction):
        space = u.space
        uv = u.as_array()
    else:
        if space is None and domain is not None:
            space = domain.space
        if space is None:
            raise ValueError("space required for raw arrays")
        uv = np.asarray(u, dtype=np.float64)
    if domain is None:
        domain = Domain.whole_interior(space)
    dv = domain.vertices()
    if np.nanmin(np.where(np.isinf(uv[dv]), 0.0, uv[dv])) < 0:
        raise NotInConeError("function takes negative values")

    worst = 0.0
    witness = None
    P = space.P
    for x in domain.interior:
        if math.isinf(uv[x]):
            continue
        row = P.getrow(x)
        pu = 0.0
        for j, w in zip(row.indices, row.data):
            if math.isinf(uv[j]):
                pu = math.inf
                break
            pu += w * uv[j]
        gap = max(0.0, pu - uv[x])
        if check_subdomain_form:
            # radius-1 subdomain V = {x}: H_V(u|dV)(x) solves the one-point system
            pxx = 0.0
            rest = 0.0
            inf_hit = False
            for j, w in zip(row.indices, row.data):
                if j == x:
                    pxx = w
                elif math.isinf(uv[j]):
                    inf_hit = True
                else:
                    rest += w * uv[j]
            hv = math.inf if inf_hit else (rest / (1.0 - pxx) if pxx < 1.0 else math.inf)
            gap_h = max(0.0, hv - uv[x]) * (1.0 - pxx)
            if not math.isclose(gap, gap_h, rel_tol=1e-9, abs_tol=1e-12):
                raise AssertionError("one-step and subdomain superharmonicity criteria disagree")
        if gap > worst:
            worst = gap
            witness = space.ids[x]
    return worst, witness


def harnack_constant(K: Sequence, domain: Domain, tol: float = 1e-12) -> float:
    """Least C with sup_K h <= C inf_K h over nonnegative harmonic h on the domain.

    Computed from the extreme rays of the positive harmonic cone: the
    harmonic-measure columns of the domain. Returns inf when some column
    vanishes on part of K while staying positive elsewhere on K.
    """
    space = domain.space
    Kidx = space.indices(K)
    if Kidx.size == 0:
        raise EmptySetError("K is empty")
    if not domain.interior_mask[Kidx].all():
        raise EmptySetError("K must lie in the domain interior")
    op = DirichletOperator(domain)
    cols = op.exit_matrix()
    pos = {int(v): i for i, v in enumerate(domain.interior)}
    rows = [pos[int(v)] for v in Kidx]
    C = 1.0
    for j in range(cols.shape[1]):
        vals = cols[rows, j]
        hi, lo = float(vals.max()), float(vals.min())
        if hi <= tol:
            continue
        if lo <= tol:
            return math.inf
        C = max(C, hi / lo)
    return C


def monotone_envelope(hs: Sequence, domain: Domain, cap: float = 1e6,
                      tol: float = 1e-10):
    """Pointwise supremum of a nondecreasing finite sequence of harmonic functions.

    Returns (envelope array, diverged flag). The flag is set when the
    envelope exceeds `cap` at every interior vertex, in which case the
    array is None.
    """
    if not hs:
        raise MonotonicityError("empty sequence")
    arrs = [h.as_array() if isinstance(h, ExtendedFunction) else np.asarray(h, float)
            for h in hs]
    dv = domain.vertices()
    for h in arrs:
        if harmonicity_residual(h, domain) > phi(10 * math.sqrt(tol)):
            raise MonotonicityError("sequence member is not harmonic on the domain")
    for a, b in zip(arrs, arrs[1:]):
        if np.any(b[dv] < a[dv] - 1e-12):
            raise MonotonicityError("sequence is not pointwise nondecreasing")
    env = np.maximum.reduce(arrs)
    if np.all(env[domain.interior] > cap):
        return None, True
    if harmonicity_residual(env, domain) > phi(10 * math.sqrt(tol)):
        raise MonotonicityError("envelope failed the harmonicity check")
    return env, False
