"""Harmonic measure and integral representation of nonnegative harmonic
functions over a boundary atlas.

Harmonic measure is computed by two independent routes (one linear solve per
boundary indicator, reusing a shared factorization, and a single adjoint
solve) which must agree to high accuracy; the mismatch is recorded on the
result. Representation coefficients are fitted by nonnegative least squares
over the minimal kernel columns.
"""

from __future__ import annotations

import warnings

import numpy as np

from .dirichlet import DirichletOperator
from .errors import NotRepresentableError
from .martin import BoundaryAtlas
from .spaces import Domain, HarmonicSpace

ROUTE_AGREE_TOL = 1e-10


class BoundaryMeasure:
    """Nonnegative weights on boundary points, indexed by vertex/atlas ids."""

    def __init__(self, ids, weights, base=None, route_gap=None, stderr=None):
        self.ids = [str(i) for i in ids]
        self.weights = np.asarray(weights, dtype=float)
        if self.weights.shape != (len(self.ids),):
            raise ValueError("ids and weights length mismatch")
        if np.any(self.weights < -1e-12):
            raise ValueError("negative boundary weight")
        self.weights = np.maximum(self.weights, 0.0)
        self.base = base
        self.route_gap = route_gap
        self.stderr = stderr

    def __getitem__(self, xi) -> float:
        return float(self.weights[self.ids.index(str(xi))])

    @property
    def total(self) -> float:
        return float(self.weights.sum())

    def integrate(self, g) -> float:
        """Integral of g (dict or callable on ids) against the measure."""
        if callable(g):
            vals = np.array([g(i) for i in self.ids], dtype=float)
        else:
            vals = np.array([float(g[i]) for i in self.ids])
        return float(vals @ self.weights)

    def as_dict(self) -> dict:
        return dict(zip(self.ids, self.weights.tolist()))


def harmonic_measure(domain: Domain, x) -> BoundaryMeasure:
    """Exit distribution of the chain started at x, stopped on leaving the
    domain's interior. Cross-checked by a transposed solve."""
    space = domain.space
    xi = space._idx(x)
    if xi not in set(domain.interior.tolist()):
        # starting on the boundary: the unit mass sits where it started
        if xi in set(domain.boundary.tolist()):
            w = [1.0 if b == xi else 0.0 for b in domain.boundary]
            return BoundaryMeasure([space.ids[b] for b in domain.boundary], w,
                                   base=space.ids[xi], route_gap=0.0)
        raise ValueError(f"{space.ids[xi]!r} is not in the domain")
    op = DirichletOperator(domain)
    E = op.exit_matrix()                     # (n_int, n_bnd)
    pos = int(np.searchsorted(domain.interior, xi))
    forward = E[pos]

    # adjoint route: z solves (I - P_II)^T z = e_x, weights are z^T P_IB
    e = np.zeros(domain.interior.size)
    e[pos] = 1.0
    z = op.solve_interior_adjoint(e)
    adjoint = z @ op.P_IB.toarray()
    gap = float(np.max(np.abs(forward - adjoint), initial=0.0))
    if gap > ROUTE_AGREE_TOL * max(1.0, float(np.max(np.abs(forward)))):
        raise AssertionError(f"harmonic-measure routes disagree by {gap:.3e}")
    return BoundaryMeasure([space.ids[b] for b in domain.boundary], forward,
                           base=space.ids[xi], route_gap=gap)


def represent(domain: Domain, g, x=None) -> float:
    """Value of the solution with boundary data g at x, as an integral
    against harmonic measure."""
    space = domain.space
    if x is None:
        x = space.ids[space.base_point]
    omega = harmonic_measure(domain, x)
    if isinstance(g, np.ndarray):
        g = {space.ids[i]: g[i] for i in domain.boundary}
    return omega.integrate(g)


def martin_representation(atlas: BoundaryAtlas, h, tol: float = 1e-9) -> BoundaryMeasure:
    """Fit h >= 0 harmonic as a nonnegative combination of the minimal atlas
    kernels. Raises if the residual exceeds tol; warns when the fitted
    columns are rank deficient (coefficients then not unique)."""
    from scipy.optimize import nnls

    from .martin import minimality_test

    space = atlas.space
    if atlas.minimal_flags is None:
        minimality_test(atlas)
    keep = [j for j, f in enumerate(atlas.minimal_flags) if f]
    if not keep:
        raise NotRepresentableError("atlas has no minimal points")
    M = atlas.columns[:, keep]
    hv = np.asarray([float(h[space.ids[i]]) if isinstance(h, dict) else float(h[i])
                     for i in atlas.probe])
    coef, rnorm = nnls(M, hv)
    scale = max(1.0, float(np.max(np.abs(hv), initial=0.0)))
    if rnorm > tol * scale:
        raise NotRepresentableError(
            f"residual {rnorm:.3e} exceeds tolerance for a nonnegative kernel mixture")
    if np.linalg.matrix_rank(M, tol=1e-10) < M.shape[1]:
        warnings.warn("minimal kernel columns are rank deficient; "
                      "representing measure is not unique")
    ids = [atlas.point_ids[j] for j in keep]
    return BoundaryMeasure(ids, coef)


def pushforward_compare(atlas: BoundaryAtlas, x, tol: float = 1e-10):
    """Check omega^x({xi}) = K(x, xi) * omega^{x0}({xi}) pointwise on an
    absorbing-state atlas. Returns the max absolute gap."""
    space = atlas.space
    dom = Domain.whole_interior(space)
    x0 = space.ids[space.base_point]
    om_x = harmonic_measure(dom, x)
    om_0 = harmonic_measure(dom, x0)
    probe_ids = [space.ids[i] for i in atlas.probe]
    gap = 0.0
    for xi in atlas.point_ids:
        col = atlas.column(xi)
        kx = float(col[probe_ids.index(str(x))])
        lhs = om_x[xi] if xi in om_x.ids else 0.0
        rhs = kx * (om_0[xi] if xi in om_0.ids else 0.0)
        gap = max(gap, abs(lhs - rhs))
    if gap > tol:
        raise AssertionError(f"pushforward identity fails by {gap:.3e}")
    return gap
