"""Green functions, Martin kernels, the kernel sup-metric and the numerical
Martin compactification.

On a finite killed chain the Green function is the inverse of (I - P) on the
non-absorbing block. Martin kernels are Green ratios normalized at the base
point. The compactification comes in two modes: 'absorbing' (one boundary
point per absorbing state reachable from the base point, kernels given by
normalized absorption probabilities) and 'exhaustion' (kernel columns of
frontier vertices of an increasing domain family, clustered under the
kernel metric).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from .dirichlet import DirichletOperator
from .errors import DisconnectedFromBaseError, NoGreenFunctionError
from .spaces import Domain, HarmonicSpace


@dataclass
class KernelTable:
    """Green and Martin kernel values over the non-absorbing vertices."""

    space: HarmonicSpace
    G: np.ndarray                      # (n_na, n_na)
    row_ids: tuple                     # non-absorbing vertex ids, row order
    x0: str                            # base point id
    K: np.ndarray | None = None        # (n_na, n_cols)
    col_ids: tuple | None = None

    def row(self, v) -> int:
        return self.row_ids.index(str(v)) if not isinstance(v, (int, np.integer)) \
            else list(self.space.non_absorbing).index(v)

    def green(self, x, y) -> float:
        return float(self.G[self._pos(x), self._pos(y)])

    def _pos(self, v) -> int:
        i = self.space._idx(v)
        return int(np.searchsorted(self.space.non_absorbing, i))

    def kernel_column(self, y) -> np.ndarray:
        if self.K is None:
            raise ValueError("Martin kernel not computed")
        return self.K[:, self.col_ids.index(str(y))]


@dataclass
class BoundaryAtlas:
    """Identified boundary points with representative kernel columns."""

    space: HarmonicSpace
    point_ids: list
    columns: np.ndarray                # (n_probe, n_points)
    probe: np.ndarray                  # vertex indices the columns are read on
    provenance: str
    minimal_flags: list | None = None
    notices: list = field(default_factory=list)
    stability: float | None = None

    @property
    def size(self) -> int:
        return len(self.point_ids)

    def column(self, xi) -> np.ndarray:
        return self.columns[:, self.point_ids.index(str(xi))]


def green_function(space: HarmonicSpace) -> KernelTable:
    """Green matrix G = (I - P)^{-1} on the non-absorbing block.

    Checks the reversibility-adjusted symmetry m(x) G(x, y) = m(y) G(y, x)
    when the conductances are symmetric.
    """
    na = space.non_absorbing
    Q = space.P[na][:, na].toarray()
    n = na.size
    try:
        G = np.linalg.solve(np.eye(n) - Q, np.eye(n))
    except np.linalg.LinAlgError as exc:
        raise NoGreenFunctionError(str(exc)) from None
    if not np.isfinite(G).all() or G.min() < -1e-9:
        raise NoGreenFunctionError("Green matrix not finite and nonnegative")
    G[G < 0] = 0.0
    if (space.W - space.W.T).nnz == 0:
        deg = np.asarray(space.W.sum(axis=1)).ravel()[na]
        m = deg / (1.0 - space.killing[na])
        sym_gap = np.max(np.abs(m[:, None] * G - (m[:, None] * G).T))
        if sym_gap > 1e-8 * max(1.0, G.max()):
            raise NoGreenFunctionError(
                f"reversibility-adjusted symmetry violated by {sym_gap:.3e}"
            )
    row_ids = tuple(space.ids[i] for i in na)
    return KernelTable(space, G, row_ids, space.ids[space.base_point])


def green_column(space: HarmonicSpace, y) -> np.ndarray:
    """Single Green column G(., y) as a full-length array (0 at absorbing)."""
    na = space.non_absorbing
    Q = space.P[na][:, na]
    yi = space._idx(y)
    pos = int(np.searchsorted(na, yi))
    e = np.zeros(na.size)
    e[pos] = 1.0
    col = sp.linalg.splu(sp.identity(na.size, format="csc") - Q.tocsc()).solve(e)
    out = np.zeros(space.n)
    out[na] = col
    return out


def martin_kernel(table: KernelTable, x0=None) -> KernelTable:
    """Fill the Martin part K(x, y) = G(x, y) / G(x0, y); K(x0, .) = 1."""
    space = table.space
    if x0 is None:
        x0 = table.x0
    r0 = table._pos(x0)
    denom = table.G[r0]
    if np.any(denom <= 0):
        bad = table.row_ids[int(np.argmin(denom))]
        raise DisconnectedFromBaseError(f"G(x0, {bad}) = 0")
    K = table.G / denom
    K[r0, :] = 1.0
    table.K = K
    table.col_ids = table.row_ids
    table.x0 = str(x0) if not isinstance(x0, (int, np.integer)) else space.ids[x0]
    return table


def dm_metric(columns_or_table, y1=None, y2=None, probe=None) -> float:
    """Kernel sup-metric d(y1, y2) = sup over probe vertices of |K(x,y1) - K(x,y2)|.

    Accepts either a KernelTable with column ids, or a pair of raw columns.
    """
    if isinstance(columns_or_table, KernelTable):
        t = columns_or_table
        c1 = t.kernel_column(y1)
        c2 = t.kernel_column(y2)
        if probe is not None:
            sel = [t._pos(v) for v in probe]
            c1, c2 = c1[sel], c2[sel]
    else:
        c1, c2 = np.asarray(columns_or_table), np.asarray(y1)
    return float(np.max(np.abs(c1 - c2), initial=0.0))


def absorption_matrix(space: HarmonicSpace):
    """(n_na, n_abs) matrix of absorption probabilities h_xi(x)."""
    na = space.non_absorbing
    ab = np.flatnonzero(space.absorbing)
    Q = space.P[na][:, na].tocsc()
    R = space.P[na][:, ab].toarray()
    lu = sp.linalg.splu(sp.identity(na.size, format="csc") - Q)
    H = np.column_stack([lu.solve(R[:, j]) for j in range(R.shape[1])]) \
        if ab.size else np.zeros((na.size, 0))
    return H, na, ab


def compactify(space: HarmonicSpace, mode: str = "absorbing",
               domains: Sequence[Domain] | None = None,
               merge_tol: float | None = None) -> BoundaryAtlas:
    """Numerical Martin boundary.

    absorbing mode: one atlas point per absorbing state reachable from the
    base point, kernel K(x, xi) = h_xi(x) / h_xi(x0). exhaustion mode:
    cluster the Martin columns of the frontier vertices of an increasing
    domain family under the kernel metric; representatives are medoids and
    stability across the last two levels is reported.
    """
    if mode == "absorbing":
        H, na, ab = absorption_matrix(space)
        r0 = int(np.searchsorted(na, space.base_point))
        ids, cols, notices = [], [], []
        for j, a in enumerate(ab):
            h0 = H[r0, j]
            if h0 <= 0:
                notices.append(f"absorbing state {space.ids[a]} unreachable from base point; dropped")
                continue
            ids.append(space.ids[a])
            cols.append(H[:, j] / h0)
        atlas = BoundaryAtlas(space, ids, np.column_stack(cols) if cols else
                              np.zeros((na.size, 0)), na, "absorbing-state",
                              notices=notices)
        return atlas

    if mode != "exhaustion":
        raise ValueError("mode must be 'absorbing' or 'exhaustion'")
    if not domains or len(domains) < 2:
        raise ValueError("exhaustion mode needs an increasing domain family")
    for a, b in zip(domains, domains[1:]):
        if not a.is_subdomain_of(b):
            raise ValueError("domains must be increasing")
    table = martin_kernel(green_function(space))
    probe = domains[0].interior
    probe_pos = np.array([table._pos(space.ids[i]) for i in probe])
    if merge_tol is None:
        merge_tol = 1e-6

    def level_clusters(dom):
        frontier = [i for i in dom.boundary if not space.absorbing[i]]
        cols = [table.K[probe_pos, table._pos(space.ids[i])] for i in frontier]
        reps, members = [], []
        for i, c in zip(frontier, cols):
            placed = False
            for k, r in enumerate(reps):
                if np.max(np.abs(c - r)) <= merge_tol * max(1.0, np.max(np.abs(r))):
                    members[k].append((i, c))
                    placed = True
                    break
            if not placed:
                reps.append(c)
                members.append([(i, c)])
        # medoid representative per cluster
        out = []
        for grp in members:
            M = np.column_stack([c for _, c in grp])
            dists = [max(np.max(np.abs(M - M[:, [j]]), initial=0.0), 0.0)
                     for j in range(M.shape[1])]
            j = int(np.argmin(dists))
            out.append((grp[j][0], M[:, j]))
        return out

    last = level_clusters(domains[-1])
    prev = level_clusters(domains[-2])
    drift = 0.0
    for _, c in last:
        best = min(np.max(np.abs(c - pc)) for _, pc in prev) if prev else np.inf
        drift = max(drift, best)
    notices = []
    if drift > max(10 * merge_tol, 1e-3):
        warnings.warn(f"unstable boundary clustering: drift {drift:.3e}")
        notices.append(f"unstable-boundary drift {drift:.3e}")
    ids = [f"cluster:{space.ids[i]}" for i, _ in last]
    cols = np.column_stack([c for _, c in last]) if last else np.zeros((probe_pos.size, 0))
    return BoundaryAtlas(space, ids, cols, probe, "cluster-of-exhaustion",
                         notices=notices, stability=drift)


def separation_check(table: KernelTable, tol: float = 1e-10):
    """Do the kernel columns separate the non-absorbing vertices?

    Returns (True, None) or (False, (id, id)) with a witnessing pair.
    """
    K = table.K if table.K is not None else martin_kernel(table).K
    n = K.shape[0]
    for i in range(n):
        for j in range(i + 1, n):
            if np.max(np.abs(K[i] - K[j]), initial=0.0) <= tol:
                return False, (table.row_ids[i], table.row_ids[j])
    return True, None


def minimality_test(atlas: BoundaryAtlas, tol: float = 1e-8) -> list:
    """Flag atlas points whose kernel is an extreme ray of the harmonic cone.

    A point is non-minimal exactly when its column is a nonnegative
    combination of the other atlas columns (nonnegative least squares).
    """
    from scipy.optimize import nnls

    flags = []
    M = atlas.columns
    for j in range(atlas.size):
        others = np.delete(M, j, axis=1)
        target = M[:, j]
        if others.shape[1] == 0:
            flags.append(True)
            continue
        _, rnorm = nnls(others, target)
        flags.append(bool(rnorm > tol * max(1.0, float(np.linalg.norm(target)))))
    atlas.minimal_flags = flags
    return flags
