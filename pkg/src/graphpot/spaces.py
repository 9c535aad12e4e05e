"""Discrete harmonic spaces: weighted graphs with substochastic averaging kernels.

A HarmonicSpace is a finite weighted directed graph. The kernel P averages
over out-neighbours, P(x, y) = w(x, y) / deg(x), optionally damped by a
per-vertex killing probability. Absorbing vertices have zero rows and play
the role of the ideal boundary. Every non-absorbing vertex must be able to
lose mass (reach an absorbing vertex or a strictly substochastic one), which
guarantees a finite Green function.
"""

from __future__ import annotations

import math
import re
from typing import Iterable, Mapping, Sequence

import numpy as np
import scipy.sparse as sp

from .errors import (
    DomainMismatchError,
    IncompatibleFamilyError,
    InvalidGeometryError,
    IrregularDomainError,
)

_ROW_TOL = 1e-12


def _reaches(pattern: sp.csr_matrix, sources: np.ndarray, allowed: np.ndarray) -> np.ndarray:
    """Vertices with a directed path (within `allowed`, plus endpoints) to `sources`.

    `pattern` holds the forward edges; we walk them backwards by matvec on
    the transpose. Returns a boolean mask including the sources themselves.
    """
    fwd = pattern.tocsr()
    reached = sources.copy()
    frontier = sources.copy()
    while frontier.any():
        nxt = (fwd @ frontier.astype(np.int8)) > 0
        nxt &= allowed & ~reached
        reached |= nxt
        frontier = nxt
    return reached


class HarmonicSpace:
    """Immutable weighted graph carrying the averaging kernel P.

    Parameters
    ----------
    ids : sequence of vertex id strings (fixed iteration order).
    weights : (n, n) scipy sparse matrix of nonnegative edge conductances.
    absorbing : iterable of vertex ids with zero kernel rows.
    base_point : id of the reference vertex x0 (non-absorbing).
    killing : optional map id -> probability in [0, 1); scales the row down.
    coords : optional (n, d) array of embedding coordinates (lattices).
    spacing : optional lattice spacing used for capacity normalization.
    """

    def __init__(self, ids, weights, absorbing, base_point, killing=None,
                 coords=None, spacing=None):
        self.ids = tuple(str(i) for i in ids)
        n = len(self.ids)
        if len(set(self.ids)) != n:
            raise InvalidGeometryError("duplicate vertex ids")
        self.index = {v: i for i, v in enumerate(self.ids)}
        W = sp.csr_matrix(weights, dtype=np.float64, shape=(n, n))
        W.eliminate_zeros()
        if W.nnz and W.data.min() < 0:
            raise InvalidGeometryError("negative edge weight")
        self.W = W
        self.absorbing = np.zeros(n, dtype=bool)
        for v in absorbing:
            self.absorbing[self._idx(v)] = True
        self.killing = np.zeros(n, dtype=np.float64)
        if killing:
            for v, q in killing.items():
                if not 0.0 <= q < 1.0:
                    raise InvalidGeometryError(f"killing probability {q} out of [0, 1)")
                self.killing[self._idx(v)] = q
        self.base_point = self._idx(base_point)
        if self.absorbing[self.base_point]:
            raise InvalidGeometryError("base point must be non-absorbing")

        deg = np.asarray(W.sum(axis=1)).ravel()
        isolated = (deg == 0) & ~self.absorbing
        if isolated.any():
            bad = [self.ids[i] for i in np.flatnonzero(isolated)[:5]]
            raise InvalidGeometryError(f"isolated non-absorbing vertices: {bad}")
        scale = np.zeros(n)
        nz = deg > 0
        scale[nz] = (1.0 - self.killing[nz]) / deg[nz]
        scale[self.absorbing] = 0.0
        P = sp.diags(scale) @ W
        P = sp.csr_matrix(P)
        P.eliminate_zeros()
        self.P = P
        rows = np.asarray(P.sum(axis=1)).ravel()
        if rows.max(initial=0.0) > 1.0 + _ROW_TOL:
            raise InvalidGeometryError("kernel row sum exceeds 1")
        self.row_sums = rows

        # finite Green function: every non-absorbing vertex must reach a
        # vertex that loses mass (absorbing target or substochastic row).
        na = ~self.absorbing
        leaky = na & (rows < 1.0 - _ROW_TOL)
        hits_absorbing = na & (np.asarray((P[:, self.absorbing].sum(axis=1))).ravel() > 0) \
            if self.absorbing.any() else np.zeros(n, dtype=bool)
        escape = leaky | hits_absorbing
        reached = _reaches(P, escape, na)
        stranded = na & ~reached
        if stranded.any():
            bad = [self.ids[i] for i in np.flatnonzero(stranded)[:5]]
            raise InvalidGeometryError(
                f"no route to absorption from vertices {bad}; Green function infinite"
            )

        self.coords = None if coords is None else np.asarray(coords, dtype=np.float64)
        self.spacing = spacing
        self.n = n

    def _idx(self, v) -> int:
        if isinstance(v, (int, np.integer)):
            if not 0 <= v < len(self.ids):
                raise InvalidGeometryError(f"vertex index {v} out of range")
            return int(v)
        try:
            return self.index[str(v)]
        except KeyError:
            raise InvalidGeometryError(f"unknown vertex id {v!r}") from None

    def indices(self, vs: Iterable) -> np.ndarray:
        return np.array(sorted(self._idx(v) for v in vs), dtype=np.int64)

    @property
    def non_absorbing(self) -> np.ndarray:
        return np.flatnonzero(~self.absorbing)

    def __eq__(self, other):
        if not isinstance(other, HarmonicSpace):
            return NotImplemented
        return (
            self.ids == other.ids
            and self.base_point == other.base_point
            and np.array_equal(self.absorbing, other.absorbing)
            and np.allclose(self.killing, other.killing)
            and (self.W != other.W).nnz == 0
        )

    def __repr__(self):
        return (f"HarmonicSpace(n={self.n}, absorbing={int(self.absorbing.sum())}, "
                f"x0={self.ids[self.base_point]!r})")


class Domain:
    """A subdomain: interior vertex set plus its derived one-step boundary.

    The boundary is never stored independently: it is the set of vertices
    outside the interior hit by an interior kernel row. Construction checks
    the discrete regularity condition (every interior vertex can push mass
    to the boundary or to a killing site).
    """

    def __init__(self, space: HarmonicSpace, interior: Iterable):
        self.space = space
        self.interior = space.indices(interior)
        if self.interior.size == 0:
            raise IrregularDomainError("empty interior")
        if space.absorbing[self.interior].any():
            raise IrregularDomainError("interior contains absorbing vertices")
        mask = np.zeros(space.n, dtype=bool)
        mask[self.interior] = True
        self.interior_mask = mask
        touched = np.asarray(
            (space.P[self.interior] > 0).sum(axis=0)
        ).ravel() > 0
        self.boundary = np.flatnonzero(touched & ~mask)
        bmask = np.zeros(space.n, dtype=bool)
        bmask[self.boundary] = True
        self.boundary_mask = bmask

        leaky = mask & (space.row_sums < 1.0 - _ROW_TOL)
        exits = mask & (
            np.asarray((space.P[:, self.boundary].sum(axis=1))).ravel() > 0
            if self.boundary.size else np.zeros(space.n)
        )
        escape = leaky | exits
        reached = _reaches(space.P, escape, mask)
        stranded = mask & ~reached
        if stranded.any():
            bad = [space.ids[i] for i in np.flatnonzero(stranded)[:5]]
            raise IrregularDomainError(f"interior vertices {bad} cannot reach the boundary")

    @classmethod
    def whole_interior(cls, space: HarmonicSpace) -> "Domain":
        return cls(space, space.non_absorbing)

    def vertices(self) -> np.ndarray:
        return np.sort(np.concatenate([self.interior, self.boundary]))

    def is_subdomain_of(self, other: "Domain") -> bool:
        return self.space is other.space and bool(
            other.interior_mask[self.interior].all()
        )

    def __eq__(self, other):
        if not isinstance(other, Domain):
            return NotImplemented
        return self.space is other.space and np.array_equal(self.interior, other.interior)

    def __repr__(self):
        return f"Domain(|interior|={self.interior.size}, |boundary|={self.boundary.size})"


class ExtendedFunction:
    """Vertex function with values in [0, +inf]; infinity is an explicit mask.

    `domain` is a Domain (defined on interior + boundary) or None for a
    function on the whole space.
    """

    def __init__(self, space: HarmonicSpace, values, inf_mask=None, domain: Domain | None = None):
        self.space = space
        self.domain = domain
        self.values = np.asarray(values, dtype=np.float64).copy()
        if self.values.shape != (space.n,):
            raise DomainMismatchError("values must have one entry per vertex")
        if inf_mask is None:
            inf_mask = ~np.isfinite(self.values)
        self.inf_mask = np.asarray(inf_mask, dtype=bool).copy()
        self.values[self.inf_mask] = 0.0
        if not np.isfinite(self.values[self.defined_indices()]).all():
            raise DomainMismatchError("non-finite value without infinity marker")

    def defined_indices(self) -> np.ndarray:
        if self.domain is None:
            return np.arange(self.space.n)
        return self.domain.vertices()

    def defined_mask(self) -> np.ndarray:
        mask = np.zeros(self.space.n, dtype=bool)
        mask[self.defined_indices()] = True
        return mask

    def as_array(self) -> np.ndarray:
        out = self.values.copy()
        out[self.inf_mask] = np.inf
        return out

    def is_finite(self) -> bool:
        return not self.inf_mask[self.defined_indices()].any()

    def _same_domain(self, other: "ExtendedFunction"):
        if self.space is not other.space:
            raise DomainMismatchError("functions live on different spaces")
        if (self.domain is None) != (other.domain is None):
            raise DomainMismatchError("functions live on different domains")
        if self.domain is not None and self.domain != other.domain:
            raise DomainMismatchError("functions live on different domains")

    def copy(self) -> "ExtendedFunction":
        return ExtendedFunction(self.space, self.values, self.inf_mask, self.domain)


def restrict(f: ExtendedFunction, V: Domain) -> ExtendedFunction:
    """Pointwise restriction of `f` to the subdomain V."""
    if f.space is not V.space:
        raise DomainMismatchError("domain lives on a different space")
    if f.domain is not None:
        if not V.is_subdomain_of(f.domain):
            raise DomainMismatchError("V is not a subdomain of the function's domain")
        if V == f.domain:
            return f.copy()
    return ExtendedFunction(f.space, f.values, f.inf_mask, V)


def glue(family: Sequence[tuple[Domain, ExtendedFunction]]) -> ExtendedFunction:
    """Unique function on the union whose restriction to each piece is given.

    Pieces must agree exactly (values and infinity markers) on overlaps; the
    first offending vertex in id order is reported otherwise.
    """
    if not family:
        raise DomainMismatchError("empty family")
    space = family[0][0].space
    values = np.zeros(space.n)
    inf_mask = np.zeros(space.n, dtype=bool)
    seen = np.zeros(space.n, dtype=bool)
    union_interior: set[int] = set()
    for dom, f in family:
        if dom.space is not space or f.space is not space:
            raise DomainMismatchError("pieces live on different spaces")
        idx = dom.vertices()
        overlap = idx[seen[idx]]
        for i in overlap:
            if inf_mask[i] != f.inf_mask[i] or (
                not inf_mask[i] and values[i] != f.values[i]
            ):
                raise IncompatibleFamilyError(space.ids[i])
        values[idx] = f.values[idx]
        inf_mask[idx] = f.inf_mask[idx]
        seen[idx] = True
        union_interior.update(dom.interior.tolist())
    union = Domain(space, union_interior)
    return ExtendedFunction(space, values, inf_mask, union)


def lattice(f: ExtendedFunction, g: ExtendedFunction, which: str) -> ExtendedFunction:
    """Pointwise meet/join; infinity absorbs under join and loses under meet."""
    f._same_domain(g)
    fa, ga = f.as_array(), g.as_array()
    if which == "meet":
        out = np.minimum(fa, ga)
    elif which == "join":
        out = np.maximum(fa, ga)
    else:
        raise ValueError("which must be 'meet' or 'join'")
    return ExtendedFunction(f.space, np.where(np.isinf(out), 0.0, out),
                            np.isinf(out), f.domain)


def meet(f, g):
    return lattice(f, g, "meet")


def join(f, g):
    return lattice(f, g, "join")


def sup_norm(f: ExtendedFunction) -> float:
    idx = f.defined_indices()
    if f.inf_mask[idx].any():
        return math.inf
    if idx.size == 0:
        return 0.0
    return float(np.max(np.abs(f.values[idx])))


def bounded_transform(f: ExtendedFunction) -> np.ndarray:
    """u -> |u| / (1 + |u|), with infinity mapped to 1; lands in [0, 1]."""
    a = np.abs(f.values)
    out = a / (1.0 + a)
    out[f.inf_mask] = 1.0
    return out


def phi(u: float) -> float:
    """Scalar bounded transform."""
    if math.isinf(u):
        return 1.0
    return abs(u) / (1.0 + abs(u))


# ---------------------------------------------------------------------------
# generators


def _symmetrize(n, pairs):
    rows = np.array([p[0] for p in pairs] + [p[1] for p in pairs])
    cols = np.array([p[1] for p in pairs] + [p[0] for p in pairs])
    vals = np.ones(rows.size)
    return sp.csr_matrix((vals, (rows, cols)), shape=(n, n))


def _path(n: int) -> HarmonicSpace:
    if n < 3:
        raise InvalidGeometryError("path needs at least 3 vertices")
    ids = [str(i) for i in range(n)]
    W = _symmetrize(n, [(i, i + 1) for i in range(n - 1)])
    coords = np.arange(n, dtype=float)[:, None]
    return HarmonicSpace(ids, W, [ids[0], ids[-1]], ids[n // 2],
                         coords=coords, spacing=1.0)


def _grid2d(n: int) -> HarmonicSpace:
    if n < 3:
        raise InvalidGeometryError("grid2d needs side at least 3")
    ids = [f"{i},{j}" for i in range(n) for j in range(n)]
    lin = lambda i, j: i * n + j
    pairs = []
    for i in range(n):
        for j in range(n):
            if i + 1 < n:
                pairs.append((lin(i, j), lin(i + 1, j)))
            if j + 1 < n:
                pairs.append((lin(i, j), lin(i, j + 1)))
    W = _symmetrize(n * n, pairs)
    rim = [f"{i},{j}" for i in range(n) for j in range(n)
           if i in (0, n - 1) or j in (0, n - 1)]
    coords = np.array([(i, j) for i in range(n) for j in range(n)], dtype=float)
    return HarmonicSpace(ids, W, rim, f"{n // 2},{n // 2}", coords=coords, spacing=1.0)


def _grid3d(n: int) -> HarmonicSpace:
    if n < 3:
        raise InvalidGeometryError("grid3d needs side at least 3")
    ids = [f"{i},{j},{k}" for i in range(n) for j in range(n) for k in range(n)]
    lin = lambda i, j, k: (i * n + j) * n + k
    pairs = []
    for i in range(n):
        for j in range(n):
            for k in range(n):
                if i + 1 < n:
                    pairs.append((lin(i, j, k), lin(i + 1, j, k)))
                if j + 1 < n:
                    pairs.append((lin(i, j, k), lin(i, j + 1, k)))
                if k + 1 < n:
                    pairs.append((lin(i, j, k), lin(i, j, k + 1)))
    W = _symmetrize(n ** 3, pairs)
    rim = [f"{i},{j},{k}" for i in range(n) for j in range(n) for k in range(n)
           if i in (0, n - 1) or j in (0, n - 1) or k in (0, n - 1)]
    c = n // 2
    coords = np.array([(i, j, k) for i in range(n) for j in range(n)
                       for k in range(n)], dtype=float)
    return HarmonicSpace(ids, W, rim, f"{c},{c},{c}", coords=coords, spacing=1.0)


def _binary_tree(depth: int) -> HarmonicSpace:
    if depth < 1:
        raise InvalidGeometryError("binary tree needs depth at least 1")
    n = 2 ** (depth + 1) - 1
    ids = [str(i) for i in range(n)]
    pairs = []
    for i in range(2 ** depth - 1):
        pairs.append((i, 2 * i + 1))
        pairs.append((i, 2 * i + 2))
    W = _symmetrize(n, pairs)
    leaves = [str(i) for i in range(2 ** depth - 1, n)]
    return HarmonicSpace(ids, W, leaves, "0")


def _disk_mesh(h: float) -> HarmonicSpace:
    if not 0 < h <= 0.5:
        raise InvalidGeometryError("disk mesh spacing must be in (0, 0.5]")
    m = int(math.ceil(1.0 / h))
    pts = [(i, j) for i in range(-m, m + 1) for j in range(-m, m + 1)
           if (i * h) ** 2 + (j * h) ** 2 <= 1.0 + 1e-12]
    index = {p: k for k, p in enumerate(pts)}
    ids = [f"{i},{j}" for i, j in pts]
    pairs = []
    for (i, j), k in index.items():
        for di, dj in ((1, 0), (0, 1)):
            q = (i + di, j + dj)
            if q in index:
                pairs.append((k, index[q]))
    W = _symmetrize(len(pts), pairs)
    rim = [f"{i},{j}" for i, j in pts
           if math.hypot(i * h, j * h) > 1.0 - 1.5 * h]
    coords = np.array(pts, dtype=float) * h
    return HarmonicSpace(ids, W, rim, "0,0", coords=coords, spacing=h)


_DESCRIPTOR = re.compile(r"^\s*([a-z_][a-z0-9_]*)\s*(?:\(([^)]*)\))?\s*$", re.I)


def generate(descriptor: str) -> HarmonicSpace:
    """Build a test geometry from a descriptor like 'path(5)' or 'grid2d(7)'.

    Bare forms such as 'path5' are accepted for CLI convenience.
    """
    s = str(descriptor).strip()
    m = _DESCRIPTOR.match(s)
    if not m:
        raise InvalidGeometryError(f"cannot parse geometry descriptor {descriptor!r}")
    name, arg = m.group(1).lower(), m.group(2)
    if arg is None:
        tail = re.match(r"^([a-z_][a-z_]*?)(\d+)$", name)
        if tail:
            name, arg = tail.group(1), tail.group(2)
    builders = {
        "path": lambda a: _path(int(a)),
        "grid2d": lambda a: _grid2d(int(a)),
        "grid3d": lambda a: _grid3d(int(a)),
        "binary_tree": lambda a: _binary_tree(int(a)),
        "tree": lambda a: _binary_tree(int(a)),
        "disk_mesh": lambda a: _disk_mesh(float(a)),
    }
    if name in ("thorn", "thorn_lattice", "cone"):
        from . import polar

        if arg is None:
            raise InvalidGeometryError(f"{name} needs a resolution argument")
        parts = [p.strip() for p in arg.split(",")]
        if name == "cone":
            ap = float(parts[1]) if len(parts) > 1 else 45.0
            return polar.thorn_lattice(int(parts[0]), variant=("cone", ap))[0]
        return polar.thorn_lattice(int(parts[0]))[0]
    if name not in builders:
        raise InvalidGeometryError(f"unknown geometry {name!r}")
    if arg in (None, ""):
        raise InvalidGeometryError(f"geometry {name!r} needs an argument")
    try:
        return builders[name](arg)
    except ValueError as exc:
        raise InvalidGeometryError(str(exc)) from None
