"""Exact lattice polytopes: hulls, Minkowski sums, volumes and mixed volumes.

Everything that decides geometry is integer arithmetic.  Qhull only proposes
a triangulated boundary; each proposed facet is then certified exactly
(integer normal, every point on the inner side, every ridge shared by two
facets).  If certification fails the hull falls back to exhaustive search
over point subsets.  Coordinates stay in int64 while the determinant bound
allows it and switch to Python integers otherwise.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Iterable, Sequence

import numpy as np

MAX_DIM = 4
_INT64_SAFE = 2**62


class PolytopeError(ValueError):
    pass


@dataclass(frozen=True)
class LatticePolytope:
    """Convex hull of integer points, stored by its sorted vertex list."""

    dim: int
    vertices: tuple

    def __post_init__(self):
        verts = tuple(sorted(set(tuple(int(x) for x in v) for v in self.vertices)))
        if not verts:
            raise PolytopeError("polytope needs at least one vertex")
        if any(len(v) != self.dim for v in verts):
            raise PolytopeError("vertex length does not match dimension")
        object.__setattr__(self, "vertices", verts)

    @cached_property
    def _boundary(self):
        return _hull_data(np.array(self.vertices, dtype=object))

    @property
    def facet_normals(self) -> list[tuple]:
        """Primitive outward facet normals; empty unless full dimensional."""
        return list(self._boundary.get("normals", []))

    def to_json(self) -> dict:
        return {"dim": self.dim, "vertices": [list(v) for v in self.vertices]}

    @classmethod
    def from_json(cls, data) -> "LatticePolytope":
        return cls(int(data["dim"]), tuple(tuple(v) for v in data["vertices"]))

    def translate(self, shift: Sequence[int]) -> "LatticePolytope":
        return LatticePolytope(self.dim, tuple(tuple(a + b for a, b in zip(v, shift)) for v in self.vertices))


@dataclass(frozen=True)
class Degrees:
    alpha: int
    beta: int

    def to_json(self) -> dict:
        return {"alpha": self.alpha, "beta": self.beta}


# ---------------------------------------------------------------------------
# exact integer helpers
# ---------------------------------------------------------------------------


def _as_exact(a: np.ndarray, degree: int) -> np.ndarray:
    """int64 if every degree-``degree`` product sum fits, else Python ints."""
    a = np.asarray(a, dtype=object)
    if a.size == 0:
        return a.astype(np.int64)
    m = max(abs(int(x)) for x in a.flat)
    if len(a) * math.factorial(degree) * (m + 1) ** degree * 4 < _INT64_SAFE:
        return a.astype(np.int64)
    return a


def _det(m: np.ndarray) -> np.ndarray:
    """Batched exact determinant by cofactor expansion; ``m`` has shape (..., k, k)."""
    k = m.shape[-1]
    if k == 0:
        return np.ones(m.shape[:-2], dtype=m.dtype)
    if k == 1:
        return m[..., 0, 0]
    if k == 2:
        return m[..., 0, 0] * m[..., 1, 1] - m[..., 0, 1] * m[..., 1, 0]
    total = 0
    for j in range(k):
        minor = np.delete(m[..., 1:, :], j, axis=-1)
        term = m[..., 0, j] * _det(minor)
        total = total + term if j % 2 == 0 else total - term
    return total


def _normals(edges: np.ndarray) -> np.ndarray:
    """Integer normals of hyperplanes spanned by (..., N-1, N) edge vectors."""
    n = edges.shape[-1]
    cols = []
    for k in range(n):
        c = _det(np.delete(edges, k, axis=-1))
        cols.append(c if k % 2 == 0 else -c)
    return np.stack(cols, axis=-1)


def integer_rank(rows) -> int:
    """Exact rank of an integer matrix (fraction-free elimination)."""
    m = [[int(x) for x in r] for r in rows]
    if not m:
        return 0
    ncols = len(m[0])
    rank = 0
    prev = 1
    for c in range(ncols):
        piv = next((r for r in range(rank, len(m)) if m[r][c] != 0), None)
        if piv is None:
            continue
        m[rank], m[piv] = m[piv], m[rank]
        for r in range(rank + 1, len(m)):
            for cc in range(c + 1, ncols):
                m[r][cc] = (m[rank][c] * m[r][cc] - m[r][c] * m[rank][cc]) // prev
            m[r][c] = 0
        prev = m[rank][c]
        rank += 1
        if rank == len(m):
            break
    return rank


# ---------------------------------------------------------------------------
# hull machinery
# ---------------------------------------------------------------------------


def _qhull_simplices(pts: np.ndarray):
    from scipy.spatial import ConvexHull, QhullError

    try:
        hull = ConvexHull(pts.astype(float))
    except (QhullError, ValueError):
        return None
    return hull.simplices


def _certify(pts: np.ndarray, simplices) -> tuple[np.ndarray, np.ndarray, np.ndarray] | None:
    """Exactly check a proposed triangulated boundary.

    The boundary must be closed (every ridge in exactly two simplices) and
    every nondegenerate simplex must span a supporting hyperplane.  Returns
    ``(simplices, normals, offsets)`` for the nondegenerate simplices with
    outward normals, or None.
    """
    if simplices is None or len(simplices) == 0:
        return None
    k, n = pts.shape
    simplices = np.asarray(simplices)
    ridges = Counter()
    for s in simplices:
        for r in itertools.combinations(sorted(int(i) for i in s), n - 1):
            ridges[r] += 1
    if any(c != 2 for c in ridges.values()):
        return None
    base = pts[simplices[:, 0]]
    edges = pts[simplices[:, 1:]] - base[:, None, :]
    normals = _normals(edges)
    keep = ~np.all(normals == 0, axis=1)
    if not np.any(keep):
        return None
    simplices, normals, base = simplices[keep], normals[keep], base[keep]
    offsets = np.einsum("fi,fi->f", normals, base)
    total = pts.sum(axis=0)
    # interior test against the centroid total/k
    side = normals @ total - k * offsets
    if np.any(side == 0):
        return None
    flip = side > 0
    normals = np.where(flip[:, None], -normals, normals)
    offsets = np.where(flip, -offsets, offsets)
    if np.any(pts @ normals.T > offsets[None, :]):
        return None
    return simplices, normals, offsets


def _exhaustive_boundary(pts: np.ndarray):
    """Supporting hyperplanes through every affinely independent N-subset."""
    k, n = pts.shape
    idx = np.array(list(itertools.combinations(range(k), n)))
    sub = pts[idx]
    nv = _normals(sub[:, 1:] - sub[:, :1])
    b = np.einsum("ci,ci->c", nv, sub[:, 0])
    vals = pts @ nv.T
    below = np.all(vals <= b[None, :], axis=0)
    above = np.all(vals >= b[None, :], axis=0)
    nonzero = ~np.all(nv == 0, axis=1)
    facets = set()
    for c in np.flatnonzero(nonzero & (below | above)):
        sgn = 1 if below[c] else -1
        key = tuple(sgn * int(x) for x in nv[c]) + (sgn * int(b[c]),)
        g = math.gcd(*key)
        facets.add(tuple(x // g for x in key))
    if not facets:
        return None
    simplices, normals, offsets = [], [], []
    for key in sorted(facets):
        nv_arr = np.array(key[:-1], dtype=object)
        on = [i for i in range(k) if pts[i] @ nv_arr == key[-1]]
        face = pts[on]
        # cone triangulation of the facet from one of its vertices
        axes = _injective_axes(face[1:] - face[0], n - 1)
        sub_data = _hull_data(face[:, axes])
        apex = sub_data["vertices"][0]
        for s in sub_data["simplices"]:
            if apex in s:
                continue
            simplices.append([on[apex]] + [on[i] for i in s])
            normals.append(nv_arr)
            offsets.append(key[-1])
    return np.array(simplices), np.array(normals, dtype=object), np.array(offsets, dtype=object)


def _injective_axes(diffs: np.ndarray, r: int) -> list[int]:
    """Coordinate axes on which the affine span (rank ``r``) projects injectively."""
    n = diffs.shape[1] if diffs.ndim == 2 and diffs.size else 0
    for axes in itertools.combinations(range(n), r):
        if integer_rank(diffs[:, list(axes)].tolist()) == r:
            return list(axes)
    raise PolytopeError("no injective projection found")


def _primitive(row) -> tuple:
    v = [int(x) for x in row]
    g = math.gcd(*v)
    return tuple(x // g for x in v)


def _hull_data(pts: np.ndarray) -> dict:
    """Vertices, boundary triangulation and normalized volume of a point set.

    Keys: ``vertices`` (indices), ``simplices`` (boundary triangulation, only
    for full-dimensional sets), ``volume`` (N! * Euclidean volume, 0 when
    lower dimensional), ``rank`` (affine dimension).
    """
    pts = np.asarray(pts, dtype=object)
    k, n = pts.shape
    if k == 1:
        return {"vertices": [0], "simplices": [], "volume": 0, "rank": 0}
    diffs = pts[1:] - pts[0]
    r = integer_rank(diffs.tolist())
    if r == 0:
        return {"vertices": [0], "simplices": [], "volume": 0, "rank": 0}
    if r < n:
        axes = _injective_axes(diffs, r)
        sub = _hull_data(pts[:, axes])
        return {"vertices": sub["vertices"], "simplices": [], "volume": 0, "rank": r}
    if n == 1:
        vals = [int(x) for x in pts[:, 0]]
        lo = vals.index(min(vals))
        hi = vals.index(max(vals))
        return {"vertices": sorted({lo, hi}), "simplices": [[lo], [hi]],
                "volume": max(vals) - min(vals), "rank": 1, "normals": [(-1,), (1,)]}
    exact = _as_exact(pts, n + 1)
    cert = _certify(exact, _qhull_simplices(exact))
    if cert is None:
        # exhaustive facet search; exact by construction
        cert = _exhaustive_boundary(pts)
        if cert is None:
            raise PolytopeError("could not determine convex hull")
        exact = pts
    simplices, normals, offsets = cert
    # volume: cone from vertex 0 of the first simplex over every boundary simplex
    apex = exact[simplices[0][0]]
    mats = exact[simplices] - apex[None, None, :]
    volume = int(sum(abs(int(d)) for d in _det(mats)))
    # vertices: points whose tight facet normals have full rank
    tight = (exact @ normals.T) == offsets[None, :]
    vertices = []
    for i in range(k):
        rows = normals[tight[i]]
        if len(rows) >= n:
            uniq = {tuple(int(x) for x in r) for r in rows}
            if integer_rank(list(uniq)) == n:
                vertices.append(i)
    facets = sorted({_primitive(r) for r in normals})
    return {"vertices": vertices, "simplices": simplices.tolist(), "volume": volume, "rank": n,
            "normals": facets}


# ---------------------------------------------------------------------------
# public operations
# ---------------------------------------------------------------------------


def convex_hull(points: Iterable[Sequence[int]], *, max_dim: int = MAX_DIM) -> LatticePolytope:
    """Minimal vertex set of the hull of integer points."""
    pts = sorted({tuple(int(x) for x in p) for p in points})
    if not pts:
        raise PolytopeError("convex hull of an empty point set")
    n = len(pts[0])
    if any(len(p) != n for p in pts):
        raise PolytopeError("points have different lengths")
    if n > max_dim:
        raise PolytopeError(f"dimension {n} exceeds the limit {max_dim}")
    if n == 0:
        return LatticePolytope(0, ((),))
    data = _hull_data(np.array(pts, dtype=object))
    poly = LatticePolytope(n, tuple(pts[i] for i in data["vertices"]))
    # the volume does not depend on which generating set produced it
    poly.__dict__["_boundary"] = data
    return poly


def minkowski_sum(p: LatticePolytope, q: LatticePolytope) -> LatticePolytope:
    if p.dim != q.dim:
        raise PolytopeError("Minkowski sum of polytopes of different dimension")
    return convex_hull(
        (tuple(a + b for a, b in zip(u, v)) for u in p.vertices for v in q.vertices),
        max_dim=max(p.dim, MAX_DIM),
    )


def negate(p: LatticePolytope) -> LatticePolytope:
    return LatticePolytope(p.dim, tuple(tuple(-x for x in v) for v in p.vertices))


def normalized_volume(p: LatticePolytope, *, max_dim: int = MAX_DIM) -> int:
    """``N! * vol(P)``: an integer, 0 for lower-dimensional polytopes."""
    if p.dim > max_dim:
        raise PolytopeError(f"dimension {p.dim} exceeds the limit {max_dim}")
    if p.dim == 0:
        return 1
    return int(p._boundary["volume"])


def mixed_volume(polys: Sequence[LatticePolytope]) -> int:
    """Normalized mixed volume, equal to the Bernstein-Kouchnirenko root count.

    Inclusion-exclusion over all nonempty subsets of Minkowski summands;
    ``MV(P, ..., P) == normalized_volume(P)``.
    """
    polys = list(polys)
    if not polys:
        raise PolytopeError("mixed volume of an empty list")
    n = polys[0].dim
    if any(p.dim != n for p in polys):
        raise PolytopeError("polytopes of different dimensions")
    if len(polys) != n:
        raise PolytopeError(f"mixed volume in dimension {n} needs {n} polytopes, got {len(polys)}")
    if n > MAX_DIM:
        raise PolytopeError(f"dimension {n} exceeds the limit {MAX_DIM}")
    sums: dict[tuple[int, ...], LatticePolytope] = {}
    total = 0
    for size in range(1, n + 1):
        for subset in itertools.combinations(range(n), size):
            if size == 1:
                s = polys[subset[0]]
            else:
                s = minkowski_sum(sums[subset[:-1]], polys[subset[-1]])
            sums[subset] = s
            sign = 1 if (n - size) % 2 == 0 else -1
            total += sign * normalized_volume(s)
    q, rem = divmod(total, math.factorial(n))
    if rem:
        raise ArithmeticError(f"mixed volume sum {total} not divisible by {n}!")
    return q


@lru_cache(maxsize=256)
def alpha_beta(system) -> Degrees:
    """conj-degree and conj'-degree of a complete intersection from its Newton polytopes."""
    deltas = [convex_hull(e for e, _ in f.terms) for f in system.polys]
    alpha = mixed_volume(deltas + deltas)
    beta = mixed_volume([negate(d) for d in deltas] + deltas)
    if beta % 2:
        raise ArithmeticError(f"conj'-degree {beta} is odd")
    return Degrees(alpha, beta)
