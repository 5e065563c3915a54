"""Fibers of the amoeba map ``Log|_V`` and the rolled coamoeba map ``Arg_pi|_V``.

Two routes compute a fiber:

* multistart Newton in the fiber chart (any ``n``): for the amoeba the log
  moduli ``q`` are fixed and the arguments ``theta`` are unknown; for the
  coamoeba the arguments are fixed to ``p + pi*sigma`` for every sign
  vector ``sigma`` and the log moduli are unknown;
* an exact route for curves (``n = 1``): every fiber point is a root of an
  enclosing complex system (``V`` meets a rotated conjugate, resp. a scaled
  inverse conjugate, of itself), which is solved completely by resultants
  and then filtered back to the fiber.

Pointwise diagnostics (tangent space, the form ``prod dx - prod dy``,
orientation sign, critical rank) live here as well.  All Jacobian rows are
divided by the sum of term magnitudes of their equation, so thresholds are
scale free.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Sequence

import numpy as np

from . import rng
from .laurent import (
    DimensionError,
    LaurentPolynomial,
    LogPolarPoint,
    PolySystem,
    conj_poly,
    conj_prime_poly,
    evaluate_system,
    translate,
    normalized_terms,
)
from .polytope import alpha_beta, convex_hull
from .resultant import NonGenericQueryError, Support, solve_pairs

TWO_PI = 2.0 * math.pi
RANK_TOL = 1e-8
AMBIGUOUS_TOL = 1e-6
REFINE_MOVE = 1e-5

__all__ = [
    "SolverConfig",
    "FiberSolution",
    "FiberReport",
    "SingularPointError",
    "NonGenericQueryError",
    "amoeba_fiber",
    "coamoeba_fiber",
    "tangent_basis",
    "omega_form",
    "omega_residual",
    "orientation_sign",
    "critical_rank",
    "curve_conj_intersections",
    "curve_fiber_exact",
    "fiber_counts",
    "enclosing_system",
    "enclosing_residual",
    "diagnose",
]


class SingularPointError(ArithmeticError):
    """The holomorphic Jacobian drops rank: the point is singular on V."""


@dataclass(frozen=True)
class SolverConfig:
    tol: float = 1e-9
    regularity_threshold: float = 1e-8
    dedupe_tol: float = 1e-7
    random_starts: int = 16
    ray_starts: int = 8
    max_rays: int = 24
    search_box: float = 12.0
    max_iters: int = 50
    seed: int = 0

    def to_json(self) -> dict:
        return {
            "tol": self.tol,
            "regularityThreshold": self.regularity_threshold,
            "dedupeTol": self.dedupe_tol,
            "randomStarts": self.random_starts,
            "rayStarts": self.ray_starts,
            "maxRays": self.max_rays,
            "searchBox": self.search_box,
            "maxIters": self.max_iters,
            "seed": self.seed,
        }


@dataclass(frozen=True)
class FiberSolution:
    point: LogPolarPoint
    residual: float
    min_singular: float
    sign: int
    rank: int

    def to_json(self) -> dict:
        return {
            "q": self.point.q.tolist(),
            "theta": self.point.theta.tolist(),
            "residual": self.residual,
            "minSingular": self.min_singular,
            "sign": self.sign,
            "rank": self.rank,
        }


@dataclass(frozen=True)
class FiberReport:
    space: str
    query: tuple
    solutions: tuple
    regular: bool
    exhaustive: bool
    notes: str = ""

    @property
    def count(self) -> int:
        return len(self.solutions)

    @property
    def signed_count(self) -> int:
        return sum(s.sign for s in self.solutions)

    def to_json(self) -> dict:
        return {
            "space": self.space,
            "query": list(self.query),
            "count": self.count,
            "signedCount": self.signed_count,
            "regular": self.regular,
            "exhaustive": self.exhaustive,
            "solutions": [s.to_json() for s in self.solutions],
            "notes": self.notes,
        }


def _check_space(space: str):
    if space not in ("amoeba", "coamoeba"):
        raise ValueError(f"space must be 'amoeba' or 'coamoeba', got {space!r}")


def _query_array(system: PolySystem, query) -> np.ndarray:
    v = np.asarray(query, dtype=float).reshape(-1)
    if v.size != system.nvars:
        raise DimensionError(f"query has {v.size} entries, expected {system.nvars}")
    if not np.all(np.isfinite(v)):
        raise ValueError("query must be finite")
    return v


# ---------------------------------------------------------------------------
# pointwise diagnostics
# ---------------------------------------------------------------------------


def _scaled_jacobian(system: PolySystem, z: LogPolarPoint):
    vals, jac, scale = evaluate_system(system, z.q, z.theta, check=True)
    return vals / scale, jac / scale[:, None]


def tangent_basis(system: PolySystem, z: LogPolarPoint) -> np.ndarray:
    """Orthonormal basis of ``T_z V`` in logarithmic coordinates, shape (2n, n).

    Columns span the kernel of the holomorphic Jacobian in ``w = log z``.
    """
    if z.dim != system.nvars:
        raise DimensionError("point dimension does not match system")
    _, jac = _scaled_jacobian(system, z)
    _, s, vh = np.linalg.svd(jac)
    n = system.n
    if s[-1] <= 1e-10 * max(s[0], 1e-300):
        raise SingularPointError("Jacobian is rank deficient at this point")
    return vh[n:].conj().T


def _frame(basis: np.ndarray) -> np.ndarray:
    """Interleaved complex frame (v1, i v1, ..., vn, i vn) as a (2n, 2n) complex matrix."""
    cols = []
    for k in range(basis.shape[1]):
        cols.append(basis[:, k])
        cols.append(1j * basis[:, k])
    return np.stack(cols, axis=1)


def omega_form(frame: np.ndarray) -> float:
    """``(prod dx - prod dy)`` evaluated on a real 2n-frame given as complex columns."""
    frame = np.asarray(frame, dtype=complex)
    return float(np.linalg.det(frame.real) - np.linalg.det(frame.imag))


def omega_residual(system: PolySystem, z: LogPolarPoint) -> float:
    """``|omega|`` on an orthonormal complex frame of ``T_z V``; vanishes on holomorphic V."""
    return abs(omega_form(_frame(tangent_basis(system, z))))


def orientation_sign(system: PolySystem, z: LogPolarPoint, threshold: float = 1e-8) -> int:
    """Sign of ``dx_1 ^ ... ^ dx_2n`` on the complex orientation of ``T_z V``.

    0 when the determinant is below ``threshold`` (critical point of Log|_V).
    """
    d = float(np.linalg.det(_frame(tangent_basis(system, z)).real))
    if abs(d) < threshold:
        return 0
    return 1 if d > 0 else -1


def _real_stack(jac: np.ndarray) -> np.ndarray:
    return np.concatenate([jac.real, jac.imag], axis=-2)


def critical_rank(system: PolySystem, z: LogPolarPoint) -> int:
    """Real dimension of ``T_z V`` intersected with the tangent space of ``z (R^x)^{2n}``."""
    tangent_basis(system, z)
    _, jac = _scaled_jacobian(system, z)
    s = np.linalg.svd(_real_stack(jac), compute_uv=False)
    return int(np.sum(s < RANK_TOL))


def diagnose(system: PolySystem, z: LogPolarPoint, cfg: SolverConfig = SolverConfig()) -> FiberSolution:
    """Residual, regularity, orientation sign and critical rank at a point of V."""
    vals, jac = _scaled_jacobian(system, z)
    residual = float(np.max(np.abs(vals)))
    s = np.linalg.svd(_real_stack(jac), compute_uv=False)
    min_sing = float(s[-1])
    rank = int(np.sum(s < RANK_TOL))
    try:
        basis = tangent_basis(system, z)
    except SingularPointError:
        return FiberSolution(z, residual, min_sing, 0, min(rank, system.n))
    if min_sing <= cfg.regularity_threshold:
        sign = 0
    else:
        d = float(np.linalg.det(_frame(basis).real))
        sign = 1 if d > 0 else -1 if d < 0 else 0
    return FiberSolution(z, residual, min_sing, sign, rank)


# ---------------------------------------------------------------------------
# enclosing systems
# ---------------------------------------------------------------------------


def enclosing_system(system: PolySystem, space: str, query) -> tuple[LaurentPolynomial, ...]:
    """Second half of the complex system that contains the fiber.

    coamoeba at ``p``: ``conj(f)(e^{-2ip} z)``, whose zero set is ``e^{2ip} conj(V)``;
    amoeba at ``q``: ``conj'(f)(e^{-2q} z)``, whose zero set is ``e^{2q} conj'(V)``.
    """
    _check_space(space)
    v = _query_array(system, query)
    if space == "coamoeba":
        eps = LogPolarPoint(np.zeros_like(v), -2.0 * v)
        return tuple(translate(conj_poly(f), eps) for f in system.polys)
    eps = LogPolarPoint(-2.0 * v, np.zeros_like(v))
    return tuple(translate(conj_prime_poly(f), eps) for f in system.polys)


def enclosing_residual(system: PolySystem, space: str, query, z: LogPolarPoint) -> float:
    """Scaled residual of the enclosing conjugate system at ``z``."""
    polys = enclosing_system(system, space, query)
    enc = PolySystem(polys, system.var_names)
    vals, _, scale = evaluate_system(enc, z.q, z.theta, check=True)
    return float(np.max(np.abs(vals) / scale))


# ---------------------------------------------------------------------------
# batched Newton in a fiber chart
# ---------------------------------------------------------------------------


def _chart(space, fixed, u):
    return (fixed, u) if space == "amoeba" else (u, fixed)


def _residual_and_jacobian(system, space, fixed, u):
    q, th = _chart(space, fixed, u)
    with np.errstate(all="ignore"):
        vals, jac, scale = evaluate_system(system, q, th, normalize=True)
        r = vals / scale
        d = jac / scale[..., None]
        if space == "amoeba":
            d = 1j * d
    resid = np.concatenate([r.real, r.imag], axis=-1)
    rjac = np.concatenate([d.real, d.imag], axis=-2)
    return resid, rjac


def _solve(a, b):
    try:
        return np.linalg.solve(a, b[..., None])[..., 0]
    except np.linalg.LinAlgError:
        return np.einsum("bij,bj->bi", np.linalg.pinv(a), b)


def _newton(system: PolySystem, space: str, fixed: np.ndarray, u0: np.ndarray, cfg: SolverConfig,
            limit: float | None = None):
    """Batched Newton; returns final unknowns and a converged mask."""
    u = np.array(u0, dtype=float)
    fixed = np.asarray(fixed, dtype=float)
    nb = len(u)
    active = np.ones(nb, dtype=bool)
    dead = np.zeros(nb, dtype=bool)
    last = np.full(nb, np.inf)
    max_step = 1.0 if space == "amoeba" else 2.0
    if limit is None:
        limit = cfg.search_box + 1.0
    for _ in range(cfg.max_iters):
        idx = np.flatnonzero(active)
        if not len(idx):
            break
        resid, rjac = _residual_and_jacobian(system, space, fixed[idx], u[idx])
        finite = np.all(np.isfinite(resid), axis=1) & np.all(np.isfinite(rjac), axis=(1, 2))
        dead[idx[~finite]] = True
        active[idx[~finite]] = False
        idx, resid, rjac = idx[finite], resid[finite], rjac[finite]
        if not len(idx):
            break
        with np.errstate(all="ignore"):
            step = -_solve(rjac, resid)
        bad = ~np.all(np.isfinite(step), axis=1)
        step[bad] = 0.0
        dead[idx[bad]] = True
        active[idx[bad]] = False
        size = np.max(np.abs(step), axis=1)
        scale = np.where(size > max_step, max_step / np.maximum(size, 1e-300), 1.0)
        new = u[idx] + step * scale[:, None]
        last[idx] = size
        if space == "amoeba":
            new = np.mod(new, TWO_PI)
        u[idx] = new
        done = size < 1e-12 * (1.0 + np.max(np.abs(new), axis=1))
        if space == "coamoeba":
            out = np.max(np.abs(new), axis=1) > limit
            dead[idx[out]] = True
            active[idx[out]] = False
        active[idx[done]] = False
    resid, _ = _residual_and_jacobian(system, space, fixed, u)
    with np.errstate(invalid="ignore"):
        rmax = np.max(np.abs(resid), axis=1)
    # an iterate still moving when the budget runs out has not converged
    settled = last < cfg.dedupe_tol * (1.0 + np.max(np.abs(u), axis=1))
    ok = ~dead & settled & np.isfinite(rmax) & (rmax <= cfg.tol)
    return u, ok


def _amoeba_starts(system: PolySystem, seed: int, cfg: SolverConfig) -> np.ndarray:
    nv = system.nvars
    beta = max(alpha_beta(system).beta, 1)
    per_axis = math.ceil((8 * beta) ** (1.0 / nv))
    axis = (np.arange(per_axis) + 0.5) * TWO_PI / per_axis
    grid = np.array(list(itertools.product(axis, repeat=nv)))
    rand = rng.uniforms(rng.stream_keys(seed, np.arange(cfg.random_starts)), nv) * TWO_PI
    return np.concatenate([grid, rand.reshape(-1, nv)])


@lru_cache(maxsize=64)
def _tentacle_rays(system: PolySystem) -> tuple[np.ndarray, np.ndarray]:
    """Base points and unit directions of the asymptotic rays of the amoeba.

    For a facet of a Newton polytope with outer normal ``nu`` and two of its
    monomials, the balancing hyperplane ``|c_i z^a_i| = |c_j z^a_j|`` contains
    the ray ``base + s * nu``.  Far out, fiber points sit near these rays and
    their Newton basins are thin strips along them.
    """
    bases, dirs = [], []
    for f in system.polys:
        e = f.exponents.astype(float)
        logc = np.log(np.abs(f.coeffs))
        for nu in convex_hull(map(tuple, f.exponents)).facet_normals:
            nu = np.array(nu, dtype=float)
            h = e @ nu
            on = np.flatnonzero(h == h.max())
            for i, j in itertools.combinations(on, 2):
                d = e[i] - e[j]
                bases.append(d * (logc[j] - logc[i]) / (d @ d))
                dirs.append(nu / np.linalg.norm(nu))
    if not bases:
        return np.zeros((0, system.nvars)), np.zeros((0, system.nvars))
    return np.array(bases), np.array(dirs)


def _coamoeba_starts(system: PolySystem, seed: int, cfg: SolverConfig):
    """Sector labels and log-modulus starts: origin, jittered rays, uniform box."""
    nv = system.nvars
    sectors = np.array(list(itertools.product((0, 1), repeat=nv)), dtype=float)
    ns = len(sectors)
    radii = np.arange(1, cfg.ray_starts + 1) * (cfg.search_box / max(cfg.ray_starts, 1))
    bases, dirs = _tentacle_rays(system)
    if len(bases) > cfg.max_rays:
        pick = np.linspace(0, len(bases) - 1, cfg.max_rays).round().astype(int)
        bases, dirs = bases[pick], dirs[pick]
    rays = (bases[:, None, :] + radii[None, :, None] * dirs[:, None, :]).reshape(-1, nv)
    n_ray = len(rays) * ns
    keys = rng.stream_keys(seed, np.arange(n_ray + ns * cfg.random_starts))
    u = rng.uniforms(keys, nv)
    q_ray = np.tile(rays, (ns, 1)) + (u[:n_ray] - 0.5)
    q_box = (2.0 * u[n_ray:] - 1.0) * cfg.search_box
    q0 = np.concatenate([np.zeros((ns, nv)), q_ray, q_box])
    sec = np.concatenate([
        sectors,
        np.repeat(sectors, len(rays), axis=0),
        np.repeat(sectors, cfg.random_starts, axis=0),
    ])
    return sec, q0


def _circ(a):
    return np.abs((a + math.pi) % TWO_PI - math.pi)


def _dedupe(points: list[tuple[np.ndarray, np.ndarray]], tol: float):
    points = sorted(points, key=lambda pt: tuple(np.round(np.concatenate(pt), 12)))
    kept: list[tuple[np.ndarray, np.ndarray]] = []
    for q, th in points:
        for kq, kth in kept:
            d = max(np.max(np.abs(q - kq)), np.max(_circ(th - kth)))
            if d < tol:
                break
        else:
            kept.append((q, th))
    return kept


def _dominated(system: PolySystem, q: np.ndarray) -> np.ndarray:
    """Queries where some equation has a term outweighing all others together.

    Such an equation cannot vanish on the torus ``|z| = e^q``, so the amoeba
    fiber is empty.
    """
    out = np.zeros(len(q), dtype=bool)
    for f in system.polys:
        mag = np.abs(normalized_terms(f, q, np.zeros_like(q)))
        out |= mag.sum(axis=-1) < 2.0 * (1.0 - 1e-9)
    return out


def _multistart(system, space, queries, seeds, cfg):
    """Deduplicated converged points for each query: list of lists of (q, theta)."""
    queries = np.atleast_2d(np.asarray(queries, dtype=float))
    nq, nv = queries.shape
    per_query = []
    if space == "amoeba":
        fixed_parts, u_parts = [], []
        empty = _dominated(system, queries)
        for i in range(nq):
            if empty[i]:
                u_parts.append(np.zeros((0, nv)))
                fixed_parts.append(np.zeros((0, nv)))
                continue
            starts = _amoeba_starts(system, int(seeds[i]), cfg)
            u_parts.append(starts)
            fixed_parts.append(np.broadcast_to(queries[i], starts.shape))
        owner = np.repeat(np.arange(nq), [len(s) for s in u_parts])
        fixed = np.concatenate(fixed_parts)
        u, ok = _newton(system, space, fixed, np.concatenate(u_parts), cfg)
        q_all, th_all = fixed, u
    else:
        fixed_parts, u_parts = [], []
        for i in range(nq):
            sec, q0 = _coamoeba_starts(system, int(seeds[i]), cfg)
            fixed_parts.append(np.mod(queries[i] + math.pi * sec, TWO_PI))
            u_parts.append(q0)
        owner = np.repeat(np.arange(nq), [len(s) for s in u_parts])
        fixed = np.concatenate(fixed_parts)
        u, ok = _newton(system, space, fixed, np.concatenate(u_parts), cfg)
        q_all, th_all = u, fixed
    for i in range(nq):
        sel = np.flatnonzero((owner == i) & ok)
        pts = [(q_all[j].copy(), np.mod(th_all[j], TWO_PI)) for j in sel]
        per_query.append(_dedupe(pts, cfg.dedupe_tol))
    return per_query


def _report_from_points(system, space, query, pts, cfg, exhaustive, notes="") -> FiberReport:
    sols = []
    for q, th in pts:
        z = LogPolarPoint(q, th)
        sol = diagnose(system, z, cfg)
        if sol.residual > cfg.tol:
            continue
        sols.append(sol)
    sols.sort(key=lambda s: tuple(np.concatenate([s.point.q, s.point.theta])))
    regular = all(s.min_singular > cfg.regularity_threshold for s in sols)
    return FiberReport(space, tuple(float(x) for x in query), tuple(sols), regular, exhaustive, notes)


def amoeba_fiber(system: PolySystem, q, cfg: SolverConfig = SolverConfig()) -> FiberReport:
    """Points of V with ``Log z = q``, by multistart Newton over the argument torus."""
    q = _query_array(system, q)
    pts = _multistart(system, "amoeba", q[None], [cfg.seed], cfg)[0]
    return _report_from_points(system, "amoeba", q, pts, cfg, exhaustive=False)


def coamoeba_fiber(system: PolySystem, p, cfg: SolverConfig = SolverConfig()) -> FiberReport:
    """Points of V with ``Arg z = p (mod pi)``, by multistart Newton in every sign sector."""
    p = np.mod(_query_array(system, p), math.pi)
    pts = _multistart(system, "coamoeba", p[None], [cfg.seed], cfg)[0]
    return _report_from_points(system, "coamoeba", p, pts, cfg, exhaustive=False)


# ---------------------------------------------------------------------------
# exact route for curves
# ---------------------------------------------------------------------------


def _require_curve(system: PolySystem):
    if system.n != 1:
        raise ValueError("the exact fiber route needs a curve (n = 1)")


def _chart_pairs(system: PolySystem, space: str, queries: np.ndarray):
    """Supports and per-query coefficients of the enclosing system in the fiber chart.

    The chart is ``z = e^{ip} t`` (coamoeba; fiber = real ``t``) or
    ``z = e^{q} t`` (amoeba; fiber = unimodular ``t``).  In it the system is
    ``h = f(chart)`` together with ``conj(h)`` resp. ``conj'(h)``.
    """
    f = system.polys[0]
    a = f.exponents.astype(float)
    if space == "coamoeba":
        h = f.coeffs[None, :] * np.exp(1j * (queries @ a.T))
        gexp = f.exponents
        g = h.conj()
    else:
        logs = queries @ a.T
        logs = logs - logs.max(axis=1, keepdims=True)
        h = f.coeffs[None, :] * np.exp(logs)
        gexp = -f.exponents
        g = h.conj()
    return Support.of(f.exponents), h, Support.of(gexp), g


def _exact_batch(system: PolySystem, space: str, queries: np.ndarray, cfg: SolverConfig):
    """Solve the enclosing systems for all queries and filter roots to fibers.

    Roots within ``AMBIGUOUS_TOL`` of the fiber locus are refined by real
    Newton in the fiber chart; those that converge nearby are fiber points,
    the rest make their query ambiguous.  Returns ``(owner, q, theta,
    ambiguous, nongeneric)`` with one row of ``q, theta`` per fiber point.
    """
    fsup, h, gsup, g = _chart_pairs(system, space, queries)
    roots = solve_pairs(fsup, h, gsup, g)
    x, y, ok = roots.x, roots.y, roots.valid
    with np.errstate(all="ignore"):
        if space == "coamoeba":
            dev = np.maximum(np.abs(x.imag) / np.abs(x), np.abs(y.imag) / np.abs(y))
        else:
            dev = np.maximum(np.abs(np.abs(x) - 1.0), np.abs(np.abs(y) - 1.0))
    near = ok & (dev <= AMBIGUOUS_TOL)
    qi, ki = np.nonzero(near)
    t = np.stack([x[qi, ki], y[qi, ki]], axis=1)
    if space == "coamoeba":
        u0 = np.log(np.abs(t.real))
        fixed = queries[qi] + np.where(t.real < 0, math.pi, 0.0)
    else:
        u0 = np.mod(np.angle(t), TWO_PI)
        fixed = queries[qi]
    u, conv = _newton(system, space, fixed, u0, cfg, limit=math.inf)
    moved = np.max(_circ(u - u0) if space == "amoeba" else np.abs(u - u0), axis=1) if len(qi) else np.zeros(0)
    accept = conv & (moved <= REFINE_MOVE)
    ambiguous = np.zeros(len(queries), dtype=bool)
    ambiguous[qi[~accept]] = True
    qi, fixed, u = qi[accept], fixed[accept], u[accept]
    if space == "coamoeba":
        q_pts, th_pts = u, np.mod(fixed, TWO_PI)
    else:
        q_pts, th_pts = fixed, u
    # two roots refining to one point signal a double root
    keep = np.ones(len(qi), dtype=bool)
    for a_ in range(len(qi)):
        for b_ in range(a_ + 1, len(qi)):
            if qi[a_] != qi[b_] or not keep[b_]:
                continue
            d = max(np.max(np.abs(q_pts[a_] - q_pts[b_])), np.max(_circ(th_pts[a_] - th_pts[b_])))
            if d < cfg.dedupe_tol:
                keep[b_] = False
                ambiguous[qi[a_]] = True
    return qi[keep], q_pts[keep], th_pts[keep], ambiguous, roots.nongeneric


def curve_conj_intersections(system: PolySystem, p) -> int:
    """Number of points of ``V`` meeting ``e^{2ip} conj(V)`` in the torus.

    Equal to the conj-degree for generic ``p``.  Solved in the rotated chart
    ``z = e^{ip} t`` where the pair becomes ``h, conj(h)``; the rotation is a
    bijection of the torus, so the count is that of the original pair.
    """
    _require_curve(system)
    p = _query_array(system, p)
    fsup, h, gsup, g = _chart_pairs(system, "coamoeba", p[None])
    roots = solve_pairs(fsup, h, gsup, g)
    if roots.nongeneric[0]:
        raise NonGenericQueryError("V and its rotated conjugate share a component")
    return int(roots.valid[0].sum())


def curve_fiber_exact(system: PolySystem, space: str, query, cfg: SolverConfig = SolverConfig()) -> FiberReport:
    """Complete fiber of a curve through its enclosing conjugate system."""
    _require_curve(system)
    _check_space(space)
    v = _query_array(system, query)
    if space == "coamoeba":
        v = np.mod(v, math.pi)
    owner, q_pts, th_pts, ambiguous, nongeneric = _exact_batch(system, space, v[None], cfg)
    if nongeneric[0]:
        raise NonGenericQueryError("enclosing system is degenerate at this query")
    report = _report_from_points(
        system, space, v, list(zip(q_pts, th_pts)), cfg, exhaustive=True,
        notes="near-fiber roots present" if ambiguous[0] else "",
    )
    if ambiguous[0] and report.regular:
        report = replace(report, regular=False)
    return report


def _exact_counts(system, space, queries, cfg):
    owner, q_pts, th_pts, ambiguous, nongeneric = _exact_batch(system, space, queries, cfg)
    counts = np.bincount(owner, minlength=len(queries)).astype(np.int64)
    regular = ~ambiguous & ~nongeneric
    # regularity of each fiber point from the scaled real Jacobian
    if len(owner):
        _, jac, scale = evaluate_system(system, q_pts, th_pts, normalize=True)
        s = np.linalg.svd(_real_stack(jac / scale[..., None]), compute_uv=False)[:, -1]
        regular[np.unique(owner[s <= cfg.regularity_threshold])] = False
    return counts, regular


def fiber_counts(
    system: PolySystem,
    space: str,
    queries,
    seeds: Sequence[int] | None = None,
    cfg: SolverConfig = SolverConfig(),
    method: str = "auto",
):
    """Fiber cardinalities and regularity flags for many queries at once.

    ``method`` is ``"exact"`` (curves only), ``"multistart"`` or ``"auto"``
    (exact whenever ``n = 1``).
    """
    _check_space(space)
    queries = np.atleast_2d(np.asarray(queries, dtype=float))
    if space == "coamoeba":
        queries = np.mod(queries, math.pi)
    if method == "auto":
        method = "exact" if system.n == 1 else "multistart"
    if method == "exact":
        _require_curve(system)
        return _exact_counts(system, space, queries, cfg)
    if seeds is None:
        seeds = [cfg.seed] * len(queries)
    pts = _multistart(system, space, queries, seeds, cfg)
    counts = np.zeros(len(queries), dtype=np.int64)
    regular = np.ones(len(queries), dtype=bool)
    for i, plist in enumerate(pts):
        for q, th in plist:
            vals, jac, scale = evaluate_system(system, q, th, normalize=True)
            # same acceptance rule as the single-fiber reports
            if np.max(np.abs(vals) / scale) > cfg.tol:
                continue
            counts[i] += 1
            s = np.linalg.svd(_real_stack(jac / scale[:, None]), compute_uv=False)[-1]
            if s <= cfg.regularity_threshold:
                regular[i] = False
    return counts, regular
