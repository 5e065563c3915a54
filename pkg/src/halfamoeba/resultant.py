"""All common torus roots of two bivariate Laurent polynomials.

Batched over many coefficient sets sharing one support, which is how the
fiber oracle for curves is used: the enclosing system changes with every
query point but its monomials do not.

Pipeline per query: clear denominators, evaluate the Sylvester matrix in ``y``
at roots of unity, interpolate the resultant in ``x`` by FFT, take companion
eigenvalues, recover ``y`` from both polynomials, polish every candidate by
complex Newton on the pair, keep converged nonzero roots and merge duplicates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

RESULTANT_ZERO = 1e-12
ROOT_TRIM = 1e-13
POLISH_ITERS = 12
ACCEPT_RESIDUAL = 1e-10
MERGE_TOL = 1e-7


class NonGenericQueryError(ArithmeticError):
    """The resultant vanishes identically: the two curves share a component."""


@dataclass(frozen=True)
class Support:
    """Exponents of a bivariate Laurent polynomial and the shift clearing them."""

    exponents: np.ndarray  # (m, 2) int
    shift: tuple[int, int]
    shape: tuple[int, int]

    @classmethod
    def of(cls, exponents) -> "Support":
        e = np.asarray(exponents, dtype=np.int64).reshape(-1, 2)
        lo = e.min(axis=0)
        hi = e.max(axis=0)
        return cls(e, (int(lo[0]), int(lo[1])), (int(hi[0] - lo[0]) + 1, int(hi[1] - lo[1]) + 1))

    @property
    def total_degree(self) -> int:
        shifted = self.exponents - np.array(self.shift)
        return int(shifted.sum(axis=1).max())

    def dense(self, coeffs: np.ndarray) -> np.ndarray:
        """(Q, m) coefficients -> (Q, dx+1, dy+1) dense array in cleared exponents."""
        coeffs = np.atleast_2d(coeffs)
        out = np.zeros((coeffs.shape[0],) + self.shape, dtype=complex)
        ix = self.exponents[:, 0] - self.shift[0]
        iy = self.exponents[:, 1] - self.shift[1]
        np.add.at(out, (slice(None), ix, iy), coeffs)
        return out


def batched_roots(coeffs: np.ndarray) -> np.ndarray:
    """Roots of many polynomials (ascending coefficients) via companion eigenvalues.

    Rows whose leading coefficients are negligible are trimmed to their
    effective degree; missing roots are padded with NaN.
    """
    coeffs = np.asarray(coeffs, dtype=complex)
    b, m = coeffs.shape
    out = np.full((b, max(m - 1, 0)), np.nan + 0j)
    if m <= 1:
        return out
    mag = np.abs(coeffs)
    scale = mag.max(axis=1, keepdims=True)
    scale[scale == 0] = 1.0
    big = mag > ROOT_TRIM * scale
    deg = np.where(big.any(axis=1), m - 1 - np.argmax(big[:, ::-1], axis=1), 0)
    for d in np.unique(deg):
        if d < 1:
            continue
        rows = np.flatnonzero(deg == d)
        c = coeffs[rows, : d + 1]
        monic = c[:, :d] / c[:, d : d + 1]
        comp = np.zeros((len(rows), d, d), dtype=complex)
        if d > 1:
            comp[:, np.arange(1, d), np.arange(d - 1)] = 1.0
        comp[:, :, d - 1] = -monic
        if not np.all(np.isfinite(comp)):
            good = np.all(np.isfinite(comp), axis=(1, 2))
            rows, comp = rows[good], comp[good]
            if not len(rows):
                continue
        out[rows, :d] = np.linalg.eigvals(comp)
    return out


def _powers(v: np.ndarray, count: int) -> np.ndarray:
    return v[..., None] ** np.arange(count)


def _eval_dense(c: np.ndarray, x: np.ndarray, y: np.ndarray):
    """Value, partials and term-magnitude sum of dense polys ``c`` (Q, ax, ay) at (Q, K)."""
    ax, ay = c.shape[1:]
    px = _powers(x, ax)
    py = _powers(y, ay)
    val = np.einsum("qij,qki,qkj->qk", c, px, py)
    ix = np.arange(ax)
    iy = np.arange(ay)
    dpx = np.zeros_like(px)
    dpy = np.zeros_like(py)
    dpx[..., 1:] = px[..., :-1] * ix[1:]
    dpy[..., 1:] = py[..., :-1] * iy[1:]
    dx = np.einsum("qij,qki,qkj->qk", c, dpx, py)
    dy = np.einsum("qij,qki,qkj->qk", c, px, dpy)
    mag = np.einsum("qij,qki,qkj->qk", np.abs(c), np.abs(px), np.abs(py))
    return val, dx, dy, mag


def _y_coeffs(c: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Coefficients in ``y`` of dense polys at given ``x``: (Q, K, ay)."""
    return np.einsum("qij,qki->qkj", c, _powers(x, c.shape[1]))


def _sylvester(fy: np.ndarray, gy: np.ndarray) -> np.ndarray:
    """Sylvester matrices from ascending ``y``-coefficient arrays (..., df+1), (..., dg+1)."""
    df = fy.shape[-1] - 1
    dg = gy.shape[-1] - 1
    size = df + dg
    mat = np.zeros(fy.shape[:-1] + (size, size), dtype=complex)
    fdesc = fy[..., ::-1]
    gdesc = gy[..., ::-1]
    for r in range(dg):
        mat[..., r, r : r + df + 1] = fdesc
    for r in range(df):
        mat[..., dg + r, r : r + dg + 1] = gdesc
    return mat


@dataclass
class PairRoots:
    """Common roots per query: arrays (Q, K) with a validity mask."""

    x: np.ndarray
    y: np.ndarray
    valid: np.ndarray
    nongeneric: np.ndarray  # (Q,) resultant vanished identically


def solve_pairs(fsup: Support, fco: np.ndarray, gsup: Support, gco: np.ndarray) -> PairRoots:
    """Common roots in the 2-torus of ``F_q, G_q`` for every query ``q``.

    ``fco`` and ``gco`` have shape (Q, m_F) and (Q, m_G), matching the
    supports' exponent order.
    """
    F = fsup.dense(fco)
    G = gsup.dense(gco)
    F = F / np.abs(F).reshape(len(F), -1).max(axis=1)[:, None, None]
    G = G / np.abs(G).reshape(len(G), -1).max(axis=1)[:, None, None]
    swapped = False
    if F.shape[2] < 2 or G.shape[2] < 2:
        if F.shape[1] < 2 or G.shape[1] < 2:
            raise NonGenericQueryError("one polynomial is constant in both directions")
        F = F.transpose(0, 2, 1)
        G = G.transpose(0, 2, 1)
        fsup = Support(fsup.exponents[:, ::-1], fsup.shift[::-1], fsup.shape[::-1])
        gsup = Support(gsup.exponents[:, ::-1], gsup.shift[::-1], gsup.shape[::-1])
        swapped = True
    q = len(F)
    dxf, dyf = F.shape[1] - 1, F.shape[2] - 1
    dxg, dyg = G.shape[1] - 1, G.shape[2] - 1
    bound = min(dyg * dxf + dyf * dxg, fsup.total_degree * gsup.total_degree)
    bound = max(bound, 1)
    m = bound + 1
    nodes = np.exp(2j * np.pi * np.arange(m) / m)
    xs = np.broadcast_to(nodes, (q, m))
    syl = _sylvester(_y_coeffs(F, xs), _y_coeffs(G, xs))
    vals = np.linalg.det(syl)
    hadamard = np.prod(np.linalg.norm(syl, axis=-1), axis=-1)
    rel = np.max(np.abs(vals) / np.where(hadamard > 0, hadamard, 1.0), axis=1)
    nongeneric = rel < RESULTANT_ZERO
    # R(x_k) = sum_j r_j w^{jk} with w = exp(2 pi i / m)
    res = np.fft.fft(vals, axis=1) / m
    xr = batched_roots(res)  # (Q, bound)
    # candidate y from both polynomials at every x root
    xr_safe = np.where(np.isfinite(xr), xr, 0.0)
    fy = _y_coeffs(F, xr_safe).reshape(-1, dyf + 1)
    gy = _y_coeffs(G, xr_safe).reshape(-1, dyg + 1)
    yf = batched_roots(fy).reshape(q, bound, dyf)
    yg = batched_roots(gy).reshape(q, bound, dyg)
    cand_x = np.concatenate(
        [np.repeat(xr[:, :, None], dyf, axis=2), np.repeat(xr[:, :, None], dyg, axis=2)], axis=2
    ).reshape(q, -1)
    cand_y = np.concatenate([yf, yg], axis=2).reshape(q, -1)
    x, y, ok = _polish(F, G, cand_x, cand_y)
    ok &= ~nongeneric[:, None]
    ok = _merge(x, y, ok)
    if swapped:
        x, y = y, x
    return PairRoots(x, y, ok, nongeneric)


def _polish(F, G, x, y):
    x = x.copy()
    y = y.copy()
    with np.errstate(all="ignore"):
        live = np.isfinite(x) & np.isfinite(y)
        x = np.where(live, x, 1.0)
        y = np.where(live, y, 1.0)
        for _ in range(POLISH_ITERS):
            f, fx, fy, _ = _eval_dense(F, x, y)
            g, gx, gy, _ = _eval_dense(G, x, y)
            det = fx * gy - fy * gx
            dx = (f * gy - g * fy) / det
            dy = (fx * g - gx * f) / det
            step_ok = np.isfinite(dx) & np.isfinite(dy)
            x = np.where(step_ok, x - dx, x)
            y = np.where(step_ok, y - dy, y)
        f, _, _, fm = _eval_dense(F, x, y)
        g, _, _, gm = _eval_dense(G, x, y)
        res = np.maximum(np.abs(f) / fm, np.abs(g) / gm)
        ok = (
            live
            & np.isfinite(res)
            & (res <= ACCEPT_RESIDUAL)
            & (np.abs(x) > 1e-150)
            & (np.abs(y) > 1e-150)
            & np.isfinite(x)
            & np.isfinite(y)
        )
    return x, y, ok


def _merge(x, y, ok):
    """Mark duplicates (relative distance below MERGE_TOL) as invalid."""
    with np.errstate(all="ignore"):
        ax = np.maximum(np.abs(x[:, :, None]), np.abs(x[:, None, :]))
        ay = np.maximum(np.abs(y[:, :, None]), np.abs(y[:, None, :]))
        dist = np.maximum(
            np.abs(x[:, :, None] - x[:, None, :]) / ax,
            np.abs(y[:, :, None] - y[:, None, :]) / ay,
        )
    close = (dist < MERGE_TOL) & ok[:, :, None] & ok[:, None, :]
    k = x.shape[1]
    earlier = np.tril(np.ones((k, k), dtype=bool), -1)
    dup = np.any(close & earlier[None], axis=2)
    return ok & ~dup
