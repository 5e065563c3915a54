"""Seeded volume estimators for amoebas and rolled coamoebas.

Every sample index ``i`` owns a counter-based random stream (see ``rng``),
so a sample is a pure function of ``(seed, i, attempt)``.  Indices are cut
into fixed chunks that may run on any number of threads; counts are
integers and are summed exactly, so estimates are bit-identical for every
worker count.

Non-regular queries are redrawn from the next attempt of the same index,
at most ``MAX_ATTEMPTS`` times.  Fiber counts come from the exact resultant
oracle for curves and from multistart Newton otherwise.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import rng
from .fibers import (
    NonGenericQueryError,
    SolverConfig,
    amoeba_fiber,
    coamoeba_fiber,
    curve_fiber_exact,
    fiber_counts,
)
from .laurent import PolySystem
from .polytope import alpha_beta

MAX_ATTEMPTS = 16
CHUNK = 512
WARN_RATE = 0.01
DEFAULT_HALF_WIDTH = 10.0

__all__ = [
    "MeasureError",
    "VolumeEstimate",
    "HarnackReport",
    "default_box",
    "multivol_coamoeba",
    "multivol_amoeba_box",
    "amoeba_volume_box",
    "multiharnack_check",
    "FiberSurvey",
    "fiber_survey",
]


class MeasureError(ValueError):
    """Invalid estimator arguments."""


@dataclass(frozen=True)
class VolumeEstimate:
    kind: str  # volA | multiVolA | multiVolB
    value: float
    std_error: float
    samples: int
    seed: int
    domain: dict
    truncated: bool
    non_regular_rate: float = 0.0
    mode: str = "montecarlo"
    warning: str | None = None

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "value": self.value,
            "stdError": self.std_error,
            "samples": self.samples,
            "seed": self.seed,
            "domain": self.domain,
            "truncated": self.truncated,
            "nonRegularRate": self.non_regular_rate,
            "mode": self.mode,
            "warning": self.warning,
        }


@dataclass(frozen=True)
class HarnackReport:
    """Outcome of the numerical multiHarnack test ``MultiVol = pi^{2n} alpha``."""

    is_multiharnack: bool
    estimate: VolumeEstimate
    target: float
    tol: float
    relative_deviation: float
    alpha: int

    def to_json(self) -> dict:
        return {
            "multiHarnack": self.is_multiharnack,
            "estimate": self.estimate.to_json(),
            "target": self.target,
            "tol": self.tol,
            "relativeDeviation": self.relative_deviation,
            "alpha": self.alpha,
        }


@dataclass
class _Tally:
    total: int = 0
    total_sq: int = 0
    hits: int = 0
    draws: int = 0
    non_regular: int = 0
    exhausted: int = 0

    def add(self, other: "_Tally"):
        self.total += other.total
        self.total_sq += other.total_sq
        self.hits += other.hits
        self.draws += other.draws
        self.non_regular += other.non_regular
        self.exhausted += other.exhausted


# ---------------------------------------------------------------------------
# sampling core
# ---------------------------------------------------------------------------


def _check_samples(samples: int):
    if int(samples) < 1:
        raise MeasureError("samples must be at least 1")


def default_box(system: PolySystem, half_width: float = DEFAULT_HALF_WIDTH) -> np.ndarray:
    return np.tile([-half_width, half_width], (system.nvars, 1)).astype(float)


def _box_array(system: PolySystem, box) -> np.ndarray:
    if box is None:
        return default_box(system)
    b = np.asarray(box, dtype=float).reshape(-1, 2)
    if len(b) != system.nvars:
        raise MeasureError(f"box has {len(b)} intervals, expected {system.nvars}")
    if not np.all(np.isfinite(b)) or np.any(b[:, 1] < b[:, 0]):
        raise MeasureError("box intervals must be finite with lo <= hi")
    return b


def _box_domain(b: np.ndarray) -> dict:
    return {"type": "box", "box": b.tolist()}


def _chunk_tally(system, space, lo, width, seed, start, stop, cfg) -> _Tally:
    """Counts for sample indices ``start..stop-1`` with per-index redraws."""
    idx = np.arange(start, stop, dtype=np.uint64)
    dim = system.nvars
    final = np.zeros(len(idx), dtype=np.int64)
    pending = np.arange(len(idx))
    tally = _Tally()
    for attempt in range(MAX_ATTEMPTS):
        keys = rng.stream_keys(seed, idx[pending], attempt)
        queries = lo + width * rng.uniforms(keys, dim)
        solver_seeds = [int(k) for k in rng.fmix(keys)]
        counts, regular = fiber_counts(system, space, queries, seeds=solver_seeds, cfg=cfg)
        tally.draws += len(pending)
        tally.non_regular += int(np.sum(~regular))
        final[pending] = counts
        if attempt == MAX_ATTEMPTS - 1:
            tally.exhausted += int(np.sum(~regular))
        pending = pending[~regular]
        if not len(pending):
            break
    tally.total = int(final.sum())
    tally.total_sq = int((final * final).sum())
    tally.hits = int(np.count_nonzero(final))
    return tally


def _run_chunks(jobs, threads: int) -> _Tally:
    out = _Tally()
    if threads <= 1 or len(jobs) <= 1:
        results = [job() for job in jobs]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda job: job(), jobs))
    for t in results:
        out.add(t)
    return out


def _sample(system, space, lo, width, samples, seed, cfg, threads) -> _Tally:
    jobs = [
        (lambda a=a: _chunk_tally(system, space, lo, width, seed, a, min(a + CHUNK, samples), cfg))
        for a in range(0, samples, CHUNK)
    ]
    return _run_chunks(jobs, threads)


def _mean_and_error(total: int, total_sq: int, samples: int) -> tuple[float, float]:
    mean = total / samples
    if samples < 2:
        return mean, 0.0
    # exact integer numerator keeps the variance free of cancellation
    var = (samples * total_sq - total * total) / (samples * (samples - 1))
    return mean, math.sqrt(max(var, 0.0) / samples)


def _warning(tally: _Tally) -> str | None:
    rate = tally.non_regular / tally.draws if tally.draws else 0.0
    if tally.exhausted:
        return f"{tally.exhausted} samples stayed non-regular after {MAX_ATTEMPTS} draws"
    if rate > WARN_RATE:
        return f"non-regular rate {rate:.3%} exceeds {WARN_RATE:.0%}"
    return None


def _rate(tally: _Tally) -> float:
    return tally.non_regular / tally.draws if tally.draws else 0.0


# ---------------------------------------------------------------------------
# estimators
# ---------------------------------------------------------------------------


def multivol_coamoeba(
    system: PolySystem,
    samples: int = 10_000,
    seed: int = 0,
    cfg: SolverConfig = SolverConfig(),
    threads: int = 1,
) -> VolumeEstimate:
    """Volume of the rolled coamoeba counted with fiber multiplicity.

    Uniform queries on the torus ``[0, pi)^{2n}``; the value is the torus
    volume ``pi^{2n}`` times the mean fiber count.
    """
    _check_samples(samples)
    dim = system.nvars
    vol = math.pi**dim
    tally = _sample(system, "coamoeba", np.zeros(dim), np.full(dim, math.pi), int(samples), seed, cfg, threads)
    mean, err = _mean_and_error(tally.total, tally.total_sq, int(samples))
    return VolumeEstimate(
        "multiVolB", vol * mean, vol * err, int(samples), int(seed),
        {"type": "torus", "period": "pi", "dim": dim}, False, _rate(tally), warning=_warning(tally),
    )


def multivol_amoeba_box(
    system: PolySystem,
    box=None,
    samples: int = 10_000,
    seed: int = 0,
    cfg: SolverConfig = SolverConfig(),
    threads: int = 1,
) -> VolumeEstimate:
    """Integral of the amoeba fiber count over a box (a lower bound for MultiVol)."""
    _check_samples(samples)
    b = _box_array(system, box)
    width = b[:, 1] - b[:, 0]
    vol = float(np.prod(width))
    if vol == 0.0:
        return VolumeEstimate("multiVolA", 0.0, 0.0, int(samples), int(seed), _box_domain(b), True)
    tally = _sample(system, "amoeba", b[:, 0], width, int(samples), seed, cfg, threads)
    mean, err = _mean_and_error(tally.total, tally.total_sq, int(samples))
    return VolumeEstimate(
        "multiVolA", vol * mean, vol * err, int(samples), int(seed), _box_domain(b), True,
        _rate(tally), warning=_warning(tally),
    )


def amoeba_volume_box(
    system: PolySystem,
    box=None,
    samples: int = 10_000,
    seed: int = 0,
    cfg: SolverConfig = SolverConfig(),
    threads: int = 1,
    grid=None,
    jitter: bool = True,
) -> VolumeEstimate:
    """Volume of the amoeba inside a box.

    Monte Carlo by default.  With ``grid`` (cells per axis, an int or one
    int per axis) one point per cell is tested and the value is the measure
    of the hit cells.  The point is a seeded uniform draw inside the cell
    (stratified sampling) unless ``jitter`` is false, in which case it is
    the cell center.  Centers alias with the axis-parallel tentacles and
    overestimate by a few percent at moderate resolution; jittered points
    are unbiased.  The grid ``std_error`` is the binomial error of the hit
    fraction, an upper bound for the stratified error.
    """
    b = _box_array(system, box)
    width = b[:, 1] - b[:, 0]
    vol = float(np.prod(width))
    if grid is not None:
        return _amoeba_volume_grid(system, b, grid, seed, cfg, threads, jitter)
    _check_samples(samples)
    if vol == 0.0:
        return VolumeEstimate("volA", 0.0, 0.0, int(samples), int(seed), _box_domain(b), True)
    tally = _sample(system, "amoeba", b[:, 0], width, int(samples), seed, cfg, threads)
    frac = tally.hits / int(samples)
    err = math.sqrt(frac * (1.0 - frac) / (int(samples) - 1)) if samples > 1 else 0.0
    return VolumeEstimate(
        "volA", vol * frac, vol * err, int(samples), int(seed), _box_domain(b), True,
        _rate(tally), warning=_warning(tally),
    )


def _grid_chunk(system, centers, cfg) -> _Tally:
    counts, regular = fiber_counts(system, "amoeba", centers, cfg=cfg)
    t = _Tally()
    t.hits = int(np.count_nonzero(counts))
    t.draws = len(centers)
    t.non_regular = int(np.sum(~regular))
    return t


def _amoeba_volume_grid(system, b, grid, seed, cfg, threads, jitter) -> VolumeEstimate:
    res = np.broadcast_to(np.asarray(grid, dtype=int), (system.nvars,))
    if np.any(res < 1):
        raise MeasureError("grid needs at least one cell per axis")
    width = b[:, 1] - b[:, 0]
    cell = width / res
    total = int(np.prod(res))
    domain = _box_domain(b)
    if np.prod(width) == 0.0:
        return VolumeEstimate("volA", 0.0, 0.0, total, int(seed), domain, True, mode="grid-jittered" if jitter else "grid")

    def centers(a, z):
        flat = np.arange(a, z)
        multi = np.stack(np.unravel_index(flat, tuple(res)), axis=1)
        if jitter:
            offset = rng.sample_uniforms(seed, flat.astype(np.uint64), len(res))
        else:
            offset = 0.5
        return b[:, 0] + (multi + offset) * cell

    jobs = [
        (lambda a=a: _grid_chunk(system, centers(a, min(a + CHUNK, total)), cfg))
        for a in range(0, total, CHUNK)
    ]
    tally = _run_chunks(jobs, threads)
    frac = tally.hits / total
    vol = float(np.prod(width))
    err = math.sqrt(frac * (1.0 - frac) / max(total - 1, 1))
    rate = _rate(tally)
    warn = f"non-regular rate {rate:.3%} exceeds {WARN_RATE:.0%}" if rate > WARN_RATE else None
    mode = "grid-jittered" if jitter else "grid"
    return VolumeEstimate("volA", vol * frac, vol * err, total, int(seed), domain, True, rate, mode, warn)


def multiharnack_check(
    system: PolySystem,
    tol: float = 0.05,
    samples: int = 10_000,
    seed: int = 0,
    cfg: SolverConfig = SolverConfig(),
    threads: int = 1,
) -> HarnackReport:
    """Whether the multiplicity volume attains its maximum ``pi^{2n} alpha``.

    Uses the coamoeba side, whose multiplicity volume equals the amoeba's
    and needs no box truncation.
    """
    alpha = alpha_beta(system).alpha
    if alpha < 1:
        raise MeasureError("alpha must be at least 1")
    est = multivol_coamoeba(system, samples, seed, cfg, threads)
    target = math.pi**system.nvars * alpha
    dev = abs(est.value - target) / target
    return HarnackReport(dev <= tol, est, target, tol, dev, alpha)


# ---------------------------------------------------------------------------
# fiber surveys
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FiberSurvey:
    """Full fiber reports at seeded random regular queries."""

    space: str
    seed: int
    domain: dict
    reports: tuple
    redraws: int
    dropped: int

    @property
    def counts(self) -> np.ndarray:
        return np.array([r.count for r in self.reports], dtype=np.int64)

    @property
    def signed_counts(self) -> np.ndarray:
        return np.array([r.signed_count for r in self.reports], dtype=np.int64)

    def to_json(self) -> dict:
        return {
            "space": self.space,
            "seed": self.seed,
            "domain": self.domain,
            "redraws": self.redraws,
            "dropped": self.dropped,
            "reports": [r.to_json() for r in self.reports],
        }


def _survey_chunk(system, space, lo, width, seed, start, stop, cfg, method):
    reports, redraws, dropped = [], 0, 0
    for i in range(start, stop):
        for attempt in range(MAX_ATTEMPTS):
            key = rng.stream_keys(seed, np.uint64(i), attempt)
            query = lo + width * rng.uniforms(key, system.nvars)
            qcfg = SolverConfig(**{**cfg.__dict__, "seed": int(rng.fmix(key))})
            try:
                if method == "exact":
                    rep = curve_fiber_exact(system, space, query, qcfg)
                elif space == "amoeba":
                    rep = amoeba_fiber(system, query, qcfg)
                else:
                    rep = coamoeba_fiber(system, query, qcfg)
            except (NonGenericQueryError, OverflowError):
                redraws += 1
                continue
            if rep.regular:
                reports.append(rep)
                break
            redraws += 1
        else:
            dropped += 1
    return reports, redraws, dropped


def fiber_survey(
    system: PolySystem,
    space: str,
    samples: int,
    seed: int = 0,
    cfg: SolverConfig = SolverConfig(),
    threads: int = 1,
    box=None,
    method: str = "auto",
) -> FiberSurvey:
    """Fibers at ``samples`` seeded regular queries, redrawing non-regular ones.

    Coamoeba queries are uniform on ``[0, pi)^{2n}``, amoeba queries uniform
    in ``box``.  ``method`` is ``"exact"``, ``"multistart"`` or ``"auto"``
    (exact for curves).
    """
    _check_samples(samples)
    if space not in ("amoeba", "coamoeba"):
        raise MeasureError(f"unknown space {space!r}")
    if method == "auto":
        method = "exact" if system.n == 1 else "multistart"
    if space == "coamoeba":
        lo, width = np.zeros(system.nvars), np.full(system.nvars, math.pi)
        domain = {"type": "torus", "period": "pi", "dim": system.nvars}
    else:
        b = _box_array(system, box)
        lo, width = b[:, 0], b[:, 1] - b[:, 0]
        domain = _box_domain(b)
    step = 64
    jobs = [
        (lambda a=a: _survey_chunk(system, space, lo, width, seed, a, min(a + step, samples), cfg, method))
        for a in range(0, samples, step)
    ]
    if threads > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda job: job(), jobs))
    else:
        parts = [job() for job in jobs]
    reports = tuple(r for part in parts for r in part[0])
    return FiberSurvey(space, int(seed), domain, reports, sum(p[1] for p in parts), sum(p[2] for p in parts))
