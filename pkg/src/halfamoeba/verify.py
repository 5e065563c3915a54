"""Run the whole battery of fiber, form and volume checks on one system.

The report is a pure function of the system and the configuration: every
random query comes from a counter-based stream, checks are assembled in a
fixed order, and wall-clock timings are kept apart from the checked
content (``VerificationReport.canonical_json`` drops them).

Fiber counts are integers and are compared exactly.  Monte Carlo
quantities get a 3-sigma allowance.  For ``n >= 2`` fibers come from
multistart Newton, which can only miss points; upper bounds stay valid
but parity and signed-count checks become warnings.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import rng
from .fibers import (
    FiberReport,
    NonGenericQueryError,
    SingularPointError,
    SolverConfig,
    amoeba_fiber,
    coamoeba_fiber,
    curve_fiber_exact,
    enclosing_residual,
    fiber_counts,
    omega_residual,
)
from .laurent import PolySystem, system_to_json
from .measure import HarnackReport, amoeba_volume_box, multivol_amoeba_box, multivol_coamoeba
from .polytope import Degrees, PolytopeError, alpha_beta

SCHEMA_VERSION = 1
SIGMA = 3.0
OMEGA_TOL = 1e-8
MAX_ATTEMPTS = 16

CHECK_NAMES = (
    "degrees",
    "beta_evenness",
    "coamoeba_fiber_bound",
    "coamoeba_fiber_parity",
    "amoeba_fiber_bound",
    "amoeba_fiber_evenness",
    "amoeba_signed_count",
    "omega_vanishing",
    "conj_inclusion",
    "conj_prime_inclusion",
    "multivol_coamoeba_bound",
    "multivol_truncated_equality",
    "volume_half_multivol",
    "amoeba_volume_bound",
    "multiharnack",
    "oracle_agreement",
)
FIBER_CHECKS = CHECK_NAMES[2:10]
VOLUME_CHECKS = CHECK_NAMES[10:15]


@dataclass(frozen=True)
class VerifyConfig:
    fiber_samples: int = 200
    volume_samples: int = 4000
    min_queries: int = 20
    seed: int = 0
    box: tuple | None = None
    harnack_tol: float = 0.05
    agreement_threshold: float = 0.99
    threads: int = 1
    solver: SolverConfig = field(default_factory=SolverConfig)

    def to_json(self) -> dict:
        return {
            "fiberSamples": self.fiber_samples,
            "volumeSamples": self.volume_samples,
            "minQueries": self.min_queries,
            "seed": self.seed,
            "box": None if self.box is None else [list(b) for b in self.box],
            "harnackTol": self.harnack_tol,
            "agreementThreshold": self.agreement_threshold,
            "threads": self.threads,
            "solver": self.solver.to_json(),
        }


@dataclass(frozen=True)
class Check:
    name: str
    status: str  # pass | fail | skipped | warning
    lhs: float | int | None = None
    rhs: float | int | None = None
    tolerance: float | None = None
    samples: int = 0
    notes: str = ""

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "status": self.status,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "tolerance": self.tolerance,
            "samples": self.samples,
            "notes": self.notes,
        }


@dataclass(frozen=True)
class VerificationReport:
    system: dict
    degrees: Degrees | None
    checks: tuple
    seed: int
    config: dict
    multiharnack: bool | None = None
    timings: dict = field(default_factory=dict, compare=False)

    @property
    def passed(self) -> bool:
        return all(c.status in ("pass", "skipped", "warning") for c in self.checks)

    def check(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def canonical_json(self) -> dict:
        """Everything except timings; reproducible bit for bit."""
        return {
            "schemaVersion": SCHEMA_VERSION,
            "system": self.system,
            "degrees": None if self.degrees is None else self.degrees.to_json(),
            "seed": self.seed,
            "config": self.config,
            "passed": self.passed,
            "multiHarnack": self.multiharnack,
            "checks": [c.to_json() for c in self.checks],
        }

    def to_json(self) -> dict:
        out = self.canonical_json()
        out["timings"] = dict(self.timings)
        return out


# ---------------------------------------------------------------------------
# fiber sampling
# ---------------------------------------------------------------------------


@dataclass
class _FiberSample:
    reports: list  # regular FiberReports
    non_regular: int = 0
    dropped: int = 0


def _solver_for(cfg: SolverConfig, key) -> SolverConfig:
    return SolverConfig(
        tol=cfg.tol, regularity_threshold=cfg.regularity_threshold, dedupe_tol=cfg.dedupe_tol,
        random_starts=cfg.random_starts, ray_starts=cfg.ray_starts, max_rays=cfg.max_rays,
        search_box=cfg.search_box, max_iters=cfg.max_iters, seed=int(rng.fmix(key)),
    )


def _fiber(system, space, query, cfg) -> FiberReport:
    if system.n == 1:
        return curve_fiber_exact(system, space, query, cfg)
    if space == "amoeba":
        return amoeba_fiber(system, query, cfg)
    return coamoeba_fiber(system, query, cfg)


def _sample_fibers(system: PolySystem, space: str, vcfg: VerifyConfig, stream: int) -> _FiberSample:
    """Regular fibers at seeded random queries.

    Coamoeba queries are uniform on ``[0, pi)^{2n}``.  Amoeba queries are
    ``Log z`` of points ``z`` of V taken from random coamoeba fibers, so they
    always lie in the amoeba and no amoeba check is vacuous.
    """
    dim = system.nvars
    out = _FiberSample([])
    for i in range(vcfg.fiber_samples):
        for attempt in range(MAX_ATTEMPTS):
            key = rng.stream_keys(vcfg.seed ^ stream, np.uint64(i), attempt)
            u = rng.uniforms(key, dim + 1)
            cfg = _solver_for(vcfg.solver, key)
            try:
                p = math.pi * u[:dim]
                if space == "amoeba":
                    seedrep = _fiber(system, "coamoeba", p, cfg)
                    if not seedrep.solutions:
                        out.non_regular += 1
                        continue
                    pick = int(u[dim] * seedrep.count)
                    query = seedrep.solutions[pick].point.q
                else:
                    query = p
                rep = _fiber(system, space, query, cfg)
            except (NonGenericQueryError, OverflowError, SingularPointError):
                out.non_regular += 1
                continue
            if rep.regular:
                out.reports.append(rep)
                break
            out.non_regular += 1
        else:
            out.dropped += 1
    return out


def _oracle_agreement(system: PolySystem, samples: dict, vcfg: VerifyConfig) -> tuple[int, int, int]:
    """(agreements, misses, overcounts) of multistart against the exact oracle.

    Uses the queries of the sampled regular fibers, so amoeba queries lie
    inside the amoeba.
    """
    agree = miss = over = 0
    for space in ("coamoeba", "amoeba"):
        reps = samples[space].reports
        if not reps:
            continue
        queries = np.array([r.query for r in reps])
        keys = rng.stream_keys(vcfg.seed ^ 0x0A, np.arange(len(reps), dtype=np.uint64))
        seeds = [int(k) for k in rng.fmix(keys)]
        exact = np.array([r.count for r in reps])
        multi, _ = fiber_counts(system, space, queries, seeds=seeds, cfg=vcfg.solver, method="multistart")
        agree += int(np.sum(exact == multi))
        miss += int(np.sum(exact > multi))
        over += int(np.sum(exact < multi))
    return agree, miss, over


def _box(system, vcfg):
    if vcfg.box is None:
        return np.tile([-10.0, 10.0], (system.nvars, 1))
    return np.asarray(vcfg.box, dtype=float).reshape(-1, 2)


# ---------------------------------------------------------------------------
# individual checks
# ---------------------------------------------------------------------------


def _too_few(name, used, vcfg, lhs=None, rhs=None) -> Check | None:
    if used < vcfg.min_queries:
        return Check(name, "fail", lhs, rhs, None, used,
                     f"only {used} regular queries, need {vcfg.min_queries}")
    return None


def _fiber_checks(system, deg: Degrees, coam: _FiberSample, amo: _FiberSample, vcfg) -> list[Check]:
    n = system.n
    soft = "warning" if n >= 2 else "fail"
    soft_note = "multistart fibers may miss points; downgraded to a warning" if n >= 2 else ""
    checks = []

    c_counts = [r.count for r in coam.reports]
    a_reps = amo.reports
    a_counts = [r.count for r in a_reps]
    extra = f"redraws {coam.non_regular}, dropped {coam.dropped}"

    used = len(c_counts)
    worst = max(c_counts, default=0)
    checks.append(_too_few("coamoeba_fiber_bound", used, vcfg, worst, deg.alpha) or Check(
        "coamoeba_fiber_bound", "pass" if worst <= deg.alpha else "fail", worst, deg.alpha, 0.0, used,
        f"max count over regular queries; {extra}"))

    bad = sum((c - deg.alpha) % 2 != 0 for c in c_counts)
    status = "pass" if bad == 0 else soft
    checks.append(_too_few("coamoeba_fiber_parity", used, vcfg, bad, 0) or Check(
        "coamoeba_fiber_parity", status, bad, 0, 0.0, used,
        "queries with count not congruent to alpha mod 2" + (f"; {soft_note}" if bad and n >= 2 else "")))

    extra = f"redraws {amo.non_regular}, dropped {amo.dropped}"
    used = len(a_counts)
    worst = max(a_counts, default=0)
    checks.append(_too_few("amoeba_fiber_bound", used, vcfg, worst, deg.beta) or Check(
        "amoeba_fiber_bound", "pass" if worst <= deg.beta else "fail", worst, deg.beta, 0.0, used,
        f"max count over regular queries; {extra}"))

    odd = sum(c % 2 for c in a_counts)
    checks.append(_too_few("amoeba_fiber_evenness", used, vcfg, odd, 0) or Check(
        "amoeba_fiber_evenness", "pass" if odd == 0 else soft, odd, 0, 0.0, used,
        "queries with odd count" + (f"; {soft_note}" if odd and n >= 2 else "")))

    signed = max((abs(r.signed_count) for r in a_reps), default=0)
    checks.append(_too_few("amoeba_signed_count", used, vcfg, signed, 0) or Check(
        "amoeba_signed_count", "pass" if signed == 0 else soft, signed, 0, 0.0, used,
        "max |signed count|" + (f"; {soft_note}" if signed and n >= 2 else "")))

    omegas = []
    for r in coam.reports + a_reps:
        for s in r.solutions:
            try:
                omegas.append(omega_residual(system, s.point))
            except SingularPointError:
                pass
    worst = max(omegas, default=0.0)
    checks.append(_too_few("omega_vanishing", len(omegas), vcfg, worst, OMEGA_TOL) or Check(
        "omega_vanishing", "pass" if worst < OMEGA_TOL else "fail", worst, OMEGA_TOL, OMEGA_TOL,
        len(omegas), "max |omega| on orthonormal tangent frames"))

    tol = 10.0 * vcfg.solver.tol
    for name, space, reps in (("conj_inclusion", "coamoeba", coam.reports), ("conj_prime_inclusion", "amoeba", a_reps)):
        res = [enclosing_residual(system, space, r.query, s.point) for r in reps for s in r.solutions]
        worst = max(res, default=0.0)
        checks.append(_too_few(name, len(res), vcfg, worst, tol) or Check(
            name, "pass" if worst <= tol else "fail", worst, tol, tol, len(res),
            "max scaled residual of the enclosing conjugate system over fiber points"))
    return checks


def _volume_checks(system, deg, mvb, mva, vola, harnack, vcfg) -> list[Check]:
    dim = system.nvars
    checks = []
    bound = math.pi**dim * deg.alpha
    slack = SIGMA * mvb.std_error
    checks.append(Check(
        "multivol_coamoeba_bound", "pass" if mvb.value <= bound + slack else "fail",
        mvb.value, bound, slack, mvb.samples, "MultiVol(B_pi) <= pi^{2n} alpha"))
    slack = SIGMA * math.hypot(mva.std_error, mvb.std_error)
    checks.append(Check(
        "multivol_truncated_equality", "pass" if mva.value <= mvb.value + slack else "fail",
        mva.value, mvb.value, slack, mva.samples,
        "box-truncated MultiVol(A) <= MultiVol(B_pi); the two agree without truncation"))
    slack = SIGMA * math.hypot(vola.std_error, 0.5 * mva.std_error)
    checks.append(Check(
        "volume_half_multivol", "pass" if vola.value <= 0.5 * mva.value + slack else "fail",
        vola.value, 0.5 * mva.value, slack, vola.samples, "Vol(A) <= MultiVol(A)/2 inside the box"))
    slack = SIGMA * vola.std_error
    half = 0.5 * bound
    checks.append(Check(
        "amoeba_volume_bound", "pass" if vola.value <= half + slack else "fail",
        vola.value, half, slack, vola.samples, "Vol(A) <= pi^{2n} alpha / 2"))
    checks.append(Check(
        "multiharnack", "pass", harnack.estimate.value, harnack.target, harnack.tol, harnack.estimate.samples,
        f"multiHarnack={'true' if harnack.is_multiharnack else 'false'} (reported, not asserted)"))
    return checks


def _first_error(results: dict, names) -> Exception | None:
    for name in names:
        if isinstance(results[name], Exception):
            return results[name]
    return None


def _skipped(name: str, reason: str) -> Check:
    return Check(name, "skipped", notes=reason)


def verify_system(system: PolySystem, vcfg: VerifyConfig = VerifyConfig()) -> VerificationReport:
    """Run every check of the battery; never raises for a failing check."""
    timings: dict[str, float] = {}
    checks: dict[str, Check] = {}
    t0 = time.perf_counter()
    try:
        deg = alpha_beta(system)
    except (PolytopeError, ValueError) as exc:
        for name in CHECK_NAMES:
            checks[name] = _skipped(name, f"degrees unavailable: {exc}")
        checks["degrees"] = Check("degrees", "fail", notes=str(exc))
        return VerificationReport(system_to_json(system), None, tuple(checks[n] for n in CHECK_NAMES),
                                  vcfg.seed, vcfg.to_json(), None, timings)
    timings["degrees"] = time.perf_counter() - t0
    checks["degrees"] = Check("degrees", "pass", deg.alpha, deg.beta, 0.0, 0, "lhs = alpha, rhs = beta")
    checks["beta_evenness"] = Check("beta_evenness", "pass" if deg.beta % 2 == 0 else "fail",
                                    deg.beta % 2, 0, 0.0, 0, "beta mod 2")

    box = _box(system, vcfg)
    s = vcfg.solver

    def timed(name, fn):
        def run():
            t = time.perf_counter()
            try:
                out = fn()
            except (ArithmeticError, ValueError) as exc:
                out = exc
            return name, out, time.perf_counter() - t
        return run

    jobs = [
        timed("coamoebaFibers", lambda: _sample_fibers(system, "coamoeba", vcfg, 0x01)),
        timed("amoebaFibers", lambda: _sample_fibers(system, "amoeba", vcfg, 0x02)),
        timed("multiVolB", lambda: multivol_coamoeba(system, vcfg.volume_samples, vcfg.seed ^ 0x03, s)),
        timed("multiVolA", lambda: multivol_amoeba_box(system, box, vcfg.volume_samples, vcfg.seed ^ 0x04, s)),
        timed("volA", lambda: amoeba_volume_box(system, box, vcfg.volume_samples, vcfg.seed ^ 0x05, s)),
    ]
    if vcfg.threads > 1:
        with ThreadPoolExecutor(max_workers=vcfg.threads) as pool:
            results = list(pool.map(lambda j: j(), jobs))
    else:
        results = [j() for j in jobs]
    out = {}
    for name, value, dt in results:
        out[name] = value
        timings[name] = dt

    fiber_error = _first_error(out, ("coamoebaFibers", "amoebaFibers"))
    if fiber_error is None:
        for c in _fiber_checks(system, deg, out["coamoebaFibers"], out["amoebaFibers"], vcfg):
            checks[c.name] = c
    else:
        for name in FIBER_CHECKS + ("oracle_agreement",):
            checks[name] = Check(name, "fail", notes=f"fiber sampling failed: {fiber_error}")

    harnack = None
    volume_error = _first_error(out, ("multiVolB", "multiVolA", "volA"))
    if volume_error is None:
        mvb = out["multiVolB"]
        target = math.pi**system.nvars * deg.alpha
        dev = abs(mvb.value - target) / target if target else math.inf
        harnack = HarnackReport(dev <= vcfg.harnack_tol, mvb, target, vcfg.harnack_tol, dev, deg.alpha)
        for c in _volume_checks(system, deg, mvb, out["multiVolA"], out["volA"], harnack, vcfg):
            checks[c.name] = c
    else:
        for name in VOLUME_CHECKS:
            checks[name] = Check(name, "fail", notes=f"volume estimation failed: {volume_error}")

    if system.n == 1 and fiber_error is None:
        t = time.perf_counter()
        agree, miss, over = _oracle_agreement(
            system, {"coamoeba": out["coamoebaFibers"], "amoeba": out["amoebaFibers"]}, vcfg)
        timings["oracle"] = time.perf_counter() - t
        used = agree + miss + over
        rate = agree / used if used else 0.0
        ok = used >= vcfg.min_queries and rate >= vcfg.agreement_threshold and over == 0
        checks["oracle_agreement"] = Check(
            "oracle_agreement", "pass" if ok else "fail", rate, vcfg.agreement_threshold, 0.0, used,
            f"misses {miss}, overcounts {over}")
    elif system.n != 1:
        checks["oracle_agreement"] = _skipped("oracle_agreement", "exact oracle exists only for curves (n = 1)")

    timings["total"] = time.perf_counter() - t0
    return VerificationReport(
        system_to_json(system), deg, tuple(checks[n] for n in CHECK_NAMES), vcfg.seed, vcfg.to_json(),
        None if harnack is None else harnack.is_multiharnack, timings,
    )
