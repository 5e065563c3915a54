import numpy as np
import pytest

from halfamoeba import LaurentPolynomial, PolySystem, make_system

ACCEPTANCE_LINES: list[str] = []


def random_curve(degree: int, seed: int) -> PolySystem:
    """Dense degree-d curve with standard complex Gaussian coefficients."""
    rng = np.random.default_rng(seed)
    exps = [(i, j) for i in range(degree + 1) for j in range(degree + 1) if i + j <= degree]
    coeffs = rng.normal(size=len(exps)) + 1j * rng.normal(size=len(exps))
    return PolySystem((LaurentPolynomial(2, tuple(zip(exps, coeffs))),), ("x", "y"))


def random_linear_pair(seed: int) -> PolySystem:
    """Two generic degree-1 polynomials in four variables."""
    rng = np.random.default_rng(seed)
    exps = [(0, 0, 0, 0), (1, 0, 0, 0), (0, 1, 0, 0), (0, 0, 1, 0), (0, 0, 0, 1)]
    polys = []
    for _ in range(2):
        c = rng.normal(size=5) + 1j * rng.normal(size=5)
        polys.append(LaurentPolynomial(4, tuple(zip(exps, c))))
    return PolySystem(tuple(polys), ("x1", "x2", "x3", "x4"))


def random_quadric_pair(seed: int) -> PolySystem:
    """Two polynomials in four variables with a few quadratic terms."""
    rng = np.random.default_rng(seed)
    exps = [(0, 0, 0, 0), (1, 0, 0, 0), (0, 1, 0, 0), (0, 0, 1, 0), (0, 0, 0, 1),
            (1, 1, 0, 0), (0, 0, 1, 1), (1, 0, 1, 0)]
    polys = []
    for _ in range(2):
        c = rng.normal(size=len(exps)) + 1j * rng.normal(size=len(exps))
        polys.append(LaurentPolynomial(4, tuple(zip(exps, c))))
    return PolySystem(tuple(polys), ("x1", "x2", "x3", "x4"))


@pytest.fixture(scope="session")
def line():
    return make_system(["1 + x + y"])


@pytest.fixture(scope="session")
def conic():
    return random_curve(2, 2024)


@pytest.fixture(scope="session")
def cubic():
    return random_curve(3, 2025)


@pytest.fixture(scope="session")
def linear_pair():
    return random_linear_pair(7)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def points_on_curve(system: PolySystem, count: int, seed: int) -> list:
    """Points of a curve found by fixing x at random and solving for y."""
    from halfamoeba import LogPolarPoint
    rng = np.random.default_rng(seed)
    f = system.polys[0]
    a, c = f.exponents, f.coeffs
    lo = a[:, 1].min()
    out = []
    while len(out) < count:
        x = np.exp(rng.normal() + 1j * rng.uniform(0, 2 * np.pi))
        dense = np.zeros(a[:, 1].max() - lo + 1, dtype=complex)
        np.add.at(dense, a[:, 1] - lo, c * x ** a[:, 0])
        for y in np.roots(dense[::-1]):
            if abs(y) > 1e-6 and len(out) < count:
                out.append(LogPolarPoint.from_complex([x, y]))
    return out


def points_on_pair(system: PolySystem, count: int, seed: int) -> list:
    """Points of an n=2 system: fix z1, z2 at random and solve for z3, z4."""
    from halfamoeba import LogPolarPoint
    from halfamoeba.resultant import Support, solve_pairs
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        z12 = np.exp(rng.normal(size=2) + 1j * rng.uniform(0, 2 * np.pi, size=2))
        sups, cos = [], []
        for f in system.polys:
            a = f.exponents
            sups.append(Support.of(a[:, 2:]))
            cos.append((f.coeffs * np.prod(z12 ** a[:, :2], axis=1))[None])
        res = solve_pairs(sups[0], cos[0], sups[1], cos[1])
        for z3, z4 in zip(res.x[0][res.valid[0]], res.y[0][res.valid[0]]):
            if len(out) < count:
                out.append(LogPolarPoint.from_complex([z12[0], z12[1], z3, z4]))
    return out
