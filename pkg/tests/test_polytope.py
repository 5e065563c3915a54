import itertools
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import linprog
from scipy.spatial import ConvexHull, QhullError

from halfamoeba import (
    LatticePolytope,
    PolytopeError,
    alpha_beta,
    convex_hull,
    log_polar,
    make_system,
    minkowski_sum,
    mixed_volume,
    negate,
    normalized_volume,
)
from halfamoeba.laurent import translate_system

TRI = convex_hull([(0, 0), (1, 0), (0, 1)])
SQUARE = convex_hull([(0, 0), (1, 0), (0, 1), (1, 1)])
HEXAGON = minkowski_sum(TRI, negate(TRI))


# ---------------------------------------------------------------------------
# independent float oracles


def _is_extreme(points: np.ndarray, i: int) -> bool:
    """Point i is extreme iff it is not a convex combination of the others (LP)."""
    others = np.delete(points, i, axis=0)
    others = others[~np.all(others == points[i], axis=1)]
    if len(others) == 0:
        return True
    a_eq = np.vstack([others.T, np.ones(len(others))])
    b_eq = np.append(points[i], 1.0)
    res = linprog(np.zeros(len(others)), A_eq=a_eq, b_eq=b_eq, bounds=(0, None), method="highs")
    return res.status != 0


def _float_volume(points) -> float:
    pts = np.asarray(points, dtype=float)
    try:
        return ConvexHull(pts).volume
    except (QhullError, ValueError):
        return 0.0


def _sum_points(polys):
    pts = [np.zeros(polys[0].dim)]
    for p in polys:
        pts = [a + np.array(v) for a in pts for v in p.vertices]
        pts = np.unique(np.array(pts), axis=0)
    return pts


def _mv_oracle(polys) -> int:
    n = len(polys)
    total = 0.0
    for size in range(1, n + 1):
        for subset in itertools.combinations(polys, size):
            total += (-1) ** (n - size) * _float_volume(_sum_points(list(subset)))
    return round(total)


def _random_polytope(rng, dim, npts=6, span=3):
    while True:
        p = convex_hull(rng.integers(-span, span + 1, size=(npts, dim)).tolist())
        if normalized_volume(p) > 0:
            return p


def _corpus(seed=11, count=50):
    rng = np.random.default_rng(seed)
    out = []
    for k in range(count):
        dim = 2 + k % 3
        out.append([_random_polytope(rng, dim, npts=int(rng.integers(dim + 1, dim + 5))) for _ in range(dim)])
    return out


# ---------------------------------------------------------------------------
# hulls


def test_hull_examples():
    assert convex_hull([(0, 0), (1, 0), (0, 1), (0, 0)]).vertices == ((0, 0), (0, 1), (1, 0))
    assert convex_hull([(0, 0), (1, 1), (2, 2)]).vertices == ((0, 0), (2, 2))
    assert convex_hull([(3,), (1,), (2,)]).vertices == ((1,), (3,))


def test_hull_errors():
    with pytest.raises(PolytopeError):
        convex_hull([])
    with pytest.raises(PolytopeError):
        convex_hull([(0,) * 5])
    with pytest.raises(PolytopeError):
        convex_hull([(0, 0), (1, 0, 0)])


def test_hull_vertices_match_lp_oracle_in_z3():
    rng = np.random.default_rng(5)
    for _ in range(50):
        pts = rng.integers(-4, 5, size=(int(rng.integers(4, 14)), 3))
        expected = {tuple(int(x) for x in pts[i]) for i in range(len(pts)) if _is_extreme(pts.astype(float), i)}
        assert set(convex_hull(pts.tolist()).vertices) == expected


def test_degenerate_hulls_in_z4():
    # a planar square embedded in Z^4 and a segment
    plane = convex_hull([(0, 0, 0, 0), (1, 0, 1, 0), (0, 1, 0, 1), (1, 1, 1, 1), (1, 1, 1, 1)])
    assert len(plane.vertices) == 4 and normalized_volume(plane) == 0
    seg = convex_hull([(0, 0, 0, 0), (1, 1, 1, 1), (2, 2, 2, 2)])
    assert seg.vertices == ((0, 0, 0, 0), (2, 2, 2, 2))


def test_polytope_json_roundtrip():
    data = HEXAGON.to_json()
    assert LatticePolytope.from_json(json.loads(json.dumps(data))) == HEXAGON
    assert data["vertices"] == sorted(data["vertices"])


# ---------------------------------------------------------------------------
# sums, negation, volumes


def test_minkowski_examples():
    origin = convex_hull([(0, 0)])
    assert minkowski_sum(TRI, origin) == TRI
    assert set(HEXAGON.vertices) == {(1, 0), (0, 1), (-1, 1), (-1, 0), (0, -1), (1, -1)}
    seg_x = convex_hull([(0, 0), (1, 0)])
    seg_y = convex_hull([(0, 0), (0, 1)])
    assert minkowski_sum(seg_x, seg_y) == SQUARE


def test_negate_examples():
    assert set(negate(TRI).vertices) == {(0, 0), (-1, 0), (0, -1)}
    assert negate(HEXAGON) == HEXAGON


def test_normalized_volume_examples():
    assert normalized_volume(TRI) == 1
    cube = convex_hull(list(itertools.product((0, 1), repeat=3)))
    assert normalized_volume(cube) == 6
    assert normalized_volume(HEXAGON) == 6
    simplex4 = convex_hull([(0, 0, 0, 0)] + [tuple(int(i == j) for j in range(4)) for i in range(4)])
    assert normalized_volume(simplex4) == 1


int_points = st.lists(st.tuples(*[st.integers(-5, 5)] * 3), min_size=1, max_size=12)


@settings(max_examples=60, deadline=None)
@given(int_points)
def test_normalized_volume_matches_float_oracle(pts):
    p = convex_hull(pts)
    assert normalized_volume(p) == round(6 * _float_volume(pts))


@settings(max_examples=60, deadline=None)
@given(int_points)
def test_negate_is_involution(pts):
    p = convex_hull(pts)
    assert negate(negate(p)) == p


# ---------------------------------------------------------------------------
# mixed volumes


def test_mixed_volume_examples():
    assert mixed_volume([TRI, TRI]) == 1
    assert mixed_volume([negate(TRI), TRI]) == 2
    assert mixed_volume([SQUARE, SQUARE]) == 2


def test_mixed_volume_errors():
    with pytest.raises(PolytopeError):
        mixed_volume([TRI])
    with pytest.raises(PolytopeError):
        mixed_volume([])


def test_mixed_volume_matches_float_oracle():
    for polys in _corpus(seed=3, count=20):
        assert mixed_volume(polys) == _mv_oracle(polys)


def test_mixed_volume_lower_dimensional_arguments():
    seg_x = convex_hull([(0, 0), (2, 0)])
    seg_y = convex_hull([(0, 0), (0, 3)])
    assert mixed_volume([seg_x, seg_y]) == 6
    assert mixed_volume([seg_x, seg_x]) == 0


def test_mixed_volume_permutation_and_translation_invariance():
    rng = np.random.default_rng(1)
    for polys in _corpus(count=12):
        mv = mixed_volume(polys)
        perms = list(itertools.permutations(range(len(polys))))
        if len(polys) == 4:
            perms = [perms[i] for i in rng.choice(len(perms), 5, replace=False)]
        for perm in perms:
            assert mixed_volume([polys[i] for i in perm]) == mv
        shifted = [p.translate(rng.integers(-3, 4, size=p.dim).tolist()) for p in polys]
        assert mixed_volume(shifted) == mv
        assert mixed_volume([polys[0]] * len(polys)) == normalized_volume(polys[0])


# ---------------------------------------------------------------------------
# degrees


def test_alpha_beta_examples():
    assert alpha_beta(make_system(["1 + x + y"])).to_json() == {"alpha": 1, "beta": 2}
    conic = make_system(["1 + x + y + x^2 + x*y + y^2"])
    cubic = make_system(["1 + x + y + x^2 + x*y + y^2 + x^3 + x^2*y + x*y^2 + y^3"])
    assert (alpha_beta(conic).alpha, alpha_beta(conic).beta) == (4, 8)
    assert (alpha_beta(cubic).alpha, alpha_beta(cubic).beta) == (9, 18)
    pair = make_system(["1 + z1 + z2 + z3 + z4", "2 - z1 + 3*z2 + z3 - z4"])
    assert (alpha_beta(pair).alpha, alpha_beta(pair).beta) == (1, 6)


@pytest.mark.parametrize("d1,d2", [(1, 2), (2, 2), (1, 3)])
def test_projective_product_formula(d1, d2):
    def dense(d):
        return " + ".join(f"z1^{a}*z2^{b}*z3^{c}*z4^{e}" for a in range(d + 1) for b in range(d + 1)
                          for c in range(d + 1) for e in range(d + 1) if a + b + c + e <= d)
    deg = alpha_beta(make_system([dense(d1), dense(d2)]))
    assert deg.alpha == (d1 * d2) ** 2
    assert deg.beta == 6 * (d1 * d2) ** 2


def test_beta_even_and_translation_invariant():
    rng = np.random.default_rng(9)
    for _ in range(10):
        exps = {tuple(rng.integers(-2, 3, size=2)) for _ in range(5)}
        text = " + ".join(f"x^{a}*y^{b}" for a, b in exps)
        try:
            s = make_system([text])
            deg = alpha_beta(s)
        except PolytopeError:
            continue
        assert deg.beta % 2 == 0
        eps = log_polar(rng.normal(size=2), rng.uniform(0, 2 * math.pi, size=2))
        assert alpha_beta(translate_system(s, eps)) == deg
