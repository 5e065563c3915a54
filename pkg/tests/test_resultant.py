import numpy as np
import pytest

from halfamoeba import convex_hull, mixed_volume
from halfamoeba.resultant import NonGenericQueryError, Support, batched_roots, solve_pairs


def _eval(sup, co, x, y):
    e = sup.exponents
    return np.sum(co * x ** e[:, 0] * y ** e[:, 1])


def test_batched_roots_against_numpy():
    rng = np.random.default_rng(0)
    c = rng.normal(size=(20, 6)) + 1j * rng.normal(size=(20, 6))
    got = batched_roots(c)
    for row, roots in zip(c, got):
        ref = np.roots(row[::-1])
        assert np.allclose(np.sort_complex(roots), np.sort_complex(ref), atol=1e-8)


def test_batched_roots_trims_vanishing_leading_terms():
    got = batched_roots(np.array([[2.0, -1.0, 0.0, 0.0]]))
    assert got[0, 0] == pytest.approx(2.0)
    assert np.all(np.isnan(got[0, 1:]))


def test_graph_intersections_match_univariate_roots():
    # y = p(x) and y = r(x): common roots are the roots of p - r
    rng = np.random.default_rng(1)
    sup = Support.of([(0, 1), (0, 0), (1, 0), (2, 0)])
    for _ in range(10):
        p = rng.normal(size=3) + 1j * rng.normal(size=3)
        r = rng.normal(size=3) + 1j * rng.normal(size=3)
        fco = np.concatenate([[1], -p])[None]
        gco = np.concatenate([[1], -r])[None]
        res = solve_pairs(sup, fco, sup, gco)
        xs = np.sort_complex(res.x[0][res.valid[0]])
        ref = np.sort_complex(np.roots((p - r)[::-1]))
        assert np.allclose(xs, ref, atol=1e-8)


def test_generic_root_count_is_mixed_volume():
    rng = np.random.default_rng(2)
    fexp = [(0, 0), (1, 0), (0, 1), (1, 1), (2, 1), (-1, 1)]
    gexp = [(0, 0), (2, 0), (0, 2), (1, -1), (1, 1)]
    mv = mixed_volume([convex_hull(fexp), convex_hull(gexp)])
    fsup, gsup = Support.of(fexp), Support.of(gexp)
    q = 25
    fco = rng.normal(size=(q, len(fexp))) + 1j * rng.normal(size=(q, len(fexp)))
    gco = rng.normal(size=(q, len(gexp))) + 1j * rng.normal(size=(q, len(gexp)))
    res = solve_pairs(fsup, fco, gsup, gco)
    assert np.all(res.valid.sum(axis=1) == mv)
    for k in range(q):
        for x, y in zip(res.x[k][res.valid[k]], res.y[k][res.valid[k]]):
            assert x != 0 and y != 0
            assert abs(_eval(fsup, fco[k], x, y)) < 1e-8 * np.abs(fco[k]).sum() * max(1, abs(x), abs(y)) ** 3
            assert abs(_eval(gsup, gco[k], x, y)) < 1e-8 * np.abs(gco[k]).sum() * max(1, abs(x), abs(y)) ** 3


def test_common_component_is_nongeneric():
    sup = Support.of([(0, 0), (1, 0), (0, 1)])
    co = np.array([[1.0, 1.0, 1.0]])
    res = solve_pairs(sup, co, sup, 2 * co)
    assert res.nongeneric[0] and not res.valid[0].any()


def test_constant_pair_rejected():
    sup = Support.of([(0, 0)])
    with pytest.raises(NonGenericQueryError):
        solve_pairs(sup, np.ones((1, 1)), sup, np.ones((1, 1)))
