import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from halfamoeba import (
    DimensionError,
    EmptyPolynomialError,
    LaurentError,
    LaurentPolynomial,
    LogPolarPoint,
    ParseError,
    conj_poly,
    conj_prime_poly,
    evaluate,
    format_poly,
    format_system,
    jacobian_w,
    log_polar,
    make_system,
    negate,
    newton_polytope,
    parse_poly,
    parse_system,
    translate,
)
from halfamoeba.laurent import system_from_json, system_to_json

finite = st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False)
exps2 = st.tuples(st.integers(-4, 4), st.integers(-4, 4))


@st.composite
def polys(draw, nvars=2, max_terms=6):
    exps = draw(st.lists(st.tuples(*[st.integers(-4, 4)] * nvars), min_size=1, max_size=max_terms, unique=True))
    coeffs = draw(st.lists(st.tuples(finite, finite), min_size=len(exps), max_size=len(exps)))
    terms = [(e, complex(a, b)) for e, (a, b) in zip(exps, coeffs) if complex(a, b) != 0]
    if not terms:
        terms = [(exps[0], 1 + 0j)]
    return LaurentPolynomial(nvars, tuple(terms))


small = st.floats(-2, 2, allow_nan=False)
angles = st.floats(0, 2 * math.pi, allow_nan=False)


def points(nvars=2):
    return st.tuples(st.lists(small, min_size=nvars, max_size=nvars),
                     st.lists(angles, min_size=nvars, max_size=nvars)).map(lambda t: log_polar(*t))


# ---------------------------------------------------------------------------
# parsing and formatting


def test_parse_line():
    f = parse_poly("1 + x + y")
    assert f.as_dict() == {(0, 0): 1, (1, 0): 1, (0, 1): 1}


def test_parse_cancellation_is_empty():
    with pytest.raises(EmptyPolynomialError):
        parse_poly("x*y^-1 - x*y^-1")


def test_parse_complex_coefficient():
    f = parse_poly("(2-1i)*x^2*y^-3")
    assert f.terms == (((2, -3), 2 - 1j),)


def test_parse_merges_like_terms():
    f = parse_poly("x + 2*x - y + y*x^0", ["x", "y"])
    assert f.as_dict() == {(1, 0): 3}


@pytest.mark.parametrize("text", ["1 + + x", "x^", "(1+2)*x", "x^999", "1e13*x", "x*", "x y"])
def test_parse_errors(text):
    with pytest.raises(LaurentError):
        parse_poly(text, ["x", "y"])


def test_parse_error_position():
    with pytest.raises(ParseError) as info:
        parse_poly("1 + x + ?", ["x", "y"])
    assert info.value.line == 1 and info.value.col == 9


def test_unknown_variable():
    with pytest.raises(LaurentError):
        parse_poly("1 + w", ["x", "y"])


def test_format_examples():
    assert format_poly(parse_poly("1 + x + y")) == "1 + x + y"
    assert format_poly(LaurentPolynomial(2, (((2, -3), 2 - 1j),))) == "(2-1i)*x^2*y^-3"


@settings(max_examples=100)
@given(polys())
def test_format_parse_roundtrip(f):
    assert parse_poly(format_poly(f), ["x", "y"]) == f


def test_system_file_format():
    text = "# comment\nvars: a, b, c, d\nf2: a*b - 1\nf1: 1 + a + c^-1\n"
    s = parse_system(text)
    assert s.n == 2 and s.var_names == ("a", "b", "c", "d")
    assert s.polys[0] == parse_poly("1 + a + c^-1", s.var_names)
    assert parse_system(format_system(s)) == s
    assert system_from_json(system_to_json(s)) == s


@pytest.mark.parametrize("text", ["f1: 1 + x\n", "vars: x, y\n", "vars: x, y, z\nf1: x + y + z\n",
                                  "vars: x, y\nf1: x\nf1: y\n", "vars: x, y\ng: x\n"])
def test_system_errors(text):
    with pytest.raises(LaurentError):
        parse_system(text)


def test_system_json_text():
    s = make_system(["1 + x + y"])
    import json
    assert parse_system(json.dumps(system_to_json(s))) == s


# ---------------------------------------------------------------------------
# points and evaluation


def test_logpolar_normalizes_angles():
    z = LogPolarPoint([0.0], [-math.pi / 2])
    assert z.theta[0] == pytest.approx(1.5 * math.pi)
    with pytest.raises(ValueError):
        LogPolarPoint([np.inf], [0.0])
    with pytest.raises(DimensionError):
        LogPolarPoint([0.0, 1.0], [0.0])


def test_evaluate_examples():
    f = parse_poly("1 + x + y")
    assert evaluate(f, log_polar([0, 0])) == pytest.approx(3)
    assert evaluate(f, log_polar([0, 0], [math.pi, math.pi])) == pytest.approx(-1)
    g = parse_poly("x*y^-1")
    assert evaluate(g, log_polar([math.log(2), math.log(4)])) == pytest.approx(0.5)


def test_evaluate_dimension_mismatch():
    with pytest.raises(DimensionError):
        evaluate(parse_poly("1 + x + y"), log_polar([0.0]))


def test_jacobian_examples():
    assert np.allclose(jacobian_w(make_system(["1 + x + y"]), log_polar([0, 0])), [[1, 1]])
    s = make_system(["x^2"])
    assert np.allclose(jacobian_w(s, log_polar([math.log(3), 0])), [[18, 0]])


@settings(max_examples=40)
@given(polys(), points())
def test_jacobian_matches_finite_differences(f, z):
    from halfamoeba import PolySystem
    s = PolySystem((f,), ("x", "y"))
    jac = jacobian_w(s, z)[0]
    h = 1e-6
    w = z.q + 1j * z.theta
    fd = []
    for k in range(2):
        e = np.zeros(2)
        e[k] = h
        plus = evaluate(f, LogPolarPoint((w + e).real, (w + e).imag))
        minus = evaluate(f, LogPolarPoint((w - e).real, (w - e).imag))
        fd.append((plus - minus) / (2 * h))
    scale = sum(abs(c) * math.exp(float(np.dot(a, z.q))) * max(1, np.abs(a).max()) for a, c in f.terms)
    assert np.max(np.abs(jac - np.array(fd))) <= 1e-6 * scale


# ---------------------------------------------------------------------------
# transformations


def test_conj_examples():
    assert conj_poly(parse_poly("1 + x + y")) == parse_poly("1 + x + y")
    assert conj_poly(parse_poly("(2-1i)*x")) == parse_poly("(2+1i)*x")
    assert conj_prime_poly(parse_poly("1 + x + y")) == parse_poly("1 + x^-1 + y^-1")
    assert conj_prime_poly(parse_poly("(2-1i)*x^2*y^-1")) == parse_poly("(2+1i)*x^-2*y")


@given(polys())
def test_conjugations_are_involutions(f):
    assert conj_poly(conj_poly(f)) == f
    assert conj_prime_poly(conj_prime_poly(f)) == f


def _rel_close(a, b, f, z):
    scale = sum(abs(c) * math.exp(float(np.dot(e, z.q))) for e, c in f.terms)
    return abs(a - b) <= 1e-12 * scale


@given(polys(), points())
def test_conj_evaluation_identity(f, z):
    zbar = log_polar(z.q, -z.theta)
    assert _rel_close(evaluate(conj_poly(f), zbar), evaluate(f, z).conjugate(), f, z)


@given(polys(), points())
def test_conj_prime_evaluation_identity(f, z):
    # the partner point is 1/conj(z), i.e. (-q, theta)
    zinv = log_polar(-z.q, z.theta)
    lhs = evaluate(conj_prime_poly(f), zinv)
    assert _rel_close(lhs, evaluate(f, z).conjugate(), f, z)


def test_translate_examples():
    f = parse_poly("1 + x + y")
    assert translate(f, log_polar([0, 0])) == f
    g = LaurentPolynomial(1, (((1,), 1),))
    assert translate(g, log_polar([math.log(2)])).terms[0][1] == pytest.approx(2)


@given(polys(), points(), points())
def test_translate_evaluation_identity(f, eps, z):
    lhs = evaluate(translate(f, eps), z)
    rhs = evaluate(f, eps.times(z))
    shifted = log_polar(eps.q + z.q)
    scale = sum(abs(c) * math.exp(float(np.dot(e, shifted.q))) for e, c in f.terms)
    assert abs(lhs - rhs) <= 1e-11 * scale


def test_newton_polytope_examples():
    assert newton_polytope(parse_poly("1 + x + y")).vertices == ((0, 0), (0, 1), (1, 0))
    assert newton_polytope(parse_poly("1 + x + y + x*y")).vertices == ((0, 0), (0, 1), (1, 0), (1, 1))
    seg = newton_polytope(LaurentPolynomial(1, (((0,), 1), ((1,), 1), ((2,), 1))))
    assert seg.vertices == ((0,), (2,))


@given(polys())
def test_newton_polytope_of_conj_prime_is_negation(f):
    assert newton_polytope(conj_prime_poly(f)) == negate(newton_polytope(f))


def test_polysystem_requires_half_dimension():
    with pytest.raises(LaurentError):
        make_system(["1 + x + y"], ["x", "y", "z"])
