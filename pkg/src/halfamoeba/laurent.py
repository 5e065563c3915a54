"""Laurent polynomial systems in log-polar coordinates.

A point of the torus is stored as ``(q, theta)`` with ``z_j = exp(q_j + i theta_j)``,
so evaluation works with ``exp(<a, q>)`` and never forms ``|z_j|`` directly.
Terms are kept as a canonical tuple of ``(exponent, coefficient)`` pairs which
makes polynomials immutable, hashable and exactly comparable.

Text grammar::

    poly   := ['+'|'-'] term (('+'|'-') term)*
    term   := coeff ('*' factor)* | factor ('*' factor)*
    factor := ident ('^' int)?
    coeff  := decimal | '(' ['-'] decimal (('+'|'-') decimal 'i')? ')'
    int    := '-'? digits

System files hold a ``vars: x, y`` line followed by ``f<k>: <poly>`` lines.
"""

from __future__ import annotations

import itertools
import json
import math
import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import numpy as np

from .polytope import LatticePolytope, convex_hull

TWO_PI = 2.0 * math.pi
SAFE_EXPONENT = 700.0
DEFAULT_EXPONENT_LIMIT = 64
DEFAULT_COEFF_LIMIT = 1e12


class LaurentError(ValueError):
    pass


class ParseError(LaurentError):
    def __init__(self, message: str, line: int = 1, col: int = 1):
        super().__init__(f"line {line}, col {col}: {message}")
        self.line = line
        self.col = col
        self.reason = message


class EmptyPolynomialError(LaurentError):
    pass


class DimensionError(LaurentError):
    pass


# ---------------------------------------------------------------------------
# Points
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class LogPolarPoint:
    """Point of the complex torus, ``z = exp(q + i theta)``."""

    q: np.ndarray
    theta: np.ndarray

    def __post_init__(self):
        q = np.array(self.q, dtype=float).reshape(-1)
        theta = np.array(self.theta, dtype=float).reshape(-1)
        if q.shape != theta.shape:
            raise DimensionError("q and theta must have the same length")
        if not (np.all(np.isfinite(q)) and np.all(np.isfinite(theta))):
            raise ValueError("log-polar point must be finite")
        theta = np.mod(theta, TWO_PI)
        theta[theta >= TWO_PI] = 0.0
        q.setflags(write=False)
        theta.setflags(write=False)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "theta", theta)

    @classmethod
    def from_complex(cls, z) -> "LogPolarPoint":
        z = np.asarray(z, dtype=complex).reshape(-1)
        if np.any(z == 0):
            raise ValueError("coordinates must be nonzero")
        return cls(np.log(np.abs(z)), np.angle(z))

    @property
    def dim(self) -> int:
        return self.q.size

    def to_complex(self) -> np.ndarray:
        return np.exp(self.q + 1j * self.theta)

    def times(self, other: "LogPolarPoint") -> "LogPolarPoint":
        """Coordinatewise product ``self * other``."""
        return LogPolarPoint(self.q + other.q, self.theta + other.theta)

    def arg_pi(self) -> np.ndarray:
        return np.mod(self.theta, math.pi)

    def __eq__(self, other):
        if not isinstance(other, LogPolarPoint):
            return NotImplemented
        return np.array_equal(self.q, other.q) and np.array_equal(self.theta, other.theta)

    def __hash__(self):
        return hash((self.q.tobytes(), self.theta.tobytes()))

    def __repr__(self):
        return f"LogPolarPoint(q={self.q.tolist()}, theta={self.theta.tolist()})"


def log_polar(q, theta=None) -> LogPolarPoint:
    q = np.atleast_1d(np.asarray(q, dtype=float))
    if theta is None:
        theta = np.zeros_like(q)
    return LogPolarPoint(q, theta)


# ---------------------------------------------------------------------------
# Polynomials
# ---------------------------------------------------------------------------


def _term_key(exp: tuple[int, ...]):
    # by |degree|, then x before y before ..., positive powers before negative
    return (sum(abs(e) for e in exp), tuple(-abs(e) for e in exp), tuple(-e for e in exp))


@dataclass(frozen=True)
class LaurentPolynomial:
    """Laurent polynomial with complex coefficients in ``nvars`` variables."""

    nvars: int
    terms: tuple = field(default=())

    def __post_init__(self):
        items = self.terms.items() if isinstance(self.terms, Mapping) else self.terms
        merged: dict[tuple[int, ...], complex] = {}
        for exp, coeff in items:
            exp = tuple(int(e) for e in exp)
            if len(exp) != self.nvars:
                raise DimensionError(
                    f"exponent {exp} has length {len(exp)}, expected {self.nvars}"
                )
            c = complex(coeff)
            if not (math.isfinite(c.real) and math.isfinite(c.imag)):
                raise LaurentError(f"non-finite coefficient {coeff!r}")
            merged[exp] = merged.get(exp, 0j) + c
        canon = tuple(
            (e, complex(c.real + 0.0, c.imag + 0.0))
            for e, c in sorted(merged.items(), key=lambda kv: _term_key(kv[0]))
            if c != 0
        )
        if not canon:
            raise EmptyPolynomialError("polynomial has no nonzero terms")
        object.__setattr__(self, "terms", canon)

    @classmethod
    def from_dict(cls, terms: Mapping, nvars: int | None = None) -> "LaurentPolynomial":
        if nvars is None:
            nvars = len(next(iter(terms)))
        return cls(nvars, tuple(terms.items()))

    def as_dict(self) -> dict[tuple[int, ...], complex]:
        return dict(self.terms)

    @cached_property
    def exponents(self) -> np.ndarray:
        a = np.array([e for e, _ in self.terms], dtype=np.int64).reshape(len(self.terms), self.nvars)
        a.setflags(write=False)
        return a

    @cached_property
    def coeffs(self) -> np.ndarray:
        c = np.array([c for _, c in self.terms], dtype=complex)
        c.setflags(write=False)
        return c

    def __len__(self):
        return len(self.terms)

    def __str__(self):
        return format_poly(self)


@dataclass(frozen=True)
class PolySystem:
    """``n`` Laurent polynomials in ``2n`` variables."""

    polys: tuple
    var_names: tuple

    def __post_init__(self):
        polys = tuple(self.polys)
        names = tuple(self.var_names)
        if not polys:
            raise LaurentError("system needs at least one polynomial")
        n = len(polys)
        if len(names) != 2 * n:
            raise DimensionError(
                f"{n} equations need exactly {2 * n} variables, got {len(names)}"
            )
        if len(set(names)) != len(names):
            raise LaurentError("duplicate variable names")
        for f in polys:
            if f.nvars != 2 * n:
                raise DimensionError(f"polynomial in {f.nvars} variables, expected {2 * n}")
        object.__setattr__(self, "polys", polys)
        object.__setattr__(self, "var_names", names)

    @property
    def n(self) -> int:
        return len(self.polys)

    @property
    def nvars(self) -> int:
        return 2 * len(self.polys)

    def __str__(self):
        return format_system(self)


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>[-+*^()])
    """,
    re.VERBOSE,
)


def _tokenize(text: str, line: int, col0: int):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col0 + pos)
        kind = m.lastgroup
        if kind != "ws":
            tokens.append((kind, m.group(), col0 + pos))
        pos = m.end()
    tokens.append(("end", "", col0 + len(text)))
    return tokens


class _Parser:
    def __init__(self, text, line, col0, exponent_limit, coeff_limit):
        self.toks = _tokenize(text, line, col0)
        self.i = 0
        self.line = line
        self.exponent_limit = exponent_limit
        self.coeff_limit = coeff_limit

    def peek(self):
        return self.toks[self.i]

    def take(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def error(self, msg, tok=None):
        tok = tok or self.peek()
        return ParseError(msg, self.line, tok[2])

    def expect(self, value):
        tok = self.take()
        if tok[1] != value:
            raise self.error(f"expected {value!r}, found {tok[1] or 'end of input'!r}", tok)
        return tok

    def number(self) -> float:
        tok = self.take()
        if tok[0] != "num":
            raise self.error(f"expected a number, found {tok[1] or 'end of input'!r}", tok)
        return float(tok[1])

    def parse_poly(self):
        terms = []
        sign = 1.0
        if self.peek()[1] in "+-" and self.peek()[0] == "op":
            sign = -1.0 if self.take()[1] == "-" else 1.0
        terms.append(self.term(sign))
        while self.peek()[0] == "op" and self.peek()[1] in "+-":
            sign = -1.0 if self.take()[1] == "-" else 1.0
            terms.append(self.term(sign))
        tok = self.peek()
        if tok[0] != "end":
            raise self.error(f"unexpected {tok[1]!r}", tok)
        return terms

    def coeff(self) -> complex:
        tok = self.peek()
        if tok[0] == "num":
            return complex(self.number())
        self.expect("(")
        neg = False
        if self.peek()[1] == "-":
            self.take()
            neg = True
        re_part = self.number()
        if neg:
            re_part = -re_part
        im_part = 0.0
        if self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            s = -1.0 if self.take()[1] == "-" else 1.0
            if self.peek()[0] == "num":
                im_part = s * self.number()
                tok = self.take()
                if tok[1] != "i":
                    raise self.error("expected 'i' after imaginary part", tok)
            else:
                tok = self.take()
                if tok[1] != "i":
                    raise self.error("expected imaginary part", tok)
                im_part = s
        self.expect(")")
        return complex(re_part, im_part)

    def factor(self):
        tok = self.take()
        if tok[0] != "ident":
            raise self.error(f"expected a variable, found {tok[1] or 'end of input'!r}", tok)
        power = 1
        if self.peek()[1] == "^":
            self.take()
            neg = False
            if self.peek()[1] == "-":
                self.take()
                neg = True
            ptok = self.take()
            if ptok[0] != "num" or not ptok[1].isdigit():
                raise self.error("expected an integer exponent", ptok)
            power = -int(ptok[1]) if neg else int(ptok[1])
        return tok, power

    def term(self, sign: float):
        coeff = complex(sign)
        factors = []
        tok = self.peek()
        if tok[0] == "num" or tok[1] == "(":
            coeff = sign * self.coeff()
            if abs(coeff) > self.coeff_limit:
                raise self.error(f"coefficient magnitude exceeds {self.coeff_limit:g}", tok)
        else:
            factors.append(self.factor())
        while self.peek()[1] == "*":
            self.take()
            factors.append(self.factor())
        return coeff, factors


def _default_names(count: int) -> tuple[str, ...]:
    if count <= 3:
        return ("x", "y", "z")[:count]
    return tuple(f"z{k}" for k in range(1, count + 1))


def _infer_names(idents: Iterable[str]) -> tuple[str, ...]:
    idents = set(idents)
    if not idents:
        return ("x",)
    if idents <= {"x", "y", "z"}:
        top = max("xyz".index(v) for v in idents)
        return ("x", "y", "z")[: top + 1]
    for prefix in ("z", "x"):
        pat = re.compile(rf"{prefix}(\d+)$")
        if all(pat.match(v) for v in idents):
            top = max(int(pat.match(v).group(1)) for v in idents)
            return tuple(f"{prefix}{k}" for k in range(1, top + 1))
    return tuple(sorted(idents))


def _parse_terms(text, line, col0, exponent_limit, coeff_limit):
    return _Parser(text, line, col0, exponent_limit, coeff_limit).parse_poly()


def _assemble(raw_terms, names, line, exponent_limit) -> LaurentPolynomial:
    index = {v: k for k, v in enumerate(names)}
    merged: dict[tuple[int, ...], complex] = {}
    for coeff, factors in raw_terms:
        exp = [0] * len(names)
        for tok, power in factors:
            if tok[1] not in index:
                raise ParseError(f"unknown variable {tok[1]!r}", line, tok[2])
            exp[index[tok[1]]] += power
            if abs(exp[index[tok[1]]]) > exponent_limit:
                raise ParseError(f"exponent out of range (|e| > {exponent_limit})", line, tok[2])
        key = tuple(exp)
        merged[key] = merged.get(key, 0j) + coeff
    merged = {k: c for k, c in merged.items() if c != 0}
    if not merged:
        raise EmptyPolynomialError("all terms cancel")
    return LaurentPolynomial(len(names), tuple(merged.items()))


def parse_poly(
    text: str,
    expected_vars: Sequence[str] | None = None,
    *,
    exponent_limit: int = DEFAULT_EXPONENT_LIMIT,
    coeff_limit: float = DEFAULT_COEFF_LIMIT,
    line: int = 1,
    col_offset: int = 1,
) -> LaurentPolynomial:
    """Parse one polynomial.

    Without ``expected_vars`` the variable order is inferred: subsets of
    ``x, y, z`` and indexed names ``z1, z2, ...`` keep their natural order,
    anything else is sorted.
    """
    raw = _parse_terms(text, line, col_offset, exponent_limit, coeff_limit)
    if expected_vars is None:
        names = _infer_names(tok[1] for _, fs in raw for tok, _ in fs)
    else:
        names = tuple(expected_vars)
    return _assemble(raw, names, line, exponent_limit)


def parse_system(
    text: str,
    *,
    exponent_limit: int = DEFAULT_EXPONENT_LIMIT,
    coeff_limit: float = DEFAULT_COEFF_LIMIT,
) -> PolySystem:
    """Parse the ``vars:`` / ``f<k>:`` text format, or the canonical JSON form."""
    if text.lstrip().startswith("{"):
        try:
            return system_from_json(json.loads(text))
        except json.JSONDecodeError as exc:
            raise ParseError(exc.msg, exc.lineno, exc.colno) from None
    names = None
    polys: dict[int, LaurentPolynomial] = {}
    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        content = raw_line.split("#", 1)[0]
        if not content.strip():
            continue
        head, sep, body = content.partition(":")
        if not sep:
            raise ParseError("expected 'vars:' or 'f<k>:'", lineno, 1)
        key = head.strip()
        col = len(head) + 2
        if key == "vars":
            if names is not None:
                raise ParseError("duplicate vars line", lineno, 1)
            names = tuple(v.strip() for v in body.split(","))
            for v in names:
                if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", v):
                    raise ParseError(f"invalid variable name {v!r}", lineno, col)
            continue
        m = re.fullmatch(r"f(\d+)", key)
        if m is None:
            raise ParseError(f"unknown line label {key!r}", lineno, 1)
        if names is None:
            raise ParseError("polynomial before vars line", lineno, 1)
        k = int(m.group(1))
        if k in polys:
            raise ParseError(f"duplicate label f{k}", lineno, 1)
        polys[k] = parse_poly(
            body, names, exponent_limit=exponent_limit, coeff_limit=coeff_limit,
            line=lineno, col_offset=col,
        )
    if names is None:
        raise ParseError("missing vars line", 1, 1)
    if not polys:
        raise ParseError("no polynomials", 1, 1)
    try:
        return PolySystem(tuple(polys[k] for k in sorted(polys)), names)
    except LaurentError as exc:
        raise ParseError(str(exc), 1, 1) from None


def load_system(path) -> PolySystem:
    with open(path, encoding="utf-8") as fh:
        return parse_system(fh.read())


# ---------------------------------------------------------------------------
# Formatting and JSON
# ---------------------------------------------------------------------------


def _fmt_real(x: float) -> str:
    if x == int(x) and abs(x) < 1e16:
        return str(int(x))
    return repr(float(x))


def _fmt_coeff(c: complex) -> str:
    sign = "-" if c.imag < 0 else "+"
    return f"({_fmt_real(c.real)}{sign}{_fmt_real(abs(c.imag))}i)"


def _fmt_monomial(exp, names) -> str:
    parts = []
    for e, v in zip(exp, names):
        if e == 1:
            parts.append(v)
        elif e != 0:
            parts.append(f"{v}^{e}")
    return "*".join(parts)


def format_poly(f: LaurentPolynomial, var_names: Sequence[str] | None = None) -> str:
    """Canonical text; ``parse_poly(format_poly(f), names) == f`` exactly."""
    names = tuple(var_names) if var_names is not None else _default_names(f.nvars)
    out = []
    for exp, c in f.terms:
        mono = _fmt_monomial(exp, names)
        if c.imag == 0:
            neg = c.real < 0
            mag = abs(c.real)
            if mono and mag == 1:
                body = mono
            else:
                body = _fmt_real(mag) + ("*" + mono if mono else "")
        else:
            neg = False
            body = _fmt_coeff(c) + ("*" + mono if mono else "")
        if not out:
            out.append(("-" if neg else "") + body)
        else:
            out.append((" - " if neg else " + ") + body)
    return "".join(out)


def format_system(system: PolySystem) -> str:
    lines = ["vars: " + ", ".join(system.var_names)]
    for k, f in enumerate(system.polys, start=1):
        lines.append(f"f{k}: {format_poly(f, system.var_names)}")
    return "\n".join(lines) + "\n"


def poly_to_json(f: LaurentPolynomial) -> dict:
    return {
        "terms": [
            {"exp": list(e), "re": c.real, "im": c.imag} for e, c in f.terms
        ]
    }


def system_to_json(system: PolySystem) -> dict:
    return {
        "vars": list(system.var_names),
        "polys": [poly_to_json(f) for f in system.polys],
    }


def system_from_json(data: Mapping) -> PolySystem:
    try:
        names = tuple(data["vars"])
        polys = []
        for p in data["polys"]:
            terms = [(tuple(t["exp"]), complex(t["re"], t.get("im", 0.0))) for t in p["terms"]]
            polys.append(LaurentPolynomial(len(names), tuple(terms)))
    except (KeyError, TypeError) as exc:
        raise ParseError(f"malformed system JSON: {exc}", 1, 1) from None
    return PolySystem(tuple(polys), names)


def make_system(polys: Sequence[str], var_names: Sequence[str] | None = None) -> PolySystem:
    """Build a system from polynomial strings (variables ``x, y`` / ``z1..z4`` by default)."""
    n = len(polys)
    names = tuple(var_names) if var_names is not None else _default_names(2 * n)
    return PolySystem(tuple(parse_poly(p, names) for p in polys), names)


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------


def _check_dims(f: LaurentPolynomial, z: LogPolarPoint):
    if z.dim != f.nvars:
        raise DimensionError(f"point has {z.dim} coordinates, polynomial has {f.nvars} variables")


def term_values(f: LaurentPolynomial, q, theta, *, check: bool = True) -> np.ndarray:
    """Array of ``c_a exp(<a,q> + i<a,theta>)`` with shape ``q.shape[:-1] + (terms,)``."""
    q = np.asarray(q, dtype=float)
    theta = np.asarray(theta, dtype=float)
    a = f.exponents.astype(float)
    mod = q @ a.T
    if check and mod.size and np.max(mod) > SAFE_EXPONENT:
        raise OverflowError("monomial modulus exceeds the safe exponent range")
    return f.coeffs * np.exp(mod + 1j * (theta @ a.T))


def evaluate(f: LaurentPolynomial, z: LogPolarPoint) -> complex:
    """Value of ``f`` at a log-polar point, overflow-free up to ``<a,q> ~ 700``."""
    _check_dims(f, z)
    return complex(np.sum(term_values(f, z.q, z.theta)))


def evaluate_batch(f: LaurentPolynomial, q, theta, *, check: bool = True) -> np.ndarray:
    return term_values(f, q, theta, check=check).sum(axis=-1)


def jacobian_w(system: PolySystem, z: LogPolarPoint) -> np.ndarray:
    """Holomorphic Jacobian in ``w = log z``: entry ``(j,k) = z_k df_j/dz_k``."""
    if z.dim != system.nvars:
        raise DimensionError("point dimension does not match system")
    rows = []
    for f in system.polys:
        t = term_values(f, z.q, z.theta)
        rows.append(t @ f.exponents.astype(float))
    return np.array(rows)


def evaluate_system(system: PolySystem, q, theta, *, check: bool = False, normalize: bool = False):
    """Batched values, log-Jacobians and term-magnitude scales.

    Returns ``(values (..., n), jac (..., n, 2n), scale (..., n))`` where
    ``scale_j`` is the sum of absolute term values of ``f_j``.  With
    ``normalize`` every equation is divided by its largest term modulus
    first, which keeps far-away points finite; ratios to ``scale`` are
    unchanged.
    """
    vals, jacs, scales = [], [], []
    for f in system.polys:
        if normalize:
            t = normalized_terms(f, q, theta)
        else:
            t = term_values(f, q, theta, check=check)
        vals.append(t.sum(axis=-1))
        jacs.append(t @ f.exponents.astype(float))
        scales.append(np.abs(t).sum(axis=-1))
    return np.stack(vals, -1), np.stack(jacs, -2), np.stack(scales, -1)


def normalized_terms(f: LaurentPolynomial, q, theta) -> np.ndarray:
    """Term values divided by the largest term modulus at each point."""
    q = np.asarray(q, dtype=float)
    theta = np.asarray(theta, dtype=float)
    a = f.exponents.astype(float)
    with np.errstate(divide="ignore"):
        logmod = q @ a.T + np.log(np.abs(f.coeffs))
    logmod = logmod - logmod.max(axis=-1, keepdims=True)
    return np.exp(logmod + 1j * (theta @ a.T + np.angle(f.coeffs)))


def scaled_residual(system: PolySystem, z: LogPolarPoint) -> float:
    """``max_j |f_j(z)| / sum_a |c_a z^a|``, the scale-free residual."""
    vals, _, scale = evaluate_system(system, z.q, z.theta, check=True)
    return float(np.max(np.abs(vals) / scale))


# ---------------------------------------------------------------------------
# Transformations
# ---------------------------------------------------------------------------


def conj_poly(f: LaurentPolynomial) -> LaurentPolynomial:
    """Coefficients conjugated: the zero set becomes its complex conjugate."""
    return LaurentPolynomial(f.nvars, tuple((e, c.conjugate()) for e, c in f.terms))


def conj_prime_poly(f: LaurentPolynomial) -> LaurentPolynomial:
    """``z -> 1/z`` followed by conjugation: exponents negated, coefficients conjugated."""
    return LaurentPolynomial(
        f.nvars, tuple((tuple(-x for x in e), c.conjugate()) for e, c in f.terms)
    )


def translate(f: LaurentPolynomial, eps: LogPolarPoint) -> LaurentPolynomial:
    """``g(z) = f(eps * z)``; coefficient ``c_a`` becomes ``c_a eps^a``."""
    _check_dims(f, eps)
    scaled = term_values(f, eps.q, eps.theta)
    return LaurentPolynomial(f.nvars, tuple((e, complex(c)) for (e, _), c in zip(f.terms, scaled)))


def conj_system(system: PolySystem) -> PolySystem:
    return PolySystem(tuple(conj_poly(f) for f in system.polys), system.var_names)


def conj_prime_system(system: PolySystem) -> PolySystem:
    return PolySystem(tuple(conj_prime_poly(f) for f in system.polys), system.var_names)


def translate_system(system: PolySystem, eps: LogPolarPoint) -> PolySystem:
    return PolySystem(tuple(translate(f, eps) for f in system.polys), system.var_names)


def newton_polytope(f: LaurentPolynomial) -> LatticePolytope:
    return convex_hull([e for e, _ in f.terms])
