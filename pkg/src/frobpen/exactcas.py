"""Exact arithmetic kernel: rationals, polynomials, rational functions, matrices.

Polynomials are sparse over QQ with named variables.  The variable universe of
an expression is the ring it lives in; binary operations silently move both
operands into the ring generated by the union of their names.  Rings are
ordered by a natural sort of variable names (``u2 < u10``) and monomials are
compared graded-lexicographically, so two equal polynomials always print
identically.

The sparse ring engine is :mod:`sympy.polys.rings` (gmpy-backed).  Canonical
forms, rational functions, elimination and serialization live here.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache, reduce
from typing import Iterable, Mapping, Sequence, Union

from sympy.polys.domains import QQ
from sympy.polys.orderings import lex
from sympy.polys.rings import PolyElement, PolyRing

ExactScalar = Fraction

ScalarLike = Union[int, Fraction, str]


class ZeroDivision(ZeroDivisionError):
    """Division by the zero polynomial or zero rational function."""


class SingularMatrix(ArithmeticError):
    """The determinant is the zero rational function."""


# ---------------------------------------------------------------------------
# scalars


def scalar(x) -> Fraction:
    """Coerce ``int``/``Fraction``/``"p/q"``/gmpy ``mpq`` to :class:`Fraction`."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    if hasattr(x, "numerator") and hasattr(x, "denominator"):
        return Fraction(int(x.numerator), int(x.denominator))
    raise TypeError(f"not an exact scalar: {x!r}")


def scalar_str(q: Fraction) -> str:
    q = scalar(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def _to_qq(x):
    q = scalar(x)
    return QQ(q.numerator, q.denominator)


# ---------------------------------------------------------------------------
# variable universe

_NAME_RE = re.compile(r"(\d+)")


def var_key(name: str):
    """Natural sort key: ``x2`` before ``x10``, ``y1_2`` before ``y2_1``."""
    return tuple(int(tok) if tok.isdigit() else tok for tok in _NAME_RE.split(name))


def sort_vars(names: Iterable[str]) -> tuple[str, ...]:
    return tuple(sorted(set(names), key=var_key))


@lru_cache(maxsize=None)
def _ring(names: tuple[str, ...]) -> PolyRing:
    return PolyRing(names, QQ, lex) if names else _EMPTY_RING


# lex inside the engine (cheap leading terms); graded-lex only for presentation
_EMPTY_RING = PolyRing(("_one",), QQ, lex)


def _grlex_key(m):
    return (sum(m), m)


def _canonical_terms(p: PolyElement):
    return sorted(p.items(), key=lambda mc: _grlex_key(mc[0]), reverse=True)


def _canonical_lc(p: PolyElement):
    return max(p.items(), key=lambda mc: _grlex_key(mc[0]))[1]


@lru_cache(maxsize=None)
def _names(ring: PolyRing) -> tuple[str, ...]:
    if ring is _EMPTY_RING:
        return ()
    return tuple(str(s) for s in ring.symbols)


@lru_cache(maxsize=None)
def _index(ring: PolyRing) -> dict[str, int]:
    return {n: i for i, n in enumerate(_names(ring))}


def _ring_for(names: Iterable[str]) -> PolyRing:
    ordered = sort_vars(names)
    return _ring(ordered) if ordered else _EMPTY_RING


@lru_cache(maxsize=4096)
def _union(r1: PolyRing, r2: PolyRing) -> PolyRing:
    if r1 is r2:
        return r1
    n1, n2 = _names(r1), _names(r2)
    if set(n2) <= set(n1):
        return r1
    if set(n1) <= set(n2):
        return r2
    return _ring_for(n1 + n2)


def _embed(p: PolyElement, ring: PolyRing) -> PolyElement:
    if p.ring is ring:
        return p
    if p.ring is _EMPTY_RING:
        return ring.ground_new(p.LC if p else 0)
    return p.set_ring(ring)


def _align(p: PolyElement, q: PolyElement) -> tuple[PolyElement, PolyElement]:
    if p.ring is q.ring:
        return p, q
    r = _union(p.ring, q.ring)
    return _embed(p, r), _embed(q, r)


# ---------------------------------------------------------------------------
# MPoly


def _term_str(names, exps, coeff) -> str:
    c = scalar(coeff)
    factors = [n if e == 1 else f"{n}^{e}" for n, e in zip(names, exps) if e]
    if not factors:
        return f"({scalar_str(c)})" if c < 0 else scalar_str(c)
    mono = "*".join(factors)
    if c == 1:
        return mono
    cs = scalar_str(c)
    return f"({cs})*{mono}" if c < 0 else f"{cs}*{mono}"


class MPoly:
    """Multivariate polynomial over the rationals with named variables."""

    __slots__ = ("p",)

    def __init__(self, p: PolyElement):
        self.p = p

    # construction
    @classmethod
    def var(cls, name: str) -> "MPoly":
        r = _ring((name,))
        return cls(r.gens[0])

    @classmethod
    def const(cls, c, names: Iterable[str] = ()) -> "MPoly":
        r = _ring_for(names)
        return cls(r.ground_new(_to_qq(c)))

    @classmethod
    def from_terms(cls, names: Sequence[str], terms: Mapping[tuple, ScalarLike]) -> "MPoly":
        r = _ring_for(names)
        idx = _index(r)
        out = {}
        for exps, c in terms.items():
            c = _to_qq(c)
            if not c:
                continue
            full = [0] * len(r.gens)
            for n, e in zip(names, exps):
                full[idx[n]] += e
            key = tuple(full)
            out[key] = out.get(key, QQ(0)) + c
        return cls(r.from_dict({k: v for k, v in out.items() if v}) if out else r.zero)

    @staticmethod
    def coerce(x) -> "MPoly":
        if isinstance(x, MPoly):
            return x
        if isinstance(x, PolyElement):
            return MPoly(x)
        return MPoly.const(x)

    # introspection
    @property
    def ring_vars(self) -> tuple[str, ...]:
        return _names(self.p.ring)

    @property
    def variables(self) -> tuple[str, ...]:
        names = _names(self.p.ring)
        used = [False] * len(names)
        for m in self.p.keys():
            for i, e in enumerate(m):
                if e:
                    used[i] = True
        return tuple(n for n, u in zip(names, used) if u)

    def terms(self) -> list[tuple[dict[str, int], Fraction]]:
        """Terms in canonical (descending graded-lex) order as ``({var: exp}, coeff)``."""
        names = _names(self.p.ring)
        return [
            ({n: e for n, e in zip(names, m) if e}, scalar(c))
            for m, c in _canonical_terms(self.p)
        ]

    def is_zero(self) -> bool:
        return not self.p

    def is_constant(self) -> bool:
        return self.p.is_ground

    def constant_value(self) -> Fraction:
        if not self.p.is_ground:
            raise ValueError(f"not a constant: {self}")
        return scalar(self.p.LC) if self.p else Fraction(0)

    def total_degree(self) -> int:
        return max((sum(m) for m in self.p.keys()), default=-1) if self.p else -1

    def degree_in(self, name: str) -> int:
        i = _index(self.p.ring).get(name)
        if i is None or not self.p:
            return 0 if self.p else -1
        return max(m[i] for m in self.p.keys())

    def leading_coeff(self) -> Fraction:
        return scalar(_canonical_lc(self.p)) if self.p else Fraction(0)

    # arithmetic
    def _bin(self, other, op):
        if isinstance(other, RatFn):
            return NotImplemented
        o = MPoly.coerce(other)
        a, b = _align(self.p, o.p)
        return MPoly(op(a, b))

    def __add__(self, other):
        return self._bin(other, lambda a, b: a + b)

    def __radd__(self, other):
        return self.__add__(other)

    def __sub__(self, other):
        return self._bin(other, lambda a, b: a - b)

    def __rsub__(self, other):
        return MPoly.coerce(other) - self

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return MPoly(self.p * _to_qq(other)) if other else MPoly(self.p.ring.zero)
        return self._bin(other, lambda a, b: a * b)

    def __rmul__(self, other):
        return self.__mul__(other)

    def __neg__(self):
        return MPoly(-self.p)

    def __pow__(self, k: int):
        if k < 0:
            return RatFn.coerce(self) ** k
        if k == 0:
            return MPoly.const(1)
        return MPoly(self.p**k)

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction, str)):
            q = scalar(other)
            if q == 0:
                raise ZeroDivision("division by zero scalar")
            return MPoly(self.p * _to_qq(1 / q))
        return RatFn(self, other)

    def __rtruediv__(self, other):
        return RatFn(MPoly.coerce(other), self)

    def exquo(self, other: "MPoly") -> "MPoly":
        a, b = _align(self.p, MPoly.coerce(other).p)
        return MPoly(a.exquo(b))

    def __eq__(self, other):
        if isinstance(other, RatFn):
            return other == self
        try:
            o = MPoly.coerce(other)
        except TypeError:
            return NotImplemented
        a, b = _align(self.p, o.p)
        return a == b

    def __hash__(self):
        return hash(self.canonical())

    def __bool__(self):
        return bool(self.p)

    # calculus / evaluation
    def diff(self, name: str) -> "MPoly":
        i = _index(self.p.ring).get(name)
        if i is None:
            return MPoly(self.p.ring.zero)
        return MPoly(self.p.diff(self.p.ring.gens[i]))

    def evaluate(self, point: Mapping[str, ScalarLike]) -> "MPoly":
        """Substitute rational values for some variables."""
        return self.substitute({k: MPoly.const(v) for k, v in point.items()}).as_poly()

    def substitute(self, values: Mapping[str, "MPoly | RatFn | ScalarLike"]) -> "RatFn":
        return RatFn.coerce(self).substitute(values)

    def coeffs_wrt(self, names: Sequence[str]) -> dict[tuple[int, ...], "MPoly"]:
        """Group by monomials in ``names``; values are polynomials in the other variables."""
        ring_names = _names(self.p.ring)
        pos = [ring_names.index(n) if n in ring_names else None for n in names]
        rest = tuple(n for n in ring_names if n not in set(names))
        rest_ring = _ring_for(rest)
        rest_pos = [ring_names.index(n) for n in _names(rest_ring)]
        groups: dict[tuple[int, ...], dict] = {}
        for m, c in self.p.terms():
            key = tuple(m[i] if i is not None else 0 for i in pos)
            sub = tuple(m[i] for i in rest_pos) if rest_ring is not _EMPTY_RING else (0,)
            d = groups.setdefault(key, {})
            d[sub] = d.get(sub, QQ(0)) + c
        return {k: MPoly(rest_ring.from_dict(v)) for k, v in groups.items()}

    def num_if_poly(self) -> "MPoly":
        return self

    # printing
    def canonical(self) -> str:
        if not self.p:
            return "0"
        names = _names(self.p.ring)
        return " + ".join(_term_str(names, m, c) for m, c in _canonical_terms(self.p))

    __str__ = canonical

    def __repr__(self):
        return f"MPoly({self.canonical()!r})"


def poly_gcd(a: MPoly, b: MPoly) -> MPoly:
    x, y = _align(a.p, b.p)
    return MPoly(x.gcd(y))


# ---------------------------------------------------------------------------
# RatFn


def _canon(num: PolyElement, den: PolyElement) -> tuple[PolyElement, PolyElement]:
    if not den:
        raise ZeroDivision("division by the zero polynomial")
    num, den = _align(num, den)
    if not num:
        return num, den.ring.one
    if not den.is_ground:
        g = num.gcd(den)
        if not g.is_ground:
            num = num.exquo(g)
            den = den.exquo(g)
    lc = _canonical_lc(den)
    if lc != 1:
        num = num.quo_ground(lc)
        den = den.quo_ground(lc)
    return num, den


class RatFn:
    """Quotient of polynomials in lowest terms with a monic denominator."""

    __slots__ = ("num", "den")

    def __init__(self, num, den=1, *, _canonical=False):
        n = MPoly.coerce(num).p
        d = MPoly.coerce(den).p
        if not _canonical:
            n, d = _canon(n, d)
        self.num = n
        self.den = d

    @staticmethod
    def coerce(x) -> "RatFn":
        if isinstance(x, RatFn):
            return x
        if isinstance(x, MPoly):
            return RatFn(x.p, x.p.ring.one, _canonical=True)
        if isinstance(x, PolyElement):
            return RatFn(x, x.ring.one, _canonical=True)
        c = MPoly.const(x)
        return RatFn(c.p, c.p.ring.one, _canonical=True)

    @classmethod
    def var(cls, name: str) -> "RatFn":
        return cls.coerce(MPoly.var(name))

    @classmethod
    def zero(cls) -> "RatFn":
        return cls.coerce(0)

    @classmethod
    def one(cls) -> "RatFn":
        return cls.coerce(1)

    # structure
    @property
    def numerator(self) -> MPoly:
        return MPoly(self.num)

    @property
    def denominator(self) -> MPoly:
        return MPoly(self.den)

    @property
    def variables(self) -> tuple[str, ...]:
        return sort_vars(MPoly(self.num).variables + MPoly(self.den).variables)

    def is_zero(self) -> bool:
        return not self.num

    def is_polynomial(self) -> bool:
        return self.den.is_ground

    def is_constant(self) -> bool:
        return self.den.is_ground and self.num.is_ground

    def constant_value(self) -> Fraction:
        if not self.is_constant():
            raise ValueError(f"not a constant: {self}")
        return scalar(self.num.LC) if self.num else Fraction(0)

    def as_poly(self) -> MPoly:
        if not self.is_polynomial():
            raise ValueError(f"not a polynomial: {self}")
        return MPoly(self.num)

    # arithmetic
    def __add__(self, other):
        o = RatFn.coerce(other)
        a_n, a_d = _align(self.num, self.den)
        b_n, b_d = _align(o.num, o.den)
        a_n, b_n = _align(a_n, b_n)
        a_d, b_d = _align(a_d, b_d)
        if a_d == b_d:
            return RatFn(a_n + b_n, a_d)
        if a_d.is_ground:
            return RatFn(a_n * b_d + b_n, b_d, _canonical=True)
        if b_d.is_ground:
            return RatFn(a_n + b_n * a_d, a_d, _canonical=True)
        g = a_d.gcd(b_d)
        if g.is_ground:
            return RatFn(a_n * b_d + b_n * a_d, a_d * b_d)
        ad, bd = a_d.exquo(g), b_d.exquo(g)
        return RatFn(a_n * bd + b_n * ad, a_d * bd)

    def __radd__(self, other):
        return self.__add__(other)

    def __neg__(self):
        return RatFn(-self.num, self.den, _canonical=True)

    def __sub__(self, other):
        return self + (-RatFn.coerce(other))

    def __rsub__(self, other):
        return RatFn.coerce(other) - self

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            if not other:
                return RatFn.zero()
            return RatFn(self.num * _to_qq(other), self.den, _canonical=True)
        o = RatFn.coerce(other)
        if o.den.is_ground and self.den.is_ground:
            n1, n2 = _align(self.num, o.num)
            return RatFn(n1 * n2, n1.ring.one, _canonical=True)
        # cross-cancel before multiplying
        n1, d2 = _align(self.num, o.den)
        n2, d1 = _align(o.num, self.den)
        g1 = n1.gcd(d2) if not d2.is_ground else None
        g2 = n2.gcd(d1) if not d1.is_ground else None
        if g1 is not None and not g1.is_ground:
            n1, d2 = n1.exquo(g1), d2.exquo(g1)
        if g2 is not None and not g2.is_ground:
            n2, d1 = n2.exquo(g2), d1.exquo(g2)
        n1, n2 = _align(n1, n2)
        d1, d2 = _align(d1, d2)
        num, den = _align(n1 * n2, d1 * d2)
        if not num:
            return RatFn.zero()
        lc = _canonical_lc(den)
        if lc != 1:
            num, den = num.quo_ground(lc), den.quo_ground(lc)
        return RatFn(num, den, _canonical=True)

    def __rmul__(self, other):
        return self.__mul__(other)

    def inverse(self) -> "RatFn":
        if not self.num:
            raise ZeroDivision("inverse of zero rational function")
        return RatFn(self.den, self.num)

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            if not other:
                raise ZeroDivision("division by zero scalar")
            return self * (1 / Fraction(other))
        return self * RatFn.coerce(other).inverse()

    def __rtruediv__(self, other):
        return RatFn.coerce(other) * self.inverse()

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        if k == 0:
            return RatFn.one()
        return RatFn(self.num**k, self.den**k, _canonical=True)

    def __eq__(self, other):
        try:
            o = RatFn.coerce(other)
        except TypeError:
            return NotImplemented
        a, b = _align(self.num, o.num)
        c, d = _align(self.den, o.den)
        return a == b and c == d

    def __hash__(self):
        return hash(self.canonical())

    def __bool__(self):
        return bool(self.num)

    # calculus
    def diff(self, name: str) -> "RatFn":
        dn = MPoly(self.num).diff(name).p
        if self.den.is_ground:
            return RatFn(dn, self.den, _canonical=True) if dn else RatFn.zero()
        dd = MPoly(self.den).diff(name).p
        if not dd:
            return RatFn(dn, self.den) if dn else RatFn.zero()
        n, d = _align(self.num, self.den)
        dn, dd = _align(dn, dd)
        dn, n = _align(dn, n)
        dd, d = _align(dd, d)
        return RatFn(dn * d - n * dd, d * d)

    def substitute(self, values: Mapping[str, "MPoly | RatFn | ScalarLike"]) -> "RatFn":
        """Simultaneous substitution of rational functions for variables."""
        vals = {k: RatFn.coerce(v) for k, v in values.items()}
        return _subs_poly(self.num, vals) / _subs_poly(self.den, vals)

    def evaluate(self, point: Mapping[str, ScalarLike]) -> "RatFn":
        return self.substitute({k: scalar(v) for k, v in point.items()})

    # printing
    def canonical(self) -> str:
        ns = MPoly(self.num).canonical()
        if self.den.is_ground:
            return ns
        ds = MPoly(self.den).canonical()
        if len(self.num) > 1:
            ns = f"({ns})"
        if len(self.den) > 1 or "*" in ds:
            ds = f"({ds})"
        return f"{ns} / {ds}"

    __str__ = canonical

    def __repr__(self):
        return f"RatFn({self.canonical()!r})"


def _subs_poly(p: PolyElement, vals: Mapping[str, RatFn]) -> RatFn:
    names = _names(p.ring)
    hit = [i for i, n in enumerate(names) if n in vals]
    if not hit or not p:
        return RatFn.coerce(p)
    keep = [n for i, n in enumerate(names) if i not in set(hit)]
    # common denominator per substituted variable: prod b_v^{d_v}
    deg = {i: max(m[i] for m in p.keys()) for i in hit}
    nums = {i: vals[names[i]].num for i in hit}
    dens = {i: vals[names[i]].den for i in hit}
    target = reduce(_union, [nums[i].ring for i in hit] + [dens[i].ring for i in hit] + [_ring_for(keep)])
    nums = {i: _embed(v, target) for i, v in nums.items()}
    dens = {i: _embed(v, target) for i, v in dens.items()}
    powcache: dict[tuple[int, int, bool], PolyElement] = {}

    def pw(i, e, is_num):
        key = (i, e, is_num)
        if key not in powcache:
            base = nums[i] if is_num else dens[i]
            powcache[key] = base**e
        return powcache[key]

    tidx = _index(target)
    keep_pos = [(i, tidx[n]) for i, n in enumerate(names) if i not in set(hit)]
    total = target.zero
    for m, c in p.terms():
        mono = [0] * target.ngens
        for i, j in keep_pos:
            mono[j] = m[i]
        term = target.from_dict({tuple(mono): c})
        for i in hit:
            e = m[i]
            if e:
                term = term * pw(i, e, True)
            if deg[i] - e:
                term = term * pw(i, deg[i] - e, False)
        total += term
    den = target.one
    for i in hit:
        if deg[i]:
            den = den * pw(i, deg[i], False)
    return RatFn(total, den)


Expr = Union[MPoly, RatFn]


def to_ratfn(x) -> RatFn:
    return RatFn.coerce(x)


_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*(?:\{\d+\})?")


def parse_expr(text: str) -> RatFn:
    """Parse a canonical string (or any polynomial expression) back to a RatFn."""
    import sympy

    names: dict[str, str] = {}

    def token(m):
        return names.setdefault(m.group(0), f"_v{len(names)}")

    # placeholders keep names like ``u1_x{12}`` or ``E`` away from sympy's parser
    safe = _IDENT_RE.sub(token, text.strip()).replace("^", "**")
    back = {v: k for k, v in names.items()}
    expr = sympy.sympify(safe, locals={v: sympy.Symbol(v) for v in back})
    num, den = sympy.fraction(sympy.together(expr))
    placeholders = sorted((str(s) for s in expr.free_symbols), key=lambda v: var_key(back[v]))
    syms = [back[v] for v in placeholders]

    def conv(e):
        if not syms:
            return MPoly.const(Fraction(str(sympy.Rational(e))))
        poly = sympy.Poly(sympy.expand(e), *[sympy.Symbol(v) for v in placeholders])
        return MPoly.from_terms(syms, {m: Fraction(str(c)) for m, c in poly.terms()})

    return RatFn(conv(num), conv(den))


# ---------------------------------------------------------------------------
# matrices


@dataclass(frozen=True)
class RMatrix:
    """Dense rectangular matrix of rational functions."""

    entries: tuple[tuple[RatFn, ...], ...]

    def __init__(self, rows):
        rows = tuple(tuple(RatFn.coerce(e) for e in r) for r in rows)
        if not rows or not rows[0]:
            raise ValueError("matrix must be non-empty")
        w = len(rows[0])
        if any(len(r) != w for r in rows):
            raise ValueError("ragged matrix")
        object.__setattr__(self, "entries", rows)

    @classmethod
    def identity(cls, n: int) -> "RMatrix":
        return cls([[1 if i == j else 0 for j in range(n)] for i in range(n)])

    @classmethod
    def zeros(cls, r: int, c: int | None = None) -> "RMatrix":
        return cls([[0] * (c if c is not None else r) for _ in range(r)])

    @classmethod
    def diag(cls, items) -> "RMatrix":
        items = list(items)
        n = len(items)
        return cls([[items[i] if i == j else 0 for j in range(n)] for i in range(n)])

    @classmethod
    def block_diag(cls, blocks: Sequence["RMatrix"]) -> "RMatrix":
        n = sum(b.rows for b in blocks)
        out = [[RatFn.zero()] * n for _ in range(n)]
        off = 0
        for b in blocks:
            for i in range(b.rows):
                for j in range(b.cols):
                    out[off + i][off + j] = b[i, j]
            off += b.rows
        return cls(out)

    @property
    def rows(self) -> int:
        return len(self.entries)

    @property
    def cols(self) -> int:
        return len(self.entries[0])

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows, self.cols

    def __getitem__(self, ij) -> RatFn:
        i, j = ij
        return self.entries[i][j]

    def tolist(self) -> list[list[RatFn]]:
        return [list(r) for r in self.entries]

    def __eq__(self, other):
        if not isinstance(other, RMatrix):
            return NotImplemented
        return self.shape == other.shape and all(
            a == b for ra, rb in zip(self.entries, other.entries) for a, b in zip(ra, rb)
        )

    def __hash__(self):
        return hash(tuple(e.canonical() for r in self.entries for e in r))

    def __add__(self, other: "RMatrix") -> "RMatrix":
        if self.shape != other.shape:
            raise ValueError("shape mismatch")
        return RMatrix([[a + b for a, b in zip(ra, rb)] for ra, rb in zip(self.entries, other.entries)])

    def __sub__(self, other: "RMatrix") -> "RMatrix":
        return self + other.scale(-1)

    def __neg__(self):
        return self.scale(-1)

    def scale(self, c) -> "RMatrix":
        c = c if isinstance(c, (int, Fraction)) else RatFn.coerce(c)
        return RMatrix([[e * c if e else e for e in r] for r in self.entries])

    def __matmul__(self, other: "RMatrix") -> "RMatrix":
        if self.cols != other.rows:
            raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
        out = []
        for i in range(self.rows):
            row = []
            for j in range(other.cols):
                acc = RatFn.zero()
                for k in range(self.cols):
                    a = self.entries[i][k]
                    if a:
                        b = other.entries[k][j]
                        if b:
                            acc = acc + a * b
                row.append(acc)
            out.append(row)
        return RMatrix(out)

    def transpose(self) -> "RMatrix":
        return RMatrix([[self.entries[i][j] for i in range(self.rows)] for j in range(self.cols)])

    T = property(transpose)

    def is_square(self) -> bool:
        return self.rows == self.cols

    def is_symmetric(self) -> bool:
        return self.is_square() and all(
            self.entries[i][j] == self.entries[j][i] for i in range(self.rows) for j in range(i + 1, self.cols)
        )

    def is_diagonal(self) -> bool:
        return all(not self.entries[i][j] for i in range(self.rows) for j in range(self.cols) if i != j)

    def is_zero(self) -> bool:
        return all(not e for r in self.entries for e in r)

    def map(self, f) -> "RMatrix":
        return RMatrix([[f(e) for e in r] for r in self.entries])

    def diff(self, name: str) -> "RMatrix":
        return self.map(lambda e: e.diff(name))

    def evaluate(self, point: Mapping[str, ScalarLike]) -> "RMatrix":
        return self.map(lambda e: e.evaluate(point))

    def substitute(self, values) -> "RMatrix":
        return self.map(lambda e: e.substitute(values))

    def variables(self) -> tuple[str, ...]:
        return sort_vars(v for r in self.entries for e in r for v in e.variables)

    def submatrix(self, idx_r: Sequence[int], idx_c: Sequence[int]) -> "RMatrix":
        return RMatrix([[self.entries[i][j] for j in idx_c] for i in idx_r])

    # determinant / inverse
    def _components(self) -> list[list[int]]:
        """Index sets of the irreducible diagonal blocks (by nonzero pattern)."""
        n = self.rows
        parent = list(range(n))

        def find(a):
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        for i in range(n):
            for j in range(n):
                if i != j and (self.entries[i][j] or self.entries[j][i]):
                    parent[find(i)] = find(j)
        groups: dict[int, list[int]] = {}
        for i in range(n):
            groups.setdefault(find(i), []).append(i)
        return sorted(groups.values())

    def det(self) -> RatFn:
        if not self.is_square():
            raise ValueError("determinant of non-square matrix")
        comps = self._components()
        if len(comps) > 1:
            out = RatFn.one()
            for c in comps:
                out = out * self.submatrix(c, c)._det_dense()
            return out
        return self._det_dense()

    def _scaled_rows(self) -> tuple[list[list[PolyElement]], list[PolyElement]]:
        """Clear denominators row-wise: ``A = diag(d)^-1 N`` with N polynomial."""
        ring = reduce(_union, [e.num.ring for r in self.entries for e in r] + [e.den.ring for r in self.entries for e in r])
        N, ds = [], []
        for r in self.entries:
            d = reduce(lambda a, b: a.lcm(b), [_embed(e.den, ring) for e in r if e], ring.one)
            if _canonical_lc(d) != 1:
                d = d.quo_ground(_canonical_lc(d))
            row = [_embed(e.num, ring) * d.exquo(_embed(e.den, ring)) if e else ring.zero for e in r]
            N.append(row)
            ds.append(d)
        return N, ds

    def _det_dense(self) -> RatFn:
        N, ds = self._scaled_rows()
        d = bareiss_det(N)
        den = reduce(lambda a, b: a * b, ds)
        return RatFn(d, den)

    def inverse(self) -> "RMatrix":
        if not self.is_square():
            raise ValueError("inverse of non-square matrix")
        n = self.rows
        comps = self._components()
        if len(comps) > 1:
            out = [[RatFn.zero()] * n for _ in range(n)]
            for c in comps:
                inv = self.submatrix(c, c)._inverse_dense()
                for a, i in enumerate(c):
                    for b, j in enumerate(c):
                        out[i][j] = inv[a, b]
            return RMatrix(out)
        return self._inverse_dense()

    def _inverse_dense(self) -> "RMatrix":
        n = self.rows
        if n == 1:
            e = self.entries[0][0]
            if not e:
                raise SingularMatrix("singular 1x1 matrix")
            return RMatrix([[e.inverse()]])
        N, ds = self._scaled_rows()
        D, X = bareiss_adjugate(N)
        # A = diag(d)^-1 N  =>  A^-1 = N^-1 diag(d) = X diag(d) / D
        return RMatrix([[RatFn(X[i][j] * ds[j], D) if X[i][j] else RatFn.zero() for j in range(n)] for i in range(n)])

    # serialization
    def to_strings(self) -> list[list[str]]:
        return [[e.canonical() for e in r] for r in self.entries]

    def __str__(self):
        return "\n".join("[" + ", ".join(r) + "]" for r in self.to_strings())

    def __repr__(self):
        return f"RMatrix({self.to_strings()!r})"


def bareiss_det(N: list[list[PolyElement]]) -> PolyElement:
    """Fraction-free determinant of a square polynomial matrix."""
    n = len(N)
    M = [row[:] for row in N]
    ring = M[0][0].ring
    sign = 1
    prev = ring.one
    for k in range(n - 1):
        piv = next((r for r in range(k, n) if M[r][k]), None)
        if piv is None:
            return ring.zero
        if piv != k:
            M[k], M[piv] = M[piv], M[k]
            sign = -sign
        pk = M[k][k]
        for i in range(k + 1, n):
            mik = M[i][k]
            for j in range(k + 1, n):
                v = pk * M[i][j]
                if mik and M[k][j]:
                    v = v - mik * M[k][j]
                M[i][j] = v.exquo(prev) if v else v
            M[i][k] = ring.zero
        prev = pk
    d = M[n - 1][n - 1]
    return d if sign > 0 else -d


def bareiss_adjugate(N: list[list[PolyElement]]) -> tuple[PolyElement, list[list[PolyElement]]]:
    """Fraction-free Gauss-Jordan on ``[N | I]``.

    Returns ``(D, X)`` with ``N X = D I``; ``D`` is the determinant of the row-permuted
    matrix, so ``N^-1 = X / D`` regardless of pivoting.
    """
    n = len(N)
    ring = N[0][0].ring
    M = [row[:] + [ring.one if i == j else ring.zero for j in range(n)] for i, row in enumerate(N)]
    prev = ring.one
    for k in range(n):
        piv = next((r for r in range(k, n) if M[r][k]), None)
        if piv is None:
            raise SingularMatrix("determinant is the zero rational function")
        if piv != k:
            M[k], M[piv] = M[piv], M[k]
        pk = M[k][k]
        rowk = M[k]
        for i in range(n):
            if i == k:
                continue
            row = M[i]
            mik = row[k]
            for j in range(2 * n):
                if j == k:
                    continue
                v = pk * row[j] if row[j] else ring.zero
                if mik and rowk[j]:
                    v = v - mik * rowk[j]
                row[j] = v.exquo(prev) if v else v
            row[k] = ring.zero
        prev = pk
    return prev, [row[n:] for row in M]


# ---------------------------------------------------------------------------
# exact linear solver over QQ


@dataclass
class LinearSolution:
    """Result of :func:`solve_linear`.

    ``kind`` is ``"unique"``, ``"affine"`` or ``"infeasible"``.  For consistent
    systems ``particular`` solves ``A x = rhs`` and ``kernel`` spans the null space.
    """

    kind: str
    particular: list | None
    kernel: list[list[Fraction]] = field(default_factory=list)
    rank: int = 0

    @property
    def consistent(self) -> bool:
        return self.kind != "infeasible"


def rref(A: Sequence[Sequence[ScalarLike]], rhs: Sequence | None = None):
    """Reduced row-echelon form over QQ.

    ``rhs`` entries may be any values supporting ``+``, ``-`` and multiplication by
    :class:`Fraction` (e.g. :class:`MPoly` in parameter variables).
    Returns ``(R, rhs', pivots)``.
    """
    M = [[scalar(x) for x in row] for row in A]
    b = list(rhs) if rhs is not None else None
    rows = len(M)
    cols = len(M[0]) if rows else 0
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        p = next((i for i in range(r, rows) if M[i][c] != 0), None)
        if p is None:
            continue
        M[r], M[p] = M[p], M[r]
        if b is not None:
            b[r], b[p] = b[p], b[r]
        inv = 1 / M[r][c]
        if inv != 1:
            M[r] = [x * inv for x in M[r]]
            if b is not None:
                b[r] = b[r] * inv
        for i in range(rows):
            if i != r and M[i][c] != 0:
                f = M[i][c]
                M[i] = [x - f * y for x, y in zip(M[i], M[r])]
                if b is not None:
                    b[i] = b[i] - b[r] * f
        pivots.append(c)
        r += 1
        if r == rows:
            break
    return M, b, pivots


def _is_zero(x) -> bool:
    if isinstance(x, (MPoly, RatFn)):
        return x.is_zero()
    return x == 0


def solve_linear(A: Sequence[Sequence[ScalarLike]], rhs: Sequence | None = None) -> LinearSolution:
    """Solve ``A x = rhs`` exactly; ``rhs=None`` means the homogeneous system.

    Kernel vectors come one per free column, scaled so the first nonzero entry is 1.
    """
    if not A:
        raise ValueError("empty system")
    cols = len(A[0])
    if rhs is None:
        rhs = [Fraction(0)] * len(A)
    rhs = [x if isinstance(x, (MPoly, RatFn)) else scalar(x) for x in rhs]
    R, b, piv = rref(A, rhs)
    rank = len(piv)
    for i in range(rank, len(R)):
        if not _is_zero(b[i]):
            return LinearSolution("infeasible", None, [], rank)
    zero = Fraction(0)
    sample = next((x for x in b if not _is_zero(x)), None)
    if isinstance(sample, (MPoly, RatFn)):
        zero = type(sample).coerce(0) if isinstance(sample, RatFn) else MPoly.const(0)
    x = [zero] * cols
    for i, c in enumerate(piv):
        x[c] = b[i]
    free = [c for c in range(cols) if c not in set(piv)]
    kernel = []
    for f in free:
        v = [Fraction(0)] * cols
        v[f] = Fraction(1)
        for i, c in enumerate(piv):
            v[c] = -R[i][f]
        lead = next(x for x in v if x != 0)
        kernel.append([x / lead for x in v])
    return LinearSolution("unique" if not free else "affine", x, kernel, rank)


def matrix_rank(A: Sequence[Sequence[ScalarLike]]) -> int:
    if not A:
        return 0
    return len(rref(A)[2])
