"""Frobenius coordinates of an assembled metric and the affine-decomposition oracle.

For block ``alpha`` the candidate coordinates are

    u_alpha^k = prod_{s precedes alpha} chi_{L_s}(lambda_{s alpha}) * sigma_alpha^k,

polynomial in the block-y chart (where sigma_alpha^k = y_alpha^k).  The metric is
pushed forward as ``J g J^T`` and each entry is matched against
``c_0 + sum_s c_s u^s(y)`` over the y-monomial basis.  Success on every entry
yields the constant form ``b`` and structure constants ``a_s``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Sequence

from frobpen.assemble import AssembledMetric
from frobpen.blocks import char_poly_coords
from frobpen.certificate import Certificate
from frobpen.exactcas import MPoly, RatFn, RMatrix, SingularMatrix, matrix_rank, rref, scalar, scalar_str
from frobpen.riemann import MetricRep

Coeff = Fraction | MPoly


def u_names(n: int) -> tuple[str, ...]:
    return tuple(f"u{i}" for i in range(1, n + 1))


@dataclass(frozen=True, eq=False)
class CoordMap:
    """``target[i] = components[i](source)``; ``inverse`` (if known) goes back."""

    source: tuple[str, ...]
    target: tuple[str, ...]
    components: tuple[RatFn, ...]
    source_chart: str = "block-y"
    inverse: tuple[RatFn, ...] | None = None

    def __post_init__(self):
        if len(self.components) != len(self.target) or len(self.source) != len(self.target):
            raise ValueError("coordinate map must be square")

    @property
    def n(self) -> int:
        return len(self.target)

    def jacobian(self) -> RMatrix:
        return RMatrix([[c.diff(v) for v in self.source] for c in self.components])

    def jacobian_det(self) -> RatFn:
        return self.jacobian().det()

    def is_polynomial(self) -> bool:
        return all(c.is_polynomial() for c in self.components)

    def to_target(self, e) -> RatFn:
        """Rewrite a function of the source coordinates in the target ones."""
        if self.inverse is None:
            raise ValueError("inverse map not available")
        return RatFn.coerce(e).substitute(dict(zip(self.source, self.inverse)))

    def to_source(self, e) -> RatFn:
        return RatFn.coerce(e).substitute(dict(zip(self.target, self.components)))

    def strings(self) -> dict[str, str]:
        return {t: c.canonical() for t, c in zip(self.target, self.components)}


def frobenius_map(am: AssembledMetric, target: Sequence[str] | None = None) -> CoordMap:
    """Candidate Frobenius coordinates of an assembled metric.

    Works in either chart; in chart y the components are polynomial and an
    explicit inverse (rational in u) is attached.
    """
    f = am.spec.forest
    target = tuple(target) if target is not None else u_names(f.n)
    comps: list[RatFn] = []
    inv: list[RatFn] = []
    y_of_u: dict[str, RatFn] = {}
    for alpha in range(1, f.B + 1):
        blk = am.blocks[alpha - 1]
        weight = RatFn.one()
        weight_u = RatFn.one()
        for s in range(1, alpha):
            if am.order.c(s, alpha):
                chi = am.blocks[s - 1].char_poly_at(am.order.lam(s, alpha), am.chart)
                weight = weight * chi
                if am.chart == "block-y":
                    weight_u = weight_u * chi.substitute(y_of_u)
        sig = char_poly_coords(blk, am.chart)
        base = f.offset(alpha)
        for k, s_k in enumerate(sig):
            comps.append(weight * s_k)
            if am.chart == "block-y":
                yk = RatFn.var(target[base + k]) / weight_u
                y_of_u[blk.yvars[k]] = yk
                inv.append(yk)
    return CoordMap(am.vars, target, tuple(comps), am.chart, tuple(inv) if inv else None)


def pushforward_source(g: MetricRep | RMatrix, m: CoordMap) -> RMatrix:
    """``J g J^T`` with entries still written in the source coordinates."""
    G = g.contravariant if isinstance(g, MetricRep) else g
    if isinstance(g, MetricRep) and tuple(g.vars) != tuple(m.source):
        raise ValueError("metric and map use different source coordinates")
    J = m.jacobian()
    if J.det().is_zero():
        raise SingularMatrix("Jacobian of the coordinate map is singular")
    return J @ G @ J.T


def pushforward(g: MetricRep, m: CoordMap) -> MetricRep:
    """The metric in the target chart (needs the inverse map)."""
    P = pushforward_source(g, m)
    return MetricRep(P.map(m.to_target), m.target, "frobenius-u")


def transform_operator(L: RMatrix, m: CoordMap) -> RMatrix:
    """A (1,1)-tensor ``L^i_j`` in the target chart: ``J L J^{-1}`` rewritten in u."""
    J = m.jacobian()
    return (J @ L @ J.inverse()).map(m.to_target)


# ---------------------------------------------------------------------------
# affine decomposition


@dataclass
class FrobeniusData:
    """``g^{ab}(u) = b^{ab} + a_s^{ab} u^s``; entries exact scalars or parameter polynomials."""

    b: list[list[Coeff]]
    a: list[list[list[Coeff]]]  # a[s][i][j]

    @property
    def n(self) -> int:
        return len(self.b)

    def reconstruct(self, names: Sequence[str] | None = None) -> RMatrix:
        names = tuple(names) if names is not None else u_names(self.n)
        us = [MPoly.var(v) for v in names]
        n = self.n
        rows = []
        for i in range(n):
            row = []
            for j in range(n):
                e = MPoly.coerce(self.b[i][j])
                for s in range(n):
                    if not _zero(self.a[s][i][j]):
                        e = e + us[s] * self.a[s][i][j]
                row.append(e)
            rows.append(row)
        return RMatrix(rows)

    def metric(self, names: Sequence[str] | None = None) -> MetricRep:
        names = tuple(names) if names is not None else u_names(self.n)
        return MetricRep(self.reconstruct(names), names, "frobenius-u")

    def structure_constant(self, i: int, j: int, s: int) -> Coeff:
        return self.a[s][i][j]

    def substitute(self, values) -> "FrobeniusData":
        """Specialise parameters (``{"a1": 2, ...}``)."""
        def sub(c):
            if isinstance(c, MPoly):
                r = c.evaluate(values)
                return r.constant_value() if r.is_constant() else r
            return c
        return FrobeniusData([[sub(c) for c in r] for r in self.b],
                             [[[sub(c) for c in r] for r in M] for M in self.a])

    def scaled(self, lam) -> "FrobeniusData":
        lam = scalar(lam)
        return FrobeniusData([[c * lam for c in r] for r in self.b],
                             [[[c * lam for c in r] for r in M] for M in self.a])

    def __add__(self, other: "FrobeniusData") -> "FrobeniusData":
        return FrobeniusData([[x + y for x, y in zip(r1, r2)] for r1, r2 in zip(self.b, other.b)],
                             [[[x + y for x, y in zip(r1, r2)] for r1, r2 in zip(M1, M2)]
                              for M1, M2 in zip(self.a, other.a)])

    def __eq__(self, other):
        if not isinstance(other, FrobeniusData):
            return NotImplemented
        return self.reconstruct() == other.reconstruct()

    def to_json(self) -> dict:
        return {"b": [[_cstr(c) for c in r] for r in self.b],
                "a": [[[_cstr(c) for c in r] for r in M] for M in self.a]}

    @classmethod
    def from_json(cls, d: dict) -> "FrobeniusData":
        from frobpen.forest import _coeff

        return cls([[_coeff(c) for c in r] for r in d["b"]],
                   [[[_coeff(c) for c in r] for r in M] for M in d["a"]])

    @classmethod
    def from_metric(cls, g: RMatrix, names: Sequence[str]) -> "FrobeniusData":
        """Read (b, a) off a matrix already written in u (entries of degree <= 1)."""
        n = len(names)
        b = [[Fraction(0)] * n for _ in range(n)]
        a = [[[Fraction(0)] * n for _ in range(n)] for _ in range(n)]
        for i in range(n):
            for j in range(n):
                e = g[i, j]
                if not e.is_polynomial():
                    raise ValueError(f"entry ({i},{j}) is not polynomial")
                for exps, c in e.as_poly().coeffs_wrt(names).items():
                    d = sum(exps)
                    if d > 1:
                        raise ValueError(f"entry ({i},{j}) is not affine")
                    val = c.constant_value() if c.is_constant() else c
                    if d == 0:
                        b[i][j] = val
                    else:
                        a[exps.index(1)][i][j] = val
        return cls(b, a)


def _zero(c) -> bool:
    return c.is_zero() if isinstance(c, (MPoly, RatFn)) else c == 0


def _cstr(c) -> str:
    return c.canonical() if isinstance(c, (MPoly, RatFn)) else scalar_str(scalar(c))


@dataclass
class AffineResult:
    data: FrobeniusData | None
    certificate: Certificate
    rank: int = 0
    pushed: RMatrix | None = field(default=None, repr=False)

    @property
    def ok(self) -> bool:
        return self.certificate.passed


class _Matcher:
    """Monomial matching of polynomials in ``vars_`` against span{1, u^1(y), ...}."""

    def __init__(self, comps: Sequence[RatFn], vars_: Sequence[str]):
        self.vars = tuple(vars_)
        basis = [MPoly.const(1)] + [c.as_poly() for c in comps]
        self.cols = [b.coeffs_wrt(self.vars) for b in basis]
        monos = sorted({m for col in self.cols for m in col})
        self.monos = monos
        A = [[_frac(col.get(m)) for col in self.cols] for m in monos]
        self.rank = matrix_rank(A)
        self.width = len(basis)

    def match(self, e: MPoly):
        terms = e.coeffs_wrt(self.vars)
        extra = [m for m in terms if m not in set(self.monos)]
        monos = self.monos + sorted(extra)
        A = [[_frac(col.get(m)) for col in self.cols] for m in monos]
        rhs = [terms.get(m, MPoly.const(0)) for m in monos]
        R, b, piv = rref(A, rhs)
        consistent = all(_zero(b[i]) for i in range(len(piv), len(b)))
        coeffs: list[Any] = [MPoly.const(0)] * self.width
        for i, c in enumerate(piv):
            coeffs[c] = b[i]
        return consistent, [_simplify(c) for c in coeffs]


def _frac(c) -> Fraction:
    if c is None:
        return Fraction(0)
    if not c.is_constant():
        raise ValueError("coordinate map coefficients must be numbers")
    return c.constant_value()


def _simplify(c):
    if isinstance(c, MPoly):
        return c.constant_value() if c.is_constant() else c
    return c


def affine_decompose(G: RMatrix | MetricRep, m: CoordMap) -> AffineResult:
    """Split the pushed metric into ``b + a_s u^s`` or return a non-affine witness.

    ``G`` may be written over the source chart (as from :func:`pushforward_source`)
    or over the target names, in which case it is first pulled back to the source.
    """
    M = G.contravariant if isinstance(G, MetricRep) else G
    if set(M.variables()) & set(m.target):
        M = M.map(m.to_source)
    if not m.is_polynomial():
        raise ValueError("affine matching needs a polynomial coordinate map")
    matcher = _Matcher(m.components, m.source)
    n = m.n
    if matcher.rank != n + 1:
        cert = Certificate.fail("affine", {"reason": "coordinates plus 1 are linearly dependent",
                                           "rank": matcher.rank})
        return AffineResult(None, cert, matcher.rank, M)
    b = [[Fraction(0)] * n for _ in range(n)]
    a = [[[Fraction(0)] * n for _ in range(n)] for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            e = M[i, j]
            if not e.is_polynomial():
                cert = Certificate.fail("affine", {"indices": [i, j], "reason": "denominator survives",
                                                   "entry": e.canonical()})
                return AffineResult(None, cert, matcher.rank, M)
            ok, coeffs = matcher.match(e.as_poly())
            if not ok:
                fit = MPoly.coerce(coeffs[0])
                for s in range(n):
                    fit = fit + m.components[s].as_poly() * coeffs[s + 1]
                cert = Certificate.fail("affine", {"indices": [i, j], "reason": "not affine in u",
                                                   "entry": e.canonical(),
                                                   "residual": (e - fit).canonical()})
                return AffineResult(None, cert, matcher.rank, M)
            b[i][j] = b[j][i] = coeffs[0]
            for s in range(n):
                a[s][i][j] = a[s][j][i] = coeffs[s + 1]
    return AffineResult(FrobeniusData(b, a), Certificate.ok("affine", rank=matcher.rank), matcher.rank, M)


def decompose_assembled(am: AssembledMetric) -> AffineResult:
    """The whole pipeline: map, ``J g J^T`` over y, affine matching."""
    m = frobenius_map(am)
    return affine_decompose(pushforward_source(am.g, m), m)


# ---------------------------------------------------------------------------
# affine changes of the target chart


def affine_change(m: CoordMap, A: Sequence[Sequence], c: Sequence | None = None) -> CoordMap:
    """``u' = A u + c`` composed after ``m`` (A invertible, rational)."""
    n = m.n
    A = [[scalar(x) for x in row] for row in A]
    c = [scalar(x) for x in c] if c is not None else [Fraction(0)] * n
    if matrix_rank(A) != n:
        raise SingularMatrix("affine change must be invertible")
    comps = []
    for i in range(n):
        e = RatFn.coerce(c[i])
        for j in range(n):
            if A[i][j] != 0:
                e = e + m.components[j] * A[i][j]
        comps.append(e)
    inv = None
    if m.inverse is not None:
        Ainv = RMatrix(A).inverse()
        # old u = A^{-1} (u' - c), substituted into the old inverse
        old_u = {}
        for j in range(n):
            e = RatFn.zero()
            for k in range(n):
                w = Ainv[j, k]
                if w:
                    e = e + w * (RatFn.var(m.target[k]) - c[k])
            old_u[m.target[j]] = e
        inv = tuple(y.substitute(old_u) for y in m.inverse)
    return CoordMap(m.source, m.target, tuple(comps), m.source_chart, inv)


def transform_frobenius_data(d: FrobeniusData, A: Sequence[Sequence], c: Sequence | None = None) -> FrobeniusData:
    """Data of ``A g A^T`` in the chart ``u' = A u + c``.

    With ``u = A^{-1}(u' - c)``: ``a'_t = A (sum_s a_s Ainv[s][t]) A^T`` and
    ``b' = A (b - sum_s a_s (Ainv c)_s) A^T``.
    """
    n = d.n
    A = [[scalar(x) for x in row] for row in A]
    c = [scalar(x) for x in c] if c is not None else [Fraction(0)] * n
    Ai = RMatrix(A).inverse()
    Ainv = [[Ai[i, j].constant_value() for j in range(n)] for i in range(n)]
    shift = [sum((Ainv[s][k] * c[k] for k in range(n)), Fraction(0)) for s in range(n)]

    def conj(M):
        return [[sum((A[i][p] * M[p][q] * A[j][q] for p in range(n) for q in range(n)
                      if A[i][p] != 0 and A[j][q] != 0), Fraction(0)) for j in range(n)] for i in range(n)]

    def comb(weights):
        return [[sum((d.a[s][i][j] * weights[s] for s in range(n) if weights[s] != 0), Fraction(0))
                 for j in range(n)] for i in range(n)]

    b_new = conj([[d.b[i][j] - comb(shift)[i][j] for j in range(n)] for i in range(n)])
    a_new = [conj(comb([Ainv[s][t] for s in range(n)])) for t in range(n)]
    return FrobeniusData([[_simplify(x) for x in r] for r in b_new],
                         [[[_simplify(x) for x in r] for r in M] for M in a_new])
