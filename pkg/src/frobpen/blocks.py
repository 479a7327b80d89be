"""Single AFF block: companion operator, the metric g0, and the pencil P(L) g0.

Chart ``y`` uses the characteristic-polynomial coefficients as coordinates,

    chi_L(t) = det(t Id - L) = t^n - y1 t^(n-1) - ... - yn,

in which L is the companion matrix and g0 is the anti-triangular pattern with
``1`` on the anti-diagonal and ``-y_k`` below it.  Chart ``x`` uses the
eigenvalues, where ``L = diag(x)`` and g0 becomes the diagonal Levi-Civita
metric ``g_LC^{ii} = 1 / prod_{s != i} (x_i - x_s)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from math import prod
from typing import Sequence

from frobpen.exactcas import MPoly, RatFn, RMatrix, scalar
from frobpen.riemann import MetricRep

CHART_ALIASES = {"x": "diagonal-x", "y": "block-y", "diagonal-x": "diagonal-x", "block-y": "block-y"}


def chart_name(chart: str) -> str:
    try:
        return CHART_ALIASES[chart]
    except KeyError:
        raise ValueError(f"unsupported chart {chart!r} (use 'x' or 'y')") from None


def companion(yvars: Sequence[str]) -> RMatrix:
    n = len(yvars)
    rows = []
    for i in range(n):
        row = [0] * n
        row[0] = MPoly.var(yvars[i])
        if i + 1 < n:
            row[i + 1] = 1
        rows.append(row)
    return RMatrix(rows)


def g0_pattern(yvars: Sequence[str], one=1) -> RMatrix:
    """Anti-triangular g0; ``one`` replaces the constant 1 (used for the h-partners)."""
    n = len(yvars)
    rows = []
    for i in range(n):
        row = []
        for j in range(n):
            k = i + j - (n - 1)
            if k == 0:
                row.append(one)
            elif k > 0:
                row.append(-MPoly.var(yvars[k - 1]) if isinstance(yvars[k - 1], str) else -yvars[k - 1])
            else:
                row.append(0)
        rows.append(row)
    return RMatrix(rows)


def lc_metric(xvars: Sequence[str]) -> RMatrix:
    xs = [MPoly.var(v) for v in xvars]
    n = len(xs)
    diag = [RatFn.coerce(1) / prod((xs[i] - xs[s] for s in range(n) if s != i), start=MPoly.const(1)) for i in range(n)]
    return RMatrix.diag(diag)


@dataclass(frozen=True)
class AFFBlock:
    n: int
    yvars: tuple[str, ...]
    xvars: tuple[str, ...]
    L_y: RMatrix
    g0_y: RMatrix
    L_x: RMatrix
    g_lc_x: RMatrix

    def L(self, chart: str) -> RMatrix:
        return self.L_y if chart_name(chart) == "block-y" else self.L_x

    def g0(self, chart: str) -> RMatrix:
        return self.g0_y if chart_name(chart) == "block-y" else self.g_lc_x

    def vars(self, chart: str) -> tuple[str, ...]:
        return self.yvars if chart_name(chart) == "block-y" else self.xvars

    def char_poly_at(self, lam, chart: str = "y") -> RatFn:
        """``chi_L(lam) = det(lam Id - L)`` from the explicit coefficients."""
        lam = lam if isinstance(lam, (MPoly, RatFn)) else scalar(lam)
        if chart_name(chart) == "block-y":
            acc = RatFn.coerce(lam) ** self.n
            for k, v in enumerate(self.yvars, start=1):
                acc = acc - RatFn.var(v) * (RatFn.coerce(lam) ** (self.n - k))
            return acc
        return prod((RatFn.coerce(lam) - RatFn.var(v) for v in self.xvars), start=RatFn.one())


def make_block(n: int, yvars: Sequence[str] | None = None, xvars: Sequence[str] | None = None) -> AFFBlock:
    if n < 1:
        raise ValueError("block dimension must be >= 1")
    yvars = tuple(yvars) if yvars is not None else tuple(f"y{k}" for k in range(1, n + 1))
    xvars = tuple(xvars) if xvars is not None else tuple(f"x{k}" for k in range(1, n + 1))
    if len(yvars) != n or len(xvars) != n:
        raise ValueError("variable lists must have length n")
    return AFFBlock(n, yvars, xvars, companion(yvars), g0_pattern(yvars),
                    RMatrix.diag([MPoly.var(v) for v in xvars]), lc_metric(xvars))


def poly_of_matrix(coeffs: Sequence, M: RMatrix) -> RMatrix:
    """Horner evaluation of ``sum_k coeffs[k] M^k``."""
    n = M.rows
    acc = RMatrix.zeros(n)
    for c in reversed(list(coeffs)):
        acc = acc @ M
        if not _is_zero_coeff(c):
            acc = acc + RMatrix.identity(n).scale(_coeff(c))
    return acc


def _coeff(c):
    return c if isinstance(c, (MPoly, RatFn)) else scalar(c)


def _is_zero_coeff(c) -> bool:
    return c.is_zero() if isinstance(c, (MPoly, RatFn)) else scalar(c) == 0


def eval_poly(coeffs: Sequence, t) -> RatFn:
    acc = RatFn.zero()
    for c in reversed(list(coeffs)):
        acc = acc * t + RatFn.coerce(_coeff(c))
    return acc


def pencil_matrix(blk: AFFBlock, coeffs: Sequence, chart: str = "y") -> RMatrix:
    chart = chart_name(chart)
    coeffs = list(coeffs)
    if len(coeffs) > blk.n + 2 and any(not _is_zero_coeff(c) for c in coeffs[blk.n + 2:]):
        raise ValueError(f"deg P must be <= n+1 = {blk.n + 1}")
    if chart == "block-y":
        return poly_of_matrix(coeffs, blk.L_y) @ blk.g0_y
    xs = [RatFn.var(v) for v in blk.xvars]
    return RMatrix.diag([eval_poly(coeffs, xs[i]) * blk.g_lc_x[i, i] for i in range(blk.n)])


def pencil_metric(blk: AFFBlock, coeffs: Sequence, chart: str = "y") -> MetricRep:
    """``P(L) g0`` in chart y or ``P(L) g_LC`` in chart x (contravariant)."""
    if all(_is_zero_coeff(c) for c in coeffs):
        raise ValueError("zero polynomial gives a degenerate metric")
    chart = chart_name(chart)
    return MetricRep(pencil_matrix(blk, coeffs, chart), blk.vars(chart), chart)


def elementary_symmetric(xs: Sequence[MPoly], k: int) -> MPoly:
    return sum((prod(c, start=MPoly.const(1)) for c in combinations(xs, k)), start=MPoly.const(0))


def char_poly_coords(blk: AFFBlock, chart: str = "x") -> list[MPoly]:
    """sigma_1..sigma_n with ``chi_L(t) = t^n - sigma_1 t^(n-1) - ... - sigma_n``."""
    if chart_name(chart) == "block-y":
        return [MPoly.var(v) for v in blk.yvars]
    xs = [MPoly.var(v) for v in blk.xvars]
    return [elementary_symmetric(xs, k) * (1 if k % 2 else -1) for k in range(1, blk.n + 1)]


def h_partner_pattern(blk: AFFBlock, coeffs: Sequence, m0, m: Sequence) -> RMatrix:
    """``m0 P(L(m/m0)) g0(m/m0)`` written without dividing by ``m0``.

    Each entry of ``P(L) g0`` is affine in y, so homogenising constants by ``m0``
    and replacing ``y_k`` by ``m_k`` is the same linear map.
    """
    G = pencil_matrix(blk, coeffs, "y")
    m0 = scalar(m0)
    vals = [scalar(x) for x in m]

    def homog(e: RatFn):
        p = e.as_poly()
        acc = Fraction(0)
        for mono, c in p.terms():
            deg = sum(mono.values())
            if deg > 1:
                raise ValueError("entry not affine in y")
            if deg == 0:
                acc += c * m0
            else:
                (v, _), = mono.items()
                acc += c * vals[blk.yvars.index(v)]
        return acc

    return RMatrix([[homog(G[i, j]) for j in range(blk.n)] for i in range(blk.n)])
