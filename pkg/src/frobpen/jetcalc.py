"""Differential polynomials on the jet space: total derivative D and variational derivative.

A jet variable u^i_{x^j} is the named variable ``jet_name("u1", j)``:
``u1`` for j = 0, ``u1_x`` ... ``u1_xxxxxxxxx`` for j <= 9 and ``u1_x{12}`` beyond.
Coefficients are polynomials in the base variables (and in any extra
parameters, which D treats as constants).
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Sequence

from frobpen.exactcas import Expr, MPoly, RatFn

_JET_RE = re.compile(r"^(?P<base>.+?)(?:_(?P<xs>x{1,9}|x\{(?P<k>\d+)\}))?$")


def jet_name(base: str, order: int) -> str:
    if order < 0:
        raise ValueError("jet order must be >= 0")
    if order == 0:
        return base
    if order <= 9:
        return f"{base}_{'x' * order}"
    return f"{base}_x{{{order}}}"


def parse_jet(name: str, components: Sequence[str]) -> tuple[str, int] | None:
    """``(base, order)`` if ``name`` is a jet variable over ``components``."""
    m = _JET_RE.match(name)
    if m is None:
        return None
    base = m.group("base")
    if m.group("xs") is None:
        return (name, 0) if name in components else None
    if base not in components:
        return None
    order = int(m.group("k")) if m.group("k") else len(m.group("xs"))
    if m.group("k") and order <= 9:
        return None  # non-canonical spelling such as u1_x{3}
    return base, order


@dataclass(frozen=True)
class DiffPoly:
    """Polynomial in jet variables of ``components``; other names are constants."""

    poly: MPoly
    components: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))
        object.__setattr__(self, "poly", MPoly.coerce(self.poly))

    @classmethod
    def jet(cls, components: Sequence[str], base: str, order: int = 0) -> "DiffPoly":
        if base not in components:
            raise ValueError(f"{base!r} is not a component")
        return cls(MPoly.var(jet_name(base, order)), tuple(components))

    @classmethod
    def const(cls, components: Sequence[str], c) -> "DiffPoly":
        return cls(MPoly.const(c), tuple(components))

    def _wrap(self, p: MPoly) -> "DiffPoly":
        return DiffPoly(p, self.components)

    def _other(self, other) -> MPoly:
        if isinstance(other, DiffPoly):
            if other.components != self.components:
                raise ValueError("differential polynomials over different jet spaces")
            return other.poly
        return MPoly.coerce(other)

    def __add__(self, other):
        return self._wrap(self.poly + self._other(other))

    __radd__ = __add__

    def __sub__(self, other):
        return self._wrap(self.poly - self._other(other))

    def __rsub__(self, other):
        return self._wrap(self._other(other) - self.poly)

    def __mul__(self, other):
        return self._wrap(self.poly * self._other(other))

    __rmul__ = __mul__

    def __neg__(self):
        return self._wrap(-self.poly)

    def __pow__(self, k: int):
        return self._wrap(self.poly ** k)

    def __eq__(self, other):
        if isinstance(other, DiffPoly):
            return self.components == other.components and self.poly == other.poly
        try:
            return self.poly == MPoly.coerce(other)
        except TypeError:
            return NotImplemented

    def __hash__(self):
        return hash((self.components, self.poly))

    def __bool__(self):
        return not self.poly.is_zero()

    def is_zero(self) -> bool:
        return self.poly.is_zero()

    def jet_vars(self) -> list[tuple[str, int]]:
        out = []
        for v in self.poly.variables:
            j = parse_jet(v, self.components)
            if j is not None:
                out.append(j)
        return out

    def max_order(self) -> int:
        return max((j for _, j in self.jet_vars()), default=-1)

    def partial(self, base: str, order: int) -> "DiffPoly":
        return self._wrap(self.poly.diff(jet_name(base, order)))

    def diff_degree(self) -> int:
        return diff_degree(self)

    def canonical(self) -> str:
        return self.poly.canonical()

    __str__ = canonical

    def __repr__(self):
        return f"DiffPoly({self.canonical()!r})"


def diff_degree(H: DiffPoly) -> int:
    """Max over jet monomials of sum(order * exponent); -1 for the zero element.

    Terms are grouped by their jet part first, so a monomial's u-dependent
    coefficient does not count towards the degree.
    """
    if H.is_zero():
        return -1
    best = 0
    for mono, _ in H.poly.terms():
        deg = 0
        for v, e in mono.items():
            j = parse_jet(v, H.components)
            if j is not None:
                deg += j[1] * e
        best = max(best, deg)
    return best


def _jet_vars_of(names: Iterable[str], components: Sequence[str]):
    for v in names:
        j = parse_jet(v, components)
        if j is not None:
            yield v, j


def total_derivative_expr(f: Expr, components: Sequence[str]) -> Expr:
    """D applied to a polynomial or rational function of jet variables."""
    acc = None
    for v, (base, order) in _jet_vars_of(f.variables, components):
        term = f.diff(v) * MPoly.var(jet_name(base, order + 1))
        acc = term if acc is None else acc + term
    if acc is None:
        return MPoly.const(0) if isinstance(f, MPoly) else RatFn.zero()
    return acc


def total_derivative(H: DiffPoly) -> DiffPoly:
    """``D H = sum_{i,j} dH/du^i_{x^j} * u^i_{x^{j+1}}``."""
    return DiffPoly(total_derivative_expr(H.poly, H.components), H.components)


def total_derivative_n(H: DiffPoly, k: int) -> DiffPoly:
    for _ in range(k):
        H = total_derivative(H)
    return H


def variational_derivative(H: DiffPoly, i: str | int) -> DiffPoly:
    """Euler-Lagrange: ``sum_k (-1)^k D^k (dH/du^i_{x^k})``."""
    base = H.components[i] if isinstance(i, int) else i
    if base not in H.components:
        raise ValueError(f"{base!r} is not a component")
    top = max((j for b, j in H.jet_vars() if b == base), default=-1)
    acc = DiffPoly.const(H.components, 0)
    for k in range(top + 1):
        term = total_derivative_n(H.partial(base, k), k)
        acc = acc + term if k % 2 == 0 else acc - term
    return acc


def variational_gradient(H: DiffPoly) -> list[DiffPoly]:
    return [variational_derivative(H, c) for c in H.components]


def jet_symbols(components: Sequence[str], order: int) -> list[list[DiffPoly]]:
    """``out[i][j]`` is the jet variable of component i and order j."""
    return [[DiffPoly.jet(components, c, j) for j in range(order + 1)] for c in components]


def from_string(text: str, components: Sequence[str]) -> DiffPoly:
    """Parse a canonical-string differential polynomial (``u1_xx`` style names)."""
    from frobpen.exactcas import parse_expr

    e = parse_expr(text)
    if isinstance(e, RatFn):
        if not e.is_polynomial():
            raise ValueError("differential polynomials have no denominators")
        e = e.as_poly()
    return DiffPoly(e, tuple(components))
