"""Levi-Civita connections, curvature and the certificates built on them.

Index conventions: a contravariant metric is ``g^{ij}``; the second-kind
connection is ``Gamma^i_{jk}`` (symmetric in ``j, k``); contravariant
Christoffel symbols are ``Gamma^{ij}_k = g^{is} Gamma^j_{sk}``; the curvature is

    R^l_{ijk} = d_j Gamma^l_{ik} - d_k Gamma^l_{ij}
                + Gamma^l_{js} Gamma^s_{ik} - Gamma^l_{ks} Gamma^s_{ij}

so that a metric of constant curvature K satisfies
``R_{ijkl} = K (g_ik g_jl - g_il g_jk)`` with the first index lowered.

Every check is an identity in the function field of the chart; nothing is
evaluated at points, so coordinate singularities never enter.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import product
from typing import Iterator, Sequence

from frobpen.certificate import Certificate
from frobpen.exactcas import MPoly, RatFn, RMatrix, SingularMatrix, sort_vars

CHARTS = ("diagonal-x", "block-y", "frobenius-u")
VARIANCES = ("contravariant", "covariant")


@dataclass(frozen=True, eq=False)
class MetricRep:
    """A symmetric (pseudo-)metric in a named chart."""

    mat: RMatrix
    vars: tuple[str, ...]
    chart: str = "frobenius-u"
    variance: str = "contravariant"

    def __post_init__(self):
        object.__setattr__(self, "vars", tuple(self.vars))
        if self.chart not in CHARTS:
            raise ValueError(f"unknown chart {self.chart!r}")
        if self.variance not in VARIANCES:
            raise ValueError(f"unknown variance {self.variance!r}")
        if not self.mat.is_square() or self.mat.rows != len(self.vars):
            raise ValueError("metric must be square with one row per coordinate")
        if not self.mat.is_symmetric():
            raise ValueError("metric matrix is not symmetric")

    @property
    def dim(self) -> int:
        return len(self.vars)

    @cached_property
    def contravariant(self) -> RMatrix:
        return self.mat if self.variance == "contravariant" else self.mat.inverse()

    @cached_property
    def covariant(self) -> RMatrix:
        return self.mat if self.variance == "covariant" else self.mat.inverse()

    @cached_property
    def det(self) -> RatFn:
        return self.mat.det()

    def is_degenerate(self) -> bool:
        return self.det.is_zero()

    def raised(self) -> "MetricRep":
        return MetricRep(self.contravariant, self.vars, self.chart, "contravariant")

    def __eq__(self, other):
        if not isinstance(other, MetricRep):
            return NotImplemented
        return self.vars == other.vars and self.contravariant == other.contravariant

    __hash__ = None

    def to_json(self) -> dict:
        return {
            "chart": self.chart,
            "variance": self.variance,
            "vars": list(self.vars),
            "entries": self.mat.to_strings(),
        }


@dataclass
class Connection3:
    """Sparse 3-index connection data; absent keys are zero."""

    n: int
    kind: str  # "second" -> Gamma^i_{jk}, "contravariant" -> Gamma^{ij}_k
    coeffs: dict[tuple[int, int, int], RatFn] = field(default_factory=dict)

    def __getitem__(self, ijk) -> RatFn:
        return self.coeffs.get(ijk, RatFn.zero())

    def nonzero(self):
        return {k: v for k, v in self.coeffs.items() if v}

    def is_zero(self) -> bool:
        return not any(self.coeffs.values())

    def __eq__(self, other):
        if not isinstance(other, Connection3):
            return NotImplemented
        keys = set(self.coeffs) | set(other.coeffs)
        return self.n == other.n and all(self[k] == other[k] for k in keys)

    def combine(self, a, other: "Connection3", b) -> "Connection3":
        """``a*self + b*other`` (coefficients may be rational functions)."""
        out = {}
        for k in set(self.coeffs) | set(other.coeffs):
            v = self[k] * a + other[k] * b
            if v:
                out[k] = v
        return Connection3(self.n, self.kind, out)


@dataclass
class Curvature4:
    n: int
    comps: dict[tuple[int, int, int, int], RatFn]

    def __getitem__(self, lijk) -> RatFn:
        l, i, j, k = lijk
        if j == k:
            return RatFn.zero()
        if j > k:
            return -self.comps.get((l, i, k, j), RatFn.zero())
        return self.comps.get(lijk, RatFn.zero())

    def is_zero(self) -> bool:
        return not any(self.comps.values())


def _as_metric(g) -> MetricRep:
    if isinstance(g, MetricRep):
        return g
    raise TypeError("expected MetricRep")


def levi_civita(g: MetricRep) -> Connection3:
    """Second-kind Christoffel symbols of ``g``."""
    g = _as_metric(g)
    n = g.dim
    try:
        G = g.covariant
        Gi = g.contravariant
    except SingularMatrix as exc:
        raise SingularMatrix(f"singular metric: {exc}") from None
    v = g.vars
    dG = [[[G[a, b].diff(v[c]) if G[a, b] else RatFn.zero() for c in range(n)] for b in range(n)] for a in range(n)]
    first: dict[tuple[int, int, int], RatFn] = {}
    for l in range(n):
        for j in range(n):
            for k in range(j, n):
                s = dG[l][k][j] + dG[l][j][k] - dG[j][k][l]
                if s:
                    first[(l, j, k)] = s * Fraction(1, 2)
    coeffs = {}
    for i in range(n):
        for j in range(n):
            for k in range(j, n):
                acc = RatFn.zero()
                for l in range(n):
                    gil = Gi[i, l]
                    if gil and (l, j, k) in first:
                        acc = acc + gil * first[(l, j, k)]
                if acc:
                    coeffs[(i, j, k)] = acc
                    coeffs[(i, k, j)] = acc
    return Connection3(n, "second", coeffs)


def contravariant_christoffel(g: MetricRep, gamma: Connection3 | None = None) -> Connection3:
    """``Gamma^{ij}_k = g^{is} Gamma^j_{sk}``, index raised by ``g`` itself."""
    g = _as_metric(g)
    gamma = gamma if gamma is not None else levi_civita(g)
    n = g.dim
    Gi = g.contravariant
    out = {}
    for i, j, k in product(range(n), repeat=3):
        acc = RatFn.zero()
        for s in range(n):
            gis = Gi[i, s]
            if gis:
                c = gamma.coeffs.get((j, s, k))
                if c:
                    acc = acc + gis * c
        if acc:
            out[(i, j, k)] = acc
    return Connection3(n, "contravariant", out)


def characteristic_identity(g: MetricRep, gamma: Connection3) -> Certificate:
    """``d_s g^{ab} + g^{aq} Gamma^b_{qs} + Gamma^a_{qs} g^{qb} = 0``."""
    n = g.dim
    Gi = g.contravariant
    for a, b, s in product(range(n), repeat=3):
        acc = Gi[a, b].diff(g.vars[s])
        for q in range(n):
            acc = acc + Gi[a, q] * gamma[(b, q, s)] + gamma[(a, q, s)] * Gi[q, b]
        if acc:
            return Certificate.fail("levi_civita_identity", {"indices": [a, b, s], "entry": acc.canonical()})
    return Certificate.ok("levi_civita_identity")


class _GammaDerivs:
    def __init__(self, gamma: Connection3, vars_: Sequence[str]):
        self.gamma = gamma
        self.vars = vars_
        self.cache: dict[tuple[int, int, int, int], RatFn] = {}

    def __call__(self, l, i, k, j) -> RatFn:
        key = (l, min(i, k), max(i, k), j)
        if key not in self.cache:
            c = self.gamma.coeffs.get((l, i, k))
            self.cache[key] = c.diff(self.vars[j]) if c else RatFn.zero()
        return self.cache[key]


def curvature_components(gamma: Connection3, vars_: Sequence[str]) -> Iterator[tuple[tuple[int, int, int, int], RatFn]]:
    """Yield ``((l, i, j, k), R^l_{ijk})`` for ``j < k``."""
    n = gamma.n
    d = _GammaDerivs(gamma, vars_)
    G = gamma.coeffs
    # nonzero Gamma^l_{js} grouped by (l, j)
    by_lj: dict[tuple[int, int], list[tuple[int, RatFn]]] = {}
    for (l, j, s), c in G.items():
        if c:
            by_lj.setdefault((l, j), []).append((s, c))
    for l in range(n):
        for i in range(n):
            for j in range(n):
                for k in range(j + 1, n):
                    acc = d(l, i, k, j) - d(l, i, j, k)
                    for s, c in by_lj.get((l, j), ()):
                        o = G.get((s, i, k))
                        if o:
                            acc = acc + c * o
                    for s, c in by_lj.get((l, k), ()):
                        o = G.get((s, i, j))
                        if o:
                            acc = acc - c * o
                    yield (l, i, j, k), acc


def curvature(g: MetricRep, gamma: Connection3 | None = None) -> Curvature4:
    g = _as_metric(g)
    gamma = gamma if gamma is not None else levi_civita(g)
    comps = {idx: v for idx, v in curvature_components(gamma, g.vars) if v}
    return Curvature4(g.dim, comps)


def is_flat(g: MetricRep, gamma: Connection3 | None = None) -> Certificate:
    """Flat iff every curvature component is the zero rational function."""
    g = _as_metric(g)
    gamma = gamma if gamma is not None else levi_civita(g)
    for idx, v in curvature_components(gamma, g.vars):
        if v:
            return Certificate.fail("flat", {"indices": list(idx), "entry": v.canonical()})
    return Certificate.ok("flat")


@dataclass
class ConstantCurvature:
    K: Fraction | None
    certificate: Certificate

    @property
    def is_constant(self) -> bool:
        return self.K is not None


def constant_curvature(g: MetricRep, gamma: Connection3 | None = None) -> ConstantCurvature:
    """Return K if ``R^m_{jkl} = K (delta^m_k g_jl - delta^m_l g_jk)`` identically."""
    g = _as_metric(g)
    n = g.dim
    if n < 2:
        raise ValueError("constant curvature needs dim >= 2")
    gamma = gamma if gamma is not None else levi_civita(g)
    R = curvature(g, gamma)
    G = g.covariant

    def model(m, j, k, l):
        acc = RatFn.zero()
        if m == k and G[j, l]:
            acc = acc + G[j, l]
        if m == l and G[j, k]:
            acc = acc - G[j, k]
        return acc

    K = None
    for m, j, k, l in product(range(n), repeat=4):
        if k >= l:
            continue
        mod = model(m, j, k, l)
        if mod:
            ratio = R[(m, j, k, l)] / mod
            if not ratio.is_constant():
                return ConstantCurvature(None, Certificate.fail(
                    "constant_curvature", {"indices": [m, j, k, l], "ratio": ratio.canonical()}))
            K = ratio.constant_value()
            break
    if K is None:  # pragma: no cover - dim >= 2 always has a nonzero model entry
        K = Fraction(0)
    for m, j, k, l in product(range(n), repeat=4):
        if k >= l:
            continue
        diff = R[(m, j, k, l)] - model(m, j, k, l) * K
        if diff:
            return ConstantCurvature(None, Certificate.fail(
                "constant_curvature", {"indices": [m, j, k, l], "entry": diff.canonical()}))
    return ConstantCurvature(K, Certificate.ok("constant_curvature", K=str(K)))


def bianchi_first(R: Curvature4) -> Certificate:
    n = R.n
    for i, j, k, l in product(range(n), repeat=4):
        s = R[(i, j, k, l)] + R[(i, k, l, j)] + R[(i, l, j, k)]
        if s:
            return Certificate.fail("bianchi", {"indices": [i, j, k, l], "entry": s.canonical()})
    return Certificate.ok("bianchi")


@dataclass
class Torsion:
    n: int
    comps: dict[tuple[int, int, int], RatFn]
    certificate: Certificate


def nijenhuis_torsion(L: RMatrix, vars_: Sequence[str]) -> Torsion:
    """Nijenhuis torsion of the (1,1)-tensor ``L^i_j = L[i, j]``."""
    n = L.rows
    if not L.is_square() or n != len(vars_):
        raise ValueError("L must be square with one row per coordinate")
    dL = [L.diff(v) for v in vars_]
    comps = {}
    witness = None
    for i in range(n):
        for j in range(n):
            for k in range(j + 1, n):
                acc = RatFn.zero()
                for s in range(n):
                    if L[s, j]:
                        acc = acc + L[s, j] * dL[s][i, k]
                    if L[s, k]:
                        acc = acc - L[s, k] * dL[s][i, j]
                    if L[i, s]:
                        acc = acc - L[i, s] * (dL[j][s, k] - dL[k][s, j])
                if acc:
                    comps[(i, j, k)] = acc
                    comps[(i, k, j)] = -acc
                    if witness is None:
                        witness = {"indices": [i, j, k], "entry": acc.canonical()}
    cert = Certificate.ok("nijenhuis") if witness is None else Certificate.fail("nijenhuis", witness)
    return Torsion(n, comps, cert)


def _fresh_param(taken: Sequence[str], base: str = "t") -> str:
    name = base
    while name in taken:
        name += "_"
    return name


def poisson_compatible(g: MetricRep, gbar: MetricRep, *, check_flat: bool = True) -> Certificate:
    """Certify that ``t*g + gbar`` is flat and has Christoffels ``t*Gamma + Gamma-bar``.

    Both conditions are checked as identities in a formal parameter ``t``.  The
    determinant of ``g_t`` is reported in ``info`` so callers can inspect which
    members of the pencil degenerate.
    """
    if g.vars != gbar.vars:
        raise ValueError("metrics live in different charts")
    taken = set(g.vars) | set(g.mat.variables()) | set(gbar.mat.variables())
    t = _fresh_param(sorted(taken))
    T = RatFn.var(t)
    gt = MetricRep(g.contravariant.scale(T) + gbar.contravariant, g.vars, g.chart)
    det_t = gt.det
    info = {"param": t, "det_g_t": det_t.canonical()}
    if det_t.is_zero():
        return Certificate.fail("poisson_compatible", {"reason": "g_t degenerate identically in t"}, **info)
    gam_t = levi_civita(gt)
    ct = contravariant_christoffel(gt, gam_t)
    c1 = contravariant_christoffel(g)
    c2 = contravariant_christoffel(gbar)
    for idx in sorted(set(ct.coeffs) | set(c1.coeffs) | set(c2.coeffs)):
        diff = ct[idx] - (c1[idx] * T + c2[idx])
        if diff:
            return Certificate.fail("poisson_compatible", {"reason": "christoffel", "indices": list(idx),
                                                           "entry": diff.canonical()}, **info)
    if check_flat:
        flat = is_flat(gt, gam_t)
        if not flat:
            return Certificate.fail("poisson_compatible", {"reason": "curvature", **flat.witness}, **info)
    return Certificate.ok("poisson_compatible", **info)


def metric_pairing(g: MetricRep, f1: RatFn, f2: RatFn | None = None) -> RatFn:
    """``g(df1, df2) = g^{ij} d_i f1 d_j f2`` for a contravariant metric."""
    f2 = f1 if f2 is None else f2
    G = g.contravariant
    d1 = [RatFn.coerce(f1).diff(v) for v in g.vars]
    d2 = [RatFn.coerce(f2).diff(v) for v in g.vars]
    acc = RatFn.zero()
    for i in range(g.dim):
        for j in range(g.dim):
            if G[i, j] and d1[i] and d2[j]:
                acc = acc + G[i, j] * d1[i] * d2[j]
    return acc
