"""Coefficient data of first-order (A_g) and Darboux third-order (B_h) Poisson operators.

An operator is stored as bands ``{k: C_k}`` so that it acts on a covector
``xi_beta`` by ``(P xi)^alpha = sum_k C_k^{alpha beta} D^k xi_beta``.  Entries are
rational functions of the chart coordinates and their jets (``u1_x``, ``u1_xx``...).
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from math import comb
from typing import Mapping, Sequence

from frobpen.certificate import Certificate
from frobpen.exactcas import MPoly, RatFn, RMatrix, SingularMatrix
from frobpen.frobmap import FrobeniusData
from frobpen.jetcalc import DiffPoly, jet_name, total_derivative_expr
from frobpen.riemann import Connection3, MetricRep, contravariant_christoffel, is_flat, levi_civita


class FlatnessWarning(UserWarning):
    pass


@dataclass(frozen=True, eq=False)
class OpCoeffs:
    order: int
    bands: dict[int, RMatrix]
    components: tuple[str, ...]

    @property
    def n(self) -> int:
        return len(self.components)

    def band(self, k: int) -> RMatrix:
        return self.bands.get(k, RMatrix.zeros(self.n))

    def leading(self) -> RMatrix:
        return self.band(self.order)

    def sub_leading_zero(self) -> bool:
        return all(self.band(k).is_zero() for k in range(self.order))

    def __add__(self, other: "OpCoeffs") -> "OpCoeffs":
        _same_space(self, other)
        keys = set(self.bands) | set(other.bands)
        return OpCoeffs(max(self.order, other.order), _prune({k: self.band(k) + other.band(k) for k in keys}),
                        self.components)

    def scale(self, c) -> "OpCoeffs":
        return OpCoeffs(self.order, _prune({k: M.scale(c) for k, M in self.bands.items()}), self.components)

    def __eq__(self, other):
        if not isinstance(other, OpCoeffs):
            return NotImplemented
        keys = set(self.bands) | set(other.bands)
        return self.components == other.components and all(self.band(k) == other.band(k) for k in keys)

    def apply(self, xi: Sequence) -> list[RatFn]:
        """``(P xi)^alpha`` for a covector of jet expressions."""
        n = self.n
        derivs = {0: [RatFn.coerce(x) for x in xi]}
        for k in range(1, max(self.bands, default=0) + 1):
            derivs[k] = [total_derivative_expr(x, self.components) for x in derivs[k - 1]]
        out = []
        for a in range(n):
            acc = RatFn.zero()
            for k, M in self.bands.items():
                for b in range(n):
                    if M[a, b]:
                        acc = acc + M[a, b] * derivs[k][b]
            out.append(acc)
        return out

    def pretty(self, name: str = "P") -> str:
        terms = []
        for k in sorted(self.bands, reverse=True):
            terms.append(f"C{k}^{{ab}} D^{k}" if k > 1 else (f"C1^{{ab}} D" if k == 1 else "C0^{ab}"))
        lines = [f"{name}^{{ab}} = " + " + ".join(terms) if terms else f"{name}^{{ab}} = 0"]
        for k in sorted(self.bands, reverse=True):
            lines.append(f"  C{k} =")
            lines.extend("    " + line for line in str(self.bands[k]).splitlines())
        return "\n".join(lines)

    __str__ = pretty

    def to_json(self) -> dict:
        return {"order": self.order, "components": list(self.components),
                "bands": {str(k): M.to_strings() for k, M in sorted(self.bands.items())}}


def _same_space(a: OpCoeffs, b: OpCoeffs):
    if a.components != b.components:
        raise ValueError("operators on different jet spaces")


def _prune(bands: Mapping[int, RMatrix]) -> dict[int, RMatrix]:
    return {k: M for k, M in bands.items() if not M.is_zero()}


def _jets(vars_: Sequence[str], order: int) -> list[RatFn]:
    return [RatFn.var(jet_name(v, order)) for v in vars_]


def _warn_if_curved(g: MetricRep, gamma: Connection3, what: str):
    if not is_flat(g, gamma):
        warnings.warn(f"{what}: metric is not flat; the operator is not Poisson", FlatnessWarning, stacklevel=3)


def _check_nonsingular(g: MetricRep):
    if g.is_degenerate():
        raise SingularMatrix("singular metric")


def first_order_op(g: MetricRep, *, check_flat: bool = True) -> OpCoeffs:
    """``g^{ab} D - Gamma^{ab}_c u^c_x``."""
    _check_nonsingular(g)
    gamma = levi_civita(g)
    if check_flat:
        _warn_if_curved(g, gamma, "first_order_op")
    up = contravariant_christoffel(g, gamma)
    n = g.dim
    ux = _jets(g.vars, 1)
    C0 = []
    for a in range(n):
        row = []
        for b in range(n):
            acc = RatFn.zero()
            for c in range(n):
                v = up.coeffs.get((a, b, c))
                if v:
                    acc = acc - v * ux[c]
            row.append(acc)
        C0.append(row)
    return OpCoeffs(1, _prune({1: g.contravariant, 0: RMatrix(C0)}), g.vars)


def third_order_op(h: MetricRep, *, check_flat: bool = True) -> OpCoeffs:
    """Four-band expansion of ``h^{aq} nabla_q nabla_p nabla_r`` in an arbitrary chart."""
    _check_nonsingular(h)
    G = levi_civita(h)
    if check_flat:
        _warn_if_curved(h, G, "third_order_op")
    n, v = h.dim, h.vars
    H = h.contravariant
    u1, u2, u3 = _jets(v, 1), _jets(v, 2), _jets(v, 3)
    gam = [[[G[i, j, k] for k in range(n)] for j in range(n)] for i in range(n)]  # gam[i][j][k] = Gamma^i_{jk}
    d1 = [[[[gam[i][j][k].diff(v[p]) if gam[i][j][k] else RatFn.zero() for p in range(n)]
            for k in range(n)] for j in range(n)] for i in range(n)]
    zero = RatFn.zero()

    def S(terms):
        acc = zero
        for t in terms:
            if t:
                acc = acc + t
        return acc

    X2, X1, X0 = [], [], []
    for q in range(n):
        r2, r1, r0 = [], [], []
        for be in range(n):
            r2.append(S(-3 * gam[be][q][s] * u1[s] for s in range(n) if gam[be][q][s]))
            quad = S((S(gam[p][q][s] * gam[be][p][r] for p in range(n)) - d1[be][q][s][r]) * u1[s] * u1[r]
                     for s in range(n) for r in range(n))
            lin = S(gam[be][q][s] * u2[s] for s in range(n) if gam[be][q][s])
            r1.append((quad - lin) * 3)
            cub = zero
            for s, r, p in product(range(n), repeat=3):
                c = S(2 * gam[a][q][s] * d1[be][a][r][p] + d1[a][q][s][r] * gam[be][a][p]
                      - S(gam[a][q][s] * gam[b][a][r] * gam[be][b][p] for b in range(n)) for a in range(n))
                dd = d1[be][q][s][r].diff(v[p]) if d1[be][q][s][r] else zero
                c = c - dd
                if c:
                    cub = cub + c * u1[s] * u1[r] * u1[p]
            mixed = zero
            for s, r in product(range(n), repeat=2):
                c = S(2 * gam[a][q][s] * gam[be][a][r] + gam[a][q][r] * gam[be][a][s] for a in range(n))
                c = c - 2 * d1[be][q][r][s] - d1[be][q][s][r]
                if c:
                    mixed = mixed + c * u1[s] * u2[r]
            r0.append(cub + mixed - S(gam[be][q][s] * u3[s] for s in range(n) if gam[be][q][s]))
        X2.append(r2)
        X1.append(r1)
        X0.append(r0)
    bands = {3: H, 2: H @ RMatrix(X2), 1: H @ RMatrix(X1), 0: H @ RMatrix(X0)}
    return OpCoeffs(3, _prune(bands), v)


# ---------------------------------------------------------------------------
# composition (used as an independent path)


def compose(A: OpCoeffs, B: OpCoeffs) -> OpCoeffs:
    """``A o B`` using ``D^i o f = sum_l C(i, l) D^l(f) D^{i-l}``."""
    _same_space(A, B)
    n = A.n
    out: dict[int, RMatrix] = {}
    for i, Ai in A.bands.items():
        for j, Bj in B.bands.items():
            Dl = Bj
            for l in range(i + 1):
                if l:
                    Dl = Dl.map(lambda e: total_derivative_expr(e, A.components))
                if Dl.is_zero():
                    break
                k = i - l + j
                term = (Ai @ Dl).scale(comb(i, l))
                out[k] = out[k] + term if k in out else term
    return OpCoeffs(A.order + B.order, _prune(out), A.components)


def covariant_d(h: MetricRep, gamma: Connection3 | None = None) -> OpCoeffs:
    """The matrix operator ``delta^p_q D - Gamma^p_{qm} u^m_x`` (row q, column p)."""
    gamma = gamma if gamma is not None else levi_civita(h)
    n = h.dim
    ux = _jets(h.vars, 1)
    C0 = [[-sum((gamma[p, q, m] * ux[m] for m in range(n) if gamma[p, q, m]), RatFn.zero())
           for p in range(n)] for q in range(n)]
    return OpCoeffs(1, _prune({1: RMatrix.identity(n), 0: RMatrix(C0)}), h.vars)


def third_order_by_composition(h: MetricRep) -> OpCoeffs:
    nab = covariant_d(h)
    lead = OpCoeffs(0, {0: h.contravariant}, h.vars)
    return compose(compose(compose(lead, nab), nab), nab)


# ---------------------------------------------------------------------------
# normal form and flows


@dataclass(frozen=True, eq=False)
class NormalForm:
    canonical: OpCoeffs
    independent: OpCoeffs
    certificate: Certificate

    @property
    def consistent(self) -> bool:
        return self.certificate.passed


def _const_matrix(M) -> RMatrix:
    return M if isinstance(M, RMatrix) else RMatrix([[RatFn.coerce(x) for x in r] for r in M])


def normal_form(d: FrobeniusData, h, names: Sequence[str] | None = None) -> NormalForm:
    """``h D^3 + (b + a_s u^s) D + 1/2 a_s u^s_x`` read off (b, a), checked against
    ``third_order_op(h) + first_order_op(b + a u)`` assembled independently."""
    names = tuple(names) if names is not None else tuple(f"u{i}" for i in range(1, d.n + 1))
    n = d.n
    Hm = _const_matrix(h.entries if hasattr(h, "entries") else h)
    ux = _jets(names, 1)
    G = d.reconstruct(names)
    half = [[sum((RatFn.coerce(d.a[s][i][j]) * ux[s] for s in range(n) if d.a[s][i][j] != 0), RatFn.zero())
             * Fraction(1, 2) for j in range(n)] for i in range(n)]
    canon = OpCoeffs(3, _prune({3: Hm, 1: G, 0: RMatrix(half)}), names)
    hm = MetricRep(Hm, names, "frobenius-u")
    gm = MetricRep(G, names, "frobenius-u")
    try:
        B = third_order_op(hm, check_flat=False)
    except SingularMatrix:
        B = OpCoeffs(3, _prune({3: Hm}), names)  # constant h: Christoffels vanish regardless
    try:
        A = first_order_op(gm, check_flat=False)
    except SingularMatrix:
        A = None
    if A is None:
        cert = Certificate.fail("normal-form", {"reason": "b + a u is degenerate"})
        return NormalForm(canon, B, cert)
    indep = B + A
    if indep == canon:
        return NormalForm(canon, indep, Certificate.ok("normal-form"))
    bad = next(k for k in sorted(set(canon.bands) | set(indep.bands)) if canon.band(k) != indep.band(k))
    return NormalForm(canon, indep, Certificate.fail("normal-form", {"band": bad}))


def hydro_flow(g: MetricRep, H, *, check_flat: bool = True) -> list[RatFn]:
    """``u^b_t = g^{ba} H_{,ac} u^c_x - Gamma^{ba}_c H_{,a} u^c_x``."""
    _check_nonsingular(g)
    gamma = levi_civita(g)
    if check_flat:
        _warn_if_curved(g, gamma, "hydro_flow")
    up = contravariant_christoffel(g, gamma)
    n, v = g.dim, g.vars
    H = H.poly if isinstance(H, DiffPoly) else H
    H = RatFn.coerce(H)
    dH = [H.diff(x) for x in v]
    ddH = [[dH[a].diff(x) for x in v] for a in range(n)]
    ux = _jets(v, 1)
    Gm = g.contravariant
    out = []
    for b in range(n):
        acc = RatFn.zero()
        for a, c in product(range(n), repeat=2):
            if Gm[b, a] and ddH[a][c]:
                acc = acc + Gm[b, a] * ddH[a][c] * ux[c]
            w = up.coeffs.get((b, a, c))
            if w and dH[a]:
                acc = acc - w * dH[a] * ux[c]
        out.append(acc)
    return out


def as_diffpoly(e: RatFn, components: Sequence[str]) -> DiffPoly:
    if not e.is_polynomial():
        raise ValueError("expression has a denominator")
    return DiffPoly(e.as_poly(), tuple(components))
