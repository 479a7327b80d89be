"""Frobenius algebras with forms, pencil compatibility, constant partners ``h`` and a small catalogue.

Indices follow the dual convention: ``e^i * e^j = a^{ij}_k e^k`` with ``a[k][i][j]``
and forms ``b^{ij} = b(e^i, e^j)``.  Entries are exact rationals or polynomials in
pencil parameters.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Iterable, Mapping, Sequence

from frobpen.certificate import Certificate
from frobpen.exactcas import MPoly, RatFn, RMatrix, scalar, scalar_str, solve_linear
from frobpen.frobmap import FrobeniusData

Matrix = list[list]


def _zero(x) -> bool:
    return x.is_zero() if isinstance(x, (MPoly, RatFn)) else x == 0


def _norm(x):
    if isinstance(x, (MPoly, RatFn)):
        return x.constant_value() if x.is_constant() else x
    return scalar(x)


def _s(x) -> str:
    return x.canonical() if isinstance(x, (MPoly, RatFn)) else scalar_str(scalar(x))


def _mat(M) -> Matrix:
    if isinstance(M, RMatrix):
        return [[_norm(M[i, j]) for j in range(M.cols)] for i in range(M.rows)]
    return [[_norm(x) for x in row] for row in M]


def _dot(pairs: Iterable[tuple]) -> object:
    acc = Fraction(0)
    for x, y in pairs:
        if not _zero(x) and not _zero(y):
            acc = acc + x * y
    return _norm(acc)


@dataclass
class AlgebraWithForms:
    """Commutative structure constants ``a[k][i][j]`` plus named symmetric forms."""

    a: list[Matrix]
    forms: dict[str, Matrix] = field(default_factory=dict)

    def __post_init__(self):
        self.a = [_mat(M) for M in self.a]
        self.forms = {k: _mat(v) for k, v in self.forms.items()}
        n = self.n
        for M in self.a:
            if len(M) != n or any(len(r) != n for r in M):
                raise ValueError("structure constants must be n x n x n")
            for i, j in product(range(n), repeat=2):
                if M[i][j] != M[j][i]:
                    raise ValueError("structure constants must be symmetric in the upper indices")
        for name, F in self.forms.items():
            if len(F) != n or any(len(r) != n for r in F):
                raise ValueError(f"form {name!r} has the wrong size")

    @property
    def n(self) -> int:
        return len(self.a)

    def coeff(self, i: int, j: int, k: int):
        return self.a[k][i][j]

    def product(self, i: int, j: int) -> list:
        """Coordinates of ``e^i * e^j``."""
        return [self.a[k][i][j] for k in range(self.n)]

    def multiply(self, x: Sequence, y: Sequence) -> list:
        n = self.n
        return [_dot((x[i] * y[j], self.a[k][i][j]) for i in range(n) for j in range(n)) for k in range(n)]

    def with_form(self, name: str, F) -> "AlgebraWithForms":
        forms = dict(self.forms)
        forms[name] = F
        return AlgebraWithForms(self.a, forms)

    @classmethod
    def from_data(cls, d: FrobeniusData, h=None) -> "AlgebraWithForms":
        forms = {"b": d.b}
        if h is not None:
            forms["h"] = h.entries if isinstance(h, ConstantForm) else h
        return cls(d.a, forms)

    def __add__(self, other: "AlgebraWithForms") -> "AlgebraWithForms":
        n = self.n
        a = [[[self.a[k][i][j] + other.a[k][i][j] for j in range(n)] for i in range(n)] for k in range(n)]
        forms = {k: [[F[i][j] + other.forms[k][i][j] for j in range(n)] for i in range(n)]
                 for k, F in self.forms.items() if k in other.forms}
        return AlgebraWithForms(a, forms)

    def direct_sum(self, other: "AlgebraWithForms") -> "AlgebraWithForms":
        n, m = self.n, other.n
        N = n + m
        a = [[[Fraction(0)] * N for _ in range(N)] for _ in range(N)]
        for k, i, j in product(range(n), repeat=3):
            a[k][i][j] = self.a[k][i][j]
        for k, i, j in product(range(m), repeat=3):
            a[n + k][n + i][n + j] = other.a[k][i][j]
        forms = {}
        for name in self.forms.keys() & other.forms.keys():
            F = [[Fraction(0)] * N for _ in range(N)]
            for i, j in product(range(n), repeat=2):
                F[i][j] = self.forms[name][i][j]
            for i, j in product(range(m), repeat=2):
                F[n + i][n + j] = other.forms[name][i][j]
            forms[name] = F
        return AlgebraWithForms(a, forms)

    def to_json(self) -> dict:
        return {"a": [[[_s(x) for x in r] for r in M] for M in self.a],
                "forms": {k: [[_s(x) for x in r] for r in F] for k, F in self.forms.items()}}


# ---------------------------------------------------------------------------
# axioms


def associativity_violations(a: Sequence[Matrix], limit: int | None = None) -> list[dict]:
    """``a^{ij}_p a^{pr}_k == a^{ip}_k a^{jr}_p`` over all (i, j, r, k)."""
    n = len(a)
    out = []
    for i, j, r, k in product(range(n), repeat=4):
        lhs = _dot((a[p][i][j], a[k][p][r]) for p in range(n))
        rhs = _dot((a[k][i][p], a[p][j][r]) for p in range(n))
        if not _zero(lhs - rhs):
            out.append({"law": "associativity", "indices": [i + 1, j + 1, r + 1, k + 1],
                        "lhs": _s(lhs), "rhs": _s(rhs)})
            if limit and len(out) >= limit:
                break
    return out


def frobenius_violations(a: Sequence[Matrix], b: Matrix, limit: int | None = None) -> list[dict]:
    """``b^{pr} a^{ij}_p == b^{ip} a^{jr}_p`` over all (i, j, r)."""
    n = len(a)
    out = []
    for i, j, r in product(range(n), repeat=3):
        lhs = _dot((b[p][r], a[p][i][j]) for p in range(n))
        rhs = _dot((b[i][p], a[p][j][r]) for p in range(n))
        if not _zero(lhs - rhs):
            out.append({"law": "frobenius", "indices": [i + 1, j + 1, r + 1], "lhs": _s(lhs), "rhs": _s(rhs)})
            if limit and len(out) >= limit:
                break
    return out


def check_frobenius(alg: AlgebraWithForms, form: str | Matrix | None = None) -> Certificate:
    """Associativity plus the Frobenius identity for ``form`` (a name, a matrix, or every stored form)."""
    if form is None:
        forms = alg.forms
    elif isinstance(form, str):
        forms = {form: alg.forms[form]}
    else:
        forms = {"form": _mat(form)}
    viol = associativity_violations(alg.a)
    for name, F in forms.items():
        if len(F) != alg.n:
            raise ValueError("form and algebra dimensions differ")
        for v in frobenius_violations(alg.a, F):
            v["form"] = name
            viol.append(v)
    if viol:
        return Certificate.fail("frobenius", {"violations": viol, "count": len(viol)})
    return Certificate.ok("frobenius", forms=sorted(forms))


# ---------------------------------------------------------------------------
# pencil compatibility


@dataclass
class FrobeniusTriple:
    """Structure constants ``a``, constant form ``b`` and partner ``h``."""

    a: list[Matrix]
    b: Matrix
    h: Matrix

    @classmethod
    def of(cls, d: FrobeniusData, h) -> "FrobeniusTriple":
        return cls([_mat(M) for M in d.a], _mat(d.b), _mat(h.entries if isinstance(h, ConstantForm) else h))

    @property
    def n(self) -> int:
        return len(self.b)

    def scaled(self, lam) -> "FrobeniusTriple":
        lam = scalar(lam)
        return FrobeniusTriple([[[x * lam for x in r] for r in M] for M in self.a],
                               [[x * lam for x in r] for r in self.b], [[x * lam for x in r] for r in self.h])


def _triple(x) -> FrobeniusTriple:
    if isinstance(x, FrobeniusTriple):
        return x
    d, h = x
    return FrobeniusTriple.of(d, h)


def _assoc(a1, a2, al, be, ga, s):
    """``a1^{al be}_q a2^{q ga}_s``."""
    n = len(a1)
    return _dot((a1[q][al][be], a2[s][q][ga]) for q in range(n))


def _frob(h, a, al, be, ga):
    """``h^{al q} a^{be ga}_q``."""
    n = len(a)
    return _dot((h[al][q], a[q][be][ga]) for q in range(n))


PENCIL_FAMILIES = ("assoc(a)", "assoc(abar)", "assoc(mixed)", "frob(h,a)", "frob(b,a)",
                   "frob(hbar,abar)", "frob(bbar,abar)", "frob(mixed h)", "frob(mixed b)")


def pencil_family_residual(fam: int, t1: FrobeniusTriple, t2: FrobeniusTriple, idx: tuple) -> object:
    """LHS - RHS of family ``fam`` (0-based, order of :data:`PENCIL_FAMILIES`)."""
    a, ab = t1.a, t2.a
    if fam < 3:
        al, be, ga, s = idx
        if fam == 0:
            return _assoc(a, a, al, be, ga, s) - _assoc(a, a, ga, be, al, s)
        if fam == 1:
            return _assoc(ab, ab, al, be, ga, s) - _assoc(ab, ab, ga, be, al, s)
        return (_assoc(ab, a, al, be, ga, s) + _assoc(a, ab, al, be, ga, s)
                - _assoc(ab, a, ga, be, al, s) - _assoc(a, ab, ga, be, al, s))
    al, be, ga = idx
    single = {3: (t1.h, a), 4: (t1.b, a), 5: (t2.h, ab), 6: (t2.b, ab)}
    if fam in single:
        F, A = single[fam]
        return _frob(F, A, al, be, ga) - _frob(F, A, ga, be, al)
    F, Fb = (t1.h, t2.h) if fam == 7 else (t1.b, t2.b)
    return (_frob(Fb, a, al, be, ga) + _frob(F, ab, al, be, ga)
            - _frob(Fb, a, ga, be, al) - _frob(F, ab, ga, be, al))


def check_pencil_compat(d1, d2) -> Certificate:
    """All nine compatibility families for ``(a, b, h)`` and ``(abar, bbar, hbar)``.

    ``d1``/``d2`` are :class:`FrobeniusTriple` or ``(FrobeniusData, h)`` pairs.
    Reports the first violated family with its (1-based) indices.
    """
    t1, t2 = _triple(d1), _triple(d2)
    if t1.n != t2.n:
        raise ValueError("pencil members have different dimensions")
    n = t1.n
    for fam, name in enumerate(PENCIL_FAMILIES):
        for idx in product(range(n), repeat=4 if fam < 3 else 3):
            r = pencil_family_residual(fam, t1, t2, idx)
            if not _zero(r):
                return Certificate.fail("pencil-compat", {"family": fam + 1, "name": name,
                                                          "indices": [i + 1 for i in idx],
                                                          "residual": _s(_norm(r))})
    return Certificate.ok("pencil-compat", families=len(PENCIL_FAMILIES))


# ---------------------------------------------------------------------------
# constant partners


@dataclass
class ConstantForm:
    entries: Matrix
    det: object
    degenerate: bool

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def matrix(self) -> RMatrix:
        return RMatrix(self.entries)

    def to_json(self) -> dict:
        return {"h": [[_s(x) for x in r] for r in self.entries], "det": _s(self.det),
                "degenerate": self.degenerate}


def build_h(d: FrobeniusData, m0, m: Sequence) -> ConstantForm:
    """``h = m0 b + sum_s m^s a_s``; a vanishing determinant is flagged, not rejected."""
    n = d.n
    if len(m) != n:
        raise ValueError(f"need {n} values m^1..m^n, got {len(m)}")
    m0 = _norm(m0)
    ms = [_norm(x) for x in m]
    H = [[_norm(m0 * d.b[i][j] + _dot((ms[s], d.a[s][i][j]) for s in range(n))) for j in range(n)]
         for i in range(n)]
    det = _norm(RMatrix(H).det())
    return ConstantForm(H, det, _zero(det))


def sample_m(n: int, rng, d: FrobeniusData | None = None, tries: int = 50, span: int = 5) -> tuple:
    """Small random rationals ``(m0, m)``, redrawn while ``build_h`` is degenerate."""
    def draw():
        return Fraction(rng.randint(-span, span), rng.randint(1, 3))

    for _ in range(tries):
        m0, m = draw(), [draw() for _ in range(n)]
        if d is None or not build_h(d, m0, m).degenerate:
            return m0, m
    return m0, m


def partner_kernel(d1: FrobeniusData, d2: FrobeniusData) -> list[tuple[Matrix, Matrix]]:
    """Basis of all constant symmetric (h, hbar) satisfying the h-families of the compatibility system.

    Families 4, 6 and 8 are linear in (h, hbar) once the algebras are fixed.
    Entries of ``a`` must be numbers here.
    """
    n = d1.n
    pairs = [(i, j) for i in range(n) for j in range(i, n)]
    nv = len(pairs)
    unknowns = 2 * nv

    def col(which, i, j):
        return which * nv + pairs.index((min(i, j), max(i, j)))

    def num(x):
        if isinstance(x, (MPoly, RatFn)):
            if not x.is_constant():
                raise ValueError("partner_kernel needs numeric structure constants")
            return x.constant_value()
        return scalar(x)

    a = [[[num(x) for x in r] for r in M] for M in d1.a]
    ab = [[[num(x) for x in r] for r in M] for M in d2.a]
    rows = []
    for al, be, ga in product(range(n), repeat=3):
        for kind in (0, 1, 2):
            row = [Fraction(0)] * unknowns
            for q in range(n):
                if kind == 0:
                    row[col(0, al, q)] += a[q][be][ga]
                    row[col(0, ga, q)] -= a[q][be][al]
                elif kind == 1:
                    row[col(1, al, q)] += ab[q][be][ga]
                    row[col(1, ga, q)] -= ab[q][be][al]
                else:
                    row[col(1, al, q)] += a[q][be][ga]
                    row[col(0, al, q)] += ab[q][be][ga]
                    row[col(1, ga, q)] -= a[q][be][al]
                    row[col(0, ga, q)] -= ab[q][be][al]
            if any(row):
                rows.append(row)
    if not rows:
        rows = [[Fraction(0)] * unknowns]
    sol = solve_linear(rows)
    out = []
    for v in sol.kernel:
        H = [[Fraction(0)] * n for _ in range(n)]
        Hb = [[Fraction(0)] * n for _ in range(n)]
        for c, (i, j) in enumerate(pairs):
            H[i][j] = H[j][i] = v[c]
            Hb[i][j] = Hb[j][i] = v[nv + c]
        out.append((H, Hb))
    return out


# ---------------------------------------------------------------------------
# catalogue


def algebra_a(n: int) -> AlgebraWithForms:
    """``e_i * e_j = e_{i+j}``, zero past ``n``; anti-diagonal form."""
    return _truncated(n, 0)


def algebra_b(n: int) -> AlgebraWithForms:
    """``e_i * e_j = e_{i+j-1}``, zero past ``n`` (truncated polynomials)."""
    return _truncated(n, 1)


def _truncated(n: int, shift: int) -> AlgebraWithForms:
    if n < 1:
        raise ValueError("dimension must be >= 1")
    a = [[[Fraction(0)] * n for _ in range(n)] for _ in range(n)]
    for i, j in product(range(1, n + 1), repeat=2):
        k = i + j - shift
        if k <= n:
            a[k - 1][i - 1][j - 1] = Fraction(1)
    # anti-diagonal form; Frobenius for both shifts
    form = [[Fraction(1 if i + j == n + 1 else 0) for j in range(1, n + 1)] for i in range(1, n + 1)]
    return AlgebraWithForms(a, {"b": form})


def catalogue(kind: str, dims: int | Sequence[int]) -> AlgebraWithForms:
    """``a_n``, ``b_n`` or ``direct_sum`` with ``dims = (p, q)`` for ``a_p + b_q``."""
    if kind in ("a", "a_n"):
        return algebra_a(int(dims))
    if kind in ("b", "b_n"):
        return algebra_b(int(dims))
    if kind == "direct_sum":
        p, q = dims
        if p == 0:
            return algebra_b(q)
        if q == 0:
            return algebra_a(p)
        return algebra_a(p).direct_sum(algebra_b(q))
    raise ValueError(f"unknown algebra kind {kind!r}")


def change_basis(alg: AlgebraWithForms, P: Sequence[Sequence]) -> AlgebraWithForms:
    """New basis ``f^i = P[i][k] e^k``; forms become ``P F P^T``."""
    n = alg.n
    P = [[scalar(x) for x in r] for r in P]
    Pi = RMatrix(P).inverse()
    Pinv = [[Pi[i, j].constant_value() for j in range(n)] for i in range(n)]
    a = [[[Fraction(0)] * n for _ in range(n)] for _ in range(n)]
    for i, j in product(range(n), repeat=2):
        prod_ij = [_dot((P[i][p] * P[j][q], alg.a[r][p][q]) for p in range(n) for q in range(n))
                   for r in range(n)]
        for k in range(n):
            a[k][i][j] = _dot((prod_ij[r], Pinv[r][k]) for r in range(n))
    forms = {name: [[_dot((P[i][p] * P[j][q], F[p][q]) for p in range(n) for q in range(n))
                     for j in range(n)] for i in range(n)] for name, F in alg.forms.items()}
    return AlgebraWithForms(a, forms)


def aff_flip_basis(n: int, i: int) -> list[list[Fraction]]:
    """Reverse and negate the first ``n - i`` basis vectors, keep the last ``i``."""
    p = n - i
    P = [[Fraction(0)] * n for _ in range(n)]
    for r in range(p):
        P[r][p - 1 - r] = Fraction(-1)
    for r in range(p, n):
        P[r][r] = Fraction(1)
    return P


def same_structure(x: AlgebraWithForms, y: AlgebraWithForms) -> bool:
    return x.n == y.n and all(_zero(_norm(x.a[k][i][j] - y.a[k][i][j]))
                              for k, i, j in product(range(x.n), repeat=3))


def algebra_from_mapping(n: int, products: Mapping[tuple[int, int], Mapping[int, object]]) -> AlgebraWithForms:
    """Structure constants from ``{(i, j): {k: coeff}}`` (1-based, symmetrised)."""
    a = [[[Fraction(0)] * n for _ in range(n)] for _ in range(n)]
    for (i, j), vec in products.items():
        for k, c in vec.items():
            a[k - 1][i - 1][j - 1] = a[k - 1][j - 1][i - 1] = _norm(c)
    return AlgebraWithForms(a)
