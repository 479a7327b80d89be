from fractions import Fraction
from itertools import product

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from frobpen.blocks import lc_metric, make_block, pencil_metric
from frobpen.exactcas import MPoly, RatFn, RMatrix, SingularMatrix
from frobpen.riemann import (MetricRep, bianchi_first, characteristic_identity, constant_curvature,
                             contravariant_christoffel, curvature, is_flat, levi_civita, metric_pairing,
                             nijenhuis_torsion, poisson_compatible)

x1, x2, x3 = (MPoly.var(v) for v in ("x1", "x2", "x3"))


def euclid(n=2, names=("x1", "x2", "x3")):
    return MetricRep(RMatrix.identity(n), names[:n], "diagonal-x")


def diagonal_christoffel(G: RMatrix, names) -> dict:
    """Closed-form symbols of a diagonal covariant metric G_ii = eps_i exp(g_i).

    Gamma^k_{kj} = 1/2 d_j g_k, Gamma^k_{jj} = -1/2 (G_j/G_k) d_k g_j for k != j,
    zero for pairwise different indices; with d g_k = d G_k / G_k.
    """
    n = len(names)
    out = {}
    for k, j in product(range(n), repeat=2):
        v = G[k, k].diff(names[j]) / G[k, k] * Fraction(1, 2)
        out[(k, k, j)] = out[(k, j, k)] = v
    for k, j in product(range(n), repeat=2):
        if k != j:
            out[(k, j, j)] = -(G[j, j].diff(names[k]) / G[k, k]) * Fraction(1, 2)
    return out


# ---------------------------------------------------------------------------
# connections


def test_euclidean_connection_zero():
    g = euclid()
    assert levi_civita(g).is_zero()
    assert contravariant_christoffel(g).is_zero()


@pytest.mark.parametrize("n", [2, 3])
def test_lc_metric_against_closed_form(n):
    names = tuple(f"x{i}" for i in range(1, n + 1))
    g = MetricRep(lc_metric(names), names, "diagonal-x")
    gamma = levi_civita(g)
    oracle = diagonal_christoffel(g.covariant, names)
    for idx in product(range(n), repeat=3):
        assert gamma[idx] == oracle.get(idx, RatFn.zero()), idx


def test_diagonal_formula_generic_entry():
    g = MetricRep(RMatrix.diag([x1 * x2 + 1, x1 ** 2 + x2]), ("x1", "x2"), "diagonal-x", "covariant")
    gamma = levi_civita(g)
    oracle = diagonal_christoffel(g.covariant, ("x1", "x2"))
    assert all(gamma[idx] == oracle.get(idx, RatFn.zero()) for idx in product(range(2), repeat=3))


def test_contravariant_christoffel_aff_g1():
    u2 = MPoly.var("u2")
    g = MetricRep(RMatrix([[1, 0], [0, u2]]), ("u1", "u2"))
    up = contravariant_christoffel(g)
    assert up.nonzero() == {(1, 1, 1): RatFn.coerce(Fraction(-1, 2))}


def test_singular_metric_rejected():
    g = MetricRep(RMatrix([[x1, x1], [x1, x1]]), ("x1", "x2"), "diagonal-x")
    with pytest.raises(SingularMatrix):
        levi_civita(g)


@st.composite
def diagonal_metrics(draw):
    entries = []
    for _ in range(2):
        c0 = draw(st.integers(1, 4))
        c1 = draw(st.integers(-3, 3))
        c2 = draw(st.integers(-3, 3))
        entries.append(x1 * c1 + x2 ** 2 * c2 + c0)
    return MetricRep(RMatrix.diag(entries), ("x1", "x2"), "diagonal-x")


@given(diagonal_metrics())
def test_characteristic_identity_diagonal(g):
    assert characteristic_identity(g, levi_civita(g))


@pytest.mark.parametrize("n", [2, 3])
def test_characteristic_identity_aff(n):
    blk = make_block(n)
    for i in range(n + 1):
        coeffs = [0] * (n + 2)
        coeffs[i] = 1
        g = pencil_metric(blk, coeffs)
        assert characteristic_identity(g, levi_civita(g))


# ---------------------------------------------------------------------------
# curvature


def test_euclidean_flat():
    assert curvature(euclid(3)).is_zero()
    assert is_flat(euclid(2))


@pytest.mark.parametrize("n", [1, 2, 3])
def test_aff_metrics_flat(n):
    blk = make_block(n)
    for i in range(n + 1):
        coeffs = [0] * (n + 2)
        coeffs[i] = 1
        assert is_flat(pencil_metric(blk, coeffs)), (n, i)


def test_curved_example_witness():
    g = MetricRep(RMatrix.diag([1, x1]), ("x1", "x2"), "diagonal-x")
    cert = is_flat(g)
    assert not cert
    assert cert.witness["entry"] and len(cert.witness["indices"]) == 4
    assert cert.to_json()["status"] == "fail"


def test_linear_p_is_flat():
    assert curvature(pencil_metric(make_block(2), [0, 1], "x")).is_zero()


def test_cubic_p_curved():
    g = pencil_metric(make_block(2), [0, 0, 0, 1], "x")
    assert not curvature(g).is_zero()


@pytest.mark.parametrize("top,K", [(1, Fraction(-1, 4)), (4, Fraction(-1))])
def test_constant_curvature_examples(top, K):
    coeffs = [0, 0, 0, top]
    assert constant_curvature(pencil_metric(make_block(2), coeffs, "x")).K == K
    assert constant_curvature(pencil_metric(make_block(2), coeffs, "y")).K == K


def test_flat_metric_has_zero_constant_curvature():
    assert constant_curvature(pencil_metric(make_block(3), [0, 1, 0, 1])).K == 0


def test_non_constant_curvature_reported():
    g = MetricRep(RMatrix.diag([1, x1 ** 3 + 1]), ("x1", "x2"), "diagonal-x")
    cc = constant_curvature(g)
    assert cc.K is None and not cc.certificate


@settings(max_examples=8)
@given(st.sampled_from([2, 3]), st.fractions(min_value=-6, max_value=6, max_denominator=5).filter(bool),
       st.lists(st.integers(-2, 2), min_size=4, max_size=4))
def test_constant_curvature_law(n, top, lower):
    coeffs = lower[: n + 1] + [top]
    if all(c == 0 for c in coeffs[:-1]):
        coeffs[0] = 1
    g = pencil_metric(make_block(n), coeffs, "x")
    assert constant_curvature(g).K == -top / 4


@pytest.mark.parametrize("g", [
    MetricRep(RMatrix.diag([1, x1]), ("x1", "x2"), "diagonal-x"),
    pencil_metric(make_block(2), [1, 0, 0, 1], "x"),
    pencil_metric(make_block(3), [0, 1, 0, 0, 2], "x"),
])
def test_first_bianchi(g):
    assert bianchi_first(curvature(g))


# ---------------------------------------------------------------------------
# Nijenhuis torsion


def test_nijenhuis_diagonal_zero():
    L = RMatrix.diag([x1, x2, x3])
    assert nijenhuis_torsion(L, ("x1", "x2", "x3")).certificate


def test_nijenhuis_companion_zero():
    blk = make_block(3)
    assert nijenhuis_torsion(blk.L_y, blk.yvars).certificate


def test_nijenhuis_witness():
    t = nijenhuis_torsion(RMatrix([[x2, 0], [0, x1]]), ("x1", "x2"))
    assert not t.certificate
    assert t.comps
    assert t.certificate.witness["indices"]


# ---------------------------------------------------------------------------
# Poisson compatibility


def test_aff_pair_compatible():
    blk = make_block(2)
    g0 = pencil_metric(blk, [1])
    g1 = pencil_metric(blk, [0, 1])
    cert = poisson_compatible(g0, g1)
    assert cert and "det_g_t" in cert.info


def test_self_compatible():
    g = pencil_metric(make_block(3), [1, 2])
    assert poisson_compatible(g, g)


def test_incompatible_pair():
    cert = poisson_compatible(euclid(), MetricRep(RMatrix.diag([1, x1 ** 2 + 1]), ("x1", "x2"), "diagonal-x"))
    assert not cert
    assert cert.witness["reason"] in ("christoffel", "curvature")


@pytest.mark.parametrize("g,gbar,expected", [
    (pencil_metric(make_block(2), [1]), pencil_metric(make_block(2), [0, 1]), True),
    (pencil_metric(make_block(3), [0, 1, 1]), pencil_metric(make_block(3), [2, 0, 0, 1]), True),
    (pencil_metric(make_block(2), [0, 0, 1], "x"), pencil_metric(make_block(2), [1, 1], "x"), True),
    (euclid(), MetricRep(RMatrix.diag([1, x1 ** 2 + 1]), ("x1", "x2"), "diagonal-x"), False),
])
def test_compatibility_implies_nijenhuis(g, gbar, expected):
    compatible = bool(poisson_compatible(g, gbar))
    assert compatible == expected
    if compatible:
        R = gbar.contravariant @ g.covariant
        assert nijenhuis_torsion(R, g.vars).certificate


# ---------------------------------------------------------------------------
# Casimir identity, squared


@pytest.mark.parametrize("n", [2, 3])
@pytest.mark.parametrize("lam", [Fraction(0), Fraction(-3, 2)])
@pytest.mark.parametrize("chart", ["x", "y"])
def test_casimir_identity(n, lam, chart):
    # P(t) = (t - lam) Q(t), Q of degree n with a non-trivial tail
    Q = [Fraction(k + 1) for k in range(n)] + [Fraction(2)]
    P = [Fraction(0)] * (n + 2)
    for k, c in enumerate(Q):
        P[k + 1] += c
        P[k] -= lam * c
    blk = make_block(n)
    g = pencil_metric(blk, P, chart)
    f = blk.char_poly_at(lam, chart)
    dP = sum(k * P[k] * lam ** (k - 1) for k in range(1, len(P)))
    assert metric_pairing(g, f) == f * (f * P[-1] - dP)


def test_casimir_fails_off_root():
    blk = make_block(2)
    P = [1, 0, 0, 1]
    lam = Fraction(1)
    f = blk.char_poly_at(lam, "x")
    dP = sum(k * P[k] * lam ** (k - 1) for k in range(1, len(P)))
    g = pencil_metric(blk, P, "x")
    assert metric_pairing(g, f) != f * (f * P[-1] - dP)
