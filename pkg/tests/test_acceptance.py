"""End-to-end acceptance checks, one group per criterion (see the summary section of the run)."""
import random
import time
from fractions import Fraction
from itertools import product

import pytest
from hypothesis import given, settings

from frobpen import corpus
from frobpen.assemble import assemble
from frobpen.blocks import make_block, pencil_matrix, pencil_metric
from frobpen.cli import example1_charts, example1_matrices
from frobpen.exactcas import RMatrix
from frobpen.forest import PencilSpec, pencil_basis, validate_conditions
from frobpen.frobalg import build_h, check_pencil_compat, sample_m
from frobpen.frobmap import decompose_assembled, frobenius_map, pushforward
from frobpen.jetcalc import DiffPoly, total_derivative, variational_derivative
from frobpen.poissonop import normal_form, third_order_op
from frobpen.riemann import (MetricRep, constant_curvature, is_flat, metric_pairing, nijenhuis_torsion,
                             poisson_compatible)
from tests.conftest import golden_blocks, golden_matrix
from tests.test_jetcalc import diff_polys

crit = pytest.mark.criterion
CORPUS = sorted(corpus.FLAT_CORPUS)


# 1 ---------------------------------------------------------------------------


@crit(1)
@pytest.mark.parametrize("n", [2, 3, 4])
def test_aff_golden(n):
    gold = golden_blocks(f"aff_n{n}.txt")
    blk = make_block(n, tuple(f"u{i}" for i in range(1, n + 1)))
    assert str(blk.L("y")).splitlines() == gold["L"]
    for i in range(n + 1):
        coeffs = [0] * (n + 2)
        coeffs[i] = 1
        assert str(pencil_matrix(blk, coeffs)).splitlines() == gold[f"g{i}"]


# 2 ---------------------------------------------------------------------------

GOLDEN_EXAMPLE1 = {"g": "example1_printed.txt", "L1": "example1_L1.txt", "L2": "example1_L2.txt",
                   "g1_LC": "example1_g1LC.txt", "g2_LC": "example1_g2LC.txt"}


@crit(2)
@pytest.mark.xfail(strict=True, reason="printed matrix uses the chart (u1, u2, -u3, -u4); see ledger")
def test_example1_literal_chart():
    am, m, _ = example1_charts()
    assert pushforward(am.g, m).contravariant == golden_matrix("example1_printed.txt")


@crit(2)
@pytest.mark.parametrize("name", sorted(GOLDEN_EXAMPLE1))
def test_example1_sign_flipped_chart(name):
    am, _, flip = example1_charts()
    assert example1_matrices(am, flip)[name] == golden_matrix(GOLDEN_EXAMPLE1[name])


# 3 ---------------------------------------------------------------------------


@crit(3)
@pytest.mark.parametrize("name", CORPUS)
def test_corpus_flat(name):
    # the generic member carries every free parameter symbolically, so it covers the whole pencil
    t0 = time.perf_counter()
    p = pencil_basis(corpus.FLAT_CORPUS[name]).generic()
    assert validate_conditions(p)
    assert is_flat(assemble(p, "x").g)
    assert time.perf_counter() - t0 <= 60


# 4 ---------------------------------------------------------------------------


@crit(4)
@pytest.mark.parametrize("n", [2, 3])
def test_constant_curvature_law(n):
    rnd = random.Random(n)
    for _ in range(3):
        top = Fraction(rnd.choice([-1, 1]) * rnd.randint(1, 7), rnd.randint(1, 5))
        coeffs = [Fraction(rnd.randint(-3, 3)) for _ in range(n + 1)] + [top]
        coeffs[0] = coeffs[0] or Fraction(1)
        assert constant_curvature(pencil_metric(make_block(n), coeffs, "x")).K == -top / 4


# 5 ---------------------------------------------------------------------------

SAMPLES = [
    # (a0, a1, a2, b0, b1, b2, b3), expected
    ((0, 1, 1, 1, 0, 0, 1), True),
    ((0, 2, -1, 3, 1, 0, 2), True),
    ((0, Fraction(1, 2), 0, 1, 5, -2, Fraction(1, 2)), True),
    ((0, -3, 4, -1, 0, 1, -3), True),
    ((1, 1, 1, 1, 0, 0, 1), False),
    ((-2, 2, 0, 3, 1, 0, 2), False),
    ((0, 1, 1, 1, 0, 0, 2), False),
    ((0, 2, -1, 3, 1, 0, 0), False),
]


@crit(5)
@pytest.mark.parametrize("values,expected", SAMPLES)
def test_two_block_iff(values, expected):
    a0, a1, a2, b0, b1, b2, b3 = values
    p = PencilSpec(corpus.example1(), ((a0, a1, a2, 0), (b0, b1, b2, b3)))
    assert bool(validate_conditions(p)) == expected
    assert decompose_assembled(assemble(p, "y", unchecked=True)).ok == expected


# 6 ---------------------------------------------------------------------------


@crit(6)
def test_pencil_dimensions():
    assert [pencil_basis(corpus.single(n)).dimension for n in (2, 3, 4)] == [3, 4, 5]
    assert pencil_basis(corpus.example1()).dimension == 5


# 7 ---------------------------------------------------------------------------


@crit(7)
@pytest.mark.parametrize("name", CORPUS)
def test_compatibility_suite(name):
    f = corpus.FLAT_CORPUS[name]
    rng = random.Random(name)
    for _ in range(5):
        p, q = corpus.random_pair(f, rng)
        g, gbar = assemble(p, "x").g, assemble(q, "x").g
        assert poisson_compatible(g, gbar)
        assert nijenhuis_torsion(gbar.contravariant @ g.covariant, g.vars).certificate
        d1 = decompose_assembled(assemble(p, "y")).data
        d2 = decompose_assembled(assemble(q, "y")).data
        for _ in range(3):
            m0, m = sample_m(f.n, rng, d1)
            assert check_pencil_compat((d1, build_h(d1, m0, m)), (d2, build_h(d2, m0, m)))


# 8 ---------------------------------------------------------------------------


@crit(8)
@pytest.mark.parametrize("n", [2, 3])
@pytest.mark.parametrize("lam", [Fraction(1, 3), Fraction(-2)])
def test_casimir_identity(n, lam):
    Q = [Fraction(k - 1) for k in range(n)] + [Fraction(3)]
    P = [Fraction(0)] * (n + 2)
    for k, c in enumerate(Q):
        P[k + 1] += c
        P[k] -= lam * c
    assert sum(c * lam ** k for k, c in enumerate(P)) == 0
    blk = make_block(n)
    f = blk.char_poly_at(lam, "y")
    dP = sum(k * P[k] * lam ** (k - 1) for k in range(1, len(P)))
    assert metric_pairing(pencil_metric(blk, P, "y"), f) == f * (f * P[-1] - dP)


# 9 ---------------------------------------------------------------------------


@crit(9)
@settings(max_examples=50, deadline=None)
@given(diff_polys())
def test_variational_annihilates_total_derivatives(f):
    DF = total_derivative(f)
    assert all(variational_derivative(DF, c).is_zero() for c in f.components)


@crit(9)
def test_jet_worked_values():
    u = DiffPoly.jet(("u1",), "u1")
    ux = DiffPoly.jet(("u1",), "u1", 1)
    assert total_derivative(u) == ux
    assert variational_derivative(ux ** 2 * Fraction(1, 2), "u1") == -DiffPoly.jet(("u1",), "u1", 2)


# 10 --------------------------------------------------------------------------


@crit(10)
@pytest.mark.parametrize("n", [2, 3, 4])
def test_constant_h_collapses(n):
    rnd = random.Random(n)
    H = [[Fraction(0)] * n for _ in range(n)]
    for i, j in product(range(n), repeat=2):
        if i <= j:
            H[i][j] = H[j][i] = Fraction(rnd.randint(-3, 3))
        if i == j:
            H[i][i] = Fraction(rnd.randint(1, 3))
    op = third_order_op(MetricRep(RMatrix(H), tuple(f"u{i}" for i in range(1, n + 1))))
    assert op.sub_leading_zero()


@crit(10)
@pytest.mark.parametrize("name", CORPUS)
def test_normal_form_corpus(name):
    f = corpus.FLAT_CORPUS[name]
    rng = random.Random(name)
    p = corpus.random_member(pencil_basis(f), rng)
    d = decompose_assembled(assemble(p, "y")).data
    nf = normal_form(d, build_h(d, *sample_m(f.n, rng, d)))
    assert nf.consistent
