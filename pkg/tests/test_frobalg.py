import random
from fractions import Fraction
from itertools import product

import pytest
from hypothesis import given
from hypothesis import strategies as st

from frobpen import corpus
from frobpen.assemble import assemble
from frobpen.blocks import h_partner_pattern, make_block
from frobpen.exactcas import MPoly, RMatrix, matrix_rank
from frobpen.forest import PencilSpec, pencil_basis
from frobpen.frobalg import (AlgebraWithForms, FrobeniusTriple, aff_flip_basis, algebra_a, algebra_b,
                             algebra_from_mapping, build_h, catalogue, change_basis, check_frobenius,
                             check_pencil_compat, partner_kernel, same_structure, sample_m)
from frobpen.frobmap import decompose_assembled

F = Fraction


def aff_data(n, coeffs):
    return decompose_assembled(assemble(PencilSpec(corpus.single(n), (tuple(coeffs),)))).data


def brute_force_violations(alg, form):
    """Associativity on basis triples via explicit products, Frobenius via b(x*y, z) = b(x, y*z)."""
    n = alg.n
    e = [[F(int(i == k)) for k in range(n)] for i in range(n)]
    bad = 0
    for i, j, r in product(range(n), repeat=3):
        left = alg.multiply(alg.multiply(e[i], e[j]), e[r])
        right = alg.multiply(e[i], alg.multiply(e[j], e[r]))
        bad += sum(1 for x, y in zip(left, right) if x != y)

    def pair(x, y):
        return sum(x[p] * form[p][q] * y[q] for p in range(n) for q in range(n))

    for i, j, r in product(range(n), repeat=3):
        if pair(alg.multiply(e[i], e[j]), e[r]) != pair(e[i], alg.multiply(e[j], e[r])):
            bad += 1
    return bad


# ---------------------------------------------------------------------------
# catalogue and axioms


def test_catalogue_products():
    b3 = algebra_b(3)
    assert b3.product(1, 1) == [0, 0, 1]
    assert b3.product(0, 1) == [0, 1, 0]
    a2 = algebra_a(2)
    assert a2.product(0, 1) == [0, 0]
    assert a2.product(0, 0) == [0, 1]


@pytest.mark.parametrize("kind,dims", [("a", 1), ("a", 3), ("b", 1), ("b", 4), ("direct_sum", (2, 1)),
                                       ("direct_sum", (0, 2)), ("direct_sum", (3, 0))])
def test_catalogue_is_frobenius(kind, dims):
    alg = catalogue(kind, dims)
    assert check_frobenius(alg)
    assert brute_force_violations(alg, alg.forms["b"]) == 0


def test_zero_algebra():
    alg = AlgebraWithForms([[[0] * 3 for _ in range(3)] for _ in range(3)], {"b": [[1, 0, 0], [0, 2, 0], [0, 0, 0]]})
    assert check_frobenius(alg)


def test_corrupted_algebra():
    alg = algebra_a(2)
    alg.a[0][0][1] = alg.a[0][1][0] = F(1)
    cert = check_frobenius(alg)
    assert not cert
    assert cert.witness["count"] == 6
    assert brute_force_violations(alg, alg.forms["b"]) > 0
    laws = {v["law"] for v in cert.witness["violations"]}
    assert laws == {"associativity", "frobenius"}


def test_rescaling_corruption_stays_frobenius():
    # changing a^{11}_2 of a_2 only rescales e1*e1 and keeps the axioms
    alg = algebra_a(2)
    alg.a[1][0][0] = F(5)
    assert check_frobenius(alg)


@st.composite
def commutative_algebras(draw, n=2):
    products = {}
    for i in range(1, n + 1):
        for j in range(i, n + 1):
            products[(i, j)] = {k: draw(st.integers(-1, 1)) for k in range(1, n + 1)}
    return algebra_from_mapping(n, products)


@given(commutative_algebras(), st.lists(st.integers(-2, 2), min_size=3, max_size=3))
def test_checker_matches_brute_force(alg, b):
    form = [[b[0], b[1]], [b[1], b[2]]]
    assert bool(check_frobenius(alg, form)) == (brute_force_violations(alg, form) == 0)


def test_symmetry_enforced():
    with pytest.raises(ValueError):
        AlgebraWithForms([[[0, 1], [0, 0]], [[0, 0], [0, 0]]])


@pytest.mark.parametrize("n", [2, 3, 4])
def test_aff_algebras_are_frobenius(n):
    for i in range(n + 1):
        coeffs = [0] * (i + 1)
        coeffs[i] = 1
        d = aff_data(n, coeffs)
        assert check_frobenius(AlgebraWithForms.from_data(d)), (n, i)


def test_aff_g1_isomorphic_to_direct_sum():
    alg = AlgebraWithForms.from_data(aff_data(3, (0, 1)))
    flipped = change_basis(alg, aff_flip_basis(3, 1))
    assert same_structure(flipped, catalogue("direct_sum", (2, 1)))
    assert not same_structure(alg, catalogue("direct_sum", (2, 1)))


def test_change_basis_round_trip():
    alg = algebra_b(3)
    P = [[1, 2, 0], [0, 1, 0], [1, 0, 1]]
    Pi = RMatrix(P).inverse()
    back = change_basis(change_basis(alg, P), [[Pi[i, j].constant_value() for j in range(3)] for i in range(3)])
    assert same_structure(back, alg)
    assert back.forms["b"] == alg.forms["b"]


# ---------------------------------------------------------------------------
# constant partners


def test_build_h_aff_g2():
    d = aff_data(2, (0, 0, 1))
    m1, m2 = MPoly.var("m1"), MPoly.var("m2")
    h = build_h(d, MPoly.var("m0"), [m1, m2])
    assert h.entries == [[m1, m2], [m2, 0]]
    assert h.det == -m2 ** 2


def test_build_h_constant_part():
    d = aff_data(3, (1, 2))
    h = build_h(d, 1, [0, 0, 0])
    assert h.entries == d.b
    assert not h.degenerate


def test_build_h_degenerate_flag():
    d = aff_data(2, (0, 0, 1))
    assert build_h(d, 7, [1, 0]).degenerate
    with pytest.raises(ValueError):
        build_h(d, 1, [1])


@pytest.mark.parametrize("n,coeffs", [(2, (1,)), (2, (0, 1)), (2, (2, -1, 3)), (3, (1, 0, 1)), (3, (0, 2, 0, 1))])
def test_build_h_matches_g0_substitution(n, coeffs):
    d = aff_data(n, coeffs)
    blk = make_block(n)
    rnd = random.Random(n)
    for _ in range(3):
        m0 = F(rnd.randint(1, 4))
        m = [F(rnd.randint(-3, 3)) for _ in range(n)]
        pattern = h_partner_pattern(blk, list(coeffs) + [0] * (n + 2 - len(coeffs)), m0, m)
        assert build_h(d, m0, m).matrix() == pattern


def test_sample_m_non_degenerate(rng):
    d = aff_data(3, (0, 0, 1))
    m0, m = sample_m(3, rng, d)
    assert not build_h(d, m0, m).degenerate


# ---------------------------------------------------------------------------
# pencil compatibility


@pytest.mark.parametrize("n", [2, 3])
def test_aff_pairs_compatible(n, rng):
    # both partners come from the same (m0, m)
    members = [aff_data(n, [0] * i + [1]) for i in range(n + 1)]
    for d1, d2 in zip(members, members[1:]):
        m0, m = sample_m(n, rng)
        assert check_pencil_compat((d1, build_h(d1, m0, m)), (d2, build_h(d2, m0, m)))


def test_self_pair_compatible(rng):
    d = aff_data(3, (1, 0, 2))
    h = build_h(d, *sample_m(3, rng))
    assert check_pencil_compat((d, h), (d, h))


def test_example1_pairs_compatible(rng):
    f = corpus.example1()
    for _ in range(3):
        p, q = corpus.random_pair(f, rng)
        d1 = decompose_assembled(assemble(p)).data
        d2 = decompose_assembled(assemble(q)).data
        m0, m = sample_m(4, rng)
        assert check_pencil_compat((d1, build_h(d1, m0, m)), (d2, build_h(d2, m0, m)))


def test_incompatible_pair_reports_family():
    t1 = FrobeniusTriple(algebra_a(2).a, algebra_a(2).forms["b"], [[1, 0], [0, 0]])
    bad = algebra_a(2)
    bad.a[0][0][1] = bad.a[0][1][0] = F(1)
    t2 = FrobeniusTriple(bad.a, [[0, 1], [1, 0]], [[0, 0], [0, 0]])
    cert = check_pencil_compat(t1, t2)
    assert not cert
    assert cert.witness["family"] in range(1, 10) and len(cert.witness["indices"]) in (3, 4)


def test_sum_closure(rng):
    d1, d2 = aff_data(3, (0, 1)), aff_data(3, (0, 0, 1))
    m0, m = sample_m(3, rng)
    A = AlgebraWithForms.from_data(d1, build_h(d1, m0, m))
    B = AlgebraWithForms.from_data(d2, build_h(d2, m0, m))
    assert check_frobenius(A + B)


def test_bilinearity(rng):
    d1, d2 = aff_data(2, (1,)), aff_data(2, (0, 1))
    m0, m = sample_m(2, rng)
    t1 = FrobeniusTriple.of(d1, build_h(d1, m0, m))
    t2 = FrobeniusTriple.of(d2, build_h(d2, m0, m))
    for lam in (F(2), F(-1, 3)):
        assert check_pencil_compat(t1.scaled(lam), t2)
        assert check_pencil_compat(t1, t2.scaled(lam))


def test_partner_kernel_contains_built_partners(rng):
    d1, d2 = aff_data(2, (1,)), aff_data(2, (0, 1))
    basis = partner_kernel(d1, d2)
    assert basis
    m0, m = sample_m(2, rng)
    h1, h2 = build_h(d1, m0, m).entries, build_h(d2, m0, m).entries
    vecs = [[H[i][j] for H in pair for i in range(2) for j in range(i, 2)] for pair in basis]
    target = [H[i][j] for H in (h1, h2) for i in range(2) for j in range(i, 2)]
    from frobpen.exactcas import matrix_rank
    assert matrix_rank(vecs + [target]) == len(vecs)
    for H, Hb in basis:
        assert check_pencil_compat(FrobeniusTriple(d1.a, d1.b, H), FrobeniusTriple(d2.a, d2.b, Hb))


def test_partner_kernel_needs_numbers():
    d = decompose_assembled(assemble(pencil_basis(corpus.example1()).generic())).data
    with pytest.raises(ValueError):
        partner_kernel(d, d)


def test_independent_partners_incompatible():
    d1, d2 = aff_data(2, (1,)), aff_data(2, (0, 1))
    assert not check_pencil_compat((d1, build_h(d1, 1, [0, 0])), (d2, build_h(d2, 0, [1, 0])))
