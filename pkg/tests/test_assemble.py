import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from frobpen import corpus
from frobpen.assemble import ConditionsError, assemble, warped_sum_form
from frobpen.blocks import make_block, pencil_metric
from frobpen.exactcas import MPoly, RatFn, RMatrix
from frobpen.forest import ForestSpec, PencilSpec, pencil_basis
from frobpen.riemann import is_flat, poisson_compatible

X = [MPoly.var(f"x{i}") for i in range(1, 5)]


def evaluate(cs, t):
    acc = RatFn.zero()
    for c in reversed(cs):
        acc = acc * t + RatFn.coerce(c)
    return acc


def test_example1_chart_x():
    p = pencil_basis(corpus.example1()).generic()
    am = assemble(p, "x")
    x1, x2, x3, x4 = X
    P1, P2 = p.poly(1), p.poly(2)
    det_L1 = x1 * x2  # chi_L1(0) = det(-L1)
    expected = RMatrix.diag([
        evaluate(P1, x1) / (x1 - x2),
        evaluate(P1, x2) / (x2 - x1),
        evaluate(P2, x3) / (det_L1 * (x3 - x4)),
        evaluate(P2, x4) / (det_L1 * (x4 - x3)),
    ])
    assert am.g.contravariant == expected
    assert am.vars == ("x1", "x2", "x3", "x4")


def test_single_vertex_is_plain_pencil():
    p = PencilSpec(corpus.single(3), ((1, 2, 0, 1),))
    for chart in ("x", "y"):
        am = assemble(p, chart)
        assert am.warps == (RatFn.one(),)
    blk = make_block(3, ("y1_1", "y1_2", "y1_3"))
    assert assemble(p, "y").g == pencil_metric(blk, [1, 2, 0, 1])


def test_fig1_upper_warps():
    f = corpus.fig1_upper()
    am = assemble(pencil_basis(f).generic(), "x")
    x1, x2 = X[0], X[1]
    one = RatFn.one()
    assert am.warps[3] == one / ((2 - x1) * (4 - x2))
    assert am.warps[2] == one / ((2 - x1) * (3 - x2))
    assert am.warps[1] == one / (2 - x1)


def test_chart_y_block_entries_polynomial():
    am = assemble(pencil_basis(corpus.example1()).generic(), "y")
    chi = am.blocks[0].char_poly_at(0)
    assert am.warps[1] == RatFn.one() / chi
    for M, w in zip(am.block_metrics, am.warps):
        assert all((M[i, j] / w).is_polynomial() for i in range(M.rows) for j in range(M.cols))


def test_conditions_enforced():
    bad = PencilSpec(corpus.example1(), ((1, 1, 0, 0), (1, 0, 0, 1)))
    with pytest.raises(ConditionsError) as exc:
        assemble(bad)
    assert not exc.value.certificate
    am = assemble(bad, unchecked=True)
    assert not am.conditions


def test_degenerate_flag():
    am = assemble(PencilSpec(corpus.example1(), ((0, 0, 0, 0), (1, 0, 0, 0))), unchecked=True)
    assert am.degenerate


def test_warped_sum_forms():
    am = assemble(pencil_basis(corpus.example1()).generic(), "y")
    ws = warped_sum_form(am)
    assert ws.form == "g1 + (1/chi_L1(0))*g2"
    assert ws.expanded[2] == "(-1) / y1_2"
    assert warped_sum_form(assemble(PencilSpec(corpus.single(2), ((1,),)))).form == "g1"
    chain = ForestSpec.build([1, 1, 1], [(2, 1, 1), (3, 2, 2)])
    ws = warped_sum_form(assemble(pencil_basis(chain).generic(), "y"))
    assert ws.form == "g1 + (1/chi_L1(1))*g2 + (1/chi_L1(1))*(1/chi_L2(2))*g3"
    y11, y21 = MPoly.var("y1_1"), MPoly.var("y2_1")
    assert ws.expanded[3] == (RatFn.one() / ((1 - y11) * (2 - y21))).canonical()


def test_block_structure():
    am = assemble(pencil_basis(corpus.chain(2, 1, -1)).generic(), "y")
    G = am.g.contravariant
    assert G.is_symmetric()
    assert all(not G[i, j] for i in am.block_slice(1) for j in am.block_slice(2))
    assert am.operator().rows == 3


SMALL = ["single-2", "chain-1-2", "chain-2-1", "chain-1-1", "fig1-upper"]


@settings(max_examples=10)
@given(st.sampled_from(SMALL), st.integers(0, 10 ** 6))
def test_random_members_flat(name, seed):
    p = corpus.random_member(pencil_basis(corpus.FLAT_CORPUS[name]), random.Random(seed))
    assert is_flat(assemble(p, "x").g)


@settings(max_examples=5)
@given(st.sampled_from(["single-2", "chain-1-1", "chain-1-2"]), st.integers(0, 10 ** 6))
def test_random_pairs_compatible(name, seed):
    p, q = corpus.random_pair(corpus.FLAT_CORPUS[name], random.Random(seed))
    assert poisson_compatible(assemble(p, "x").g, assemble(q, "x").g)


def test_violating_member_curved():
    bad = PencilSpec(corpus.example1(), ((0, 1, 1, 0), (1, 0, 0, 2)))
    assert not is_flat(assemble(bad, "x", unchecked=True).g)
