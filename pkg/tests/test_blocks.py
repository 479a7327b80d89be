from fractions import Fraction
from itertools import permutations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from frobpen.blocks import char_poly_coords, make_block, pencil_matrix, pencil_metric
from frobpen.exactcas import MPoly, RatFn, RMatrix
from tests.conftest import golden_blocks


def leibniz_det(M: RMatrix) -> RatFn:
    n = M.rows
    acc = RatFn.zero()
    for perm in permutations(range(n)):
        inv = sum(1 for i in range(n) for j in range(i + 1, n) if perm[i] > perm[j])
        term = RatFn.coerce(-1 if inv % 2 else 1)
        for i in range(n):
            term = term * M[i, perm[i]]
        acc = acc + term
    return acc


def u_block(n):
    return make_block(n, tuple(f"u{i}" for i in range(1, n + 1)))


def unit_poly(n, i):
    c = [0] * (n + 2)
    c[i] = 1
    return c


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_char_poly_of_companion(n):
    blk = make_block(n)
    t = MPoly.var("t")
    tI_L = RMatrix.identity(n).scale(t) - blk.L_y
    chi = t ** n
    for k, v in enumerate(blk.yvars, start=1):
        chi = chi - MPoly.var(v) * t ** (n - k)
    assert leibniz_det(tI_L) == chi
    assert blk.char_poly_at(t) == chi


def test_block_n2_chart_y():
    blk = make_block(2)
    y1, y2 = MPoly.var("y1"), MPoly.var("y2")
    assert blk.L_y == RMatrix([[y1, 1], [y2, 0]])
    assert blk.g0_y == RMatrix([[0, 1], [1, -y1]])


def test_block_n2_chart_x():
    x1, x2 = MPoly.var("x1"), MPoly.var("x2")
    one = RatFn.one()
    assert make_block(2).g_lc_x == RMatrix.diag([one / (x1 - x2), one / (x2 - x1)])


def test_block_n1():
    blk = make_block(1)
    assert blk.L_y == RMatrix([[MPoly.var("y1")]])
    assert blk.g0_y == RMatrix([[1]])


def test_block_dimension_checked():
    with pytest.raises(ValueError):
        make_block(0)


def test_pencil_examples():
    blk = make_block(2)
    y1, y2 = MPoly.var("y1"), MPoly.var("y2")
    assert pencil_metric(blk, [0, 1]).mat == RMatrix([[1, 0], [0, y2]])
    assert pencil_metric(blk, [0, 0, 1]).mat == RMatrix([[y1, y2], [y2, 0]])
    assert pencil_metric(blk, [1]).mat == blk.g0_y
    with pytest.raises(ValueError):
        pencil_metric(blk, [0, 0])
    with pytest.raises(ValueError):
        pencil_matrix(blk, [0, 0, 0, 0, 1])


@pytest.mark.parametrize("n", [2, 3, 4])
def test_golden_aff(n):
    """L, g0 and g_i = L^i g0 in canonical strings, byte for byte."""
    gold = golden_blocks(f"aff_n{n}.txt")
    blk = u_block(n)
    assert str(blk.L("y")).splitlines() == gold["L"]
    for i in range(n + 1):
        assert str(pencil_matrix(blk, unit_poly(n, i))).splitlines() == gold[f"g{i}"], i


def test_char_poly_coords():
    x1, x2, x3 = (MPoly.var(v) for v in ("x1", "x2", "x3"))
    assert char_poly_coords(make_block(2)) == [x1 + x2, -x1 * x2]
    assert char_poly_coords(make_block(1)) == [x1]
    s = char_poly_coords(make_block(3))
    assert s[2] == x1 * x2 * x3
    # against the expanded determinant of t Id - diag(x)
    t = MPoly.var("t")
    chi = leibniz_det(RMatrix.identity(3).scale(t) - make_block(3).L_x)
    assert chi == t ** 3 - s[0] * t ** 2 - s[1] * t - s[2]
    assert char_poly_coords(make_block(3), "y") == [MPoly.var(v) for v in ("y1", "y2", "y3")]


@pytest.mark.parametrize("n", [2, 3])
def test_chart_consistency(n):
    blk = make_block(n)
    sig = char_poly_coords(blk)
    J = RMatrix([[s.diff(v) for v in blk.xvars] for s in sig])
    to_x = dict(zip(blk.yvars, sig))
    assert J @ blk.g_lc_x @ J.T == blk.g0_y.substitute(to_x)
    assert J @ blk.L_x @ J.inverse() == blk.L_y.substitute(to_x)


@given(st.integers(1, 4).flatmap(
    lambda n: st.tuples(st.just(n), st.lists(st.integers(-3, 3), min_size=n + 2, max_size=n + 2))))
def test_pencil_symmetric(args):
    n, coeffs = args
    blk = make_block(n)
    assert blk.L_y @ blk.g0_y == blk.g0_y @ blk.L_y.T
    assert pencil_matrix(blk, coeffs).is_symmetric()
