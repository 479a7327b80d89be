"""Named forests used by the demos, the test-suite and the scripts."""
from __future__ import annotations

import random
from fractions import Fraction

from frobpen.forest import ForestSpec, PencilBasis, PencilSpec, degenerate_blocks, pencil_basis


def single(n: int) -> ForestSpec:
    return ForestSpec.build([n])


def chain(n1: int, n2: int, lam=0) -> ForestSpec:
    """Two blocks, block 2 attached to block 1 with mark ``lam``."""
    return ForestSpec.build([n1, n2], [(2, 1, lam)])


def example1() -> ForestSpec:
    return chain(2, 2, 0)


def fig1_upper(dims=(1, 1, 1, 1)) -> ForestSpec:
    """Blocks of sizes ``dims`` with edges 2 -> 1, 3 -> 2, 4 -> 2 with marks 2, 3, 4."""
    return ForestSpec.build(list(dims), [(2, 1, 2), (3, 2, 3), (4, 2, 4)])


def fig1_full() -> ForestSpec:
    return ForestSpec.build([1] * 6, [(2, 1, 2), (3, 2, 3), (4, 2, 4), (6, 5, 0)])


FLAT_CORPUS: dict[str, ForestSpec] = {
    "single-2": single(2),
    "single-3": single(3),
    "single-4": single(4),
    "chain-2-2": chain(2, 2, 0),
    "chain-1-2": chain(1, 2, 1),
    "chain-2-1": chain(2, 1, -1),
    "chain-1-1": chain(1, 1, Fraction(1, 2)),
    "fig1-upper": fig1_upper(),
}


def random_weights(dim: int, rng: random.Random, span: int = 3) -> list[Fraction]:
    return [Fraction(rng.randint(-span, span)) for _ in range(dim)]


def random_member(basis: PencilBasis, rng: random.Random, span: int = 3, tries: int = 100) -> PencilSpec:
    """A pencil member with no identically vanishing block (redrawn otherwise)."""
    for _ in range(tries):
        p = basis.member(random_weights(basis.dimension, rng, span))
        if not degenerate_blocks(p):
            return p
    raise ValueError("could not draw a nondegenerate member")


def random_pair(f: ForestSpec, rng: random.Random) -> tuple[PencilSpec, PencilSpec]:
    b = pencil_basis(f)
    return random_member(b, rng), random_member(b, rng)
