"""Which sign of the slope condition makes the two-block pencil Frobenius?

For a 1 <- 2 forest with mark 0 the child's top coefficient is tied to the
parent's slope at the mark.  Both signs are tried with symbolic coefficients;
affine matching in the candidate coordinates succeeds only for one of them.
"""
from __future__ import annotations

import argparse

from frobpen import corpus
from frobpen.assemble import assemble
from frobpen.forest import PencilSpec, dpoly_at, pencil_basis
from frobpen.frobmap import decompose_assembled


def flipped(p: PencilSpec) -> PencilSpec:
    f = p.forest
    child = list(p.poly(2))
    child[f.dim(2) + 1] = -dpoly_at(p.poly(1), f.mark(2))
    return p.with_coeffs((p.poly(1), tuple(child)))


def run(n1: int, n2: int, lam=0) -> tuple[bool, bool]:
    p = pencil_basis(corpus.chain(n1, n2, lam)).generic()
    plus = decompose_assembled(assemble(p, "y")).ok
    minus = decompose_assembled(assemble(flipped(p), "y", unchecked=True)).ok
    return plus, minus


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--max-n1", type=int, default=3)
    ap.add_argument("--max-n2", type=int, default=2)
    args = ap.parse_args(argv)
    print("n1 n2  +slope  -slope")
    consistent = True
    for n1 in range(1, args.max_n1 + 1):
        for n2 in range(1, args.max_n2 + 1):
            plus, minus = run(n1, n2)
            consistent &= plus and not minus
            print(f"{n1:2} {n2:2}  {'affine' if plus else 'fails':6}  {'affine' if minus else 'fails':6}")
    print("plus sign is the right one" if consistent else "mixed outcome")
    return 0 if consistent else 1


if __name__ == "__main__":
    raise SystemExit(main())
