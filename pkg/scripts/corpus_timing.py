"""Time flatness and compatibility certificates over the fixed corpus."""
from __future__ import annotations

import argparse
import random
import time

from frobpen import corpus
from frobpen.assemble import assemble
from frobpen.forest import pencil_basis
from frobpen.riemann import is_flat, poisson_compatible


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--chart", default="x", choices=("x", "y"))
    ap.add_argument("--symbolic", action="store_true", help="use the generic member instead of a seeded one")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    rng = random.Random(args.seed)
    ok = True
    for name, f in corpus.FLAT_CORPUS.items():
        b = pencil_basis(f)
        p = b.generic() if args.symbolic else corpus.random_member(b, rng)
        q = corpus.random_member(b, rng)
        t0 = time.perf_counter()
        g = assemble(p, args.chart).g
        flat = is_flat(g)
        t1 = time.perf_counter()
        comp = poisson_compatible(g, assemble(q, args.chart).g)
        t2 = time.perf_counter()
        ok &= flat.passed and comp.passed
        print(f"{name:12} n={f.n}  flat {flat.status} {t1 - t0:6.2f}s  compat {comp.status} {t2 - t1:6.2f}s")
    return 0 if ok else 1


if __name__ == "__main__":
    raise SystemExit(main())
