"""Compare the two-block (2, 2) metric in the stated coordinates and in (u1, u2, -u3, -u4)
against the hand-encoded printed matrix, entry by entry."""
from __future__ import annotations

from pathlib import Path

from frobpen.cli import example1_charts, example1_matrices
from frobpen.exactcas import parse_expr

PRINTED = Path(__file__).resolve().parents[1] / "tests" / "golden" / "example1_printed.txt"


def printed_matrix():
    rows = [line.split(";") for line in PRINTED.read_text().splitlines() if line.strip()]
    return [[parse_expr(e) for e in r] for r in rows]


def main() -> int:
    am, stated, flip = example1_charts()
    P = printed_matrix()
    for label, m in (("stated", stated), ("flipped", flip)):
        G = example1_matrices(am, m)["g"]
        bad = [(i + 1, j + 1) for i in range(4) for j in range(4) if G[i, j] != P[i][j]]
        print(f"{label:8} chart: {'matches' if not bad else 'differs at ' + str(bad)}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
