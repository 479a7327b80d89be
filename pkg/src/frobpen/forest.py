"""Labeled directed rooted in-forests, the order they induce, and admissible pencils.

Vertices are blocks ``1..B`` with dimensions ``n_alpha``; an edge ``child -> parent``
carries a real mark ``lambda_child``.  ``alpha < beta`` in the forest order
(``alpha`` precedes ``beta``) when there is an oriented path from ``beta`` down to
``alpha``; labels must increase along every such path.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Any, Mapping, Sequence

from frobpen.certificate import Certificate
from frobpen.exactcas import MPoly, RatFn, parse_expr, rref, scalar, scalar_str

Coeff = Fraction | MPoly


class ForestError(ValueError):
    """Structurally invalid forest or pencil specification."""


class LabelingError(ForestError):
    def __init__(self, message: str, suggestion: dict[int, int]):
        super().__init__(message)
        self.suggestion = suggestion


_COMPLEX_RE = re.compile(r"(?<![A-Za-z_])[ijIJ](?![A-Za-z_0-9])")


def parse_mark(value) -> Fraction:
    """Edge marks are exact reals; anything complex-looking is rejected."""
    if isinstance(value, complex):
        raise ForestError("unsupported: complex block")
    if isinstance(value, str) and _COMPLEX_RE.search(value):
        raise ForestError("unsupported: complex block")
    try:
        return scalar(value)
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise ForestError(f"bad mark {value!r}: {exc}") from None


@dataclass(frozen=True)
class Block:
    id: int
    dim: int


@dataclass(frozen=True)
class Edge:
    child: int
    parent: int
    lam: Fraction


@dataclass(frozen=True)
class ForestSpec:
    blocks: tuple[Block, ...]
    edges: tuple[Edge, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "blocks", tuple(sorted(self.blocks, key=lambda b: b.id)))
        object.__setattr__(self, "edges", tuple(sorted(self.edges, key=lambda e: e.child)))
        ids = [b.id for b in self.blocks]
        if ids != list(range(1, len(ids) + 1)):
            raise ForestError(f"block ids must be 1..B, got {ids}")
        for b in self.blocks:
            if b.dim < 1:
                raise ForestError(f"block {b.id} has dimension {b.dim} < 1")
        seen: set[int] = set()
        for e in self.edges:
            if e.child not in ids or e.parent not in ids:
                raise ForestError(f"edge {e.child}->{e.parent} references an unknown block")
            if e.child == e.parent:
                raise ForestError(f"self-loop at block {e.child}")
            if e.child in seen:
                raise ForestError(f"block {e.child} has more than one outgoing edge")
            seen.add(e.child)
        parent = {e.child: e.parent for e in self.edges}
        for start in ids:
            v, steps = start, 0
            while v in parent:
                v = parent[v]
                steps += 1
                if steps > len(ids):
                    raise ForestError(f"cycle through block {start}")
        bad = [(e.parent, e.child) for e in self.edges if e.parent > e.child]
        if bad:
            sugg = suggest_labeling(ids, parent)
            raise LabelingError(
                f"labels must increase away from the roots; violated by {bad}; "
                f"relabel old->new {sugg}", sugg)

    @classmethod
    def build(cls, dims: Sequence[int], edges: Sequence[tuple[int, int, Any]] = ()) -> "ForestSpec":
        """``dims[k]`` is the dimension of block k+1; edges are (child, parent, mark)."""
        return cls(tuple(Block(i + 1, d) for i, d in enumerate(dims)),
                   tuple(Edge(c, p, parse_mark(l)) for c, p, l in edges))

    @property
    def B(self) -> int:
        return len(self.blocks)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(b.dim for b in self.blocks)

    @property
    def n(self) -> int:
        return sum(self.dims)

    def dim(self, alpha: int) -> int:
        return self.blocks[alpha - 1].dim

    def offset(self, alpha: int) -> int:
        return sum(self.dims[: alpha - 1])

    def parent(self, beta: int) -> int | None:
        for e in self.edges:
            if e.child == beta:
                return e.parent
        return None

    def mark(self, beta: int) -> Fraction:
        for e in self.edges:
            if e.child == beta:
                return e.lam
        raise KeyError(f"block {beta} is a root and carries no mark")

    def children(self, alpha: int) -> list[int]:
        return [e.child for e in self.edges if e.parent == alpha]

    def roots(self) -> list[int]:
        kids = {e.child for e in self.edges}
        return [b.id for b in self.blocks if b.id not in kids]

    def to_json(self) -> dict:
        return {
            "blocks": [{"id": b.id, "dim": b.dim} for b in self.blocks],
            "edges": [{"child": e.child, "parent": e.parent, "lambda": scalar_str(e.lam)} for e in self.edges],
        }


def suggest_labeling(ids: Sequence[int], parent: Mapping[int, int]) -> dict[int, int]:
    """Breadth-first relabeling from the roots, so parents get smaller labels."""
    kids: dict[int, list[int]] = {}
    for c, p in parent.items():
        kids.setdefault(p, []).append(c)
    order: list[int] = []
    frontier = [v for v in ids if v not in parent]
    while frontier:
        order.extend(frontier)
        frontier = sorted(c for v in frontier for c in kids.get(v, []))
    return {old: new for new, old in enumerate(order, start=1)}


@dataclass(frozen=True)
class DerivedOrder:
    """Matrices indexed ``[s-1][alpha-1]``."""

    precedes: tuple[tuple[bool, ...], ...]
    next: dict[int, int]
    cmat: tuple[tuple[int, ...], ...]
    lammat: tuple[tuple[Fraction | None, ...], ...]

    def prec(self, a: int, b: int) -> bool:
        return self.precedes[a - 1][b - 1]

    def c(self, s: int, alpha: int) -> int:
        return self.cmat[s - 1][alpha - 1]

    def lam(self, s: int, alpha: int) -> Fraction | None:
        return self.lammat[s - 1][alpha - 1]

    def pairs(self) -> list[tuple[int, int]]:
        B = len(self.precedes)
        return [(a, b) for a in range(1, B + 1) for b in range(1, B + 1) if self.prec(a, b)]


def derive_order(f: ForestSpec) -> DerivedOrder:
    B = f.B
    nxt = {e.child: e.parent for e in f.edges}
    prec = [[False] * B for _ in range(B)]
    lam: list[list[Fraction | None]] = [[None] * B for _ in range(B)]
    for alpha in range(1, B + 1):
        # walk from alpha down to its root; the mark used for ancestor s is the
        # mark of the vertex just above s on this path
        beta = alpha
        while beta in nxt:
            s = nxt[beta]
            prec[s - 1][alpha - 1] = True
            lam[s - 1][alpha - 1] = f.mark(beta)
            beta = s
    cmat = tuple(tuple(int(x) for x in row) for row in prec)
    return DerivedOrder(tuple(tuple(r) for r in prec), nxt, cmat, tuple(tuple(r) for r in lam))


# ---------------------------------------------------------------------------
# pencils


def _coeff(x) -> Coeff:
    if isinstance(x, MPoly):
        return x.constant_value() if x.is_constant() else x
    if isinstance(x, RatFn):
        if not x.is_polynomial():
            raise ForestError("pencil coefficients must be polynomial in the parameters")
        return _coeff(x.as_poly())
    if isinstance(x, str):
        try:
            return scalar(x)
        except (ValueError, ZeroDivisionError):
            return _coeff(parse_expr(x))
    return scalar(x)


def _is_zero(c: Coeff) -> bool:
    return c.is_zero() if isinstance(c, MPoly) else c == 0


def coeff_str(c: Coeff) -> str:
    return c.canonical() if isinstance(c, MPoly) else scalar_str(c)


@dataclass(frozen=True)
class PencilSpec:
    """A forest with one polynomial per block, coefficients low degree first.

    Coefficient vectors are padded with zeros to length ``n_alpha + 2``.
    """

    forest: ForestSpec
    coeffs: tuple[tuple[Coeff, ...], ...]

    def __post_init__(self):
        f = self.forest
        if len(self.coeffs) != f.B:
            raise ForestError(f"need one polynomial per block ({f.B}), got {len(self.coeffs)}")
        out = []
        for alpha, cs in enumerate(self.coeffs, start=1):
            cs = [_coeff(c) for c in cs]
            top = f.dim(alpha) + 2
            if len(cs) > top:
                if any(not _is_zero(c) for c in cs[top:]):
                    raise ForestError(f"deg P_{alpha} must be <= n_alpha + 1 = {top - 1}")
                cs = cs[:top]
            cs += [Fraction(0)] * (top - len(cs))
            out.append(tuple(cs))
        object.__setattr__(self, "coeffs", tuple(out))

    def poly(self, alpha: int) -> tuple[Coeff, ...]:
        return self.coeffs[alpha - 1]

    def with_coeffs(self, coeffs) -> "PencilSpec":
        return PencilSpec(self.forest, tuple(tuple(c) for c in coeffs))

    def parameters(self) -> tuple[str, ...]:
        names: set[str] = set()
        for cs in self.coeffs:
            for c in cs:
                if isinstance(c, MPoly):
                    names.update(c.variables)
        return tuple(sorted(names))

    def to_json(self) -> dict:
        d = self.forest.to_json()
        d["polys"] = [{"block": a, "coeffs": [coeff_str(c) for c in cs]}
                      for a, cs in enumerate(self.coeffs, start=1)]
        return d


def poly_at(cs: Sequence[Coeff], t: Fraction) -> Coeff:
    acc: Coeff = Fraction(0)
    for c in reversed(cs):
        acc = acc * t + c
    return acc


def dpoly_at(cs: Sequence[Coeff], t: Fraction) -> Coeff:
    acc: Coeff = Fraction(0)
    for k in range(len(cs) - 1, 0, -1):
        acc = acc * t + cs[k] * k
    return acc


def _value(c: Coeff) -> Coeff:
    if isinstance(c, MPoly) and c.is_constant():
        return c.constant_value()
    return c


def condition_violations(p: PencilSpec) -> list[dict]:
    """Every violated clause of (i)-(iii), with the blocks involved."""
    f = p.forest
    out: list[dict] = []
    for alpha in f.roots():
        top = p.poly(alpha)[f.dim(alpha) + 1]
        if not _is_zero(top):
            out.append({"clause": "i", "alpha": alpha, "value": coeff_str(_value(top))})
    for e in f.edges:
        alpha, beta, lam = e.parent, e.child, e.lam
        Pa = p.poly(alpha)
        v = poly_at(Pa, lam)
        if not _is_zero(v):
            out.append({"clause": "ii-root", "alpha": alpha, "beta": beta, "value": coeff_str(_value(v))})
        gap = p.poly(beta)[f.dim(beta) + 1] - dpoly_at(Pa, lam)
        if not _is_zero(gap):
            out.append({"clause": "ii-slope", "alpha": alpha, "beta": beta, "value": coeff_str(_value(gap))})
    for alpha in range(1, f.B + 1):
        kids = f.children(alpha)
        for i, beta in enumerate(kids):
            for gamma in kids[i + 1:]:
                lam = f.mark(beta)
                if lam != f.mark(gamma):
                    continue
                d = dpoly_at(p.poly(alpha), lam)
                if not _is_zero(d):
                    out.append({"clause": "iii", "alpha": alpha, "beta": beta, "gamma": gamma,
                                "value": coeff_str(_value(d))})
    return out


def degenerate_blocks(p: PencilSpec) -> list[int]:
    return [a for a in range(1, p.forest.B + 1) if all(_is_zero(c) for c in p.poly(a))]


def validate_conditions(p: PencilSpec) -> Certificate:
    """Conditions (i)-(iii); a pencil with some P_alpha = 0 passes but is flagged."""
    bad = condition_violations(p)
    degenerate = degenerate_blocks(p)
    info: dict[str, Any] = {"metric_degenerate": bool(degenerate)}
    if degenerate:
        info["zero_blocks"] = degenerate
    if bad:
        return Certificate.fail("conditions", {"violations": bad}, **info)
    return Certificate.ok("conditions", **info)


# ---------------------------------------------------------------------------
# the linear space of admissible coefficient vectors


def _layout(f: ForestSpec) -> list[tuple[int, int]]:
    return [(a, k) for a in range(1, f.B + 1) for k in range(f.dim(a) + 2)]


def condition_matrix(f: ForestSpec) -> list[list[Fraction]]:
    """Rows of the homogeneous linear system (i)-(iii) on concatenated coefficients."""
    lay = _layout(f)
    col = {ak: i for i, ak in enumerate(lay)}
    rows: list[list[Fraction]] = []

    def row(entries: Mapping[tuple[int, int], Fraction]):
        r = [Fraction(0)] * len(lay)
        for ak, v in entries.items():
            r[col[ak]] += v
        rows.append(r)

    for alpha in f.roots():
        row({(alpha, f.dim(alpha) + 1): Fraction(1)})
    for e in f.edges:
        alpha, beta, lam = e.parent, e.child, e.lam
        top = f.dim(alpha) + 2
        row({(alpha, k): lam ** k for k in range(top)})
        slope = {(alpha, k): -k * lam ** (k - 1) for k in range(1, top)}
        slope[(beta, f.dim(beta) + 1)] = Fraction(1)
        row(slope)
    for alpha in range(1, f.B + 1):
        kids = f.children(alpha)
        for i, beta in enumerate(kids):
            for gamma in kids[i + 1:]:
                lam = f.mark(beta)
                if lam == f.mark(gamma):
                    row({(alpha, k): k * lam ** (k - 1) for k in range(1, f.dim(alpha) + 2)})
    return rows


def block_letter(alpha: int, B: int) -> str:
    if B <= 26:
        return "abcdefghijklmnopqrstuvwxyz"[alpha - 1]
    return f"p{alpha}_"


def coeff_names(f: ForestSpec) -> list[str]:
    """``a0, a1, ...`` for block 1, ``b0, ...`` for block 2, and so on."""
    return [f"{block_letter(a, f.B)}{k}" for a, k in _layout(f)]


@dataclass(frozen=True)
class PencilBasis:
    forest: ForestSpec
    vectors: tuple[tuple[Fraction, ...], ...]
    free: tuple[str, ...]
    names: tuple[str, ...]

    @property
    def dimension(self) -> int:
        return len(self.vectors)

    def split(self, vec: Sequence) -> tuple[tuple, ...]:
        out, i = [], 0
        for d in self.forest.dims:
            out.append(tuple(vec[i:i + d + 2]))
            i += d + 2
        return tuple(out)

    def member(self, weights: Sequence) -> PencilSpec:
        """``sum_k weights[k] * vectors[k]`` as a pencil; weights may be symbolic."""
        if len(weights) != self.dimension:
            raise ValueError(f"need {self.dimension} weights")
        total = [Fraction(0)] * len(self.names)
        for w, v in zip(weights, self.vectors):
            w = _coeff(w)
            total = [t + w * x if x != 0 else t for t, x in zip(total, v)]
        return PencilSpec(self.forest, self.split(total))

    def generic(self) -> PencilSpec:
        """The member with the free coefficients as symbols (``a1, a2, b0, ...``)."""
        return self.member([MPoly.var(v) for v in self.free])

    def to_json(self) -> dict:
        return {"dimension": self.dimension, "free": list(self.free), "coefficients": list(self.names),
                "basis": [[scalar_str(x) for x in v] for v in self.vectors]}


def pencil_basis(f: ForestSpec) -> PencilBasis:
    """Exact basis of the coefficient vectors satisfying (i)-(iii).

    Columns are eliminated from the top coefficient of the last block downwards,
    so lower-order coefficients of earlier blocks stay free where possible
    (for a 1<-2 forest the free set is {a1, a2, b0, b1, b2}, not {..., b3}).
    """
    names = coeff_names(f)
    N = len(names)
    rows = condition_matrix(f)
    perm = list(range(N - 1, -1, -1))
    if rows:
        R, _, piv = rref([[r[c] for c in perm] for r in rows])
    else:
        R, piv = [], []
    free_cols = [j for j in range(N) if j not in set(piv)]
    vecs = []
    for fc in sorted(free_cols, key=lambda j: perm[j]):
        v = [Fraction(0)] * N
        v[perm[fc]] = Fraction(1)
        for i, pc in enumerate(piv):
            v[perm[pc]] = -R[i][fc]
        vecs.append(tuple(v))
    free = tuple(names[perm[j]] for j in sorted(free_cols, key=lambda j: perm[j]))
    return PencilBasis(f, tuple(vecs), free, tuple(names))


def pencil_dimension(f: ForestSpec) -> int:
    return pencil_basis(f).dimension


# ---------------------------------------------------------------------------
# shifts L_alpha -> L_alpha + c Id


def _shift_poly(cs: Sequence[Coeff], c: Fraction) -> tuple[Coeff, ...]:
    """Coefficients of ``t -> P(t - c)``."""
    from math import comb

    out: list[Coeff] = [Fraction(0)] * len(cs)
    for k, a in enumerate(cs):
        if _is_zero(a):
            continue
        for j in range(k + 1):
            out[j] = out[j] + a * (comb(k, j) * (-c) ** (k - j))
    return tuple(_value(x) for x in out)


def shift_block(p: PencilSpec, alpha: int, c) -> PencilSpec:
    """The isomorphic pencil with ``L_alpha`` replaced by ``L_alpha + c Id``.

    ``P_alpha`` becomes ``P_alpha(t - c)`` and the marks on edges entering
    ``alpha`` move by ``c``; all conditions (i)-(iii) are preserved.
    """
    c = scalar(c)
    f = p.forest
    edges = tuple(Edge(e.child, e.parent, e.lam + c if e.parent == alpha else e.lam) for e in f.edges)
    coeffs = list(p.coeffs)
    coeffs[alpha - 1] = _shift_poly(coeffs[alpha - 1], c)
    return PencilSpec(ForestSpec(f.blocks, edges), tuple(coeffs))


def normalize_shifts(p: PencilSpec) -> PencilSpec:
    """Shift every vertex with incoming edges so its smallest incoming mark is 0."""
    for alpha in range(1, p.forest.B + 1):
        kids = p.forest.children(alpha)
        if kids:
            m = min(p.forest.mark(b) for b in kids)
            if m != 0:
                p = shift_block(p, alpha, -m)
    return p


# ---------------------------------------------------------------------------
# JSON


def forest_from_json(d: Mapping) -> ForestSpec:
    try:
        blocks = []
        for b in d["blocks"]:
            if b.get("complex"):
                raise ForestError("unsupported: complex block")
            blocks.append(Block(int(b["id"]), int(b["dim"])))
        edges = tuple(Edge(int(e["child"]), int(e["parent"]), parse_mark(e["lambda"])) for e in d.get("edges", []))
    except (KeyError, TypeError) as exc:
        raise ForestError(f"malformed forest JSON: {exc!r}") from None
    return ForestSpec(tuple(blocks), edges)


def polys_from_json(d: Mapping, f: ForestSpec) -> tuple[tuple[Coeff, ...], ...]:
    coeffs: list = [None] * f.B
    try:
        for entry in d["polys"]:
            a = int(entry["block"])
            if not 1 <= a <= f.B:
                raise ForestError(f"polynomial for unknown block {a}")
            if coeffs[a - 1] is not None:
                raise ForestError(f"two polynomials for block {a}")
            coeffs[a - 1] = tuple(_coeff(c) for c in entry["coeffs"])
    except (KeyError, TypeError) as exc:
        raise ForestError(f"malformed polys JSON: {exc!r}") from None
    missing = [a + 1 for a, c in enumerate(coeffs) if c is None]
    if missing:
        raise ForestError(f"missing polynomials for blocks {missing}")
    return tuple(coeffs)


def pencil_from_json(d: Mapping) -> PencilSpec:
    f = forest_from_json(d)
    return PencilSpec(f, polys_from_json(d, f))


def load_spec(path: str | Path) -> PencilSpec | ForestSpec:
    """A spec file with ``polys`` gives a pencil, otherwise a bare forest."""
    try:
        d = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ForestError(f"invalid JSON in {path}: {exc}") from None
    return pencil_from_json(d) if "polys" in d else forest_from_json(d)


def dump_spec(obj: PencilSpec | ForestSpec, path: str | Path | None = None) -> str:
    text = json.dumps(obj.to_json(), indent=2)
    if path is not None:
        Path(path).write_text(text + "\n")
    return text
