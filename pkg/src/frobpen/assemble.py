"""Multi-block metrics: warped block-diagonal sums of AFF pencils over a forest.

Block ``alpha`` contributes ``f_alpha * P_alpha(L_alpha) g0_alpha`` with the warp

    f_alpha = prod_{s precedes alpha} 1 / chi_{L_s}(lambda_{s alpha}),

``chi_L(t) = det(t Id - L)`` evaluated from the block's own coordinates.  Chart
``y`` uses ``y{alpha}_{k}`` (characteristic coefficients per block), chart ``x``
uses global eigenvalue coordinates ``x1..xn``.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from frobpen.blocks import AFFBlock, chart_name, make_block, pencil_matrix
from frobpen.certificate import Certificate
from frobpen.exactcas import RatFn, RMatrix, ZeroDivision, scalar_str
from frobpen.forest import DerivedOrder, ForestSpec, PencilSpec, derive_order, validate_conditions
from frobpen.riemann import MetricRep


class ConditionsError(ValueError):
    def __init__(self, certificate: Certificate):
        super().__init__(f"pencil violates conditions (i)-(iii): {certificate.witness}")
        self.certificate = certificate


def y_names(alpha: int, dim: int) -> tuple[str, ...]:
    return tuple(f"y{alpha}_{k}" for k in range(1, dim + 1))


def x_names(f: ForestSpec, alpha: int) -> tuple[str, ...]:
    off = f.offset(alpha)
    return tuple(f"x{off + k}" for k in range(1, f.dim(alpha) + 1))


def forest_blocks(f: ForestSpec) -> tuple[AFFBlock, ...]:
    return tuple(make_block(f.dim(a), y_names(a, f.dim(a)), x_names(f, a)) for a in range(1, f.B + 1))


def warp_factor(blocks, order: DerivedOrder, alpha: int, chart: str) -> RatFn:
    acc = RatFn.one()
    for s in range(1, alpha):
        if order.c(s, alpha):
            chi = blocks[s - 1].char_poly_at(order.lam(s, alpha), chart)
            if chi.is_zero():
                raise ZeroDivision(f"chi_L{s}({order.lam(s, alpha)}) vanishes identically")
            acc = acc / chi
    return acc


@dataclass(frozen=True, eq=False)
class AssembledMetric:
    spec: PencilSpec
    chart: str
    g: MetricRep
    warps: tuple[RatFn, ...]
    blocks: tuple[AFFBlock, ...]
    order: DerivedOrder
    block_metrics: tuple[RMatrix, ...]
    conditions: Certificate

    @property
    def vars(self) -> tuple[str, ...]:
        return self.g.vars

    @property
    def degenerate(self) -> bool:
        return any(m.is_zero() for m in self.block_metrics)

    def operator(self) -> RMatrix:
        """``L = diag(L_1, ..., L_B)`` in the same chart."""
        return RMatrix.block_diag([b.L(self.chart) for b in self.blocks])

    def block_slice(self, alpha: int) -> range:
        off = self.spec.forest.offset(alpha)
        return range(off, off + self.spec.forest.dim(alpha))

    def to_json(self) -> dict:
        return self.g.to_json()


def assemble(spec: PencilSpec, chart: str = "y", *, unchecked: bool = False) -> AssembledMetric:
    """Build ``g = diag(P_alpha(L_alpha) f_alpha g0_alpha)`` in chart ``x`` or ``y``.

    Raises :class:`ConditionsError` unless (i)-(iii) hold or ``unchecked`` is set
    (used to build counterexamples).
    """
    chart = chart_name(chart)
    cert = validate_conditions(spec)
    if not cert and not unchecked:
        raise ConditionsError(cert)
    f = spec.forest
    order = derive_order(f)
    blocks = forest_blocks(f)
    warps, mats = [], []
    for alpha in range(1, f.B + 1):
        w = warp_factor(blocks, order, alpha, chart)
        warps.append(w)
        mats.append(pencil_matrix(blocks[alpha - 1], spec.poly(alpha), chart).scale(w))
    vars_ = tuple(v for b in blocks for v in b.vars(chart))
    g = MetricRep(RMatrix.block_diag(mats), vars_, chart)
    return AssembledMetric(spec, chart, g, tuple(warps), blocks, order, tuple(mats), cert)


@dataclass(frozen=True)
class WarpedSum:
    form: str
    factors: dict[int, str]
    expanded: dict[int, str]

    def __str__(self):
        lines = [f"g = {self.form}"]
        for a, s in self.expanded.items():
            if a in self.factors:
                lines.append(f"  {self.factors[a]} = {s}")
        return "\n".join(lines)


def warped_sum_form(am: AssembledMetric) -> WarpedSum:
    """``g1 + (1/chi_L1(0))*g2 + ...`` with every factor also written out."""
    f = am.spec.forest
    order = am.order
    terms, factors, expanded = [], {}, {}
    for alpha in range(1, f.B + 1):
        parts = [f"(1/chi_L{s}({scalar_str(Fraction(order.lam(s, alpha)))}))"
                 for s in range(1, alpha) if order.c(s, alpha)]
        if parts:
            factors[alpha] = "*".join(parts)
            terms.append(f"{factors[alpha]}*g{alpha}")
        else:
            terms.append(f"g{alpha}")
        expanded[alpha] = am.warps[alpha - 1].canonical()
    return WarpedSum(" + ".join(terms), factors, expanded)
