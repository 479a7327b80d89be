"""Frobenius pencils of flat metrics and their non-homogeneous Poisson structures."""

from frobpen.assemble import ConditionsError, assemble
from frobpen.blocks import make_block, pencil_metric
from frobpen.exactcas import MPoly, RatFn, RMatrix, scalar, solve_linear
from frobpen.forest import ForestSpec, PencilSpec, pencil_basis, validate_conditions
from frobpen.frobalg import build_h, check_frobenius, check_pencil_compat
from frobpen.frobmap import decompose_assembled, frobenius_map
from frobpen.riemann import MetricRep, is_flat, poisson_compatible

__all__ = [
    "ConditionsError", "ForestSpec", "MPoly", "MetricRep", "PencilSpec", "RMatrix", "RatFn", "assemble",
    "build_h", "check_frobenius", "check_pencil_compat", "decompose_assembled", "frobenius_map", "is_flat",
    "make_block", "pencil_basis", "pencil_metric", "poisson_compatible", "scalar", "solve_linear",
    "validate_conditions",
]
