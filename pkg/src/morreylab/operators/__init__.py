"""Integral operators on grid data."""

from .backend import BACKEND, get_backend
from .bilinear import (
    ExtendedTerms,
    averaging_operator,
    bilinear_commutator,
    bilinear_commutator_field,
    bilinear_fractional,
    extended_bilinear,
    extended_bilinear_commutator,
    extended_bilinear_terms,
    maximal_truncated,
    pair_sum,
    truncated_bilinear,
    truncated_bilinear_field,
)
from .kernels import (
    BilinearKernel,
    constant_rough_kernel,
    cz_kernel,
    fractional_kernel,
    odd_rough_kernel,
)
from .linear import (
    hl_maximal,
    linear_commutator,
    node_balls,
    riesz_potential,
    sharp_maximal,
    singular_integral,
)
