"""Numerical laboratory for structured integral operators of Dirac-system inverse problems."""
from .discretization import (
    DiscreteMap,
    DiscreteOperator,
    Grid,
    StructuredOperator,
    Variant,
    make_grid,
    op_norm,
    project_operator,
    weighted_adjoint,
)
from .matfun import Family, MatrixFunction, MatrixFunctionSpec, eval_phi, eval_phi_deriv, make_family
from .operators import (
    build_A,
    build_A_star_direct,
    build_flip_conjugation,
    build_product_kernel_operator,
    build_Pi,
    build_S,
    kernel_s,
    rhs_identity,
    signature_matrix,
    split_components,
)

__version__ = "0.1.0"
