"""Green-function kernels for scattered-data interpolation.

Kernels are Green functions of differential (or pseudo-differential)
operators L = P*' P. The package fits kernel-plus-polynomial interpolants,
builds the associated positive definite reproducing kernel, and checks
native-space semi-norms against the operator energies sum_j int |P_j s|^2.
"""

from greenkernel.errors import GreenKernelError, NumericalError, SingularityError, ValidationError
from greenkernel.interpolation import (
    Dataset,
    GramSystem,
    InterpolationModel,
    cpd_certificate,
    fit,
    gram_seminorm,
    loocv_error,
    loocv_scale_sweep,
    orthogonality_check,
)
from greenkernel.kernels import KERNEL_NAMES, GreenKernel, default_catalog
from greenkernel.polyspace import PolySpace, UnisolventSet, is_unisolvent, select_unisolvent
from greenkernel.rkhs import RKKernel, build_rk, check_equivalence, check_pd
from greenkernel.sobolev import QuadSpec, SeminormReport, compare_scaled_spaces, hp_seminorm
from greenkernel.symbols import OperatorVector, check_symbol_hypotheses, estimate_cpd_order, operator_for_kernel

__all__ = [
    "KERNEL_NAMES",
    "Dataset",
    "GramSystem",
    "GreenKernel",
    "GreenKernelError",
    "InterpolationModel",
    "NumericalError",
    "OperatorVector",
    "PolySpace",
    "QuadSpec",
    "RKKernel",
    "SeminormReport",
    "SingularityError",
    "UnisolventSet",
    "ValidationError",
    "build_rk",
    "check_equivalence",
    "check_pd",
    "check_symbol_hypotheses",
    "compare_scaled_spaces",
    "cpd_certificate",
    "default_catalog",
    "estimate_cpd_order",
    "fit",
    "gram_seminorm",
    "hp_seminorm",
    "is_unisolvent",
    "loocv_error",
    "loocv_scale_sweep",
    "operator_for_kernel",
    "orthogonality_check",
    "select_unisolvent",
]
