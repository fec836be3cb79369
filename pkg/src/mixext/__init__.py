"""Spline-based extension operators for functions of mixed smoothness on the unit cube.

Modules
-------
index       multi-indices, integer boxes, dyadic cells
splines     cardinal B-splines, refinement masks, dyadic shifts
polyproj    orthonormal bases, local L2 projectors, axis operators
piecewise   spline-blended polynomial families
quasiinterp quasi-interpolants on the cube and their details
extension   whole-space details, boundary-class checks, the truncated extension
analysis    mixed differences, moduli of continuity, Besov/Nikolskii norms
catalog     test functions with known derivatives
config, verify, cli
            experiment configuration, verification suites, command line
"""
from ._kernels import BACKEND
from .analysis import (
    SmoothnessParams,
    besov_norm_ell,
    besov_norm_prime,
    derivative_besov_norm,
    l_of_alpha,
    mixed_difference,
    modulus_avg,
    modulus_sup,
    nikolskii_norm_prime,
)
from .extension import (
    ExtensionResult,
    bernstein_experiment,
    class_check_Pprime,
    extend,
    global_detail,
    global_local_projector,
    zero_extend,
)
from .index import Box, IntBox, dyadic_cell, indicator_vector, min_coord, support_set
from .piecewise import PiecewisePoly
from .polyproj import TensorPoly, masked_project, ortho_basis, project, tensor_apply
from .quasiinterp import derivative_level_bound_report, index_clamp, local_projector_S, quasi_interp_E, telescoped_E
from .splines import eval_g, eval_psi, interacting_indices, refinement_coeffs, support_g

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "Box",
    "ExtensionResult",
    "IntBox",
    "PiecewisePoly",
    "SmoothnessParams",
    "TensorPoly",
    "bernstein_experiment",
    "besov_norm_ell",
    "besov_norm_prime",
    "class_check_Pprime",
    "derivative_besov_norm",
    "derivative_level_bound_report",
    "dyadic_cell",
    "eval_g",
    "eval_psi",
    "extend",
    "global_detail",
    "global_local_projector",
    "index_clamp",
    "indicator_vector",
    "interacting_indices",
    "l_of_alpha",
    "local_projector_S",
    "masked_project",
    "min_coord",
    "mixed_difference",
    "modulus_avg",
    "modulus_sup",
    "nikolskii_norm_prime",
    "ortho_basis",
    "project",
    "quasi_interp_E",
    "refinement_coeffs",
    "support_g",
    "support_set",
    "telescoped_E",
    "tensor_apply",
    "zero_extend",
]
