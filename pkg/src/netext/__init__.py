"""Numerical checks around extending the Mazur map from nets of l_2 balls.

The package builds 1-nets of Euclidean balls, evaluates the Mazur map on
truncated sup-products of l_2 and l_p, symmetrizes candidate extensions over
the hyperoctahedral group, estimates moduli of continuity, and runs the
choice-of-parameters argument that rules out uniformly continuous
extensions.
"""

from __future__ import annotations

from .errors import ContractError, InvalidInputError, NetextError, PluginContractError, ResourceError
from .extensions import (
    ExtensionCandidate,
    builtin_candidate,
    load_plugin_extension,
    natural_extension,
    nearest_point_extension,
    zero_extension,
)
from .mazur import holder_bound_suite, mazur, mazur_inverse, mazur_product, scalar_bound_suite
from .modulus import ModulusTable, estimate_gamma, estimate_holder_constant, estimate_modulus
from .nets import LatticeNet, NetHandle, ProductNet, build_greedy_net, build_lattice_net
from .spaces import ProductPoint, ProductShape, lq_norm, x_norm, y_norm
from .symmetrize import SignedPermutation, SymmetrizeConfig, extract_alpha, symmetrize
from .verifier import VerifierConfig, contradiction_pipeline

__version__ = "0.1.0"

__all__ = [
    "ContractError", "InvalidInputError", "NetextError", "PluginContractError", "ResourceError",
    "ExtensionCandidate", "builtin_candidate", "load_plugin_extension", "natural_extension",
    "nearest_point_extension", "zero_extension",
    "holder_bound_suite", "mazur", "mazur_inverse", "mazur_product", "scalar_bound_suite",
    "ModulusTable", "estimate_gamma", "estimate_holder_constant", "estimate_modulus",
    "LatticeNet", "NetHandle", "ProductNet", "build_greedy_net", "build_lattice_net",
    "ProductPoint", "ProductShape", "lq_norm", "x_norm", "y_norm",
    "SignedPermutation", "SymmetrizeConfig", "extract_alpha", "symmetrize",
    "VerifierConfig", "contradiction_pipeline",
]
