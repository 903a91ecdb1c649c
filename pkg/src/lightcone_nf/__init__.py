"""Exact formal normal forms of everywhere 2-nondegenerate real hypersurfaces in C^3.

The model is the tube over the light cone, v = P(z, zeta, zbar, zetabar).
Series carry exact Gaussian-rational coefficients and a weighted truncation.
"""

from .errors import (
    DecompositionFailure,
    DistinguishedPartError,
    NormalFormError,
    NotNormalizable,
    PerturbationViolation,
    SchemaError,
    TriangularityBreach,
    ValidationFailure,
)
from .hypersurface import (
    ComplexDefEq,
    Hypersurface,
    as_perturbation,
    levi_determinant,
    prenormalize,
    to_complex_defining,
    validate_2nondegenerate,
)
from .maps import MapJet, model_P, pushforward_phi
from .model import GroupElement, algebra_basis, apply_group, bracket, canonical_cone_check, tangency_defect
from .normalform import (
    NFReport,
    chain_data,
    extract_distinguished,
    homological_L,
    is_in_normal_form,
    normalize,
    project_to_N,
    solve_weight,
)
from .reconstruct import DistinguishedPart, reconstruct, residual_check
from .scalar import GaussQ
from .series import EXACT, HolJet, Trunc, WSeries, hol_substitute, taylor_delta, ws_substitute

__version__ = "0.1.0"

__all__ = [
    "GaussQ",
    "Trunc",
    "EXACT",
    "WSeries",
    "HolJet",
    "hol_substitute",
    "ws_substitute",
    "taylor_delta",
    "MapJet",
    "model_P",
    "pushforward_phi",
    "Hypersurface",
    "ComplexDefEq",
    "to_complex_defining",
    "levi_determinant",
    "validate_2nondegenerate",
    "prenormalize",
    "as_perturbation",
    "GroupElement",
    "algebra_basis",
    "bracket",
    "tangency_defect",
    "apply_group",
    "canonical_cone_check",
    "homological_L",
    "is_in_normal_form",
    "project_to_N",
    "solve_weight",
    "normalize",
    "NFReport",
    "extract_distinguished",
    "chain_data",
    "DistinguishedPart",
    "reconstruct",
    "residual_check",
    "NormalFormError",
    "ValidationFailure",
    "NotNormalizable",
    "PerturbationViolation",
    "DistinguishedPartError",
    "DecompositionFailure",
    "TriangularityBreach",
    "SchemaError",
]
