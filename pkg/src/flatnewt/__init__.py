"""Local minimality of flat profiles in Newton-type resistance problems on
convex planar domains."""

from .concave import HullFunction, WitnessParams, c1_norm, hull_function, oscillating_function, tent, witness
from .decide import classify_hessian, corollary_singular_count, decide_flat, hessian_at_zero
from .functional import Integrand, dirichlet_split, rayleigh_ratio, resistance
from .geom2d import Arc, Domain, Segment, build_domain, classify_vertical_support, normalize
from .kbound import Budget, divergence_certificate, estimate_K, first_proof_bound, second_proof_bound

__all__ = [
    "Arc", "Budget", "Domain", "HullFunction", "Integrand", "Segment", "WitnessParams",
    "build_domain", "c1_norm", "classify_hessian", "classify_vertical_support",
    "corollary_singular_count", "decide_flat", "dirichlet_split", "divergence_certificate",
    "estimate_K", "first_proof_bound", "hessian_at_zero", "hull_function", "normalize",
    "oscillating_function", "rayleigh_ratio", "resistance", "second_proof_bound", "tent", "witness",
]
