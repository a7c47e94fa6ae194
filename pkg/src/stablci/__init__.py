"""Smooth loci of parametric polynomial systems and conditioning of their real roots."""

__version__ = "0.1.0"

from .conditioning import ConditionReport, PerturbationSetup, condition_report, local_condition_number
from .errors import NoSmoothSubscheme, StablciError
from .family import Family, LocusReport, optimal_locus, smooth_locus, free_locus
from .groebner import GroebnerBasis, buchberger, elimination_ideal, groebner_basis, normal_form
from .polycore import DEGREVLEX, LEX, Poly, PolyRing, TermOrder
from .realcount import classify_region, isolate_real_roots, real_fiber_count, sturm_count
from .rescale import orthonormal_rescale, unitary_rescale
from .systemfile import SystemFile, load_system, parse_system

__all__ = [
    "ConditionReport",
    "DEGREVLEX",
    "Family",
    "GroebnerBasis",
    "LEX",
    "LocusReport",
    "NoSmoothSubscheme",
    "PerturbationSetup",
    "Poly",
    "PolyRing",
    "StablciError",
    "SystemFile",
    "TermOrder",
    "buchberger",
    "classify_region",
    "condition_report",
    "elimination_ideal",
    "free_locus",
    "groebner_basis",
    "isolate_real_roots",
    "load_system",
    "local_condition_number",
    "normal_form",
    "optimal_locus",
    "orthonormal_rescale",
    "parse_system",
    "real_fiber_count",
    "smooth_locus",
    "sturm_count",
    "unitary_rescale",
]
