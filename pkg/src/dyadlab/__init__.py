"""Numerical laboratory for dyadic harmonic analysis on sampled windows.

Shifted dyadic grids, cell-constant sampled functions, Young functions
with Luxemburg norms, fractional maximal operators and discrete Riesz
potentials, stopping-time sparse families, two-weight joint constants,
and operator-norm lower-bound estimation, together with reproductions of
the standing example constructions and a batch CLI (``dyadlab``).

The subpackages stay importable on their own; this module re-exports the
working vocabulary so interactive use can start from ``import dyadlab``.
"""

from .constants import (
    ConstantReport,
    WeightPair,
    ainfty_exp,
    ainfty_m,
    ap_constant,
    apq_alpha,
    apq_alpha_constant,
    apq_bump,
    md_sp_testing,
    mixed_one_sup,
    outer_testing_constant,
    sawyer_maximal_testing,
)
from .grid import (
    Box,
    DyadicCube,
    GridFamily,
    all_shifts,
    ancestors,
    box_from_obj,
    box_to_obj,
    cube_from_obj,
    cube_to_obj,
    parent,
    realize,
    shifted_grids,
)
from .normest import (
    NormEstimate,
    TestFamily,
    bump_bound_check,
    equivalence_report,
    estimate_norm,
    log_ainfty_check,
    orlicz_norm_quadrature,
    potential_testing_chain,
    unit_pair,
)
from .operators import (
    bilinear_maximal,
    dyadic_frac_maximal,
    dyadic_riesz,
    frac_maximal,
    geometric_maximal,
    orlicz_maximal,
    outer_riesz,
    riesz_potential_1d,
    weighted_dyadic_maximal,
)
from .orlicz import (
    CONVERGENT,
    DIVERGENT,
    INCONCLUSIVE,
    BpReport,
    NumericConjugate,
    PowerLog,
    PowerScaled,
    YoungFunction,
    borderline,
    bp_classify,
    log_bump,
    luxemburg,
    orlicz_holder_check,
    power,
    power_log,
    rescale_identity_check,
)
from .pairs import (
    build_E,
    case1_pair,
    case2_divergence,
    classical_pair,
    factored_pair,
    verify_E_maximal,
)
from .sampled import (
    ExponentTuple,
    SampledFunction,
    average,
    integrate,
    lp_norm,
    make_exponents,
    parse_rational,
    weak_lq_norm,
    weighted_measure,
)
from .sparse import (
    CarlesonSequence,
    SparseFamily,
    StoppingCube,
    build_sparse,
    carleson_embed_check,
    certify_carleson,
    sparse_operator,
)

__version__ = "0.1.0"

__all__ = [
    "Box",
    "BpReport",
    "CONVERGENT",
    "CarlesonSequence",
    "ConstantReport",
    "DIVERGENT",
    "DyadicCube",
    "ExponentTuple",
    "GridFamily",
    "INCONCLUSIVE",
    "NormEstimate",
    "NumericConjugate",
    "PowerLog",
    "PowerScaled",
    "SampledFunction",
    "SparseFamily",
    "StoppingCube",
    "TestFamily",
    "WeightPair",
    "YoungFunction",
    "ainfty_exp",
    "ainfty_m",
    "all_shifts",
    "ancestors",
    "ap_constant",
    "apq_alpha",
    "apq_alpha_constant",
    "apq_bump",
    "average",
    "bilinear_maximal",
    "borderline",
    "box_from_obj",
    "box_to_obj",
    "bp_classify",
    "build_E",
    "build_sparse",
    "bump_bound_check",
    "carleson_embed_check",
    "case1_pair",
    "case2_divergence",
    "certify_carleson",
    "classical_pair",
    "cube_from_obj",
    "cube_to_obj",
    "dyadic_frac_maximal",
    "dyadic_riesz",
    "equivalence_report",
    "estimate_norm",
    "factored_pair",
    "frac_maximal",
    "geometric_maximal",
    "integrate",
    "log_ainfty_check",
    "log_bump",
    "lp_norm",
    "luxemburg",
    "make_exponents",
    "md_sp_testing",
    "mixed_one_sup",
    "orlicz_holder_check",
    "orlicz_maximal",
    "orlicz_norm_quadrature",
    "outer_riesz",
    "outer_testing_constant",
    "parent",
    "parse_rational",
    "potential_testing_chain",
    "power",
    "power_log",
    "realize",
    "rescale_identity_check",
    "riesz_potential_1d",
    "sawyer_maximal_testing",
    "shifted_grids",
    "sparse_operator",
    "unit_pair",
    "verify_E_maximal",
    "weak_lq_norm",
    "weighted_dyadic_maximal",
    "weighted_measure",
]
