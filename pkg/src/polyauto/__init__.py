"""Exact symbolic engine for polynomial automorphisms of affine n-space."""

from .polyring import (
    QQ,
    NEG_INF,
    NumberField,
    NFElem,
    Poly,
    arith,
    substitute,
    weighted_degree,
    partial_derivative,
    finite_difference,
    parse_poly,
    poly_to_str,
)
from .automorphism import (
    Endo,
    Affine,
    Triangular,
    Permutation,
    ExpFD,
    EndoPair,
    InverseOf,
    AutoWord,
    affine_part,
    classify,
    invert_token,
    invert_triangular_like,
    is_affine,
    is_parabolic,
    is_triangular,
    parabolic_split,
    parse_endo,
    parse_token,
    parse_word,
    try_invert_endo,
    word_to_str,
)
from .lnd import (
    TriangularDerivation,
    SeriesCapExceeded,
    exponential,
    nagata_derivation,
    nagata_endo,
    derivation_to_str,
    parse_derivation,
)
from .degeneracy import (
    NotDegenerate,
    TTDParams,
    TDFactorization,
    td_test,
    formal_translation_conjugate,
    factorize_td,
    jordan_normalize,
    ttd_build,
    ttd_build_via_exp,
    eliminate_x1,
)
from .cotame_engine import (
    EngineError,
    SafetyCapExceeded,
    ReductionTrace,
    LambdaResult,
    conjugate_descent_step,
    d_r_vector,
    derksen_endo,
    lambda_construct,
    reduce_3triangular,
    reduce_biparabolic,
    reduce_exp,
    reduce_parabolic,
    reduce_td,
    reduce_triangular,
    verify_trace,
)
from .filtration import (
    CYCLO5,
    Report,
    build_generators,
    case_classify,
    default_parameter_samples,
    gamma_closed_form,
    ldeg2,
    le2,
    order2_key,
    qstar_member,
    random_qstar_member,
    verify_degree_table,
    verify_stability,
    verify_theorem_noncotame,
)

__all__ = [
    "QQ",
    "NEG_INF",
    "NumberField",
    "NFElem",
    "Poly",
    "arith",
    "substitute",
    "weighted_degree",
    "partial_derivative",
    "finite_difference",
    "parse_poly",
    "poly_to_str",
    "Endo",
    "Affine",
    "Triangular",
    "Permutation",
    "ExpFD",
    "EndoPair",
    "InverseOf",
    "AutoWord",
    "affine_part",
    "classify",
    "invert_token",
    "invert_triangular_like",
    "is_affine",
    "is_parabolic",
    "is_triangular",
    "parabolic_split",
    "parse_endo",
    "parse_token",
    "parse_word",
    "try_invert_endo",
    "word_to_str",
    "TriangularDerivation",
    "SeriesCapExceeded",
    "exponential",
    "nagata_derivation",
    "nagata_endo",
    "derivation_to_str",
    "parse_derivation",
    "NotDegenerate",
    "TTDParams",
    "TDFactorization",
    "td_test",
    "formal_translation_conjugate",
    "factorize_td",
    "jordan_normalize",
    "ttd_build",
    "ttd_build_via_exp",
    "eliminate_x1",
    "EngineError",
    "SafetyCapExceeded",
    "ReductionTrace",
    "LambdaResult",
    "conjugate_descent_step",
    "d_r_vector",
    "derksen_endo",
    "lambda_construct",
    "reduce_3triangular",
    "reduce_biparabolic",
    "reduce_exp",
    "reduce_parabolic",
    "reduce_td",
    "reduce_triangular",
    "verify_trace",
    "CYCLO5",
    "Report",
    "build_generators",
    "case_classify",
    "default_parameter_samples",
    "gamma_closed_form",
    "ldeg2",
    "le2",
    "order2_key",
    "qstar_member",
    "random_qstar_member",
    "verify_degree_table",
    "verify_stability",
    "verify_theorem_noncotame",
]
