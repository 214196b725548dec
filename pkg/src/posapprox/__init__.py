"""Certified best approximations of linear forms and positive-integer witness points."""

from .best_approx import (
    BestApproximation,
    BestApproxSequence,
    d_nu,
    det_condition,
    enumerate_best_approximations,
    minkowski_check,
)
from .certified_reals import (
    CertifiedReal,
    Ordering,
    RationalInterval,
    algebraic,
    certified_compare,
    decimal_literal,
    dist_nearest_int,
    enclosure,
    eval_linear_form,
    parse_descriptor,
    precision_limit,
    rational,
)
from .errors import (
    DescriptorError,
    DetConditionFailed,
    DiophantineConditionViolated,
    Inapplicable,
    IntervalTooWide,
    NoApplicableNu,
    PosApproxError,
    PrecisionExhausted,
    PreconditionNotCertified,
    SearchFailed,
)
from .spectrum import RunReport, SpectrumParams, badly_approx_check, c_of_gamma, g_of_gamma, theorem2_run
from .witness import (
    BoundCertificate,
    BoundKind,
    NuContext,
    WitnessPoint,
    WitnessSource,
    lemma1_search,
    lemma2_search,
    r_nu,
    theorem3_dispatch,
)

__version__ = "0.1.0"
