"""Growth of tensor powers in based algebras with nonnegative structure constants.

The package computes exact summand counts ``b_n`` of ``c^n``, PF dimension
estimates along truncation filtrations, recurrence verdicts for the
associated walk and asymptotic models ``a(n)`` with their error.
"""
from __future__ import annotations

from .asymptotics import (
    AsymptoticModel,
    VarianceReport,
    evaluate_model,
    fit_asymptotic_model,
    model_from_truncation,
    variance_report,
)
from .core import (
    GrowthProblem,
    RationalMatrix,
    Truncation,
    WeightedEdge,
    exhaust,
    expand_to_depth,
    filtration,
    make_growth_problem,
    out_edges,
    truncation_matrix,
)
from .errors import GrowthError
from .families import FAMILIES, build_family, load_explicit, sl2_clebsch_gordan
from .series import (
    ClassificationReport,
    Series,
    bn_sequence,
    classify_recurrence,
    endpoint_distribution,
    first_return_series,
    green_partial,
    power_entry_series,
    taboo_return_series,
    vj_pfdim_estimate,
)
from .spectral import (
    EigenData,
    FiltrationEstimate,
    SpectralSummary,
    classify_classes,
    leading_eigendata,
    pf_eigenvalue,
    period,
    pfdim_filtration,
    scc_decomposition,
    subdominant_modulus,
    track_final_basic,
)

__version__ = "0.1.0"

__all__ = [
    "AsymptoticModel", "VarianceReport", "evaluate_model", "fit_asymptotic_model", "model_from_truncation",
    "variance_report", "GrowthProblem", "RationalMatrix", "Truncation", "WeightedEdge", "exhaust", "expand_to_depth",
    "filtration", "make_growth_problem", "out_edges", "truncation_matrix", "GrowthError", "FAMILIES",
    "build_family", "load_explicit", "sl2_clebsch_gordan", "ClassificationReport", "Series", "bn_sequence",
    "classify_recurrence", "endpoint_distribution", "first_return_series", "green_partial",
    "power_entry_series", "taboo_return_series", "vj_pfdim_estimate", "EigenData", "FiltrationEstimate",
    "SpectralSummary", "classify_classes", "leading_eigendata", "pf_eigenvalue", "period", "pfdim_filtration",
    "scc_decomposition", "subdominant_modulus", "track_final_basic",
]
