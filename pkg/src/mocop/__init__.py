"""Marshall-Olkin copula toolkit: complete and censored maximum likelihood,
comparison copula families, and bootstrap goodness of fit for paired
failure-time data."""

from .copulas import (
    Clayton,
    FCGMixture,
    Frank,
    Gaussian,
    Gumbel,
    MarshallOlkin,
    make_copula,
)
from .estimation import (
    CensoredSample,
    FitResult,
    PseudoSample,
    aicc,
    classify_censored,
    classify_complete,
    fit_mo_censored,
    fit_mo_complete,
    fit_numeric,
    mo_loglik_censored,
    mo_loglik_complete,
)
from .gof import GofReport, bootstrap_pvalue, cvm_statistic, empirical_copula
from .marginals import MarginalEstimate, TimeObservation, empirical_cdf, kaplan_meier, pseudo_observations

__all__ = [
    "Clayton",
    "FCGMixture",
    "Frank",
    "Gaussian",
    "Gumbel",
    "MarshallOlkin",
    "make_copula",
    "CensoredSample",
    "FitResult",
    "PseudoSample",
    "aicc",
    "classify_censored",
    "classify_complete",
    "fit_mo_censored",
    "fit_mo_complete",
    "fit_numeric",
    "mo_loglik_censored",
    "mo_loglik_complete",
    "GofReport",
    "bootstrap_pvalue",
    "cvm_statistic",
    "empirical_copula",
    "MarginalEstimate",
    "TimeObservation",
    "empirical_cdf",
    "kaplan_meier",
    "pseudo_observations",
]

__version__ = "0.1.0"
