"""Bivariate copula regression models for semi-competing risks.

Joint models for a non-terminal and a terminal event time, coupled
through a Normal, Clayton, Frank or Gumbel copula on the marginal
survival scales, with Exponential, Weibull or Gompertz margins.  Binary
covariates enter both hazard rates and the copula association parameter
through link functions, and everything is fit by censored maximum
likelihood with Fisher-information standard errors.
"""

from .bvn import bvn_cdf
from .copulas import CopulaFamily, cdf, conditional_inverse, density, link_theta, partial_u, partial_v
from .cox import CoxFit, cox_fit
from .data import SubjectRecord, SurvivalData
from .estimation import (AssociationEstimate, FitOptions, FitResult, aic,
                         association_estimate, delta_var_theta, fit,
                         initial_values, numerical_hessian, select_best)
from .experiments import (FitReport, MetricsRow, StudyResult, compute_metrics,
                          run_fit, run_study1, run_study2)
from .likelihood import ModelSpec, dataset_loglik, record_loglik
from .margins import (HazardRatioEstimate, MarginFamily, density as margin_density,
                      hazard, hazard_ratio, inverse_survival, linear_predictor,
                      rate_param, survival)
from .simulation import (CensoringSummary, LatentTrace, SimConfig, simulate,
                         summarize_censoring)

__version__ = "0.1.0"

__all__ = [
    "AssociationEstimate", "CensoringSummary", "CopulaFamily", "CoxFit",
    "FitOptions", "FitReport", "FitResult", "HazardRatioEstimate",
    "LatentTrace", "MarginFamily", "MetricsRow", "ModelSpec", "SimConfig",
    "StudyResult", "SubjectRecord", "SurvivalData", "aic",
    "association_estimate", "bvn_cdf", "cdf", "compute_metrics",
    "conditional_inverse", "cox_fit", "dataset_loglik", "delta_var_theta",
    "density", "fit", "hazard", "hazard_ratio", "initial_values",
    "inverse_survival", "linear_predictor", "link_theta", "margin_density",
    "numerical_hessian", "partial_u", "partial_v", "rate_param",
    "record_loglik", "run_fit", "run_study1", "run_study2", "select_best",
    "simulate", "summarize_censoring", "survival",
]
