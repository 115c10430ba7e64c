"""Default true-parameter sets for the two simulation studies.

The coefficient values mimic a UK kidney-transplant registry analysis
of graft failure (non-terminal) and death (terminal).  Study 1 uses
three binary covariates: age > 50 (prevalence 0.40), female sex (0.38)
and living donor (0.30), with Exponential margins.  Study 2 uses the
age covariate only and varies the margin family.  Censoring is
independent Uniform(0, 25) years in both.
"""

from __future__ import annotations

import numpy as np

from .copulas import CopulaFamily
from .likelihood import ModelSpec
from .margins import MarginFamily
from .simulation import SimConfig

STUDY1_COVARIATE_NAMES = ("age", "sex", "donor")
STUDY1_PREVALENCES = (0.40, 0.38, 0.30)
STUDY2_COVARIATE_NAMES = ("age",)
STUDY2_PREVALENCES = (0.40,)
DEFAULT_CENSOR_MAX = 25.0

# study 1: (a, c, b) per copula, Exponential margins, three covariates
STUDY1_TRUTH = {
    CopulaFamily.NORMAL: dict(
        a=(-3.30, 0.11, 0.02, -0.51),
        c=(-4.15, 1.32, -0.11, -0.65),
        b=(0.35, 0.28, 0.00, 0.00),
    ),
    CopulaFamily.CLAYTON: dict(
        a=(-3.28, 0.32, 0.00, -0.53),
        c=(-4.09, 1.35, -0.07, -0.62),
        b=(0.39, 1.09, 0.14, 0.53),
    ),
    CopulaFamily.FRANK: dict(
        a=(-3.37, 0.31, 0.00, -0.53),
        c=(-4.08, 1.35, -0.07, -0.62),
        b=(3.06, 5.07, 0.00, 0.86),
    ),
    CopulaFamily.GUMBEL: dict(
        a=(-3.33, 0.13, 0.00, -0.51),
        c=(-4.16, 1.30, -0.11, -0.64),
        b=(-2.30, 1.35, 0.00, 0.00),
    ),
}

# study 2: (a, c, b[, shapes]) per (margin, copula), one covariate
STUDY2_TRUTH = {
    MarginFamily.EXPONENTIAL: {
        CopulaFamily.NORMAL: dict(
            a=(-3.440, 0.170), c=(-4.360, 1.390), b=(0.370, 0.290)),
        CopulaFamily.CLAYTON: dict(
            a=(-3.420, 0.380), c=(-4.280, 1.410), b=(0.620, 1.040)),
        CopulaFamily.FRANK: dict(
            a=(-3.420, 0.370), c=(-4.270, 1.410), b=(3.440, 5.230)),
        CopulaFamily.GUMBEL: dict(
            a=(-2.240, 1.350), c=(-4.360, 1.360), b=(-2.240, 1.350)),
    },
    MarginFamily.WEIBULL: {
        CopulaFamily.NORMAL: dict(
            a=(-2.680, 0.070), c=(-4.380, 1.370), b=(0.450, 0.280),
            shapes=(0.670, 1.030)),
        CopulaFamily.CLAYTON: dict(
            a=(-2.750, 0.260), c=(-4.300, 1.330), b=(0.550, 0.740),
            shapes=(0.710, 0.980)),
        CopulaFamily.FRANK: dict(
            a=(-2.740, 0.260), c=(-4.250, 1.390), b=(3.540, 4.140),
            shapes=(0.700, 0.990)),
        CopulaFamily.GUMBEL: dict(
            a=(-2.720, 0.050), c=(-4.230, 1.350), b=(-1.770, 1.060),
            shapes=(0.680, 0.970)),
    },
    MarginFamily.GOMPERTZ: {
        CopulaFamily.NORMAL: dict(
            a=(-3.370, 0.140), c=(-4.790, 1.490), b=(0.360, 0.280),
            shapes=(0.001, 0.060)),
        CopulaFamily.CLAYTON: dict(
            a=(-3.450, 0.360), c=(-4.550, 1.460), b=(0.580, 0.900),
            shapes=(0.004, 0.040)),
        CopulaFamily.FRANK: dict(
            a=(-3.420, 0.350), c=(-4.620, 1.510), b=(3.280, 4.050),
            shapes=(0.001, 0.040)),
        CopulaFamily.GUMBEL: dict(
            a=(-3.370, 0.110), c=(-4.820, 1.490), b=(-2.250, 1.310),
            shapes=(0.001, 0.060)),
    },
}


def study1_spec(copula: CopulaFamily) -> ModelSpec:
    return ModelSpec(copula, MarginFamily.EXPONENTIAL, 3)


def study1_truth(copula: CopulaFamily) -> np.ndarray:
    spec = study1_spec(copula)
    blocks = STUDY1_TRUTH[copula]
    return spec.pack(a=blocks["a"], c=blocks["c"], b=blocks["b"])


def study1_sim_config(copula: CopulaFamily, n: int, seed: int,
                      censor_max: float = DEFAULT_CENSOR_MAX) -> SimConfig:
    return SimConfig(spec=study1_spec(copula), truth=study1_truth(copula),
                     n=n, covariate_prevalences=STUDY1_PREVALENCES,
                     censor_max=censor_max, seed=seed)


def study2_spec(copula: CopulaFamily, margin: MarginFamily) -> ModelSpec:
    return ModelSpec(copula, margin, 1)


def study2_truth(copula: CopulaFamily, margin: MarginFamily) -> np.ndarray:
    spec = study2_spec(copula, margin)
    blocks = STUDY2_TRUTH[margin][copula]
    return spec.pack(a=blocks["a"], c=blocks["c"], b=blocks["b"],
                     shapes=blocks.get("shapes"))


def study2_sim_config(copula: CopulaFamily, margin: MarginFamily, n: int,
                      seed: int,
                      censor_max: float = DEFAULT_CENSOR_MAX) -> SimConfig:
    return SimConfig(spec=study2_spec(copula, margin),
                     truth=study2_truth(copula, margin), n=n,
                     covariate_prevalences=STUDY2_PREVALENCES,
                     censor_max=censor_max, seed=seed)
