"""Parametric marginal survival models with covariate-dependent rates.

Three families are supported, all with a log link between a linear
predictor in binary covariates and the rate/scale parameter:

* Exponential(rate) :  S(t) = exp(-rate * t)
* Weibull(shape, scale) :  S(t) = exp(-scale * t**shape)
* Gompertz(shape, rate) :  S(t) = exp(-(rate/shape) * (exp(shape*t) - 1))

Note the Weibull here is parameterised with the scale multiplying
t**shape directly (not the (t/scale)**shape convention), so that the
log link on the scale yields time-constant hazard ratios exp(coef)
for all three families.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

# Linear predictors are capped before exponentiation so that optimizer
# excursions cannot overflow the likelihood.
PREDICTOR_CAP = 50.0

# Below this magnitude the Gompertz shape is treated as a removable
# singularity and replaced by a Taylor expansion of (exp(g*t)-1)/g.
GOMPERTZ_SMALL_SHAPE = 1e-8

Z_95 = 1.959964


class MarginFamily(enum.Enum):
    """Marginal survival distribution family."""

    EXPONENTIAL = "exponential"
    WEIBULL = "weibull"
    GOMPERTZ = "gompertz"

    @property
    def n_shape(self) -> int:
        """Number of extra shape parameters per margin (0 or 1)."""
        return 0 if self is MarginFamily.EXPONENTIAL else 1


@dataclass(frozen=True)
class HazardRatioEstimate:
    """Hazard ratio with Delta-method variance and 95% Wald interval."""

    hr: float
    variance: float
    ci_low: float
    ci_high: float


def linear_predictor(coeffs, w):
    """Evaluate intercept + slopes dotted with covariates.

    Parameters
    ----------
    coeffs : array_like, shape (p+1,)
        Intercept followed by one slope per covariate.
    w : array_like, shape (p,) or (n, p)
        Covariate values (0/1 for binary designs).

    Returns
    -------
    float or ndarray
        coeffs[0] + sum_k coeffs[k] * w[k-1], per row of ``w``.
    """
    coeffs = np.asarray(coeffs, dtype=float)
    w = np.asarray(w, dtype=float)
    if w.shape[-1] != coeffs.shape[0] - 1:
        raise ValueError(
            f"covariate vector of length {w.shape[-1]} does not match "
            f"{coeffs.shape[0]} coefficients (need length {coeffs.shape[0] - 1})"
        )
    eta = coeffs[0] + w @ coeffs[1:]
    return float(eta) if eta.ndim == 0 else eta


def rate_param(family, coeffs, w):
    """Rate (Exponential/Gompertz) or scale (Weibull) via the log link.

    The predictor is capped at +/-PREDICTOR_CAP before exponentiation,
    so the result is always finite and strictly positive.
    """
    eta = linear_predictor(coeffs, w)
    if not np.all(np.isfinite(eta)):
        raise ValueError("non-finite linear predictor")
    return np.exp(np.clip(eta, -PREDICTOR_CAP, PREDICTOR_CAP))


def _gompertz_cumhaz(shape, rate, t):
    """Cumulative hazard (rate/shape) * (exp(shape*t) - 1), shape-safe."""
    shape = np.asarray(shape, dtype=float)
    t = np.asarray(t, dtype=float)
    small = np.abs(shape) < GOMPERTZ_SMALL_SHAPE
    g = np.where(small, 1.0, shape)  # dummy to avoid 0-division warnings
    exact = rate * np.expm1(g * t) / g
    # second-order expansion in shape: t + g t^2/2 + g^2 t^3/6
    series = rate * t * (1.0 + shape * t / 2.0 + (shape * t) ** 2 / 6.0)
    return np.where(small, series, exact)


def log_survival(family, shape, rate, t):
    """log S(t); vectorized over ``rate`` and ``t``."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("survival time must be non-negative")
    if family is MarginFamily.EXPONENTIAL:
        return -rate * t
    if family is MarginFamily.WEIBULL:
        return -rate * t**shape
    return -_gompertz_cumhaz(shape, rate, t)


def log_density(family, shape, rate, t):
    """log f(t); -inf where the density vanishes."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("survival time must be non-negative")
    with np.errstate(divide="ignore"):
        if family is MarginFamily.EXPONENTIAL:
            return np.log(rate) - rate * t
        if family is MarginFamily.WEIBULL:
            return (
                np.log(rate)
                + np.log(shape)
                + (shape - 1.0) * np.log(t)
                - rate * t**shape
            )
        return np.log(rate) + shape * t - _gompertz_cumhaz(shape, rate, t)


def survival(family, shape, rate, t):
    """Survival function S(t) = P(T > t)."""
    return np.exp(log_survival(family, shape, rate, t))


def density(family, shape, rate, t):
    """Density f(t) = h(t) S(t)."""
    return np.exp(log_density(family, shape, rate, t))


def hazard(family, shape, rate, t):
    """Hazard function h(t) = f(t) / S(t)."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("survival time must be non-negative")
    if family is MarginFamily.EXPONENTIAL:
        return rate * np.ones_like(t)
    if family is MarginFamily.WEIBULL:
        with np.errstate(divide="ignore"):  # h(0) = inf for shape < 1
            return rate * shape * t ** (shape - 1.0)
    return rate * np.exp(shape * t)


def inverse_survival(family, shape, rate, u, on_no_event="raise"):
    """Invert the survival function: find t with S(t) = u.

    Parameters
    ----------
    family, shape, rate
        Margin specification; ``rate`` may be an array.
    u : array_like in (0, 1]
        Survival probability to invert; u = 1 maps to t = 0.
    on_no_event : {"raise", "inf"}
        A Gompertz margin with negative shape has S(inf) = exp(rate/shape)
        > 0; for u below that floor no finite event time exists.  With
        "raise" this is an error, with "inf" the result is +inf (used by
        the simulator, where such subjects are censored in practice).

    Returns
    -------
    ndarray or float
        Event time(s) with survival probability u.
    """
    u = np.asarray(u, dtype=float)
    if np.any(u <= 0.0) or np.any(u > 1.0):
        raise ValueError("survival probability must lie in (0, 1]")
    s = -np.log(u)  # target cumulative hazard, >= 0
    if family is MarginFamily.EXPONENTIAL:
        t = s / rate
    elif family is MarginFamily.WEIBULL:
        t = (s / rate) ** (1.0 / shape)
    else:
        # solve (rate/g)(exp(g t)-1) = s  =>  t = log1p(g s / rate)/g
        arg = shape * s / rate
        bad = arg <= -1.0  # below the negative-shape survival floor
        if np.any(bad):
            if on_no_event == "raise":
                raise ValueError(
                    "no finite event time: u below the Gompertz survival "
                    "floor exp(rate/shape)"
                )
            arg = np.where(bad, np.nan, arg)
        if abs(shape) < GOMPERTZ_SMALL_SHAPE:
            z = s / rate
            t = z * (1.0 - shape * z / 2.0 + (shape * z) ** 2 / 3.0)
        else:
            t = np.log1p(arg) / shape
        if np.any(bad):
            t = np.where(bad, np.inf, t)
    return float(t) if np.ndim(t) == 0 else t


def hazard_ratio(coeff, variance):
    """Hazard ratio exp(coeff) with Delta-method variance and 95% CI.

    Var(HR) = exp(2*coeff) * Var(coeff); the interval is Wald on the
    hazard-ratio scale, HR +/- z * sqrt(Var(HR)).
    """
    if not np.isfinite(coeff):
        raise ValueError("coefficient must be finite")
    if variance < 0:
        raise ValueError("coefficient variance must be non-negative")
    hr = float(np.exp(coeff))
    var_hr = float(np.exp(2.0 * coeff) * variance)
    half = Z_95 * np.sqrt(var_hr)
    return HazardRatioEstimate(hr, var_hr, hr - half, hr + half)
