"""Censored joint log-likelihood for copula survival regression.

Each record contributes exactly one of four factors, selected by its
event indicators (d1, d2):

* (1, 1): log c(u, v) + log f1(x) + log f2(y)
* (1, 0): log dC/du at (u, v) + log f1(x)
* (0, 1): log dC/dv at (u, v) + log f2(y)
* (0, 0): log C(u, v)

with u = S1(x) and v = S2(y).  Margin 1 (the non-terminal event) uses
coefficients ``a`` and shape 1; margin 2 (the terminal event) uses
coefficients ``c`` and shape 2; the association parameter comes from
the copula link applied to coefficients ``b``.  All three predictors
share the same covariate design.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import copulas, margins
from .copulas import CopulaFamily
from .data import SubjectRecord, SurvivalData
from .margins import MarginFamily, PREDICTOR_CAP

# copula factors are clamped below at log(1e-300) so that a single
# subject at the Frechet boundary cannot sink the whole dataset
LOG_FLOOR = np.log(1e-300)


@dataclass(frozen=True)
class ModelSpec:
    """Copula family + margin family + shared covariate design size.

    The packed parameter vector is laid out as

        (a_0..a_p, c_0..c_p, b_0..b_p, [shape_1, shape_2])

    where the shape block is absent for Exponential margins, holds
    log(alpha_1), log(alpha_2) for Weibull (the shape is optimized on
    the log scale so it stays positive), and holds gamma_1, gamma_2
    unconstrained for Gompertz.
    """

    copula: CopulaFamily
    margin: MarginFamily
    n_covariates: int

    def __post_init__(self):
        if self.n_covariates < 0:
            raise ValueError("n_covariates must be >= 0")

    @property
    def n_coef(self) -> int:
        return self.n_covariates + 1

    @property
    def n_shapes(self) -> int:
        return 2 * self.margin.n_shape

    @property
    def n_params(self) -> int:
        return 3 * self.n_coef + self.n_shapes

    @property
    def slice_a(self) -> slice:
        return slice(0, self.n_coef)

    @property
    def slice_c(self) -> slice:
        return slice(self.n_coef, 2 * self.n_coef)

    @property
    def slice_b(self) -> slice:
        return slice(2 * self.n_coef, 3 * self.n_coef)

    @property
    def slice_shapes(self) -> slice:
        return slice(3 * self.n_coef, self.n_params)

    @property
    def param_names(self) -> list:
        names = [f"a{k}" for k in range(self.n_coef)]
        names += [f"c{k}" for k in range(self.n_coef)]
        names += [f"b{k}" for k in range(self.n_coef)]
        if self.margin is MarginFamily.WEIBULL:
            names += ["log_alpha1", "log_alpha2"]
        elif self.margin is MarginFamily.GOMPERTZ:
            names += ["gamma1", "gamma2"]
        return names

    def pack(self, a, c, b, shapes=None) -> np.ndarray:
        """Build the packed vector from natural-scale blocks.

        ``shapes`` are the two natural-scale shape parameters (alpha for
        Weibull, gamma for Gompertz); Weibull shapes are stored as logs.
        """
        a = np.asarray(a, dtype=float)
        c = np.asarray(c, dtype=float)
        b = np.asarray(b, dtype=float)
        if not (a.shape == c.shape == b.shape == (self.n_coef,)):
            raise ValueError(f"coefficient blocks must have length {self.n_coef}")
        parts = [a, c, b]
        if self.margin.n_shape:
            shapes = np.asarray(shapes, dtype=float)
            if shapes.shape != (2,):
                raise ValueError("two shape parameters required")
            if self.margin is MarginFamily.WEIBULL:
                if np.any(shapes <= 0):
                    raise ValueError("Weibull shapes must be positive")
                shapes = np.log(shapes)
            parts.append(shapes)
        elif shapes is not None:
            raise ValueError("Exponential margins take no shape parameters")
        theta_all = np.concatenate(parts)
        if not np.all(np.isfinite(theta_all)):
            raise ValueError("parameters must be finite")
        return theta_all

    def unpack(self, params):
        """Split a packed vector into (a, c, b, shape1, shape2).

        Shapes are returned on their natural scale (None for
        Exponential margins).
        """
        params = np.asarray(params, dtype=float)
        if params.shape != (self.n_params,):
            raise ValueError(
                f"parameter vector must have length {self.n_params}"
            )
        a = params[self.slice_a]
        c = params[self.slice_c]
        b = params[self.slice_b]
        if self.margin is MarginFamily.EXPONENTIAL:
            shape1 = shape2 = None
        elif self.margin is MarginFamily.WEIBULL:
            shape1, shape2 = np.exp(params[self.slice_shapes])
        else:
            shape1, shape2 = params[self.slice_shapes]
        return a, c, b, shape1, shape2


def _loglik_per_record(spec: ModelSpec, params, data: SurvivalData) -> np.ndarray:
    a, c, b, shape1, shape2 = spec.unpack(params)
    design = data.design
    eta1 = np.clip(design @ a, -PREDICTOR_CAP, PREDICTOR_CAP)
    eta2 = np.clip(design @ c, -PREDICTOR_CAP, PREDICTOR_CAP)
    rate1 = np.exp(eta1)
    rate2 = np.exp(eta2)
    theta = copulas.theta_from_predictor(spec.copula, design @ b)
    theta = np.broadcast_to(np.atleast_1d(theta), (data.n,))

    fam = spec.margin
    log_u = margins.log_survival(fam, shape1, rate1, data.x)
    log_v = margins.log_survival(fam, shape2, rate2, data.y)
    u = np.clip(np.exp(log_u), copulas.UV_EPS, 1.0 - copulas.UV_EPS)
    v = np.clip(np.exp(log_v), copulas.UV_EPS, 1.0 - copulas.UV_EPS)

    d1 = data.d1.astype(bool)
    d2 = data.d2.astype(bool)
    ll = np.zeros(data.n)

    cop = spec.copula
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        m = d1 & d2
        if m.any():
            piece = copulas._LOG_DENSITY[cop](theta[m], u[m], v[m])
            ll[m] = (np.maximum(piece, LOG_FLOOR)
                     + margins.log_density(fam, shape1, rate1[m], data.x[m])
                     + margins.log_density(fam, shape2, rate2[m], data.y[m]))
        m = d1 & ~d2
        if m.any():
            piece = copulas._LOG_PARTIAL_U[cop](theta[m], u[m], v[m])
            ll[m] = (np.maximum(piece, LOG_FLOOR)
                     + margins.log_density(fam, shape1, rate1[m], data.x[m]))
        m = ~d1 & d2
        if m.any():
            # exchangeable families: dC/dv at (u, v) = dC/du at (v, u)
            piece = copulas._LOG_PARTIAL_U[cop](theta[m], v[m], u[m])
            ll[m] = (np.maximum(piece, LOG_FLOOR)
                     + margins.log_density(fam, shape2, rate2[m], data.y[m]))
        m = ~d1 & ~d2
        if m.any():
            piece = copulas._LOG_CDF[cop](theta[m], u[m], v[m])
            ll[m] = np.maximum(piece, LOG_FLOOR)

    # optimizer-safe sentinel: never hand NaN to the caller
    return np.where(np.isnan(ll), -np.inf, ll)


def dataset_loglik(spec: ModelSpec, params, data: SurvivalData) -> float:
    """Total censored log-likelihood over the dataset.

    Returns -inf (never NaN) when any record's contribution is
    non-finite, which keeps derivative-free optimizers recoverable.
    """
    if data.n_covariates != spec.n_covariates:
        raise ValueError(
            f"data has {data.n_covariates} covariates, spec expects "
            f"{spec.n_covariates}"
        )
    total = float(np.sum(_loglik_per_record(spec, params, data)))
    return total if np.isfinite(total) else -np.inf


def record_loglik(spec: ModelSpec, params, rec: SubjectRecord) -> float:
    """Log-likelihood contribution of a single record."""
    return dataset_loglik(spec, params, SurvivalData.from_records([rec]))
