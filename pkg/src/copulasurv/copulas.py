"""Bivariate copula families: Normal, Clayton, Frank and Gumbel.

For each family this module provides the CDF C(u, v), the density
c(u, v), the partial derivatives dC/du and dC/dv (the conditional
distribution of one argument given the other), the inverse of the
conditional distribution (used for conditional-distribution sampling),
and the link function that maps a linear predictor in covariates to the
association parameter theta.

All evaluators clamp u and v to [1e-12, 1 - 1e-12] so that survival
values rounded to 0 or 1 during an optimizer excursion never produce
NaN, and all likelihood-facing quantities are available in log space.
"""

from __future__ import annotations

import enum

import numpy as np
from scipy.special import log_ndtr, ndtr, ndtri

from .bvn import bvn_cdf
from .margins import PREDICTOR_CAP

UV_EPS = 1e-12

# largest correlation magnitude for the Normal copula: tanh rounds to
# 1.0 in double precision long before the predictor cap bites
RHO_MAX = 1.0 - 1e-12

# below these, Clayton/Frank evaluate a first-order expansion around
# independence instead of the closed form (removable 0/0)
CLAYTON_SMALL_THETA = 1e-7
FRANK_SMALL_THETA = 1e-5

GUMBEL_INVERSE_MAX_ITER = 200


class CopulaFamily(enum.Enum):
    """Copula family tag."""

    NORMAL = "normal"
    CLAYTON = "clayton"
    FRANK = "frank"
    GUMBEL = "gumbel"


def theta_from_predictor(family, eta):
    """Map a linear predictor to the association parameter.

    Normal: tanh(eta); Clayton: exp(eta); Frank: eta (identity);
    Gumbel: exp(eta) + 1.  The predictor is capped at +/-PREDICTOR_CAP
    first so every link stays finite.
    """
    eta = np.clip(np.asarray(eta, dtype=float), -PREDICTOR_CAP, PREDICTOR_CAP)
    if family is CopulaFamily.NORMAL:
        theta = np.clip(np.tanh(eta), -RHO_MAX, RHO_MAX)
    elif family is CopulaFamily.CLAYTON:
        theta = np.exp(eta)
    elif family is CopulaFamily.FRANK:
        theta = eta
    else:
        theta = np.exp(eta) + 1.0
    return float(theta) if theta.ndim == 0 else theta


def link_theta(family, b, w):
    """Association parameter at covariates ``w`` for coefficients ``b``.

    Parameters
    ----------
    family : CopulaFamily
    b : array_like, shape (p+1,)
        Intercept and slopes of the association predictor.
    w : array_like, shape (p,) or (n, p)

    Returns
    -------
    float or ndarray
        theta within the family's admissible range.
    """
    b = np.asarray(b, dtype=float)
    w = np.asarray(w, dtype=float)
    if w.shape[-1] != b.shape[0] - 1:
        raise ValueError(
            f"covariate vector of length {w.shape[-1]} does not match "
            f"{b.shape[0]} association coefficients"
        )
    return theta_from_predictor(family, b[0] + w @ b[1:])


def _validate_theta(family, theta):
    theta = np.asarray(theta, dtype=float)
    if family is CopulaFamily.NORMAL:
        bad = np.abs(theta) >= 1.0
    elif family is CopulaFamily.CLAYTON:
        bad = theta < 0.0  # theta == 0 is the independence limit
    elif family is CopulaFamily.FRANK:
        bad = ~np.isfinite(theta)
    else:
        bad = theta < 1.0
    if np.any(bad):
        raise ValueError(f"association parameter out of range for {family.value}")
    return theta


def _clip_uv(u):
    return np.clip(np.asarray(u, dtype=float), UV_EPS, 1.0 - UV_EPS)


# ---------------------------------------------------------------------------
# log-space primitives (inputs already validated/clamped, arrays broadcast)
# ---------------------------------------------------------------------------


def _normal_aux(theta, u, v):
    x = ndtri(u)
    y = ndtri(v)
    s = np.sqrt((1.0 - theta) * (1.0 + theta))
    return x, y, s


def _log_cdf_normal(theta, u, v):
    x, y, _ = _normal_aux(theta, u, v)
    with np.errstate(divide="ignore"):
        return np.log(bvn_cdf(x, y, theta))


def _log_density_normal(theta, u, v):
    x, y, s = _normal_aux(theta, u, v)
    return (-np.log(s)
            + (2.0 * theta * x * y - theta**2 * (x * x + y * y))
            / (2.0 * s * s))


def _log_partial_u_normal(theta, u, v):
    x, y, s = _normal_aux(theta, u, v)
    return log_ndtr((y - theta * x) / s)


def _cond_inverse_normal(theta, u, q):
    x = ndtri(u)
    s = np.sqrt((1.0 - theta) * (1.0 + theta))
    return ndtr(theta * x + s * ndtri(q))


def _clayton_log_cdf(theta, lu, lv):
    """log C for Clayton from log(u), log(v); theta may be 0 (limit)."""
    theta = np.asarray(theta, dtype=float)
    small = theta < CLAYTON_SMALL_THETA
    th = np.where(small, 1.0, theta)
    a = -th * lu
    b = -th * lv
    m = np.maximum(a, b)
    exact = -(m + np.log(np.exp(a - m) + np.exp(b - m) - np.exp(-m))) / th
    series = lu + lv + theta * lu * lv
    return np.where(small, series, exact)


def _log_cdf_clayton(theta, u, v):
    return _clayton_log_cdf(theta, np.log(u), np.log(v))


def _log_density_clayton(theta, u, v):
    lu, lv = np.log(u), np.log(v)
    lc = _clayton_log_cdf(theta, lu, lv)
    return np.log1p(theta) + (1.0 + 2.0 * theta) * lc - (1.0 + theta) * (lu + lv)


def _log_partial_u_clayton(theta, u, v):
    lu = np.log(u)
    lc = _clayton_log_cdf(theta, lu, np.log(v))
    return (1.0 + theta) * (lc - lu)


def _cond_inverse_clayton(theta, u, q):
    theta = np.asarray(theta, dtype=float)
    lu, lq = np.log(u), np.log(q)
    small = theta < CLAYTON_SMALL_THETA
    th = np.where(small, 1.0, theta)
    a = -th * lu
    g = np.expm1(-th * lq / (1.0 + th))
    exact = -(a + np.log1p(g + np.expm1(-a))) / th
    series = lq * (1.0 - theta * (1.0 + lu))
    return np.exp(np.where(small, series, exact))


def _frank_parts(theta, u, v):
    gu = np.expm1(-theta * u)
    gv = np.expm1(-theta * v)
    g1 = np.expm1(-theta)
    return gu, gv, g1


def _log_cdf_frank(theta, u, v):
    theta = np.asarray(theta, dtype=float)
    small = np.abs(theta) < FRANK_SMALL_THETA
    th = np.where(small, 1.0, theta)
    gu, gv, g1 = _frank_parts(th, u, v)
    with np.errstate(divide="ignore", invalid="ignore"):
        exact = np.log(-np.log1p(gu * gv / g1) / th)
        series = (np.log(u) + np.log(v)
                  + np.log1p(theta * (1.0 - u) * (1.0 - v) / 2.0))
    return np.where(small, series, exact)


def _log_density_frank(theta, u, v):
    theta = np.asarray(theta, dtype=float)
    small = np.abs(theta) < FRANK_SMALL_THETA
    th = np.where(small, 1.0, theta)
    gu, gv, g1 = _frank_parts(th, u, v)
    d = g1 + gu * gv
    with np.errstate(divide="ignore", invalid="ignore"):
        exact = (np.log(np.abs(th * g1)) - th * (u + v)
                 - 2.0 * np.log(np.abs(d)))
        series = np.log1p(theta * (1.0 - 2.0 * u) * (1.0 - 2.0 * v) / 2.0)
    return np.where(small, series, exact)


def _log_partial_u_frank(theta, u, v):
    theta = np.asarray(theta, dtype=float)
    small = np.abs(theta) < FRANK_SMALL_THETA
    th = np.where(small, 1.0, theta)
    gu, gv, g1 = _frank_parts(th, u, v)
    d = g1 + gu * gv
    with np.errstate(divide="ignore", invalid="ignore"):
        exact = -th * u + np.log(gv / d)
        series = (np.log(v)
                  + np.log1p(theta * (1.0 - v) * (1.0 - 2.0 * u) / 2.0))
    return np.where(small, series, exact)


def _cond_inverse_frank(theta, u, q):
    theta = np.asarray(theta, dtype=float)
    small = np.abs(theta) < FRANK_SMALL_THETA
    th = np.where(small, 1.0, theta)
    g1 = np.expm1(-th)
    denom = (1.0 - q) * np.exp(-th * u) + q
    with np.errstate(divide="ignore", invalid="ignore"):
        exact = -np.log1p(q * g1 / denom) / th
    series = q * (1.0 - theta * (1.0 - q) * (1.0 - 2.0 * u) / 2.0)
    return np.where(small, series, exact)


def _gumbel_aux(theta, u, v):
    xt = -np.log(u)
    yt = -np.log(v)
    lx = np.log(xt)
    ly = np.log(yt)
    # log of m = (xt^theta + yt^theta)^(1/theta), stable for any theta >= 1
    logm = np.logaddexp(theta * lx, theta * ly) / theta
    return xt, yt, lx, ly, logm


def _log_cdf_gumbel(theta, u, v):
    _, _, _, _, logm = _gumbel_aux(theta, u, v)
    return -np.exp(logm)


def _log_density_gumbel(theta, u, v):
    xt, yt, lx, ly, logm = _gumbel_aux(theta, u, v)
    m = np.exp(logm)
    return (-m + xt + yt + (theta - 1.0) * (lx + ly)
            + (1.0 - 2.0 * theta) * logm + np.log(m + theta - 1.0))


def _log_partial_u_gumbel(theta, u, v):
    xt, _, lx, _, logm = _gumbel_aux(theta, u, v)
    return -np.exp(logm) - np.log(u) + (theta - 1.0) * (lx - logm)


def _cond_inverse_gumbel(theta, u, q):
    """Bracketed bisection for the Gumbel conditional inverse."""
    theta, u, q = np.broadcast_arrays(theta, u, q)
    lo = np.full(u.shape, UV_EPS)
    hi = np.full(u.shape, 1.0 - UV_EPS)
    log_q = np.log(q)
    for _ in range(GUMBEL_INVERSE_MAX_ITER):
        mid = 0.5 * (lo + hi)
        too_low = _log_partial_u_gumbel(theta, u, mid) < log_q
        lo = np.where(too_low, mid, lo)
        hi = np.where(too_low, hi, mid)
        if np.max(hi - lo) < 1e-15:
            break
    return 0.5 * (lo + hi)


_LOG_CDF = {
    CopulaFamily.NORMAL: _log_cdf_normal,
    CopulaFamily.CLAYTON: _log_cdf_clayton,
    CopulaFamily.FRANK: _log_cdf_frank,
    CopulaFamily.GUMBEL: _log_cdf_gumbel,
}
_LOG_DENSITY = {
    CopulaFamily.NORMAL: _log_density_normal,
    CopulaFamily.CLAYTON: _log_density_clayton,
    CopulaFamily.FRANK: _log_density_frank,
    CopulaFamily.GUMBEL: _log_density_gumbel,
}
_LOG_PARTIAL_U = {
    CopulaFamily.NORMAL: _log_partial_u_normal,
    CopulaFamily.CLAYTON: _log_partial_u_clayton,
    CopulaFamily.FRANK: _log_partial_u_frank,
    CopulaFamily.GUMBEL: _log_partial_u_gumbel,
}
_COND_INVERSE = {
    CopulaFamily.NORMAL: _cond_inverse_normal,
    CopulaFamily.CLAYTON: _cond_inverse_clayton,
    CopulaFamily.FRANK: _cond_inverse_frank,
    CopulaFamily.GUMBEL: _cond_inverse_gumbel,
}


def _maybe_scalar(x):
    x = np.asarray(x)
    return float(x) if x.ndim == 0 else x


# ---------------------------------------------------------------------------
# public surface
# ---------------------------------------------------------------------------


def log_cdf(family, theta, u, v):
    """log C(u, v); -inf where C underflows to zero."""
    theta = _validate_theta(family, theta)
    return _maybe_scalar(_LOG_CDF[family](theta, _clip_uv(u), _clip_uv(v)))


def log_density(family, theta, u, v):
    """log c(u, v)."""
    theta = _validate_theta(family, theta)
    return _maybe_scalar(_LOG_DENSITY[family](theta, _clip_uv(u), _clip_uv(v)))


def log_partial_u(family, theta, u, v):
    """log dC/du, the log conditional distribution of V given U = u."""
    theta = _validate_theta(family, theta)
    return _maybe_scalar(_LOG_PARTIAL_U[family](theta, _clip_uv(u), _clip_uv(v)))


def log_partial_v(family, theta, u, v):
    """log dC/dv; all four families are exchangeable, so swap arguments."""
    return log_partial_u(family, theta, v, u)


def cdf(family, theta, u, v):
    """Copula CDF C(u, v)."""
    return _maybe_scalar(np.exp(log_cdf(family, theta, u, v)))


def density(family, theta, u, v):
    """Copula density c(u, v) = d2 C / du dv."""
    return _maybe_scalar(np.exp(log_density(family, theta, u, v)))


def partial_u(family, theta, u, v):
    """dC/du: conditional distribution of V given U = u, in [0, 1]."""
    return _maybe_scalar(np.exp(log_partial_u(family, theta, u, v)))


def partial_v(family, theta, u, v):
    """dC/dv: conditional distribution of U given V = v, in [0, 1]."""
    return _maybe_scalar(np.exp(log_partial_v(family, theta, u, v)))


def conditional_inverse(family, theta, u, q):
    """Solve partial_u(u, v) = q for v.

    Closed forms for Normal, Clayton and Frank; bracketed bisection for
    Gumbel.  This is the sampling engine of the conditional-distribution
    method: with U, Q independent Uniform(0,1), the pair
    (U, conditional_inverse(U, Q)) is distributed as the copula.
    """
    theta = _validate_theta(family, theta)
    u = _clip_uv(u)
    q = _clip_uv(q)
    v = _COND_INVERSE[family](theta, u, q)
    return _maybe_scalar(np.clip(v, UV_EPS, 1.0 - UV_EPS))
