"""Bivariate standard normal CDF.

Vectorized port of the Drezner-Wesolowsky / Genz single-quadrature
algorithm (Gauss-Legendre on the arcsine-transformed correlation for
moderate correlation, plus the asymptotic expansion of Drezner &
Wesolowsky for |rho| > 0.925).  Absolute accuracy is ~1e-14, well within
the 1e-7 budget needed by the Normal copula.
"""

from __future__ import annotations

import numpy as np
from scipy.special import ndtr

_TWOPI = 2.0 * np.pi

# 20-point Gauss-Legendre rule on [-1, 1]
_GL_X, _GL_W = np.polynomial.legendre.leggauss(20)


def _bvnu_moderate(h, k, r):
    """P(X > h, Y > k) for |r| < 0.925 via Gauss-Legendre quadrature."""
    hk = h * k
    hs = 0.5 * (h * h + k * k)
    asr = np.arcsin(r)
    sn = np.sin(0.5 * asr[..., None] * (_GL_X + 1.0))
    integrand = np.exp((sn * hk[..., None] - hs[..., None]) / (1.0 - sn * sn))
    quad = integrand @ _GL_W
    return quad * asr / (2.0 * _TWOPI) + ndtr(-h) * ndtr(-k)


def _bvnu_tail(h, k, r):
    """P(X > h, Y > k) for 0.925 <= |r| < 1 (Drezner-Wesolowsky expansion)."""
    neg = r < 0
    k = np.where(neg, -k, k)
    hk = h * k

    a2 = (1.0 - r) * (1.0 + r)
    a = np.sqrt(a2)
    bs = (h - k) ** 2
    c = (4.0 - hk) / 8.0
    d = (12.0 - hk) / 16.0
    asr = -0.5 * (bs / a2 + hk)
    bvn = np.where(
        asr > -100.0,
        a * np.exp(asr) * (1.0 - c * (bs - a2) * (1.0 - d * bs / 5.0) / 3.0
                           + c * d * a2 * a2 / 5.0),
        0.0,
    )
    b = np.sqrt(bs)
    with np.errstate(over="ignore"):
        correction = (np.exp(-0.5 * hk) * np.sqrt(_TWOPI) * ndtr(-b / a) * b
                      * (1.0 - c * bs * (1.0 - d * bs / 5.0) / 3.0))
    bvn = bvn - np.where(-hk < 100.0, correction, 0.0)

    ah = 0.5 * a
    xs = (ah[..., None] * (_GL_X + 1.0)) ** 2
    rs = np.sqrt(1.0 - xs)
    asr1 = -0.5 * (bs[..., None] / xs + hk[..., None])
    hk_ = hk[..., None]
    c_ = c[..., None]
    d_ = d[..., None]
    term = np.where(
        asr1 > -100.0,
        np.exp(asr1) * (np.exp(-0.5 * hk_ * (1.0 - rs) / (1.0 + rs)) / rs
                        - (1.0 + c_ * xs * (1.0 + d_ * xs))),
        0.0,
    )
    bvn = bvn + ah * (term @ _GL_W)
    bvn = -bvn / _TWOPI

    pos_part = bvn + ndtr(-np.maximum(h, k))
    # for r < 0 (k already flipped): P = -bvn + max-tail difference
    diff = np.where(h < 0.0, ndtr(k) - ndtr(h), ndtr(-h) - ndtr(-k))
    neg_part = -bvn + np.where(k > h, diff, 0.0)
    return np.where(neg, neg_part, pos_part)


def bvn_cdf(x, y, rho):
    """P(X <= x, Y <= y) for standard bivariate normal with correlation rho.

    Parameters
    ----------
    x, y : array_like
        Upper integration limits (finite).
    rho : array_like in [-1, 1]
        Correlation coefficient(s); broadcast against x and y.

    Returns
    -------
    ndarray or float
        Probabilities in [0, 1].
    """
    x, y, rho = np.broadcast_arrays(
        np.asarray(x, dtype=float),
        np.asarray(y, dtype=float),
        np.asarray(rho, dtype=float),
    )
    scalar = x.ndim == 0
    x, y, rho = np.atleast_1d(x, y, rho)

    h, k = -x, -y
    out = np.empty_like(x)

    degenerate = np.abs(rho) > 1.0 - 1e-14
    moderate = (np.abs(rho) < 0.925) & ~degenerate
    tail = ~moderate & ~degenerate

    if np.any(moderate):
        out[moderate] = _bvnu_moderate(h[moderate], k[moderate], rho[moderate])
    if np.any(tail):
        out[tail] = _bvnu_tail(h[tail], k[tail], rho[tail])
    if np.any(degenerate):
        pos = rho[degenerate] > 0
        upper = ndtr(-np.maximum(h[degenerate], k[degenerate]))
        lower = np.maximum(ndtr(x[degenerate]) + ndtr(y[degenerate]) - 1.0, 0.0)
        out[degenerate] = np.where(pos, upper, lower)

    out = np.clip(out, 0.0, 1.0)
    return float(out[0]) if scalar else out
