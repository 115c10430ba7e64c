"""Cox proportional hazards by Newton-Raphson on the Breslow partial
likelihood.

Used as the comparator model: fitted to each endpoint separately, with
the terminal event treated as plain censoring of the non-terminal one.
Ties share a risk set (Breslow); simulated continuous times make them
measure-zero anyway.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import margins

# |coef| beyond this signals monotone likelihood: the score can
# underflow to zero while the true maximizer sits at infinity
_BETA_BOUND = 15.0


@dataclass
class CoxFit:
    """Partial-likelihood fit for one endpoint."""

    coefficients: np.ndarray
    covariance: np.ndarray
    loglik: float
    converged: bool
    iterations: int
    hr: list = field(default_factory=list)

    @property
    def se(self) -> np.ndarray:
        return np.sqrt(np.diag(self.covariance))


def _partial_terms(beta, times, events, w):
    """Breslow partial log-likelihood with score and information.

    Risk sets are computed by sorting times in decreasing order and
    accumulating sufficient statistics, so tied event times share one
    risk set.
    """
    order = np.argsort(-times, kind="stable")
    t = times[order]
    d = events[order].astype(bool)
    x = w[order]
    eta = x @ beta
    eta = np.clip(eta, -500.0, 500.0)
    r = np.exp(eta)

    s0 = np.cumsum(r)
    s1 = np.cumsum(x * r[:, None], axis=0)
    outer = np.einsum("ni,nj->nij", x, x) * r[:, None, None]
    s2 = np.cumsum(outer, axis=0)

    # index of the last position sharing each time, so ties enter the
    # risk set together (times sorted descending)
    last = np.searchsorted(-t, -t, side="right") - 1
    s0_d = s0[last][d]
    s1_d = s1[last][d]
    s2_d = s2[last][d]

    loglik = float(np.sum(eta[d]) - np.sum(np.log(s0_d)))
    mean = s1_d / s0_d[:, None]
    score = np.sum(x[d] - mean, axis=0)
    info = (np.sum(s2_d / s0_d[:, None, None], axis=0)
            - mean.T @ mean)
    return loglik, score, info


def cox_fit(times, events, w, max_iter: int = 100, tol: float = 1e-9) -> CoxFit:
    """Fit a Cox model with binary covariates.

    Parameters
    ----------
    times : array_like, shape (n,)
        Observed times (event or censoring), strictly positive.
    events : array_like, shape (n,)
        Event indicators in {0, 1}.
    w : array_like, shape (n, p)
        Covariate matrix.

    Returns
    -------
    CoxFit
        With Newton-Raphson estimates, inverse-information covariance,
        and Delta-method hazard-ratio intervals per covariate.  A
        monotone (separated) likelihood is reported via
        ``converged=False``.
    """
    times = np.asarray(times, dtype=float)
    events = np.asarray(events, dtype=int)
    w = np.asarray(w, dtype=float)
    if w.ndim == 1:
        w = w.reshape(-1, 1)
    if np.any(times <= 0):
        raise ValueError("times must be positive")
    if not np.isin(events, (0, 1)).all():
        raise ValueError("event indicators must be 0 or 1")
    n, p = w.shape

    beta = np.zeros(p)
    loglik, score, info = _partial_terms(beta, times, events, w)
    converged = bool(np.max(np.abs(score)) <= tol)
    iterations = 0
    for iterations in range(1, max_iter + 1):
        if converged:
            break
        try:
            step = np.linalg.solve(info, score)
        except np.linalg.LinAlgError:
            break
        # step halving keeps the partial likelihood increasing
        scale = 1.0
        for _ in range(30):
            cand = beta + scale * step
            cand_ll, cand_score, cand_info = _partial_terms(
                cand, times, events, w)
            if cand_ll >= loglik - 1e-12:
                break
            scale *= 0.5
        beta, loglik, score, info = cand, cand_ll, cand_score, cand_info
        if np.max(np.abs(score)) <= tol:
            converged = True
            break
        if np.max(np.abs(beta)) > _BETA_BOUND:
            converged = False  # monotone likelihood / separation
            break
    if np.max(np.abs(beta)) > _BETA_BOUND:
        converged = False

    try:
        covariance = np.linalg.inv(info)
        covariance = 0.5 * (covariance + covariance.T)
    except np.linalg.LinAlgError:
        covariance = np.full((p, p), np.nan)
        converged = False

    result = CoxFit(
        coefficients=beta,
        covariance=covariance,
        loglik=loglik,
        converged=converged,
        iterations=iterations,
    )
    for k in range(p):
        var_k = covariance[k, k] if np.isfinite(covariance[k, k]) else 0.0
        result.hr.append(margins.hazard_ratio(beta[k], max(var_k, 0.0)))
    return result
