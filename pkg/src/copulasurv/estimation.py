"""Maximum-likelihood fitting and Delta-method inference.

The optimizer is a Nelder-Mead simplex run to convergence followed by a
BFGS polish with central-difference gradients.  Standard errors come
from the observed Fisher information (negative inverse of a symmetric
central-difference Hessian at the optimum); hazard ratios and
association parameters get Delta-method variances and 95% Wald
intervals.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from . import copulas, margins
from .copulas import CopulaFamily
from .data import SurvivalData
from .likelihood import ModelSpec, dataset_loglik
from .margins import MarginFamily, Z_95, HazardRatioEstimate

_EPS = np.finfo(float).eps
_HESS_STEP = _EPS ** (1.0 / 3.0)
_GRAD_STEP = _EPS ** (1.0 / 3.0)

# starting intercept of the association predictor, adjacent to each
# family's independence member
_B0_START = {
    CopulaFamily.NORMAL: 0.0,
    CopulaFamily.CLAYTON: np.log(0.5),
    CopulaFamily.FRANK: 0.1,
    CopulaFamily.GUMBEL: np.log(0.1),
}


@dataclass(frozen=True)
class FitOptions:
    """Optimizer controls."""

    simplex_max_iter: int = 5000
    polish_max_iter: int = 200
    loglik_tol: float = 1e-8
    param_tol: float = 1e-6
    gradient_tol: float = 1e-5
    start: np.ndarray = None


@dataclass(frozen=True)
class AssociationEstimate:
    """Association parameter at a covariate pattern, with Delta variance."""

    pattern: tuple
    theta: float
    variance: float
    ci_low: float
    ci_high: float


@dataclass
class FitResult:
    """Fitted model: MLE, covariance, information criteria, derived effects."""

    spec: ModelSpec
    params_hat: np.ndarray
    covariance: np.ndarray
    loglik: float
    aic: float
    n_free: int
    converged: bool
    iterations: int
    hessian_repaired: bool
    free_mask: np.ndarray
    hr_nonterminal: list = field(default_factory=list)
    hr_terminal: list = field(default_factory=list)
    theta_by_group: list = field(default_factory=list)

    @property
    def se(self) -> np.ndarray:
        return np.sqrt(np.diag(self.covariance))


def central_gradient(fun, x, step=None):
    """Central-difference gradient with per-coordinate relative steps."""
    x = np.asarray(x, dtype=float)
    g = np.empty_like(x)
    for j in range(x.size):
        h = (step if step is not None else _GRAD_STEP) * max(abs(x[j]), 1.0)
        xp = x.copy()
        xm = x.copy()
        xp[j] += h
        xm[j] -= h
        g[j] = (fun(xp) - fun(xm)) / (2.0 * h)
    return g


def central_hessian(fun, x):
    """Symmetric central-difference Hessian, steps eps^(1/3)*max(|x_j|,1)."""
    x = np.asarray(x, dtype=float)
    k = x.size
    h = _HESS_STEP * np.maximum(np.abs(x), 1.0)
    f0 = fun(x)
    hess = np.empty((k, k))
    for i in range(k):
        xp = x.copy()
        xm = x.copy()
        xp[i] += h[i]
        xm[i] -= h[i]
        hess[i, i] = (fun(xp) - 2.0 * f0 + fun(xm)) / h[i] ** 2
        for j in range(i + 1, k):
            xpp = x.copy(); xpm = x.copy(); xmp = x.copy(); xmm = x.copy()
            xpp[[i, j]] += [h[i], h[j]]
            xpm[i] += h[i]; xpm[j] -= h[j]
            xmp[i] -= h[i]; xmp[j] += h[j]
            xmm[[i, j]] -= [h[i], h[j]]
            hess[i, j] = hess[j, i] = (
                fun(xpp) - fun(xpm) - fun(xmp) + fun(xmm)
            ) / (4.0 * h[i] * h[j])
    bad = ~np.isfinite(hess)
    if bad.any():
        i, j = np.argwhere(bad)[0]
        raise ValueError(f"non-finite Hessian entry at ({i}, {j})")
    return 0.5 * (hess + hess.T)


def numerical_hessian(spec: ModelSpec, params, data: SurvivalData) -> np.ndarray:
    """Hessian of the dataset log-likelihood at ``params``."""
    params = np.asarray(params, dtype=float)
    if not np.isfinite(dataset_loglik(spec, params, data)):
        raise ValueError("log-likelihood must be finite at the expansion point")
    return central_hessian(lambda p: dataset_loglik(spec, p, data), params)


def _invert_information(hess):
    """Covariance from -H^-1 with an eigenvalue floor for non-PD cases."""
    info = -hess
    eigval, eigvec = np.linalg.eigh(info)
    floor = 1e-10 * max(np.max(eigval), 1e-10)
    repaired = bool(np.any(eigval < floor))
    eigval = np.maximum(eigval, floor)
    cov = (eigvec / eigval) @ eigvec.T
    return 0.5 * (cov + cov.T), repaired


def _censored_margin_loglik(family, coefs, shape_raw, design, t, d):
    rate = np.exp(np.clip(design @ coefs, -margins.PREDICTOR_CAP,
                          margins.PREDICTOR_CAP))
    shape = None
    if family is MarginFamily.WEIBULL:
        shape = np.exp(shape_raw)
    elif family is MarginFamily.GOMPERTZ:
        shape = shape_raw
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        ll = np.where(
            d == 1,
            margins.log_density(family, shape, rate, t),
            margins.log_survival(family, shape, rate, t),
        )
    total = float(np.sum(ll))
    return total if np.isfinite(total) else -np.inf


def fit_univariate_margin(family, t, d, design):
    """Censored MLE of one parametric margin (used for starting values).

    Returns (coefs, shape_raw) where shape_raw is on the packed scale
    (log alpha for Weibull, gamma for Gompertz, absent -> None).
    """
    n_coef = design.shape[1]
    events = max(int(np.sum(d)), 1)
    base = np.log(events / max(float(np.sum(t)), 1e-12))
    x0 = np.zeros(n_coef + (1 if family.n_shape else 0))
    x0[0] = base

    def nll(x):
        shape_raw = x[n_coef] if family.n_shape else None
        return -_censored_margin_loglik(family, x[:n_coef], shape_raw,
                                        design, t, d)

    res = minimize(nll, x0, method="Nelder-Mead",
                   options={"maxiter": 2000, "xatol": 1e-8, "fatol": 1e-10})
    x = res.x if np.isfinite(res.fun) else x0
    coefs = x[:n_coef]
    shape_raw = float(x[n_coef]) if family.n_shape else None
    return coefs, shape_raw


def initial_values(spec: ModelSpec, data: SurvivalData) -> np.ndarray:
    """Starting vector: univariate censored fits for the margins,
    independence-adjacent association intercept, zero slopes."""
    design = data.design
    a, s1 = fit_univariate_margin(spec.margin, data.x, data.d1, design)
    c, s2 = fit_univariate_margin(spec.margin, data.y, data.d2, design)
    b = np.zeros(spec.n_coef)
    b[0] = _B0_START[spec.copula]
    out = np.concatenate([a, c, b])
    if spec.margin.n_shape:
        out = np.concatenate([out, [s1, s2]])
    return out


def fit(spec: ModelSpec, data: SurvivalData, options: FitOptions = None,
        fixed: dict = None) -> FitResult:
    """Maximize the censored joint log-likelihood.

    Parameters
    ----------
    spec, data
        Model specification and dataset.
    options : FitOptions, optional
        Optimizer controls; ``options.start`` overrides the automatic
        starting values.
    fixed : dict, optional
        Parameters held constant, keyed by packed name (e.g. ``"b1"``)
        or index.  Used for the reduced model with association slopes
        pinned at zero.  Fixed entries get zero rows/columns in the
        covariance and do not count toward the AIC dimension.

    Notes
    -----
    If the starting point already satisfies the gradient tolerance the
    simplex stage is skipped, which makes a refit from a previous
    optimum return it unchanged.
    """
    options = options or FitOptions()
    names = spec.param_names
    fixed = fixed or {}
    fixed_idx = {}
    for key, value in fixed.items():
        idx = names.index(key) if isinstance(key, str) else int(key)
        fixed_idx[idx] = float(value)
    free_mask = np.array([i not in fixed_idx for i in range(spec.n_params)])
    if not free_mask.any():
        raise ValueError("at least one parameter must be free")

    full0 = (np.asarray(options.start, dtype=float).copy()
             if options.start is not None else initial_values(spec, data))
    if full0.shape != (spec.n_params,):
        raise ValueError(f"start vector must have length {spec.n_params}")
    for idx, value in fixed_idx.items():
        full0[idx] = value

    def embed(free):
        full = full0.copy()
        full[free_mask] = free
        return full

    def negloglik(free):
        ll = dataset_loglik(spec, embed(free), data)
        return -ll if np.isfinite(ll) else np.inf

    x0 = full0[free_mask]
    iterations = 0

    grad0 = central_gradient(negloglik, x0)
    scale0 = max(abs(negloglik(x0)), 1.0)
    already_converged = (
        np.isfinite(grad0).all()
        and np.max(np.abs(grad0) * np.maximum(np.abs(x0), 1.0)) / scale0
        <= options.gradient_tol
    )

    if already_converged:
        x_best, f_best = x0, negloglik(x0)
        simplex_ok = True
    else:
        nm = minimize(
            negloglik, x0, method="Nelder-Mead",
            options={"maxiter": options.simplex_max_iter,
                     "xatol": options.param_tol,
                     "fatol": options.loglik_tol,
                     "adaptive": len(x0) > 6},
        )
        iterations += nm.nit
        x_best, f_best = nm.x, nm.fun
        simplex_ok = bool(nm.success)

    # quasi-Newton polish with numerical central-difference gradients
    with np.errstate(all="ignore"):
        polish = minimize(
            negloglik, x_best, method="BFGS",
            jac=lambda x: central_gradient(negloglik, x),
            options={"maxiter": options.polish_max_iter,
                     "gtol": options.gradient_tol},
        )
    if np.isfinite(polish.fun) and polish.fun <= f_best:
        x_best, f_best = polish.x, polish.fun
        iterations += polish.nit

    params_hat = embed(x_best)
    loglik = -f_best

    grad = central_gradient(negloglik, x_best)
    scaled = np.max(np.abs(grad) * np.maximum(np.abs(x_best), 1.0))
    scaled /= max(abs(f_best), 1.0)
    converged = bool(np.isfinite(loglik)
                     and (simplex_ok or scaled <= options.gradient_tol))

    hess_free = central_hessian(negloglik, x_best)
    cov_free, repaired = _invert_information(-hess_free)  # hess of -ll
    k_free = int(free_mask.sum())
    covariance = np.zeros((spec.n_params, spec.n_params))
    covariance[np.ix_(free_mask, free_mask)] = cov_free

    result = FitResult(
        spec=spec,
        params_hat=params_hat,
        covariance=covariance,
        loglik=loglik,
        aic=2.0 * k_free - 2.0 * loglik,
        n_free=k_free,
        converged=converged,
        iterations=iterations,
        hessian_repaired=repaired,
        free_mask=free_mask,
    )
    _attach_derived(result, data)
    return result


def _attach_derived(result: FitResult, data: SurvivalData) -> None:
    spec = result.spec
    params = result.params_hat
    var = np.diag(result.covariance)
    p = spec.n_covariates
    a_off, c_off = 0, spec.n_coef
    for k in range(1, p + 1):
        result.hr_nonterminal.append(
            margins.hazard_ratio(params[a_off + k], var[a_off + k]))
        result.hr_terminal.append(
            margins.hazard_ratio(params[c_off + k], var[c_off + k]))

    b = params[spec.slice_b]
    cov_b = result.covariance[spec.slice_b, spec.slice_b]
    patterns = [tuple(0.0 for _ in range(p))]
    for k in range(p):
        patterns.append(tuple(1.0 if j == k else 0.0 for j in range(p)))
    for pattern in patterns:
        result.theta_by_group.append(
            association_estimate(spec.copula, b, cov_b, pattern))


def delta_var_theta(family: CopulaFamily, b_hat, cov_b, w) -> float:
    """Delta-method variance of the association parameter at covariates w.

    The gradient of the link with respect to each coefficient b_k is
    W_k * dtheta/deta: 4 W_k e^(2 eta)/(e^(2 eta)+1)^2 for the Normal
    link, W_k e^eta for Clayton and Gumbel, and W_k itself for Frank.
    """
    b_hat = np.asarray(b_hat, dtype=float)
    cov_b = np.asarray(cov_b, dtype=float)
    w1 = np.concatenate([[1.0], np.asarray(w, dtype=float)])
    if cov_b.shape != (w1.size, w1.size):
        raise ValueError("covariance dimension does not match covariates")
    eta = float(b_hat @ w1)
    if family is CopulaFamily.NORMAL:
        e2 = np.exp(2.0 * eta)
        grad = w1 * 4.0 * e2 / (e2 + 1.0) ** 2
    elif family in (CopulaFamily.CLAYTON, CopulaFamily.GUMBEL):
        grad = w1 * np.exp(eta)
    else:
        grad = w1
    out = float(grad @ cov_b @ grad)
    if out < -1e-12:
        raise ValueError("coefficient covariance is not positive semidefinite")
    return max(out, 0.0)


def association_estimate(family: CopulaFamily, b_hat, cov_b,
                         pattern) -> AssociationEstimate:
    """Point estimate, Delta variance and Wald CI of theta at a pattern."""
    theta = copulas.link_theta(family, b_hat, pattern)
    v = delta_var_theta(family, b_hat, cov_b, pattern)
    half = Z_95 * np.sqrt(v)
    return AssociationEstimate(tuple(pattern), float(theta), v,
                               float(theta - half), float(theta + half))


def aic(result: FitResult) -> float:
    """Akaike information criterion, 2k - 2 logL with k free parameters."""
    return result.aic


def select_best(fits) -> int:
    """Index of the lowest-AIC fit; ties break to fewer parameters,
    then to earliest position."""
    fits = list(fits)
    if not fits:
        raise ValueError("no fits to select from")
    keys = [(f.aic, f.n_free, i) for i, f in enumerate(fits)]
    return min(keys)[2]
