"""Monte Carlo experiment harness and fit reporting.

Study 1 compares, on data simulated from a chosen copula, the Cox model
(each endpoint separately), the copula model with covariates in the
hazard rates only ("model 1", association slopes pinned at zero), and
the full copula model ("model 2").  Study 2 simulates from one margin
family, fits several margin families with the generating copula,
selects by AIC, and tracks metrics of the selected model plus the
selection tally.

Replications run in a process pool; every replication derives its own
random stream from (master seed, replication index), so results are
identical for any degree of parallelism, and aggregation walks
replications in index order.
"""

from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import presets
from .copulas import CopulaFamily, link_theta
from .cox import cox_fit
from .data import SurvivalData
from .estimation import (FitOptions, FitResult, association_estimate, fit,
                         initial_values, select_best)
from .likelihood import ModelSpec
from .margins import MarginFamily, Z_95
from .simulation import SimConfig, simulate

SCHEMA_VERSION = "1"
DEFAULT_SEED = 20240817
MAX_FAILURE_FRACTION = 0.05


class ConfigError(ValueError):
    """Invalid study configuration."""


@dataclass(frozen=True)
class MetricsRow:
    """Bias / coverage / MSE summary for one estimand."""

    estimand: str
    true_value: float
    mean_estimate: float
    bias: float
    mse: float
    coverage: float
    n_used: int


@dataclass
class StudyResult:
    """Metrics table plus raw per-replication estimates."""

    kind: str
    rows: list
    exclusions: dict
    replications: int
    flagged: bool
    raw: dict = field(default_factory=dict)
    percent_chosen: dict = field(default_factory=dict)
    config: dict = field(default_factory=dict)


def compute_metrics(estimates, ci_lows, ci_highs, truth, estimand="",
                    n_total=None) -> MetricsRow:
    """bias = mean(est) - truth; MSE = mean((est - truth)^2);
    CP = 100 * fraction of intervals containing the truth."""
    estimates = np.asarray(estimates, dtype=float)
    ci_lows = np.asarray(ci_lows, dtype=float)
    ci_highs = np.asarray(ci_highs, dtype=float)
    if estimates.size == 0:
        raise ValueError("no estimates to summarize")
    if not (estimates.shape == ci_lows.shape == ci_highs.shape):
        raise ValueError("estimates and interval bounds must align")
    mean = float(np.mean(estimates))
    return MetricsRow(
        estimand=estimand,
        true_value=float(truth),
        mean_estimate=mean,
        bias=mean - float(truth),
        mse=float(np.mean((estimates - truth) ** 2)),
        coverage=100.0 * float(np.mean((ci_lows <= truth)
                                       & (truth <= ci_highs))),
        n_used=int(estimates.size),
    )


def _rep_sim_config(config: SimConfig, master_seed: int, rep: int) -> SimConfig:
    """Per-replication generator config with an independent child stream."""
    return replace(config, seed=(int(master_seed), int(rep)))


# ---------------------------------------------------------------------------
# study 1
# ---------------------------------------------------------------------------


def _hr_triplet(est):
    return est.hr, est.ci_low, est.ci_high


def _study1_replicate(payload):
    sim_config, master_seed, rep = payload
    data = simulate(_rep_sim_config(sim_config, master_seed, rep))
    spec = sim_config.spec
    p = spec.n_covariates
    out = {}

    for label, times, events in (("cox_nt", data.x, data.d1),
                                 ("cox_t", data.y, data.d2)):
        cf = cox_fit(times, events, data.w)
        out[label] = {
            "ok": bool(cf.converged),
            "hr": [_hr_triplet(h) for h in cf.hr],
        }

    start = initial_values(spec, data)
    frozen = {f"b{k}": 0.0 for k in range(1, p + 1)}

    for label, fixed in (("copula1", frozen), ("copula2", None)):
        try:
            res = fit(spec, data, options=FitOptions(start=start),
                      fixed=fixed)
            ok = res.converged and not res.hessian_repaired
            # the reduced model's optimum is a good launch point for the
            # full model
            if label == "copula1" and res.converged:
                start = res.params_hat
        except (ValueError, np.linalg.LinAlgError):
            res, ok = None, False
        entry = {"ok": ok}
        if res is not None:
            entry["hr_nt"] = [_hr_triplet(h) for h in res.hr_nonterminal]
            entry["hr_t"] = [_hr_triplet(h) for h in res.hr_terminal]
            b = res.params_hat[spec.slice_b]
            se_b = res.se[spec.slice_b]
            entry["b"] = [(float(b[k]),
                           float(b[k] - Z_95 * se_b[k]),
                           float(b[k] + Z_95 * se_b[k]))
                          for k in range(p + 1)]
            entry["a"] = [float(v) for v in res.params_hat[spec.slice_a]]
            entry["var_hr_nt"] = [h.variance for h in res.hr_nonterminal]
        out[label] = entry
    return out


def _run_parallel(worker, payloads, threads):
    if threads <= 1:
        return [worker(p) for p in payloads]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(worker, payloads, chunksize=1))


def _collect(rows, label, estimand, truth, reps, triplets):
    """Append a metrics row from per-replication (est, lo, hi) triplets."""
    if not triplets:
        return
    est, lo, hi = (np.array(t) for t in zip(*triplets))
    rows.append(compute_metrics(est, lo, hi, truth,
                                estimand=f"{label}/{estimand}",
                                n_total=reps))


def run_study1(sim_config: SimConfig, replications: int,
               seed: int = DEFAULT_SEED, threads: int = 1,
               covariate_names=None) -> StudyResult:
    """Cox vs copula models 1 and 2 on data from ``sim_config``."""
    if replications < 1:
        raise ValueError("replications must be >= 1")
    spec = sim_config.spec
    p = spec.n_covariates
    names = list(covariate_names or (f"w{k + 1}" for k in range(p)))
    a_true, c_true, b_true, _, _ = spec.unpack(sim_config.truth)

    payloads = [(sim_config, seed, r) for r in range(replications)]
    results = _run_parallel(_study1_replicate, payloads, threads)

    rows = []
    exclusions = {}
    raw = {}
    for label in ("cox_nt", "cox_t"):
        good = [r[label] for r in results if r[label]["ok"]]
        exclusions[label] = replications - len(good)
        kind = "HR_NT" if label == "cox_nt" else "HR_T"
        truths = a_true if label == "cox_nt" else c_true
        for k in range(p):
            _collect(rows, label, f"{kind}[{names[k]}]",
                     float(np.exp(truths[k + 1])), replications,
                     [g["hr"][k] for g in good])

    for label in ("copula1", "copula2"):
        good = [r[label] for r in results if r[label]["ok"]]
        exclusions[label] = replications - len(good)
        for k in range(p):
            _collect(rows, label, f"HR_NT[{names[k]}]",
                     float(np.exp(a_true[k + 1])), replications,
                     [g["hr_nt"][k] for g in good])
        for k in range(p):
            _collect(rows, label, f"HR_T[{names[k]}]",
                     float(np.exp(c_true[k + 1])), replications,
                     [g["hr_t"][k] for g in good])
        if label == "copula2":
            for k in range(p + 1):
                _collect(rows, label, f"b{k}", float(b_true[k]),
                         replications, [g["b"][k] for g in good])
            raw["copula2_a"] = np.array([g["a"] for g in good])
            raw["copula2_hr_nt"] = np.array(
                [[t[0] for t in g["hr_nt"]] for g in good])
            raw["copula2_var_hr_nt"] = np.array(
                [g["var_hr_nt"] for g in good])

    flagged = any(excl > MAX_FAILURE_FRACTION * replications
                  for excl in exclusions.values())
    return StudyResult(
        kind="study1", rows=rows, exclusions=exclusions,
        replications=replications, flagged=flagged, raw=raw,
        config={"copula": spec.copula.value, "margin": spec.margin.value,
                "n": sim_config.n, "replications": replications,
                "seed": seed},
    )


# ---------------------------------------------------------------------------
# study 2
# ---------------------------------------------------------------------------


def _study2_replicate(payload):
    sim_config, margins_to_fit, master_seed, rep = payload
    data = simulate(_rep_sim_config(sim_config, master_seed, rep))
    copula = sim_config.spec.copula

    fits = []
    for margin in margins_to_fit:
        spec = ModelSpec(copula, margin, sim_config.spec.n_covariates)
        try:
            fits.append(fit(spec, data))
        except (ValueError, np.linalg.LinAlgError):
            fits.append(None)
    usable = [(i, f) for i, f in enumerate(fits) if f is not None]
    if not usable:
        return {"ok": False}
    idx = select_best([f for _, f in usable])
    chosen_pos, chosen = usable[idx]
    spec = chosen.spec
    entry = {
        "ok": bool(chosen.converged and not chosen.hessian_repaired),
        "chosen": spec.margin.value,
        "hr_nt": _hr_triplet(chosen.hr_nonterminal[0]),
        "hr_t": _hr_triplet(chosen.hr_terminal[0]),
    }
    b = chosen.params_hat[spec.slice_b]
    cov_b = chosen.covariance[spec.slice_b, spec.slice_b]
    for key, pattern in (("theta_ref", (0.0,)), ("theta_cov", (1.0,))):
        est = association_estimate(spec.copula, b, cov_b, pattern)
        entry[key] = (est.theta, est.ci_low, est.ci_high)
    return entry


def run_study2(sim_config: SimConfig, replications: int,
               margins_to_fit=None, seed: int = DEFAULT_SEED,
               threads: int = 1) -> StudyResult:
    """Margin misspecification with AIC selection."""
    if replications < 1:
        raise ValueError("replications must be >= 1")
    margins_to_fit = list(margins_to_fit or (
        MarginFamily.EXPONENTIAL, MarginFamily.WEIBULL, MarginFamily.GOMPERTZ))
    if len(margins_to_fit) < 2:
        raise ValueError("study 2 needs at least two margin families to compare")
    spec = sim_config.spec
    a_true, c_true, b_true, _, _ = spec.unpack(sim_config.truth)

    payloads = [(sim_config, margins_to_fit, seed, r)
                for r in range(replications)]
    results = _run_parallel(_study2_replicate, payloads, threads)

    tally = {m.value: 0 for m in margins_to_fit}
    for r in results:
        if "chosen" in r:
            tally[r["chosen"]] += 1
    n_chosen = max(sum(tally.values()), 1)
    percent_chosen = {k: 100.0 * v / n_chosen for k, v in tally.items()}

    good = [r for r in results if r["ok"]]
    exclusions = {"selected_model": replications - len(good)}
    truths = {
        "HR_NT": float(np.exp(a_true[1])),
        "HR_T": float(np.exp(c_true[1])),
        "theta_ref": float(link_theta(spec.copula, b_true, (0.0,))),
        "theta_cov": float(link_theta(spec.copula, b_true, (1.0,))),
    }
    keymap = {"HR_NT": "hr_nt", "HR_T": "hr_t",
              "theta_ref": "theta_ref", "theta_cov": "theta_cov"}
    rows = []
    for estimand, truth in truths.items():
        _collect(rows, "selected", estimand, truth, replications,
                 [g[keymap[estimand]] for g in good])

    flagged = exclusions["selected_model"] > MAX_FAILURE_FRACTION * replications
    return StudyResult(
        kind="study2", rows=rows, exclusions=exclusions,
        replications=replications, flagged=flagged,
        percent_chosen=percent_chosen,
        config={"copula": spec.copula.value,
                "true_margin": spec.margin.value,
                "margins_to_fit": [m.value for m in margins_to_fit],
                "n": sim_config.n, "replications": replications,
                "seed": seed},
    )


# ---------------------------------------------------------------------------
# single-dataset fit reports
# ---------------------------------------------------------------------------


@dataclass
class FitReport:
    """Fits of several model specs to one dataset, ranked by AIC."""

    entries: list
    aic_ranking: list
    covariate_names: list


def run_fit(models, data: SurvivalData, covariate_names=None) -> FitReport:
    """Fit every model spec to ``data`` and assemble a report.

    Non-convergence is recorded per model and does not stop the run.
    """
    models = list(models)
    if not models:
        raise ValueError("no models to fit")
    p = data.n_covariates
    names = list(covariate_names or (f"w{k + 1}" for k in range(p)))

    entries = []
    for spec in models:
        entry = {
            "copula": spec.copula.value,
            "margin": spec.margin.value,
            "converged": False,
            "error": None,
        }
        try:
            res = fit(spec, data)
        except (ValueError, np.linalg.LinAlgError) as exc:
            entry["error"] = str(exc)
            entries.append(entry)
            continue
        se = res.se
        entry.update(
            converged=bool(res.converged),
            hessian_repaired=bool(res.hessian_repaired),
            loglik=res.loglik,
            aic=res.aic,
            params={name: float(v) for name, v in
                    zip(spec.param_names, res.params_hat)},
            se={name: float(v) for name, v in zip(spec.param_names, se)},
            hr_nonterminal={names[k]: vars(res.hr_nonterminal[k])
                            for k in range(p)},
            hr_terminal={names[k]: vars(res.hr_terminal[k])
                         for k in range(p)},
            association=[
                {"pattern": list(est.pattern), "theta": est.theta,
                 "variance": est.variance, "ci_low": est.ci_low,
                 "ci_high": est.ci_high}
                for est in res.theta_by_group
            ],
        )
        entries.append(entry)

    ranked = sorted(
        (i for i, e in enumerate(entries) if e.get("aic") is not None),
        key=lambda i: (entries[i]["aic"], i),
    )
    return FitReport(entries=entries, aic_ranking=ranked,
                     covariate_names=names)


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------


def metrics_table_text(result: StudyResult) -> str:
    """Aligned plain-text rendering of a study's metrics table."""
    header = f"{'estimand':<28} {'true':>8} {'mean':>8} {'bias':>8} " \
             f"{'CP%':>6} {'MSE':>9} {'used':>5}"
    lines = [header, "-" * len(header)]
    for row in result.rows:
        lines.append(
            f"{row.estimand:<28} {row.true_value:>8.3f} "
            f"{row.mean_estimate:>8.3f} {row.bias:>+8.3f} "
            f"{row.coverage:>6.1f} {row.mse:>9.4f} {row.n_used:>5d}"
        )
    if result.percent_chosen:
        lines.append("")
        lines.append("percent chosen: " + ", ".join(
            f"{k}={v:.1f}%" for k, v in result.percent_chosen.items()))
    lines.append("")
    lines.append("exclusions: " + ", ".join(
        f"{k}={v}" for k, v in result.exclusions.items()))
    if result.flagged:
        lines.append("WARNING: excluded replications exceed "
                     f"{100 * MAX_FAILURE_FRACTION:.0f}%")
    return "\n".join(lines)


def study_report_json(result: StudyResult) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": result.kind,
        "config": result.config,
        "replications": result.replications,
        "flagged": result.flagged,
        "exclusions": result.exclusions,
        "percent_chosen": result.percent_chosen,
        "metrics": [vars(row) for row in result.rows],
    }


def fit_report_json(report: FitReport) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "fit",
        "covariates": report.covariate_names,
        "aic_ranking": [
            {"copula": report.entries[i]["copula"],
             "margin": report.entries[i]["margin"],
             "aic": report.entries[i]["aic"]}
            for i in report.aic_ranking
        ],
        "models": report.entries,
    }


def fit_report_text(report: FitReport) -> str:
    lines = []
    for entry in report.entries:
        title = f"{entry['copula']} copula, {entry['margin']} margins"
        lines.append(title)
        lines.append("-" * len(title))
        if entry.get("error"):
            lines.append(f"  failed: {entry['error']}")
            lines.append("")
            continue
        lines.append(f"  loglik {entry['loglik']:.3f}   AIC {entry['aic']:.1f}"
                     f"   converged {entry['converged']}")
        lines.append(f"  {'covariate':<10} {'HR_NT (95% CI)':>26} "
                     f"{'HR_T (95% CI)':>26}")
        for name in report.covariate_names:
            nt = entry["hr_nonterminal"][name]
            t = entry["hr_terminal"][name]
            lines.append(
                f"  {name:<10} "
                f"{nt['hr']:>8.3f} ({nt['ci_low']:.3f}, {nt['ci_high']:.3f})"
                f"{t['hr']:>10.3f} ({t['ci_low']:.3f}, {t['ci_high']:.3f})"
            )
        lines.append("  association coefficients:")
        for name, value in entry["params"].items():
            if not name.startswith("b"):
                continue
            se = entry["se"][name]
            lines.append(f"    {name}: {value:+.3f} "
                         f"({value - Z_95 * se:+.3f}, {value + Z_95 * se:+.3f})")
        lines.append("")
    if report.aic_ranking:
        best = report.entries[report.aic_ranking[0]]
        lines.append(f"lowest AIC: {best['copula']} copula, "
                     f"{best['margin']} margins (AIC {best['aic']:.1f})")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# JSON configuration
# ---------------------------------------------------------------------------

_KIND_KEYS = {
    "fit": {"kind", "seed", "out", "data", "models_to_fit",
            "covariate_names"},
    "simulate": {"kind", "seed", "out", "n", "copula", "margin", "truth",
                 "covariate_prevalences", "censor_max", "latent",
                 "covariate_names"},
    "study1": {"kind", "seed", "out", "n", "copula", "truth", "replications",
               "covariate_prevalences", "censor_max", "threads",
               "covariate_names"},
    "study2": {"kind", "seed", "out", "n", "copula", "margin", "truth",
               "replications", "covariate_prevalences", "censor_max",
               "threads", "margins_to_fit"},
}


def _parse_enum(cls, value, what):
    try:
        return cls(str(value).lower())
    except ValueError:
        valid = ", ".join(m.value for m in cls)
        raise ConfigError(f"unknown {what} '{value}' (expected one of: "
                          f"{valid})") from None


def parse_config(doc: dict) -> dict:
    """Validate a configuration document; unknown keys are errors.

    Returns a normalized dict with a ``kind`` key and typed fields.
    """
    if not isinstance(doc, dict):
        raise ConfigError("configuration must be a JSON object")
    kind = doc.get("kind")
    if kind not in _KIND_KEYS:
        raise ConfigError(
            "config key 'kind' must be one of: " + ", ".join(_KIND_KEYS))
    allowed = _KIND_KEYS[kind]
    for key in doc:
        if key not in allowed:
            raise ConfigError(f"unknown config key '{key}' for kind '{kind}'")

    out = {"kind": kind,
           "seed": int(doc.get("seed", DEFAULT_SEED)),
           "out": doc.get("out")}

    if kind == "fit":
        if "data" not in doc:
            raise ConfigError("fit config requires 'data' (CSV path)")
        if not doc.get("models_to_fit"):
            raise ConfigError("fit config requires a non-empty "
                              "'models_to_fit' list")
        out["data"] = str(doc["data"])
        out["models_to_fit"] = [
            (_parse_enum(CopulaFamily, m.get("copula"), "copula"),
             _parse_enum(MarginFamily, m.get("margin"), "margin"))
            for m in doc["models_to_fit"]
        ]
        out["covariate_names"] = doc.get("covariate_names")
        return out

    out["n"] = int(doc.get("n", 1000))
    out["censor_max"] = float(doc.get("censor_max",
                                      presets.DEFAULT_CENSOR_MAX))
    out["threads"] = int(doc.get("threads", 1))
    copula = _parse_enum(CopulaFamily, doc.get("copula", "clayton"), "copula")
    out["copula"] = copula

    if kind == "study1":
        margin = MarginFamily.EXPONENTIAL
        default_prevs = presets.STUDY1_PREVALENCES
        default_names = list(presets.STUDY1_COVARIATE_NAMES)
    else:
        margin = _parse_enum(MarginFamily, doc.get("margin", "exponential"),
                             "margin")
        default_prevs = presets.STUDY2_PREVALENCES
        default_names = list(presets.STUDY2_COVARIATE_NAMES)
    out["margin"] = margin
    prevs = tuple(doc.get("covariate_prevalences", default_prevs))
    out["covariate_prevalences"] = prevs
    out["covariate_names"] = list(doc.get("covariate_names", default_names))

    spec = ModelSpec(copula, margin, len(prevs))
    if "truth" in doc:
        t = doc["truth"]
        extra = set(t) - {"a", "c", "b", "shapes"}
        if extra:
            raise ConfigError(
                f"unknown truth key '{sorted(extra)[0]}'")
        try:
            truth = spec.pack(a=t["a"], c=t["c"], b=t["b"],
                              shapes=t.get("shapes"))
        except (KeyError, ValueError) as exc:
            raise ConfigError(f"invalid truth block: {exc}") from None
    else:
        if kind == "study1" or (kind == "simulate"
                                and margin is MarginFamily.EXPONENTIAL
                                and len(prevs) == 3):
            truth = presets.study1_truth(copula)
        else:
            try:
                truth = presets.study2_truth(copula, margin)
            except KeyError:
                raise ConfigError(
                    "no default truth for this configuration; supply "
                    "'truth'") from None
        if spec.n_params != truth.shape[0]:
            raise ConfigError("default truth does not match the covariate "
                              "count; supply 'truth'")
    out["sim_config"] = SimConfig(
        spec=spec, truth=truth, n=out["n"],
        covariate_prevalences=prevs, censor_max=out["censor_max"],
        seed=out["seed"])

    if kind in ("study1", "study2"):
        out["replications"] = int(doc.get("replications", 200))
    if kind == "study2":
        margins_to_fit = doc.get(
            "margins_to_fit", ["exponential", "weibull", "gompertz"])
        out["margins_to_fit"] = [
            _parse_enum(MarginFamily, m, "margin") for m in margins_to_fit]
    if kind == "simulate":
        out["latent"] = bool(doc.get("latent", False))
    return out


def load_config(path) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON in {path}: {exc}") from None
    return parse_config(doc)
