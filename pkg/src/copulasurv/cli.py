"""Command-line entry points: fit, simulate, study1, study2.

All subcommands are driven by a JSON config (see README for the
schema); a few common settings can be overridden with flags.  Exit
codes: 0 success, 1 usage/config error, 2 data error, 3 numerical
failure above threshold.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import experiments
from .data import SurvivalData
from .experiments import ConfigError
from .likelihood import ModelSpec
from .simulation import simulate

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_DATA = 2
EXIT_NUMERICAL = 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="copulasurv",
        description="Copula survival regression for semi-competing risks",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("fit", "fit models to a CSV dataset"),
        ("simulate", "draw a dataset from a copula model"),
        ("study1", "Cox vs copula-model coverage study"),
        ("study2", "margin misspecification / AIC selection study"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="JSON config path")
        p.add_argument("--seed", type=int, help="override master seed")
        p.add_argument("--reps", type=int, help="override replication count")
        p.add_argument("--n", type=int, help="override dataset size")
        p.add_argument("--out", help="override output directory")
        p.add_argument("--threads", type=int, help="override worker count")
        if name == "simulate":
            p.add_argument("--latent", action="store_true",
                           help="also write the latent draws")
    return parser


def _apply_overrides(config: dict, args) -> dict:
    if args.seed is not None:
        config["seed"] = args.seed
    if args.reps is not None and "replications" in config:
        config["replications"] = args.reps
    if args.n is not None and "sim_config" in config:
        config["n"] = args.n
    if args.out is not None:
        config["out"] = args.out
    if args.threads is not None and "threads" in config:
        config["threads"] = args.threads
    if getattr(args, "latent", False):
        config["latent"] = True
    if "sim_config" in config:
        config["sim_config"] = replace(
            config["sim_config"], n=config["n"], seed=config["seed"])
    return config


def _out_dir(config: dict) -> Path:
    out = Path(config.get("out") or ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_json(path: Path, doc: dict) -> None:
    path.write_text(json.dumps(doc, indent=2, default=float) + "\n")


def _cmd_fit(config: dict) -> int:
    try:
        data = SurvivalData.from_csv(config["data"])
    except (OSError, ValueError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    models = [ModelSpec(c, m, data.n_covariates)
              for c, m in config["models_to_fit"]]
    names = config.get("covariate_names")
    if names is not None and len(names) != data.n_covariates:
        print("config error: covariate_names length does not match data",
              file=sys.stderr)
        return EXIT_CONFIG
    report = experiments.run_fit(models, data, covariate_names=names)
    out = _out_dir(config)
    _write_json(out / "fit_report.json", experiments.fit_report_json(report))
    text = experiments.fit_report_text(report)
    (out / "fit_report.txt").write_text(text + "\n")
    print(text)
    if not any(e.get("converged") for e in report.entries):
        print("numerical failure: no model converged", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


def _cmd_simulate(config: dict) -> int:
    out = _out_dir(config)
    if config.get("latent"):
        data, trace = simulate(config["sim_config"], return_latent=True)
        arr = np.column_stack([trace.u, trace.v, trace.q,
                               trace.t1, trace.t2, trace.c])
        header = "u,v,q,t1,t2,c"
        np.savetxt(out / "latent.csv", arr, delimiter=",", header=header,
                   comments="")
    else:
        data = simulate(config["sim_config"])
    data.to_csv(out / "data.csv")
    print(f"wrote {data.n} records to {out / 'data.csv'}")
    return EXIT_OK


def _cmd_study(config: dict) -> int:
    if config["kind"] == "study1":
        result = experiments.run_study1(
            config["sim_config"], config["replications"],
            seed=config["seed"], threads=config["threads"],
            covariate_names=config.get("covariate_names"),
        )
    else:
        result = experiments.run_study2(
            config["sim_config"], config["replications"],
            margins_to_fit=config["margins_to_fit"],
            seed=config["seed"], threads=config["threads"],
        )
    out = _out_dir(config)
    _write_json(out / "report.json", experiments.study_report_json(result))
    text = experiments.metrics_table_text(result)
    (out / "report.txt").write_text(text + "\n")
    print(text)
    if result.flagged:
        print("numerical failure: excluded replications exceed threshold",
              file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        config = experiments.load_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if config["kind"] != args.command:
        print(f"config error: config kind '{config['kind']}' does not match "
              f"subcommand '{args.command}'", file=sys.stderr)
        return EXIT_CONFIG
    config = _apply_overrides(config, args)
    if args.command == "fit":
        return _cmd_fit(config)
    if args.command == "simulate":
        return _cmd_simulate(config)
    return _cmd_study(config)


if __name__ == "__main__":
    sys.exit(main())
