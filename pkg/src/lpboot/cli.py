"""Command-line front end: experiment drivers (ks, coverage, power, probe),
one-shot hypothesis tests on CSV data, and lp-ball volumes.

Exit codes: 0 success, 2 configuration/usage error, 1 runtime failure.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from .harness import (ExperimentConfig, config_from_dict, parse_config,
                      paper_scale_preset, run_experiment)
from .inference import EstimatorSpec, TestSpec, run_test
from .inference import lp_ball_volume
from .lp import LpExponent
from .sampling import RngSeed

CONFIG_ERROR = 2
RUNTIME_ERROR = 1


class ConfigError(Exception):
    pass


def _threads_default() -> int:
    env = os.environ.get("HDBOOT_THREADS", "")
    try:
        return max(int(env), 1) if env else 1
    except ValueError:
        return 1


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="lpboot",
                                 description="Bootstrap inference for high-dimensional lp-statistics")
    sub = ap.add_subparsers(dest="command", required=True)

    def add_experiment(name: str, help_text: str):
        sp = sub.add_parser(name, help=help_text)
        sp.add_argument("--config", help="flat key=value configuration file")
        sp.add_argument("--seed", type=int, help="master seed (overrides config)")
        sp.add_argument("--out", help="output CSV path (overrides config)")
        sp.add_argument("--threads", type=int, default=None,
                        help="worker threads (default: HDBOOT_THREADS or 1)")
        sp.add_argument("--paper-scale", action="store_true",
                        help="full-size preset (hours of compute)")
        return sp

    add_experiment("ks", "distribution-estimation accuracy experiment")
    add_experiment("coverage", "confidence-set coverage experiment")
    pw = add_experiment("power", "power-curve experiment")
    pw.add_argument("--sparse", action="store_true",
                    help="sparse alternative (default: dense)")
    add_experiment("probe", "concentration/comparison diagnostic probes")

    ts = sub.add_parser("test", help="bootstrap mean test on a CSV data file")
    ts.add_argument("data", help="CSV of observations, one row per sample")
    ts.add_argument("--header", action="store_true", help="skip one header line")
    ts.add_argument("--M-file", dest="M_file", help="CSV restriction matrix (default: identity)")
    ts.add_argument("--m0-file", dest="m0_file", help="CSV target vector (default: zero)")
    ts.add_argument("--p", default="2", help="norm exponent: number, 'logd', or 'inf'")
    ts.add_argument("--alpha", type=float, default=0.05)
    ts.add_argument("--estimator", default="corr_cv",
                    help="naive | hard(l) | corr_cv | band(l)")
    ts.add_argument("--B", type=int, default=1000)
    ts.add_argument("--seed", type=int, default=0)
    ts.add_argument("--out", help="write the result row to this CSV file")

    vol = sub.add_parser("volume", help="volume of the lp-ball of radius r")
    vol.add_argument("--d", type=int, required=True)
    vol.add_argument("--p", required=True, help="norm exponent: number or 'inf'")
    vol.add_argument("--r", type=float, required=True)
    return ap


def _experiment_config(args, kind: str) -> ExperimentConfig:
    if getattr(args, "paper_scale", False):
        cfg = paper_scale_preset(kind)
    elif args.config:
        try:
            cfg = parse_config(args.config)
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        if cfg.kind != kind:
            raise ConfigError(f"config kind {cfg.kind!r} does not match subcommand {kind!r}")
    else:
        cfg = config_from_dict({"kind": kind})
    if args.seed is not None:
        cfg.seed = args.seed
    if args.out:
        cfg.output_path = args.out
    cfg.threads = args.threads if args.threads is not None else _threads_default()
    return cfg


def _load_csv(path: str, skip_header: bool = False, ndmin: int = 2) -> np.ndarray:
    try:
        return np.loadtxt(path, delimiter=",", skiprows=1 if skip_header else 0,
                          ndmin=ndmin)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    except ValueError as exc:
        raise ConfigError(f"malformed CSV {path}: {exc}") from exc


def _cmd_test(args) -> int:
    X = _load_csv(args.data, skip_header=args.header)
    d = X.shape[1]
    M = _load_csv(args.M_file) if args.M_file else np.eye(d)
    m0 = _load_csv(args.m0_file, ndmin=1).ravel() if args.m0_file else np.zeros(M.shape[0])
    try:
        p = LpExponent.parse(args.p)
        estimator = EstimatorSpec.parse(args.estimator)
        spec = TestSpec(M=M, m0=m0, p=p, alpha=args.alpha, estimator=estimator,
                        B=args.B, seed=RngSeed(args.seed))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    result = run_test(X, spec)
    row = result.csv_row(spec)
    print(result.csv_header)
    print(row)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(result.csv_header + "\n" + row + "\n")
    return 0


def _cmd_volume(args) -> int:
    try:
        p = LpExponent.parse(args.p)
        vol = lp_ball_volume(args.d, p.resolve(args.d), args.r)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    if vol.representable:
        print(f"{vol.volume:.12g}")
    else:
        print(f"log_volume={vol.log_volume:.12g}")
    return 0


def main(argv=None) -> int:
    ap = _build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return CONFIG_ERROR if exc.code not in (0, None) else 0
    try:
        if args.command == "test":
            return _cmd_test(args)
        if args.command == "volume":
            return _cmd_volume(args)
        kind = args.command
        if kind == "power":
            kind = "power-sparse" if args.sparse else "power-dense"
            if args.config:
                # config file may name either power kind; trust it
                kind_from_file = parse_config(args.config).kind
                if kind_from_file.startswith("power"):
                    kind = kind_from_file
        cfg = _experiment_config(args, kind)
        if not cfg.output_path:
            raise ConfigError("an output path is required (--out or output_path=...)")
        run_experiment(cfg)
        return 0
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return CONFIG_ERROR
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return CONFIG_ERROR
    except Exception as exc:  # runtime failure
        print(f"runtime error: {exc}", file=sys.stderr)
        return RUNTIME_ERROR


if __name__ == "__main__":
    raise SystemExit(main())
