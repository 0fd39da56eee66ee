"""Command-line front end: simulate, fit on a user CSV, re-render reports.

Exit codes: 0 success, 1 runtime failure, 2 usage or config error.

Config files are JSON (schema_version 1).  Keys mirror the documented
defaults below; command-line flags beat file values, and the merged
result is dumped next to the artifacts as effective_config.json.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np
import pandas as pd
from scipy import stats

from .boosting import BoostingConfig, DegenerateDesignError, StopRule, Variant
from .dgp import DgpConfigIV, DgpConfigTE
from .inference import WeakFirstStageError, double_selection, iv_estimate
from .montecarlo import (
    McConfig,
    compare_table,
    config_hash,
    parse_json,
    render_csv,
    render_json,
    render_text,
    run_mc,
)

SCHEMA_VERSION = 1

VARIANT_ALIASES = {
    "ba": Variant.PGA,
    "post-ba": Variant.POST_PGA,
    "oba": Variant.OGA,
}
STOP_ALIASES = {
    "fixed": StopRule.FIXED_M,
    "aicc": StopRule.AICC,
    "tol": StopRule.RESIDUAL_TOL,
}

# Benchmark numbers for the comparison column of each simulation table.
# These are static reference values, never computed here.
REFERENCE_COLUMNS = {
    "iv": [["post-lasso", 0.194, 0.032]],
    "te": [["post-lasso", 0.082, 0.002]],
}

# Harness stopping default, shared by both experiments.
DEFAULT_BOOSTING = {
    "stop": "aicc",
    "m_max": 100,
    "shrinkage": 1.0,
    "residual_tol": 1e-6,
}

DGP_FIELDS = {
    "iv": ("n", "p", "s", "mu", "rho", "corr_ev", "beta_true", "sigma_e"),
    "te": ("n", "p", "alpha0", "rho", "decay_exponent"),
}

CONFIG_KEYS = (
    "schema_version",
    "experiment",
    "variants",
    "replications",
    "seed",
    "level",
    "workers",
    "output",
    "format",
    "dgp",
    "boosting",
    "reference",
)


class ConfigError(Exception):
    """Bad usage or config; maps to exit code 2."""


def default_config(experiment: str) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "experiment": experiment,
        "variants": ["ba", "post-ba", "oba"],
        "replications": 500,
        "seed": 0,
        "level": 0.05,
        "workers": 1,
        "output": "results",
        "format": "text",
        "dgp": {},
        "boosting": dict(DEFAULT_BOOSTING),
        "reference": [list(r) for r in REFERENCE_COLUMNS[experiment]],
    }


def load_config_file(path: str) -> dict:
    try:
        payload = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError("cannot read config %s: %s" % (path, exc))
    except json.JSONDecodeError as exc:
        raise ConfigError("config %s is not valid JSON: %s" % (path, exc))
    if not isinstance(payload, dict):
        raise ConfigError("config %s must be a JSON object" % path)
    unknown = sorted(set(payload) - set(CONFIG_KEYS))
    if unknown:
        raise ConfigError("unknown config keys: %s" % ", ".join(unknown))
    version = payload.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ConfigError("unsupported schema_version %r" % (version,))
    return payload


def effective_config(args) -> dict:
    """Merge defaults <- config file <- command-line flags."""
    file_cfg = load_config_file(args.config) if args.config else {}
    experiment = args.experiment or file_cfg.get("experiment", "iv")
    if experiment not in ("iv", "te"):
        raise ConfigError("experiment must be 'iv' or 'te', got %r" % experiment)
    eff = default_config(experiment)
    for key, value in file_cfg.items():
        if key in ("dgp", "boosting"):
            eff[key] = {**eff[key], **value}
        else:
            eff[key] = value
    eff["experiment"] = experiment
    if args.variant:
        eff["variants"] = list(args.variant)
    if args.replications is not None:
        eff["replications"] = args.replications
    if args.seed is not None:
        eff["seed"] = args.seed
    if args.output is not None:
        eff["output"] = args.output
    if args.format is not None:
        eff["format"] = args.format
    if getattr(args, "workers", None) is not None:
        eff["workers"] = args.workers
    for alias in eff["variants"]:
        if alias not in VARIANT_ALIASES:
            raise ConfigError(
                "unknown variant %r (choose from %s)"
                % (alias, ", ".join(sorted(VARIANT_ALIASES)))
            )
    bad = sorted(set(eff["dgp"]) - set(DGP_FIELDS[experiment]))
    if bad:
        raise ConfigError(
            "unknown dgp keys for %s: %s" % (experiment, ", ".join(bad))
        )
    bad = sorted(set(eff["boosting"]) - set(DEFAULT_BOOSTING))
    if bad:
        raise ConfigError("unknown boosting keys: %s" % ", ".join(bad))
    if eff["boosting"]["stop"] not in STOP_ALIASES:
        raise ConfigError("stop must be one of fixed, aicc, tol")
    return eff


def build_dgp(eff: dict):
    cls = DgpConfigIV if eff["experiment"] == "iv" else DgpConfigTE
    try:
        return cls(**eff["dgp"])
    except (TypeError, ValueError) as exc:
        raise ConfigError("bad dgp config: %s" % exc)


def build_boosting(eff: dict, alias: str) -> BoostingConfig:
    b = eff["boosting"]
    try:
        return BoostingConfig(
            variant=VARIANT_ALIASES[alias],
            m_max=int(b["m_max"]),
            shrinkage=float(b["shrinkage"]),
            stop_rule=STOP_ALIASES[b["stop"]],
            residual_tol=float(b["residual_tol"]),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError("bad boosting config: %s" % exc)


def _dump_json(path: Path, payload) -> None:
    path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")


def cmd_simulate(args) -> int:
    eff = effective_config(args)
    dgp = build_dgp(eff)
    eff["dgp"] = asdict(dgp)
    science = {
        k: eff[k]
        for k in ("experiment", "variants", "replications", "seed", "level", "dgp", "boosting")
    }
    outdir = Path(eff["output"])
    outdir.mkdir(parents=True, exist_ok=True)
    summaries = []
    for alias in eff["variants"]:
        cfg = McConfig(
            experiment=eff["experiment"],
            dgp=dgp,
            boosting=build_boosting(eff, alias),
            replications=int(eff["replications"]),
            master_seed=int(eff["seed"]),
            level=float(eff["level"]),
        )
        summaries.append((alias, run_mc(cfg, workers=int(eff["workers"]))))
    references = [tuple(r) for r in eff["reference"] or []]
    metadata = {
        "config_hash": config_hash(science),
        "experiment": eff["experiment"],
        "master_seed": int(eff["seed"]),
        "replications": int(eff["replications"]),
    }
    table = compare_table(summaries, references, metadata)
    (outdir / "summary.csv").write_text(render_csv(table))
    (outdir / "summary.json").write_text(render_json(table))
    _dump_json(outdir / "effective_config.json", eff)
    if eff["format"] == "csv":
        sys.stdout.write(render_csv(table))
    elif eff["format"] == "json":
        sys.stdout.write(render_json(table))
    else:
        sys.stdout.write(render_text(table))
    return 0


def _resolve_columns(selector: str, columns, taken) -> list:
    requested = [item.strip() for item in selector.split(",") if item.strip()]
    if not requested:
        raise ConfigError("empty column list %r" % selector)
    out = []
    for item in requested:
        if item.endswith("*"):
            matches = [
                c for c in columns if c.startswith(item[:-1]) and c not in taken
            ]
            if not matches:
                raise ConfigError("prefix %r matches no CSV columns" % item)
            out.extend(c for c in matches if c not in out)
        else:
            if item not in columns:
                raise ConfigError("column %r not found in CSV header" % item)
            if item not in out:
                out.append(item)
    return out


def _numeric_column(df: pd.DataFrame, name: str) -> np.ndarray:
    values = pd.to_numeric(df[name], errors="coerce").to_numpy(dtype=float)
    bad = ~np.isfinite(values)
    if bad.any():
        row = int(np.argmax(bad)) + 1
        raise ConfigError(
            "non-numeric value at row %d, column '%s'" % (row, name)
        )
    return values


def cmd_fit(args) -> int:
    try:
        df = pd.read_csv(args.data)
    except OSError as exc:
        raise ConfigError("cannot read data %s: %s" % (args.data, exc))
    except (pd.errors.ParserError, pd.errors.EmptyDataError) as exc:
        raise ConfigError("cannot parse CSV %s: %s" % (args.data, exc))
    columns = list(df.columns)
    for name in (args.outcome, args.treatment):
        if name not in columns:
            raise ConfigError("column %r not found in CSV header" % name)
    if bool(args.instruments) == bool(args.controls):
        raise ConfigError("give exactly one of --instruments or --controls")
    taken = {args.outcome, args.treatment}
    selector = args.instruments or args.controls
    names = _resolve_columns(selector, columns, taken)
    y = _numeric_column(df, args.outcome)
    d = _numeric_column(df, args.treatment)
    M = np.column_stack([_numeric_column(df, c) for c in names])
    cfg = BoostingConfig(
        variant=VARIANT_ALIASES[args.variant],
        m_max=args.m_max,
        stop_rule=STOP_ALIASES[args.stop],
    )
    z_crit = float(stats.norm.ppf(0.975))
    if args.instruments:
        est = iv_estimate(y, d, M, cfg)
        report = {
            "estimator": "iv",
            "variant": args.variant,
            "estimate": est.beta_hat,
            "se": est.se,
            "ci95": [est.beta_hat - z_crit * est.se, est.beta_hat + z_crit * est.se],
            "selected": [names[j] for j in est.first_stage_support],
            "m_star": est.m_star,
        }
    else:
        est = double_selection(y, d, M, cfg)
        report = {
            "estimator": "double-selection",
            "variant": args.variant,
            "estimate": est.alpha_hat,
            "se": est.se,
            "ci95": [est.alpha_hat - z_crit * est.se, est.alpha_hat + z_crit * est.se],
            "selected": [names[j] for j in est.support_union],
            "selected_outcome": [names[j] for j in est.support_y],
            "selected_treatment": [names[j] for j in est.support_d],
            "m_star": [est.m_star_y, est.m_star_d],
        }
    outdir = Path(args.output)
    outdir.mkdir(parents=True, exist_ok=True)
    _dump_json(outdir / "fit.json", report)
    print("estimate: %.6f" % report["estimate"])
    print("se:       %.6f" % report["se"])
    print("95%% CI:   [%.6f, %.6f]" % tuple(report["ci95"]))
    print("selected: %s" % (", ".join(report["selected"]) or "(none)"))
    print("m_star:   %s" % report["m_star"])
    return 0


def cmd_report(args) -> int:
    summary_path = Path(args.output) / "summary.json"
    if not summary_path.exists():
        raise ConfigError("no summary.json under %s; run simulate first" % args.output)
    table = parse_json(summary_path.read_text())
    fmt = args.format or "text"
    if fmt == "csv":
        rendered = render_csv(table)
        ext = "csv"
    elif fmt == "json":
        rendered = render_json(table)
        ext = "json"
    else:
        rendered = render_text(table)
        ext = "txt"
    (Path(args.output) / ("report.%s" % ext)).write_text(rendered)
    sys.stdout.write(rendered)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="boostinfer",
        description="Boosted variable selection with post-selection inference.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run a Monte Carlo experiment")
    sim.add_argument("--config", help="JSON config file (schema_version 1)")
    sim.add_argument("--experiment", choices=["iv", "te"])
    sim.add_argument(
        "--variant",
        action="append",
        choices=sorted(VARIANT_ALIASES),
        help="repeatable; default runs ba, post-ba and oba",
    )
    sim.add_argument("--replications", type=int)
    sim.add_argument("--seed", type=int)
    sim.add_argument("--output", help="artifact directory (default results)")
    sim.add_argument("--format", choices=["text", "csv", "json"])
    sim.add_argument("--workers", type=int, help="parallel workers for run_mc")
    sim.set_defaults(func=cmd_simulate)

    fit = sub.add_parser("fit", help="fit an estimator on a CSV")
    fit.add_argument("--data", required=True, help="CSV with a header row")
    fit.add_argument("--outcome", required=True)
    fit.add_argument("--treatment", required=True)
    fit.add_argument(
        "--instruments",
        help="comma list of instrument columns; trailing * matches a prefix",
    )
    fit.add_argument(
        "--controls",
        help="comma list of control columns; trailing * matches a prefix",
    )
    fit.add_argument("--variant", choices=sorted(VARIANT_ALIASES), default="oba")
    fit.add_argument("--stop", choices=sorted(STOP_ALIASES), default="aicc")
    fit.add_argument("--m-max", type=int, default=100)
    fit.add_argument("--output", default="results")
    fit.set_defaults(func=cmd_fit)

    rep = sub.add_parser("report", help="re-render tables from prior artifacts")
    rep.add_argument("--output", default="results", help="directory with summary.json")
    rep.add_argument("--format", choices=["text", "csv", "json"])
    rep.set_defaults(func=cmd_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2
    except (WeakFirstStageError, DegenerateDesignError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 1
    except (RuntimeError, ValueError, OSError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
