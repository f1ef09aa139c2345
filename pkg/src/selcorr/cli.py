"""Command-line interface.

Three subcommands:

* ``estimate``  — read a correlation table, apply a selection rule, and emit
                  conditional estimates with confidence intervals for the
                  selected rows.
* ``simulate``  — run a named simulation scenario and write its metric tables
                  plus a JSON run manifest.
* ``ccp``       — emit a calibration table (and optional SVG): observed
                  correlation against conditional estimate and confidence
                  band, for the selected rows.

Exit codes: 0 success (including an empty selection), 2 usage or parse
errors, 3 numerical solver failure.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from .correlation import CorrelationObservation, conditional_correlation_estimate
from .errors import ConvergenceError, DomainError
from .experiments import (
    BH_THRESHOLD_COLUMNS,
    BY_OBSERVED_COLUMNS,
    DATASET_COLUMNS,
    METRICS_COLUMNS,
    BHConvergenceConfig,
    FixedThresholdConfig,
    FMRIStudyConfig,
    MixtureStudyConfig,
    format_value,
    run_bh_convergence_study,
    run_fixed_threshold_study,
    run_fmri_study,
    run_mixture_study,
    write_manifest,
    write_metrics_csv,
    write_table_csv,
)
from .selection import BenjaminiHochberg, Bonferroni, FixedCorrelation, apply_rule
from .simfields import FMRIGenConfig, HMMConfig

CONFIG_DIR_ENV = "SELCORR_CONFIG_DIR"

SCENARIOS = ("fixed-threshold", "mixture-grf", "fmri-like", "bh-convergence")

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_SOLVER = 3


class CliError(Exception):
    """Input or usage problem; maps to exit code 2."""


def parse_rule(text: str):
    """Parse ``fixed:<c>``, ``bonferroni:<a>`` or ``bh:<a>``."""
    name, _, raw = text.partition(":")
    if not raw:
        raise CliError(
            f"rule {text!r} is missing its parameter; expected fixed:<c>, "
            "bonferroni:<a> or bh:<a>"
        )
    try:
        value = float(raw)
    except ValueError:
        raise CliError(f"rule parameter {raw!r} is not a number") from None
    try:
        if name == "fixed":
            return FixedCorrelation(value)
        if name == "bonferroni":
            return Bonferroni(value)
        if name == "bh":
            return BenjaminiHochberg(value)
    except DomainError as exc:
        raise CliError(str(exc)) from None
    raise CliError(f"unknown rule {name!r}; expected fixed, bonferroni or bh")


def read_correlation_csv(path, shared_n: int | None):
    """Parse the input table: header ``r`` or ``r,n``, ``#`` comments ignored.

    Returns (r values, n values). Raises CliError with a line number on any
    malformed content.
    """
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc}") from None
    rows_r: list[float] = []
    rows_n: list[int] = []
    header: list[str] | None = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        fields = [f.strip() for f in stripped.split(",")]
        if header is None:
            header = [f.lower() for f in fields]
            if header not in (["r"], ["r", "n"]):
                raise CliError(
                    f"line {lineno}: header must be 'r' or 'r,n', got {stripped!r}"
                )
            if header == ["r"] and shared_n is None:
                raise CliError(
                    f"line {lineno}: header 'r' requires --n for the shared sample size"
                )
            continue
        if len(fields) != len(header):
            raise CliError(
                f"line {lineno}: expected {len(header)} fields, got {len(fields)}"
            )
        try:
            r = float(fields[0])
        except ValueError:
            raise CliError(f"line {lineno}: {fields[0]!r} is not a number") from None
        if not math.isfinite(r) or abs(r) >= 1.0:
            raise CliError(
                f"line {lineno}: correlation must satisfy |r| < 1, got {fields[0]}"
            )
        if header == ["r", "n"]:
            try:
                n = int(fields[1])
            except ValueError:
                raise CliError(f"line {lineno}: {fields[1]!r} is not an integer") from None
        else:
            n = shared_n
        if n < 4:
            raise CliError(f"line {lineno}: sample size must be >= 4, got {n}")
        rows_r.append(r)
        rows_n.append(n)
    if header is None:
        raise CliError(f"{path}: no header found")
    if not rows_r:
        raise CliError(f"{path}: no data rows found")
    return np.asarray(rows_r), np.asarray(rows_n, dtype=int)


def _row_cutoff(result, r: float, n: int) -> float:
    """Per-row selection boundary on the correlation scale."""
    if isinstance(result.rule, FixedCorrelation):
        cutoff = result.rule.threshold_r
    else:
        cutoff = math.tanh(result.threshold_z / math.sqrt(n - 3))
    return min(cutoff, abs(r))


def _open_out(out):
    if out is None or out == "-":
        return sys.stdout, False
    return open(out, "w", newline=""), True


def _selected_estimates(r, n, result, ci_alpha):
    """Conditional estimate + interval for every selected row."""
    rows = []
    for i in result.selected_indices:
        obs = CorrelationObservation(float(r[i]), int(n[i]))
        cutoff = _row_cutoff(result, float(r[i]), int(n[i]))
        est = conditional_correlation_estimate(obs, cutoff, alpha=ci_alpha)
        rows.append((i, obs, est))
    return rows


def cmd_estimate(args) -> int:
    r, n = read_correlation_csv(args.input, args.n)
    rule = parse_rule(args.rule)
    result = apply_rule(rule, r, n)
    estimates = _selected_estimates(r, n, result, args.alpha)

    stream, close = _open_out(args.out)
    try:
        writer = csv.writer(stream)
        writer.writerow(
            ["index", "r", "n", "rho_hat", "ci_lo", "ci_hi", "threshold_r", "threshold_p"]
        )
        for i, obs, est in estimates:
            lo, hi = est.interval
            writer.writerow(
                [
                    i,
                    format_value(obs.r),
                    obs.n,
                    format_value(est.rho_hat),
                    format_value(lo),
                    format_value(hi),
                    format_value(est.threshold_r),
                    format_value(result.threshold_p),
                ]
            )
    finally:
        if close:
            stream.close()
    omitted = result.m - len(estimates)
    print(
        f"selected {len(estimates)} of {result.m} rows "
        f"(effective threshold_p = {format_value(result.threshold_p)}); "
        f"{omitted} rows omitted",
        file=sys.stderr,
    )
    if not estimates:
        print("warning: nothing was selected; output contains only the header", file=sys.stderr)
    return EXIT_OK


def cmd_ccp(args) -> int:
    r, n = read_correlation_csv(args.input, args.n)
    rule = parse_rule(args.rule)
    result = apply_rule(rule, r, n)
    estimates = _selected_estimates(r, n, result, args.alpha)
    estimates.sort(key=lambda item: item[1].r)

    stream, close = _open_out(args.out)
    try:
        stream.write(f"# rule: {args.rule}\n")
        stream.write(f"# threshold_p: {format_value(result.threshold_p)}\n")
        if result.threshold_r is not None:
            stream.write(f"# threshold_r: {format_value(result.threshold_r)}\n")
        stream.write(f"# alpha: {format_value(args.alpha)}\n")
        writer = csv.writer(stream)
        writer.writerow(["observed_r", "rho_hat", "ci_lo", "ci_hi"])
        for _, obs, est in estimates:
            lo, hi = est.interval
            writer.writerow(
                [
                    format_value(obs.r),
                    format_value(est.rho_hat),
                    format_value(lo),
                    format_value(hi),
                ]
            )
    finally:
        if close:
            stream.close()
    if not estimates:
        print("warning: nothing was selected; output contains only the header", file=sys.stderr)
    if args.svg:
        if args.out in (None, "-"):
            raise CliError("--svg requires --out so the image has a place to live")
        svg_path = Path(args.out).with_suffix(".svg")
        svg_path.write_text(_render_ccp_svg(estimates))
        print(f"wrote {svg_path}", file=sys.stderr)
    return EXIT_OK


def _render_ccp_svg(estimates, width=480, height=480, margin=50) -> str:
    """Minimal SVG: identity line, conditional-estimate curve, confidence band."""
    xs = [obs.r for _, obs, _ in estimates]
    ys = [est.rho_hat for _, _, est in estimates]
    los = [est.interval[0] for _, _, est in estimates]
    his = [est.interval[1] for _, _, est in estimates]
    values = xs + ys + los + his + [0.0]
    vmin, vmax = (min(values), max(values)) if values else (-1.0, 1.0)
    span = (vmax - vmin) or 1.0
    vmin -= 0.05 * span
    vmax += 0.05 * span

    def sx(v):
        return margin + (v - vmin) / (vmax - vmin) * (width - 2 * margin)

    def sy(v):
        return height - margin - (v - vmin) / (vmax - vmin) * (height - 2 * margin)

    def path(points):
        return " ".join(f"{'M' if i == 0 else 'L'}{x:.2f},{y:.2f}" for i, (x, y) in enumerate(points))

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<path d="{path([(sx(vmin), sy(vmin)), (sx(vmax), sy(vmax))])}" '
        'stroke="#888" stroke-dasharray="4 3" fill="none"/>',
    ]
    if estimates:
        band = [(sx(x), sy(lo)) for x, lo in zip(xs, los)]
        band += [(sx(x), sy(hi)) for x, hi in zip(reversed(xs), reversed(his))]
        parts.append(
            f'<path d="{path(band)} Z" fill="#9ecae1" fill-opacity="0.45" stroke="none"/>'
        )
        parts.append(
            f'<path d="{path([(sx(x), sy(y)) for x, y in zip(xs, ys)])}" '
            'stroke="#08519c" stroke-width="1.5" fill="none"/>'
        )
        for x, y in zip(xs, ys):
            parts.append(f'<circle cx="{sx(x):.2f}" cy="{sy(y):.2f}" r="2.5" fill="#08519c"/>')
    parts.append(
        f'<text x="{width / 2:.0f}" y="{height - 12}" text-anchor="middle" '
        'font-family="sans-serif" font-size="12">observed correlation</text>'
    )
    parts.append(
        f'<text x="14" y="{height / 2:.0f}" text-anchor="middle" font-family="sans-serif" '
        f'font-size="12" transform="rotate(-90 14 {height / 2:.0f})">conditional estimate</text>'
    )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


# --------------------------------------------------------------------------
# simulate
# --------------------------------------------------------------------------

_SCENARIO_CONFIGS = {
    "fixed-threshold": FixedThresholdConfig,
    "mixture-grf": MixtureStudyConfig,
    "fmri-like": FMRIStudyConfig,
    "bh-convergence": BHConvergenceConfig,
}


def _load_scenario_config(scenario: str, config_path: str | None, seed: int | None):
    cls = _SCENARIO_CONFIGS[scenario]
    overrides = {}
    if config_path is not None:
        path = Path(config_path)
        if not path.exists():
            config_dir = os.environ.get(CONFIG_DIR_ENV)
            if config_dir and not path.is_absolute():
                path = Path(config_dir) / config_path
        try:
            overrides = json.loads(path.read_text(encoding="utf-8"))
        except OSError as exc:
            raise CliError(f"cannot read config {config_path}: {exc}") from None
        except json.JSONDecodeError as exc:
            raise CliError(f"config {config_path} is not valid JSON: {exc}") from None
        if not isinstance(overrides, dict):
            raise CliError(f"config {config_path} must hold a JSON object")
    try:
        cfg = _build_config(cls, overrides)
    except (TypeError, DomainError) as exc:
        raise CliError(f"bad config for scenario {scenario}: {exc}") from None
    if seed is not None:
        cfg = dataclasses.replace(cfg, master_seed=seed)
    return cfg


def _build_config(cls, overrides: dict):
    """Instantiate a scenario config from JSON, recursing into nested configs."""
    nested = {"gen": FMRIGenConfig, "hmm": HMMConfig}
    kwargs = {}
    field_names = {f.name for f in dataclasses.fields(cls)}
    unknown = set(overrides) - field_names
    if unknown:
        raise TypeError(f"unknown config keys: {sorted(unknown)}")
    for key, value in overrides.items():
        if key in nested and isinstance(value, dict):
            kwargs[key] = _build_config(nested[key], value)
        elif isinstance(value, list):
            kwargs[key] = tuple(tuple(v) if isinstance(v, list) else v for v in value)
        else:
            kwargs[key] = value
    return cls(**kwargs)


def cmd_simulate(args) -> int:
    if args.scenario not in SCENARIOS:
        raise CliError(
            f"unknown scenario {args.scenario!r}; valid scenarios: {', '.join(SCENARIOS)}"
        )
    cfg = _load_scenario_config(args.scenario, args.config, args.seed)
    out_dir = Path(args.out or ".")
    out_dir.mkdir(parents=True, exist_ok=True)

    tables: dict[str, tuple[str, ...]] = {}
    if args.scenario == "fixed-threshold":
        write_metrics_csv(run_fixed_threshold_study(cfg), out_dir / "metrics.csv")
        tables["metrics.csv"] = METRICS_COLUMNS
    elif args.scenario == "mixture-grf":
        write_metrics_csv(run_mixture_study(cfg), out_dir / "metrics.csv")
        tables["metrics.csv"] = METRICS_COLUMNS
    elif args.scenario == "fmri-like":
        result = run_fmri_study(cfg)
        write_metrics_csv(result.summary_rows, out_dir / "metrics.csv")
        write_table_csv(result.dataset_rows, DATASET_COLUMNS, out_dir / "fmri_datasets.csv")
        write_table_csv(
            result.by_observed_rows, BY_OBSERVED_COLUMNS, out_dir / "fmri_by_observed.csv"
        )
        tables["metrics.csv"] = METRICS_COLUMNS
        tables["fmri_datasets.csv"] = DATASET_COLUMNS
        tables["fmri_by_observed.csv"] = BY_OBSERVED_COLUMNS
    else:
        write_table_csv(
            run_bh_convergence_study(cfg), BH_THRESHOLD_COLUMNS, out_dir / "bh_thresholds.csv"
        )
        tables["bh_thresholds.csv"] = BH_THRESHOLD_COLUMNS

    write_manifest(
        out_dir / "manifest.json", args.scenario, cfg.master_seed, cfg, tables
    )
    print(f"wrote {', '.join(sorted(tables))} and manifest.json to {out_dir}", file=sys.stderr)
    return EXIT_OK


# --------------------------------------------------------------------------
# entry point
# --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="selcorr",
        description=(
            "Conditional (post-selection) estimation of thresholded correlations, "
            "with simulation scenarios"
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    est = sub.add_parser(
        "estimate",
        help="conditional estimates and intervals for the selected rows of a correlation table",
    )
    est.add_argument("input", help="CSV with header 'r,n' or 'r' (# comments allowed)")
    est.add_argument("--rule", required=True, help="fixed:<c> | bonferroni:<a> | bh:<a>")
    est.add_argument("--alpha", type=float, default=0.05, help="confidence miscoverage level")
    est.add_argument("--n", type=int, default=None, help="shared sample size for 'r'-only input")
    est.add_argument("--out", default=None, help="output CSV path (default stdout)")
    est.set_defaults(func=cmd_estimate)

    sim = sub.add_parser("simulate", help="run a named simulation scenario")
    sim.add_argument("scenario", help=f"one of: {', '.join(SCENARIOS)}")
    sim.add_argument("--config", default=None, help=f"JSON config (also searched in ${CONFIG_DIR_ENV})")
    sim.add_argument("--seed", type=int, default=None, help="master seed override")
    sim.add_argument("--out", default=None, help="output directory (default .)")
    sim.set_defaults(func=cmd_simulate)

    ccp = sub.add_parser(
        "ccp",
        help="calibration table: observed r vs conditional estimate and confidence band",
    )
    ccp.add_argument("input", help="CSV with header 'r,n' or 'r' (# comments allowed)")
    ccp.add_argument("--rule", required=True, help="fixed:<c> | bonferroni:<a> | bh:<a>")
    ccp.add_argument("--alpha", type=float, default=0.05, help="confidence miscoverage level")
    ccp.add_argument("--n", type=int, default=None, help="shared sample size for 'r'-only input")
    ccp.add_argument("--out", default=None, help="output CSV path (default stdout)")
    ccp.add_argument("--svg", action="store_true", help="also render <out>.svg")
    ccp.set_defaults(func=cmd_ccp)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConvergenceError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
