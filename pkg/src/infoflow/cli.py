"""Command-line pipeline: run sweeps, analyze curves, fit transitions.

Subcommands:
  run       execute a sweep config, write results.csv + manifest.json
  analyze   derivative curves and kink estimates from persisted results
  collapse  finite-size-scaling collapse of dh/dtau families
  fit       velocity fits from kink tables, power-law fits across sizes
  report    one-stop analysis of a results directory
  validate  dense-oracle equivalence and invariant suite at small sizes

All outputs are plain CSV/JSON with no timestamps, so reruns on equal
inputs are byte-identical.  Plotting is left to external tools; the CSVs
are column-oriented and documented in the README.

Exit codes: 0 success, 1 validation failure, 2 invalid config or usage,
3 I/O failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

try:
    import tomllib as tomli
except ModuleNotFoundError:
    import tomli

from infoflow import __version__, kernels
from infoflow.analysis import (
    VELOCITY_LAWS,
    derivative,
    estimate_kink,
    fit_power_law,
    fit_velocity,
    interp_at,
    optimize_collapse,
    optimize_collapse_joint,
)
from infoflow.circuit import LAYER_CONVENTION
from infoflow.experiment import (
    ConfigError,
    CSV_NAME,
    MANIFEST_NAME,
    TimeSeries,
    load,
    parse_config,
    persist,
    run_sweep,
)

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_CONFIG = 2
EXIT_IO = 3


def _parse_override(text: str) -> tuple[str, object]:
    if "=" not in text:
        raise ConfigError(f"override {text!r} is not of the form key=value")
    key, raw = text.split("=", 1)
    try:
        value = tomli.loads(f"v = {raw}")["v"]
    except tomli.TOMLDecodeError:
        value = raw
    return key.strip(), value


def _write_json(path: Path, payload: dict):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, sort_keys=True, indent=1) + "\n")


def _write_lines(path: Path, lines):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n")


def _load_results(dirs, force: bool):
    """Load one or more result directories, refusing mixed conventions."""
    all_series: list[TimeSeries] = []
    conventions = None
    for d in dirs:
        series, manifest = load(d)
        conv = manifest.get("conventions", {})
        if conventions is None:
            conventions = conv
        elif conv != conventions and not force:
            raise ConfigError(
                f"{d} has conventions {conv}, first input has {conventions}; "
                "pass --force to combine anyway"
            )
        if conv.get("layer_convention") != LAYER_CONVENTION and not force:
            raise ConfigError(
                f"{d} uses layer convention {conv.get('layer_convention')!r}, "
                f"this build uses {LAYER_CONVENTION!r}; pass --force to proceed"
            )
        all_series.extend(series)
    return all_series, conventions or {}


def _series_meta(ts: TimeSeries) -> dict:
    return {
        "observable": ts.observable,
        "N": ts.n_qubits,
        "s16": ts.s16,
        "m16": ts.m16,
        "l16": ts.l16,
        "selection": ts.selection,
    }


def _geometry_key(ts: TimeSeries) -> tuple:
    return (ts.observable, ts.s16, ts.m16, ts.l16, ts.selection)


def _filter(series, observable):
    if observable is None:
        return series
    picked = [ts for ts in series if ts.observable == observable]
    if not picked:
        raise ConfigError(f"no series with observable {observable!r}")
    return picked


# N is the user-facing name for the chain length column
_WHERE_FIELDS = {"observable", "N", "n_qubits", "s16", "m16", "l16", "selection"}


def _where_filter(series, clauses):
    for raw in clauses or []:
        key, value = _parse_override(raw)
        if key not in _WHERE_FIELDS:
            raise ConfigError(f"--where field must be one of {sorted(_WHERE_FIELDS)}")
        field = "n_qubits" if key == "N" else key
        series = [ts for ts in series if getattr(ts, field) == value]
    if not series:
        raise ConfigError("no series match the --where clauses")
    return series


def _meta_csv_prefix(ts: TimeSeries) -> str:
    return f"{ts.observable},{ts.n_qubits},{ts.s16},{ts.m16},{ts.l16},{ts.selection}"


def cmd_run(args) -> int:
    overrides = dict(_parse_override(s) for s in args.set or [])
    config = parse_config(args.config, overrides)
    if args.backend:
        kernels.use_backend(args.backend)
    progress = (lambda msg: print(msg, file=sys.stderr)) if args.verbose else None
    series = run_sweep(config, threads=args.threads, progress=progress)
    persist(series, args.out, config)
    if args.verbose:
        print(f"wrote {Path(args.out) / CSV_NAME}", file=sys.stderr)
    return EXIT_OK


def cmd_analyze(args) -> int:
    series, conventions = _load_results(args.results, args.force)
    series = _filter(series, args.observable)
    series = _where_filter(series, args.where)
    out = Path(args.out)
    window = tuple(args.window) if args.window else None
    lines = [
        "observable,N,s16,m16,l16,selection,t,tau,mean,stderr,dmean_dtau"
    ]
    kinks = []
    for ts in sorted(series, key=lambda s: s.key()):
        tau = ts.tau
        mean = ts.mean
        err = ts.stderr
        if tau.size >= 3:
            _, dm = derivative(tau, mean, args.smooth)
        else:
            dm = np.zeros_like(tau)
        prefix = _meta_csv_prefix(ts)
        for i in range(tau.size):
            lines.append(
                f"{prefix},{int(ts.t[i])},{float(tau[i])!r},{float(mean[i])!r},"
                f"{float(err[i])!r},{float(dm[i])!r}"
            )
        w = window or (float(tau[0]), float(tau[-1]))
        entry = dict(_series_meta(ts))
        try:
            est = estimate_kink(tau, mean, w)
            entry.update(est.as_dict())
        except ValueError as exc:
            entry.update({"error": str(exc), "window": list(w)})
        kinks.append(entry)
    _write_lines(out / "curves.csv", lines)
    _write_json(
        out / "analysis.json",
        {
            "conventions": conventions,
            "observable": args.observable,
            "smooth": args.smooth,
            "window": list(window) if window else None,
            "kinks": kinks,
        },
    )
    return EXIT_OK


def _derivative_curves(group, smooth):
    curves = []
    for ts in group:
        tau, dm = derivative(ts.tau, ts.mean, smooth)
        curves.append((ts.n_qubits, tau, dm))
    return curves


def cmd_collapse(args) -> int:
    series, conventions = _load_results(args.results, args.force)
    series = _filter(series, args.observable)
    window = tuple(args.window)
    groups: dict[tuple, list[TimeSeries]] = {}
    for ts in series:
        groups.setdefault(_geometry_key(ts), []).append(ts)
    groups = {
        key: sorted(g, key=lambda s: s.n_qubits)
        for key, g in sorted(groups.items())
        if len({ts.n_qubits for ts in g}) >= 3
    }
    if not groups:
        raise ConfigError("collapse needs a geometry family with >= 3 sizes")
    nu_bounds = (args.nu_min, args.nu_max)
    results = []
    if args.joint and len(groups) > 1:
        families = [_derivative_curves(g, args.smooth) for g in groups.values()]
        fits = optimize_collapse_joint(
            families, [window] * len(families), nu_bounds
        )
    else:
        fits = [
            optimize_collapse(
                _derivative_curves(g, args.smooth), window, nu_bounds
            )
            for g in groups.values()
        ]
    rescaled = ["observable,N,s16,m16,l16,selection,tau,x_rescaled,y"]
    for (key, group), fit in zip(groups.items(), fits):
        meta = dict(zip(("observable", "s16", "m16", "l16", "selection"), key))
        results.append({**meta, **fit.as_dict()})
        for ts in group:
            tau, dm = derivative(ts.tau, ts.mean, args.smooth)
            mask = (tau >= window[0]) & (tau <= window[1])
            x = (tau[mask] - fit.tau_i) * ts.n_qubits ** (1.0 / fit.nu)
            for xi, taui, yi in zip(x, tau[mask], dm[mask]):
                rescaled.append(
                    f"{_meta_csv_prefix(ts)},{float(taui)!r},{float(xi)!r},"
                    f"{float(yi)!r}"
                )
    out = Path(args.out)
    _write_lines(out / "rescaled.csv", rescaled)
    _write_json(
        out / "collapse.json",
        {
            "conventions": conventions,
            "window": list(window),
            "nu_bounds": [args.nu_min, args.nu_max],
            "joint": bool(args.joint),
            "fits": results,
        },
    )
    return EXIT_OK


def _velocity_points(kinks, law, require_significant=True):
    points = []
    for entry in kinks:
        if "tau" not in entry:
            continue
        if require_significant and not entry.get("significant"):
            continue
        if law == "tau_e":
            if entry["l16"] < 0:
                continue
            points.append((entry["l16"] / 16.0, entry["tau"]))
        else:
            points.append((entry["m16"] / 16.0, entry["tau"]))
    return points


def cmd_fit(args) -> int:
    out = Path(args.out)
    modes = [args.law is not None, args.sigma_at is not None,
             args.value_at is not None]
    if sum(modes) != 1:
        raise ConfigError("pass exactly one of --law, --sigma-at, --value-at")
    if args.law:
        if not args.analysis:
            raise ConfigError("--law needs --analysis pointing at analysis.json")
        kinks = []
        for path in args.analysis:
            table = json.loads(Path(path).read_text())
            kinks.extend(table.get("kinks", []))
        points = _velocity_points(kinks, args.law, not args.all_kinks)
        if len(points) < 2:
            raise ConfigError(
                "fewer than 2 usable kink points (try --all-kinks or rerun "
                "analyze with a better window)"
            )
        fit = fit_velocity(points, args.law)
        _write_json(out / "velocity_fit.json", {"fit": fit.as_dict()})
        lines = ["x,tau_star,tau_fit"]
        for (p, t), (x, _) in zip(fit.points, _transformed(points, args.law)):
            lines.append(f"{x!r},{t!r},{float(x / fit.v0)!r}")
        _write_lines(out / "velocity_fit.csv", lines)
        return EXIT_OK
    series, conventions = _load_results(args.results, args.force)
    series = _filter(series, args.observable)
    at = args.sigma_at if args.sigma_at is not None else args.value_at
    field = "sigma" if args.sigma_at is not None else "mean"
    pairs = []
    for ts in sorted(series, key=lambda s: s.key()):
        value = interp_at(ts.tau, getattr(ts, field), at)
        pairs.append((ts.n_qubits, value))
    fit = fit_power_law(pairs)
    _write_json(
        out / "power_law_fit.json",
        {
            "conventions": conventions,
            "field": field,
            "tau": at,
            "fit": fit.as_dict(),
        },
    )
    return EXIT_OK


def _transformed(points, law):
    if law == "tau_e":
        return [(p, t) for p, t in points]
    if law == "tau_s_small_m":
        return [(p / 2.0, t) for p, t in points]
    return [((1.0 - p) / 2.0, t) for p, t in points]


def cmd_report(args) -> int:
    series, conventions = _load_results(args.results, args.force)
    out = Path(args.out)
    report: dict = {"conventions": conventions, "package_version": __version__}
    args_sub = argparse.Namespace(
        results=args.results,
        observable=None,
        out=str(out),
        window=None,
        smooth=args.smooth,
        force=args.force,
    )
    cmd_analyze(args_sub)
    report["analysis"] = json.loads((out / "analysis.json").read_text())
    groups: dict[tuple, set] = {}
    for ts in series:
        groups.setdefault(_geometry_key(ts), set()).add(ts.n_qubits)
    collapsible = [k for k, sizes in groups.items() if len(sizes) >= 3]
    if collapsible:
        taus = np.concatenate([ts.tau for ts in series])
        ns = argparse.Namespace(
            results=args.results,
            observable=None,
            out=str(out),
            window=[float(taus.min()), float(taus.max())],
            smooth=args.smooth,
            nu_min=0.5,
            nu_max=3.0,
            joint=False,
            force=args.force,
        )
        try:
            cmd_collapse(ns)
            report["collapse"] = json.loads((out / "collapse.json").read_text())
        except (ConfigError, ValueError) as exc:
            report["collapse"] = {"error": str(exc)}
    sizes_all = sorted({ts.n_qubits for ts in series})
    if len(sizes_all) >= 3:
        try:
            by_obs = sorted({ts.observable for ts in series})
            tau_hi = min(float(ts.tau[-1]) for ts in series)
            pairs = []
            for ts in series:
                if ts.observable != by_obs[0]:
                    continue
                pairs.append((ts.n_qubits, interp_at(ts.tau, ts.sigma, tau_hi / 2)))
            report["sigma_power_law"] = {
                "tau": tau_hi / 2,
                "fit": fit_power_law(pairs).as_dict(),
            }
        except (ValueError, ConfigError) as exc:
            report["sigma_power_law"] = {"error": str(exc)}
    _write_json(out / "report.json", report)
    return EXIT_OK


def cmd_validate(args) -> int:
    from infoflow.validate import run_validation

    if args.backend:
        kernels.use_backend(args.backend)
    failures = run_validation(
        instances=args.instances,
        seed=args.seed,
        log=lambda msg: print(msg),
    )
    if failures:
        print(f"FAILED: {failures} validation check(s)")
        return EXIT_FAIL
    print("all validations passed")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="infoflow",
        description="brick-wall circuit information-flow toolkit",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a sweep config")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--out", default="results")
    p_run.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="override a config key (repeatable)")
    p_run.add_argument("--threads", type=int, default=1)
    p_run.add_argument("--backend", choices=("numpy", "numba"))
    p_run.add_argument("-v", "--verbose", action="store_true")
    p_run.set_defaults(fn=cmd_run)

    p_an = sub.add_parser("analyze", help="derivatives and kink estimates")
    p_an.add_argument("--results", nargs="+", required=True)
    p_an.add_argument("--observable")
    p_an.add_argument("--window", nargs=2, type=float, metavar=("LO", "HI"))
    p_an.add_argument("--where", action="append", metavar="KEY=VALUE",
                      help="keep only series whose field equals value "
                           "(repeatable; fields: N, s16, m16, l16, selection, observable)")
    p_an.add_argument("--smooth", type=int, default=1)
    p_an.add_argument("--out", default="analysis")
    p_an.add_argument("--force", action="store_true",
                      help="combine results with mismatched conventions")
    p_an.set_defaults(fn=cmd_analyze)

    p_co = sub.add_parser("collapse", help="finite-size-scaling collapse")
    p_co.add_argument("--results", nargs="+", required=True)
    p_co.add_argument("--observable")
    p_co.add_argument("--window", nargs=2, type=float, required=True,
                      metavar=("LO", "HI"))
    p_co.add_argument("--nu-min", type=float, default=0.5)
    p_co.add_argument("--nu-max", type=float, default=3.0)
    p_co.add_argument("--smooth", type=int, default=1)
    p_co.add_argument("--joint", action="store_true",
                      help="share the exponent across geometry families")
    p_co.add_argument("--out", default="collapse")
    p_co.add_argument("--force", action="store_true")
    p_co.set_defaults(fn=cmd_collapse)

    p_fit = sub.add_parser("fit", help="velocity and power-law fits")
    p_fit.add_argument("--results", nargs="+")
    p_fit.add_argument("--analysis", nargs="+",
                       help="analysis.json files whose kink estimates are pooled")
    p_fit.add_argument("--law", choices=VELOCITY_LAWS)
    p_fit.add_argument("--all-kinks", action="store_true",
                       help="use kink points that failed the significance test")
    p_fit.add_argument("--sigma-at", type=float, metavar="TAU")
    p_fit.add_argument("--value-at", type=float, metavar="TAU")
    p_fit.add_argument("--observable")
    p_fit.add_argument("--out", default="fit")
    p_fit.add_argument("--force", action="store_true")
    p_fit.set_defaults(fn=cmd_fit)

    p_rep = sub.add_parser("report", help="one-stop summary of a results dir")
    p_rep.add_argument("--results", nargs="+", required=True)
    p_rep.add_argument("--smooth", type=int, default=1)
    p_rep.add_argument("--out", default="report")
    p_rep.add_argument("--force", action="store_true")
    p_rep.set_defaults(fn=cmd_report)

    p_val = sub.add_parser("validate", help="oracle equivalence suite")
    p_val.add_argument("--instances", type=int, default=200)
    p_val.add_argument("--seed", type=int, default=2024)
    p_val.add_argument("--backend", choices=("numpy", "numba"))
    p_val.set_defaults(fn=cmd_validate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
