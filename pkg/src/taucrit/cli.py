"""Command-line front end: every scan as a subcommand, CSV or JSON out.

Configuration is resolved as defaults < config file < ``SEED`` environment
variable < command-line flags. Config files are flat ``key = value`` text
(``#`` starts a comment); a JSON output of a previous run is accepted as well
and reproduces that run.

Exit codes: 0 success, 2 invalid input, 3 more than 10% of rows failed,
4 internal error.
"""
from __future__ import annotations

import argparse
import io
import json
import math
import os
import sys
from dataclasses import asdict, dataclass, field
from functools import partial

import numpy as np

from . import __version__
from .attenuation import attenuation, probabilities
from .estimation import (
    critical_scan,
    error_from_attenuation,
    error_vs_control_scan,
    fisher_information,
    optimal_time,
    strategy_select,
    _pmap,
)
from .filters import Cpmg, FreeEvolution, NarrowbandDelta, PulseSequence, filter_response
from .montecarlo import Protocol, crb_check
from .numerics import QuadratureError
from .spectral import NoiseSpectrum, critical_frequency, spectrum_at, spectrum_dtau

EXIT_OK, EXIT_USAGE, EXIT_PARTIAL, EXIT_INTERNAL = 0, 2, 3, 4

_COMMON = {"format": "csv", "output": "-", "tol": 1e-7, "jobs": 1}
_CONTROL = {"control": "cpmg", "n": 20, "harmonics": 1, "pulse_times": ""}

DEFAULTS = {
    "spectrum": {"beta": 2.0, "g": 1.0, "tau_c": 1.0, "omega_min": 0.01, "omega_max": 100.0,
                 "n_points": 101, "scale": "log"},
    "filter": {**_CONTROL, "t": 1.0, "omega_min": 0.0, "omega_max": 200.0, "n_points": 2001,
               "scale": "lin"},
    "attenuation": {"beta": 2.0, "g": 1.0, "tau_c": 1.0, **_CONTROL, "t_min": 0.01, "t_max": 100.0,
                    "n_points": 61, "method": "auto"},
    "error-scan": {"beta": 2.0, "x": 1.0, "tau_c": 1.0, "n": 20, "harmonics": 1,
                   "ratio_min": 0.05, "ratio_max": 20.0, "n_points": 401},
    "optimal-time": {"beta": 2.0, "g": 1.0, "tau_c": 1.0, **_CONTROL, "t_min": 0.0, "t_max": 0.0,
                     "n_coarse": 256, "method": "auto"},
    "critical-scan": {"beta": 2.0, "n": 20, "harmonics": 1, "x_min": 0.1, "x_max": 10.0,
                      "n_points": 64, "n_coarse": 256},
    "strategy": {"beta": 2.0, "n_max": 10, "g_min": 0.01, "g_max": 10.0, "n_points": 32,
                 "method": "auto"},
    "crb": {"beta": 2.0, "x": 3.0, "n": 20, "t": 0.0, "shots": 10_000, "trials": 400,
            "seed": 12345, "search_factor": 2.0},
}

HELP = {
    "spectrum": "spectral density G and dG/dtau_c on a frequency grid",
    "filter": "control filter function F_t(omega)",
    "attenuation": "J, dJ/dtau_c, p+, QFI and relative error versus probing time",
    "error-scan": "relative error versus control frequency under delta-filter control",
    "optimal-time": "globally optimal probing time and minimal relative error",
    "critical-scan": "minimal error and optimal time versus sqrt(2N) g tau_c",
    "strategy": "best CPMG pulse count N <= N_max versus g tau_c",
    "crb": "Monte-Carlo maximum-likelihood spread versus the Cramer-Rao bound",
}


class UsageError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    params: dict = field(default_factory=dict)

    @property
    def fmt(self):
        return self.params["format"]


def _coerce(key, value, default):
    if isinstance(value, str) and not isinstance(default, str):
        value = value.strip()
        try:
            if isinstance(default, bool):
                return value.lower() in ("1", "true", "yes")
            if isinstance(default, int):
                return int(value)
            return float(value)
        except ValueError as exc:
            raise UsageError(f"{key}: cannot parse {value!r}") from exc
    if isinstance(default, int) and not isinstance(default, bool):
        if float(value) != int(value):
            raise UsageError(f"{key} must be an integer")
        return int(value)
    if isinstance(default, float):
        return float(value)
    return value


def read_config_file(path):
    """Parse a flat ``key = value`` file, or the config block of a JSON output."""
    with open(path) as fh:
        text = fh.read()
    if text.lstrip().startswith("{"):
        return dict(json.loads(text).get("config", {}))
    values = {}
    for n, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{n}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        values[key.replace("-", "_")] = value
    return values


def resolve_config(command, file_values=None, overrides=None, environ=None):
    defaults = {**DEFAULTS[command], **_COMMON}
    merged = dict(defaults)
    for key, value in (file_values or {}).items():
        if key in defaults:
            merged[key] = value
    env = os.environ if environ is None else environ
    if "seed" in defaults and "SEED" in env:
        merged["seed"] = env["SEED"]
    for key, value in (overrides or {}).items():
        if value is not None:
            merged[key] = value
    params = {key: _coerce(key, merged[key], defaults[key]) for key in defaults}
    if params["format"] not in ("csv", "json"):
        raise UsageError("format must be csv or json")
    return RunConfig(command, params)


def _grid(lo, hi, n, scale):
    if n < 1:
        raise UsageError("n_points must be >= 1")
    if n == 1:
        return np.array([float(lo)])
    if scale == "log":
        if lo <= 0:
            raise UsageError("log grids need positive bounds")
        return np.geomspace(lo, hi, n)
    if scale == "lin":
        return np.linspace(lo, hi, n)
    raise UsageError("scale must be log or lin")


def _control(p):
    kind = p["control"]
    if kind == "free":
        return FreeEvolution()
    if kind == "hahn":
        return Cpmg(1)
    if kind == "cpmg":
        return Cpmg(p["n"])
    if kind == "delta":
        return NarrowbandDelta(p["n"], p["harmonics"])
    if kind == "sequence":
        fr = tuple(float(s) for s in str(p["pulse_times"]).replace(";", ",").split(",") if s.strip())
        return PulseSequence(fr)
    raise UsageError(f"unknown control {kind!r} (free, hahn, cpmg, delta, sequence)")


def _spec(p, g=None):
    try:
        return NoiseSpectrum(p["g"] if g is None else g, p["tau_c"] if "tau_c" in p else 1.0, p["beta"])
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


# each command returns (columns, rows); a row is a dict, and may carry "status"

def cmd_spectrum(p):
    spec = _spec(p)
    w0 = critical_frequency(spec)
    cols = ["omega", "G", "dG_dtau", "is_omega0"]
    rows = []
    for w in _grid(p["omega_min"], p["omega_max"], p["n_points"], p["scale"]):
        d = spectrum_dtau(spec, w)
        rows.append({"omega": w, "G": float(spectrum_at(spec, w)), "dG_dtau": d,
                     "is_omega0": int(d == 0.0 or abs(w - w0) <= 1e-12 * w0)})
    return cols, rows


def cmd_filter(p):
    control = _control(p)
    if isinstance(control, NarrowbandDelta):
        raise UsageError("delta filters have no pointwise values")
    w = _grid(p["omega_min"], p["omega_max"], p["n_points"], p["scale"])
    f = filter_response(control, p["t"], w)
    return ["omega", "F"], [{"omega": a, "F": b} for a, b in zip(w, np.atleast_1d(f))]


def cmd_attenuation(p):
    spec, control = _spec(p), _control(p)
    cols = ["t", "j", "dj_dtau", "p_plus", "qfi", "eps", "method", "abs_error"]
    rows = []
    for t in _grid(p["t_min"], p["t_max"], p["n_points"], "log"):
        try:
            r = attenuation(spec, control, t, p["tol"], p["method"])
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
        except Exception as exc:  # numerical failure recorded per row
            rows.append({"t": t, "status": f"error: {exc}"})
            continue
        rows.append({"t": t, "j": r.j, "dj_dtau": r.dj_dtau, "p_plus": probabilities(r.j)[0],
                     "qfi": fisher_information(r.j, r.dj_dtau),
                     "eps": error_from_attenuation(r.j, r.dj_dtau, spec.tau_c),
                     "method": r.method, "abs_error": r.abs_error_estimate})
    return cols, rows


def cmd_error_scan(p):
    g = p["x"] / (math.sqrt(2 * p["n"]) * p["tau_c"])
    spec = _spec(p, g=g)
    w0 = critical_frequency(spec)
    ratios = _grid(p["ratio_min"], p["ratio_max"], p["n_points"], "log")
    pts = error_vs_control_scan(spec, p["n"], omega_grid=ratios * w0, harmonics=p["harmonics"])
    cols = ["t", "omega_ctrl", "omega_over_omega0", "j", "qfi", "eps"]
    return cols, [{"t": e.t, "omega_ctrl": e.omega_ctrl, "omega_over_omega0": r, "j": e.j,
                   "qfi": e.qfi, "eps": e.eps} for e, r in zip(pts, ratios)]


def cmd_optimal_time(p):
    spec, control = _spec(p), _control(p)
    t_range = (p["t_min"], p["t_max"]) if p["t_max"] > 0 else None
    r = optimal_time(spec, control, t_range, p["tol"], p["n_coarse"], p["method"])
    return ["t_opt", "eps_min", "branch", "t0"], [asdict(r)]


def cmd_critical_scan(p):
    xs = _grid(p["x_min"], p["x_max"], p["n_points"], "log")
    rows = critical_scan(p["beta"], p["n"], xs, p["harmonics"], p["tol"], p["n_coarse"], p["jobs"])
    out = [{**asdict(r), "t_opt_over_t0": r.t_opt / r.t0} for r in rows]
    return ["x", "eps_min", "t_opt", "t0", "t_opt_over_t0", "branch"], out


def _strategy_row(g, p):
    try:
        r = strategy_select(g, p["beta"], p["n_max"], p["tol"], p["method"])
        return {"g_tau_c": g, "n_star": r.n_star, "eps_min": r.eps_min,
                "eps_hahn": r.eps_by_n[0], "eps_n_max": r.eps_by_n[-1]}
    except (QuadratureError, ArithmeticError) as exc:
        return {"g_tau_c": g, "status": f"error: {exc}"}


def cmd_strategy(p):
    gs = _grid(p["g_min"], p["g_max"], p["n_points"], "log")
    rows = _pmap(partial(_strategy_row, p=p), [float(g) for g in gs], p["jobs"])
    return ["g_tau_c", "n_star", "eps_min", "eps_hahn", "eps_n_max"], rows


def cmd_crb(p):
    g = p["x"] / math.sqrt(2 * p["n"])
    spec = _spec({"beta": p["beta"], "g": g, "tau_c": 1.0})
    control = Cpmg(p["n"])
    t = p["t"] if p["t"] > 0 else optimal_time(spec, control).t_opt
    rep = crb_check(Protocol(g, p["beta"], control, t), 1.0, p["shots"], p["trials"], p["seed"],
                    (1.0 / p["search_factor"], p["search_factor"]))
    row = {"x": p["x"], "t": t, "shots": p["shots"], "trials": p["trials"],
           "empirical_rel_std": rep.empirical_rel_std, "predicted_rel_err": rep.predicted_rel_err,
           "ratio": rep.ratio, "rel_bias": rep.rel_bias}
    return list(row), [row]


COMMANDS = {
    "spectrum": cmd_spectrum,
    "filter": cmd_filter,
    "attenuation": cmd_attenuation,
    "error-scan": cmd_error_scan,
    "optimal-time": cmd_optimal_time,
    "critical-scan": cmd_critical_scan,
    "strategy": cmd_strategy,
    "crb": cmd_crb,
}


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".12g")
    return str(v)


def render(config: RunConfig, columns, rows):
    has_status = any("status" in r for r in rows)
    cols = columns + (["status"] if has_status else [])
    if config.fmt == "json":
        body = [{c: (r.get(c) if not isinstance(r.get(c), np.generic) else r.get(c).item()) for c in cols}
                for r in rows]
        doc = {"tool": "taucrit", "version": __version__, "command": config.command,
               "config": config.params, "columns": cols, "rows": body}
        return json.dumps(doc, indent=1) + "\n"
    buf = io.StringIO()
    buf.write(f"# taucrit {__version__}\n# command = {config.command}\n")
    for key in sorted(config.params):
        buf.write(f"# {key} = {config.params[key]}\n")
    buf.write(",".join(cols) + "\n")
    for r in rows:
        line = [_fmt(r[c]) if c in r else "" for c in cols]
        if has_status and "status" not in r:
            line[-1] = "ok"
        buf.write(",".join(line) + "\n")
    return buf.getvalue()


def build_parser():
    parser = argparse.ArgumentParser(prog="taucrit", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"taucrit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, defaults in DEFAULTS.items():
        sp = sub.add_parser(name, help=HELP[name])
        sp.add_argument("--config", help="flat key = value file, or a previous JSON output")
        sp.add_argument("--print-config", action="store_true", help="print resolved values and exit")
        for key in {**defaults, **_COMMON}:
            sp.add_argument("--" + key.replace("_", "-"), dest=key, default=None)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        file_values = read_config_file(args.config) if args.config else {}
        overrides = {k: v for k, v in vars(args).items()
                     if k not in ("command", "config", "print_config") and v is not None}
        config = resolve_config(args.command, file_values, overrides)
        if args.print_config:
            for key in sorted(config.params):
                print(f"{key} = {config.params[key]}")
            return EXIT_OK
        columns, rows = COMMANDS[args.command](config.params)
    except (UsageError, ValueError, TypeError, OSError) as exc:
        print(f"taucrit: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # pragma: no cover - reported as internal failure
        print(f"taucrit: internal error: {exc!r}", file=sys.stderr)
        return EXIT_INTERNAL
    text = render(config, columns, rows)
    if config.params["output"] == "-":
        sys.stdout.write(text)
    else:
        with open(config.params["output"], "w") as fh:
            fh.write(text)
    failed = sum("status" in r for r in rows)
    if rows and failed > 0.1 * len(rows):
        return EXIT_PARTIAL
    return EXIT_OK
