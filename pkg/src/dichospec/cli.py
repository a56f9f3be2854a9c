"""Command-line front end: ``dichospec <subcommand> [options]``.

Configuration is an INI file read with :mod:`configparser`::

    [system]
    builtin = planar-nubg          ; or: coefficients = sin(t), 4
    omega1 = 4                     ; builtin parameter overrides
    ; antiderivatives = -cos(t), 4*t   (optional, same order as coefficients)

    [numerics]
    mode = exact                   ; exact | numeric | auto
    error_target = 1e-8
    ratio_min = 10
    divergence_factor = 1000

    [lyap]                         ; one section per subcommand
    T1 = 100
    T2 = 10000

    [output]
    format = csv                   ; csv | json | table
    path = out.csv
    plot_data = plots/

Command-line flags override the file.  Exit status: 0 success, 1 internal
error, 2 configuration error, 3 numerical precondition violated.
"""
from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import math
import os
import sys
import warnings
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from . import __version__
from .errors import (ConfigError, DichoSpecError, EvaluationError, ExpressionSyntaxError,
                     OutOfRangeError, PreconditionError, ResourceLimitError)
from .quad import build_cumulative
from .spectra import (ED, LYAPUNOV, NED, Numerics, ReportConfig, SpectralInterval,
                      ed_intervals, full_report, lyapunov_intervals, ned_intervals,
                      nonuniform_bias)
from .steklov import OSCILLATION_STEP_LIMIT, default_grid_step, sample_series
from .systems import CATALOG, DiagonalSystem, builtin, from_expressions
from .wis import (check_weak_separation, constant_cumulative, estimate_growth_bounds,
                  pair_grid, validate_certificate)

SUBCOMMANDS = ("lyap", "ed", "ned", "bias", "report", "check-wis", "growth", "tables")
FORMATS = ("csv", "json", "table")
JSON_SCHEMA = 1

EXIT_OK, EXIT_INTERNAL, EXIT_CONFIG, EXIT_PRECONDITION = 0, 1, 2, 3

_FLOAT, _INT, _BOOL, _STR, _FLOATS = "float", "int", "bool", "str", "floats"

# allowed keys per section, with their types
_PARAMS = {
    "lyap": {"T1": _FLOAT, "T2": _FLOAT, "grid_step": _FLOAT},
    "bias": {"H": _FLOAT, "T1": _FLOAT, "T2": _FLOAT, "grid_step": _FLOAT, "epsilon": _FLOAT},
    "ed": {"H": _FLOAT, "T1": _FLOAT, "T2": _FLOAT, "grid_step": _FLOAT},
    "ned": {"H": _FLOAT, "T1": _FLOAT, "T2": _FLOAT, "grid_step": _FLOAT},
    "report": {**{k: _FLOAT for k in (
        "lyap_T1", "lyap_T2", "bias_H", "bias_T1", "bias_T2", "ed_H", "ed_t0", "ed_T",
        "ned_H", "ned_T1", "ned_T2", "epsilon", "grid_step", "containment_tolerance")}},
    "check-wis": {"T": _FLOAT, "low": _INT, "high": _INT, "b_max": _FLOAT, "d_bound": _FLOAT,
                  "include_zero": _BOOL, "component": _INT, "lambdas": _FLOATS},
    "growth": {"T": _FLOAT, "component": _INT, "a_candidates": _FLOATS, "absolute": _BOOL,
               "d_bound": _FLOAT},
    "tables": {},
}
_NUMERICS = {"mode": _STR, "error_target": _FLOAT, "ratio_min": _FLOAT, "ratio_warn": _FLOAT,
             "divergence_factor": _FLOAT, "doubling_check": _BOOL, "refine": _BOOL}
_OUTPUT = {"format": _STR, "path": _STR, "plot_data": _STR}

_REPORT_DEFAULTS = ReportConfig()
_DEFAULTS = {
    "lyap": {"T1": _REPORT_DEFAULTS.lyap_T1, "T2": _REPORT_DEFAULTS.lyap_T2},
    "bias": {"H": _REPORT_DEFAULTS.bias_H, "T1": _REPORT_DEFAULTS.bias_T1,
             "T2": _REPORT_DEFAULTS.bias_T2, "epsilon": _REPORT_DEFAULTS.epsilon},
    # for ed, T1 is the first sample time t0 and T2 the horizon T
    "ed": {"H": _REPORT_DEFAULTS.ed_H, "T1": _REPORT_DEFAULTS.ed_t0, "T2": _REPORT_DEFAULTS.ed_T},
    "ned": {"H": _REPORT_DEFAULTS.ned_H, "T1": _REPORT_DEFAULTS.ned_T1,
            "T2": _REPORT_DEFAULTS.ned_T2},
    "report": {},
    "check-wis": {"T": 200.0, "low": 1, "high": 2, "b_max": 10.0, "d_bound": 10.0,
                  "include_zero": True, "component": 1, "lambdas": []},
    "growth": {"T": 1e3, "component": 1, "a_candidates": [1.0, 2.0, 4.0], "absolute": False,
               "d_bound": 10.0},
    "tables": {},
}


@dataclass
class RunConfig:
    system: DiagonalSystem
    params: dict
    numerics: Numerics = Numerics()
    format: str = "csv"
    path: Optional[str] = None
    plot_data: Optional[str] = None
    notes: list = field(default_factory=list)


# --- value parsing -------------------------------------------------------------------

def _convert(key, raw, kind):
    if isinstance(raw, str):
        raw = raw.strip()
    try:
        if kind == _FLOAT:
            value = float(raw)
            if not math.isfinite(value):
                raise ValueError
            return value
        if kind == _INT:
            return int(raw)
        if kind == _BOOL:
            if isinstance(raw, bool):
                return raw
            low = raw.lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError
        if kind == _FLOATS:
            if isinstance(raw, (list, tuple)):
                return [float(x) for x in raw]
            return [float(x) for x in raw.split(",") if x.strip()]
        return str(raw)
    except (TypeError, ValueError):
        raise ConfigError(f"invalid {kind} value {raw!r}", key) from None


def _section(parser, name, allowed):
    if not parser.has_section(name):
        return {}
    out = {}
    for key, raw in parser.items(name):
        if key not in allowed:
            raise ConfigError(f"unknown key in [{name}] (allowed: {', '.join(allowed) or 'none'})",
                              f"{name}.{key}")
        out[key] = _convert(f"{name}.{key}", raw, allowed[key])
    return out


def _system_from(parser):
    if not parser.has_section("system"):
        return builtin("planar-nubg")
    items = dict(parser.items("system"))
    name = items.pop("builtin", None)
    coeffs = items.pop("coefficients", None)
    antis = items.pop("antiderivatives", None)
    if name and coeffs:
        raise ConfigError("give either builtin or coefficients, not both", "system.coefficients")
    if coeffs is not None:
        if items:
            key = next(iter(items))
            raise ConfigError("parameters only apply to builtin systems", f"system.{key}")
        bodies = [c.strip() for c in coeffs.split(",")]
        anti_list = None
        if antis is not None:
            anti_list = [a.strip() or None for a in antis.split(",")]
            if len(anti_list) > len(bodies):
                raise ConfigError("more antiderivatives than coefficients", "system.antiderivatives")
        try:
            return from_expressions(bodies, anti_list, name="inline")
        except ExpressionSyntaxError as exc:
            raise ConfigError(str(exc), "system.coefficients") from None
    if antis is not None:
        raise ConfigError("antiderivatives need inline coefficients", "system.antiderivatives")
    name = name or "planar-nubg"
    overrides = {k: _convert(f"system.{k}", v, _FLOAT) for k, v in items.items()}
    try:
        return builtin(name, overrides)
    except ConfigError as exc:
        raise ConfigError(str(exc).split(": ", 1)[-1], f"system.{exc.key}") from None


def _numerics_from(values):
    num = Numerics(**values)
    if num.mode not in ("exact", "numeric", "auto"):
        raise ConfigError("mode must be exact, numeric or auto", "numerics.mode")
    for key in ("error_target", "ratio_min", "ratio_warn", "divergence_factor"):
        if not getattr(num, key) > 0:
            raise ConfigError("must be positive", f"numerics.{key}")
    return num


def load_config(subcommand, path=None, overrides=None) -> RunConfig:
    """Merge defaults, the INI file at ``path`` and command-line ``overrides``."""
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    parser.optionxform = str  # keep T1/T2/H case
    if path is not None:
        if not os.path.isfile(path):
            raise ConfigError(f"config file not found: {path}", "--config")
        try:
            parser.read(path, encoding="utf-8")
        except configparser.Error as exc:
            raise ConfigError(str(exc).splitlines()[0], "--config") from None
    known = set(_PARAMS) | {"system", "numerics", "output"}
    for name in parser.sections():
        if name not in known:
            raise ConfigError("unknown section", f"[{name}]")

    allowed = _PARAMS[subcommand]
    params = dict(_DEFAULTS[subcommand])
    params.update(_section(parser, subcommand, allowed))
    output = _section(parser, "output", _OUTPUT)
    numerics = _numerics_from(_section(parser, "numerics", _NUMERICS))
    system = _system_from(parser)

    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if key in ("format", "path", "plot_data"):
            output[key] = value
            continue
        if key not in allowed:
            raise ConfigError(f"option does not apply to {subcommand}", f"--{key.replace('_', '-')}")
        params[key] = _convert(f"--{key}", value, allowed[key])

    for key, value in params.items():
        if allowed.get(key) == _FLOAT and not value > 0:
            raise ConfigError("must be positive", key)
    fmt = output.get("format", "table" if subcommand == "tables" else "csv")
    if fmt not in FORMATS:
        raise ConfigError(f"format must be one of {', '.join(FORMATS)}", "output.format")
    return RunConfig(system, params, numerics, fmt, output.get("path"), output.get("plot_data"))


# --- formatting ------------------------------------------------------------------------

def _g17(x):
    return format(float(x), ".17g")


def _json(obj, indent=0):
    """JSON with every float printed to 17 significant digits (non-finite as null)."""
    pad, inner = "  " * indent, "  " * (indent + 1)
    if isinstance(obj, bool) or obj is None:
        return {True: "true", False: "false", None: "null"}[obj]
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _g17(obj) if math.isfinite(obj) else "null"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        body = ",\n".join(f"{inner}{_json(str(k))}: {_json(v, indent + 1)}" for k, v in obj.items())
        return "{\n" + body + "\n" + pad + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        if len(obj) == 0:
            return "[]"
        body = ",\n".join(inner + _json(v, indent + 1) for v in obj)
        return "[\n" + body + "\n" + pad + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _fmt_table(x):
    if x is None:
        return "-"
    if isinstance(x, bool):
        return "yes" if x else "no"
    if isinstance(x, (float, np.floating)):
        if not math.isfinite(x):
            return str(x)
        if abs(x) > 1e4:
            return f"{x:.4e}"
        return f"{x:.4f}"
    return str(x)


def _fmt_csv(x):
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (float, np.floating)):
        return _g17(x)
    return "" if x is None else str(x)


def render_csv(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt_csv(v) for v in row])
    return buf.getvalue()


def render_table(header, rows, title=None, notes=()):
    cells = [list(header)] + [[_fmt_table(v) for v in row] for row in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    line = lambda r: "  ".join(c.rjust(w) for c, w in zip(r, widths))
    out = []
    if title:
        out.append(title)
    out.append(line(cells[0]))
    out.append("  ".join("-" * w for w in widths))
    out += [line(r) for r in cells[1:]]
    out += [f"# {n}" for n in notes]
    return "\n".join(out) + "\n"


@dataclass
class Result:
    """Rows for CSV/table output plus a JSON payload and optional plot series."""

    header: list
    rows: list
    payload: dict
    title: str = ""
    notes: list = field(default_factory=list)
    series: dict = field(default_factory=dict)
    blocks: list = field(default_factory=list)   # extra (title, header, rows, notes) tables
    table_main: bool = True

    def render(self, fmt):
        if fmt == "json":
            return _json({"schema": JSON_SCHEMA, **self.payload}) + "\n"
        if fmt == "csv":
            return render_csv(self.header, self.rows)
        parts = [render_table(self.header, self.rows, self.title, self.notes)] if self.table_main else []
        parts += [render_table(h, r, t, n) for t, h, r, n in self.blocks]
        return "\n".join(parts)


def _interval_dict(iv: SpectralInterval):
    return {"component": iv.component, "lower": iv.lower, "upper": iv.upper,
            "divergent": iv.divergent, "kind": iv.kind}


def _step_for(params, lo, hi):
    step = params.get("grid_step")
    return default_grid_step(lo, hi) if step is None else step


# --- plot series -------------------------------------------------------------------------

def _cumul(system, j, t_max, numerics):
    return build_cumulative(system.coefficients[j - 1], 0.0, numerics.error_target, t_max,
                            mode=numerics.mode, workers=numerics.workers)


def _lyap_series(system, T1, T2, step, numerics):
    out = {}
    for j in range(1, system.dimension + 1):
        F = _cumul(system, j, T2, numerics)
        out[f"lyap_{j}"] = sample_series(lambda t: F.value(t) / t, T1, T2, step)
    return out


def _steklov_series(system, H, T1, T2, step, numerics, prefix, scaled=False):
    out = {}
    for j in range(1, system.dimension + 1):
        F = _cumul(system, j, T2 + H, numerics)
        if scaled:
            fn = lambda t: np.abs(F.value(t + H) - F.value(t)) / t
        else:
            fn = lambda t: (F.value(t + H) - F.value(t)) / H
        out[f"{prefix}_{j}"] = sample_series(fn, T1, T2, step)
    return out


def write_plot_data(directory, series):
    os.makedirs(directory, exist_ok=True)
    written = []
    for name, (t, v) in series.items():
        path = os.path.join(directory, f"{name}.dat")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("# t value\n")
            for a, b in zip(t, v):
                fh.write(f"{_g17(a)} {_g17(b)}\n")
        written.append(path)
    return written


# --- subcommands ---------------------------------------------------------------------------

def _intervals_result(ivs, with_divergent, title, payload_extra, notes):
    header = ["component", "lower", "upper"] + (["divergent"] if with_divergent else [])
    rows = [[iv.component, iv.lower, iv.upper] + ([iv.divergent] if with_divergent else [])
            for iv in ivs]
    payload = {**payload_extra, "intervals": [_interval_dict(iv) for iv in ivs]}
    return Result(header, rows, payload, title, notes)


def _base_payload(cfg, kind):
    return {"procedure": kind, "system": cfg.system.name,
            "parameters": dict(cfg.system.parameters), "config": dict(cfg.params),
            "numerics": asdict(cfg.numerics)}


def run_lyap(cfg: RunConfig) -> Result:
    p = cfg.params
    ivs = lyapunov_intervals(cfg.system, p["T1"], p["T2"], p.get("grid_step"), cfg.numerics)
    step = _step_for(p, p["T1"], p["T2"])
    res = _intervals_result(ivs, False, f"Lyapunov intervals, T1={p['T1']:g}, T2={p['T2']:g}",
                            _base_payload(cfg, LYAPUNOV), [f"grid step {step:.6g}"])
    if cfg.plot_data:
        res.series = _lyap_series(cfg.system, p["T1"], p["T2"], step, cfg.numerics)
    return res


def run_ed(cfg: RunConfig) -> Result:
    p = cfg.params
    ivs = ed_intervals(cfg.system, p["H"], p["T1"], p["T2"], p.get("grid_step"), cfg.numerics)
    step = _step_for(p, p["T1"], p["T2"] - p["H"])
    res = _intervals_result(ivs, True, f"ED intervals, H={p['H']:g}, t0={p['T1']:g}, T={p['T2']:g}",
                            _base_payload(cfg, ED), [f"grid step {step:.6g}"])
    if cfg.plot_data:
        res.series = _steklov_series(cfg.system, p["H"], p["T1"], p["T2"] - p["H"], step,
                                     cfg.numerics, "steklov")
    return res


def run_ned(cfg: RunConfig) -> Result:
    p = cfg.params
    ivs = ned_intervals(cfg.system, p["H"], p["T1"], p["T2"], p.get("grid_step"), cfg.numerics)
    step = _step_for(p, p["T1"], p["T2"])
    res = _intervals_result(ivs, True, f"NED intervals, H={p['H']:g}, T1={p['T1']:g}, T2={p['T2']:g}",
                            _base_payload(cfg, NED), [f"grid step {step:.6g}"])
    if cfg.plot_data:
        res.series = _steklov_series(cfg.system, p["H"], p["T1"], p["T2"], step,
                                     cfg.numerics, "steklov")
    return res


def run_bias(cfg: RunConfig) -> Result:
    p = cfg.params
    rep = nonuniform_bias(cfg.system, p["H"], p["T1"], p["T2"], p.get("grid_step"),
                          p["epsilon"], cfg.numerics)
    rows = [[c.component, c.b_bar, rep.decision(c.component)] for c in rep.components]
    payload = {**_base_payload(cfg, "bias"), "epsilon": rep.epsilon,
               "components": [{"component": c.component, "b_bar": c.b_bar,
                               "decision": rep.decision(c.component), "t_at_sup": c.t_at_sup}
                              for c in rep.components]}
    step = rep.params.grid_step
    res = Result(["component", "b_bar", "decision"], rows, payload,
                 f"Nonuniform bias, H={p['H']:g}, T1={p['T1']:g}, T2={p['T2']:g}",
                 [f"grid step {step:.6g}, epsilon {rep.epsilon:g}"])
    if cfg.plot_data:
        res.series = _steklov_series(cfg.system, p["H"], p["T1"], p["T2"], step,
                                     cfg.numerics, "bias", scaled=True)
    return res


def _report_config(cfg):
    kwargs = {k: v for k, v in cfg.params.items()}
    return ReportConfig(**kwargs, numerics=cfg.numerics)


def report_payload(report):
    return {
        "procedure": "report",
        "system": report.system,
        "parameters": report.parameters,
        "components": [
            {"component": lyap.component,
             "lyapunov": _interval_dict(lyap), "ned": _interval_dict(ned), "ed": _interval_dict(ed),
             "bias": {"b_bar": b.b_bar, "decision": report.bias.decision(b.component),
                      "t_at_sup": b.t_at_sup}}
            for lyap, ned, ed, b in zip(report.lyapunov, report.ned, report.ed,
                                        report.bias.components)],
        "containment_violations": [asdict(v) for v in report.containment_violations],
        "provenance": report.provenance,
    }


def run_report(cfg: RunConfig) -> Result:
    rc = _report_config(cfg)
    report = full_report(cfg.system, rc)
    rows = []
    for lyap, ned, ed, b in zip(report.lyapunov, report.ned, report.ed, report.bias.components):
        j = lyap.component
        decision = report.bias.decision(j)
        rows.append([j, LYAPUNOV, lyap.lower, lyap.upper, False, b.b_bar, decision])
        rows.append([j, NED, ned.lower, ned.upper, ned.divergent, b.b_bar, decision])
        rows.append([j, ED, ed.lower, ed.upper, ed.divergent, b.b_bar, decision])
    notes = [f"containment violations: {len(report.containment_violations)}"]
    notes += [f"violation: component {v.component} {v.inner} {v.side} {v.inner_value:.6g} "
              f"outside {v.outer} {v.outer_value:.6g}" for v in report.containment_violations]
    res = Result(["component", "kind", "lower", "upper", "divergent", "b_bar", "decision"], rows,
                 report_payload(report), f"Spectral report for {report.system}", notes)
    if cfg.plot_data:
        num = cfg.numerics
        steps = report.provenance["grid_steps"]
        res.series.update(_lyap_series(cfg.system, rc.lyap_T1, rc.lyap_T2, steps["lyap"], num))
        res.series.update(_steklov_series(cfg.system, rc.bias_H, rc.bias_T1, rc.bias_T2,
                                          steps["bias"], num, "bias", scaled=True))
        res.series.update(_steklov_series(cfg.system, rc.ned_H, rc.ned_T1, rc.ned_T2,
                                          steps["ned"], num, "steklov"))
    return res


def _cert_row(cert, ok):
    return [cert.pair[0], cert.pair[1], cert.a, cert.b, cert.d, cert.margin, cert.feasible, ok]


def run_check_wis(cfg: RunConfig) -> Result:
    p, system = cfg.params, cfg.system
    n = system.dimension
    grid = pair_grid(p["T"], include_zero=p["include_zero"])
    cum = {}

    def F(j):
        if j not in cum:
            if not 1 <= j <= n:
                raise ConfigError(f"component must lie in 1..{n}", "component")
            cum[j] = _cumul(system, j, grid.t_max, cfg.numerics)
        return cum[j]

    rows, certs, members = [], [], []
    if n >= 2 or p["low"] != p["high"]:
        lo, hi = p["low"], p["high"]
        if not (1 <= lo <= n and 1 <= hi <= n):
            raise ConfigError(f"low/high must lie in 1..{n}", "low")
        cert = check_weak_separation(F(lo), F(hi), grid, p["b_max"], p["d_bound"],
                                     pair=(f"a{lo}", f"a{hi}"))
        certs.append((cert, validate_certificate(cert, F(lo), F(hi))))
    j = p["component"]
    for lam in p["lambdas"]:
        Fl = constant_cumulative(lam, grid.t_max)
        up = check_weak_separation(Fl, F(j), grid, p["b_max"], p["d_bound"],
                                   pair=(repr(lam), f"a{j}"))
        down = check_weak_separation(F(j), Fl, grid, p["b_max"], p["d_bound"],
                                     pair=(f"a{j}", repr(lam)))
        certs.append((up, validate_certificate(up, Fl, F(j))))
        certs.append((down, validate_certificate(down, F(j), Fl)))
        members.append({"component": j, "lambda": lam,
                        "member": not (up.feasible or down.feasible)})
    rows = [_cert_row(c, ok) for c, ok in certs]
    payload = {**_base_payload(cfg, "check-wis"), "grid": grid.description,
               "certificates": [{"low": c.pair[0], "high": c.pair[1], "a": c.a, "b": c.b,
                                 "d": c.d, "margin": c.margin, "feasible": c.feasible,
                                 "validated": ok} for c, ok in certs],
               "membership": members}
    header = ["low", "high", "a", "b", "d", "margin", "feasible", "validated"]
    res = Result(header, rows, payload, "Weak integral separation certificates",
                 [f"grid: {grid.description}", f"admissible intercept d >= -{p['d_bound']:g}"])
    if members:
        res.blocks.append(("Spectrum membership estimates", ["component", "lambda", "member"],
                           [[m["component"], m["lambda"], m["member"]] for m in members], []))
    return res


def run_growth(cfg: RunConfig) -> Result:
    p, system = cfg.params, cfg.system
    j = p["component"]
    if not 1 <= j <= system.dimension:
        raise ConfigError(f"component must lie in 1..{system.dimension}", "component")
    grid = pair_grid(p["T"], include_zero=True)
    F = _cumul(system, j, grid.t_max, cfg.numerics)
    f_abs = None
    if p["absolute"]:
        f_abs = build_cumulative(system.coefficients[j - 1], 0.0, cfg.numerics.error_target,
                                 grid.t_max, mode="numeric", absolute=True)
    bounds = estimate_growth_bounds(F, grid, p["a_candidates"], f_abs, p["d_bound"])
    rows = [[b.a_tilde, b.b_tilde, b.d_tilde, b.mode, b.satisfied_on_grid] for b in bounds]
    payload = {**_base_payload(cfg, "growth"), "grid": grid.description,
               "bounds": [asdict(b) for b in bounds]}
    return Result(["a_tilde", "b_tilde", "d_tilde", "mode", "satisfied"], rows, payload,
                  f"Growth bounds for component {j}",
                  [f"grid: {grid.description}", f"d_tilde capped at {p['d_bound']:g}"])


# Table rows; the ED rows run on the coarsest admissible grid to stay desk-scale.
TABLE_ROWS = {
    1: [(None, 1e2, 1e4), (None, 1e2, 1e6), (None, 1e4, 1e6)],
    2: [(1e2, 1e4, 1e5), (1e3, 1e6, 1e7), (1e4, 1e6, 1e7)],
    3: [(1e3, 1e6, 1e8), (1e5, 1e6, 1e8), (1e4, 1e5, 1e8)],
    4: [(1e4, 1e2, 1e3), (1e6, 1e2, 1e3), (1e8, 1e3, 1e4)],
}
TABLE3_STEP = OSCILLATION_STEP_LIMIT


def _ivs(ivs):
    return [x for iv in ivs for x in (iv.lower, iv.upper)]


def run_tables(cfg: RunConfig, tables=(1, 2, 3, 4)) -> Result:
    system, num = cfg.system, cfg.numerics
    blocks, all_rows = [], []
    payload = {**_base_payload(cfg, "tables"), "tables": {}}

    def add(no, title, header, rows, note):
        blocks.append((f"Table {no}: {title}", header, rows, [note]))
        payload["tables"][str(no)] = {"title": title, "header": header, "rows": rows, "grid": note}
        for r in rows:
            all_rows.append([no] + list(r) + [None] * (9 - len(r)))

    if 1 in tables:
        rows = []
        for _, T1, T2 in TABLE_ROWS[1]:
            rows.append([None, T1, T2] + _ivs(lyapunov_intervals(system, T1, T2, None, num)))
        add(1, "Lyapunov intervals", ["H", "T1", "T2", "low1", "up1", "low2", "up2"], rows,
            "grid: T1 + k*min(pi/8, (T2-T1)/1e4), plus T2")
    if 2 in tables:
        rows = []
        for H, T1, T2 in TABLE_ROWS[2]:
            rep = nonuniform_bias(system, H, T1, T2, None, 0.01, num)
            rows.append([H, T1, T2] + [c.b_bar for c in rep.components])
        add(2, "nonuniform bias", ["H", "T1", "T2", "b1", "b2"], rows,
            "grid: T1 + k*min(pi/8, (T2-T1)/1e4), plus T2; epsilon 0.01")
    if 3 in tables:
        rows = []
        for H, t0, T in TABLE_ROWS[3]:
            ivs = ed_intervals(system, H, t0, T, TABLE3_STEP, num)
            rows.append([H, t0, T] + _ivs(ivs) + [iv.divergent for iv in ivs])
        add(3, "ED intervals (T1 = t0, T2 = T)",
            ["H", "T1", "T2", "low1", "up1", "low2", "up2", "div1", "div2"], rows,
            "grid: t0 + k*pi/4 on [t0, T-H], plus T-H; closed-form antiderivatives")
    if 4 in tables:
        rows = []
        for H, T1, T2 in TABLE_ROWS[4]:
            iv = ned_intervals(system, H, T1, T2, None, num, components=[2])[0]
            rows.append([H, T1, T2, iv.lower, iv.upper])
        add(4, "NED intervals, component 2", ["H", "T1", "T2", "low2", "up2"], rows,
            "grid: T1 + k*min(pi/8, (T2-T1)/1e4), plus T2")
    header = ["table", "H", "T1", "T2", "c1", "c2", "c3", "c4", "c5", "c6"]
    return Result(header, all_rows, payload, blocks=blocks, table_main=False)


RUNNERS = {"lyap": run_lyap, "ed": run_ed, "ned": run_ned, "bias": run_bias,
           "report": run_report, "check-wis": run_check_wis, "growth": run_growth,
           "tables": run_tables}


# --- entry point ---------------------------------------------------------------------------

def build_parser():
    ap = argparse.ArgumentParser(prog="dichospec",
                                 description="Finite-time spectra of diagonal linear systems.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True, metavar="COMMAND")
    for name in SUBCOMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="INI configuration file")
        sp.add_argument("--out", dest="path", help="output file (default: stdout)")
        sp.add_argument("--format", choices=FORMATS)
        sp.add_argument("--plot-data", dest="plot_data", metavar="DIR",
                        help="write two-column (t, value) series into DIR")
        sp.add_argument("--system", help=f"builtin system ({', '.join(CATALOG)})")
        for flag in ("H", "T1", "T2", "grid-step", "epsilon"):
            sp.add_argument(f"--{flag}", dest=flag.replace("-", "_"), default=None)
    return ap


def run(subcommand, cfg: RunConfig, stdout=None):
    """Execute one subcommand and write its artifacts; returns the rendered text."""
    result = RUNNERS[subcommand](cfg)
    text = result.render(cfg.format)
    if cfg.path:
        with open(cfg.path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        (stdout or sys.stdout).write(text)
    if cfg.plot_data and result.series:
        write_plot_data(cfg.plot_data, result.series)
    return text


def main(argv=None, stdout=None, stderr=None):
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    overrides = {k: getattr(args, k) for k in
                 ("H", "T1", "T2", "grid_step", "epsilon", "format", "path", "plot_data")}
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", RuntimeWarning)
            cfg = load_config(args.command, args.config, overrides)
            if args.system:
                cfg.system = builtin(args.system)
            run(args.command, cfg, stdout)
        for w in caught:
            print(f"warning: {w.message}", file=stderr)
    except ConfigError as exc:
        print(f"config error: {exc}", file=stderr)
        return EXIT_CONFIG
    except (PreconditionError, OutOfRangeError, ResourceLimitError, EvaluationError) as exc:
        print(f"precondition violated: {exc}", file=stderr)
        return EXIT_PRECONDITION
    except DichoSpecError as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_INTERNAL
    except Exception as exc:  # noqa: BLE001 - last-resort status 1
        print(f"internal error: {type(exc).__name__}: {exc}", file=stderr)
        return EXIT_INTERNAL
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
