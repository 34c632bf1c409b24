"""Command-line front end: ``rabi-lab {spectrum, evolve, applicability, validate}``.

Numeric output is CSV with ``#`` metadata lines (or JSON for the
applicability report). Floats are written with ``repr`` so they round-trip
exactly, and no timestamps are emitted, so identical inputs give
byte-identical files.
"""
import argparse
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__, cavity, dynamics, rabi, uaa, validation
from ._backend import BACKEND
from .errors import RabiLabError

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

SPECTRUM_DEFAULTS = {"epsilon": 1.0, "f": "0:1:0.01", "levels": 12, "methods": "exact,uaa", "n_max": None}
EVOLVE_DEFAULTS = {"epsilon": 1.0, "f": 0.1, "nbar": 100.0, "n_max": None, "methods": "exact,uaa",
                   "t_max": None, "tau_max": None, "samples": 2000}
APPLICABILITY_DEFAULTS = {"lambda0_nm": None, "omega0_ev": None, "q_factor": None, "volume_cm3": None,
                          "transverse_area_cm2": None, "field_energy_j": None, "kappa1": None,
                          "nbar": None, "mu_threshold": 1.0, "xi_threshold": 0.1}


class ConfigError(ValueError):
    pass


def _threads():
    raw = os.environ.get("RABI_LAB_THREADS", "")
    try:
        n = int(raw)
    except ValueError:
        n = os.cpu_count() or 1
    return max(1, n)


def parse_grid(text):
    """Coupling grid from ``start:stop:step``, ``a,b,c`` or a single number."""
    if isinstance(text, (int, float)):
        values = [float(text)]
    elif isinstance(text, list):
        values = [float(v) for v in text]
    elif ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ConfigError(f"grid {text!r} must look like start:stop:step")
        start, stop, step = (float(p) for p in parts)
        if step <= 0:
            raise ConfigError(f"grid step must be positive, got {step}")
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        values = [round(start + i * step, 12) for i in range(max(count, 0))]
    else:
        values = [float(v) for v in text.split(",") if v.strip()]
    if not values:
        raise ConfigError(f"grid {text!r} is empty")
    if any(not math.isfinite(v) or v < 0 for v in values):
        raise ConfigError("coupling values must be finite and >= 0")
    if any(b <= a for a, b in zip(values, values[1:])):
        raise ConfigError("coupling grid must be strictly increasing")
    return values


def parse_methods(text, allowed):
    methods = [m.strip() for m in (text if isinstance(text, list) else text.split(",")) if m.strip()]
    bad = [m for m in methods if m not in allowed]
    if bad or not methods:
        raise ConfigError(f"methods must be a nonempty subset of {', '.join(allowed)}; got {text!r}")
    return methods


def resolve(section, defaults, args, config_path):
    """defaults < config file section < explicit command-line flags."""
    merged = dict(defaults)
    if config_path:
        try:
            with open(config_path, encoding="utf-8") as fh:
                doc = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {config_path}: {exc}") from exc
        part = doc.get(section, {})
        if not isinstance(part, dict):
            raise ConfigError(f"config section {section!r} must be an object")
        unknown = sorted(set(part) - set(defaults))
        if unknown:
            raise ConfigError(f"unknown keys in config section {section!r}: {', '.join(unknown)}")
        merged.update(part)
    for key in defaults:
        value = getattr(args, key, None)
        if value is not None:
            merged[key] = value
    return merged


def _fmt(x):
    if x is None:
        return ""
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def write_csv(stream, meta, header, rows):
    for key, value in meta.items():
        stream.write(f"# {key}: {json.dumps(value, sort_keys=True)}\n")
    stream.write(",".join(header) + "\n")
    for row in rows:
        stream.write(",".join(_fmt(v) for v in row) + "\n")


def _emit(text, out):
    if out:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _spectrum_rows(f, cfg, methods):
    levels = int(cfg["levels"])
    n_max = cfg["n_max"] or int(2 * levels + 40 + math.ceil(12 * f * f))
    params = rabi.ModelParams(float(cfg["epsilon"]), f, int(n_max))
    results, flags = {}, []
    for m in methods:
        try:
            if m == "exact":
                results[m] = rabi.exact_spectrum(params, levels)
            elif m == "uaa":
                results[m] = uaa.uaa_levels(params, levels)
            else:
                results[m] = rabi.rwa_spectrum(params, levels)
        except RabiLabError as exc:
            flags.append(f"{m}:{type(exc).__name__}")
    rows = []
    for p in (1, -1):
        for i in range(levels):
            row = [f, i, p]
            label = ""
            for m in methods:
                if m in results:
                    lv = results[m].sector(p)[i]
                    row += [lv.energy, lv.energy - (i - f * f)]
                    if m == "uaa":
                        n_pair, branch = lv.label
                        label = "ground" if n_pair < 0 else f"{n_pair}{'+' if branch > 0 else '-'}"
                else:
                    row += [None, None]
            rows.append(row + [label, ";".join(flags) or "ok"])
    return rows, bool(flags)


def cmd_spectrum(cfg, out=None):
    methods = parse_methods(cfg["methods"], ("exact", "uaa", "rwa"))
    grid = parse_grid(cfg["f"])
    if int(cfg["levels"]) < 1:
        raise ConfigError("levels must be >= 1")
    if not float(cfg["epsilon"]) >= 0:
        raise ConfigError("epsilon must be >= 0")
    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        chunks = list(pool.map(lambda f: _spectrum_rows(f, cfg, methods), grid))
    header = ["f", "level", "parity"]
    for m in methods:
        header += [f"E_{m}", f"dE_{m}"]
    header += ["uaa_label", "flag"]
    rows = [r for chunk, _ in chunks for r in chunk]
    buf = io.StringIO()
    meta = {"tool": f"rabi-lab {__version__}", "command": "spectrum", "config": cfg,
            "columns": "dE = E - (level - f^2); parity is the combined parity"}
    write_csv(buf, meta, header, rows)
    _emit(buf.getvalue(), out)
    return EXIT_FAIL if any(bad for _, bad in chunks) else EXIT_OK


def default_horizon(f, nbar):
    """Two revival periods of the rotating-wave dynamics, 4 pi max(1, sqrt(nbar)) / f."""
    span = 4.0 * math.pi * max(1.0, math.sqrt(nbar))
    return span / f if f > 0 else span


def cmd_evolve(cfg, out=None):
    methods = parse_methods(cfg["methods"], dynamics.METHODS)
    f, eps, nbar = float(cfg["f"]), float(cfg["epsilon"]), float(cfg["nbar"])
    samples = int(cfg["samples"])
    if samples < 2:
        raise ConfigError("samples must be >= 2")
    if cfg["t_max"] is not None and cfg["tau_max"] is not None:
        raise ConfigError("give at most one of t_max and tau_max")
    if cfg["tau_max"] is not None:
        if f <= 0:
            raise ConfigError("tau_max needs f > 0")
        t_max = float(cfg["tau_max"]) / f
    else:
        t_max = float(cfg["t_max"]) if cfg["t_max"] is not None else default_horizon(f, nbar)
    if not t_max > 0:
        raise ConfigError("time horizon must be positive")
    params, init = dynamics.setup(eps, f, nbar, cfg["n_max"])
    times = np.linspace(0.0, t_max, samples)
    with ThreadPoolExecutor(max_workers=min(_threads(), len(methods))) as pool:
        series = list(pool.map(lambda m: dynamics.evolve(m, params, init, times), methods))
    resolved = dict(cfg, n_max=params.n_max, t_max=t_max)
    meta = {"tool": f"rabi-lab {__version__}", "command": "evolve", "config": resolved,
            "diagnostics": {s.method: {k: v for k, v in s.diagnostics.items()
                                       if isinstance(v, (int, float, bool, str, list, tuple))}
                            for s in series}}
    header = ["t", "tau"] + [f"W_{s.method}" for s in series]
    rows = zip(times, f * times, *[s.values for s in series])
    buf = io.StringIO()
    write_csv(buf, meta, header, rows)
    _emit(buf.getvalue(), out)
    return EXIT_OK


def cmd_applicability(cfg, out=None):
    fields = {k: cfg[k] for k in ("lambda0_nm", "omega0_ev", "q_factor", "volume_cm3",
                                  "transverse_area_cm2", "field_energy_j", "kappa1")}
    missing = [k for k in ("q_factor", "volume_cm3", "transverse_area_cm2", "field_energy_j")
               if fields[k] is None]
    if missing:
        raise ConfigError("missing required fields: " + ", ".join(missing))
    spec = cavity.CavitySpec.from_dict(fields)
    text = cavity.report_json(spec, cfg["nbar"], float(cfg["mu_threshold"]), float(cfg["xi_threshold"]))
    _emit(text + "\n", out)
    return EXIT_OK


def cmd_validate(only=None, as_json=False, out=None):
    slugs = None
    if only:
        slugs = [s.strip() for s in only.split(",") if s.strip()]
        unknown = [s for s in slugs if s not in validation.REGISTRY]
        if unknown:
            raise ConfigError(f"unknown checks: {', '.join(unknown)}; known: {', '.join(validation.REGISTRY)}")
    stream = None if as_json else (open(out, "w", encoding="utf-8") if out else sys.stdout)
    try:
        results = validation.run_checks(slugs, stream)
        passed = sum(r.passed for r in results)
        if as_json:
            doc = {"version": __version__, "backend": BACKEND, "passed": passed, "total": len(results),
                   "results": [r.to_dict() for r in results]}
            _emit(json.dumps(doc, indent=2, sort_keys=True, default=str) + "\n", out)
        else:
            print(f"{passed}/{len(results)} checks passed", file=stream)
    finally:
        if stream not in (None, sys.stdout):
            stream.close()
    return EXIT_OK if passed == len(results) else EXIT_FAIL


def build_parser():
    parser = argparse.ArgumentParser(prog="rabi-lab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"rabi-lab {__version__} ({BACKEND} kernels)")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON file with one object per subcommand")
        p.add_argument("--out", help="output file (default: stdout)")

    sp = sub.add_parser("spectrum", help="exact / closed-form / rotating-wave levels over a coupling grid")
    common(sp)
    sp.add_argument("--epsilon", type=float)
    sp.add_argument("--f", help="start:stop:step, comma list, or single value")
    sp.add_argument("--levels", type=int, help="levels per parity sector")
    sp.add_argument("--methods", help="comma list from exact,uaa,rwa")
    sp.add_argument("--n-max", dest="n_max", type=int)

    ev = sub.add_parser("evolve", help="population difference W(t) from a coherent field")
    common(ev)
    ev.add_argument("--epsilon", type=float)
    ev.add_argument("--f", type=float)
    ev.add_argument("--nbar", type=float)
    ev.add_argument("--n-max", dest="n_max", type=int)
    ev.add_argument("--methods", help="comma list from exact,uaa,rwa,asymptotic")
    ev.add_argument("--t-max", dest="t_max", type=float)
    ev.add_argument("--tau-max", dest="tau_max", type=float, help="horizon in units of tau = f t")
    ev.add_argument("--samples", type=int)

    ap = sub.add_parser("applicability", help="single-mode and rotating-wave validity report (JSON)")
    common(ap)
    ap.add_argument("--lambda0-nm", dest="lambda0_nm", type=float)
    ap.add_argument("--omega0-ev", dest="omega0_ev", type=float)
    ap.add_argument("--q-factor", dest="q_factor", type=float)
    ap.add_argument("--volume-cm3", dest="volume_cm3", type=float)
    ap.add_argument("--area-cm2", dest="transverse_area_cm2", type=float)
    ap.add_argument("--field-energy-j", dest="field_energy_j", type=float)
    ap.add_argument("--kappa1", type=float)
    ap.add_argument("--nbar", type=float)
    ap.add_argument("--mu-threshold", dest="mu_threshold", type=float)
    ap.add_argument("--xi-threshold", dest="xi_threshold", type=float)

    va = sub.add_parser("validate", help="run the acceptance checks")
    common(va)
    va.add_argument("--only", help="comma list of check slugs")
    va.add_argument("--json", action="store_true", help="machine-readable output")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.command == "spectrum":
            return cmd_spectrum(resolve("spectrum", SPECTRUM_DEFAULTS, args, args.config), args.out)
        if args.command == "evolve":
            return cmd_evolve(resolve("evolve", EVOLVE_DEFAULTS, args, args.config), args.out)
        if args.command == "applicability":
            return cmd_applicability(resolve("applicability", APPLICABILITY_DEFAULTS, args, args.config),
                                     args.out)
        cfg = resolve("validate", {"only": None, "json": None}, args, args.config)
        return cmd_validate(cfg["only"], bool(cfg["json"]) or args.json, args.out)
    except (ConfigError, RabiLabError, ValueError) as exc:
        print(f"rabi-lab {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
