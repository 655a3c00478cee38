"""Command-line front end: ``reslab <command> ...``.

Commands
--------
validate     graph report, strip bound and balanced-vertex warning
resonances   resonance table for a rectangle (CSV or JSON, optional SVG)
compare      open resonances against the closed spectrum, binned
scan         counts below ``-delta`` for a list of ``delta``
ensemble     open/closed comparison over random regular graphs of growing size
hermitian    strip counts for the damped Hermitian matrix example

Option values can also come from a JSON file given with ``--config`` (keys are
option names with underscores); explicit options win over the file, and the
``RESLAB_SEED`` environment variable overrides the seed from the file.

Exit codes: 0 success, 2 input error, 3 numerical failure, 4 policy violation.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import xml.etree.ElementTree as ET
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .ensembles import EnsembleSpec, hermitian_pair
from .graph import GraphFormatError, load_graph, strip_bound, validate
from .secular import assemble
from .solver import (
    NearZeroError,
    NonRealZeroError,
    OriginExcludedError,
    QuadratureError,
    Rectangle,
    RefinementError,
    find_resonances,
)
from .statistics import compare_open_closed, delta_scan, ensemble_comparison, hermitian_strip_count

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC, EXIT_POLICY = 0, 2, 3, 4

_DEFAULTS = {
    "tol": 1e-10,
    "allow_origin": False,
    "format": "csv",
    "bin_width": 0.5,
    "window": "1:20",
    "depth": 3.0,
    "deltas": "0.4,0.2,0.1,0.05",
    "n_list": "40,80,160",
    "degree": 3,
    "leads": 2,
    "lengths": "1:2",
    "seed": 0,
    "n": 200,
    "damp_counts": "0,5,10,20",
    "damp_scale": 0.05,
    "hermitian_window": "-1:1",
    "hermitian_deltas": "0.01",
}


class InputError(ValueError):
    """Bad command-line or config input (exit code 2)."""


# ---------------------------------------------------------------------------
# parsing helpers


def parse_interval(text) -> tuple:
    """``'lo:hi'`` with decimal or scientific literals."""
    if isinstance(text, (list, tuple)) and len(text) == 2:
        lo, hi = text
    else:
        parts = str(text).split(":")
        if len(parts) != 2:
            raise InputError(f"expected lo:hi, got {text!r}")
        lo, hi = parts
    try:
        lo, hi = float(lo), float(hi)
    except ValueError:
        raise InputError(f"bad number in interval {text!r}") from None
    if not (math.isfinite(lo) and math.isfinite(hi)) or lo >= hi:
        raise InputError(f"interval {text!r} must satisfy lo < hi")
    return lo, hi


def parse_list(text, kind=float) -> list:
    if isinstance(text, (list, tuple)):
        items = list(text)
    else:
        items = [s for s in str(text).split(",") if s.strip()]
    try:
        return [kind(x) for x in items]
    except ValueError:
        raise InputError(f"bad list {text!r}") from None


def _length_range(text) -> tuple:
    """Like `parse_interval` but allows equal end points (fixed lengths)."""
    parts = list(text) if isinstance(text, (list, tuple)) else str(text).split(":")
    try:
        lo, hi = (float(x) for x in parts)
    except ValueError:
        raise InputError(f"expected lo:hi, got {text!r}") from None
    if not 0 < lo <= hi < math.inf:
        raise InputError(f"length range {text!r} must satisfy 0 < lo <= hi")
    return lo, hi


def _positive(name, value):
    if not value > 0:
        raise InputError(f"{name} must be positive")
    return value


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="reslab", description="Resonances of open quantum graphs.")
    p.add_argument("--version", action="version", version=f"reslab {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, graph=True):
        if graph:
            sp.add_argument("graph", help="graph JSON file")
        sp.add_argument("--config", help="JSON file with option values")
        sp.add_argument("--output", "-o", help="write the report here instead of stdout")
        sp.add_argument("--threads", type=int, help="maximum number of concurrent workers")
        return sp

    v = common(sub.add_parser("validate", help="report bounds, balance and strip bound"))
    v.add_argument("--limits", nargs=4, type=float, metavar=("D", "N0", "LMIN", "LMAX"))
    v.add_argument("--format", choices=["text", "json"], default=None)

    r = common(sub.add_parser("resonances", help="locate resonances in a rectangle"))
    r.add_argument("--re", help="real range lo:hi")
    r.add_argument("--im", help="imaginary range lo:hi")
    r.add_argument("--tol", type=float)
    r.add_argument("--allow-origin", action="store_true", default=None)
    r.add_argument("--format", choices=["csv", "json"])
    r.add_argument("--svg", help="also write an SVG scatter plot")

    c = common(sub.add_parser("compare", help="binned open vs closed comparison"))
    c.add_argument("--window", help="real window a:b")
    c.add_argument("--bin-width", type=float)
    c.add_argument("--cutoff", type=float, help="depth cutoff (default 2/L_min)")

    s = common(sub.add_parser("scan", help="counts below -delta"))
    s.add_argument("--window", help="real window a1:a2")
    s.add_argument("--depth", type=float, help="a3 (bottom of the box)")
    s.add_argument("--deltas", help="comma separated list")

    e = common(sub.add_parser("ensemble", help="open/closed distance across sizes"), graph=False)
    e.add_argument("--n-list", help="comma separated vertex counts")
    e.add_argument("--degree", type=int)
    e.add_argument("--leads", type=int)
    e.add_argument("--lengths", help="length range lo:hi")
    e.add_argument("--seed", type=int)
    e.add_argument("--window")
    e.add_argument("--bin-width", type=float)
    e.add_argument("--cutoff", type=float)

    h = common(sub.add_parser("hermitian", help="damped Hermitian matrix strip counts"), graph=False)
    h.add_argument("--n", type=int)
    h.add_argument("--damp-counts")
    h.add_argument("--damp-scale", type=float)
    h.add_argument("--deltas", dest="hermitian_deltas")
    h.add_argument("--window", dest="hermitian_window")
    h.add_argument("--seed", type=int)
    return p


def resolve_config(args) -> dict:
    """Merge defaults, the config file, RESLAB_SEED and explicit options."""
    cfg = dict(_DEFAULTS)
    if args.command == "validate":
        cfg["format"] = "text"
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                doc = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(doc, dict):
            raise InputError("config file must hold a JSON object")
        for k, val in doc.items():
            cfg[k.replace("-", "_")] = val
    env_seed = os.environ.get("RESLAB_SEED")
    if env_seed is not None and env_seed.strip():
        try:
            cfg["seed"] = int(env_seed)
        except ValueError:
            raise InputError(f"RESLAB_SEED must be an integer, got {env_seed!r}") from None
    for k, val in vars(args).items():
        if val is not None and k not in ("config",):
            cfg[k] = val
    return cfg


# ---------------------------------------------------------------------------
# output helpers


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def resonance_rows(resonances) -> list:
    rows = sorted(resonances, key=lambda r: (r.z.real, r.z.imag))
    return [(r.z.real, r.z.imag, r.multiplicity, r.residual) for r in rows]


def resonances_csv(resonances) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["re", "im", "multiplicity", "residual"])
    for re_, im_, m, res in resonance_rows(resonances):
        w.writerow([_fmt(re_), _fmt(im_), m, _fmt(res)])
    return buf.getvalue()


_CONFIG_KEYS = {
    "validate": ("graph", "limits", "format"),
    "resonances": ("graph", "re", "im", "tol", "allow_origin", "format"),
    "compare": ("graph", "window", "bin_width", "cutoff"),
    "scan": ("graph", "window", "depth", "deltas"),
    "ensemble": ("n_list", "degree", "leads", "lengths", "seed", "window", "bin_width", "cutoff"),
    "hermitian": ("n", "damp_counts", "damp_scale", "hermitian_deltas", "hermitian_window", "seed"),
}


def _public_config(cfg: dict) -> dict:
    """The settings that determine a command's results (no paths, no thread count)."""
    keys = _CONFIG_KEYS[cfg["command"]]
    out = {k: cfg.get(k) for k in keys}
    out["command"] = cfg["command"]
    return out


def report_json(cfg: dict, results: dict, diagnostics: dict) -> str:
    doc = {
        "config": _public_config(cfg),
        "results": results,
        "diagnostics": diagnostics,
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
    }
    return json.dumps(doc, sort_keys=True, indent=2, allow_nan=False, default=_json_default) + "\n"


def _json_default(obj):
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not serializable: {type(obj).__name__}")


def _emit(text: str, path):
    if path:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def resonance_svg(resonances, rect: Rectangle, strip: float | None = None) -> str:
    """Scatter plot of resonances; the imaginary axis points up as usual
    (SVG's y axis is flipped), marker radius proportional to multiplicity."""
    pts = [(r.z.real, r.z.imag, r.multiplicity) for r in resonances]
    xs = [p[0] for p in pts] or [rect.re_min, rect.re_max]
    ys = [p[1] for p in pts] or [rect.im_min, rect.im_max]
    if strip is not None:
        ys = ys + [-strip]
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    span = max(x1 - x0, y1 - y0, 1e-6)
    if x1 - x0 < 1e-3 * span:
        x0, x1 = x0 - 0.05 * span, x1 + 0.05 * span
    if y1 - y0 < 1e-3 * span:
        y0, y1 = y0 - 0.05 * span, y1 + 0.05 * span
    mx, my = 0.05 * (x1 - x0), 0.05 * (y1 - y0)
    vx, vy = x0 - mx, -(y1 + my)
    vw, vh = (x1 - x0) + 2 * mx, (y1 - y0) + 2 * my
    unit = 0.006 * max(vw, vh)
    svg = ET.Element("svg", {
        "xmlns": "http://www.w3.org/2000/svg", "version": "1.1",
        "viewBox": f"{_fmt(vx)} {_fmt(vy)} {_fmt(vw)} {_fmt(vh)}",
        "width": "800", "height": "600", "preserveAspectRatio": "none",
    })
    ET.SubElement(svg, "title").text = "resonances"
    stroke = _fmt(0.3 * unit)
    if vy <= 0 <= vy + vh:
        ET.SubElement(svg, "line", {"x1": _fmt(vx), "x2": _fmt(vx + vw), "y1": "0", "y2": "0",
                                    "stroke": "gray", "stroke-width": stroke, "class": "axis"})
    if strip is not None:
        ET.SubElement(svg, "line", {"x1": _fmt(vx), "x2": _fmt(vx + vw), "y1": _fmt(strip),
                                    "y2": _fmt(strip), "stroke": "red", "stroke-width": stroke,
                                    "stroke-dasharray": f"{_fmt(2 * unit)} {_fmt(unit)}",
                                    "class": "strip-bound"})
    for x, y, m in pts:
        ET.SubElement(svg, "circle", {"cx": _fmt(x), "cy": _fmt(-y), "r": _fmt(unit * m),
                                      "fill": "navy", "class": "resonance",
                                      "data-multiplicity": str(m)})
    return '<?xml version="1.0" encoding="UTF-8"?>\n' + ET.tostring(svg, encoding="unicode") + "\n"


# ---------------------------------------------------------------------------
# commands


def cmd_validate(cfg) -> int:
    g = load_graph(cfg["graph"])
    limits = cfg.get("limits")
    rep = validate(g, limits)
    try:
        K = strip_bound(g)
    except ValueError:
        K = None
    if rep.balanced_vertices:
        print(f"warning: balanced vertices: {list(rep.balanced_vertices)}", file=sys.stderr)
    if cfg["format"] == "json":
        results = rep.as_dict()
        results["strip_bound"] = K
        _emit(report_json(cfg, results, {}), cfg.get("output"))
    else:
        lines = [f"{k.replace('_', ' ')}: {json.dumps(v)}" for k, v in rep.as_dict().items()]
        lines.append("strip bound: " + ("undefined (balanced vertex)" if K is None else _fmt(K)))
        if rep.balanced_vertices:
            lines.append(f"warning: balanced vertices: {list(rep.balanced_vertices)}")
        _emit("\n".join(lines) + "\n", cfg.get("output"))
    return EXIT_OK if rep.satisfies_bounds else EXIT_INPUT


def _rectangle(cfg) -> Rectangle:
    if cfg.get("re") is None or cfg.get("im") is None:
        raise InputError("--re and --im are required")
    (a, b), (c, d) = parse_interval(cfg["re"]), parse_interval(cfg["im"])
    return Rectangle(a, b, c, d)


def cmd_resonances(cfg) -> int:
    g = load_graph(cfg["graph"])
    rect = _rectangle(cfg)
    tol = _positive("tol", float(cfg["tol"]))
    found = find_resonances(assemble(g), rect, tol, allow_origin=bool(cfg["allow_origin"]))
    try:
        K = strip_bound(g)
    except ValueError:
        K = None
    if cfg["format"] == "csv":
        text = resonances_csv(found)
    else:
        rows = [{"re": a, "im": b, "multiplicity": m, "residual": r}
                for a, b, m, r in resonance_rows(found)]
        diag = {"total_multiplicity": sum(r.multiplicity for r in found), "strip_bound": K,
                "clusters": sum(1 for r in found if r.cluster)}
        text = report_json(cfg, {"resonances": rows}, diag)
    _emit(text, cfg.get("output"))
    if cfg.get("svg"):
        with open(cfg["svg"], "w", encoding="utf-8", newline="\n") as fh:
            fh.write(resonance_svg(found, rect, K))
    return EXIT_OK


def cmd_compare(cfg) -> int:
    g = load_graph(cfg["graph"])
    window = parse_interval(cfg["window"])
    bw = _positive("bin width", float(cfg["bin_width"]))
    cutoff = cfg.get("cutoff")
    rep = compare_open_closed(g, window, bw, None if cutoff is None else float(cutoff))
    diag = {"cutoff_used": rep.open.cutoff}
    _emit(report_json(cfg, rep.as_dict(), diag), cfg.get("output"))
    return EXIT_OK


def cmd_scan(cfg) -> int:
    g = load_graph(cfg["graph"])
    a1, a2 = parse_interval(cfg["window"])
    deltas = [_positive("delta", d) for d in parse_list(cfg["deltas"])]
    scan = delta_scan(g, a1, a2, float(cfg["depth"]), deltas)
    diag = {"fit_points": sum(1 for c in scan.counts if c >= 3)}
    _emit(report_json(cfg, scan.as_dict(), diag), cfg.get("output"))
    return EXIT_OK


def cmd_ensemble(cfg) -> int:
    n_list = parse_list(cfg["n_list"], int)
    lo, hi = _length_range(cfg["lengths"])
    try:
        base = EnsembleSpec(n_list[0], int(cfg["degree"]), (lo, hi), int(cfg["leads"]),
                            int(cfg["seed"]))
        for n in n_list:
            EnsembleSpec(n, base.degree, base.length_range, base.lead_count, base.seed)
    except (ValueError, IndexError) as exc:
        raise InputError(f"bad ensemble: {exc}") from None
    window = parse_interval(cfg["window"])
    cutoff = cfg.get("cutoff")
    reps = ensemble_comparison(base, n_list, window, float(cfg["bin_width"]),
                               None if cutoff is None else float(cutoff), cfg.get("threads"))
    results = {"members": [
        {"n_vertices": n, "seed": base.seed, "distance": r.distance,
         "open_count": r.open.total_count, "closed_count": r.closed.total_count,
         "total_length": r.open.total_length}
        for n, r in zip(n_list, reps)
    ]}
    ds = [r.distance for r in reps]
    diag = {"strictly_decreasing": all(b < a for a, b in zip(ds, ds[1:]))}
    _emit(report_json(cfg, results, diag), cfg.get("output"))
    return EXIT_OK


def cmd_hermitian(cfg) -> int:
    n = int(cfg["n"])
    counts = parse_list(cfg["damp_counts"], int)
    deltas = [_positive("delta", d) for d in parse_list(cfg["hermitian_deltas"])]
    window = parse_interval(cfg["hermitian_window"])
    scale = _positive("damp scale", float(cfg["damp_scale"]))
    rows = []
    for k in counts:
        try:
            pair = hermitian_pair(n, k, scale, int(cfg["seed"]))
        except ValueError as exc:
            raise InputError(str(exc)) from None
        rows.append({
            "damp_count": k,
            "trace_norm": pair.damping_trace_norm,
            "counts": [hermitian_strip_count(pair, d, window) for d in deltas],
        })
    _emit(report_json(cfg, {"deltas": deltas, "rows": rows}, {"n": n}), cfg.get("output"))
    return EXIT_OK


COMMANDS = {
    "validate": cmd_validate,
    "resonances": cmd_resonances,
    "compare": cmd_compare,
    "scan": cmd_scan,
    "ensemble": cmd_ensemble,
    "hermitian": cmd_hermitian,
}


_RANGE_OPTIONS = ("--re", "--im", "--window", "--lengths")


def _glue_ranges(argv):
    """Let ``--im -3:0`` through argparse by rewriting it as ``--im=-3:0``."""
    out = []
    it = iter(argv)
    for tok in it:
        if tok in _RANGE_OPTIONS:
            nxt = next(it, None)
            if nxt is not None and nxt.startswith("-") and ":" in nxt:
                out.append(f"{tok}={nxt}")
                continue
            out.append(tok)
            if nxt is not None:
                out.append(nxt)
            continue
        out.append(tok)
    return out


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    args = build_parser().parse_args(_glue_ranges(argv))
    try:
        cfg = resolve_config(args)
        return COMMANDS[args.command](cfg)
    except OriginExcludedError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_POLICY
    except (GraphFormatError, InputError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (QuadratureError, RefinementError, NearZeroError, NonRealZeroError,
            np.linalg.LinAlgError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
