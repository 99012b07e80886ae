"""CSV and SVG output.

CSV files start with ``#``-prefixed metadata lines (version, resolved config,
seed) followed by a plain comma-separated table. Floats are written with 17
significant digits so a file round-trips exactly.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from . import __version__


def fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def metadata_lines(meta: dict) -> list[str]:
    lines = [f"# coevo {__version__}"]
    for key, value in meta.items():
        lines.append(f"# {key} = {'' if value is None else value}")
    return lines


def write_csv(path, columns: list[str], rows, meta: dict | None = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        for line in metadata_lines(meta or {}):
            fh.write(line + "\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([fmt(v) for v in row])
    return path


def read_csv(path) -> tuple[dict[str, str], list[str], np.ndarray]:
    """Return ``(metadata, column names, float table)``; non-numeric cells become nan."""
    meta: dict[str, str] = {}
    body: list[str] = []
    with Path(path).open(encoding="utf-8") as fh:
        for line in fh:
            if line.startswith("#"):
                text = line[1:].strip()
                if " = " in text:
                    k, v = text.split(" = ", 1)
                    meta[k.strip()] = v.strip()
                continue
            body.append(line)
    reader = csv.reader(body)
    columns = next(reader)
    data = []
    for row in reader:
        vals = []
        for cell in row:
            try:
                vals.append(float(cell))
            except ValueError:
                vals.append(math.nan)
        data.append(vals)
    return meta, columns, np.array(data, dtype=float).reshape(-1, len(columns))


def write_json(path, payload: dict, meta: dict | None = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    doc = _plain({"meta": {"version": __version__, **(meta or {})}, **payload})
    path.write_text(json.dumps(doc, indent=2, allow_nan=False) + "\n", encoding="utf-8")
    return path


def _plain(obj):
    """Convert to JSON-native types; non-finite floats become null."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj) if math.isfinite(obj) else None
    if isinstance(obj, complex):
        return {"re": _plain(obj.real), "im": _plain(obj.imag)}
    if obj is None or isinstance(obj, str):
        return obj
    raise TypeError(f"cannot serialise {type(obj).__name__}")


# --- SVG -------------------------------------------------------------------

WIDTH, HEIGHT = 720, 440
MARGIN = dict(left=70, right=150, top=30, bottom=50)
COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2"]


def _ticks(lo: float, hi: float, count: int = 5) -> list[float]:
    if hi <= lo:
        return [lo]
    return list(np.linspace(lo, hi, count))


def _esc(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def svg_plot(series: list[tuple[str, np.ndarray, np.ndarray]], xlabel: str, ylabel: str,
             title: str = "") -> str:
    """Polyline plot of ``(label, xs, ys)`` series sharing one pair of axes."""
    finite = [(lab, np.asarray(x, float), np.asarray(y, float)) for lab, x, y in series]
    xs = np.concatenate([x[np.isfinite(x) & np.isfinite(y)] for _, x, y in finite])
    ys = np.concatenate([y[np.isfinite(x) & np.isfinite(y)] for _, x, y in finite])
    if xs.size == 0:
        raise ValueError("nothing finite to plot")
    x0, x1 = float(xs.min()), float(xs.max())
    y0, y1 = float(ys.min()), float(ys.max())
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y1 = y0 + 1.0
    pw = WIDTH - MARGIN["left"] - MARGIN["right"]
    ph = HEIGHT - MARGIN["top"] - MARGIN["bottom"]

    def px(v):
        return MARGIN["left"] + (v - x0) / (x1 - x0) * pw

    def py(v):
        return MARGIN["top"] + ph - (v - y0) / (y1 - y0) * ph

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
           f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
           f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>']
    left, top = MARGIN["left"], MARGIN["top"]
    out.append(f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>')
    for v in _ticks(x0, x1):
        X = px(v)
        out.append(f'<line x1="{X:.2f}" y1="{top + ph}" x2="{X:.2f}" y2="{top + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{X:.2f}" y="{top + ph + 18}" text-anchor="middle">{v:.4g}</text>')
    for v in _ticks(y0, y1):
        Y = py(v)
        out.append(f'<line x1="{left - 5}" y1="{Y:.2f}" x2="{left}" y2="{Y:.2f}" stroke="black"/>')
        out.append(f'<text x="{left - 8}" y="{Y + 4:.2f}" text-anchor="end">{v:.4g}</text>')
    out.append(f'<text x="{left + pw / 2}" y="{HEIGHT - 12}" text-anchor="middle">{_esc(xlabel)}</text>')
    out.append(f'<text x="16" y="{top + ph / 2}" text-anchor="middle" '
               f'transform="rotate(-90 16 {top + ph / 2})">{_esc(ylabel)}</text>')
    if title:
        out.append(f'<text x="{left + pw / 2}" y="18" text-anchor="middle">{_esc(title)}</text>')
    for k, (label, x, y) in enumerate(finite):
        ok = np.isfinite(x) & np.isfinite(y)
        pts = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(x[ok], y[ok]))
        color = COLORS[k % len(COLORS)]
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>')
        ly = top + 14 + 18 * k
        lx = left + pw + 12
        out.append(f'<line x1="{lx}" y1="{ly - 4}" x2="{lx + 20}" y2="{ly - 4}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{lx + 26}" y="{ly}">{_esc(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def plot_csv(csv_path, svg_path, kind: str = "line") -> Path:
    """Render a trajectory CSV: one series per column against ``t``, or ``x`` vs ``epsilon``."""
    meta, columns, data = read_csv(csv_path)
    if kind == "phase":
        xcol = "x" if "x" in columns else "xbar1"
        if xcol not in columns or "epsilon" not in columns:
            raise ValueError("phase portrait needs an x (or xbar1) and an epsilon column")
        series = [(f"{xcol} vs epsilon", data[:, columns.index(xcol)],
                   data[:, columns.index("epsilon")])]
        svg = svg_plot(series, xcol, "epsilon", title=Path(csv_path).name)
    elif kind == "line":
        if columns[0] != "t":
            raise ValueError("line plot needs a leading t column")
        t = data[:, 0]
        series = [(c, t, data[:, i]) for i, c in enumerate(columns) if i > 0]
        svg = svg_plot(series, "t", "value", title=Path(csv_path).name)
    else:
        raise ValueError(f"unknown plot kind {kind!r}")
    svg_path = Path(svg_path)
    svg_path.parent.mkdir(parents=True, exist_ok=True)
    svg_path.write_text(svg, encoding="utf-8")
    return svg_path
