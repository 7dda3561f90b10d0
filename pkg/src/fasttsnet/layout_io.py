"""Layout files and SVG rendering."""

from __future__ import annotations

import csv
from xml.sax.saxutils import quoteattr

import numpy as np

from .graph import Graph


class LayoutFormatError(ValueError):
    pass


def format_layout(positions) -> str:
    X = np.asarray(positions, dtype=float)
    lines = [f"n {len(X)}"]
    lines += [f"{i} {x:.12g} {y:.12g}" for i, (x, y) in enumerate(X.tolist())]
    return "\n".join(lines) + "\n"


def parse_layout(text: str) -> np.ndarray:
    rows = [ln.split() for ln in text.splitlines() if ln.strip()]
    if not rows or len(rows[0]) != 2 or rows[0][0] != "n":
        raise LayoutFormatError("layout must start with 'n <count>'")
    try:
        n = int(rows[0][1])
    except ValueError:
        raise LayoutFormatError(f"bad vertex count {rows[0][1]!r}") from None
    body = rows[1:]
    if len(body) != n:
        raise LayoutFormatError(f"header says {n} vertices, found {len(body)} lines")
    X = np.empty((n, 2))
    for k, parts in enumerate(body):
        if len(parts) != 3 or parts[0] != str(k):
            raise LayoutFormatError(f"line {k + 2}: expected '{k} <x> <y>'")
        try:
            X[k] = float(parts[1]), float(parts[2])
        except ValueError:
            raise LayoutFormatError(f"line {k + 2}: bad coordinate") from None
    return X


def write_layout(path, positions) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_layout(positions))


def read_layout(path) -> np.ndarray:
    with open(path, encoding="utf-8") as fh:
        return parse_layout(fh.read())


def render_svg(g: Graph, positions, width: float = 800.0) -> str:
    """Edges as 0.5px lines under 2px vertex circles; the view box is the
    layout's bounding box grown by 5% on every side."""
    X = np.asarray(positions, dtype=float)
    lo = X.min(axis=0) if len(X) else np.zeros(2)
    hi = X.max(axis=0) if len(X) else np.zeros(2)
    span = hi - lo
    extent = float(span.max()) if span.max() > 0 else 1.0
    margin = 0.05 * extent
    box_w = float(span[0]) + 2 * margin
    box_h = float(span[1]) + 2 * margin
    px = box_w / width  # layout units per pixel
    height = width * box_h / box_w
    f = "{:.6g}".format
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{f(width)}" height="{f(height)}" '
        f'viewBox="{f(lo[0] - margin)} {f(lo[1] - margin)} {f(box_w)} {f(box_h)}">',
        f'<g stroke="#555" stroke-width={quoteattr(f(0.5 * px))}>',
    ]
    for u, v in g.edges().tolist():
        out.append(f'<line x1="{f(X[u, 0])}" y1="{f(X[u, 1])}" x2="{f(X[v, 0])}" y2="{f(X[v, 1])}"/>')
    out.append("</g>")
    out.append('<g fill="#1f4e9c">')
    for x, y in X.tolist():
        out.append(f'<circle cx="{f(x)}" cy="{f(y)}" r="{f(2 * px)}"/>')
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_svg(path, g: Graph, positions) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(render_svg(g, positions))


def write_trace(path, trace) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["iteration", "stage", "grad_inf_norm", "millis"])
        for row in trace:
            w.writerow([row.iteration, row.stage, repr(row.grad_inf_norm), f"{row.millis:.4f}"])
