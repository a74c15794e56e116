"""SVG output for covering shapes and their partitions (1 unit = 400 px)."""

from __future__ import annotations

from xml.sax.saxutils import escape

import numpy as np

SCALE = 400.0
MARGIN = 20.0

PALETTE = [
    "#8dd3c7", "#ffffb3", "#bebada", "#fb8072", "#80b1d3", "#fdb462",
    "#b3de69", "#fccde5", "#d9d9d9", "#bc80bd", "#ccebc5", "#ffed6f",
    "#a6cee3", "#b2df8a", "#fb9a99", "#fdbf6f", "#cab2d6", "#ffff99",
]


def _points(P, ox, oy) -> str:
    # y axis flipped so the picture matches the usual orientation
    return " ".join(f"{ox + SCALE * x:.3f},{oy - SCALE * y:.3f}" for x, y in P)


def _panel(host, parts, ox, oy, label=None) -> list[str]:
    out = []
    for i, P in enumerate(parts):
        out.append(f'<polygon points="{_points(P, ox, oy)}" fill="{PALETTE[i % len(PALETTE)]}" '
                   f'stroke="#333" stroke-width="1"/>')
    out.append(f'<polygon points="{_points(host, ox, oy)}" fill="none" stroke="#000" stroke-width="2"/>')
    if label:
        out.append(f'<text x="{ox:.1f}" y="{oy + SCALE * 0.62:.1f}" font-size="16" '
                   f'text-anchor="middle" font-family="sans-serif">{escape(label)}</text>')
    return out


def _document(body: list[str], width: float, height: float) -> str:
    head = (f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
            f'width="{width:.0f}" height="{height:.0f}" viewBox="0 0 {width:.0f} {height:.0f}">')
    return "\n".join([head, '<rect width="100%" height="100%" fill="white"/>', *body, "</svg>"]) + "\n"


def partition_svg(host_vertices, X, parts, title: str | None = None) -> str:
    """One partition: parts filled by index, host outlined."""
    H = np.asarray(host_vertices, dtype=float)
    lo, hi = H.min(axis=0), H.max(axis=0)
    w = SCALE * (hi[0] - lo[0]) + 2 * MARGIN
    h = SCALE * (hi[1] - lo[1]) + 2 * MARGIN + (30 if title else 0)
    ox = MARGIN - SCALE * lo[0]
    oy = MARGIN + SCALE * hi[1]
    X = np.asarray(X, dtype=float)
    body = _panel(H, [X[J] for J in parts], ox, oy)
    if title:
        body.append(f'<text x="{w / 2:.1f}" y="{h - 10:.1f}" font-size="16" text-anchor="middle" '
                    f'font-family="sans-serif">{escape(title)}</text>')
    return _document(body, w, h)


def sheet_svg(shapes, columns: int = 5) -> str:
    """Grid of named polygons ``[(name, vertices), ...]``."""
    cell = SCALE * 1.25
    rows = (len(shapes) + columns - 1) // columns
    body = []
    for n, (name, V) in enumerate(shapes):
        r, c = divmod(n, columns)
        ox = cell * (c + 0.5)
        oy = cell * (r + 0.5)
        body += _panel(np.asarray(V, dtype=float), [], ox, oy, label=name)
    return _document(body, cell * columns, cell * rows)
