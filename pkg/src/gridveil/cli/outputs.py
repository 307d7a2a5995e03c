"""Deterministic CSV, SVG, and manifest writers.

All numeric cells use the shortest round-trip decimal (Python ``repr``), all
files end with a single newline, and nothing time- or environment-dependent
is ever written, so byte-identical reruns are a property of the values alone.
SVG charts are self-contained (inline styling, no external references) and
embed the scenario checksum as a comment.
"""

import hashlib
import json

_PALETTE = ("#1b6ca8", "#c0392b", "#2e8b57", "#8e44ad", "#d4820a")

_W, _H = 800, 500
_ML, _MR, _MT, _MB = 70, 30, 48, 56


def fmt_value(v):
    """Shortest round-trip cell: repr for floats, plain ints, true/false."""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_csv(path, header, rows):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(fmt_value(v) for v in row))
    data = ("\n".join(lines) + "\n").encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(data)


def _ticks(lo, hi, count=5):
    if hi <= lo:
        hi = lo + 1.0
    step = (hi - lo) / (count - 1)
    return [lo + i * step for i in range(count)]


def _fmt_tick(v):
    return f"{v:g}"


def write_svg_chart(path, title, x_label, y_label, series, checksum):
    """Line chart with axes, ticks, and a labeled legend.

    ``series`` is a list of (name, xs, ys) with equal-length coordinate
    sequences; single-point series render as markers.
    """
    xs_all = [x for _, xs, _ in series for x in xs]
    ys_all = [y for _, _, ys in series for y in ys]
    x_lo, x_hi = min(xs_all), max(xs_all)
    y_lo, y_hi = min(ys_all), max(ys_all)
    if x_hi == x_lo:
        x_lo, x_hi = x_lo - 0.5, x_hi + 0.5
    if y_hi == y_lo:
        y_lo, y_hi = y_lo - 0.5, y_hi + 0.5
    pad = 0.05 * (y_hi - y_lo)
    y_lo, y_hi = y_lo - pad, y_hi + pad

    def px(x):
        return _ML + (x - x_lo) / (x_hi - x_lo) * (_W - _ML - _MR)

    def py(y):
        return _H - _MB - (y - y_lo) / (y_hi - y_lo) * (_H - _MT - _MB)

    parts = []
    parts.append(
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}">')
    parts.append(f"<!-- scenario-sha256: {checksum} -->")
    parts.append(f'<rect width="{_W}" height="{_H}" fill="white"/>')
    parts.append(
        f'<text x="{_W / 2:.1f}" y="24" text-anchor="middle" '
        f'font-family="sans-serif" font-size="16">{title}</text>')
    # axes
    parts.append(
        f'<line x1="{_ML}" y1="{_H - _MB}" x2="{_W - _MR}" y2="{_H - _MB}" '
        f'stroke="black" stroke-width="1"/>')
    parts.append(
        f'<line x1="{_ML}" y1="{_MT}" x2="{_ML}" y2="{_H - _MB}" '
        f'stroke="black" stroke-width="1"/>')
    for t in _ticks(x_lo, x_hi):
        x = px(t)
        parts.append(
            f'<line x1="{x:.3f}" y1="{_H - _MB}" x2="{x:.3f}" y2="{_H - _MB + 5}" '
            f'stroke="black" stroke-width="1"/>')
        parts.append(
            f'<text x="{x:.3f}" y="{_H - _MB + 20}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="11">{_fmt_tick(t)}</text>')
    for t in _ticks(y_lo, y_hi):
        y = py(t)
        parts.append(
            f'<line x1="{_ML - 5}" y1="{y:.3f}" x2="{_ML}" y2="{y:.3f}" '
            f'stroke="black" stroke-width="1"/>')
        parts.append(
            f'<text x="{_ML - 9}" y="{y + 4:.3f}" text-anchor="end" '
            f'font-family="sans-serif" font-size="11">{_fmt_tick(t)}</text>')
    parts.append(
        f'<text x="{(_ML + _W - _MR) / 2:.1f}" y="{_H - 14}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="13">{x_label}</text>')
    parts.append(
        f'<text x="18" y="{(_MT + _H - _MB) / 2:.1f}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="13" '
        f'transform="rotate(-90 18 {(_MT + _H - _MB) / 2:.1f})">{y_label}</text>')
    # series
    for idx, (name, xs, ys) in enumerate(series):
        color = _PALETTE[idx % len(_PALETTE)]
        pts = " ".join(f"{px(x):.3f},{py(y):.3f}" for x, y in zip(xs, ys))
        if len(xs) > 1:
            parts.append(
                f'<polyline points="{pts}" fill="none" stroke="{color}" '
                f'stroke-width="2"/>')
        for x, y in zip(xs, ys):
            parts.append(
                f'<circle cx="{px(x):.3f}" cy="{py(y):.3f}" r="3" fill="{color}"/>')
        ly = _MT + 16 + 16 * idx
        parts.append(
            f'<line x1="{_W - _MR - 150}" y1="{ly - 4}" x2="{_W - _MR - 126}" '
            f'y2="{ly - 4}" stroke="{color}" stroke-width="2"/>')
        parts.append(
            f'<text x="{_W - _MR - 120}" y="{ly}" font-family="sans-serif" '
            f'font-size="12">{name}</text>')
    parts.append("</svg>")
    data = ("\n".join(parts) + "\n").encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(data)


def sha256_of(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        h.update(fh.read())
    return h.hexdigest()


def write_manifest(path, manifest):
    data = (json.dumps(manifest, indent=2, sort_keys=True) + "\n").encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(data)
