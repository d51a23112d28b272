"""CSV and SVG writers for histograms, tracelines and sweep tables."""
from __future__ import annotations

import csv
import io
from pathlib import Path

import numpy as np

from .metrics import JointHistogram


def histogram_csv(hist: JointHistogram) -> str:
    """Long format: one line per bin pair with its reference/prediction bin ranges."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["ref_lo", "ref_hi", "pred_lo", "pred_hi", "count"])
    e = hist.edges
    for i in range(hist.bins):
        for j in range(hist.bins):
            w.writerow([f"{e[i]:.6g}", f"{e[i + 1]:.6g}", f"{e[j]:.6g}", f"{e[j + 1]:.6g}",
                        int(hist.counts[i, j])])
    return buf.getvalue()


def _ramp(t: float) -> str:
    # white -> dark blue
    r = int(round(255 * (1 - t) + 8 * t))
    g = int(round(255 * (1 - t) + 48 * t))
    b = int(round(255 * (1 - t) + 107 * t))
    return f"#{r:02x}{g:02x}{b:02x}"


def histogram_svg(hist: JointHistogram, title: str = "", size: int = 400) -> str:
    """Log-scaled heatmap, reference on x and prediction on y, with the bisector drawn."""
    margin = 50
    n = hist.bins
    cell = size / n
    lo, hi = hist.value_range
    counts = hist.counts
    scale = np.log1p(counts.max()) if counts.max() > 0 else 1.0
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size + 2 * margin}" '
        f'height="{size + 2 * margin}" font-family="sans-serif" font-size="12">',
        f'<rect x="{margin}" y="{margin}" width="{size}" height="{size}" fill="#ffffff" stroke="#000000"/>',
    ]
    for i, j in zip(*np.nonzero(counts)):
        x = margin + i * cell
        y = margin + size - (j + 1) * cell
        color = _ramp(float(np.log1p(counts[i, j]) / scale))
        out.append(f'<rect x="{x:.3f}" y="{y:.3f}" width="{cell:.3f}" height="{cell:.3f}" fill="{color}"/>')
    out.append(f'<line x1="{margin}" y1="{margin + size}" x2="{margin + size}" y2="{margin}" '
               'stroke="#d62728" stroke-width="1.5" stroke-dasharray="6,4"/>')
    for k in range(5):
        v = lo + (hi - lo) * k / 4
        p = size * k / 4
        out.append(f'<text x="{margin + p:.1f}" y="{margin + size + 16}" text-anchor="middle">{v:g}</text>')
        out.append(f'<text x="{margin - 6}" y="{margin + size - p + 4:.1f}" text-anchor="end">{v:g}</text>')
    out.append(f'<text x="{margin + size / 2}" y="{margin + size + 36}" text-anchor="middle">reference [m]</text>')
    out.append(f'<text x="14" y="{margin + size / 2}" text-anchor="middle" '
               f'transform="rotate(-90 14 {margin + size / 2})">prediction [m]</text>')
    if title:
        out.append(f'<text x="{margin + size / 2}" y="{margin - 16}" text-anchor="middle">{_escape(title)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _escape(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def traceline_csv(reference, predictions: dict) -> str:
    """Columns ``column, reference, <model>...``; all profiles must have equal length."""
    reference = np.asarray(reference, dtype=np.float64)
    names = list(predictions)
    profiles = [np.asarray(predictions[k], dtype=np.float64) for k in names]
    for name, p in zip(names, profiles):
        if p.shape != reference.shape:
            raise ValueError(f"profile {name!r} has {p.size} values, reference has {reference.size}")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["column", "reference"] + names)
    for c in range(reference.size):
        w.writerow([c, f"{reference[c]:.6g}"] + [f"{p[c]:.6g}" for p in profiles])
    return buf.getvalue()


def write_text(path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    return path
