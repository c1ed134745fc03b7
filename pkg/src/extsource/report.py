"""CSV and SVG output for experiment reports."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

from .model import dump_upper_triangle

__all__ = ["Report", "format_value", "write_report", "render_svg"]


@dataclass
class Report:
    """Rows of one experiment plus a key/value summary.

    ``config_hash`` identifies the fully resolved settings in ``settings``.
    """

    experiment: str
    header: list[str]
    rows: list[tuple] = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    settings: dict = field(default_factory=dict)
    config_hash: str = ""
    svg: str | None = None
    matrix: np.ndarray | None = None

    def column(self, name: str) -> list:
        k = self.header.index(name)
        return [row[k] for row in self.rows]


def format_value(value) -> str:
    """Shortest round-trip decimal text ('.' radix)."""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        v = float(value)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return repr(v)
    if isinstance(value, (tuple, list)):
        return " ".join(format_value(v) for v in value)
    return str(value)


def _write_csv(path: Path, comment: str, header, rows):
    with path.open("w", newline="") as fh:
        fh.write(f"# {comment}\n")
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(header)
        for row in rows:
            out.writerow([format_value(v) for v in row])


def write_report(report: Report, out_dir) -> list[Path]:
    """Write ``<experiment>.csv`` and ``<experiment>_summary.csv`` into ``out_dir``.

    An SVG overlay and a matrix dump are written alongside when present.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    comment = f"extsource {report.experiment} config_sha256={report.config_hash}"
    main = out / f"{report.experiment}.csv"
    _write_csv(main, comment, report.header, report.rows)
    summary = out / f"{report.experiment}_summary.csv"
    items = [(f"setting.{k}", report.settings[k]) for k in sorted(report.settings)]
    items += list(report.summary.items())
    _write_csv(summary, comment, ["key", "value"], items)
    written = [main, summary]
    if report.svg is not None:
        path = out / f"{report.experiment}.svg"
        path.write_text(report.svg)
        written.append(path)
    if report.matrix is not None:
        path = out / f"{report.experiment}_matrix.csv"
        dump_upper_triangle(report.matrix, path)
        written.append(path)
    return written


def render_svg(series: dict, width: int = 640, height: int = 400) -> str:
    """Static SVG with one ``<polyline>`` per named ``(xs, ys)`` series.

    The ``viewBox`` spans the data extent; the y axis is flipped so larger
    values sit higher.
    """
    xs_all = np.concatenate([np.asarray(xs, float) for xs, _ in series.values()])
    ys_all = np.concatenate([np.asarray(ys, float) for _, ys in series.values()])
    x0, x1 = float(xs_all.min()), float(xs_all.max())
    y0, y1 = float(min(ys_all.min(), 0.0)), float(ys_all.max())
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y1 = y0 + 1.0
    colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"]
    span_x, span_y = x1 - x0, y1 - y0
    stroke = 0.003 * max(span_x, span_y)
    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="{x0!r} {-y1!r} {span_x!r} {span_y!r}" preserveAspectRatio="none">',
    ]
    for k, (name, (xs, ys)) in enumerate(series.items()):
        pts = " ".join(f"{float(x)!r},{-float(y)!r}" for x, y in zip(xs, ys))
        parts.append(
            f'<polyline fill="none" stroke="{colors[k % len(colors)]}" '
            f'stroke-width="{stroke!r}" vector-effect="non-scaling-stroke" '
            f'points="{pts}"><title>{escape(name)}</title></polyline>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
