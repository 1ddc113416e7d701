"""CSV ingestion and emission, plus dependency-free SVG plots."""
from __future__ import annotations

import csv
import math
from pathlib import Path
from typing import Iterable, Sequence
from xml.sax.saxutils import escape

import numpy as np

from .core import InfluenceReport
from .data import Dataset
from .errors import ACDError


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def read_table(path) -> tuple[list[str], np.ndarray]:
    """Header plus an all-numeric body. Accepts LF or CRLF line endings."""
    path = Path(path)
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise ACDError(f"cannot open {path}: {exc.strerror}", stage="read_csv") from exc
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ACDError(f"{path} is empty", stage="read_csv") from None
        header = [h.strip() for h in header]
        rows = []
        for line_no, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != len(header):
                raise ACDError(f"{path}:{line_no}: expected {len(header)} fields, got {len(row)}",
                               stage="read_csv")
            vals = []
            for col, cell in zip(header, row):
                try:
                    v = float(cell)
                except ValueError:
                    v = math.nan
                if not math.isfinite(v):
                    raise ACDError(f"{path}:{line_no}: non-numeric cell {cell.strip()!r} "
                                   f"in column {col!r}", stage="read_csv") from None
                vals.append(v)
            rows.append(vals)
    if not rows:
        raise ACDError(f"{path} has a header but no data rows", stage="read_csv")
    return header, np.array(rows, dtype=float)


def read_csv(path, response: str) -> Dataset:
    """Load a numeric CSV; ``response`` names the y column, the rest are predictors."""
    header, body = read_table(path)
    if response not in header:
        raise ACDError(f"response column {response!r} not in header", stage="read_csv")
    j = header.index(response)
    keep = [k for k in range(len(header)) if k != j]
    if not keep:
        raise ACDError("no predictor columns", stage="read_csv")
    return Dataset(body[:, keep], body[:, j], tuple(header[k] for k in keep))


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence], comment: str | None = None):
    path = Path(path)
    try:
        with open(path, "w", newline="") as fh:
            if comment:
                fh.write(f"# {comment}\n")
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow([_fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])
    except OSError as exc:
        raise ACDError(f"cannot write {path}: {exc.strerror}", stage="write") from exc
    return path


def v1_top(report: InfluenceReport, k: int = 5) -> str:
    """``index:value`` pairs for the largest |v1| entries (0 is the intercept)."""
    if report.v1 is None:
        return ""
    order = np.argsort(-np.abs(report.v1), kind="stable")[:k]
    return ",".join(f"{int(j)}:{report.v1[j]:.6g}" for j in order)


def write_report(report: InfluenceReport, prefix) -> tuple[Path, Path]:
    """``<prefix>.csv`` (1-based index) and ``<prefix>.svg`` index plot."""
    prefix = str(prefix)
    flagged = set(report.flagged)
    comment = f"threshold={_fmt(report.threshold)} rule={report.rule} v1_top={v1_top(report)}"
    rows = [(i + 1, report.D_raw[i], report.D_norm[i], int(i in flagged)) for i in range(report.n)]
    csv_path = write_csv(prefix + ".csv", ["index", "D_raw", "D_norm", "flagged"], rows, comment)
    svg_path = Path(prefix + ".svg")
    try:
        svg_path.write_text(index_plot_svg(report.D_norm, report.flagged, report.threshold))
    except OSError as exc:
        raise ACDError(f"cannot write {svg_path}: {exc.strerror}", stage="write") from exc
    return csv_path, svg_path


def read_report(path) -> dict:
    """Parse a report CSV back into arrays (used for round-trip checks)."""
    lines = Path(path).read_text().splitlines()
    meta = {}
    if lines and lines[0].startswith("#"):
        for tok in lines[0][1:].split():
            key, _, val = tok.partition("=")
            meta[key] = val
        lines = lines[1:]
    rows = list(csv.reader(lines))
    body = np.array(rows[1:], dtype=float)
    return dict(meta=meta, index=body[:, 0].astype(int), D_raw=body[:, 1], D_norm=body[:, 2],
                flagged=body[:, 3].astype(int))


# --- SVG -------------------------------------------------------------------

W, H = 720, 360
ML, MR, MT, MB = 56, 20, 24, 44


def _svg(body: list[str], title: str) -> str:
    head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" '
            f'viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="11">')
    return "\n".join([head, f"<title>{escape(title)}</title>",
                      f'<rect width="{W}" height="{H}" fill="white"/>', *body, "</svg>\n"])


def _axes(ymin: float, ymax: float, xlabel: str, ylabel: str) -> list[str]:
    x0, x1, y0, y1 = ML, W - MR, H - MB, MT
    out = [f'<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="black"/>',
           f'<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="black"/>']
    for t in np.linspace(ymin, ymax, 5):
        yy = y0 - (t - ymin) / (ymax - ymin) * (y0 - y1)
        out.append(f'<line x1="{x0 - 4}" y1="{yy:.1f}" x2="{x0}" y2="{yy:.1f}" stroke="black"/>')
        out.append(f'<text x="{x0 - 6}" y="{yy + 4:.1f}" text-anchor="end">{t:.2g}</text>')
    out.append(f'<text x="{(x0 + x1) / 2:.1f}" y="{H - 8}" text-anchor="middle">'
               f"{escape(xlabel)}</text>")
    out.append(f'<text x="14" y="{(y0 + y1) / 2:.1f}" text-anchor="middle" '
               f'transform="rotate(-90 14 {(y0 + y1) / 2:.1f})">{escape(ylabel)}</text>')
    return out


def index_plot_svg(D_norm, flagged: Iterable[int], threshold: float) -> str:
    """Normalized distance against observation index; flagged points labeled (1-based)."""
    D = np.asarray(D_norm, dtype=float)
    n = len(D)
    flagged = set(flagged)
    x0, x1, y0, y1 = ML, W - MR, H - MB, MT

    def px(i):
        return x0 + (i + 0.5) / n * (x1 - x0)

    def py(v):
        return y0 - v * (y0 - y1)

    body = _axes(0.0, 1.0, "observation", "normalized distance")
    if 0 <= threshold <= 1:
        body.append(f'<line x1="{x0}" y1="{py(threshold):.1f}" x2="{x1}" y2="{py(threshold):.1f}" '
                    f'stroke="gray" stroke-dasharray="4 3"/>')
    for i, v in enumerate(D):
        color = "crimson" if i in flagged else "steelblue"
        body.append(f'<circle cx="{px(i):.1f}" cy="{py(v):.1f}" r="2.5" fill="{color}"/>')
        if i in flagged:
            body.append(f'<text x="{px(i) + 4:.1f}" y="{py(v) - 4:.1f}" fill="crimson">{i + 1}</text>')
    return _svg(body, "influence index plot")


def box_plot_svg(groups: dict[str, Sequence[float]], ylabel: str = "value") -> str:
    """One box (quartiles, median, 1.5 IQR whiskers) per labeled group."""
    labels = list(groups)
    allv = np.concatenate([np.asarray(groups[k], dtype=float) for k in labels]) if labels else np.zeros(1)
    ymin, ymax = float(min(0.0, allv.min())), float(max(1.0, allv.max()))
    x0, x1, y0, y1 = ML, W - MR, H - MB, MT

    def py(v):
        return y0 - (v - ymin) / (ymax - ymin) * (y0 - y1)

    body = _axes(ymin, ymax, "method", ylabel)
    k = max(len(labels), 1)
    slot = (x1 - x0) / k
    for j, lab in enumerate(labels):
        v = np.asarray(groups[lab], dtype=float)
        q1, med, q3 = np.quantile(v, [0.25, 0.5, 0.75])
        iqr = q3 - q1
        lo = v[v >= q1 - 1.5 * iqr].min()
        hi = v[v <= q3 + 1.5 * iqr].max()
        cx = x0 + (j + 0.5) * slot
        half = slot * 0.25
        body += [
            f'<line x1="{cx:.1f}" y1="{py(lo):.1f}" x2="{cx:.1f}" y2="{py(hi):.1f}" stroke="black"/>',
            f'<rect x="{cx - half:.1f}" y="{py(q3):.1f}" width="{2 * half:.1f}" '
            f'height="{max(py(q1) - py(q3), 0.5):.1f}" fill="lightsteelblue" stroke="black"/>',
            f'<line x1="{cx - half:.1f}" y1="{py(med):.1f}" x2="{cx + half:.1f}" y2="{py(med):.1f}" '
            f'stroke="black" stroke-width="2"/>',
            f'<text x="{cx:.1f}" y="{y0 + 16}" text-anchor="middle">{escape(lab)}</text>',
        ]
        for o in v[(v < lo) | (v > hi)]:
            body.append(f'<circle cx="{cx:.1f}" cy="{py(o):.1f}" r="2" fill="none" stroke="black"/>')
    return _svg(body, f"{ylabel} by method")
