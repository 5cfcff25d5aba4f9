"""Render simulator CSV outputs into publication-style figures.

Four figure kinds are supported, all reading the documented CSV schemas
(comment lines start with '#', first data row is the header):

* ``log_distribution`` - a 1-D count distribution on a log-scale y axis
  with error bars; an optional overlay file (e.g. binned measured data)
  is drawn dashed.
* ``heatmap2d``        - a 2-D grouped distribution as a log-color map.
* ``zscore_bars``      - normalized deviations per bin from a comparison
  file; excluded bins are greyed out.
* ``witness_curve``    - collective variance product and sum against the
  mode count, with their certification thresholds.

Rendering never recomputes statistics: every number comes from the input
columns.  Output is deterministic: identical inputs give byte-identical
image files.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

KINDS = ("log_distribution", "heatmap2d", "zscore_bars", "witness_curve")


class SchemaError(ValueError):
    """An input file does not match the documented CSV schema."""


@dataclass(frozen=True)
class FigureSpec:
    kind: str
    input_path: str
    output_path: str
    overlay_path: str | None = None
    title: str | None = None
    x_label: str | None = None
    y_label: str | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown figure kind {self.kind!r}; "
                             f"choose one of {KINDS}")


def read_table(path) -> dict[str, np.ndarray]:
    """Parse a simulator CSV into named float columns."""
    path = Path(path)
    if not path.exists():
        raise SchemaError(f"{path}: file does not exist")
    with path.open("r", encoding="utf-8", newline="") as fh:
        rows = [row for row in csv.reader(fh)
                if row and not row[0].startswith("#")]
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    header, data = rows[0], rows[1:]
    columns: dict[str, np.ndarray] = {}
    for j, name in enumerate(header):
        try:
            columns[name] = np.array([float(row[j]) for row in data])
        except (ValueError, IndexError):
            raise SchemaError(f"{path}: column {name!r} is not numeric "
                              "in every row") from None
    return columns


def _need(columns, path, *names):
    for name in names:
        if name not in columns:
            raise SchemaError(f"{path}: missing column {name!r}")


def _new_axes():
    fig, ax = plt.subplots(figsize=(6.0, 4.0), dpi=150)
    return fig, ax


def _finish(fig, ax, spec: FigureSpec, default_x: str, default_y: str):
    ax.set_xlabel(spec.x_label or default_x)
    ax.set_ylabel(spec.y_label or default_y)
    if spec.title:
        ax.set_title(spec.title)
    fig.tight_layout()
    out = Path(spec.output_path)
    out.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out, metadata=_clean_metadata(out.suffix))
    plt.close(fig)
    return out


def _clean_metadata(suffix: str):
    # strip creation timestamps so renders are byte-stable
    if suffix == ".svg":
        return {"Date": None}
    if suffix == ".pdf":
        return {"CreationDate": None}
    return {}


def _log_distribution(spec: FigureSpec):
    cols = read_table(spec.input_path)
    _need(cols, spec.input_path, "m_1", "probability", "std_error")
    if "m_2" in cols:
        raise SchemaError(f"{spec.input_path}: log_distribution needs a "
                          "1-D distribution (found column 'm_2')")
    fig, ax = _new_axes()
    mask = cols["probability"] > 0
    ax.errorbar(cols["m_1"][mask], cols["probability"][mask],
                yerr=cols["std_error"][mask], fmt="o-", ms=3, lw=1,
                capsize=2, label="simulation")
    if spec.overlay_path:
        over = read_table(spec.overlay_path)
        _need(over, spec.overlay_path, "m_1", "probability")
        omask = over["probability"] > 0
        ax.plot(over["m_1"][omask], over["probability"][omask], "--",
                lw=1.2, label="reference")
        ax.legend()
    ax.set_yscale("log")
    return _finish(fig, ax, spec, "total clicks m", "probability")


def _heatmap2d(spec: FigureSpec):
    cols = read_table(spec.input_path)
    _need(cols, spec.input_path, "m_1", "m_2", "probability")
    if "m_3" in cols:
        raise SchemaError(f"{spec.input_path}: heatmap2d needs exactly two "
                          "count axes (found column 'm_3')")
    m1 = cols["m_1"].astype(int)
    m2 = cols["m_2"].astype(int)
    grid = np.full((m1.max() + 1, m2.max() + 1), np.nan)
    grid[m1, m2] = cols["probability"]
    floor = 1e-12
    fig, ax = _new_axes()
    image = ax.imshow(np.log10(np.clip(grid.T, floor, None)),
                      origin="lower", aspect="auto", cmap="viridis")
    fig.colorbar(image, ax=ax, label="log10 probability")
    return _finish(fig, ax, spec, "group 1 clicks", "group 2 clicks")


def _zscore_bars(spec: FigureSpec):
    cols = read_table(spec.input_path)
    _need(cols, spec.input_path, "z", "included")
    index = np.arange(cols["z"].size)
    included = cols["included"] > 0.5
    z = cols["z"]
    fig, ax = _new_axes()
    ax.bar(index[included], z[included], color="#2c6fbb",
           label="included bins")
    if (~included).any():
        finite = (~included) & np.isfinite(z)
        ax.bar(index[finite], z[finite], color="#bbbbbb", label="excluded")
    ax.axhline(0.0, color="black", lw=0.8)
    for level in (-1, 1):
        ax.axhline(level, color="black", lw=0.6, ls=":")
    ax.legend()
    return _finish(fig, ax, spec, "bin index", "normalized deviation z")


def _witness_curve(spec: FigureSpec):
    cols = read_table(spec.input_path)
    _need(cols, spec.input_path, "mode_count", "product", "product_err",
          "variance_sum", "variance_sum_err", "threshold_product",
          "threshold_sum")
    order = np.argsort(cols["mode_count"])
    M = cols["mode_count"][order]
    fig, ax = _new_axes()
    ax.errorbar(M, cols["product"][order], yerr=cols["product_err"][order],
                fmt="o-", ms=3, lw=1, capsize=2, label="variance product")
    ax.errorbar(M, cols["variance_sum"][order],
                yerr=cols["variance_sum_err"][order],
                fmt="s-", ms=3, lw=1, capsize=2, label="variance sum")
    ax.plot(M, cols["threshold_product"][order], "--", lw=1,
            label="product threshold 2/(M-1)")
    ax.plot(M, cols["threshold_sum"][order], ":", lw=1,
            label="sum threshold 4/(M-1)")
    ax.set_yscale("log")
    ax.legend(fontsize=8)
    return _finish(fig, ax, spec, "entangled modes M", "collective variance")


_RENDERERS = {
    "log_distribution": _log_distribution,
    "heatmap2d": _heatmap2d,
    "zscore_bars": _zscore_bars,
    "witness_curve": _witness_curve,
}


def render(spec: FigureSpec) -> Path:
    """Render one figure; returns the written image path."""
    return _RENDERERS[spec.kind](spec)
