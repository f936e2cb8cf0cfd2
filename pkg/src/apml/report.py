"""Render benchmark result figures from the delimited output.

One figure per (distribution, functional) cell: RMSE against sample size on
log-log axes, one line per estimator, written as PNG files next to the CSV.
The experiment harness itself never imports this module; plotting is a
separate, optional reporting step.
"""

from __future__ import annotations

import csv
import math
import os
import re
from collections import defaultdict

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

__all__ = ["read_rows", "render_figures"]

_STYLE = {"apml": dict(color="tab:red", marker="o"), "mle": dict(color="tab:gray", marker="s")}


def read_rows(csv_path: str) -> list[dict]:
    with open(csv_path, newline="") as fh:
        return [dict(row) for row in csv.DictReader(fh)]


def _slug(text: str) -> str:
    return re.sub(r"[^A-Za-z0-9._-]+", "_", text).strip("_")


def render_figures(csv_path: str, out_dir: str) -> list[str]:
    """Write one RMSE-vs-n PNG per (distribution, functional); return paths."""
    os.makedirs(out_dir, exist_ok=True)
    cells: dict[tuple[str, str], dict[str, list[tuple[int, float]]]] = defaultdict(
        lambda: defaultdict(list)
    )
    for row in read_rows(csv_path):
        rmse = float(row["rmse"])
        if not math.isfinite(rmse):
            continue
        cells[(row["distribution"], row["functional"])][row["estimator"]].append(
            (int(row["n"]), rmse)
        )
    paths = []
    for (dist, functional), by_est in sorted(cells.items()):
        fig, ax = plt.subplots(figsize=(5, 3.5))
        for est, points in sorted(by_est.items()):
            points.sort()
            ns = [p[0] for p in points]
            errs = [p[1] for p in points]
            ax.plot(ns, errs, label=est.upper(), **_STYLE.get(est, {}))
        ax.set_xscale("log")
        positive = [e for pts in by_est.values() for _, e in pts if e > 0]
        if positive:
            ax.set_yscale("log")
        ax.set_xlabel("sample size n")
        ax.set_ylabel("RMSE")
        ax.set_title(f"{functional} on {dist}", fontsize=10)
        ax.legend(frameon=False)
        fig.tight_layout()
        path = os.path.join(out_dir, f"{_slug(functional)}__{_slug(dist)}.png")
        fig.savefig(path, dpi=150)
        plt.close(fig)
        paths.append(path)
    return paths
