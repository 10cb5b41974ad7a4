"""SVG plots of result records (headless)."""
from __future__ import annotations

import math
from collections import defaultdict
from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "unidym"
import matplotlib.pyplot as plt  # noqa: E402

from ..errors import PreconditionError  # noqa: E402
from .records import ResultRecord  # noqa: E402

KINDS = ("margin-histogram", "census-vs-parameter", "rho-envelope")


def _first_param(records):
    for r in records:
        for k, v in r.params.items():
            if isinstance(v, (int, float)) and not isinstance(v, bool):
                return k
    raise PreconditionError("records carry no numeric parameter to plot against")


def _margin_histogram(ax, records):
    m = [r.margin for r in records if math.isfinite(r.margin)]
    if not m:
        raise PreconditionError("no finite margins to plot")
    ax.hist(m, bins=min(50, max(5, len(m) // 10)))
    ax.axvline(0.0, color="k", lw=0.8)
    ax.set_xlabel("margin")
    ax.set_ylabel("count")


def _census(ax, records):
    key = _first_param(records)
    rows = sorted((r.params[key], r.measured.get("n_packs", math.nan), r.measured.get("exceptional", math.nan))
                  for r in records)
    a = [x[0] for x in rows]
    ax.step(a, [x[1] for x in rows], where="mid", label="packs")
    ax.step(a, [x[2] for x in rows], where="mid", label="exceptional packs")
    ax.set_xlabel(key)
    ax.set_ylabel("count")
    ax.legend()


def _rho(ax, records):
    curves = defaultdict(list)
    for r in records:
        curves[(r.params.get("kind", ""), r.params["N"])].append((r.params["x"], r.measured["envelope"]))
    for (kind, N), pts in sorted(curves.items()):
        pts.sort()
        ax.step([p[0] for p in pts], [p[1] for p in pts], where="post", label=f"{kind} N={N}")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("tail value")
    ax.set_ylabel("envelope")
    ax.legend(fontsize="small")


def plot(records: Sequence[ResultRecord], kind: str, path) -> Path:
    if kind not in KINDS:
        raise PreconditionError(f"unknown plot kind {kind!r}; known: {KINDS}")
    if not records:
        raise PreconditionError("nothing to plot: empty record list")
    fig, ax = plt.subplots(figsize=(6, 4))
    try:
        {"margin-histogram": _margin_histogram, "census-vs-parameter": _census, "rho-envelope": _rho}[kind](ax, records)
        ax.set_title(f"{records[0].experiment}: {kind}")
        fig.tight_layout()
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        # fixed metadata keeps the svg byte-stable across runs
        fig.savefig(path, format="svg", metadata={"Date": None, "Creator": "unidym"})
    finally:
        plt.close(fig)
    return path
