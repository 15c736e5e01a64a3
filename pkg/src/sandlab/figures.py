"""Regenerate the identity, aggregation and superstabilization images.

Default sizes run in a few minutes; ``large=True`` adds the big grids.
Each figure is written as PPM and logged with wall-clock time and the total
number of firings.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

from .aggregate import aggregate
from .graph import Digraph, directed_torus, disk_wired, grid_wired
from .render import RenderSpec, aggregate_pixels, encode_ppm, render_ppm, scale
from .sandpile import Config, stabilize, sub, superstabilize, unit


@dataclass(frozen=True)
class FigureRecord:
    name: str
    path: Path
    seconds: float
    firings: int


def identity_with_firings(G: Digraph) -> tuple[Config, int]:
    """Identity computed as in ``sandpile.identity`` but also counting firings."""
    s = tuple(0 if v == G.sink else 2 * d - 2 for v, d in enumerate(G.outdeg))
    s1, odo1 = stabilize(G, s)
    ident, odo2 = stabilize(G, sub(s, s1))
    return ident, odo1.total_firings + odo2.total_firings


def _identity_figure(G: Digraph, palette: str, cell: int):
    def run(path: Path) -> int:
        ident, firings = identity_with_firings(G)
        path.write_bytes(render_ppm(G, ident, RenderSpec(palette, cell)))
        return firings

    return run


def _aggregate_figure(n: int, H: int, cell: int):
    def run(path: Path) -> int:
        res = aggregate(n, H)
        path.write_bytes(encode_ppm(scale(aggregate_pixels(res.heights, res.fired), cell)))
        return res.total_firings

    return run


def _superstable_figure(n: int, L: int, cell: int):
    def run(path: Path) -> int:
        G = grid_wired(L)
        c = (L // 2) * L + L // 2
        sigma = unit(G, c, n)
        ident, firings = identity_with_firings(G)
        G._memo["identity"] = ident
        star = superstabilize(G, sigma)
        path.write_bytes(render_ppm(G, star, RenderSpec("grid4", cell)))
        return firings

    return run


def figure_plan(large: bool = False) -> dict[str, Callable[[Path], int]]:
    plan: dict[str, Callable[[Path], int]] = {}
    for L in (128, 198, 243, 521) if large else (128,):
        plan[f"square-ident-{L}"] = _identity_figure(grid_wired(L), "grid4", 1)
    for L in (100, 500) if large else (100,):
        plan[f"torus-ident-{L}"] = _identity_figure(directed_torus(L), "torus2", 1)
    for d in (100, 512, 521) if large else (100,):
        plan[f"disk-ident-{d}"] = _identity_figure(disk_wired(d), "grid4", 1)
    plan["stable-100000"] = _aggregate_figure(100_000, 0, 1)
    plan["superstable-100000" if large else "superstable-10000"] = (
        _superstable_figure(100_000, 401, 1) if large else _superstable_figure(10_000, 151, 1)
    )
    for H in (-2, -1, 0):
        plan[f"polygon-H{H}"] = _aggregate_figure(250_000, H, 1)
    return plan


def reproduce_figures(outdir: str | Path, large: bool = False, only: list[str] | None = None, log=None) -> list[FigureRecord]:
    """Write every figure into ``outdir`` plus a tab-separated ``bench.log``."""
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    records = []
    for name, run in figure_plan(large).items():
        if only and name not in only:
            continue
        path = out / f"{name}.ppm"
        t0 = time.perf_counter()
        firings = run(path)
        rec = FigureRecord(name, path, time.perf_counter() - t0, firings)
        records.append(rec)
        if log:
            log(f"{name}\t{rec.seconds:.2f}s\t{firings} firings")
    with open(out / "bench.log", "a") as fh:
        for r in records:
            fh.write(f"{r.name}\t{r.seconds:.3f}\t{r.firings}\n")
    return records
