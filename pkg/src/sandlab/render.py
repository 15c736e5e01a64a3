"""Integer-only PPM (P6) rendering of chip configurations on embedded graphs.

Convert with any image tool, e.g. ``convert out.ppm out.png``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .graph import Digraph, GraphError

ORANGE = (255, 165, 0)
RED = (255, 0, 0)
GREEN = (0, 200, 0)
BLUE = (0, 0, 255)
WHITE = (255, 255, 255)
BLACK = (0, 0, 0)

PALETTES = {
    "grid4": {0: ORANGE, 1: RED, 2: GREEN, 3: BLUE},
    "torus2": {0: WHITE, 1: BLACK, "sink": RED},
}
BACKGROUND = WHITE


@dataclass(frozen=True)
class RenderSpec:
    palette: str = "grid4"
    cell: int = 1

    def __post_init__(self):
        if self.palette not in PALETTES:
            raise GraphError(f"unknown palette {self.palette!r}; choose from {sorted(PALETTES)}")
        if self.cell < 1:
            raise GraphError("cell size must be at least 1 pixel")


def aggregate_pixels(heights: np.ndarray, fired: np.ndarray, palette: str = "grid4") -> np.ndarray:
    """Colour fired lattice sites by final height; arrays are indexed [x, y],
    image row 0 is the largest y.  Unfired sites get the background."""
    colors = PALETTES[palette]
    H = heights.T[::-1]
    F = fired.T[::-1]
    img = np.empty(H.shape + (3,), dtype=np.uint8)
    img[...] = BACKGROUND
    for value, rgb in colors.items():
        if value != "sink":
            img[F & (H == value)] = rgb
    return img


def render_pixels(G: Digraph, sigma: Sequence[int], spec: RenderSpec = RenderSpec()) -> np.ndarray:
    """RGB array, one cell per embedded vertex.  The sink is drawn first, so a sink
    sharing a coordinate with another vertex is hidden."""
    if G.embedding is None:
        raise GraphError("rendering needs vertex coordinates")
    colors = PALETTES[spec.palette]
    xs = [p[0] for p in G.embedding]
    ys = [p[1] for p in G.embedding]
    x0, y1 = min(xs), max(ys)
    w, h = max(xs) - x0 + 1, y1 - min(ys) + 1
    img = np.empty((h, w, 3), dtype=np.uint8)
    img[...] = BACKGROUND
    order = ([G.sink] if G.sink is not None else []) + [v for v in range(G.n) if v != G.sink]
    for v in order:
        x, y = G.embedding[v]
        if v == G.sink:
            if "sink" not in colors:
                continue
            rgb = colors["sink"]
        else:
            try:
                rgb = colors[int(sigma[v])]
            except KeyError:
                raise GraphError(f"palette {spec.palette} has no colour for {sigma[v]} chips (vertex {v})") from None
        img[y1 - y, x - x0] = rgb
    return scale(img, spec.cell)


def scale(img: np.ndarray, cell: int) -> np.ndarray:
    if cell == 1:
        return img
    return np.repeat(np.repeat(img, cell, axis=0), cell, axis=1)


def encode_ppm(img: np.ndarray) -> bytes:
    h, w, _ = img.shape
    return f"P6\n{w} {h}\n255\n".encode("ascii") + np.ascontiguousarray(img, dtype=np.uint8).tobytes()


def render_ppm(G: Digraph, sigma: Sequence[int], spec: RenderSpec = RenderSpec()) -> bytes:
    return encode_ppm(render_pixels(G, sigma, spec))
