"""Chip aggregation from a single source on the square lattice Z^2.

Every site starts with background height ``h = -H`` (H > 0 digs a hole of
depth H, H < 0 pre-loads -H chips).  Sites topple at 4 chips.  ``n`` chips
are placed at the origin and the lattice is stabilized inside a finite
window that doubles whenever a border site fires.

The pile is symmetric under both axis reflections, so only the quadrant
x, y >= 0 is simulated; full arrays are rebuilt by mirroring.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels

DEFAULT_WINDOW_CAP = 1 << 13


class WindowOverflowError(RuntimeError):
    pass


@dataclass(frozen=True)
class AggregateResult:
    n: int
    H: int
    heights: np.ndarray  # final heights, indexed [x + c, y + c]
    odometer: np.ndarray
    center: int

    @property
    def fired(self) -> np.ndarray:
        return self.odometer > 0

    @property
    def fired_count(self) -> int:
        return int(self.fired.sum())

    @property
    def total_firings(self) -> int:
        return int(self.odometer.sum())

    def fired_sites(self) -> set[tuple[int, int]]:
        c = self.center
        return {(int(x) - c, int(y) - c) for x, y in np.argwhere(self.fired)}

    def bounding_box(self) -> tuple[int, int, int, int] | None:
        """(xmin, xmax, ymin, ymax) of the fired set, origin-relative."""
        pts = np.argwhere(self.fired)
        if len(pts) == 0:
            return None
        c = self.center
        (x0, y0), (x1, y1) = pts.min(axis=0) - c, pts.max(axis=0) - c
        return int(x0), int(x1), int(y0), int(y1)


def _initial_side(n: int, H: int) -> int:
    # area of the fired set is roughly n / (2d - 1 + H) when that is positive
    per_site = max(3 + H, 1)
    return 2 * int(math.isqrt(n // per_site + 1)) + 9


def _unfold(q: np.ndarray) -> np.ndarray:
    """Quadrant [x, y >= 0] to the full symmetric square."""
    top = np.concatenate([q[:0:-1, :0:-1], q[:0:-1, :]], axis=1)
    bottom = np.concatenate([q[:, :0:-1], q], axis=1)
    return np.ascontiguousarray(np.concatenate([top, bottom], axis=0))


def aggregate(n: int, H: int, window: int | None = None, cap: int = DEFAULT_WINDOW_CAP) -> AggregateResult:
    """Stabilize n chips at the origin on top of background -H.

    ``window`` is the starting side length (odd); it doubles until no border
    site fires, up to ``cap``.
    """
    if n < 0:
        raise ValueError("chip count must be nonnegative")
    if -H >= 4:
        raise ValueError("background must be below the toppling threshold (need H > -4)")
    side = window if window is not None else _initial_side(n, H)
    side |= 1
    while True:
        if side > cap:
            raise WindowOverflowError(f"fired set reaches the border of a {side // 2}-window; raise the cap above {cap}")
        c = side // 2
        grid = np.full((c + 2, c + 2), -H, dtype=np.int64)
        grid[0, 0] += n
        odo = np.zeros_like(grid)
        status, border = _kernels.aggregate_quadrant(grid, odo)
        if status == _kernels.OVERFLOW:
            raise OverflowError("odometer exceeded the 64-bit safety limit")
        if not border:
            return AggregateResult(n, H, _unfold(grid[:-1, :-1]), _unfold(odo[:-1, :-1]), c)
        side = 2 * side + 1


def is_centered_square(res: AggregateResult) -> bool:
    """Fired set equals {|x| <= r, |y| <= r} for some r >= 0 (empty also counts)."""
    box = res.bounding_box()
    if box is None:
        return True
    x0, x1, y0, y1 = box
    r = x1
    if not (x0 == -r and y0 == -r and y1 == r):
        return False
    return res.fired_count == (2 * r + 1) ** 2


def inner_ball_radius(n: int, H: int, c2: float = 10.0, d: int = 2) -> float:
    """c1 * r - c2 with r = (n / omega_d)^(1/d) and c1 = (2d - 1 + H)^(-1/d)."""
    omega = math.pi ** (d / 2) / math.gamma(d / 2 + 1)
    r = (n / omega) ** (1 / d)
    c1 = (2 * d - 1 + H) ** (-1 / d)
    return c1 * r - c2


def contains_ball(res: AggregateResult, radius: float) -> bool:
    """Every lattice point with |x| < radius fired."""
    if radius <= 0:
        return True
    c = res.center
    k = math.ceil(radius)
    if k > c:
        return False
    xs = np.arange(-k, k + 1)
    X, Y = np.meshgrid(xs, xs, indexing="ij")
    inside = X * X + Y * Y < radius * radius
    return bool(res.fired[c - k:c + k + 1, c - k:c + k + 1][inside].all())
