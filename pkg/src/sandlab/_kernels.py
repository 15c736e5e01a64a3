"""Compiled inner loops for large stabilizations.

Counters are int64.  Kernels report overflow through a status code instead
of wrapping; callers turn that into OverflowError.
"""

from __future__ import annotations

import numpy as np
from numba import njit

OK = 0
CAP_EXHAUSTED = 1
OVERFLOW = 2

# Odometer entries above this could overflow once multiplied by a degree.
ODOMETER_LIMIT = np.int64(1) << np.int64(56)


@njit(cache=True)
def stabilize_csr(counts, indptr, heads, sink, step_cap, odo):
    """FIFO stabilization with bulk firing on a CSR multigraph.

    ``heads[indptr[v]:indptr[v+1]]`` are the heads of v's out-edges.  Vertex
    ``sink`` (or -1) swallows chips.  ``step_cap < 0`` means unbounded.
    Returns (status, firings).
    """
    n = counts.shape[0]
    queue = np.empty(n, dtype=np.int64)
    queued = np.zeros(n, dtype=np.bool_)
    head = 0
    size = 0
    for v in range(n):
        d = indptr[v + 1] - indptr[v]
        if d > 0 and counts[v] >= d:
            queue[(head + size) % n] = v
            size += 1
            queued[v] = True
    firings = np.int64(0)
    while size > 0:
        v = queue[head]
        head = (head + 1) % n
        size -= 1
        queued[v] = False
        d = indptr[v + 1] - indptr[v]
        q = counts[v] // d
        if q == 0:
            continue
        if step_cap >= 0 and firings + q > step_cap:
            q = step_cap - firings
            if q <= 0:
                return CAP_EXHAUSTED, firings
        if odo[v] > ODOMETER_LIMIT - q:
            return OVERFLOW, firings
        odo[v] += q
        firings += q
        counts[v] -= q * d
        for k in range(indptr[v], indptr[v + 1]):
            w = heads[k]
            if w == sink:
                continue
            counts[w] += q
            dw = indptr[w + 1] - indptr[w]
            if dw > 0 and not queued[w] and counts[w] >= dw:
                queue[(head + size) % n] = w
                size += 1
                queued[w] = True
        if counts[v] >= d and not queued[v]:
            queue[(head + size) % n] = v
            size += 1
            queued[v] = True
        if step_cap >= 0 and firings >= step_cap and size > 0:
            return CAP_EXHAUSTED, firings
    return OK, firings


@njit(cache=True)
def aggregate_quadrant(grid, odo):
    """Stabilize a pile that is symmetric under both axis reflections.

    ``grid[x, y]`` for x, y >= 0 stands for all four mirror images of the
    site; firing it fires the whole orbit, so chips crossing into x = 0 from
    x = 1 arrive twice and chips leaving x = 0 towards x = -1 belong to the
    mirror.  The last row and column absorb chips.  Raster sweeps repeat
    until nothing fires.  Returns (status, border_fired).
    """
    m = grid.shape[0] - 1
    hi = 0
    for x in range(m):
        for y in range(m):
            if grid[x, y] >= 4 and max(x, y) > hi:
                hi = max(x, y)
    border = False
    while True:
        busy = False
        nhi = 0
        top = min(hi + 1, m - 1)
        for x in range(top + 1):
            for y in range(top + 1):
                h = grid[x, y]
                if h < 4:
                    continue
                q = h >> 2
                if odo[x, y] > ODOMETER_LIMIT - q:
                    return OVERFLOW, border
                grid[x, y] = h - (q << 2)
                odo[x, y] += q
                busy = True
                if x > nhi:
                    nhi = x
                if y > nhi:
                    nhi = y
                grid[x + 1, y] += q
                grid[x, y + 1] += q
                if x >= 1:
                    grid[x - 1, y] += 2 * q if x == 1 else q
                if y >= 1:
                    grid[x, y - 1] += 2 * q if y == 1 else q
        if not busy:
            return OK, border
        hi = nhi
        if hi >= m - 1:
            border = True


@njit(cache=True)
def stabilize_lattice(grid, member, odo):
    """Raster sweeps over a square-lattice graph wired to a sink.

    ``grid`` carries a one-cell ring; only cells with ``member`` set fire,
    everything else (ring, holes) absorbs chips.  Each member topples at 4.
    Returns (status, firings).
    """
    m0, m1 = grid.shape
    firings = np.int64(0)
    while True:
        busy = False
        for x in range(1, m0 - 1):
            for y in range(1, m1 - 1):
                h = grid[x, y]
                if h < 4 or not member[x, y]:
                    continue
                q = h >> 2
                if odo[x, y] > ODOMETER_LIMIT - q:
                    return OVERFLOW, firings
                grid[x, y] = h - (q << 2)
                odo[x, y] += q
                firings += q
                grid[x + 1, y] += q
                grid[x - 1, y] += q
                grid[x, y + 1] += q
                grid[x, y - 1] += q
                busy = True
        if not busy:
            return OK, firings
