"""Chip configurations, stabilization and the sandpile group.

A configuration is a tuple of nonnegative ints with one entry per vertex of
the graph; the sink entry is always 0.  Firing subtracts a row of the reduced
Laplacian, so equivalence classes are cosets of its integer row span.
"""

from __future__ import annotations

import itertools
import random
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from . import _kernels
from .graph import Digraph, GraphError, reduced_laplacian
from .intalg import (
    GroupStructure,
    SingularMatrixError,
    determinant,
    max_resistance,
    smith_normal_form,
    solve_rational,
)

Config = tuple[int, ...]

POLICIES = ("bulk", "fifo", "lifo", "random")
SUPERSTABLE_BRUTE_FORCE_LIMIT = 16
# below this size the compiled kernel's call overhead outweighs its speed
COMPILED_MIN_VERTICES = 200
_INT64_SAFE = 1 << 62


class Nonterminating(RuntimeError):
    """Firing did not stop within the step cap."""

    def __init__(self, step_cap: int):
        super().__init__(f"configuration did not stabilize within {step_cap} firings")
        self.step_cap = step_cap


class NotRecurrentError(ValueError):
    pass


@dataclass(frozen=True)
class Odometer:
    counts: tuple[int, ...]
    outdeg: tuple[int, ...]

    @property
    def total_chip_moves(self) -> int:
        return sum(c * d for c, d in zip(self.counts, self.outdeg))

    @property
    def total_firings(self) -> int:
        return sum(self.counts)


# --- configuration helpers ------------------------------------------------------


def as_config(G: Digraph, sigma: Iterable[int], signed: bool = False) -> Config:
    cfg = tuple(int(x) for x in sigma)
    if len(cfg) != G.n:
        raise ValueError(f"configuration has {len(cfg)} entries, graph has {G.n} vertices")
    if not signed and any(x < 0 for x in cfg):
        raise ValueError("chip counts must be nonnegative")
    if G.sink is not None and cfg[G.sink] != 0:
        raise ValueError("the sink entry must be 0")
    return cfg


def add(a: Sequence[int], b: Sequence[int]) -> Config:
    return tuple(x + y for x, y in zip(a, b))


def sub(a: Sequence[int], b: Sequence[int]) -> Config:
    return tuple(x - y for x, y in zip(a, b))


def zero(G: Digraph) -> Config:
    return (0,) * G.n


def unit(G: Digraph, v: int, k: int = 1) -> Config:
    cfg = [0] * G.n
    cfg[v] = k
    return tuple(cfg)


def _on_non_sink(G: Digraph, values) -> Config:
    return tuple(values[v] if G.outdeg[v] > 0 else 0 for v in range(G.n))


def is_stable(G: Digraph, sigma: Sequence[int]) -> bool:
    return all(sigma[v] < G.outdeg[v] for v in G.non_sink)


def _require_global_sink(G: Digraph) -> int:
    if not G.classification.has_global_sink or G.sink is None:
        raise GraphError("operation needs a graph with a global sink")
    return G.sink


def delta(G: Digraph) -> Config:
    """delta(v) = outdeg(v)."""
    return G.outdeg


def ones(G: Digraph) -> Config:
    return _on_non_sink(G, [1] * G.n)


def burning_config(G: Digraph) -> Config:
    """beta(v) = outdeg(v) - indeg(v) on non-sink vertices."""
    beta = _on_non_sink(G, [G.outdeg[v] - G.indeg[v] for v in range(G.n)])
    if any(x < 0 for x in beta):
        raise GraphError("outdeg - indeg is negative somewhere; the graph is not Eulerian with sink")
    return beta


def epsilon(G: Digraph) -> Config:
    """(2 delta) - (2 delta)°, an everywhere-positive configuration equivalent to 0."""
    if "epsilon" not in G._memo:
        two = tuple(2 * d for d in G.outdeg)
        G._memo["epsilon"] = sub(two, stabilize(G, two)[0])
    return G._memo["epsilon"]


def canonical_configs(G: Digraph) -> dict[str, Config]:
    out = {"delta": delta(G), "ones": ones(G)}
    if G.classification.eulerian_with_sink:
        out["beta"] = burning_config(G)
    if G.classification.has_global_sink:
        out["epsilon"] = epsilon(G)
    return out


# --- firing and stabilization ---------------------------------------------------


def fire(G: Digraph, sigma: Sequence[int], v: int, times: int = 1) -> Config:
    """Fire active vertex ``v``; chips sent to the sink disappear."""
    d = G.outdeg[v]
    if d == 0 or sigma[v] < d * times:
        raise ValueError(f"vertex {v} is not active")
    out = list(sigma)
    out[v] -= d * times
    for w in G.out_heads[v]:
        if w != G.sink:
            out[w] += times
    return tuple(out)


def _csr(G: Digraph):
    if "csr" not in G._memo:
        indptr = np.zeros(G.n + 1, dtype=np.int64)
        indptr[1:] = np.cumsum(G.outdeg)
        heads = np.fromiter((h for hs in G.out_heads for h in hs), dtype=np.int64, count=G.num_edges)
        G._memo["csr"] = (indptr, heads)
    return G._memo["csr"]


def _lattice_layout(G: Digraph):
    """(xs, ys, shape) when G is lattice points wired to a sink with E, S, W, N
    out-edges (grid_wired, disk_wired); otherwise None."""
    if "lattice" in G._memo:
        return G._memo["lattice"]
    layout = None
    if G.embedding is not None and G.sink is not None:
        pts = G.embedding
        idx = {p: v for v, p in enumerate(pts) if v != G.sink}
        ok = len(idx) == G.n - 1
        for v in G.non_sink if ok else ():
            x, y = pts[v]
            want = [idx.get((x + 1, y), G.sink), idx.get((x, y - 1), G.sink),
                    idx.get((x - 1, y), G.sink), idx.get((x, y + 1), G.sink)]
            if list(G.out_heads[v]) != want:
                ok = False
                break
        if ok and G.n > 1:
            xs = np.array([pts[v][0] for v in G.non_sink], dtype=np.int64)
            ys = np.array([pts[v][1] for v in G.non_sink], dtype=np.int64)
            xs = xs - xs.min() + 1
            ys = ys - ys.min() + 1
            layout = (xs, ys, (int(xs.max()) + 2, int(ys.max()) + 2))
    G._memo["lattice"] = layout
    return layout


def _stabilize_lattice(G: Digraph, sigma: Sequence[int], layout):
    xs, ys, shape = layout
    verts = np.array(G.non_sink, dtype=np.int64)
    grid = np.zeros(shape, dtype=np.int64)
    member = np.zeros(shape, dtype=np.bool_)
    member[xs, ys] = True
    grid[xs, ys] = np.asarray(sigma, dtype=np.int64)[verts]
    odo2 = np.zeros(shape, dtype=np.int64)
    status, _ = _kernels.stabilize_lattice(grid, member, odo2)
    if status == _kernels.OVERFLOW:
        raise OverflowError("odometer exceeded the 64-bit counter range")
    counts = np.zeros(G.n, dtype=np.int64)
    odo = np.zeros(G.n, dtype=np.int64)
    counts[verts] = grid[xs, ys]
    odo[verts] = odo2[xs, ys]
    return tuple(counts.tolist()), tuple(odo.tolist())


def _stabilize_bulk(G: Digraph, sigma: Sequence[int], step_cap: int | None):
    if sum(sigma) >= _INT64_SAFE:
        raise OverflowError("total chip count exceeds the 64-bit counter range")
    if G.n < COMPILED_MIN_VERTICES:
        return _stabilize_python(G, sigma, "bulk", step_cap, None)
    if step_cap is None:
        layout = _lattice_layout(G)
        if layout is not None:
            return _stabilize_lattice(G, sigma, layout)
    counts = np.asarray(sigma, dtype=np.int64).copy()
    odo = np.zeros(G.n, dtype=np.int64)
    indptr, heads = _csr(G)
    sink = -1 if G.sink is None else G.sink
    status, _ = _kernels.stabilize_csr(counts, indptr, heads, sink, -1 if step_cap is None else step_cap, odo)
    if status == _kernels.CAP_EXHAUSTED:
        raise Nonterminating(step_cap)
    if status == _kernels.OVERFLOW:
        raise OverflowError("odometer exceeded the 64-bit counter range")
    return tuple(counts.tolist()), tuple(odo.tolist())


def _stabilize_python(G: Digraph, sigma: Sequence[int], policy: str, step_cap: int | None, rng):
    counts = list(sigma)
    odo = [0] * G.n
    deg = G.outdeg
    heads = G.out_heads
    sink = G.sink
    active = [v for v in G.non_sink if counts[v] >= deg[v]]
    pending = deque(active)
    queued = set(active)
    steps = 0
    while pending:
        if policy in ("fifo", "bulk"):
            v = pending.popleft()
        elif policy == "lifo":
            v = pending.pop()
        else:
            i = rng.randrange(len(pending))
            pending[i], pending[-1] = pending[-1], pending[i]
            v = pending.pop()
        queued.discard(v)
        if counts[v] < deg[v]:
            continue
        q = counts[v] // deg[v] if policy == "bulk" else 1
        if step_cap is not None:
            if steps >= step_cap:
                raise Nonterminating(step_cap)
            q = min(q, step_cap - steps)
        steps += q
        odo[v] += q
        counts[v] -= q * deg[v]
        for w in heads[v]:
            if w != sink:
                counts[w] += q
                if w not in queued and counts[w] >= deg[w] > 0:
                    queued.add(w)
                    pending.append(w)
        if counts[v] >= deg[v] and v not in queued:
            queued.add(v)
            pending.append(v)
    return tuple(counts), tuple(odo)


def stabilize(
    G: Digraph,
    sigma: Sequence[int],
    policy: str = "bulk",
    step_cap: int | None = None,
    seed: int | None = None,
) -> tuple[Config, Odometer]:
    """Fire active vertices until stable; returns (sigma°, odometer).

    ``bulk`` fires each visited vertex floor(sigma(v)/d_v) times at once in a
    compiled FIFO loop; ``fifo``, ``lifo`` and ``random`` fire one vertex at a
    time.  Graphs without a global sink need ``step_cap`` (counted in single
    firings), and Nonterminating is raised when it runs out.
    """
    if policy not in POLICIES:
        raise ValueError(f"unknown policy {policy!r}; choose from {POLICIES}")
    if step_cap is None and not G.classification.has_global_sink:
        raise GraphError("graph has no global sink; pass step_cap to bound the run")
    sigma = as_config(G, sigma)
    if policy == "bulk":
        final, odo = _stabilize_bulk(G, sigma, step_cap)
    else:
        final, odo = _stabilize_python(G, sigma, policy, step_cap, random.Random(seed))
    return final, Odometer(odo, G.outdeg)


def stab(G: Digraph, sigma: Sequence[int]) -> Config:
    return stabilize(G, sigma)[0]


def chip_add(G: Digraph, sigma: Sequence[int], v: int, k: int = 1) -> Config:
    """E_v: add a chip at v and stabilize."""
    _require_global_sink(G)
    if v == G.sink:
        raise ValueError("cannot add chips at the sink")
    return stab(G, add(sigma, unit(G, v, k)))


# --- the sandpile group ---------------------------------------------------------


def identity(G: Digraph) -> Config:
    """Recurrent identity: with s = 2 delta - 2, I = (s - s°)°."""
    _require_global_sink(G)
    if "identity" not in G._memo:
        if any(G.outdeg[v] < 1 for v in range(G.n) if v != G.sink):
            raise GraphError("every non-sink vertex needs an out-edge")
        s = _on_non_sink(G, [2 * d - 2 for d in G.outdeg])
        G._memo["identity"] = stab(G, sub(s, stab(G, s)))
    return G._memo["identity"]


def _check_stable(G: Digraph, sigma: Sequence[int]) -> Config:
    sigma = as_config(G, sigma)
    if not is_stable(G, sigma):
        raise ValueError("configuration is not stable")
    return sigma


def is_recurrent(G: Digraph, sigma: Sequence[int], method: str = "epsilon") -> bool:
    """Recurrence test.

    ``epsilon``: (sigma + eps)° == sigma, valid on any graph with a global sink.
    ``burning``: (sigma + beta)° == sigma with every vertex firing once.
    ``peeling``: repeatedly remove a vertex holding at least its in-degree
    from the remaining vertices; recurrent iff everything is removed.
    The last two need an Eulerian digraph with sink.
    """
    _require_global_sink(G)
    sigma = _check_stable(G, sigma)
    if method == "epsilon":
        return stab(G, add(sigma, epsilon(G))) == sigma
    if not G.classification.eulerian_with_sink:
        raise GraphError(f"the {method} test needs an Eulerian digraph with sink")
    if method == "burning":
        final, odo = stabilize(G, add(sigma, burning_config(G)))
        return final == sigma and all(odo.counts[v] == 1 for v in G.non_sink)
    if method == "peeling":
        remaining = set(G.non_sink)
        indeg = {v: 0 for v in remaining}
        for t, h in G.edges:
            if t in remaining and h in remaining:
                indeg[h] += 1
        ready = [v for v in remaining if sigma[v] >= indeg[v]]
        while ready:
            v = ready.pop()
            if v not in remaining:
                continue
            remaining.discard(v)
            for w in G.out_heads[v]:
                if w in remaining:
                    indeg[w] -= 1
                    if sigma[w] >= indeg[w]:
                        ready.append(w)
        return not remaining
    raise ValueError(f"unknown recurrence test {method!r}")


def _require_recurrent(G: Digraph, sigma: Sequence[int]) -> Config:
    sigma = as_config(G, sigma)
    if not is_stable(G, sigma) or not is_recurrent(G, sigma):
        raise NotRecurrentError("configuration is not recurrent")
    return sigma


def inverse(G: Digraph, sigma: Sequence[int]) -> Config:
    """Group inverse via (z - z° - sigma)° with z = 3 delta - 3."""
    sigma = _require_recurrent(G, sigma)
    if "zeta_excess" not in G._memo:
        zeta = _on_non_sink(G, [3 * d - 3 for d in G.outdeg])
        G._memo["zeta_excess"] = sub(zeta, stab(G, zeta))
    return stab(G, sub(G._memo["zeta_excess"], sigma))


def group_add(G: Digraph, a: Sequence[int], b: Sequence[int]) -> Config:
    a = _require_recurrent(G, a)
    b = _require_recurrent(G, b)
    return stab(G, add(a, b))


def group_order(G: Digraph) -> int:
    _require_global_sink(G)
    return determinant(reduced_laplacian(G))


def group_structure(G: Digraph) -> GroupStructure:
    _require_global_sink(G)
    return smith_normal_form(reduced_laplacian(G))


def recurrent_configs(G: Digraph) -> list[Config]:
    """All recurrent configurations, by closing the identity under every E_v."""
    seen = {identity(G)}
    todo = [identity(G)]
    gens = [v for v in G.non_sink]
    while todo:
        cur = todo.pop()
        for v in gens:
            nxt = chip_add(G, cur, v)
            if nxt not in seen:
                seen.add(nxt)
                todo.append(nxt)
    return sorted(seen)


def _laplacian_coords(G: Digraph, a: Sequence[int]) -> list[Fraction]:
    """x with a = x . Delta' (row-vector action) on non-sink coordinates."""
    lap = reduced_laplacian(G)
    labels = lap.labels
    return solve_rational(lap.transpose(), [a[v] for v in labels])


def equivalent_mod_laplacian(G: Digraph, a: Sequence[int], b: Sequence[int]) -> bool:
    _require_global_sink(G)
    diff = sub(as_config(G, a, signed=True), as_config(G, b, signed=True))
    return all(x.denominator == 1 for x in _laplacian_coords(G, diff))


def recurrent_representative(G: Digraph, a: Sequence[int]) -> Config:
    """Unique recurrent configuration equivalent to a (possibly negative) vector.

    Adds (d_max - m)(delta - delta°), m = min(0, min a), then stabilizes.
    """
    _require_global_sink(G)
    a = as_config(G, a, signed=True)
    dd = sub(delta(G), stab(G, delta(G)))
    m = min(0, min(a[v] for v in G.non_sink)) if G.non_sink else 0
    k = max(G.outdeg) - m
    return stab(G, tuple(x + k * y for x, y in zip(a, dd)))


def harmonic_rep(G: Digraph, sigma: Sequence[int]) -> dict[int, Fraction]:
    """Harmonic function mod 1 attached to sigma, keyed by non-sink vertex.

    Solves sum_v f(v) Delta'[v][w] = sigma(w).  This agrees with the usual
    Delta' f = sigma whenever Delta' is symmetric, and for general digraphs is
    the version that is constant on classes modulo the row span.
    """
    _require_global_sink(G)
    lap = reduced_laplacian(G)
    f = solve_rational(lap.transpose(), [sigma[v] for v in lap.labels])
    return {v: x - (x.numerator // x.denominator) for v, x in zip(lap.labels, f)}


# --- cluster firing and superstability ----------------------------------------


def cluster_fire(G: Digraph, sigma: Sequence[int], cluster: Iterable[int]) -> Config:
    """sigma - sum of the Delta' rows in the cluster; error if anything goes negative."""
    sink = _require_global_sink(G)
    A = set(cluster)
    if not A or sink in A or any(not 0 <= v < G.n for v in A):
        raise ValueError("cluster must be a nonempty set of non-sink vertices")
    out = list(sigma)
    for v in A:
        out[v] -= G.outdeg[v]
        for w in G.out_heads[v]:
            if w != sink:
                out[w] += 1
    if any(x < 0 for x in out):
        raise ValueError("cluster is not allowed to fire")
    return tuple(out)


def can_cluster_fire(G: Digraph, sigma: Sequence[int], cluster: Iterable[int]) -> bool:
    A = set(cluster)
    received = dict.fromkeys(A, 0)  # chips v gets back from the cluster's own firings
    for u in A:
        for w in G.out_heads[u]:
            if w in received:
                received[w] += 1
    return bool(A) and all(sigma[v] - G.outdeg[v] + received[v] >= 0 for v in A)


def allowed_clusters(G: Digraph, sigma: Sequence[int]) -> list[frozenset[int]]:
    verts = [v for v in range(G.n) if v != G.sink]
    if len(verts) > SUPERSTABLE_BRUTE_FORCE_LIMIT:
        raise GraphError(f"brute-force cluster search is limited to {SUPERSTABLE_BRUTE_FORCE_LIMIT} vertices")
    out = []
    for r in range(1, len(verts) + 1):
        for A in itertools.combinations(verts, r):
            if can_cluster_fire(G, sigma, A):
                out.append(frozenset(A))
    return out


def is_superstable(G: Digraph, sigma: Sequence[int]) -> bool:
    _require_global_sink(G)
    sigma = as_config(G, sigma)
    if not is_stable(G, sigma):
        return False
    if G.classification.eulerian_with_sink:
        return is_recurrent(G, sub(_on_non_sink(G, [d - 1 for d in G.outdeg]), sigma))
    return not allowed_clusters(G, sigma)


def superstabilize(G: Digraph, sigma: Sequence[int]) -> Config:
    """delta - 1 - (delta - 1 - sigma° + I)°; Eulerian digraphs with sink only."""
    _require_global_sink(G)
    if not G.classification.eulerian_with_sink:
        raise GraphError("superstabilization is only defined here for Eulerian digraphs with sink")
    top = _on_non_sink(G, [d - 1 for d in G.outdeg])
    return sub(top, stab(G, add(sub(top, stab(G, sigma)), identity(G))))


# --- move bound -------------------------------------------------------------------


@dataclass(frozen=True)
class MoveBound:
    moves: int
    bound: Fraction | float
    ok: bool


def move_bound_check(G: Digraph, sigma: Sequence[int]) -> MoveBound:
    """Compare chip moves during stabilization with 2 m |sigma| R_max.

    m is the number of directed edges left after deleting the sink's out-edges.
    """
    r = max_resistance(G)
    _, odo = stabilize(G, sigma)
    bound = 2 * G.num_edges * sum(sigma) * r
    moves = odo.total_chip_moves
    return MoveBound(moves, bound, moves <= bound)


__all__ = [
    "Config",
    "GroupStructure",
    "MoveBound",
    "Nonterminating",
    "NotRecurrentError",
    "Odometer",
    "SingularMatrixError",
    "add",
    "allowed_clusters",
    "burning_config",
    "canonical_configs",
    "chip_add",
    "cluster_fire",
    "delta",
    "epsilon",
    "equivalent_mod_laplacian",
    "fire",
    "group_add",
    "group_order",
    "group_structure",
    "harmonic_rep",
    "identity",
    "inverse",
    "is_recurrent",
    "is_stable",
    "is_superstable",
    "move_bound_check",
    "ones",
    "recurrent_configs",
    "recurrent_representative",
    "stabilize",
    "sub",
    "superstabilize",
    "unit",
    "zero",
]
