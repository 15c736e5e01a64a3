"""Random graph and configuration generators for property checks.

All take a ``random.Random`` so runs are reproducible from a seed.
"""

from __future__ import annotations

import random

from .graph import Digraph, bidirected, build_digraph


def multidigraph_with_sink(rng: random.Random, n_min: int = 2, n_max: int = 6, d_max: int = 3,
                           loops: bool = True) -> Digraph:
    """Random multidigraph whose last vertex is a global sink."""
    while True:
        n = rng.randint(n_min, n_max)
        edges = []
        for v in range(n - 1):
            for _ in range(rng.randint(1, d_max)):
                w = rng.randrange(n)
                if w == v and not loops:
                    w = n - 1
                edges.append((v, w))
        G = build_digraph(n, edges, sink=n - 1)
        if G.classification.has_global_sink:
            return G


def eulerian(rng: random.Random, n_min: int = 2, n_max: int = 5, max_edges: int = 12, loops: bool = True) -> Digraph:
    """Random Eulerian multidigraph built as a union of closed walks, strongly connected."""
    while True:
        n = rng.randint(n_min, n_max)
        order = list(range(n))
        rng.shuffle(order)
        edges = [(order[i], order[(i + 1) % n]) for i in range(n)] if n > 1 else [(0, 0)]
        while len(edges) < max_edges and rng.random() < 0.7:
            k = rng.randint(1, min(n, max_edges - len(edges)))
            walk = [rng.randrange(n) for _ in range(k)]
            cyc = [(walk[i], walk[(i + 1) % k]) for i in range(k)]
            if not loops and any(a == b for a, b in cyc):
                continue
            edges.extend(cyc)
        rng.shuffle(edges)
        G = build_digraph(n, edges)
        if G.classification.eulerian:
            return G


def eulerian_with_sink(rng: random.Random, n_min: int = 2, n_max: int = 5, max_edges: int = 12) -> Digraph:
    """Random Eulerian digraph with one vertex turned into a sink."""
    G = eulerian(rng, max(n_min, 2), n_max, max_edges)
    return G.with_sink(rng.randrange(G.n))


def bidirected_with_sink(rng: random.Random, n_min: int = 2, n_max: int = 7, extra: int = 4) -> Digraph:
    """Random connected undirected multigraph, bidirected, with a random sink."""
    n = rng.randint(n_min, n_max)
    und = [(rng.randrange(v), v) for v in range(1, n)]
    for _ in range(rng.randint(0, extra)):
        a, b = rng.randrange(n), rng.randrange(n)
        if a != b:
            und.append((a, b))
    perm = list(range(n))
    rng.shuffle(perm)
    und = [(perm[a], perm[b]) for a, b in und]
    return bidirected(n, und, sink=rng.randrange(n))


def strongly_connected(rng: random.Random, n_min: int = 1, n_max: int = 5, max_edges: int = 8) -> Digraph:
    """Random strongly connected multidigraph (not necessarily Eulerian)."""
    while True:
        n = rng.randint(n_min, n_max)
        edges = [(rng.randrange(n), rng.randrange(n)) for _ in range(rng.randint(n, max_edges))]
        G = build_digraph(n, edges)
        if G.classification.strongly_connected and all(G.outdeg):
            return G


def config(rng: random.Random, G: Digraph, max_chips: int = 10) -> tuple[int, ...]:
    return tuple(0 if d == 0 or v == G.sink else rng.randint(0, max_chips) for v, d in enumerate(G.outdeg))


def stable_config(rng: random.Random, G: Digraph) -> tuple[int, ...]:
    return tuple(0 if d == 0 or v == G.sink else rng.randrange(d) for v, d in enumerate(G.outdeg))


def rotor(rng: random.Random, G: Digraph) -> tuple[int, ...]:
    return tuple(rng.randrange(d) if d else -1 for d in G.outdeg)
