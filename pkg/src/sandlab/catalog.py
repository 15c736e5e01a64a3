"""Exhaustive catalogues of small graphs, one representative per isomorphism class.

Only the multiset of heads at each vertex is enumerated; callers that care
about cyclic out-edge orders iterate them separately.
"""

from __future__ import annotations

import itertools
from collections import Counter
from typing import Iterator

from .graph import Digraph, build_digraph


def _head_choices(heads: list[int], d_min: int, d_max: int, multi: bool) -> list[tuple[int, ...]]:
    pick = itertools.combinations_with_replacement if multi else itertools.combinations
    return [c for d in range(d_min, d_max + 1) for c in pick(heads, d)]


def _canonical(choice: tuple[tuple[int, ...], ...], perms) -> tuple:
    best = None
    for p in perms:
        inv = [0] * len(p)
        for i, x in enumerate(p):
            inv[x] = i
        key = tuple(tuple(sorted(p[w] if w < len(p) else w for w in choice[inv[i]])) for i in range(len(p)))
        if best is None or key < best:
            best = key
    return best


def eulerian_with_sink_graphs(k: int, d_max: int = 3, multi: bool = False, loops: bool = False) -> Iterator[Digraph]:
    """Graphs on k non-sink vertices plus sink k, with global sink and
    outdeg >= indeg at every non-sink vertex, one per relabelling class."""
    perms = list(itertools.permutations(range(k)))
    per_vertex = []
    for v in range(k):
        heads = [w for w in range(k + 1) if loops or w != v]
        per_vertex.append(_head_choices(heads, 1, d_max, multi))
    seen = set()
    for choice in itertools.product(*per_vertex):
        indeg = Counter(w for hs in choice for w in hs)
        if any(indeg[v] > len(choice[v]) for v in range(k)):
            continue
        reach = {k}
        grew = True
        while grew:
            grew = False
            for v in range(k):
                if v not in reach and any(w in reach for w in choice[v]):
                    reach.add(v)
                    grew = True
        if len(reach) <= k:
            continue
        key = _canonical(choice, perms)
        if key in seen:
            continue
        seen.add(key)
        yield build_digraph(k + 1, [(v, w) for v in range(k) for w in key[v]], sink=k)


def strongly_connected_graphs(max_edges: int) -> Iterator[Digraph]:
    """Strongly connected multidigraphs (loops allowed) with at most max_edges edges."""
    for n in range(1, max_edges + 1):
        perms = list(itertools.permutations(range(n)))
        seen = set()
        for degs in itertools.product(range(1, max_edges - n + 2), repeat=n):
            if sum(degs) > max_edges:
                continue
            options = [list(itertools.combinations_with_replacement(range(n), d)) for d in degs]
            for choice in itertools.product(*options):
                G = build_digraph(n, [(v, w) for v in range(n) for w in choice[v]])
                if not G.classification.strongly_connected:
                    continue
                key = _canonical(choice, perms)
                if key in seen:
                    continue
                seen.add(key)
                yield build_digraph(n, [(v, w) for v in range(n) for w in key[v]])
