"""Brute-force ground truth used to check the engines.

Nothing here calls the stabilizer, the recurrence tests or the linear
algebra; the only shared primitive is ``fire``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import networkx as nx

from .graph import Digraph, GraphError
from .sandpile import fire

MAX_TREE_VERTICES = 12
MAX_TREES = 500_000
MAX_TOUR_EDGES = 16
MAX_STABLE_CONFIGS = 100_000
MAX_SUPERSTABLE_VERTICES = 12


class OracleSizeError(GraphError):
    """The instance is beyond what exhaustive search is allowed to attempt."""


@dataclass(frozen=True)
class EnumerationResult:
    items: tuple
    count: int


def enumerate_spanning_trees(G: Digraph, root: int | None = None, limit: int = MAX_TREES) -> EnumerationResult:
    """Oriented spanning trees toward ``root`` (default: the sink), as frozensets of edge ids.

    Every other vertex picks one out-edge; choices closing a cycle are pruned.
    Out-edges of the root are ignored.  Raises OracleSizeError past ``limit`` trees.
    """
    if root is None:
        root = G.sink
    if root is None:
        raise GraphError("need a root or a sink")
    if G.n > MAX_TREE_VERTICES:
        raise OracleSizeError(f"tree enumeration limited to {MAX_TREE_VERTICES} vertices")
    order = [v for v in range(G.n) if v != root]
    parent = [-1] * G.n
    chosen: list[int] = []
    trees: list[frozenset[int]] = []

    def closes_cycle(v: int, w: int) -> bool:
        while w != -1 and w != root:
            if w == v:
                return True
            w = parent[w]
        return False

    def extend(i: int) -> None:
        if i == len(order):
            if len(trees) >= limit:
                raise OracleSizeError(f"more than {limit} spanning trees")
            trees.append(frozenset(chosen))
            return
        v = order[i]
        for e in G.out_order[v]:
            w = G.head(e)
            if closes_cycle(v, w):
                continue
            parent[v] = w
            chosen.append(e)
            extend(i + 1)
            chosen.pop()
            parent[v] = -1

    extend(0)
    return EnumerationResult(tuple(trees), len(trees))


def enumerate_eulerian_tours(G: Digraph, first_edge: int) -> EnumerationResult:
    """Every edge sequence starting with ``first_edge`` that uses each edge exactly once."""
    if not G.classification.eulerian:
        raise GraphError("graph is not Eulerian")
    m = G.num_edges
    if m > MAX_TOUR_EDGES:
        raise OracleSizeError(f"tour enumeration limited to {MAX_TOUR_EDGES} edges")
    used = [False] * m
    used[first_edge] = True
    path = [first_edge]
    tours: list[tuple[int, ...]] = []

    def walk(v: int) -> None:
        if len(path) == m:
            tours.append(tuple(path))
            return
        for e in G.out_order[v]:
            if not used[e]:
                used[e] = True
                path.append(e)
                walk(G.head(e))
                path.pop()
                used[e] = False

    walk(G.head(first_edge))
    return EnumerationResult(tuple(tours), len(tours))


def tour_count_formula(G: Digraph, first_edge: int) -> int:
    """T(G, w) times the product of (d_v - 1)!, with w = tail(first_edge)."""
    trees = enumerate_spanning_trees(G, G.tail(first_edge)).count
    return trees * math.prod(math.factorial(d - 1) for d in G.outdeg)


def _stable_configs(G: Digraph):
    non_sink = list(G.non_sink)
    size = math.prod(G.outdeg[v] for v in non_sink)
    if size > MAX_STABLE_CONFIGS:
        raise OracleSizeError(f"{size} stable configurations exceed {MAX_STABLE_CONFIGS}")
    for values in itertools.product(*(range(G.outdeg[v]) for v in non_sink)):
        sigma = [0] * G.n
        for v, x in zip(non_sink, values):
            sigma[v] = x
        yield tuple(sigma)


def _naive_add(G: Digraph, sigma: tuple[int, ...], v: int) -> tuple[int, ...]:
    s = list(sigma)
    s[v] += 1
    while True:
        active = next((u for u in G.non_sink if s[u] >= G.outdeg[u]), None)
        if active is None:
            return tuple(s)
        s = list(fire(G, s, active))


def recurrent_set_oracle(G: Digraph) -> set[tuple[int, ...]]:
    """Unique terminal strongly connected component of the chip-addition graph on stable configs."""
    if not G.classification.has_global_sink:
        raise GraphError("needs a global sink")
    T = nx.DiGraph()
    for sigma in _stable_configs(G):
        T.add_node(sigma)
        for v in G.non_sink:
            T.add_edge(sigma, _naive_add(G, sigma, v))
    C = nx.condensation(T)
    terminal = [c for c in C.nodes if C.out_degree(c) == 0]
    if len(terminal) != 1:
        raise AssertionError(f"expected one terminal component, found {len(terminal)}")
    return set(C.nodes[terminal[0]]["members"])


def superstable_set_oracle(G: Digraph) -> set[tuple[int, ...]]:
    """Stable configs from which no nonempty vertex set can fire simultaneously."""
    if not G.classification.has_global_sink:
        raise GraphError("needs a global sink")
    non_sink = list(G.non_sink)
    if len(non_sink) > MAX_SUPERSTABLE_VERTICES:
        raise OracleSizeError(f"superstable search limited to {MAX_SUPERSTABLE_VERTICES} non-sink vertices")
    # chips a vertex v loses when cluster A fires: d_v minus edges from A into v
    into = [[0] * G.n for _ in range(G.n)]
    for t, h in G.edges:
        into[t][h] += 1
    clusters = [c for k in range(1, len(non_sink) + 1) for c in itertools.combinations(non_sink, k)]
    out = set()
    for sigma in _stable_configs(G):
        can_fire = False
        for A in clusters:
            if all(sigma[v] >= G.outdeg[v] - sum(into[u][v] for u in A) for v in A):
                can_fire = True
                break
        if not can_fire:
            out.add(sigma)
    return out
