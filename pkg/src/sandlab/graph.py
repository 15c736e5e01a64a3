"""Finite multidigraphs with a cyclic out-edge order, Laplacians and generators.

Edges are identified by their position in ``Digraph.edges``.  The order in
which a vertex's out-edges appear in ``out_order`` is the rotor cyclic order,
so every constructor and the text format preserve it exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence


class GraphError(ValueError):
    """Raised for malformed graphs or graph files."""


@dataclass(frozen=True)
class Digraph:
    n: int
    edges: tuple[tuple[int, int], ...]
    out_order: tuple[tuple[int, ...], ...]
    sink: int | None = None
    embedding: tuple[tuple[int, int], ...] | None = None
    _memo: dict = field(default_factory=dict, init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        if len(self.out_order) != self.n:
            raise GraphError("out_order must have one entry per vertex")
        seen = [False] * len(self.edges)
        for v, slots in enumerate(self.out_order):
            for e in slots:
                if not 0 <= e < len(self.edges) or self.edges[e][0] != v or seen[e]:
                    raise GraphError(f"edge {e} misplaced in out_order of vertex {v}")
                seen[e] = True
        if not all(seen):
            raise GraphError("every edge must appear in out_order")
        if self.sink is not None:
            if not 0 <= self.sink < self.n:
                raise GraphError(f"sink {self.sink} out of range")
            if self.out_order[self.sink]:
                raise GraphError("the sink must have no outgoing edges")
        if self.embedding is not None and len(self.embedding) != self.n:
            raise GraphError("embedding must give one coordinate per vertex")

    # --- structural accessors -------------------------------------------------

    def tail(self, e: int) -> int:
        return self.edges[e][0]

    def head(self, e: int) -> int:
        return self.edges[e][1]

    @cached_property
    def outdeg(self) -> tuple[int, ...]:
        return tuple(len(s) for s in self.out_order)

    @cached_property
    def indeg(self) -> tuple[int, ...]:
        deg = [0] * self.n
        for _, h in self.edges:
            deg[h] += 1
        return tuple(deg)

    @cached_property
    def out_heads(self) -> tuple[tuple[int, ...], ...]:
        """Heads of each vertex's out-edges, in cyclic order."""
        return tuple(tuple(self.edges[e][1] for e in slots) for slots in self.out_order)

    @cached_property
    def adjacency(self) -> tuple[dict[int, int], ...]:
        """``adjacency[v][w]`` is the number of edges v -> w."""
        rows: list[dict[int, int]] = [dict() for _ in range(self.n)]
        for t, h in self.edges:
            rows[t][h] = rows[t].get(h, 0) + 1
        return tuple(rows)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    @cached_property
    def non_sink(self) -> tuple[int, ...]:
        """Vertices with positive out-degree."""
        return tuple(v for v in range(self.n) if self.outdeg[v] > 0)

    def is_sink(self, v: int) -> bool:
        return self.outdeg[v] == 0

    def slot_of(self, e: int) -> int:
        """Position of edge ``e`` in its tail's cyclic order."""
        return self.out_order[self.edges[e][0]].index(e)

    def with_sink(self, s: int) -> Digraph:
        """Copy of the graph with the out-edges of ``s`` deleted and ``s`` made the sink."""
        pairs = [self.edges[e] for v in range(self.n) if v != s for e in self.out_order[v]]
        return build_digraph(self.n, pairs, sink=s, embedding=self.embedding)

    @cached_property
    def classification(self) -> GraphClassification:
        return classify(self)


@dataclass(frozen=True)
class IntegerMatrix:
    """Square matrix of Python integers with vertex labels on rows and columns."""

    rows: tuple[tuple[int, ...], ...]
    labels: tuple[int, ...]

    def __post_init__(self):
        if len(self.rows) != len(self.labels) or any(len(r) != len(self.labels) for r in self.rows):
            raise ValueError("matrix must be square with one label per row")

    @property
    def dim(self) -> int:
        return len(self.labels)

    def __getitem__(self, ij: tuple[int, int]) -> int:
        i, j = ij
        return self.rows[i][j]

    def tolist(self) -> list[list[int]]:
        return [list(r) for r in self.rows]

    def transpose(self) -> IntegerMatrix:
        return IntegerMatrix(tuple(zip(*self.rows)) if self.rows else (), self.labels)


@dataclass(frozen=True)
class GraphClassification:
    has_global_sink: bool
    strongly_connected: bool
    eulerian: bool
    eulerian_with_sink: bool
    bidirected: bool
    bidirected_with_sink: bool
    scc_list: tuple[tuple[int, ...], ...]


# --- construction -------------------------------------------------------------


def build_digraph(
    n: int,
    edge_list: Iterable[tuple[int, int]],
    sink: int | None = None,
    embedding: Sequence[tuple[int, int]] | None = None,
) -> Digraph:
    """Build a digraph whose cyclic out-edge order follows ``edge_list`` order."""
    if n < 0:
        raise GraphError("vertex count must be nonnegative")
    edges = []
    slots: list[list[int]] = [[] for _ in range(n)]
    for t, h in edge_list:
        if not (0 <= t < n and 0 <= h < n):
            raise GraphError(f"edge ({t}, {h}) has an endpoint out of range 0..{n - 1}")
        if t == sink:
            raise GraphError(f"edge ({t}, {h}) leaves the sink")
        slots[t].append(len(edges))
        edges.append((int(t), int(h)))
    emb = None if embedding is None else tuple((int(x), int(y)) for x, y in embedding)
    return Digraph(n, tuple(edges), tuple(tuple(s) for s in slots), sink, emb)


def laplacian(G: Digraph) -> IntegerMatrix:
    """Full Laplacian D - A; self-loops cancel on the diagonal."""
    rows = []
    for v in range(G.n):
        row = [0] * G.n
        for w, k in G.adjacency[v].items():
            row[w] -= k
        row[v] += G.outdeg[v]
        rows.append(tuple(row))
    return IntegerMatrix(tuple(rows), tuple(range(G.n)))


def reduced_laplacian(G: Digraph, sink: int | None = None) -> IntegerMatrix:
    """Laplacian with the sink's row and column deleted."""
    s = G.sink if sink is None else sink
    if s is None:
        raise GraphError("reduced Laplacian needs a sink")
    full = laplacian(G).rows
    keep = [v for v in range(G.n) if v != s]
    return IntegerMatrix(tuple(tuple(full[i][j] for j in keep) for i in keep), tuple(keep))


# --- classification -----------------------------------------------------------


def strongly_connected_components(n: int, succ: Sequence[Iterable[int]], vertices: Iterable[int] | None = None):
    """Iterative Tarjan over the subgraph induced by ``vertices``.

    Components come out in reverse topological order (sinks of the
    condensation first).
    """
    allowed = set(range(n)) if vertices is None else set(vertices)
    index: dict[int, int] = {}
    low: dict[int, int] = {}
    on_stack: set[int] = set()
    stack: list[int] = []
    comps: list[tuple[int, ...]] = []
    counter = 0
    for root in sorted(allowed):
        if root in index:
            continue
        work = [(root, iter(succ[root]))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if w not in allowed:
                    continue
                if w not in index:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, iter(succ[w])))
                    advanced = True
                    break
                if w in on_stack:
                    low[v] = min(low[v], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                u = work[-1][0]
                low[u] = min(low[u], low[v])
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.append(w)
                    if w == v:
                        break
                comps.append(tuple(sorted(comp)))
    return comps


def _reaches(G: Digraph, target: int) -> set[int]:
    pred: list[list[int]] = [[] for _ in range(G.n)]
    for t, h in G.edges:
        pred[h].append(t)
    seen = {target}
    todo = [target]
    while todo:
        v = todo.pop()
        for u in pred[v]:
            if u not in seen:
                seen.add(u)
                todo.append(u)
    return seen


def global_sink(G: Digraph) -> int | None:
    """The designated sink if it is globally reachable, else a detected one, else None."""
    candidates = [G.sink] if G.sink is not None else [v for v in range(G.n) if G.outdeg[v] == 0]
    if len(candidates) != 1:
        return None
    s = candidates[0]
    if G.outdeg[s] != 0:
        return None
    return s if len(_reaches(G, s)) == G.n else None


def _bidirected_on(G: Digraph, vertices: set[int]) -> bool:
    for v in vertices:
        for w, k in G.adjacency[v].items():
            if w != v and w in vertices and G.adjacency[w].get(v, 0) != k:
                return False
    return True


def classify(G: Digraph) -> GraphClassification:
    s = global_sink(G)
    comps_all = strongly_connected_components(G.n, G.out_heads)
    strongly = G.n > 0 and len(comps_all) == 1
    balanced = G.indeg == G.outdeg
    eulerian = strongly and balanced
    ews = s is not None and all(G.outdeg[v] >= G.indeg[v] for v in range(G.n) if v != s)
    everyone = set(range(G.n))
    removed = G.sink if G.sink is not None else s
    rest = everyone - {removed} if removed is not None else everyone
    return GraphClassification(
        has_global_sink=s is not None,
        strongly_connected=strongly,
        eulerian=eulerian,
        eulerian_with_sink=ews,
        bidirected=_bidirected_on(G, everyone),
        bidirected_with_sink=removed is not None and _bidirected_on(G, rest),
        scc_list=tuple(strongly_connected_components(G.n, G.out_heads, rest)) if removed is not None else tuple(comps_all),
    )


# --- generators ---------------------------------------------------------------
# Embedded families list out-edges clockwise starting from +x (y axis up):
# east, south, west, north.

_CLOCKWISE = ((1, 0), (0, -1), (-1, 0), (0, 1))


def _lattice_wired(points: list[tuple[int, int]]) -> Digraph:
    idx = {p: i for i, p in enumerate(points)}
    s = len(points)
    pairs = []
    for x, y in points:
        v = idx[(x, y)]
        for dx, dy in _CLOCKWISE:
            pairs.append((v, idx.get((x + dx, y + dy), s)))
    return build_digraph(s + 1, pairs, sink=s, embedding=list(points) + [(0, 0)])


def grid_wired(L: int) -> Digraph:
    """Bidirected L x L grid plus a sink; each missing neighbour becomes a sink edge.

    Vertex (i, j) has index i*L + j and coordinates (x, y) = (j, i); the sink
    is vertex L*L.  Corners get two sink edges and other boundary vertices one.
    Flags: global sink, Eulerian with sink, bidirected with sink.
    """
    if L < 1:
        raise GraphError("L must be at least 1")
    return _lattice_wired([(j, i) for i in range(L) for j in range(L)])


def disk_wired(diameter: int) -> Digraph:
    """Lattice points with x^2 + y^2 < (diameter/2)^2, wired to a sink like grid_wired.

    Vertices are ordered by y then x; the sink comes last.
    """
    if diameter < 1:
        raise GraphError("diameter must be at least 1")
    r2 = diameter * diameter  # compare 4(x^2 + y^2) < d^2 in integers
    reach = diameter // 2 + 1
    pts = [(x, y) for y in range(-reach, reach + 1) for x in range(-reach, reach + 1) if 4 * (x * x + y * y) < r2]
    return _lattice_wired(pts)


def directed_torus(L: int) -> Digraph:
    """Edges (i,j)->(i,j+1) and (i,j)->(i+1,j) mod L, with (0,0) made the sink."""
    if L < 1:
        raise GraphError("L must be at least 1")
    pairs = []
    for i in range(L):
        for j in range(L):
            v = i * L + j
            if v == 0:
                continue
            pairs.append((v, i * L + (j + 1) % L))
            pairs.append((v, ((i + 1) % L) * L + j))
    return build_digraph(L * L, pairs, sink=0, embedding=[(j, i) for i in range(L) for j in range(L)])


def complete(k: int) -> Digraph:
    """Complete digraph on k vertices without loops; sink-free for k >= 2."""
    if k < 1:
        raise GraphError("k must be at least 1")
    return build_digraph(k, [(u, v) for u in range(k) for v in range(k) if u != v])


def complete_with_sink(k: int) -> Digraph:
    """complete(k) with the out-edges of vertex k-1 deleted; k=3 gives the 3-element group."""
    if k < 1:
        raise GraphError("k must be at least 1")
    return build_digraph(k, [(u, v) for u in range(k - 1) for v in range(k) if u != v], sink=k - 1)


def bidirected(n: int, undirected_edges: Iterable[tuple[int, int]], sink: int | None = None) -> Digraph:
    """Replace each undirected edge by two opposite directed edges.

    Out-edge order follows the undirected list.  If ``sink`` is given its
    out-edges are deleted.
    """
    pairs = []
    for u, v in undirected_edges:
        pairs.append((u, v))
        pairs.append((v, u))
    if sink is not None:
        pairs = [(t, h) for t, h in pairs if t != sink]
    return build_digraph(n, pairs, sink=sink)


def path_bidirected(L: int) -> Digraph:
    """Bidirected path 0 - 1 - ... - (L-1) with the sink at vertex L-1."""
    if L < 1:
        raise GraphError("L must be at least 1")
    return bidirected(L, [(i, i + 1) for i in range(L - 1)], sink=L - 1)


def directed_cycle(k: int) -> Digraph:
    """Directed k-cycle 0 -> 1 -> ... -> k-1 -> 0."""
    return build_digraph(k, [(i, (i + 1) % k) for i in range(k)])


def bidirected_grid(rows: int, cols: int, sink: int | None = None) -> Digraph:
    """Bidirected rows x cols grid without a sink, clockwise out-edge order."""
    pts = [(x, y) for y in range(rows) for x in range(cols)]
    idx = {p: i for i, p in enumerate(pts)}
    pairs = []
    for x, y in pts:
        for dx, dy in _CLOCKWISE:
            q = (x + dx, y + dy)
            if q in idx and idx[(x, y)] != sink:
                pairs.append((idx[(x, y)], idx[q]))
    return build_digraph(len(pts), pairs, sink=sink, embedding=pts)


FAMILIES = {
    "grid-wired": grid_wired,
    "torus": directed_torus,
    "disk-wired": disk_wired,
    "complete": complete,
    "complete-with-sink": complete_with_sink,
    "path": path_bidirected,
    "cycle": directed_cycle,
    "bidirected-grid": bidirected_grid,
}


def generate(family: str, *args) -> Digraph:
    """Dispatch to a named family generator; ``bidirected`` takes (n, edges[, sink])."""
    if family == "bidirected":
        return bidirected(*args)
    try:
        fn = FAMILIES[family.replace("_", "-")]
    except KeyError:
        raise GraphError(f"unknown family {family!r}") from None
    return fn(*args)


# --- sandgraph v1 text format ------------------------------------------------


def serialize_graph(G: Digraph) -> str:
    out = ["sandgraph v1", f"vertices {G.n}"]
    if G.sink is not None:
        out.append(f"sink {G.sink}")
    if G.embedding is not None:
        out.extend(f"coord {v} {x} {y}" for v, (x, y) in enumerate(G.embedding))
    for v in range(G.n):
        heads = G.out_heads[v]
        i = 0
        while i < len(heads):
            j = i
            while j < len(heads) and heads[j] == heads[i]:
                j += 1
            run = j - i
            out.append(f"edge {v} {heads[i]}" + (f" {run}" if run > 1 else ""))
            i = j
    return "\n".join(out) + "\n"


def _tokens(text: str):
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].split()
        if line:
            yield lineno, line


def _ints(words: list[str], lineno: int) -> list[int]:
    try:
        return [int(w) for w in words]
    except ValueError:
        raise GraphError(f"line {lineno}: expected integers, got {' '.join(words)!r}") from None


def parse_graph(text: str) -> Digraph:
    lines = list(_tokens(text))
    if not lines or lines[0][1] != ["sandgraph", "v1"]:
        raise GraphError("missing 'sandgraph v1' header")
    n = None
    sink = None
    coords: dict[int, tuple[int, int]] = {}
    pairs: list[tuple[int, int]] = []
    for lineno, words in lines[1:]:
        key, rest = words[0], words[1:]
        if key == "vertices" and len(rest) == 1:
            n = _ints(rest, lineno)[0]
        elif key == "sink" and len(rest) == 1:
            sink = _ints(rest, lineno)[0]
        elif key == "coord" and len(rest) == 3:
            v, x, y = _ints(rest, lineno)
            coords[v] = (x, y)
        elif key == "edge" and len(rest) in (2, 3):
            vals = _ints(rest, lineno)
            count = vals[2] if len(vals) == 3 else 1
            if count < 1:
                raise GraphError(f"line {lineno}: edge multiplicity must be positive")
            pairs.extend([(vals[0], vals[1])] * count)
        else:
            raise GraphError(f"line {lineno}: cannot parse {' '.join(words)!r}")
        if n is None and key != "vertices":
            raise GraphError(f"line {lineno}: 'vertices' must come first")
    if n is None:
        raise GraphError("missing 'vertices' line")
    if sink is not None and not 0 <= sink < n:
        raise GraphError(f"sink {sink} out of range")
    embedding = None
    if coords:
        if set(coords) != set(range(n)):
            raise GraphError("coord lines must cover every vertex")
        embedding = [coords[v] for v in range(n)]
    return build_digraph(n, pairs, sink=sink, embedding=embedding)


def signed_area2(points: Sequence[tuple[int, int]]) -> int:
    """Twice the shoelace area; negative for clockwise polygons with y up."""
    total = 0
    for i, (x0, y0) in enumerate(points):
        x1, y1 = points[(i + 1) % len(points)]
        total += x0 * y1 - x1 * y0
    return total


def point_in_polygon(p: tuple[int, int], poly: Sequence[tuple[int, int]]) -> bool:
    """Strict interior test (even-odd rule) for a lattice point not on the boundary."""
    x, y = p
    inside = False
    k = len(poly)
    for i in range(k):
        x0, y0 = poly[i]
        x1, y1 = poly[(i + 1) % k]
        if (y0 > y) != (y1 > y):
            xc = x0 + (y - y0) * (x1 - x0) / (y1 - y0)
            if x < xc:
                inside = not inside
    return inside
