"""Rotor-router dynamics.

A rotor configuration is a tuple holding, for every vertex, the index into
``G.out_order[v]`` of the edge the rotor points along (-1 at sinks).  The
router increments first and then moves: a chip at v advances the rotor to
the next edge in cyclic order and leaves along that edge.  So the rotor
always shows the edge most recently used.  Every bijection below depends
on this convention.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .graph import Digraph, GraphError, build_digraph, point_in_polygon, signed_area2
from .intalg import solve_rational
from .sandpile import (
    Config,
    add,
    identity,
    inverse,
    recurrent_configs,
    recurrent_representative,
    stab,
)

Rotor = tuple[int, ...]


@dataclass(frozen=True)
class SingleChipState:
    chip: int
    rotor: Rotor


@dataclass(frozen=True)
class UnicycleCertificate:
    cycle: tuple[int, ...] | None

    def __bool__(self) -> bool:
        return self.cycle is not None


class RotorError(ValueError):
    pass


# --- basics -----------------------------------------------------------------------


def as_rotor(G: Digraph, rho: Sequence[int]) -> Rotor:
    rho = tuple(int(x) for x in rho)
    if len(rho) != G.n:
        raise RotorError(f"rotor configuration has {len(rho)} entries, graph has {G.n} vertices")
    for v, s in enumerate(rho):
        d = G.outdeg[v]
        if (d == 0 and s != -1) or (d > 0 and not 0 <= s < d):
            raise RotorError(f"rotor at vertex {v} must index one of its {d} out-edges")
    return rho


def rotor_from_edges(G: Digraph, edge_ids: dict[int, int] | Iterable[int]) -> Rotor:
    """Rotor pointing along the given edges (one per non-sink vertex)."""
    rho = [-1] * G.n
    for e in edge_ids.values() if isinstance(edge_ids, dict) else edge_ids:
        rho[G.tail(e)] = G.slot_of(e)
    return as_rotor(G, rho)


def rotor_edges(G: Digraph, rho: Sequence[int]) -> dict[int, int]:
    return {v: G.out_order[v][s] for v, s in enumerate(rho) if s >= 0}


def points_to(G: Digraph, rho: Sequence[int], v: int) -> int:
    return G.out_heads[v][rho[v]]


def initial_rotor(G: Digraph) -> Rotor:
    """Every rotor on its first out-edge."""
    return tuple(0 if d else -1 for d in G.outdeg)


def tree_rotor(G: Digraph, root: int | None = None) -> Rotor:
    """Rotors along a breadth-first in-tree towards ``root`` (default: the sink).

    With a sink this is an acyclic configuration.  Without one the root's rotor
    stays on its first edge, so a chip placed at the root gives a unicycle.
    """
    root = G.sink if root is None else root
    if root is None:
        raise GraphError("pass a root on graphs without a sink")
    preds: list[list[tuple[int, int]]] = [[] for _ in range(G.n)]
    for v in range(G.n):
        for slot, w in enumerate(G.out_heads[v]):
            preds[w].append((v, slot))
    rho = list(initial_rotor(G))
    seen = {root}
    queue = [root]
    for w in queue:
        for v, slot in preds[w]:
            if v not in seen:
                seen.add(v)
                rho[v] = slot
                queue.append(v)
    if len(seen) < G.n:
        raise GraphError(f"not every vertex reaches {root}")
    return tuple(rho)


def is_acyclic(G: Digraph, rho: Sequence[int]) -> bool:
    """True iff following rotors from every vertex reaches a sink."""
    state = [0] * G.n  # 0 unseen, 1 on current path, 2 leads to a sink
    for start in range(G.n):
        path = []
        v = start
        while state[v] == 0:
            if rho[v] < 0:
                state[v] = 2
                break
            state[v] = 1
            path.append(v)
            v = points_to(G, rho, v)
        if state[v] == 1:
            return False
        for u in path:
            state[u] = 2
    return True


# --- single chip on sink-free graphs ---------------------------------------------------


def rotor_step(G: Digraph, state: SingleChipState) -> SingleChipState:
    w = state.chip
    d = G.outdeg[w]
    if d == 0:
        raise RotorError("the chip sits at a sink (absorbing state)")
    rho = list(state.rotor)
    rho[w] = (rho[w] + 1) % d
    return SingleChipState(G.out_heads[w][rho[w]], tuple(rho))


def is_unicycle(G: Digraph, state: SingleChipState) -> UnicycleCertificate:
    """Certificate holding the unique rotor cycle if the chip lies on it."""
    rho = state.rotor
    if any(s < 0 for s in rho):
        return UnicycleCertificate(None)
    seen: dict[int, int] = {}
    v = state.chip
    order = []
    while v not in seen:
        seen[v] = len(order)
        order.append(v)
        v = points_to(G, rho, v)
    if v != state.chip:
        return UnicycleCertificate(None)
    cycle = tuple(order)
    # every other vertex must flow into this cycle
    good = set(cycle)
    for start in range(G.n):
        path: dict[int, None] = {}
        u = start
        while u not in good:
            if u in path:
                return UnicycleCertificate(None)
            path[u] = None
            u = points_to(G, rho, u)
        good.update(path)
    return UnicycleCertificate(cycle)


def rotor_step_inverse(G: Digraph, state: SingleChipState) -> SingleChipState:
    """Move the chip back to its cycle predecessor and regress that rotor."""
    cert = is_unicycle(G, state)
    if not cert:
        raise RotorError("state is not a unicycle")
    cyc = cert.cycle
    pred = cyc[-1]
    rho = list(state.rotor)
    rho[pred] = (rho[pred] - 1) % G.outdeg[pred]
    return SingleChipState(pred, tuple(rho))


def unicycle_orbit(G: Digraph, state: SingleChipState, cap: int | None = None) -> list[SingleChipState]:
    """States visited from ``state`` until it recurs (the start is listed once)."""
    if any(d == 0 for d in G.outdeg):
        raise GraphError("orbits are defined on sink-free graphs")
    limit = 4 * G.num_edges * G.n if cap is None else cap
    orbit = [state]
    cur = state
    for _ in range(limit):
        cur = rotor_step(G, cur)
        if cur == state:
            return orbit
        orbit.append(cur)
    raise RotorError(f"no return within {limit} steps; the start is not recurrent")


def recurrent_states(G: Digraph) -> set[SingleChipState]:
    """States on a cycle of the rotor-router map, by exhaustive search."""
    rotors = itertools.product(*(range(d) for d in G.outdeg))
    states = [SingleChipState(w, rho) for rho in rotors for w in range(G.n)]
    nxt = {s: rotor_step(G, s) for s in states}
    on_cycle: set[SingleChipState] = set()
    done: set[SingleChipState] = set()
    for s in states:
        path = {}
        cur = s
        while cur not in done and cur not in path:
            path[cur] = len(path)
            cur = nxt[cur]
        if cur in path:
            start = path[cur]
            on_cycle.update(p for p, i in path.items() if i >= start)
        done.update(path)
    return on_cycle


# --- chips routed to a sink -----------------------------------------------------------


def route_chip(
    G: Digraph, rho: Sequence[int], v: int, stop: Iterable[int] = (), max_steps: int | None = None
) -> tuple[Rotor, list[int]]:
    """Walk one chip from v until it reaches a sink or a vertex in ``stop``.

    Returns the new rotor configuration and the vertex path (including v and
    the stopping vertex).
    """
    stop = set(stop)
    rho = list(rho)
    path = [v]
    steps = 0
    while G.outdeg[v] > 0 and v not in stop:
        rho[v] = (rho[v] + 1) % G.outdeg[v]
        v = G.out_heads[v][rho[v]]
        path.append(v)
        steps += 1
        if max_steps is not None and steps >= max_steps:
            raise RotorError(f"chip did not stop within {max_steps} steps")
    return tuple(rho), path


def chip_add_rotor(G: Digraph, rho: Sequence[int], v: int) -> Rotor:
    """E_v on rotor configurations."""
    if not G.classification.has_global_sink:
        raise GraphError("chip addition needs a global sink")
    return route_chip(G, rho, v)[0]


def action(G: Digraph, sigma: Sequence[int], rho: Sequence[int]) -> Rotor:
    """sigma(rho): add sigma(v) chips at each v and route all of them to the sink.

    A vertex holding c chips sends c // d down every out-edge and one more
    down each of the next c % d edges; by the abelian property this equals
    routing them one at a time.
    """
    if not G.classification.has_global_sink:
        raise GraphError("the sandpile action needs a global sink")
    rho = list(rho)
    chips = list(sigma)
    chips[G.sink] = 0
    todo = [v for v in range(G.n) if chips[v] > 0]
    while todo:
        v = todo.pop()
        c = chips[v]
        if c == 0:
            continue
        chips[v] = 0
        d = G.outdeg[v]
        full, extra = divmod(c, d)
        heads = G.out_heads[v]
        start = rho[v]
        for k in range(d):
            # slot start+1+k is reached by the first `extra` leftover chips
            amount = full + (1 if k < extra else 0)
            if amount:
                w = heads[(start + 1 + k) % d]
                if w != G.sink:
                    if chips[w] == 0:
                        todo.append(w)
                    chips[w] += amount
        rho[v] = (start + extra) % d
    return tuple(rho)


def acyclic_configs(G: Digraph) -> list[Rotor]:
    """All acyclic rotor configurations: closure of one tree under the E_v."""
    if not G.classification.has_global_sink:
        raise GraphError("needs a global sink")
    start = list(initial_rotor(G))
    start = action(G, [1 if d else 0 for d in G.outdeg], start)
    seen = {start}
    todo = [start]
    while todo:
        cur = todo.pop()
        for v in G.non_sink:
            nxt = chip_add_rotor(G, cur, v)
            if nxt not in seen:
                seen.add(nxt)
                todo.append(nxt)
    return sorted(seen)


def tree_action_solve(G: Digraph, rho: Sequence[int], target: Sequence[int]) -> Config:
    """The recurrent sigma with sigma(rho) = target, for acyclic rho and target."""
    if not (is_acyclic(G, rho) and is_acyclic(G, target)):
        raise RotorError("both rotor configurations must be acyclic")
    alpha = [0] * G.n
    beta = [0] * G.n
    for v in G.non_sink:
        d = G.outdeg[v]
        # number of edges e with rho(v) < e <= target(v) in cyclic order
        alpha[v] = (target[v] - rho[v]) % d
        for k in range(1, alpha[v] + 1):
            w = G.out_heads[v][(rho[v] + k) % d]
            if w != G.sink:
                beta[w] += 1
    gamma = inverse(G, stab(G, add(beta, identity(G))))
    return recurrent_representative(G, add(alpha, gamma))


def tree_bijection(G: Digraph, base: Sequence[int]) -> dict[Config, Rotor]:
    """Map each recurrent configuration sigma to sigma(base)."""
    if not is_acyclic(G, base):
        raise RotorError("base rotor configuration must be acyclic")
    return {sigma: action(G, sigma, base) for sigma in recurrent_configs(G)}


# --- Eulerian tours ------------------------------------------------------------------------


def eulerian_tour(G: Digraph, state: SingleChipState, first_edge: int) -> list[int]:
    """Edges traversed in |E| router steps from a unicycle whose chip sits at
    tail(first_edge) with that rotor one slot before first_edge."""
    if not G.classification.eulerian:
        raise GraphError("Eulerian tours need an Eulerian digraph")
    w = G.tail(first_edge)
    if state.chip != w or (state.rotor[w] + 1) % G.outdeg[w] != G.slot_of(first_edge):
        raise RotorError("chip must sit at tail(e) with its rotor just before e")
    if not is_unicycle(G, state):
        raise RotorError("state is not a unicycle")
    tour = []
    cur = state
    for _ in range(G.num_edges):
        v = cur.chip
        cur = rotor_step(G, cur)
        tour.append(G.out_order[v][cur.rotor[v]])
    return tour


def tour_start_state(G: Digraph, tree_edges: Iterable[int], first_edge: int) -> SingleChipState:
    """Unicycle built from an oriented spanning tree rooted at tail(first_edge)."""
    w = G.tail(first_edge)
    rho = [-1] * G.n
    for e in tree_edges:
        rho[G.tail(e)] = G.slot_of(e)
    rho[w] = (G.slot_of(first_edge) - 1) % G.outdeg[w]
    return SingleChipState(w, tuple(rho))


def with_out_order(G: Digraph, out_order: Sequence[Sequence[int]]) -> Digraph:
    """Same edges, different cyclic orders."""
    return Digraph(G.n, G.edges, tuple(tuple(s) for s in out_order), G.sink, G.embedding)


def cyclic_orders(G: Digraph):
    """Every choice of cyclic out-edge order (first edge held fixed)."""
    per_vertex = []
    for slots in G.out_order:
        if len(slots) <= 1:
            per_vertex.append([tuple(slots)])
        else:
            per_vertex.append([(slots[0],) + p for p in itertools.permutations(slots[1:])])
    for choice in itertools.product(*per_vertex):
        yield with_out_order(G, choice)


# --- hitting estimate -------------------------------------------------------------------


@dataclass(frozen=True)
class HittingBound:
    rotor_hits: int
    expected_hits: Fraction
    lhs: Fraction
    rhs: Fraction
    ok: bool


def hitting_probabilities(G: Digraph, Y: Iterable[int], Z: Iterable[int]) -> list[Fraction]:
    """h(v) = P(simple random walk from v first hits Z inside Y).

    Steps are uniform over out-edges counted with multiplicity.
    """
    Y, Z = set(Y), set(Z)
    if not Y <= Z:
        raise ValueError("Y must be a subset of Z")
    pred: list[list[int]] = [[] for _ in range(G.n)]
    for t, h in G.edges:
        pred[h].append(t)
    reach = set(Z)
    todo = list(Z)
    while todo:
        v = todo.pop()
        for u in pred[v]:
            if u not in reach:
                reach.add(u)
                todo.append(u)
    if len(reach) != G.n:
        raise GraphError("some vertex has no directed path to Z")
    free = [v for v in range(G.n) if v not in Z]
    pos = {v: i for i, v in enumerate(free)}
    M = [[0] * len(free) for _ in free]
    b = [0] * len(free)
    for v in free:
        i = pos[v]
        M[i][i] += G.outdeg[v]
        for w, k in G.adjacency[v].items():
            if w in pos:
                M[i][pos[w]] -= k
            elif w in Y:
                b[i] += k
    sol = solve_rational(M, b) if free else []
    return [Fraction(1 if v in Y else 0) if v in Z else sol[pos[v]] for v in range(G.n)]


def hitting_bound_check(
    G: Digraph, Y: Iterable[int], Z: Iterable[int], sigma: Sequence[int], rho: Sequence[int]
) -> HittingBound:
    """Compare rotor-walk hits in Y with the random-walk expectation.

    The bound is the sum over all edges of |h(head) - h(tail)|.
    """
    Y, Z = set(Y), set(Z)
    h = hitting_probabilities(G, Y, Z)
    expected = sum((sigma[v] * h[v] for v in range(G.n)), Fraction(0))
    rho = tuple(rho)
    hits = 0
    for v in range(G.n):
        for _ in range(sigma[v]):
            rho, path = route_chip(G, rho, v, stop=Z)
            hits += path[-1] in Y
    lhs = abs(hits - expected)
    rhs = sum((abs(h[hd] - h[tl]) for tl, hd in G.edges), Fraction(0))
    return HittingBound(hits, expected, lhs, rhs, lhs <= rhs)


# --- planar reversal -------------------------------------------------------------------------


@dataclass(frozen=True)
class ReversalReport:
    steps: int
    cycle: tuple[int, ...]
    interior: tuple[int, ...]
    interior_full_turn: bool
    exterior_unmoved: bool
    cycle_partial_turn: bool
    final_state: SingleChipState

    @property
    def ok(self) -> bool:
        return self.interior_full_turn and self.exterior_unmoved and self.cycle_partial_turn


def _is_clockwise_ordered(G: Digraph) -> bool:
    emb = G.embedding
    for v, heads in enumerate(G.out_heads):
        if len(heads) < 2:
            continue
        angles = [math.atan2(emb[w][1] - emb[v][1], emb[w][0] - emb[v][0]) for w in heads]
        turn = 0.0
        for a, b in zip(angles, angles[1:] + angles[:1]):
            step = (a - b) % (2 * math.pi)
            if step == 0:
                return False
            turn += step
        if abs(turn - 2 * math.pi) > 1e-9:
            return False
    return True


def cycle_reversal_check(G: Digraph, state: SingleChipState) -> ReversalReport:
    """Run the router from a clockwise unicycle until the same cycle appears
    reversed with the chip back at its start, and check which rotors moved."""
    cls = G.classification
    if G.embedding is None or not cls.bidirected or not cls.strongly_connected:
        raise GraphError("needs an embedded, connected bidirected graph")
    if not _is_clockwise_ordered(G):
        raise GraphError("out-edges must be ordered clockwise")
    cert = is_unicycle(G, state)
    if not cert:
        raise RotorError("state is not a unicycle")
    cycle = cert.cycle
    pts = [G.embedding[v] for v in cycle]
    if len(cycle) > 2 and signed_area2(pts) >= 0:
        raise RotorError("the rotor cycle must be oriented clockwise")
    k = len(cycle)
    on_cycle = set(cycle)
    advanced = [0] * G.n
    cur = state
    limit = 4 * G.num_edges * G.n
    for step in range(1, limit + 1):
        advanced[cur.chip] += 1
        cur = rotor_step(G, cur)
        if cur.chip == state.chip and all(
            points_to(G, cur.rotor, cycle[(i + 1) % k]) == cycle[i] for i in range(k)
        ):
            break
    else:
        raise RotorError(f"cycle was not reversed within {limit} steps")
    interior = tuple(v for v in range(G.n) if v not in on_cycle and len(cycle) > 2 and point_in_polygon(G.embedding[v], pts))
    inside = set(interior)
    return ReversalReport(
        steps=step,
        cycle=cycle,
        interior=interior,
        interior_full_turn=all(advanced[v] == G.outdeg[v] for v in interior),
        exterior_unmoved=all(advanced[v] == 0 for v in range(G.n) if v not in inside and v not in on_cycle),
        cycle_partial_turn=all(0 < advanced[v] < G.outdeg[v] for v in cycle) if k > 2 else True,
        final_state=cur,
    )


# --- fixed-step routing -------------------------------------------------------------------


@dataclass(frozen=True)
class NoncommutativityReport:
    graph: Digraph
    rotor: Rotor
    chips: tuple[int, ...]
    steps: int
    first_then_second: tuple[Rotor, tuple[int, ...]]
    second_then_first: tuple[Rotor, tuple[int, ...]]
    run_to_sink_equal: bool

    @property
    def differ(self) -> bool:
        return self.first_then_second != self.second_then_first


def _walk_fixed(G: Digraph, rho: Sequence[int], v: int, steps: int) -> tuple[Rotor, int]:
    rho = list(rho)
    for _ in range(steps):
        if G.outdeg[v] == 0:
            break
        rho[v] = (rho[v] + 1) % G.outdeg[v]
        v = G.out_heads[v][rho[v]]
    return tuple(rho), v


def fixed_step_routing(G: Digraph, rho: Sequence[int], chips: Sequence[int], steps: int):
    """Run each chip ``steps`` steps in the given order; returns (rotor, sorted positions)."""
    ends = []
    for v in chips:
        rho, end = _walk_fixed(G, rho, v, steps)
        ends.append(end)
    return tuple(rho), tuple(sorted(ends))


def noncommutativity_demo(chips: Sequence[int] | None = None) -> NoncommutativityReport:
    """Two chips routed two steps each: order matters.  Run to the sink: it does not.

    Graph: a -> b, b -> {c, s}, c -> s with rotors at their last edges.
    The chip from a arrives at b and takes b's next edge; the chip started
    at b takes the edge after that, so swapping the order swaps who goes
    where and leaves the two chips in different places.
    """
    G = _demo_graph()
    rho = tuple(d - 1 if d else -1 for d in G.outdeg)
    chips = (0, 1) if chips is None else tuple(chips)
    ab = fixed_step_routing(G, rho, chips, 2)
    ba = fixed_step_routing(G, rho, chips[::-1], 2)
    full = []
    for order in (chips, chips[::-1]):
        r = rho
        for v in order:
            r = route_chip(G, r, v)[0]
        full.append(r)
    return NoncommutativityReport(G, rho, chips, 2, ab, ba, full[0] == full[1])


def _demo_graph() -> Digraph:
    # 0=a, 1=b, 2=c, 3=s
    return build_digraph(4, [(0, 1), (1, 2), (1, 3), (2, 0), (2, 3)], sink=3)
