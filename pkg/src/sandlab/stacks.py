"""Periodic bi-infinite rotor stacks and cycle popping.

Stack k at vertex v is ``base[v][(offset[v] + k) % len(base[v])]``, an index
into ``G.out_order[v]``.  Position 0 is the current rotor.  A chip at v pops
the stack (offset + 1) and leaves along the new top.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Sequence

from .graph import Digraph, GraphError

POP_LIMIT = 1_000_000


@dataclass(frozen=True, eq=False)
class StackConfig:
    """Equality compares the bi-infinite stacks, i.e. offsets modulo each period."""

    base: tuple[tuple[int, ...], ...]
    offset: tuple[int, ...]

    def _key(self):
        return self.base, tuple(o % len(b) if b else 0 for o, b in zip(self.offset, self.base))

    def __eq__(self, other):
        return isinstance(other, StackConfig) and self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def top(self, v: int, k: int = 0) -> int:
        b = self.base[v]
        return b[(self.offset[v] + k) % len(b)]

    def rotor(self) -> tuple[int, ...]:
        """The rotor configuration formed by position 0 of every stack (-1 at sinks)."""
        return tuple(self.top(v) if b else -1 for v, b in enumerate(self.base))

    def shifted(self, v: int, by: int) -> StackConfig:
        off = list(self.offset)
        off[v] += by
        return StackConfig(self.base, tuple(off))

    def normalized(self) -> StackConfig:
        """Same stacks with offsets reduced modulo each period."""
        return StackConfig(self.base, tuple(o % len(b) if b else 0 for o, b in zip(self.offset, self.base)))


class StackError(ValueError):
    pass


def make_stacks(G: Digraph, base: Sequence[Sequence[int]], offset: Sequence[int]) -> StackConfig:
    """Validate a periodic stack configuration; every out-edge must occur in its period."""
    if len(base) != G.n or len(offset) != G.n:
        raise StackError("need one stack per vertex")
    bases = []
    for v, b in enumerate(base):
        b = tuple(int(x) for x in b)
        d = G.outdeg[v]
        if d == 0:
            if b:
                raise StackError(f"sink {v} cannot carry a stack")
        elif set(b) != set(range(d)) or any(not 0 <= x < d for x in b):
            raise StackError(f"stack at {v} must contain every out-edge index 0..{d - 1}")
        bases.append(b)
    return StackConfig(tuple(bases), tuple(int(o) for o in offset))


def periodic_stacks(G: Digraph, rho: Sequence[int]) -> StackConfig:
    """Ordinary rotors: base = cyclic order, offset = current rotor."""
    return StackConfig(tuple(tuple(range(d)) for d in G.outdeg), tuple(max(r, 0) for r in rho))


def pop(rho: StackConfig, v: int) -> StackConfig:
    return rho.shifted(v, 1)


def reverse_pop(rho: StackConfig, v: int) -> StackConfig:
    return rho.shifted(v, -1)


def _next_vertex(G: Digraph, rho: StackConfig, v: int) -> int:
    return G.out_heads[v][rho.top(v)]


def is_rotor_cycle(G: Digraph, rho: StackConfig, cycle: Sequence[int]) -> bool:
    k = len(cycle)
    if k == 0 or len(set(cycle)) != k:
        return False
    for i, v in enumerate(cycle):
        if G.outdeg[v] == 0 or _next_vertex(G, rho, v) != cycle[(i + 1) % k]:
            return False
    return True


def cycle_pop(G: Digraph, rho: StackConfig, cycle: Sequence[int]) -> StackConfig:
    """Reverse pop every stack on ``cycle`` if it is a cycle of the top rotors, else no-op."""
    if not is_rotor_cycle(G, rho, cycle):
        return rho
    off = list(rho.offset)
    for v in cycle:
        off[v] -= 1
    return StackConfig(rho.base, tuple(off))


def find_cycle(G: Digraph, rho: StackConfig, start: int) -> list[int] | None:
    """Follow top rotors from ``start``; the cycle reached, or None if a sink is reached."""
    seen: dict[int, int] = {}
    path = []
    v = start
    while G.outdeg[v] > 0 and v not in seen:
        seen[v] = len(path)
        path.append(v)
        v = _next_vertex(G, rho, v)
    if G.outdeg[v] == 0:
        return None
    return path[seen[v]:]


def pop_to_acyclic(G: Digraph, rho: StackConfig, seed: int | None = None) -> tuple[StackConfig, list[tuple[int, ...]]]:
    """Pop rotor cycles until the top rotors are acyclic.

    Default selection follows the top rotors from the lowest-indexed vertex
    still on a cycle; with ``seed`` the start vertex is chosen at random.
    The final configuration does not depend on the choice.
    """
    if not G.classification.has_global_sink:
        raise GraphError("cycle popping needs a global sink")
    rng = random.Random(seed) if seed is not None else None
    popped: list[tuple[int, ...]] = []
    verts = list(G.non_sink)
    for _ in range(POP_LIMIT):
        order = verts if rng is None else rng.sample(verts, len(verts))
        cycle = None
        for v in order:
            cycle = find_cycle(G, rho, v)
            if cycle:
                break
        if not cycle:
            return rho, popped
        rho = cycle_pop(G, rho, cycle)
        popped.append(tuple(cycle))
    raise AssertionError(f"cycle popping did not terminate within {POP_LIMIT} pops")


def is_acyclic(G: Digraph, rho: StackConfig) -> bool:
    return all(find_cycle(G, rho, v) is None for v in G.non_sink)


def stack_chip_add(G: Digraph, rho: StackConfig, v: int, max_steps: int = 10_000_000) -> tuple[StackConfig, list[int]]:
    """E_v on stacks: walk a chip from v to the sink.  Returns (stacks, vertex path)."""
    off = list(rho.offset)
    path = [v]
    for _ in range(max_steps):
        if G.outdeg[v] == 0:
            return StackConfig(rho.base, tuple(off)), path
        off[v] += 1
        b = rho.base[v]
        v = G.out_heads[v][b[off[v] % len(b)]]
        path.append(v)
    raise StackError(f"chip did not reach a sink within {max_steps} steps")


def stack_chip_add_inverse(G: Digraph, rho: StackConfig, v: int) -> StackConfig:
    """An acyclic rho' with E_v rho' = rho: reverse pop along the rotor path from v,
    then pop cycles."""
    if not is_acyclic(G, rho):
        raise StackError("inverse chip addition needs acyclic top rotors")
    u = v
    while G.outdeg[u] > 0:
        nxt = _next_vertex(G, rho, u)
        rho = reverse_pop(rho, u)
        u = nxt
    return pop_to_acyclic(G, rho)[0]


def loop_erase(path: Sequence[int]) -> list[int]:
    """Chronological loop erasure: a revisit deletes everything since the last visit."""
    out: list[int] = []
    where: dict[int, int] = {}
    for v in path:
        if v in where:
            cut = where[v]
            for u in out[cut + 1:]:
                del where[u]
            del out[cut + 1:]
        else:
            where[v] = len(out)
            out.append(v)
    return out


def rotor_path(G: Digraph, rho: StackConfig, v: int) -> list[int]:
    """Vertices visited following top rotors from v to the sink."""
    path = [v]
    while G.outdeg[v] > 0:
        v = _next_vertex(G, rho, v)
        path.append(v)
        if len(path) > G.n + 1:
            raise StackError("top rotors contain a cycle")
    return path
