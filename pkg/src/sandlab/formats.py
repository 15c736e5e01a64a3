"""Text formats for chip, rotor and stack configurations, and pipeline bundles.

A bundle is a ``sandgraph v1`` block optionally followed by configuration
blocks (``chips v1``, ``rotors v1``, ``stacks v1``).  CLI stages read a
bundle on stdin and write one on stdout.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .graph import Digraph, GraphError, parse_graph, serialize_graph
from .stacks import StackConfig, make_stacks

HEADERS = ("sandgraph v1", "chips v1", "rotors v1", "stacks v1")


class FormatError(GraphError):
    pass


def _body_ints(text: str, what: str) -> list[int]:
    words = []
    for raw in text.splitlines():
        words.extend(raw.split("#", 1)[0].split())
    try:
        return [int(w) for w in words]
    except ValueError:
        raise FormatError(f"{what}: expected integers") from None


def _strip_header(text: str, header: str) -> str:
    lines = text.splitlines()
    first = next((i for i, l in enumerate(lines) if l.split("#", 1)[0].strip()), None)
    if first is None or lines[first].split("#", 1)[0].strip() != header:
        raise FormatError(f"expected header {header!r}")
    return "\n".join(lines[first + 1:])


# --- chips v1 ---


def serialize_chips(sigma) -> str:
    return "chips v1\n" + " ".join(str(int(x)) for x in sigma) + "\n"


def parse_chips(text: str, G: Digraph | None = None) -> tuple[int, ...]:
    values = _body_ints(_strip_header(text, "chips v1"), "chips v1")
    if any(x < 0 for x in values):
        raise FormatError("chip counts must be nonnegative")
    if G is not None:
        if len(values) != G.n:
            raise FormatError(f"chips v1 has {len(values)} entries, graph has {G.n} vertices")
        if G.sink is not None and values[G.sink] != 0:
            raise FormatError("sink entry must be 0")
    return tuple(values)


# --- rotors v1: one out_order index per non-sink vertex, ascending ---


def serialize_rotors(G: Digraph, rho) -> str:
    return "rotors v1\n" + " ".join(str(int(rho[v])) for v in range(G.n) if G.outdeg[v] > 0) + "\n"


def parse_rotors(text: str, G: Digraph) -> tuple[int, ...]:
    values = _body_ints(_strip_header(text, "rotors v1"), "rotors v1")
    active = [v for v in range(G.n) if G.outdeg[v] > 0]
    if len(values) != len(active):
        raise FormatError(f"rotors v1 has {len(values)} entries, graph has {len(active)} non-sink vertices")
    rho = [-1] * G.n
    for v, r in zip(active, values):
        if not 0 <= r < G.outdeg[v]:
            raise FormatError(f"rotor index {r} out of range at vertex {v}")
        rho[v] = r
    return tuple(rho)


# --- stacks v1: "stack <v> <offset> <e_1> ... <e_L>" ---


def serialize_stacks(rho: StackConfig) -> str:
    out = ["stacks v1"]
    for v, b in enumerate(rho.base):
        if b:
            out.append(f"stack {v} {rho.offset[v]} " + " ".join(map(str, b)))
    return "\n".join(out) + "\n"


def parse_stacks(text: str, G: Digraph) -> StackConfig:
    base: list[tuple[int, ...]] = [()] * G.n
    offset = [0] * G.n
    for lineno, raw in enumerate(_strip_header(text, "stacks v1").splitlines(), 2):
        words = raw.split("#", 1)[0].split()
        if not words:
            continue
        if words[0] != "stack" or len(words) < 4:
            raise FormatError(f"stacks v1 line {lineno}: expected 'stack <v> <offset> <e_1> ...'")
        try:
            v, off, *seq = (int(w) for w in words[1:])
        except ValueError:
            raise FormatError(f"stacks v1 line {lineno}: expected integers") from None
        if not 0 <= v < G.n:
            raise FormatError(f"stacks v1 line {lineno}: vertex {v} out of range")
        base[v] = tuple(seq)
        offset[v] = off
    missing = [v for v in range(G.n) if G.outdeg[v] > 0 and not base[v]]
    if missing:
        raise FormatError(f"stacks v1: no stack for vertices {missing}")
    return make_stacks(G, base, offset)


# --- bundles ---


@dataclass
class Bundle:
    graph: Digraph
    chips: tuple[int, ...] | None = None
    rotors: tuple[int, ...] | None = None
    stacks: StackConfig | None = None
    extra: list[str] = field(default_factory=list)

    def dump(self) -> str:
        parts = [serialize_graph(self.graph)]
        if self.chips is not None:
            parts.append(serialize_chips(self.chips))
        if self.rotors is not None:
            parts.append(serialize_rotors(self.graph, self.rotors))
        if self.stacks is not None:
            parts.append(serialize_stacks(self.stacks))
        return "".join(parts)


def split_blocks(text: str) -> list[tuple[str, str]]:
    """Cut text at header lines; returns (header, block text) pairs."""
    blocks: list[tuple[str, list[str]]] = []
    for line in text.splitlines():
        key = line.split("#", 1)[0].strip()
        if key in HEADERS:
            blocks.append((key, [line]))
        elif blocks:
            blocks[-1][1].append(line)
        elif key:
            raise FormatError(f"unexpected content before any header: {line!r}")
    return [(h, "\n".join(lines) + "\n") for h, lines in blocks]


def parse_bundle(text: str) -> Bundle:
    blocks = split_blocks(text)
    if not blocks or blocks[0][0] != "sandgraph v1":
        raise FormatError("input must start with a sandgraph v1 block")
    b = Bundle(parse_graph(blocks[0][1]))
    for header, body in blocks[1:]:
        if header == "chips v1":
            b.chips = parse_chips(body, b.graph)
        elif header == "rotors v1":
            b.rotors = parse_rotors(body, b.graph)
        elif header == "stacks v1":
            b.stacks = parse_stacks(body, b.graph)
        else:
            raise FormatError("only one sandgraph block per bundle")
    return b
