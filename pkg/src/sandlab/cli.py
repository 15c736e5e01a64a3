"""Command-line front end.

Stages talk through bundles on stdin/stdout (see ``formats``), so runs can be
piped::

    sandlab gen grid-wired 128 | sandlab identity | sandlab render --palette grid4 > id.ppm

Every subcommand also accepts ``--in`` and ``--out`` in place of the pipes.
Usage errors exit with status 2, engine errors with status 1.
"""

from __future__ import annotations

import argparse
import os
import sys
import time

from . import checks
from .aggregate import WindowOverflowError, aggregate, is_centered_square
from .figures import identity_with_firings, reproduce_figures
from .formats import Bundle, FormatError, parse_bundle
from .graph import FAMILIES, GraphError, generate, grid_wired
from .intalg import SingularMatrixError
from .oracles import OracleSizeError, enumerate_eulerian_tours, tour_count_formula
from .render import PALETTES, RenderSpec, aggregate_pixels, encode_ppm, render_ppm, scale
from .rotor import (
    RotorError,
    SingleChipState,
    action,
    eulerian_tour,
    hitting_bound_check,
    initial_rotor,
    is_unicycle,
    tree_bijection,
    tree_rotor,
    unicycle_orbit,
)
from .sandpile import (
    Nonterminating,
    NotRecurrentError,
    add,
    canonical_configs,
    group_structure,
    identity,
    inverse,
    is_recurrent,
    stabilize,
    superstabilize,
    unit,
    zero,
)
from .stacks import StackError, pop_to_acyclic, periodic_stacks, stack_chip_add, stack_chip_add_inverse

ENGINE_ERRORS = (
    GraphError,
    Nonterminating,
    NotRecurrentError,
    RotorError,
    StackError,
    SingularMatrixError,
    WindowOverflowError,
    OracleSizeError,
    ValueError,
    OverflowError,
)


class UsageError(Exception):
    pass


# --- io ---------------------------------------------------------------------------


def _read_bundle(args) -> Bundle:
    if args.inp:
        with open(args.inp) as fh:
            text = fh.read()
    else:
        text = sys.stdin.read()
    return parse_bundle(text)


def _write_text(args, text: str) -> None:
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _write_bytes(args, data: bytes) -> None:
    if args.out:
        with open(args.out, "wb") as fh:
            fh.write(data)
    else:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()


def _need(b: Bundle, what: str):
    value = getattr(b, what)
    if value is None:
        raise UsageError(f"input bundle has no {what} block")
    return value


def _step_cap(G):
    if G.classification.has_global_sink:
        return None
    raw = os.environ.get("SANDLAB_MAXSTEPS")
    if raw is None:
        raise GraphError("graph has no global sink; set SANDLAB_MAXSTEPS to bound the run")
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"SANDLAB_MAXSTEPS must be an integer, got {raw!r}") from None


def _parse_int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.replace(",", " ").split()]
    except ValueError:
        raise UsageError(f"expected a list of integers, got {text!r}") from None


# --- subcommands ------------------------------------------------------------------------


def cmd_gen(args):
    try:
        params = [int(x) for x in args.params]
    except ValueError:
        raise UsageError("generator parameters must be integers") from None
    G = generate(args.family, *params)
    b = Bundle(G)
    if args.chips:
        named = canonical_configs(G)
        if args.chips == "zero":
            b.chips = zero(G)
        elif args.chips in named:
            b.chips = named[args.chips]
        else:
            raise UsageError(f"unknown chip preset {args.chips!r}; choose from zero, {', '.join(named)}")
    if args.rotors == "initial":
        b.rotors = initial_rotor(G)
    elif args.rotors == "tree":
        b.rotors = tree_rotor(G, args.root)
    _write_text(args, b.dump())


def cmd_stabilize(args):
    b = _read_bundle(args)
    G = b.graph
    sigma = b.chips if b.chips is not None else zero(G)
    for v, k in args.add or ():
        sigma = add(sigma, unit(G, v, k))
    final, odo = stabilize(G, sigma, policy=args.policy, step_cap=_step_cap(G), seed=args.seed)
    b.chips = final
    if args.odometer:
        print(f"firings {odo.total_firings}", file=sys.stderr)
        print("odometer " + " ".join(map(str, odo.counts)), file=sys.stderr)
    _write_text(args, b.dump())


def cmd_identity(args):
    b = _read_bundle(args)
    t0 = time.perf_counter()
    if args.time:
        b.chips, firings = identity_with_firings(b.graph)
        print(f"identity {time.perf_counter() - t0:.3f}s {firings} firings", file=sys.stderr)
    else:
        b.chips = identity(b.graph)
    _write_text(args, b.dump())


def cmd_inverse(args):
    b = _read_bundle(args)
    b.chips = inverse(b.graph, _need(b, "chips"))
    _write_text(args, b.dump())


def cmd_superstabilize(args):
    b = _read_bundle(args)
    b.chips = superstabilize(b.graph, _need(b, "chips"))
    _write_text(args, b.dump())


def cmd_group(args):
    b = _read_bundle(args)
    gs = group_structure(b.graph)
    factors = [f for f in gs.invariant_factors if f != 1]
    text = " x ".join(f"Z/{f}" for f in factors) if factors else "trivial"
    _write_text(args, f"order {gs.order}\nstructure {text}\n")


def cmd_recurrent(args):
    b = _read_bundle(args)
    ok = is_recurrent(b.graph, _need(b, "chips"), method=args.method)
    _write_text(args, ("recurrent" if ok else "not recurrent") + "\n")
    return 0 if ok or not args.check else 3


def cmd_rotor_orbit(args):
    b = _read_bundle(args)
    G = b.graph
    rho = b.rotors if b.rotors is not None else initial_rotor(G)
    if not 0 <= args.chip < G.n:
        raise UsageError(f"chip vertex {args.chip} out of range")
    state = SingleChipState(args.chip, rho)
    cert = is_unicycle(G, state)
    if not cert:
        raise RotorError("start state is not a unicycle, so it does not lie on a closed orbit")
    orbit = unicycle_orbit(G, state)
    lines = [f"length {len(orbit)}", "cycle " + " ".join(map(str, cert.cycle))]
    if args.states:
        lines += [f"{i} {s.chip} " + " ".join(map(str, s.rotor)) for i, s in enumerate(orbit)]
    _write_text(args, "\n".join(lines) + "\n")


def cmd_tour(args):
    b = _read_bundle(args)
    G = b.graph
    e = args.first_edge
    if not 0 <= e < G.num_edges:
        raise UsageError(f"edge {e} out of range")
    if args.count:
        brute = enumerate_eulerian_tours(G, e).count
        formula = tour_count_formula(G, e)
        _write_text(args, f"tours {brute}\nformula {formula}\n")
        return 0 if brute == formula else 1
    rho = list(_need(b, "rotors"))
    w = G.tail(e)
    rho[w] = (G.slot_of(e) - 1) % G.outdeg[w]
    tour = eulerian_tour(G, SingleChipState(w, tuple(rho)), e)
    _write_text(args, " ".join(map(str, tour)) + "\n")


def cmd_bijection(args):
    b = _read_bundle(args)
    G = b.graph
    rho = _need(b, "rotors")
    if b.chips is not None and not args.list:
        b.rotors = action(G, b.chips, rho)
        _write_text(args, b.dump())
        return 0
    table = tree_bijection(G, rho)
    lines = [" ".join(map(str, s)) + " -> " + " ".join(map(str, r)) for s, r in sorted(table.items())]
    _write_text(args, "\n".join(lines) + "\n")


def cmd_hitting_bound(args):
    b = _read_bundle(args)
    G = b.graph
    Y, Z = _parse_int_list(args.Y), _parse_int_list(args.Z)
    if not set(Y) <= set(Z):
        raise UsageError("Y must be a subset of Z")
    rho = b.rotors if b.rotors is not None else initial_rotor(G)
    res = hitting_bound_check(G, Y, Z, _need(b, "chips"), rho)
    _write_text(
        args,
        f"rotor_hits {res.rotor_hits}\nexpected {res.expected_hits}\n"
        f"lhs {res.lhs}\nrhs {res.rhs}\nholds {'yes' if res.ok else 'no'}\n",
    )
    return 0 if res.ok else 1


def cmd_stacks(args):
    b = _read_bundle(args)
    G = b.graph
    st = b.stacks
    if st is None:
        st = periodic_stacks(G, b.rotors if b.rotors is not None else initial_rotor(G))
    if args.action == "pop":
        st, cycles = pop_to_acyclic(G, st)
        print(f"popped {len(cycles)} cycles", file=sys.stderr)
    elif args.action == "add":
        st, path = stack_chip_add(G, st, _vertex(args, G))
        print("path " + " ".join(map(str, path)), file=sys.stderr)
    elif args.action == "unadd":
        st = stack_chip_add_inverse(G, st, _vertex(args, G))
    b.stacks = st.normalized()
    b.rotors = st.rotor()
    _write_text(args, b.dump())


def _vertex(args, G) -> int:
    if args.vertex is None:
        raise UsageError(f"stacks {args.action} needs --vertex")
    if not 0 <= args.vertex < G.n:
        raise UsageError(f"vertex {args.vertex} out of range")
    return args.vertex


def cmd_aggregate(args):
    if args.n < 0:
        raise UsageError("n must be nonnegative")
    t0 = time.perf_counter()
    res = aggregate(args.n, args.H)
    secs = time.perf_counter() - t0
    box = res.bounding_box()
    lines = [
        f"n {args.n}",
        f"H {args.H}",
        f"fired_sites {res.fired_count}",
        f"firings {res.total_firings}",
        "bounding_box " + (" ".join(map(str, box)) if box else "none"),
        f"square {'yes' if is_centered_square(res) else 'no'}",
        f"seconds {secs:.3f}",
    ]
    if args.ppm:
        with open(args.ppm, "wb") as fh:
            fh.write(encode_ppm(scale(aggregate_pixels(res.heights, res.fired), args.cell)))
    _write_text(args, "\n".join(lines) + "\n")


def cmd_render(args):
    b = _read_bundle(args)
    _write_bytes(args, render_ppm(b.graph, _need(b, "chips"), RenderSpec(args.palette, args.cell)))


def cmd_verify(args):
    results = checks.run_all(args.only or None, log=lambda s: print(s, flush=True))
    bad = [r for r in results if not r.passed]
    print(f"{len(results) - len(bad)}/{len(results)} criteria passed")
    return 1 if bad else 0


def cmd_bench(args):
    if args.figures:
        recs = reproduce_figures(args.figures, large=args.large, only=args.only, log=print)
        if not recs:
            raise UsageError("no figure matched --only")
        return 0
    for L in args.sizes:
        G = grid_wired(L)
        t0 = time.perf_counter()
        _, firings = identity_with_firings(G)
        secs = time.perf_counter() - t0
        print(f"grid_wired({L}) identity\t{secs:.3f}s\t{firings} firings\t{firings / max(secs, 1e-9):.3g}/s")
    return 0


# --- parser ---------------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _pair(text: str) -> tuple[int, int]:
    try:
        v, k = text.split(":") if ":" in text else (text, "1")
        return int(v), int(k)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected V or V:K, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    io = argparse.ArgumentParser(add_help=False)
    io.add_argument("--in", dest="inp", metavar="PATH", help="read the input bundle from PATH instead of stdin")
    io.add_argument("--out", metavar="PATH", help="write to PATH instead of stdout")

    p = _Parser(prog="sandlab", description="Sandpile and rotor-router laboratory.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("gen", parents=[io], help="generate a graph family")
    s.add_argument("family", choices=sorted(FAMILIES))
    s.add_argument("params", nargs="*", help="integer size parameters")
    s.add_argument("--chips", help="attach a chip preset: zero, delta, ones, beta, epsilon")
    s.add_argument("--rotors", choices=["initial", "tree"],
                   help="attach rotors: all on the first edge, or a breadth-first tree towards the sink or --root")
    s.add_argument("--root", type=int, help="tree root for graphs without a sink")
    s.set_defaults(fn=cmd_gen)

    s = sub.add_parser("stabilize", parents=[io], help="stabilize the chip configuration")
    s.add_argument("--policy", default="bulk", choices=["bulk", "fifo", "lifo", "random"])
    s.add_argument("--seed", type=int)
    s.add_argument("--add", type=_pair, action="append", metavar="V[:K]", help="add K chips at V first")
    s.add_argument("--odometer", action="store_true", help="print the odometer on stderr")
    s.set_defaults(fn=cmd_stabilize)

    s = sub.add_parser("identity", parents=[io], help="replace chips with the group identity")
    s.add_argument("--time", action="store_true", help="report time and firings on stderr")
    s.set_defaults(fn=cmd_identity)

    s = sub.add_parser("inverse", parents=[io], help="group inverse of a recurrent configuration")
    s.set_defaults(fn=cmd_inverse)

    s = sub.add_parser("group", parents=[io], help="order and invariant factors of the sandpile group")
    s.set_defaults(fn=cmd_group)

    s = sub.add_parser("recurrent", parents=[io], help="test the chip configuration for recurrence")
    s.add_argument("--method", default="epsilon", choices=["epsilon", "burning", "peeling"])
    s.add_argument("--check", action="store_true", help="exit 3 when not recurrent")
    s.set_defaults(fn=cmd_recurrent)

    s = sub.add_parser("superstabilize", parents=[io], help="superstabilization of the chip configuration")
    s.set_defaults(fn=cmd_superstabilize)

    s = sub.add_parser("rotor-orbit", parents=[io], help="orbit of a single-chip unicycle")
    s.add_argument("--chip", type=int, required=True, help="vertex holding the chip")
    s.add_argument("--states", action="store_true", help="list every state of the orbit")
    s.set_defaults(fn=cmd_rotor_orbit)

    s = sub.add_parser("tour", parents=[io], help="Eulerian tour from a rotor tree, or count tours")
    s.add_argument("first_edge", type=int)
    s.add_argument("--count", action="store_true", help="brute-force count against the product formula")
    s.set_defaults(fn=cmd_tour)

    s = sub.add_parser("bijection", parents=[io], help="act on the rotor tree, or list the whole bijection")
    s.add_argument("--list", action="store_true")
    s.set_defaults(fn=cmd_bijection)

    s = sub.add_parser("hitting-bound", parents=[io], help="rotor hits versus random-walk expectation")
    s.add_argument("--Y", required=True, help="target vertices, comma separated")
    s.add_argument("--Z", required=True, help="stopping vertices (a superset of Y), comma separated")
    s.set_defaults(fn=cmd_hitting_bound)

    s = sub.add_parser("stacks", parents=[io], help="cycle popping and chip addition on stacks")
    s.add_argument("action", choices=["pop", "add", "unadd", "show"])
    s.add_argument("--vertex", type=int)
    s.set_defaults(fn=cmd_stacks)

    s = sub.add_parser("aggregate", parents=[io], help="n chips at the origin of Z^2 over background -H")
    s.add_argument("n", type=int)
    s.add_argument("--H", type=int, default=-2, help="hole depth; the background holds -H chips (default -2)")
    s.add_argument("--ppm", metavar="PATH", help="also write the fired region as an image")
    s.add_argument("--cell", type=int, default=1)
    s.set_defaults(fn=cmd_aggregate)

    s = sub.add_parser("render", parents=[io], help="write the chip configuration as a binary PPM")
    s.add_argument("--palette", default="grid4", choices=sorted(PALETTES))
    s.add_argument("--cell", type=int, default=1, help="pixels per vertex")
    s.set_defaults(fn=cmd_render)

    s = sub.add_parser("verify", help="run the acceptance property suite")
    s.add_argument("--only", type=int, nargs="*", help="criterion numbers to run")
    s.set_defaults(fn=cmd_verify)

    s = sub.add_parser("bench", help="time identity computations or reproduce the figure set")
    s.add_argument("--sizes", type=int, nargs="*", default=[64, 128, 198])
    s.add_argument("--figures", metavar="DIR", help="write every figure into DIR with a bench.log")
    s.add_argument("--large", action="store_true", help="include the large figure sizes")
    s.add_argument("--only", nargs="*", help="figure names to produce")
    s.set_defaults(fn=cmd_bench)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        code = args.fn(args)
    except UsageError as exc:
        print(f"sandlab: usage error: {exc}", file=sys.stderr)
        return 2
    except FormatError as exc:
        print(f"sandlab: bad input: {exc}", file=sys.stderr)
        return 1
    except ENGINE_ERRORS as exc:
        print(f"sandlab: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except BrokenPipeError:
        return 1
    return code or 0


if __name__ == "__main__":
    sys.exit(main())
