import itertools
import random

import pytest

from sandlab import randgraphs
from sandlab.graph import GraphError, bidirected, bidirected_grid, build_digraph, directed_cycle
from sandlab.intalg import determinant
from sandlab.graph import reduced_laplacian
from sandlab.rotor import (
    RotorError,
    SingleChipState,
    acyclic_configs,
    action,
    chip_add_rotor,
    cycle_reversal_check,
    eulerian_tour,
    hitting_bound_check,
    hitting_probabilities,
    is_acyclic,
    is_unicycle,
    noncommutativity_demo,
    rotor_step,
    rotor_step_inverse,
    tree_action_solve,
    tree_bijection,
    tree_rotor,
    unicycle_orbit,
)
from sandlab.sandpile import add, identity, recurrent_configs, zero


def pair_with_sink():
    return build_digraph(3, [(0, 1), (0, 2), (1, 0), (1, 2)], sink=2)


def k2():
    return bidirected(2, [(0, 1)])


def test_step_on_directed_cycle():
    C = directed_cycle(3)
    s = rotor_step(C, SingleChipState(0, (0, 0, 0)))
    assert s == SingleChipState(1, (0, 0, 0))
    assert rotor_step_inverse(C, s) == SingleChipState(0, (0, 0, 0))


def test_step_on_k2():
    s = rotor_step(k2(), SingleChipState(0, (0, 0)))
    assert s == SingleChipState(1, (0, 0))


def test_unicycle_detection():
    C = directed_cycle(3)
    cert = is_unicycle(C, SingleChipState(2, (0, 0, 0)))
    assert cert and sorted(cert.cycle) == [0, 1, 2]
    # two 2-cycles
    G = bidirected(4, [(0, 1), (2, 3), (1, 2)])
    two = [G.out_heads[0].index(1), G.out_heads[1].index(0), G.out_heads[2].index(3), G.out_heads[3].index(2)]
    assert not is_unicycle(G, SingleChipState(0, tuple(two)))
    # chip off the cycle
    one = [G.out_heads[0].index(1), G.out_heads[1].index(0), G.out_heads[2].index(1), G.out_heads[3].index(2)]
    assert is_unicycle(G, SingleChipState(0, tuple(one)))
    assert not is_unicycle(G, SingleChipState(3, tuple(one)))


def test_step_inverse_round_trip():
    rng = random.Random(0)
    for _ in range(100):
        G = randgraphs.strongly_connected(rng)
        root = rng.randrange(G.n)
        s = SingleChipState(root, tree_rotor(G, root))
        for _ in range(rng.randrange(20)):
            s = rotor_step(G, s)
        assert is_unicycle(G, s)
        assert rotor_step_inverse(G, rotor_step(G, s)) == s
        assert rotor_step(G, rotor_step_inverse(G, s)) == s


@pytest.mark.parametrize("G,chip,length", [(directed_cycle(3), 0, 3), (k2(), 0, 2)])
def test_orbit_lengths(G, chip, length):
    assert len(unicycle_orbit(G, SingleChipState(chip, tree_rotor(G, chip)))) == length


def test_grid_orbit_is_34():
    G = bidirected_grid(3, 4)
    orbit = unicycle_orbit(G, SingleChipState(0, tree_rotor(G, 0)))
    assert len(orbit) == 34 == G.num_edges


def test_chip_addition_on_path_is_trivial():
    G = build_digraph(2, [(0, 1)], sink=1)
    assert chip_add_rotor(G, (0, -1), 0) == (0, -1)


def test_pair_with_sink_chip_addition_keeps_acyclic():
    G = pair_with_sink()
    for rho in acyclic_configs(G):
        for v in (0, 1):
            assert is_acyclic(G, chip_add_rotor(G, rho, v))


def test_rotor_chip_addition_commutes():
    rng = random.Random(1)
    for _ in range(100):
        G = randgraphs.multidigraph_with_sink(rng)
        rho = randgraphs.rotor(rng, G)
        v, w = rng.choice(G.non_sink), rng.choice(G.non_sink)
        assert chip_add_rotor(G, chip_add_rotor(G, rho, v), w) == chip_add_rotor(G, chip_add_rotor(G, rho, w), v)


def test_action_laws():
    G = pair_with_sink()
    I = identity(G)
    for rho in acyclic_configs(G):
        assert action(G, zero(G), rho) == rho
        assert action(G, I, rho) == rho
        for a, b in itertools.product(recurrent_configs(G), repeat=2):
            assert action(G, add(a, b), rho) == action(G, b, action(G, a, rho))


def test_tree_action_solve_pair_with_sink():
    G = pair_with_sink()
    trees = acyclic_configs(G)
    assert len(trees) == 3
    for r1, r2 in itertools.product(trees, repeat=2):
        s = tree_action_solve(G, r1, r2)
        assert action(G, s, r1) == r2
        if r1 == r2:
            assert s == identity(G)


def test_tree_bijection_size():
    from sandlab.graph import grid_wired

    G = grid_wired(2)
    base = tree_rotor(G)
    table = tree_bijection(G, base)
    assert len(set(table.values())) == len(table) == determinant(reduced_laplacian(G))
    assert table[identity(G)] == base


def test_tree_action_solve_rejects_cycles():
    G = pair_with_sink()
    cyc = (0, 0, -1)  # 0 -> 1 -> 0
    with pytest.raises(RotorError):
        tree_action_solve(G, cyc, acyclic_configs(G)[0])


def test_eulerian_tours():
    C = directed_cycle(3)
    assert eulerian_tour(C, SingleChipState(0, (0, 0, 0)), 0) == [0, 1, 2]
    G = bidirected_grid(3, 4)
    e = G.out_order[0][0]
    rho = list(tree_rotor(G, 0))
    rho[0] = (G.slot_of(e) - 1) % G.outdeg[0]
    tour = eulerian_tour(G, SingleChipState(0, tuple(rho)), e)
    assert len(tour) == 34 and len(set(tour)) == 34


def test_tour_needs_eulerian():
    with pytest.raises(GraphError):
        eulerian_tour(pair_with_sink(), SingleChipState(0, (0, 0, -1)), 0)


def test_hitting_probabilities_path():
    P = bidirected(3, [(0, 1), (1, 2)])
    h = hitting_probabilities(P, {0}, {0, 2})
    assert h[1] == pytest.approx(0.5) and h[1].denominator == 2


def test_hitting_bound_trivial_and_path():
    P = bidirected(3, [(0, 1), (1, 2)])
    r = hitting_bound_check(P, {0, 2}, {0, 2}, (0, 3, 0), tree_rotor(P, 0))
    assert r.lhs == 0 and r.ok
    r = hitting_bound_check(P, {0}, {0, 2}, (0, 1, 0), tree_rotor(P, 0))
    assert r.ok and abs(r.rotor_hits - 0.5) <= 2


def test_cycle_reversal_unit_square():
    G = bidirected_grid(2, 2)
    found = 0
    for rho in itertools.product(*(range(d) for d in G.outdeg)):
        s = SingleChipState(0, rho)
        cert = is_unicycle(G, s)
        if not cert or len(cert.cycle) != 4:
            continue
        try:
            rep = cycle_reversal_check(G, s)
        except RotorError:
            continue  # counter-clockwise cycle
        assert rep.ok
        found += 1
    assert found


def test_noncommutativity():
    rep = noncommutativity_demo()
    assert rep.differ
    assert rep.run_to_sink_equal
    zero_rep = noncommutativity_demo(chips=())
    assert not zero_rep.differ
