import random
from fractions import Fraction

import pytest

from sandlab import randgraphs
from sandlab.graph import build_digraph, complete, disk_wired, grid_wired, path_bidirected
from sandlab.sandpile import (
    Nonterminating,
    NotRecurrentError,
    allowed_clusters,
    burning_config,
    chip_add,
    delta,
    epsilon,
    equivalent_mod_laplacian,
    fire,
    group_add,
    group_order,
    group_structure,
    harmonic_rep,
    identity,
    inverse,
    is_recurrent,
    is_superstable,
    move_bound_check,
    recurrent_configs,
    recurrent_representative,
    stabilize,
    superstabilize,
    unit,
    zero,
)


def pair_with_sink():
    return build_digraph(3, [(0, 1), (0, 2), (1, 0), (1, 2)], sink=2)


def star(k):
    return build_digraph(2, [(0, 1)] * k, sink=1)


def test_fire_complete_three():
    assert fire(complete(3), (3, 0, 0), 0) == (1, 1, 1)


def test_fire_sends_one_chip_to_sink():
    # chips reaching the sink leave the configuration
    assert fire(pair_with_sink(), (0, 2, 0), 1) == (1, 0, 0)


def test_fire_self_loop_only():
    G = build_digraph(2, [(0, 0)])
    assert fire(G, (1, 0), 0) == (1, 0)


def test_stabilize_complete_three():
    final, odo = stabilize(complete(3), (3, 0, 0), step_cap=100)
    assert final == (1, 1, 1) and odo.counts == (1, 0, 0)


@pytest.mark.parametrize("policy", ["bulk", "fifo", "lifo", "random"])
def test_stabilize_complete_three_nonterminating(policy):
    with pytest.raises(Nonterminating):
        stabilize(complete(3), (4, 0, 0), policy=policy, step_cap=10**6, seed=1)


def test_stabilize_pair_with_sink():
    final, odo = stabilize(pair_with_sink(), (2, 2, 0))
    assert final[:2] == (1, 1) and odo.counts[:2] == (1, 1)


def test_sink_free_needs_cap():
    with pytest.raises(ValueError):
        stabilize(complete(3), (1, 0, 0))


def test_policies_agree():
    rng = random.Random(0)
    for _ in range(30):
        G = randgraphs.multidigraph_with_sink(rng)
        s = randgraphs.config(rng, G, 20)
        ref = stabilize(G, s, "fifo")
        for pol in ("bulk", "lifo", "random"):
            assert stabilize(G, s, pol, seed=rng.random()) == ref


def test_compiled_paths_match_python():
    # lattice sweep
    for G in (grid_wired(15), disk_wired(17)):
        s = tuple(0 if v == G.sink else 7 for v in range(G.n))
        assert stabilize(G, s, "bulk") == stabilize(G, s, "fifo")
    # generic CSR kernel on a non-lattice graph
    rng = random.Random(5)
    n = 260
    edges = [(v, rng.randrange(n)) for v in range(n - 1) for _ in range(3)] + [(v, n - 1) for v in range(n - 1)]
    G = build_digraph(n, edges, sink=n - 1)
    s = tuple(0 if v == n - 1 else rng.randrange(12) for v in range(n))
    assert stabilize(G, s, "bulk") == stabilize(G, s, "fifo")


def test_compiled_step_cap():
    n = 300
    ring = build_digraph(n, [(v, (v + s) % n) for v in range(n) for s in (1, -1)])
    final, odo = stabilize(ring, unit(ring, 0, 3), step_cap=50)
    assert odo.total_firings == 1 and final[0] == 1
    # 2n chips on 2n edges can never settle
    with pytest.raises(Nonterminating):
        stabilize(ring, (2,) * n, step_cap=5000)


def test_chip_add_pair_with_sink():
    assert chip_add(pair_with_sink(), (1, 1, 0), 0) == (1, 0, 0)


def test_chip_add_on_zero():
    G = grid_wired(3)
    assert chip_add(G, zero(G), 4) == unit(G, 4)


def test_chip_addition_commutes():
    rng = random.Random(1)
    for _ in range(50):
        G = randgraphs.multidigraph_with_sink(rng)
        s = randgraphs.stable_config(rng, G)
        v, w = rng.choice(G.non_sink), rng.choice(G.non_sink)
        assert chip_add(G, chip_add(G, s, v), w) == chip_add(G, chip_add(G, s, w), v)


def test_canonical_configs_pair_with_sink():
    G = pair_with_sink()
    assert burning_config(G) == (1, 1, 0)
    assert epsilon(G) == (3, 3, 0)
    assert delta(G)[G.sink] == 0


def test_recurrence_pair_with_sink():
    G = pair_with_sink()
    for method in ("epsilon", "burning", "peeling"):
        assert is_recurrent(G, (1, 1, 0), method)
        assert not is_recurrent(G, (0, 0, 0), method)
    assert set(recurrent_configs(G)) == {(1, 1, 0), (0, 1, 0), (1, 0, 0)}


def test_single_vertex_all_recurrent():
    G = star(4)
    assert all(is_recurrent(G, (k, 0)) for k in range(4))
    assert identity(G) == (0, 0)


def test_identity_pair_with_sink_and_grid():
    assert identity(pair_with_sink()) == (1, 1, 0)
    assert identity(grid_wired(3)) == (2, 1, 2, 1, 0, 1, 2, 1, 2, 0)


def test_inverse():
    G = pair_with_sink()
    assert inverse(G, (1, 1, 0)) == (1, 1, 0)
    assert inverse(G, (0, 1, 0)) == (1, 0, 0)
    with pytest.raises(NotRecurrentError):
        inverse(G, (0, 0, 0))


def test_inverse_grid_random():
    G = grid_wired(4)
    rng = random.Random(2)
    ident = identity(G)
    for _ in range(5):
        s = recurrent_representative(G, randgraphs.config(rng, G, 6))
        assert group_add(G, s, inverse(G, s)) == ident


def test_group_pair_with_sink():
    G = pair_with_sink()
    assert group_order(G) == 3
    assert group_structure(G).invariant_factors == (3,)


def test_identity_law_small_graphs():
    rng = random.Random(3)
    for _ in range(10):
        G = randgraphs.multidigraph_with_sink(rng, n_max=5)
        I = identity(G)
        recs = recurrent_configs(G)
        assert len(recs) == group_order(G)
        assert all(group_add(G, s, I) == s for s in recs)


def test_equivalence_and_representative():
    G = pair_with_sink()
    assert equivalent_mod_laplacian(G, (0, 0, 0), (1, 1, 0))
    assert not equivalent_mod_laplacian(G, (0, 0, 0), (0, 1, 0))
    assert recurrent_representative(G, (0, 0, 0)) == (1, 1, 0)


def test_harmonic_pair_with_sink():
    G = pair_with_sink()
    got = {tuple(harmonic_rep(G, s).values()) for s in recurrent_configs(G)}
    third = Fraction(1, 3)
    assert got == {(0, 0), (third, 2 * third), (2 * third, third)}


def test_harmonic_is_additive():
    G = grid_wired(3)
    rng = random.Random(4)
    for _ in range(5):
        a, b = (recurrent_representative(G, randgraphs.config(rng, G, 5)) for _ in range(2))
        fa, fb, fab = harmonic_rep(G, a), harmonic_rep(G, b), harmonic_rep(G, group_add(G, a, b))
        assert all((fa[v] + fb[v] - fab[v]).denominator == 1 for v in fab)


def test_superstable_pair_with_sink():
    G = pair_with_sink()
    sup = {s for s in [(0, 0, 0), (0, 1, 0), (1, 0, 0), (1, 1, 0)] if is_superstable(G, s)}
    assert sup == {(0, 0, 0), (0, 1, 0), (1, 0, 0)}
    assert superstabilize(G, (2, 2, 0)) == (0, 0, 0)
    assert allowed_clusters(G, (1, 1, 0))


def test_zero_is_superstable():
    G = grid_wired(3)
    assert is_superstable(G, zero(G))


def test_move_bound():
    P = path_bidirected(2)
    r = move_bound_check(P, (7, 0))
    assert r.moves == 7 and r.bound == 14 and r.ok
    assert move_bound_check(P, (0, 0)).moves == 0
    G = grid_wired(8)
    assert move_bound_check(G, unit(G, 27, 500)).ok
