import pytest

from sandlab.graph import GraphError, bidirected, build_digraph, complete, directed_cycle, grid_wired, reduced_laplacian
from sandlab.intalg import determinant
from sandlab.oracles import (
    OracleSizeError,
    enumerate_eulerian_tours,
    enumerate_spanning_trees,
    recurrent_set_oracle,
    superstable_set_oracle,
    tour_count_formula,
)
from sandlab.sandpile import recurrent_configs


def pair_with_sink():
    return build_digraph(3, [(0, 1), (0, 2), (1, 0), (1, 2)], sink=2)


def test_tree_counts():
    assert enumerate_spanning_trees(pair_with_sink()).count == 3
    for root in range(3):
        assert enumerate_spanning_trees(directed_cycle(3), root).count == 1
        assert enumerate_spanning_trees(complete(3), root).count == 3


def test_trees_are_oriented_trees():
    G = pair_with_sink()
    for tree in enumerate_spanning_trees(G).items:
        tails = sorted(G.tail(e) for e in tree)
        assert tails == [0, 1]


def test_tree_count_grid_three():
    G = grid_wired(3)
    assert enumerate_spanning_trees(G).count == determinant(reduced_laplacian(G)) == 100352


def test_tree_size_guard():
    with pytest.raises(OracleSizeError):
        enumerate_spanning_trees(grid_wired(4))


def test_tour_counts():
    C = directed_cycle(3)
    assert enumerate_eulerian_tours(C, 0).count == 1 == tour_count_formula(C, 0)
    K3 = complete(3)
    for e in range(K3.num_edges):
        assert enumerate_eulerian_tours(K3, e).count == 3 == tour_count_formula(K3, e)


def test_tours_need_eulerian():
    P = bidirected(3, [(0, 1), (1, 2)])
    P2 = build_digraph(3, [(0, 1), (1, 2), (2, 1)])
    with pytest.raises(GraphError):
        enumerate_eulerian_tours(P2, 0)
    assert enumerate_eulerian_tours(P, 0).count == tour_count_formula(P, 0)


def test_recurrent_oracle():
    G = pair_with_sink()
    assert recurrent_set_oracle(G) == {(1, 1, 0), (0, 1, 0), (1, 0, 0)}
    star = build_digraph(2, [(0, 1)] * 3, sink=1)
    assert recurrent_set_oracle(star) == {(0, 0), (1, 0), (2, 0)}
    G = grid_wired(2)
    assert recurrent_set_oracle(G) == set(recurrent_configs(G))
    assert len(recurrent_set_oracle(G)) == determinant(reduced_laplacian(G))


def test_superstable_oracle():
    G = pair_with_sink()
    assert superstable_set_oracle(G) == {(0, 0, 0), (0, 1, 0), (1, 0, 0)}
    G = grid_wired(2)
    sup = superstable_set_oracle(G)
    assert (0,) * G.n in sup
    dual = {tuple(0 if v == G.sink else G.outdeg[v] - 1 - s[v] for v in range(G.n)) for s in recurrent_set_oracle(G)}
    assert sup == dual
