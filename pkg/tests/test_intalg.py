from fractions import Fraction

import pytest

from sandlab.graph import build_digraph, grid_wired, path_bidirected, reduced_laplacian
from sandlab.intalg import (
    SingularMatrixError,
    determinant,
    effective_resistance,
    max_resistance,
    smith_normal_form,
    solve_rational,
)


def test_determinant_small():
    assert determinant([[2, -1], [-1, 2]]) == 3
    assert determinant([[7]]) == 7
    assert determinant([]) == 1


def test_determinant_unreachable_sink_is_zero():
    G = build_digraph(3, [(0, 1), (1, 0)], sink=2)
    assert determinant(reduced_laplacian(G)) == 0


def test_determinant_needs_pivoting():
    assert determinant([[0, 1], [1, 0]]) == -1
    assert determinant([[0, 2, 1], [1, 0, 0], [0, 1, 3]]) == -5


def test_smith_pair_with_sink():
    s = smith_normal_form([[2, -1], [-1, 2]])
    assert s.order == 3 and s.invariant_factors == (3,)


def test_smith_identity_is_trivial():
    s = smith_normal_form([[1, 0], [0, 1]])
    assert s.order == 1 and s.invariant_factors == ()


def test_smith_grid_factors_multiply_to_det():
    M = reduced_laplacian(grid_wired(2))
    s = smith_normal_form(M)
    prod = 1
    for f in s.invariant_factors:
        prod *= f
    assert prod == s.order == determinant(M) == 192
    assert all(b % a == 0 for a, b in zip(s.invariant_factors, s.invariant_factors[1:]))


def test_grid_three_group():
    s = smith_normal_form(reduced_laplacian(grid_wired(3)))
    assert s.invariant_factors == (4, 112, 224)


def test_solve_rational():
    assert solve_rational([[2, -1], [-1, 2]], [1, 0]) == [Fraction(2, 3), Fraction(1, 3)]
    assert solve_rational([[1, 0], [0, 1]], [5, -2]) == [5, -2]


def test_solve_singular():
    with pytest.raises(SingularMatrixError):
        solve_rational([[1, 2], [2, 4]], [1, 1])


def test_resistance_series_and_parallel():
    assert effective_resistance(path_bidirected(2), 0) == 1
    par = build_digraph(2, [(0, 1), (0, 1)], sink=1)
    assert effective_resistance(par, 0) == Fraction(1, 2)
    P = path_bidirected(3)
    far = max(range(P.n), key=lambda v: effective_resistance(P, v) if v != P.sink else -1)
    assert effective_resistance(P, far) == 2
    assert max_resistance(P) == 2
