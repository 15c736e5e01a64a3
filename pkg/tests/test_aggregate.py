import numpy as np
import pytest

from sandlab.aggregate import (
    WindowOverflowError,
    aggregate,
    contains_ball,
    inner_ball_radius,
    is_centered_square,
)
from sandlab.graph import grid_wired
from sandlab.sandpile import stabilize


def test_empty():
    res = aggregate(0, -2)
    assert res.fired_count == 0 and res.bounding_box() is None and is_centered_square(res)


def test_square_ten_thousand():
    res = aggregate(10_000, -2)
    assert is_centered_square(res)
    assert res.bounding_box() == (-77, 77, -77, 77)
    assert res.fired_count == 155 * 155
    assert res.total_firings == 11_579_480


@pytest.mark.parametrize("n,H", [(60, 0), (45, -1), (300, 0), (30, -2)])
def test_matches_finite_grid(n, H):
    # a wired grid large enough that no chip reaches the sink behaves like Z^2
    L = 41
    G = grid_wired(L)
    c = L // 2
    sigma = [0 if v == G.sink else -H for v in range(G.n)]
    sigma[c * L + c] += n
    final, odo = stabilize(G, sigma)
    res = aggregate(n, H)
    k = res.center
    for v in range(G.n - 1):
        x, y = v % L - c, v // L - c
        if abs(x) <= k and abs(y) <= k:
            assert res.heights[x + k, y + k] == final[v]
            assert res.odometer[x + k, y + k] == odo.counts[v]
        else:
            assert odo.counts[v] == 0


def test_symmetry():
    res = aggregate(5000, 0)
    assert np.array_equal(res.odometer, res.odometer[::-1])
    assert np.array_equal(res.odometer, res.odometer.T)


def test_inner_ball():
    assert inner_ball_radius(10**5, 0) == pytest.approx((10**5 / np.pi) ** 0.5 / 3**0.5 - 10)
    res = aggregate(20_000, 0)
    assert contains_ball(res, inner_ball_radius(20_000, 0))
    assert not contains_ball(res, 10_000)


def test_window_cap():
    with pytest.raises(WindowOverflowError):
        aggregate(10**6, 0, window=11, cap=63)


def test_background_must_be_subcritical():
    with pytest.raises(ValueError):
        aggregate(10, -4)
