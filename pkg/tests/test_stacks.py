import random

import pytest

from sandlab import randgraphs
from sandlab.graph import build_digraph
from sandlab.rotor import chip_add_rotor
from sandlab.stacks import (
    StackError,
    cycle_pop,
    find_cycle,
    is_acyclic,
    loop_erase,
    make_stacks,
    periodic_stacks,
    pop,
    pop_to_acyclic,
    reverse_pop,
    rotor_path,
    stack_chip_add,
    stack_chip_add_inverse,
)


def pair_with_sink():
    return build_digraph(3, [(0, 1), (0, 2), (1, 0), (1, 2)], sink=2)


def random_stacks(rng, G):
    base, off = [], []
    for d in G.outdeg:
        if d == 0:
            base.append(())
            off.append(0)
            continue
        seq = list(range(d)) + [rng.randrange(d) for _ in range(rng.randrange(3))]
        rng.shuffle(seq)
        base.append(seq)
        off.append(rng.randrange(-5, 5))
    return make_stacks(G, base, off)


def test_pop_round_trip():
    G = pair_with_sink()
    st = periodic_stacks(G, (0, 1, -1))
    assert reverse_pop(pop(st, 0), 0) == st


def test_period_one_pop():
    G = build_digraph(2, [(0, 1)], sink=1)
    st = periodic_stacks(G, (0, -1))
    assert pop(st, 0).rotor() == st.rotor()


def test_period_two_pop():
    G = build_digraph(2, [(0, 1), (0, 1)], sink=1)
    st = make_stacks(G, [(0, 1), ()], [0, 0])
    assert pop(st, 0).rotor() == (1, -1)


def test_offsets_are_periodic():
    G = pair_with_sink()
    a = make_stacks(G, [(0, 1), (1, 0), ()], [0, 1, 0])
    b = make_stacks(G, [(0, 1), (1, 0), ()], [4, -1, 0])
    assert a == b and hash(a) == hash(b)


def test_stack_must_cover_every_edge():
    with pytest.raises(StackError):
        make_stacks(pair_with_sink(), [(0, 0), (0, 1), ()], [0, 0, 0])


def test_cycle_pop_pair_with_sink():
    G = pair_with_sink()
    st = periodic_stacks(G, (0, 0, -1))  # 0 -> 1 -> 0
    assert find_cycle(G, st, 0) == [0, 1]
    popped = cycle_pop(G, st, [0, 1])
    assert popped.offset == (-1, -1, 0)
    assert popped.rotor() == (1, 1, -1)  # both at the sink edge
    assert cycle_pop(G, st, [0]) == st  # not a rotor cycle
    final, cycles = pop_to_acyclic(G, st)
    assert final == popped and cycles == [(0, 1)]


def test_acyclic_unchanged():
    G = pair_with_sink()
    st = periodic_stacks(G, (1, 1, -1))
    assert is_acyclic(G, st)
    assert pop_to_acyclic(G, st) == (st, [])


def test_periodic_stacks_match_rotor_router():
    rng = random.Random(0)
    for _ in range(100):
        G = randgraphs.multidigraph_with_sink(rng)
        rho = randgraphs.rotor(rng, G)
        v = rng.choice(G.non_sink)
        st, _ = stack_chip_add(G, periodic_stacks(G, rho), v)
        assert st.rotor() == chip_add_rotor(G, rho, v)


def test_popping_is_confluent():
    rng = random.Random(1)
    for _ in range(100):
        G = randgraphs.multidigraph_with_sink(rng)
        st = random_stacks(rng, G)
        a = pop_to_acyclic(G, st)[0]
        b = pop_to_acyclic(G, st, seed=rng.randrange(10**6))[0]
        assert a == b and is_acyclic(G, a)


def test_chip_addition_commutes_with_cycle_pop():
    rng = random.Random(2)
    checked = 0
    for _ in range(300):
        G = randgraphs.multidigraph_with_sink(rng)
        st = random_stacks(rng, G)
        cyc = find_cycle(G, st, rng.choice(G.non_sink))
        if not cyc:
            continue
        v = rng.choice(G.non_sink)
        lhs = stack_chip_add(G, cycle_pop(G, st, cyc), v)[0]
        rhs = cycle_pop(G, stack_chip_add(G, st, v)[0], cyc)
        assert lhs == rhs
        checked += 1
    assert checked > 20


def test_inverse_round_trip_and_loop_erasure():
    rng = random.Random(3)
    for _ in range(100):
        G = randgraphs.multidigraph_with_sink(rng)
        st = pop_to_acyclic(G, random_stacks(rng, G))[0]
        v = rng.choice(G.non_sink)
        pre = stack_chip_add_inverse(G, st, v)
        assert is_acyclic(G, pre)
        fwd, walk = stack_chip_add(G, pre, v)
        assert fwd == st
        assert rotor_path(G, fwd, v) == loop_erase(walk)


def test_inverse_needs_acyclic():
    G = pair_with_sink()
    with pytest.raises(StackError):
        stack_chip_add_inverse(G, periodic_stacks(G, (0, 0, -1)), 0)


def test_inverse_on_single_edge():
    G = build_digraph(2, [(0, 1), (0, 1)], sink=1)
    st = make_stacks(G, [(0, 1), ()], [0, 0])
    pre = stack_chip_add_inverse(G, st, 0)
    assert pre == reverse_pop(st, 0)
    assert stack_chip_add(G, pre, 0)[0] == st


@pytest.mark.parametrize("path,erased", [
    ([1, 2, 3], [1, 2, 3]),
    ["abas", ["a", "s"]],
    ["abcbs", ["a", "b", "s"]],
])
def test_loop_erase(path, erased):
    assert loop_erase(list(path)) == erased
