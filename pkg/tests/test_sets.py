import numpy as np
import pytest
from hypothesis import given, strategies as st

from atlkf.sets import PairSet, StateSet

N = 9
bitsets = st.lists(st.booleans(), min_size=N, max_size=N).map(lambda b: StateSet(np.array(b)))


@given(bitsets, bitsets)
def test_de_morgan(a, b):
    assert ~(a | b) == (~a & ~b)
    assert ~(a & b) == (~a | ~b)
    assert ~~a == a
    assert a - b == a & ~b
    assert (a ^ b) == ((a - b) | (b - a))


@given(bitsets, bitsets)
def test_order_and_size(a, b):
    assert (a & b) <= a <= (a | b)
    assert len(a | b) + len(a & b) == len(a) + len(b)
    assert list(a) == sorted(a.indices())
    assert (hash(a) == hash(StateSet(a.bits))) and a == StateSet(a.bits)


def test_constructors():
    assert StateSet.of(4, [1, 3]).indices() == [1, 3]
    assert len(StateSet.full(4)) == 4 and not StateSet.empty(4)
    with pytest.raises(ValueError):
        StateSet.of(3, [0]) | StateSet.of(4, [0])
    with pytest.raises(ValueError):
        StateSet(np.zeros((2, 2), dtype=bool))


def test_bits_are_immutable():
    s = StateSet.of(3, [0])
    with pytest.raises(ValueError):
        s.bits[1] = True


def test_pair_sets(m2):
    sp = m2.space((0,))
    full = PairSet.all_enabled(sp)
    assert len(full) == 4
    b = PairSet.of(sp, [(0, (1,)), (1, (1,))])
    assert b <= full and (full - b) | b == full
    assert b.states() == m2.all_states
    assert b.actions_at(0) == [(1,)]
    assert sorted(b) == [(0, (1,)), (1, (1,))]
    assert (0, (1,)) in b and (0, (0,)) not in b
    with pytest.raises(ValueError):
        PairSet(sp, np.zeros((2, 3), dtype=bool))
