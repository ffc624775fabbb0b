import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cmekit.model import PropensitySpec, ReactionModel
from cmekit.statespace import StateSpace


def test_isomer_small_box_indexing():
    space = StateSpace((2, 2))
    assert space.size == 9
    assert space.index_of([0, 0]) == 1
    assert space.index_of([0, 1]) == 4
    assert space.state_of(2) == (1, 0)
    assert space.state_of(9) == (2, 2)
    expected = [(0, 0), (1, 0), (2, 0), (0, 1), (1, 1), (2, 1), (0, 2), (1, 2), (2, 2)]
    assert [space.state_of(j) for j in range(1, 10)] == expected
    assert [tuple(s) for s in space.states] == expected


def test_schlogl_small_box_indexing():
    space = StateSpace((5,))
    assert space.index_of([3]) == 4
    assert space.state_of(1) == (0,)


def test_offsets(small_isomer, small_schlogl):
    model, space = small_isomer
    assert space.reaction_offsets(model) == (2, -2)
    model, space = small_schlogl
    assert space.reaction_offsets(model) == (1, -1, 1, -1)


def test_in_bounds():
    assert StateSpace((80, 80)).in_bounds([80, 80])
    assert not StateSpace((80, 80)).in_bounds([81, 0])
    assert not StateSpace((900,)).in_bounds([-1])


def test_out_of_range():
    space = StateSpace((2, 2))
    with pytest.raises(IndexError):
        space.index_of([3, 0])
    with pytest.raises(IndexError):
        space.state_of(0)
    with pytest.raises(IndexError):
        space.state_of(10)


def test_strides():
    space = StateSpace((3, 4, 2))
    assert space.strides == (1, 4, 20)
    assert space.size == 4 * 5 * 3


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(0, 9), min_size=1, max_size=4).filter(
    lambda caps: np.prod([c + 1 for c in caps]) <= 10**4))
def test_bijection_exhaustive(caps):
    space = StateSpace(tuple(caps))
    for j in range(1, space.size + 1):
        assert space.index_of(space.state_of(j)) == j
    seen = set()
    for x in itertools.product(*[range(c + 1) for c in caps]):
        j = space.index_of(x)
        assert space.state_of(j) == x
        seen.add(j)
    assert seen == set(range(1, space.size + 1))
    assert np.array_equal(space.indices_0(space.states), np.arange(space.size))


@settings(max_examples=30, deadline=None)
@given(
    st.lists(st.integers(1, 4), min_size=1, max_size=3),
    st.data(),
)
def test_offset_identity(caps, data):
    n = len(caps)
    v = data.draw(
        st.lists(st.integers(-2, 2), min_size=n, max_size=n).filter(any)
    )
    model = ReactionModel(
        species_names=tuple(f"S{i}" for i in range(n)),
        caps=tuple(caps),
        stoich=tuple((vi,) for vi in v),
        propensities=(PropensitySpec(1.0),),
    )
    space = StateSpace.for_model(model)
    (d,) = space.reaction_offsets(model)
    for x in itertools.product(*[range(c + 1) for c in caps]):
        prev = [xi - vi for xi, vi in zip(x, v)]
        if space.in_bounds(prev):
            assert space.index_of(x) - space.index_of(prev) == d
