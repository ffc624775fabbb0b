import itertools
import math

import pytest

from cmekit.model import (
    ModelError,
    PropensitySpec,
    ReactionModel,
    builtin_isomer,
    builtin_schlogl,
    format_model,
    parse_model,
    propensity,
    total_propensity,
)


def test_isomer_propensity(isomer):
    assert propensity(isomer, 1, [40, 40]) == 400
    assert total_propensity(isomer, [40, 40]) == 800


@pytest.mark.parametrize(
    "r, expected",
    [
        (1, 933.75),  # (c1/2) N1 x (x-1)
        (2, 257.30),  # (c2/6) x (x-1) (x-2)
        (3, 200.0),  # c3 N2
        (4, 875.0),  # c4 x
    ],
)
def test_schlogl_propensities_at_250(schlogl, r, expected):
    direct = {
        1: 3e-7 / 2 * 1e5 * 250 * 249,
        2: 1e-4 / 6 * 250 * 249 * 248,
        3: 1e-3 * 2e5,
        4: 3.5 * 250,
    }[r]
    assert propensity(schlogl, r, [250]) == pytest.approx(direct, rel=1e-13)
    assert propensity(schlogl, r, [250]) == pytest.approx(expected, rel=1e-12)


def test_schlogl_total_at_zero(schlogl):
    assert total_propensity(schlogl, [0]) == 200


def test_below_multiplicity_is_zero(schlogl):
    assert propensity(schlogl, 1, [1]) == 0
    assert propensity(schlogl, 2, [2]) == 0
    assert propensity(schlogl, 4, [0]) == 0


def test_all_consuming_reactions_vanish_at_origin(isomer):
    assert total_propensity(isomer, [0, 0]) == 0


def test_bad_reaction_index(isomer):
    with pytest.raises(IndexError):
        propensity(isomer, 3, [1, 1])
    with pytest.raises(IndexError):
        propensity(isomer, 0, [1, 1])


def test_exact_integer_combinatorics():
    spec = PropensitySpec(1.0, ((0, 3),))
    x = 10**6
    assert spec.evaluate([x]) == float(math.comb(x, 3))


def test_total_propensity_exhaustive_small_box():
    model = ReactionModel(
        species_names=("A", "B", "C"),
        caps=(5, 4, 3),
        stoich=((-1, 1, -2), (1, -1, 0), (0, 0, 1)),
        propensities=(
            PropensitySpec(1.5, ((0, 1),)),
            PropensitySpec(0.25, ((1, 1),)),
            PropensitySpec(0.7, ((0, 2), (2, 1))),
        ),
    )
    for x in itertools.product(range(6), range(5), range(4)):
        values = [propensity(model, r, x) for r in (1, 2, 3)]
        assert all(v >= 0 for v in values)
        assert total_propensity(model, x) == sum(values)
        if x[0] < 2 or x[2] < 1:
            assert values[2] == 0


def test_builtin_isomer():
    model, init, horizon = builtin_isomer()
    assert [row[0] for row in model.stoich] == [-1, 1]
    assert model.caps == (80, 80)
    assert init.state == (40, 40)
    assert horizon == 10


def test_builtin_schlogl():
    model, init, horizon = builtin_schlogl()
    assert model.stoich == ((1, -1, 1, -1),)
    assert model.caps == (900,)
    assert init.state == (250,)
    assert horizon == 4


@pytest.mark.parametrize("builtin", [builtin_isomer, builtin_schlogl])
def test_round_trip(builtin):
    model, init, horizon = builtin()
    text = format_model(model, init, horizon)
    parsed, init2, horizon2 = parse_model(text)
    assert parsed == model
    assert parsed.name == model.name
    assert init2 == init
    assert horizon2 == horizon
    assert format_model(parsed, init2, horizon2) == text


def test_parse_example():
    model, init, horizon = parse_model(
        """
        # dimerization
        species M cap 20
        species D cap 10
        init M 20
        reaction 0.5 : 2 M -> D
        reaction 1e-1 : D -> 2 M
        horizon 3.5
        """
    )
    assert model.stoich == ((-2, 2), (1, -1))
    assert model.propensities[0].orders == ((0, 2),)
    assert init.state == (20, 0)
    assert horizon == 3.5


@pytest.mark.parametrize(
    "text, message",
    [
        ("species X cap 5\nreaction -1 : X -> 0\n", "negative rate"),
        ("species X cap 5\nreaction 1 : Y -> 0\n", "unknown species"),
        ("species X cap -5\nreaction 1 : X -> 0\n", "negative cap"),
        ("species X cap 5\nreaction 1 X -> 0\n", "line 2"),
        ("species X cap 5\nreaction 1 : X -> X\n", "does not change"),
        ("species X cap 5\ninit X 6\nreaction 1 : X -> 0\n", "outside"),
        ("species X cap 5\nfoo bar\n", "unknown keyword"),
    ],
)
def test_parse_errors(text, message):
    with pytest.raises(ModelError, match=message):
        parse_model(text)


def test_zero_stoichiometry_rejected():
    with pytest.raises(ModelError):
        ReactionModel(("X",), (5,), ((0,),), (PropensitySpec(1.0),))
