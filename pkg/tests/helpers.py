from cmekit.model import InitialCondition, PropensitySpec, ReactionModel


def toy_noncommuting():
    """0 -> X1, X1 -> X2, X2 -> 0 on a 10 x 10 box."""
    return ReactionModel(
        species_names=("A", "B"),
        caps=(10, 10),
        stoich=((1, -1, 0), (0, 1, -1)),
        propensities=(
            PropensitySpec(3.0),
            PropensitySpec(1.0, ((0, 1),)),
            PropensitySpec(1.5, ((1, 1),)),
        ),
        name="toy",
    ), InitialCondition((3, 2))


def birth_only(rate=2.0, cap=40):
    return ReactionModel(
        species_names=("X",),
        caps=(cap,),
        stoich=((1,),),
        propensities=(PropensitySpec(rate),),
        name="birth",
    )


def production_chain(cap=40):
    """0 -> X1 at constant rate, X1 -> X1 + X2 at rate x1.

    Neither channel's propensity depends on the species it changes, so a
    single-reaction exponential is exactly a Poisson shift.
    """
    return ReactionModel(
        species_names=("X1", "X2"),
        caps=(cap, cap),
        stoich=((1, 0), (0, 1)),
        propensities=(PropensitySpec(2.0), PropensitySpec(1.5, ((0, 1),))),
        name="chain",
    )
