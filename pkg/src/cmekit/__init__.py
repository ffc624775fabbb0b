"""Exponential and split propagators for the chemical master equation, with
SSA and tau-leap samplers."""

from .model import (
    InitialCondition,
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
from .operators import (
    Generator,
    StructuralError,
    assemble_channels,
    assemble_frozen,
    assemble_generator,
    assemble_reaction_generators,
    column_piece,
)
from .propagator import (
    ProbabilityVector,
    StepPlan,
    column_split_solution,
    exact_solution,
    expmv,
    frozen_sum_solution,
    lie_product_solution,
    reaction_product_density,
    reaction_product_solution,
    strang_solution,
)
from .samplers import (
    EnsembleResult,
    RngStream,
    TrajectoryResult,
    accelerated_half_split_step,
    accelerated_step,
    run_ensemble,
    sample_poisson,
    ssa_run,
    symmetric_accelerated_step,
    tau_leap_run,
)
from .statespace import StateSpace

__version__ = "0.1.0"
