"""Evolution of probability vectors under the truncated CME.

``expmv`` computes exp(tA) p by uniformization. The remaining functions
build exact and approximate (split) propagators on top of it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numba
import numpy as np
import scipy.sparse as sp
from scipy import special, stats

from .model import ReactionModel
from .operators import (
    Generator,
    StructuralError,
    assemble_frozen,
    assemble_generator,
    assemble_reaction_generators,
)
from .statespace import StateSpace, delta

UNIFORMIZATION_TOL = 1e-12
MAX_RATE_TIME = 500.0
CLAMP_TOL = 1e-12


class ProbabilityVector:
    """Dense probability vector over a state box.

    Components in [-1e-12, 0) are clamped to zero on construction and the
    clamped amount is recorded; anything more negative is an error.
    """

    __slots__ = ("values", "clamped_mass")

    def __init__(self, values, clamped_mass: float = 0.0):
        values = np.array(values, dtype=np.float64)
        neg = values < 0
        if np.any(neg):
            worst = values.min()
            if worst < -CLAMP_TOL:
                raise StructuralError(f"probability component {worst!r} below clamp tolerance")
            clamped_mass += float(-values[neg].sum())
            values[neg] = 0.0
        self.values = values
        self.clamped_mass = clamped_mass

    @property
    def mass(self) -> float:
        return math.fsum(self.values)

    def __len__(self):
        return self.values.size

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)

    def __repr__(self):
        return f"ProbabilityVector(size={self.values.size}, mass={self.mass:.15g})"


@dataclass(frozen=True)
class StepPlan:
    tau: float
    n: int
    horizon: float = field(init=False)

    def __post_init__(self):
        if not self.tau > 0:
            raise ValueError("tau must be positive")
        if self.n < 1:
            raise ValueError("need at least one substep")
        object.__setattr__(self, "horizon", self.tau * self.n)

    @classmethod
    def from_steps(cls, horizon: float, n: int) -> "StepPlan":
        return cls(horizon / n, n)

    @classmethod
    def from_tau(cls, horizon: float, tau: float) -> "StepPlan":
        n = int(round(horizon / tau))
        if n < 1 or abs(n * tau - horizon) > 1e-12 * max(abs(horizon), 1.0):
            raise ValueError(f"horizon {horizon} is not a multiple of tau {tau}")
        return cls(horizon / n, n)


def _as_matrix(A) -> sp.csr_matrix:
    m = A.matrix if isinstance(A, Generator) else A
    return sp.csr_matrix(m)


def _poisson_weights(lam_t: float, tol: float):
    kmax = int(stats.poisson.isf(tol, lam_t)) + 1 if lam_t > 0 else 0
    k = np.arange(kmax + 1)
    return np.exp(k * math.log(lam_t) - lam_t - special.gammaln(k + 1)) if lam_t > 0 else np.ones(1)


def expmv(A, p, t: float) -> ProbabilityVector:
    """exp(tA) p for a (sub-)generator A by uniformization.

    A must have non-negative off-diagonals and column sums <= 0. The series
    is truncated where the Poisson tail drops below 1e-12 (split across
    substeps, each with rate*time <= 500).
    """
    if t < 0:
        raise ValueError("negative time")
    m = _as_matrix(A)
    gen = A if isinstance(A, Generator) else Generator(sp.csc_matrix(m))
    gen.check(conservative=False)
    v = np.array(p, dtype=np.float64)
    if v.shape != (m.shape[0],):
        raise ValueError("vector length does not match the matrix")
    if np.any(v < -CLAMP_TOL):
        raise ValueError("negative probability input")
    lam = float(np.max(-gen.diagonal, initial=0.0))
    if t == 0 or lam == 0:
        return ProbabilityVector(v)

    n_sub = max(1, math.ceil(lam * t / MAX_RATE_TIME))
    weights = _poisson_weights(lam * t / n_sub, UNIFORMIZATION_TOL / n_sub)
    # P = I + A/lam, applied as v + (A v)/lam
    scaled = (m / lam).tocsr()
    for _ in range(n_sub):
        term = v
        acc = weights[0] * term
        for w in weights[1:]:
            term = term + scaled @ term
            acc += w * term
        v = acc
    return ProbabilityVector(v)


def exact_solution(model: ReactionModel, space: StateSpace, x0, T: float) -> ProbabilityVector:
    return expmv(assemble_generator(model, space), delta(space, x0), T)


def frozen_sum_solution(model: ReactionModel, space: StateSpace, x0, T: float) -> ProbabilityVector:
    """exp(T * sum of frozen matrices) applied to the point mass at x0."""
    parts = assemble_frozen(model, space, x0)
    total = sum((g.matrix for g in parts[1:]), parts[0].matrix)
    return expmv(Generator(sp.csc_matrix(total)), delta(space, x0), T)


def _apply_frozen_sequence(parts, rates, v, sequence):
    """Apply exp(w * Ā_r) for (r, w) in ``sequence``, rightmost factor first.

    exp(wĀ_r) = e^{w a_r} exp(w(Ā_r - a_r I)) where the shifted matrix is a
    sub-generator; the scalar factors (and Ā_0 = -a_0 I) are collected and
    applied once at the end to avoid overflow.
    """
    a0 = sum(rates)
    log_scale = 0.0
    for r, w in sequence:
        if r == 0:
            log_scale -= w * a0
            continue
        rate = rates[r - 1]
        shifted = parts[r].matrix - rate * sp.identity(parts[r].dim, format="csc")
        v = expmv(Generator(sp.csc_matrix(shifted)), v, w).values
        log_scale += w * rate
    return v * math.exp(log_scale)


def _modal_state(space, v):
    return space.state_of(int(np.argmax(v)) + 1)


def lie_product_solution(
    model: ReactionModel, space: StateSpace, x0, plan: StepPlan, refreeze: bool = False
) -> ProbabilityVector:
    """Product exp(τĀ_0) exp(τĀ_1) ... exp(τĀ_M) per substep.

    Ā_M acts first. With ``refreeze`` the freeze point for each later
    substep is the modal state of the current density.
    """
    m = model.n_reactions
    sequence = [(r, plan.tau) for r in range(m, -1, -1)]
    v = delta(space, x0)
    xbar = tuple(x0)
    for step in range(plan.n):
        if refreeze and step > 0:
            xbar = _modal_state(space, v)
        parts = assemble_frozen(model, space, xbar)
        rates = [spec.evaluate(xbar) for spec in model.propensities]
        v = _apply_frozen_sequence(parts, rates, v, sequence)
    return ProbabilityVector(v)


def strang_sequence(m: int, tau: float, half_centre: bool = False):
    """Palindromic factor order; the centre Ā_0 gets weight τ unless
    ``half_centre`` requests the τ/2 centre."""
    half = tau / 2
    centre = half if half_centre else tau
    return (
        [(r, half) for r in range(m, 0, -1)]
        + [(0, centre)]
        + [(r, half) for r in range(1, m + 1)]
    )


def strang_solution(
    model: ReactionModel,
    space: StateSpace,
    x0,
    plan: StepPlan,
    half_centre: bool = False,
) -> ProbabilityVector:
    parts = assemble_frozen(model, space, x0)
    rates = [spec.evaluate(x0) for spec in model.propensities]
    sequence = strang_sequence(model.n_reactions, plan.tau, half_centre)
    v = delta(space, x0)
    for _ in range(plan.n):
        v = _apply_frozen_sequence(parts, rates, v, sequence)
    return ProbabilityVector(v)


@numba.njit(cache=True)
def _column_sweep(indptr, indices, data, diag, tau, v):
    q = v.size
    for j in range(q):
        pj = v[j]
        if pj == 0.0:
            continue
        a0 = -diag[j]
        # S_j * tau
        st = tau if a0 == 0.0 else -math.expm1(-tau * a0) / a0
        f = st * pj
        for k in range(indptr[j], indptr[j + 1]):
            i = indices[k]
            if i == j:
                v[j] = pj + f * data[k]
            else:
                v[i] += f * data[k]
    return v


def column_factor_scale(a0: float, tau: float) -> float:
    """S_j = (1 - exp(-τ a0)) / (τ a0), with S_j = 1 when a0 = 0."""
    if a0 == 0:
        return 1.0
    return -math.expm1(-tau * a0) / (tau * a0)


def column_split_solution(model: ReactionModel, space: StateSpace, x0, plan: StepPlan) -> ProbabilityVector:
    """Per substep apply (I + S_j τ A_j) for j = 1..Q in ascending order."""
    A = assemble_generator(model, space)
    m = A.matrix
    diag = A.diagonal.copy()
    v = delta(space, x0)
    for _ in range(plan.n):
        v = _column_sweep(m.indptr, m.indices, m.data, diag, plan.tau, v)
    return ProbabilityVector(v)


def reaction_product_solution(model: ReactionModel, space: StateSpace, x0, plan: StepPlan) -> ProbabilityVector:
    """exp(τB_1) ... exp(τB_M) per substep, B_M acting first."""
    gens = assemble_reaction_generators(model, space)
    v = delta(space, x0)
    for _ in range(plan.n):
        for b in reversed(gens):
            v = expmv(b, v, plan.tau).values
    return ProbabilityVector(v)


def reaction_product_density(model: ReactionModel, space: StateSpace, x0, tau: float) -> ProbabilityVector:
    return reaction_product_solution(model, space, x0, StepPlan(tau, 1))
